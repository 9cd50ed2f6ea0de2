//! Closed-form decay bounds `n ↦ b(n)` used to certify limits.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Relative slack allowed when an observed quantity is compared with a bound.
pub const VERIFY_SLACK: f64 = 1e-12;

/// The grammar of admissible bounds. Every member is nonincreasing on
/// `n ≥ 1` and tends to 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", try_from = "DecayRepr")]
pub enum Decay {
    Zero,
    /// `c · n^(-p)`.
    Power { c: f64, p: f64 },
    /// `c · q^n`.
    Geometric { c: f64, q: f64 },
}

#[derive(Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
enum DecayRepr {
    Zero,
    Power { c: f64, p: f64 },
    Geometric { c: f64, q: f64 },
}

impl TryFrom<DecayRepr> for Decay {
    type Error = crate::error::Error;

    fn try_from(r: DecayRepr) -> Result<Decay> {
        match r {
            DecayRepr::Zero => Ok(Decay::Zero),
            DecayRepr::Power { c, p } => Decay::power(c, p),
            DecayRepr::Geometric { c, q } => Decay::geometric(c, q),
        }
    }
}

impl Decay {
    pub fn power(c: f64, p: f64) -> Result<Decay> {
        Decay::Power { c, p }.validated()
    }

    pub fn geometric(c: f64, q: f64) -> Result<Decay> {
        Decay::Geometric { c, q }.validated()
    }

    /// `1/n`.
    pub fn harmonic() -> Decay {
        Decay::Power { c: 1.0, p: 1.0 }
    }

    pub fn validated(self) -> Result<Decay> {
        match self {
            Decay::Zero => Ok(self),
            Decay::Power { c, p } if c.is_finite() && c >= 0.0 && p.is_finite() && p > 0.0 => {
                Ok(self)
            }
            Decay::Geometric { c, q } if c.is_finite() && c >= 0.0 && q > 0.0 && q < 1.0 => Ok(self),
            _ => Err(invalid(format!("not an admissible decay bound: {self:?}"))),
        }
    }

    pub fn eval(&self, n: usize) -> f64 {
        let n = n.max(1) as f64;
        match *self {
            Decay::Zero => 0.0,
            Decay::Power { c, p } => c * n.powf(-p),
            Decay::Geometric { c, q } => c * q.powf(n),
        }
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            Decay::Zero => true,
            Decay::Power { c, .. } | Decay::Geometric { c, .. } => c == 0.0,
        }
    }

    pub fn scale(&self, k: f64) -> Decay {
        assert!(k >= 0.0 && k.is_finite(), "decay bounds scale by finite k >= 0");
        match *self {
            Decay::Zero => Decay::Zero,
            Decay::Power { c, p } => Decay::Power { c: c * k, p },
            Decay::Geometric { c, q } => Decay::Geometric { c: c * k, q },
        }
    }

    /// A bound dominating `self(n) + other(n)` for every `n ≥ 1`.
    pub fn sum(&self, other: &Decay) -> Decay {
        match (*self, *other) {
            (Decay::Zero, d) | (d, Decay::Zero) => d,
            (Decay::Power { c: c1, p: p1 }, Decay::Power { c: c2, p: p2 }) => Decay::Power {
                c: c1 + c2,
                p: p1.min(p2),
            },
            (Decay::Geometric { c: c1, q: q1 }, Decay::Geometric { c: c2, q: q2 }) => {
                Decay::Geometric {
                    c: c1 + c2,
                    q: q1.max(q2),
                }
            }
            (Decay::Power { c, p }, Decay::Geometric { c: cg, q })
            | (Decay::Geometric { c: cg, q }, Decay::Power { c, p }) => {
                // c_g q^n ≤ c_g · K · n^(-p) with K = max_n n^p q^n
                let n_star = (p / -q.ln()).max(1.0);
                let k = [n_star.floor().max(1.0), n_star.ceil()]
                    .iter()
                    .map(|n| n.powf(p) * q.powf(*n))
                    .fold(0.0, f64::max);
                Decay::Power { c: c + cg * k, p }
            }
        }
    }

    /// `min(1, b(n))`, the mixing weight used by convex-combination families.
    pub fn weight(&self, n: usize) -> f64 {
        self.eval(n).min(1.0)
    }

    /// Smallest `n` with `b(n) ≤ target`, searching up to `limit`.
    pub fn index_below(&self, target: f64, limit: usize) -> Option<usize> {
        if self.eval(limit) > target {
            return None;
        }
        let (mut lo, mut hi) = (1usize, limit);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if self.eval(mid) <= target {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Some(lo)
    }
}

/// A decay bound together with what it bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayCertificate {
    #[serde(flatten)]
    pub bound: Decay,
    #[serde(default)]
    pub description: String,
}

/// The first index at which an observed quantity exceeded its bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CertificateBreach {
    pub n: usize,
    pub observed: f64,
    pub bound: f64,
}

impl DecayCertificate {
    pub fn new(bound: Decay, description: impl Into<String>) -> Result<Self> {
        Ok(DecayCertificate {
            bound: bound.validated()?,
            description: description.into(),
        })
    }

    pub fn zero(description: impl Into<String>) -> Self {
        DecayCertificate {
            bound: Decay::Zero,
            description: description.into(),
        }
    }

    pub fn eval(&self, n: usize) -> f64 {
        self.bound.eval(n)
    }

    pub fn admits(&self, n: usize, observed: f64) -> bool {
        let b = self.eval(n);
        observed <= b + VERIFY_SLACK * (1.0 + b)
    }

    /// Checks `observed(n) ≤ bound(n)` for `n = 1..=horizon`.
    pub fn verify(
        &self,
        horizon: usize,
        mut observed: impl FnMut(usize) -> Result<f64>,
    ) -> Result<Option<CertificateBreach>> {
        for n in 1..=horizon {
            let value = observed(n)?;
            if !self.admits(n, value) {
                return Ok(Some(CertificateBreach {
                    n,
                    observed: value,
                    bound: self.eval(n),
                }));
            }
        }
        Ok(None)
    }

    /// Like [`verify`](Self::verify) over precomputed values `values[n - 1]`.
    pub fn verify_values(&self, values: &[f64]) -> Option<CertificateBreach> {
        values.iter().enumerate().find_map(|(i, &v)| {
            (!self.admits(i + 1, v)).then(|| CertificateBreach {
                n: i + 1,
                observed: v,
                bound: self.eval(i + 1),
            })
        })
    }
}
