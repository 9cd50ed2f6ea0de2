//! Sequence families `n ↦ mₙ`, `n ↦ fₙ`, `n ↦ Γₙ` with declared limits and
//! decay certificates.
//!
//! A family is a closed-form rule, so `at(n)` is a pure function of the rule
//! and `n`. Beside the certificates, each family exposes tail metadata
//! (`*_from(n0)` bounds valid for every `n ≥ n0`) that the theorem checkers
//! use to extend finite-horizon evidence to all indices.

use rand::Rng;

use crate::certificate::{Decay, DecayCertificate};
use crate::convex::Polytope;
use crate::error::{invalid, Error, Result};
use crate::measure::{sup_set_gap, AtomFunction, AtomSpace, SignedMeasure};
use crate::setvalued::MultiMap;

#[derive(Clone, Debug)]
enum MeasureRule {
    Constant(SignedMeasure),
    /// `(1 - aₙ)·base + aₙ·target`.
    ConvexMix {
        base: SignedMeasure,
        target: SignedMeasure,
        rate: Decay,
    },
    /// `base + aₙ·direction`.
    Perturbed {
        base: SignedMeasure,
        direction: SignedMeasure,
        rate: Decay,
    },
    Rademacher {
        level: u32,
    },
    /// Mass `height/n` on atom `n mod N`.
    MassEscape {
        height: f64,
    },
    Combination(Vec<(f64, MeasureFamily)>),
    JordanPos(Box<MeasureFamily>),
    JordanNeg(Box<MeasureFamily>),
}

/// `n ↦ mₙ` with limit `m`.
#[derive(Clone, Debug)]
pub struct MeasureFamily {
    name: String,
    space: AtomSpace,
    rule: MeasureRule,
    limit: SignedMeasure,
    setwise_cert: Option<DecayCertificate>,
    tv_cert: Option<DecayCertificate>,
    nonneg: bool,
    max_index: Option<usize>,
}

fn check_index(n: usize, max: Option<usize>) -> Result<()> {
    match max {
        _ if n == 0 => Err(Error::IndexOutOfRange {
            index: n,
            max: max.unwrap_or(usize::MAX),
        }),
        Some(max) if n > max => Err(Error::IndexOutOfRange { index: n, max }),
        _ => Ok(()),
    }
}

fn cert(bound: Decay, description: &str) -> Option<DecayCertificate> {
    Some(DecayCertificate {
        bound,
        description: description.into(),
    })
}

impl MeasureFamily {
    fn build(name: &str, space: AtomSpace, rule: MeasureRule, limit: SignedMeasure) -> Self {
        MeasureFamily {
            name: name.into(),
            space,
            rule,
            limit,
            setwise_cert: None,
            tv_cert: None,
            nonneg: false,
            max_index: None,
        }
    }

    /// `mₙ = m` for every `n`.
    pub fn constant(m: &SignedMeasure) -> Self {
        let mut f = Self::build("constant", m.space().clone(), MeasureRule::Constant(m.clone()), m.clone());
        f.tv_cert = cert(Decay::Zero, "|mₙ - m|(Ω) = 0");
        f.setwise_cert = cert(Decay::Zero, "mₙ = m");
        f.nonneg = m.is_nonnegative();
        f
    }

    /// `mₙ = (1 - aₙ)·m + aₙ·mu` with `aₙ = min(1, rate(n))`; converges to `m`.
    pub fn convex_mix(m: &SignedMeasure, mu: &SignedMeasure, rate: Decay) -> Result<Self> {
        m.space().check_same(mu.space())?;
        m.require_nonnegative()?;
        mu.require_nonnegative()?;
        let rate = rate.validated()?;
        let tv = mu.sub(m)?.total_variation();
        let gap = sup_set_gap(mu, m)?;
        let mut f = Self::build(
            "convex_mix",
            m.space().clone(),
            MeasureRule::ConvexMix {
                base: m.clone(),
                target: mu.clone(),
                rate,
            },
            m.clone(),
        );
        f.tv_cert = cert(rate.scale(tv), "aₙ · |mu - m|(Ω)");
        f.setwise_cert = cert(rate.scale(gap), "aₙ · sup_A |mu(A) - m(A)|");
        f.nonneg = true;
        Ok(f)
    }

    /// `mₙ = (1 - aₙ)·m`, dominated by `m`.
    pub fn dominated(m: &SignedMeasure, rate: Decay) -> Result<Self> {
        let mut f = Self::convex_mix(m, &SignedMeasure::zero(m.space()), rate)?;
        f.name = "dominated".into();
        Ok(f)
    }

    /// `mₙ = m + aₙ·direction`; signed in general.
    pub fn perturbed(m: &SignedMeasure, direction: &SignedMeasure, rate: Decay) -> Result<Self> {
        m.space().check_same(direction.space())?;
        let rate = rate.validated()?;
        let a1 = rate.weight(1);
        let nonneg = m
            .weights()
            .iter()
            .zip(direction.weights())
            .all(|(b, d)| *b >= 0.0 && b + a1 * d.min(0.0) >= 0.0);
        let jordan = direction.jordan();
        let mut f = Self::build(
            "perturbed",
            m.space().clone(),
            MeasureRule::Perturbed {
                base: m.clone(),
                direction: direction.clone(),
                rate,
            },
            m.clone(),
        );
        f.tv_cert = cert(rate.scale(direction.total_variation()), "aₙ · |direction|(Ω)");
        f.setwise_cert = cert(
            rate.scale(jordan.pos.total().max(jordan.neg.total())),
            "aₙ · max(direction⁺(Ω), direction⁻(Ω))",
        );
        f.nonneg = nonneg;
        Ok(f)
    }

    /// Rademacher densities on the `2^level` dyadic cells of `[0, 1]`:
    /// `mₖ(E) = ∫_E r_k dλ` for `k ≤ level`, with limit 0. No certificate is
    /// attached: `|mₖ|(Ω) = 1` for every `k`.
    pub fn rademacher(level: u32) -> Result<Self> {
        if !(1..=16).contains(&level) {
            return Err(invalid(format!("rademacher level must be in 1..=16, got {level}")));
        }
        let space = AtomSpace::new(1 << level)?;
        let limit = SignedMeasure::zero(&space);
        let mut f = Self::build("rademacher", space, MeasureRule::Rademacher { level }, limit);
        f.max_index = Some(level as usize);
        Ok(f)
    }

    /// Mass `height/n` on the atom `n mod N`, tending to 0 in total variation.
    pub fn mass_escape(space: &AtomSpace, height: f64) -> Result<Self> {
        if space.n_atoms() < 2 {
            return Err(invalid("mass escape needs at least two atoms"));
        }
        if !(height > 0.0 && height.is_finite()) {
            return Err(invalid(format!("mass escape height must be positive, got {height}")));
        }
        let mut f = Self::build(
            "mass_escape",
            space.clone(),
            MeasureRule::MassEscape { height },
            SignedMeasure::zero(space),
        );
        f.tv_cert = cert(Decay::Power { c: height, p: 1.0 }, "height / n");
        f.setwise_cert = f.tv_cert.clone();
        f.nonneg = true;
        Ok(f)
    }

    /// `Σ c_k · family_k`, with the limit and certificates combined linearly.
    pub fn combination(parts: Vec<(f64, MeasureFamily)>) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| invalid("a combination needs at least one part"))?;
        let space = first.1.space.clone();
        let mut limit = SignedMeasure::zero(&space);
        let mut tv = Some(Decay::Zero);
        let mut setwise = Some(Decay::Zero);
        let mut nonneg = true;
        let mut max_index: Option<usize> = None;
        for (c, fam) in &parts {
            fam.space.check_same(&space)?;
            if !c.is_finite() {
                return Err(invalid("combination coefficients must be finite"));
            }
            limit = limit.add(&fam.limit.scale(*c))?;
            tv = tv.zip(fam.tv_cert.as_ref()).map(|(t, f)| t.sum(&f.bound.scale(c.abs())));
            setwise = setwise
                .zip(fam.setwise_bound())
                .map(|(s, f)| s.sum(&f.scale(c.abs())));
            nonneg &= *c >= 0.0 && fam.nonneg;
            max_index = match (max_index, fam.max_index) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
        }
        let mut f = Self::build("combination", space, MeasureRule::Combination(parts), limit);
        f.tv_cert = tv.and_then(|b| cert(b, "Σ |c_k| · tv_k"));
        f.setwise_cert = setwise.and_then(|b| cert(b, "Σ |c_k| · setwise_k"));
        f.nonneg = nonneg;
        f.max_index = max_index;
        Ok(f)
    }

    /// `n ↦ mₙ⁺` with limit `m⁺`; `|mₙ⁺ - m⁺|(Ω) ≤ |mₙ - m|(Ω)` carries
    /// the total-variation certificate over.
    pub fn jordan_pos(&self) -> Self {
        self.jordan_part(true)
    }

    /// `n ↦ mₙ⁻` with limit `m⁻`.
    pub fn jordan_neg(&self) -> Self {
        self.jordan_part(false)
    }

    fn jordan_part(&self, positive: bool) -> Self {
        let j = self.limit.jordan();
        let (limit, rule, suffix) = if positive {
            (j.pos, MeasureRule::JordanPos(Box::new(self.clone())), "+")
        } else {
            (j.neg, MeasureRule::JordanNeg(Box::new(self.clone())), "-")
        };
        let mut f = Self::build(&format!("{}{suffix}", self.name), self.space.clone(), rule, limit);
        f.tv_cert = self.tv_cert.clone();
        f.setwise_cert = self.tv_cert.clone();
        f.nonneg = true;
        f.max_index = self.max_index;
        f
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Replaces or removes the setwise certificate.
    pub fn with_setwise_cert(mut self, c: Option<DecayCertificate>) -> Self {
        self.setwise_cert = c;
        self
    }

    /// Replaces or removes the total-variation certificate.
    pub fn with_tv_cert(mut self, c: Option<DecayCertificate>) -> Self {
        self.tv_cert = c;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn space(&self) -> &AtomSpace {
        &self.space
    }

    pub fn limit(&self) -> &SignedMeasure {
        &self.limit
    }

    pub fn setwise_cert(&self) -> Option<&DecayCertificate> {
        self.setwise_cert.as_ref()
    }

    pub fn tv_cert(&self) -> Option<&DecayCertificate> {
        self.tv_cert.as_ref()
    }

    /// Claimed nonnegativity of every `mₙ`.
    pub fn nonneg(&self) -> bool {
        self.nonneg
    }

    /// Last valid index, for finite families.
    pub fn max_index(&self) -> Option<usize> {
        self.max_index
    }

    /// Setwise bound from the setwise certificate, else the tv one.
    pub fn setwise_bound(&self) -> Option<Decay> {
        self.setwise_cert
            .as_ref()
            .or(self.tv_cert.as_ref())
            .map(|c| c.bound)
    }

    pub fn at(&self, n: usize) -> Result<SignedMeasure> {
        check_index(n, self.max_index)?;
        match &self.rule {
            MeasureRule::Constant(m) => Ok(m.clone()),
            MeasureRule::ConvexMix { base, target, rate } => base.lerp(target, rate.weight(n)),
            MeasureRule::Perturbed {
                base,
                direction,
                rate,
            } => base.add(&direction.scale(rate.weight(n))),
            MeasureRule::Rademacher { level } => {
                let cells = 1usize << level;
                let shift = level - n as u32;
                let w = 1.0 / cells as f64;
                let weights = (0..cells)
                    .map(|j| if (j >> shift) & 1 == 0 { w } else { -w })
                    .collect();
                SignedMeasure::on(&self.space, weights)
            }
            MeasureRule::MassEscape { height } => {
                let mut weights = vec![0.0; self.space.n_atoms()];
                weights[n % self.space.n_atoms()] = height / n as f64;
                SignedMeasure::on(&self.space, weights)
            }
            MeasureRule::Combination(parts) => {
                let mut acc = SignedMeasure::zero(&self.space);
                for (c, fam) in parts {
                    acc = acc.add(&fam.at(n)?.scale(*c))?;
                }
                Ok(acc)
            }
            MeasureRule::JordanPos(inner) => Ok(inner.at(n)?.jordan().pos),
            MeasureRule::JordanNeg(inner) => Ok(inner.at(n)?.jordan().neg),
        }
    }

    /// A bound on `|mₙ|(Ω)` valid for every `n ≥ n0`.
    pub fn mass_bound_from(&self, n0: usize) -> Option<f64> {
        let n0 = n0.max(1);
        let base = self.limit.total_variation();
        match &self.rule {
            MeasureRule::Rademacher { .. } => Some(1.0),
            MeasureRule::MassEscape { height } => Some(height / n0 as f64),
            _ => {
                if let Some(c) = &self.tv_cert {
                    Some(base + c.eval(n0))
                } else {
                    self.setwise_cert.as_ref().map(|c| base + 2.0 * c.eval(n0))
                }
            }
        }
    }

    /// A positive lower bound on every nonzero `|mₙ|` atom weight, `n ≥ n0`.
    pub fn atom_floor_from(&self, n0: usize) -> Option<f64> {
        let floor = |lo: &dyn Fn(usize) -> Option<f64>| -> Option<f64> {
            let mut best = f64::INFINITY;
            for i in 0..self.space.n_atoms() {
                {
                    let v = lo(i)?;
                    best = best.min(v);
                }
            }
            Some(best).filter(|b| *b > 0.0)
        };
        match &self.rule {
            MeasureRule::Constant(m) => Some(m.abs().min_positive_weight().unwrap_or(f64::INFINITY)),
            MeasureRule::Rademacher { level } => Some(1.0 / (1u64 << level) as f64),
            MeasureRule::ConvexMix { base, target, rate }
            | MeasureRule::Perturbed {
                base,
                direction: target,
                rate,
            } => {
                let a = rate.weight(n0.max(1));
                let mix = matches!(self.rule, MeasureRule::ConvexMix { .. });
                floor(&|i| {
                    let b = base.weight(i);
                    let t = target.weight(i);
                    // the weight is affine in aₙ ∈ [0, a]
                    let end = if mix { (1.0 - a) * b + a * t } else { b + a * t };
                    if b == 0.0 && end == 0.0 {
                        Some(f64::INFINITY)
                    } else if b * end > 0.0 {
                        Some(b.abs().min(end.abs()))
                    } else {
                        None
                    }
                })
            }
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
enum FunctionRule {
    Constant(AtomFunction),
    /// `base + aₙ·direction`.
    Perturbed {
        base: AtomFunction,
        direction: AtomFunction,
        rate: Decay,
    },
    /// `height·n` on atom `n mod N`, 0 elsewhere.
    MassEscape { height: f64 },
    /// `slope·n` everywhere.
    Linear { slope: f64 },
    /// `t ↦ s(u, Γₙ(t))`.
    Support {
        multi: Box<MultiFamily>,
        direction: Vec<f64>,
    },
}

/// `n ↦ fₙ` with limit `f`.
#[derive(Clone, Debug)]
pub struct FunctionFamily {
    name: String,
    space: AtomSpace,
    dim: usize,
    rule: FunctionRule,
    limit: AtomFunction,
    inmeasure_cert: Option<DecayCertificate>,
    max_index: Option<usize>,
}

impl FunctionFamily {
    fn build(name: &str, rule: FunctionRule, limit: AtomFunction) -> Self {
        FunctionFamily {
            name: name.into(),
            space: limit.space().clone(),
            dim: limit.dim(),
            rule,
            limit,
            inmeasure_cert: None,
            max_index: None,
        }
    }

    pub fn constant(f: &AtomFunction) -> Self {
        let mut fam = Self::build("constant", FunctionRule::Constant(f.clone()), f.clone());
        fam.inmeasure_cert = cert(Decay::Zero, "fₙ = f");
        fam
    }

    /// `fₙ = f + aₙ·g`; converges uniformly to `f`.
    pub fn perturbed(f: &AtomFunction, g: &AtomFunction, rate: Decay) -> Result<Self> {
        f.space().check_same(g.space())?;
        if f.dim() != g.dim() {
            return Err(Error::DimensionMismatch {
                expected: f.dim(),
                got: g.dim(),
            });
        }
        Ok(Self::build(
            "perturbed",
            FunctionRule::Perturbed {
                base: f.clone(),
                direction: g.clone(),
                rate: rate.validated()?,
            },
            f.clone(),
        ))
    }

    /// `fₙ = height·n` on the atom `n mod N`; limit 0. The explicit in-measure
    /// certificate is 0, valid against a limit measure that is 0.
    pub fn mass_escape(space: &AtomSpace, height: f64) -> Result<Self> {
        if space.n_atoms() < 2 || !(height > 0.0 && height.is_finite()) {
            return Err(invalid("mass escape needs >= 2 atoms and a positive height"));
        }
        let mut fam = Self::build(
            "mass_escape",
            FunctionRule::MassEscape { height },
            AtomFunction::constant(space, 0.0),
        );
        fam.inmeasure_cert = cert(Decay::Zero, "limit measure vanishes");
        Ok(fam)
    }

    /// `fₙ ≡ slope·n`; has no limit (the declared limit 0 is never approached).
    pub fn linear(space: &AtomSpace, slope: f64) -> Result<Self> {
        if !(slope > 0.0 && slope.is_finite()) {
            return Err(invalid("linear growth needs a positive slope"));
        }
        Ok(Self::build(
            "linear",
            FunctionRule::Linear { slope },
            AtomFunction::constant(space, 0.0),
        ))
    }

    /// `t ↦ s(u, Γₙ(t))`, limit `t ↦ s(u, Γ(t))`.
    pub fn support(multi: &MultiFamily, u: &[f64]) -> Result<Self> {
        let limit = multi.limit().scalar_integrand(u)?;
        let mut fam = Self::build(
            "support",
            FunctionRule::Support {
                multi: Box::new(multi.clone()),
                direction: u.to_vec(),
            },
            limit,
        );
        fam.max_index = multi.max_index();
        fam.name = format!("s(u,{})", multi.name());
        Ok(fam)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_inmeasure_cert(mut self, c: Option<DecayCertificate>) -> Self {
        self.inmeasure_cert = c;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn space(&self) -> &AtomSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn limit(&self) -> &AtomFunction {
        &self.limit
    }

    pub fn inmeasure_cert(&self) -> Option<&DecayCertificate> {
        self.inmeasure_cert.as_ref()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.max_index
    }

    pub fn at(&self, n: usize) -> Result<AtomFunction> {
        check_index(n, self.max_index)?;
        match &self.rule {
            FunctionRule::Constant(f) => Ok(f.clone()),
            FunctionRule::Perturbed {
                base,
                direction,
                rate,
            } => base.axpy(rate.weight(n), direction),
            FunctionRule::MassEscape { height } => {
                let mut v = vec![0.0; self.space.n_atoms()];
                v[n % self.space.n_atoms()] = height * n as f64;
                AtomFunction::from_flat(&self.space, 1, v)
            }
            FunctionRule::Linear { slope } => Ok(AtomFunction::constant(&self.space, slope * n as f64)),
            FunctionRule::Support { multi, direction } => multi.at(n)?.scalar_integrand(direction),
        }
    }

    /// A bound on `‖fₙ‖∞` valid for every `n ≥ n0`.
    pub fn sup_norm_from(&self, n0: usize) -> Option<f64> {
        let n0 = n0.max(1);
        match &self.rule {
            FunctionRule::Constant(f) => Some(f.sup_norm()),
            FunctionRule::Perturbed {
                base,
                direction,
                rate,
            } => Some(base.sup_norm() + rate.weight(n0) * direction.sup_norm()),
            FunctionRule::MassEscape { .. } | FunctionRule::Linear { .. } => None,
            FunctionRule::Support { multi, .. } => multi.radius_from(n0),
        }
    }

    /// A decay bound on `‖fₙ - f‖∞`.
    pub fn uniform_deviation(&self) -> Option<Decay> {
        match &self.rule {
            FunctionRule::Constant(_) => Some(Decay::Zero),
            FunctionRule::Perturbed {
                direction, rate, ..
            } => Some(rate.scale(direction.sup_norm())),
            FunctionRule::Support { multi, .. } => multi.uniform_deviation(),
            _ => None,
        }
    }

    /// A bound on `sup_{n ≥ n0} ∫|fₙ| d|mₙ|` that the pair's rules imply
    /// beyond the product of the sup-norm and mass bounds.
    pub fn paired_integral_bound(&self, mf: &MeasureFamily) -> Option<f64> {
        if let (FunctionRule::MassEscape { height: h1 }, MeasureRule::MassEscape { height: h2 }) =
            (&self.rule, &mf.rule)
        {
            if self.space == mf.space {
                return Some(h1 * h2);
            }
        }
        None
    }
}

#[derive(Clone, Debug)]
enum MultiRule {
    Constant(MultiMap),
    /// `(1 + aₙ)·Γ`.
    Scaled { base: MultiMap, rate: Decay },
    /// `Γ + aₙ·g`.
    Translated {
        base: MultiMap,
        shift: AtomFunction,
        rate: Decay,
    },
    /// `height·n·conv{±e_k}` on atom `n mod N`, `{0}` elsewhere.
    MassEscape { height: f64 },
    /// `{fₙ(t)}`.
    Singleton(Box<FunctionFamily>),
    /// `Γ` with one atom moved by a fixed offset, for every `n`.
    Shifted {
        base: MultiMap,
        atom: usize,
        offset: Vec<f64>,
    },
}

/// `n ↦ Γₙ` with limit `Γ`.
#[derive(Clone, Debug)]
pub struct MultiFamily {
    name: String,
    space: AtomSpace,
    dim: usize,
    rule: MultiRule,
    limit: MultiMap,
    equiconv_cert: Option<DecayCertificate>,
    max_index: Option<usize>,
}

impl MultiFamily {
    fn build(name: &str, rule: MultiRule, limit: MultiMap) -> Self {
        MultiFamily {
            name: name.into(),
            space: limit.space().clone(),
            dim: limit.dim(),
            rule,
            limit,
            equiconv_cert: None,
            max_index: None,
        }
    }

    pub fn constant(g: &MultiMap) -> Self {
        let mut fam = Self::build("constant", MultiRule::Constant(g.clone()), g.clone());
        fam.equiconv_cert = cert(Decay::Zero, "Γₙ = Γ");
        fam
    }

    pub fn scaled(g: &MultiMap, rate: Decay) -> Result<Self> {
        Ok(Self::build(
            "scaled",
            MultiRule::Scaled {
                base: g.clone(),
                rate: rate.validated()?,
            },
            g.clone(),
        ))
    }

    pub fn translated(g: &MultiMap, shift: &AtomFunction, rate: Decay) -> Result<Self> {
        g.space().check_same(shift.space())?;
        if shift.dim() != g.dim() {
            return Err(Error::DimensionMismatch {
                expected: g.dim(),
                got: shift.dim(),
            });
        }
        Ok(Self::build(
            "translated",
            MultiRule::Translated {
                base: g.clone(),
                shift: shift.clone(),
                rate: rate.validated()?,
            },
            g.clone(),
        ))
    }

    pub fn mass_escape(space: &AtomSpace, dim: usize, height: f64) -> Result<Self> {
        if space.n_atoms() < 2 || !(height > 0.0 && height.is_finite()) {
            return Err(invalid("mass escape needs >= 2 atoms and a positive height"));
        }
        let origin = Polytope::origin(dim)?;
        let limit = MultiMap::new(space, dim, vec![origin; space.n_atoms()])?;
        let mut fam = Self::build("mass_escape", MultiRule::MassEscape { height }, limit);
        fam.equiconv_cert = cert(Decay::Zero, "limit measure vanishes");
        Ok(fam)
    }

    /// `Γₙ(t) = {fₙ(t)}`.
    pub fn singleton(ff: &FunctionFamily) -> Result<Self> {
        let limit = MultiMap::singletons(ff.limit())?;
        let mut fam = Self::build(
            &format!("singleton({})", ff.name()),
            MultiRule::Singleton(Box::new(ff.clone())),
            limit,
        );
        fam.max_index = ff.max_index();
        Ok(fam)
    }

    pub fn shifted(g: &MultiMap, atom: usize, offset: &[f64]) -> Result<Self> {
        if atom >= g.space().n_atoms() {
            return Err(invalid(format!("atom {atom} out of range")));
        }
        if offset.len() != g.dim() {
            return Err(Error::DimensionMismatch {
                expected: g.dim(),
                got: offset.len(),
            });
        }
        Ok(Self::build(
            "shifted",
            MultiRule::Shifted {
                base: g.clone(),
                atom,
                offset: offset.to_vec(),
            },
            g.clone(),
        ))
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_equiconv_cert(mut self, c: Option<DecayCertificate>) -> Self {
        self.equiconv_cert = c;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn space(&self) -> &AtomSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn limit(&self) -> &MultiMap {
        &self.limit
    }

    pub fn equiconv_cert(&self) -> Option<&DecayCertificate> {
        self.equiconv_cert.as_ref()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.max_index
    }

    /// The underlying vector family of a singleton-valued family.
    pub fn singleton_source(&self) -> Option<&FunctionFamily> {
        match &self.rule {
            MultiRule::Singleton(ff) => Some(ff),
            _ => None,
        }
    }

    pub fn at(&self, n: usize) -> Result<MultiMap> {
        check_index(n, self.max_index)?;
        match &self.rule {
            MultiRule::Constant(g) => Ok(g.clone()),
            MultiRule::Scaled { base, rate } => base.map_bodies(|_, b| b.scale(1.0 + rate.weight(n))),
            MultiRule::Translated { base, shift, rate } => {
                let a = rate.weight(n);
                base.map_bodies(|i, b| {
                    let s: Vec<f64> = shift.value(i).iter().map(|x| a * x).collect();
                    b.translate(&s)
                })
            }
            MultiRule::MassEscape { height } => {
                let active = n % self.space.n_atoms();
                let big = Polytope::cross(self.dim, height * n as f64)?;
                self.limit
                    .map_bodies(|i, b| if i == active { Ok(big.clone()) } else { Ok(b.clone()) })
            }
            MultiRule::Singleton(ff) => MultiMap::singletons(&ff.at(n)?),
            MultiRule::Shifted { base, atom, offset } => {
                base.map_bodies(|i, b| if i == *atom { b.translate(offset) } else { Ok(b.clone()) })
            }
        }
    }

    /// A bound on `sup_t ‖Γₙ(t)‖` valid for every `n ≥ n0`.
    pub fn radius_from(&self, n0: usize) -> Option<f64> {
        let n0 = n0.max(1);
        match &self.rule {
            MultiRule::Constant(g) => Some(g.radius()),
            MultiRule::Scaled { base, rate } => Some((1.0 + rate.weight(n0)) * base.radius()),
            MultiRule::Translated { base, shift, rate } => {
                Some(base.radius() + rate.weight(n0) * shift.sup_norm())
            }
            MultiRule::MassEscape { .. } => None,
            MultiRule::Singleton(ff) => ff.sup_norm_from(n0),
            MultiRule::Shifted { base, offset, .. } => {
                Some(base.radius() + offset.iter().map(|x| x * x).sum::<f64>().sqrt())
            }
        }
    }

    /// A decay bound on `sup_t d_H(Γₙ(t), Γ(t))`.
    pub fn uniform_deviation(&self) -> Option<Decay> {
        match &self.rule {
            MultiRule::Constant(_) => Some(Decay::Zero),
            MultiRule::Scaled { base, rate } => Some(rate.scale(base.radius())),
            MultiRule::Translated { shift, rate, .. } => Some(rate.scale(shift.sup_norm())),
            MultiRule::Singleton(ff) => ff.uniform_deviation(),
            _ => None,
        }
    }

    /// Like [`FunctionFamily::paired_integral_bound`].
    pub fn paired_integral_bound(&self, mf: &MeasureFamily) -> Option<f64> {
        match (&self.rule, &mf.rule) {
            (MultiRule::MassEscape { height: h1 }, MeasureRule::MassEscape { height: h2 })
                if self.space == mf.space =>
            {
                Some(h1 * h2)
            }
            (MultiRule::Singleton(ff), _) => ff.paired_integral_bound(mf),
            _ => None,
        }
    }
}

/// The paired mass-escape construction: `∫|fₙ| dmₙ = height_f · height_m`
/// for every `n`, while the mass of the carrying atom tends to 0.
pub fn mass_escape_family(space: &AtomSpace, height: f64) -> Result<(MeasureFamily, FunctionFamily)> {
    Ok((
        MeasureFamily::mass_escape(space, 1.0)?,
        FunctionFamily::mass_escape(space, height)?,
    ))
}

/// `fₙ ≡ slope·n` against the constant measure with every atom of mass
/// `weight`: only `A = ∅` has `m(A) < weight`, so u.a.c. holds vacuously
/// while `∫ fₙ dmₙ = slope·n·weight·N` is unbounded.
pub fn vacuous_uac_family(space: &AtomSpace, slope: f64, weight: f64) -> Result<(MeasureFamily, FunctionFamily)> {
    if !(weight > 0.0 && weight.is_finite()) {
        return Err(invalid("atom weight must be positive"));
    }
    let m = SignedMeasure::on(space, vec![weight; space.n_atoms()])?;
    Ok((
        MeasureFamily::constant(&m).with_name("uniform_atoms"),
        FunctionFamily::linear(space, slope)?.with_name("vacuous_uac"),
    ))
}

/// Seeded generators for the bounded positive templates.
pub mod templates {
    use super::*;

    pub fn random_nonneg_measure(rng: &mut impl Rng, space: &AtomSpace) -> SignedMeasure {
        let w = (0..space.n_atoms()).map(|_| rng.gen_range(0.05..1.0)).collect();
        SignedMeasure::on(space, w).expect("finite weights")
    }

    pub fn random_signed_measure(rng: &mut impl Rng, space: &AtomSpace) -> SignedMeasure {
        let w = (0..space.n_atoms()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        SignedMeasure::on(space, w).expect("finite weights")
    }

    pub fn random_function(rng: &mut impl Rng, space: &AtomSpace, bound: f64) -> AtomFunction {
        let v = (0..space.n_atoms()).map(|_| rng.gen_range(-bound..bound)).collect();
        AtomFunction::from_flat(space, 1, v).expect("finite values")
    }

    pub fn random_rate(rng: &mut impl Rng) -> Decay {
        if rng.gen_bool(0.5) {
            Decay::Power {
                c: rng.gen_range(0.2..2.0),
                p: rng.gen_range(0.5..2.0),
            }
        } else {
            Decay::Geometric {
                c: rng.gen_range(0.2..2.0),
                q: rng.gen_range(0.5..0.95),
            }
        }
    }

    /// A bounded function family converging uniformly, against a
    /// convex-mix measure family; every Vitali hypothesis is certified.
    pub fn bounded_pair(rng: &mut impl Rng, space: &AtomSpace) -> (FunctionFamily, MeasureFamily) {
        let f = random_function(rng, space, 3.0);
        let g = random_function(rng, space, 1.0);
        let ff = FunctionFamily::perturbed(&f, &g, random_rate(rng)).expect("same space");
        let m = random_nonneg_measure(rng, space);
        let mu = random_nonneg_measure(rng, space);
        let mf = MeasureFamily::convex_mix(&m, &mu, random_rate(rng)).expect("nonnegative");
        (ff, mf)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{integrate_abs, MeasurableSet};

    fn m(w: &[f64]) -> SignedMeasure {
        SignedMeasure::new(w.to_vec()).unwrap()
    }

    #[test]
    fn convex_mix_examples() {
        let a = m(&[1.0, 0.0]);
        let b = m(&[0.0, 1.0]);
        let fam = MeasureFamily::convex_mix(&a, &b, Decay::harmonic()).unwrap();
        for n in [1usize, 2, 5, 1000] {
            let gap = fam.at(n).unwrap().sub(&a).unwrap().total_variation();
            assert!((gap - 2.0 / n as f64).abs() < 1e-15);
            assert!(fam.tv_cert().unwrap().admits(n, gap));
        }
        let same = MeasureFamily::convex_mix(&a, &a, Decay::harmonic()).unwrap();
        assert_eq!(same.at(3).unwrap(), a);
        assert!(MeasureFamily::convex_mix(&m(&[-1.0, 0.0]), &b, Decay::harmonic()).is_err());
    }

    #[test]
    fn rademacher_examples() {
        let fam = MeasureFamily::rademacher(3).unwrap();
        let full = fam.space().full();
        assert_eq!(fam.at(1).unwrap().eval(&full).unwrap(), 0.0);
        assert!((fam.at(2).unwrap().total_variation() - 1.0).abs() < 1e-15);
        let half = MeasurableSet::from_indices(8, &[0, 1, 2, 3]).unwrap();
        assert_eq!(fam.at(3).unwrap().eval(&half).unwrap(), 0.0);
        assert!(fam.at(4).is_err());
        assert!(MeasureFamily::rademacher(0).is_err());
        assert!(MeasureFamily::rademacher(17).is_err());
    }

    #[test]
    fn mass_escape_examples() {
        let space = AtomSpace::new(5).unwrap();
        let (mf, ff) = mass_escape_family(&space, 1.0).unwrap();
        for n in 1..200 {
            let i = integrate_abs(&ff.at(n).unwrap(), &mf.at(n).unwrap(), &space.full()).unwrap();
            assert!((i - 1.0).abs() < 1e-12);
        }
        assert!(MeasureFamily::mass_escape(&AtomSpace::new(1).unwrap(), 1.0).is_err());
    }

    #[test]
    fn certificates_hold_over_horizon() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let space = AtomSpace::new(6).unwrap();
        for _ in 0..20 {
            let (ff, mf) = templates::bounded_pair(&mut rng, &space);
            let tv = mf.tv_cert().unwrap();
            let sw = mf.setwise_cert().unwrap();
            for n in 1..=256 {
                let mn = mf.at(n).unwrap();
                assert!(tv.admits(n, mn.sub(mf.limit()).unwrap().total_variation()));
                assert!(sw.admits(n, sup_set_gap(&mn, mf.limit()).unwrap()));
                let dev = ff.at(n).unwrap().sub(ff.limit()).unwrap().sup_norm();
                assert!(dev <= ff.uniform_deviation().unwrap().eval(n) * (1.0 + 1e-12) + 1e-15);
                assert!(ff.at(n).unwrap().sup_norm() <= ff.sup_norm_from(n).unwrap() + 1e-12);
                assert!(mn.total_variation() <= mf.mass_bound_from(n).unwrap() + 1e-12);
            }
        }
    }

    #[test]
    fn jordan_parts_inherit_tv_certificate() {
        let base = m(&[0.5, -0.25, 0.0]);
        let dir = m(&[-1.0, 1.0, 0.5]);
        let fam = MeasureFamily::perturbed(&base, &dir, Decay::harmonic()).unwrap();
        assert!(!fam.nonneg());
        for part in [fam.jordan_pos(), fam.jordan_neg()] {
            assert!(part.nonneg());
            let c = part.tv_cert().unwrap().clone();
            for n in 1..100 {
                let d = part.at(n).unwrap().sub(part.limit()).unwrap().total_variation();
                assert!(c.admits(n, d));
            }
        }
    }

    #[test]
    fn atom_floor_is_a_lower_bound() {
        let base = m(&[0.5, 0.25, 1.0]);
        let target = m(&[0.1, 0.0, 2.0]);
        let fam = MeasureFamily::convex_mix(&base, &target, Decay::harmonic()).unwrap();
        let floor = fam.atom_floor_from(4).unwrap();
        for n in 4..200 {
            let mn = fam.at(n).unwrap();
            assert!(mn.weights().iter().all(|w| *w == 0.0 || w.abs() >= floor - 1e-15));
        }
        let escaping = MeasureFamily::convex_mix(&m(&[0.0, 1.0]), &m(&[1.0, 1.0]), Decay::harmonic()).unwrap();
        assert_eq!(escaping.atom_floor_from(1), None);
    }
}
