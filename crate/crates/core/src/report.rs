//! Verdicts and the per-theorem report.

use serde::{Deserialize, Serialize};

/// Outcome of a single hypothesis or predicate check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

impl Verdict {
    pub fn holds(self) -> bool {
        self == Verdict::Holds
    }

    pub fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::Fails, _) | (_, Verdict::Fails) => Verdict::Fails,
            (Verdict::Holds, Verdict::Holds) => Verdict::Holds,
            _ => Verdict::Inconclusive,
        }
    }

    pub fn from_bool(b: bool) -> Verdict {
        if b {
            Verdict::Holds
        } else {
            Verdict::Fails
        }
    }
}

/// Final outcome of a theorem check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportVerdict {
    /// Every hypothesis holds and the final gap is within tolerance.
    Pass,
    /// Hypotheses hold but the gap at the horizon exceeds the tolerance.
    GapExceeded,
    /// Some hypothesis fails or is inconclusive; the conclusion is not asserted.
    HypothesisFailed,
    /// A precondition of the check itself is violated.
    NotApplicable,
    /// The evidence neither confirms nor refutes the checked statement.
    Inconclusive,
    /// Certified evidence contradicts the checked statement.
    Refuted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisResult {
    pub label: String,
    pub verdict: Verdict,
    pub detail: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<serde_json::Value>,
}

impl HypothesisResult {
    pub fn new(label: &str, verdict: Verdict, detail: impl Into<String>) -> Self {
        HypothesisResult {
            label: label.into(),
            verdict,
            detail: detail.into(),
            certificate: None,
        }
    }

    pub fn with_certificate(mut self, cert: impl Serialize) -> Self {
        self.certificate = serde_json::to_value(cert).ok();
        self
    }
}

/// A labelled `n ↦ gap` curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedCurve {
    pub label: String,
    pub points: Vec<(usize, f64)>,
}

/// A side computation reported with a theorem (a corollary or a special case).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuxCheck {
    pub label: String,
    pub verdict: Verdict,
    /// Non-finite values are written as `null`.
    #[serde(with = "lossy_f64")]
    pub value: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub theorem: String,
    pub family: String,
    pub horizon: usize,
    pub tolerance: f64,
    pub hypotheses: Vec<HypothesisResult>,
    pub curve: Vec<(usize, f64)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub curves: Vec<NamedCurve>,
    pub final_gap: Option<f64>,
    /// A certified bound on the gap for every index beyond the horizon.
    pub tail_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub auxiliary: Vec<AuxCheck>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub verdict: ReportVerdict,
}

impl TheoremReport {
    pub fn new(theorem: &str, family: &str, horizon: usize, tolerance: f64) -> Self {
        TheoremReport {
            theorem: theorem.into(),
            family: family.into(),
            horizon,
            tolerance,
            hypotheses: Vec::new(),
            curve: Vec::new(),
            curves: Vec::new(),
            final_gap: None,
            tail_bound: None,
            auxiliary: Vec::new(),
            notes: Vec::new(),
            verdict: ReportVerdict::HypothesisFailed,
        }
    }

    pub fn hypothesis(&mut self, h: HypothesisResult) {
        self.hypotheses.push(h);
    }

    pub fn hypotheses_hold(&self) -> bool {
        self.hypotheses.iter().all(|h| h.verdict.holds())
    }

    pub fn hypothesis_verdict(&self, label: &str) -> Option<Verdict> {
        self.hypotheses
            .iter()
            .find(|h| h.label == label)
            .map(|h| h.verdict)
    }

    /// Sets `final_gap` from the last curve point and derives the verdict.
    pub fn conclude(&mut self) {
        self.final_gap = self.curve.last().map(|p| p.1);
        self.verdict = if !self.hypotheses_hold() {
            ReportVerdict::HypothesisFailed
        } else {
            match self.final_gap {
                Some(g) if g <= self.tolerance => ReportVerdict::Pass,
                _ => ReportVerdict::GapExceeded,
            }
        };
    }

    pub fn not_applicable(&mut self, reason: impl Into<String>) {
        self.notes.push(reason.into());
        self.verdict = ReportVerdict::NotApplicable;
    }
}

mod lossy_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

/// Conservative refutation from a finite curve: the tail never drops below
/// half of the head, and the head is bounded away from 0.
pub(crate) fn stalls(values: &[f64]) -> bool {
    if values.len() < 4 {
        return false;
    }
    let half = values.len() / 2;
    let head = values[..half].iter().copied().fold(0.0, f64::max);
    let tail = values[half..].iter().copied().fold(f64::INFINITY, f64::min);
    head > 0.0 && tail >= 0.5 * head
}

/// Conservative evidence of unbounded growth: the running maximum at least
/// doubles between the half horizon and the horizon.
pub(crate) fn doubles(values: &[f64]) -> bool {
    if values.len() < 4 {
        return false;
    }
    let half = values.len() / 2;
    let head = values[..half].iter().copied().fold(0.0, f64::max);
    let all = values.iter().copied().fold(0.0, f64::max);
    head > 0.0 && all >= 2.0 * head * (1.0 - 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conclude_requires_hypotheses_and_gap() {
        let mut r = TheoremReport::new("th1", "f", 8, 0.1);
        r.hypothesis(HypothesisResult::new("i", Verdict::Holds, ""));
        r.curve = vec![(1, 1.0), (8, 0.05)];
        r.conclude();
        assert_eq!(r.verdict, ReportVerdict::Pass);
        r.tolerance = 0.01;
        r.conclude();
        assert_eq!(r.verdict, ReportVerdict::GapExceeded);
        r.hypothesis(HypothesisResult::new("ii", Verdict::Inconclusive, ""));
        r.conclude();
        assert_eq!(r.verdict, ReportVerdict::HypothesisFailed);
    }

    #[test]
    fn stall_and_growth_heuristics() {
        assert!(stalls(&[1.0; 10]));
        let decaying: Vec<f64> = (1..=64).map(|n| 1.0 / n as f64).collect();
        assert!(!stalls(&decaying));
        assert!(!stalls(&[0.0; 10]));
        let linear: Vec<f64> = (1..=64).map(|n| n as f64).collect();
        assert!(doubles(&linear));
        assert!(!doubles(&[1.0; 64]));
    }
}
