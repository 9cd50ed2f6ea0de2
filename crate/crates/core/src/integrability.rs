//! Uniform absolute continuity, uniform integrability and the scalar
//! Vitali-type limit checkers.
//!
//! "Holds" verdicts come from the fractional-knapsack over-approximation of
//! `sup{∫_A |fₙ| dmₙ : mₙ(A) < δ}` together with a tail bound from the
//! family metadata; "fails" verdicts need an exact witness `(n, A)`.

use serde::Serialize;

use crate::certificate::{Decay, DecayCertificate};
use crate::error::{Error, Result};
use crate::families::{FunctionFamily, MeasureFamily};
use crate::measure::{
    integrate_abs, integrate_scalar, sup_set_gap, total_variation_distance, AtomFunction,
    MeasurableSet, SignedMeasure,
};
use crate::report::{doubles, stalls, AuxCheck, HypothesisResult, NamedCurve, ReportVerdict, TheoremReport, Verdict};

/// Atom count up to which set maximization is exact.
pub const EXACT_LIMIT: usize = 20;

/// `δ = 2^-k` for `k = 0..=DELTA_STEPS`.
pub const DELTA_STEPS: u32 = 40;

pub const EPSILON_GRID: [f64; 6] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

/// Thresholds at which convergence in measure is checked.
pub const IN_MEASURE_DELTAS: [f64; 3] = [1e-1, 1e-2, 1e-3];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum UacMethod {
    FractionalRelaxation,
    ExactKnapsack,
}

/// Result of `max{∫_A |f| dm : m(A) < δ}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WorstSet {
    pub value: f64,
    /// A maximizing set when the method is exact.
    pub set: Option<MeasurableSet>,
    pub method: UacMethod,
}

/// Candidate atoms for capacity `cap`: positive weight below `cap`.
fn candidates(absf: &[f64], weights: &[f64], order: &[usize], cap: f64) -> Vec<usize> {
    order
        .iter()
        .copied()
        .filter(|&i| weights[i] > 0.0 && weights[i] < cap && absf[i] > 0.0)
        .collect()
}

/// Indices sorted by `|f|` descending (the value/weight ratio of an atom).
fn ratio_order(absf: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..absf.len()).collect();
    order.sort_by(|&a, &b| absf[b].total_cmp(&absf[a]).then(a.cmp(&b)));
    order
}

/// Greedy fill with one fractional atom; an upper bound on the constrained
/// maximum. Atoms of weight `≥ cap` can never lie in a feasible set.
fn fractional(absf: &[f64], weights: &[f64], order: &[usize], cap: f64) -> f64 {
    let mut room = cap;
    let mut value = 0.0;
    for &i in order {
        let w = weights[i];
        if w <= 0.0 || w >= cap || absf[i] <= 0.0 {
            continue;
        }
        if w <= room {
            value += absf[i] * w;
            room -= w;
        } else {
            value += absf[i] * room;
            break;
        }
    }
    value
}

/// Exact 0/1 knapsack `max Σ |f_i| w_i` subject to `Σ w_i < cap`, by
/// depth-first branch and bound with the fractional bound.
fn knapsack(absf: &[f64], weights: &[f64], order: &[usize], cap: f64) -> (f64, Vec<usize>) {
    let items = candidates(absf, weights, order, cap);
    let mut best = (0.0, Vec::new());
    let mut chosen = Vec::new();

    fn bound(items: &[usize], absf: &[f64], weights: &[f64], k: usize, room: f64) -> f64 {
        let mut room = room;
        let mut v = 0.0;
        for &i in &items[k..] {
            let w = weights[i];
            if w <= room {
                v += absf[i] * w;
                room -= w;
            } else {
                v += absf[i] * room;
                break;
            }
        }
        v
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        items: &[usize],
        absf: &[f64],
        weights: &[f64],
        k: usize,
        used: f64,
        value: f64,
        cap: f64,
        chosen: &mut Vec<usize>,
        best: &mut (f64, Vec<usize>),
    ) {
        if value > best.0 {
            *best = (value, chosen.clone());
        }
        if k == items.len() || value + bound(items, absf, weights, k, cap - used) <= best.0 {
            return;
        }
        let i = items[k];
        if used + weights[i] < cap {
            chosen.push(i);
            dfs(items, absf, weights, k + 1, used + weights[i], value + absf[i] * weights[i], cap, chosen, best);
            chosen.pop();
        }
        dfs(items, absf, weights, k + 1, used, value, cap, chosen, best);
    }

    dfs(&items, absf, weights, 0, 0.0, 0.0, cap, &mut chosen, &mut best);
    best
}

/// A feasible set by greedy prefix fill (for large atom counts).
fn greedy(absf: &[f64], weights: &[f64], order: &[usize], cap: f64) -> Vec<usize> {
    let mut used = 0.0;
    let mut set = Vec::new();
    for i in candidates(absf, weights, order, cap) {
        if used + weights[i] < cap {
            used += weights[i];
            set.push(i);
        }
    }
    set
}

/// `max{∫_A |f| dm : m(A) < δ}`: exact for at most [`EXACT_LIMIT`] atoms,
/// otherwise the fractional relaxation (an upper bound).
pub fn worst_set_integral(f: &AtomFunction, m: &SignedMeasure, delta: f64) -> Result<WorstSet> {
    f.space().check_same(m.space())?;
    m.require_nonnegative()?;
    if !(delta > 0.0) {
        return Err(crate::error::invalid(format!("delta must be positive, got {delta}")));
    }
    let absf = f.norms();
    let order = ratio_order(&absf);
    if m.n_atoms() <= EXACT_LIMIT {
        let (_, idx) = knapsack(&absf, m.weights(), &order, delta);
        let set = MeasurableSet::from_indices(m.n_atoms(), &idx)?;
        let value = integrate_abs(f, m, &set)?;
        Ok(WorstSet {
            value,
            set: Some(set),
            method: UacMethod::ExactKnapsack,
        })
    } else {
        Ok(WorstSet {
            value: fractional(&absf, m.weights(), &order, delta),
            set: None,
            method: UacMethod::FractionalRelaxation,
        })
    }
}

/// One integrand profile `t ↦ |h(t)|` with its ratio order.
#[derive(Clone, Debug)]
pub(crate) struct Profile {
    values: Vec<f64>,
    order: Vec<usize>,
}

impl Profile {
    pub(crate) fn new(values: Vec<f64>) -> Self {
        let order = ratio_order(&values);
        Profile { values, order }
    }
}

/// The data of one index `n`: the weights of `mₙ`, one or more integrand
/// profiles (one per direction for multifunctions) and an optional
/// Lipschitz correction `mesh · |radius|`.
#[derive(Clone, Debug)]
pub(crate) struct UacInstance {
    pub weights: Vec<f64>,
    pub profiles: Vec<Profile>,
    pub correction: Option<(f64, Profile)>,
}

impl UacInstance {
    fn relax(&self, delta: f64) -> f64 {
        let main = self
            .profiles
            .iter()
            .map(|p| fractional(&p.values, &self.weights, &p.order, delta))
            .fold(0.0, f64::max);
        let corr = self
            .correction
            .as_ref()
            .map_or(0.0, |(mesh, p)| mesh * fractional(&p.values, &self.weights, &p.order, delta));
        main + corr
    }

    fn witness(&self, delta: f64, epsilon: f64) -> Option<(Vec<usize>, f64, UacMethod)> {
        let exact = self.weights.len() <= EXACT_LIMIT;
        for p in &self.profiles {
            let idx = if exact {
                knapsack(&p.values, &self.weights, &p.order, delta).1
            } else {
                greedy(&p.values, &self.weights, &p.order, delta)
            };
            let value: f64 = idx.iter().map(|&i| p.values[i] * self.weights[i]).sum();
            let mass: f64 = idx.iter().map(|&i| self.weights[i]).sum();
            if value >= epsilon && mass < delta {
                let method = if exact {
                    UacMethod::ExactKnapsack
                } else {
                    UacMethod::FractionalRelaxation
                };
                return Some((idx, value, method));
            }
        }
        None
    }
}

/// Where a u.a.c. check can extend its horizon evidence to every index.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct UacTail {
    /// `sup_{n > H} ‖fₙ‖∞`.
    pub sup_bound: Option<f64>,
    /// A floor on the nonzero atom weights of `mₙ`, `n > H`.
    pub atom_floor: Option<f64>,
}

impl UacTail {
    /// A `δ` that works for `ε` at every index beyond the horizon.
    pub fn delta(&self, epsilon: f64) -> Option<f64> {
        let from_sup = self.sup_bound.map(|b| if b > 0.0 { epsilon / b } else { 1.0 });
        match (from_sup, self.atom_floor) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UacWitness {
    pub n: usize,
    pub set: MeasurableSet,
    /// `mₙ(A)`.
    pub measure: f64,
    /// `∫_A |fₙ| dmₙ`.
    pub integral: f64,
}

/// Evidence for or against uniform absolute continuity at one `ε`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UacCertificate {
    pub epsilon: f64,
    /// The certified `δ` (holds), the `δ` of the witness (fails), or the
    /// smallest `δ` tried (inconclusive).
    pub delta: f64,
    pub verdict: Verdict,
    pub witness: Option<UacWitness>,
    pub method: UacMethod,
    pub horizon: usize,
}

pub(crate) struct UacProblem {
    pub instances: Vec<UacInstance>,
    pub tail: UacTail,
}

fn grid_delta(k: u32) -> f64 {
    (0.5f64).powi(k as i32)
}

impl UacProblem {
    fn horizon(&self) -> usize {
        self.instances.len()
    }

    fn relax_ok(&self, k: u32, epsilon: f64) -> bool {
        let d = grid_delta(k);
        self.instances.iter().all(|inst| inst.relax(d) < epsilon)
    }

    pub(crate) fn certify(&self, epsilon: f64) -> UacCertificate {
        let horizon = self.horizon();
        // relaxations are nondecreasing in δ, so the admissible k form a tail
        let first_ok = if self.relax_ok(0, epsilon) {
            Some(0)
        } else if !self.relax_ok(DELTA_STEPS, epsilon) {
            None
        } else {
            let (mut lo, mut hi) = (0u32, DELTA_STEPS);
            while hi - lo > 1 {
                let mid = (lo + hi) / 2;
                if self.relax_ok(mid, epsilon) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            Some(hi)
        };
        if let (Some(k), Some(tail)) = (first_ok, self.tail.delta(epsilon)) {
            return UacCertificate {
                epsilon,
                delta: grid_delta(k).min(tail),
                verdict: Verdict::Holds,
                witness: None,
                method: UacMethod::FractionalRelaxation,
                horizon,
            };
        }
        // refutation: witnesses for every grid δ above 2/H
        let mut last = None;
        let mut k = 0;
        while k <= DELTA_STEPS && grid_delta(k) > 2.0 / horizon as f64 {
            let d = grid_delta(k);
            let found = (1..=horizon).rev().find_map(|n| {
                self.instances[n - 1]
                    .witness(d, epsilon)
                    .map(|(idx, value, method)| (n, idx, value, method))
            });
            match found {
                Some(w) => last = Some((d, w)),
                None => {
                    last = None;
                    break;
                }
            }
            k += 1;
        }
        if let Some((d, (n, idx, value, method))) = last {
            let inst = &self.instances[n - 1];
            let n_atoms = inst.weights.len();
            return UacCertificate {
                epsilon,
                delta: d,
                verdict: Verdict::Fails,
                witness: Some(UacWitness {
                    n,
                    measure: idx.iter().map(|&i| inst.weights[i]).sum(),
                    set: MeasurableSet::from_indices(n_atoms, &idx).expect("indices in range"),
                    integral: value,
                }),
                method,
                horizon,
            };
        }
        UacCertificate {
            epsilon,
            delta: grid_delta(DELTA_STEPS),
            verdict: Verdict::Inconclusive,
            witness: None,
            method: UacMethod::FractionalRelaxation,
            horizon,
        }
    }

    /// Conjunction over an `ε` grid; returns the certificate of the first
    /// non-holding `ε`, or of the smallest one.
    pub(crate) fn certify_grid(&self, eps: &[f64]) -> (Verdict, Vec<UacCertificate>) {
        let certs: Vec<UacCertificate> = eps.iter().map(|&e| self.certify(e)).collect();
        let verdict = certs.iter().fold(Verdict::Holds, |v, c| v.and(c.verdict));
        (verdict, certs)
    }
}

/// The smallest declared maximal index, capped by `horizon`.
pub fn effective_horizon(horizon: usize, caps: &[Option<usize>]) -> usize {
    caps.iter().flatten().fold(horizon, |h, c| h.min(*c))
}

fn nonneg_measures(mf: &MeasureFamily, horizon: usize) -> Result<Vec<SignedMeasure>> {
    (1..=horizon)
        .map(|n| {
            let m = mf.at(n)?;
            m.require_nonnegative()?;
            Ok(m)
        })
        .collect()
}

pub(crate) fn uac_problem(ff: &FunctionFamily, mf: &MeasureFamily, horizon: usize) -> Result<UacProblem> {
    ff.space().check_same(mf.space())?;
    let h = effective_horizon(horizon, &[ff.max_index(), mf.max_index()]);
    let measures = nonneg_measures(mf, h)?;
    let mut instances = Vec::with_capacity(h);
    for (i, m) in measures.into_iter().enumerate() {
        let f = ff.at(i + 1)?;
        instances.push(UacInstance {
            weights: m.weights().to_vec(),
            profiles: vec![Profile::new(f.norms())],
            correction: None,
        });
    }
    Ok(UacProblem {
        instances,
        tail: UacTail {
            sup_bound: ff.sup_norm_from(h + 1),
            atom_floor: mf.atom_floor_from(h + 1),
        },
    })
}

/// Uniform absolute continuity of `(fₙ)` with respect to `(mₙ)` at `ε`.
pub fn check_uac(ff: &FunctionFamily, mf: &MeasureFamily, epsilon: f64, horizon: usize) -> Result<UacCertificate> {
    if !(epsilon > 0.0) {
        return Err(crate::error::invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    Ok(uac_problem(ff, mf, horizon)?.certify(epsilon))
}

/// Tail evidence for `α ↦ sup_n ∫_{|fₙ|>α} |fₙ| dmₙ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UiCurve {
    pub alphas: Vec<f64>,
    pub values: Vec<f64>,
    /// The curve vanishes for `α ≥ tail_from_alpha` at every index.
    pub tail_from_alpha: Option<f64>,
    pub tail_cert: Option<DecayCertificate>,
    pub verdict: Verdict,
    pub horizon: usize,
}

impl UiCurve {
    pub fn value_at(&self, alpha: f64) -> f64 {
        self.alphas
            .iter()
            .zip(&self.values)
            .filter(|(a, _)| **a <= alpha)
            .map(|(_, v)| *v)
            .next_back()
            .unwrap_or(f64::INFINITY)
    }
}

/// `α`-grid `{0} ∪ {2^k : 2^k < H}`.
pub fn alpha_grid(horizon: usize) -> Vec<f64> {
    let mut a = vec![0.0];
    let mut x = 1.0;
    while x < horizon as f64 {
        a.push(x);
        x *= 2.0;
    }
    a
}

/// Uniform integrability of `(fₙ)` with respect to `(mₙ)`.
pub fn check_ui(ff: &FunctionFamily, mf: &MeasureFamily, horizon: usize) -> Result<UiCurve> {
    ff.space().check_same(mf.space())?;
    let h = effective_horizon(horizon, &[ff.max_index(), mf.max_index()]);
    let measures = nonneg_measures(mf, h)?;
    let alphas = alpha_grid(h.max(2));
    let mut values = vec![0.0f64; alphas.len()];
    let mut horizon_sup = 0.0f64;
    for (i, m) in measures.iter().enumerate() {
        let absf = ff.at(i + 1)?.norms();
        horizon_sup = absf.iter().copied().fold(horizon_sup, f64::max);
        for (a, v) in alphas.iter().zip(values.iter_mut()) {
            let tail: f64 = absf
                .iter()
                .zip(m.weights())
                .filter(|(f, _)| **f > *a)
                .map(|(f, w)| f * w)
                .sum();
            *v = v.max(tail);
        }
    }
    let tail_from_alpha = ff.sup_norm_from(h + 1).map(|b| b.max(horizon_sup));
    let verdict = if tail_from_alpha.is_some() {
        Verdict::Holds
    } else if stalls(&values) {
        Verdict::Fails
    } else {
        Verdict::Inconclusive
    };
    Ok(UiCurve {
        alphas,
        values,
        tail_cert: tail_from_alpha.map(|b| DecayCertificate::zero(format!("0 for α ≥ {b}"))),
        tail_from_alpha,
        verdict,
        horizon: h,
    })
}

/// Evidence about `sup_n ∫ |fₙ| dmₙ < ∞`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntegralBound {
    pub horizon_sup: f64,
    pub tail_bound: Option<f64>,
    pub verdict: Verdict,
}

pub fn check_integral_bound(ff: &FunctionFamily, mf: &MeasureFamily, horizon: usize) -> Result<IntegralBound> {
    ff.space().check_same(mf.space())?;
    let h = effective_horizon(horizon, &[ff.max_index(), mf.max_index()]);
    let full = mf.space().full();
    let mut values = Vec::with_capacity(h);
    for n in 1..=h {
        values.push(integrate_abs(&ff.at(n)?, &mf.at(n)?.abs(), &full)?);
    }
    let tail_bound = ff.paired_integral_bound(mf).or_else(|| {
        ff.sup_norm_from(h + 1)
            .zip(mf.mass_bound_from(h + 1))
            .map(|(b, m)| b * m)
    });
    let verdict = if tail_bound.is_some() {
        Verdict::Holds
    } else if doubles(&values) {
        Verdict::Fails
    } else {
        Verdict::Inconclusive
    };
    Ok(IntegralBound {
        horizon_sup: values.iter().copied().fold(0.0, f64::max),
        tail_bound,
        verdict,
    })
}

/// `|m|{|fₙ - f| > δ}` for each `δ` in [`IN_MEASURE_DELTAS`], with the
/// certificate used: the family's own, or `‖fₙ - f‖∞ · |m|(Ω) / δ_min`.
pub fn check_in_measure(ff: &FunctionFamily, m: &SignedMeasure, horizon: usize) -> Result<HypothesisResult> {
    ff.space().check_same(m.space())?;
    let h = effective_horizon(horizon, &[ff.max_index()]);
    let weights = m.abs();
    let limit = ff.limit();
    let mut curves = vec![Vec::with_capacity(h); IN_MEASURE_DELTAS.len()];
    for n in 1..=h {
        let dev = ff.at(n)?.sub(limit)?.norms();
        for (d, curve) in IN_MEASURE_DELTAS.iter().zip(curves.iter_mut()) {
            let mass: f64 = dev
                .iter()
                .zip(weights.weights())
                .filter(|(x, _)| **x > *d)
                .map(|(_, w)| w)
                .sum();
            curve.push(mass);
        }
    }
    let delta_min = IN_MEASURE_DELTAS[IN_MEASURE_DELTAS.len() - 1];
    let cert = ff.inmeasure_cert().cloned().or_else(|| {
        ff.uniform_deviation().map(|d| DecayCertificate {
            bound: d.scale(weights.total() / delta_min),
            description: "‖fₙ - f‖∞ · |m|(Ω) / δ".into(),
        })
    });
    if let Some(c) = &cert {
        let breach = curves.iter().find_map(|curve| c.verify_values(curve));
        if breach.is_none() {
            return Ok(HypothesisResult::new("in_measure", Verdict::Holds, "certificate verified over the horizon")
                .with_certificate(c));
        }
    }
    let last = &curves[curves.len() - 1];
    let (verdict, detail) = if stalls(last) {
        (Verdict::Fails, format!("m{{|fₙ - f| > {delta_min}}} does not decay"))
    } else {
        (Verdict::Inconclusive, "no certificate and no refutation".to_string())
    };
    Ok(HypothesisResult::new("in_measure", verdict, detail))
}

/// Setwise convergence `mₙ → m` from the setwise (or tv) certificate, or
/// refuted by a stalled `sup_A |mₙ(A) - m(A)|`.
pub fn check_setwise(mf: &MeasureFamily, horizon: usize) -> Result<HypothesisResult> {
    let h = effective_horizon(horizon, &[mf.max_index()]);
    let mut gaps = Vec::with_capacity(h);
    for n in 1..=h {
        gaps.push(sup_set_gap(&mf.at(n)?, mf.limit())?);
    }
    let cert = mf.setwise_cert().or(mf.tv_cert());
    if let Some(c) = cert {
        if c.verify_values(&gaps).is_none() {
            return Ok(HypothesisResult::new("setwise", Verdict::Holds, "certificate verified over the horizon")
                .with_certificate(c));
        }
    }
    Ok(refute_or_unknown("setwise", &gaps, "sup_A |mₙ(A) - m(A)|"))
}

/// Total-variation convergence from the tv certificate.
pub fn check_tv(mf: &MeasureFamily, horizon: usize) -> Result<HypothesisResult> {
    let h = effective_horizon(horizon, &[mf.max_index()]);
    let mut gaps = Vec::with_capacity(h);
    for n in 1..=h {
        gaps.push(total_variation_distance(&mf.at(n)?, mf.limit())?);
    }
    if let Some(c) = mf.tv_cert() {
        if c.verify_values(&gaps).is_none() {
            return Ok(HypothesisResult::new("total_variation", Verdict::Holds, "certificate verified over the horizon")
                .with_certificate(c));
        }
    }
    Ok(refute_or_unknown("total_variation", &gaps, "|mₙ - m|(Ω)"))
}

fn refute_or_unknown(label: &str, gaps: &[f64], what: &str) -> HypothesisResult {
    if stalls(gaps) {
        let last = gaps.last().copied().unwrap_or(0.0);
        HypothesisResult::new(label, Verdict::Fails, format!("{what} stalls at {last:.6}"))
    } else {
        HypothesisResult::new(label, Verdict::Inconclusive, format!("{what}: no certificate and no refutation"))
    }
}

fn nonneg_hypothesis(mf: &MeasureFamily, horizon: usize) -> Result<HypothesisResult> {
    for n in 1..=horizon {
        if let Err(Error::NegativeMeasure { atom, weight }) = mf.at(n)?.require_nonnegative() {
            return Ok(HypothesisResult::new(
                "nonnegative",
                Verdict::Fails,
                format!("m_{n} has weight {weight} at atom {atom}"),
            ));
        }
    }
    if mf.limit().require_nonnegative().is_err() {
        return Ok(HypothesisResult::new("nonnegative", Verdict::Fails, "limit measure is signed"));
    }
    Ok(HypothesisResult::new("nonnegative", Verdict::Holds, "all mₙ and m are measures"))
}

fn uac_hypothesis(label: &str, ff: &FunctionFamily, mf: &MeasureFamily, horizon: usize) -> Result<HypothesisResult> {
    let (verdict, certs) = uac_problem(ff, mf, horizon)?.certify_grid(&EPSILON_GRID);
    let shown = certs
        .iter()
        .find(|c| c.verdict != Verdict::Holds)
        .unwrap_or(&certs[certs.len() - 1]);
    let detail = match verdict {
        Verdict::Holds => format!("δ(ε={}) = {:e}", shown.epsilon, shown.delta),
        Verdict::Fails => {
            let w = shown.witness.as_ref().expect("failing certificates carry a witness");
            format!(
                "ε = {}: m_{}(A) = {:e} < δ = {:e} but ∫_A |f| = {:.6}",
                shown.epsilon, w.n, w.measure, shown.delta, w.integral
            )
        }
        Verdict::Inconclusive => format!("no δ certified or refuted at ε = {}", shown.epsilon),
    };
    Ok(HypothesisResult::new(label, verdict, detail).with_certificate(shown))
}

/// A decay bound on `|∫_A f d(mₙ - m)|` for bounded `f`.
fn measure_gap_bound(f_sup: f64, mf: &MeasureFamily) -> Option<Decay> {
    if let Some(c) = mf.tv_cert() {
        Some(c.bound.scale(f_sup))
    } else {
        mf.setwise_cert().map(|c| c.bound.scale(2.0 * f_sup))
    }
}

/// A certified bound on the Vitali gap at every `n ≥ n0`.
fn vitali_tail(ff: &FunctionFamily, mf: &MeasureFamily, n0: usize) -> Option<f64> {
    let dev = ff.uniform_deviation()?;
    let mass = mf.mass_bound_from(n0)?;
    let meas = measure_gap_bound(ff.limit().sup_norm(), mf)?;
    Some(dev.eval(n0) * mass + meas.eval(n0))
}

fn gap_curve(
    ff: &FunctionFamily,
    mf: &MeasureFamily,
    set: &MeasurableSet,
    horizon: usize,
    target: f64,
) -> Result<Vec<(usize, f64)>> {
    (1..=horizon)
        .map(|n| Ok((n, (integrate_scalar(&ff.at(n)?, &mf.at(n)?, set)? - target).abs())))
        .collect()
}

fn require_scalar(ff: &FunctionFamily) -> Result<()> {
    if ff.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: ff.dim(),
        });
    }
    Ok(())
}

/// Checks the hypotheses of the Vitali-type theorem for varying measures
/// and, when they hold, the convergence `∫_A fₙ dmₙ → ∫_A f dm`.
pub fn vitali_limit(
    ff: &FunctionFamily,
    mf: &MeasureFamily,
    set: &MeasurableSet,
    tol: f64,
    horizon: usize,
) -> Result<TheoremReport> {
    require_scalar(ff)?;
    ff.space().check_same(mf.space())?;
    let h = effective_horizon(horizon, &[ff.max_index(), mf.max_index()]);
    let family = format!("{} / {}", ff.name(), mf.name());
    let mut report = TheoremReport::new("th1", &family, h, tol);
    let nonneg = nonneg_hypothesis(mf, h)?;
    let nonneg_ok = nonneg.verdict.holds();
    report.hypothesis(nonneg);
    let constant_f = FunctionFamily::constant(ff.limit());
    if nonneg_ok {
        report.hypothesis(uac_hypothesis("uac_fn", ff, mf, h)?);
    }
    report.hypothesis(check_in_measure(ff, mf.limit(), h)?);
    if nonneg_ok {
        report.hypothesis(uac_hypothesis("uac_f", &constant_f, mf, h)?);
    }
    report.hypothesis(check_setwise(mf, h)?);

    let target = integrate_scalar(ff.limit(), mf.limit(), set)?;
    report.curve = gap_curve(ff, mf, set, h, target)?;
    report.tail_bound = vitali_tail(ff, mf, h);

    let p1 = gap_curve(&constant_f, mf, set, h, target)?;
    let p1_final = p1.last().map_or(0.0, |p| p.1);
    report.auxiliary.push(AuxCheck {
        label: "p1".into(),
        verdict: Verdict::from_bool(p1_final <= tol),
        value: p1_final,
        detail: "|∫_A f dmₙ - ∫_A f dm| at the horizon".into(),
    });
    report.conclude();
    Ok(report)
}

/// The signed corollary: Vitali on the Jordan parts `(mₙ⁺, m⁺)` and
/// `(mₙ⁻, m⁻)`, combined.
pub fn signed_vitali(
    ff: &FunctionFamily,
    mf: &MeasureFamily,
    set: &MeasurableSet,
    tol: f64,
    horizon: usize,
) -> Result<TheoremReport> {
    require_scalar(ff)?;
    ff.space().check_same(mf.space())?;
    let h = effective_horizon(horizon, &[ff.max_index(), mf.max_index()]);
    let family = format!("{} / {}", ff.name(), mf.name());
    let mut report = TheoremReport::new("th1s", &family, h, tol);
    let pos = mf.jordan_pos();
    let neg = mf.jordan_neg();
    let variation = MeasureFamily::combination(vec![(1.0, pos.clone()), (1.0, neg.clone())])?.with_name("|mₙ|");

    report.hypothesis(uac_hypothesis("uac_fn_variation", ff, &variation, h)?);
    let mut im = check_in_measure(ff, mf.limit(), h)?;
    im.label = "in_variation_measure".into();
    report.hypothesis(im);
    let constant_f = FunctionFamily::constant(ff.limit());
    let ui_pos = check_ui(&constant_f, &pos, h)?;
    let ui_neg = check_ui(&constant_f, &neg, h)?;
    report.hypothesis(HypothesisResult::new(
        "ui_f_jordan",
        ui_pos.verdict.and(ui_neg.verdict),
        "u.i. of f with respect to mₙ⁺ and mₙ⁻",
    ));
    let mut sp = check_setwise(&pos, h)?;
    sp.label = "setwise_pos".into();
    let mut sn = check_setwise(&neg, h)?;
    sn.label = "setwise_neg".into();
    report.hypothesis(sp);
    report.hypothesis(sn);

    let target = integrate_scalar(ff.limit(), mf.limit(), set)?;
    report.curve = gap_curve(ff, mf, set, h, target)?;
    for (label, part) in [("positive part", &pos), ("negative part", &neg)] {
        let t = integrate_scalar(ff.limit(), part.limit(), set)?;
        report.curves.push(NamedCurve {
            label: label.into(),
            points: gap_curve(ff, part, set, h, t)?,
        });
    }
    report.tail_bound = vitali_tail(ff, &pos, h).zip(vitali_tail(ff, &neg, h)).map(|(a, b)| a + b);
    report.conclude();
    Ok(report)
}

/// Uniform integrability versus u.a.c. plus bounded integrals, for a
/// bounded sequence of measures.
pub fn check_p4_equivalence(
    ff: &FunctionFamily,
    mf: &MeasureFamily,
    epsilon_grid: &[f64],
    horizon: usize,
) -> Result<TheoremReport> {
    ff.space().check_same(mf.space())?;
    let h = effective_horizon(horizon, &[ff.max_index(), mf.max_index()]);
    let family = format!("{} / {}", ff.name(), mf.name());
    let mut report = TheoremReport::new("p4", &family, h, 0.0);
    let mut mass_sup = 0.0f64;
    for n in 1..=h {
        let m = mf.at(n)?;
        if m.require_nonnegative().is_err() {
            report.not_applicable(format!("m_{n} is signed"));
            return Ok(report);
        }
        mass_sup = mass_sup.max(m.total());
    }
    let Some(tail_mass) = mf.mass_bound_from(h + 1) else {
        report.not_applicable("no bound on sup_n mₙ(Ω) beyond the horizon");
        return Ok(report);
    };
    report.hypothesis(HypothesisResult::new(
        "bounded_measures",
        Verdict::Holds,
        format!("sup_n mₙ(Ω) ≤ {}", mass_sup.max(tail_mass)),
    ));
    let ui = check_ui(ff, mf, h)?;
    let (uac, certs) = uac_problem(ff, mf, h)?.certify_grid(epsilon_grid);
    let bound = check_integral_bound(ff, mf, h)?;
    let rhs = uac.and(bound.verdict);
    report.auxiliary.push(AuxCheck {
        label: "ui".into(),
        verdict: ui.verdict,
        value: ui.values.last().copied().unwrap_or(0.0),
        detail: "sup_n ∫_{|fₙ|>α} |fₙ| dmₙ at the largest α".into(),
    });
    let delta = certs.iter().map(|c| c.delta).fold(f64::INFINITY, f64::min);
    report.auxiliary.push(AuxCheck {
        label: "uac".into(),
        verdict: uac,
        value: delta,
        detail: "smallest δ over the ε grid".into(),
    });
    report.auxiliary.push(AuxCheck {
        label: "e12".into(),
        verdict: bound.verdict,
        value: bound.horizon_sup,
        detail: "sup_n ∫ |fₙ| dmₙ over the horizon".into(),
    });
    report.curves.push(NamedCurve {
        label: "ui curve (alpha index, value)".into(),
        points: ui.values.iter().copied().enumerate().collect(),
    });
    report.verdict = match (ui.verdict, rhs) {
        (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => ReportVerdict::Inconclusive,
        (l, r) if l == r => ReportVerdict::Pass,
        _ => ReportVerdict::Refuted,
    };
    Ok(report)
}

/// With `mₙ ≤ m` atomwise, the u.a.c. of the limit `f` follows from the
/// remaining hypotheses; checks that it does.
pub fn domination_transfer(
    ff: &FunctionFamily,
    mf: &MeasureFamily,
    epsilon_grid: &[f64],
    horizon: usize,
) -> Result<TheoremReport> {
    require_scalar(ff)?;
    ff.space().check_same(mf.space())?;
    let h = effective_horizon(horizon, &[ff.max_index(), mf.max_index()]);
    let family = format!("{} / {}", ff.name(), mf.name());
    let mut report = TheoremReport::new("quest", &family, h, 0.0);
    let limit = mf.limit();
    for n in 1..=h {
        let mn = mf.at(n)?;
        if mn.require_nonnegative().is_err() || !mn.le(limit)? {
            report.not_applicable(format!("m_{n} is not dominated by m"));
            return Ok(report);
        }
    }
    report.hypothesis(HypothesisResult::new("dominated", Verdict::Holds, "0 ≤ mₙ ≤ m atomwise over the horizon"));
    report.hypothesis(uac_hypothesis("uac_fn", ff, mf, h)?);
    report.hypothesis(check_in_measure(ff, limit, h)?);
    report.hypothesis(check_setwise(mf, h)?);

    let constant_f = FunctionFamily::constant(ff.limit());
    let (conclusion, certs) = uac_problem(&constant_f, mf, h)?.certify_grid(epsilon_grid);
    let delta = certs.iter().map(|c| c.delta).fold(f64::INFINITY, f64::min);
    report.auxiliary.push(AuxCheck {
        label: "uac_f".into(),
        verdict: conclusion,
        value: delta,
        detail: "u.a.c. of the limit with respect to (mₙ)".into(),
    });
    let full = limit.space().full();
    let lhs = integrate_abs(ff.limit(), limit, &full)?;
    let mut tail_min = f64::INFINITY;
    for n in (h / 2).max(1)..=h {
        tail_min = tail_min.min(integrate_abs(&ff.at(n)?, &mf.at(n)?, &full)?);
    }
    let slack = vitali_tail(ff, mf, (h / 2).max(1)).unwrap_or(f64::INFINITY);
    report.auxiliary.push(AuxCheck {
        label: "fatou".into(),
        verdict: Verdict::from_bool(lhs <= tail_min + slack),
        value: lhs - tail_min,
        detail: "∫|f| dm - min over the upper half horizon of ∫|fₙ| dmₙ".into(),
    });
    report.verdict = if !report.hypotheses_hold() {
        ReportVerdict::HypothesisFailed
    } else {
        match conclusion {
            Verdict::Holds => ReportVerdict::Pass,
            Verdict::Fails => ReportVerdict::Refuted,
            Verdict::Inconclusive => ReportVerdict::Inconclusive,
        }
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{mass_escape_family, vacuous_uac_family};
    use crate::measure::{subsets, AtomSpace};

    fn f(v: &[f64]) -> AtomFunction {
        AtomFunction::scalar(v.to_vec()).unwrap()
    }

    fn m(w: &[f64]) -> SignedMeasure {
        SignedMeasure::new(w.to_vec()).unwrap()
    }

    #[test]
    fn worst_set_examples() {
        let w = worst_set_integral(&f(&[10.0, 1.0]), &m(&[0.05, 0.9]), 0.1).unwrap();
        assert!((w.value - 0.5).abs() < 1e-15);
        assert_eq!(w.set.unwrap().indices(), vec![0]);
        let w = worst_set_integral(&f(&[10.0, 1.0]), &m(&[0.05, 0.9]), 0.05).unwrap();
        assert_eq!(w.value, 0.0);
        let w = worst_set_integral(&f(&[2.0, 2.0, 2.0]), &m(&[0.1, 0.2, 0.3]), 0.45).unwrap();
        assert!(w.value <= 2.0 * 0.45);
        assert!(worst_set_integral(&f(&[1.0]), &m(&[-1.0]), 0.1).is_err());
    }

    #[test]
    fn knapsack_matches_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..300 {
            let n = rng.gen_range(1..=10);
            let absf: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..5.0)).collect();
            let w: Vec<f64> = (0..n).map(|_| if rng.gen_bool(0.1) { 0.0 } else { rng.gen_range(0.0..1.0) }).collect();
            let cap = rng.gen_range(0.01..2.0);
            let order = ratio_order(&absf);
            let mut brute = 0.0f64;
            for set in subsets(n).unwrap() {
                let mass: f64 = set.iter().map(|i| w[i]).sum();
                if mass < cap {
                    brute = brute.max(set.iter().map(|i| absf[i] * w[i]).sum());
                }
            }
            let (exact, _) = knapsack(&absf, &w, &order, cap);
            assert!((exact - brute).abs() < 1e-12, "{exact} vs {brute}");
            assert!(fractional(&absf, &w, &order, cap) >= brute - 1e-12);
        }
    }

    #[test]
    fn uac_examples() {
        let space = AtomSpace::new(4).unwrap();
        let base = m(&[0.3, 0.2, 0.4, 0.1]);
        let mf = MeasureFamily::convex_mix(&base, &m(&[0.25; 4]), Decay::harmonic()).unwrap();
        let ff = FunctionFamily::constant(&f(&[2.0, -1.0, 0.5, 1.5]));
        let c = check_uac(&ff, &mf, 1e-3, 64).unwrap();
        assert_eq!(c.verdict, Verdict::Holds);
        for n in 1..=64 {
            let mn = mf.at(n).unwrap();
            for set in crate::measure::subsets(4).unwrap() {
                if mn.eval(&set).unwrap() < c.delta {
                    assert!(integrate_abs(&ff.at(n).unwrap(), &mn, &set).unwrap() < 1e-3);
                }
            }
        }

        let zero = FunctionFamily::constant(&AtomFunction::constant(&space, 0.0));
        let c = check_uac(&zero, &mf, 1e-6, 64).unwrap();
        assert_eq!(c.verdict, Verdict::Holds);
        assert_eq!(c.delta, 1.0);

        let (mf, ff) = mass_escape_family(&space, 1.0).unwrap();
        let c = check_uac(&ff, &mf, 0.1, 128).unwrap();
        assert_eq!(c.verdict, Verdict::Fails);
        let w = c.witness.unwrap();
        assert_eq!(w.set.indices(), vec![w.n % 4]);
        assert!((w.integral - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ui_examples() {
        let space = AtomSpace::new(3).unwrap();
        let (mf, ff) = mass_escape_family(&space, 1.0).unwrap();
        let ui = check_ui(&ff, &mf, 64).unwrap();
        assert_eq!(ui.verdict, Verdict::Fails);
        assert!(ui.values.iter().all(|v| (v - 1.0).abs() < 1e-12));

        let g = f(&[3.0, -1.0, 0.0]);
        let c = MeasureFamily::constant(&m(&[0.2, 0.3, 0.5]));
        let ui = check_ui(&FunctionFamily::constant(&g), &c, 64).unwrap();
        assert_eq!(ui.verdict, Verdict::Holds);
        assert!((ui.values[0] - 0.9).abs() < 1e-15);
        assert!((ui.value_at(2.0) - 0.6).abs() < 1e-15);
        assert_eq!(ui.value_at(4.0), 0.0);
        for w in ui.values.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn p4_separates_on_vacuous_family() {
        let space = AtomSpace::new(4).unwrap();
        let (mf, ff) = vacuous_uac_family(&space, 1.0, 1.0).unwrap();
        let r = check_p4_equivalence(&ff, &mf, &EPSILON_GRID, 64).unwrap();
        assert_eq!(r.verdict, ReportVerdict::Pass);
        let get = |l: &str| r.auxiliary.iter().find(|a| a.label == l).unwrap().verdict;
        assert_eq!(get("uac"), Verdict::Holds);
        assert_eq!(get("e12"), Verdict::Fails);
        assert_eq!(get("ui"), Verdict::Fails);

        let (mf, ff) = mass_escape_family(&space, 1.0).unwrap();
        let r = check_p4_equivalence(&ff, &mf, &EPSILON_GRID, 64).unwrap();
        assert_eq!(r.verdict, ReportVerdict::Pass);
        assert_eq!(get_from(&r, "ui"), Verdict::Fails);
        assert_eq!(get_from(&r, "uac"), Verdict::Fails);
    }

    fn get_from(r: &TheoremReport, l: &str) -> Verdict {
        r.auxiliary.iter().find(|a| a.label == l).unwrap().verdict
    }

    #[test]
    fn vitali_examples() {
        let g = f(&[1.0, -2.0, 0.5]);
        let base = m(&[0.2, 0.3, 0.5]);
        let mf = MeasureFamily::convex_mix(&base, &m(&[1.0, 0.0, 0.0]), Decay::harmonic()).unwrap();
        let ff = FunctionFamily::constant(&g);
        let set = MeasurableSet::full(3);
        let r = vitali_limit(&ff, &mf, &set, 1e-2, 512).unwrap();
        assert_eq!(r.verdict, ReportVerdict::Pass, "{r:#?}");
        let tv = mf.tv_cert().unwrap();
        for &(n, gap) in &r.curve {
            assert!(gap <= g.sup_norm() * tv.eval(n) + 1e-15);
        }

        let r = vitali_limit(&ff, &MeasureFamily::constant(&base), &set, 1e-12, 32).unwrap();
        assert!(r.curve.iter().all(|p| p.1 == 0.0));

        let space = AtomSpace::new(3).unwrap();
        let (mf, ff) = mass_escape_family(&space, 1.0).unwrap();
        let r = vitali_limit(&ff, &mf, &set, 1e-2, 128).unwrap();
        assert_eq!(r.verdict, ReportVerdict::HypothesisFailed);
        assert_eq!(r.hypothesis_verdict("uac_fn"), Some(Verdict::Fails));
    }

    #[test]
    fn rademacher_is_rejected_by_vitali() {
        let mf = MeasureFamily::rademacher(6).unwrap();
        let ff = FunctionFamily::constant(&AtomFunction::constant(mf.space(), 1.0));
        let r = vitali_limit(&ff, &mf, &mf.space().full(), 1e-3, 512).unwrap();
        assert_eq!(r.verdict, ReportVerdict::HypothesisFailed);
        let r = signed_vitali(&ff, &mf, &mf.space().full(), 1e-3, 512).unwrap();
        assert_eq!(r.verdict, ReportVerdict::HypothesisFailed);
        assert_eq!(r.hypothesis_verdict("setwise_pos"), Some(Verdict::Fails));
    }

    #[test]
    fn signed_vitali_examples() {
        let base = m(&[0.5, -0.25, 0.75, -1.0]);
        let dir = m(&[0.1, -0.2, 0.3, 0.1]);
        let mf = MeasureFamily::perturbed(&base, &dir, Decay::harmonic()).unwrap();
        let g = f(&[1.0, 2.0, -1.0, 0.5]);
        let ff = FunctionFamily::constant(&g);
        let set = MeasurableSet::from_indices(4, &[0, 1, 3]).unwrap();
        let r = signed_vitali(&ff, &mf, &set, 1e-2, 256).unwrap();
        assert_eq!(r.verdict, ReportVerdict::Pass, "{r:#?}");
        for (i, &(_, gap)) in r.curve.iter().enumerate() {
            let parts: f64 = r.curves.iter().map(|c| c.points[i].1).sum();
            assert!(gap <= parts + 1e-12);
        }
        let fixed = signed_vitali(&ff, &MeasureFamily::constant(&base), &set, 1e-12, 32).unwrap();
        assert!(fixed.curve.iter().all(|p| p.1 == 0.0));
    }

    #[test]
    fn domination_examples() {
        let base = m(&[0.2, 0.3, 0.5]);
        let ff = FunctionFamily::constant(&f(&[1.0, -2.0, 4.0]));
        let dom = MeasureFamily::dominated(&base, Decay::harmonic()).unwrap();
        let r = domination_transfer(&ff, &dom, &EPSILON_GRID, 128).unwrap();
        assert_eq!(r.verdict, ReportVerdict::Pass, "{r:#?}");
        let r = domination_transfer(&ff, &MeasureFamily::constant(&base), &EPSILON_GRID, 32).unwrap();
        assert_eq!(r.verdict, ReportVerdict::Pass);
        let mix = MeasureFamily::convex_mix(&base, &m(&[1.0, 0.0, 0.0]), Decay::harmonic()).unwrap();
        let r = domination_transfer(&ff, &mix, &EPSILON_GRID, 32).unwrap();
        assert_eq!(r.verdict, ReportVerdict::NotApplicable);
    }
}
