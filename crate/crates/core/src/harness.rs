//! Campaign configuration, family specifications, the parallel suite runner,
//! the counterexample gallery and plot-data export.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::certificate::{Decay, DecayCertificate};
use crate::convex::Polytope;
use crate::error::{invalid, Error, Result};
use crate::families::{
    mass_escape_family, templates, vacuous_uac_family, FunctionFamily, MeasureFamily, MultiFamily,
};
use crate::integrability::{
    check_p4_equivalence, check_uac, check_ui, domination_transfer, signed_vitali, vitali_limit, EPSILON_GRID,
};
use crate::mcshane::{
    check_equi_integrable, check_thmc_multivalued, check_thmcsequi, ConvergenceMode, DensityFamily, DensityMeasure,
    IntervalSet, StepFamily, StepFn, StepMulti, StepMultiFamily,
};
use crate::measure::{sup_gap_over, sup_set_gap, total_variation_distance, AtomFunction, AtomSpace, MeasurableSet};
use crate::report::{AuxCheck, NamedCurve, ReportVerdict, TheoremReport, Verdict};
use crate::setvalued::{check_th1m, check_th2v, check_thmulti, check_thmulti2, MultiMap, UNIFORM_SET_LIMIT};

/// Version of the suite output format.
pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable overriding the configured seed.
pub const SEED_ENV: &str = "VARMEAS_SEED";

pub const DEFAULT_CONFIG: &str = include_str!("../configs/default.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremId {
    Th1,
    Th1s,
    Thmulti,
    Thmulti2,
    Th2v,
    Th1m,
    Thmcsequi,
    Thmc,
    P4,
    Quest,
}

impl TheoremId {
    pub const ALL: [TheoremId; 10] = [
        TheoremId::Th1,
        TheoremId::Th1s,
        TheoremId::Thmulti,
        TheoremId::Thmulti2,
        TheoremId::Th2v,
        TheoremId::Th1m,
        TheoremId::Thmcsequi,
        TheoremId::Thmc,
        TheoremId::P4,
        TheoremId::Quest,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TheoremId::Th1 => "th1",
            TheoremId::Th1s => "th1s",
            TheoremId::Thmulti => "thmulti",
            TheoremId::Thmulti2 => "thmulti2",
            TheoremId::Th2v => "th2v",
            TheoremId::Th1m => "th1m",
            TheoremId::Thmcsequi => "thmcsequi",
            TheoremId::Thmc => "thmc",
            TheoremId::P4 => "p4",
            TheoremId::Quest => "quest",
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for TheoremId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TheoremId::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| invalid(format!("unknown theorem id {s:?}")))
    }
}

/// Optional certificate overrides attached to a family spec.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateOverrides {
    pub setwise: Option<DecayCertificate>,
    pub tv: Option<DecayCertificate>,
    pub inmeasure: Option<DecayCertificate>,
    pub equiconv: Option<DecayCertificate>,
}

/// A family as written in JSON: a constructor kind, its parameters,
/// certificate overrides and the verdict expected per theorem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default)]
    pub params: Value,
    #[serde(default)]
    pub certificates: CertificateOverrides,
    #[serde(default)]
    pub expect: BTreeMap<TheoremId, ReportVerdict>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FamilyEntry {
    Path(PathBuf),
    Inline(Box<FamilySpec>),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub seed: u64,
    pub horizon: usize,
    pub tolerance: f64,
    pub theorems: Vec<TheoremId>,
    pub families: Vec<FamilyEntry>,
    #[serde(default)]
    pub output: OutputSpec,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig::from_json(DEFAULT_CONFIG).expect("the bundled default config is valid")
    }
}

impl CampaignConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: CampaignConfig = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut c = CampaignConfig::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for f in &mut c.families {
            if let FamilyEntry::Path(p) = f {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon < 8 {
            return Err(invalid(format!("horizon must be at least 8, got {}", self.horizon)));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(invalid(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        Ok(())
    }

    /// Applies `VARMEAS_SEED` when set.
    pub fn with_env_overrides(mut self) -> Result<Self> {
        if let Ok(s) = std::env::var(SEED_ENV) {
            self.seed = s
                .trim()
                .parse()
                .map_err(|_| invalid(format!("{SEED_ENV} must be an unsigned integer, got {s:?}")))?;
        }
        Ok(self)
    }

    pub fn family_specs(&self) -> Result<Vec<FamilySpec>> {
        self.families
            .iter()
            .map(|f| match f {
                FamilyEntry::Inline(s) => Ok((**s).clone()),
                FamilyEntry::Path(p) => load_family_spec(p),
            })
            .collect()
    }
}

pub fn load_family_spec(path: &Path) -> Result<FamilySpec> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

/// Process exit code for an error: 2 for malformed input, 3 for an
/// internal invariant breach.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Invariant(_) => 3,
        _ => 2,
    }
}

/// A constructed family together with the test sets its theorems use.
#[derive(Clone, Debug)]
pub enum Instance {
    Scalar {
        ff: FunctionFamily,
        mf: MeasureFamily,
        set: MeasurableSet,
    },
    Multi {
        multi: MultiFamily,
        mf: MeasureFamily,
        sets: Vec<MeasurableSet>,
    },
    Step {
        ff: StepFamily,
        mf: DensityFamily,
        sets: Vec<IntervalSet>,
        mode: ConvergenceMode,
    },
    StepMulti {
        gf: StepMultiFamily,
        mf: DensityFamily,
        sets: Vec<IntervalSet>,
        mode: ConvergenceMode,
    },
}

impl Instance {
    pub fn applies(&self, theorem: TheoremId) -> bool {
        use TheoremId::*;
        match self {
            Instance::Scalar { ff, .. } => match theorem {
                Th1 | Th1s | Quest => ff.dim() == 1,
                Th1m => ff.space().n_atoms() <= UNIFORM_SET_LIMIT,
                P4 | Th2v | Thmulti | Thmulti2 => true,
                Thmcsequi | Thmc => false,
            },
            Instance::Multi { .. } => matches!(theorem, Thmulti | Thmulti2),
            Instance::Step { .. } => matches!(theorem, Thmcsequi | Thmc),
            Instance::StepMulti { .. } => theorem == Thmc,
        }
    }

    pub fn run(&self, theorem: TheoremId, tol: f64, horizon: usize) -> Result<TheoremReport> {
        if !self.applies(theorem) {
            return Err(invalid(format!("{theorem} does not apply to this family")));
        }
        use TheoremId::*;
        match (self, theorem) {
            (Instance::Scalar { ff, mf, set }, _) => match theorem {
                Th1 => vitali_limit(ff, mf, set, tol, horizon),
                Th1s => signed_vitali(ff, mf, set, tol, horizon),
                P4 => check_p4_equivalence(ff, mf, &EPSILON_GRID, horizon),
                Quest => domination_transfer(ff, mf, &EPSILON_GRID, horizon),
                Th2v => check_th2v(ff, mf, tol, horizon),
                Th1m => check_th1m(ff, mf, tol, horizon),
                Thmulti => {
                    let sets = [mf.space().full(), set.clone()];
                    check_thmulti(&MultiFamily::singleton(ff)?, mf, &sets, tol, horizon)
                }
                Thmulti2 => check_thmulti2(&MultiFamily::singleton(ff)?, mf, tol, horizon),
                Thmcsequi | Thmc => unreachable!(),
            },
            (Instance::Multi { multi, mf, sets }, Thmulti) => check_thmulti(multi, mf, sets, tol, horizon),
            (Instance::Multi { multi, mf, .. }, _) => check_thmulti2(multi, mf, tol, horizon),
            (Instance::Step { ff, mf, sets, mode }, Thmcsequi) => check_thmcsequi(ff, mf, sets, tol, horizon, *mode),
            (Instance::Step { ff, mf, sets, mode }, _) => {
                check_thmc_multivalued(&StepMultiFamily::singleton(ff)?, mf, sets, tol, horizon, *mode)
            }
            (Instance::StepMulti { gf, mf, sets, mode }, _) => {
                check_thmc_multivalued(gf, mf, sets, tol, horizon, *mode)
            }
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RandomParams {
    atoms: usize,
    dim: usize,
    height: f64,
    slope: f64,
    weight: f64,
    level: u32,
    mode: ConvergenceMode,
    at: f64,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams {
            atoms: 6,
            dim: 2,
            height: 1.0,
            slope: 1.0,
            weight: 0.25,
            level: 6,
            mode: ConvergenceMode::Setwise,
            at: 0.5,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CustomScalar {
    m: Vec<f64>,
    mu: Vec<f64>,
    f: Vec<f64>,
    g: Vec<f64>,
    rate: Decay,
    #[serde(default)]
    set: Option<Vec<usize>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CustomStep {
    f: StepFn,
    g: StepFn,
    m: DensityMeasure,
    mu: DensityMeasure,
    rate: Decay,
    #[serde(default = "default_mode")]
    mode: ConvergenceMode,
    #[serde(default)]
    sets: Vec<IntervalSet>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CustomStepMulti {
    gamma: StepMulti,
    m: DensityMeasure,
    mu: DensityMeasure,
    rate: Decay,
    #[serde(default = "default_mode")]
    mode: ConvergenceMode,
    #[serde(default)]
    sets: Vec<IntervalSet>,
}

fn default_mode() -> ConvergenceMode {
    ConvergenceMode::Setwise
}

/// Rates fast enough that the default tolerances are met by moderate horizons.
fn fast_rate(rng: &mut impl Rng) -> Decay {
    if rng.gen_bool(0.5) {
        Decay::Power {
            c: rng.gen_range(0.5..1.0),
            p: rng.gen_range(1.5..2.0),
        }
    } else {
        Decay::Geometric {
            c: rng.gen_range(0.5..1.0),
            q: rng.gen_range(0.5..0.9),
        }
    }
}

fn random_set(rng: &mut impl Rng, n: usize) -> MeasurableSet {
    let mut s = MeasurableSet::from_predicate(n, |_| rng.gen_bool(0.5));
    if s.is_empty() {
        s.insert(0);
    }
    s
}

fn random_polygon(rng: &mut impl Rng, dim: usize) -> Result<Polytope> {
    let pts: Vec<Vec<f64>> = (0..dim + 3)
        .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    Ok(Polytope::new(dim, &pts)?.canonical())
}

fn dyadic(rng: &mut impl Rng) -> f64 {
    rng.gen_range(1..32) as f64 / 32.0
}

fn random_step(rng: &mut impl Rng, bound: f64) -> Result<StepFn> {
    let mut cuts: Vec<f64> = (0..3).map(|_| dyadic(rng)).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut breaks = vec![0.0];
    breaks.extend(cuts);
    breaks.push(1.0);
    let values = (1..breaks.len()).map(|_| rng.gen_range(-bound..bound)).collect();
    StepFn::scalar(breaks, values)
}

fn random_density(rng: &mut impl Rng) -> Result<DensityMeasure> {
    let cut = dyadic(rng);
    DensityMeasure::new(vec![0.0, cut, 1.0], vec![rng.gen_range(0.2..2.0), rng.gen_range(0.2..2.0)])
}

fn apply_overrides(spec: &FamilySpec, instance: Instance) -> Instance {
    let c = &spec.certificates;
    let mf_over = |mf: MeasureFamily| {
        let mf = if c.setwise.is_some() { mf.with_setwise_cert(c.setwise.clone()) } else { mf };
        if c.tv.is_some() {
            mf.with_tv_cert(c.tv.clone())
        } else {
            mf
        }
    };
    match instance {
        Instance::Scalar { ff, mf, set } => Instance::Scalar {
            ff: if c.inmeasure.is_some() { ff.with_inmeasure_cert(c.inmeasure.clone()) } else { ff },
            mf: mf_over(mf),
            set,
        },
        Instance::Multi { multi, mf, sets } => Instance::Multi {
            multi: if c.equiconv.is_some() { multi.with_equiconv_cert(c.equiconv.clone()) } else { multi },
            mf: mf_over(mf),
            sets,
        },
        other => other,
    }
}

/// Seeds the stream of family `index` from the campaign seed.
pub fn family_rng(seed: u64, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Builds the instance described by `spec`.
pub fn build_instance(spec: &FamilySpec, rng: &mut impl Rng) -> Result<Instance> {
    let params = if spec.params.is_null() {
        Value::Object(Default::default())
    } else {
        spec.params.clone()
    };
    let parse_err = |e: serde_json::Error| invalid(format!("family {:?}: {e}", spec.kind));
    let instance = match spec.kind.as_str() {
        "custom_scalar" => {
            let p: CustomScalar = serde_json::from_value(params).map_err(parse_err)?;
            let space = AtomSpace::new(p.m.len())?;
            let f = AtomFunction::from_flat(&space, 1, p.f)?;
            let g = AtomFunction::from_flat(&space, 1, p.g)?;
            let m = crate::measure::SignedMeasure::on(&space, p.m)?;
            let mu = crate::measure::SignedMeasure::on(&space, p.mu)?;
            let set = match p.set {
                Some(idx) => MeasurableSet::from_indices(space.n_atoms(), &idx)?,
                None => space.full(),
            };
            Instance::Scalar {
                ff: FunctionFamily::perturbed(&f, &g, p.rate)?,
                mf: MeasureFamily::convex_mix(&m, &mu, p.rate)?,
                set,
            }
        }
        "custom_step" => {
            let p: CustomStep = serde_json::from_value(params).map_err(parse_err)?;
            Instance::Step {
                ff: StepFamily::perturbed(&p.f, &p.g, p.rate)?,
                mf: DensityFamily::convex_mix(&p.m, &p.mu, p.rate)?,
                sets: p.sets,
                mode: p.mode,
            }
        }
        "custom_step_multi" => {
            let p: CustomStepMulti = serde_json::from_value(params).map_err(parse_err)?;
            Instance::StepMulti {
                gf: StepMultiFamily::scaled(&p.gamma, p.rate)?,
                mf: DensityFamily::convex_mix(&p.m, &p.mu, p.rate)?,
                sets: p.sets,
                mode: p.mode,
            }
        }
        kind => {
            let p: RandomParams = serde_json::from_value(params).map_err(parse_err)?;
            random_instance(kind, &p, rng)?
        }
    };
    Ok(apply_overrides(spec, instance))
}

fn random_instance(kind: &str, p: &RandomParams, rng: &mut impl Rng) -> Result<Instance> {
    let space = || AtomSpace::new(p.atoms);
    Ok(match kind {
        "bounded_pair" | "vector_pair" => {
            let space = space()?;
            let dim = if kind == "bounded_pair" { 1 } else { p.dim };
            let f: Vec<f64> = (0..p.atoms * dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let g: Vec<f64> = (0..p.atoms * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let f = AtomFunction::from_flat(&space, dim, f)?;
            let g = AtomFunction::from_flat(&space, dim, g)?;
            let m = templates::random_nonneg_measure(rng, &space);
            let mu = templates::random_nonneg_measure(rng, &space);
            Instance::Scalar {
                ff: FunctionFamily::perturbed(&f, &g, fast_rate(rng))?,
                mf: MeasureFamily::convex_mix(&m, &mu, fast_rate(rng))?,
                set: random_set(rng, p.atoms),
            }
        }
        "dominated_pair" => {
            let space = space()?;
            let f: Vec<f64> = (0..p.atoms).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let g: Vec<f64> = (0..p.atoms).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let f = AtomFunction::from_flat(&space, 1, f)?;
            let g = AtomFunction::from_flat(&space, 1, g)?;
            let m = templates::random_nonneg_measure(rng, &space);
            Instance::Scalar {
                ff: FunctionFamily::perturbed(&f, &g, fast_rate(rng))?,
                mf: MeasureFamily::dominated(&m, fast_rate(rng))?,
                set: random_set(rng, p.atoms),
            }
        }
        "mass_escape" => {
            let (mf, ff) = mass_escape_family(&space()?, p.height)?;
            Instance::Scalar {
                set: mf.space().full(),
                ff,
                mf,
            }
        }
        "vacuous_uac" => {
            let (mf, ff) = vacuous_uac_family(&space()?, p.slope, p.weight)?;
            Instance::Scalar {
                set: mf.space().full(),
                ff,
                mf,
            }
        }
        "rademacher" => {
            let mf = MeasureFamily::rademacher(p.level)?;
            let ff = FunctionFamily::constant(&AtomFunction::constant(mf.space(), 1.0));
            Instance::Scalar {
                set: mf.space().full(),
                ff,
                mf,
            }
        }
        "multi_scaled" => {
            let space = space()?;
            let bodies = (0..p.atoms)
                .map(|_| random_polygon(rng, p.dim))
                .collect::<Result<Vec<_>>>()?;
            let g = MultiMap::new(&space, p.dim, bodies)?;
            let m = templates::random_nonneg_measure(rng, &space);
            let mu = templates::random_nonneg_measure(rng, &space);
            Instance::Multi {
                multi: MultiFamily::scaled(&g, fast_rate(rng))?,
                mf: MeasureFamily::convex_mix(&m, &mu, fast_rate(rng))?,
                sets: vec![space.full(), random_set(rng, p.atoms)],
            }
        }
        "multi_mass_escape" => {
            let space = space()?;
            Instance::Multi {
                multi: MultiFamily::mass_escape(&space, p.dim, p.height)?,
                mf: MeasureFamily::mass_escape(&space, 1.0)?,
                sets: vec![space.full()],
            }
        }
        "step_perturbed" | "step_drift" => {
            let f = random_step(rng, 2.0)?;
            let ff = if kind == "step_perturbed" {
                StepFamily::perturbed(&f, &random_step(rng, 1.0)?, fast_rate(rng))?
            } else {
                StepFamily::drift(&f, p.at, &[p.height], Decay::Geometric { c: 0.25, q: 0.5 })?
            };
            let mf = DensityFamily::convex_mix(&random_density(rng)?, &random_density(rng)?, fast_rate(rng))?;
            Instance::Step {
                ff,
                mf,
                sets: vec![IntervalSet::interval(0.0, dyadic(rng))?],
                mode: p.mode,
            }
        }
        "step_spike" => Instance::Step {
            ff: StepFamily::spike(&StepFn::constant(&[0.0])?, p.at, &[p.height])?,
            mf: DensityFamily::constant(&DensityMeasure::lebesgue()),
            sets: vec![],
            mode: p.mode,
        },
        "step_oscillating" => Instance::Step {
            ff: StepFamily::constant(&StepFn::scalar(vec![0.0, 0.5, 1.0], vec![1.0, 2.0])?),
            mf: DensityFamily::oscillating(&DensityMeasure::lebesgue()),
            sets: vec![IntervalSet::interval(0.0, 0.25)?],
            mode: p.mode,
        },
        "interval_scaled" => Instance::StepMulti {
            gf: StepMultiFamily::scaled(&StepMulti::constant(&Polytope::interval(0.0, p.height)?), Decay::harmonic())?,
            mf: DensityFamily::constant(&DensityMeasure::lebesgue()),
            sets: vec![],
            mode: p.mode,
        },
        "step_multi_scaled" => {
            let cut = dyadic(rng);
            let bodies = vec![random_polygon(rng, p.dim)?, random_polygon(rng, p.dim)?];
            let gamma = StepMulti::new(vec![0.0, cut, 1.0], bodies)?;
            Instance::StepMulti {
                gf: StepMultiFamily::scaled(&gamma, fast_rate(rng))?,
                mf: DensityFamily::convex_mix(&random_density(rng)?, &random_density(rng)?, fast_rate(rng))?,
                sets: vec![IntervalSet::interval(0.0, cut)?],
                mode: p.mode,
            }
        }
        other => return Err(invalid(format!("unknown family kind {other:?}"))),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    ExpectedFail,
    Unexpected,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JobResult {
    pub theorem: TheoremId,
    pub family: String,
    pub expected: ReportVerdict,
    pub outcome: Outcome,
    pub report: TheoremReport,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub jobs: usize,
    pub pass: usize,
    pub expected_fail: usize,
    pub unexpected: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteOutput {
    pub schema: u32,
    pub seed: u64,
    pub horizon: usize,
    pub tolerance: f64,
    pub results: Vec<JobResult>,
    pub summary: Summary,
}

impl SuiteOutput {
    pub fn exit_code(&self) -> i32 {
        if self.summary.unexpected == 0 {
            0
        } else {
            1
        }
    }
}

fn family_name(spec: &FamilySpec, index: usize) -> String {
    spec.name.clone().unwrap_or_else(|| format!("{}#{index}", spec.kind))
}

fn outcome(expected: ReportVerdict, got: ReportVerdict) -> Outcome {
    match (expected, got) {
        (ReportVerdict::Pass, ReportVerdict::Pass) => Outcome::Pass,
        (e, g) if e == g => Outcome::ExpectedFail,
        _ => Outcome::Unexpected,
    }
}

/// Runs every applicable (theorem, family) pair of the campaign in parallel;
/// results come back in configuration order.
pub fn run_suite(config: &CampaignConfig) -> Result<SuiteOutput> {
    config.validate()?;
    let specs = config.family_specs()?;
    let mut jobs = Vec::new();
    for (i, spec) in specs.iter().enumerate() {
        let instance = build_instance(spec, &mut family_rng(config.seed, i))?;
        for &t in &config.theorems {
            if instance.applies(t) {
                jobs.push((t, i, instance.clone()));
            }
        }
    }
    let results = jobs
        .par_iter()
        .map(|(t, i, instance)| {
            let spec = &specs[*i];
            let mut report = instance.run(*t, config.tolerance, config.horizon)?;
            let family = family_name(spec, *i);
            report.family = format!("{family}: {}", report.family);
            let expected = spec.expect.get(t).copied().unwrap_or(ReportVerdict::Pass);
            Ok(JobResult {
                theorem: *t,
                family,
                expected,
                outcome: outcome(expected, report.verdict),
                report,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut summary = Summary {
        jobs: results.len(),
        ..Summary::default()
    };
    for r in &results {
        match r.outcome {
            Outcome::Pass => summary.pass += 1,
            Outcome::ExpectedFail => summary.expected_fail += 1,
            Outcome::Unexpected => summary.unexpected += 1,
        }
    }
    Ok(SuiteOutput {
        schema: SCHEMA_VERSION,
        seed: config.seed,
        horizon: config.horizon,
        tolerance: config.tolerance,
        results,
        summary,
    })
}

/// Runs one theorem on one family spec.
pub fn run_check(
    theorem: TheoremId,
    spec: &FamilySpec,
    horizon: usize,
    tol: f64,
    seed: u64,
) -> Result<(TheoremReport, Outcome)> {
    let instance = build_instance(spec, &mut family_rng(seed, 0))?;
    let report = instance.run(theorem, tol, horizon)?;
    let expected = spec.expect.get(&theorem).copied().unwrap_or(ReportVerdict::Pass);
    let o = outcome(expected, report.verdict);
    Ok((report, o))
}

pub const GALLERY_IDS: [&str; 4] = ["rem2_weak_not_tv", "mass_escape", "vacuous_uac", "straddled_jump"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GalleryReport {
    pub id: String,
    pub description: String,
    pub parameters: Value,
    pub expected: String,
    pub checks: Vec<AuxCheck>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub curves: Vec<NamedCurve>,
    pub reproduced: bool,
}

fn check(label: &str, ok: bool, value: f64, detail: impl Into<String>) -> AuxCheck {
    AuxCheck {
        label: label.into(),
        verdict: Verdict::from_bool(ok),
        value,
        detail: detail.into(),
    }
}

/// Reproduces a counterexample and checks its expected split verdict.
pub fn gallery(id: &str, level: Option<u32>) -> Result<GalleryReport> {
    let (description, parameters, expected, checks, curves) = match id {
        "rem2_weak_not_tv" => {
            let level = level.unwrap_or(10);
            if level < 4 {
                return Err(invalid("the Rademacher gallery needs level at least 4"));
            }
            let mf = MeasureFamily::rademacher(level)?;
            let n_atoms = mf.space().n_atoms();
            let block = n_atoms / 8;
            let coarse: Vec<MeasurableSet> = (0..256u64)
                .map(|mask| {
                    MeasurableSet::from_predicate(n_atoms, |i| mask >> (i / block) & 1 == 1)
                })
                .collect();
            let mut tv = Vec::new();
            let mut gap = Vec::new();
            for n in 1..=level as usize {
                let mn = mf.at(n)?;
                tv.push((n, total_variation_distance(&mn, mf.limit())?));
                gap.push((n, sup_gap_over(&mn, mf.limit(), &coarse)?));
            }
            let tv_err = tv.iter().map(|p| (p.1 - 1.0).abs()).fold(0.0, f64::max);
            let final_gap = gap.last().map_or(0.0, |p| p.1);
            let full = sup_set_gap(&mf.at(level as usize)?, mf.limit())?;
            (
                "Rademacher signed measures: setwise convergent on a fixed coarse algebra, at total variation distance 1",
                serde_json::json!({ "level": level, "coarse_level": 3 }),
                "tv distance 1 for every n; coarse-algebra gap 0 at n = level",
                vec![
                    check("tv_equals_one", tv_err <= 1e-12, tv_err, "max |tv(mₙ, 0) - 1|"),
                    check("coarse_gap_vanishes", final_gap <= 1e-12, final_gap, "sup over the level-3 dyadic algebra at n = level"),
                    check("full_algebra_gap", (full - 0.5).abs() <= 1e-12, full, "sup over all sets stays 1/2"),
                ],
                vec![
                    NamedCurve { label: "tv".into(), points: tv },
                    NamedCurve { label: "coarse gap".into(), points: gap },
                ],
            )
        }
        "mass_escape" => {
            let space = AtomSpace::new(4)?;
            let (mf, ff) = mass_escape_family(&space, 1.0)?;
            let ui = check_ui(&ff, &mf, 256)?;
            let uac = check_uac(&ff, &mf, 0.1, 256)?;
            let witness = uac.witness.as_ref().map_or(0.0, |w| w.integral);
            (
                "unit mass 1/n on a moving atom carrying the value n: bounded integrals, no uniform integrability",
                serde_json::json!({ "atoms": 4, "height": 1.0, "horizon": 256 }),
                "uniform integrability fails; u.a.c. fails with a witness set",
                vec![
                    check("ui_fails", ui.verdict == Verdict::Fails, ui.values.last().copied().unwrap_or(0.0), "sup_n ∫_{|fₙ|>α} |fₙ| dmₙ at the largest α"),
                    check("uac_witness", uac.verdict == Verdict::Fails && witness >= 0.1, witness, format!("witness at δ = {:e}", uac.delta)),
                ],
                vec![NamedCurve {
                    label: "ui".into(),
                    points: ui.alphas.iter().zip(&ui.values).enumerate().map(|(k, (_, v))| (k, *v)).collect(),
                }],
            )
        }
        "vacuous_uac" => {
            let space = AtomSpace::new(4)?;
            let (mf, ff) = vacuous_uac_family(&space, 1.0, 0.25)?;
            let r = check_p4_equivalence(&ff, &mf, &EPSILON_GRID, 256)?;
            let get = |label: &str| r.auxiliary.iter().find(|a| a.label == label).map(|a| a.verdict);
            let split = get("ui") == Some(Verdict::Fails)
                && get("uac") == Some(Verdict::Holds)
                && get("e12") == Some(Verdict::Fails);
            (
                "atoms of weight 1/4 carrying the value n: u.a.c. holds vacuously while the integrals are unbounded",
                serde_json::json!({ "atoms": 4, "slope": 1.0, "weight": 0.25, "horizon": 256 }),
                "u.i. fails, u.a.c. holds, integral bound fails; the equivalence holds",
                vec![
                    check("split", split, 0.0, "ui fails, uac holds, e12 fails"),
                    check("equivalence", r.verdict == ReportVerdict::Pass, 0.0, format!("{:?}", r.verdict)),
                ],
                vec![],
            )
        }
        "straddled_jump" => {
            let ff = StepFamily::spike(&StepFn::constant(&[0.0])?, 0.5, &[1.0])?;
            let mf = DensityFamily::constant(&DensityMeasure::lebesgue());
            let e = check_equi_integrable(&ff, &mf, 1e-2, 512)?;
            let r = check_thmcsequi(&ff, &mf, &[], 1e-2, 512, ConvergenceMode::Setwise)?;
            let err = e.witness.as_ref().map_or(0.0, |w| w.error);
            let straddles = e.witness.as_ref().is_some_and(|w| w.straddle.0 < 0.5 && w.straddle.1 == 0.5);
            (
                "spikes of height n on [1/2, 1/2 + n⁻²): no single gauge serves every n",
                serde_json::json!({ "at": 0.5, "epsilon": 1e-2, "horizon": 512 }),
                "equi-integrability fails with a partition straddling the jump; the conclusion is not asserted",
                vec![
                    check("equi_fails", e.verdict == Verdict::Fails && straddles, err, e.detail.clone()),
                    check("not_asserted", r.verdict == ReportVerdict::HypothesisFailed, r.final_gap.unwrap_or(0.0), format!("{:?}", r.verdict)),
                ],
                vec![],
            )
        }
        other => {
            return Err(invalid(format!(
                "unknown gallery id {other:?}; known ids: {}",
                GALLERY_IDS.join(", ")
            )))
        }
    };
    let reproduced = checks.iter().all(|c| c.verdict.holds());
    Ok(GalleryReport {
        id: id.into(),
        description: description.into(),
        parameters,
        expected: expected.into(),
        checks,
        curves,
        reproduced,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub n: usize,
    pub gap: f64,
    pub theorem: String,
    pub family: String,
}

/// Extracts the main curve of every report in a suite output, a single
/// report or an array of reports.
pub fn plot_rows(doc: &Value) -> Result<Vec<PlotRow>> {
    let reports: Vec<TheoremReport> = if let Some(results) = doc.get("results").and_then(Value::as_array) {
        results
            .iter()
            .map(|r| serde_json::from_value(r["report"].clone()))
            .collect::<std::result::Result<_, _>>()?
    } else if let Some(items) = doc.as_array() {
        items
            .iter()
            .map(|r| serde_json::from_value(r.clone()))
            .collect::<std::result::Result<_, _>>()?
    } else {
        vec![serde_json::from_value(doc.clone())?]
    };
    Ok(reports
        .iter()
        .flat_map(|r| {
            r.curve.iter().map(move |&(n, gap)| PlotRow {
                n,
                gap,
                theorem: r.theorem.clone(),
                family: r.family.clone(),
            })
        })
        .collect())
}

pub fn write_plot_csv<W: std::io::Write>(rows: &[PlotRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "gap", "theorem", "family"]).map_err(csv_error)?;
    for r in rows {
        w.write_record([r.n.to_string(), r.gap.to_string(), r.theorem.clone(), r.family.clone()])
            .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_plot_csv<R: std::io::Read>(input: R) -> Result<Vec<PlotRow>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .collect::<std::result::Result<Vec<PlotRow>, _>>()
        .map_err(csv_error)
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => invalid(format!("csv: {other:?}")),
    }
}

/// Writes the plot CSV for the report file at `report`; returns the row count.
pub fn emit_plot(report: &Path, out: &Path) -> Result<usize> {
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(report)?)?;
    let rows = plot_rows(&doc)?;
    write_plot_csv(&rows, std::fs::File::create(out)?)?;
    Ok(rows.len())
}

/// Serializes a suite output in the requested format.
pub fn render(output: &SuiteOutput, format: OutputFormat) -> Result<Vec<u8>> {
    match format {
        OutputFormat::Json => {
            let mut bytes = serde_json::to_vec_pretty(output)?;
            bytes.push(b'\n');
            Ok(bytes)
        }
        OutputFormat::Csv => {
            let rows = plot_rows(&serde_json::to_value(output)?)?;
            let mut bytes = Vec::new();
            write_plot_csv(&rows, &mut bytes)?;
            Ok(bytes)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        let c = CampaignConfig::default();
        assert!(c.horizon >= 8);
        assert!(!c.family_specs().unwrap().is_empty());
    }

    #[test]
    fn config_validation() {
        let bad = r#"{"seed":1,"horizon":4,"tolerance":0.1,"theorems":[],"families":[]}"#;
        assert!(matches!(CampaignConfig::from_json(bad), Err(Error::InvalidParameter(_))));
        let bad = r#"{"seed":1,"horizon":8,"tolerance":0,"theorems":[],"families":[]}"#;
        assert!(CampaignConfig::from_json(bad).is_err());
        let e = CampaignConfig::from_json("{\n  \"seed\": 1,\n  \"horizon\": }").unwrap_err();
        match e {
            Error::Json(j) => assert_eq!((j.line(), j.column()), (3, 14)),
            other => panic!("{other:?}"),
        }
        assert!(CampaignConfig::from_json(r#"{"seed":1,"horizon":8,"tolerance":0.1,"theorems":["th9"],"families":[]}"#).is_err());
    }

    #[test]
    fn theorem_ids_round_trip() {
        for t in TheoremId::ALL {
            assert_eq!(t.as_str().parse::<TheoremId>().unwrap(), t);
            assert_eq!(serde_json::to_string(&t).unwrap(), format!("\"{t}\""));
        }
    }

    #[test]
    fn plot_csv_round_trip() {
        let mut r = TheoremReport::new("th1", "a, \"quoted\" family", 3, 0.1);
        r.curve = vec![(1, 0.5), (2, 0.25), (3, 1.0 / 3.0)];
        let rows = plot_rows(&serde_json::to_value(&r).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_plot_csv(&rows, &mut buf).unwrap();
        assert!(buf.starts_with(b"n,gap,theorem,family\n"));
        assert_eq!(read_plot_csv(&buf[..]).unwrap(), rows);

        let empty = TheoremReport::new("th1", "f", 0, 0.1);
        let mut buf = Vec::new();
        write_plot_csv(&plot_rows(&serde_json::to_value(&empty).unwrap()).unwrap(), &mut buf).unwrap();
        assert_eq!(buf, b"n,gap,theorem,family\n");
    }

    #[test]
    fn unknown_kinds_and_params_are_rejected() {
        let spec: FamilySpec = serde_json::from_str(r#"{"kind":"nope"}"#).unwrap();
        assert!(build_instance(&spec, &mut family_rng(0, 0)).is_err());
        let spec: FamilySpec = serde_json::from_str(r#"{"kind":"bounded_pair","params":{"atomz":3}}"#).unwrap();
        assert!(build_instance(&spec, &mut family_rng(0, 0)).is_err());
        assert!(serde_json::from_str::<FamilySpec>(r#"{"kind":"bounded_pair","extra":1}"#).is_err());
    }

    #[test]
    fn gallery_entries_reproduce() {
        for id in GALLERY_IDS {
            let g = gallery(id, None).unwrap();
            assert!(g.reproduced, "{g:#?}");
        }
        assert!(gallery("nope", None).is_err());
    }
}
