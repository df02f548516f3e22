//! Seeded random verification campaigns.
//!
//! Every trial is a pure function of `(config, trial index)`; the report
//! is assembled in trial order and aggregated sequentially, so the output
//! does not depend on the number of workers.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{error_kind, evaluate, exit, trial_seed, Span};
use crate::bounds::Branch;
use crate::disposition::{random_instance, PerturbationInstance, PinSide, RandomParams};
use crate::error::{Error, Result};

/// Perturbation-norm regime of a campaign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Regime {
    /// `0 ≤ v < d`.
    A,
    /// `d ≤ v < √(d(D−d))`.
    B,
    /// `√(d(D−d)) ≤ v < √2·d`; needs `D < 3d`.
    C,
    /// `A` or `B`, chosen per trial.
    #[serde(rename = "mixed")]
    Mixed,
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Regime::A),
            "B" | "b" => Ok(Regime::B),
            "C" | "c" => Ok(Regime::C),
            "mixed" | "Mixed" => Ok(Regime::Mixed),
            _ => Err(Error::Parse(format!(
                "unknown regime '{s}' (A, B, C or mixed)"
            ))),
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::A => "A",
            Regime::B => "B",
            Regime::C => "C",
            Regime::Mixed => "mixed",
        })
    }
}

impl Regime {
    /// `[lo, hi)` of admissible `v` for a concrete regime.
    pub fn v_interval(self, gap_len: f64, d: f64) -> (f64, f64) {
        let l31 = (d * (gap_len - d)).max(0.0).sqrt();
        match self {
            Regime::A => (0.0, d),
            Regime::B => (d, l31),
            Regime::C => (l31, std::f64::consts::SQRT_2 * d),
            Regime::Mixed => (0.0, l31),
        }
    }
}

/// Acceptance thresholds for the numerical residuals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Riccati residual relative to `(‖A‖+‖V‖)²`.
    pub riccati: f64,
    /// `|‖P−Q‖ − sin(arctan ‖X‖)|`, absolute.
    pub norm_angle: f64,
    /// Quadratic identity residuals relative to `(‖A‖+‖V‖)²`.
    pub identities: f64,
    /// Graph and spectral residuals relative to `‖A‖+‖V‖`.
    pub graph: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            riccati: 1e-8,
            norm_angle: 1e-8,
            identities: 1e-9,
            graph: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub trials: usize,
    pub seed: u64,
    pub n0: Span<usize>,
    pub n1: Span<usize>,
    pub gap_left: f64,
    /// Randomizing the right end randomizes `D`.
    pub gap_right: Span<f64>,
    /// Sampled per trial from `[lo, min(hi, D/2)]`.
    pub d: Span<f64>,
    /// Spread of the outer spectrum beyond the gap ends.
    pub outer_radius: f64,
    pub regime: Regime,
    /// `v = lo + f·(hi − lo)` inside the regime interval; `f = 0` forces
    /// `v = 0` in every regime.
    pub v_fraction: Span<f64>,
    /// Conjugate each instance by a Haar unitary.
    pub hide_basis: bool,
    pub tolerances: Tolerances,
    /// Worker threads; `0` uses the rayon default.
    #[serde(skip)]
    pub parallel: usize,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            trials: 100,
            seed: 0,
            n0: Span { lo: 1, hi: 4 },
            n1: Span { lo: 2, hi: 6 },
            gap_left: -1.0,
            gap_right: Span::fixed(1.0),
            d: Span::fixed(1.0),
            outer_radius: 1.0,
            regime: Regime::Mixed,
            v_fraction: Span { lo: 0.0, hi: 0.99 },
            hide_basis: true,
            tolerances: Tolerances::default(),
            parallel: 1,
        }
    }
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InfeasibleParams(m));
        if self.trials < 1 {
            return bad("trials must be at least 1".into());
        }
        if self.n0.lo < 1 {
            return bad("n0 must be at least 1".into());
        }
        if self.n1.lo < 2 {
            return bad("n1 must be at least 2 so both gap ends are eigenvalues".into());
        }
        if !(self.gap_right.lo > self.gap_left)
            || !self.gap_right.hi.is_finite()
            || !self.gap_left.is_finite()
        {
            return bad("gap_right must exceed gap_left".into());
        }
        let d_min = self.gap_right.lo - self.gap_left;
        let d_max = self.gap_right.hi - self.gap_left;
        if !(self.d.lo > 0.0 && self.d.lo <= d_min / 2.0) {
            return bad(format!(
                "d must satisfy 0 < d <= D/2 for every gap; smallest D/2 is {}",
                d_min / 2.0
            ));
        }
        if !(self.outer_radius >= 0.0 && self.outer_radius.is_finite()) {
            return bad("outer_radius must be finite and nonnegative".into());
        }
        if !(self.v_fraction.lo >= 0.0 && self.v_fraction.hi < 1.0) {
            return bad("v_fraction must lie in [0, 1)".into());
        }
        if self.regime == Regime::C && !(d_max < 3.0 * self.d.lo) {
            return bad("regime C is empty unless D < 3d for every trial".into());
        }
        let t = &self.tolerances;
        if [t.riccati, t.norm_angle, t.identities, t.graph]
            .iter()
            .any(|x| !(*x > 0.0))
        {
            return bad("tolerances must be positive".into());
        }
        Ok(())
    }
}

/// Geometry drawn for one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialParams {
    pub seed: u64,
    pub regime: Regime,
    pub params: RandomParams,
    pub instance_seed: u64,
}

fn sample_usize(rng: &mut ChaCha8Rng, s: Span<usize>) -> usize {
    if s.lo == s.hi {
        s.lo
    } else {
        rng.random_range(s.lo..=s.hi)
    }
}

fn sample_f64(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        (lo + rng.random::<f64>() * (hi - lo)).min(hi)
    } else {
        lo
    }
}

/// Parameters of trial `i`; depends only on `cfg` and `i`.
pub fn trial_params(cfg: &CampaignConfig, i: usize) -> TrialParams {
    let seed = trial_seed(cfg.seed, i as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n0 = sample_usize(&mut rng, cfg.n0);
    let n1 = sample_usize(&mut rng, cfg.n1);
    let gap_right = sample_f64(&mut rng, cfg.gap_right.lo, cfg.gap_right.hi);
    let gap_len = gap_right - cfg.gap_left;
    let d = sample_f64(&mut rng, cfg.d.lo, cfg.d.hi.min(gap_len / 2.0)).min(gap_len / 2.0);
    let regime = match cfg.regime {
        Regime::Mixed => {
            if rng.random_bool(0.5) {
                Regime::A
            } else {
                Regime::B
            }
        }
        r => r,
    };
    let f = sample_f64(&mut rng, cfg.v_fraction.lo, cfg.v_fraction.hi);
    let v = if cfg.v_fraction.hi == 0.0 {
        0.0
    } else {
        let (lo, hi) = regime.v_interval(gap_len, d);
        lo + f * (hi - lo).max(0.0)
    };
    let instance_seed = rng.random::<u64>();
    TrialParams {
        seed,
        regime,
        params: RandomParams {
            n0,
            n1,
            gap_left: cfg.gap_left,
            gap_right,
            d,
            outer_radius: cfg.outer_radius,
            v,
            pin_side: PinSide::Random,
            hide_basis: cfg.hide_basis,
        },
        instance_seed,
    }
}

/// Regenerate the instance of trial `i`.
pub fn trial_instance(cfg: &CampaignConfig, i: usize) -> Result<PerturbationInstance> {
    let tp = trial_params(cfg, i);
    random_instance(&tp.params, tp.instance_seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum FailureClass {
    /// An in-regime bound, the enclosure, or gap separation failed.
    BoundViolation,
    /// A residual exceeded its tolerance.
    ResidualBreach,
    NotAGraph,
    EigenFailure,
    /// Instance generation rejected the sampled parameters.
    Generation,
}

impl FailureClass {
    pub fn exit_code(self) -> i32 {
        match self {
            FailureClass::BoundViolation => exit::BOUND_VIOLATION,
            FailureClass::Generation => exit::CONFIG,
            _ => exit::STRUCTURAL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub class: FailureClass,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub regime: Regime,
    pub n0: usize,
    pub n1: usize,
    #[serde(rename = "D")]
    pub gap_len: f64,
    pub d: f64,
    pub v: f64,
    pub measured: Option<f64>,
    pub bound13: Option<f64>,
    pub bound32: Option<f64>,
    pub kappa: Option<f64>,
    pub branch: Option<Branch>,
    #[serde(rename = "r_V")]
    pub r_v: Option<f64>,
    pub enclosure_ok: Option<bool>,
    pub gap_closed: Option<bool>,
    pub mu: Option<f64>,
    pub riccati_residual: Option<f64>,
    pub eq17_residual: Option<f64>,
    pub graph_residual: Option<f64>,
    pub lemma26_max: Option<f64>,
    pub lemma27_max: Option<f64>,
    /// `(‖A‖ + ‖V‖)²`.
    pub scale: Option<f64>,
    pub ratio13: Option<f64>,
    pub ratio32: Option<f64>,
    pub failures: Vec<Failure>,
}

impl TrialRecord {
    fn empty(i: usize, tp: &TrialParams) -> Self {
        let p = &tp.params;
        Self {
            trial: i,
            seed: tp.seed,
            regime: tp.regime,
            n0: p.n0,
            n1: p.n1,
            gap_len: p.gap_right - p.gap_left,
            d: p.d,
            v: p.v,
            measured: None,
            bound13: None,
            bound32: None,
            kappa: None,
            branch: None,
            r_v: None,
            enclosure_ok: None,
            gap_closed: None,
            mu: None,
            riccati_residual: None,
            eq17_residual: None,
            graph_residual: None,
            lemma26_max: None,
            lemma27_max: None,
            scale: None,
            ratio13: None,
            ratio32: None,
            failures: Vec::new(),
        }
    }

    fn fail(&mut self, class: FailureClass, message: impl Into<String>) {
        self.failures.push(Failure {
            class,
            message: message.into(),
        });
    }
}

/// Run one trial and classify every failed check.
pub fn run_trial(cfg: &CampaignConfig, i: usize) -> TrialRecord {
    let tp = trial_params(cfg, i);
    let mut rec = TrialRecord::empty(i, &tp);
    let inst = match random_instance(&tp.params, tp.instance_seed) {
        Ok(inst) => inst,
        Err(e) => {
            rec.fail(FailureClass::Generation, e.to_string());
            return rec;
        }
    };
    check_instance(&inst, &cfg.tolerances, &mut rec);
    rec
}

/// Evaluate `inst` into `rec`, recording failures against `tol`.
pub fn check_instance(inst: &PerturbationInstance, tol: &Tolerances, rec: &mut TrialRecord) {
    // Record the realized geometry, which may differ from the request by
    // rounding.
    rec.gap_len = inst.split.gap_len;
    rec.d = inst.split.d;
    rec.v = inst.norm_v;
    let ev = match evaluate(inst) {
        Ok(ev) => ev,
        Err(e) => {
            let class = match e {
                Error::NotAGraph { .. } => FailureClass::NotAGraph,
                _ => FailureClass::EigenFailure,
            };
            rec.fail(class, format!("{}: {e}", error_kind(&e)));
            return;
        }
    };
    let b = &ev.bounds;
    rec.measured = Some(b.measured);
    rec.bound13 = b.bound13;
    rec.bound32 = b.bound32;
    rec.kappa = b.kappa.map(|k| k.value);
    rec.branch = b.kappa.map(|k| k.branch);
    rec.r_v = b.r_v;
    rec.enclosure_ok = b.enclosure_ok;
    rec.gap_closed = Some(ev.split.gap_closed);
    rec.ratio13 = b.ratio13;
    rec.ratio32 = b.ratio32;
    rec.scale = Some(ev.scale);

    if ev.split.gap_closed {
        let msg = format!(
            "gap closed: {} eigenvalues of L inside the gap, expected {}",
            ev.split.omega0.len(),
            inst.n0()
        );
        if b.flags.regime29 {
            rec.fail(FailureClass::BoundViolation, msg);
        } else {
            rec.fail(FailureClass::EigenFailure, msg);
        }
    }
    if b.satisfied13 == Some(false) {
        rec.fail(FailureClass::BoundViolation, "a priori bound violated");
    }
    if b.satisfied32 == Some(false) {
        rec.fail(FailureClass::BoundViolation, "detailed bound violated");
    }
    if b.enclosure_ok == Some(false) {
        rec.fail(
            FailureClass::BoundViolation,
            "perturbed inner spectrum left the enclosure",
        );
    }
    if b.below_half_pi == Some(false) {
        rec.fail(FailureClass::BoundViolation, "maximal angle reached pi/4");
    }

    let (Some(sol), Some(graph)) = (&ev.solution, &ev.graph) else {
        return;
    };
    let (l26, l27) = ev.lemma_max();
    rec.mu = Some(sol.mu);
    rec.riccati_residual = Some(sol.riccati_residual);
    rec.eq17_residual = Some(graph.eq17_residual);
    rec.graph_residual = Some(graph.max_residual());
    rec.lemma26_max = Some(l26);
    rec.lemma27_max = Some(l27);

    if b.flags.regime31 && !(sol.mu < 1.0) {
        rec.fail(
            FailureClass::BoundViolation,
            format!("mu = {} >= 1", sol.mu),
        );
    }
    let scale = ev.scale.max(f64::MIN_POSITIVE);
    if !(sol.riccati_residual <= tol.riccati * scale) {
        rec.fail(
            FailureClass::ResidualBreach,
            format!("Riccati residual {:e}", sol.riccati_residual),
        );
    }
    if !(graph.eq17_residual <= tol.norm_angle) {
        rec.fail(
            FailureClass::ResidualBreach,
            format!("norm-angle residual {:e}", graph.eq17_residual),
        );
    }
    if !(graph.max_residual() <= tol.graph * scale.sqrt().max(1.0)) {
        rec.fail(
            FailureClass::ResidualBreach,
            format!("graph residual {:e}", graph.max_residual()),
        );
    }
    if !(l26.max(l27) <= tol.identities * scale) {
        rec.fail(
            FailureClass::ResidualBreach,
            format!("identity residuals {l26:e}, {l27:e}"),
        );
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct CampaignSummary {
    pub trials: usize,
    /// Trials whose instance was fully analyzed.
    pub completed: usize,
    pub per_regime: BTreeMap<Regime, usize>,
    pub checked13: usize,
    pub checked32: usize,
    pub checked_enclosure: usize,
    pub max_ratio13: f64,
    pub max_ratio32: f64,
    pub max_measured: f64,
    pub max_mu: f64,
    /// Trials with at least one bound violation.
    pub violations: usize,
    pub violations13: usize,
    pub violations32: usize,
    pub enclosure_violations: usize,
    pub gap_closures: usize,
    /// Trials per failure class.
    pub failures: BTreeMap<FailureClass, usize>,
    pub max_riccati_residual: f64,
    pub max_riccati_relative: f64,
    pub max_eq17_residual: f64,
    pub max_graph_residual: f64,
    pub max_lemma26: f64,
    pub max_lemma27: f64,
    pub max_lemma_relative: f64,
}

impl CampaignSummary {
    fn absorb(&mut self, r: &TrialRecord) {
        let max = |acc: &mut f64, x: Option<f64>| {
            if let Some(x) = x {
                *acc = acc.max(x);
            }
        };
        self.trials += 1;
        *self.per_regime.entry(r.regime).or_default() += 1;
        if r.measured.is_some() {
            self.completed += 1;
        }
        self.checked13 += usize::from(r.bound13.is_some() && r.measured.is_some());
        self.checked32 += usize::from(r.bound32.is_some() && r.measured.is_some());
        self.checked_enclosure += usize::from(r.enclosure_ok.is_some());
        max(&mut self.max_ratio13, r.ratio13);
        max(&mut self.max_ratio32, r.ratio32);
        max(&mut self.max_measured, r.measured);
        max(&mut self.max_mu, r.mu);
        max(&mut self.max_riccati_residual, r.riccati_residual);
        max(&mut self.max_eq17_residual, r.eq17_residual);
        max(&mut self.max_graph_residual, r.graph_residual);
        max(&mut self.max_lemma26, r.lemma26_max);
        max(&mut self.max_lemma27, r.lemma27_max);
        if let Some(s) = r.scale.filter(|s| *s > 0.0) {
            max(
                &mut self.max_riccati_relative,
                r.riccati_residual.map(|x| x / s),
            );
            let lemma = r.lemma26_max.zip(r.lemma27_max).map(|(a, b)| a.max(b) / s);
            max(&mut self.max_lemma_relative, lemma);
        }
        let measured = r.measured.unwrap_or(0.0);
        let tol = crate::bounds::TOL_BOUND;
        self.violations13 += usize::from(r.bound13.is_some_and(|b| measured > b + tol));
        self.violations32 += usize::from(r.bound32.is_some_and(|b| measured > b + tol));
        self.enclosure_violations += usize::from(r.enclosure_ok == Some(false));
        self.gap_closures += usize::from(r.gap_closed == Some(true));
        let mut classes: Vec<FailureClass> = r.failures.iter().map(|f| f.class).collect();
        classes.sort();
        classes.dedup();
        for c in &classes {
            *self.failures.entry(*c).or_default() += 1;
        }
        self.violations += usize::from(classes.contains(&FailureClass::BoundViolation));
    }

    /// Exit status: bound violations take precedence over structural ones.
    pub fn exit_code(&self) -> i32 {
        self.failures
            .keys()
            .map(|c| c.exit_code())
            .min_by_key(|&c| match c {
                exit::BOUND_VIOLATION => 0,
                exit::STRUCTURAL => 1,
                _ => 2,
            })
            .unwrap_or(exit::CLEAN)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CampaignReport {
    pub config: CampaignConfig,
    pub summary: CampaignSummary,
    pub records: Vec<TrialRecord>,
}

impl CampaignReport {
    pub fn exit_code(&self) -> i32 {
        self.summary.exit_code()
    }
}

pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignReport> {
    cfg.validate()?;
    let run = || -> Vec<TrialRecord> {
        (0..cfg.trials)
            .into_par_iter()
            .map(|i| run_trial(cfg, i))
            .collect()
    };
    let records = if cfg.parallel == 1 {
        (0..cfg.trials).map(|i| run_trial(cfg, i)).collect()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.parallel)
            .build()
            .map_err(|e| Error::InfeasibleParams(format!("thread pool: {e}")))?
            .install(run)
    };
    let mut summary = CampaignSummary::default();
    for r in &records {
        summary.absorb(r);
    }
    Ok(CampaignReport {
        config: cfg.clone(),
        summary,
        records,
    })
}
