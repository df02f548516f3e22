//! Campaign engine and single-instance tooling behind the `spl` binary.

pub mod analyze;
pub mod campaign;
pub mod sharpness;
pub mod sweep;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bounds::BoundReport;
use crate::disposition::PerturbationInstance;
use crate::error::Error;
use crate::hermitian::subspace_angle;
use crate::riccati::{
    angular_operator, lemma22_check, perturbed_split, verify_graph_props, GraphReport,
    IdentityReport, PerturbedSplit, RiccatiSolution,
};

pub use analyze::{analyze, AnalysisReport, AnalyzeInput};
pub use campaign::{run_campaign, trial_instance, CampaignConfig, CampaignReport, Regime};
pub use sharpness::{sharpness_search, SharpnessConfig, SharpnessReport};
pub use sweep::{bound_row, sweep, write_csv, BoundRow, Grid, SweepSpec};

/// Process exit statuses.
pub mod exit {
    pub const CLEAN: i32 = 0;
    pub const BOUND_VIOLATION: i32 = 2;
    pub const STRUCTURAL: i32 = 3;
    pub const CONFIG: i32 = 4;
}

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// Per-trial seed: the splitmix64 output for counter `i + 1` of a stream
/// started at `master`. The finalizer is a bijection of `u64`, so seeds are
/// distinct for distinct trial indices below `2⁶⁴`.
pub fn trial_seed(master: u64, i: u64) -> u64 {
    let mut z = master.wrapping_add(i.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A closed interval `[lo, hi]`; parsed from `x` or `lo:hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Span<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Copy> Span<T> {
    pub fn fixed(x: T) -> Self {
        Self { lo: x, hi: x }
    }
}

impl<T: Copy + PartialOrd> Span<T> {
    pub fn new(lo: T, hi: T) -> Result<Self, Error> {
        if lo <= hi {
            Ok(Self { lo, hi })
        } else {
            Err(Error::Parse("range must satisfy lo <= hi".into()))
        }
    }
}

impl<T> FromStr for Span<T>
where
    T: FromStr + Copy + PartialOrd,
{
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let parse = |t: &str| {
            t.trim()
                .parse::<T>()
                .map_err(|_| Error::Parse(format!("cannot parse '{t}' in range '{s}'")))
        };
        match s.split_once(':') {
            Some((lo, hi)) => Span::new(parse(lo)?, parse(hi)?),
            None => Ok(Span::fixed(parse(s)?)),
        }
    }
}

impl<T: fmt::Display + PartialEq> fmt::Display for Span<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo == self.hi {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "{}:{}", self.lo, self.hi)
        }
    }
}

/// Everything computed for one instance.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub split: PerturbedSplit,
    /// `None` when the gap closed and no graph representation exists.
    pub solution: Option<RiccatiSolution>,
    pub graph: Option<GraphReport>,
    pub identities: Vec<IdentityReport>,
    pub bounds: BoundReport,
    /// `(‖A‖ + ‖V‖)²`.
    pub scale: f64,
}

impl Evaluation {
    pub fn measured(&self) -> f64 {
        self.bounds.measured
    }

    pub fn lemma_max(&self) -> (f64, f64) {
        self.identities.iter().fold((0.0, 0.0), |(a, b), r| {
            (f64::max(a, r.res26), f64::max(b, r.res27))
        })
    }
}

/// Split, angular operator, graph checks, identities and bounds.
///
/// A closed gap is not an error here: the projector distance is still
/// measured and the caller decides how to classify it.
pub fn evaluate(inst: &PerturbationInstance) -> Result<Evaluation, Error> {
    let split = perturbed_split(inst)?;
    let scale = inst.quadratic_scale();
    let (solution, graph, identities, measured) = if split.gap_closed {
        let measured = subspace_angle(&inst.split.e0, &split.el0)?.norm_diff;
        (None, None, Vec::new(), measured)
    } else {
        let sol = angular_operator(inst, &split)?;
        let graph = verify_graph_props(&sol, inst, &split)?;
        let ids = lemma22_check(&sol, inst)?;
        let measured = graph.measured;
        (Some(sol), Some(graph), ids, measured)
    };
    let bounds = BoundReport::assess(
        measured,
        inst.gap(),
        inst.split.d,
        inst.norm_v,
        &split.omega0,
    )?;
    Ok(Evaluation {
        split,
        solution,
        graph,
        identities,
        bounds,
        scale,
    })
}

/// Machine-readable error report.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub error: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<serde_json::Value>,
}

impl ErrorReport {
    pub fn from_error(e: &Error) -> Self {
        let detail = match e {
            Error::Disposition(d) => serde_json::to_value(d).ok(),
            Error::Domain(d) => serde_json::to_value(d).ok(),
            _ => None,
        };
        Self {
            error: error_kind(e),
            message: e.to_string(),
            detail,
        }
    }
}

pub fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::NonHermitianInput { .. } => "NonHermitianInput",
        Error::NotSquare { .. } => "NotSquare",
        Error::ConvergenceFailure(_) => "EigenFailure",
        Error::EmptySelection => "EmptySelection",
        Error::AmbiguousEdge { .. } => "AmbiguousEdge",
        Error::DimensionMismatch { .. } => "DimensionMismatch",
        Error::Disposition(_) => "DispositionViolation",
        Error::Domain(_) => "DomainViolation",
        Error::SingularDenominator { .. } => "SingularDenominator",
        Error::InfeasibleParams(_) => "InfeasibleParams",
        Error::NotAGraph { .. } => "NotAGraph",
        Error::RankMismatch { .. } => "RankMismatch",
        Error::Parse(_) => "ParseError",
    }
}

/// Exit status for an error that aborted a command: bad input is a
/// configuration error, numerical breakdown is structural.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::ConvergenceFailure(_)
        | Error::NotAGraph { .. }
        | Error::RankMismatch { .. }
        | Error::EmptySelection
        | Error::SingularDenominator { .. } => exit::STRUCTURAL,
        _ => exit::CONFIG,
    }
}
