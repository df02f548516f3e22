//! Single-instance deep analysis.

use serde::Serialize;

use super::evaluate;
use crate::bounds::{BoundReport, TOL_BOUND};
use crate::disposition::{InstanceJson, MatrixJson, PerturbationInstance};
use crate::error::{Error, Result};
use crate::hermitian::HermitianOperator;
use crate::riccati::{GraphReport, IdentityReport};

/// Parsed input of [`analyze`].
#[derive(Debug, Clone)]
pub enum AnalyzeInput {
    Instance(InstanceJson),
    /// An arbitrary Hermitian `A`, a gap of its spectrum and an optional
    /// Hermitian `W` whose off-diagonal part is the perturbation.
    Matrix {
        a: MatrixJson,
        gap: (f64, f64),
        perturbation: Option<MatrixJson>,
    },
}

impl AnalyzeInput {
    /// Parse Instance JSON, or Matrix JSON when a gap is supplied.
    pub fn parse(text: &str, gap: Option<(f64, f64)>, perturbation: Option<&str>) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("invalid JSON: {e}")))?;
        let is_instance = value.get("sigma0").is_some();
        if is_instance {
            if perturbation.is_some() {
                return Err(Error::Parse(
                    "a perturbation file only applies to Matrix JSON input".into(),
                ));
            }
            let mut inst: InstanceJson = serde_json::from_value(value)
                .map_err(|e| Error::Parse(format!("invalid Instance JSON: {e}")))?;
            if let Some((l, r)) = gap {
                inst.gap = [l, r];
            }
            return Ok(AnalyzeInput::Instance(inst));
        }
        let a: MatrixJson = serde_json::from_value(value)
            .map_err(|e| Error::Parse(format!("input is neither Instance nor Matrix JSON: {e}")))?;
        let gap = gap.ok_or_else(|| {
            Error::Parse("Matrix JSON input requires --gap-left and --gap-right".into())
        })?;
        let perturbation = perturbation
            .map(|t| {
                serde_json::from_str::<MatrixJson>(t)
                    .map_err(|e| Error::Parse(format!("invalid perturbation Matrix JSON: {e}")))
            })
            .transpose()?;
        Ok(AnalyzeInput::Matrix {
            a,
            gap,
            perturbation,
        })
    }

    pub fn build(&self) -> Result<PerturbationInstance> {
        match self {
            AnalyzeInput::Instance(inst) => inst.build(),
            AnalyzeInput::Matrix {
                a,
                gap,
                perturbation,
            } => {
                let a = HermitianOperator::new(a.to_matrix()?)?;
                let w = perturbation
                    .as_ref()
                    .map(|w| w.to_matrix().and_then(HermitianOperator::new))
                    .transpose()?;
                PerturbationInstance::from_operators(a, w.as_ref(), *gap)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub dimension: usize,
    pub n0: usize,
    pub n1: usize,
    pub gap: (f64, f64),
    #[serde(rename = "D")]
    pub gap_len: f64,
    pub d: f64,
    pub v: f64,
    pub sigma0: Vec<f64>,
    pub sigma1: Vec<f64>,
    pub omega0: Vec<f64>,
    pub omega1: Vec<f64>,
    pub gap_closed: bool,
    pub measured: f64,
    pub mu: Option<f64>,
    #[serde(rename = "X")]
    pub x: Option<MatrixJson>,
    pub x_singular_values: Option<Vec<f64>>,
    pub cond_y0: Option<f64>,
    pub riccati_residual: Option<f64>,
    /// `(‖A‖ + ‖V‖)²`.
    pub scale: f64,
    pub lambda0_spectrum: Option<Vec<f64>>,
    pub graph: Option<GraphReport>,
    pub identities: Vec<IdentityReport>,
    pub lemma26_max: Option<f64>,
    pub lemma27_max: Option<f64>,
    pub bound13: Option<f64>,
    pub bound32: Option<f64>,
    pub ratio13: Option<f64>,
    pub ratio32: Option<f64>,
    pub bounds: BoundReport,
    pub all_bounds_satisfied: bool,
}

pub fn analyze(inst: &PerturbationInstance) -> Result<AnalysisReport> {
    let ev = evaluate(inst)?;
    let sol = ev.solution.as_ref();
    let (l26, l27) = ev.lemma_max();
    let has_solution = sol.is_some();
    let b = &ev.bounds;
    Ok(AnalysisReport {
        dimension: inst.dim(),
        n0: inst.n0(),
        n1: inst.n1(),
        gap: inst.gap(),
        gap_len: inst.split.gap_len,
        d: inst.split.d,
        v: inst.norm_v,
        sigma0: inst.split.sigma0.clone(),
        sigma1: inst.split.sigma1.clone(),
        omega0: ev.split.omega0.clone(),
        omega1: ev.split.omega1.clone(),
        gap_closed: ev.split.gap_closed,
        measured: b.measured,
        mu: sol.map(|s| s.mu),
        x: sol.map(|s| MatrixJson::from_matrix(&s.x)),
        x_singular_values: sol.map(|s| s.polar.singular_values.clone()),
        cond_y0: sol.map(|s| s.cond_y0),
        riccati_residual: sol.map(|s| s.riccati_residual),
        scale: ev.scale,
        lambda0_spectrum: ev.graph.as_ref().map(|g| g.lambda0_spectrum.clone()),
        lemma26_max: has_solution.then_some(l26),
        lemma27_max: has_solution.then_some(l27),
        bound13: b.bound13,
        bound32: b.bound32,
        ratio13: b.ratio13,
        ratio32: b.ratio32,
        all_bounds_satisfied: b.all_satisfied()
            && !(ev.split.gap_closed && b.flags.regime29)
            && sol.is_none_or(|s| !b.flags.regime31 || s.mu < 1.0 + TOL_BOUND),
        graph: ev.graph.clone(),
        identities: ev.identities.clone(),
        bounds: ev.bounds.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::DispositionError;

    const E1: &str = r#"{"sigma0": [0.0], "sigma1": [-1.0, 1.0], "gap": [-1.0, 1.0],
        "B": {"n": 1, "real": [[0.5, 0.0]]}}"#;

    #[test]
    fn e1_report() {
        let inst = AnalyzeInput::parse(E1, None, None)
            .unwrap()
            .build()
            .unwrap();
        let r = analyze(&inst).unwrap();
        let s2 = std::f64::consts::SQRT_2;
        assert!((r.mu.unwrap() - (s2 - 1.0)).abs() < 1e-12);
        assert!((r.measured - 0.382_683_432_365_089_8).abs() < 1e-12);
        assert!((r.bound13.unwrap() - 0.447_213_595_499_958).abs() < 1e-12);
        assert!((r.bound32.unwrap() - 0.447_213_595_499_958).abs() < 1e-12);
        assert!(r.all_bounds_satisfied);
        assert!(!r.gap_closed);
    }

    #[test]
    fn zero_perturbation() {
        let text = r#"{"sigma0": [0.2, -0.1], "sigma1": [-1, 1, 3], "gap": [-1, 1],
            "B": {"n": 2, "real": [[0,0,0],[0,0,0]]}}"#;
        let inst = AnalyzeInput::parse(text, None, None)
            .unwrap()
            .build()
            .unwrap();
        let r = analyze(&inst).unwrap();
        assert_eq!(r.measured, 0.0);
        assert_eq!(r.mu, Some(0.0));
    }

    #[test]
    fn matrix_input_with_perturbation() {
        let a = r#"{"n": 3, "real": [[-1,0,0],[0,0,0],[0,0,1]]}"#;
        let w = r#"{"n": 3, "real": [[0.3,0.5,0],[0.5,0.1,0],[0,0,0.2]]}"#;
        let inst = AnalyzeInput::parse(a, Some((-1.0, 1.0)), Some(w))
            .unwrap()
            .build()
            .unwrap();
        assert!((inst.norm_v - 0.5).abs() < 1e-12);
        let r = analyze(&inst).unwrap();
        assert!(r.all_bounds_satisfied);
    }

    #[test]
    fn matrix_input_needs_gap() {
        let a = r#"{"n": 2, "real": [[0,0],[0,1]]}"#;
        assert!(matches!(
            AnalyzeInput::parse(a, None, None),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn disposition_violation_names_value() {
        let text = r#"{"sigma0": [0.0], "sigma1": [-1.0, 0.5, 1.0], "gap": [-1.0, 1.0],
            "B": {"n": 1, "real": [[0, 0, 0]]}}"#;
        let err = AnalyzeInput::parse(text, None, None)
            .unwrap()
            .build()
            .unwrap_err();
        match err {
            Error::Disposition(DispositionError::NotAGap { value }) => assert_eq!(value, 0.5),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn garbage_is_parse_error() {
        assert!(matches!(
            AnalyzeInput::parse("{", None, None),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            AnalyzeInput::parse(r#"{"foo": 1}"#, Some((0.0, 1.0)), None),
            Err(Error::Parse(_))
        ));
    }
}
