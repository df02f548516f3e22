//! Perturbed spectral subspaces as graphs of an angular operator `X`
//! solving `X·A₀ − A₁·X + X·B·X = Bᴴ`.
//!
//! `X` is extracted from an eigensolve of `L`: for an orthonormal basis
//! `Y = [Y₀; Y₁]` of `Ran E_L(ω₀)` in block coordinates, `X = Y₁·Y₀⁻¹`.
//! The Riccati residual then serves as an independent correctness check.
//!
//! Inner products are conjugate-linear in the first argument:
//! `⟨x, y⟩ = xᴴy`.

use nalgebra::Schur;
use num_complex::Complex64;
use serde::Serialize;

use crate::bounds::{self, BoundInputs};
use crate::disposition::PerturbationInstance;
use crate::error::{Error, Result};
use crate::hermitian::{
    eigh, identity, op_norm, polar_decompose, subspace_angle, CMatrix, HermitianOperator,
    PolarParts, Projector, TOL_EDGE,
};

/// Graph inversion is refused above this condition number of `Y₀`.
pub const MAX_COND_Y0: f64 = 1e12;
/// Relative tolerance (times `(‖A‖+‖V‖)²`) on the quadratic identities.
pub const TOL_IDENTITY: f64 = 1e-9;

/// Spectrum of `L` split by the gap of the unperturbed operator.
#[derive(Debug, Clone)]
pub struct PerturbedSplit {
    /// Eigenvalues of `L` inside the gap, ascending.
    pub omega0: Vec<f64>,
    /// Eigenvalues of `L` outside the open gap, ascending.
    pub omega1: Vec<f64>,
    /// Orthonormal eigenvectors paired with `omega0`.
    pub basis0: CMatrix,
    /// Orthonormal eigenvectors paired with `omega1`.
    pub basis1: CMatrix,
    pub el0: Projector,
    pub el1: Projector,
    /// Guaranteed hull of `ω₀` when `‖V‖ < √(d|Δ|)`.
    pub enclosure: Option<(f64, f64)>,
    /// The gap did not separate exactly `n₀` eigenvalues of `L`.
    pub gap_closed: bool,
}

/// Split `spec(L)` into `ω₀ = spec(L) ∩ Δ` and `ω₁`.
///
/// Eigenvalues within `1e-9·‖L‖` of a gap end are assigned to `ω₁`, which
/// may legitimately touch the gap ends.
pub fn perturbed_split(inst: &PerturbationInstance) -> Result<PerturbedSplit> {
    let es = eigh(&inst.l)?;
    let (gl, gr) = inst.gap();
    let tol = TOL_EDGE * es.scale;
    let (inner, outer): (Vec<usize>, Vec<usize>) =
        (0..es.dim()).partition(|&k| es.values[k] > gl + tol && es.values[k] < gr - tol);
    let basis0 = es.columns(&inner);
    let basis1 = es.columns(&outer);
    let enclosure = BoundInputs::new(inst.split.gap_len, inst.split.d, inst.norm_v)
        .ok()
        .filter(|inp| inp.flags().regime29)
        .map(|inp| {
            let r = bounds::r_v_unchecked(&inp);
            (gl + (inp.d - r), gr - (inp.d - r))
        });
    Ok(PerturbedSplit {
        omega0: inner.iter().map(|&k| es.values[k]).collect(),
        omega1: outer.iter().map(|&k| es.values[k]).collect(),
        el0: Projector::from_basis(&basis0),
        el1: Projector::from_basis(&basis1),
        gap_closed: inner.len() != inst.n0(),
        basis0,
        basis1,
        enclosure,
    })
}

/// Angular operator and derived quantities.
#[derive(Debug, Clone)]
pub struct RiccatiSolution {
    /// `n₁ × n₀`, maps `𝔄₀` to `𝔄₁`.
    pub x: CMatrix,
    pub polar: PolarParts,
    /// `‖X‖`.
    pub mu: f64,
    pub riccati_residual: f64,
    /// `(I + |X|²)^{1/2}·(A₀ + B·X)·(I + |X|²)^{-1/2}`.
    pub lambda0: CMatrix,
    /// Condition number of `Y₀`.
    pub cond_y0: f64,
}

/// `‖X·A₀ − A₁·X + X·B·X − Bᴴ‖`.
pub fn riccati_residual(x: &CMatrix, a0: &CMatrix, a1: &CMatrix, b: &CMatrix) -> Result<f64> {
    let (n1, n0) = x.shape();
    let ok = a0.shape() == (n0, n0) && a1.shape() == (n1, n1) && b.shape() == (n0, n1);
    if !ok {
        return Err(Error::DimensionMismatch {
            expected: format!("X {n1}x{n0}, A0 {n0}x{n0}, A1 {n1}x{n1}, B {n0}x{n1}"),
            actual: format!(
                "A0 {:?}, A1 {:?}, B {:?}",
                a0.shape(),
                a1.shape(),
                b.shape()
            ),
        });
    }
    Ok(op_norm(&(x * a0 - a1 * x + x * b * x - b.adjoint())))
}

/// Angular operator from the eigenvectors of `L` for `ω₀`.
pub fn angular_operator(
    inst: &PerturbationInstance,
    ps: &PerturbedSplit,
) -> Result<RiccatiSolution> {
    if ps.omega0.len() != inst.n0() {
        return Err(Error::RankMismatch {
            expected: inst.n0(),
            actual: ps.omega0.len(),
        });
    }
    angular_operator_from_basis(inst, &ps.basis0)
}

/// Angular operator from any orthonormal basis `Y` (`n × n₀`) of the
/// perturbed subspace.
pub fn angular_operator_from_basis(
    inst: &PerturbationInstance,
    y: &CMatrix,
) -> Result<RiccatiSolution> {
    let n0 = inst.n0();
    if y.shape() != (inst.dim(), n0) {
        return Err(Error::RankMismatch {
            expected: n0,
            actual: y.ncols(),
        });
    }
    let y0 = inst.split.basis0.adjoint() * y;
    let y1 = inst.split.basis1.adjoint() * y;
    let sv = y0.singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    let cond_y0 = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };
    if !(cond_y0 <= MAX_COND_Y0) {
        return Err(Error::NotAGraph { cond: cond_y0 });
    }
    // X = Y₁·Y₀⁻¹  ⇔  Y₀ᴴ·Xᴴ = Y₁ᴴ
    let x_adj = y0
        .adjoint()
        .lu()
        .solve(&y1.adjoint())
        .ok_or(Error::NotAGraph { cond: cond_y0 })?;
    let x = x_adj.adjoint();
    solution_from_x(inst, x, cond_y0)
}

fn solution_from_x(
    inst: &PerturbationInstance,
    x: CMatrix,
    cond_y0: f64,
) -> Result<RiccatiSolution> {
    let polar = polar_decompose(&x)?;
    let mu = polar.singular_values.first().copied().unwrap_or(0.0);
    let riccati_residual = riccati_residual(&x, &inst.a0, &inst.a1, &inst.b)?;
    let lambda0 = lambda0(&x, &inst.a0, &inst.b)?;
    Ok(RiccatiSolution {
        x,
        polar,
        mu,
        riccati_residual,
        lambda0,
        cond_y0,
    })
}

/// `(I + XᴴX)^{1/2}·(A₀ + B·X)·(I + XᴴX)^{-1/2}`, with the square roots
/// taken through the eigendecomposition of `I + XᴴX` (eigenvalues ≥ 1).
pub fn lambda0(x: &CMatrix, a0: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let n0 = a0.nrows();
    let m = HermitianOperator::hermitian_part(identity(n0) + x.adjoint() * x);
    let es = eigh(&m)?;
    let q = &es.vectors;
    let scale = |f: fn(f64) -> f64| {
        let mut qs = q.clone();
        for (k, &lam) in es.values.iter().enumerate() {
            let s = f(lam);
            qs.column_mut(k).iter_mut().for_each(|z| *z *= s);
        }
        &qs * q.adjoint()
    };
    let sqrt = scale(f64::sqrt);
    let inv_sqrt = scale(|t| 1.0 / t.sqrt());
    Ok(sqrt * (a0 + b * x) * inv_sqrt)
}

/// Residuals of the two quadratic identities for one eigenpair of `|X|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub lambda: f64,
    pub res26: f64,
    pub res27: f64,
    /// Imaginary part of `⟨A₀u, BUu⟩ + ⟨Bᴴu, A₁Uu⟩`.
    pub cross_imag: f64,
    /// The eigenpair with `λ = ‖X‖`.
    pub top: bool,
}

/// For every eigenpair `(λ, u)` of `|X|`, with `w = U·u`,
///
/// * `res26 = |λ(‖A₁w‖² + ‖Bw‖² − ‖A₀u‖² − ‖Bᴴu‖²) + (1 − λ²)·c|`
/// * `res27 = |c + λ(‖A₁w‖² + ‖Bw‖² − ‖Λ₀u‖²)|`
///
/// where `c = ⟨A₀u, Bw⟩ + ⟨Bᴴu, A₁w⟩`. Kernel vectors have `w = 0`.
pub fn lemma22_check(
    sol: &RiccatiSolution,
    inst: &PerturbationInstance,
) -> Result<Vec<IdentityReport>> {
    let n0 = inst.n0();
    if n0 == 0 {
        return Ok(Vec::new());
    }
    let es = eigh(&HermitianOperator::hermitian_part(sol.polar.absval.clone()))?;
    let top = es.dim() - 1;
    let dot = |x: &CMatrix, y: &CMatrix| -> Complex64 { (x.adjoint() * y)[(0, 0)] };
    let nsq = |x: &CMatrix| -> f64 { x.iter().map(|z| z.norm_sqr()).sum() };
    let reports = (0..es.dim())
        .map(|k| {
            let lambda = es.values[k];
            let u = es.vectors.columns(k, 1).into_owned();
            let w = &sol.polar.isometry * &u;
            let a0u = &inst.a0 * &u;
            let bw = &inst.b * &w;
            let bhu = inst.b.adjoint() * &u;
            let a1w = &inst.a1 * &w;
            let lu = &sol.lambda0 * &u;
            let c = dot(&a0u, &bw) + dot(&bhu, &a1w);
            let p = nsq(&a1w) + nsq(&bw);
            let res26 = (c * (1.0 - lambda * lambda) + lambda * (p - nsq(&a0u) - nsq(&bhu))).norm();
            let res27 = (c + lambda * (p - nsq(&lu))).norm();
            IdentityReport {
                lambda,
                res26,
                res27,
                cross_imag: c.im,
                top: k == top,
            }
        })
        .collect();
    Ok(reports)
}

/// Graph-representation checks for a solved instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphReport {
    /// `‖E_A(σ₀) − E_L(ω₀)‖`.
    pub measured: f64,
    /// `|measured − sin(arctan μ)|`.
    pub eq17_residual: f64,
    /// `‖Z₀ + Xᴴ·Z₁‖` for a basis `Z` of `Ran E_L(ω₁)`.
    pub graph1_residual: f64,
    /// `spec(A₀ + BX)` against `ω₀`.
    pub spec0_residual: f64,
    /// `spec(A₁ − BᴴXᴴ)` against `ω₁`.
    pub spec1_residual: f64,
    /// `‖Λ₀ − Λ₀ᴴ‖`.
    pub lambda0_asymmetry: f64,
    /// `spec(Λ₀)` against `ω₀`.
    pub lambda0_spec_residual: f64,
    pub lambda0_spectrum: Vec<f64>,
}

impl GraphReport {
    pub fn max_residual(&self) -> f64 {
        [
            self.eq17_residual,
            self.graph1_residual,
            self.spec0_residual,
            self.spec1_residual,
            self.lambda0_asymmetry,
            self.lambda0_spec_residual,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Max distance between a (possibly non-normal) matrix spectrum and a
/// sorted real target, including imaginary parts.
fn spectrum_residual(m: &CMatrix, target: &[f64]) -> Result<f64> {
    if m.nrows() != target.len() {
        return Ok(f64::INFINITY);
    }
    if m.nrows() == 0 {
        return Ok(0.0);
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::ConvergenceFailure("Schur decomposition".into()))?;
    let ev = schur
        .eigenvalues()
        .ok_or_else(|| Error::ConvergenceFailure("Schur eigenvalues".into()))?;
    let mut re: Vec<f64> = ev.iter().map(|z| z.re).collect();
    re.sort_by(f64::total_cmp);
    let imag = ev.iter().fold(0.0_f64, |acc, z| acc.max(z.im.abs()));
    Ok(re
        .iter()
        .zip(target)
        .fold(imag, |acc, (x, y)| acc.max((x - y).abs())))
}

pub fn verify_graph_props(
    sol: &RiccatiSolution,
    inst: &PerturbationInstance,
    ps: &PerturbedSplit,
) -> Result<GraphReport> {
    if sol.x.shape() != (inst.n1(), inst.n0()) || ps.el0.dim() != inst.dim() {
        return Err(Error::DimensionMismatch {
            expected: format!("X {}x{}", inst.n1(), inst.n0()),
            actual: format!("X {:?}", sol.x.shape()),
        });
    }
    let measured = subspace_angle(&inst.split.e0, &ps.el0)?.norm_diff;
    let eq17_residual = (measured - bounds::sin_arctan(sol.mu)).abs();

    let z0 = inst.split.basis0.adjoint() * &ps.basis1;
    let z1 = inst.split.basis1.adjoint() * &ps.basis1;
    let graph1_residual = op_norm(&(z0 + sol.x.adjoint() * z1));

    let spec0_residual = spectrum_residual(&(&inst.a0 + &inst.b * &sol.x), &ps.omega0)?;
    let spec1_residual =
        spectrum_residual(&(&inst.a1 - inst.b.adjoint() * sol.x.adjoint()), &ps.omega1)?;

    let lambda0_asymmetry = op_norm(&(&sol.lambda0 - sol.lambda0.adjoint()));
    let herm = eigh(&HermitianOperator::hermitian_part(sol.lambda0.clone()))?;
    let lambda0_spec_residual = if herm.values.len() == ps.omega0.len() {
        herm.values
            .iter()
            .zip(&ps.omega0)
            .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).abs()))
    } else {
        f64::INFINITY
    };
    Ok(GraphReport {
        measured,
        eq17_residual,
        graph1_residual,
        spec0_residual,
        spec1_residual,
        lambda0_asymmetry,
        lambda0_spec_residual,
        lambda0_spectrum: herm.values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disposition::{assemble_instance, random_instance, PinSide, RandomParams};
    use crate::hermitian::op_norm_diff;
    use crate::sampling::random_unitary;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn e1() -> PerturbationInstance {
        let b = CMatrix::from_row_slice(1, 2, &[c(0.5), c(0.0)]);
        assemble_instance(&[0.0], &[-1.0, 1.0], (-1.0, 1.0), &b).unwrap()
    }

    fn random(seed: u64, n0: usize, n1: usize, v: f64) -> PerturbationInstance {
        let p = RandomParams {
            n0,
            n1,
            gap_left: -1.0,
            gap_right: 2.0,
            d: 0.5,
            outer_radius: 3.0,
            v,
            pin_side: PinSide::Random,
            hide_basis: false,
        };
        random_instance(&p, seed).unwrap()
    }

    const S2: f64 = std::f64::consts::SQRT_2;

    #[test]
    fn e1_split() {
        let inst = e1();
        let ps = perturbed_split(&inst).unwrap();
        assert_eq!(ps.omega0.len(), 1);
        assert!((ps.omega0[0] - (S2 - 1.0) / 2.0).abs() < 1e-14);
        assert!((ps.omega1[0] + (1.0 + S2) / 2.0).abs() < 1e-14);
        assert!((ps.omega1[1] - 1.0).abs() < 1e-14);
        let (lo, hi) = ps.enclosure.unwrap();
        assert!((hi - (S2 - 1.0) / 2.0).abs() < 1e-14);
        assert!((lo + (S2 - 1.0) / 2.0).abs() < 1e-14);
        assert!(!ps.gap_closed);
    }

    #[test]
    fn e1_solution() {
        let inst = e1();
        let ps = perturbed_split(&inst).unwrap();
        let sol = angular_operator(&inst, &ps).unwrap();
        assert!((sol.x[(0, 0)] - c(S2 - 1.0)).norm() < 1e-14);
        assert!(sol.x[(1, 0)].norm() < 1e-14);
        assert!((sol.mu - (S2 - 1.0)).abs() < 1e-14);
        assert!(sol.riccati_residual < 1e-12);

        let lemma = lemma22_check(&sol, &inst).unwrap();
        assert_eq!(lemma.len(), 1);
        assert!(lemma[0].top);
        assert!(lemma[0].res26 < 1e-12 && lemma[0].res27 < 1e-12);
        assert_eq!(lemma[0].cross_imag, 0.0);

        let g = verify_graph_props(&sol, &inst, &ps).unwrap();
        assert!((g.measured - (std::f64::consts::PI / 8.0).sin()).abs() < 1e-14);
        assert!(g.max_residual() < 1e-13);
    }

    #[test]
    fn unperturbed_instance() {
        let inst = random(3, 3, 4, 0.0);
        let ps = perturbed_split(&inst).unwrap();
        let mut sigma0 = inst.split.sigma0.clone();
        sigma0.sort_by(f64::total_cmp);
        for (x, y) in ps.omega0.iter().zip(&sigma0) {
            assert!((x - y).abs() < 1e-14);
        }
        let sol = angular_operator(&inst, &ps).unwrap();
        assert_eq!(sol.mu, 0.0);
        assert!(op_norm_diff(&sol.lambda0, &inst.a0) < 1e-14);
        let g = verify_graph_props(&sol, &inst, &ps).unwrap();
        assert!(g.measured < 1e-14);
        assert!(g.max_residual() < 1e-14);
    }

    #[test]
    fn residual_detects_wrong_solution() {
        let inst = e1();
        let ps = perturbed_split(&inst).unwrap();
        let sol = angular_operator(&inst, &ps).unwrap();
        let mut x = sol.x.clone();
        x[(0, 0)] += c(0.1);
        assert!(riccati_residual(&x, &inst.a0, &inst.a1, &inst.b).unwrap() > 0.05);
        let zero = CMatrix::zeros(2, 1);
        assert_eq!(
            riccati_residual(&zero, &inst.a0, &inst.a1, &CMatrix::zeros(1, 2)).unwrap(),
            0.0
        );
        assert!(matches!(
            riccati_residual(&zero, &inst.a1, &inst.a1, &inst.b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn kernel_eigenpairs_degenerate_to_zero() {
        // n0 = 2 with B of rank 1: |X| has a kernel vector.
        let b = CMatrix::from_row_slice(2, 2, &[c(0.3), c(0.0), c(0.0), c(0.0)]);
        let inst = assemble_instance(&[-0.2, 0.1], &[-1.0, 1.0], (-1.0, 1.0), &b).unwrap();
        let ps = perturbed_split(&inst).unwrap();
        let sol = angular_operator(&inst, &ps).unwrap();
        let lemma = lemma22_check(&sol, &inst).unwrap();
        let kernel = lemma.iter().find(|r| r.lambda.abs() < 1e-12).unwrap();
        assert!(kernel.res26 < 1e-15 && kernel.res27 < 1e-15);
    }

    #[test]
    fn random_instance_graph_invariants() {
        for seed in 0..10 {
            let inst = random(seed, 3, 3, 0.6);
            let ps = perturbed_split(&inst).unwrap();
            let sol = angular_operator(&inst, &ps).unwrap();
            let scale = inst.quadratic_scale();
            assert!(sol.riccati_residual <= 1e-10 * scale);
            let g = verify_graph_props(&sol, &inst, &ps).unwrap();
            assert!(g.max_residual() <= 1e-8, "{g:?}");
            for r in lemma22_check(&sol, &inst).unwrap() {
                assert!(r.res26 <= TOL_IDENTITY * scale);
                assert!(r.res27 <= TOL_IDENTITY * scale);
                assert!(r.cross_imag.abs() <= 1e-10);
            }
            // (3.1) holds here: D = 3, d = 0.5, √(d(D−d)) ≈ 1.118 > 0.6
            assert!(sol.mu < 1.0);
        }
    }

    #[test]
    fn basis_independence() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let inst = random(4, 4, 5, 0.7);
        let ps = perturbed_split(&inst).unwrap();
        let sol = angular_operator(&inst, &ps).unwrap();
        let w = random_unitary(&mut rng, 4);
        let other = angular_operator_from_basis(&inst, &(&ps.basis0 * w)).unwrap();
        assert!(op_norm_diff(&sol.x, &other.x) <= 1e-9);
    }

    #[test]
    fn shift_invariance() {
        let inst = random(5, 2, 4, 0.8);
        let c0 = inst.split.gap_center();
        let shifted = inst.shifted(c0);
        let x = angular_operator(&inst, &perturbed_split(&inst).unwrap())
            .unwrap()
            .x;
        let y = angular_operator(&shifted, &perturbed_split(&shifted).unwrap())
            .unwrap()
            .x;
        assert!(op_norm_diff(&x, &y) <= 1e-8);
    }

    #[test]
    fn hidden_basis_gives_same_x() {
        let mut p = RandomParams {
            n0: 3,
            n1: 3,
            gap_left: -1.0,
            gap_right: 1.0,
            d: 0.3,
            outer_radius: 1.0,
            v: 0.25,
            pin_side: PinSide::Left,
            hide_basis: false,
        };
        let plain = random_instance(&p, 77).unwrap();
        p.hide_basis = true;
        let hidden = random_instance(&p, 77).unwrap();
        let x0 = angular_operator(&plain, &perturbed_split(&plain).unwrap())
            .unwrap()
            .x;
        let x1 = angular_operator(&hidden, &perturbed_split(&hidden).unwrap())
            .unwrap()
            .x;
        assert!(op_norm_diff(&x0, &x1) <= 1e-9);
    }

    #[test]
    fn mu_is_continuous_in_coupling_scale() {
        let inst = random(6, 3, 4, 0.9);
        let mus: Vec<f64> = (0..=10)
            .map(|i| {
                let t = i as f64 / 10.0;
                let b = inst.b.map(|z| z * t);
                let scaled =
                    assemble_instance(&inst.split.sigma0, &inst.split.sigma1, inst.gap(), &b)
                        .unwrap();
                angular_operator(&scaled, &perturbed_split(&scaled).unwrap())
                    .unwrap()
                    .mu
            })
            .collect();
        assert_eq!(mus[0], 0.0);
        let max_step = mus
            .windows(2)
            .map(|w| (w[1] - w[0]).abs())
            .fold(0.0, f64::max);
        let mean_step = (mus[10] - mus[0]).abs() / 10.0;
        assert!(max_step <= 10.0 * mean_step.max(1e-3));
    }

    #[test]
    fn rank_mismatch_reported() {
        let inst = e1();
        let mut ps = perturbed_split(&inst).unwrap();
        ps.omega0.clear();
        assert!(matches!(
            angular_operator(&inst, &ps),
            Err(Error::RankMismatch { .. })
        ));
    }
}
