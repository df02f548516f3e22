//! Annular spectral dispositions: an inner spectral component `σ₀` lying in
//! a finite gap `Δ = (γ_l, γ_r)` of the outer component `σ₁`, and block
//! instances `L = A + V` with `V` off-diagonal with respect to that split.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{DispositionError, Error, Result};
use crate::hermitian::{
    eigh, identity, op_norm, CMatrix, EigenSystem, HermitianOperator, Projector, TOL_EDGE,
};
use crate::sampling::{random_matrix, random_unitary};

/// The partition `spec(A) = σ₀ ∪ σ₁` with its gap and projectors.
#[derive(Debug, Clone)]
pub struct SpectralSplit {
    pub sigma0: Vec<f64>,
    pub sigma1: Vec<f64>,
    pub gap_left: f64,
    pub gap_right: f64,
    /// `dist(σ₀, σ₁)`.
    pub d: f64,
    /// `|Δ| = γ_r − γ_l`.
    pub gap_len: f64,
    /// Orthonormal basis of `Ran E_A(σ₀)`, columns paired with `sigma0`.
    pub basis0: CMatrix,
    /// Orthonormal basis of `Ran E_A(σ₁)`, columns paired with `sigma1`.
    pub basis1: CMatrix,
    pub e0: Projector,
    pub e1: Projector,
    /// `J = E₀ − E₁`.
    pub j: HermitianOperator,
}

impl SpectralSplit {
    pub fn dim(&self) -> usize {
        self.basis0.nrows()
    }

    pub fn gap(&self) -> (f64, f64) {
        (self.gap_left, self.gap_right)
    }

    pub fn gap_center(&self) -> f64 {
        0.5 * (self.gap_left + self.gap_right)
    }

    fn from_bases(
        sigma0: Vec<f64>,
        sigma1: Vec<f64>,
        gap: (f64, f64),
        basis0: CMatrix,
        basis1: CMatrix,
    ) -> Self {
        let d = min_distance(&sigma0, &sigma1);
        let e0 = Projector::from_basis(&basis0);
        let e1 = Projector::from_basis(&basis1);
        let j = HermitianOperator::hermitian_part(&e0.matrix - &e1.matrix);
        Self {
            sigma0,
            sigma1,
            gap_left: gap.0,
            gap_right: gap.1,
            d,
            gap_len: gap.1 - gap.0,
            basis0,
            basis1,
            e0,
            e1,
            j,
        }
    }

    /// The same split for `A − c·I` with gap `Δ − c`.
    pub fn shifted(&self, c: f64) -> SpectralSplit {
        let mut out = self.clone();
        out.sigma0.iter_mut().for_each(|x| *x -= c);
        out.sigma1.iter_mut().for_each(|x| *x -= c);
        out.gap_left -= c;
        out.gap_right -= c;
        out
    }
}

pub fn min_distance(xs: &[f64], ys: &[f64]) -> f64 {
    xs.iter()
        .flat_map(|x| ys.iter().map(move |y| (x - y).abs()))
        .fold(f64::INFINITY, f64::min)
}

fn check_gap(gap: (f64, f64)) -> std::result::Result<(), DispositionError> {
    if gap.0 < gap.1 && gap.0.is_finite() && gap.1.is_finite() {
        Ok(())
    } else {
        Err(DispositionError::InvalidGap {
            left: gap.0,
            right: gap.1,
        })
    }
}

fn check_endpoints(
    sigma1: &[f64],
    gap: (f64, f64),
    tol: f64,
) -> std::result::Result<(), DispositionError> {
    for endpoint in [gap.0, gap.1] {
        if !sigma1.iter().any(|x| (x - endpoint).abs() <= tol) {
            return Err(DispositionError::GapEndpointMissing { endpoint });
        }
    }
    Ok(())
}

/// Check explicit spectral lists against a gap: `σ₀ ⊂ Δ`, `σ₁ ∩ Δ = ∅`, and
/// both gap ends in `σ₁` (up to `1e-9·scale`).
pub fn check_lists(
    sigma0: &[f64],
    sigma1: &[f64],
    gap: (f64, f64),
) -> std::result::Result<(), DispositionError> {
    check_gap(gap)?;
    let scale = sigma0
        .iter()
        .chain(sigma1)
        .fold(0.0_f64, |acc, x| acc.max(x.abs()));
    let tol = TOL_EDGE * scale;
    if sigma0.is_empty() {
        return Err(DispositionError::EmptyInnerComponent {
            left: gap.0,
            right: gap.1,
        });
    }
    if let Some(&value) = sigma0
        .iter()
        .find(|&&x| !(x > gap.0 + tol && x < gap.1 - tol))
    {
        return Err(DispositionError::InnerOutsideGap { value });
    }
    if let Some(&value) = sigma1.iter().find(|&&x| x > gap.0 + tol && x < gap.1 - tol) {
        return Err(DispositionError::NotAGap { value });
    }
    check_endpoints(sigma1, gap, tol)
}

/// Split the spectrum of `A` by a user-supplied gap.
///
/// Eigenvalues within `1e-9·‖A‖` of a gap end count as that end and belong
/// to `σ₁`; everything strictly inside belongs to `σ₀`.
pub fn validate_disposition(a: &HermitianOperator, gap: (f64, f64)) -> Result<SpectralSplit> {
    check_gap(gap)?;
    let es = eigh(a)?;
    split_from_eigensystem(&es, gap)
}

fn split_from_eigensystem(es: &EigenSystem, gap: (f64, f64)) -> Result<SpectralSplit> {
    let tol = TOL_EDGE * es.scale;
    let (inner, outer): (Vec<usize>, Vec<usize>) =
        (0..es.dim()).partition(|&k| es.values[k] > gap.0 + tol && es.values[k] < gap.1 - tol);
    if inner.is_empty() {
        return Err(DispositionError::EmptyInnerComponent {
            left: gap.0,
            right: gap.1,
        }
        .into());
    }
    let sigma0: Vec<f64> = inner.iter().map(|&k| es.values[k]).collect();
    let sigma1: Vec<f64> = outer.iter().map(|&k| es.values[k]).collect();
    check_endpoints(&sigma1, gap, tol)?;
    Ok(SpectralSplit::from_bases(
        sigma0,
        sigma1,
        gap,
        es.columns(&inner),
        es.columns(&outer),
    ))
}

/// Off-diagonal part `(W − JWJ)/2` of `W` with respect to the split.
pub fn offdiag_project(w: &HermitianOperator, split: &SpectralSplit) -> Result<HermitianOperator> {
    if w.dim() != split.dim() {
        return Err(Error::DimensionMismatch {
            expected: format!("n = {}", split.dim()),
            actual: format!("n = {}", w.dim()),
        });
    }
    let j = split.j.matrix();
    let m = (w.matrix() - j * w.matrix() * j).map(|z| z * 0.5);
    Ok(HermitianOperator::hermitian_part(m))
}

/// `L = A + V` with `A = diag(A₀, A₁)` and `V = [[0, B], [Bᴴ, 0]]` in the
/// block coordinates given by the split bases.
#[derive(Debug, Clone)]
pub struct PerturbationInstance {
    pub a: HermitianOperator,
    pub v: HermitianOperator,
    pub l: HermitianOperator,
    /// `A` restricted to `Ran E_A(σ₀)`, `n₀ × n₀`.
    pub a0: CMatrix,
    /// `A` restricted to `Ran E_A(σ₁)`, `n₁ × n₁`.
    pub a1: CMatrix,
    /// Coupling block, `n₀ × n₁`.
    pub b: CMatrix,
    /// `‖V‖ = ‖B‖`.
    pub norm_v: f64,
    pub split: SpectralSplit,
    /// `B = 0`.
    pub trivial: bool,
}

impl PerturbationInstance {
    pub fn n0(&self) -> usize {
        self.a0.nrows()
    }

    pub fn n1(&self) -> usize {
        self.a1.nrows()
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn gap(&self) -> (f64, f64) {
        self.split.gap()
    }

    /// `(‖A‖ + ‖V‖)²`, the scale of the quadratic identities.
    pub fn quadratic_scale(&self) -> f64 {
        let norm_a = self
            .split
            .sigma0
            .iter()
            .chain(&self.split.sigma1)
            .fold(0.0_f64, |m, x| m.max(x.abs()));
        let s = norm_a + self.norm_v;
        s * s
    }

    /// Build from an arbitrary Hermitian `A` and an optional Hermitian `W`
    /// whose off-diagonal part becomes `V`.
    pub fn from_operators(
        a: HermitianOperator,
        w: Option<&HermitianOperator>,
        gap: (f64, f64),
    ) -> Result<Self> {
        let split = validate_disposition(&a, gap)?;
        let v = match w {
            Some(w) => offdiag_project(w, &split)?,
            None => HermitianOperator::hermitian_part(CMatrix::zeros(a.dim(), a.dim())),
        };
        let q0 = &split.basis0;
        let q1 = &split.basis1;
        let a0 = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            split.sigma0.len(),
            split.sigma0.iter().map(|&x| Complex64::new(x, 0.0)),
        ));
        let a1 = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            split.sigma1.len(),
            split.sigma1.iter().map(|&x| Complex64::new(x, 0.0)),
        ));
        let b = q0.adjoint() * v.matrix() * q1;
        let norm_v = op_norm(&b);
        let l = a.add(&v)?;
        Ok(Self {
            a,
            v,
            l,
            a0,
            a1,
            trivial: norm_v == 0.0,
            b,
            norm_v,
            split,
        })
    }

    /// Unitarily conjugated copy `W·(·)·Wᴴ`; the blocks are unchanged.
    pub fn conjugated(&self, w: &CMatrix) -> Result<Self> {
        let mut out = self.clone();
        out.a = HermitianOperator::hermitian_part(w * self.a.matrix() * w.adjoint());
        out.v = HermitianOperator::hermitian_part(w * self.v.matrix() * w.adjoint());
        out.l = out.a.add(&out.v)?;
        out.split = SpectralSplit::from_bases(
            self.split.sigma0.clone(),
            self.split.sigma1.clone(),
            self.split.gap(),
            w * &self.split.basis0,
            w * &self.split.basis1,
        );
        Ok(out)
    }

    /// The instance for `A − c·I` (and `L − c·I`) with gap `Δ − c`.
    pub fn shifted(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.a = self.a.shifted(c);
        out.l = self.l.shifted(c);
        let n0 = self.n0();
        let n1 = self.n1();
        out.a0 = &self.a0 - identity(n0).map(|z| z * c);
        out.a1 = &self.a1 - identity(n1).map(|z| z * c);
        out.split = self.split.shifted(c);
        out
    }

    pub fn to_json(&self) -> InstanceJson {
        InstanceJson {
            sigma0: self.split.sigma0.clone(),
            sigma1: self.split.sigma1.clone(),
            gap: [self.split.gap_left, self.split.gap_right],
            b: MatrixJson::from_matrix(&self.b),
        }
    }
}

/// Assemble `A = diag(σ₀, σ₁)`, `V` from `B`, and `L = A + V`.
pub fn assemble_instance(
    sigma0: &[f64],
    sigma1: &[f64],
    gap: (f64, f64),
    b: &CMatrix,
) -> Result<PerturbationInstance> {
    let n0 = sigma0.len();
    let n1 = sigma1.len();
    if b.shape() != (n0, n1) {
        return Err(Error::DimensionMismatch {
            expected: format!("B is {n0}x{n1}"),
            actual: format!("B is {}x{}", b.nrows(), b.ncols()),
        });
    }
    check_lists(sigma0, sigma1, gap)?;
    let n = n0 + n1;
    let diag: Vec<f64> = sigma0.iter().chain(sigma1).copied().collect();
    let a = HermitianOperator::from_diagonal(&diag);
    // Recompute the split from A itself; it must agree with the lists.
    let recomputed = validate_disposition(&a, gap)?;
    let mut sorted0 = sigma0.to_vec();
    sorted0.sort_by(f64::total_cmp);
    if recomputed.sigma0.len() != n0
        || recomputed
            .sigma0
            .iter()
            .zip(&sorted0)
            .any(|(x, y)| (x - y).abs() > 1e-9 * (1.0 + y.abs()))
    {
        return Err(Error::RankMismatch {
            expected: n0,
            actual: recomputed.sigma0.len(),
        });
    }

    let mut vm = CMatrix::zeros(n, n);
    vm.view_mut((0, n0), (n0, n1)).copy_from(b);
    vm.view_mut((n0, 0), (n1, n0)).copy_from(&b.adjoint());
    let v = HermitianOperator::new(vm)?;
    let l = a.add(&v)?;
    let id = identity(n);
    let basis0 = id.columns(0, n0).into_owned();
    let basis1 = id.columns(n0, n1).into_owned();
    let split = SpectralSplit::from_bases(sigma0.to_vec(), sigma1.to_vec(), gap, basis0, basis1);
    let norm_v = op_norm(b);
    Ok(PerturbationInstance {
        a0: CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            n0,
            sigma0.iter().map(|&x| Complex64::new(x, 0.0)),
        )),
        a1: CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            n1,
            sigma1.iter().map(|&x| Complex64::new(x, 0.0)),
        )),
        b: b.clone(),
        a,
        v,
        l,
        norm_v,
        split,
        trivial: norm_v == 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PinSide {
    Left,
    Right,
    Random,
}

/// Parameters of [`random_instance`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomParams {
    pub n0: usize,
    pub n1: usize,
    pub gap_left: f64,
    pub gap_right: f64,
    pub d: f64,
    pub outer_radius: f64,
    pub v: f64,
    pub pin_side: PinSide,
    /// Conjugate by a seeded Haar unitary so the block structure is not
    /// visible in the ambient coordinates.
    pub hide_basis: bool,
}

/// Seeded random instance with `dist(σ₀, σ₁) = d` and `‖V‖ = v`.
///
/// `σ₁` holds both gap ends plus `n₁ − 2` values within `outer_radius`
/// outside the gap. `σ₀` has one value pinned at distance `d` from a gap
/// end and the rest uniform on `[γ_l + d, γ_r − d]`. `B` is a normalized
/// complex Gaussian block scaled to norm `v`.
pub fn random_instance(p: &RandomParams, seed: u64) -> Result<PerturbationInstance> {
    let (gl, gr) = (p.gap_left, p.gap_right);
    let infeasible = |msg: &str| Err(Error::InfeasibleParams(msg.to_string()));
    if p.n0 < 1 {
        return infeasible("n0 must be at least 1");
    }
    if p.n1 < 2 {
        return infeasible("n1 must be at least 2 to occupy both gap ends");
    }
    if !(gl < gr) || !gl.is_finite() || !gr.is_finite() {
        return infeasible("gap must satisfy gap_left < gap_right");
    }
    if !(p.d > 0.0 && p.d <= (gr - gl) / 2.0) {
        return infeasible("d must satisfy 0 < d <= (gap_right - gap_left)/2");
    }
    if !(p.v >= 0.0 && p.v.is_finite()) {
        return infeasible("v must be finite and nonnegative");
    }
    if !(p.outer_radius >= 0.0 && p.outer_radius.is_finite()) {
        return infeasible("outer_radius must be finite and nonnegative");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (gl + p.d, gr - p.d);
    let pin_left = match p.pin_side {
        PinSide::Left => true,
        PinSide::Right => false,
        PinSide::Random => rng.random_bool(0.5),
    };
    let mut sigma0 = Vec::with_capacity(p.n0);
    sigma0.push(if pin_left { lo } else { hi });
    for _ in 1..p.n0 {
        let t: f64 = rng.random();
        sigma0.push((lo + t * (hi - lo)).clamp(lo, hi));
    }
    let mut sigma1 = vec![gl, gr];
    for _ in 2..p.n1 {
        let left: bool = rng.random_bool(0.5);
        let off = p.outer_radius * rng.random::<f64>();
        sigma1.push(if left { gl - off } else { gr + off });
    }
    let raw = random_matrix(&mut rng, p.n0, p.n1);
    let b = if p.v == 0.0 {
        CMatrix::zeros(p.n0, p.n1)
    } else {
        let s = op_norm(&raw);
        raw.map(|z| z * (p.v / s))
    };
    let inst = assemble_instance(&sigma0, &sigma1, (gl, gr), &b)?;
    if p.hide_basis {
        let w = random_unitary(&mut rng, p.n0 + p.n1);
        inst.conjugated(&w)
    } else {
        Ok(inst)
    }
}

/// Finite gaps of a spectrum: open intervals between consecutive distinct
/// eigenvalues, as `(left, right)` pairs.
pub fn finite_gaps(a: &HermitianOperator, min_width: f64) -> Result<Vec<(f64, f64)>> {
    let es = eigh(a)?;
    Ok(es
        .values
        .windows(2)
        .filter(|w| w[1] - w[0] > min_width)
        .map(|w| (w[0], w[1]))
        .collect())
}

/// Matrix JSON: `{"n": rows, "real": [[...]], "imag": [[...]]}` in
/// row-major order; `imag` defaults to zero. The column count is the row
/// length, so rectangular blocks are allowed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub n: usize,
    pub real: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub imag: Option<Vec<Vec<f64>>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let rows = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        let imag = m.iter().any(|z| z.im != 0.0).then(|| rows(|z| z.im));
        Self {
            n: m.nrows(),
            real: rows(|z| z.re),
            imag,
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        if self.real.len() != self.n {
            return Err(Error::Parse(format!(
                "\"n\" = {} but \"real\" has {} rows",
                self.n,
                self.real.len()
            )));
        }
        let cols = self.real.first().map_or(0, Vec::len);
        if self.real.iter().any(|r| r.len() != cols) {
            return Err(Error::Parse("ragged rows in \"real\"".into()));
        }
        if let Some(im) = &self.imag {
            if im.len() != self.n || im.iter().any(|r| r.len() != cols) {
                return Err(Error::Parse("\"imag\" shape differs from \"real\"".into()));
            }
        }
        let re = DMatrix::from_fn(self.n, cols, |i, j| self.real[i][j]);
        Ok(CMatrix::from_fn(self.n, cols, |i, j| {
            let im = self.imag.as_ref().map_or(0.0, |m| m[i][j]);
            Complex64::new(re[(i, j)], im)
        }))
    }
}

/// Instance JSON: `{"sigma0": [...], "sigma1": [...], "gap": [γ_l, γ_r], "B": matrix}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceJson {
    pub sigma0: Vec<f64>,
    pub sigma1: Vec<f64>,
    pub gap: [f64; 2],
    #[serde(rename = "B")]
    pub b: MatrixJson,
}

impl InstanceJson {
    pub fn build(&self) -> Result<PerturbationInstance> {
        let b = self.b.to_matrix()?;
        assemble_instance(&self.sigma0, &self.sigma1, (self.gap[0], self.gap[1]), &b)
    }
}
