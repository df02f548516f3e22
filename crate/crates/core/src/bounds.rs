//! Closed-form bounds on the rotation of a spectral subspace under an
//! off-diagonal perturbation.
//!
//! Notation: `D` is the gap length, `d` the distance between the inner and
//! outer spectral components, `v` the perturbation norm and `a = D/2 − d`
//! the half-width of the hull available to the inner component once the
//! gap is centred at the origin.
//!
//! Trigonometric compositions go through algebraic identities
//! (`sin(arctan t) = t/√(1+t²)`, `tan(½ arctan t) = t/(1+√(1+t²))`) so the
//! values stay accurate for large arguments.

use serde::Serialize;

use crate::error::{DomainError, Error, Result};

const SQRT_2: f64 = std::f64::consts::SQRT_2;
/// Relative slack when checking `d ≤ D/2` on measured data.
const HALF_GAP_SLACK: f64 = 1e-12;
/// Absolute slack (times the problem scale) for bound satisfaction.
pub const TOL_BOUND: f64 = 1e-9;

pub fn sin_arctan(t: f64) -> f64 {
    t / (1.0 + t * t).sqrt()
}

pub fn tan_half_arctan(t: f64) -> f64 {
    t / (1.0 + (1.0 + t * t).sqrt())
}

pub fn sin_half_arctan(t: f64) -> f64 {
    sin_arctan(tan_half_arctan(t))
}

/// Validated `(D, d, v)` triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundInputs {
    #[serde(rename = "D")]
    pub gap_len: f64,
    pub d: f64,
    pub v: f64,
}

/// Which hypotheses hold for a `(D, d, v)` triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RegimeFlags {
    /// `v < √2·d`: the a priori bound applies.
    pub regime12: bool,
    /// `v < √(dD)`: the gap stays open and the enclosure holds.
    pub regime29: bool,
    /// `v < √(d(D−d))`: the detailed bound applies.
    pub regime31: bool,
}

impl BoundInputs {
    pub fn new(gap_len: f64, d: f64, v: f64) -> std::result::Result<Self, DomainError> {
        if !(gap_len > 0.0) {
            return Err(DomainError::NonPositiveGap { big_d: gap_len });
        }
        let half = gap_len / 2.0;
        if !(d > 0.0) || d > half * (1.0 + HALF_GAP_SLACK) {
            return Err(DomainError::DistanceOutOfRange { d, half });
        }
        if !(v >= 0.0) {
            return Err(DomainError::NegativeNorm { v });
        }
        Ok(Self {
            gap_len,
            d: d.min(half),
            v,
        })
    }

    /// `a = D/2 − d ≥ 0`.
    pub fn a(&self) -> f64 {
        (self.gap_len / 2.0 - self.d).max(0.0)
    }

    pub fn limit_12(&self) -> f64 {
        SQRT_2 * self.d
    }

    pub fn limit_29(&self) -> f64 {
        (self.d * self.gap_len).sqrt()
    }

    pub fn limit_31(&self) -> f64 {
        (self.d * (self.gap_len - self.d)).sqrt()
    }

    pub fn flags(&self) -> RegimeFlags {
        RegimeFlags {
            regime12: self.v < self.limit_12(),
            regime29: self.v < self.limit_29(),
            regime31: self.v < self.limit_31(),
        }
    }

    fn require(&self, limit: f64, condition: &'static str) -> std::result::Result<(), DomainError> {
        if self.v < limit {
            Ok(())
        } else {
            Err(DomainError::NormTooLarge {
                v: self.v,
                limit,
                condition,
            })
        }
    }
}

/// Gap-erosion radius `r_V = v·tan(½ arctan(2v/(D−d)))`.
pub fn r_v(v: f64, d: f64, gap_len: f64) -> Result<f64> {
    let inp = BoundInputs::new(gap_len, d, v)?;
    inp.require(inp.limit_29(), "v < sqrt(d*D)")?;
    Ok(r_v_unchecked(&inp))
}

pub fn r_v_unchecked(inp: &BoundInputs) -> f64 {
    inp.v * tan_half_arctan(2.0 * inp.v / (inp.gap_len - inp.d))
}

/// Interval guaranteed to contain the perturbed inner spectrum:
/// `(γ_l + d − r_V, γ_r − d + r_V)`.
pub fn enclosure(gap_left: f64, gap_right: f64, d: f64, v: f64) -> Result<(f64, f64)> {
    let r = r_v(v, d, gap_right - gap_left)?;
    Ok((gap_left + (d - r), gap_right - (d - r)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Linear,
    Full,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Linear => "linear",
            Branch::Full => "full",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Kappa {
    pub value: f64,
    pub branch: Branch,
}

/// Branch point `½√(d(D−2d))` of κ.
pub fn kappa_threshold(gap_len: f64, d: f64) -> f64 {
    0.5 * (d * (gap_len - 2.0 * d)).max(0.0).sqrt()
}

/// The linear branch `2v/d`.
pub fn kappa_linear(_gap_len: f64, d: f64, v: f64) -> f64 {
    2.0 * v / d
}

/// The full branch
/// `(vD + √(d(D−d))·√((D−2d)² + 4v²)) / (2(d(D−d) − v²))`.
pub fn kappa_full(gap_len: f64, d: f64, v: f64) -> f64 {
    let dd = d * (gap_len - d);
    let w = gap_len - 2.0 * d;
    (v * gap_len + dd.sqrt() * (w * w + 4.0 * v * v).sqrt()) / (2.0 * (dd - v * v))
}

pub fn kappa(gap_len: f64, d: f64, v: f64) -> Result<Kappa> {
    let inp = BoundInputs::new(gap_len, d, v)?;
    inp.require(inp.limit_31(), "v < sqrt(d*(D-d))")?;
    Ok(kappa_unchecked(&inp))
}

/// κ without the `v < √(d(D−d))` check; the full branch turns negative or
/// infinite past that limit, which callers must flag.
pub fn kappa_unchecked(inp: &BoundInputs) -> Kappa {
    let (big_d, d, v) = (inp.gap_len, inp.d, inp.v);
    if v <= kappa_threshold(big_d, d) {
        Kappa {
            value: kappa_linear(big_d, d, v),
            branch: Branch::Linear,
        }
    } else {
        Kappa {
            value: kappa_full(big_d, d, v),
            branch: Branch::Full,
        }
    }
}

/// `sin(arctan(v/d))`, valid for `v < √2·d`.
pub fn bound_apriori(v: f64, d: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(DomainError::DistanceOutOfRange { d, half: f64::NAN }.into());
    }
    if !(v >= 0.0) {
        return Err(DomainError::NegativeNorm { v }.into());
    }
    if !(v < SQRT_2 * d) {
        return Err(DomainError::NormTooLarge {
            v,
            limit: SQRT_2 * d,
            condition: "v < sqrt(2)*d",
        }
        .into());
    }
    Ok(sin_arctan(v / d))
}

/// `sin(½ arctan κ(D, d, v))`, valid for `v < √(d(D−d))`; always below √2/2.
pub fn bound_detailed(gap_len: f64, d: f64, v: f64) -> Result<f64> {
    Ok(sin_half_arctan(kappa(gap_len, d, v)?.value))
}

/// `φ(x, y) = (vx + ay)/(x² + y² − a² − v²)`.
pub fn phi(x: f64, y: f64, a: f64, v: f64) -> Result<f64> {
    let den = x * x + y * y - a * a - v * v;
    if !(den > 0.0) {
        return Err(Error::SingularDenominator { x, y });
    }
    Ok((v * x + a * y) / den)
}

#[inline]
fn phi_raw(x: f64, y: f64, a: f64, v: f64) -> f64 {
    (v * x + a * y) / (x * x + y * y - a * a - v * v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiSup {
    pub sup: f64,
    pub x: f64,
    pub y: f64,
    pub branch: Branch,
}

fn check_phi_domain(a: f64, d: f64, v: f64) -> Result<()> {
    if !(a >= 0.0) {
        return Err(DomainError::NegativeHalfWidth { a }.into());
    }
    if !(d > 0.0) {
        return Err(DomainError::DistanceOutOfRange { d, half: a + d }.into());
    }
    if !(v >= 0.0) {
        return Err(DomainError::NegativeNorm { v }.into());
    }
    let limit = (d * (2.0 * a + d)).sqrt();
    if !(v < limit) {
        return Err(DomainError::NormTooLarge {
            v,
            limit,
            condition: "v < sqrt(d*(2a+d))",
        }
        .into());
    }
    Ok(())
}

/// Supremum of φ over `[a+d, ∞) × [0, v]`.
///
/// The maximum sits on the edge `x = a+d`. On that edge
/// `∂φ/∂y = 0` reduces to `a·y² + 2v(a+d)·y − a·K = 0` with
/// `K = d(2a+d) − v²`, whose nonnegative root is
/// `y* = a·K / (v(a+d) + √(d(2a+d)(a²+v²)))`. When `y* ≥ v`
/// (equivalently `v ≤ √(da/2)`) the maximizer is the corner `(a+d, v)`.
pub fn phi_sup_analytic(a: f64, d: f64, v: f64) -> Result<PhiSup> {
    check_phi_domain(a, d, v)?;
    let x = a + d;
    if v <= (d * a / 2.0).sqrt() {
        return Ok(PhiSup {
            sup: v / d,
            x,
            y: v,
            branch: Branch::Linear,
        });
    }
    let k = d * (2.0 * a + d) - v * v;
    let root = (d * (2.0 * a + d) * (a * a + v * v)).sqrt();
    Ok(PhiSup {
        sup: 0.5 * (v * x + root) / k,
        x,
        y: a * k / (v * x + root),
        branch: Branch::Full,
    })
}

/// Grid resolution for [`phi_sup_oracle`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiGrid {
    pub x_max_factor: f64,
    pub n_x: usize,
    pub n_y: usize,
}

impl Default for PhiGrid {
    fn default() -> Self {
        Self {
            x_max_factor: 4.0,
            n_x: 2000,
            n_y: 2000,
        }
    }
}

/// Brute-force supremum of φ: dense grid over a truncated domain, then
/// repeated local zooming around the best grid point.
///
/// Truncation is sound because φ decays like `v/x`.
pub fn phi_sup_oracle(a: f64, d: f64, v: f64, grid: PhiGrid) -> Result<PhiSup> {
    check_phi_domain(a, d, v)?;
    let x0 = a + d;
    let x1 = x0 * grid.x_max_factor + 10.0 * (a + v + d);
    let n_x = grid.n_x.max(2);
    let n_y = grid.n_y.max(2);
    let hx = (x1 - x0) / (n_x - 1) as f64;
    let hy = v / (n_y - 1) as f64;

    let (mut bx, mut by, mut best) = (x0, 0.0, f64::NEG_INFINITY);
    for i in 0..n_x {
        let x = x0 + hx * i as f64;
        for j in 0..n_y {
            let y = hy * j as f64;
            let f = phi_raw(x, y, a, v);
            if f > best {
                (bx, by, best) = (x, y, f);
            }
        }
    }

    let (mut rx, mut ry) = (hx, hy);
    for _ in 0..40 {
        let xs = (bx - rx).max(x0);
        let xe = (bx + rx).min(x1);
        let ys = (by - ry).max(0.0);
        let ye = (by + ry).min(v);
        for i in 0..=10 {
            let x = xs + (xe - xs) * i as f64 / 10.0;
            for j in 0..=10 {
                let y = ys + (ye - ys) * j as f64 / 10.0;
                let f = phi_raw(x, y, a, v);
                if f > best {
                    (bx, by, best) = (x, y, f);
                }
            }
        }
        rx /= 4.0;
        ry /= 4.0;
    }

    let branch = if v <= (d * a / 2.0).sqrt() {
        Branch::Linear
    } else {
        Branch::Full
    };
    Ok(PhiSup {
        sup: best,
        x: bx,
        y: by,
        branch,
    })
}

/// `max_{D ≥ 2d} κ(D, d, v) = κ(2d, d, v) = 2vd/(d² − v²)`, for `v < d`.
pub fn kappa_max_over_d(d: f64, v: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(DomainError::DistanceOutOfRange { d, half: f64::NAN }.into());
    }
    if !(v >= 0.0) {
        return Err(DomainError::NegativeNorm { v }.into());
    }
    if !(v < d) {
        return Err(DomainError::NormTooLarge {
            v,
            limit: d,
            condition: "v < d",
        }
        .into());
    }
    Ok(2.0 * v * d / (d * d - v * v))
}

/// Measured projector distance against every bound whose hypothesis holds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub measured: f64,
    pub inputs: BoundInputs,
    pub flags: RegimeFlags,
    pub bound13: Option<f64>,
    pub bound32: Option<f64>,
    pub kappa: Option<Kappa>,
    pub r_v: Option<f64>,
    pub enclosure: Option<(f64, f64)>,
    pub ratio13: Option<f64>,
    pub ratio32: Option<f64>,
    pub satisfied13: Option<bool>,
    pub satisfied32: Option<bool>,
    /// `ω₀` inside the enclosure; `None` outside `v < √(dD)` or when `ω₀`
    /// is empty.
    pub enclosure_ok: Option<bool>,
    /// `μ < 1` and `measured < √2/2`, required under `v < √(d(D−d))`.
    pub below_half_pi: Option<bool>,
}

/// Bound ratio with the convention `0/0 = 0` for an unperturbed operator.
pub fn ratio(measured: f64, bound: f64) -> f64 {
    if bound == 0.0 {
        if measured <= TOL_BOUND {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        measured / bound
    }
}

impl BoundReport {
    /// Assess `measured = ‖E_A(σ₀) − E_L(ω₀)‖` for a gap `(γ_l, γ_r)`.
    pub fn assess(
        measured: f64,
        gap: (f64, f64),
        d: f64,
        v: f64,
        omega0: &[f64],
    ) -> std::result::Result<Self, DomainError> {
        let inputs = BoundInputs::new(gap.1 - gap.0, d, v)?;
        let flags = inputs.flags();
        let scale = 1.0_f64.max(gap.0.abs()).max(gap.1.abs());

        let bound13 = flags.regime12.then(|| sin_arctan(v / inputs.d));
        let kappa = flags.regime31.then(|| kappa_unchecked(&inputs));
        let bound32 = kappa.map(|k| sin_half_arctan(k.value));
        let r = flags.regime29.then(|| r_v_unchecked(&inputs));
        let enclosure = r.map(|r| (gap.0 + (inputs.d - r), gap.1 - (inputs.d - r)));
        let enclosure_ok = match (enclosure, omega0.is_empty()) {
            (Some((lo, hi)), false) => {
                let min = omega0.iter().copied().fold(f64::INFINITY, f64::min);
                let max = omega0.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                Some(min >= lo - TOL_BOUND * scale && max <= hi + TOL_BOUND * scale)
            }
            _ => None,
        };
        let below_half_pi = flags
            .regime31
            .then_some(measured < std::f64::consts::FRAC_1_SQRT_2);
        Ok(Self {
            measured,
            inputs,
            flags,
            bound13,
            bound32,
            kappa,
            r_v: r,
            enclosure,
            ratio13: bound13.map(|b| ratio(measured, b)),
            ratio32: bound32.map(|b| ratio(measured, b)),
            satisfied13: bound13.map(|b| measured <= b + TOL_BOUND),
            satisfied32: bound32.map(|b| measured <= b + TOL_BOUND),
            enclosure_ok,
            below_half_pi,
        })
    }

    /// True when every applicable bound holds.
    pub fn all_satisfied(&self) -> bool {
        [
            self.satisfied13,
            self.satisfied32,
            self.enclosure_ok,
            self.below_half_pi,
        ]
        .iter()
        .all(|f| f.unwrap_or(true))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TAN_PI_8: f64 = 0.414_213_562_373_095_03;
    const SIN_PI_8: f64 = 0.382_683_432_365_089_8;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn r_v_examples() {
        assert_eq!(r_v(0.0, 1.0, 2.0).unwrap(), 0.0);
        assert!(close(r_v(0.5, 1.0, 2.0).unwrap(), 0.5 * TAN_PI_8, 1e-15));
        let r = r_v(1.0, 1.0, 3.0).unwrap();
        assert!(close(r, TAN_PI_8, 1e-15));
        assert!(r < 1.0);
        assert!(matches!(
            r_v(1.5, 1.0, 2.0),
            Err(Error::Domain(DomainError::NormTooLarge { .. }))
        ));
    }

    #[test]
    fn enclosure_examples() {
        assert_eq!(enclosure(-1.0, 1.0, 1.0, 0.0).unwrap(), (0.0, 0.0));
        let (lo, hi) = enclosure(-3.0, 1.0, 1.0, 0.0).unwrap();
        assert_eq!((lo, hi), (-2.0, 0.0));
        let (lo, hi) = enclosure(-1.0, 1.0, 1.0, 0.5).unwrap();
        assert!(close(lo, -0.5 * TAN_PI_8, 1e-15));
        assert!(close(hi, 0.5 * TAN_PI_8, 1e-15));
        // r_V → d as v → √(dD): the enclosure widens towards the whole gap.
        let (lo, hi) = enclosure(-1.0, 1.0, 1.0, 2f64.sqrt() * (1.0 - 1e-9)).unwrap();
        assert!(lo < hi);
        assert!(lo > -1.0 && hi < 1.0);
        assert!(hi > 0.99);
    }

    #[test]
    fn kappa_examples() {
        let k = kappa(2.0, 1.0, 0.5).unwrap();
        assert_eq!(k.branch, Branch::Full);
        assert!(close(k.value, 4.0 / 3.0, 1e-15));
        let k = kappa(4.0, 1.0, 0.5).unwrap();
        assert_eq!(k.branch, Branch::Linear);
        assert!(close(k.value, 1.0, 1e-15));
        assert_eq!(kappa(4.0, 1.0, 0.0).unwrap().value, 0.0);
        let v = 2f64.sqrt() / 2.0;
        assert!(close(kappa_linear(4.0, 1.0, v), 2f64.sqrt(), 1e-12));
        assert!(close(kappa_full(4.0, 1.0, v), 2f64.sqrt(), 1e-12));
    }

    #[test]
    fn kappa_domain_errors() {
        assert!(matches!(
            kappa(-1.0, 0.5, 0.1),
            Err(Error::Domain(DomainError::NonPositiveGap { .. }))
        ));
        assert!(matches!(
            kappa(2.0, 1.5, 0.1),
            Err(Error::Domain(DomainError::DistanceOutOfRange { .. }))
        ));
        assert!(matches!(
            kappa(2.0, 1.0, 1.0),
            Err(Error::Domain(DomainError::NormTooLarge { .. }))
        ));
        assert!(matches!(
            kappa(2.0, 1.0, -0.1),
            Err(Error::Domain(DomainError::NegativeNorm { .. }))
        ));
    }

    #[test]
    fn apriori_examples() {
        assert_eq!(bound_apriori(0.0, 1.0).unwrap(), 0.0);
        assert!(close(
            bound_apriori(1.0, 1.0).unwrap(),
            0.5f64.sqrt(),
            1e-15
        ));
        assert!(close(
            bound_apriori(0.5, 1.0).unwrap(),
            0.5 / 1.25f64.sqrt(),
            1e-15
        ));
        assert!(bound_apriori(1.5, 1.0).is_err());
    }

    #[test]
    fn detailed_examples() {
        let b = bound_detailed(2.0, 1.0, 0.5).unwrap();
        assert!(close(b, bound_apriori(0.5, 1.0).unwrap(), 1e-15));
        assert!(close(
            bound_detailed(4.0, 1.0, 0.5).unwrap(),
            SIN_PI_8,
            1e-15
        ));
        assert_eq!(bound_detailed(3.0, 1.0, 0.0).unwrap(), 0.0);
        // strictly below √2/2 near the (3.1) boundary
        let lim = (1.0f64 * 2.0).sqrt();
        let b = bound_detailed(3.0, 1.0, lim * (1.0 - 1e-12)).unwrap();
        assert!(b < std::f64::consts::FRAC_1_SQRT_2);
    }

    #[test]
    fn phi_examples() {
        assert!(close(phi(2.0, 0.5, 1.0, 0.5).unwrap(), 0.5, 1e-15));
        assert_eq!(phi(2.0, 0.0, 1.0, 0.0).unwrap(), 0.0);
        // a = 0, y = 0: vx/(x² − v²) decreasing in x ≥ d > v
        let vals: Vec<f64> = (0..20)
            .map(|i| phi(1.0 + 0.25 * i as f64, 0.0, 0.0, 0.5).unwrap())
            .collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
        assert!(matches!(
            phi(1.0, 0.0, 1.0, 0.5),
            Err(Error::SingularDenominator { .. })
        ));
    }

    #[test]
    fn phi_sup_examples() {
        let s = phi_sup_analytic(0.0, 1.0, 0.5).unwrap();
        assert_eq!(s.branch, Branch::Full);
        assert!(close(s.sup, 2.0 / 3.0, 1e-15));
        assert_eq!(s.y, 0.0);
        assert!(close(
            2.0 * s.sup,
            kappa(2.0, 1.0, 0.5).unwrap().value,
            1e-15
        ));

        let s = phi_sup_analytic(1.0, 1.0, 0.5).unwrap();
        assert_eq!(s.branch, Branch::Linear);
        assert!(close(s.sup, 0.5, 1e-15));
        assert_eq!((s.x, s.y), (2.0, 0.5));
        assert!(close(s.sup, phi(2.0, 0.5, 1.0, 0.5).unwrap(), 1e-15));

        let tiny = phi_sup_analytic(1.0, 1.0, 1e-12).unwrap();
        assert!(tiny.sup < 1e-11);
    }

    #[test]
    fn phi_sup_value_matches_phi_at_argmax() {
        for &(a, d, v) in &[(2.0, 1.0, 1.5), (0.3, 0.7, 0.9), (5.0, 0.2, 1.3)] {
            let s = phi_sup_analytic(a, d, v).unwrap();
            assert!(close(s.sup, phi(s.x, s.y, a, v).unwrap(), 1e-13 * s.sup));
        }
    }

    #[test]
    fn phi_oracle_examples() {
        let g = PhiGrid {
            n_x: 400,
            n_y: 400,
            ..PhiGrid::default()
        };
        let o = phi_sup_oracle(0.0, 1.0, 0.5, g).unwrap();
        assert!(close(o.sup, 2.0 / 3.0, 1e-4));
        let o = phi_sup_oracle(1.0, 1.0, 0.5, g).unwrap();
        assert!(close(o.sup, 0.5, 1e-4));
    }

    #[test]
    fn printed_maximizer_grouping_is_not_stationary() {
        // With a ≠ 1 the grouping a·√(d(2a+d)(a²+v²)) in the denominator
        // gives a point strictly below the supremum.
        let (a, d, v) = (2.0_f64, 1.0_f64, 1.5_f64);
        let k = d * (2.0 * a + d) - v * v;
        let printed_y = a * k / (v * (a + d) + a * (d * (2.0 * a + d) * (a * a + v * v)).sqrt());
        let s = phi_sup_analytic(a, d, v).unwrap();
        let o = phi_sup_oracle(a, d, v, PhiGrid::default()).unwrap();
        assert!(phi(a + d, printed_y, a, v).unwrap() < s.sup - 1e-3);
        assert!(close(o.y, s.y, 1e-6));
    }

    #[test]
    fn kappa_max_examples() {
        assert!(close(kappa_max_over_d(1.0, 0.5).unwrap(), 4.0 / 3.0, 1e-15));
        assert_eq!(kappa_max_over_d(1.0, 0.0).unwrap(), 0.0);
        assert!(close(kappa_max_over_d(2.0, 1.0).unwrap(), 4.0 / 3.0, 1e-15));
        assert!(kappa_max_over_d(1.0, 1.0).is_err());
    }

    #[test]
    fn report_flags_and_ratios() {
        let rep = BoundReport::assess(SIN_PI_8, (-1.0, 1.0), 1.0, 0.5, &[0.5 * TAN_PI_8]).unwrap();
        assert!(rep.flags.regime12 && rep.flags.regime29 && rep.flags.regime31);
        assert_eq!(rep.enclosure_ok, Some(true));
        assert!(close(
            rep.ratio32.unwrap(),
            SIN_PI_8 / (0.5 / 1.25f64.sqrt()),
            1e-15
        ));
        assert!(rep.all_satisfied());

        let zero = BoundReport::assess(0.0, (-1.0, 1.0), 1.0, 0.0, &[0.0]).unwrap();
        assert_eq!(zero.ratio13, Some(0.0));
        assert_eq!(zero.ratio32, Some(0.0));

        let out = BoundReport::assess(0.3, (-1.0, 1.0), 1.0, 1.2, &[0.0]).unwrap();
        assert!(out.flags.regime12 && out.flags.regime29 && !out.flags.regime31);
        assert_eq!(out.bound32, None);
        assert_eq!(out.kappa, None);
    }
}
