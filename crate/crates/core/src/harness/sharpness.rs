//! Numerical probe of how tight the detailed bound is.
//!
//! The gap is `(−D/2, D/2)`. A search state holds the inner eigenvalues
//! as positions in `[γ_l + d, γ_r − d]` (the one nearest a gap end is
//! snapped onto it, so the distance stays exactly `d`), the extra outer
//! eigenvalues as signed offsets beyond the gap ends, and the direction of
//! `B`, which is rescaled to norm `v`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::trial_seed;
use crate::bounds::{self, BoundInputs};
use crate::disposition::{assemble_instance, InstanceJson};
use crate::error::{Error, Result};
use crate::hermitian::{op_norm, subspace_angle, CMatrix};
use crate::riccati::perturbed_split;
use num_complex::Complex64;

const STEP_START: f64 = 0.5;
const STEP_END: f64 = 1e-3;
/// Slack on `best_ratio ≤ 1`.
pub const TOL_SHARPNESS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SharpnessConfig {
    #[serde(rename = "D")]
    pub gap_len: f64,
    pub d: f64,
    pub v: f64,
    pub n0: usize,
    pub n1: usize,
    pub restarts: usize,
    pub iters: usize,
    pub seed: u64,
    /// Extra outer eigenvalues lie within this distance of the gap ends.
    pub outer_radius: f64,
}

impl SharpnessConfig {
    fn validate(&self) -> Result<BoundInputs> {
        let bad = |m: String| Err(Error::InfeasibleParams(m));
        if self.n0 < 1 || self.n1 < 2 {
            return bad("need n0 >= 1 and n1 >= 2".into());
        }
        if self.restarts < 1 {
            return bad("need at least one restart".into());
        }
        if !(self.outer_radius >= 0.0 && self.outer_radius.is_finite()) {
            return bad("outer_radius must be finite and nonnegative".into());
        }
        let inp = BoundInputs::new(self.gap_len, self.d, self.v)
            .map_err(|e| Error::InfeasibleParams(e.to_string()))?;
        if !inp.flags().regime31 {
            return bad(format!(
                "v = {} must be below sqrt(d(D-d)) = {}",
                self.v,
                inp.limit_31()
            ));
        }
        Ok(inp)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SharpnessReport {
    pub config: SharpnessConfig,
    pub kappa: f64,
    pub bound32: f64,
    /// Ratio at the canonical starting point of restart 0.
    pub initial_ratio: f64,
    pub best_ratio: f64,
    pub best_measured: f64,
    pub best_restart: usize,
    pub restart_ratios: Vec<f64>,
    pub evaluations: usize,
    /// `best_ratio ≤ 1 + 1e-9`.
    pub within_bound: bool,
    pub best_instance: InstanceJson,
}

#[derive(Debug, Clone)]
struct State {
    /// Inner positions in `[0, 1]`.
    t: Vec<f64>,
    /// Outer offsets in `[−1, 1]`: negative is left of the gap.
    u: Vec<f64>,
    /// Real and imaginary parts of `B`, row-major.
    b: Vec<f64>,
}

struct Problem {
    cfg: SharpnessConfig,
    gap: (f64, f64),
    bound32: f64,
}

impl Problem {
    fn materialize(&self, s: &State) -> (Vec<f64>, Vec<f64>, CMatrix) {
        let (gl, gr) = self.gap;
        let (lo, hi) = (gl + self.cfg.d, gr - self.cfg.d);
        let mut t: Vec<f64> = s.t.iter().map(|x| x.clamp(0.0, 1.0)).collect();
        let k = (0..t.len())
            .min_by(|&i, &j| {
                let ei = t[i].min(1.0 - t[i]);
                let ej = t[j].min(1.0 - t[j]);
                ei.total_cmp(&ej)
            })
            .expect("n0 >= 1");
        t[k] = if t[k] <= 1.0 - t[k] { 0.0 } else { 1.0 };
        let sigma0 = t
            .iter()
            .map(|&x| match x {
                0.0 => lo,
                1.0 => hi,
                _ => (lo + x * (hi - lo)).clamp(lo, hi),
            })
            .collect();
        let r = self.cfg.outer_radius;
        let mut sigma1 = vec![gl, gr];
        sigma1.extend(s.u.iter().map(|&x| {
            let x = x.clamp(-1.0, 1.0);
            if x < 0.0 {
                gl + x * r
            } else {
                gr + x * r
            }
        }));
        let (n0, n1) = (self.cfg.n0, self.cfg.n1);
        let raw = CMatrix::from_fn(n0, n1, |i, j| {
            let p = 2 * (i * n1 + j);
            Complex64::new(s.b[p], s.b[p + 1])
        });
        let norm = op_norm(&raw);
        let b = if norm > 0.0 {
            raw.map(|z| z * (self.cfg.v / norm))
        } else {
            let mut e = CMatrix::zeros(n0, n1);
            e[(0, 0)] = Complex64::new(self.cfg.v, 0.0);
            e
        };
        (sigma0, sigma1, b)
    }

    /// `(ratio, measured)` for a state.
    fn score(&self, s: &State) -> Result<(f64, f64)> {
        let (sigma0, sigma1, b) = self.materialize(s);
        let inst = assemble_instance(&sigma0, &sigma1, self.gap, &b)?;
        let ps = perturbed_split(&inst)?;
        let measured = subspace_angle(&inst.split.e0, &ps.el0)?.norm_diff;
        Ok((bounds::ratio(measured, self.bound32), measured))
    }

    fn instance_json(&self, s: &State) -> Result<InstanceJson> {
        let (sigma0, sigma1, b) = self.materialize(s);
        Ok(assemble_instance(&sigma0, &sigma1, self.gap, &b)?.to_json())
    }

    /// Inner eigenvalues at `γ_l + d`, extra outer ones halfway out on the
    /// left, and `B = v·e₁e₁ᵀ` coupling to `γ_l`.
    fn canonical(&self) -> State {
        let (n0, n1) = (self.cfg.n0, self.cfg.n1);
        let mut b = vec![0.0; 2 * n0 * n1];
        b[0] = 1.0;
        State {
            t: vec![0.0; n0],
            u: vec![-0.5; n1 - 2],
            b,
        }
    }

    fn random_state(&self, rng: &mut ChaCha8Rng) -> State {
        let (n0, n1) = (self.cfg.n0, self.cfg.n1);
        State {
            t: (0..n0).map(|_| rng.random::<f64>()).collect(),
            u: (0..n1 - 2).map(|_| rng.random_range(-1.0..=1.0)).collect(),
            b: (0..2 * n0 * n1)
                .map(|_| rng.sample(StandardNormal))
                .collect(),
        }
    }
}

fn perturb(s: &State, coord: usize, delta: f64) -> State {
    let mut out = s.clone();
    let (nt, nu) = (s.t.len(), s.u.len());
    if coord < nt {
        out.t[coord] = (out.t[coord] + delta).clamp(0.0, 1.0);
    } else if coord < nt + nu {
        let k = coord - nt;
        out.u[k] = (out.u[k] + delta).clamp(-1.0, 1.0);
    } else {
        let scale = (s.b.iter().map(|x| x * x).sum::<f64>() / s.b.len() as f64).sqrt();
        out.b[coord - nt - nu] += delta * scale.max(f64::MIN_POSITIVE);
    }
    out
}

/// Multi-start coordinate search maximizing `measured / bound32`.
///
/// Each restart draws its own stream from `(seed, restart)`; restart 0
/// starts at the canonical configuration. A move perturbs one random
/// coordinate by a Gaussian step whose scale decays geometrically from
/// `0.5` to `1e-3`, and is kept only if the ratio improves.
pub fn sharpness_search(cfg: &SharpnessConfig) -> Result<SharpnessReport> {
    let inp = cfg.validate()?;
    let kappa = bounds::kappa_unchecked(&inp).value;
    let bound32 = bounds::sin_half_arctan(kappa);
    let half = cfg.gap_len / 2.0;
    let problem = Problem {
        cfg: *cfg,
        gap: (-half, half),
        bound32,
    };

    let canonical = problem.canonical();
    let (initial_ratio, initial_measured) = problem.score(&canonical)?;
    let mut best = (initial_ratio, initial_measured, 0usize, canonical.clone());
    let mut restart_ratios = Vec::with_capacity(cfg.restarts);
    let mut evaluations = 1;

    for r in 0..cfg.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(cfg.seed, r as u64));
        let mut cur = if r == 0 {
            canonical.clone()
        } else {
            problem.random_state(&mut rng)
        };
        let (mut cur_ratio, mut cur_measured) = problem.score(&cur)?;
        evaluations += 1;
        let n_coords = cur.t.len() + cur.u.len() + cur.b.len();
        if cfg.v > 0.0 {
            for k in 0..cfg.iters {
                let frac = if cfg.iters > 1 {
                    k as f64 / (cfg.iters - 1) as f64
                } else {
                    0.0
                };
                let step = STEP_START * (STEP_END / STEP_START).powf(frac);
                let coord = rng.random_range(0..n_coords);
                let z: f64 = rng.sample(StandardNormal);
                let cand = perturb(&cur, coord, step * z);
                let (ratio, measured) = problem.score(&cand)?;
                evaluations += 1;
                if ratio > cur_ratio {
                    cur = cand;
                    cur_ratio = ratio;
                    cur_measured = measured;
                }
            }
        }
        restart_ratios.push(cur_ratio);
        if cur_ratio > best.0 {
            best = (cur_ratio, cur_measured, r, cur);
        }
    }

    let (best_ratio, best_measured, best_restart, best_state) = best;
    Ok(SharpnessReport {
        config: *cfg,
        kappa,
        bound32,
        initial_ratio,
        best_ratio,
        best_measured,
        best_restart,
        restart_ratios,
        evaluations,
        within_bound: best_ratio <= 1.0 + TOL_SHARPNESS,
        best_instance: problem.instance_json(&best_state)?,
    })
}
