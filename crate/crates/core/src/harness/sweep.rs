//! Bound landscapes over `(D, d, v)` grids, written as CSV.
//!
//! Enclosure columns take the gap to be `(0, D)`.

use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bounds::{self, sin_arctan, sin_half_arctan, BoundInputs, Branch, RegimeFlags};
use crate::error::{Error, Result};
use crate::json::format_f64;

/// Evenly spaced points: `lo:hi:steps`, or a single value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl Grid {
    pub fn point(x: f64) -> Self {
        Self {
            lo: x,
            hi: x,
            steps: 1,
        }
    }

    pub fn points(&self) -> Vec<f64> {
        match self.steps {
            0 => Vec::new(),
            1 => vec![self.lo],
            n => (0..n)
                .map(|k| {
                    if k + 1 == n {
                        self.hi
                    } else {
                        self.lo + (self.hi - self.lo) * k as f64 / (n - 1) as f64
                    }
                })
                .collect(),
        }
    }
}

impl FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let num = |t: &str| {
            t.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::Parse(format!("bad number '{t}' in grid '{s}'")))
        };
        match parts.as_slice() {
            [x] => Ok(Grid::point(num(x)?)),
            [lo, hi, steps] => {
                let steps: usize = steps
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad step count in grid '{s}'")))?;
                let (lo, hi) = (num(lo)?, num(hi)?);
                if steps == 0 || lo > hi || (steps == 1 && lo != hi) {
                    return Err(Error::Parse(format!(
                        "grid '{s}' needs lo <= hi, steps >= 1, and lo == hi when steps == 1"
                    )));
                }
                Ok(Grid { lo, hi, steps })
            }
            _ => Err(Error::Parse(format!(
                "grid '{s}' is not 'x' or 'lo:hi:steps'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    #[serde(rename = "D")]
    pub gap_len: Grid,
    pub d: Grid,
    pub v: Grid,
    /// Evaluate formulas outside their hypotheses too (flags still tell).
    pub unchecked: bool,
}

/// One CSV row. `None` fields are written empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundRow {
    #[serde(rename = "D")]
    pub gap_len: f64,
    pub d: f64,
    pub v: f64,
    pub flags: RegimeFlags,
    pub kappa: Option<f64>,
    pub branch: Option<Branch>,
    pub bound13: Option<f64>,
    pub bound32: Option<f64>,
    #[serde(rename = "r_V")]
    pub r_v: Option<f64>,
    pub encl_lo: Option<f64>,
    pub encl_hi: Option<f64>,
}

pub const CSV_HEADER: [&str; 13] = [
    "D", "d", "v", "regime12", "regime29", "regime31", "kappa", "branch", "bound13", "bound32",
    "r_V", "encl_lo", "encl_hi",
];

/// All bound quantities at one point. Checked rows carry each value only
/// where its hypothesis holds; unchecked rows evaluate every formula that
/// is finite. Points outside `D > 0, 0 < d ≤ D/2, v ≥ 0` have all flags
/// false and every value empty.
pub fn bound_row(gap_len: f64, d: f64, v: f64, unchecked: bool) -> BoundRow {
    let empty = BoundRow {
        gap_len,
        d,
        v,
        flags: RegimeFlags {
            regime12: false,
            regime29: false,
            regime31: false,
        },
        kappa: None,
        branch: None,
        bound13: None,
        bound32: None,
        r_v: None,
        encl_lo: None,
        encl_hi: None,
    };
    let Ok(inp) = BoundInputs::new(gap_len, d, v) else {
        return empty;
    };
    let flags = inp.flags();
    let finite = |x: f64| Some(x).filter(|x| x.is_finite());
    let keep = |ok: bool, x: f64| if ok || unchecked { finite(x) } else { None };

    let k = bounds::kappa_unchecked(&inp);
    let kappa = keep(flags.regime31, k.value).filter(|x| *x >= 0.0);
    let r_v = keep(flags.regime29, bounds::r_v_unchecked(&inp));
    BoundRow {
        flags,
        kappa,
        branch: kappa.map(|_| k.branch),
        bound13: keep(flags.regime12, sin_arctan(inp.v / inp.d)),
        bound32: kappa.map(sin_half_arctan),
        r_v,
        encl_lo: r_v.map(|r| inp.d - r),
        encl_hi: r_v.map(|r| inp.gap_len - (inp.d - r)),
        ..empty
    }
}

/// Rows in lexicographic `(D, d, v)` order.
pub fn sweep(spec: &SweepSpec) -> Vec<BoundRow> {
    let ds = spec.d.points();
    let vs = spec.v.points();
    let mut rows = Vec::new();
    for big_d in spec.gap_len.points() {
        for &d in &ds {
            for &v in &vs {
                rows.push(bound_row(big_d, d, v, spec.unchecked));
            }
        }
    }
    rows
}

pub fn write_csv<W: Write>(rows: &[BoundRow], out: W) -> Result<()> {
    let io = |e: csv::Error| Error::Parse(format!("CSV output: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(io)?;
    let num = |x: Option<f64>| x.map(format_f64).unwrap_or_default();
    for r in rows {
        w.write_record([
            format_f64(r.gap_len),
            format_f64(r.d),
            format_f64(r.v),
            r.flags.regime12.to_string(),
            r.flags.regime29.to_string(),
            r.flags.regime31.to_string(),
            num(r.kappa),
            r.branch.map(|b| b.as_str().to_string()).unwrap_or_default(),
            num(r.bound13),
            num(r.bound32),
            num(r.r_v),
            num(r.encl_lo),
            num(r.encl_hi),
        ])
        .map_err(io)?;
    }
    w.flush()
        .map_err(|e| Error::Parse(format!("CSV output: {e}")))?;
    Ok(())
}
