//! Frequency sweep: symmetric grid scan followed by golden-section
//! refinement of the best grid cell.

use std::cmp::Ordering;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepConfig {
    /// Half-width of the frequency interval; resolved per system when `None`.
    pub w_max: Option<f64>,
    pub grid_points: usize,
    pub refine_iters: usize,
    pub multistarts: usize,
    pub rng_seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            w_max: None,
            grid_points: 2001,
            refine_iters: 60,
            multistarts: 20,
            rng_seed: 0,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 3 {
            return Err(Error::Config("grid_points must be at least 3".into()));
        }
        if self.multistarts == 0 {
            return Err(Error::Config("multistarts must be at least 1".into()));
        }
        if let Some(w) = self.w_max {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::Config("w_max must be positive and finite".into()));
            }
        }
        Ok(())
    }

    /// The `j`-th grid frequency `w_max (2j - (N-1)) / (N-1)`; the grid is
    /// symmetric and contains 0 exactly when `N` is odd.
    pub fn grid_point(&self, w_max: f64, j: usize) -> f64 {
        let n1 = (self.grid_points - 1) as f64;
        w_max * ((2 * j) as f64 - n1) / n1
    }
}

/// Result of a frequency minimization. `eval_index` identifies the
/// evaluation that produced the minimum so that it can be replayed with the
/// same random streams.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub w_star: f64,
    pub value: f64,
    pub eval_index: usize,
    /// Grid frequencies where the objective could not be evaluated.
    pub skipped: Vec<f64>,
}

/// Per-evaluation random stream derived from `(seed, eval index, start)`.
pub fn rng_for(seed: u64, index: usize, start: usize) -> ChaCha8Rng {
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    bytes[8..16].copy_from_slice(&(index as u64).to_le_bytes());
    bytes[16..24].copy_from_slice(&(start as u64).to_le_bytes());
    ChaCha8Rng::from_seed(bytes)
}

/// Orders candidates by value, then smaller `|w|`, then negative `w`.
fn compare(a: (f64, f64), b: (f64, f64)) -> Ordering {
    a.1.total_cmp(&b.1)
        .then(a.0.abs().total_cmp(&b.0.abs()))
        .then(a.0.total_cmp(&b.0))
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search on `[lo, hi]` for the smallest value of `f`
/// seen; `f` receives the running evaluation count.
pub(crate) fn golden_section<F: FnMut(f64, usize) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    iters: usize,
) -> Option<(f64, f64, usize)> {
    if iters == 0 || !(hi > lo) {
        return None;
    }
    let mut count = 0usize;
    let mut best: Option<(f64, f64, usize)> = None;
    let mut eval = |x: f64, count: &mut usize, best: &mut Option<(f64, f64, usize)>| {
        let v = f(x, *count);
        let v = if v.is_nan() { f64::INFINITY } else { v };
        let cand = (x, v, *count);
        *count += 1;
        if best.map_or(true, |b| compare((x, v), (b.0, b.1)) == Ordering::Less) {
            *best = Some(cand);
        }
        v
    };
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let mut fc = eval(c, &mut count, &mut best);
    let mut fd = if count < iters {
        eval(d, &mut count, &mut best)
    } else {
        f64::INFINITY
    };
    while count < iters {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = eval(c, &mut count, &mut best);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = eval(d, &mut count, &mut best);
        }
    }
    best
}

/// Minimizes `f` over `[-w_max, w_max]`. `f(w, index)` returns `None` when
/// `w` cannot be evaluated (for example on the spectrum); such grid points
/// are recorded as skipped. Grid points use indices `0..N`, refinement
/// points `N..`.
pub fn frequency_minimize<F>(f: F, cfg: &SweepConfig) -> Result<SweepOutcome>
where
    F: Fn(f64, usize) -> Option<f64> + Sync,
{
    cfg.validate()?;
    let w_max = cfg
        .w_max
        .ok_or_else(|| Error::Config("w_max must be resolved before sweeping".into()))?;
    let n = cfg.grid_points;
    let values: Vec<Option<f64>> = (0..n)
        .into_par_iter()
        .map(|j| f(cfg.grid_point(w_max, j), j).filter(|v| !v.is_nan()))
        .collect();

    let mut skipped = Vec::new();
    let mut best: Option<(f64, f64, usize)> = None;
    for (j, v) in values.iter().enumerate() {
        let w = cfg.grid_point(w_max, j);
        match v {
            None => skipped.push(w),
            Some(v) => {
                if best.map_or(true, |b| compare((w, *v), (b.0, b.1)) == Ordering::Less) {
                    best = Some((w, *v, j));
                }
            }
        }
    }
    let Some(mut best) = best.filter(|b| b.1.is_finite()) else {
        return Err(Error::NoMinimum);
    };

    let j = best.2;
    let lo = cfg.grid_point(w_max, j.saturating_sub(1));
    let hi = cfg.grid_point(w_max, (j + 1).min(n - 1));
    let refined = golden_section(
        |w, k| f(w, n + k).unwrap_or(f64::INFINITY),
        lo,
        hi,
        cfg.refine_iters,
    );
    if let Some((w, v, k)) = refined {
        if compare((w, v), (best.0, best.1)) == Ordering::Less {
            best = (w, v, n + k);
        }
    }
    Ok(SweepOutcome {
        w_star: best.0,
        value: best.1,
        eval_index: best.2,
        skipped,
    })
}
