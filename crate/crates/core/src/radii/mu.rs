//! Real structured singular value
//! `μ_{R,2}(M) = inf_{γ ∈ (0,1]} σ_2([Re M, -γ Im M; γ^{-1} Im M, Re M])`.

use nalgebra::DMatrix;
use serde::Serialize;

use super::sweep::golden_section;
use crate::error::{Error, Result};
use crate::numkit::ComplexMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MuConfig {
    pub gamma_min: f64,
    pub grid_points: usize,
    pub refine_iters: usize,
}

impl Default for MuConfig {
    fn default() -> Self {
        Self {
            gamma_min: 1e-8,
            grid_points: 200,
            refine_iters: 60,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MuEval {
    pub value: f64,
    pub gamma_star: f64,
    /// The infimum is approached as `γ → 0`; `value` is then the
    /// extrapolated limit and `gamma_star = gamma_min`.
    pub boundary_limit: bool,
}

/// Second largest singular value of the real `γ`-scaled block matrix.
pub fn gamma_sigma2(m: &ComplexMatrix, gamma: f64) -> f64 {
    let (q, r) = m.shape();
    let mut blk = DMatrix::<f64>::zeros(2 * q, 2 * r);
    for i in 0..q {
        for j in 0..r {
            let z = m[(i, j)];
            blk[(i, j)] = z.re;
            blk[(q + i, r + j)] = z.re;
            blk[(i, r + j)] = -gamma * z.im;
            blk[(q + i, j)] = z.im / gamma;
        }
    }
    crate::numkit::real_singular_values(&blk).map_or(f64::NAN, |s| s[1])
}

pub fn mu_real_2(m: &ComplexMatrix, cfg: &MuConfig) -> Result<MuEval> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(Error::Shape("mu_real_2 needs a nonempty matrix".into()));
    }
    crate::numkit::ensure_finite(m, "M")?;
    if !(cfg.gamma_min > 0.0 && cfg.gamma_min < 1.0) || cfg.grid_points < 3 {
        return Err(Error::Config(
            "gamma_min must lie in (0, 1) and the gamma grid needs 3 points".into(),
        ));
    }
    let lmin = cfg.gamma_min.ln();
    let n = cfg.grid_points;
    let log_gamma = |i: usize| lmin * (1.0 - i as f64 / (n - 1) as f64);
    let vals: Vec<f64> = (0..n).map(|i| gamma_sigma2(m, log_gamma(i).exp())).collect();

    // Last minimal index, so flat profiles report the interior point γ = 1.
    let mut best = 0;
    for (i, v) in vals.iter().enumerate() {
        if *v <= vals[best] {
            best = i;
        }
    }

    if best == 0 {
        let (g0, g1) = (vals[0], vals[1]);
        if g1 - g0 > 1e-12 * g0.abs().max(f64::MIN_POSITIVE) {
            let (x0, x1) = (cfg.gamma_min, log_gamma(1).exp());
            let limit = (g0 - x0 * (g1 - g0) / (x1 - x0)).clamp(0.0, g0);
            return Ok(MuEval {
                value: limit,
                gamma_star: cfg.gamma_min,
                boundary_limit: true,
            });
        }
    }

    let lo = log_gamma(best.saturating_sub(1));
    let hi = log_gamma((best + 1).min(n - 1));
    let mut out = (log_gamma(best), vals[best]);
    if let Some((l, v, _)) = golden_section(|l, _| gamma_sigma2(m, l.exp()), lo, hi, cfg.refine_iters) {
        if v < out.1 {
            out = (l, v);
        }
    }
    Ok(MuEval {
        value: out.1,
        gamma_star: out.0.exp().min(1.0),
        boundary_limit: false,
    })
}

/// Sandwich `(μ_{R,2}/√2, μ_{R,2})` for the Frobenius-norm real μ.
pub fn mu_real_f_bounds(m: &ComplexMatrix, cfg: &MuConfig) -> Result<(f64, f64)> {
    let mu = mu_real_2(m, cfg)?.value;
    Ok((mu * std::f64::consts::FRAC_1_SQRT_2, mu))
}
