//! Derivative-free simplex minimization with dimension-adaptive
//! coefficients.

pub struct NmOptions {
    pub step: f64,
    pub max_evals: usize,
    /// Stop when the spread of simplex values is below
    /// `ftol * (|f_best| + ftol)`.
    pub ftol: f64,
}

pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    opts: &NmOptions,
) -> (Vec<f64>, f64) {
    let d = x0.len();
    let fx0 = f(x0);
    if d == 0 {
        return (Vec::new(), fx0);
    }
    let df = d as f64;
    let (alpha, beta, gamma, delta) = if d > 1 {
        (1.0, 1.0 + 2.0 / df, 0.75 - 0.5 / df, 1.0 - 1.0 / df)
    } else {
        (1.0, 2.0, 0.5, 0.5)
    };

    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(d + 1);
    let mut vals: Vec<f64> = Vec::with_capacity(d + 1);
    pts.push(x0.to_vec());
    vals.push(fx0);
    for i in 0..d {
        let mut p = x0.to_vec();
        p[i] += if p[i] != 0.0 { opts.step * p[i].abs().max(1.0) } else { opts.step };
        vals.push(f(&p));
        pts.push(p);
    }
    let mut evals = d + 1;
    let mut order: Vec<usize> = (0..=d).collect();
    let mut centroid = vec![0.0; d];
    let mut trial = vec![0.0; d];
    let mut trial2 = vec![0.0; d];

    loop {
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        let best = order[0];
        let worst = order[d];
        let second_worst = order[d - 1];
        let spread = vals[worst] - vals[best];
        if evals >= opts.max_evals
            || !vals[best].is_finite() && !vals[worst].is_finite()
            || spread.abs() <= opts.ftol * (vals[best].abs() + opts.ftol)
        {
            break;
        }

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for &i in &order[..d] {
            for (c, p) in centroid.iter_mut().zip(&pts[i]) {
                *c += p / df;
            }
        }
        let along = |t: f64, out: &mut Vec<f64>, w: &[f64], c: &[f64]| {
            for k in 0..d {
                out[k] = c[k] + t * (c[k] - w[k]);
            }
        };

        along(alpha, &mut trial, &pts[worst], &centroid);
        let fr = f(&trial);
        evals += 1;
        if fr < vals[best] {
            along(alpha * beta, &mut trial2, &pts[worst], &centroid);
            let fe = f(&trial2);
            evals += 1;
            if fe < fr {
                pts[worst].copy_from_slice(&trial2);
                vals[worst] = fe;
            } else {
                pts[worst].copy_from_slice(&trial);
                vals[worst] = fr;
            }
            continue;
        }
        if fr < vals[second_worst] {
            pts[worst].copy_from_slice(&trial);
            vals[worst] = fr;
            continue;
        }
        // Contraction, outside or inside.
        let (t, reference) = if fr < vals[worst] {
            (alpha * gamma, fr)
        } else {
            (-gamma, vals[worst])
        };
        along(t, &mut trial2, &pts[worst], &centroid);
        let fc = f(&trial2);
        evals += 1;
        if fc < reference {
            pts[worst].copy_from_slice(&trial2);
            vals[worst] = fc;
            continue;
        }
        // Shrink towards the best vertex.
        let xb = pts[best].clone();
        for &i in &order[1..] {
            for k in 0..d {
                pts[i][k] = xb[k] + delta * (pts[i][k] - xb[k]);
            }
            vals[i] = f(&pts[i]);
            evals += 1;
        }
    }
    let best = (0..=d)
        .min_by(|&a, &b| vals[a].total_cmp(&vals[b]))
        .unwrap_or(0);
    (pts[best].clone(), vals[best])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_rosenbrock() {
        let opts = NmOptions {
            step: 0.5,
            max_evals: 20_000,
            ftol: 1e-15,
        };
        let (x, fx) = nelder_mead(
            |v| (1.0 - v[0]).powi(2) + 100.0 * (v[1] - v[0] * v[0]).powi(2),
            &[-1.2, 1.0],
            &opts,
        );
        assert!(fx < 1e-10, "{fx}");
        assert!((x[0] - 1.0).abs() < 1e-4 && (x[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn minimizes_quadratic_in_six_dims() {
        let opts = NmOptions {
            step: 0.3,
            max_evals: 20_000,
            ftol: 1e-16,
        };
        let (x, _) = nelder_mead(
            |v| v.iter().enumerate().map(|(i, t)| (i as f64 + 1.0) * (t - 0.5).powi(2)).sum(),
            &[0.0; 6],
            &opts,
        );
        assert!(x.iter().all(|t| (t - 0.5).abs() < 1e-5), "{x:?}");
    }
}
