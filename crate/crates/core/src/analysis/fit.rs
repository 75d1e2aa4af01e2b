//! Least-squares fits of infidelity curves and power-law scaling.

use serde::{Deserialize, Serialize};

use super::AnalysisError;

/// Two-parameter fit: `params` are (p_L, t₀) for infidelity fits and
/// (a, b) for scaling fits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: [f64; 2],
    /// Sum of squared residuals (in log space for scaling fits).
    pub residual: f64,
    pub covariance: [[f64; 2]; 2],
}

impl FitResult {
    pub fn p_l(&self) -> f64 {
        self.params[0]
    }

    pub fn t0(&self) -> f64 {
        self.params[1]
    }

    pub fn a(&self) -> f64 {
        self.params[0]
    }

    pub fn b(&self) -> f64 {
        self.params[1]
    }

    pub fn std_err(&self, i: usize) -> f64 {
        self.covariance[i][i].max(0.0).sqrt()
    }
}

/// 𝓘(t) = ½ − ½(1 − 2p_L)^(t − t₀).
pub fn infidelity(t: f64, p_l: f64, t0: f64) -> f64 {
    0.5 - 0.5 * (1.0 - 2.0 * p_l).powf(t - t0)
}

fn line_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64, f64, [[f64; 2]; 2])> {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let s2 = if xs.len() > 2 { sse / (n - 2.0) } else { 0.0 };
    let var_slope = s2 / sxx;
    let var_icpt = s2 * (1.0 / n + mx * mx / sxx);
    let cov = -mx * s2 / sxx;
    Some((intercept, slope, sse, [[var_icpt, cov], [cov, var_slope]]))
}

fn solve2(a: [[f64; 2]; 2], b: [f64; 2]) -> Option<[f64; 2]> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det.abs() < 1e-300 || !det.is_finite() {
        return None;
    }
    Some([(b[0] * a[1][1] - b[1] * a[0][1]) / det, (a[0][0] * b[1] - a[1][0] * b[0]) / det])
}

fn inverse2(a: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det.abs() < 1e-300 {
        return [[f64::INFINITY, 0.0], [0.0, f64::INFINITY]];
    }
    [[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]]
}

const P_MAX: f64 = 0.5 - 1e-12;

/// Fits 𝓘(t) to `(t, 𝓘)` points with Levenberg–Marquardt, starting from the
/// log-linearized solution.
pub fn fit_infidelity(points: &[(f64, f64)]) -> Result<FitResult, AnalysisError> {
    if points.len() < 3 {
        return Err(AnalysisError::TooFewPoints { got: points.len(), need: 3 });
    }
    if points.iter().all(|&(_, i)| i == 0.0) {
        return Ok(FitResult { params: [0.0, 0.0], residual: 0.0, covariance: [[0.0; 2]; 2] });
    }
    let usable: Vec<(f64, f64)> = points.iter().filter(|&&(_, i)| i < 0.5).map(|&(t, i)| (t, (1.0 - 2.0 * i).ln())).collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = usable.into_iter().unzip();
    let (mut p, mut t0) = match line_fit(&xs, &ys) {
        Some((c, slope, ..)) if slope < 0.0 => {
            let p = (0.5 * (1.0 - slope.exp())).clamp(0.0, P_MAX);
            (p, -c / slope)
        }
        _ => (1e-3, 0.0),
    };

    let sse = |p: f64, t0: f64| points.iter().map(|&(t, i)| (i - infidelity(t, p, t0)).powi(2)).sum::<f64>();
    let jac = |p: f64, t0: f64| {
        let q = 1.0 - 2.0 * p;
        points
            .iter()
            .map(|&(t, i)| {
                let qt = q.powf(t - t0);
                let r = i - infidelity(t, p, t0);
                let d_p = (t - t0) * q.powf(t - t0 - 1.0);
                let d_t0 = 0.5 * qt * q.ln();
                (r, [d_p, d_t0])
            })
            .collect::<Vec<_>>()
    };
    let mut lambda = 1e-3;
    let mut current = sse(p, t0);
    let mut converged = false;
    for _ in 0..500 {
        let rows = jac(p, t0);
        let mut jtj = [[0.0; 2]; 2];
        let mut jtr = [0.0; 2];
        for (r, g) in &rows {
            for a in 0..2 {
                jtr[a] += g[a] * r;
                for b in 0..2 {
                    jtj[a][b] += g[a] * g[b];
                }
            }
        }
        let mut improved = false;
        while lambda < 1e12 {
            let damped = [[jtj[0][0] * (1.0 + lambda), jtj[0][1]], [jtj[1][0], jtj[1][1] * (1.0 + lambda)]];
            let Some(step) = solve2(damped, jtr) else { break };
            let np = (p + step[0]).clamp(0.0, P_MAX);
            let nt = t0 + step[1];
            let candidate = sse(np, nt);
            if candidate.is_finite() && candidate <= current {
                let gain = current - candidate;
                let moved = (np - p).abs() + (nt - t0).abs();
                p = np;
                t0 = nt;
                current = candidate;
                lambda = (lambda / 10.0).max(1e-12);
                improved = true;
                if gain <= 1e-30 + 1e-15 * current || moved < 1e-15 {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if converged || !improved {
            converged = true;
            break;
        }
    }
    if !converged || !p.is_finite() || !t0.is_finite() {
        return Err(AnalysisError::NoConvergence);
    }
    let rows = jac(p, t0);
    let mut jtj = [[0.0; 2]; 2];
    for (_, g) in &rows {
        for a in 0..2 {
            for b in 0..2 {
                jtj[a][b] += g[a] * g[b];
            }
        }
    }
    let s2 = if points.len() > 2 { current / (points.len() - 2) as f64 } else { 0.0 };
    let inv = inverse2(jtj);
    let covariance = [[inv[0][0] * s2, inv[0][1] * s2], [inv[1][0] * s2, inv[1][1] * s2]];
    Ok(FitResult { params: [p, t0], residual: current, covariance })
}

/// Fits p_L = a·p_ph^b by least squares in log-log space.
pub fn fit_scaling(points: &[(f64, f64)]) -> Result<FitResult, AnalysisError> {
    if points.len() < 2 {
        return Err(AnalysisError::TooFewPoints { got: points.len(), need: 2 });
    }
    if let Some(&(x, y)) = points.iter().find(|&&(x, y)| !(x > 0.0 && y > 0.0)) {
        return Err(AnalysisError::NonPositive(x.min(y)));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let (c, b, sse, cov) = line_fit(&xs, &ys).ok_or(AnalysisError::Degenerate)?;
    let a = c.exp();
    // Propagate the intercept variance to a = e^c.
    let covariance = [[a * a * cov[0][0], a * cov[0][1]], [a * cov[1][0], cov[1][1]]];
    Ok(FitResult { params: [a, b], residual: sse, covariance })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_infidelity_is_recovered() {
        for &(p, t0) in &[(0.01, 0.5), (0.002, -0.3), (0.08, 1.2)] {
            let pts: Vec<(f64, f64)> = (1..=10).map(|t| (t as f64, infidelity(t as f64, p, t0))).collect();
            let f = fit_infidelity(&pts).unwrap();
            assert!((f.p_l() - p).abs() < 1e-9, "{f:?}");
            assert!((f.t0() - t0).abs() < 1e-6, "{f:?}");
        }
        let zero: Vec<(f64, f64)> = (1..=5).map(|t| (t as f64, 0.0)).collect();
        assert_eq!(fit_infidelity(&zero).unwrap().p_l(), 0.0);
        assert!(fit_infidelity(&zero[..2]).is_err());
    }

    #[test]
    fn power_laws() {
        let quad: Vec<(f64, f64)> = [1e-3, 2e-3, 5e-3].iter().map(|&p| (p, 40.0 * p * p)).collect();
        let f = fit_scaling(&quad).unwrap();
        assert!((f.b() - 2.0).abs() < 1e-9 && (f.a() - 40.0).abs() < 1e-6);
        let lin: Vec<(f64, f64)> = [1e-3, 2e-3, 5e-3].iter().map(|&p| (p, 3.0 * p)).collect();
        assert!((fit_scaling(&lin).unwrap().b() - 1.0).abs() < 1e-9);
        assert!(fit_scaling(&[(1e-3, 0.0), (2e-3, 1e-4)]).is_err());
    }
}
