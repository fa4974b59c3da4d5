use serde::{Deserialize, Serialize};

use super::{Histogram, HistogramError, PeakRange};

/// Five parameters demand at least six points.
pub const MIN_FIT_BINS: usize = 6;

const N: usize = 5;

/// `c1 + c2*x + c3*exp(-(x - c4)^2 / c5)` fitted over one peak range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianFit {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    pub rmse: f64,
    pub converged: bool,
    #[serde(skip)]
    pub iterations: usize,
}

impl GaussianFit {
    pub fn eval(&self, x: f64) -> f64 {
        tilted_gaussian(x, [self.c1, self.c2, self.c3, self.c4, self.c5])
    }

    /// Standard deviation of the Gaussian component, `sqrt(c5 / 2)`.
    pub fn sigma(&self) -> f64 {
        (self.c5 / 2.0).sqrt()
    }

    /// A usable fit: converged, positive bump, finite residual.
    pub fn is_well_formed(&self) -> bool {
        self.converged && self.c3 > 0.0 && self.c5 > 0.0 && self.rmse.is_finite()
    }
}

pub fn tilted_gaussian(x: f64, c: [f64; 5]) -> f64 {
    c[0] + c[1] * x + c[2] * (-(x - c[3]).powi(2) / c[4]).exp()
}

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Relative change in squared residual that counts as converged.
    pub tolerance: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iterations: 200,
            tolerance: 1e-8,
        }
    }
}

/// Fits the tilted Gaussian to the bins of `h` whose centres lie in `range`.
pub fn fit_tilted_gaussian(h: &Histogram, range: &PeakRange) -> Result<GaussianFit, HistogramError> {
    let bins = h.bins_between(range.lo, range.hi);
    if bins.len() < MIN_FIT_BINS {
        return Err(HistogramError::InsufficientData(format!(
            "range [{}, {}) spans {} bins, need {MIN_FIT_BINS}",
            range.lo,
            range.hi,
            bins.len()
        )));
    }
    let xs: Vec<f64> = bins.clone().map(|i| h.bin_center(i)).collect();
    let ys: Vec<f64> = h.counts[bins].to_vec();
    Ok(fit_points(&xs, &ys, &FitOptions::default()))
}

/// Levenberg-Marquardt on arbitrary `(x, y)` points (at least six, sorted
/// by `x`).
///
/// Work happens in a normalised coordinate `u = (x - mid) / half` so the
/// range maps onto `[-1, 1]`; the result is mapped back to cents. Starting
/// point: centre at the highest point, baseline through the two end points,
/// amplitude = highest point above that baseline, width term = (half the
/// range)^2. Steps are only accepted when they lower the squared residual.
pub fn fit_points(xs: &[f64], ys: &[f64], opts: &FitOptions) -> GaussianFit {
    assert!(xs.len() >= MIN_FIT_BINS && xs.len() == ys.len());
    let (x_first, x_last) = (xs[0], xs[xs.len() - 1]);
    let mid = 0.5 * (x_first + x_last);
    let half = (0.5 * (x_last - x_first)).max(f64::EPSILON);
    let us: Vec<f64> = xs.iter().map(|x| (x - mid) / half).collect();

    let apex = (0..ys.len()).max_by(|&a, &b| ys[a].total_cmp(&ys[b])).expect("non-empty");
    let n = us.len();
    let slope = (ys[n - 1] - ys[0]) / (us[n - 1] - us[0]);
    let intercept = ys[0] - slope * us[0];
    let amplitude = ys[apex] - (intercept + slope * us[apex]);
    let mut p = [
        intercept,
        slope,
        if amplitude > 0.0 { amplitude } else { ys[apex].abs().max(1e-9) },
        us[apex],
        1.0,
    ];

    let sse = |p: &[f64; N]| -> f64 {
        us.iter()
            .zip(ys)
            .map(|(&u, &y)| (y - tilted_gaussian(u, *p)).powi(2))
            .sum()
    };

    let mut s = sse(&p);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    let floor = 1e-26 * ys.iter().map(|y| y * y).sum::<f64>().max(1e-300);

    while iterations < opts.max_iterations {
        iterations += 1;
        if s <= floor {
            converged = true;
            break;
        }
        let (jtj, jtr) = normal_equations(&us, ys, &p);
        let mut a = jtj;
        for k in 0..N {
            a[k][k] += lambda * jtj[k][k].max(1e-12);
        }
        let step = cholesky_solve(a, jtr);
        let candidate = step.map(|d| {
            let mut q = p;
            for k in 0..N {
                q[k] += d[k];
            }
            q
        });
        match candidate {
            Some(q) if q[4] > 0.0 && q.iter().all(|v| v.is_finite()) => {
                let s_new = sse(&q);
                if s_new < s {
                    let rel = (s - s_new) / s;
                    p = q;
                    s = s_new;
                    let near_gauss_newton = lambda <= 1.0;
                    lambda = (lambda / 10.0).max(1e-12);
                    if rel < opts.tolerance && near_gauss_newton {
                        converged = true;
                        break;
                    }
                    continue;
                }
            }
            _ => {}
        }
        lambda *= 10.0;
        if lambda > 1e16 {
            // no direction lowers the residual: a stationary point
            converged = true;
            break;
        }
    }

    GaussianFit {
        c1: p[0] - p[1] * mid / half,
        c2: p[1] / half,
        c3: p[2],
        c4: mid + half * p[3],
        c5: p[4] * half * half,
        rmse: (s / n as f64).sqrt(),
        converged,
        iterations,
    }
}

#[allow(clippy::needless_range_loop)]
fn normal_equations(us: &[f64], ys: &[f64], p: &[f64; N]) -> ([[f64; N]; N], [f64; N]) {
    let mut jtj = [[0.0; N]; N];
    let mut jtr = [0.0; N];
    for (&u, &y) in us.iter().zip(ys) {
        let d = u - p[3];
        let e = (-d * d / p[4]).exp();
        let g = [1.0, u, e, p[2] * e * 2.0 * d / p[4], p[2] * e * d * d / (p[4] * p[4])];
        let r = y - tilted_gaussian(u, *p);
        for i in 0..N {
            jtr[i] += g[i] * r;
            for j in 0..=i {
                jtj[i][j] += g[i] * g[j];
            }
        }
    }
    for i in 0..N {
        for j in i + 1..N {
            jtj[i][j] = jtj[j][i];
        }
    }
    (jtj, jtr)
}

/// Solves `a x = b` for symmetric positive definite `a`.
fn cholesky_solve(a: [[f64; N]; N], b: [f64; N]) -> Option<[f64; N]> {
    let mut l = [[0.0; N]; N];
    for i in 0..N {
        for j in 0..=i {
            let sum: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - sum;
                if !(d > 0.0) {
                    return None;
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - sum) / l[j][j];
            }
        }
    }
    let mut y = [0.0; N];
    for i in 0..N {
        y[i] = (b[i] - (0..i).map(|k| l[i][k] * y[k]).sum::<f64>()) / l[i][i];
    }
    let mut x = [0.0; N];
    for i in (0..N).rev() {
        x[i] = (y[i] - (i + 1..N).map(|k| l[k][i] * x[k]).sum::<f64>()) / l[i][i];
    }
    Some(x)
}
