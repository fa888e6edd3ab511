//! Derivative-free Nelder-Mead simplex minimisation.

use rayon::prelude::*;

/// Stopping rules and initial simplex size.
#[derive(Debug, Clone, PartialEq)]
pub struct NelderMead {
    /// Per-coordinate offset of the initial vertices from the start point.
    pub steps: Vec<f64>,
    pub max_iter: usize,
    /// Converged once the spread of simplex values falls below this.
    pub f_tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub f_start: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

const ALPHA: f64 = 1.0;
const GAMMA: f64 = 2.0;
const RHO: f64 = 0.5;
const SIGMA: f64 = 0.5;

impl NelderMead {
    pub fn new(steps: Vec<f64>) -> Self {
        NelderMead {
            steps,
            max_iter: 500,
            f_tol: 1e-10,
        }
    }

    /// Minimises `f` from `x0`. Non-finite objective values count as +inf.
    /// The returned point is never worse than `x0`.
    pub fn minimize<F>(&self, f: F, x0: &[f64]) -> Minimum
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        assert_eq!(x0.len(), self.steps.len(), "one step per coordinate");
        let n = x0.len();
        let eval = |x: &[f64]| {
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };
        let mut simplex: Vec<Vec<f64>> = (0..=n)
            .map(|k| {
                let mut v = x0.to_vec();
                if k > 0 {
                    v[k - 1] += self.steps[k - 1];
                }
                v
            })
            .collect();
        let mut values: Vec<f64> = simplex.par_iter().map(|v| eval(v)).collect();
        let mut evaluations = n + 1;
        let f_start = values[0];
        let mut iterations = 0;
        let mut converged = false;

        while iterations < self.max_iter {
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
            simplex = order.iter().map(|&i| simplex[i].clone()).collect();
            values = order.iter().map(|&i| values[i]).collect();
            if values[n] - values[0] < self.f_tol {
                converged = true;
                break;
            }
            iterations += 1;

            let centroid: Vec<f64> = (0..n)
                .map(|d| simplex[..n].iter().map(|v| v[d]).sum::<f64>() / n as f64)
                .collect();
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&simplex[n])
                    .map(|(c, w)| c + t * (c - w))
                    .collect()
            };

            let xr = along(ALPHA);
            let fr = eval(&xr);
            evaluations += 1;
            if fr < values[0] {
                let xe = along(GAMMA);
                let fe = eval(&xe);
                evaluations += 1;
                if fe < fr {
                    simplex[n] = xe;
                    values[n] = fe;
                } else {
                    simplex[n] = xr;
                    values[n] = fr;
                }
                continue;
            }
            if fr < values[n - 1] {
                simplex[n] = xr;
                values[n] = fr;
                continue;
            }
            let (xc, fc) = if fr < values[n] {
                let xc = along(RHO);
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = along(-RHO);
                let fc = eval(&xc);
                (xc, fc)
            };
            evaluations += 1;
            if fc < values[n].min(fr) {
                simplex[n] = xc;
                values[n] = fc;
                continue;
            }
            let best = simplex[0].clone();
            let shrunk: Vec<Vec<f64>> = simplex[1..]
                .iter()
                .map(|v| best.iter().zip(v).map(|(b, x)| b + SIGMA * (x - b)).collect())
                .collect();
            let shrunk_values: Vec<f64> = shrunk.par_iter().map(|v| eval(v)).collect();
            evaluations += n;
            for (k, (v, fv)) in shrunk.into_iter().zip(shrunk_values).enumerate() {
                simplex[k + 1] = v;
                values[k + 1] = fv;
            }
        }

        let best = (0..=n)
            .min_by(|&a, &b| values[a].total_cmp(&values[b]))
            .expect("simplex is non-empty");
        let (x, f) = if values[best] <= f_start {
            (simplex[best].clone(), values[best])
        } else {
            (x0.to_vec(), f_start)
        };
        Minimum {
            x,
            f,
            f_start,
            iterations,
            evaluations,
            converged,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let nm = NelderMead {
            max_iter: 5000,
            f_tol: 1e-20,
            ..NelderMead::new(vec![0.5, 0.5])
        };
        let m = nm.minimize(f, &[-1.2, 1.0]);
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-4 && (m.x[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn quadratic_four_parameters() {
        let target = [0.3, -0.2, 0.1, -150.0];
        let scale = [1.0, 1.0, 1.0, 1e-3];
        let f = |x: &[f64]| {
            x.iter()
                .zip(&target)
                .zip(&scale)
                .map(|((a, b), s)| ((a - b) * s).powi(2))
                .sum::<f64>()
        };
        let m = NelderMead::new(vec![0.1, 0.1, 0.1, 100.0]).minimize(f, &[0.0; 4]);
        assert!(m.f < 1e-8, "{m:?}");
        assert!(m.f <= m.f_start);
    }

    #[test]
    fn incumbent_never_worse_than_start() {
        let f = |x: &[f64]| if x[0] == 0.0 { -1.0 } else { x[0].abs() };
        let m = NelderMead::new(vec![1.0]).minimize(f, &[0.0]);
        assert_eq!(m.f, -1.0);
        assert_eq!(m.x, vec![0.0]);
    }
}
