//! Derivative-free minimization: Nelder–Mead with dimension-adaptive
//! coefficients and random restarts.

use crate::rng::Rng64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NelderMeadConfig {
    /// Objective evaluations allowed per restart.
    pub max_evals: usize,
    /// Edge length of the initial simplex.
    pub initial_step: f64,
    /// Stop when the spread of simplex values falls below this.
    pub f_tol: f64,
    /// ... and the simplex diameter below this.
    pub x_tol: f64,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        Self {
            max_evals: 2000,
            initial_step: 0.5,
            f_tol: 1e-12,
            x_tol: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
}

/// Counts evaluations and remembers the best point seen.
struct Budget<'a, F> {
    f: &'a mut F,
    evals: usize,
    max: usize,
    best: Option<(Vec<f64>, f64)>,
}

impl<F: FnMut(&[f64]) -> f64> Budget<'_, F> {
    fn exhausted(&self) -> bool {
        self.evals >= self.max
    }

    fn eval(&mut self, x: &[f64]) -> f64 {
        self.evals += 1;
        let mut v = (self.f)(x);
        if v.is_nan() {
            v = f64::INFINITY;
        }
        if self.best.as_ref().is_none_or(|(_, b)| v < *b) {
            self.best = Some((x.to_vec(), v));
        }
        v
    }
}

/// Minimizes `f` from `x0`. Uses the adaptive reflection/expansion/
/// contraction/shrink coefficients of Gao & Han, which behave better than
/// the classic (1, 2, ½, ½) in high dimension. Once the simplex collapses
/// before the budget is spent, the remaining evaluations go to Gaussian
/// perturbations of the incumbent.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    f: &mut F,
    x0: &[f64],
    cfg: &NelderMeadConfig,
    rng: &mut Rng64,
) -> Minimum {
    let n = x0.len();
    let nf = n as f64;
    let (alpha, gamma, rho, sigma) = if n >= 2 {
        (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf)
    } else {
        (1.0, 2.0, 0.5, 0.5)
    };
    let mut budget = Budget {
        f,
        evals: 0,
        max: cfg.max_evals.max(1),
        best: None,
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = budget.eval(x0);
    simplex.push((x0.to_vec(), v0));
    for i in 0..n {
        if budget.exhausted() {
            break;
        }
        let mut x = x0.to_vec();
        x[i] += cfg.initial_step;
        let v = budget.eval(&x);
        simplex.push((x, v));
    }

    let mut converged = false;
    if simplex.len() == n + 1 {
        while !budget.exhausted() {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let spread = simplex[n].1 - simplex[0].1;
            let diameter = simplex[1..]
                .iter()
                .map(|(x, _)| {
                    x.iter()
                        .zip(&simplex[0].0)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max)
                })
                .fold(0.0, f64::max);
            if spread.abs() <= cfg.f_tol && diameter <= cfg.x_tol {
                converged = true;
                break;
            }

            let mut centroid = vec![0.0; n];
            for (x, _) in &simplex[..n] {
                for (c, xi) in centroid.iter_mut().zip(x) {
                    *c += xi / nf;
                }
            }
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&simplex[n].0)
                    .map(|(c, w)| c + t * (c - w))
                    .collect()
            };

            let xr = along(alpha);
            let fr = budget.eval(&xr);
            if fr < simplex[0].1 {
                if budget.exhausted() {
                    simplex[n] = (xr, fr);
                    break;
                }
                let xe = along(alpha * gamma);
                let fe = budget.eval(&xe);
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
                continue;
            }
            if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
                continue;
            }
            if budget.exhausted() {
                break;
            }
            let (xc, fc) = if fr < simplex[n].1 {
                let xc = along(alpha * rho);
                let fc = budget.eval(&xc);
                (xc, fc)
            } else {
                let xc = along(-rho);
                let fc = budget.eval(&xc);
                (xc, fc)
            };
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
                continue;
            }
            let best = simplex[0].0.clone();
            for entry in simplex.iter_mut().skip(1) {
                if budget.exhausted() {
                    break;
                }
                let x: Vec<f64> = best
                    .iter()
                    .zip(&entry.0)
                    .map(|(b, xi)| b + sigma * (xi - b))
                    .collect();
                let v = budget.eval(&x);
                *entry = (x, v);
            }
        }
    }

    // leftover budget: local random search around the incumbent
    let mut scale = cfg.initial_step;
    while !budget.exhausted() {
        let (bx, _) = budget.best.clone().expect("at least one evaluation");
        let trial: Vec<f64> = bx.iter().map(|x| x + scale * rng.gaussian()).collect();
        let before = budget.best.as_ref().map(|b| b.1);
        budget.eval(&trial);
        if budget.best.as_ref().map(|b| b.1) == before {
            scale = (scale * 0.9).max(1e-6);
        }
    }

    let evals = budget.evals;
    let (x, value) = budget.best.expect("at least one evaluation");
    Minimum {
        x,
        value,
        evals,
        converged,
    }
}
