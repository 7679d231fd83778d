//! BFGS with a strong-Wolfe line search.

use std::time::Instant;

use super::{dot, inf_norm, OptimizeResult, OptimizerConfig, Termination, TracePoint};

const C1: f64 = 1e-4;
const C2: f64 = 0.9;
const MAX_LINE_SEARCH_TRIALS: usize = 20;
/// Curvature updates with `yᵀs` at or below this are skipped.
const CURVATURE_EPS: f64 = 1e-10;

/// A point visited by the line search.
#[derive(Clone)]
struct Probe {
    alpha: f64,
    x: Vec<f64>,
    value: f64,
    grad: Option<Vec<f64>>,
}

struct LineSearch<'a, F, G> {
    f: &'a mut F,
    grad: &'a mut G,
    x: &'a [f64],
    dir: &'a [f64],
    value0: f64,
    slope0: f64,
    trials: usize,
    n_evals: usize,
    n_grad_evals: usize,
    best: Option<Probe>,
}

impl<F, G> LineSearch<'_, F, G>
where
    F: FnMut(&[f64]) -> f64,
    G: FnMut(&[f64]) -> Vec<f64>,
{
    fn probe(&mut self, alpha: f64) -> Probe {
        self.trials += 1;
        self.n_evals += 1;
        let x: Vec<f64> = self.x.iter().zip(self.dir).map(|(xi, di)| xi + alpha * di).collect();
        let value = (self.f)(&x);
        let probe = Probe {
            alpha,
            x,
            value,
            grad: None,
        };
        if value < self.best.as_ref().map_or(self.value0, |b| b.value) {
            self.best = Some(probe.clone());
        }
        probe
    }

    fn slope(&mut self, probe: &mut Probe) -> f64 {
        self.n_grad_evals += 1;
        let g = (self.grad)(&probe.x);
        let slope = dot(&g, self.dir);
        if let Some(best) = self.best.as_mut().filter(|b| b.alpha == probe.alpha) {
            best.grad = Some(g.clone());
        }
        probe.grad = Some(g);
        slope
    }

    fn armijo_fails(&self, p: &Probe) -> bool {
        !(p.value <= self.value0 + C1 * p.alpha * self.slope0)
    }

    fn curvature_holds(&self, slope: f64) -> bool {
        slope.abs() <= -C2 * self.slope0
    }

    /// Bracketing phase; returns a point satisfying both strong-Wolfe
    /// conditions or `None` when the trial budget runs out.
    fn search(&mut self, alpha1: f64) -> Option<Probe> {
        let mut prev = Probe {
            alpha: 0.0,
            x: self.x.to_vec(),
            value: self.value0,
            grad: None,
        };
        let mut prev_slope = self.slope0;
        let mut alpha = alpha1;
        let mut first = true;
        while self.trials < MAX_LINE_SEARCH_TRIALS {
            let mut cur = self.probe(alpha);
            if !cur.value.is_finite() {
                return None;
            }
            if self.armijo_fails(&cur) || (!first && cur.value >= prev.value) {
                return self.zoom(prev, prev_slope, cur);
            }
            let slope = self.slope(&mut cur);
            if self.curvature_holds(slope) {
                return Some(cur);
            }
            if slope >= 0.0 {
                return self.zoom(cur, slope, prev);
            }
            prev = cur;
            prev_slope = slope;
            alpha *= 2.0;
            first = false;
        }
        None
    }

    /// Narrows `[lo, hi]`, where `lo` satisfies sufficient decrease and has
    /// the lowest value seen so far.
    fn zoom(&mut self, mut lo: Probe, mut lo_slope: f64, mut hi: Probe) -> Option<Probe> {
        while self.trials < MAX_LINE_SEARCH_TRIALS {
            let alpha = interpolate(&lo, lo_slope, &hi);
            let mut cur = self.probe(alpha);
            if self.armijo_fails(&cur) || cur.value >= lo.value {
                hi = cur;
                continue;
            }
            let slope = self.slope(&mut cur);
            if self.curvature_holds(slope) {
                return Some(cur);
            }
            if slope * (hi.alpha - lo.alpha) >= 0.0 {
                hi = lo;
            }
            lo = cur;
            lo_slope = slope;
        }
        None
    }
}

/// Minimizer of the quadratic through `(lo, φ_lo, φ'_lo)` and `(hi, φ_hi)`,
/// clamped to the inner 80% of the interval; bisection when degenerate.
fn interpolate(lo: &Probe, lo_slope: f64, hi: &Probe) -> f64 {
    let width = hi.alpha - lo.alpha;
    let (a, b) = (lo.alpha.min(hi.alpha), lo.alpha.max(hi.alpha));
    let margin = 0.1 * (b - a);
    let denom = 2.0 * (hi.value - lo.value - lo_slope * width);
    let candidate = lo.alpha - lo_slope * width * width / denom;
    if candidate.is_finite() && candidate >= a + margin && candidate <= b - margin {
        candidate
    } else {
        0.5 * (a + b)
    }
}

/// Quasi-Newton minimization with the inverse-Hessian BFGS update, starting
/// from the identity.
///
/// Stops when `‖∇f‖∞ < grad_tol` or after `max_iters` iterations. If the line
/// search cannot find a strong-Wolfe step within 20 trials, the best point
/// seen is returned with [`Termination::LineSearchFailure`].
pub fn bfgs_minimize<F, G>(mut f: F, mut grad: G, x0: &[f64], config: &OptimizerConfig) -> OptimizeResult
where
    F: FnMut(&[f64]) -> f64,
    G: FnMut(&[f64]) -> Vec<f64>,
{
    let started = Instant::now();
    let dim = x0.len();
    let max_iters = config.max_iters_for(dim);

    let mut x = x0.to_vec();
    let mut value = f(&x);
    let mut g = grad(&x);
    let (mut n_evals, mut n_grad_evals) = (1, 1);
    let mut inv_hessian = identity(dim);
    let mut trace = vec![TracePoint { iteration: 0, value }];
    // Seeds the initial step length so the first step has unit length.
    let mut previous_value = value + g.iter().map(|v| v * v).sum::<f64>().sqrt() / 2.0;
    let mut termination = Termination::MaxIters;

    for iteration in 1..=max_iters {
        if inf_norm(&g) < config.grad_tol {
            termination = Termination::Converged;
            break;
        }
        let mut dir = mat_vec(&inv_hessian, &g);
        dir.iter_mut().for_each(|d| *d = -*d);
        let mut slope = dot(&g, &dir);
        if !(slope < 0.0) {
            inv_hessian = identity(dim);
            dir = g.iter().map(|v| -v).collect();
            slope = dot(&g, &dir);
        }
        let alpha1 = match 1.01 * 2.0 * (value - previous_value) / slope {
            a if a.is_finite() && a > 0.0 => a.min(1.0),
            _ => 1.0,
        };

        let mut search = LineSearch {
            f: &mut f,
            grad: &mut grad,
            x: &x,
            dir: &dir,
            value0: value,
            slope0: slope,
            trials: 0,
            n_evals: 0,
            n_grad_evals: 0,
            best: None,
        };
        let accepted = search.search(alpha1);
        n_evals += search.n_evals;
        n_grad_evals += search.n_grad_evals;

        let Some(step) = accepted else {
            if let Some(best) = search.best {
                x = best.x;
                value = best.value;
                trace.push(TracePoint { iteration, value });
            }
            termination = Termination::LineSearchFailure;
            break;
        };

        let new_grad = step.grad.expect("accepted step has a gradient");
        let s: Vec<f64> = step.x.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = new_grad.iter().zip(&g).map(|(a, b)| a - b).collect();
        let ys = dot(&y, &s);
        if ys > CURVATURE_EPS {
            update_inverse_hessian(&mut inv_hessian, &s, &y, ys);
        }
        previous_value = value;
        x = step.x;
        value = step.value;
        g = new_grad;
        trace.push(TracePoint { iteration, value });
    }
    if termination == Termination::MaxIters && inf_norm(&g) < config.grad_tol {
        termination = Termination::Converged;
    }

    OptimizeResult {
        best_params: x,
        best_value: value,
        trace,
        n_evals,
        n_grad_evals,
        wall_time_seconds: started.elapsed().as_secs_f64(),
        termination,
    }
}

fn identity(dim: usize) -> Vec<Vec<f64>> {
    (0..dim)
        .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| dot(row, v)).collect()
}

/// `H ← (I - ρ s yᵀ) H (I - ρ y sᵀ) + ρ s sᵀ` with `ρ = 1 / yᵀs`, expanded
/// as `H - ρ(s (Hy)ᵀ + (Hy) sᵀ) + (ρ² yᵀHy + ρ) s sᵀ`.
fn update_inverse_hessian(h: &mut [Vec<f64>], s: &[f64], y: &[f64], ys: f64) {
    let rho = 1.0 / ys;
    let hy = mat_vec(h, y);
    let yhy = dot(y, &hy);
    let coeff = rho * rho * yhy + rho;
    for (i, row) in h.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            *entry += coeff * s[i] * s[j] - rho * (s[i] * hy[j] + hy[i] * s[j]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::Cell;

    fn rosenbrock(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    fn rosenbrock_grad(x: &[f64]) -> Vec<f64> {
        vec![
            -2.0 * (1.0 - x[0]) - 400.0 * x[0] * (x[1] - x[0] * x[0]),
            200.0 * (x[1] - x[0] * x[0]),
        ]
    }

    #[test]
    fn rosenbrock_from_classic_start() {
        let config = OptimizerConfig::default();
        let result = bfgs_minimize(rosenbrock, rosenbrock_grad, &[-1.2, 1.0], &config);
        assert!((result.best_params[0] - 1.0).abs() < 1e-5, "{:?}", result.best_params);
        assert!((result.best_params[1] - 1.0).abs() < 1e-5, "{:?}", result.best_params);
        assert!(result.trace.len() - 1 <= 200);
        assert_eq!(result.termination, Termination::Converged);
    }

    #[test]
    fn quadratic() {
        let result = bfgs_minimize(
            |x: &[f64]| dot(x, x),
            |x: &[f64]| x.iter().map(|v| 2.0 * v).collect(),
            &[3.0, 4.0],
            &OptimizerConfig::default(),
        );
        assert!(result.best_value < 1e-8);
    }

    #[test]
    fn accepted_iterates_never_increase() {
        let result = bfgs_minimize(rosenbrock, rosenbrock_grad, &[-1.5, 2.0], &OptimizerConfig::default());
        assert!(result.trace.windows(2).all(|w| w[1].value <= w[0].value));
        let min = result.trace.iter().map(|t| t.value).fold(f64::INFINITY, f64::min);
        assert_eq!(min, result.best_value);
    }

    #[test]
    fn counts_match_callbacks() {
        let (fc, gc) = (Cell::new(0), Cell::new(0));
        let result = bfgs_minimize(
            |x: &[f64]| {
                fc.set(fc.get() + 1);
                rosenbrock(x)
            },
            |x: &[f64]| {
                gc.set(gc.get() + 1);
                rosenbrock_grad(x)
            },
            &[-1.2, 1.0],
            &OptimizerConfig::default(),
        );
        assert_eq!(result.n_evals, fc.get());
        assert_eq!(result.n_grad_evals, gc.get());
    }

    #[test]
    fn max_iters_respected() {
        let config = OptimizerConfig {
            max_iters: Some(3),
            ..Default::default()
        };
        let result = bfgs_minimize(rosenbrock, rosenbrock_grad, &[-1.2, 1.0], &config);
        assert_eq!(result.termination, Termination::MaxIters);
        assert_eq!(result.trace.len(), 4);
    }

    #[test]
    fn line_search_failure_is_flagged() {
        // A gradient that always points uphill makes every Wolfe test fail.
        let result = bfgs_minimize(
            |x: &[f64]| dot(x, x),
            |x: &[f64]| x.iter().map(|v| -2.0 * v).collect(),
            &[1.0, 1.0],
            &OptimizerConfig::default(),
        );
        assert_eq!(result.termination, Termination::LineSearchFailure);
        assert!(result.best_value <= 2.0);
    }
}
