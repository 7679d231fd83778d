//! Nelder-Mead downhill simplex.

use std::time::Instant;

use super::{OptimizeResult, OptimizerConfig, Termination, TracePoint};

const REFLECTION: f64 = 1.0;
const EXPANSION: f64 = 2.0;
const CONTRACTION: f64 = 0.5;
const SHRINK: f64 = 0.5;
const INITIAL_STEP: f64 = 0.05;

struct Simplex {
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
}

impl Simplex {
    /// Stable sort by value so the best vertex is first.
    fn sort(&mut self) {
        let mut order: Vec<usize> = (0..self.values.len()).collect();
        order.sort_by(|&a, &b| self.values[a].total_cmp(&self.values[b]));
        self.points = order.iter().map(|&i| self.points[i].clone()).collect();
        self.values = order.iter().map(|&i| self.values[i]).collect();
    }

    fn value_spread(&self) -> f64 {
        self.values[1..]
            .iter()
            .map(|v| (v - self.values[0]).abs())
            .fold(0.0, f64::max)
    }

    fn coordinate_spread(&self) -> f64 {
        let best = &self.points[0];
        self.points[1..]
            .iter()
            .flat_map(|p| p.iter().zip(best).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max)
    }

    fn centroid_without_worst(&self) -> Vec<f64> {
        let n = self.points.len() - 1;
        let mut c = vec![0.0; self.points[0].len()];
        for p in &self.points[..n] {
            c.iter_mut().zip(p).for_each(|(ci, pi)| *ci += pi);
        }
        c.iter_mut().for_each(|ci| *ci /= n as f64);
        c
    }
}

/// `centroid + t (centroid - worst)`.
fn along(centroid: &[f64], worst: &[f64], t: f64) -> Vec<f64> {
    centroid.iter().zip(worst).map(|(c, w)| c + t * (c - w)).collect()
}

/// Derivative-free simplex search with reflection 1, expansion 2,
/// contraction 0.5 and shrink 0.5.
///
/// The initial simplex is `x0` plus `x0 + 0.05·max(|x0_i|, 1)·e_i` per
/// dimension. Stops once both the value spread and the coordinate spread
/// relative to the best vertex drop below `f_tol` and `x_tol`, or after
/// `max_iters` iterations. Always returns the best vertex.
pub fn nelder_mead_minimize<F>(mut f: F, x0: &[f64], config: &OptimizerConfig) -> OptimizeResult
where
    F: FnMut(&[f64]) -> f64,
{
    let started = Instant::now();
    let dim = x0.len();
    let max_iters = config.max_iters_for(dim);
    let mut n_evals = 0;
    let mut eval = |x: &[f64]| {
        n_evals += 1;
        f(x)
    };

    let mut points = vec![x0.to_vec()];
    for i in 0..dim {
        let mut p = x0.to_vec();
        p[i] += INITIAL_STEP * x0[i].abs().max(1.0);
        points.push(p);
    }
    let values = points.iter().map(|p| eval(p)).collect();
    let mut simplex = Simplex { points, values };
    simplex.sort();

    let mut trace = vec![TracePoint {
        iteration: 0,
        value: simplex.values[0],
    }];
    let mut termination = Termination::MaxIters;

    for iteration in 1..=max_iters {
        if dim == 0 || (simplex.value_spread() < config.f_tol && simplex.coordinate_spread() < config.x_tol) {
            termination = Termination::Converged;
            break;
        }
        let worst = dim;
        let centroid = simplex.centroid_without_worst();
        let reflected = along(&centroid, &simplex.points[worst], REFLECTION);
        let f_reflected = eval(&reflected);

        let mut shrink = false;
        if f_reflected < simplex.values[0] {
            let expanded = along(&centroid, &simplex.points[worst], REFLECTION * EXPANSION);
            let f_expanded = eval(&expanded);
            if f_expanded < f_reflected {
                simplex.points[worst] = expanded;
                simplex.values[worst] = f_expanded;
            } else {
                simplex.points[worst] = reflected;
                simplex.values[worst] = f_reflected;
            }
        } else if f_reflected < simplex.values[worst - 1] {
            simplex.points[worst] = reflected;
            simplex.values[worst] = f_reflected;
        } else if f_reflected < simplex.values[worst] {
            let outside = along(&centroid, &simplex.points[worst], REFLECTION * CONTRACTION);
            let f_outside = eval(&outside);
            if f_outside <= f_reflected {
                simplex.points[worst] = outside;
                simplex.values[worst] = f_outside;
            } else {
                shrink = true;
            }
        } else {
            let inside = along(&centroid, &simplex.points[worst], -CONTRACTION);
            let f_inside = eval(&inside);
            if f_inside < simplex.values[worst] {
                simplex.points[worst] = inside;
                simplex.values[worst] = f_inside;
            } else {
                shrink = true;
            }
        }

        if shrink {
            let best = simplex.points[0].clone();
            for i in 1..=dim {
                let p: Vec<f64> = best
                    .iter()
                    .zip(&simplex.points[i])
                    .map(|(b, x)| b + SHRINK * (x - b))
                    .collect();
                simplex.values[i] = eval(&p);
                simplex.points[i] = p;
            }
        }
        simplex.sort();
        trace.push(TracePoint {
            iteration,
            value: simplex.values[0],
        });
    }
    if termination == Termination::MaxIters
        && simplex.value_spread() < config.f_tol
        && simplex.coordinate_spread() < config.x_tol
    {
        termination = Termination::Converged;
    }

    OptimizeResult {
        best_value: simplex.values[0],
        best_params: simplex.points.swap_remove(0),
        trace,
        n_evals,
        n_grad_evals: 0,
        wall_time_seconds: started.elapsed().as_secs_f64(),
        termination,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimize::{dot, Method};

    fn config() -> OptimizerConfig {
        OptimizerConfig::new(Method::NelderMead)
    }

    fn rosenbrock(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    #[test]
    fn quadratic() {
        let result = nelder_mead_minimize(|x: &[f64]| dot(x, x), &[3.0, 4.0], &config());
        assert!(
            result.best_params.iter().all(|v| v.abs() < 1e-3),
            "{:?}",
            result.best_params
        );
        assert_eq!(result.termination, Termination::Converged);
    }

    #[test]
    fn rosenbrock_from_classic_start() {
        let result = nelder_mead_minimize(rosenbrock, &[-1.2, 1.0], &config());
        assert!((result.best_params[0] - 1.0).abs() < 1e-3, "{:?}", result.best_params);
        assert!((result.best_params[1] - 1.0).abs() < 1e-3, "{:?}", result.best_params);
    }

    #[test]
    fn best_value_never_increases() {
        let result = nelder_mead_minimize(rosenbrock, &[0.5, -0.7], &config());
        assert!(result.trace.windows(2).all(|w| w[1].value <= w[0].value));
        assert_eq!(result.trace.last().unwrap().value, result.best_value);
    }

    #[test]
    fn deterministic_and_counted() {
        let mut calls = 0;
        let a = nelder_mead_minimize(
            |x: &[f64]| {
                calls += 1;
                rosenbrock(x)
            },
            &[-1.2, 1.0],
            &config(),
        );
        let b = nelder_mead_minimize(rosenbrock, &[-1.2, 1.0], &config());
        assert_eq!(a.n_evals, calls);
        assert_eq!(a.best_params, b.best_params);
        assert_eq!(a.trace, b.trace);
    }

    #[test]
    fn initial_simplex_step() {
        let mut seen = Vec::new();
        let cfg = OptimizerConfig {
            max_iters: Some(1),
            ..config()
        };
        nelder_mead_minimize(
            |x: &[f64]| {
                seen.push(x.to_vec());
                0.0
            },
            &[0.0, 10.0],
            &cfg,
        );
        assert_eq!(seen[..3], [vec![0.0, 10.0], vec![0.05, 10.0], vec![0.0, 10.5]]);
    }
}
