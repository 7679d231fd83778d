//! Classical outer loop: gradients, BFGS, Nelder-Mead and multistart.

mod bfgs;
mod gradient;
mod nelder_mead;

use std::cell::Cell;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qaoa::{QaoaCircuit, QaoaParams};
use crate::rng::{derive_seed, rng_from_seed};

pub use bfgs::bfgs_minimize;
pub use gradient::{finite_difference_gradient, parameter_shift_gradient, ShiftRuleObjective, SHIFT};
pub use nelder_mead::nelder_mead_minimize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Bfgs,
    NelderMead,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::Bfgs, Method::NelderMead];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Bfgs => "bfgs",
            Method::NelderMead => "nelder-mead",
        }
    }

    pub fn uses_gradient(self) -> bool {
        matches!(self, Method::Bfgs)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bfgs" => Ok(Method::Bfgs),
            "nelder-mead" => Ok(Method::NelderMead),
            other => Err(Error::InvalidArgument(format!(
                "unknown optimizer {other:?} (expected bfgs or nelder-mead)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub method: Method,
    /// `None` picks the method default: 200 for BFGS, 200 × dimension for
    /// Nelder-Mead.
    pub max_iters: Option<usize>,
    pub grad_tol: f64,
    pub f_tol: f64,
    pub x_tol: f64,
    pub restarts: usize,
    pub init_seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            method: Method::Bfgs,
            max_iters: None,
            grad_tol: 1e-5,
            f_tol: 1e-4,
            x_tol: 1e-4,
            restarts: 1,
            init_seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn new(method: Method) -> Self {
        OptimizerConfig {
            method,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let tolerances = [
            ("grad_tol", self.grad_tol),
            ("f_tol", self.f_tol),
            ("x_tol", self.x_tol),
        ];
        if let Some((name, value)) = tolerances.iter().find(|(_, v)| !(*v > 0.0)) {
            return Err(Error::InvalidArgument(format!("{name} must be positive, got {value}")));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidArgument("restarts must be at least 1".into()));
        }
        if self.max_iters == Some(0) {
            return Err(Error::InvalidArgument("max_iters must be at least 1".into()));
        }
        Ok(())
    }

    pub fn max_iters_for(&self, dim: usize) -> usize {
        self.max_iters.unwrap_or(match self.method {
            Method::Bfgs => 200,
            Method::NelderMead => 200 * dim,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Converged,
    MaxIters,
    /// No strong-Wolfe step was found; the best point seen is returned.
    LineSearchFailure,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeResult {
    pub best_params: Vec<f64>,
    pub best_value: f64,
    pub trace: Vec<TracePoint>,
    pub n_evals: usize,
    pub n_grad_evals: usize,
    pub wall_time_seconds: f64,
    pub termination: Termination,
}

impl OptimizeResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("optimizer result serializes")
    }
}

/// Uniform angles in `[0, π)`, which covers a full period of the objective
/// in every coordinate.
pub fn random_init(p: usize, seed: u64) -> Result<QaoaParams> {
    let mut rng = rng_from_seed(seed);
    let gammas = (0..p).map(|_| rng.gen_range(0.0..PI)).collect();
    let betas = (0..p).map(|_| rng.gen_range(0.0..PI)).collect();
    QaoaParams::new(gammas, betas)
}

/// Seed of restart `r`; restart 0 uses `init_seed` unchanged.
pub fn restart_seed(init_seed: u64, restart: usize) -> u64 {
    if restart == 0 {
        init_seed
    } else {
        derive_seed(&[init_seed, restart as u64])
    }
}

/// Minimizes `⟨H_C⟩` of `circuit` with `config.method`, running
/// `config.restarts` independent starts from [`random_init`].
///
/// BFGS takes its gradient from the parameter-shift rule. Counters and the
/// trace accumulate over restarts; the trace continues its iteration count
/// from one start to the next.
pub fn minimize_qaoa(circuit: &QaoaCircuit, config: &OptimizerConfig) -> Result<OptimizeResult> {
    config.validate()?;
    let started = Instant::now();
    let mut combined: Option<OptimizeResult> = None;
    for restart in 0..config.restarts {
        let x0 = random_init(circuit.depth(), restart_seed(config.init_seed, restart))?.to_flat();
        let run = minimize_from(circuit, &x0, config)?;
        combined = Some(match combined {
            None => run,
            Some(mut acc) => {
                let offset = acc.trace.last().map_or(0, |t| t.iteration + 1);
                acc.trace.extend(run.trace.iter().map(|t| TracePoint {
                    iteration: t.iteration + offset,
                    ..*t
                }));
                acc.n_evals += run.n_evals;
                acc.n_grad_evals += run.n_grad_evals;
                if run.best_value < acc.best_value {
                    acc.best_value = run.best_value;
                    acc.best_params = run.best_params;
                    acc.termination = run.termination;
                }
                acc
            }
        });
    }
    let mut result = combined.expect("at least one restart");
    result.wall_time_seconds = started.elapsed().as_secs_f64();
    Ok(result)
}

/// One optimizer run from `x0`.
pub fn minimize_from(circuit: &QaoaCircuit, x0: &[f64], config: &OptimizerConfig) -> Result<OptimizeResult> {
    config.validate()?;
    if x0.len() != circuit.n_params() {
        return Err(Error::ParamCount {
            expected: circuit.n_params(),
            got: x0.len(),
        });
    }
    // The circuit rejects only wrongly sized vectors, which the optimizers
    // never produce.
    let failure = Cell::new(None);
    let objective = |x: &[f64]| match circuit.objective(x) {
        Ok(v) => v,
        Err(e) => {
            failure.set(Some(e.to_string()));
            f64::NAN
        }
    };
    let result = match config.method {
        Method::Bfgs => {
            let gradient = |x: &[f64]| match parameter_shift_gradient(circuit, x) {
                Ok(g) => g,
                Err(e) => {
                    failure.set(Some(e.to_string()));
                    vec![f64::NAN; x.len()]
                }
            };
            bfgs_minimize(objective, gradient, x0, config)
        }
        Method::NelderMead => nelder_mead_minimize(objective, x0, config),
    };
    match failure.take() {
        Some(msg) => Err(Error::InvalidArgument(msg)),
        None => Ok(result),
    }
}

pub(crate) fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    #[test]
    fn method_strings() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{m}\""));
        }
        assert!("adam".parse::<Method>().is_err());
    }

    #[test]
    fn config_validation() {
        assert!(OptimizerConfig::default().validate().is_ok());
        let bad = OptimizerConfig {
            f_tol: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = OptimizerConfig {
            restarts: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert_eq!(OptimizerConfig::new(Method::NelderMead).max_iters_for(4), 800);
        assert_eq!(OptimizerConfig::new(Method::Bfgs).max_iters_for(4), 200);
    }

    #[test]
    fn random_init_range_and_determinism() {
        let a = random_init(3, 17).unwrap();
        assert_eq!(a, random_init(3, 17).unwrap());
        assert_ne!(a, random_init(3, 18).unwrap());
        assert!(a.to_flat().iter().all(|&x| (0.0..PI).contains(&x)));
        assert_eq!(a.depth(), 3);
    }

    #[test]
    fn random_init_moments() {
        let draws = 10_000;
        let mut sums = [0.0; 2];
        for seed in 0..draws {
            let x = random_init(1, seed).unwrap().to_flat();
            sums[0] += x[0];
            sums[1] += x[1];
        }
        // Uniform on [0, π): σ = π/√12; the mean of N draws has σ/√N.
        let band = 3.0 * PI / 12f64.sqrt() / (draws as f64).sqrt();
        for s in sums {
            assert!((s / draws as f64 - PI / 2.0).abs() <= band);
        }
    }

    #[test]
    fn eval_count_matches_circuit_counter() {
        let circuit = QaoaCircuit::new(Graph::complete(3).unwrap(), 1).unwrap();
        let config = OptimizerConfig::new(Method::NelderMead);
        let result = minimize_qaoa(&circuit, &config).unwrap();
        assert_eq!(result.n_evals as u64, circuit.simulations());
        assert_eq!(result.n_grad_evals, 0);
    }

    #[test]
    fn restarts_accumulate() {
        let circuit = QaoaCircuit::new(Graph::new(2, [(0, 1)]).unwrap(), 1).unwrap();
        let one = minimize_qaoa(
            &circuit,
            &OptimizerConfig {
                restarts: 1,
                ..OptimizerConfig::new(Method::NelderMead)
            },
        )
        .unwrap();
        let three = minimize_qaoa(
            &circuit,
            &OptimizerConfig {
                restarts: 3,
                ..OptimizerConfig::new(Method::NelderMead)
            },
        )
        .unwrap();
        assert!(three.n_evals > one.n_evals);
        assert!(three.best_value <= one.best_value);
        let min_trace = three.trace.iter().map(|t| t.value).fold(f64::INFINITY, f64::min);
        assert_eq!(min_trace, three.best_value);
        assert!(three.trace.windows(2).all(|w| w[0].iteration < w[1].iteration));
    }

    #[test]
    fn wrong_start_length_rejected() {
        let circuit = QaoaCircuit::new(Graph::complete(3).unwrap(), 2).unwrap();
        assert!(minimize_from(&circuit, &[0.1, 0.2], &OptimizerConfig::default()).is_err());
    }
}
