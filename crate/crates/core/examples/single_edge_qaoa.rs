//! Depth-1 QAOA on a single edge, where the optimum ⟨Z0 Z1⟩ = -1 is exact.

use maxcut_qaoa::graph::Graph;
use maxcut_qaoa::optimize::{minimize_qaoa, Method, OptimizerConfig};
use maxcut_qaoa::qaoa::{extract_solution, QaoaCircuit, QaoaParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let edge = Graph::new(2, [(0, 1)])?;
    let circuit = QaoaCircuit::new(edge.clone(), 1)?;
    for method in Method::ALL {
        let config = OptimizerConfig {
            restarts: 8,
            init_seed: 3,
            ..OptimizerConfig::new(method)
        };
        let result = minimize_qaoa(&circuit, &config)?;
        let params = QaoaParams::from_flat(&result.best_params)?;
        let solution = extract_solution(&edge, &params, 256, 1)?;
        println!(
            "{:<12} <H_C> = {:+.8}  gamma = {:.4}  beta = {:.4}  expected cut = {:.6}  evals = {}  grads = {}",
            method.as_str(),
            result.best_value,
            params.gammas()[0],
            params.betas()[0],
            solution.expected_cut,
            result.n_evals,
            result.n_grad_evals
        );
    }
    Ok(())
}
