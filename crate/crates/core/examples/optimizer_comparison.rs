//! BFGS and Nelder-Mead on one random 10-vertex graph at depths 1 to 3.
//!
//! cargo run --release --example optimizer_comparison -- [seed]

use maxcut_qaoa::experiment::{run_single, TaskSeeds};
use maxcut_qaoa::graph::{brute_force_maxcut, generate_erdos_renyi};
use maxcut_qaoa::optimize::Method;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(1);
    let g = generate_erdos_renyi(10, 0.5, seed)?;
    let optimum = brute_force_maxcut(&g)?.cut_value;
    println!("n = 10, |E| = {}, optimum cut {optimum}", g.edge_count());
    println!(
        "{:<12} {:>2} {:>8} {:>9} {:>9} {:>7} {:>6} {:>10}",
        "optimizer", "p", "sampled", "expected", "classical", "evals", "grads", "seconds"
    );
    for p in 1..=3 {
        for method in Method::ALL {
            let seeds = TaskSeeds::for_task(seed, 10, 0, method, p);
            let r = run_single(&g, "demo", method, p, 1024, seeds);
            println!(
                "{:<12} {p:>2} {:>8} {:>9.3} {:>9} {:>7} {:>6} {:>10.4}",
                method.as_str(),
                r.qaoa_best_sampled,
                r.qaoa_expected_cut,
                r.classical_cut,
                r.n_evals,
                r.n_grad_evals,
                r.optimize_wall_seconds
            );
        }
    }
    Ok(())
}
