//! Exhaustive MaxCut against the one-exchange local search.

use maxcut_qaoa::graph::{
    brute_force_maxcut, generate_erdos_renyi, is_one_exchange_optimal, one_exchange_maxcut, Graph,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let k3 = Graph::complete(3)?;
    let best = brute_force_maxcut(&k3)?;
    println!("K3: optimum {} with partition {}", best.cut_value, best.partition);

    println!("{:>4} {:>6} {:>8} {:>13}", "seed", "edges", "optimum", "one-exchange");
    for seed in 0..8 {
        let g = generate_erdos_renyi(12, 0.5, seed)?;
        let exact = brute_force_maxcut(&g)?;
        let local = one_exchange_maxcut(&g, seed);
        assert!(is_one_exchange_optimal(&g, &local.partition));
        println!(
            "{seed:>4} {:>6} {:>8} {:>13}",
            g.edge_count(),
            exact.cut_value,
            local.cut_value
        );
    }
    Ok(())
}
