//! Seeded Erdős–Rényi instances and the on-disk dataset layout.
//!
//! cargo run --example erdos_renyi_dataset -- [out_dir]

use maxcut_qaoa::experiment::{generate_dataset, load_dataset, ExperimentConfig};
use maxcut_qaoa::graph::generate_erdos_renyi;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = generate_erdos_renyi(6, 0.5, 42)?;
    println!("G(6, 0.5) seed 42: {} edges", g.edge_count());
    println!("{}", g.to_json());
    // Same seed, same graph.
    assert_eq!(g, generate_erdos_renyi(6, 0.5, 42)?);

    let out = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("maxcut-qaoa-dataset"));
    let config = ExperimentConfig {
        node_counts: vec![10, 20],
        graphs_per_count: 5,
        ..Default::default()
    };
    for (n, files) in generate_dataset(&config, &out)? {
        println!("wrote {files} graphs (n={n}) under {}", out.display());
    }
    for (id, graph) in load_dataset(&config, &out)? {
        println!("{id}: {} edges, seed {:?}", graph.edge_count(), graph.seed());
    }
    Ok(())
}
