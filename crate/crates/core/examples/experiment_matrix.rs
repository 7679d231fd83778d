//! Runs a reduced experiment matrix and prints the aggregate table.
//!
//! cargo run --release --example experiment_matrix -- [graphs] [nodes] [workers]

use maxcut_qaoa::experiment::{aggregate, generate_dataset, run_matrix, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>());
    let graphs = args.next().transpose()?.unwrap_or(5);
    let nodes = args.next().transpose()?.unwrap_or(8);
    let workers = args.next().transpose()?.unwrap_or(1);

    let config = ExperimentConfig {
        node_counts: vec![nodes],
        graphs_per_count: graphs,
        parallelism: workers,
        master_seed: 2024,
        ..Default::default()
    };
    let dir = tempfile_dir()?;
    generate_dataset(&config, &dir)?;
    let records = run_matrix(&config, &dir, Some(&dir.join("records.jsonl")))?;
    println!("{} records in {}", records.len(), dir.display());

    let report = aggregate(&records)?;
    print!("{}", report.to_table());
    Ok(())
}

fn tempfile_dir() -> std::io::Result<std::path::PathBuf> {
    let dir = std::env::temp_dir().join(format!("maxcut-qaoa-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}
