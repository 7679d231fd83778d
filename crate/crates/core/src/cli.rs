//! Command-line front end.
//!
//! Exit codes: 0 success, 1 invalid arguments or configuration, 2 I/O or
//! malformed input data. Resolved settings go to stderr so that stdout only
//! carries results.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiment::{aggregate, generate_dataset, read_records, run_matrix, ExperimentConfig, TaskSeeds};
use crate::graph::{one_exchange_maxcut, read_graph, CutResult};
use crate::optimize::{minimize_qaoa, Method, OptimizerConfig, Termination};
use crate::qaoa::{solution_from_state, QaoaCircuit, QaoaParams};

#[derive(Debug, Parser)]
#[command(name = "maxcut-qaoa", version, about = "QAOA for MaxCut on a statevector simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate Erdős–Rényi graphs in the dataset layout.
    GenDataset {
        /// Vertex counts, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        nodes: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 0.5)]
        edge_prob: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// One-exchange local search on one graph.
    SolveClassical {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Optimize and sample a QAOA circuit for one graph.
    SolveQaoa {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long = "p", default_value_t = 1)]
        depth: usize,
        #[arg(long, default_value = "bfgs")]
        optimizer: Method,
        #[arg(long, default_value_t = 1024)]
        shots: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the optimized angles here.
        #[arg(long)]
        params_out: Option<PathBuf>,
    },
    /// Run the full graph × optimizer × depth matrix.
    RunExperiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Overrides the config's `parallelism`.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Aggregate a records file into `report.csv`.
    Report {
        #[arg(long)]
        records: PathBuf,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
}

#[derive(Debug, Serialize)]
struct SolveQaoaOutput {
    n: usize,
    edges: usize,
    p: usize,
    optimizer: Method,
    seed: u64,
    shots: usize,
    best_sampled: CutResult,
    most_probable: CutResult,
    expected_cut: f64,
    classical_cut: usize,
    params: QaoaParams,
    n_evals: usize,
    n_grad_evals: usize,
    termination: Termination,
}

/// Entry point for the binary; returns the process exit code.
pub fn main() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_io_or_data() {
                2
            } else {
                1
            }
        }
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::io("<stdout>", e)
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let _ = writeln!(err, "config: {command:?}");
    match command {
        Command::GenDataset {
            nodes,
            count,
            edge_prob,
            seed,
            out: dir,
        } => {
            let config = ExperimentConfig {
                node_counts: nodes,
                graphs_per_count: count,
                edge_prob,
                master_seed: seed,
                ..Default::default()
            };
            for (n, files) in generate_dataset(&config, &dir)? {
                writeln!(out, "wrote {files} graphs (n={n})").map_err(io_err)?;
            }
        }
        Command::SolveClassical { graph, seed } => {
            let graph = read_graph(graph)?;
            let result = one_exchange_maxcut(&graph, seed);
            writeln!(out, "{}", serde_json::to_string(&result).expect("cut serializes")).map_err(io_err)?;
        }
        Command::SolveQaoa {
            graph,
            depth,
            optimizer,
            shots,
            seed,
            params_out,
        } => {
            if depth == 0 {
                return Err(Error::InvalidArgument("--p must be at least 1".into()));
            }
            if shots == 0 {
                return Err(Error::InvalidArgument("--shots must be at least 1".into()));
            }
            let graph = read_graph(graph)?;
            let seeds = TaskSeeds::from_seed(seed);
            let circuit = QaoaCircuit::new(graph.clone(), depth)?;
            let config = OptimizerConfig {
                init_seed: seeds.init,
                ..OptimizerConfig::new(optimizer)
            };
            let result = minimize_qaoa(&circuit, &config)?;
            let params = QaoaParams::from_flat(&result.best_params)?;
            let solution = solution_from_state(&graph, &circuit.state(&params)?, &params, shots, seeds.sampling)?;
            let _ = writeln!(err, "optimization wall time: {:.4} s", result.wall_time_seconds);

            if let Some(path) = params_out {
                std::fs::write(&path, params.to_json()).map_err(|e| Error::io(path, e))?;
            }
            let output = SolveQaoaOutput {
                n: graph.n(),
                edges: graph.edge_count(),
                p: depth,
                optimizer,
                seed,
                shots,
                best_sampled: solution.best_sampled,
                most_probable: solution.most_probable,
                expected_cut: solution.expected_cut,
                classical_cut: one_exchange_maxcut(&graph, seeds.classical).cut_value,
                params,
                n_evals: result.n_evals,
                n_grad_evals: result.n_grad_evals,
                termination: result.termination,
            };
            writeln!(out, "{}", serde_json::to_string(&output).expect("output serializes")).map_err(io_err)?;
        }
        Command::RunExperiment {
            config,
            out: dir,
            workers,
        } => {
            let mut config = ExperimentConfig::load(config)?;
            if let Some(workers) = workers {
                config.parallelism = workers;
            }
            config.validate()?;
            let _ = writeln!(
                err,
                "resolved: {}",
                serde_json::to_string(&config).expect("config serializes")
            );
            let dataset = dir.join("dataset");
            generate_dataset(&config, &dataset)?;
            let records_path = dir.join("records.jsonl");
            let records = run_matrix(&config, &dataset, Some(&records_path))?;
            let failed = records.iter().filter(|r| r.error.is_some()).count();
            writeln!(
                out,
                "wrote {} records to {} ({failed} failed)",
                records.len(),
                records_path.display()
            )
            .map_err(io_err)?;
        }
        Command::Report { records, out: dir } => {
            let records = read_records(records)?;
            let report = aggregate(&records)?;
            let path = dir.join("report.csv");
            report.write_csv(&path)?;
            writeln!(out, "{}", path.display()).map_err(io_err)?;
            write!(out, "{}", report.to_table()).map_err(io_err)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(
            std::iter::once("maxcut-qaoa").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn unknown_flags_and_subcommands_exit_1() {
        assert_eq!(run_args(&["frobnicate"]).0, 1);
        assert_eq!(run_args(&["solve-classical", "--graph", "x", "--bogus"]).0, 1);
        assert_eq!(run_args(&["solve-qaoa", "--graph", "x", "--optimizer", "adam"]).0, 1);
    }

    #[test]
    fn help_exits_0() {
        let (code, out, _) = run_args(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("gen-dataset"));
    }

    #[test]
    fn edge_prob_out_of_range() {
        let dir = tempfile::tempdir().unwrap();
        let (code, _, err) = run_args(&[
            "gen-dataset",
            "--nodes",
            "5",
            "--edge-prob",
            "1.5",
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(code, 1);
        assert!(err.contains("outside [0, 1]"), "{err}");
    }

    #[test]
    fn resolved_config_on_stderr() {
        let (code, _, err) = run_args(&["solve-classical", "--graph", "/nonexistent/graph.json"]);
        assert_eq!(code, 2);
        assert!(err.starts_with("config: SolveClassical"), "{err}");
    }
}
