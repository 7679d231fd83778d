//! Experiment matrix: dataset generation, per-task QAOA runs against the
//! one-exchange baseline, and aggregation into ratio and runtime tables.

mod report;

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{generate_erdos_renyi, one_exchange_maxcut, read_graph, write_graph, Graph};
use crate::optimize::{minimize_qaoa, random_init, Method, OptimizerConfig, Termination};
use crate::qaoa::{solution_from_state, QaoaCircuit, QaoaParams};
use crate::rng::derive_seed;
use crate::statevector::MAX_QUBITS;

pub use report::{aggregate, AggregateReport, AggregateRow};

const TAG_INIT: u64 = 1;
const TAG_SAMPLING: u64 = 2;
const TAG_CLASSICAL: u64 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub node_counts: Vec<usize>,
    pub graphs_per_count: usize,
    pub edge_prob: f64,
    pub depths: Vec<usize>,
    pub optimizers: Vec<Method>,
    pub shots: usize,
    pub master_seed: u64,
    /// Worker threads used by [`run_matrix`].
    pub parallelism: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            node_counts: vec![10, 20],
            graphs_per_count: 100,
            edge_prob: 0.5,
            depths: vec![1, 2, 3],
            optimizers: Method::ALL.to_vec(),
            shots: 1024,
            master_seed: 0,
            parallelism: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidArgument(msg));
        if self.node_counts.is_empty() || self.node_counts.iter().any(|&n| n == 0 || n > MAX_QUBITS) {
            return fail(format!("node_counts must be non-empty and within 1..={MAX_QUBITS}"));
        }
        if self.graphs_per_count == 0 {
            return fail("graphs_per_count must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.edge_prob) {
            return fail(format!("edge_prob {} outside [0, 1]", self.edge_prob));
        }
        if self.depths.is_empty() || self.depths.contains(&0) {
            return fail("depths must be non-empty and positive".into());
        }
        if self.optimizers.is_empty() {
            return fail("at least one optimizer is required".into());
        }
        if self.shots == 0 {
            return fail("shots must be positive".into());
        }
        if self.parallelism == 0 {
            return fail("parallelism must be positive".into());
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("experiment config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ExperimentConfig::from_json(&text)
    }
}

/// Seed of graph `index` among the `n`-vertex graphs.
pub fn graph_seed(master_seed: u64, n: usize, index: usize) -> u64 {
    derive_seed(&[master_seed, n as u64, index as u64])
}

pub fn graph_id(n: usize, index: usize) -> String {
    format!("{n}nodes/graph_{index:03}")
}

pub fn graph_path(dataset: &Path, n: usize, index: usize) -> PathBuf {
    dataset.join(format!("{}.json", graph_id(n, index)))
}

/// Writes `graphs_per_count` Erdős–Rényi graphs per node count under
/// `<dir>/<n>nodes/graph_<index>.json`. Returns the file count per node
/// count.
pub fn generate_dataset(config: &ExperimentConfig, dir: impl AsRef<Path>) -> Result<Vec<(usize, usize)>> {
    config.validate()?;
    let dir = dir.as_ref();
    let mut written = Vec::new();
    for &n in &config.node_counts {
        let sub = dir.join(format!("{n}nodes"));
        fs::create_dir_all(&sub).map_err(|e| Error::io(&sub, e))?;
        for index in 0..config.graphs_per_count {
            let graph = generate_erdos_renyi(n, config.edge_prob, graph_seed(config.master_seed, n, index))?;
            write_graph(&graph, graph_path(dir, n, index))?;
        }
        written.push((n, config.graphs_per_count));
    }
    Ok(written)
}

/// Reads the graphs named by `config` from a dataset directory, in the
/// order node count, then index.
pub fn load_dataset(config: &ExperimentConfig, dir: impl AsRef<Path>) -> Result<Vec<(String, Graph)>> {
    let dir = dir.as_ref();
    let mut graphs = Vec::new();
    for &n in &config.node_counts {
        for index in 0..config.graphs_per_count {
            let graph = read_graph(graph_path(dir, n, index))?;
            if graph.n() != n {
                return Err(Error::InvalidGraph(format!(
                    "{} has {} vertices, expected {n}",
                    graph_id(n, index),
                    graph.n()
                )));
            }
            graphs.push((graph_id(n, index), graph));
        }
    }
    Ok(graphs)
}

/// Outcome of one (graph, optimizer, depth) task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub graph_id: String,
    pub n: usize,
    pub optimizer: Method,
    pub p: usize,
    pub qaoa_best_sampled: usize,
    pub qaoa_expected_cut: f64,
    pub classical_cut: usize,
    /// Optimization loop only.
    pub optimize_wall_seconds: f64,
    pub n_evals: usize,
    pub n_grad_evals: usize,
    pub final_params: QaoaParams,
    /// Circuit construction (cost diagonal precomputation).
    pub setup_wall_seconds: f64,
    pub termination: Option<Termination>,
    pub error: Option<String>,
}

impl ExperimentRecord {
    /// The record with its timing fields zeroed, for reproducibility checks.
    pub fn without_timings(&self) -> Self {
        ExperimentRecord {
            optimize_wall_seconds: 0.0,
            setup_wall_seconds: 0.0,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaskSeeds {
    pub init: u64,
    pub sampling: u64,
    pub classical: u64,
}

impl TaskSeeds {
    /// Splits one seed into independent streams.
    pub fn from_seed(seed: u64) -> Self {
        TaskSeeds {
            init: derive_seed(&[seed, TAG_INIT]),
            sampling: derive_seed(&[seed, TAG_SAMPLING]),
            classical: derive_seed(&[seed, TAG_CLASSICAL]),
        }
    }

    /// Seeds for a task of the matrix. Both optimizers share the starting
    /// point of a (graph, depth) cell, and the classical baseline depends on
    /// the graph alone.
    pub fn for_task(master_seed: u64, n: usize, index: usize, method: Method, p: usize) -> Self {
        let (n, index, p) = (n as u64, index as u64, p as u64);
        TaskSeeds {
            init: derive_seed(&[master_seed, TAG_INIT, n, index, p]),
            sampling: derive_seed(&[master_seed, TAG_SAMPLING, n, index, p, method as u64]),
            classical: derive_seed(&[master_seed, TAG_CLASSICAL, n, index]),
        }
    }
}

/// Optimizes a depth-`p` QAOA circuit for `graph`, extracts a cut from
/// `shots` samples and runs the one-exchange baseline. Failures end up in
/// the record's `error` field.
pub fn run_single(
    graph: &Graph,
    graph_id: &str,
    method: Method,
    p: usize,
    shots: usize,
    seeds: TaskSeeds,
) -> ExperimentRecord {
    let classical_cut = one_exchange_maxcut(graph, seeds.classical).cut_value;
    let mut record = ExperimentRecord {
        graph_id: graph_id.to_string(),
        n: graph.n(),
        optimizer: method,
        p,
        qaoa_best_sampled: 0,
        qaoa_expected_cut: 0.0,
        classical_cut,
        optimize_wall_seconds: 0.0,
        n_evals: 0,
        n_grad_evals: 0,
        final_params: random_init(p.max(1), seeds.init).expect("depth is positive"),
        setup_wall_seconds: 0.0,
        termination: None,
        error: None,
    };
    if let Err(e) = fill_qaoa(&mut record, graph, method, p, shots, seeds) {
        record.error = Some(e.to_string());
    }
    record
}

fn fill_qaoa(
    record: &mut ExperimentRecord,
    graph: &Graph,
    method: Method,
    p: usize,
    shots: usize,
    seeds: TaskSeeds,
) -> Result<()> {
    let setup = Instant::now();
    let circuit = QaoaCircuit::new(graph.clone(), p)?;
    record.setup_wall_seconds = setup.elapsed().as_secs_f64();

    let config = OptimizerConfig {
        init_seed: seeds.init,
        ..OptimizerConfig::new(method)
    };
    let result = minimize_qaoa(&circuit, &config)?;
    record.optimize_wall_seconds = result.wall_time_seconds;
    record.n_evals = result.n_evals;
    record.n_grad_evals = result.n_grad_evals;
    record.termination = Some(result.termination);

    let params = QaoaParams::from_flat(&result.best_params)?;
    let state = circuit.state(&params)?;
    let solution = solution_from_state(graph, &state, &params, shots, seeds.sampling)?;
    record.qaoa_best_sampled = solution.best_sampled.cut_value;
    record.qaoa_expected_cut = solution.expected_cut;
    record.final_params = params;
    Ok(())
}

struct Task<'a> {
    index: usize,
    graph_index: usize,
    id: &'a str,
    graph: &'a Graph,
    method: Method,
    p: usize,
}

/// Runs every (graph, optimizer, depth) combination of `config` over the
/// dataset in `dataset_dir`.
///
/// Records come back in task order regardless of `config.parallelism`. When
/// `records_path` is given each record is appended there as one JSON line
/// as soon as all earlier tasks have finished.
pub fn run_matrix(
    config: &ExperimentConfig,
    dataset_dir: impl AsRef<Path>,
    records_path: Option<&Path>,
) -> Result<Vec<ExperimentRecord>> {
    config.validate()?;
    let graphs = load_dataset(config, dataset_dir)?;
    let mut tasks = Vec::new();
    for (position, (id, graph)) in graphs.iter().enumerate() {
        for &method in &config.optimizers {
            for &p in &config.depths {
                tasks.push(Task {
                    index: tasks.len(),
                    graph_index: position % config.graphs_per_count,
                    id,
                    graph,
                    method,
                    p,
                });
            }
        }
    }

    let mut sink = match records_path {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            let file = File::create(path).map_err(|e| Error::io(path, e))?;
            Some((path, BufWriter::new(file)))
        }
        None => None,
    };

    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel();
    let mut records = Vec::with_capacity(tasks.len());
    std::thread::scope(|scope| -> Result<()> {
        for _ in 0..config.parallelism.min(tasks.len().max(1)) {
            let tx = tx.clone();
            let (tasks, next) = (&tasks, &next);
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(task) = tasks.get(i) else { break };
                let seeds = TaskSeeds::for_task(
                    config.master_seed,
                    task.graph.n(),
                    task.graph_index,
                    task.method,
                    task.p,
                );
                let record = run_single(task.graph, task.id, task.method, task.p, config.shots, seeds);
                if tx.send((task.index, record)).is_err() {
                    break;
                }
            });
        }
        drop(tx);

        let mut pending = BTreeMap::new();
        for (index, record) in rx {
            pending.insert(index, record);
            while let Some(record) = pending.remove(&records.len()) {
                if let Some((path, out)) = sink.as_mut() {
                    log::debug!("{} {} p={} done", record.graph_id, record.optimizer, record.p);
                    writeln!(out, "{}", serde_json::to_string(&record).expect("record serializes"))
                        .and_then(|_| out.flush())
                        .map_err(|e| Error::io(*path, e))?;
                }
                records.push(record);
            }
        }
        Ok(())
    })?;
    Ok(records)
}

/// Parses a JSON-lines records file. Blank lines are skipped.
pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<ExperimentRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (number, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line)
            .map_err(|e| Error::json(format!("{} line {}", path.display(), number + 1), e))?;
        records.push(record);
    }
    if records.is_empty() {
        return Err(Error::NoRecords);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> ExperimentConfig {
        ExperimentConfig {
            node_counts: vec![4],
            graphs_per_count: 2,
            depths: vec![1, 2, 3],
            master_seed: 11,
            ..Default::default()
        }
    }

    #[test]
    fn config_json_defaults_and_validation() {
        let config = ExperimentConfig::from_json("{}").unwrap();
        assert_eq!(config, ExperimentConfig::default());
        let json = serde_json::to_string(&config).unwrap();
        assert!(json.contains(r#""optimizers":["bfgs","nelder-mead"]"#), "{json}");
        assert!(ExperimentConfig::from_json(r#"{"depths":[]}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"edge_prob":1.5}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"bogus":1}"#).is_err());
    }

    #[test]
    fn dataset_layout_and_determinism() {
        let dir = tempfile::tempdir().unwrap();
        let config = ExperimentConfig {
            node_counts: vec![3],
            graphs_per_count: 1,
            ..Default::default()
        };
        assert_eq!(generate_dataset(&config, dir.path()).unwrap(), vec![(3, 1)]);
        let graph = read_graph(dir.path().join("3nodes/graph_000.json")).unwrap();
        assert_eq!(graph.n(), 3);

        let again = tempfile::tempdir().unwrap();
        generate_dataset(&config, again.path()).unwrap();
        assert_eq!(
            fs::read(dir.path().join("3nodes/graph_000.json")).unwrap(),
            fs::read(again.path().join("3nodes/graph_000.json")).unwrap()
        );
    }

    #[test]
    fn single_run_on_triangle() {
        let k3 = Graph::complete(3).unwrap();
        let record = run_single(&k3, "k3", Method::Bfgs, 1, 1024, TaskSeeds::from_seed(3));
        assert!(record.qaoa_best_sampled <= 2);
        assert_eq!(record.classical_cut, 2);
        assert!(record.error.is_none());
        assert!(record.optimize_wall_seconds >= 0.0);
        let again = run_single(&k3, "k3", Method::Bfgs, 1, 1024, TaskSeeds::from_seed(3));
        assert_eq!(record.without_timings(), again.without_timings());
    }

    #[test]
    fn single_run_on_empty_graph() {
        let empty = Graph::new(3, []).unwrap();
        for method in Method::ALL {
            let record = run_single(&empty, "empty", method, 2, 64, TaskSeeds::from_seed(1));
            assert_eq!(record.qaoa_best_sampled, 0);
            assert_eq!(record.classical_cut, 0);
            assert!(record.qaoa_expected_cut.abs() < 1e-12);
            assert!(record.error.is_none());
            assert_eq!(record.final_params.depth(), 2);
        }
    }

    #[test]
    fn matrix_cardinality_order_and_worker_independence() {
        let dir = tempfile::tempdir().unwrap();
        let config = tiny_config();
        generate_dataset(&config, dir.path()).unwrap();
        let records_path = dir.path().join("results/records.jsonl");
        let serial = run_matrix(&config, dir.path(), Some(&records_path)).unwrap();
        assert_eq!(serial.len(), 12);
        assert_eq!(read_records(&records_path).unwrap(), serial);

        let parallel_config = ExperimentConfig {
            parallelism: 8,
            ..config.clone()
        };
        let parallel = run_matrix(&parallel_config, dir.path(), None).unwrap();
        let strip = |r: &[ExperimentRecord]| r.iter().map(ExperimentRecord::without_timings).collect::<Vec<_>>();
        assert_eq!(strip(&serial), strip(&parallel));

        let order: Vec<(String, Method, usize)> =
            serial.iter().map(|r| (r.graph_id.clone(), r.optimizer, r.p)).collect();
        assert_eq!(order[0], ("4nodes/graph_000".to_string(), Method::Bfgs, 1));
        assert_eq!(order[3], ("4nodes/graph_000".to_string(), Method::NelderMead, 1));
        assert_eq!(order[6].0, "4nodes/graph_001");
    }

    #[test]
    fn missing_dataset_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let err = run_matrix(&tiny_config(), dir.path(), None).unwrap_err();
        assert!(err.is_io_or_data());
    }

    #[test]
    fn empty_records_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("records.jsonl");
        fs::write(&path, "").unwrap();
        assert!(matches!(read_records(&path), Err(Error::NoRecords)));
    }
}
