//! Exact and heuristic classical MaxCut solvers.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{cut_value, Graph, Partition};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Largest vertex count accepted by [`brute_force_maxcut`].
pub const BRUTE_FORCE_MAX_VERTICES: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutResult {
    pub cut_value: usize,
    pub partition: Partition,
}

impl CutResult {
    pub fn evaluate(graph: &Graph, partition: Partition) -> Result<Self> {
        Ok(CutResult {
            cut_value: cut_value(graph, &partition)?,
            partition,
        })
    }
}

/// Exhaustive search over the 2^(n-1) bipartitions with vertex 0 in subset 0.
/// Among equal cuts the assignment with the smallest integer value wins.
pub fn brute_force_maxcut(graph: &Graph) -> Result<CutResult> {
    let n = graph.n();
    if n > BRUTE_FORCE_MAX_VERTICES {
        return Err(Error::TooLargeForOracle {
            n,
            max: BRUTE_FORCE_MAX_VERTICES,
        });
    }
    let (mut best_mask, mut best_cut) = (0u64, 0usize);
    for half in 0..1u64 << (n - 1) {
        let mask = half << 1;
        let cut = graph.cut_of_mask(mask);
        if cut > best_cut {
            best_cut = cut;
            best_mask = mask;
        }
    }
    Ok(CutResult {
        cut_value: best_cut,
        partition: Partition::from_index(best_mask, n),
    })
}

/// One-exchange local search from a uniformly random start drawn from `seed`.
pub fn one_exchange_maxcut(graph: &Graph, seed: u64) -> CutResult {
    let mut rng = rng_from_seed(seed);
    let start = Partition::new((0..graph.n()).map(|_| rng.gen::<bool>()).collect());
    one_exchange_from(graph, start).expect("start partition has graph length")
}

/// Greedy one-exchange: repeatedly moves the vertex whose move increases the
/// cut the most (lowest index on ties) until no single move helps.
pub fn one_exchange_from(graph: &Graph, start: Partition) -> Result<CutResult> {
    if start.len() != graph.n() {
        return Err(Error::PartitionLength {
            expected: graph.n(),
            got: start.len(),
        });
    }
    let adj = graph.adjacency();
    let mut partition = start;
    loop {
        let mut best: Option<(usize, i64)> = None;
        for (v, neighbours) in adj.iter().enumerate() {
            let gain = flip_gain(&partition, v, neighbours);
            if gain > 0 && best.map_or(true, |(_, g)| gain > g) {
                best = Some((v, gain));
            }
        }
        match best {
            Some((v, _)) => partition.flip(v),
            None => break,
        }
    }
    CutResult::evaluate(graph, partition)
}

/// Change in cut size if `v` switched sides: uncut incident edges become cut
/// and vice versa.
fn flip_gain(partition: &Partition, v: usize, neighbours: &[usize]) -> i64 {
    neighbours
        .iter()
        .map(|&w| if partition.side(w) == partition.side(v) { 1 } else { -1 })
        .sum()
}

/// For every vertex, cut incident edges are at least as many as uncut ones.
pub fn is_one_exchange_optimal(graph: &Graph, partition: &Partition) -> bool {
    partition.len() == graph.n()
        && graph
            .adjacency()
            .iter()
            .enumerate()
            .all(|(v, neighbours)| flip_gain(partition, v, neighbours) <= 0)
}
