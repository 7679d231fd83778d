//! Depth-p QAOA ansatz for MaxCut.
//!
//! The state is `Π_j U_M(β_j) U_C(γ_j) |+⟩^n` with `U_C(γ) = Π_{(u,v)∈E}
//! exp(-iγ Z_u Z_v)` and `U_M(β) = Π_q exp(-iβ X_q) = Π_q RX_q(2β)`. Layer 1
//! acts first. The objective `⟨H_C⟩ = Σ_E ⟨Z_u Z_v⟩` is minimized; the
//! expected cut is `(|E| - ⟨H_C⟩) / 2`.
//!
//! Flat parameter vectors are laid out as `[γ_1, …, γ_p, β_1, …, β_p]`.

use std::cell::Cell;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{cut_value, CutResult, Graph, Partition};
use crate::optimize::ShiftRuleObjective;
use crate::statevector::{expected_cut, expected_zz_sum, zz_diagonal, StateVector, MAX_QUBITS};

/// Circuit angles: one `γ` (cost) and one `β` (mixer) per layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct QaoaParams {
    p: usize,
    gammas: Vec<f64>,
    betas: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    p: usize,
    gammas: Vec<f64>,
    betas: Vec<f64>,
}

impl TryFrom<RawParams> for QaoaParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        let params = QaoaParams::new(raw.gammas, raw.betas)?;
        if params.p != raw.p {
            return Err(Error::InvalidArgument(format!(
                "p = {} but {} angle pairs were given",
                raw.p, params.p
            )));
        }
        Ok(params)
    }
}

impl QaoaParams {
    pub fn new(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        if gammas.is_empty() || gammas.len() != betas.len() {
            return Err(Error::InvalidArgument(format!(
                "need p >= 1 gammas and betas of equal length, got {} and {}",
                gammas.len(),
                betas.len()
            )));
        }
        if gammas.iter().chain(&betas).any(|a| !a.is_finite()) {
            return Err(Error::InvalidArgument("angles must be finite".into()));
        }
        Ok(QaoaParams {
            p: gammas.len(),
            gammas,
            betas,
        })
    }

    pub fn zeros(p: usize) -> Result<Self> {
        QaoaParams::new(vec![0.0; p], vec![0.0; p])
    }

    /// Splits `[γ_1..γ_p, β_1..β_p]`.
    pub fn from_flat(x: &[f64]) -> Result<Self> {
        if x.is_empty() || x.len() % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "flat parameter vector has odd or zero length {}",
                x.len()
            )));
        }
        let (g, b) = x.split_at(x.len() / 2);
        QaoaParams::new(g.to_vec(), b.to_vec())
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.gammas.iter().chain(&self.betas).copied().collect()
    }

    pub fn depth(&self) -> usize {
        self.p
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("finite angles serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::json("QAOA parameters", e))
    }
}

fn check_graph(graph: &Graph) -> Result<()> {
    if graph.n() > MAX_QUBITS {
        return Err(Error::QubitCount {
            n: graph.n(),
            max: MAX_QUBITS,
        });
    }
    Ok(())
}

/// Builds the QAOA state gate by gate: every edge gets its own `ZZ` rotation
/// in canonical edge order, then every qubit its `RX(2β)`.
pub fn prepare_qaoa_state(graph: &Graph, params: &QaoaParams) -> Result<StateVector> {
    check_graph(graph)?;
    let mut state = StateVector::plus_state(graph.n())?;
    for (&gamma, &beta) in params.gammas.iter().zip(&params.betas) {
        for &(u, v) in graph.edges() {
            state.apply_zz(u, v, gamma)?;
        }
        for q in 0..graph.n() {
            state.apply_rx(q, 2.0 * beta)?;
        }
    }
    Ok(state)
}

/// `⟨H_C⟩` of the QAOA state; the quantity to minimize.
pub fn qaoa_objective(graph: &Graph, params: &QaoaParams) -> Result<f64> {
    expected_zz_sum(&prepare_qaoa_state(graph, params)?, graph)
}

/// A compiled QAOA circuit for one graph and depth.
///
/// The cost layer is applied as a single pass with the precomputed diagonal
/// `|E| - 2·cut(i)`, which equals the product of the per-edge `ZZ` rotations
/// because they are all diagonal. Every call that simulates the circuit bumps
/// [`QaoaCircuit::simulations`].
#[derive(Debug)]
pub struct QaoaCircuit {
    graph: Graph,
    depth: usize,
    levels: Vec<i32>,
    max_level: i32,
    simulations: Cell<u64>,
}

impl QaoaCircuit {
    pub fn new(graph: Graph, depth: usize) -> Result<Self> {
        check_graph(&graph)?;
        if depth == 0 {
            return Err(Error::InvalidArgument("circuit depth p must be at least 1".into()));
        }
        let levels = zz_diagonal(&graph)?;
        let max_level = graph.edge_count() as i32;
        Ok(QaoaCircuit {
            graph,
            depth,
            levels,
            max_level,
            simulations: Cell::new(0),
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn n_params(&self) -> usize {
        2 * self.depth
    }

    /// Full circuit simulations performed so far.
    pub fn simulations(&self) -> u64 {
        self.simulations.get()
    }

    fn split<'a>(&self, x: &'a [f64]) -> Result<(&'a [f64], &'a [f64])> {
        if x.len() != self.n_params() {
            return Err(Error::ParamCount {
                expected: self.n_params(),
                got: x.len(),
            });
        }
        Ok(x.split_at(self.depth))
    }

    /// `exp(-iγ·k)` indexed by `k + |E|`.
    fn phase_table(&self, gamma: f64) -> Vec<Complex64> {
        (-self.max_level..=self.max_level)
            .map(|k| Complex64::from_polar(1.0, -gamma * f64::from(k)))
            .collect()
    }

    fn apply_phases(&self, block: &mut [Complex64], start: usize, table: &[Complex64]) {
        for (a, &level) in block.iter_mut().zip(&self.levels[start..]) {
            *a *= table[(level + self.max_level) as usize];
        }
    }

    /// Cost layer then mixer layer, in one sweep over the state.
    fn apply_layer(&self, state: &mut StateVector, gamma: f64, beta: f64) {
        let table = self.phase_table(gamma);
        state.apply_rx_all_after(2.0 * beta, |start, block| self.apply_phases(block, start, &table));
    }

    /// Applies layers `from..p`.
    fn run_layers(&self, state: &mut StateVector, from: usize, gammas: &[f64], betas: &[f64]) {
        self.run_layers_until(state, from, self.depth, gammas, betas);
    }

    /// Applies layers `from..to`.
    fn run_layers_until(&self, state: &mut StateVector, from: usize, to: usize, gammas: &[f64], betas: &[f64]) {
        for layer in from..to {
            self.apply_layer(state, gammas[layer], betas[layer]);
        }
    }

    /// Runs the mixer of layer `from` (with `prepare` filling the state
    /// first) and every later layer, then returns `(⟨b|H|b⟩, ⟨a|H|b⟩)` for
    /// the result `b`. The reduction is folded into the last mixer sweep, so
    /// `work` is left as scratch.
    fn suffix_forms<F>(
        &self,
        work: &mut StateVector,
        a: &StateVector,
        from: usize,
        gammas: &[f64],
        betas: &[f64],
        prepare: F,
    ) -> (f64, Complex64)
    where
        F: FnMut(usize, &mut [Complex64]),
    {
        let last = self.depth - 1;
        // Four independent accumulators per sum keep the adds pipelined.
        let mut own = [0.0; 4];
        let mut cross = [Complex64::default(); 4];
        let visit = |start: usize, run: &[Complex64]| {
            let a = &a.amplitudes()[start..];
            for (k, ((b, a), &d)) in run.iter().zip(a).zip(&self.levels[start..]).enumerate() {
                let d = f64::from(d);
                own[k % 4] += b.norm_sqr() * d;
                cross[k % 4] += a.conj() * b * d;
            }
        };
        if from == last {
            work.apply_rx_all_consume(2.0 * betas[last], prepare, visit);
        } else {
            work.apply_rx_all_after(2.0 * betas[from], prepare);
            self.run_layers_until(work, from + 1, last, gammas, betas);
            let table = self.phase_table(gammas[last]);
            work.apply_rx_all_consume(
                2.0 * betas[last],
                |start, block| self.apply_phases(block, start, &table),
                visit,
            );
        }
        (own.iter().sum(), cross.iter().sum())
    }

    fn energy(&self, state: &StateVector) -> f64 {
        self.simulations.set(self.simulations.get() + 1);
        state.expect_diagonal(&self.levels)
    }

    pub fn state_flat(&self, x: &[f64]) -> Result<StateVector> {
        let (gammas, betas) = self.split(x)?;
        let mut state = StateVector::plus_state(self.graph.n())?;
        self.run_layers(&mut state, 0, gammas, betas);
        Ok(state)
    }

    pub fn state(&self, params: &QaoaParams) -> Result<StateVector> {
        self.state_flat(&params.to_flat())
    }

    /// `⟨H_C⟩` at the flat parameter vector `x`.
    pub fn objective(&self, x: &[f64]) -> Result<f64> {
        let state = self.state_flat(x)?;
        Ok(self.energy(&state))
    }

    pub fn expected_cut(&self, x: &[f64]) -> Result<f64> {
        Ok((self.graph.edge_count() as f64 - self.objective(x)?) / 2.0)
    }
}

impl ShiftRuleObjective for QaoaCircuit {
    fn n_params(&self) -> usize {
        QaoaCircuit::n_params(self)
    }

    /// Every `ZZ` occurrence of layer `j` contributes to `γ_j` and every
    /// `RX` occurrence to `β_j`. Gates inside one layer commute, so a shifted
    /// occurrence can be applied on top of the unshifted layer, sharing the
    /// prefix state up to that layer.
    ///
    /// Each generator satisfies `G² = I`, so the shifted gate is
    /// `cos δ·I - i sin δ·G`. With `a` the unshifted output and `b` the rest of
    /// the circuit applied to `G` times the prefix, the two shifted values are
    /// `cos²δ⟨a|H|a⟩ + sin²δ⟨b|H|b⟩ ± 2 sin δ cos δ Im⟨a|H|b⟩`, exactly. One
    /// suffix run per occurrence thus yields both the `+δ` and `-δ` circuits.
    fn occurrence_shift_values(&self, x: &[f64], shift: f64) -> Result<Vec<Vec<(f64, f64)>>> {
        let (gammas, betas) = self.split(x)?;
        let p = self.depth;
        let (s, c) = shift.sin_cos();
        let unshifted = self.state_flat(x)?;
        let h_aa = self.energy(&unshifted);
        let pair = |h_bb: f64, h_ab: Complex64| {
            self.simulations.set(self.simulations.get() + 1);
            let mean = c * c * h_aa + s * s * h_bb;
            let cross = 2.0 * s * c * h_ab.im;
            (mean + cross, mean - cross)
        };

        let mut values = vec![Vec::new(); 2 * p];
        let mut prefix = StateVector::plus_state(self.graph.n())?;
        let mut work = prefix.clone();
        for layer in 0..p {
            prefix
                .apply_diagonal_phase(&self.levels, self.max_level, gammas[layer])
                .expect("diagonal sized for this graph");
            for &(u, v) in self.graph.edges() {
                // Z_u Z_v on the prefix, folded into the mixer sweep.
                let source = prefix.amplitudes();
                let (h_bb, h_ab) = self.suffix_forms(&mut work, &unshifted, layer, gammas, betas, |start, block| {
                    for (k, (dst, src)) in block.iter_mut().zip(&source[start..]).enumerate() {
                        let i = start + k;
                        // Flip the sign bit where bits u and v differ.
                        let flip = ((((i >> u) ^ (i >> v)) & 1) as u64) << 63;
                        *dst = Complex64::new(
                            f64::from_bits(src.re.to_bits() ^ flip),
                            f64::from_bits(src.im.to_bits() ^ flip),
                        );
                    }
                });
                values[layer].push(pair(h_bb, h_ab));
            }

            // The mixer gate is RX(2β) = exp(-iβX), so X is the generator for β.
            prefix.apply_rx_all(2.0 * betas[layer]);
            for q in 0..self.graph.n() {
                let (h_bb, h_ab) = if layer + 1 < p {
                    let source = prefix.amplitudes();
                    let table = self.phase_table(gammas[layer + 1]);
                    self.suffix_forms(&mut work, &unshifted, layer + 1, gammas, betas, |start, block| {
                        for (k, dst) in block.iter_mut().enumerate() {
                            *dst = source[(start + k) ^ (1 << q)];
                        }
                        self.apply_phases(block, start, &table);
                    })
                } else {
                    work.copy_x_from(&prefix, q);
                    work.diagonal_forms(&unshifted, &self.levels)
                };
                values[p + layer].push(pair(h_bb, h_ab));
            }
        }
        Ok(values)
    }
}

/// Classical answers read out of an optimized QAOA state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaoaSolution {
    pub expected_cut: f64,
    /// Largest cut among the sampled bitstrings (headline metric).
    pub best_sampled: CutResult,
    /// Cut of the most frequently sampled bitstring.
    pub most_probable: CutResult,
    pub params: QaoaParams,
    pub shots: usize,
}

/// Samples the QAOA state and reports the best sampled cut, the cut of the
/// most frequent outcome and the exact expected cut.
pub fn extract_solution(graph: &Graph, params: &QaoaParams, shots: usize, seed: u64) -> Result<QaoaSolution> {
    let circuit = QaoaCircuit::new(graph.clone(), params.depth())?;
    let state = circuit.state(params)?;
    solution_from_state(graph, &state, params, shots, seed)
}

pub(crate) fn solution_from_state(
    graph: &Graph,
    state: &StateVector,
    params: &QaoaParams,
    shots: usize,
    seed: u64,
) -> Result<QaoaSolution> {
    let counts = state.sample(shots, seed)?;
    let n = graph.n();
    let evaluate = |index: usize| CutResult::evaluate(graph, Partition::from_index(index as u64, n));

    let mut best = evaluate(counts.iter().next().map(|(i, _)| i).unwrap_or(0))?;
    for (index, _) in counts.iter() {
        let cut = graph.cut_of_mask(index as u64);
        if cut > best.cut_value {
            best = evaluate(index)?;
        }
    }
    let most_probable = evaluate(counts.most_frequent())?;
    debug_assert_eq!(best.cut_value, cut_value(graph, &best.partition)?);

    Ok(QaoaSolution {
        expected_cut: expected_cut(state, graph)?,
        best_sampled: best,
        most_probable,
        params: params.clone(),
        shots,
    })
}
