//! Dense statevector simulation.
//!
//! Qubit `q` is bit `q` of the basis index (little-endian). A qubit value of
//! 0 is the +1 eigenstate of Pauli Z, a value of 1 the -1 eigenstate.
//!
//! Gate conventions: `RX(θ) = exp(-iθX/2)`, `RZ(θ) = exp(-iθZ/2)` and
//! `ZZ(γ) = exp(-iγ Z⊗Z)`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::rng_from_seed;

/// Largest register the simulator will allocate (2^24 amplitudes, 256 MiB).
pub const MAX_QUBITS: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

fn check_qubit_count(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::QubitCount { n, max: MAX_QUBITS });
    }
    Ok(())
}

impl StateVector {
    /// Uniform superposition `H^⊗n |0…0⟩`.
    pub fn plus_state(n: usize) -> Result<Self> {
        check_qubit_count(n)?;
        let dim = 1usize << n;
        let amp = Complex64::new((dim as f64).sqrt().recip(), 0.0);
        Ok(StateVector {
            n_qubits: n,
            amps: vec![amp; dim],
        })
    }

    pub fn basis_state(n: usize, index: usize) -> Result<Self> {
        check_qubit_count(n)?;
        let dim = 1usize << n;
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for {n} qubits"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n_qubits: n, amps })
    }

    /// Wraps raw amplitudes; the length must be a power of two. No
    /// normalization is applied.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if !len.is_power_of_two() || len < 2 {
            return Err(Error::InvalidArgument(format!(
                "amplitude count {len} is not 2^n with n >= 1"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        check_qubit_count(n_qubits)?;
        Ok(StateVector { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Overwrites `self` with `other` without reallocating.
    pub fn copy_from(&mut self, other: &StateVector) {
        self.n_qubits = other.n_qubits;
        self.amps.clone_from(&other.amps);
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(Error::QubitIndex {
                qubit,
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }

    fn check_pair(&self, a: usize, b: usize) -> Result<()> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a == b {
            return Err(Error::SameQubit(a));
        }
        Ok(())
    }

    /// Applies a 2x2 matrix `[[m00, m01], [m10, m11]]` to qubit `q`.
    fn apply_single(&mut self, q: usize, m: [[Complex64; 2]; 2]) {
        let stride = 1usize << q;
        for block in self.amps.chunks_exact_mut(2 * stride) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x0, x1) = (*a0, *a1);
                *a0 = m[0][0] * x0 + m[0][1] * x1;
                *a1 = m[1][0] * x0 + m[1][1] * x1;
            }
        }
    }

    pub fn apply_hadamard(&mut self, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        self.apply_single(q, [[h, h], [h, -h]]);
        Ok(())
    }

    pub fn apply_rx(&mut self, q: usize, theta: f64) -> Result<()> {
        self.check_qubit(q)?;
        let (s, c) = (theta / 2.0).sin_cos();
        rx_kernel(&mut self.amps, q, c, s);
        Ok(())
    }

    /// `RX(θ)` on every qubit. Same result as looping [`apply_rx`] over the
    /// qubits, but the low qubits are handled block by block and the high
    /// qubits on gathered column tiles, so the state is streamed through
    /// memory about twice instead of `n` times.
    ///
    /// [`apply_rx`]: StateVector::apply_rx
    pub fn apply_rx_all(&mut self, theta: f64) {
        self.apply_rx_all_after(theta, |_, _| {});
    }

    /// [`apply_rx_all`](StateVector::apply_rx_all), with `prepare` run on each
    /// contiguous block (and its first index) just before the block is
    /// rotated. Folds a copy or a diagonal phase into the same sweep.
    pub(crate) fn apply_rx_all_after<F>(&mut self, theta: f64, prepare: F)
    where
        F: FnMut(usize, &mut [Complex64]),
    {
        self.rx_all_sweep(theta, prepare, |_, _| {}, true);
    }

    /// Like [`apply_rx_all_after`](StateVector::apply_rx_all_after), but the
    /// final amplitudes are handed to `visit` as contiguous runs (with their
    /// first index) instead of being kept. The state is scratch afterwards.
    pub(crate) fn apply_rx_all_consume<F, V>(&mut self, theta: f64, prepare: F, visit: V)
    where
        F: FnMut(usize, &mut [Complex64]),
        V: FnMut(usize, &[Complex64]),
    {
        self.rx_all_sweep(theta, prepare, visit, false);
    }

    fn rx_all_sweep<F, V>(&mut self, theta: f64, mut prepare: F, mut visit: V, store: bool)
    where
        F: FnMut(usize, &mut [Complex64]),
        V: FnMut(usize, &[Complex64]),
    {
        let (s, c) = (theta / 2.0).sin_cos();
        let low = self.n_qubits.min(BLOCK_QUBITS);
        let high = self.n_qubits - low;
        for (b, block) in self.amps.chunks_exact_mut(1 << low).enumerate() {
            prepare(b << low, block);
            rx_range(block, 0, low, c, s);
            if high == 0 {
                visit(b << low, block);
            }
        }
        if high == 0 {
            return;
        }
        let row_len = 1usize << low;
        let rows = 1usize << high;
        let tile_bits = TILE_BITS.min(low);
        let tile = 1usize << tile_bits;
        let mut buf = vec![Complex64::default(); rows * tile];
        for col in (0..row_len).step_by(tile) {
            for (r, dst) in buf.chunks_exact_mut(tile).enumerate() {
                dst.copy_from_slice(&self.amps[r * row_len + col..][..tile]);
            }
            rx_range(&mut buf, tile_bits, tile_bits + high, c, s);
            for (r, src) in buf.chunks_exact(tile).enumerate() {
                visit(r * row_len + col, src);
                if store {
                    self.amps[r * row_len + col..][..tile].copy_from_slice(src);
                }
            }
        }
    }

    pub fn apply_rz(&mut self, q: usize, theta: f64) -> Result<()> {
        self.check_qubit(q)?;
        let phase0 = Complex64::from_polar(1.0, -theta / 2.0);
        let phase1 = Complex64::from_polar(1.0, theta / 2.0);
        for (i, a) in self.amps.iter_mut().enumerate() {
            *a *= if (i >> q) & 1 == 0 { phase0 } else { phase1 };
        }
        Ok(())
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_pair(control, target)?;
        let (cmask, tmask) = (1usize << control, 1usize << target);
        for i in 0..self.amps.len() {
            if i & cmask != 0 && i & tmask == 0 {
                self.amps.swap(i, i | tmask);
            }
        }
        Ok(())
    }

    /// `exp(-iγ Z_u Z_v)`: phase `e^{-iγ}` where bits `u` and `v` agree and
    /// `e^{+iγ}` where they differ.
    pub fn apply_zz(&mut self, u: usize, v: usize, gamma: f64) -> Result<()> {
        self.check_pair(u, v)?;
        let same = Complex64::from_polar(1.0, -gamma);
        let differ = same.conj();
        for (i, a) in self.amps.iter_mut().enumerate() {
            *a *= if ((i >> u) ^ (i >> v)) & 1 == 0 { same } else { differ };
        }
        Ok(())
    }

    /// Multiplies amplitude `i` by `exp(-iγ·levels[i])`, where `levels` holds
    /// small integers in `-max_level..=max_level`. This is `exp(-iγH)` for a
    /// diagonal integer-valued `H`.
    pub fn apply_diagonal_phase(&mut self, levels: &[i32], max_level: i32, gamma: f64) -> Result<()> {
        if levels.len() != self.amps.len() {
            return Err(Error::InvalidArgument(format!(
                "diagonal has {} entries, state has {}",
                levels.len(),
                self.amps.len()
            )));
        }
        let table: Vec<Complex64> = (-max_level..=max_level)
            .map(|k| Complex64::from_polar(1.0, -gamma * f64::from(k)))
            .collect();
        for (a, &level) in self.amps.iter_mut().zip(levels) {
            *a *= table[(level + max_level) as usize];
        }
        Ok(())
    }

    /// `Σ_i |a_i|² d_i` for a real diagonal observable `d`.
    pub fn expect_diagonal(&self, diagonal: &[i32]) -> f64 {
        self.amps
            .iter()
            .zip(diagonal)
            .map(|(a, &d)| a.norm_sqr() * f64::from(d))
            .sum()
    }

    /// Overwrites `self` with `X_q |other⟩`.
    pub(crate) fn copy_x_from(&mut self, other: &StateVector, q: usize) {
        self.n_qubits = other.n_qubits;
        self.amps.resize(other.amps.len(), Complex64::default());
        let stride = 1usize << q;
        for (dst, src) in self
            .amps
            .chunks_exact_mut(2 * stride)
            .zip(other.amps.chunks_exact(2 * stride))
        {
            let (dlo, dhi) = dst.split_at_mut(stride);
            let (slo, shi) = src.split_at(stride);
            dlo.copy_from_slice(shi);
            dhi.copy_from_slice(slo);
        }
    }

    /// `(⟨self|D|self⟩, ⟨other|D|self⟩)` in one pass.
    pub(crate) fn diagonal_forms(&self, other: &StateVector, diagonal: &[i32]) -> (f64, Complex64) {
        let mut own = 0.0;
        let mut cross = Complex64::default();
        for ((b, a), &d) in self.amps.iter().zip(&other.amps).zip(diagonal) {
            let d = f64::from(d);
            own += b.norm_sqr() * d;
            cross += a.conj() * b * d;
        }
        (own, cross)
    }

    /// Draws `shots` basis states from the Born distribution.
    pub fn sample(&self, shots: usize, seed: u64) -> Result<SampleCounts> {
        if shots == 0 {
            return Err(Error::InvalidArgument("shot count must be positive".into()));
        }
        let mut cumulative = Vec::with_capacity(self.amps.len());
        let mut total = 0.0;
        for a in &self.amps {
            total += a.norm_sqr();
            cumulative.push(total);
        }
        let mut rng = rng_from_seed(seed);
        let mut counts = BTreeMap::new();
        for _ in 0..shots {
            let u = rng.gen::<f64>() * total;
            let index = cumulative.partition_point(|&c| c <= u).min(self.amps.len() - 1);
            *counts.entry(index).or_insert(0) += 1;
        }
        Ok(SampleCounts {
            n_qubits: self.n_qubits,
            counts,
            total_shots: shots,
        })
    }

    /// Amplitudes as `[re, im]` pairs, for debugging dumps.
    pub fn to_json(&self) -> String {
        let pairs: Vec<[f64; 2]> = self.amps.iter().map(|a| [a.re, a.im]).collect();
        serde_json::to_string(&pairs).expect("f64 pairs serialize")
    }
}

/// Qubits handled inside one contiguous block by `apply_rx_all` (64 KiB).
const BLOCK_QUBITS: usize = 11;
/// Column tile width for the high qubits; the gathered tile stays in L2.
const TILE_BITS: usize = 6;

/// `[[c, -is], [-is, c]]` on bit `q` of the slice index, written out on real
/// parts to skip the zero terms. Works on groups of four pairs so the inner
/// loop vectorizes; the arithmetic per amplitude is the same in every path.
fn rx_kernel(amps: &mut [Complex64], q: usize, c: f64, s: f64) {
    let stride = 1usize << q;
    if amps.len() < 4 {
        for block in amps.chunks_exact_mut(2 * stride) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                let (mut x0, mut x1) = ([*a0; 4], [*a1; 4]);
                rx_pairs(&mut x0, &mut x1, c, s);
                (*a0, *a1) = (x0[0], x1[0]);
            }
        }
    } else if stride >= 4 {
        for block in amps.chunks_exact_mut(2 * stride) {
            let (lo, hi) = block.split_at_mut(stride);
            for (l, h) in lo.chunks_exact_mut(4).zip(hi.chunks_exact_mut(4)) {
                rx_pairs(l.try_into().unwrap(), h.try_into().unwrap(), c, s);
            }
        }
    } else {
        // Qubit 0 or 1: both partners sit in the same group of four, and
        // every output is `c·x[i] - i s·x[i ^ stride]`.
        let partner: [usize; 4] = if q == 0 { [1, 0, 3, 2] } else { [2, 3, 0, 1] };
        for group in amps.chunks_exact_mut(4) {
            let x: [Complex64; 4] = (&*group).try_into().unwrap();
            for k in 0..4 {
                let b = x[partner[k]];
                group[k] = Complex64::new(c * x[k].re + s * b.im, c * x[k].im - s * b.re);
            }
        }
    }
}

/// RX on qubits `from..to`, two adjacent qubits per sweep where the
/// lower one has a stride of at least four.
fn rx_range(amps: &mut [Complex64], from: usize, to: usize, c: f64, s: f64) {
    let mut q = from;
    while q < to {
        if q >= 2 && q + 1 < to {
            rx2_kernel(amps, q, c, s);
            q += 2;
        } else {
            rx_kernel(amps, q, c, s);
            q += 1;
        }
    }
}

/// `RX ⊗ RX` on qubits `q` and `q + 1` (`q >= 2`). Expanding the product,
/// each output is `c²x - s²x̄ - i cs·(sum of the two one-flip partners)`,
/// where `x̄` flips both bits.
fn rx2_kernel(amps: &mut [Complex64], q: usize, c: f64, s: f64) {
    let stride = 1usize << q;
    let (cc, ss, cs) = (c * c, s * s, c * s);
    for block in amps.chunks_exact_mut(4 * stride) {
        let (lo, hi) = block.split_at_mut(2 * stride);
        let (x00, x01) = lo.split_at_mut(stride);
        let (x10, x11) = hi.split_at_mut(stride);
        let quads = x00
            .chunks_exact_mut(4)
            .zip(x01.chunks_exact_mut(4))
            .zip(x10.chunks_exact_mut(4))
            .zip(x11.chunks_exact_mut(4));
        for (((a, b), d), e) in quads {
            let a: &mut [Complex64; 4] = a.try_into().unwrap();
            let b: &mut [Complex64; 4] = b.try_into().unwrap();
            let d: &mut [Complex64; 4] = d.try_into().unwrap();
            let e: &mut [Complex64; 4] = e.try_into().unwrap();
            let (w, x, y, z) = (*a, *b, *d, *e);
            for k in 0..4 {
                let (xy, wz) = (x[k] + y[k], w[k] + z[k]);
                let out = |own: Complex64, far: Complex64, near: Complex64| {
                    Complex64::new(
                        cc * own.re - ss * far.re + cs * near.im,
                        cc * own.im - ss * far.im - cs * near.re,
                    )
                };
                a[k] = out(w[k], z[k], xy);
                b[k] = out(x[k], y[k], wz);
                d[k] = out(y[k], x[k], wz);
                e[k] = out(z[k], w[k], xy);
            }
        }
    }
}

#[inline(always)]
fn rx_pairs(x0: &mut [Complex64; 4], x1: &mut [Complex64; 4], c: f64, s: f64) {
    let (a, b) = (*x0, *x1);
    for k in 0..4 {
        x0[k] = Complex64::new(c * a[k].re + s * b[k].im, c * a[k].im - s * b[k].re);
        x1[k] = Complex64::new(c * b[k].re + s * a[k].im, c * b[k].im - s * a[k].re);
    }
}

/// Per-basis-state `Σ_{(u,v)∈E} z_u z_v = |E| - 2·cut(i)`.
pub fn zz_diagonal(graph: &Graph) -> Result<Vec<i32>> {
    check_qubit_count(graph.n())?;
    let m = graph.edge_count() as i32;
    Ok((0..1u64 << graph.n())
        .map(|i| m - 2 * graph.cut_of_mask(i) as i32)
        .collect())
}

/// Exact `⟨ψ| Σ_{(u,v)∈E} Z_u Z_v |ψ⟩`.
pub fn expected_zz_sum(state: &StateVector, graph: &Graph) -> Result<f64> {
    if graph.n() != state.n_qubits() {
        return Err(Error::SizeMismatch {
            graph: graph.n(),
            state: state.n_qubits(),
        });
    }
    let m = graph.edge_count() as f64;
    Ok(state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, a)| a.norm_sqr() * (m - 2.0 * graph.cut_of_mask(i as u64) as f64))
        .sum())
}

/// Mean cut size over the measurement distribution, `(|E| - ⟨H_C⟩) / 2`.
pub fn expected_cut(state: &StateVector, graph: &Graph) -> Result<f64> {
    Ok((graph.edge_count() as f64 - expected_zz_sum(state, graph)?) / 2.0)
}

/// Measurement outcomes keyed by basis index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleCounts {
    n_qubits: usize,
    counts: BTreeMap<usize, usize>,
    total_shots: usize,
}

impl SampleCounts {
    pub fn total_shots(&self) -> usize {
        self.total_shots
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// `(basis index, count)` in increasing index order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.counts.iter().map(|(&i, &c)| (i, c))
    }

    /// Ket-style label: qubit `n-1` first, qubit 0 last.
    pub fn bitstring(&self, index: usize) -> String {
        (0..self.n_qubits)
            .rev()
            .map(|q| if (index >> q) & 1 == 1 { '1' } else { '0' })
            .collect()
    }

    pub fn by_bitstring(&self) -> BTreeMap<String, usize> {
        self.iter().map(|(i, c)| (self.bitstring(i), c)).collect()
    }

    pub fn get(&self, bitstring: &str) -> usize {
        usize::from_str_radix(bitstring, 2)
            .ok()
            .and_then(|i| self.counts.get(&i).copied())
            .unwrap_or(0)
    }

    /// Most frequent outcome; the smallest index wins ties.
    pub fn most_frequent(&self) -> usize {
        self.iter()
            .fold((0, 0), |best, (i, c)| if c > best.1 { (i, c) } else { best })
            .0
    }
}
