//! Gate kernels on the dense simulator, the ZZ decomposition and sampling.

use maxcut_qaoa::statevector::StateVector;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Bell pair: H on qubit 0, then CNOT 0 -> 1.
    let mut bell = StateVector::basis_state(2, 0)?;
    bell.apply_hadamard(0)?;
    bell.apply_cnot(0, 1)?;
    let counts = bell.sample(1000, 7)?;
    println!("Bell pair, 1000 shots: {:?}", counts.by_bitstring());

    // exp(-iγ ZZ) against CNOT · RZ(2γ) · CNOT.
    let gamma = 0.613;
    let mut direct = StateVector::plus_state(3)?;
    direct.apply_rx(2, 0.4)?;
    let mut decomposed = direct.clone();
    direct.apply_zz(0, 2, gamma)?;
    decomposed.apply_cnot(0, 2)?;
    decomposed.apply_rz(2, 2.0 * gamma)?;
    decomposed.apply_cnot(0, 2)?;
    let gap = direct
        .amplitudes()
        .iter()
        .zip(decomposed.amplitudes())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    println!("max |ZZ - CNOT RZ CNOT| = {gap:.2e}");

    let mut s = StateVector::plus_state(4)?;
    for q in 0..4 {
        s.apply_rx(q, 0.3 * q as f64)?;
        s.apply_rz(q, 1.1)?;
    }
    println!("norm after 8 gates: {:.15}", s.norm());
    Ok(())
}
