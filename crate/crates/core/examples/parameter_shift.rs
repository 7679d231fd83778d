//! Parameter-shift gradient against central finite differences.

use maxcut_qaoa::graph::generate_erdos_renyi;
use maxcut_qaoa::optimize::{finite_difference_gradient, parameter_shift_gradient, random_init};
use maxcut_qaoa::qaoa::QaoaCircuit;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = generate_erdos_renyi(6, 0.5, 11)?;
    let circuit = QaoaCircuit::new(g.clone(), 3)?;
    let x = random_init(3, 5)?.to_flat();

    let shift = parameter_shift_gradient(&circuit, &x)?;
    let runs = circuit.simulations();
    let fd = finite_difference_gradient(|y| circuit.objective(y).expect("length checked"), &x, 1e-5)?;

    println!(
        "graph: n = {}, |E| = {}, p = 3; shift rule used {runs} simulations",
        g.n(),
        g.edge_count()
    );
    println!(
        "{:>8} {:>14} {:>14} {:>10}",
        "param", "shift rule", "finite diff", "|diff|"
    );
    for (i, (a, b)) in shift.iter().zip(&fd).enumerate() {
        let name = if i < 3 {
            format!("gamma_{}", i + 1)
        } else {
            format!("beta_{}", i - 2)
        };
        println!("{name:>8} {a:>14.9} {b:>14.9} {:>10.2e}", (a - b).abs());
    }
    Ok(())
}
