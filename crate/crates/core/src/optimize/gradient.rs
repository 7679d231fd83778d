use std::f64::consts::FRAC_PI_4;

use crate::error::{Error, Result};

/// Shift applied to a single gate occurrence, in parameter units.
///
/// Every parameterized QAOA gate has the form `exp(-iθG)` with `G² = I`
/// (eigenvalues ±1), for which `∂f/∂θ = f(θ + π/4) - f(θ - π/4)` exactly.
/// For the mixer this is `exp(-iβX) = RX(2β)`: β moves by π/4, the RX angle
/// by π/2.
pub const SHIFT: f64 = FRAC_PI_4;

/// An objective whose parameters each drive one or more gates with
/// two-eigenvalue (±1) generators.
pub trait ShiftRuleObjective {
    fn n_params(&self) -> usize;

    /// For each parameter, the objective value with one gate occurrence
    /// shifted by `+shift` and by `-shift`, for every occurrence sharing the
    /// parameter, in a fixed order. All other gates keep their angles.
    fn occurrence_shift_values(&self, x: &[f64], shift: f64) -> Result<Vec<Vec<(f64, f64)>>>;
}

/// Exact gradient by the parameter-shift rule.
///
/// A parameter shared by several gates gets the sum of the per-occurrence
/// shift differences (product rule). A QAOA gradient needs the `2(|E| + n)·p`
/// shifted-circuit values; [`QaoaCircuit`](crate::qaoa::QaoaCircuit) gets each
/// `±` pair from one suffix simulation, `(|E| + n)·p + 1` runs in total.
pub fn parameter_shift_gradient<O: ShiftRuleObjective + ?Sized>(objective: &O, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != objective.n_params() {
        return Err(Error::ParamCount {
            expected: objective.n_params(),
            got: x.len(),
        });
    }
    let values = objective.occurrence_shift_values(x, SHIFT)?;
    Ok(values
        .iter()
        .map(|occurrences| occurrences.iter().map(|(plus, minus)| plus - minus).sum())
        .collect())
}

/// Central differences `(f(x + h e_i) - f(x - h e_i)) / 2h`.
pub fn finite_difference_gradient<F>(mut f: F, x: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> f64,
{
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            Ok((up - down) / (2.0 * h))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_erdos_renyi, Graph};
    use crate::optimize::random_init;
    use crate::qaoa::{qaoa_objective, QaoaCircuit, QaoaParams};
    use approx::assert_abs_diff_eq;

    /// Finite differences on the gate-by-gate circuit, independent of the
    /// compiled circuit used by the shift rule.
    fn reference_gradient(graph: &Graph, x: &[f64]) -> Vec<f64> {
        finite_difference_gradient(
            |y| qaoa_objective(graph, &QaoaParams::from_flat(y).unwrap()).unwrap(),
            x,
            1e-5,
        )
        .unwrap()
    }

    fn max_deviation(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn finite_differences_on_simple_functions() {
        let g = finite_difference_gradient(|x| x.iter().map(|v| v * v).sum(), &[1.0, 2.0], 1e-5).unwrap();
        assert_abs_diff_eq!(g[0], 2.0, epsilon = 1e-6);
        assert_abs_diff_eq!(g[1], 4.0, epsilon = 1e-6);
        let zero = finite_difference_gradient(|_| 3.5, &[0.3, -2.0, 9.0], 1e-5).unwrap();
        assert!(zero.iter().all(|&v| v == 0.0));
        assert!(finite_difference_gradient(|_| 0.0, &[1.0], 0.0).is_err());
    }

    #[test]
    fn beta_derivatives_vanish_at_origin() {
        let g = generate_erdos_renyi(5, 0.6, 8).unwrap();
        let circuit = QaoaCircuit::new(g.clone(), 2).unwrap();
        let x = [0.0; 4];
        let grad = parameter_shift_gradient(&circuit, &x).unwrap();
        let fd = reference_gradient(&g, &x);
        for k in 2..4 {
            assert_abs_diff_eq!(grad[k], 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(fd[k], 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn single_edge_matches_finite_differences() {
        let g = Graph::new(2, [(0, 1)]).unwrap();
        let circuit = QaoaCircuit::new(g.clone(), 1).unwrap();
        let x = [0.3, 0.2];
        let grad = parameter_shift_gradient(&circuit, &x).unwrap();
        assert!(max_deviation(&grad, &reference_gradient(&g, &x)) < 1e-6);
        // (|E| + n)p suffix runs plus the unshifted circuit.
        assert_eq!(circuit.simulations(), (1 + 2) + 1);
    }

    #[test]
    fn triangle_depth_two_matches_finite_differences() {
        let g = Graph::complete(3).unwrap();
        let circuit = QaoaCircuit::new(g.clone(), 2).unwrap();
        let x = random_init(2, 2024).unwrap().to_flat();
        let grad = parameter_shift_gradient(&circuit, &x).unwrap();
        assert!(max_deviation(&grad, &reference_gradient(&g, &x)) < 1e-6);
        assert_eq!(circuit.simulations(), (3 + 3) * 2 + 1);
    }

    #[test]
    fn wrong_length_rejected() {
        let circuit = QaoaCircuit::new(Graph::complete(3).unwrap(), 1).unwrap();
        assert!(parameter_shift_gradient(&circuit, &[0.1, 0.2, 0.3]).is_err());
    }
}
