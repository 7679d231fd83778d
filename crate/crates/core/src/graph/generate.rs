use rand::Rng as _;

use super::Graph;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Samples G(n, p): each of the n(n-1)/2 vertex pairs, visited in
/// lexicographic order, is kept when a uniform draw from [0, 1) falls below
/// `edge_prob`. The result is a pure function of the three arguments.
pub fn generate_erdos_renyi(n: usize, edge_prob: f64, seed: u64) -> Result<Graph> {
    if !(0.0..=1.0).contains(&edge_prob) {
        return Err(Error::InvalidArgument(format!(
            "edge probability {edge_prob} outside [0, 1]"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("vertex count must be positive".into()));
    }
    let mut rng = rng_from_seed(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < edge_prob {
                edges.push((u, v));
            }
        }
    }
    Ok(Graph::new(n, edges)?.with_seed(Some(seed)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extreme_probabilities() {
        assert_eq!(generate_erdos_renyi(10, 0.0, 5).unwrap().edge_count(), 0);
        assert_eq!(generate_erdos_renyi(10, 1.0, 5).unwrap().edge_count(), 45);
    }

    #[test]
    fn deterministic_under_seed() {
        let a = generate_erdos_renyi(10, 0.5, 42).unwrap();
        let b = generate_erdos_renyi(10, 0.5, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.seed(), Some(42));
        assert_ne!(a, generate_erdos_renyi(10, 0.5, 43).unwrap());
    }

    #[test]
    fn rejects_bad_probability() {
        assert!(generate_erdos_renyi(10, 1.5, 0).is_err());
        assert!(generate_erdos_renyi(10, -0.1, 0).is_err());
        assert!(generate_erdos_renyi(10, f64::NAN, 0).is_err());
    }

    #[test]
    fn mean_edge_count_within_binomial_band() {
        let total: usize = (0..1000)
            .map(|s| generate_erdos_renyi(10, 0.5, s).unwrap().edge_count())
            .sum();
        let mean = total as f64 / 1000.0;
        let sigma = (45.0f64 * 0.25).sqrt();
        assert!((mean - 22.5).abs() <= 3.0 * sigma, "mean {mean}");
    }
}
