//! Fixtures shared by the benchmarks.

use sderiv_core::Quaternion;

/// Deterministic non-real points spread over `B(0, 1.5)`.
pub fn sample_points(n: usize) -> Vec<Quaternion> {
    (0..n)
        .map(|k| {
            let a = k as f64 * 0.618_033_988_749_895;
            Quaternion::new(a.sin(), 0.3 + 0.5 * (2.0 * a).cos(), 0.7 * (3.0 * a).sin(), 0.4 * (5.0 * a).cos())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    #[test]
    fn points_are_non_real() {
        assert!(super::sample_points(64).iter().all(|q| q.vector_norm() > 1e-3));
    }
}
