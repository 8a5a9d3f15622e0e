//! Seeded Gaussian-mixture generators used by tests, the benchmark harness
//! and the browser demo.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::Dataset;
use crate::error::{ClusterError, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlobSpec {
    pub k: usize,
    pub n: usize,
    pub d: usize,
    /// Component means are drawn uniformly from `[0, extent]^d`.
    pub extent: f64,
    /// Per-coordinate standard deviation of every component.
    pub std_dev: f64,
}

/// Draws `n` points split as evenly as possible over `k` isotropic Gaussian
/// components. Labels carry the component index.
pub fn gaussian_blobs<R: Rng + ?Sized>(spec: &BlobSpec, rng: &mut R) -> Result<Dataset> {
    if spec.k == 0 || spec.d == 0 || spec.n < spec.k {
        return Err(ClusterError::invalid("blobs need k >= 1, d >= 1 and n >= k"));
    }
    let noise = Normal::new(0.0, spec.std_dev).map_err(|e| ClusterError::invalid(e.to_string()))?;
    let means: Vec<Vec<f64>> = (0..spec.k)
        .map(|_| (0..spec.d).map(|_| rng.gen_range(0.0..=spec.extent)).collect())
        .collect();
    let mut data = Vec::with_capacity(spec.n * spec.d);
    let mut labels = Vec::with_capacity(spec.n);
    for i in 0..spec.n {
        let c = i % spec.k;
        data.extend(means[c].iter().map(|m| m + noise.sample(rng)));
        labels.push(c.to_string());
    }
    Dataset::new(
        format!("blobs-k{}-n{}", spec.k, spec.n),
        Matrix::new(spec.n, spec.d, data)?,
    )?
    .with_labels(labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn shape_and_determinism() {
        let spec = BlobSpec {
            k: 3,
            n: 10,
            d: 2,
            extent: 10.0,
            std_dev: 0.5,
        };
        let a = gaussian_blobs(&spec, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!((a.n(), a.d()), (10, 2));
        assert_eq!(a.labels().unwrap()[4], "1");
        assert_eq!(a, gaussian_blobs(&spec, &mut ChaCha8Rng::seed_from_u64(1)).unwrap());
        assert!(gaussian_blobs(&BlobSpec { n: 2, ..spec }, &mut ChaCha8Rng::seed_from_u64(1)).is_err());
    }
}
