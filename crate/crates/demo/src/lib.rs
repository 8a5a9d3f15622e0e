//! wasm-bindgen bindings for the browser demo. Points cross the boundary as
//! flat row-major `f64` arrays of 2-D coordinates.

use evoclust::bench::Algorithm;
use evoclust::gaclust::ga_cluster;
use evoclust::kmeans::kmeans;
use evoclust::refine::{igk_traced, improved_kmeans_traced};
use evoclust::synth::{gaussian_blobs, BlobSpec};
use evoclust::{ClusterError, GaParams, KmeansParams, Matrix, MetricMode, RefineParams};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wasm_bindgen::prelude::*;

const DIM: usize = 2;
pub const EXTENT: f64 = 100.0;

/// Result of one clustering run.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct Clustering {
    centers: Vec<f64>,
    working: Vec<f64>,
    assignment: Vec<u32>,
    jc: f64,
}

#[wasm_bindgen]
impl Clustering {
    /// Final centers, flat.
    #[wasm_bindgen(getter)]
    pub fn centers(&self) -> Vec<f64> {
        self.centers.clone()
    }

    /// The K′ centers before merging; empty for the unrefined algorithms.
    #[wasm_bindgen(getter)]
    pub fn working(&self) -> Vec<f64> {
        self.working.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn assignment(&self) -> Vec<u32> {
        self.assignment.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn jc(&self) -> f64 {
        self.jc
    }
}

fn to_matrix(points: &[f64]) -> Result<Matrix, ClusterError> {
    if points.is_empty() || points.len() % DIM != 0 {
        return Err(ClusterError::InvalidParameter(format!(
            "expected a non-empty flat array of {DIM}-D points, got {} values",
            points.len()
        )));
    }
    Matrix::new(points.len() / DIM, DIM, points.to_vec())
}

fn refine_params(k: usize, k_prime: usize) -> RefineParams {
    RefineParams {
        k_prime,
        j_subsamples: 2,
        ..RefineParams::new(k)
    }
}

/// `n` points in `k` Gaussian blobs inside a square of side [`EXTENT`].
pub fn blobs(k: usize, n: usize, spread: f64, seed: u64) -> Result<Vec<f64>, ClusterError> {
    let spec = BlobSpec {
        k,
        n,
        d: DIM,
        extent: EXTENT,
        std_dev: spread,
    };
    let ds = gaussian_blobs(&spec, &mut ChaCha8Rng::seed_from_u64(seed))?;
    Ok(ds.points().as_slice().to_vec())
}

pub fn cluster_points(points: &[f64], algorithm: &str, k: usize, k_prime: usize, seed: u64) -> Result<Clustering, ClusterError> {
    let pts = to_matrix(points)?;
    let algorithm: Algorithm = algorithm.parse()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (model, working) = match algorithm {
        Algorithm::Kmeans => (kmeans(&pts, k, &KmeansParams::default(), &mut rng)?, None),
        Algorithm::Ga => (ga_cluster(&pts, k, &GaParams::default(), MetricMode::Unsquared, &mut rng)?, None),
        Algorithm::ImprovedKmeans => {
            let r = improved_kmeans_traced(&pts, &refine_params(k, k_prime), &mut rng)?;
            (r.model, Some(r.working))
        }
        Algorithm::Igk => {
            let r = igk_traced(&pts, &refine_params(k, k_prime), &mut rng)?;
            (r.model, Some(r.working))
        }
    };
    Ok(Clustering {
        centers: model.centers.as_slice().to_vec(),
        working: working.map(|w| w.centers.as_slice().to_vec()).unwrap_or_default(),
        assignment: model.assignment.cluster_of().iter().map(|&c| c as u32).collect(),
        jc: model.jc,
    })
}

/// Average Jc of each algorithm over `trials` paired seeds, in the order
/// kmeans, ga, improved_kmeans, igk.
pub fn compare_algorithms(points: &[f64], k: usize, k_prime: usize, trials: usize, seed: u64) -> Result<Vec<f64>, ClusterError> {
    if trials == 0 {
        return Err(ClusterError::InvalidParameter("trials must be at least 1".into()));
    }
    Algorithm::ALL
        .iter()
        .map(|a| {
            let mut sum = 0.0;
            for t in 0..trials as u64 {
                sum += cluster_points(points, a.name(), k, k_prime, seed + t)?.jc;
            }
            Ok(sum / trials as f64)
        })
        .collect()
}

fn js(e: ClusterError) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = generateBlobs)]
pub fn generate_blobs(k: usize, n: usize, spread: f64, seed: u64) -> Result<Vec<f64>, JsError> {
    blobs(k, n, spread, seed).map_err(js)
}

#[wasm_bindgen]
pub fn cluster(points: &[f64], algorithm: &str, k: usize, k_prime: usize, seed: u64) -> Result<Clustering, JsError> {
    cluster_points(points, algorithm, k, k_prime, seed).map_err(js)
}

#[wasm_bindgen]
pub fn compare(points: &[f64], k: usize, k_prime: usize, trials: usize, seed: u64) -> Result<Vec<f64>, JsError> {
    compare_algorithms(points, k, k_prime, trials, seed).map_err(js)
}
