//! Multi-sampling refinement of initial centers, clustering at an inflated
//! cluster count K′ and nearest-center merging down to k.
//!
//! [`improved_kmeans`] uses k-means as the inner algorithm; [`igk`] uses
//! GA-clustering.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::subsample_indices;
use crate::error::{ClusterError, Result};
use crate::gaclust::{ga_cluster, ga_cluster_traced, GaParams};
use crate::kmeans::{init_random, kmeans_run, KmeansParams};
use crate::matrix::Matrix;
use crate::metric::{assign, compute_jc, recompute_centers, squared_distance, ClusterModel, MetricMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InnerAlgorithm {
    Kmeans,
    #[default]
    Genetic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineParams {
    pub k: usize,
    /// Working cluster count used before merging; normally greater than `k`.
    pub k_prime: usize,
    pub j_subsamples: usize,
    pub inner: InnerAlgorithm,
    pub kmeans: KmeansParams,
    pub ga: GaParams,
    /// Mode of GA fitness and of the reported Jc.
    pub metric_mode: MetricMode,
    /// Snap the final centers onto their nearest data points.
    pub medoid_snap: bool,
    /// After merging, run the inner algorithm once more on the full data at
    /// `k`, starting from the merged centers. K-means runs from them; the GA
    /// gets them injected into its population and its best individual is
    /// then fine-tuned by k-means if that lowers Jc. When false the result is
    /// the single reassignment pass of [`merge_to_k`].
    pub converge_after_merge: bool,
}

impl RefineParams {
    /// Defaults: K′ = 2k, four subsamples.
    pub fn new(k: usize) -> Self {
        Self {
            k,
            k_prime: 2 * k,
            j_subsamples: 4,
            inner: InnerAlgorithm::default(),
            kmeans: KmeansParams::default(),
            ga: GaParams::default(),
            metric_mode: MetricMode::Unsquared,
            medoid_snap: false,
            converge_after_merge: true,
        }
    }

    /// `k_prime == k` is accepted and simply skips merging.
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(ClusterError::invalid("k must be at least 1"));
        }
        if self.k_prime < self.k {
            return Err(ClusterError::invalid(format!(
                "k' ({}) must not be smaller than k ({})",
                self.k_prime, self.k
            )));
        }
        if self.j_subsamples == 0 {
            return Err(ClusterError::invalid("number of subsamples must be at least 1"));
        }
        self.kmeans.validate()?;
        self.ga.validate()
    }
}

/// The winning candidate of the multi-sampling step.
#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    pub centers: Matrix,
    /// Squared Jc of every candidate on the full dataset.
    pub candidate_jc: Vec<f64>,
    pub chosen: usize,
}

/// Clusters each of `J` disjoint subsamples at K′ with the inner algorithm.
/// Subsample `m` gets its own ChaCha stream `m` under a seed drawn from
/// `rng`, so the result does not depend on execution order.
pub fn candidate_centers<R: Rng + ?Sized>(points: &Matrix, params: &RefineParams, rng: &mut R) -> Result<Vec<Matrix>> {
    params.validate()?;
    let blocks = subsample_indices(points.rows(), params.j_subsamples, rng)?;
    let smallest = blocks.iter().map(Vec::len).min().unwrap_or(0);
    if params.k_prime > smallest {
        return Err(ClusterError::TooMany {
            requested: params.k_prime,
            available: smallest,
        });
    }
    let stream_seed: u64 = rng.gen();

    let run = |m: usize, idx: &Vec<usize>| -> Result<Matrix> {
        let sample = points.select_rows(idx);
        let mut stream = ChaCha8Rng::seed_from_u64(stream_seed);
        stream.set_stream(m as u64);
        let model = match params.inner {
            InnerAlgorithm::Kmeans => {
                let init = init_random(&sample, params.k_prime, &mut stream)?;
                kmeans_run(&sample, &init, &params.kmeans)?
            }
            InnerAlgorithm::Genetic => ga_cluster(&sample, params.k_prime, &params.ga, params.metric_mode, &mut stream)?,
        };
        Ok(model.centers)
    };

    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        blocks.par_iter().enumerate().map(|(m, idx)| run(m, idx)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        blocks.iter().enumerate().map(|(m, idx)| run(m, idx)).collect()
    }
}

/// Index of the candidate with the smallest full-data squared Jc (first one
/// on ties), together with all the scores.
pub fn select_min_jc(points: &Matrix, candidates: &[Matrix]) -> Result<(usize, Vec<f64>)> {
    let scores = candidates
        .iter()
        .map(|c| {
            let a = assign(points, c)?;
            compute_jc(points, c, &a, MetricMode::Squared)
        })
        .collect::<Result<Vec<f64>>>()?;
    let chosen = scores
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (i, &s)| match best {
            Some((_, b)) if b <= s => best,
            _ => Some((i, s)),
        })
        .map(|(i, _)| i)
        .ok_or_else(|| ClusterError::invalid("no candidates to choose from"))?;
    Ok((chosen, scores))
}

pub fn refine_initial_centers<R: Rng + ?Sized>(points: &Matrix, params: &RefineParams, rng: &mut R) -> Result<Refinement> {
    let mut candidates = candidate_centers(points, params, rng)?;
    let (chosen, candidate_jc) = select_min_jc(points, &candidates)?;
    Ok(Refinement {
        centers: candidates.swap_remove(chosen),
        candidate_jc,
        chosen,
    })
}

/// One merge performed by [`CenterMerger`].
#[derive(Debug, Clone, PartialEq)]
pub struct MergeStep {
    /// Index (before the merge) of the surviving slot, always `< removed`.
    pub kept: usize,
    pub removed: usize,
    pub weights: (usize, usize),
    pub centers: (Vec<f64>, Vec<f64>),
    pub merged: Vec<f64>,
}

/// Agglomerates centers by repeatedly fusing the closest pair into their
/// size-weighted mean.
#[derive(Debug, Clone)]
pub struct CenterMerger {
    centers: Vec<Vec<f64>>,
    weights: Vec<usize>,
    group_of: Vec<usize>,
}

impl CenterMerger {
    pub fn new(centers: &Matrix, weights: &[usize]) -> Result<Self> {
        if weights.len() != centers.rows() {
            return Err(ClusterError::DimensionMismatch {
                expected: centers.rows(),
                found: weights.len(),
            });
        }
        Ok(Self {
            centers: centers.to_rows(),
            weights: weights.to_vec(),
            group_of: (0..centers.rows()).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn weights(&self) -> &[usize] {
        &self.weights
    }

    /// Current slot of each original cluster.
    pub fn group_of(&self) -> &[usize] {
        &self.group_of
    }

    /// Merges the closest pair of centers (lowest index pair on ties).
    /// Returns `None` when fewer than two centers remain.
    pub fn merge_nearest(&mut self) -> Option<MergeStep> {
        let n = self.centers.len();
        if n < 2 {
            return None;
        }
        let mut pair = (0, 1);
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in i + 1..n {
                let d = squared_distance(&self.centers[i], &self.centers[j]);
                if d < best {
                    best = d;
                    pair = (i, j);
                }
            }
        }
        let (i, j) = pair;
        let (wi, wj) = (self.weights[i], self.weights[j]);
        let merged: Vec<f64> = if wi + wj == 0 {
            self.centers[i].iter().zip(&self.centers[j]).map(|(a, b)| 0.5 * (a + b)).collect()
        } else {
            let total = (wi + wj) as f64;
            self.centers[i]
                .iter()
                .zip(&self.centers[j])
                .map(|(a, b)| (wi as f64 * a + wj as f64 * b) / total)
                .collect()
        };
        let removed_center = self.centers.remove(j);
        let kept_center = std::mem::replace(&mut self.centers[i], merged.clone());
        self.weights[i] = wi + wj;
        self.weights.remove(j);
        for g in &mut self.group_of {
            if *g == j {
                *g = i;
            } else if *g > j {
                *g -= 1;
            }
        }
        Some(MergeStep {
            kept: i,
            removed: j,
            weights: (wi, wj),
            centers: (kept_center, removed_center),
            merged,
        })
    }

    pub fn centers_matrix(&self) -> Matrix {
        Matrix::from_rows(&self.centers).expect("merger rows share one dimension")
    }
}

/// Merges the closest clusters until `k` remain, then reassigns every point,
/// moves centers to the means and reassigns once more.
pub fn merge_to_k(model: &ClusterModel, points: &Matrix, k: usize) -> Result<ClusterModel> {
    if k == 0 {
        return Err(ClusterError::invalid("k must be at least 1"));
    }
    if k > model.k() {
        return Err(ClusterError::TooMany {
            requested: k,
            available: model.k(),
        });
    }
    let mut merger = CenterMerger::new(&model.centers, model.assignment.counts())?;
    while merger.len() > k {
        merger.merge_nearest();
    }
    let merged = merger.centers_matrix();
    let first = assign(points, &merged)?;
    let centers = recompute_centers(points, &first, &merged)?;
    ClusterModel::evaluate(points, centers, model.metric_mode)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefineReport {
    pub refinement: Refinement,
    /// The K′-cluster model on the full data, before merging.
    pub working: ClusterModel,
    pub model: ClusterModel,
}

fn finish<R: Rng + ?Sized>(working: &ClusterModel, points: &Matrix, params: &RefineParams, rng: &mut R) -> Result<ClusterModel> {
    let mut merged = merge_to_k(working, points, params.k)?;
    if params.converge_after_merge {
        merged = match params.inner {
            InnerAlgorithm::Kmeans => {
                let kparams = KmeansParams {
                    metric_mode: params.metric_mode,
                    ..params.kmeans
                };
                kmeans_run(points, &merged.centers, &kparams)?
            }
            InnerAlgorithm::Genetic => {
                let evolved = ga_cluster_traced(
                    points,
                    params.k,
                    &params.ga,
                    params.metric_mode,
                    std::slice::from_ref(&merged.centers),
                    rng,
                )?
                .model;
                // k-means fine tuning is kept only if it lowers Jc
                let kparams = KmeansParams {
                    metric_mode: params.metric_mode,
                    ..params.kmeans
                };
                let tuned = kmeans_run(points, &evolved.centers, &kparams)?;
                if tuned.jc < evolved.jc {
                    tuned
                } else {
                    evolved
                }
            }
        };
    }
    if params.medoid_snap {
        merged = merged.snap_to_medoids(points)?;
    }
    Ok(merged)
}

pub fn improved_kmeans<R: Rng + ?Sized>(points: &Matrix, params: &RefineParams, rng: &mut R) -> Result<ClusterModel> {
    improved_kmeans_traced(points, params, rng).map(|r| r.model)
}

/// Refines K′ initial centers with k-means on the subsamples, runs k-means on
/// the full data from them and merges down to k. `params.inner` is ignored.
pub fn improved_kmeans_traced<R: Rng + ?Sized>(points: &Matrix, params: &RefineParams, rng: &mut R) -> Result<RefineReport> {
    let params = RefineParams {
        inner: InnerAlgorithm::Kmeans,
        ..*params
    };
    let refinement = refine_initial_centers(points, &params, rng)?;
    let kparams = KmeansParams {
        metric_mode: params.metric_mode,
        ..params.kmeans
    };
    let working = kmeans_run(points, &refinement.centers, &kparams)?;
    let model = finish(&working, points, &params, rng)?;
    Ok(RefineReport {
        refinement,
        working,
        model,
    })
}

pub fn igk<R: Rng + ?Sized>(points: &Matrix, params: &RefineParams, rng: &mut R) -> Result<ClusterModel> {
    igk_traced(points, params, rng).map(|r| r.model)
}

/// Refines K′ initial centers with GA-clustering on the subsamples, runs
/// GA-clustering on the full data with the refined set injected into the
/// initial population and merges down to k. `params.inner` is ignored.
pub fn igk_traced<R: Rng + ?Sized>(points: &Matrix, params: &RefineParams, rng: &mut R) -> Result<RefineReport> {
    let params = RefineParams {
        inner: InnerAlgorithm::Genetic,
        ..*params
    };
    let refinement = refine_initial_centers(points, &params, rng)?;
    let working = ga_cluster_traced(
        points,
        params.k_prime,
        &params.ga,
        params.metric_mode,
        std::slice::from_ref(&refinement.centers),
        rng,
    )?
    .model;
    let model = finish(&working, points, &params, rng)?;
    Ok(RefineReport {
        refinement,
        working,
        model,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::Assignment;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn line_model(centers: &[f64], counts: &[usize]) -> (ClusterModel, Matrix) {
        // place `count` points exactly on each center so means stay put
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (j, (&c, &n)) in centers.iter().zip(counts).enumerate() {
            for _ in 0..n {
                rows.push([c]);
                labels.push(j);
            }
        }
        let points = Matrix::from_rows(&rows).unwrap();
        let centers = Matrix::new(centers.len(), 1, centers.to_vec()).unwrap();
        let assignment = Assignment::new(labels, centers.rows()).unwrap();
        let jc = compute_jc(&points, &centers, &assignment, MetricMode::Squared).unwrap();
        (
            ClusterModel {
                centers,
                assignment,
                jc,
                metric_mode: MetricMode::Squared,
            },
            points,
        )
    }

    #[test]
    fn weighted_merge() {
        let c = Matrix::from_rows(&[[0.0, 0.0], [4.0, 0.0]]).unwrap();
        let mut m = CenterMerger::new(&c, &[3, 1]).unwrap();
        let step = m.merge_nearest().unwrap();
        assert_eq!(step.merged, vec![1.0, 0.0]);
        assert_eq!(m.weights(), &[4]);
        assert!(m.merge_nearest().is_none());
    }

    #[test]
    fn nearest_pairs_merge_first() {
        let c = Matrix::new(4, 1, vec![0.0, 1.0, 10.0, 11.0]).unwrap();
        let mut m = CenterMerger::new(&c, &[1, 3, 2, 2]).unwrap();
        m.merge_nearest();
        m.merge_nearest();
        let mut got: Vec<f64> = m.centers().iter().map(|c| c[0]).collect();
        got.sort_by(f64::total_cmp);
        assert_eq!(got, vec![0.75, 10.5]);
        assert_eq!(m.group_of(), &[0, 0, 1, 1]);
    }

    #[test]
    fn merge_to_k_on_line() {
        let (model, pts) = line_model(&[0.0, 1.0, 10.0, 11.0], &[1, 3, 2, 2]);
        let out = merge_to_k(&model, &pts, 2).unwrap();
        assert_eq!(out.centers.as_slice(), &[0.75, 10.5]);
        assert_eq!(out.assignment.counts(), &[4, 4]);
    }

    #[test]
    fn merge_to_same_k_only_reassigns() {
        let (model, pts) = line_model(&[0.0, 5.0], &[2, 2]);
        let out = merge_to_k(&model, &pts, 2).unwrap();
        assert_eq!(out.centers, model.centers);
        assert_eq!(out.assignment, model.assignment);
        assert!(merge_to_k(&model, &pts, 3).is_err());
        assert!(merge_to_k(&model, &pts, 0).is_err());
    }

    #[test]
    fn argmin_of_candidates() {
        let pts = Matrix::new(3, 1, vec![0.0, 1.0, 2.0]).unwrap();
        let cands = vec![
            Matrix::new(1, 1, vec![5.0]).unwrap(),
            Matrix::new(1, 1, vec![1.0]).unwrap(),
            Matrix::new(1, 1, vec![1.0]).unwrap(),
            Matrix::new(1, 1, vec![3.0]).unwrap(),
        ];
        let (i, scores) = select_min_jc(&pts, &cands).unwrap();
        assert_eq!(i, 1);
        assert_eq!(scores, vec![50.0, 2.0, 2.0, 14.0]);
    }

    fn blobs(seed: u64) -> Matrix {
        let mut r = rng(seed);
        let mut rows = Vec::new();
        for &(cx, cy) in &[(0.0, 0.0), (30.0, 5.0)] {
            for _ in 0..40 {
                rows.push([cx + r.gen_range(-1.0..1.0), cy + r.gen_range(-1.0..1.0)]);
            }
        }
        Matrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn single_subsample_has_one_candidate() {
        let pts = blobs(1);
        let params = RefineParams {
            j_subsamples: 1,
            inner: InnerAlgorithm::Kmeans,
            ..RefineParams::new(2)
        };
        let r = refine_initial_centers(&pts, &params, &mut rng(2)).unwrap();
        assert_eq!((r.chosen, r.candidate_jc.len()), (0, 1));
        assert_eq!(r.centers.rows(), 4);
    }

    #[test]
    fn k_prime_must_fit_subsamples() {
        let pts = blobs(1);
        let params = RefineParams {
            k_prime: 30,
            j_subsamples: 4,
            ..RefineParams::new(2)
        };
        assert!(matches!(
            refine_initial_centers(&pts, &params, &mut rng(2)),
            Err(ClusterError::TooMany { requested: 30, available: 20 })
        ));
        let bad = RefineParams {
            k_prime: 1,
            ..RefineParams::new(2)
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn degenerate_settings() {
        let pts = Matrix::new(3, 1, vec![0.0, 4.0, 9.0]).unwrap();
        let params = RefineParams {
            k_prime: 3,
            j_subsamples: 1,
            ga: GaParams {
                generations: 0,
                ..Default::default()
            },
            ..RefineParams::new(3)
        };
        assert_eq!(improved_kmeans(&pts, &params, &mut rng(3)).unwrap().jc, 0.0);
        assert_eq!(igk(&pts, &params, &mut rng(3)).unwrap().jc, 0.0);
    }

    #[test]
    fn both_variants_find_two_blobs() {
        let pts = blobs(4);
        let params = RefineParams {
            k_prime: 3,
            j_subsamples: 2,
            ga: GaParams {
                generations: 20,
                ..Default::default()
            },
            ..RefineParams::new(2)
        };
        for model in [
            improved_kmeans(&pts, &params, &mut rng(5)).unwrap(),
            igk(&pts, &params, &mut rng(5)).unwrap(),
        ] {
            assert_eq!(model.k(), 2);
            assert_eq!(model.assignment.counts(), &[40, 40]);
        }
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let pts = blobs(6);
        let params = RefineParams {
            ga: GaParams {
                generations: 10,
                ..Default::default()
            },
            ..RefineParams::new(2)
        };
        assert_eq!(
            igk_traced(&pts, &params, &mut rng(7)).unwrap(),
            igk_traced(&pts, &params, &mut rng(7)).unwrap()
        );
    }
}
