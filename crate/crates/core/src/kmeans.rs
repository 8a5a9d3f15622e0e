//! Classical k-means: random initial centers, then alternate assignment and
//! mean updates until the squared error stops moving.

use rand::Rng;

use crate::error::{ClusterError, Result};
use crate::matrix::Matrix;
use crate::metric::{assign, compute_jc, recompute_centers, Assignment, ClusterModel, MetricMode};

/// Convergence threshold on the change of squared Jc between iterations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    Absolute(f64),
    /// Multiple of the squared Jc of the first iteration.
    Relative(f64),
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::Relative(1e-6)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KmeansParams {
    pub epsilon: Tolerance,
    pub max_iterations: usize,
    /// Mode of the reported Jc. Convergence is always judged on squared Jc.
    pub metric_mode: MetricMode,
}

impl Default for KmeansParams {
    fn default() -> Self {
        Self {
            epsilon: Tolerance::default(),
            max_iterations: 100,
            metric_mode: MetricMode::Unsquared,
        }
    }
}

impl KmeansParams {
    pub fn validate(&self) -> Result<()> {
        let eps = match self.epsilon {
            Tolerance::Absolute(e) | Tolerance::Relative(e) => e,
        };
        if !(eps >= 0.0) {
            return Err(ClusterError::invalid(format!("epsilon must be >= 0, got {eps}")));
        }
        if self.max_iterations == 0 {
            return Err(ClusterError::invalid("max_iterations must be at least 1"));
        }
        Ok(())
    }
}

/// Picks `k` distinct rows uniformly at random as initial centers.
pub fn init_random<R: Rng + ?Sized>(points: &Matrix, k: usize, rng: &mut R) -> Result<Matrix> {
    if k == 0 {
        return Err(ClusterError::invalid("k must be at least 1"));
    }
    if k > points.rows() {
        return Err(ClusterError::TooMany {
            requested: k,
            available: points.rows(),
        });
    }
    let idx = rand::seq::index::sample(rng, points.rows(), k).into_vec();
    Ok(points.select_rows(&idx))
}

#[derive(Debug, Clone, PartialEq)]
pub struct KmeansReport {
    pub model: ClusterModel,
    pub iterations: usize,
    /// Squared Jc after each iteration's mean update.
    pub squared_jc_history: Vec<f64>,
    pub converged: bool,
}

/// Runs k-means from `init_centers` and returns the final model.
pub fn kmeans_run(points: &Matrix, init_centers: &Matrix, params: &KmeansParams) -> Result<ClusterModel> {
    kmeans_run_traced(points, init_centers, params).map(|r| r.model)
}

/// Each iteration assigns every point to its nearest center, moves the
/// centers to the means of their members and scores that pair in squared
/// mode. The loop stops once the score changes by less than the tolerance,
/// the memberships stop changing, or `max_iterations` is reached.
pub fn kmeans_run_traced(points: &Matrix, init_centers: &Matrix, params: &KmeansParams) -> Result<KmeansReport> {
    params.validate()?;
    let k = init_centers.rows();
    if k > points.rows() {
        return Err(ClusterError::TooMany {
            requested: k,
            available: points.rows(),
        });
    }
    let mut centers = init_centers.clone();
    let mut previous: Option<Assignment> = None;
    let mut history = Vec::new();
    let mut threshold = None;
    let mut converged = false;

    let mut assignment;
    loop {
        assignment = assign(points, &centers)?;
        let stable = previous.as_ref() == Some(&assignment);
        centers = recompute_centers(points, &assignment, &centers)?;
        let jc = compute_jc(points, &centers, &assignment, MetricMode::Squared)?;
        let eps = *threshold.get_or_insert(match params.epsilon {
            Tolerance::Absolute(e) => e,
            Tolerance::Relative(r) => r * jc,
        });
        let delta = history.last().map(|&prev: &f64| (jc - prev).abs());
        history.push(jc);
        if stable || delta.is_some_and(|d| d < eps) {
            converged = true;
            break;
        }
        if history.len() >= params.max_iterations {
            break;
        }
        previous = Some(assignment);
    }

    let jc = compute_jc(points, &centers, &assignment, params.metric_mode)?;
    Ok(KmeansReport {
        iterations: history.len(),
        squared_jc_history: history,
        converged,
        model: ClusterModel {
            centers,
            assignment,
            jc,
            metric_mode: params.metric_mode,
        },
    })
}

/// Random initialization followed by [`kmeans_run`].
pub fn kmeans<R: Rng + ?Sized>(points: &Matrix, k: usize, params: &KmeansParams, rng: &mut R) -> Result<ClusterModel> {
    let init = init_random(points, k, rng)?;
    kmeans_run(points, &init, params)
}
