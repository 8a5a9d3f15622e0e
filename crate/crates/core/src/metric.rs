//! Euclidean distance, nearest-center assignment, mean updates and the Jc
//! objective.

use std::fmt;
use std::str::FromStr;

use crate::error::{ClusterError, Result};
use crate::matrix::Matrix;

/// How the per-point error enters Jc.
///
/// `Unsquared` sums plain Euclidean distances; `Squared` sums squared
/// distances (the classical k-means inertia). Published Jc tables for Iris
/// (≈ 97.10) are in unsquared form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum MetricMode {
    #[default]
    Unsquared,
    Squared,
}

impl MetricMode {
    #[inline]
    fn point_error(self, squared_distance: f64) -> f64 {
        match self {
            MetricMode::Unsquared => squared_distance.sqrt(),
            MetricMode::Squared => squared_distance,
        }
    }
}

impl fmt::Display for MetricMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetricMode::Unsquared => "unsquared",
            MetricMode::Squared => "squared",
        })
    }
}

impl FromStr for MetricMode {
    type Err = ClusterError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unsquared" => Ok(MetricMode::Unsquared),
            "squared" => Ok(MetricMode::Squared),
            other => Err(ClusterError::invalid(format!(
                "unknown metric {other:?} (expected unsquared or squared)"
            ))),
        }
    }
}

#[inline]
pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(ClusterError::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(squared_distance(a, b).sqrt())
}

fn check_dims(points: &Matrix, centers: &Matrix) -> Result<()> {
    if points.cols() != centers.cols() {
        return Err(ClusterError::DimensionMismatch {
            expected: points.cols(),
            found: centers.cols(),
        });
    }
    if centers.rows() == 0 {
        return Err(ClusterError::invalid("at least one center is required"));
    }
    Ok(())
}

/// Point-to-cluster map plus cluster sizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    cluster_of: Vec<usize>,
    counts: Vec<usize>,
}

impl Assignment {
    pub fn new(cluster_of: Vec<usize>, k: usize) -> Result<Self> {
        let mut counts = vec![0; k];
        for &c in &cluster_of {
            *counts.get_mut(c).ok_or(ClusterError::ClusterIndex { index: c, k })? += 1;
        }
        Ok(Self { cluster_of, counts })
    }

    pub fn cluster_of(&self) -> &[usize] {
        &self.cluster_of
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn k(&self) -> usize {
        self.counts.len()
    }

    pub fn n(&self) -> usize {
        self.cluster_of.len()
    }

    pub fn non_empty(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }
}

/// Maps each point to its nearest center; ties go to the lower center index.
pub fn assign(points: &Matrix, centers: &Matrix) -> Result<Assignment> {
    check_dims(points, centers)?;
    let k = centers.rows();
    let mut counts = vec![0; k];
    let cluster_of = points
        .iter_rows()
        .map(|p| {
            let mut best = 0;
            let mut best_d = squared_distance(p, centers.row(0));
            for j in 1..k {
                let d = squared_distance(p, centers.row(j));
                if d < best_d {
                    best = j;
                    best_d = d;
                }
            }
            counts[best] += 1;
            best
        })
        .collect();
    Ok(Assignment { cluster_of, counts })
}

pub fn compute_jc(points: &Matrix, centers: &Matrix, assignment: &Assignment, mode: MetricMode) -> Result<f64> {
    check_dims(points, centers)?;
    if assignment.n() != points.rows() {
        return Err(ClusterError::DimensionMismatch {
            expected: points.rows(),
            found: assignment.n(),
        });
    }
    let k = centers.rows();
    points
        .iter_rows()
        .zip(assignment.cluster_of())
        .try_fold(0.0, |acc, (p, &c)| {
            if c >= k {
                return Err(ClusterError::ClusterIndex { index: c, k });
            }
            Ok(acc + mode.point_error(squared_distance(p, centers.row(c))))
        })
}

/// Replaces every center by the mean of its members.
///
/// A cluster left empty is re-seeded at the point lying farthest from its own
/// assigned center in `current`; several empty clusters take the farthest,
/// second farthest, ... points in turn (ties to the lower point index).
pub fn recompute_centers(points: &Matrix, assignment: &Assignment, current: &Matrix) -> Result<Matrix> {
    if points.rows() == 0 {
        return Err(ClusterError::EmptyDataset);
    }
    check_dims(points, current)?;
    let k = current.rows();
    if assignment.k() != k || assignment.n() != points.rows() {
        return Err(ClusterError::DimensionMismatch {
            expected: k,
            found: assignment.k(),
        });
    }
    let mut centers = Matrix::zeros(k, points.cols());
    for (p, &c) in points.iter_rows().zip(assignment.cluster_of()) {
        for (s, v) in centers.row_mut(c).iter_mut().zip(p) {
            *s += v;
        }
    }
    for (j, &count) in assignment.counts().iter().enumerate() {
        if count > 0 {
            centers.row_mut(j).iter_mut().for_each(|s| *s /= count as f64);
        }
    }

    let empty: Vec<usize> = (0..k).filter(|&j| assignment.counts()[j] == 0).collect();
    if !empty.is_empty() {
        let mut by_distance: Vec<(usize, f64)> = points
            .iter_rows()
            .zip(assignment.cluster_of())
            .map(|(p, &c)| squared_distance(p, current.row(c)))
            .enumerate()
            .collect();
        // stable sort keeps lower indices first among equal distances
        by_distance.sort_by(|a, b| b.1.total_cmp(&a.1));
        for (slot, &j) in empty.iter().enumerate() {
            let (idx, _) = by_distance[slot % by_distance.len()];
            centers.row_mut(j).copy_from_slice(points.row(idx));
        }
    }
    Ok(centers)
}

/// A clustering: centers, the membership of every point and its Jc.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    pub centers: Matrix,
    pub assignment: Assignment,
    pub jc: f64,
    pub metric_mode: MetricMode,
}

impl ClusterModel {
    /// Assigns `points` to `centers` and scores the result.
    pub fn evaluate(points: &Matrix, centers: Matrix, mode: MetricMode) -> Result<Self> {
        let assignment = assign(points, &centers)?;
        let jc = compute_jc(points, &centers, &assignment, mode)?;
        Ok(Self {
            centers,
            assignment,
            jc,
            metric_mode: mode,
        })
    }

    pub fn k(&self) -> usize {
        self.centers.rows()
    }

    /// Jc of the same centers and memberships under another metric mode.
    pub fn jc_in(&self, points: &Matrix, mode: MetricMode) -> Result<f64> {
        compute_jc(points, &self.centers, &self.assignment, mode)
    }

    /// Moves every center onto the data point nearest to it, then reassigns.
    pub fn snap_to_medoids(&self, points: &Matrix) -> Result<Self> {
        let mut centers = self.centers.clone();
        for j in 0..centers.rows() {
            let target = centers.row(j).to_vec();
            let nearest = points
                .iter_rows()
                .enumerate()
                .map(|(i, p)| (i, squared_distance(p, &target)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .map(|(i, _)| i)
                .ok_or(ClusterError::EmptyDataset)?;
            centers.row_mut(j).copy_from_slice(points.row(nearest));
        }
        Self::evaluate(points, centers, self.metric_mode)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn distance_examples() {
        assert_eq!(distance(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(distance(&[1.5, -2.0], &[1.5, -2.0]).unwrap(), 0.0);
        assert_eq!(distance(&[1.0], &[-1.0]).unwrap(), 2.0);
        assert!(distance(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn assign_examples() {
        let centers = m(&[&[0.0, 0.0], &[10.0, 0.0]]);
        assert_eq!(assign(&m(&[&[1.0, 0.0]]), &centers).unwrap().cluster_of(), &[0]);
        assert_eq!(assign(&m(&[&[5.0, 0.0]]), &centers).unwrap().cluster_of(), &[0]);
        let pts = m(&[&[1.0, 2.0], &[-3.0, 4.0], &[9.0, 9.0]]);
        let a = assign(&pts, &m(&[&[0.0, 0.0]])).unwrap();
        assert_eq!(a.cluster_of(), &[0, 0, 0]);
        assert_eq!(a.counts(), &[3]);
        assert!(assign(&pts, &m(&[&[0.0]])).is_err());
    }

    #[test]
    fn jc_examples() {
        let pts = m(&[&[0.0, 0.0], &[4.0, 0.0]]);
        let c = m(&[&[2.0, 0.0]]);
        let a = assign(&pts, &c).unwrap();
        assert_eq!(compute_jc(&pts, &c, &a, MetricMode::Unsquared).unwrap(), 4.0);
        assert_eq!(compute_jc(&pts, &c, &a, MetricMode::Squared).unwrap(), 8.0);

        let a = assign(&pts, &pts).unwrap();
        for mode in [MetricMode::Unsquared, MetricMode::Squared] {
            assert_eq!(compute_jc(&pts, &pts, &a, mode).unwrap(), 0.0);
        }
    }

    #[test]
    fn jc_rejects_out_of_range_assignment() {
        let pts = m(&[&[0.0], &[1.0]]);
        let a = Assignment::new(vec![0, 1], 2).unwrap();
        assert!(matches!(
            compute_jc(&pts, &m(&[&[0.0]]), &a, MetricMode::Squared),
            Err(ClusterError::ClusterIndex { index: 1, k: 1 })
        ));
        assert!(Assignment::new(vec![0, 3], 2).is_err());
    }

    #[test]
    fn recompute_examples() {
        let pts = m(&[&[0.0, 0.0], &[2.0, 2.0]]);
        let a = Assignment::new(vec![0, 0], 1).unwrap();
        assert_eq!(recompute_centers(&pts, &a, &m(&[&[9.0, 9.0]])).unwrap().row(0), &[1.0, 1.0]);

        let single = m(&[&[3.0, -1.0]]);
        let a = Assignment::new(vec![0], 1).unwrap();
        assert_eq!(recompute_centers(&single, &a, &single).unwrap().row(0), &[3.0, -1.0]);
    }

    #[test]
    fn empty_cluster_reseeds_to_farthest_point() {
        let pts = m(&[&[0.0, 0.0], &[1.0, 0.0]]);
        let a = Assignment::new(vec![0, 0], 2).unwrap();
        let current = m(&[&[0.0, 0.0], &[50.0, 50.0]]);
        let c = recompute_centers(&pts, &a, &current).unwrap();
        assert_eq!(c.row(0), &[0.5, 0.0]);
        assert_eq!(c.row(1), &[1.0, 0.0]);
    }

    #[test]
    fn medoid_snap() {
        let pts = m(&[&[0.0], &[1.0], &[10.0]]);
        let model = ClusterModel::evaluate(&pts, m(&[&[0.4], &[8.0]]), MetricMode::Squared).unwrap();
        let snapped = model.snap_to_medoids(&pts).unwrap();
        assert_eq!(snapped.centers.as_slice(), &[0.0, 10.0]);
        assert_eq!(snapped.jc, 1.0);
    }

    #[test]
    fn metric_mode_parse() {
        assert_eq!("squared".parse::<MetricMode>().unwrap(), MetricMode::Squared);
        assert_eq!(MetricMode::Unsquared.to_string(), "unsquared");
        assert!("cubed".parse::<MetricMode>().is_err());
    }

    fn instance() -> impl Strategy<Value = (Matrix, Matrix)> {
        (1usize..4, 1usize..5, 1usize..30).prop_flat_map(|(d, k, n)| {
            (
                proptest::collection::vec(-10.0f64..10.0, n * d),
                proptest::collection::vec(-10.0f64..10.0, k * d),
            )
                .prop_map(move |(p, c)| (Matrix::new(n, d, p).unwrap(), Matrix::new(k, d, c).unwrap()))
        })
    }

    proptest! {
        #[test]
        fn assignment_is_nearest((pts, centers) in instance()) {
            let a = assign(&pts, &centers).unwrap();
            prop_assert_eq!(a.counts().iter().sum::<usize>(), pts.rows());
            for (p, &c) in pts.iter_rows().zip(a.cluster_of()) {
                let own = distance(p, centers.row(c)).unwrap();
                for other in centers.iter_rows() {
                    prop_assert!(own <= distance(p, other).unwrap());
                }
            }
        }

        #[test]
        fn cauchy_schwarz_bound((pts, centers) in instance()) {
            let a = assign(&pts, &centers).unwrap();
            let un = compute_jc(&pts, &centers, &a, MetricMode::Unsquared).unwrap();
            let sq = compute_jc(&pts, &centers, &a, MetricMode::Squared).unwrap();
            prop_assert!(un <= (pts.rows() as f64 * sq).sqrt() * (1.0 + 1e-12) + 1e-12);
        }

        #[test]
        fn lloyd_step_never_increases((pts, centers) in instance()) {
            let a = assign(&pts, &centers).unwrap();
            let before = compute_jc(&pts, &centers, &a, MetricMode::Squared).unwrap();
            let next = recompute_centers(&pts, &a, &centers).unwrap();
            let a2 = assign(&pts, &next).unwrap();
            let after = compute_jc(&pts, &next, &a2, MetricMode::Squared).unwrap();
            prop_assert!(after <= before * (1.0 + 1e-12) + 1e-12);
        }

        /// The mean minimizes squared error: no point of a coarse grid around
        /// it does better for a single cluster.
        #[test]
        fn mean_beats_grid(points in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..12)) {
            let rows: Vec<[f64; 2]> = points.iter().map(|&(x, y)| [x, y]).collect();
            let pts = Matrix::from_rows(&rows).unwrap();
            let a = Assignment::new(vec![0; rows.len()], 1).unwrap();
            let mean = recompute_centers(&pts, &a, &Matrix::zeros(1, 2)).unwrap();
            let best = compute_jc(&pts, &mean, &a, MetricMode::Squared).unwrap();
            for gx in -20..=20 {
                for gy in -20..=20 {
                    let c = Matrix::new(1, 2, vec![gx as f64 * 0.25, gy as f64 * 0.25]).unwrap();
                    let jc = compute_jc(&pts, &c, &a, MetricMode::Squared).unwrap();
                    prop_assert!(best <= jc + 1e-9);
                }
            }
        }
    }
}
