//! Local outlier factor scoring over standardized feature space.
//!
//! Scores near 1 indicate points whose local density matches that of their
//! neighbours; scores well above 1 indicate points that are markedly sparser
//! than their surroundings and are therefore outlier candidates.

use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::models::standardize::Standardizer;

/// Floor applied to the mean reachability distance before inversion, so that
/// clusters of exactly coincident points produce finite local densities.
const DENSITY_FLOOR: f64 = 1e-12;

/// Outcome of a local-outlier-factor pass over a dataset.
#[derive(Debug, Clone)]
pub struct LofResult {
    /// One score per row, in row order. Values near 1 are inliers.
    pub scores: Vec<f64>,
    /// Neighbourhood size the scores were computed with.
    pub k: usize,
    /// Default removal threshold: the 99th percentile of `scores`, so that
    /// roughly the top 1% of rows are flagged. Callers may override it when
    /// filtering.
    pub threshold: f64,
}

impl LofResult {
    /// Indices of rows whose score strictly exceeds `threshold`.
    pub fn flagged(&self, threshold: f64) -> Vec<usize> {
        self.scores
            .iter()
            .enumerate()
            .filter(|(_, &s)| s > threshold)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Computes local outlier factor scores for every row of `data`.
///
/// Features are standardized to zero mean and unit variance before distances
/// are measured, so the scoring is invariant to affine rescaling of any
/// column. Distances are Euclidean in the standardized space. Neighbourhoods
/// include every point tied at the k-th nearest distance, matching the
/// classical definition.
///
/// Requires `1 <= k < n_rows`.
pub fn lof_scores(data: &Dataset, k: usize) -> Result<LofResult> {
    let n = data.n_rows();
    if k < 1 || k >= n {
        return Err(Error::InvalidNeighbourCount { k, n });
    }

    let standardizer = Standardizer::fit(&data.rows.view());
    let z = standardizer.transform(&data.rows.view());
    let d = data.n_features();

    // Pass 1: per point, the k-distance and the tie-inclusive neighbour set.
    let neighbourhoods: Vec<(f64, Vec<u32>)> = (0..n)
        .into_par_iter()
        .map(|p| {
            let mut dists: Vec<(f64, u32)> = Vec::with_capacity(n - 1);
            let zp = &z[p * d..(p + 1) * d];
            for o in 0..n {
                if o == p {
                    continue;
                }
                let zo = &z[o * d..(o + 1) * d];
                let mut sq = 0.0;
                for j in 0..d {
                    let diff = zp[j] - zo[j];
                    sq += diff * diff;
                }
                dists.push((sq.sqrt(), o as u32));
            }
            dists.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let k_distance = dists[k - 1].0;
            let neighbours: Vec<u32> = dists
                .iter()
                .take_while(|(dist, _)| *dist <= k_distance)
                .map(|&(_, o)| o)
                .collect();
            (k_distance, neighbours)
        })
        .collect();

    // Pass 2: local reachability density of every point.
    let lrd: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|p| {
            let (_, ref neighbours) = neighbourhoods[p];
            let zp = &z[p * d..(p + 1) * d];
            let mut total = 0.0;
            for &o in neighbours {
                let o = o as usize;
                let zo = &z[o * d..(o + 1) * d];
                let mut sq = 0.0;
                for j in 0..d {
                    let diff = zp[j] - zo[j];
                    sq += diff * diff;
                }
                let reach = sq.sqrt().max(neighbourhoods[o].0);
                total += reach;
            }
            let mean_reach = total / neighbours.len() as f64;
            1.0 / mean_reach.max(DENSITY_FLOOR)
        })
        .collect();

    // Pass 3: score = mean neighbour density relative to own density.
    let scores: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|p| {
            let (_, ref neighbours) = neighbourhoods[p];
            let mean_neighbour_lrd =
                neighbours.iter().map(|&o| lrd[o as usize]).sum::<f64>() / neighbours.len() as f64;
            mean_neighbour_lrd / lrd[p]
        })
        .collect();

    let threshold = percentile(&scores, 0.99);
    Ok(LofResult {
        scores,
        k,
        threshold,
    })
}

/// Returns a copy of `data` with every row whose score strictly exceeds
/// `threshold` removed. Row order is preserved. Fails if the scores do not
/// align with the dataset or if the threshold would remove every row.
pub fn remove_outliers(data: &Dataset, result: &LofResult, threshold: f64) -> Result<Dataset> {
    if result.scores.len() != data.n_rows() {
        return Err(Error::DimensionMismatch {
            context: "outlier scores".into(),
            expected: data.n_rows(),
            actual: result.scores.len(),
        });
    }
    let keep: Vec<usize> = (0..data.n_rows())
        .filter(|&i| result.scores[i] <= threshold)
        .collect();
    if keep.is_empty() {
        return Err(Error::EmptyInput {
            context: "outlier removal left no rows".into(),
        });
    }
    data.select_rows(&keep)
}

/// Linear-interpolated percentile of a slice, `q` in [0, 1].
fn percentile(values: &[f64], q: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{FeatureSpec, Schema};
    use ndarray::{Array1, Array2};
    use rand::Rng;

    fn points_dataset(points: &[Vec<f64>]) -> Dataset {
        let d = points[0].len();
        let features: Vec<FeatureSpec> = (0..d)
            .map(|j| FeatureSpec::new(&format!("x{j}"), "", -1e9, 1e9))
            .collect();
        let schema = Schema::new(features, FeatureSpec::new("y", "", -1e9, 1e9));
        let n = points.len();
        let mut rows = Array2::zeros((n, d));
        for (i, p) in points.iter().enumerate() {
            for (j, &v) in p.iter().enumerate() {
                rows[[i, j]] = v;
            }
        }
        Dataset::new(schema, rows, Array1::zeros(n)).unwrap()
    }

    /// A 6x6 jittered grid (36 homogeneous inliers) plus one far outlier.
    fn cluster_with_outlier() -> Vec<Vec<f64>> {
        let mut rng = crate::seeding::rng_from(11, &[1]);
        let mut pts = Vec::new();
        for i in 0..6 {
            for j in 0..6 {
                pts.push(vec![
                    i as f64 + rng.gen_range(-0.05..0.05),
                    j as f64 + rng.gen_range(-0.05..0.05),
                ]);
            }
        }
        pts.push(vec![40.0, 40.0]);
        pts
    }

    #[test]
    fn planted_outlier_scores_high_and_cluster_scores_low() {
        let data = points_dataset(&cluster_with_outlier());
        let result = lof_scores(&data, 5).unwrap();
        let (cluster, outlier) = result.scores.split_at(36);
        assert!(outlier[0] > 10.0, "outlier score {}", outlier[0]);
        for &s in cluster {
            assert!(s < 2.0, "cluster score {s}");
        }
    }

    #[test]
    fn uniform_grid_interior_scores_near_one() {
        let mut pts = Vec::new();
        for i in 0..10 {
            for j in 0..10 {
                pts.push(vec![i as f64, j as f64]);
            }
        }
        let data = points_dataset(&pts);
        let result = lof_scores(&data, 4).unwrap();
        for i in 2..8 {
            for j in 2..8 {
                let s = result.scores[i * 10 + j];
                assert!((0.9..=1.1).contains(&s), "interior ({i},{j}) score {s}");
            }
        }
    }

    #[test]
    fn scores_are_invariant_to_translation_and_scaling() {
        let pts = cluster_with_outlier();
        let shifted: Vec<Vec<f64>> = pts
            .iter()
            .map(|p| vec![p[0] * 250.0 + 1000.0, p[1] * 0.001 - 3.0])
            .collect();
        let base = lof_scores(&points_dataset(&pts), 5).unwrap();
        let moved = lof_scores(&points_dataset(&shifted), 5).unwrap();
        for (a, b) in base.scores.iter().zip(&moved.scores) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn coincident_points_stay_finite() {
        let mut pts = vec![vec![0.0, 0.0]; 6];
        pts.push(vec![1.0, 1.0]);
        let data = points_dataset(&pts);
        let result = lof_scores(&data, 3).unwrap();
        for &s in &result.scores {
            assert!(s.is_finite());
        }
        // Coincident points all share the capped density, so their relative
        // score is exactly 1.
        for &s in &result.scores[..6] {
            assert!((s - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn neighbour_count_must_be_in_range() {
        let data = points_dataset(&[vec![0.0], vec![1.0], vec![2.0]]);
        assert!(matches!(
            lof_scores(&data, 3),
            Err(Error::InvalidNeighbourCount { k: 3, n: 3 })
        ));
        assert!(matches!(
            lof_scores(&data, 0),
            Err(Error::InvalidNeighbourCount { k: 0, n: 3 })
        ));
    }

    #[test]
    fn removal_preserves_order_and_rejects_empty_result() {
        let data = points_dataset(&cluster_with_outlier());
        let result = lof_scores(&data, 5).unwrap();
        let cleaned = remove_outliers(&data, &result, result.threshold).unwrap();
        assert_eq!(cleaned.n_rows(), 36);
        for i in 0..cleaned.n_rows() {
            assert_eq!(cleaned.rows[[i, 0]], data.rows[[i, 0]]);
        }
        assert!(matches!(
            remove_outliers(&data, &result, -1.0),
            Err(Error::EmptyInput { .. })
        ));
    }

    #[test]
    fn default_threshold_flags_about_one_percent() {
        let data = points_dataset(&cluster_with_outlier());
        let result = lof_scores(&data, 5).unwrap();
        let flagged = result.flagged(result.threshold);
        assert_eq!(flagged, vec![36]);
    }
}
