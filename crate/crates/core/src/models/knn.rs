//! K-nearest-neighbour regression on standardized features.

use crate::dataset::Dataset;
use crate::error::{Error, Result};

use super::standardize::Standardizer;
use super::{ModelKind, Weighting};

pub(super) fn fit(data: &Dataset, k: usize, weighting: Weighting) -> Result<(ModelKind, Vec<String>)> {
    let n = data.n_rows();
    if k > n {
        return Err(Error::InsufficientData {
            context: "knn".to_string(),
            need: k,
            got: n,
        });
    }
    let std = Standardizer::fit(&data.rows.view());
    let train = std.transform(&data.rows.view());
    Ok((
        ModelKind::Knn {
            k,
            weighting,
            means: std.means,
            scales: std.scales,
            train,
            targets: data.target.to_vec(),
        },
        Vec::new(),
    ))
}

/// Neighbour prediction for one probe row on raw feature scale.
///
/// Neighbours are the `k` smallest Euclidean distances in standardized
/// space, ties broken by training-row index. `inverse_distance` weighting
/// falls back to averaging exact matches when any neighbour distance is
/// zero.
pub(super) fn predict(
    k: usize,
    weighting: Weighting,
    means: &[f64],
    scales: &[f64],
    train: &[f64],
    targets: &[f64],
    row: &[f64],
) -> f64 {
    let d = means.len();
    let n = targets.len();
    let probe: Vec<f64> = row
        .iter()
        .enumerate()
        .map(|(j, v)| (v - means[j]) / scales[j])
        .collect();

    let mut dist: Vec<(f64, usize)> = (0..n)
        .map(|i| {
            let base = i * d;
            let sq: f64 = (0..d)
                .map(|j| {
                    let diff = train[base + j] - probe[j];
                    diff * diff
                })
                .sum();
            (sq, i)
        })
        .collect();
    dist.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite distances").then(a.1.cmp(&b.1)));
    let nearest = &dist[..k];

    match weighting {
        Weighting::Uniform => {
            nearest.iter().map(|&(_, i)| targets[i]).sum::<f64>() / k as f64
        }
        Weighting::InverseDistance => {
            let exact: Vec<usize> = nearest
                .iter()
                .filter(|(sq, _)| *sq == 0.0)
                .map(|&(_, i)| i)
                .collect();
            if !exact.is_empty() {
                return exact.iter().map(|&i| targets[i]).sum::<f64>() / exact.len() as f64;
            }
            let mut num = 0.0;
            let mut den = 0.0;
            for &(sq, i) in nearest {
                let w = 1.0 / sq.sqrt();
                num += w * targets[i];
                den += w;
            }
            num / den
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::dataset::synthetic::generate_synthetic_mill;
    use crate::models::{fit, ParamValue, RegressorSpec};
    use approx::assert_relative_eq;

    #[test]
    fn one_neighbour_reproduces_training_targets() {
        let data = generate_synthetic_mill(40, 21, 10.0).unwrap();
        let mut spec = RegressorSpec::new("knn").unwrap();
        spec.set("k", ParamValue::Real(1.0)).unwrap();
        let model = fit(&spec, &data).unwrap();
        let preds = model.predict_dataset(&data).unwrap();
        for (p, y) in preds.iter().zip(data.target.iter()) {
            assert_relative_eq!(p, y);
        }
    }

    #[test]
    fn uniform_weighting_averages_the_neighbourhood() {
        let data = generate_synthetic_mill(40, 22, 10.0).unwrap();
        let mut spec = RegressorSpec::new("knn").unwrap();
        spec.set("k", ParamValue::Real(40.0)).unwrap();
        let model = fit(&spec, &data).unwrap();
        let pred = model.predict_row(&data.rows.row(0).to_vec()).unwrap();
        let mean = data.target.sum() / 40.0;
        assert_relative_eq!(pred, mean, epsilon = 1e-9);
    }

    #[test]
    fn inverse_distance_prefers_the_closest_point() {
        let data = generate_synthetic_mill(60, 23, 10.0).unwrap();
        let mut spec = RegressorSpec::new("knn").unwrap();
        spec.set("k", ParamValue::Real(5.0)).unwrap();
        spec.set_str("weighting", "inverse_distance").unwrap();
        let model = fit(&spec, &data).unwrap();
        // Probing a training row hits distance zero: exact-match fallback.
        let pred = model.predict_row(&data.rows.row(7).to_vec()).unwrap();
        assert_relative_eq!(pred, data.target[7]);
    }

    #[test]
    fn k_larger_than_training_set_is_rejected() {
        let data = generate_synthetic_mill(10, 24, 10.0).unwrap();
        let mut spec = RegressorSpec::new("knn").unwrap();
        spec.set("k", ParamValue::Real(11.0)).unwrap();
        assert!(fit(&spec, &data).is_err());
    }
}
