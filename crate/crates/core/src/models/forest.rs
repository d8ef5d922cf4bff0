//! Single regression trees and averaged tree ensembles.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::Result;
use crate::seeding::{name_tag, rng_from};

use super::tree::{
    grow_exact, prune, ColMajor, GainKind, GrowParams, SortedColumns, Tree, TreeNode,
};
use super::ModelKind;

type FitOutput = (ModelKind, Vec<String>);

/// Variance-reduction tree with optional cost-complexity pruning.
pub(super) fn fit_cart(
    data: &Dataset,
    max_depth: usize,
    min_samples_leaf: usize,
    ccp_alpha: f64,
) -> Result<FitOutput> {
    let x = ColMajor::from_rows(&data.rows.view());
    let ids: Vec<u32> = (0..data.n_rows() as u32).collect();
    let sorted = SortedColumns::build(&x, &ids);
    let targets = data.target.to_vec();
    let mut grown = grow_exact(
        &x,
        &sorted,
        &GainKind::Variance { targets: &targets },
        &GrowParams {
            max_depth,
            min_samples_leaf,
            feature_subset: None,
        },
        None,
    );
    prune(&mut grown, ccp_alpha);
    Ok((ModelKind::Cart { tree: grown.tree }, Vec::new()))
}

#[derive(Debug, Clone, Copy)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// Features examined per split; 0 selects the family default.
    pub max_features: usize,
    pub bootstrap: bool,
}

/// Bagged variance-reduction trees with per-node feature sampling.
///
/// `max_features = 0` uses `ceil(d / 3)`. Each tree owns a seed stream
/// derived from the spec seed and its index, so the ensemble is identical
/// regardless of how many worker threads build it.
pub(super) fn fit_random_forest(
    data: &Dataset,
    params: ForestParams,
    seed: u64,
) -> Result<FitOutput> {
    let n = data.n_rows();
    let d = data.n_features();
    let x = ColMajor::from_rows(&data.rows.view());
    let targets = data.target.to_vec();
    let k = if params.max_features == 0 {
        d.div_ceil(3)
    } else {
        params.max_features.min(d)
    };
    let full_ids: Vec<u32> = (0..n as u32).collect();

    let trees: Vec<Tree> = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_from(seed, &[name_tag("random_forest"), t as u64]);
            let ids: Vec<u32> = if params.bootstrap {
                (0..n).map(|_| rng.gen_range(0..n) as u32).collect()
            } else {
                full_ids.clone()
            };
            let sorted = SortedColumns::build(&x, &ids);
            let subset = if k < d { Some(k) } else { None };
            grow_exact(
                &x,
                &sorted,
                &GainKind::Variance { targets: &targets },
                &GrowParams {
                    max_depth: params.max_depth,
                    min_samples_leaf: params.min_samples_leaf,
                    feature_subset: subset,
                },
                Some(&mut rng),
            )
            .tree
        })
        .collect();

    Ok((ModelKind::Forest { trees }, Vec::new()))
}

/// Extremely randomized trees: no bagging, one uniformly drawn threshold
/// per candidate feature, best candidate by variance reduction.
///
/// `max_features = 0` examines every feature.
pub(super) fn fit_extra_trees(
    data: &Dataset,
    params: ForestParams,
    seed: u64,
) -> Result<FitOutput> {
    let n = data.n_rows();
    let d = data.n_features();
    let x = ColMajor::from_rows(&data.rows.view());
    let targets = data.target.to_vec();
    let k = if params.max_features == 0 {
        d
    } else {
        params.max_features.min(d)
    };

    let trees: Vec<Tree> = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_from(seed, &[name_tag("extra_trees"), t as u64]);
            let rows: Vec<u32> = (0..n as u32).collect();
            let mut nodes = Vec::new();
            grow_random(
                &x,
                &targets,
                rows,
                0,
                params.max_depth,
                params.min_samples_leaf.max(1),
                k,
                &mut rng,
                &mut nodes,
            );
            Tree { nodes }
        })
        .collect();

    Ok((ModelKind::Forest { trees }, Vec::new()))
}

/// Recursive random-threshold growth; returns the arena index of the node
/// it created.
#[allow(clippy::too_many_arguments)]
fn grow_random(
    x: &ColMajor,
    targets: &[f64],
    rows: Vec<u32>,
    depth: usize,
    max_depth: usize,
    msl: usize,
    k: usize,
    rng: &mut ChaCha8Rng,
    nodes: &mut Vec<TreeNode>,
) -> u32 {
    let count = rows.len();
    let sum: f64 = rows.iter().map(|&r| targets[r as usize]).sum();
    let mean = sum / count as f64;
    let constant = rows
        .iter()
        .map(|&r| targets[r as usize])
        .all(|t| t == targets[rows[0] as usize]);

    let at = nodes.len() as u32;
    nodes.push(TreeNode::Leaf { value: mean });
    if depth >= max_depth || count < 2 * msl || constant {
        return at;
    }

    let d = x.n_features();
    let mut features = if k < d {
        rand::seq::index::sample(rng, d, k).into_vec()
    } else {
        (0..d).collect::<Vec<_>>()
    };
    features.sort_unstable();

    let parent_score = sum * sum / count as f64;
    let mut best: Option<(f64, usize, f64)> = None;
    for &j in &features {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &r in &rows {
            let v = x.value(j, r);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if lo == hi {
            continue;
        }
        let threshold = lo + rng.gen::<f64>() * (hi - lo);
        if threshold < lo || threshold >= hi {
            continue; // rounding pushed the draw onto an edge
        }
        let mut cl = 0usize;
        let mut sl = 0.0f64;
        for &r in &rows {
            if x.value(j, r) <= threshold {
                cl += 1;
                sl += targets[r as usize];
            }
        }
        let cr = count - cl;
        if cl < msl || cr < msl {
            continue;
        }
        let sr = sum - sl;
        let gain = (sl * sl / cl as f64 + sr * sr / cr as f64) - parent_score;
        if best.map_or(true, |(g, _, _)| gain > g) {
            best = Some((gain, j, threshold));
        }
    }

    let Some((gain, feature, threshold)) = best else {
        return at;
    };
    if gain <= 0.0 {
        return at;
    }

    let (left_rows, right_rows): (Vec<u32>, Vec<u32>) = rows
        .into_iter()
        .partition(|&r| x.value(feature, r) <= threshold);
    let left = grow_random(x, targets, left_rows, depth + 1, max_depth, msl, k, rng, nodes);
    let right = grow_random(x, targets, right_rows, depth + 1, max_depth, msl, k, rng, nodes);
    nodes[at as usize] = TreeNode::Split {
        feature: feature as u32,
        threshold,
        left,
        right,
    };
    at
}

/// Mean-squared-error permutation importance needs refits; forests also
/// expose how often each feature splits, a cheap structural diagnostic.
pub fn split_counts(trees: &[Tree], n_features: usize) -> Vec<usize> {
    let mut counts = vec![0usize; n_features];
    for tree in trees {
        for node in &tree.nodes {
            if let TreeNode::Split { feature, .. } = node {
                counts[*feature as usize] += 1;
            }
        }
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::synthetic::generate_synthetic_mill;
    use crate::metrics::compute_metrics;
    use crate::models::{fit, ParamValue, RegressorSpec};

    fn r2_on_train(model: &crate::models::FittedModel, data: &Dataset) -> f64 {
        let preds = model.predict_dataset(data).unwrap();
        compute_metrics(&preds, data.target.as_slice().unwrap())
            .unwrap()
            .r2
            .unwrap()
    }

    #[test]
    fn deep_cart_interpolates_distinct_rows() {
        let data = generate_synthetic_mill(50, 31, 5.0).unwrap();
        let mut spec = RegressorSpec::new("cart").unwrap();
        spec.set("max_depth", ParamValue::Real(30.0)).unwrap();
        let model = fit(&spec, &data).unwrap();
        let preds = model.predict_dataset(&data).unwrap();
        for (p, y) in preds.iter().zip(data.target.iter()) {
            assert_eq!(p, y);
        }
    }

    #[test]
    fn forest_beats_its_mean_baseline_and_is_deterministic() {
        let data = generate_synthetic_mill(300, 32, 20.0).unwrap();
        let mut spec = RegressorSpec::new("random_forest").unwrap();
        spec.set("n_trees", ParamValue::Real(30.0)).unwrap();
        let spec = spec.with_seed(3);
        let a = fit(&spec, &data).unwrap();
        let b = fit(&spec, &data).unwrap();
        assert_eq!(a.kind, b.kind);
        assert!(r2_on_train(&a, &data) > 0.5);
    }

    #[test]
    fn forest_seed_changes_the_ensemble() {
        let data = generate_synthetic_mill(120, 33, 20.0).unwrap();
        let mut spec = RegressorSpec::new("random_forest").unwrap();
        spec.set("n_trees", ParamValue::Real(10.0)).unwrap();
        let a = fit(&spec.clone().with_seed(1), &data).unwrap();
        let b = fit(&spec.with_seed(2), &data).unwrap();
        assert_ne!(a.kind, b.kind);
    }

    #[test]
    fn single_unbagged_full_feature_forest_equals_cart() {
        let data = generate_synthetic_mill(150, 34, 15.0).unwrap();
        let mut rf = RegressorSpec::new("random_forest").unwrap();
        for (key, value) in [
            ("n_trees", 1.0),
            ("bootstrap", 0.0),
            ("max_features", 20.0),
            ("max_depth", 6.0),
        ] {
            rf.set(key, ParamValue::Real(value)).unwrap();
        }
        let forest = fit(&rf, &data).unwrap();
        let cart = fit(&RegressorSpec::new("cart").unwrap(), &data).unwrap();
        let fp = forest.predict_dataset(&data).unwrap();
        let cp = cart.predict_dataset(&data).unwrap();
        for (a, b) in fp.iter().zip(&cp) {
            assert_eq!(a, b, "degenerate forest must reduce to the single tree");
        }
    }

    #[test]
    fn extra_trees_fit_the_signal_and_respect_leaf_minimum() {
        let data = generate_synthetic_mill(250, 35, 20.0).unwrap();
        let mut spec = RegressorSpec::new("extra_trees").unwrap();
        spec.set("n_trees", ParamValue::Real(30.0)).unwrap();
        spec.set("min_samples_leaf", ParamValue::Real(5.0)).unwrap();
        let model = fit(&spec.with_seed(9), &data).unwrap();
        assert!(r2_on_train(&model, &data) > 0.5);
        let ModelKind::Forest { trees } = &model.kind else {
            panic!()
        };
        let counts = split_counts(trees, 20);
        assert!(counts.iter().sum::<usize>() > 0);
    }
}
