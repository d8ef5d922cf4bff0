//! Gradient-boosted tree ensembles for squared loss.
//!
//! Four training schemes share one staging loop shape:
//!
//! * [`fit_gbm`] — stage trees fit pseudo-residuals by variance reduction;
//!   an optional least-squares line search rescales each stage.
//! * [`fit_regularized_gbm`] — second-order splits and leaf weights with
//!   L1/L2 shrinkage and a minimum split gain.
//! * [`fit_hgbm`] — the same pseudo-residual scheme with split search over
//!   equal-frequency histograms; chosen thresholds snap back to midpoints
//!   of the actual neighbouring values, so giving every distinct value its
//!   own bin reproduces the exact search.
//! * [`fit_ordered_gbm_traced`] — each training row's running prediction
//!   only ever aggregates rows that precede it in a random ordering,
//!   removing the self-influence bias of plain boosting; several
//!   independent orderings are averaged at prediction time.

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::Result;
use crate::seeding::{derive_seed, name_tag, rng_from};

use super::tree::{
    grow_exact, leaf_all, predict_all, split_threshold, ColMajor, GainKind, GrowParams,
    SortedColumns, Tree, TreeNode,
};
use super::ModelKind;

type FitOutput = (ModelKind, Vec<String>);

#[derive(Debug, Clone, Copy)]
pub struct BoostParams {
    pub n_stages: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub shrinkage: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct Penalties {
    pub lambda: f64,
    pub alpha: f64,
    pub gamma: f64,
}

/// Squared-loss pseudo-residuals: the targets minus the current ensemble
/// predictions. This is the quantity every stage tree is fitted to.
pub fn pseudo_residuals(targets: &[f64], predictions: &[f64]) -> Vec<f64> {
    targets
        .iter()
        .zip(predictions)
        .map(|(y, f)| y - f)
        .collect()
}

pub(super) fn fit_gbm(data: &Dataset, params: BoostParams, line_search: bool) -> Result<FitOutput> {
    let n = data.n_rows();
    let y = data.target.to_vec();
    let x = ColMajor::from_rows(&data.rows.view());
    let ids: Vec<u32> = (0..n as u32).collect();
    let sorted = SortedColumns::build(&x, &ids);
    let grow = GrowParams {
        max_depth: params.max_depth,
        min_samples_leaf: params.min_samples_leaf,
        feature_subset: None,
    };

    let f0 = data.target.sum() / n as f64;
    let mut f = vec![f0; n];
    let mut trees = Vec::with_capacity(params.n_stages);
    let mut coeffs = Vec::with_capacity(params.n_stages);

    for _ in 0..params.n_stages {
        let residuals = pseudo_residuals(&y, &f);
        let tree = grow_exact(
            &x,
            &sorted,
            &GainKind::Variance {
                targets: &residuals,
            },
            &grow,
            None,
        )
        .tree;
        let stage = predict_all(&tree, &x);
        let coeff = if line_search {
            let num: f64 = residuals.iter().zip(&stage).map(|(r, h)| r * h).sum();
            let den: f64 = stage.iter().map(|h| h * h).sum();
            if den == 0.0 {
                1.0
            } else {
                num / den
            }
        } else {
            1.0
        };
        for (fi, h) in f.iter_mut().zip(&stage) {
            *fi += params.shrinkage * (coeff * h);
        }
        coeffs.push(coeff);
        trees.push(tree);
    }

    Ok((
        ModelKind::Boosted {
            f0,
            shrinkage: params.shrinkage,
            coeffs,
            trees,
        },
        Vec::new(),
    ))
}

pub(super) fn fit_regularized_gbm(
    data: &Dataset,
    params: BoostParams,
    penalties: Penalties,
) -> Result<FitOutput> {
    let n = data.n_rows();
    let y = data.target.to_vec();
    let x = ColMajor::from_rows(&data.rows.view());
    let ids: Vec<u32> = (0..n as u32).collect();
    let sorted = SortedColumns::build(&x, &ids);
    let grow = GrowParams {
        max_depth: params.max_depth,
        min_samples_leaf: params.min_samples_leaf,
        feature_subset: None,
    };

    let f0 = data.target.sum() / n as f64;
    let mut f = vec![f0; n];
    let mut trees = Vec::with_capacity(params.n_stages);

    for _ in 0..params.n_stages {
        // Squared-loss gradient of the current ensemble; hessians are one.
        let grads: Vec<f64> = f.iter().zip(&y).map(|(fi, yi)| fi - yi).collect();
        let tree = grow_exact(
            &x,
            &sorted,
            &GainKind::SecondOrder {
                grads: &grads,
                lambda: penalties.lambda,
                alpha: penalties.alpha,
                gamma: penalties.gamma,
            },
            &grow,
            None,
        )
        .tree;
        let stage = predict_all(&tree, &x);
        for (fi, h) in f.iter_mut().zip(&stage) {
            *fi += params.shrinkage * h;
        }
        trees.push(tree);
    }

    let coeffs = vec![1.0; trees.len()];
    Ok((
        ModelKind::Boosted {
            f0,
            shrinkage: params.shrinkage,
            coeffs,
            trees,
        },
        Vec::new(),
    ))
}

/// Per-feature equal-frequency bin edges plus each row's bin index.
struct BinMap {
    edges: Vec<Vec<f64>>,
    row_bins: Vec<Vec<u16>>,
}

impl BinMap {
    fn build(x: &ColMajor, n_bins: usize) -> BinMap {
        let n = x.n_rows;
        let mut edges = Vec::with_capacity(x.n_features());
        for j in 0..x.n_features() {
            let mut values: Vec<f64> = (0..n as u32).map(|r| x.value(j, r)).collect();
            values.sort_by(|a, b| a.partial_cmp(b).expect("finite features"));
            let distinct = 1 + values.windows(2).filter(|w| w[0] != w[1]).count();
            let mut feature_edges: Vec<f64> = Vec::new();
            if distinct <= n_bins {
                // One bin per distinct value: the search is exact.
                for w in values.windows(2) {
                    if w[0] != w[1] {
                        feature_edges.push(split_threshold(w[0], w[1]));
                    }
                }
            } else {
                for i in 1..n_bins {
                    let pos = i * n / n_bins;
                    if pos > 0 && pos < n && values[pos - 1] != values[pos] {
                        let edge = split_threshold(values[pos - 1], values[pos]);
                        if feature_edges.last() != Some(&edge) {
                            feature_edges.push(edge);
                        }
                    }
                }
            }
            edges.push(feature_edges);
        }
        let row_bins = (0..x.n_features())
            .map(|j| {
                (0..n as u32)
                    .map(|r| {
                        let v = x.value(j, r);
                        edges[j].partition_point(|&e| e < v) as u16
                    })
                    .collect()
            })
            .collect();
        BinMap { edges, row_bins }
    }
}

pub(super) fn fit_hgbm(data: &Dataset, params: BoostParams, n_bins: usize) -> Result<FitOutput> {
    let n = data.n_rows();
    let y = data.target.to_vec();
    let x = ColMajor::from_rows(&data.rows.view());
    let bins = BinMap::build(&x, n_bins);

    let f0 = data.target.sum() / n as f64;
    let mut f = vec![f0; n];
    let mut trees = Vec::with_capacity(params.n_stages);

    for _ in 0..params.n_stages {
        let residuals = pseudo_residuals(&y, &f);
        let mut nodes = Vec::new();
        let rows: Vec<u32> = (0..n as u32).collect();
        grow_binned(
            &x,
            &bins,
            &residuals,
            rows,
            0,
            params.max_depth,
            params.min_samples_leaf.max(1),
            &mut nodes,
        );
        let tree = Tree { nodes };
        let stage = predict_all(&tree, &x);
        for (fi, h) in f.iter_mut().zip(&stage) {
            *fi += params.shrinkage * h;
        }
        trees.push(tree);
    }

    let coeffs = vec![1.0; trees.len()];
    Ok((
        ModelKind::Boosted {
            f0,
            shrinkage: params.shrinkage,
            coeffs,
            trees,
        },
        Vec::new(),
    ))
}

/// Histogram split search. Bin statistics drive the gain; the stored
/// threshold is the midpoint between the actual largest value left of the
/// cut and smallest value right of it within this node.
#[allow(clippy::too_many_arguments)]
fn grow_binned(
    x: &ColMajor,
    bins: &BinMap,
    targets: &[f64],
    rows: Vec<u32>,
    depth: usize,
    max_depth: usize,
    msl: usize,
    nodes: &mut Vec<TreeNode>,
) -> u32 {
    let count = rows.len();
    let sum: f64 = rows.iter().map(|&r| targets[r as usize]).sum();
    let first = targets[rows[0] as usize];
    let constant = rows.iter().all(|&r| targets[r as usize] == first);

    let at = nodes.len() as u32;
    nodes.push(TreeNode::Leaf {
        value: sum / count as f64,
    });
    if depth >= max_depth || count < 2 * msl || constant {
        return at;
    }

    let parent_score = sum * sum / count as f64;
    let mut best: Option<(f64, usize, f64)> = None;
    for j in 0..x.n_features() {
        let n_slots = bins.edges[j].len() + 1;
        if n_slots == 1 {
            continue;
        }
        let mut cnt = vec![0usize; n_slots];
        let mut sums = vec![0.0f64; n_slots];
        let mut vmin = vec![f64::INFINITY; n_slots];
        let mut vmax = vec![f64::NEG_INFINITY; n_slots];
        for &r in &rows {
            let b = bins.row_bins[j][r as usize] as usize;
            cnt[b] += 1;
            sums[b] += targets[r as usize];
            let v = x.value(j, r);
            vmin[b] = vmin[b].min(v);
            vmax[b] = vmax[b].max(v);
        }
        // Smallest value at or right of each bin, for threshold snapping.
        let mut right_min = vec![f64::INFINITY; n_slots + 1];
        for b in (0..n_slots).rev() {
            right_min[b] = right_min[b + 1].min(vmin[b]);
        }

        let mut cl = 0usize;
        let mut sl = 0.0f64;
        let mut left_max = f64::NEG_INFINITY;
        for b in 0..n_slots - 1 {
            cl += cnt[b];
            sl += sums[b];
            if cnt[b] > 0 {
                left_max = left_max.max(vmax[b]);
            }
            let cr = count - cl;
            if cl < msl || cr < msl {
                continue;
            }
            let rv = right_min[b + 1];
            if left_max >= rv {
                continue; // one side empty within this node
            }
            let sr = sum - sl;
            let gain = (sl * sl / cl as f64 + sr * sr / cr as f64) - parent_score;
            if best.map_or(true, |(g, _, _)| gain > g) {
                best = Some((gain, j, split_threshold(left_max, rv)));
            }
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
    let left = grow_binned(
        x, bins, targets, left_rows, depth + 1, max_depth, msl, nodes,
    );
    let right = grow_binned(
        x, bins, targets, right_rows, depth + 1, max_depth, msl, nodes,
    );
    nodes[at as usize] = TreeNode::Split {
        feature: feature as u32,
        threshold,
        left,
        right,
    };
    at
}

/// Everything recorded about one ordering while fitting an ordered
/// ensemble; enough to audit the prefix discipline from outside.
#[derive(Debug, Clone)]
pub struct OrderedChainTrace {
    /// `permutation[q]` is the training row visited at position `q`.
    pub permutation: Vec<usize>,
    /// Per stage, the arena leaf index every row falls into.
    pub stage_leaf_of: Vec<Vec<u32>>,
    /// Per stage, each row's running prediction as the stage begins; the
    /// stage fits `target - this`.
    pub residual_inputs: Vec<Vec<f64>>,
}

/// Ordered boosting over `n_permutations` independent row orderings.
///
/// Per ordering, each row's running prediction starts at the mean target
/// of the rows preceding it (zero for the first row) and is updated per
/// stage with the mean stage-residual of preceding rows in its leaf,
/// accumulated in ordering position — so no row's residual ever reflects
/// its own target. Those order-disciplined residuals select the stage
/// tree structures. The stored chain is then a plain boosted ensemble
/// over those structures: each stage's leaf values are refitted as
/// full-data means of the inference ensemble's own residuals, which keeps
/// prediction unbiased (rows stuck early in an ordering never shrink
/// their ordered residual, so raw ordered leaf means would drift).
/// Prediction averages the orderings' chains around the shared
/// global-mean base.
pub fn fit_ordered_gbm_traced(
    data: &Dataset,
    params: BoostParams,
    n_permutations: usize,
    seed: u64,
    want_trace: bool,
) -> Result<(ModelKind, Vec<String>, Option<Vec<OrderedChainTrace>>)> {
    let n = data.n_rows();
    let y = data.target.to_vec();
    let x = ColMajor::from_rows(&data.rows.view());
    let ids: Vec<u32> = (0..n as u32).collect();
    let sorted = SortedColumns::build(&x, &ids);
    let grow = GrowParams {
        max_depth: params.max_depth,
        min_samples_leaf: params.min_samples_leaf,
        feature_subset: None,
    };
    let f0 = data.target.sum() / n as f64;

    let chain_seeds: Vec<u64> = (0..n_permutations)
        .map(|p| derive_seed(seed, &[name_tag("ordered_gbm"), p as u64]))
        .collect();

    let results: Vec<(Vec<Tree>, OrderedChainTrace)> = chain_seeds
        .par_iter()
        .map(|&chain_seed| {
            let mut rng = rng_from(chain_seed, &[]);
            let mut sigma: Vec<usize> = (0..n).collect();
            sigma.shuffle(&mut rng);

            // Running ordered predictions, initialized to prefix means.
            let mut fo = vec![0.0f64; n];
            let mut acc = 0.0;
            for (q, &row) in sigma.iter().enumerate() {
                fo[row] = if q == 0 { 0.0 } else { acc / q as f64 };
                acc += y[row];
            }

            let mut trees = Vec::with_capacity(params.n_stages);
            let mut trace = OrderedChainTrace {
                permutation: sigma.clone(),
                stage_leaf_of: Vec::new(),
                residual_inputs: Vec::new(),
            };

            // The inference ensemble's own running predictions.
            let mut f_full = vec![f0; n];

            for _ in 0..params.n_stages {
                if want_trace {
                    trace.residual_inputs.push(fo.clone());
                }
                let residuals = pseudo_residuals(&y, &fo);
                let mut tree = grow_exact(
                    &x,
                    &sorted,
                    &GainKind::Variance {
                        targets: &residuals,
                    },
                    &grow,
                    None,
                )
                .tree;
                let leaf_of = leaf_all(&tree, &x);
                if want_trace {
                    trace.stage_leaf_of.push(leaf_of.clone());
                }

                // Prefix-restricted leaf means, accumulated in ordering
                // position so each row only ever sees its predecessors.
                let mut leaf_count = vec![0usize; tree.n_nodes()];
                let mut leaf_sum = vec![0.0f64; tree.n_nodes()];
                for &row in &sigma {
                    let leaf = leaf_of[row] as usize;
                    let update = if leaf_count[leaf] > 0 {
                        leaf_sum[leaf] / leaf_count[leaf] as f64
                    } else {
                        0.0
                    };
                    fo[row] += params.shrinkage * update;
                    leaf_count[leaf] += 1;
                    leaf_sum[leaf] += residuals[row];
                }

                // Refit stored leaf values on the inference ensemble's
                // residuals over all rows.
                let mut full_count = vec![0usize; tree.n_nodes()];
                let mut full_sum = vec![0.0f64; tree.n_nodes()];
                for row in 0..n {
                    let leaf = leaf_of[row] as usize;
                    full_count[leaf] += 1;
                    full_sum[leaf] += y[row] - f_full[row];
                }
                for (at, node) in tree.nodes.iter_mut().enumerate() {
                    if let TreeNode::Leaf { value } = node {
                        *value = full_sum[at] / full_count[at] as f64;
                    }
                }
                for row in 0..n {
                    f_full[row] +=
                        params.shrinkage * tree_leaf_value(&tree, leaf_of[row]);
                }

                trees.push(tree);
            }
            (trees, trace)
        })
        .collect();

    let mut chains = Vec::with_capacity(n_permutations);
    let mut traces = Vec::with_capacity(n_permutations);
    for (trees, trace) in results {
        chains.push(trees);
        traces.push(trace);
    }

    Ok((
        ModelKind::OrderedBoost {
            f0,
            shrinkage: params.shrinkage,
            chains,
        },
        Vec::new(),
        want_trace.then_some(traces),
    ))
}

fn tree_leaf_value(tree: &Tree, at: u32) -> f64 {
    match tree.nodes[at as usize] {
        TreeNode::Leaf { value } => value,
        _ => unreachable!("leaf assignment points at a split node"),
    }
}

/// Fit an ordered ensemble and return only its per-ordering traces.
pub fn ordered_trace(
    data: &Dataset,
    params: BoostParams,
    n_permutations: usize,
    seed: u64,
) -> Result<Vec<OrderedChainTrace>> {
    let (_, _, traces) = fit_ordered_gbm_traced(data, params, n_permutations, seed, true)?;
    Ok(traces.expect("trace requested"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::synthetic::generate_synthetic_mill;
    use crate::metrics::compute_metrics;
    use crate::models::{fit, ModelKind, ParamValue, RegressorSpec};
    use approx::assert_relative_eq;

    fn train_mse(model: &crate::models::FittedModel, data: &Dataset) -> f64 {
        let preds = model.predict_dataset(data).unwrap();
        compute_metrics(&preds, data.target.as_slice().unwrap())
            .unwrap()
            .mse
    }

    #[test]
    fn more_stages_fit_the_training_data_better() {
        let data = generate_synthetic_mill(200, 51, 20.0).unwrap();
        let mut short = RegressorSpec::new("gbm").unwrap();
        short.set("n_stages", ParamValue::Real(5.0)).unwrap();
        let mut long = RegressorSpec::new("gbm").unwrap();
        long.set("n_stages", ParamValue::Real(80.0)).unwrap();
        let a = fit(&short, &data).unwrap();
        let b = fit(&long, &data).unwrap();
        assert!(train_mse(&b, &data) < train_mse(&a, &data));
    }

    #[test]
    fn zero_penalty_second_order_matches_plain_boosting_exactly() {
        let data = generate_synthetic_mill(150, 52, 25.0).unwrap();
        let mut plain = RegressorSpec::new("gbm").unwrap();
        plain.set("line_search", ParamValue::Real(0.0)).unwrap();
        plain.set("n_stages", ParamValue::Real(40.0)).unwrap();
        let mut reg = RegressorSpec::new("regularized_gbm").unwrap();
        for (k, v) in [("lambda", 0.0), ("alpha", 0.0), ("gamma", 0.0), ("n_stages", 40.0)] {
            reg.set(k, ParamValue::Real(v)).unwrap();
        }
        let a = fit(&plain, &data).unwrap();
        let b = fit(&reg, &data).unwrap();
        let pa = a.predict_dataset(&data).unwrap();
        let pb = b.predict_dataset(&data).unwrap();
        for (x, y) in pa.iter().zip(&pb) {
            assert_eq!(x, y, "same splits and leaves expected bit for bit");
        }
    }

    #[test]
    fn lossless_bins_reproduce_the_exact_search() {
        let data = generate_synthetic_mill(60, 53, 25.0).unwrap();
        let mut plain = RegressorSpec::new("gbm").unwrap();
        plain.set("line_search", ParamValue::Real(0.0)).unwrap();
        plain.set("n_stages", ParamValue::Real(20.0)).unwrap();
        let mut hist = RegressorSpec::new("hgbm").unwrap();
        hist.set("n_bins", ParamValue::Real(60.0)).unwrap();
        hist.set("n_stages", ParamValue::Real(20.0)).unwrap();
        let a = fit(&plain, &data).unwrap();
        let b = fit(&hist, &data).unwrap();
        let pa = a.predict_dataset(&data).unwrap();
        let pb = b.predict_dataset(&data).unwrap();
        for (x, y) in pa.iter().zip(&pb) {
            assert_relative_eq!(x, y, epsilon = 1e-9);
        }
    }

    #[test]
    fn coarse_bins_still_learn() {
        let data = generate_synthetic_mill(400, 54, 25.0).unwrap();
        let mut hist = RegressorSpec::new("hgbm").unwrap();
        hist.set("n_bins", ParamValue::Real(16.0)).unwrap();
        let model = fit(&hist, &data).unwrap();
        let preds = model.predict_dataset(&data).unwrap();
        let r2 = compute_metrics(&preds, data.target.as_slice().unwrap())
            .unwrap()
            .r2
            .unwrap();
        assert!(r2 > 0.5, "coarse-binned fit too weak: {r2}");
    }

    #[test]
    fn depth_zero_regularized_leaf_shrinks_toward_zero() {
        // Single-leaf stages with strong L2: first-stage update is
        // sum(residual) / (n + lambda), and residuals sum to zero after
        // the mean base, so predictions stay at the mean.
        let data = generate_synthetic_mill(50, 55, 25.0).unwrap();
        let mut reg = RegressorSpec::new("regularized_gbm").unwrap();
        for (k, v) in [("max_depth", 0.0), ("lambda", 10.0), ("n_stages", 3.0)] {
            reg.set(k, ParamValue::Real(v)).unwrap();
        }
        let model = fit(&reg, &data).unwrap();
        let mean = data.target.sum() / 50.0;
        let pred = model.predict_row(&data.rows.row(0).to_vec()).unwrap();
        assert_relative_eq!(pred, mean, epsilon = 1e-9);
    }

    #[test]
    fn prohibitive_gamma_suppresses_every_split() {
        let data = generate_synthetic_mill(80, 56, 25.0).unwrap();
        let mut reg = RegressorSpec::new("regularized_gbm").unwrap();
        reg.set("gamma", ParamValue::Real(1e15)).unwrap();
        let model = fit(&reg, &data).unwrap();
        let ModelKind::Boosted { trees, .. } = &model.kind else {
            panic!()
        };
        assert!(trees.iter().all(|t| t.n_nodes() == 1));
    }

    #[test]
    fn single_row_ordered_chain_sees_only_the_zero_prior() {
        let data = generate_synthetic_mill(1, 57, 10.0).unwrap();
        let traces = ordered_trace(
            &data,
            BoostParams {
                n_stages: 3,
                max_depth: 2,
                min_samples_leaf: 1,
                shrinkage: 0.1,
            },
            2,
            9,
        )
        .unwrap();
        for trace in traces {
            // No predecessors ever: the residual input stays the prior 0.
            for stage_inputs in &trace.residual_inputs {
                assert_eq!(stage_inputs, &vec![0.0]);
            }
        }
    }

    #[test]
    fn ordered_prefix_bases_are_prefix_means() {
        let data = generate_synthetic_mill(25, 58, 15.0).unwrap();
        let traces = ordered_trace(
            &data,
            BoostParams {
                n_stages: 1,
                max_depth: 2,
                min_samples_leaf: 1,
                shrinkage: 0.1,
            },
            3,
            4,
        )
        .unwrap();
        for trace in &traces {
            let inputs = &trace.residual_inputs[0];
            let mut acc = 0.0;
            for (q, &row) in trace.permutation.iter().enumerate() {
                let expect = if q == 0 { 0.0 } else { acc / q as f64 };
                assert_eq!(inputs[row], expect);
                acc += data.target[row];
            }
        }
    }

    #[test]
    fn ordered_model_predicts_the_signal() {
        let data = generate_synthetic_mill(300, 59, 20.0).unwrap();
        let model = fit(&RegressorSpec::new("ordered_gbm").unwrap(), &data).unwrap();
        let preds = model.predict_dataset(&data).unwrap();
        let r2 = compute_metrics(&preds, data.target.as_slice().unwrap())
            .unwrap()
            .r2
            .unwrap();
        assert!(r2 > 0.5, "ordered ensemble too weak: {r2}");
    }
}
