//! Decision-tree storage and the shared exact split search.
//!
//! Trees are stored as flat arenas ([`Tree`]) so they serialize naturally
//! and predict without pointer chasing. Growth is level-wise over
//! pre-sorted per-feature row orders: each split stably partitions the
//! order arrays, so no re-sorting happens below the root. The same scan
//! serves two gain modes:
//!
//! * variance reduction over raw targets (classic regression trees), and
//! * second-order gain over per-row gradients with L1/L2 shrinkage and a
//!   per-leaf penalty (regularized boosting).
//!
//! Split candidates are midpoints between adjacent distinct values within
//! the node. Ties on gain resolve to the lowest feature index, then the
//! lowest threshold, which the ascending scan yields for free.

use ndarray::ArrayView2;
use rand_chacha::ChaCha8Rng;

/// One arena node; children reference arena indices.
#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Leaf {
        value: f64,
    },
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
}

/// Flat regression tree; node 0 is the root. Rows with feature value at or
/// below a split threshold descend left.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    /// Single-leaf tree.
    pub fn leaf(value: f64) -> Self {
        Tree {
            nodes: vec![TreeNode::Leaf { value }],
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[*feature as usize] <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }

    /// Arena index of the leaf a row lands in.
    pub fn leaf_index(&self, row: &[f64]) -> u32 {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                TreeNode::Leaf { .. } => return at as u32,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[*feature as usize] <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, TreeNode::Leaf { .. }))
            .count()
    }

    /// Depth of the deepest leaf; a lone root has depth 0.
    pub fn depth(&self) -> usize {
        fn walk(tree: &Tree, at: usize) -> usize {
            match &tree.nodes[at] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(tree, *left as usize)
                    .max(walk(tree, *right as usize)),
            }
        }
        walk(self, 0)
    }
}

/// Optimal leaf weight under squared loss with L2 strength `lambda` and L1
/// strength `alpha`: `-soft(G, alpha / 2) / (H + lambda)` where `G`/`H` are
/// the summed gradients and hessians and `soft` is soft-thresholding.
pub fn regularized_leaf_weight(grad_sum: f64, hess_sum: f64, lambda: f64, alpha: f64) -> f64 {
    -soft_threshold(grad_sum, alpha / 2.0) / (hess_sum + lambda)
}

fn soft_threshold(g: f64, tau: f64) -> f64 {
    if g > tau {
        g - tau
    } else if g < -tau {
        g + tau
    } else {
        0.0
    }
}

/// Midpoint of two adjacent distinct values, clamped so the split predicate
/// `x <= threshold` reproduces the scanned partition even when rounding
/// would push the midpoint onto the right-hand value.
pub(crate) fn split_threshold(a: f64, b: f64) -> f64 {
    debug_assert!(a < b);
    let t = 0.5 * (a + b);
    if t >= b {
        a
    } else {
        t
    }
}

/// Column-major copy of the feature matrix for cache-friendly scans.
pub(crate) struct ColMajor {
    pub n_rows: usize,
    cols: Vec<Vec<f64>>,
}

impl ColMajor {
    pub fn from_rows(rows: &ArrayView2<'_, f64>) -> Self {
        let cols = (0..rows.ncols())
            .map(|j| rows.column(j).to_vec())
            .collect();
        ColMajor {
            n_rows: rows.nrows(),
            cols,
        }
    }

    #[inline]
    pub fn value(&self, feature: usize, row: u32) -> f64 {
        self.cols[feature][row as usize]
    }

    pub fn n_features(&self) -> usize {
        self.cols.len()
    }
}

/// Per-feature row orders: each column holds the training rows (a multiset
/// when bootstrapped) sorted by feature value, ties by row index.
pub(crate) struct SortedColumns {
    pub cols: Vec<Vec<u32>>,
}

impl SortedColumns {
    pub fn build(x: &ColMajor, rows: &[u32]) -> Self {
        let cols = (0..x.n_features())
            .map(|j| {
                let mut ids = rows.to_vec();
                ids.sort_by(|&a, &b| {
                    x.value(j, a)
                        .partial_cmp(&x.value(j, b))
                        .expect("finite feature values")
                        .then(a.cmp(&b))
                });
                ids
            })
            .collect();
        SortedColumns { cols }
    }
}

/// What the scan optimizes.
pub(crate) enum GainKind<'a> {
    /// Sum-of-squares reduction over `targets`; leaves predict the mean.
    Variance { targets: &'a [f64] },
    /// Second-order gain over `grads` with unit hessians; a split must beat
    /// `gamma` to be kept.
    SecondOrder {
        grads: &'a [f64],
        lambda: f64,
        alpha: f64,
        gamma: f64,
    },
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct GrowParams {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// Features examined per node; `None` scans all.
    pub feature_subset: Option<usize>,
}

/// Per-node target statistics retained for cost-complexity pruning.
#[derive(Debug, Clone, Copy)]
pub(crate) struct NodeStats {
    pub count: usize,
    pub sum: f64,
    pub sum_sq: f64,
}

impl NodeStats {
    /// Within-node sum of squared deviations from the node mean.
    pub fn sse(&self) -> f64 {
        (self.sum_sq - self.sum * self.sum / self.count as f64).max(0.0)
    }
}

pub(crate) struct GrownTree {
    pub tree: Tree,
    pub stats: Vec<NodeStats>,
}

struct WorkNode {
    node: usize,
    start: usize,
    end: usize,
}

/// Grow one tree level-wise from pre-sorted columns.
///
/// `rng` is consulted only when `feature_subset` asks for per-node feature
/// sampling; nodes are processed in deterministic breadth-first order.
pub(crate) fn grow_exact(
    x: &ColMajor,
    sorted: &SortedColumns,
    gain: &GainKind<'_>,
    params: &GrowParams,
    mut rng: Option<&mut ChaCha8Rng>,
) -> GrownTree {
    let d = x.n_features();
    let mut order: Vec<Vec<u32>> = sorted.cols.clone();
    let m = order.first().map_or(0, Vec::len);
    assert!(m > 0, "tree growth needs at least one row");
    let msl = params.min_samples_leaf.max(1);

    let mut nodes: Vec<TreeNode> = vec![TreeNode::Leaf { value: 0.0 }];
    let mut stats: Vec<NodeStats> = vec![NodeStats {
        count: 0,
        sum: 0.0,
        sum_sq: 0.0,
    }];
    let mut level = vec![WorkNode {
        node: 0,
        start: 0,
        end: m,
    }];
    let mut scratch: Vec<u32> = Vec::with_capacity(m);

    for depth in 0..=params.max_depth {
        if level.is_empty() {
            break;
        }
        let mut next = Vec::new();
        for work in &level {
            let seg_rows = &order[0][work.start..work.end];
            let count = seg_rows.len();

            // Node statistics in row order of feature 0's segment.
            let (node_score, leaf_value, constant, node_stats) = match gain {
                GainKind::Variance { targets } => {
                    let mut s = 0.0;
                    let mut ss = 0.0;
                    let mut tmin = f64::INFINITY;
                    let mut tmax = f64::NEG_INFINITY;
                    for &r in seg_rows {
                        let t = targets[r as usize];
                        s += t;
                        ss += t * t;
                        tmin = tmin.min(t);
                        tmax = tmax.max(t);
                    }
                    let c = count as f64;
                    (
                        s * s / c,
                        s / c,
                        tmin == tmax,
                        NodeStats {
                            count,
                            sum: s,
                            sum_sq: ss,
                        },
                    )
                }
                GainKind::SecondOrder {
                    grads,
                    lambda,
                    alpha,
                    ..
                } => {
                    let mut g = 0.0;
                    let mut h = 0.0;
                    let mut gmin = f64::INFINITY;
                    let mut gmax = f64::NEG_INFINITY;
                    for &r in seg_rows {
                        let gi = grads[r as usize];
                        g += gi;
                        h += 1.0;
                        gmin = gmin.min(gi);
                        gmax = gmax.max(gi);
                    }
                    let s = soft_threshold(g, alpha / 2.0);
                    (
                        s * s / (h + lambda),
                        regularized_leaf_weight(g, h, *lambda, *alpha),
                        gmin == gmax,
                        NodeStats {
                            count,
                            sum: g,
                            sum_sq: 0.0,
                        },
                    )
                }
            };
            nodes[work.node] = TreeNode::Leaf { value: leaf_value };
            stats[work.node] = node_stats;

            if depth == params.max_depth || count < 2 * msl || constant {
                continue;
            }

            // Candidate features, ascending so gain ties keep the lowest.
            let features: Vec<usize> = match (params.feature_subset, rng.as_deref_mut()) {
                (Some(k), Some(r)) if k < d => {
                    let mut picked = rand::seq::index::sample(r, d, k).into_vec();
                    picked.sort_unstable();
                    picked
                }
                _ => (0..d).collect(),
            };

            let mut best_gain = f64::NEG_INFINITY;
            let mut best: Option<(usize, f64)> = None;
            for &j in &features {
                let seg = &order[j][work.start..work.end];
                let mut left_primary = 0.0f64;
                let mut left_hess = 0.0f64;
                let mut prev_v = f64::NAN;
                for (i, &r) in seg.iter().enumerate() {
                    let v = x.value(j, r);
                    if i > 0 && v != prev_v {
                        let cl = i;
                        let cr = count - i;
                        if cl >= msl && cr >= msl {
                            let candidate = match gain {
                                GainKind::Variance { .. } => {
                                    let sl = left_primary;
                                    let sr = node_stats.sum - sl;
                                    let (cl, cr) = (cl as f64, cr as f64);
                                    (sl * sl / cl + sr * sr / cr) - node_score
                                }
                                GainKind::SecondOrder { lambda, alpha, .. } => {
                                    let gl = left_primary;
                                    let gr = node_stats.sum - gl;
                                    let hl = left_hess;
                                    let hr = count as f64 - hl;
                                    let sl = soft_threshold(gl, alpha / 2.0);
                                    let sr = soft_threshold(gr, alpha / 2.0);
                                    0.5 * ((sl * sl / (hl + lambda) + sr * sr / (hr + lambda))
                                        - node_score)
                                }
                            };
                            if candidate > best_gain {
                                best_gain = candidate;
                                best = Some((j, split_threshold(prev_v, v)));
                            }
                        }
                    }
                    match gain {
                        GainKind::Variance { targets } => left_primary += targets[r as usize],
                        GainKind::SecondOrder { grads, .. } => {
                            left_primary += grads[r as usize];
                            left_hess += 1.0;
                        }
                    }
                    prev_v = v;
                }
            }

            let accept = match gain {
                GainKind::Variance { .. } => best_gain > 0.0,
                GainKind::SecondOrder { gamma, .. } => best_gain > *gamma,
            };
            let Some((feature, threshold)) = best.filter(|_| accept) else {
                continue;
            };

            // Stable partition of every feature's segment.
            let mut n_left = 0usize;
            for column_order in order.iter_mut() {
                let seg = &mut column_order[work.start..work.end];
                scratch.clear();
                scratch.extend_from_slice(seg);
                let mut write = 0usize;
                for &r in &scratch {
                    if x.value(feature, r) <= threshold {
                        seg[write] = r;
                        write += 1;
                    }
                }
                n_left = write;
                for &r in &scratch {
                    if x.value(feature, r) > threshold {
                        seg[write] = r;
                        write += 1;
                    }
                }
            }
            debug_assert!(n_left > 0 && n_left < count);

            let left = nodes.len();
            nodes.push(TreeNode::Leaf { value: 0.0 });
            stats.push(NodeStats {
                count: 0,
                sum: 0.0,
                sum_sq: 0.0,
            });
            let right = nodes.len();
            nodes.push(TreeNode::Leaf { value: 0.0 });
            stats.push(NodeStats {
                count: 0,
                sum: 0.0,
                sum_sq: 0.0,
            });
            nodes[work.node] = TreeNode::Split {
                feature: feature as u32,
                threshold,
                left: left as u32,
                right: right as u32,
            };
            next.push(WorkNode {
                node: left,
                start: work.start,
                end: work.start + n_left,
            });
            next.push(WorkNode {
                node: right,
                start: work.start + n_left,
                end: work.end,
            });
        }
        level = next;
    }

    GrownTree {
        tree: Tree { nodes },
        stats,
    }
}

/// Tree predictions for every training row, reading the column-major
/// matrix directly.
pub(crate) fn predict_all(tree: &Tree, x: &ColMajor) -> Vec<f64> {
    (0..x.n_rows as u32)
        .map(|row| {
            let mut at = 0usize;
            loop {
                match &tree.nodes[at] {
                    TreeNode::Leaf { value } => return *value,
                    TreeNode::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    } => {
                        at = if x.value(*feature as usize, row) <= *threshold {
                            *left as usize
                        } else {
                            *right as usize
                        };
                    }
                }
            }
        })
        .collect()
}

/// Arena leaf index for every training row.
pub(crate) fn leaf_all(tree: &Tree, x: &ColMajor) -> Vec<u32> {
    (0..x.n_rows as u32)
        .map(|row| {
            let mut at = 0usize;
            loop {
                match &tree.nodes[at] {
                    TreeNode::Leaf { .. } => return at as u32,
                    TreeNode::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    } => {
                        at = if x.value(*feature as usize, row) <= *threshold {
                            *left as usize
                        } else {
                            *right as usize
                        };
                    }
                }
            }
        })
        .collect()
}

/// Weakest-link cost-complexity pruning.
///
/// Repeatedly collapses the internal node with the smallest effective
/// alpha `(sse(node) − Σ sse(subtree leaves)) / (leaves − 1)` while that
/// alpha does not exceed `ccp_alpha`; ties collapse the lowest node index.
/// The arena is compacted afterwards so orphaned subtrees disappear.
pub(crate) fn prune(grown: &mut GrownTree, ccp_alpha: f64) {
    if ccp_alpha <= 0.0 {
        return;
    }
    loop {
        let live = reachable(&grown.tree);
        let mut weakest: Option<(f64, usize)> = None;
        for (at, &is_live) in live.iter().enumerate() {
            if is_live && matches!(grown.tree.nodes[at], TreeNode::Split { .. }) {
                let (leaf_sse, leaves) = subtree_leaf_sse(grown, at);
                let alpha_eff = (grown.stats[at].sse() - leaf_sse) / (leaves as f64 - 1.0);
                let better = match weakest {
                    None => true,
                    Some((best, _)) => alpha_eff < best,
                };
                if better {
                    weakest = Some((alpha_eff, at));
                }
            }
        }
        match weakest {
            Some((alpha_eff, at)) if alpha_eff <= ccp_alpha => {
                let s = grown.stats[at];
                grown.tree.nodes[at] = TreeNode::Leaf {
                    value: s.sum / s.count as f64,
                };
            }
            _ => break,
        }
    }
    compact(grown);
}

fn reachable(tree: &Tree) -> Vec<bool> {
    let mut live = vec![false; tree.nodes.len()];
    let mut stack = vec![0usize];
    while let Some(at) = stack.pop() {
        live[at] = true;
        if let TreeNode::Split { left, right, .. } = tree.nodes[at] {
            stack.push(left as usize);
            stack.push(right as usize);
        }
    }
    live
}

/// Rewrite the arena to hold only nodes reachable from the root, in
/// pre-order.
fn compact(grown: &mut GrownTree) {
    let mut nodes = Vec::new();
    let mut stats = Vec::new();
    fn copy(grown: &GrownTree, at: usize, nodes: &mut Vec<TreeNode>, stats: &mut Vec<NodeStats>) -> u32 {
        let new_at = nodes.len() as u32;
        nodes.push(grown.tree.nodes[at].clone());
        stats.push(grown.stats[at]);
        if let TreeNode::Split { left, right, .. } = grown.tree.nodes[at] {
            let new_left = copy(grown, left as usize, nodes, stats);
            let new_right = copy(grown, right as usize, nodes, stats);
            if let TreeNode::Split { left, right, .. } = &mut nodes[new_at as usize] {
                *left = new_left;
                *right = new_right;
            }
        }
        new_at
    }
    copy(grown, 0, &mut nodes, &mut stats);
    grown.tree.nodes = nodes;
    grown.stats = stats;
}

fn subtree_leaf_sse(grown: &GrownTree, at: usize) -> (f64, usize) {
    match grown.tree.nodes[at] {
        TreeNode::Leaf { .. } => (grown.stats[at].sse(), 1),
        TreeNode::Split { left, right, .. } => {
            let (ls, ln) = subtree_leaf_sse(grown, left as usize);
            let (rs, rn) = subtree_leaf_sse(grown, right as usize);
            (ls + rs, ln + rn)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn grow_simple(rows: ndarray::Array2<f64>, targets: Vec<f64>, depth: usize) -> GrownTree {
        let x = ColMajor::from_rows(&rows.view());
        let ids: Vec<u32> = (0..x.n_rows as u32).collect();
        let sorted = SortedColumns::build(&x, &ids);
        grow_exact(
            &x,
            &sorted,
            &GainKind::Variance { targets: &targets },
            &GrowParams {
                max_depth: depth,
                min_samples_leaf: 1,
                feature_subset: None,
            },
            None,
        )
    }

    #[test]
    fn step_function_is_recovered_exactly() {
        // y jumps between x=4 and x=5; the split threshold must sit there.
        let rows = array![[1.0], [2.0], [3.0], [4.0], [5.0], [6.0], [7.0], [8.0]];
        let targets = vec![0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0];
        let grown = grow_simple(rows.clone(), targets.clone(), 4);
        match grown.tree.nodes[0] {
            TreeNode::Split {
                feature, threshold, ..
            } => {
                assert_eq!(feature, 0);
                assert!(threshold > 4.0 && threshold <= 5.0, "threshold {threshold}");
            }
            _ => panic!("expected root split"),
        }
        for i in 0..rows.nrows() {
            assert_eq!(grown.tree.predict_row(&[rows[[i, 0]]]), targets[i]);
        }
    }

    #[test]
    fn constant_targets_collapse_to_one_leaf() {
        let rows = array![[1.0], [2.0], [3.0]];
        let grown = grow_simple(rows, vec![5.0, 5.0, 5.0], 8);
        assert_eq!(grown.tree.n_nodes(), 1);
        assert_eq!(grown.tree.predict_row(&[99.0]), 5.0);
    }

    #[test]
    fn depth_zero_emits_mean_leaf() {
        let rows = array![[1.0], [2.0], [3.0], [4.0]];
        let grown = grow_simple(rows, vec![1.0, 2.0, 3.0, 6.0], 0);
        assert_eq!(grown.tree.n_nodes(), 1);
        assert_eq!(grown.tree.predict_row(&[0.0]), 3.0);
    }

    #[test]
    fn gain_ties_pick_lowest_feature_then_threshold() {
        // Both features separate targets identically; feature 0 must win.
        let rows = array![[0.0, 0.0], [0.0, 0.0], [1.0, 1.0], [1.0, 1.0]];
        let grown = grow_simple(rows, vec![0.0, 0.0, 1.0, 1.0], 3);
        match grown.tree.nodes[0] {
            TreeNode::Split { feature, .. } => assert_eq!(feature, 0),
            _ => panic!("expected split"),
        }
    }

    #[test]
    fn min_samples_leaf_blocks_narrow_splits() {
        let rows = array![[1.0], [2.0], [3.0], [4.0]];
        let x = ColMajor::from_rows(&rows.view());
        let ids: Vec<u32> = (0..4).collect();
        let sorted = SortedColumns::build(&x, &ids);
        let targets = vec![0.0, 0.0, 0.0, 10.0];
        let grown = grow_exact(
            &x,
            &sorted,
            &GainKind::Variance { targets: &targets },
            &GrowParams {
                max_depth: 4,
                min_samples_leaf: 2,
                feature_subset: None,
            },
            None,
        );
        // Only the 2|2 split is admissible.
        match grown.tree.nodes[0] {
            TreeNode::Split { threshold, .. } => assert!(threshold > 2.0 && threshold <= 3.0),
            _ => panic!("expected split"),
        }
        for node in &grown.tree.nodes {
            if let TreeNode::Split { left, right, .. } = node {
                for child in [*left, *right] {
                    assert!(grown.stats[child as usize].count >= 2);
                }
            }
        }
    }

    #[test]
    fn second_order_leaf_uses_regularized_weight() {
        // Single root leaf: w = -G / (H + lambda) = sum(residual) / (n + lambda).
        let rows = array![[1.0], [2.0], [3.0]];
        let x = ColMajor::from_rows(&rows.view());
        let ids: Vec<u32> = (0..3).collect();
        let sorted = SortedColumns::build(&x, &ids);
        let grads = vec![-1.0, -2.0, -3.0]; // residuals 1, 2, 3
        let grown = grow_exact(
            &x,
            &sorted,
            &GainKind::SecondOrder {
                grads: &grads,
                lambda: 2.0,
                alpha: 0.0,
                gamma: 0.0,
            },
            &GrowParams {
                max_depth: 0,
                min_samples_leaf: 1,
                feature_subset: None,
            },
            None,
        );
        assert_eq!(grown.tree.predict_row(&[0.0]), 6.0 / 5.0);
    }

    #[test]
    fn l1_soft_threshold_zeroes_small_leaves() {
        assert_eq!(regularized_leaf_weight(0.4, 1.0, 0.0, 1.0), 0.0);
        assert_eq!(regularized_leaf_weight(1.5, 1.0, 0.0, 1.0), -1.0);
        assert_eq!(regularized_leaf_weight(-1.5, 1.0, 0.0, 1.0), 1.0);
    }

    #[test]
    fn pruning_collapses_marginal_splits() {
        let rows = array![[1.0], [2.0], [3.0], [4.0]];
        let targets = vec![1.0, 1.1, 0.9, 5.0];
        let mut grown = grow_simple(rows.clone(), targets.clone(), 4);
        assert!(grown.tree.n_leaves() > 2);
        // Alpha large enough to flatten everything.
        prune(&mut grown, 1e9);
        assert_eq!(grown.tree.n_nodes(), 1);
        assert_eq!(grown.tree.predict_row(&[1.0]), 2.0);

        // Mild alpha keeps the strong split, drops hair-splitting ones.
        let mut grown = grow_simple(rows, targets, 4);
        prune(&mut grown, 0.05);
        assert!(matches!(grown.tree.nodes[0], TreeNode::Split { .. }));
        assert!(grown.tree.n_leaves() <= 3);
    }

    #[test]
    fn split_threshold_stays_left_of_upper_value() {
        let pairs = [(1.0, 2.0), (0.1, 0.1 + f64::EPSILON), (-3.0, -2.9999)];
        for (a, b) in pairs {
            let t = split_threshold(a, b);
            assert!(t >= a && t < b, "threshold {t} outside [{a}, {b})");
        }
    }
}
