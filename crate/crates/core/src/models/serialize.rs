//! Text serialization for fitted models.
//!
//! The format is line-oriented and versioned (`millopt-model v1`). Floats
//! are written with Rust's shortest-round-trip formatting, so a saved
//! model reloads bit-identically. Names that may contain spaces (feature
//! names, warnings) occupy whole lines; everything else is
//! space-separated tokens.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

use super::tree::{Tree, TreeNode};
use super::{FittedModel, ModelKind, RegressorSpec, Weighting};

const MAGIC: &str = "millopt-model v1";

/// Render a fitted model to its text form.
pub fn to_text(model: &FittedModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "family {}", model.spec.family().name());
    let _ = writeln!(out, "seed {}", model.spec.seed());
    let _ = writeln!(out, "target {}", model.target_name);
    let _ = writeln!(out, "features {}", model.feature_names.len());
    for name in &model.feature_names {
        let _ = writeln!(out, "{name}");
    }
    let _ = writeln!(out, "params {}", model.spec.params().len());
    for (key, value) in model.spec.params() {
        let _ = writeln!(out, "{key} {value}");
    }
    let _ = writeln!(out, "warnings {}", model.warnings.len());
    for warning in &model.warnings {
        let _ = writeln!(out, "{warning}");
    }

    match &model.kind {
        ModelKind::Linear { weights, intercept } => {
            let _ = writeln!(out, "kind linear");
            let _ = writeln!(out, "intercept {intercept}");
            let _ = writeln!(out, "weights {}", join(weights));
        }
        ModelKind::Knn {
            k,
            weighting,
            means,
            scales,
            train,
            targets,
        } => {
            let _ = writeln!(out, "kind knn");
            let _ = writeln!(out, "k {k}");
            let _ = writeln!(out, "weighting {}", weighting.as_str());
            let _ = writeln!(out, "means {}", join(means));
            let _ = writeln!(out, "scales {}", join(scales));
            let _ = writeln!(out, "points {}", targets.len());
            let d = means.len();
            for (i, y) in targets.iter().enumerate() {
                let _ = writeln!(out, "{} {y}", join(&train[i * d..(i + 1) * d]));
            }
        }
        ModelKind::Cart { tree } => {
            let _ = writeln!(out, "kind cart");
            write_tree(&mut out, tree);
        }
        ModelKind::Forest { trees } => {
            let _ = writeln!(out, "kind forest");
            let _ = writeln!(out, "trees {}", trees.len());
            for tree in trees {
                write_tree(&mut out, tree);
            }
        }
        ModelKind::Adaboost { trees, log_weights } => {
            let _ = writeln!(out, "kind adaboost");
            let _ = writeln!(out, "stages {}", trees.len());
            for (tree, w) in trees.iter().zip(log_weights) {
                let _ = writeln!(out, "stage {w}");
                write_tree(&mut out, tree);
            }
        }
        ModelKind::Boosted {
            f0,
            shrinkage,
            coeffs,
            trees,
        } => {
            let _ = writeln!(out, "kind boosted");
            let _ = writeln!(out, "f0 {f0}");
            let _ = writeln!(out, "shrinkage {shrinkage}");
            let _ = writeln!(out, "stages {}", trees.len());
            for (tree, c) in trees.iter().zip(coeffs) {
                let _ = writeln!(out, "stage {c}");
                write_tree(&mut out, tree);
            }
        }
        ModelKind::OrderedBoost {
            f0,
            shrinkage,
            chains,
        } => {
            let _ = writeln!(out, "kind ordered");
            let _ = writeln!(out, "f0 {f0}");
            let _ = writeln!(out, "shrinkage {shrinkage}");
            let _ = writeln!(out, "chains {}", chains.len());
            for chain in chains {
                let _ = writeln!(out, "chain {}", chain.len());
                for tree in chain {
                    write_tree(&mut out, tree);
                }
            }
        }
    }
    let _ = writeln!(out, "end");
    out
}

pub fn save_file(model: &FittedModel, path: &Path) -> Result<()> {
    std::fs::write(path, to_text(model))?;
    Ok(())
}

pub fn load_file(path: &Path) -> Result<FittedModel> {
    let text = std::fs::read_to_string(path)?;
    from_text(&text)
}

/// Parse a model from its text form, reporting the 1-based line of any
/// problem.
pub fn from_text(text: &str) -> Result<FittedModel> {
    let mut lines = Reader::new(text);
    if lines.next_line()? != MAGIC {
        return Err(lines.error("expected header `millopt-model v1`"));
    }
    let family_name = lines.tagged("family")?.to_string();
    let seed: u64 = lines.parse_tagged("seed")?;
    let target_name = lines.tagged("target")?.to_string();
    let n_features: usize = lines.parse_tagged("features")?;
    let mut feature_names = Vec::with_capacity(n_features);
    for _ in 0..n_features {
        feature_names.push(lines.next_line()?.to_string());
    }

    let mut spec = RegressorSpec::new(&family_name)?.with_seed(seed);
    let n_params: usize = lines.parse_tagged("params")?;
    for _ in 0..n_params {
        let line = lines.next_line()?;
        let (key, value) = line
            .split_once(' ')
            .ok_or_else(|| lines.error("expected `key value`"))?;
        spec.set_str(key, value)?;
    }

    let n_warnings: usize = lines.parse_tagged("warnings")?;
    let mut warnings = Vec::with_capacity(n_warnings);
    for _ in 0..n_warnings {
        warnings.push(lines.next_line()?.to_string());
    }

    let kind_name = lines.tagged("kind")?.to_string();
    let kind = match kind_name.as_str() {
        "linear" => {
            let intercept: f64 = lines.parse_tagged("intercept")?;
            let weights = lines.float_list("weights", n_features)?;
            ModelKind::Linear { weights, intercept }
        }
        "knn" => {
            let k: usize = lines.parse_tagged("k")?;
            let weighting = match lines.tagged("weighting")? {
                "inverse_distance" => Weighting::InverseDistance,
                "uniform" => Weighting::Uniform,
                other => return Err(lines.error(&format!("unknown weighting `{other}`"))),
            };
            let means = lines.float_list("means", n_features)?;
            let scales = lines.float_list("scales", n_features)?;
            let n_points: usize = lines.parse_tagged("points")?;
            let mut train = Vec::with_capacity(n_points * n_features);
            let mut targets = Vec::with_capacity(n_points);
            for _ in 0..n_points {
                let row = lines.floats(n_features + 1)?;
                train.extend_from_slice(&row[..n_features]);
                targets.push(row[n_features]);
            }
            ModelKind::Knn {
                k,
                weighting,
                means,
                scales,
                train,
                targets,
            }
        }
        "cart" => ModelKind::Cart {
            tree: read_tree(&mut lines)?,
        },
        "forest" => {
            let n_trees: usize = lines.parse_tagged("trees")?;
            let trees = (0..n_trees)
                .map(|_| read_tree(&mut lines))
                .collect::<Result<_>>()?;
            ModelKind::Forest { trees }
        }
        "adaboost" => {
            let n_stages: usize = lines.parse_tagged("stages")?;
            let mut trees = Vec::with_capacity(n_stages);
            let mut log_weights = Vec::with_capacity(n_stages);
            for _ in 0..n_stages {
                log_weights.push(lines.parse_tagged("stage")?);
                trees.push(read_tree(&mut lines)?);
            }
            ModelKind::Adaboost { trees, log_weights }
        }
        "boosted" => {
            let f0: f64 = lines.parse_tagged("f0")?;
            let shrinkage: f64 = lines.parse_tagged("shrinkage")?;
            let n_stages: usize = lines.parse_tagged("stages")?;
            let mut trees = Vec::with_capacity(n_stages);
            let mut coeffs = Vec::with_capacity(n_stages);
            for _ in 0..n_stages {
                coeffs.push(lines.parse_tagged("stage")?);
                trees.push(read_tree(&mut lines)?);
            }
            ModelKind::Boosted {
                f0,
                shrinkage,
                coeffs,
                trees,
            }
        }
        "ordered" => {
            let f0: f64 = lines.parse_tagged("f0")?;
            let shrinkage: f64 = lines.parse_tagged("shrinkage")?;
            let n_chains: usize = lines.parse_tagged("chains")?;
            let mut chains = Vec::with_capacity(n_chains);
            for _ in 0..n_chains {
                let n_stages: usize = lines.parse_tagged("chain")?;
                let chain = (0..n_stages)
                    .map(|_| read_tree(&mut lines))
                    .collect::<Result<_>>()?;
                chains.push(chain);
            }
            ModelKind::OrderedBoost {
                f0,
                shrinkage,
                chains,
            }
        }
        other => return Err(lines.error(&format!("unknown model kind `{other}`"))),
    };

    if lines.next_line()? != "end" {
        return Err(lines.error("expected trailing `end`"));
    }

    Ok(FittedModel {
        spec,
        feature_names,
        target_name,
        warnings,
        kind,
    })
}

/// Human-readable structural summary of a fitted model.
pub fn model_info(model: &FittedModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "family: {}", model.spec.family().name());
    let _ = writeln!(out, "target: {}", model.target_name);
    let _ = writeln!(out, "features: {}", model.feature_names.len());
    let _ = writeln!(out, "seed: {}", model.spec.seed());
    if model.spec.params().is_empty() {
        let _ = writeln!(out, "params: (none)");
    } else {
        let _ = writeln!(out, "params:");
        for (key, value) in model.spec.params() {
            let _ = writeln!(out, "  {key} = {value}");
        }
    }
    match &model.kind {
        ModelKind::Linear { weights, intercept } => {
            let nonzero = weights.iter().filter(|w| **w != 0.0).count();
            let _ = writeln!(
                out,
                "structure: linear, intercept {intercept:.6}, {nonzero}/{} nonzero weights",
                weights.len()
            );
        }
        ModelKind::Knn { k, targets, .. } => {
            let _ = writeln!(
                out,
                "structure: {k} neighbours over {} stored points",
                targets.len()
            );
        }
        ModelKind::Cart { tree } => {
            let _ = writeln!(
                out,
                "structure: single tree, {} nodes, {} leaves, depth {}",
                tree.n_nodes(),
                tree.n_leaves(),
                tree.depth()
            );
        }
        ModelKind::Forest { trees } => {
            let _ = writeln!(out, "structure: {} averaged trees, {}", trees.len(), tree_totals(trees));
        }
        ModelKind::Adaboost { trees, .. } => {
            let _ = writeln!(
                out,
                "structure: {} weighted-median stages, {}",
                trees.len(),
                tree_totals(trees)
            );
        }
        ModelKind::Boosted {
            f0,
            shrinkage,
            trees,
            ..
        } => {
            let _ = writeln!(
                out,
                "structure: {} boosted stages, base {f0:.6}, shrinkage {shrinkage}, {}",
                trees.len(),
                tree_totals(trees)
            );
        }
        ModelKind::OrderedBoost {
            f0,
            shrinkage,
            chains,
        } => {
            let stages: usize = chains.iter().map(Vec::len).sum();
            let _ = writeln!(
                out,
                "structure: {} orderings x {} stages, base {f0:.6}, shrinkage {shrinkage}",
                chains.len(),
                stages / chains.len().max(1)
            );
        }
    }
    if model.warnings.is_empty() {
        let _ = writeln!(out, "warnings: (none)");
    } else {
        let _ = writeln!(out, "warnings:");
        for w in &model.warnings {
            let _ = writeln!(out, "  {w}");
        }
    }
    out
}

fn tree_totals(trees: &[Tree]) -> String {
    let nodes: usize = trees.iter().map(Tree::n_nodes).sum();
    let depth = trees.iter().map(Tree::depth).max().unwrap_or(0);
    format!("{nodes} nodes total, max depth {depth}")
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn write_tree(out: &mut String, tree: &Tree) {
    let _ = writeln!(out, "nodes {}", tree.nodes.len());
    for node in &tree.nodes {
        match node {
            TreeNode::Leaf { value } => {
                let _ = writeln!(out, "leaf {value}");
            }
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                let _ = writeln!(out, "split {feature} {threshold} {left} {right}");
            }
        }
    }
}

fn read_tree(lines: &mut Reader<'_>) -> Result<Tree> {
    let n_nodes: usize = lines.parse_tagged("nodes")?;
    let mut nodes = Vec::with_capacity(n_nodes);
    for _ in 0..n_nodes {
        let line = lines.next_line()?;
        let mut tokens = line.split(' ');
        match tokens.next() {
            Some("leaf") => {
                let value = lines.parse_token(tokens.next())?;
                nodes.push(TreeNode::Leaf { value });
            }
            Some("split") => {
                let feature: u32 = lines.parse_token(tokens.next())?;
                let threshold: f64 = lines.parse_token(tokens.next())?;
                let left: u32 = lines.parse_token(tokens.next())?;
                let right: u32 = lines.parse_token(tokens.next())?;
                nodes.push(TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                });
            }
            _ => return Err(lines.error("expected `leaf` or `split` node")),
        }
    }
    Ok(Tree { nodes })
}

struct Reader<'a> {
    lines: std::str::Lines<'a>,
    current: usize,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str) -> Self {
        Reader {
            lines: text.lines(),
            current: 0,
        }
    }

    fn error(&self, message: &str) -> Error {
        Error::ModelFormat {
            line: self.current,
            message: message.to_string(),
        }
    }

    fn next_line(&mut self) -> Result<&'a str> {
        self.current += 1;
        self.lines
            .next()
            .ok_or_else(|| self.error("unexpected end of file"))
    }

    /// Next line must start with `tag `; returns the remainder.
    fn tagged(&mut self, tag: &str) -> Result<&'a str> {
        let line = self.next_line()?;
        line.strip_prefix(tag)
            .and_then(|rest| rest.strip_prefix(' ').or(Some(rest).filter(|r| r.is_empty())))
            .ok_or_else(|| self.error(&format!("expected `{tag} ...`, got `{line}`")))
    }

    fn parse_tagged<T: std::str::FromStr>(&mut self, tag: &str) -> Result<T> {
        let raw = self.tagged(tag)?;
        raw.parse()
            .map_err(|_| self.error(&format!("cannot parse `{raw}` after `{tag}`")))
    }

    fn parse_token<T: std::str::FromStr>(&self, token: Option<&str>) -> Result<T> {
        let token = token.ok_or_else(|| self.error("missing token"))?;
        token
            .parse()
            .map_err(|_| self.error(&format!("cannot parse token `{token}`")))
    }

    fn floats(&mut self, expected: usize) -> Result<Vec<f64>> {
        let line = self.next_line()?;
        let values: Vec<f64> = line
            .split(' ')
            .filter(|t| !t.is_empty())
            .map(|t| t.parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| self.error("cannot parse float list"))?;
        if values.len() != expected {
            return Err(self.error(&format!(
                "expected {expected} floats, got {}",
                values.len()
            )));
        }
        Ok(values)
    }

    fn float_list(&mut self, tag: &str, expected: usize) -> Result<Vec<f64>> {
        let raw = self.tagged(tag)?;
        let values: Vec<f64> = raw
            .split(' ')
            .filter(|t| !t.is_empty())
            .map(|t| t.parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| self.error(&format!("cannot parse float list after `{tag}`")))?;
        if values.len() != expected {
            return Err(self.error(&format!(
                "expected {expected} floats after `{tag}`, got {}",
                values.len()
            )));
        }
        Ok(values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::synthetic::generate_synthetic_mill;
    use crate::models::{fit, ParamValue, RegressorSpec};

    fn round_trip(family: &str, tweak: &[(&str, f64)]) {
        let data = generate_synthetic_mill(40, 71, 15.0).unwrap();
        let mut spec = RegressorSpec::new(family).unwrap();
        for (key, value) in tweak {
            spec.set(key, ParamValue::Real(*value)).unwrap();
        }
        let model = fit(&spec.with_seed(3), &data).unwrap();
        let text = to_text(&model);
        let restored = from_text(&text).unwrap();
        assert_eq!(model, restored, "{family} round trip");
        // And the rendered text itself is stable.
        assert_eq!(text, to_text(&restored));
    }

    #[test]
    fn all_kinds_round_trip_bit_identically() {
        round_trip("ols", &[]);
        round_trip("lasso", &[("lambda", 5.0)]);
        round_trip("sgd", &[("epochs", 5.0)]);
        round_trip("knn", &[("k", 3.0)]);
        round_trip("cart", &[("max_depth", 4.0)]);
        round_trip("random_forest", &[("n_trees", 3.0)]);
        round_trip("extra_trees", &[("n_trees", 3.0)]);
        round_trip("adaboost_r2", &[("n_stages", 3.0)]);
        round_trip("gbm", &[("n_stages", 4.0)]);
        round_trip("regularized_gbm", &[("n_stages", 4.0)]);
        round_trip("hgbm", &[("n_stages", 4.0), ("n_bins", 16.0)]);
        round_trip("ordered_gbm", &[("n_stages", 3.0), ("n_permutations", 2.0)]);
    }

    #[test]
    fn loaded_model_predicts_identically() {
        let data = generate_synthetic_mill(60, 72, 15.0).unwrap();
        let model = fit(&RegressorSpec::new("gbm").unwrap(), &data).unwrap();
        let restored = from_text(&to_text(&model)).unwrap();
        let a = model.predict_dataset(&data).unwrap();
        let b = restored.predict_dataset(&data).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn malformed_inputs_name_the_line() {
        let err = from_text("not a model\n").unwrap_err();
        assert!(matches!(err, crate::error::Error::ModelFormat { line: 1, .. }));

        let data = generate_synthetic_mill(20, 73, 15.0).unwrap();
        let model = fit(&RegressorSpec::new("cart").unwrap(), &data).unwrap();
        let text = to_text(&model);
        let truncated: String = text.lines().take(8).map(|l| format!("{l}\n")).collect();
        assert!(from_text(&truncated).is_err());

        let corrupt = text.replace("kind cart", "kind hedge");
        let err = from_text(&corrupt).unwrap_err();
        assert!(err.to_string().contains("hedge"));
    }

    #[test]
    fn info_mentions_family_and_structure() {
        let data = generate_synthetic_mill(30, 74, 15.0).unwrap();
        let model = fit(&RegressorSpec::new("cart").unwrap(), &data).unwrap();
        let info = model_info(&model);
        assert!(info.contains("family: cart"));
        assert!(info.contains("single tree"));
        assert!(info.contains("warnings: (none)"));
    }
}
