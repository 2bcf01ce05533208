//! Random forest of CART trees grown on bootstrap samples with Gini splits.

use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::TrainingSet;
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// `None` grows until leaves are pure.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Candidate features per split; `None` means `ceil(sqrt(d))`.
    pub features_per_split: Option<usize>,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            max_depth: None,
            min_leaf: 1,
            features_per_split: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf { class: u8 },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn predict(&self, x: &[f64]) -> u8 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { class } => return *class,
                Node::Split { feature, threshold, left, right } => {
                    at = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub config: ForestConfig,
    trees: Vec<DecisionTree>,
}

impl RandomForest {
    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    /// Fraction of trees voting for class 1.
    pub fn score(&self, x: &[f64]) -> f64 {
        let votes = self.trees.iter().filter(|t| t.predict(x) == 1).count();
        votes as f64 / self.trees.len() as f64
    }

    #[cfg(test)]
    pub(crate) fn from_trees(trees: Vec<DecisionTree>) -> Self {
        RandomForest { config: ForestConfig::default(), trees }
    }
}

/// Row indices (with repetition) a tree with this seed trains on.
pub fn bootstrap_sample(n: usize, tree_seed: u64) -> Vec<usize> {
    let mut rng = seed::rng(tree_seed);
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

fn tree_seed(forest_seed: u64, tree: usize) -> u64 {
    seed::derive(forest_seed, "tree", tree as u64)
}

pub fn train_random_forest(data: &TrainingSet, cfg: &ForestConfig, seed: u64) -> Result<RandomForest> {
    data.check_trainable()?;
    if cfg.n_trees == 0 || cfg.min_leaf == 0 {
        return Err(Error::Config("forest needs n_trees >= 1 and min_leaf >= 1".into()));
    }
    let d = data.d();
    let m = cfg
        .features_per_split
        .unwrap_or_else(|| (d as f64).sqrt().ceil() as usize)
        .clamp(1, d.max(1));
    let trees = (0..cfg.n_trees)
        .into_par_iter()
        .map(|t| {
            let s = tree_seed(seed, t);
            let rows = bootstrap_sample(data.len(), s);
            grow_tree(data, &rows, cfg, m, seed::derive(s, "split", 0))
        })
        .collect();
    Ok(RandomForest { config: cfg.clone(), trees })
}

fn gini(ones: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = ones as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

fn majority(labels: &[u8], rows: &[usize]) -> u8 {
    let ones = rows.iter().filter(|&&r| labels[r] == 1).count();
    u8::from(2 * ones >= rows.len())
}

struct Best {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

/// Best Gini split of `rows` on `feature`, honouring `min_leaf`.
fn best_split_on(data: &TrainingSet, rows: &mut [usize], feature: usize, min_leaf: usize) -> Option<Best> {
    let x = data.rows();
    let labels = data.labels();
    rows.sort_by(|&a, &b| x[a][feature].total_cmp(&x[b][feature]));
    let n = rows.len();
    let total_ones = rows.iter().filter(|&&r| labels[r] == 1).count();
    let mut left_ones = 0;
    let mut best: Option<Best> = None;
    for i in 1..n {
        left_ones += usize::from(labels[rows[i - 1]] == 1);
        let lo = x[rows[i - 1]][feature];
        let hi = x[rows[i]][feature];
        if lo == hi || i < min_leaf || n - i < min_leaf {
            continue;
        }
        let impurity = (i as f64 * gini(left_ones, i)
            + (n - i) as f64 * gini(total_ones - left_ones, n - i))
            / n as f64;
        if best.as_ref().is_none_or(|b| impurity < b.impurity) {
            let mid = lo + (hi - lo) / 2.0;
            let threshold = if mid < hi { mid } else { lo };
            best = Some(Best { feature, threshold, impurity });
        }
    }
    best
}

/// Grows one CART tree on exactly the given (bootstrap) rows.
pub fn grow_tree(data: &TrainingSet, rows: &[usize], cfg: &ForestConfig, features_per_split: usize, seed: u64) -> DecisionTree {
    let mut rng = seed::rng(seed);
    let mut nodes = Vec::new();
    let mut features: Vec<usize> = (0..data.d()).collect();
    // (node slot, rows, depth)
    let mut stack = vec![(0usize, rows.to_vec(), 0usize)];
    nodes.push(Node::Leaf { class: 0 });
    while let Some((slot, mut rows, depth)) = stack.pop() {
        let labels = data.labels();
        let ones = rows.iter().filter(|&&r| labels[r] == 1).count();
        let leaf = Node::Leaf { class: majority(labels, &rows) };
        let depth_ok = cfg.max_depth.is_none_or(|m| depth < m);
        if ones == 0 || ones == rows.len() || !depth_ok || rows.len() < 2 * cfg.min_leaf {
            nodes[slot] = leaf;
            continue;
        }
        features.shuffle(&mut rng);
        let mut best: Option<Best> = None;
        for (tried, &f) in features.iter().enumerate() {
            if tried >= features_per_split && best.is_some() {
                break;
            }
            if let Some(b) = best_split_on(data, &mut rows, f, cfg.min_leaf) {
                if best.as_ref().is_none_or(|cur| b.impurity < cur.impurity) {
                    best = Some(b);
                }
            }
        }
        let Some(best) = best else {
            nodes[slot] = leaf;
            continue;
        };
        let x = data.rows();
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&r| x[r][best.feature] <= best.threshold);
        let left = nodes.len();
        nodes.push(Node::Leaf { class: 0 });
        let right = nodes.len();
        nodes.push(Node::Leaf { class: 0 });
        nodes[slot] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
        };
        stack.push((right, right_rows, depth + 1));
        stack.push((left, left_rows, depth + 1));
    }
    DecisionTree { nodes }
}
