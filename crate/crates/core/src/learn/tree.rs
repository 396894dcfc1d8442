//! CART trees with exact greedy splits.
//!
//! One builder serves both learners. Each sample carries two sums `(a, b)`:
//! `(weight, weight * label)` under Gini impurity, `(gradient, hessian)`
//! under the Newton criterion. A row goes left when its value is `<=` the
//! threshold.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

/// Node array with the root at index 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf(value: f64) -> Self {
        Tree {
            nodes: vec![Node::Leaf { value }],
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        let mut best = 0;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((at, d)) = stack.pop() {
            best = best.max(d);
            if let Node::Split { left, right, .. } = self.nodes[at] {
                stack.push((left, d + 1));
                stack.push((right, d + 1));
            }
        }
        best
    }

    pub(crate) fn scale_leaves(&mut self, factor: f64) {
        for n in &mut self.nodes {
            if let Node::Leaf { value } = n {
                *value *= factor;
            }
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) enum Criterion {
    Gini,
    Newton { lambda: f64 },
}

impl Criterion {
    fn score(self, a: f64, b: f64) -> f64 {
        match self {
            Criterion::Gini if a > 0.0 => -2.0 * b * (a - b) / a,
            Criterion::Gini => 0.0,
            Criterion::Newton { lambda } => a * a / (b + lambda),
        }
    }

    fn leaf(self, a: f64, b: f64) -> f64 {
        match self {
            Criterion::Gini if a > 0.0 => (b / a).clamp(0.0, 1.0),
            Criterion::Gini => 0.0,
            Criterion::Newton { lambda } => -a / (b + lambda),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Sample {
    pub row: usize,
    pub a: f64,
    pub b: f64,
}

pub(crate) struct TreeConfig {
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub mtry: usize,
    pub criterion: Criterion,
}

const MIN_GAIN: f64 = 1e-12;

struct Candidate {
    feature: usize,
    threshold: f64,
    gain: f64,
    left: Vec<usize>,
    right: Vec<usize>,
}

/// Grows one tree. `value(row, feature)` reads the training matrix;
/// `importance` accumulates split gains per feature.
pub(crate) fn grow(
    value: &dyn Fn(usize, usize) -> f64,
    n_features: usize,
    samples: &[Sample],
    cfg: &TreeConfig,
    rng: &mut ChaCha8Rng,
    importance: &mut [f64],
) -> Tree {
    let mut nodes: Vec<Node> = Vec::new();
    let min_leaf = cfg.min_leaf.max(1);
    let mtry = cfg.mtry.clamp(1, n_features.max(1));
    // (slot, sample indices, depth)
    let mut work: Vec<(usize, Vec<usize>, usize)> = vec![(0, (0..samples.len()).collect(), 0)];
    nodes.push(Node::Leaf { value: 0.0 });
    let mut features: Vec<usize> = (0..n_features).collect();
    let mut scratch: Vec<(f64, f64, f64, usize)> = Vec::new();

    while let Some((slot, idx, depth)) = work.pop() {
        let (sa, sb) = idx
            .iter()
            .fold((0.0, 0.0), |(a, b), &s| (a + samples[s].a, b + samples[s].b));
        let leaf_value = cfg.criterion.leaf(sa, sb);
        let can_split = n_features > 0 && idx.len() >= 2 * min_leaf && cfg.max_depth.is_none_or(|d| depth < d);
        let mut best: Option<Candidate> = None;
        if can_split {
            let parent = cfg.criterion.score(sa, sb);
            // partial Fisher-Yates draws mtry distinct features
            for k in 0..mtry {
                let pick = rng.gen_range(k..n_features);
                features.swap(k, pick);
            }
            for &f in &features[..mtry] {
                scratch.clear();
                scratch.extend(
                    idx.iter()
                        .map(|&s| (value(samples[s].row, f), samples[s].a, samples[s].b, s)),
                );
                scratch.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.3.cmp(&y.3)));
                let (mut la, mut lb) = (0.0, 0.0);
                for k in 0..scratch.len() - 1 {
                    la += scratch[k].1;
                    lb += scratch[k].2;
                    let n_left = k + 1;
                    if n_left < min_leaf || scratch.len() - n_left < min_leaf {
                        continue;
                    }
                    let (lo, hi) = (scratch[k].0, scratch[k + 1].0);
                    if lo >= hi {
                        continue;
                    }
                    let gain = cfg.criterion.score(la, lb) + cfg.criterion.score(sa - la, sb - lb) - parent;
                    if gain > MIN_GAIN && best.as_ref().is_none_or(|b| gain > b.gain) {
                        let mut threshold = lo + (hi - lo) / 2.0;
                        if threshold >= hi {
                            threshold = lo;
                        }
                        best = Some(Candidate {
                            feature: f,
                            threshold,
                            gain,
                            left: Vec::new(),
                            right: Vec::new(),
                        });
                    }
                }
            }
        }
        match best {
            None => nodes[slot] = Node::Leaf { value: leaf_value },
            Some(mut c) => {
                for &s in &idx {
                    if value(samples[s].row, c.feature) <= c.threshold {
                        c.left.push(s);
                    } else {
                        c.right.push(s);
                    }
                }
                importance[c.feature] += c.gain;
                let left = nodes.len();
                let right = left + 1;
                nodes.push(Node::Leaf { value: 0.0 });
                nodes.push(Node::Leaf { value: 0.0 });
                nodes[slot] = Node::Split {
                    feature: c.feature,
                    threshold: c.threshold,
                    left,
                    right,
                };
                work.push((right, c.right, depth + 1));
                work.push((left, c.left, depth + 1));
            }
        }
    }
    Tree { nodes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn gini_tree_memorizes_distinct_points() {
        let xs = [0.1, 0.5, 0.2, 0.9, 0.4, 0.7];
        let ys = [0.0, 1.0, 0.0, 1.0, 0.0, 0.0];
        let samples: Vec<Sample> = (0..6)
            .map(|i| Sample {
                row: i,
                a: 1.0,
                b: ys[i],
            })
            .collect();
        let cfg = TreeConfig {
            max_depth: None,
            min_leaf: 1,
            mtry: 1,
            criterion: Criterion::Gini,
        };
        let mut imp = [0.0];
        let t = grow(
            &|r, _| xs[r],
            1,
            &samples,
            &cfg,
            &mut ChaCha8Rng::seed_from_u64(0),
            &mut imp,
        );
        for i in 0..6 {
            assert_eq!(t.predict(&[xs[i]]), ys[i]);
        }
        assert!(imp[0] > 0.0);
    }

    #[test]
    fn depth_limit_respected() {
        let samples: Vec<Sample> = (0..32)
            .map(|i| Sample {
                row: i,
                a: 1.0,
                b: (i % 2) as f64,
            })
            .collect();
        let cfg = TreeConfig {
            max_depth: Some(2),
            min_leaf: 1,
            mtry: 1,
            criterion: Criterion::Gini,
        };
        let mut imp = [0.0];
        let t = grow(
            &|r, _| r as f64,
            1,
            &samples,
            &cfg,
            &mut ChaCha8Rng::seed_from_u64(0),
            &mut imp,
        );
        assert!(t.depth() <= 2);
    }
}
