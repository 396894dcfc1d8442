//! Bayesian optimization with a Gaussian-process surrogate.
//!
//! The first trials come from a Latin hypercube. After that a GP with a
//! squared-exponential kernel is fit on unit-scaled inputs and standardized
//! objectives (lengthscale by maximum likelihood over a log grid, amplitude
//! profiled out), and the next trial maximizes expected improvement over
//! random candidates.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::LearnError;
use crate::math;

pub const INITIAL_TRIALS: usize = 10;
const CANDIDATES: usize = 1024;
const NOISE: f64 = 1e-6;
const LENGTHSCALE_GRID: usize = 16;

pub type Params = BTreeMap<String, f64>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ParamKind {
    Continuous { lo: f64, hi: f64 },
    Integer { lo: i64, hi: i64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: ParamKind,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub params: Vec<ParamSpec>,
}

impl SearchSpace {
    pub fn continuous(mut self, name: &str, lo: f64, hi: f64) -> Self {
        self.params.push(ParamSpec {
            name: name.into(),
            kind: ParamKind::Continuous { lo, hi },
        });
        self
    }

    pub fn integer(mut self, name: &str, lo: i64, hi: i64) -> Self {
        self.params.push(ParamSpec {
            name: name.into(),
            kind: ParamKind::Integer { lo, hi },
        });
        self
    }

    fn validate(&self) -> Result<(), LearnError> {
        if self.params.is_empty() {
            return Err(LearnError::EmptySpace);
        }
        for p in &self.params {
            let ok = match p.kind {
                ParamKind::Continuous { lo, hi } => lo.is_finite() && hi.is_finite() && lo <= hi,
                ParamKind::Integer { lo, hi } => lo <= hi,
            };
            if !ok {
                return Err(LearnError::InvalidParameter(alloc::format!("bounds of {}", p.name)));
            }
        }
        Ok(())
    }

    /// True when every parameter is present and inside its bounds.
    pub fn contains(&self, params: &Params) -> bool {
        self.params.iter().all(|p| match (params.get(&p.name), &p.kind) {
            (Some(&v), ParamKind::Continuous { lo, hi }) => v >= *lo && v <= *hi,
            (Some(&v), ParamKind::Integer { lo, hi }) => v == math::round(v) && v >= *lo as f64 && v <= *hi as f64,
            (None, _) => false,
        })
    }

    /// Snaps a unit-cube point onto the space: returns the assignment and
    /// the unit coordinates of the snapped point.
    fn decode(&self, u: &[f64]) -> (Params, Vec<f64>) {
        let mut out = Params::new();
        let mut snapped = Vec::with_capacity(u.len());
        for (p, &t) in self.params.iter().zip(u) {
            let t = t.clamp(0.0, 1.0);
            match p.kind {
                ParamKind::Continuous { lo, hi } => {
                    out.insert(p.name.clone(), (lo + t * (hi - lo)).clamp(lo, hi));
                    snapped.push(t);
                }
                ParamKind::Integer { lo, hi } => {
                    let span = (hi - lo) as f64;
                    let v = math::round(lo as f64 + t * span).clamp(lo as f64, hi as f64);
                    out.insert(p.name.clone(), v);
                    snapped.push(if span > 0.0 { (v - lo as f64) / span } else { 0.0 });
                }
            }
        }
        (out, snapped)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub params: Params,
    pub objective: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub best: Trial,
    pub history: Vec<Trial>,
}

/// Minimizes `objective` over `space` with exactly `budget` evaluations.
pub fn bayes_opt(
    space: &SearchSpace,
    budget: usize,
    seed: u64,
    mut objective: impl FnMut(&Params) -> f64,
) -> Result<OptResult, LearnError> {
    space.validate()?;
    if budget == 0 {
        return Err(LearnError::InvalidParameter("budget must be at least 1".into()));
    }
    let d = space.params.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut history: Vec<Trial> = Vec::with_capacity(budget);
    let mut xs: Vec<Vec<f64>> = Vec::with_capacity(budget);

    let n_init = budget.min(INITIAL_TRIALS);
    let strata: Vec<Vec<usize>> = (0..d)
        .map(|_| {
            let mut s: Vec<usize> = (0..n_init).collect();
            s.shuffle(&mut rng);
            s
        })
        .collect();
    for i in 0..n_init {
        let u: Vec<f64> = strata
            .iter()
            .map(|s| (s[i] as f64 + rng.gen::<f64>()) / n_init as f64)
            .collect();
        let (params, snapped) = space.decode(&u);
        let y = objective(&params);
        xs.push(snapped);
        history.push(Trial { params, objective: y });
    }

    while history.len() < budget {
        let ys: Vec<f64> = history.iter().map(|t| t.objective).collect();
        let gp = Gp::fit(&xs, &ys);
        let mut best_ei = f64::NEG_INFINITY;
        let mut best_point: Option<(Params, Vec<f64>)> = None;
        for _ in 0..CANDIDATES {
            let u: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
            let (params, snapped) = space.decode(&u);
            let ei = gp.expected_improvement(&snapped);
            if ei > best_ei || best_point.is_none() {
                best_ei = ei;
                best_point = Some((params, snapped));
            }
        }
        let (params, snapped) = best_point.expect("at least one candidate");
        let y = objective(&params);
        xs.push(snapped);
        history.push(Trial { params, objective: y });
    }

    let best = history
        .iter()
        .filter(|t| !t.objective.is_nan())
        .min_by(|a, b| a.objective.total_cmp(&b.objective))
        .unwrap_or(&history[0])
        .clone();
    Ok(OptResult { best, history })
}

struct Gp {
    xs: Vec<Vec<f64>>,
    lengthscale: f64,
    jitter: f64,
    amplitude: f64,
    chol: Vec<f64>,
    alpha: Vec<f64>,
    best: f64,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lower Cholesky factor of a row-major n x n matrix.
fn cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return None;
                }
                l[i * n + i] = math::sqrt(s);
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

fn forward(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut x = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            x[i] -= l[i * n + k] * x[k];
        }
        x[i] /= l[i * n + i];
    }
    x
}

fn backward(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut x = b.to_vec();
    for i in (0..n).rev() {
        for k in i + 1..n {
            x[i] -= l[k * n + i] * x[k];
        }
        x[i] /= l[i * n + i];
    }
    x
}

impl Gp {
    fn kernel_matrix(xs: &[Vec<f64>], ls: f64, jitter: f64) -> Vec<f64> {
        let n = xs.len();
        let mut k = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = math::exp(-sq_dist(&xs[i], &xs[j]) / (2.0 * ls * ls));
                k[i * n + j] = v;
                k[j * n + i] = v;
            }
            k[i * n + i] += jitter;
        }
        k
    }

    fn fit(xs: &[Vec<f64>], raw: &[f64]) -> Gp {
        let n = xs.len();
        // non-finite observations are treated as the worst finite one
        let worst = raw
            .iter()
            .copied()
            .filter(|v| v.is_finite())
            .fold(f64::NEG_INFINITY, f64::max);
        let fill = if worst.is_finite() { worst } else { 0.0 };
        let ys: Vec<f64> = raw.iter().map(|&v| if v.is_finite() { v } else { fill }).collect();
        let mean = ys.iter().sum::<f64>() / n as f64;
        let var = ys.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        let sd = if var > 0.0 { math::sqrt(var) } else { 1.0 };
        let y: Vec<f64> = ys.iter().map(|v| (v - mean) / sd).collect();
        let best = y.iter().copied().fold(f64::INFINITY, f64::min);

        let mut chosen: Option<Gp> = None;
        let mut best_ll = f64::NEG_INFINITY;
        for g in 0..LENGTHSCALE_GRID {
            // 0.02 .. 5 on a log scale
            let ls = 0.02 * math::exp(g as f64 / (LENGTHSCALE_GRID - 1) as f64 * math::ln(250.0));
            let mut jitter = NOISE;
            let chol = loop {
                if let Some(l) = cholesky(&Self::kernel_matrix(xs, ls, jitter), n) {
                    break Some(l);
                }
                jitter *= 10.0;
                if jitter > 1e-1 {
                    break None;
                }
            };
            let Some(chol) = chol else { continue };
            let alpha = backward(&chol, n, &forward(&chol, n, &y));
            let quad: f64 = y.iter().zip(&alpha).map(|(a, b)| a * b).sum();
            let amplitude = (quad / n as f64).max(1e-12);
            let log_det: f64 = (0..n).map(|i| math::ln(chol[i * n + i])).sum();
            let ll = -0.5 * n as f64 * math::ln(amplitude) - log_det;
            if ll > best_ll {
                best_ll = ll;
                chosen = Some(Gp {
                    xs: xs.to_vec(),
                    lengthscale: ls,
                    jitter,
                    amplitude,
                    chol,
                    alpha,
                    best,
                });
            }
        }
        chosen.unwrap_or_else(|| Gp {
            xs: xs.to_vec(),
            lengthscale: 1.0,
            jitter: 1.0,
            amplitude: 1.0,
            chol: (0..n * n).map(|k| if k % (n + 1) == 0 { 1.0 } else { 0.0 }).collect(),
            alpha: y.clone(),
            best,
        })
    }

    fn expected_improvement(&self, x: &[f64]) -> f64 {
        let n = self.xs.len();
        let ls = self.lengthscale;
        let k: Vec<f64> = self
            .xs
            .iter()
            .map(|xi| math::exp(-sq_dist(xi, x) / (2.0 * ls * ls)))
            .collect();
        let mu: f64 = k.iter().zip(&self.alpha).map(|(a, b)| a * b).sum();
        let v = forward(&self.chol, n, &k);
        let var = self.amplitude * (1.0 + self.jitter - v.iter().map(|t| t * t).sum::<f64>());
        let s = math::sqrt(var.max(1e-18));
        let improve = self.best - mu;
        let z = improve / s;
        let cdf = 0.5 * (1.0 + math::erf(z / core::f64::consts::SQRT_2));
        let pdf = math::exp(-0.5 * z * z) / math::sqrt(2.0 * core::f64::consts::PI);
        (improve * cdf + s * pdf).max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_one_returns_single_trial() {
        let space = SearchSpace::default().continuous("x", 0.0, 1.0);
        let r = bayes_opt(&space, 1, 3, |p| p["x"]).unwrap();
        assert_eq!(r.history.len(), 1);
        assert_eq!(r.best, r.history[0]);
    }

    #[test]
    fn empty_space_rejected() {
        assert_eq!(
            bayes_opt(&SearchSpace::default(), 5, 0, |_| 0.0).unwrap_err(),
            LearnError::EmptySpace
        );
    }

    #[test]
    fn quadratic_minimum_found() {
        let space = SearchSpace::default().continuous("x", 0.0, 1.0);
        let r = bayes_opt(&space, 30, 1, |p| (p["x"] - 0.3) * (p["x"] - 0.3)).unwrap();
        assert_eq!(r.history.len(), 30);
        assert!((r.best.params["x"] - 0.3).abs() <= 0.05);
    }

    #[test]
    fn integers_are_rounded_and_in_bounds() {
        let space = SearchSpace::default().integer("k", 2, 10).continuous("w", 0.0, 1.0);
        let r = bayes_opt(&space, 15, 9, |p| (p["k"] - 7.0).abs() + p["w"]).unwrap();
        assert!(r.history.iter().all(|t| space.contains(&t.params)));
    }

    #[test]
    fn cholesky_solves() {
        let a = [4.0, 2.0, 2.0, 3.0];
        let l = cholesky(&a, 2).unwrap();
        let x = backward(&l, 2, &forward(&l, 2, &[2.0, 1.0]));
        assert!((4.0 * x[0] + 2.0 * x[1] - 2.0).abs() < 1e-12);
        assert!((2.0 * x[0] + 3.0 * x[1] - 1.0).abs() < 1e-12);
    }
}
