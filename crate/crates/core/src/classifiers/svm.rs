//! Soft-margin SVM trained by sequential minimal optimization.
//!
//! The solver follows the LIBSVM scheme: the working pair is the maximal
//! violating index `i` plus the `j` with the best second-order gain, and the
//! run stops when the KKT gap `m(α) - M(α)` drops below `tol`. Inputs are
//! z-scored with training statistics before the kernel is applied.
//! Training is deterministic and draws no random numbers.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::standardize::Standardizer;
use super::{sigmoid, TrainingSet};
use crate::error::{Error, Result};

const TAU: f64 = 1e-12;
/// Kernel column cache budget, in f64 entries (64 MiB).
const CACHE_ENTRIES: usize = 8 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    Linear,
    Rbf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmConfig {
    pub kernel: Kernel,
    pub c: f64,
    /// RBF width; `None` means `1 / d`.
    pub gamma: Option<f64>,
    pub tol: f64,
    /// Iteration cap, in multiples of the training-set size.
    pub max_passes: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            kernel: Kernel::Rbf,
            c: 1.0,
            gamma: None,
            tol: 1e-3,
            max_passes: 1000,
        }
    }
}

/// Solver diagnostics kept with the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualSummary {
    pub iterations: usize,
    pub kkt_gap: f64,
    pub converged: bool,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub sum_alpha_y: f64,
    pub support_vectors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub config: SvmConfig,
    gamma: f64,
    scaler: Standardizer,
    support: Vec<Vec<f64>>,
    /// `α_i y_i` per support vector.
    coef: Vec<f64>,
    rho: f64,
    pub dual: DualSummary,
}

impl SvmModel {
    /// Signed distance-like decision value; positive means Young.
    pub fn margin(&self, x: &[f64]) -> f64 {
        let z = self.scaler.transform(x);
        let kernel = KernelFn::new(self.config.kernel, self.gamma);
        self.support
            .iter()
            .zip(&self.coef)
            .map(|(sv, c)| c * kernel.eval(sv, &z))
            .sum::<f64>()
            - self.rho
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        sigmoid(self.margin(x))
    }
}

#[derive(Clone, Copy)]
struct KernelFn {
    kind: Kernel,
    gamma: f64,
}

impl KernelFn {
    fn new(kind: Kernel, gamma: f64) -> Self {
        KernelFn { kind, gamma }
    }

    fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match self.kind {
            Kernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            Kernel::Rbf => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-self.gamma * d2).exp()
            }
        }
    }
}

/// FIFO cache of kernel matrix columns.
struct ColumnCache<'a> {
    rows: &'a [Vec<f64>],
    kernel: KernelFn,
    columns: Vec<Option<Vec<f64>>>,
    queue: VecDeque<usize>,
    capacity: usize,
}

impl<'a> ColumnCache<'a> {
    fn new(rows: &'a [Vec<f64>], kernel: KernelFn, capacity: usize) -> Self {
        ColumnCache {
            rows,
            kernel,
            columns: vec![None; rows.len()],
            queue: VecDeque::new(),
            capacity: capacity.max(2),
        }
    }

    /// Makes column `i` resident without evicting `keep`.
    fn ensure(&mut self, i: usize, keep: Option<usize>) {
        if self.columns[i].is_some() {
            return;
        }
        if self.queue.len() >= self.capacity {
            if self.queue.front().copied() == keep {
                self.queue.rotate_left(1);
            }
            if let Some(old) = self.queue.pop_front() {
                self.columns[old] = None;
            }
        }
        let xi = &self.rows[i];
        let kernel = self.kernel;
        self.columns[i] = Some(self.rows.iter().map(|xj| kernel.eval(xi, xj)).collect());
        self.queue.push_back(i);
    }

    /// Columns `i` and `j`, both resident.
    fn pair(&mut self, i: usize, j: usize) -> (&[f64], &[f64]) {
        self.ensure(i, None);
        self.ensure(j, Some(i));
        (
            self.columns[i].as_deref().expect("resident"),
            self.columns[j].as_deref().expect("resident"),
        )
    }

    fn column(&mut self, i: usize) -> &[f64] {
        self.ensure(i, None);
        self.columns[i].as_deref().expect("resident")
    }
}

pub fn train_svm(data: &TrainingSet, cfg: &SvmConfig) -> Result<SvmModel> {
    let n = data.len().max(1);
    solve(data, cfg, CACHE_ENTRIES / n)
}

fn solve(data: &TrainingSet, cfg: &SvmConfig, cache_columns: usize) -> Result<SvmModel> {
    data.check_trainable()?;
    if !(cfg.c > 0.0 && cfg.tol > 0.0) {
        return Err(Error::Config("svm c and tol must be positive".into()));
    }
    let gamma = cfg.gamma.unwrap_or(1.0 / data.d().max(1) as f64);
    if !(gamma > 0.0) {
        return Err(Error::Config("svm gamma must be positive".into()));
    }
    let scaler = Standardizer::fit(data.rows());
    let x = scaler.transform_all(data.rows());
    let y: Vec<f64> = data.labels().iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
    let n = x.len();
    let c = cfg.c;
    let kernel = KernelFn::new(cfg.kernel, gamma);
    let diag: Vec<f64> = x.iter().map(|xi| kernel.eval(xi, xi)).collect();
    let mut cache = ColumnCache::new(&x, kernel, cache_columns);

    let mut alpha = vec![0.0; n];
    // Gradient of ½αᵀQα − eᵀα with Q_ij = y_i y_j K_ij.
    let mut grad = vec![-1.0; n];
    let max_iter = cfg.max_passes.saturating_mul(n).max(1);
    let mut iterations = 0;
    let mut gap = f64::INFINITY;
    let mut converged = false;

    let in_up = |a: f64, yt: f64| (yt > 0.0 && a < c) || (yt < 0.0 && a > 0.0);
    let in_low = |a: f64, yt: f64| (yt > 0.0 && a > 0.0) || (yt < 0.0 && a < c);

    while iterations < max_iter {
        // i: maximal violator in I_up.
        let mut g_max = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            if in_up(alpha[t], y[t]) {
                let v = -y[t] * grad[t];
                if v >= g_max {
                    g_max = v;
                    i_sel = Some(t);
                }
            }
        }
        let Some(i) = i_sel else {
            gap = 0.0;
            converged = true;
            break;
        };
        let ki = cache.column(i).to_vec();

        // j: second-order choice in I_low.
        let mut g_min = f64::INFINITY;
        let mut obj_min = f64::INFINITY;
        let mut j_sel = None;
        for t in 0..n {
            if !in_low(alpha[t], y[t]) {
                continue;
            }
            let v = -y[t] * grad[t];
            g_min = g_min.min(v);
            let b = g_max - v;
            if b > 0.0 {
                let mut a = diag[i] + diag[t] - 2.0 * ki[t];
                if a <= 0.0 {
                    a = TAU;
                }
                let obj = -(b * b) / a;
                if obj <= obj_min {
                    obj_min = obj;
                    j_sel = Some(t);
                }
            }
        }
        gap = g_max - g_min;
        if gap < cfg.tol {
            converged = true;
            break;
        }
        let Some(j) = j_sel else {
            converged = true;
            break;
        };
        iterations += 1;

        let (ci, cj) = cache.pair(i, j);
        let kij = ci[j];
        let old_ai = alpha[i];
        let old_aj = alpha[j];
        let (mut ai, mut aj) = (old_ai, old_aj);
        if y[i] != y[j] {
            let mut quad = diag[i] + diag[j] - 2.0 * kij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let mut quad = diag[i] + diag[j] - 2.0 * kij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        alpha[i] = ai;
        alpha[j] = aj;
        let dai = ai - old_ai;
        let daj = aj - old_aj;
        for t in 0..n {
            grad[t] += y[t] * (y[i] * ci[t] * dai + y[j] * cj[t] * daj);
        }
    }
    if !converged {
        log::warn!("svm: iteration cap {max_iter} reached, KKT gap {gap:.3e}");
    }

    // Bias from free multipliers, else the midpoint of the feasible range.
    let (mut ub, mut lb, mut free_sum, mut nr_free) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 { ub = ub.min(yg) } else { lb = lb.max(yg) }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 { ub = ub.min(yg) } else { lb = lb.max(yg) }
        } else {
            nr_free += 1;
            free_sum += yg;
        }
    }
    let rho = if nr_free > 0 { free_sum / nr_free as f64 } else { (ub + lb) / 2.0 };

    let mut support = Vec::new();
    let mut coef = Vec::new();
    for t in 0..n {
        if alpha[t] > 0.0 {
            support.push(x[t].clone());
            coef.push(alpha[t] * y[t]);
        }
    }
    let dual = DualSummary {
        iterations,
        kkt_gap: gap,
        converged,
        alpha_min: alpha.iter().copied().fold(f64::INFINITY, f64::min),
        alpha_max: alpha.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        sum_alpha_y: alpha.iter().zip(&y).map(|(a, yv)| a * yv).sum(),
        support_vectors: support.len(),
    };
    debug_assert!(
        dual.alpha_min >= 0.0 && dual.alpha_max <= c && dual.sum_alpha_y.abs() <= 1e-8,
        "dual infeasible: {dual:?}"
    );
    Ok(SvmModel {
        config: cfg.clone(),
        gamma,
        scaler,
        support,
        coef,
        rho,
        dual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::test_data::blobs;

    fn feasible(m: &SvmModel) {
        assert!(m.dual.alpha_min >= 0.0);
        assert!(m.dual.alpha_max <= m.config.c);
        assert!(m.dual.sum_alpha_y.abs() <= 1e-8, "{}", m.dual.sum_alpha_y);
        assert!(m.dual.converged);
    }

    #[test]
    fn two_points_split_at_midpoint() {
        let data = TrainingSet::new(vec![vec![-1.0, 0.0], vec![1.0, 0.0]], vec![0, 1]).unwrap();
        let cfg = SvmConfig { kernel: Kernel::Linear, ..Default::default() };
        let m = train_svm(&data, &cfg).unwrap();
        feasible(&m);
        assert!(m.margin(&[-1.0, 0.0]) < 0.0);
        assert!(m.margin(&[1.0, 0.0]) > 0.0);
        assert!(m.margin(&[0.0, 3.0]).abs() < 1e-9);
        assert_eq!(m.score(&[0.0, 0.0]), 0.5);
    }

    #[test]
    fn rbf_separates_xor() {
        let data = TrainingSet::new(
            vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]],
            vec![1, 1, 0, 0],
        )
        .unwrap();
        let cfg = SvmConfig { c: 10.0, gamma: Some(1.0), ..Default::default() };
        let m = train_svm(&data, &cfg).unwrap();
        feasible(&m);
        for (x, &l) in data.rows().iter().zip(data.labels()) {
            assert_eq!(u8::from(m.margin(x) >= 0.0), l);
        }
    }

    #[test]
    fn duplicated_rows_same_decision_function() {
        let data = blobs(15, 2, 5.0, 11);
        let cfg = SvmConfig { c: 100.0, tol: 1e-10, ..Default::default() };
        let a = train_svm(&data, &cfg).unwrap();
        let b = train_svm(&data.repeated(2), &cfg).unwrap();
        feasible(&a);
        feasible(&b);
        assert!(a.dual.alpha_max < cfg.c, "fixture must not hit the box bound");
        for gx in -10..=10 {
            for gy in -10..=10 {
                let p = [gx as f64 * 0.5, gy as f64 * 0.5];
                assert!((a.margin(&p) - b.margin(&p)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn overlapping_data_respects_box() {
        let data = blobs(60, 3, 0.5, 4);
        for kernel in [Kernel::Linear, Kernel::Rbf] {
            let m = train_svm(&data, &SvmConfig { kernel, ..Default::default() }).unwrap();
            feasible(&m);
            assert!(m.dual.kkt_gap < m.config.tol);
            assert_eq!(m.dual.alpha_max, m.config.c);
        }
    }

    #[test]
    fn cache_size_does_not_change_the_model() {
        let data = blobs(40, 3, 1.0, 8);
        let cfg = SvmConfig::default();
        let full = train_svm(&data, &cfg).unwrap();
        let tiny = solve(&data, &cfg, 2).unwrap();
        assert_eq!(full, tiny);
    }
}
