//! Binary soft-margin SVM with an RBF kernel, trained by SMO.
//!
//! Working-set selection follows the second-order rule of Fan, Chen and Lin
//! (2005) as used by LIBSVM. There is no randomness: examples are visited in
//! index order and ties go to the last candidate, so training is a pure
//! function of the data and hyperparameters.

use crate::numerics::squared_distance;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
pub struct SvmConfig {
    pub gamma: f64,
    pub c: f64,
    pub tolerance: f64,
    pub max_iter: usize,
}

impl SvmConfig {
    pub fn new(gamma: f64, c: f64) -> Self {
        Self {
            gamma,
            c,
            tolerance: 1e-3,
            max_iter: 100_000,
        }
    }
}

pub fn rbf(gamma: f64, x: &[f64], y: &[f64]) -> f64 {
    (-gamma * squared_distance(x, y)).exp()
}

#[derive(Debug, Clone)]
pub struct RbfSvm {
    support: Vec<Vec<f64>>,
    coef: Vec<f64>,
    rho: f64,
    gamma: f64,
}

impl RbfSvm {
    /// Trains on `points` with labels `+1.0` / `-1.0`. Both classes must be present.
    pub fn train(points: &[&[f64]], labels: &[f64], cfg: &SvmConfig) -> Self {
        let n = points.len();
        let kernel: Vec<Vec<f64>> = points
            .iter()
            .map(|p| points.iter().map(|q| rbf(cfg.gamma, p, q)).collect())
            .collect();
        let (alpha, rho) = solve(&kernel, labels, cfg);
        let mut support = Vec::new();
        let mut coef = Vec::new();
        for i in 0..n {
            if alpha[i] > 0.0 {
                support.push(points[i].to_vec());
                coef.push(alpha[i] * labels[i]);
            }
        }
        Self {
            support,
            coef,
            rho,
            gamma: cfg.gamma,
        }
    }

    pub fn decision(&self, x: &[f64]) -> f64 {
        self.support
            .iter()
            .zip(&self.coef)
            .map(|(s, c)| c * rbf(self.gamma, s, x))
            .sum::<f64>()
            - self.rho
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        if self.decision(x) > 0.0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Solves the dual on a precomputed kernel; returns `(alpha, rho)`.
fn solve(k: &[Vec<f64>], y: &[f64], cfg: &SvmConfig) -> (Vec<f64>, f64) {
    let n = y.len();
    let c = cfg.c;
    let q = |i: usize, j: usize| y[i] * y[j] * k[i][j];
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let upper = |a: f64| a >= c;
    let lower = |a: f64| a <= 0.0;

    for _ in 0..cfg.max_iter {
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            if y[t] > 0.0 {
                if !upper(alpha[t]) && -grad[t] >= gmax {
                    gmax = -grad[t];
                    i_sel = Some(t);
                }
            } else if !lower(alpha[t]) && grad[t] >= gmax {
                gmax = grad[t];
                i_sel = Some(t);
            }
        }
        let Some(i) = i_sel else { break };

        let mut gmax2 = f64::NEG_INFINITY;
        let mut j_sel = None;
        let mut obj_min = f64::INFINITY;
        for t in 0..n {
            let grad_diff;
            if y[t] > 0.0 {
                if lower(alpha[t]) {
                    continue;
                }
                gmax2 = gmax2.max(grad[t]);
                grad_diff = gmax + grad[t];
            } else {
                if upper(alpha[t]) {
                    continue;
                }
                gmax2 = gmax2.max(-grad[t]);
                grad_diff = gmax - grad[t];
            }
            if grad_diff > 0.0 {
                let quad = k[i][i] + k[t][t] - 2.0 * y[i] * y[t] * k[i][t];
                let obj = -(grad_diff * grad_diff) / if quad > 0.0 { quad } else { TAU };
                if obj <= obj_min {
                    obj_min = obj;
                    j_sel = Some(t);
                }
            }
        }
        let Some(j) = j_sel else { break };
        if gmax + gmax2 < cfg.tolerance {
            break;
        }

        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let quad = (k[i][i] + k[j][j] + 2.0 * q(i, j)).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (k[i][i] + k[j][j] - 2.0 * q(i, j)).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += q(i, t) * di + q(j, t) * dj;
        }
    }

    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut free = 0usize;
    let mut free_sum = 0.0;
    for t in 0..n {
        let yg = y[t] * grad[t];
        if upper(alpha[t]) {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if lower(alpha[t]) {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    let rho = if free > 0 {
        free_sum / free as f64
    } else {
        (ub + lb) / 2.0
    };
    (alpha, rho)
}
