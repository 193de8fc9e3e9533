//! Dense numerical kernels shared by the metrics and debiasing code.
//!
//! Everything here works in `f64` and is a pure function of its inputs.
//! Singular vectors and principal axes are returned with a fixed sign
//! (first significant component positive) so results are reproducible.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative threshold below which a singular value is treated as zero.
const RANK_TOLERANCE: f64 = 1e-10;

/// Row-major dense matrix with finite entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::Shape(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    actual: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[f64]> {
        // chunks_exact(0) panics
        self.data.chunks(self.cols.max(1)).take(self.rows)
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Largest absolute entry of `self^T self - I`.
    pub fn orthogonality_error(&self) -> f64 {
        let gram = self.transpose().matmul(self).expect("square product");
        let mut worst = 0.0f64;
        for i in 0..gram.rows {
            for j in 0..gram.cols {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram.get(i, j) - target).abs());
            }
        }
        worst
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub(crate) fn from_nalgebra(m: &DMatrix<f64>) -> Matrix {
        let mut data = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                data.push(m[(i, j)]);
            }
        }
        Matrix {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }
}

pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn norm(u: &[f64]) -> f64 {
    dot(u, u).sqrt()
}

pub fn squared_distance(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Cosine of the angle between `u` and `v`, clamped to `[-1, 1]`.
pub fn cosine_similarity(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            actual: v.len(),
        });
    }
    let (nu, nv) = (norm(u), norm(v));
    if !nu.is_finite() || !nv.is_finite() {
        return Err(Error::NonFinite);
    }
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}

/// Fractional ranks starting at 1; tied values share the mean of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = rank;
        }
        start = end;
    }
    ranks
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::TooFew {
            required: 2,
            actual: x.len(),
        });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: y.len(),
        });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Flips `v` so that its first significant component is positive.
pub(crate) fn fix_sign(v: &mut [f64]) {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return;
    }
    if let Some(first) = v.iter().find(|x| x.abs() > scale * 1e-12) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Unit right singular vector belonging to the largest singular value of `m`.
pub fn top_right_singular_vector(m: &Matrix) -> Result<Vec<f64>> {
    if m.rows == 0 || m.cols == 0 || m.data.iter().all(|&x| x == 0.0) {
        return Err(Error::ZeroMatrix);
    }
    let (sigma, mut v) = top_singular_pair(m);
    if sigma == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let n = norm(&v);
    v.iter_mut().for_each(|x| *x /= n);
    fix_sign(&mut v);
    Ok(v)
}

/// Largest singular value together with its right singular vector (unnormalized sign).
pub(crate) fn top_singular_pair(m: &Matrix) -> (f64, Vec<f64>) {
    let svd = m.to_nalgebra().svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let (best, sigma) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &s)| {
            if s > acc.1 {
                (i, s)
            } else {
                acc
            }
        });
    (sigma, v_t.row(best).iter().copied().collect())
}

/// Orthogonal `W` minimising `||A W - B||_F`, with vectors stored as rows.
///
/// `W = U V^T` for the SVD `A^T B = U S V^T`. When `A^T B` is rank deficient
/// the optimum is not unique; the rank-deficient part of `W` is then chosen
/// as the orthogonal map closest to the identity, so that aligning a set with
/// itself yields exactly `I`.
pub fn orthogonal_procrustes(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.rows != b.rows || a.cols != b.cols {
        return Err(Error::Shape(format!(
            "procrustes inputs differ: {}x{} vs {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    if a.rows == 0 || a.cols == 0 {
        return Err(Error::TooFew {
            required: 1,
            actual: a.rows,
        });
    }
    let d = a.cols;
    let cross = a.to_nalgebra().transpose() * b.to_nalgebra();
    let svd = cross.svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v = svd.v_t.expect("right singular vectors requested").transpose();
    let sigma = svd.singular_values;

    let smax = sigma.iter().fold(0.0f64, |m, &s| m.max(s));
    let tol = smax * RANK_TOLERANCE;
    let (kept, null): (Vec<usize>, Vec<usize>) = (0..d).partition(|&i| smax > 0.0 && sigma[i] > tol);

    let mut w = DMatrix::<f64>::zeros(d, d);
    for &i in &kept {
        w += u.column(i) * v.column(i).transpose();
    }
    if !null.is_empty() {
        let u_null = u.select_columns(&null);
        let v_null = v.select_columns(&null);
        // closest orthogonal map between the two complements
        let overlap = u_null.transpose() * &v_null;
        let inner = overlap.svd(true, true);
        let p = inner.u.expect("requested");
        let q_t = inner.v_t.expect("requested");
        w += u_null * p * q_t * v_null.transpose();
    }
    Ok(Matrix::from_nalgebra(&w))
}

/// Projects mean-centred points onto their top two principal axes.
pub fn pca_2d(points: &Matrix) -> Result<Matrix> {
    if points.rows < 2 {
        return Err(Error::TooFew {
            required: 2,
            actual: points.rows,
        });
    }
    if points.cols < 2 {
        return Err(Error::Shape(format!(
            "pca_2d needs at least 2 dimensions, got {}",
            points.cols
        )));
    }
    let (n, d) = (points.rows, points.cols);
    let mut mean = vec![0.0; d];
    for row in points.row_iter() {
        for (m, x) in mean.iter_mut().zip(row) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut centered = DMatrix::<f64>::zeros(n, d);
    for i in 0..n {
        for j in 0..d {
            centered[(i, j)] = points.get(i, j) - mean[j];
        }
    }

    let svd = centered.clone().svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));

    let mut axes: Vec<Vec<f64>> = order
        .iter()
        .take(2)
        .map(|&i| v_t.row(i).iter().copied().collect())
        .collect();
    // n == 2 yields a single singular vector; any orthogonal axis carries zero variance
    while axes.len() < 2 {
        axes.push(orthogonal_complement_axis(&axes[0]));
    }
    for axis in &mut axes {
        fix_sign(axis);
    }

    let mut out = Matrix::zeros(n, 2);
    for i in 0..n {
        let row: Vec<f64> = (0..d).map(|j| centered[(i, j)]).collect();
        out.data[i * 2] = dot(&row, &axes[0]);
        out.data[i * 2 + 1] = dot(&row, &axes[1]);
    }
    Ok(out)
}

fn orthogonal_complement_axis(axis: &[f64]) -> Vec<f64> {
    // Gram-Schmidt against the standard basis vector least aligned with `axis`
    let pick = axis
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mut e = vec![0.0; axis.len()];
    e[pick] = 1.0;
    let proj = dot(&e, axis) / dot(axis, axis).max(f64::MIN_POSITIVE);
    for (x, a) in e.iter_mut().zip(axis) {
        *x -= proj * a;
    }
    let n = norm(&e);
    e.iter_mut().for_each(|x| *x /= n);
    e
}
