//! Brute-force reference implementations used to check the library.
//!
//! Nothing here calls into `embias`: every quantity is recomputed from
//! plain vectors with the most direct formula available.

#![allow(dead_code)]

pub type Vector = Vec<f64>;

pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..u.len() {
        s += u[i] * v[i];
    }
    s
}

pub fn cos(u: &[f64], v: &[f64]) -> f64 {
    dot(u, v) / (dot(u, u).sqrt() * dot(v, v).sqrt())
}

pub fn dist(u: &[f64], v: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..u.len() {
        s += (u[i] - v[i]).powi(2);
    }
    s.sqrt()
}

fn mean_cos(t: &[f64], attrs: &[Vector]) -> f64 {
    attrs.iter().map(|a| cos(t, a)).sum::<f64>() / attrs.len() as f64
}

pub fn association(t: &[f64], a1: &[Vector], a2: &[Vector]) -> f64 {
    mean_cos(t, a1) - mean_cos(t, a2)
}

pub fn weat_statistic(t1: &[Vector], t2: &[Vector], a1: &[Vector], a2: &[Vector]) -> f64 {
    t1.iter().map(|t| association(t, a1, a2)).sum::<f64>() - t2.iter().map(|t| association(t, a1, a2)).sum::<f64>()
}

/// Fraction of splits (first group of size ceil(n/2)) whose statistic exceeds the observed one.
pub fn weat_exhaustive_p(t1: &[Vector], t2: &[Vector], a1: &[Vector], a2: &[Vector]) -> (f64, usize) {
    let pool: Vec<Vector> = t1.iter().chain(t2).cloned().collect();
    let n = pool.len();
    let k = n.div_ceil(2);
    let observed = weat_statistic(t1, t2, a1, a2);
    let mut exceed = 0;
    let mut total = 0;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let x1: Vec<Vector> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| pool[i].clone()).collect();
        let x2: Vec<Vector> = (0..n).filter(|i| mask & (1 << i) == 0).map(|i| pool[i].clone()).collect();
        total += 1;
        if weat_statistic(&x1, &x2, a1, a2) > observed {
            exceed += 1;
        }
    }
    (exceed as f64 / total as f64, total)
}

pub fn weat_effect_size(t1: &[Vector], t2: &[Vector], a1: &[Vector], a2: &[Vector]) -> f64 {
    let s1: Vec<f64> = t1.iter().map(|t| association(t, a1, a2)).collect();
    let s2: Vec<f64> = t2.iter().map(|t| association(t, a1, a2)).collect();
    let all: Vec<f64> = s1.iter().chain(&s2).copied().collect();
    let m = all.iter().sum::<f64>() / all.len() as f64;
    let sd = (all.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (all.len() - 1) as f64).sqrt();
    (s1.iter().sum::<f64>() / s1.len() as f64 - s2.iter().sum::<f64>() / s2.len() as f64) / sd
}

/// Rank = 1 + (#strictly smaller) + (#ties excluding self) / 2.
pub fn ranks(xs: &[f64]) -> Vec<f64> {
    xs.iter()
        .map(|&x| {
            let less = xs.iter().filter(|&&y| y < x).count() as f64;
            let equal = xs.iter().filter(|&&y| y == x).count() as f64;
            1.0 + less + (equal - 1.0) / 2.0
        })
        .collect()
}

pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

pub fn mean(vs: &[Vector]) -> Vector {
    let mut m = vec![0.0; vs[0].len()];
    for v in vs {
        for i in 0..m.len() {
            m[i] += v[i] / vs.len() as f64;
        }
    }
    m
}

pub fn ect(t1: &[Vector], t2: &[Vector], attrs: &[Vector]) -> f64 {
    let (m1, m2) = (mean(t1), mean(t2));
    let s1: Vec<f64> = attrs.iter().map(|a| cos(a, &m1)).collect();
    let s2: Vec<f64> = attrs.iter().map(|a| cos(a, &m2)).collect();
    spearman(&s1, &s2)
}

pub fn bat(t1: &[Vector], t2: &[Vector], a1: &[Vector], a2: &[Vector]) -> f64 {
    let mut favorable = 0usize;
    let mut total = 0usize;
    let combine = |x: &[f64], y: &[f64], z: &[f64]| -> Vector { (0..x.len()).map(|i| x[i] - y[i] + z[i]).collect() };
    for u in t1 {
        for v in t2 {
            for (i, p) in a1.iter().enumerate() {
                for (j, q) in a2.iter().enumerate() {
                    let q1 = combine(u, v, q);
                    for (d, other) in a2.iter().enumerate() {
                        if d != j {
                            total += 1;
                            if dist(&q1, p) < dist(&q1, other) {
                                favorable += 1;
                            }
                        }
                    }
                    let q2 = combine(p, u, v);
                    for (d, other) in a1.iter().enumerate() {
                        if d != i {
                            total += 1;
                            if dist(&q2, q) < dist(&q2, other) {
                                favorable += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    favorable as f64 / total as f64
}

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix.
/// Returns eigenvalues (descending) with eigenvectors as rows.
pub fn jacobi_eigen(a: &[Vector]) -> (Vec<f64>, Vec<Vector>) {
    let n = a.len();
    let mut m: Vec<Vector> = a.to_vec();
    let mut v: Vec<Vector> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[i][j].powi(2)).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[k][p], v[k][q]);
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j][j].partial_cmp(&m[i][i]).unwrap());
    let values = order.iter().map(|&i| m[i][i]).collect();
    let vectors = order.iter().map(|&i| (0..n).map(|k| v[k][i]).collect()).collect();
    (values, vectors)
}

pub fn gram(rows: &[Vector]) -> Vec<Vector> {
    let d = rows[0].len();
    (0..d)
        .map(|i| (0..d).map(|j| rows.iter().map(|r| r[i] * r[j]).sum()).collect())
        .collect()
}
