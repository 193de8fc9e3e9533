//! Randomized comparison of the metrics against brute-force references.

#[path = "common/oracle.rs"]
mod oracle;

use embias::metrics::{bat, ect, weat};
use embias::numerics::{orthogonal_procrustes, pca_2d, top_right_singular_vector, Matrix};
use embias::{BiasSpecification, EmbeddingSpace};
use oracle::Vector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Instance {
    space: EmbeddingSpace,
    spec: BiasSpecification,
    sets: [Vec<Vector>; 4],
}

fn random_instance(rng: &mut ChaCha8Rng) -> Instance {
    let d = rng.random_range(2..=5);
    let sizes = [
        rng.random_range(1..=4),
        rng.random_range(1..=4),
        rng.random_range(2..=4),
        rng.random_range(2..=4),
    ];
    let mut pairs = Vec::new();
    let mut names: [Vec<String>; 4] = Default::default();
    let mut sets: [Vec<Vector>; 4] = Default::default();
    for (s, &size) in sizes.iter().enumerate() {
        for i in 0..size {
            let v: Vector = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let name = format!("s{s}w{i}");
            names[s].push(name.clone());
            sets[s].push(v.clone());
            pairs.push((name, v));
        }
    }
    let refs = |s: usize| names[s].iter().map(String::as_str).collect::<Vec<_>>();
    Instance {
        space: EmbeddingSpace::from_pairs("rand", &pairs).unwrap(),
        spec: BiasSpecification::explicit("rand", &refs(0), &refs(1), &refs(2), &refs(3)).unwrap(),
        sets,
    }
}

#[test]
fn weat_ect_bat_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..50 {
        let inst = random_instance(&mut rng);
        let [t1, t2, a1, a2] = &inst.sets;

        let got = weat(&inst.space, &inst.spec, 100_000, 1).unwrap();
        assert!(got.exhaustive);
        assert!((got.statistic - oracle::weat_statistic(t1, t2, a1, a2)).abs() <= 1e-9);
        let (p, splits) = oracle::weat_exhaustive_p(t1, t2, a1, a2);
        assert_eq!(got.n_permutations_used, splits);
        assert!((got.p_value - p).abs() <= 1e-9, "p {} vs {}", got.p_value, p);
        let es = oracle::weat_effect_size(t1, t2, a1, a2);
        assert!((got.effect_size.unwrap() - es).abs() <= 1e-9);

        let attrs: Vec<Vector> = a1.iter().chain(a2).cloned().collect();
        let e = ect(&inst.space, &inst.spec).unwrap();
        assert!((e - oracle::ect(t1, t2, &attrs)).abs() <= 1e-9);

        let b = bat(&inst.space, &inst.spec).unwrap();
        assert!((b - oracle::bat(t1, t2, a1, a2)).abs() <= 1e-9);
    }
}

#[test]
fn top_singular_vector_matches_eigen_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let rows: Vec<Vector> = (0..rng.random_range(2..8))
            .map(|_| (0..4).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        let v = top_right_singular_vector(&Matrix::from_rows(&rows).unwrap()).unwrap();
        let (_, vecs) = oracle::jacobi_eigen(&oracle::gram(&rows));
        let align = oracle::dot(&v, &vecs[0]).abs();
        assert!((align - 1.0).abs() <= 1e-9, "alignment {align}");
    }
}

#[test]
fn procrustes_hits_the_best_2d_orthogonal_map() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let a: Vec<Vector> = (0..3).map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect();
        let b: Vec<Vector> = (0..3).map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect();
        let am = Matrix::from_rows(&a).unwrap();
        let w = orthogonal_procrustes(&am, &Matrix::from_rows(&b).unwrap()).unwrap();
        let residual = |w: [[f64; 2]; 2]| -> f64 {
            a.iter()
                .zip(&b)
                .map(|(x, y)| {
                    let m = [x[0] * w[0][0] + x[1] * w[1][0], x[0] * w[0][1] + x[1] * w[1][1]];
                    (m[0] - y[0]).powi(2) + (m[1] - y[1]).powi(2)
                })
                .sum()
        };
        // enumerate rotations and reflections on a fine grid
        let mut best = f64::INFINITY;
        for step in 0..36_000 {
            let t = step as f64 * std::f64::consts::TAU / 36_000.0;
            let (c, s) = (t.cos(), t.sin());
            best = best.min(residual([[c, -s], [s, c]])).min(residual([[c, s], [s, -c]]));
        }
        let ours = residual([[w.get(0, 0), w.get(0, 1)], [w.get(1, 0), w.get(1, 1)]]);
        assert!(ours <= best + 1e-9, "ours {ours} best {best}");
    }
}

#[test]
fn procrustes_single_row_maps_e1_to_e2() {
    let w = orthogonal_procrustes(
        &Matrix::from_rows(&[[1.0, 0.0]]).unwrap(),
        &Matrix::from_rows(&[[0.0, 1.0]]).unwrap(),
    )
    .unwrap();
    // exhaustive 2x2 search finds residual 0 at W e.g. [[0,1],[1,0]] or [[0,1],[-1,0]]
    assert!((w.get(0, 0)).abs() <= 1e-12 && (w.get(0, 1) - 1.0).abs() <= 1e-12);
    assert!(w.orthogonality_error() <= 1e-10);
}

#[test]
fn pca_rectangle_preserves_distances() {
    // corners of a 4 x 2 rectangle in the z = 0 plane, shifted off-origin
    let pts = [[3.0, 1.0, 0.0], [7.0, 1.0, 0.0], [7.0, 3.0, 0.0], [3.0, 3.0, 0.0]];
    let out = pca_2d(&Matrix::from_rows(&pts).unwrap()).unwrap();
    let rows: Vec<Vector> = pts.iter().map(|p| p.to_vec()).collect();
    // covariance eigenvalues via the oracle: 4 (x spread) and 1 (y spread), then 0
    let centered: Vec<Vector> = rows.iter().map(|r| vec![r[0] - 5.0, r[1] - 2.0, r[2]]).collect();
    let (vals, _) = oracle::jacobi_eigen(&oracle::gram(&centered));
    assert!((vals[0] - 16.0).abs() < 1e-9 && (vals[1] - 4.0).abs() < 1e-9 && vals[2].abs() < 1e-9);
    for i in 0..4 {
        for j in 0..4 {
            let before = oracle::dist(&rows[i], &rows[j]);
            let after = oracle::dist(out.row(i), out.row(j));
            assert!((before - after).abs() <= 1e-9);
        }
    }
    // first axis carries the larger spread
    let spread = |c: usize| (0..4).map(|i| out.get(i, c).powi(2)).sum::<f64>();
    assert!(spread(0) >= spread(1));
}
