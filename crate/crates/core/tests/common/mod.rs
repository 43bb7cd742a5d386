//! Independent reference implementations used as test oracles.
//!
//! Everything here is written from the formulas with plain loops and shares
//! no code with the library beyond the `Dataset` container.

#![allow(dead_code)]

use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rbrl::{Dataset, HyperParams};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.gen_range(-scale..scale))
}

pub fn random_signs(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 })
}

pub fn random_dataset(rng: &mut ChaCha8Rng, n: usize, m: usize, l: usize) -> Dataset {
    let x = random_matrix(rng, n, m, 2.0);
    let y = random_signs(rng, n, l);
    Dataset::new(x, y).unwrap()
}

/// `n ≤ 6`, `m ≤ 5`, `l ≤ 4`.
pub fn small_dataset(rng: &mut ChaCha8Rng) -> Dataset {
    let n = rng.gen_range(1..=6);
    let m = rng.gen_range(1..=5);
    let l = rng.gen_range(1..=4);
    random_dataset(rng, n, m, l)
}

/// Each tradeoff is zero a quarter of the time, otherwise log-uniform in `[1e-3, 2]`.
pub fn mixed_lambda(rng: &mut ChaCha8Rng) -> f64 {
    if rng.gen_bool(0.25) {
        0.0
    } else {
        10f64.powf(rng.gen_range(-3.0..0.3))
    }
}

pub fn mixed_params(rng: &mut ChaCha8Rng) -> HyperParams {
    HyperParams::linear(mixed_lambda(rng), mixed_lambda(rng), mixed_lambda(rng))
}

pub fn with_ones(x: ArrayView2<f64>) -> Array2<f64> {
    let (n, m) = x.dim();
    Array2::from_shape_fn((n, m + 1), |(i, j)| if j < m { x[[i, j]] } else { 1.0 })
}

pub fn matmul(a: ArrayView2<f64>, b: ArrayView2<f64>) -> Array2<f64> {
    assert_eq!(a.ncols(), b.nrows());
    let mut out = Array2::zeros((a.nrows(), b.ncols()));
    for i in 0..a.nrows() {
        for j in 0..b.ncols() {
            let mut s = 0.0;
            for k in 0..a.ncols() {
                s += a[[i, k]] * b[[k, j]];
            }
            out[[i, j]] = s;
        }
    }
    out
}

pub fn frob(a: ArrayView2<f64>) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn frob_diff(a: ArrayView2<f64>, b: ArrayView2<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Loss terms of the score matrix and their derivative with respect to the scores.
pub fn naive_score_loss(scores: ArrayView2<f64>, y: ArrayView2<f64>, lambda2: f64) -> (f64, Array2<f64>) {
    let (n, l) = y.dim();
    let mut value = 0.0;
    let mut d = Array2::zeros((n, l));
    for i in 0..n {
        for j in 0..l {
            let r = 1.0 - y[[i, j]] * scores[[i, j]];
            if r > 0.0 {
                value += 0.5 * r * r;
                d[[i, j]] -= y[[i, j]] * r;
            }
        }
        let pos: Vec<usize> = (0..l).filter(|&j| y[[i, j]] > 0.0).collect();
        let neg: Vec<usize> = (0..l).filter(|&j| y[[i, j]] < 0.0).collect();
        if pos.is_empty() || neg.is_empty() {
            continue;
        }
        let c = 1.0 / (pos.len() * neg.len()) as f64;
        for &p in &pos {
            for &q in &neg {
                let r = 2.0 - (scores[[i, p]] - scores[[i, q]]);
                if r > 0.0 {
                    value += 0.5 * lambda2 * c * r * r;
                    d[[i, p]] -= lambda2 * c * r;
                    d[[i, q]] += lambda2 * c * r;
                }
            }
        }
    }
    (value, d)
}

/// Smooth objective and gradient in weight space.
pub fn naive_linear(w: ArrayView2<f64>, ds: &Dataset, hp: &HyperParams) -> (f64, Array2<f64>) {
    let x = ds.features().view();
    let scores = matmul(x, w);
    let (loss, d) = naive_score_loss(scores.view(), ds.labels().view(), hp.lambda2);
    let value = loss + 0.5 * hp.lambda1 * frob(w).powi(2);
    let mut grad = matmul(x.t(), d.view());
    grad.zip_mut_with(&w, |g, &wv| *g += hp.lambda1 * wv);
    (value, grad)
}

/// Smooth objective and gradient in coefficient space, `k` symmetric.
pub fn naive_kernel(a: ArrayView2<f64>, k: ArrayView2<f64>, ds: &Dataset, hp: &HyperParams) -> (f64, Array2<f64>) {
    let ka = matmul(k, a);
    let (loss, d) = naive_score_loss(ka.view(), ds.labels().view(), hp.lambda2);
    let tr: f64 = a.iter().zip(ka.iter()).map(|(x, y)| x * y).sum();
    let value = loss + 0.5 * hp.lambda1 * tr;
    let mut grad = matmul(k.t(), d.view());
    grad.zip_mut_with(&ka, |g, &v| *g += hp.lambda1 * v);
    (value, grad)
}

/// One-sided Jacobi SVD: returns `(B, s, V)` with `A = B Vᵀ`, `B`'s columns
/// orthogonal with norms `s`, and `V` orthogonal (n×n).
pub fn jacobi(a: ArrayView2<f64>) -> (Array2<f64>, Vec<f64>, Array2<f64>) {
    let n = a.ncols();
    let mut b = a.to_owned();
    let mut v = Array2::<f64>::eye(n);
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = b.column(p).iter().map(|x| x * x).sum();
                let beta: f64 = b.column(q).iter().map(|x| x * x).sum();
                let gamma: f64 = b.column(p).iter().zip(b.column(q).iter()).map(|(x, y)| x * y).sum();
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for m in [&mut b, &mut v] {
                    for i in 0..m.nrows() {
                        let (x, y) = (m[[i, p]], m[[i, q]]);
                        m[[i, p]] = c * x - s * y;
                        m[[i, q]] = s * x + c * y;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let s = (0..n).map(|j| b.column(j).iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    (b, s, v)
}

pub fn singular(a: ArrayView2<f64>) -> Vec<f64> {
    jacobi(a).1
}

pub fn nuclear(a: ArrayView2<f64>) -> f64 {
    singular(a).iter().sum()
}

pub fn spectral(a: ArrayView2<f64>) -> f64 {
    singular(a).into_iter().fold(0.0, f64::max)
}

/// Soft-thresholds singular values: `Σ_j b_j (max(s_j - eps, 0) / s_j) v_jᵀ`.
pub fn reference_svt(a: ArrayView2<f64>, eps: f64) -> Array2<f64> {
    let (b, s, v) = jacobi(a);
    let mut out = Array2::zeros(a.dim());
    for j in 0..s.len() {
        if s[j] <= eps {
            continue;
        }
        let f = (s[j] - eps) / s[j];
        for i in 0..a.nrows() {
            for k in 0..a.ncols() {
                out[[i, k]] += b[[i, j]] * f * v[[k, j]];
            }
        }
    }
    out
}

/// Orthonormal bases of the left and right singular subspaces above `tol`.
pub fn singular_bases(a: ArrayView2<f64>, tol: f64) -> (Array2<f64>, Array2<f64>) {
    let (b, s, v) = jacobi(a);
    let keep: Vec<usize> = (0..s.len()).filter(|&j| s[j] > tol).collect();
    let u = Array2::from_shape_fn((a.nrows(), keep.len()), |(i, k)| b[[i, keep[k]]] / s[keep[k]]);
    let vr = Array2::from_shape_fn((a.ncols(), keep.len()), |(i, k)| v[[i, keep[k]]]);
    (u, vr)
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(a: ArrayView2<f64>) -> f64 {
    let m = faer::Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]]);
    m.self_adjoint_eigenvalues(faer::Side::Lower).unwrap()[0]
}

/// Gradient Lipschitz bound from the curvature of each term:
/// `‖X‖_F² + λ1 + 2 λ2 ‖X‖_F²` (linear) and the analog with `K` in place of `X`.
pub fn crude_lipschitz_linear(ds: &Dataset, hp: &HyperParams) -> f64 {
    let xf2 = frob(ds.features().view()).powi(2);
    xf2 + hp.lambda1 + 2.0 * hp.lambda2 * xf2
}

pub fn crude_lipschitz_kernel(k: ArrayView2<f64>, hp: &HyperParams) -> f64 {
    let kf = frob(k);
    kf * kf + hp.lambda1 * kf + 2.0 * hp.lambda2 * kf * kf
}

pub enum Space<'a> {
    Linear,
    Kernel(ArrayView2<'a, f64>),
}

pub fn naive_smooth(space: &Space, p: ArrayView2<f64>, ds: &Dataset, hp: &HyperParams) -> (f64, Array2<f64>) {
    match space {
        Space::Linear => naive_linear(p, ds, hp),
        Space::Kernel(k) => naive_kernel(p, *k, ds, hp),
    }
}

pub fn naive_full(space: &Space, p: ArrayView2<f64>, ds: &Dataset, hp: &HyperParams) -> f64 {
    naive_smooth(space, p, ds, hp).0 + hp.lambda3 * nuclear(p)
}

/// Proximal gradient without momentum, step `1/L` with the crude bound.
/// Returns the final iterate and its objective.
pub fn prox_gradient_oracle(
    space: &Space,
    ds: &Dataset,
    hp: &HyperParams,
    dim: (usize, usize),
    iters: usize,
) -> (Array2<f64>, f64) {
    let l = match space {
        Space::Linear => crude_lipschitz_linear(ds, hp),
        Space::Kernel(k) => crude_lipschitz_kernel(*k, hp),
    }
    .max(1e-12);
    let mut p = Array2::<f64>::zeros(dim);
    for _ in 0..iters {
        let (_, g) = naive_smooth(space, p.view(), ds, hp);
        let point = &p - &(g / l);
        p = reference_svt(point.view(), hp.lambda3 / l);
    }
    let f = naive_full(space, p.view(), ds, hp);
    (p, f)
}

pub fn gram_linear(x: ArrayView2<f64>) -> Array2<f64> {
    matmul(x, x.t())
}

pub fn gram_rbf(x: ArrayView2<f64>, gamma: f64) -> Array2<f64> {
    let n = x.nrows();
    Array2::from_shape_fn((n, n), |(i, j)| {
        let d2: f64 = x.row(i).iter().zip(x.row(j).iter()).map(|(a, b)| (a - b) * (a - b)).sum();
        (-gamma * d2).exp()
    })
}

pub mod metrics {
    //! Brute-force metric definitions. `None` marks a metric with no usable row.

    fn row_sets(y: &[f64]) -> (Vec<usize>, Vec<usize>) {
        let pos = (0..y.len()).filter(|&j| y[j] > 0.0).collect();
        let neg = (0..y.len()).filter(|&j| y[j] <= 0.0).collect();
        (pos, neg)
    }

    /// 1 + labels scored strictly higher + equal-scored labels with a smaller index.
    pub fn rank(f: &[f64], j: usize) -> usize {
        1 + (0..f.len()).filter(|&k| f[k] > f[j] || (f[k] == f[j] && k < j)).count()
    }

    pub fn hamming(h: &[Vec<f64>], y: &[Vec<f64>]) -> f64 {
        let l = y[0].len();
        let wrong: usize = h.iter().zip(y).map(|(a, b)| a.iter().zip(b).filter(|(p, q)| p != q).count()).sum();
        wrong as f64 / (y.len() * l) as f64
    }

    pub fn subset(h: &[Vec<f64>], y: &[Vec<f64>]) -> f64 {
        h.iter().zip(y).filter(|(a, b)| a == b).count() as f64 / y.len() as f64
    }

    pub fn f1(h: &[Vec<f64>], y: &[Vec<f64>]) -> f64 {
        let mut total = 0.0;
        for (a, b) in h.iter().zip(y) {
            let (pp, _) = row_sets(a);
            let (yp, _) = row_sets(b);
            let both = pp.iter().filter(|j| yp.contains(j)).count();
            total += if pp.len() + yp.len() == 0 {
                1.0
            } else {
                2.0 * both as f64 / (pp.len() + yp.len()) as f64
            };
        }
        total / y.len() as f64
    }

    pub fn ranking_loss(f: &[Vec<f64>], y: &[Vec<f64>]) -> Option<f64> {
        let mut vals = Vec::new();
        for (s, t) in f.iter().zip(y) {
            let (pos, neg) = row_sets(t);
            if pos.is_empty() || neg.is_empty() {
                continue;
            }
            let mut bad = 0;
            for &p in &pos {
                for &q in &neg {
                    if s[p] <= s[q] {
                        bad += 1;
                    }
                }
            }
            vals.push(bad as f64 / (pos.len() * neg.len()) as f64);
        }
        mean(&vals)
    }

    pub fn coverage(f: &[Vec<f64>], y: &[Vec<f64>]) -> Option<f64> {
        let l = y[0].len() as f64;
        let mut vals = Vec::new();
        for (s, t) in f.iter().zip(y) {
            let (pos, _) = row_sets(t);
            if pos.is_empty() {
                continue;
            }
            let worst = pos.iter().map(|&j| rank(s, j)).max().unwrap();
            vals.push(worst as f64);
        }
        mean(&vals).map(|m| (m - 1.0) / l)
    }

    pub fn average_precision(f: &[Vec<f64>], y: &[Vec<f64>]) -> Option<f64> {
        let mut vals = Vec::new();
        for (s, t) in f.iter().zip(y) {
            let (pos, _) = row_sets(t);
            if pos.is_empty() {
                continue;
            }
            let mut acc = 0.0;
            for &j in &pos {
                let rj = rank(s, j);
                let above = pos.iter().filter(|&&k| rank(s, k) <= rj).count();
                acc += above as f64 / rj as f64;
            }
            vals.push(acc / pos.len() as f64);
        }
        mean(&vals)
    }

    fn mean(v: &[f64]) -> Option<f64> {
        if v.is_empty() {
            None
        } else {
            Some(v.iter().sum::<f64>() / v.len() as f64)
        }
    }

    pub fn sign_rows(f: &[Vec<f64>]) -> Vec<Vec<f64>> {
        f.iter()
            .map(|r| r.iter().map(|&v| if v > 0.0 { 1.0 } else { -1.0 }).collect())
            .collect()
    }

    /// `[hal, sa, f1e, ral, cov, ap]`, or `None` if a ranking metric has no usable row.
    pub fn all(f: &[Vec<f64>], y: &[Vec<f64>]) -> Option<[f64; 6]> {
        let h = sign_rows(f);
        Some([
            hamming(&h, y),
            subset(&h, y),
            f1(&h, y),
            ranking_loss(f, y)?,
            coverage(f, y)?,
            average_precision(f, y)?,
        ])
    }
}

pub fn rows(a: ArrayView2<f64>) -> Vec<Vec<f64>> {
    a.outer_iter().map(|r| r.to_vec()).collect()
}

pub fn from_rows(r: &[Vec<f64>]) -> Array2<f64> {
    Array2::from_shape_fn((r.len(), r[0].len()), |(i, j)| r[i][j])
}

/// Largest violation of `M - Z ∈ eps ∂‖Z‖_*`, scaled so that 0 means exact.
pub fn subgradient_residual(m: &Array2<f64>, z: &Array2<f64>, eps: f64) -> f64 {
    let g = (m - z) / eps;
    let top = spectral(z.view()).max(1.0);
    let (ur, vr) = singular_bases(z.view(), 1e-10 * top);
    let pu = Array2::<f64>::eye(m.nrows()) - matmul(ur.view(), ur.t());
    let pv = Array2::<f64>::eye(m.ncols()) - matmul(vr.view(), vr.t());
    let k = ur.ncols();

    let support = matmul(matmul(ur.t(), g.view()).view(), vr.view()) - Array2::<f64>::eye(k);
    let on_support = support.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let cross_left = spectral(matmul(matmul(ur.t(), g.view()).view(), pv.view()).view());
    let cross_right = spectral(matmul(matmul(pu.view(), g.view()).view(), vr.view()).view());
    let off_support = (spectral(matmul(matmul(pu.view(), g.view()).view(), pv.view()).view()) - 1.0).max(0.0);
    on_support.max(cross_left).max(cross_right).max(off_support)
}

pub fn prox_objective_2x2(z: &[f64; 4], m: &Array2<f64>, eps: f64) -> f64 {
    let d: f64 = (0..4).map(|k| (z[k] - m[[k / 2, k % 2]]).powi(2)).sum();
    // σ1 + σ2 = sqrt(‖Z‖_F² + 2|det Z|) for 2x2 matrices
    let fro2: f64 = z.iter().map(|v| v * v).sum();
    let det = z[0] * z[3] - z[1] * z[2];
    0.5 * d + eps * (fro2 + 2.0 * det.abs()).max(0.0).sqrt()
}

/// Pattern search over the four entries plus random directions.
pub fn local_search_2x2(start: [f64; 4], m: &Array2<f64>, eps: f64, r: &mut ChaCha8Rng) -> f64 {
    let mut z = start;
    let mut best = prox_objective_2x2(&z, m, eps);
    let mut step = 1.0;
    while step > 1e-12 {
        let mut improved = false;
        let mut dirs: Vec<[f64; 4]> = (0..4)
            .flat_map(|k| {
                let mut e = [0.0; 4];
                e[k] = 1.0;
                let mut f = [0.0; 4];
                f[k] = -1.0;
                [e, f]
            })
            .collect();
        for _ in 0..8 {
            let d: [f64; 4] = std::array::from_fn(|_| r.gen_range(-1.0..1.0));
            dirs.push(d);
        }
        for d in dirs {
            let cand: [f64; 4] = std::array::from_fn(|k| z[k] + step * d[k]);
            let v = prox_objective_2x2(&cand, m, eps);
            if v < best {
                best = v;
                z = cand;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best
}

/// A base point at a random scale and a perturbation at another.
pub fn random_pair(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> (Array2<f64>, Array2<f64>) {
    let scales = [0.01, 0.3, 1.0, 5.0];
    let s1 = scales[r.gen_range(0..4)];
    let p1 = random_matrix(r, rows, cols, s1);
    let s2 = [1e-3, 0.1, 1.0, 5.0][r.gen_range(0..4)];
    let delta = random_matrix(r, rows, cols, s2);
    let p2 = &p1 + &delta;
    (p1, p2)
}

fn permutations(l: usize) -> Vec<Vec<f64>> {
    fn go(rest: Vec<f64>, acc: Vec<f64>, out: &mut Vec<Vec<f64>>) {
        if rest.is_empty() {
            out.push(acc);
            return;
        }
        for k in 0..rest.len() {
            let mut r = rest.clone();
            let v = r.remove(k);
            let mut a = acc.clone();
            a.push(v);
            go(r, a, out);
        }
    }
    let mut out = Vec::new();
    go((1..=l).map(|v| v as f64).collect(), Vec::new(), &mut out);
    out
}

/// Every tie-free score row of width `l`: each label order combined with each
/// count of positive scores.
pub fn tie_free_score_rows(l: usize) -> Vec<Vec<f64>> {
    let mut rows = Vec::new();
    for p in permutations(l) {
        for t in 0..=l {
            rows.push(p.iter().map(|v| v - t as f64 - 0.5).collect());
        }
    }
    rows
}

pub fn sign_rows_of_width(l: usize) -> Vec<Vec<f64>> {
    (0..1usize << l)
        .map(|bits| (0..l).map(|j| if bits >> j & 1 == 1 { 1.0 } else { -1.0 }).collect())
        .collect()
}

/// Calls `visit(scores, truth)` for every tie-free instance with `n` rows and `l` labels.
pub fn for_each_tie_free_instance(n: usize, l: usize, mut visit: impl FnMut(&[Vec<f64>], &[Vec<f64>])) {
    let scores = tie_free_score_rows(l);
    let signs = sign_rows_of_width(l);
    let mut si = vec![0usize; n];
    loop {
        let f: Vec<Vec<f64>> = si.iter().map(|&k| scores[k].clone()).collect();
        let mut yi = vec![0usize; n];
        loop {
            let y: Vec<Vec<f64>> = yi.iter().map(|&k| signs[k].clone()).collect();
            visit(&f, &y);
            if !advance(&mut yi, signs.len()) {
                break;
            }
        }
        if !advance(&mut si, scores.len()) {
            break;
        }
    }
}

fn advance(counter: &mut [usize], base: usize) -> bool {
    for d in counter.iter_mut() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

/// Library metrics against the brute-force ones; `Err` describes the first disagreement.
pub fn check_metrics_against_oracle(f: &[Vec<f64>], y: &[Vec<f64>]) -> Result<(), String> {
    let scores = from_rows(f);
    let truth = from_rows(y);
    let labels = scores.mapv(rbrl::sign);
    let got = rbrl::evaluate_all(scores.view(), labels.view(), truth.view());
    match (got, metrics::all(f, y)) {
        (Ok(report), Some(expected)) => {
            for (k, (a, b)) in report.values().iter().zip(expected.iter()).enumerate() {
                if (a - b).abs() > 1e-12 {
                    return Err(format!("metric {k}: {a} vs {b} on scores {f:?} truth {y:?}"));
                }
            }
            Ok(())
        }
        (Err(rbrl::Error::NoUsableRows { .. }), None) => Ok(()),
        (got, expected) => Err(format!("{got:?} vs {expected:?} on scores {f:?} truth {y:?}")),
    }
}

pub struct Certificate {
    /// `|F_apg - F*| / |F*|` with `F*` from the momentum-free oracle.
    pub rel_gap: f64,
    /// Iterations whose gap exceeds `2 L ‖P0 - P*‖² / (t+1)²`.
    pub envelope_violations: usize,
    pub iterations: usize,
}

/// Tiny instance (4 rows, 2 raw features, 3 labels) with strongly convex tradeoffs.
pub fn tiny_problem(seed: u64) -> (Dataset, HyperParams) {
    let mut r = rng(seed);
    let ds = random_dataset(&mut r, 4, 2, 3);
    let hp = HyperParams::linear(r.gen_range(0.05..1.0), r.gen_range(0.0..1.0), r.gen_range(0.0..0.5));
    (ds, hp)
}

pub fn certify(
    trace: &rbrl::SolveTrace,
    space: &Space,
    ds: &Dataset,
    hp: &HyperParams,
    dim: (usize, usize),
    oracle_iters: usize,
) -> Certificate {
    let (p_star, f_star) = prox_gradient_oracle(space, ds, hp, dim, oracle_iters);
    let radius = frob(p_star.view()).powi(2);
    let slack = 1e-12 * f_star.abs().max(1.0);
    let envelope_violations = trace
        .objective_per_iter
        .iter()
        .enumerate()
        .filter(|&(i, &f)| {
            let t = (i + 1) as f64;
            f - f_star > 2.0 * trace.l_f_used * radius / ((t + 1.0) * (t + 1.0)) + slack
        })
        .count();
    Certificate {
        rel_gap: (trace.final_objective() - f_star).abs() / f_star.abs().max(1e-12),
        envelope_violations,
        iterations: trace.iterations,
    }
}
