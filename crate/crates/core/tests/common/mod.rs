//! Test-only oracles and random matrix generators. Nothing here calls the
//! code paths it is used to check.
#![allow(dead_code)]

use hypocontract::OperatorMatrix;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Rng8 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng8 {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn damped() -> OperatorMatrix {
    OperatorMatrix::from_real_rows([[0.0, 0.5], [-0.5, 1.0]])
}

pub fn coercive() -> OperatorMatrix {
    OperatorMatrix::from_real_rows([[1.0, 0.5], [-0.5, 1.0]])
}

pub fn skew2() -> OperatorMatrix {
    OperatorMatrix::from_real_rows([[0.0, 1.0], [-1.0, 0.0]])
}

/// Standard normal via Box-Muller.
pub fn normal(rng: &mut Rng8) -> f64 {
    let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let v: f64 = rng.random();
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}

pub fn random_complex(rng: &mut Rng8, rows: usize, cols: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |_, _| c(normal(rng), normal(rng)) / 2f64.sqrt())
}

pub fn random_real(rng: &mut Rng8, rows: usize, cols: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |_, _| c(normal(rng), 0.0))
}

pub fn random_matrix(rng: &mut Rng8, n: usize) -> OperatorMatrix {
    OperatorMatrix::new(random_complex(rng, n, n)).unwrap()
}

/// Haar-ish unitary from the QR factor of a complex Gaussian matrix.
pub fn random_unitary(rng: &mut Rng8, n: usize) -> DMatrix<Complex64> {
    let g = random_complex(rng, n, n);
    g.qr().q()
}

pub fn random_skew_hermitian(rng: &mut Rng8, n: usize) -> DMatrix<Complex64> {
    let a = random_complex(rng, n, n);
    (&a - a.adjoint()) * c(0.5, 0.0)
}

/// B = C·C* + K with C of rank `rank` and K skew-Hermitian, so B_H = C·C* ⪰ 0.
pub fn semi_dissipative_with_rank(rng: &mut Rng8, n: usize, rank: usize) -> OperatorMatrix {
    let cm = random_complex(rng, n, rank);
    let s = &cm * cm.adjoint();
    let s = (&s + s.adjoint()) * c(0.5, 0.0);
    let k = random_skew_hermitian(rng, n);
    OperatorMatrix::new(s + k).unwrap()
}

/// Semi-dissipative and, with probability about ¼, not hypocoercive: a
/// skew-Hermitian block with zero Hermitian part is hidden by a unitary
/// change of basis.
pub fn random_semi_dissipative(rng: &mut Rng8, n: usize) -> OperatorMatrix {
    if n >= 2 && rng.random_bool(0.25) {
        let n2 = rng.random_range(1..n);
        let n1 = n - n2;
        let rank = rng.random_range(1..=n1);
        let b1 = semi_dissipative_with_rank(rng, n1, rank);
        let k2 = random_skew_hermitian(rng, n2);
        let mut block = DMatrix::<Complex64>::zeros(n, n);
        block.view_mut((0, 0), (n1, n1)).copy_from(b1.as_matrix());
        block.view_mut((n1, n1), (n2, n2)).copy_from(&k2);
        let u = random_unitary(rng, n);
        OperatorMatrix::new(u.adjoint() * block * &u).unwrap()
    } else {
        let rank = rng.random_range(1..=n);
        semi_dissipative_with_rank(rng, n, rank)
    }
}

/// Damped chain: B_H = diag(d, 0, ..., 0) plus a skew tridiagonal coupling of
/// length `links`, hidden by a unitary change of basis. The index is `links`
/// when `links = n − 1`; shorter chains leave a decoupled skew block.
pub fn damped_chain(rng: &mut Rng8, n: usize, links: usize) -> OperatorMatrix {
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    m[(0, 0)] = c(rng.random_range(0.5..1.5), 0.0);
    for k in 0..links {
        let w = c(rng.random_range(0.5..1.5), 0.0);
        m[(k, k + 1)] = w;
        m[(k + 1, k)] = -w;
    }
    for k in links + 1..n {
        m[(k, k)] = c(0.0, rng.random_range(-1.0..1.0));
    }
    let u = random_unitary(rng, n);
    OperatorMatrix::new(u.adjoint() * m * &u).unwrap()
}

/// Min eigenvalues of the partial sums Σ_{j≤m} (B*)ʲ B_H Bʲ, m = 0..n−1,
/// each divided by ‖B‖^{2m+1}, the size of the largest term in it.
pub fn relative_hc_partials(b: &OperatorMatrix) -> Vec<f64> {
    let bm = b.as_matrix();
    let n = b.dim();
    let bh = (bm + bm.adjoint()) * c(0.5, 0.0);
    let norm = bm.singular_values().max();
    let mut power = DMatrix::<Complex64>::identity(n, n);
    let mut sum = DMatrix::<Complex64>::zeros(n, n);
    (0..n)
        .map(|m| {
            if m > 0 {
                power = bm * &power;
            }
            sum += power.adjoint() * &bh * &power;
            let h = (&sum + sum.adjoint()) * c(0.5, 0.0);
            h.symmetric_eigenvalues().min() / norm.powi(2 * m as i32 + 1)
        })
        .collect()
}

/// Smallest real part of σ(B), from nalgebra's Schur form.
pub fn min_real_eigenvalue(b: &OperatorMatrix) -> f64 {
    b.as_matrix()
        .clone()
        .schur()
        .eigenvalues()
        .unwrap()
        .iter()
        .map(|z| z.re)
        .fold(f64::INFINITY, f64::min)
}

/// Random semi-dissipative B, dims 2..=6 of the caller's choosing, normalized
/// to ‖B‖ = 1 and resampled until every deciding quantity is clear of the
/// rounding floor: each relative partial-sum eigenvalue is below 1e−12 or
/// above 1e−6, and min Re σ(B) is below 1e−12 or above 1e−6. Half the draws
/// are damped chains, which reach the largest indices.
pub fn conditioned_semi_dissipative(rng: &mut Rng8, n: usize) -> OperatorMatrix {
    const LOW: f64 = 1e-12;
    const HIGH: f64 = 1e-6;
    let clear = |x: f64| x <= LOW || x >= HIGH;
    loop {
        let b = if rng.random_bool(0.5) {
            random_semi_dissipative(rng, n)
        } else {
            let links = if rng.random_bool(0.75) {
                n - 1
            } else {
                rng.random_range(1..n)
            };
            damped_chain(rng, n, links)
        };
        let b = b.scale(1.0 / b.spectral_norm());
        if relative_hc_partials(&b).into_iter().all(clear) && clear(min_real_eigenvalue(&b)) {
            return b;
        }
    }
}

/// Eigenvalues of a 2×2 matrix from its characteristic polynomial.
pub fn eig2_oracle(m: &OperatorMatrix) -> [Complex64; 2] {
    let (a, b, cc, d) = (m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1));
    let tr = a + d;
    let det = a * d - b * cc;
    let disc = (tr * tr - det * 4.0).sqrt();
    [(tr + disc) / 2.0, (tr - disc) / 2.0]
}

/// max ‖Ax‖ over `samples` random unit vectors: a lower bound for ‖A‖.
pub fn sampled_norm_oracle(rng: &mut Rng8, m: &OperatorMatrix, samples: usize) -> f64 {
    let n = m.dim();
    (0..samples)
        .map(|_| {
            let x = random_complex(rng, n, 1);
            let x = &x / c(x.norm(), 0.0);
            (m.as_matrix() * x).norm()
        })
        .fold(0.0, f64::max)
}

/// A = V·diag(λ)·V⁻¹ and exp(A) = V·diag(e^λ)·V⁻¹ from a known
/// eigendecomposition.
pub fn diagonalizable_with_exp(
    rng: &mut Rng8,
    n: usize,
    scale: f64,
) -> (OperatorMatrix, OperatorMatrix) {
    loop {
        let v = random_complex(rng, n, n) + DMatrix::<Complex64>::identity(n, n) * c(2.0, 0.0);
        let Some(v_inv) = v.clone().try_inverse() else {
            continue;
        };
        let lambdas: Vec<Complex64> = (0..n)
            .map(|_| c(normal(rng), normal(rng)) * scale)
            .collect();
        let l = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(lambdas.clone()));
        let el = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(
            lambdas.iter().map(|z| z.exp()).collect(),
        ));
        let a = &v * l * &v_inv;
        let ea = &v * el * &v_inv;
        let a = OperatorMatrix::new(a).unwrap();
        if a.spectral_norm() > 10.0 {
            continue;
        }
        return (a, OperatorMatrix::new(ea).unwrap());
    }
}

/// Largest τ in (0, hi] with ‖D(τ)‖ ≤ 1 by bisection, given that ‖D‖ ≤ 1
/// holds below the crossing and fails above it. D is built directly from the
/// scheme formula with a dense solve.
pub fn bisect_tau0(b: &OperatorMatrix, theta: f64, hi: f64) -> f64 {
    let n = b.dim();
    let id = DMatrix::<Complex64>::identity(n, n);
    let norm_at = |tau: f64| {
        let lhs = &id + b.as_matrix() * c(tau * theta, 0.0);
        let rhs = &id - b.as_matrix() * c(tau * (1.0 - theta), 0.0);
        let d = lhs.try_inverse().unwrap() * rhs;
        d.singular_values().max()
    };
    let (mut lo, mut hi) = (0.0, hi);
    assert!(norm_at(hi) > 1.0, "bracket does not contain the crossing");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if norm_at(mid) <= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Scalar Möbius image z ↦ (1 + (1−θ)τz)/(1 − θτz).
pub fn mobius_oracle(theta: f64, tau: f64, z: Complex64) -> Complex64 {
    (c(1.0, 0.0) + z * ((1.0 - theta) * tau)) / (c(1.0, 0.0) - z * (theta * tau))
}

/// Greedy multiset match; returns the largest pairing distance.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}
