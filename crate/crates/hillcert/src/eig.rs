//! Dense Hermitian eigensolver and a rectangular spectral-norm estimate.
//!
//! The solver reduces the complex Hermitian matrix to a real symmetric
//! tridiagonal form by Householder reflections, normalizes the
//! off-diagonal phases away, then runs implicit-shift QL with the
//! transforms accumulated into the eigenvector matrix. Residuals are
//! measured against the original input, never assumed.

use crate::error::{Error, Result};
use crate::operator::{hermiticity_defect, HermitianMatrix};
use num_complex::Complex64;

/// One computed eigenpair: real eigenvalue, unit eigenvector, and the
/// measured residual ||A v - lambda v||_2.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<Complex64>,
    pub residual: f64,
}

const QL_MAX_SWEEPS: usize = 50;

/// Full eigendecomposition of a Hermitian matrix, ascending by value with
/// stable tie order. Fails if the hermiticity defect exceeds
/// 1e-10 * max|entry|.
pub fn eigh(matrix: &HermitianMatrix) -> Result<Vec<EigenPair>> {
    let scale = matrix.scale();
    let defect = hermiticity_defect(matrix);
    let threshold = 1e-10 * scale;
    if defect > threshold {
        return Err(Error::NotHermitian { defect, threshold });
    }

    let n = matrix.dim();
    let mut a: Vec<Complex64> = matrix.data().to_vec();
    let mut q = vec![Complex64::ZERO; n * n];
    for i in 0..n {
        q[i * n + i] = Complex64::new(1.0, 0.0);
    }

    let (mut d, mut e) = tridiagonalize(&mut a, &mut q, n);
    ql_implicit(&mut d, &mut e, &mut q, n)?;

    // stable ascending sort by value
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap());

    let mut pairs = Vec::with_capacity(n);
    for &col in &order {
        let mut vector: Vec<Complex64> = (0..n).map(|r| q[r * n + col]).collect();
        let norm: f64 = vector.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            for v in &mut vector {
                *v /= norm;
            }
        }
        let residual = residual_norm(matrix, d[col], &vector);
        pairs.push(EigenPair {
            value: d[col],
            vector,
            residual,
        });
    }
    Ok(pairs)
}

/// Householder reduction of the Hermitian matrix `a` (row-major, n x n)
/// to real symmetric tridiagonal form. Unitary transforms, including the
/// final phase normalization of the off-diagonal, accumulate into `q`.
/// Returns (diagonal, subdiagonal) with subdiagonal[i] between i and i+1.
fn tridiagonalize(a: &mut [Complex64], q: &mut [Complex64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let idx = |r: usize, c: usize| r * n + c;

    for col in 0..n.saturating_sub(2) {
        let m = n - col - 1;
        // x = a[col+1.., col]
        let xnorm: f64 = (0..m)
            .map(|i| a[idx(col + 1 + i, col)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let alpha = a[idx(col + 1, col)];
        let phase = if alpha.norm() > 0.0 {
            alpha / alpha.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let beta = -phase * xnorm;

        // Householder vector v = (x - beta e1) normalized; the sign choice
        // prevents cancellation in v[0].
        let mut v: Vec<Complex64> = (0..m).map(|i| a[idx(col + 1 + i, col)]).collect();
        v[0] -= beta;
        let vnorm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in &mut v {
            *z /= vnorm;
        }

        // two-sided update of the trailing block B = a[col+1.., col+1..]:
        // B <- B - 2 (v w* + w v*) with p = B v, kappa = v* p, w = p - kappa v
        let mut p = vec![Complex64::ZERO; m];
        for r in 0..m {
            let mut acc = Complex64::ZERO;
            for c in 0..m {
                acc += a[idx(col + 1 + r, col + 1 + c)] * v[c];
            }
            p[r] = acc;
        }
        let kappa: Complex64 = v.iter().zip(&p).map(|(vi, pi)| vi.conj() * pi).sum();
        let w: Vec<Complex64> = p.iter().zip(&v).map(|(pi, vi)| pi - kappa * vi).collect();
        for r in 0..m {
            for c in 0..m {
                let delta = 2.0 * (v[r] * w[c].conj() + w[r] * v[c].conj());
                a[idx(col + 1 + r, col + 1 + c)] -= delta;
            }
        }

        // column col collapses to beta e1 (mirror the row)
        a[idx(col + 1, col)] = beta;
        a[idx(col, col + 1)] = beta.conj();
        for i in 1..m {
            a[idx(col + 1 + i, col)] = Complex64::ZERO;
            a[idx(col, col + 1 + i)] = Complex64::ZERO;
        }

        // accumulate: q[:, col+1..] <- q[:, col+1..] (I - 2 v v*)
        for r in 0..n {
            let mut dot = Complex64::ZERO;
            for c in 0..m {
                dot += q[idx(r, col + 1 + c)] * v[c];
            }
            let dot2 = 2.0 * dot;
            for c in 0..m {
                q[idx(r, col + 1 + c)] -= dot2 * v[c].conj();
            }
        }
    }

    // phases off the subdiagonal: column scaling u[i+1] = u[i] * t_i/|t_i|
    let mut d = vec![0.0f64; n];
    let mut e = vec![0.0f64; n.saturating_sub(1)];
    let mut u = Complex64::new(1.0, 0.0);
    for i in 0..n {
        d[i] = a[idx(i, i)].re;
        if i + 1 < n {
            let t = a[idx(i + 1, i)];
            let t_abs = t.norm();
            e[i] = t_abs;
            let phi = if t_abs > 0.0 {
                t / t_abs
            } else {
                Complex64::new(1.0, 0.0)
            };
            let u_next = u * phi;
            // scale column i+1 of q by u_next (column i already scaled)
            if u_next != Complex64::new(1.0, 0.0) {
                for r in 0..n {
                    q[idx(r, i + 1)] *= u_next;
                }
            }
            u = u_next;
        }
    }
    (d, e)
}

/// Implicit-shift QL on the real symmetric tridiagonal (d, e), rotations
/// accumulated into the complex column matrix `q`.
fn ql_implicit(d: &mut [f64], e: &mut [f64], q: &mut [Complex64], n: usize) -> Result<()> {
    if n <= 1 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    // sentinel slot so e[m] is addressable at m = n-1
    let mut ee = vec![0.0f64; n];
    ee[..n - 1].copy_from_slice(e);

    for l in 0..n {
        let mut iter = 0usize;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if ee[m].abs() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > QL_MAX_SWEEPS {
                return Err(Error::NoConvergence(QL_MAX_SWEEPS));
            }

            let mut g = (d[l + 1] - d[l]) / (2.0 * ee[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + ee[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0f64, 1.0f64);
            let mut p = 0.0f64;
            let mut aborted = false;

            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * ee[i];
                let b = c * ee[i];
                r = f.hypot(g);
                ee[i + 1] = r;
                if r == 0.0 {
                    // underflow recovery: drop the partial shift and restart
                    d[i + 1] -= p;
                    ee[m] = 0.0;
                    aborted = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;

                for k in 0..n {
                    let f = q[k * n + i + 1];
                    q[k * n + i + 1] = s * q[k * n + i] + c * f;
                    q[k * n + i] = c * q[k * n + i] - s * f;
                }
            }
            if aborted {
                continue;
            }
            d[l] -= p;
            ee[l] = g;
            ee[m] = 0.0;
        }
    }
    Ok(())
}

fn residual_norm(matrix: &HermitianMatrix, lambda: f64, vector: &[Complex64]) -> f64 {
    let n = matrix.dim();
    let mut acc = 0.0f64;
    for r in 0..n {
        let mut av = Complex64::ZERO;
        for c in 0..n {
            av += matrix.at(r, c) * vector[c];
        }
        acc += (av - lambda * vector[r]).norm_sqr();
    }
    acc.sqrt()
}

/// Dense rectangular complex matrix, row-major.
#[derive(Debug, Clone)]
pub struct RectMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl RectMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "data length {} does not match {rows} x {cols}",
                data.len()
            )));
        }
        Ok(RectMatrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }
}

/// Largest singular value by power iteration on the Gram matrix,
/// converged to a relative tolerance of 1e-8.
pub fn spectral_norm(matrix: &RectMatrix) -> f64 {
    let frob: f64 = matrix.data.iter().map(|v| v.norm_sqr()).sum::<f64>();
    if frob == 0.0 {
        return 0.0;
    }

    // iterate on the smaller Gram dimension
    let k = matrix.cols.min(matrix.rows);
    let use_cols = matrix.cols <= matrix.rows;
    let mut v: Vec<Complex64> = (0..k)
        .map(|i| Complex64::new(1.0 + 0.01 * i as f64, 0.0))
        .collect();
    normalize(&mut v);

    let mut lambda_prev = 0.0f64;
    for _ in 0..50_000 {
        let w = if use_cols {
            // A^H (A v)
            let av = mul(matrix, &v, false);
            mul(matrix, &av, true)
        } else {
            // A (A^H v)
            let ahv = mul(matrix, &v, true);
            mul(matrix, &ahv, false)
        };
        let lambda: f64 = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if lambda == 0.0 {
            return 0.0;
        }
        v = w;
        normalize(&mut v);
        if (lambda - lambda_prev).abs() <= 1e-10 * lambda {
            return lambda.sqrt();
        }
        lambda_prev = lambda;
    }
    lambda_prev.sqrt()
}

fn normalize(v: &mut [Complex64]) {
    let n: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 {
        for z in v.iter_mut() {
            *z /= n;
        }
    }
}

/// y = A x (conjugate = false) or y = A^H x (conjugate = true).
fn mul(a: &RectMatrix, x: &[Complex64], conjugate: bool) -> Vec<Complex64> {
    if conjugate {
        let mut y = vec![Complex64::ZERO; a.cols];
        for r in 0..a.rows {
            let xr = x[r];
            for c in 0..a.cols {
                y[c] += a.at(r, c).conj() * xr;
            }
        }
        y
    } else {
        let mut y = vec![Complex64::ZERO; a.rows];
        for (r, yr) in y.iter_mut().enumerate() {
            for c in 0..a.cols {
                *yr += a.at(r, c) * x[c];
            }
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_rows(rows: &[Vec<Complex64>]) -> HermitianMatrix {
        let dim = rows.len();
        assert!(dim % 2 == 1, "test matrices use odd dimension");
        let n = (dim - 1) / 2;
        let mut m = HermitianMatrix::zero(n);
        for (r, row) in rows.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                m.set(r, c, v);
            }
        }
        m
    }

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn identity_matrix() {
        let rows: Vec<Vec<Complex64>> = (0..5)
            .map(|r| (0..5).map(|c| re(if r == c { 1.0 } else { 0.0 })).collect())
            .collect();
        let pairs = eigh(&from_rows(&rows)).unwrap();
        assert_eq!(pairs.len(), 5);
        for p in &pairs {
            assert!((p.value - 1.0).abs() < 1e-14);
            assert!(p.residual < 1e-14);
        }
    }

    #[test]
    fn one_by_one_matrix() {
        let mut m = HermitianMatrix::zero(0);
        m.set(0, 0, re(-2.5));
        let pairs = eigh(&m).unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].value, -2.5);
        assert!((pairs[0].vector[0].norm() - 1.0).abs() < 1e-15);
        assert_eq!(pairs[0].residual, 0.0);
    }

    #[test]
    fn diagonal_matrix_sorts_ascending() {
        let rows = vec![
            vec![re(3.0), re(0.0), re(0.0)],
            vec![re(0.0), re(1.0), re(0.0)],
            vec![re(0.0), re(0.0), re(2.0)],
        ];
        let pairs = eigh(&from_rows(&rows)).unwrap();
        let values: Vec<f64> = pairs.iter().map(|p| p.value).collect();
        assert_eq!(values, vec![1.0, 2.0, 3.0]);
        // unit basis vectors, permuted
        assert!((pairs[0].vector[1].norm() - 1.0).abs() < 1e-14);
        assert!((pairs[1].vector[2].norm() - 1.0).abs() < 1e-14);
        assert!((pairs[2].vector[0].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn two_by_two_hand_values() {
        // [[1, 0.1], [0.1, 2]] -> (3 -+ sqrt(1.04)) / 2
        let rows = vec![
            vec![re(1.0), re(0.1), re(0.0)],
            vec![re(0.1), re(2.0), re(0.0)],
            vec![re(0.0), re(0.0), re(10.0)],
        ];
        let pairs = eigh(&from_rows(&rows)).unwrap();
        let lo = (3.0 - 1.04f64.sqrt()) / 2.0;
        let hi = (3.0 + 1.04f64.sqrt()) / 2.0;
        assert!((pairs[0].value - lo).abs() < 1e-14);
        assert!((pairs[1].value - hi).abs() < 1e-14);
    }

    #[test]
    fn complex_hermitian_hand_values() {
        // [[2, i], [-i, 2]] -> 1, 3
        let i = Complex64::new(0.0, 1.0);
        let rows = vec![
            vec![re(2.0), i, re(0.0)],
            vec![-i, re(2.0), re(0.0)],
            vec![re(0.0), re(0.0), re(7.0)],
        ];
        let pairs = eigh(&from_rows(&rows)).unwrap();
        assert!((pairs[0].value - 1.0).abs() < 1e-14);
        assert!((pairs[1].value - 3.0).abs() < 1e-14);
        for p in &pairs {
            assert!(p.residual < 1e-13);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let rows = vec![
            vec![re(1.0), re(0.5), re(0.0)],
            vec![re(0.1), re(2.0), re(0.0)],
            vec![re(0.0), re(0.0), re(3.0)],
        ];
        match eigh(&from_rows(&rows)) {
            Err(Error::NotHermitian { .. }) => {}
            other => panic!("expected NotHermitian, got {other:?}"),
        }
    }

    fn random_hermitian(dim_modes: usize, seed: &mut u64) -> HermitianMatrix {
        // xorshift for deterministic test data
        let mut next = || {
            *seed ^= *seed << 13;
            *seed ^= *seed >> 7;
            *seed ^= *seed << 17;
            (*seed >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        let dim = 2 * dim_modes + 1;
        let mut m = HermitianMatrix::zero(dim_modes);
        for r in 0..dim {
            m.set(r, r, re(next()));
            for c in r + 1..dim {
                let v = Complex64::new(next(), next());
                m.set(r, c, v);
                m.set(c, r, v.conj());
            }
        }
        m
    }

    #[test]
    fn invariants_on_random_matrices() {
        let mut seed = 0x9e3779b97f4a7c15u64;
        for modes in [1usize, 2, 4, 7, 10] {
            let m = random_hermitian(modes, &mut seed);
            let dim = m.dim();
            let pairs = eigh(&m).unwrap();

            // trace
            let trace: f64 = (0..dim).map(|i| m.at(i, i).re).sum();
            let sum: f64 = pairs.iter().map(|p| p.value).sum();
            assert!((trace - sum).abs() < 1e-10 * trace.abs().max(1.0));

            // orthogonality
            for a in 0..dim {
                for b in 0..dim {
                    let dot: Complex64 = pairs[a]
                        .vector
                        .iter()
                        .zip(&pairs[b].vector)
                        .map(|(x, y)| x.conj() * y)
                        .sum();
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert!(
                        (dot.norm() - want).abs() < 1e-10,
                        "Gram defect at ({a},{b}): {dot}"
                    );
                }
            }

            // residuals
            let bound = 1e-11 * (m.inf_norm() + 1.0);
            for p in &pairs {
                assert!(p.residual < bound.max(1e-11 * p.value.abs()));
            }

            // reconstruction
            let scale = m.scale();
            for r in 0..dim {
                for c in 0..dim {
                    let mut acc = Complex64::ZERO;
                    for p in &pairs {
                        acc += p.vector[r] * p.value * p.vector[c].conj();
                    }
                    assert!(
                        (acc - m.at(r, c)).norm() < 1e-9 * scale,
                        "reconstruction off at ({r},{c})"
                    );
                }
            }
        }
    }

    #[test]
    fn orthogonality_survives_degenerate_clusters() {
        // the assembled operator at mu = 0 has exactly degenerate +-n
        // eigenvalue pairs; accumulated rotations must keep the vectors
        // orthogonal anyway
        use crate::operator::{assemble, bloch_transform, hill_operator};
        use crate::specfun::Modulus;
        let spec = hill_operator(Modulus::new(0.5).unwrap(), 2).unwrap();
        let mat = assemble(&bloch_transform(&spec, 0.0).unwrap(), 20);
        let pairs = eigh(&mat).unwrap();
        let dim = mat.dim();
        let min_gap = pairs
            .windows(2)
            .map(|w| (w[1].value - w[0].value).abs())
            .fold(f64::INFINITY, f64::min);
        assert!(min_gap < 1e-12, "expected tight clusters, gap {min_gap}");
        for a in 0..dim {
            for b in a..dim {
                let dot: Complex64 = pairs[a]
                    .vector
                    .iter()
                    .zip(&pairs[b].vector)
                    .map(|(x, y)| x.conj() * y)
                    .sum();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!(
                    (dot.norm() - want).abs() < 1e-12,
                    "Gram defect in degenerate cluster at ({a},{b})"
                );
            }
        }
    }

    #[test]
    fn spectral_norm_cases() {
        let zero = RectMatrix::new(3, 2, vec![Complex64::ZERO; 6]).unwrap();
        assert_eq!(spectral_norm(&zero), 0.0);

        let diag = RectMatrix::new(
            2,
            2,
            vec![re(2.0), re(0.0), re(0.0), re(-5.0)],
        )
        .unwrap();
        assert!((spectral_norm(&diag) - 5.0).abs() < 1e-7);

        // nilpotent [[0,1],[0,0]] has largest singular value 1
        let nil = RectMatrix::new(2, 2, vec![re(0.0), re(1.0), re(0.0), re(0.0)]).unwrap();
        assert!((spectral_norm(&nil) - 1.0).abs() < 1e-7);
    }

    #[test]
    fn spectral_norm_cross_checked_against_eigh() {
        // sigma_max(A) = sqrt(lambda_max(A^H A)) with the Gram matrix
        // eigensolved independently
        let mut seed = 0xabcdef1234567890u64;
        let a = random_hermitian(3, &mut seed); // any square complex data works
        let dim = a.dim();
        let rect = RectMatrix::new(
            dim,
            dim,
            (0..dim * dim)
                .map(|i| a.data()[i] + Complex64::new(0.3, 0.1) * (i as f64 / dim as f64))
                .collect(),
        )
        .unwrap();

        let mut gram = HermitianMatrix::zero((dim - 1) / 2);
        for r in 0..dim {
            for c in 0..dim {
                let mut acc = Complex64::ZERO;
                for k in 0..dim {
                    acc += rect.at(k, r).conj() * rect.at(k, c);
                }
                gram.set(r, c, acc);
            }
        }
        let lam_max = eigh(&gram).unwrap().last().unwrap().value;
        let want = lam_max.max(0.0).sqrt();
        let got = spectral_norm(&rect);
        assert!(
            (got - want).abs() < 1e-7 * want.max(1.0),
            "{got} vs {want}"
        );
    }
}
