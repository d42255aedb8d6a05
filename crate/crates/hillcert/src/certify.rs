//! Gershgorin localization, the isolation check, and certified
//! a posteriori eigenvalue error bounds.
//!
//! A bound is only emitted when the isolation condition holds on the
//! computed spectrum: the approximate eigenvalue lies in the ball
//! B_zeta(r) and every other computed eigenvalue stays outside
//! B_zeta(9r). Certificates for clustered components are refused; the
//! component is reported instead.

use crate::eig::EigenPair;
use crate::error::{Error, Result};
use crate::fourier::CertLevel;
use crate::operator::{BlochOperator, HermitianMatrix};
use crate::specfun::{self, Modulus};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// A maximal merged run of Gershgorin disks on the real line.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GershgorinComponent {
    pub lo: f64,
    pub hi: f64,
    /// Number of disks (rows) composing the component; the component
    /// contains exactly this many eigenvalues.
    pub disk_count: usize,
    /// Diagonal entries of the member rows, ascending.
    pub member_centers: Vec<f64>,
}

impl GershgorinComponent {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn radius(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }
}

/// Row-interval localization for a Hermitian matrix: disk i is
/// [a_ii - R_i, a_ii + R_i] with R_i the off-diagonal row sum. Disks are
/// merged into maximal overlapping components; each component contains
/// exactly as many eigenvalues as disks compose it.
pub fn gershgorin(matrix: &HermitianMatrix) -> Vec<GershgorinComponent> {
    let dim = matrix.dim();
    let mut disks: Vec<(f64, f64)> = (0..dim)
        .map(|r| {
            let center = matrix.at(r, r).re;
            let radius: f64 = (0..dim)
                .filter(|&c| c != r)
                .map(|c| matrix.at(r, c).norm())
                .sum();
            (center, radius)
        })
        .collect();
    disks.sort_by(|a, b| (a.0 - a.1).partial_cmp(&(b.0 - b.1)).unwrap());

    let mut components = Vec::new();
    let mut current: Option<GershgorinComponent> = None;
    for (center, radius) in disks {
        let (lo, hi) = (center - radius, center + radius);
        match current.as_mut() {
            Some(comp) if lo <= comp.hi => {
                comp.hi = comp.hi.max(hi);
                comp.disk_count += 1;
                comp.member_centers.push(center);
            }
            _ => {
                if let Some(mut done) = current.take() {
                    done.member_centers
                        .sort_by(|a, b| a.partial_cmp(b).unwrap());
                    components.push(done);
                }
                current = Some(GershgorinComponent {
                    lo,
                    hi,
                    disk_count: 1,
                    member_centers: vec![center],
                });
            }
        }
    }
    if let Some(mut done) = current.take() {
        done.member_centers.sort_by(|a, b| a.partial_cmp(b).unwrap());
        components.push(done);
    }
    components
}

/// Closed-form radius dominating every off-diagonal row sum of the
/// assembled elliptic-potential matrix:
/// r(l) = (12 pi^2 / K^2) q / ((1 - q^2)(1 - q)^2).
pub fn hill_interval_radius(ell: Modulus) -> f64 {
    let l = ell.value();
    if l == 0.0 {
        return 0.0;
    }
    let k = specfun::elliptic_k(ell);
    let q = specfun::nome(ell);
    12.0 * PI * PI / (k * k) * q / ((1.0 - q * q) * (1.0 - q) * (1.0 - q))
}

/// The isolation condition: lambda_n lies in B_zeta(r) while every other
/// computed eigenvalue stays strictly outside B_zeta(9r).
///
/// `all_eigs` must be the complete spectrum of the truncated matrix; the
/// single entry closest to `lambda_n` is treated as lambda_n itself, so
/// an exactly repeated eigenvalue fails the condition (as it must).
pub fn check_isolation(lambda_n: f64, all_eigs: &[f64], zeta: f64, r: f64) -> bool {
    if !r.is_finite() || r <= 0.0 || (lambda_n - zeta).abs() > r {
        return false;
    }
    let own = all_eigs
        .iter()
        .enumerate()
        .min_by(|a, b| {
            (a.1 - lambda_n)
                .abs()
                .partial_cmp(&(b.1 - lambda_n).abs())
                .unwrap()
        })
        .map(|(i, _)| i);
    all_eigs
        .iter()
        .enumerate()
        .all(|(i, &e)| Some(i) == own || (e - zeta).abs() > 9.0 * r)
}

/// A computed eigenvalue with its certification data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertifiedEigenvalue {
    #[serde(rename = "lambda_N")]
    pub lambda_n: f64,
    pub zeta: f64,
    pub r: f64,
    /// Certified upper bound on |lambda - lambda_N| for the unique
    /// spectrum point lambda in B_zeta(r).
    pub bound: f64,
    pub cert_level: CertLevel,
    pub isolation_ok: bool,
    /// Eigenvalue count of the Gershgorin component around lambda_N,
    /// when one was computed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub component_count: Option<usize>,
}

/// Shared kernel: prefactor times sum over coefficient orders of the
/// windowed double sum plus (2N+1) times a tail majorant supplied per
/// order.
fn bound_kernel(
    bloch: &BlochOperator,
    n_trunc: usize,
    pair: &EigenPair,
    zeta: f64,
    r: f64,
    tail_for_order: impl Fn(usize) -> f64,
) -> f64 {
    let p = bloch.order() as usize;
    let period = bloch.period();
    let n = n_trunc as i64;
    let dim = 2 * n_trunc + 1;
    debug_assert_eq!(pair.vector.len(), dim);

    let phi_abs = |idx: i64| -> f64 {
        if idx.abs() > n {
            0.0
        } else {
            pair.vector[(idx + n) as usize].norm()
        }
    };

    let prefactor = (5.0 + 3.0 * zeta.abs() / r) * (2.0 * PI * n_trunc as f64).powi(p as i32)
        / period.powf(p as f64 + 0.5);

    let mut total = 0.0f64;
    for j in 0..=p {
        // window sum over N < |l| < 2N, m = l-N .. l+N
        let mut window = 0.0f64;
        for l_abs in (n + 1)..(2 * n) {
            for &l in &[l_abs, -l_abs] {
                for m in (l - n)..=(l + n) {
                    let f_abs = if j == p {
                        // constant leading term couples only m = 0,
                        // unreachable for |l| > N with |l - m| <= N
                        0.0
                    } else {
                        bloch.coeff(j).coeff(m).norm()
                    };
                    if f_abs > 0.0 {
                        window += f_abs * phi_abs(l - m);
                    }
                }
            }
        }
        let tail = tail_for_order(j);
        total += window + (2 * n_trunc + 1) as f64 * tail;
    }
    prefactor * total
}

/// Certified a posteriori bound for an isolated approximate eigenvalue.
///
/// Combines the computed eigenvector's interaction with coefficient
/// harmonics just outside the truncation window and the coefficients'
/// tail mass beyond it. Refuses when the isolation condition fails.
pub fn aposteriori_bound(
    bloch: &BlochOperator,
    n_trunc: usize,
    pair: &EigenPair,
    all_eigs: &[f64],
    zeta: f64,
    r: f64,
) -> Result<CertifiedEigenvalue> {
    if !check_isolation(pair.value, all_eigs, zeta, r) {
        return Err(Error::IsolationFailed(format!(
            "lambda_N = {} not isolated in B({zeta}, {r})",
            pair.value
        )));
    }
    let p = bloch.order() as usize;
    let bound = bound_kernel(bloch, n_trunc, pair, zeta, r, |j| {
        if j == p {
            0.0
        } else {
            bloch.coeff(j).tail_sum(n_trunc)
        }
    });
    Ok(CertifiedEigenvalue {
        lambda_n: pair.value,
        zeta,
        r,
        bound,
        cert_level: bloch.cert_level(),
        isolation_ok: true,
        component_count: None,
    })
}

/// The bound specialized to the elliptic-potential operator: identical
/// window sum, with the order-zero tail replaced by its closed form
/// (2 sqrt(L) sum of |b_j| beyond the cutoff). Agrees with the generic
/// path to within rounding; the closed-form tail is never tighter.
#[allow(clippy::too_many_arguments)]
pub fn hill_bound(
    ell: Modulus,
    stride: u32,
    n_trunc: usize,
    bloch: &BlochOperator,
    pair: &EigenPair,
    all_eigs: &[f64],
    zeta: f64,
    r: f64,
) -> Result<CertifiedEigenvalue> {
    if !check_isolation(pair.value, all_eigs, zeta, r) {
        return Err(Error::IsolationFailed(format!(
            "lambda_N = {} not isolated in B({zeta}, {r})",
            pair.value
        )));
    }
    let k = specfun::elliptic_k(ell);
    let q = specfun::nome(ell);
    let period = 2.0 * f64::from(stride) * k;

    // closed-form tail of the potential coefficients beyond index N
    let closed_tail = if q == 0.0 {
        0.0
    } else {
        let j0 = n_trunc.div_ceil(stride as usize).max(1);
        let qj0 = q.powi(j0 as i32);
        let j0f = j0 as f64;
        12.0 * PI * PI * period.sqrt() / (k * k) * (j0f * (1.0 - q) + q) * qj0
            / ((1.0 - q * q) * (1.0 - q) * (1.0 - q))
    };

    let bound = bound_kernel(bloch, n_trunc, pair, zeta, r, |j| {
        if j == 0 {
            closed_tail
        } else {
            0.0
        }
    });
    Ok(CertifiedEigenvalue {
        lambda_n: pair.value,
        zeta,
        r,
        bound,
        cert_level: CertLevel::Certified,
        isolation_ok: true,
        component_count: None,
    })
}

/// Pick certification parameters for a computed eigenvalue.
///
/// First preference: the Gershgorin component the eigenvalue falls in,
/// with zeta the member center nearest lambda_N and r the component
/// radius. When that fails the isolation test (merged components), fall
/// back to zeta = lambda_N with r a tenth of the distance to the nearest
/// other eigenvalue. Returns None when no isolating ball exists.
pub fn select_params(
    lambda_n: f64,
    all_eigs: &[f64],
    components: &[GershgorinComponent],
) -> Option<(f64, f64)> {
    if let Some(comp) = components.iter().find(|c| c.contains(lambda_n)) {
        let zeta = comp
            .member_centers
            .iter()
            .copied()
            .min_by(|a, b| {
                (a - lambda_n)
                    .abs()
                    .partial_cmp(&(b - lambda_n).abs())
                    .unwrap()
            })
            .unwrap_or(comp.center());
        let r = comp.radius().max((lambda_n - zeta).abs());
        if r > 0.0 && check_isolation(lambda_n, all_eigs, zeta, r) {
            return Some((zeta, r));
        }
    }

    let nearest_other = all_eigs
        .iter()
        .map(|e| (e - lambda_n).abs())
        .filter(|d| *d > 0.0)
        .fold(f64::INFINITY, f64::min);
    if nearest_other.is_finite() && nearest_other > 0.0 {
        let r = nearest_other / 10.0;
        if check_isolation(lambda_n, all_eigs, lambda_n, r) {
            return Some((lambda_n, r));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eig::eigh;
    use crate::operator::{assemble, bloch_transform, hill_operator};
    use crate::specfun::{elliptic_k, hill_b};
    use num_complex::Complex64;

    fn modulus(l: f64) -> Modulus {
        Modulus::new(l).unwrap()
    }

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn hill_matrix(l: f64, stride: u32, mu: f64, n: usize) -> (BlochOperator, HermitianMatrix) {
        let spec = hill_operator(modulus(l), stride).unwrap();
        let bloch = bloch_transform(&spec, mu).unwrap();
        let mat = assemble(&bloch, n);
        (bloch, mat)
    }

    #[test]
    fn gershgorin_diagonal_matrix() {
        let mut m = HermitianMatrix::zero(1);
        m.set(0, 0, re(1.0));
        m.set(1, 1, re(5.0));
        m.set(2, 2, re(5.0));
        let comps = gershgorin(&m);
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0].disk_count, 1);
        assert_eq!(comps[1].disk_count, 2); // coincident zero-radius disks merge
        let total: usize = comps.iter().map(|c| c.disk_count).sum();
        assert_eq!(total, 3);
    }

    #[test]
    fn gershgorin_two_by_two_with_eigensolve() {
        let mut m = HermitianMatrix::zero(1);
        m.set(0, 0, re(1.0));
        m.set(0, 1, re(0.1));
        m.set(1, 0, re(0.1));
        m.set(1, 1, re(2.0));
        m.set(2, 2, re(8.0));
        let comps = gershgorin(&m);
        assert_eq!(comps.len(), 3);
        assert!((comps[0].lo - 0.9).abs() < 1e-15 && (comps[0].hi - 1.1).abs() < 1e-15);
        assert!((comps[1].lo - 1.9).abs() < 1e-15 && (comps[1].hi - 2.1).abs() < 1e-15);
        // containment confirmed by the eigensolver
        for p in eigh(&m).unwrap() {
            assert!(comps.iter().any(|c| c.contains(p.value)));
        }
    }

    #[test]
    fn gershgorin_hill_component_counts() {
        for n in [3usize, 5, 10, 20] {
            let (_, mat) = hill_matrix(0.1, 2, 0.0, n);
            let comps = gershgorin(&mat);
            let b0 = hill_b(modulus(0.1), 0);
            let inner: Vec<&GershgorinComponent> = comps
                .iter()
                .filter(|c| c.member_centers.iter().any(|&x| (x - b0).abs() < 1e-9))
                .collect();
            assert_eq!(inner.len(), 1);
            assert_eq!(inner[0].disk_count, 1, "component around D0 at N = {n}");

            let k = elliptic_k(modulus(0.1));
            for target_n in [1i64, 2] {
                let center = (PI * target_n as f64 / (2.0 * k)).powi(2) + b0;
                let comp = comps
                    .iter()
                    .find(|c| c.member_centers.iter().any(|&x| (x - center).abs() < 1e-9))
                    .unwrap();
                assert_eq!(
                    comp.disk_count, 2,
                    "component around D(+-{target_n}) at N = {n}"
                );
            }
        }
    }

    #[test]
    fn radius_value_and_degenerate_limit() {
        let r = hill_interval_radius(modulus(0.1));
        assert!((0.030..0.031).contains(&r), "r(0.1) = {r}");
        assert_eq!(hill_interval_radius(modulus(0.0)), 0.0);
    }

    #[test]
    fn radius_dominates_brute_force_row_sums() {
        for &l in &[0.1, 0.3, 0.5, 0.7, 0.9] {
            let ell = modulus(l);
            let brute: f64 = (1..=200u32).map(|j| 2.0 * hill_b(ell, j).abs()).sum();
            assert!(
                hill_interval_radius(ell) >= brute,
                "radius below row-sum oracle at l = {l}"
            );
        }
    }

    #[test]
    fn radius_dominates_assembled_row_sums() {
        for &(l, n, stride) in &[(0.1, 10usize, 2u32), (0.5, 8, 2), (0.9, 12, 1), (0.3, 16, 4)] {
            let (_, mat) = hill_matrix(l, stride, 0.0, n);
            let dim = mat.dim();
            let mut worst = 0.0f64;
            for r in 0..dim {
                let sum: f64 = (0..dim)
                    .filter(|&c| c != r)
                    .map(|c| mat.at(r, c).norm())
                    .sum();
                worst = worst.max(sum);
            }
            assert!(
                hill_interval_radius(modulus(l)) >= worst,
                "l = {l}, N = {n}, stride = {stride}"
            );
        }
    }

    #[test]
    fn isolation_examples() {
        assert!(check_isolation(0.0, &[0.0, 10.0, -10.0], 0.0, 1.0));
        assert!(!check_isolation(0.0, &[0.0, 5.0], 0.0, 1.0));
        // repeated eigenvalue defeats isolation
        assert!(!check_isolation(0.0, &[0.0, 0.0, 10.0], 0.0, 1.0));
    }

    #[test]
    fn isolation_on_hill_spectrum() {
        let (_, mat) = hill_matrix(0.1, 2, 0.0, 10);
        let eigs: Vec<f64> = eigh(&mat).unwrap().iter().map(|p| p.value).collect();
        let zeta = hill_b(modulus(0.1), 0);
        let r = hill_interval_radius(modulus(0.1));
        let lambda = eigs
            .iter()
            .copied()
            .min_by(|a, b| (a - zeta).abs().partial_cmp(&(b - zeta).abs()).unwrap())
            .unwrap();
        assert!(check_isolation(lambda, &eigs, zeta, r));
    }

    #[test]
    fn constant_coefficient_bound_is_zero() {
        let period = 2.0;
        let c = crate::fourier::PeriodicCoefficient::constant(re(-4.0), period).unwrap();
        let zero = crate::fourier::PeriodicCoefficient::constant(re(0.0), period).unwrap();
        let spec = crate::operator::OperatorSpec::new(2, -1.0, vec![c, zero]).unwrap();
        let bloch = bloch_transform(&spec, 0.0).unwrap();
        let mat = assemble(&bloch, 4);
        let pairs = eigh(&mat).unwrap();
        let eigs: Vec<f64> = pairs.iter().map(|p| p.value).collect();
        // pick the unique smallest eigenvalue (mode 0): -4
        let pair = &pairs[0];
        assert!((pair.value + 4.0).abs() < 1e-12);
        let cert = aposteriori_bound(&bloch, 4, pair, &eigs, pair.value, 1.0).unwrap();
        assert_eq!(cert.bound, 0.0);
        assert_eq!(cert.cert_level, CertLevel::Certified);
    }

    #[test]
    fn hill_bound_reference_value() {
        let ell = modulus(0.1);
        let (bloch, mat) = hill_matrix(0.1, 2, 0.0, 10);
        let pairs = eigh(&mat).unwrap();
        let eigs: Vec<f64> = pairs.iter().map(|p| p.value).collect();
        let zeta = hill_b(ell, 0);
        let r = hill_interval_radius(ell);
        let pair = pairs
            .iter()
            .min_by(|a, b| {
                (a.value - zeta)
                    .abs()
                    .partial_cmp(&(b.value - zeta).abs())
                    .unwrap()
            })
            .unwrap();
        let cert = hill_bound(ell, 2, 10, &bloch, pair, &eigs, zeta, r).unwrap();
        assert!(
            cert.bound <= 2.37e-8,
            "bound {} exceeds reference 2.37e-8",
            cert.bound
        );
        assert!(cert.bound > 0.0);

        // true error against the closed-form band edge
        let sigma_a = 0.01 - 2.0 - 2.0 * (1.0f64 - 0.01 + 0.0001).sqrt();
        assert!((pair.value - sigma_a).abs() <= cert.bound);
    }

    #[test]
    fn hill_bound_decreases_with_n() {
        let ell = modulus(0.1);
        let zeta = hill_b(ell, 0);
        let r = hill_interval_radius(ell);
        let mut bounds = Vec::new();
        for n in [10usize, 20] {
            let (bloch, mat) = hill_matrix(0.1, 2, 0.0, n);
            let pairs = eigh(&mat).unwrap();
            let eigs: Vec<f64> = pairs.iter().map(|p| p.value).collect();
            let pair = pairs
                .iter()
                .min_by(|a, b| {
                    (a.value - zeta)
                        .abs()
                        .partial_cmp(&(b.value - zeta).abs())
                        .unwrap()
                })
                .unwrap();
            bounds.push(
                hill_bound(ell, 2, n, &bloch, pair, &eigs, zeta, r)
                    .unwrap()
                    .bound,
            );
        }
        assert!(bounds[1] < bounds[0], "bound must shrink: {bounds:?}");
    }

    #[test]
    fn hill_bound_degenerate_limit_is_zero() {
        // l = 0: diagonal matrix with unit gaps around the bottom
        // eigenvalue, so a ball of radius 0.1 isolates it
        let ell = modulus(0.0);
        let (bloch, mat) = hill_matrix(0.0, 2, 0.0, 6);
        let pairs = eigh(&mat).unwrap();
        let eigs: Vec<f64> = pairs.iter().map(|p| p.value).collect();
        let pair = &pairs[0];
        let cert = hill_bound(ell, 2, 6, &bloch, pair, &eigs, pair.value, 0.1).unwrap();
        assert_eq!(cert.bound, 0.0);
    }

    #[test]
    fn generic_and_specialized_paths_agree() {
        let ell = modulus(0.1);
        let (bloch, mat) = hill_matrix(0.1, 2, 0.0, 10);
        let pairs = eigh(&mat).unwrap();
        let eigs: Vec<f64> = pairs.iter().map(|p| p.value).collect();
        let zeta = hill_b(ell, 0);
        let r = hill_interval_radius(ell);
        let pair = pairs
            .iter()
            .min_by(|a, b| {
                (a.value - zeta)
                    .abs()
                    .partial_cmp(&(b.value - zeta).abs())
                    .unwrap()
            })
            .unwrap();
        let special = hill_bound(ell, 2, 10, &bloch, pair, &eigs, zeta, r)
            .unwrap()
            .bound;
        let generic = aposteriori_bound(&bloch, 10, pair, &eigs, zeta, r)
            .unwrap()
            .bound;
        assert!(
            special >= generic * 0.999999 && special <= generic * 1.01,
            "specialized {special} vs generic {generic}"
        );
    }

    #[test]
    fn bound_refused_without_isolation() {
        let (bloch, mat) = hill_matrix(0.1, 2, 0.0, 6);
        let pairs = eigh(&mat).unwrap();
        let eigs: Vec<f64> = pairs.iter().map(|p| p.value).collect();
        let pair = &pairs[0];
        // huge r means other eigenvalues invade B(zeta, 9r)
        match aposteriori_bound(&bloch, 6, pair, &eigs, pair.value, 10.0) {
            Err(Error::IsolationFailed(_)) => {}
            other => panic!("expected IsolationFailed, got {other:?}"),
        }
    }

    #[test]
    fn soundness_on_small_truncations() {
        // where the truncation error is measurable, the certificate covers it
        let edges = |l: f64| {
            let root = (1.0 - l * l + l.powi(4)).sqrt();
            l * l - 2.0 - 2.0 * root
        };
        for &l in &[0.1, 0.3, 0.5, 0.7, 0.9] {
            let ell = modulus(l);
            let sigma_a = edges(l);
            for n in 2..=12usize {
                let (bloch, mat) = hill_matrix(l, 2, 0.0, n);
                let pairs = eigh(&mat).unwrap();
                let eigs: Vec<f64> = pairs.iter().map(|p| p.value).collect();
                let pair = pairs
                    .iter()
                    .min_by(|a, b| {
                        (a.value - sigma_a)
                            .abs()
                            .partial_cmp(&(b.value - sigma_a).abs())
                            .unwrap()
                    })
                    .unwrap();
                let comps = gershgorin(&mat);
                let Some((zeta, r)) = select_params(pair.value, &eigs, &comps) else {
                    continue;
                };
                let cert = hill_bound(ell, 2, n, &bloch, pair, &eigs, zeta, r).unwrap();
                let err = (pair.value - sigma_a).abs();
                if err > 1e-13 {
                    assert!(
                        cert.bound >= err,
                        "unsound at l = {l}, N = {n}: bound {} < error {err}",
                        cert.bound
                    );
                }
            }
        }
    }

    #[test]
    fn bound_nonincreasing_while_resolvable() {
        // the certificate decays with N as the coefficient tail shrinks;
        // once it approaches the eigenvector rounding noise (amplified by
        // the polynomially growing prefactor) the computed value wobbles,
        // so monotonicity is only meaningful well above that regime
        for &l in &[0.3, 0.5, 0.7, 0.9] {
            let ell = modulus(l);
            let zeta = hill_b(ell, 0);
            let mut prev: Option<f64> = None;
            for i in 2..=8usize {
                let n = 5 * i;
                let (bloch, mat) = hill_matrix(l, 2, 0.0, n);
                let pairs = eigh(&mat).unwrap();
                let eigs: Vec<f64> = pairs.iter().map(|p| p.value).collect();
                let pair = pairs
                    .iter()
                    .min_by(|a, b| {
                        (a.value - zeta)
                            .abs()
                            .partial_cmp(&(b.value - zeta).abs())
                            .unwrap()
                    })
                    .unwrap();
                let comps = gershgorin(&mat);
                let Some((z, r)) = select_params(pair.value, &eigs, &comps) else {
                    continue;
                };
                let bound = hill_bound(ell, 2, n, &bloch, pair, &eigs, z, r)
                    .unwrap()
                    .bound;
                if let Some(p) = prev {
                    if p > 1e-10 && bound > 1e-10 {
                        assert!(
                            bound <= p,
                            "bound grew from {p} to {bound} at l = {l}, N = {n}"
                        );
                    }
                }
                prev = Some(bound);
            }
        }
    }

    #[test]
    fn select_params_prefers_gershgorin_then_falls_back() {
        // isolated case: Gershgorin parameters survive
        let (_, mat) = hill_matrix(0.1, 2, 0.0, 8);
        let pairs = eigh(&mat).unwrap();
        let eigs: Vec<f64> = pairs.iter().map(|p| p.value).collect();
        let comps = gershgorin(&mat);
        let b0 = hill_b(modulus(0.1), 0);
        let lambda = eigs
            .iter()
            .copied()
            .min_by(|a, b| (a - b0).abs().partial_cmp(&(b - b0).abs()).unwrap())
            .unwrap();
        let (zeta, _r) = select_params(lambda, &eigs, &comps).unwrap();
        assert!((zeta - b0).abs() < 1e-9);

        // merged case: falls back to the eigenvalue-centred ball
        let (_, mat) = hill_matrix(0.5, 2, 0.0, 8);
        let pairs = eigh(&mat).unwrap();
        let eigs: Vec<f64> = pairs.iter().map(|p| p.value).collect();
        let comps = gershgorin(&mat);
        let sigma_a = 0.25 - 2.0 - 2.0 * (1.0f64 - 0.25 + 0.0625).sqrt();
        let lambda = eigs
            .iter()
            .copied()
            .min_by(|a, b| (a - sigma_a).abs().partial_cmp(&(b - sigma_a).abs()).unwrap())
            .unwrap();
        let (zeta, r) = select_params(lambda, &eigs, &comps).unwrap();
        assert!(check_isolation(lambda, &eigs, zeta, r));
    }

    #[test]
    fn gershgorin_containment_and_counts_on_random_matrices() {
        let mut seed = 0x51a7e9d3b2c4f681u64;
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        for trial in 0..40 {
            let modes = 1 + trial % 6;
            let dim = 2 * modes + 1;
            let mut m = HermitianMatrix::zero(modes);
            for r in 0..dim {
                m.set(r, r, re(next() * 10.0));
                for c in r + 1..dim {
                    let v = Complex64::new(next(), next()) * 0.3;
                    m.set(r, c, v);
                    m.set(c, r, v.conj());
                }
            }
            let comps = gershgorin(&m);
            let count_total: usize = comps.iter().map(|c| c.disk_count).sum();
            assert_eq!(count_total, dim);
            let eigs = eigh(&m).unwrap();
            let tol = 1e-10 * m.scale().max(1.0);
            for comp in &comps {
                let inside = eigs
                    .iter()
                    .filter(|p| p.value >= comp.lo - tol && p.value <= comp.hi + tol)
                    .count();
                assert!(
                    inside >= comp.disk_count,
                    "component [{}, {}] holds {} eigenvalues, needs {}",
                    comp.lo,
                    comp.hi,
                    inside,
                    comp.disk_count
                );
            }
            for p in &eigs {
                assert!(
                    comps
                        .iter()
                        .any(|c| p.value >= c.lo - tol && p.value <= c.hi + tol),
                    "eigenvalue {} escapes the disk union",
                    p.value
                );
            }
        }
    }
}
