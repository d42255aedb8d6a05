//! Complete elliptic integrals, the nome, Jacobi sn, and the Fourier
//! coefficients of the elliptic potential `6 l^2 sn^2(x,l) - 4 - l^2`.
//!
//! K and E are computed by the arithmetic-geometric mean, sn by a
//! descending Landen transformation. All functions are pure and take the
//! modulus by value, so they can be called freely from concurrent tasks.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Elliptic modulus `l` with `0 <= l < 1`.
///
/// The complementary modulus `sqrt(1 - l^2)` then lies in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Modulus(f64);

impl Modulus {
    pub fn new(ell: f64) -> Result<Self> {
        if !ell.is_finite() || !(0.0..1.0).contains(&ell) {
            return Err(Error::Domain(format!(
                "modulus must satisfy 0 <= ell < 1, got {ell}"
            )));
        }
        Ok(Modulus(ell))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Complementary modulus `sqrt(1 - l^2)`.
    pub fn complement(self) -> f64 {
        (1.0 - self.0 * self.0).sqrt()
    }
}

const AGM_MAX_ITER: usize = 30;

/// Arithmetic-geometric mean of (a0, b0) for a0 >= b0 >= 0.
///
/// Stops when |a - b| < 1e-16 a. Quadratic convergence makes 30
/// iterations far more than enough for any modulus below 1.
fn agm(a0: f64, b0: f64) -> f64 {
    let (mut a, mut b) = (a0, b0);
    for _ in 0..AGM_MAX_ITER {
        if (a - b).abs() < 1e-16 * a {
            break;
        }
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        a = an;
        b = bn;
    }
    0.5 * (a + b)
}

/// Complete elliptic integral of the first kind K(l), modulus convention.
pub fn elliptic_k(ell: Modulus) -> f64 {
    let l = ell.value();
    if l == 0.0 {
        return PI / 2.0;
    }
    PI / (2.0 * agm(1.0, ell.complement()))
}

/// Complete elliptic integral of the second kind E(l), modulus convention.
///
/// Uses the AGM relation E = K (1 - sum 2^(n-1) c_n^2) over the AGM
/// deviation sequence c_n.
pub fn elliptic_e(ell: Modulus) -> f64 {
    let l = ell.value();
    if l == 0.0 {
        return PI / 2.0;
    }
    let (mut a, mut b) = (1.0f64, ell.complement());
    let mut c = l;
    let mut sum = 0.5 * c * c;
    let mut pow2 = 0.5;
    for _ in 0..AGM_MAX_ITER {
        if c.abs() < 1e-16 * a {
            break;
        }
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        c = 0.5 * (a - b);
        a = an;
        b = bn;
        pow2 *= 2.0;
        sum += pow2 * c * c;
    }
    let k = PI / (2.0 * a);
    k * (1.0 - sum)
}

/// The nome q(l) = exp(-pi K(l')/K(l)) with l' the complementary modulus.
///
/// K(l') is evaluated as pi / (2 agm(1, l)), which avoids forming l'
/// explicitly and stays accurate for small l. Returns 0 at l = 0.
pub fn nome(ell: Modulus) -> f64 {
    let l = ell.value();
    if l == 0.0 {
        return 0.0;
    }
    // q = exp(-pi * agm(1, l') / agm(1, l))
    (-PI * agm(1.0, ell.complement()) / agm(1.0, l)).exp()
}

/// Fourier cosine coefficients b_j of the potential `6 l^2 sn^2 - 4 - l^2`
/// over its period 2K(l).
///
/// b_0 = 6 (1 - E/K) - 4 - l^2, and for j >= 1
/// b_j = -(6 pi^2 / K^2) j q^j / (1 - q^(2j)), which decays geometrically.
pub fn hill_b(ell: Modulus, j: u32) -> f64 {
    let l = ell.value();
    if j == 0 {
        let k = elliptic_k(ell);
        let e = elliptic_e(ell);
        return 6.0 * (1.0 - e / k) - 4.0 - l * l;
    }
    if l == 0.0 {
        return 0.0;
    }
    let k = elliptic_k(ell);
    let q = nome(ell);
    let jf = f64::from(j);
    let qj = q.powi(j as i32);
    if qj == 0.0 {
        return 0.0;
    }
    -(6.0 * PI * PI / (k * k)) * jf * qj / (1.0 - qj * qj)
}

const LANDEN_LEVELS: usize = 16;

/// Jacobi elliptic sn(x, l) by the descending Landen transformation.
///
/// The AGM scale sequence is built to at most 16 levels, then the
/// amplitude is recovered by the backward arcsin recursion. The argument
/// is first reduced modulo the full period 4K(l).
pub fn jacobi_sn(x: f64, ell: Modulus) -> f64 {
    let l = ell.value();
    if l == 0.0 {
        return x.sin();
    }

    let k = elliptic_k(ell);
    let period = 4.0 * k;
    let u = x - period * (x / period).round();

    let mut a = [0.0f64; LANDEN_LEVELS + 1];
    let mut c = [0.0f64; LANDEN_LEVELS + 1];
    a[0] = 1.0;
    c[0] = l;
    let mut b = ell.complement();
    let mut n = 0;
    for i in 1..=LANDEN_LEVELS {
        a[i] = 0.5 * (a[i - 1] + b);
        c[i] = 0.5 * (a[i - 1] - b);
        b = (a[i - 1] * b).sqrt();
        n = i;
        if c[i].abs() < 1e-16 * a[i] {
            break;
        }
    }

    let mut phi = (1u64 << n) as f64 * a[n] * u;
    for i in (1..=n).rev() {
        let s = (c[i] / a[i] * phi.sin()).clamp(-1.0, 1.0);
        phi = 0.5 * (phi + s.asin());
    }
    phi.sin()
}
