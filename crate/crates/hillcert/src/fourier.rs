//! Periodic coefficient functions as truncated Fourier series with a
//! tail majorant.
//!
//! The orthonormal basis is e_m(x) = (1/sqrt(L)) exp(-i 2 pi m x / L), so
//! synthesis is f(x) = sum_m fhat_m e_m(x) and a real-valued f satisfies
//! fhat_{-m} = conj(fhat_m). The tail majorant bounds sum_{|m|>=N} |fhat_m|
//! and is what a certified eigenvalue bound ultimately rests on.

use crate::error::{Error, Result};
use crate::specfun::{self, Modulus};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Certification strength of a tail majorant.
///
/// `Certified` means every contributing tail is an exact zero beyond the
/// stored window or an analytically proven envelope. Fitted envelopes
/// only ever produce `Heuristic`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertLevel {
    Heuristic,
    Certified,
}

/// Upper bound on the absolute coefficient mass beyond a cutoff index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Tail {
    /// All coefficients beyond the stored window are exactly zero.
    ExactZero,
    /// sum_{|m|>=N} |fhat_m| <= amplitude * ratio^N / (1 - ratio).
    Geometric { amplitude: f64, ratio: f64 },
    /// Closed-form tail of the elliptic potential sampled on a period
    /// that is `stride` copies of its natural period 2K(ell).
    Hill { ell: f64, stride: u32 },
    /// A tail scaled by a nonnegative factor (from scalar multiples).
    Scaled { factor: f64, inner: Box<Tail> },
    /// Sum of tails (from sums of coefficient functions).
    Sum { parts: Vec<Tail> },
}

impl Tail {
    fn level(&self) -> CertLevel {
        match self {
            Tail::ExactZero | Tail::Hill { .. } => CertLevel::Certified,
            Tail::Geometric { .. } => CertLevel::Heuristic,
            Tail::Scaled { inner, .. } => inner.level(),
            Tail::Sum { parts } => parts
                .iter()
                .map(Tail::level)
                .min()
                .unwrap_or(CertLevel::Certified),
        }
    }

    fn scaled(self, factor: f64) -> Tail {
        if factor == 1.0 {
            return self;
        }
        match self {
            Tail::ExactZero => Tail::ExactZero,
            Tail::Geometric { amplitude, ratio } => Tail::Geometric {
                amplitude: amplitude * factor,
                ratio,
            },
            other => Tail::Scaled {
                factor,
                inner: Box::new(other),
            },
        }
    }

    /// Evaluate the majorant beyond index `n` (exclusive of the stored
    /// window handling, which `PeriodicCoefficient::tail_sum` adds).
    fn eval(&self, n: usize) -> f64 {
        match self {
            Tail::ExactZero => 0.0,
            Tail::Geometric { amplitude, ratio } => {
                if *ratio <= 0.0 {
                    0.0
                } else {
                    amplitude * ratio.powi(n as i32) / (1.0 - ratio)
                }
            }
            Tail::Hill { ell, stride } => hill_tail(*ell, *stride, n),
            Tail::Scaled { factor, inner } => factor * inner.eval(n),
            Tail::Sum { parts } => parts.iter().map(|t| t.eval(n)).sum(),
        }
    }
}

/// Closed-form bound on 2 sqrt(L) sum_{j >= ceil(N/stride)} |b_j| for the
/// elliptic potential with L = 2 * stride * K(ell):
///   (12 pi^2 sqrt(L) / K^2) * (j0 (1-q) + q) q^j0 / ((1-q^2)(1-q)^2).
fn hill_tail(ell: f64, stride: u32, n: usize) -> f64 {
    let ell = match Modulus::new(ell) {
        Ok(m) => m,
        Err(_) => return f64::INFINITY,
    };
    if ell.value() == 0.0 {
        return 0.0;
    }
    let k = specfun::elliptic_k(ell);
    let q = specfun::nome(ell);
    let period = 2.0 * f64::from(stride) * k;
    let j0 = n.div_ceil(stride as usize).max(1);
    let qj0 = q.powi(j0 as i32);
    if qj0 == 0.0 {
        return 0.0;
    }
    let j0f = j0 as f64;
    12.0 * PI * PI * period.sqrt() / (k * k) * (j0f * (1.0 - q) + q) * qj0
        / ((1.0 - q * q) * (1.0 - q) * (1.0 - q))
}

/// A period-L coefficient function stored as Fourier coefficients on the
/// orthonormal basis, plus a majorant for the dropped tail.
///
/// Immutable after construction; freely shareable across tasks.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicCoefficient {
    period: f64,
    coeffs: BTreeMap<i64, Complex64>,
    tail: Tail,
}

/// Entries below this magnitude are not stored.
const STORE_EPS: f64 = 1e-300;

impl PeriodicCoefficient {
    pub fn new(period: f64, coeffs: BTreeMap<i64, Complex64>, tail: Tail) -> Result<Self> {
        if !period.is_finite() || period <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "period must be positive and finite, got {period}"
            )));
        }
        let coeffs = coeffs
            .into_iter()
            .filter(|(_, v)| v.norm() > STORE_EPS)
            .collect();
        Ok(PeriodicCoefficient {
            period,
            coeffs,
            tail,
        })
    }

    /// The constant function with value `c` (single m = 0 coefficient).
    pub fn constant(c: Complex64, period: f64) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(0, c * period.sqrt());
        Self::new(period, coeffs, Tail::ExactZero)
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Largest stored |m|.
    pub fn max_index(&self) -> i64 {
        self.coeffs.keys().map(|m| m.abs()).max().unwrap_or(0)
    }

    /// Stored coefficient at index m (zero if absent).
    pub fn coeff(&self, m: i64) -> Complex64 {
        self.coeffs.get(&m).copied().unwrap_or(Complex64::ZERO)
    }

    pub fn coeffs(&self) -> &BTreeMap<i64, Complex64> {
        &self.coeffs
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    pub fn cert_level(&self) -> CertLevel {
        self.tail.level()
    }

    /// Ingest equispaced samples over one period. The count must be a
    /// power of two >= 4; coefficients are recovered up to index
    /// count/2 - 1 and the tail is a fitted geometric envelope with a
    /// 2x safety factor, so the result is only `Heuristic`.
    pub fn from_samples(samples: &[Complex64], period: f64) -> Result<Self> {
        let n = samples.len();
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "sample count must be a power of two >= 4, got {n}"
            )));
        }
        if !period.is_finite() || period <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "period must be positive and finite, got {period}"
            )));
        }

        let mut buf = samples.to_vec();
        fft_in_place(&mut buf);

        let m_max = (n / 2 - 1) as i64;
        let scale = period.sqrt() / n as f64;
        let mut coeffs = BTreeMap::new();
        for m in -m_max..=m_max {
            // fhat_m = (sqrt(L)/n) sum_k s_k exp(+i 2 pi m k / n)
            //        = scale * X[(n - m) mod n] for the forward transform X
            let bin = ((n as i64 - m) % n as i64) as usize % n;
            coeffs.insert(m, buf[bin] * scale);
        }

        let tail = fit_envelope(&coeffs, m_max);
        Self::new(period, coeffs, tail)
    }

    /// The elliptic potential 6 l^2 sn^2(x,l) - 4 - l^2 represented on a
    /// period that is `stride` copies of its natural period 2K(l).
    ///
    /// Harmonic j of the potential lands at Fourier index m = stride * j,
    /// with value sqrt(L) b_j; the tail is the analytic closed form, so
    /// the result is `Certified`.
    pub fn hill_potential(ell: Modulus, stride: u32) -> Result<Self> {
        if stride == 0 {
            return Err(Error::InvalidInput("stride must be >= 1".into()));
        }
        let k = specfun::elliptic_k(ell);
        let period = 2.0 * f64::from(stride) * k;
        let root_l = period.sqrt();
        let mut coeffs = BTreeMap::new();
        coeffs.insert(0, Complex64::new(root_l * specfun::hill_b(ell, 0), 0.0));
        for j in 1..=2048u32 {
            let b = specfun::hill_b(ell, j);
            if b.abs() < STORE_EPS {
                break;
            }
            let m = i64::from(stride) * i64::from(j);
            coeffs.insert(m, Complex64::new(root_l * b, 0.0));
            coeffs.insert(-m, Complex64::new(root_l * b, 0.0));
        }
        Self::new(
            period,
            coeffs,
            Tail::Hill {
                ell: ell.value(),
                stride,
            },
        )
    }

    /// Upper bound on sum_{|m| >= n} |fhat_m|.
    ///
    /// For `ExactZero` tails this is the exact partial sum of the stored
    /// window; analytic tails use their closed form and fitted envelopes
    /// their envelope value.
    pub fn tail_sum(&self, n: usize) -> f64 {
        match &self.tail {
            Tail::ExactZero => self
                .coeffs
                .iter()
                .filter(|(m, _)| m.unsigned_abs() as usize >= n)
                .map(|(_, v)| v.norm())
                .sum(),
            tail => tail.eval(n),
        }
    }

    /// Evaluate sum_m fhat_m e_m(x).
    pub fn synthesize(&self, x: f64) -> Complex64 {
        let root_l = self.period.sqrt();
        let omega = -2.0 * PI * x / self.period;
        let mut acc = Complex64::ZERO;
        for (&m, &v) in &self.coeffs {
            acc += v * Complex64::from_polar(1.0, omega * m as f64);
        }
        acc / root_l
    }

    /// Exact linear combination sum_i w_i f_i on a shared period.
    /// The combined tail is the weighted sum of the constituent tails.
    pub fn linear_combination(terms: &[(Complex64, &PeriodicCoefficient)]) -> Result<Self> {
        let period = match terms.first() {
            Some((_, c)) => c.period,
            None => {
                return Err(Error::InvalidInput(
                    "linear combination needs at least one term".into(),
                ))
            }
        };
        let mut coeffs: BTreeMap<i64, Complex64> = BTreeMap::new();
        let mut tails = Vec::new();
        for (w, c) in terms {
            if (c.period - period).abs() > 1e-12 * period {
                return Err(Error::InvalidInput(format!(
                    "period mismatch in linear combination: {} vs {}",
                    c.period, period
                )));
            }
            for (&m, &v) in &c.coeffs {
                *coeffs.entry(m).or_insert(Complex64::ZERO) += *w * v;
            }
            match (&c.tail, w.norm()) {
                (Tail::ExactZero, _) | (_, 0.0) => {}
                (tail, wn) => tails.push(tail.clone().scaled(wn)),
            }
        }
        let tail = match tails.len() {
            0 => Tail::ExactZero,
            1 => tails.pop().unwrap(),
            _ => Tail::Sum { parts: tails },
        };
        Self::new(period, coeffs, tail)
    }

    /// Add a constant: shifts the m = 0 coefficient by c sqrt(L), leaving
    /// every other coefficient and the tail untouched.
    pub fn plus_constant(&self, c: Complex64) -> Self {
        let mut coeffs = self.coeffs.clone();
        *coeffs.entry(0).or_insert(Complex64::ZERO) += c * self.period.sqrt();
        Self::new(self.period, coeffs, self.tail.clone())
            .expect("period already validated")
    }
}

/// Fit A rho^|m| to the stored magnitudes over the top quartile of |m|,
/// then enforce soundness over the stored window and double A.
fn fit_envelope(coeffs: &BTreeMap<i64, Complex64>, m_max: i64) -> Tail {
    let lo = (3 * m_max) / 4;
    let pts: Vec<(f64, f64)> = coeffs
        .iter()
        .filter(|(m, v)| m.abs() >= lo.max(1) && v.norm() > 1e-280)
        .map(|(m, v)| (m.abs() as f64, v.norm().ln()))
        .collect();

    let (mut amp, mut ratio) = if pts.len() >= 2 {
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let denom = n * sxx - sx * sx;
        if denom.abs() < 1e-30 {
            (f64::NAN, f64::NAN)
        } else {
            let slope = (n * sxy - sx * sy) / denom;
            let intercept = (sy - slope * sx) / n;
            (intercept.exp(), slope.exp())
        }
    } else {
        (f64::NAN, f64::NAN)
    };

    if !ratio.is_finite() || ratio <= 0.0 || ratio >= 0.999 {
        ratio = 0.999;
    }
    if !amp.is_finite() || amp <= 0.0 {
        amp = coeffs.values().map(|v| v.norm()).fold(0.0, f64::max);
    }

    // Enforce the majorant over the stored window, then apply the 2x
    // safety factor.
    let mut needed = amp;
    for n in 1..=(m_max.max(1) as usize) {
        let partial: f64 = coeffs
            .iter()
            .filter(|(m, _)| m.unsigned_abs() as usize >= n)
            .map(|(_, v)| v.norm())
            .sum();
        let envelope_unit = ratio.powi(n as i32) / (1.0 - ratio);
        if partial > needed * envelope_unit {
            needed = partial / envelope_unit;
        }
    }
    Tail::Geometric {
        amplitude: 2.0 * needed,
        ratio,
    }
}

/// Radix-2 iterative forward DFT: X[t] = sum_k x[k] exp(-i 2 pi t k / n).
fn fft_in_place(x: &mut [Complex64]) {
    let n = x.len();
    debug_assert!(n.is_power_of_two());
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            x.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let ang = -2.0 * PI / len as f64;
        let wl = Complex64::from_polar(1.0, ang);
        for start in (0..n).step_by(len) {
            let mut w = Complex64::new(1.0, 0.0);
            for k in 0..len / 2 {
                let u = x[start + k];
                let v = x[start + k + len / 2] * w;
                x[start + k] = u + v;
                x[start + k + len / 2] = u - v;
                w *= wl;
            }
        }
        len <<= 1;
    }
}

/// Serialized form of a coefficient file:
/// `{ "period": L, "entries": [[m, re, im], ...], "tail": {...} }`.
#[derive(Serialize, Deserialize)]
struct CoefficientFile {
    period: f64,
    entries: Vec<(i64, f64, f64)>,
    tail: Tail,
}

impl Serialize for PeriodicCoefficient {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let entries = self
            .coeffs
            .iter()
            .map(|(&m, v)| (m, v.re, v.im))
            .collect();
        CoefficientFile {
            period: self.period,
            entries,
            tail: self.tail.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PeriodicCoefficient {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = CoefficientFile::deserialize(d)?;
        let coeffs = file
            .entries
            .into_iter()
            .map(|(m, re, im)| (m, Complex64::new(re, im)))
            .collect();
        PeriodicCoefficient::new(file.period, coeffs, file.tail).map_err(serde::de::Error::custom)
    }
}
