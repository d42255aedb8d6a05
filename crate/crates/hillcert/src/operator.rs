//! Operator specification, the quasi-momentum transform, and assembly of
//! the truncated Hermitian matrix on Fourier modes -N..N.
//!
//! Basis convention: e_n(x) = (1/sqrt(L)) exp(-i 2 pi n x / L). The matrix
//! entry for row n, column n' is
//!   (1/sqrt(L)) sum_j fhat_j[n - n'] (-i 2 pi n' / L)^j,
//! where the order-p term is the constant `leading` (a Kronecker delta on
//! the index lattice).

use crate::error::{Error, Result};
use crate::fourier::{CertLevel, PeriodicCoefficient};
use crate::specfun::Modulus;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

/// A differential operator of order p with periodic coefficients:
/// leading * d^p/dx^p + sum_{j<p} f~_j(x) d^j/dx^j.
///
/// The leading term is restricted to a constant +1 or -1; the certified
/// bound machinery downstream relies on that restriction.
#[derive(Debug, Clone)]
pub struct OperatorSpec {
    order: u32,
    leading: f64,
    coeffs: Vec<PeriodicCoefficient>,
}

impl OperatorSpec {
    pub fn new(order: u32, leading: f64, coeffs: Vec<PeriodicCoefficient>) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidInput("operator order must be >= 1".into()));
        }
        if leading != 1.0 && leading != -1.0 {
            return Err(Error::InvalidInput(format!(
                "leading coefficient must be +1 or -1, got {leading}"
            )));
        }
        if coeffs.len() != order as usize {
            return Err(Error::InvalidInput(format!(
                "expected {} coefficient functions, got {}",
                order,
                coeffs.len()
            )));
        }
        let period = coeffs[0].period();
        for c in &coeffs {
            if (c.period() - period).abs() > 1e-12 * period {
                return Err(Error::InvalidInput(
                    "all coefficient functions must share one period".into(),
                ));
            }
        }
        Ok(OperatorSpec {
            order,
            leading,
            coeffs,
        })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn leading(&self) -> f64 {
        self.leading
    }

    pub fn period(&self) -> f64 {
        self.coeffs[0].period()
    }

    pub fn coeffs(&self) -> &[PeriodicCoefficient] {
        &self.coeffs
    }

    pub fn cert_level(&self) -> CertLevel {
        self.coeffs
            .iter()
            .map(PeriodicCoefficient::cert_level)
            .min()
            .unwrap_or(CertLevel::Certified)
    }

    /// Load from a JSON file `{order, leading, period, coefficients: [...]}`
    /// where each coefficient is inline or `{"file": "path"}` relative to
    /// the spec file's directory.
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: OperatorFile = serde_json::from_str(&text)?;
        let dir = path.parent().unwrap_or(Path::new("."));
        let mut coeffs = Vec::new();
        for entry in file.coefficients {
            match entry {
                CoefficientEntry::Inline(c) => coeffs.push(c),
                CoefficientEntry::File { file } => {
                    let text = std::fs::read_to_string(dir.join(&file))?;
                    coeffs.push(serde_json::from_str(&text)?);
                }
            }
        }
        let spec = OperatorSpec::new(file.order, file.leading, coeffs)?;
        if (spec.period() - file.period).abs() > 1e-9 * file.period.abs().max(1.0) {
            return Err(Error::InvalidInput(format!(
                "declared period {} does not match coefficient period {}",
                file.period,
                spec.period()
            )));
        }
        Ok(spec)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "order": self.order,
            "leading": self.leading,
            "period": self.period(),
            "coefficients": self.coeffs,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct OperatorFile {
    order: u32,
    leading: f64,
    period: f64,
    coefficients: Vec<CoefficientEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CoefficientEntry {
    File { file: String },
    Inline(PeriodicCoefficient),
}

/// The operator on [0, L] obtained by conjugating with exp(i mu x):
/// coefficients f_j of leading * (d/dx + i mu)^p + sum f~_k (d/dx + i mu)^k,
/// expanded onto plain derivatives.
#[derive(Debug, Clone)]
pub struct BlochOperator {
    order: u32,
    leading: f64,
    mu: f64,
    coeffs: Vec<PeriodicCoefficient>,
}

impl BlochOperator {
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn leading(&self) -> f64 {
        self.leading
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn period(&self) -> f64 {
        self.coeffs[0].period()
    }

    /// Coefficient function of d^j/dx^j for j < order.
    pub fn coeff(&self, j: usize) -> &PeriodicCoefficient {
        &self.coeffs[j]
    }

    pub fn coeffs(&self) -> &[PeriodicCoefficient] {
        &self.coeffs
    }

    pub fn cert_level(&self) -> CertLevel {
        self.coeffs
            .iter()
            .map(PeriodicCoefficient::cert_level)
            .min()
            .unwrap_or(CertLevel::Certified)
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * f64::from(n - i) / f64::from(i + 1);
    }
    acc
}

/// Conjugate the operator by exp(i mu x), mu in [0, 2 pi / L).
///
/// f_j = sum_{k >= j} binom(k, j) (i mu)^(k-j) c_k with c_k the original
/// coefficient for k < p and the leading constant for k = p. At mu = 0
/// the coefficients come back unchanged.
pub fn bloch_transform(spec: &OperatorSpec, mu: f64) -> Result<BlochOperator> {
    let period = spec.period();
    let brillouin = 2.0 * PI / period;
    if !(0.0..brillouin).contains(&mu) {
        return Err(Error::Domain(format!(
            "mu must lie in [0, {brillouin}), got {mu}"
        )));
    }

    let p = spec.order;
    let imu = Complex64::new(0.0, mu);
    let mut coeffs = Vec::with_capacity(p as usize);
    for j in 0..p {
        // weighted sum over the periodic coefficients k = j .. p-1
        let mut terms: Vec<(Complex64, &PeriodicCoefficient)> = Vec::new();
        let mut power = Complex64::new(1.0, 0.0); // (i mu)^(k-j)
        for k in j..p {
            let w = power * binomial(k, j);
            if w != Complex64::ZERO {
                terms.push((w, &spec.coeffs[k as usize]));
            }
            power *= imu;
        }
        // k = p contributes binom(p, j) (i mu)^(p-j) * leading as a constant
        let const_term = power * binomial(p, j) * spec.leading;

        let f_j = if terms.is_empty() {
            PeriodicCoefficient::constant(const_term, period)?
        } else {
            PeriodicCoefficient::linear_combination(&terms)?.plus_constant(const_term)
        };
        coeffs.push(f_j);
    }

    Ok(BlochOperator {
        order: p,
        leading: spec.leading,
        mu,
        coeffs,
    })
}

/// Dense complex matrix on Fourier modes -N..N (dimension 2N+1).
#[derive(Debug, Clone)]
pub struct HermitianMatrix {
    n_modes: i64,
    data: Vec<Complex64>,
}

impl HermitianMatrix {
    pub fn zero(n_modes: usize) -> Self {
        let dim = 2 * n_modes + 1;
        HermitianMatrix {
            n_modes: n_modes as i64,
            data: vec![Complex64::ZERO; dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        (2 * self.n_modes + 1) as usize
    }

    /// Truncation index N (modes run -N..N).
    pub fn n_modes(&self) -> usize {
        self.n_modes as usize
    }

    fn idx(&self, row: usize, col: usize) -> usize {
        row * self.dim() + col
    }

    /// Entry by storage position (row, col in 0..dim).
    pub fn at(&self, row: usize, col: usize) -> Complex64 {
        self.data[self.idx(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, v: Complex64) {
        let i = self.idx(row, col);
        self.data[i] = v;
    }

    /// Entry by mode indices n, n' in -N..N.
    pub fn entry(&self, n: i64, np: i64) -> Complex64 {
        let row = (n + self.n_modes) as usize;
        let col = (np + self.n_modes) as usize;
        self.at(row, col)
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// Largest entry magnitude.
    pub fn scale(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Max row sum of absolute values.
    pub fn inf_norm(&self) -> f64 {
        let dim = self.dim();
        (0..dim)
            .map(|r| (0..dim).map(|c| self.at(r, c).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Real diagonal in mode order -N..N.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.at(i, i).re).collect()
    }
}

/// Assemble the truncated matrix of the transformed operator on modes
/// -N..N. Truncation is a principal submatrix: entries depend only on
/// the mode pair, never on N.
pub fn assemble(bloch: &BlochOperator, n_trunc: usize) -> HermitianMatrix {
    let period = bloch.period();
    let p = bloch.order as usize;
    let n = n_trunc as i64;
    let root_l_inv = 1.0 / period.sqrt();
    let mut matrix = HermitianMatrix::zero(n_trunc);

    // powers (-i 2 pi n' / L)^j for each column
    let base: Vec<Complex64> = (-n..=n)
        .map(|np| Complex64::new(0.0, -2.0 * PI * np as f64 / period))
        .collect();

    let dim = 2 * n_trunc + 1;
    for (col, &b) in base.iter().enumerate() {
        let mut powers = Vec::with_capacity(p + 1);
        let mut acc = Complex64::new(1.0, 0.0);
        for _ in 0..=p {
            powers.push(acc);
            acc *= b;
        }
        let np = col as i64 - n;
        for row in 0..dim {
            let nn = row as i64 - n;
            let m = nn - np;
            let mut v = Complex64::ZERO;
            for (j, f_j) in bloch.coeffs.iter().enumerate() {
                let c = f_j.coeff(m);
                if c != Complex64::ZERO {
                    v += c * powers[j];
                }
            }
            if m == 0 {
                // order-p term: constant leading coefficient
                v += Complex64::new(period.sqrt() * bloch.leading, 0.0) * powers[p];
            }
            matrix.set(row, col, v * root_l_inv);
        }
    }
    matrix
}

/// Assemble the rectangular block of the transformed operator with rows
/// on modes -row_modes..row_modes and columns on -col_modes..col_modes.
/// The square case coincides with [`assemble`].
pub fn assemble_block(
    bloch: &BlochOperator,
    row_modes: usize,
    col_modes: usize,
) -> crate::eig::RectMatrix {
    let period = bloch.period();
    let p = bloch.order() as usize;
    let rows = 2 * row_modes + 1;
    let cols = 2 * col_modes + 1;
    let root_l_inv = 1.0 / period.sqrt();
    let mut data = vec![Complex64::ZERO; rows * cols];
    for col in 0..cols {
        let np = col as i64 - col_modes as i64;
        let base = Complex64::new(0.0, -2.0 * PI * np as f64 / period);
        let mut powers = Vec::with_capacity(p + 1);
        let mut acc = Complex64::new(1.0, 0.0);
        for _ in 0..=p {
            powers.push(acc);
            acc *= base;
        }
        for row in 0..rows {
            let nn = row as i64 - row_modes as i64;
            let m = nn - np;
            let mut v = Complex64::ZERO;
            for (j, f_j) in bloch.coeffs.iter().enumerate() {
                let c = f_j.coeff(m);
                if c != Complex64::ZERO {
                    v += c * powers[j];
                }
            }
            if m == 0 {
                v += Complex64::new(period.sqrt() * bloch.leading, 0.0) * powers[p];
            }
            data[row * cols + col] = v * root_l_inv;
        }
    }
    crate::eig::RectMatrix::new(rows, cols, data).expect("sizes consistent by construction")
}

/// Max over (n, n') of |A[n][n'] - conj(A[n'][n])|.
pub fn hermiticity_defect(matrix: &HermitianMatrix) -> f64 {
    let dim = matrix.dim();
    let mut worst = 0.0f64;
    for r in 0..dim {
        for c in r..dim {
            let d = (matrix.at(r, c) - matrix.at(c, r).conj()).norm();
            worst = worst.max(d);
        }
    }
    worst
}

/// The second-order elliptic-potential operator
/// -d^2/dx^2 + 6 l^2 sn^2(x,l) - 4 - l^2 on a period of `stride` copies
/// of the potential's natural period 2K(l).
pub fn hill_operator(ell: Modulus, stride: u32) -> Result<OperatorSpec> {
    let potential = PeriodicCoefficient::hill_potential(ell, stride)?;
    let zero = PeriodicCoefficient::constant(Complex64::ZERO, potential.period())?;
    OperatorSpec::new(2, -1.0, vec![potential, zero])
}
