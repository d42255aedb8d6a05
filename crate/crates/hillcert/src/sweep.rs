//! Quasi-momentum sweeps, band-edge identification, convergence studies,
//! and exponential rate fitting.
//!
//! Every (mu, N, ell) cell is a pure task; sweeps dispatch cells through
//! rayon and merge results in input order, so output is deterministic.

use crate::certify::{self, GershgorinComponent};
use crate::eig::eigh;
use crate::error::{Error, Result};
use crate::operator::{assemble, bloch_transform, OperatorSpec};
use crate::specfun::Modulus;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::io::Write;

/// Eigenvalues of the truncated operator at one quasi-momentum.
#[derive(Debug, Clone)]
pub struct BandPoint {
    pub mu: f64,
    pub n_trunc: usize,
    /// Ascending eigenvalues, all 2N+1 of them.
    pub eigenvalues: Vec<f64>,
}

/// Solve on an equispaced mu grid over [0, 2 pi / L); the left endpoint
/// is included, the right excluded.
pub fn band_sweep(spec: &OperatorSpec, n_trunc: usize, mu_count: usize) -> Result<Vec<BandPoint>> {
    if mu_count < 2 {
        return Err(Error::InvalidInput(format!(
            "mu_count must be >= 2, got {mu_count}"
        )));
    }
    let brillouin = 2.0 * PI / spec.period();
    let mus: Vec<f64> = (0..mu_count)
        .map(|i| i as f64 * brillouin / mu_count as f64)
        .collect();
    mus.par_iter()
        .map(|&mu| {
            let bloch = bloch_transform(spec, mu)?;
            let mat = assemble(&bloch, n_trunc);
            let eigenvalues = eigh(&mat)?.into_iter().map(|p| p.value).collect();
            Ok(BandPoint {
                mu,
                n_trunc,
                eigenvalues,
            })
        })
        .collect()
}

/// Closed-form band edges (a), (b), (c) of the elliptic-potential
/// operator: a and c are l^2 - 2 -+ 2 sqrt(1 - l^2 + l^4), b is -3(1-l^2).
pub fn hill_band_edges(ell: Modulus) -> [f64; 3] {
    let l2 = ell.value() * ell.value();
    let root = (1.0 - l2 + l2 * l2).sqrt();
    [l2 - 2.0 - 2.0 * root, -3.0 * (1.0 - l2), l2 - 2.0 + 2.0 * root]
}

/// Band edges identified from one mu = 0 solve, per modulus.
#[derive(Debug, Clone)]
pub struct EdgeRecord {
    pub ell: f64,
    /// Computed eigenvalues nearest the three closed-form edges.
    pub computed: [f64; 3],
    pub exact: [f64; 3],
    /// Set when the nearest-eigenvalue assignment was not one-to-one.
    pub ambiguous: bool,
}

/// For each modulus, solve the truncated problem at mu = 0 and pick the
/// eigenvalues nearest the three closed-form band edges.
pub fn band_edges_vs_ell(
    ell_grid: &[Modulus],
    n_trunc: usize,
    stride: u32,
) -> Result<Vec<EdgeRecord>> {
    ell_grid
        .par_iter()
        .map(|&ell| {
            let spec = crate::operator::hill_operator(ell, stride)?;
            let bloch = bloch_transform(&spec, 0.0)?;
            let mat = assemble(&bloch, n_trunc);
            let eigs: Vec<f64> = eigh(&mat)?.into_iter().map(|p| p.value).collect();
            let exact = hill_band_edges(ell);
            let mut computed = [0.0f64; 3];
            let mut picked = [usize::MAX; 3];
            for (slot, &target) in exact.iter().enumerate() {
                let (idx, &val) = eigs
                    .iter()
                    .enumerate()
                    .min_by(|a, b| {
                        (a.1 - target)
                            .abs()
                            .partial_cmp(&(b.1 - target).abs())
                            .unwrap()
                    })
                    .ok_or_else(|| Error::InsufficientData("empty spectrum".into()))?;
                computed[slot] = val;
                picked[slot] = idx;
            }
            let ambiguous = picked[0] == picked[1] || picked[1] == picked[2] || picked[0] == picked[2];
            Ok(EdgeRecord {
                ell: ell.value(),
                computed,
                exact,
                ambiguous,
            })
        })
        .collect()
}

/// One truncation size in a convergence study.
#[derive(Debug, Clone)]
pub struct ConvergenceRecord {
    pub n_trunc: usize,
    /// The tracked eigenvalue; None when nothing fell in the tracking ball.
    pub lambda_n: Option<f64>,
    /// |lambda_N - reference| when the eigenvalue was found.
    pub error: Option<f64>,
    /// Certified bound when the isolation condition held.
    pub bound: Option<f64>,
}

/// Track one eigenvalue across truncation sizes.
///
/// The eigenvalue is located by Gershgorin-component membership around
/// the tracking center; if several eigenvalues share the component, the
/// one nearest the reference wins. Certification uses the component
/// parameters when they isolate, falling back to an eigenvalue-centred
/// ball otherwise; when neither isolates the bound is absent.
pub fn convergence_study(
    spec: &OperatorSpec,
    mu: f64,
    n_list: &[usize],
    reference: f64,
    zeta_track: f64,
    r_track: f64,
) -> Result<Vec<ConvergenceRecord>> {
    if !n_list.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidInput("n_list must be ascending".into()));
    }
    let bloch = bloch_transform(spec, mu)?;
    n_list
        .par_iter()
        .map(|&n_trunc| {
            let mat = assemble(&bloch, n_trunc);
            let pairs = eigh(&mat)?;
            let eigs: Vec<f64> = pairs.iter().map(|p| p.value).collect();
            let comps = certify::gershgorin(&mat);

            let tracked = tracked_eigenvalue(&eigs, &comps, zeta_track, r_track, reference);
            let Some(idx) = tracked else {
                return Ok(ConvergenceRecord {
                    n_trunc,
                    lambda_n: None,
                    error: None,
                    bound: None,
                });
            };
            let pair = &pairs[idx];
            let bound = certify::select_params(pair.value, &eigs, &comps).and_then(|(zeta, r)| {
                certify::aposteriori_bound(&bloch, n_trunc, pair, &eigs, zeta, r)
                    .ok()
                    .map(|c| c.bound)
            });
            Ok(ConvergenceRecord {
                n_trunc,
                lambda_n: Some(pair.value),
                error: Some((pair.value - reference).abs()),
                bound,
            })
        })
        .collect()
}

/// Index of the eigenvalue tracked via the ball around the tracking
/// center, widened to the Gershgorin component containing the center,
/// disambiguated by distance to the reference. None is a gap: nothing
/// fell inside the tracking region.
fn tracked_eigenvalue(
    eigs: &[f64],
    comps: &[GershgorinComponent],
    zeta_track: f64,
    r_track: f64,
    reference: f64,
) -> Option<usize> {
    let comp = comps.iter().find(|c| c.contains(zeta_track));
    let in_region = |e: f64| {
        (zeta_track - e).abs() <= r_track || comp.is_some_and(|c| c.contains(e))
    };
    eigs.iter()
        .enumerate()
        .filter(|(_, &e)| in_region(e))
        .min_by(|a, b| {
            (a.1 - reference)
                .abs()
                .partial_cmp(&(b.1 - reference).abs())
                .unwrap()
        })
        .map(|(i, _)| i)
}

/// Result of a log-linear rate fit.
#[derive(Debug, Clone, Copy)]
pub struct RateFit {
    /// Exponential decay rate per unit N (positive for decaying data).
    pub rate: f64,
    pub r_squared: f64,
    pub points_used: usize,
}

/// Records with error at or below this are treated as double-precision
/// noise and excluded from rate fits.
pub const ERROR_FLOOR: f64 = 1e-13;

/// Least-squares fit of log(error) - poly_power * log(N) against N over
/// the above-floor records; returns the negated slope. Pass
/// poly_power = 0 to fit a bare exponential.
pub fn fit_exponential_rate(records: &[ConvergenceRecord], poly_power: f64) -> Result<RateFit> {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter_map(|r| {
            let err = r.error?;
            (err > ERROR_FLOOR).then(|| {
                (
                    r.n_trunc as f64,
                    err.ln() - poly_power * (r.n_trunc as f64).ln(),
                )
            })
        })
        .collect();
    fit_line(&pts)
}

/// Same fit applied to the certified bound column.
pub fn fit_bound_rate(records: &[ConvergenceRecord], poly_power: f64) -> Result<RateFit> {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter_map(|r| {
            let b = r.bound?;
            (b > 0.0).then(|| {
                (
                    r.n_trunc as f64,
                    b.ln() - poly_power * (r.n_trunc as f64).ln(),
                )
            })
        })
        .collect();
    fit_line(&pts)
}

fn fit_line(pts: &[(f64, f64)]) -> Result<RateFit> {
    if pts.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "rate fit needs at least 4 usable points, got {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-30 {
        return Err(Error::InsufficientData("degenerate abscissae".into()));
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let mean = sy / n;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - mean).powi(2)).sum();
    let ss_res: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(RateFit {
        rate: -slope,
        r_squared,
        points_used: pts.len(),
    })
}

/// Cluster probe output for one truncation size.
#[derive(Debug, Clone)]
pub struct ClusterRecord {
    pub n_trunc: usize,
    pub count: usize,
    /// Eigenvalues in the tracked component, ascending.
    pub members: Vec<f64>,
    /// Distance of each member to the closest reference edge.
    pub distances: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ClusterProbe {
    pub records: Vec<ClusterRecord>,
    /// Fitted decay rate of the worst member distance, when fittable.
    pub fitted_rate: Option<f64>,
    /// The component's disk count changed across the study.
    pub count_changed: bool,
}

/// Inspect a clustered Gershgorin component (count >= 2) across
/// truncation sizes. No certificate is emitted; members and their
/// distances to the reference edges are reported for inspection.
pub fn cluster_rate_probe(
    spec: &OperatorSpec,
    mu: f64,
    n_list: &[usize],
    component_index: usize,
    edge_refs: &[f64],
) -> Result<ClusterProbe> {
    if edge_refs.is_empty() {
        return Err(Error::InvalidInput("edge_refs must be nonempty".into()));
    }
    let bloch = bloch_transform(spec, mu)?;
    let mut records = Vec::new();
    let mut expected_count: Option<usize> = None;
    let mut count_changed = false;

    for &n_trunc in n_list {
        let mat = assemble(&bloch, n_trunc);
        let eigs: Vec<f64> = eigh(&mat)?.into_iter().map(|p| p.value).collect();
        let comps = certify::gershgorin(&mat);
        let comp = comps.get(component_index).ok_or_else(|| {
            Error::InvalidInput(format!(
                "component index {component_index} out of range ({} components)",
                comps.len()
            ))
        })?;
        if let Some(k0) = expected_count {
            if comp.disk_count != k0 {
                count_changed = true;
            }
        } else {
            if comp.disk_count < 2 {
                return Err(Error::InvalidInput(format!(
                    "component {component_index} has count {}, need a cluster (>= 2)",
                    comp.disk_count
                )));
            }
            expected_count = Some(comp.disk_count);
        }
        let members: Vec<f64> = eigs
            .iter()
            .copied()
            .filter(|&e| comp.contains(e))
            .collect();
        let distances = members
            .iter()
            .map(|&m| {
                edge_refs
                    .iter()
                    .map(|&e| (m - e).abs())
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        records.push(ClusterRecord {
            n_trunc,
            count: comp.disk_count,
            members,
            distances,
        });
    }

    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter_map(|r| {
            let worst = r.distances.iter().copied().fold(0.0f64, f64::max);
            (worst > ERROR_FLOOR).then(|| (r.n_trunc as f64, worst.ln()))
        })
        .collect();
    let fitted_rate = fit_line(&pts).ok().map(|f| f.rate);
    Ok(ClusterProbe {
        records,
        fitted_rate,
        count_changed,
    })
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// bands.csv: mu, index, lambda.
pub fn write_bands_csv<W: Write>(w: &mut W, points: &[BandPoint]) -> std::io::Result<()> {
    writeln!(w, "mu,index,lambda")?;
    for p in points {
        for (i, lam) in p.eigenvalues.iter().enumerate() {
            writeln!(w, "{},{},{}", fmt(p.mu), i, fmt(*lam))?;
        }
    }
    Ok(())
}

/// converge.csv: N, lambda_N, error, bound (empty cells when absent).
pub fn write_converge_csv<W: Write>(
    w: &mut W,
    records: &[ConvergenceRecord],
) -> std::io::Result<()> {
    writeln!(w, "N,lambda_N,error,bound")?;
    for r in records {
        let opt = |v: Option<f64>| v.map(fmt).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{}",
            r.n_trunc,
            opt(r.lambda_n),
            opt(r.error),
            opt(r.bound)
        )?;
    }
    Ok(())
}

/// edges.csv: ell, computed_a, exact_a, ..., ambiguous flag.
pub fn write_edges_csv<W: Write>(w: &mut W, records: &[EdgeRecord]) -> std::io::Result<()> {
    writeln!(
        w,
        "ell,computed_a,exact_a,computed_b,exact_b,computed_c,exact_c,ambiguous"
    )?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            fmt(r.ell),
            fmt(r.computed[0]),
            fmt(r.exact[0]),
            fmt(r.computed[1]),
            fmt(r.exact[1]),
            fmt(r.computed[2]),
            fmt(r.exact[2]),
            r.ambiguous
        )?;
    }
    Ok(())
}
