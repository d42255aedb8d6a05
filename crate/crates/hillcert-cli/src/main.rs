//! Command-line driver: spectra, band sweeps, convergence studies,
//! Gershgorin reports, certified bounds, and the bundled demo run.
//!
//! Exit codes: 0 success, 1 invalid input, 2 numerical failure
//! (non-Hermitian input or a failed isolation check when a certificate
//! was demanded).

use clap::{Parser, Subcommand, ValueEnum};
use hillcert::sweep::{write_bands_csv, write_converge_csv, write_edges_csv};
use hillcert::*;
use serde_json::json;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
// the library exports a single-parameter Result alias; this module wants
// the plain std one
use std::result::Result;

#[derive(Parser)]
#[command(
    name = "hillcert",
    about = "Spectra of periodic ODE operators with certified eigenvalue error bounds",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues of the truncated operator at one quasi-momentum.
    Spectrum {
        /// Operator spec file, or builtin "hill(ell,M)"
        #[arg(long)]
        operator: String,
        #[arg(long, default_value_t = 0.0)]
        mu: f64,
        /// Truncation index: modes -N..N
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Eigenvalues over an equispaced quasi-momentum grid (bands.csv layout).
    Bands {
        #[arg(long)]
        operator: String,
        #[arg(long = "N")]
        n: usize,
        #[arg(long, default_value_t = 64)]
        mu_count: usize,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Track one eigenvalue across truncation sizes (converge.csv layout).
    Converge {
        #[arg(long)]
        operator: String,
        #[arg(long, default_value_t = 0.0)]
        mu: f64,
        /// Comma-separated ascending truncation sizes
        #[arg(long = "N-list", value_delimiter = ',')]
        n_list: Vec<usize>,
        /// Reference value for the error column (builtin default: lowest band edge)
        #[arg(long, allow_negative_numbers = true)]
        reference: Option<f64>,
        /// Tracking-ball center (builtin default: mode-zero diagonal entry)
        #[arg(long, allow_negative_numbers = true)]
        zeta: Option<f64>,
        /// Tracking-ball radius (builtin default: the closed-form interval radius)
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Certified error bound for one isolated eigenvalue (JSON report).
    Certify {
        #[arg(long)]
        operator: String,
        #[arg(long, default_value_t = 0.0)]
        mu: f64,
        #[arg(long = "N")]
        n: usize,
        /// Certification center (default: selected from the Gershgorin components)
        #[arg(long, allow_negative_numbers = true)]
        zeta: Option<f64>,
        /// Certification radius (required together with --zeta)
        #[arg(long)]
        r: Option<f64>,
        /// Certify the eigenvalue nearest this value
        #[arg(long, allow_negative_numbers = true)]
        lambda_near: Option<f64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Gershgorin component report.
    Gersh {
        #[arg(long)]
        operator: String,
        #[arg(long, default_value_t = 0.0)]
        mu: f64,
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Full demo: band edges, bands, convergence with bounds, Gershgorin
    /// reports, and certificates, written into one directory.
    HillDemo {
        #[arg(long)]
        output: PathBuf,
    },
}

enum CliError {
    Invalid(String),
    Numerical(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NotHermitian { .. } | Error::IsolationFailed(_) | Error::NoConvergence(_) => {
                CliError::Numerical(e.to_string())
            }
            other => CliError::Invalid(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    if let Some(threads) = std::env::var_os("HILLCERT_THREADS") {
        let parsed = threads.to_str().and_then(|s| s.parse::<usize>().ok());
        match parsed {
            Some(t) if t >= 1 => {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build_global()
                    .ok();
            }
            _ => {
                eprintln!("error: HILLCERT_THREADS must be a positive integer");
                return ExitCode::from(1);
            }
        }
    }

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap help/version output is not an error
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };

    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

/// Parsed --operator argument: a builtin elliptic-potential operator or
/// a spec loaded from disk.
struct LoadedOperator {
    spec: OperatorSpec,
    builtin: Option<(Modulus, u32)>,
}

fn load_operator(arg: &str) -> Result<LoadedOperator, CliError> {
    let trimmed = arg.trim();
    if let Some(rest) = trimmed.strip_prefix("hill(") {
        let inner = rest.strip_suffix(')').ok_or_else(|| {
            CliError::Invalid(format!("malformed builtin operator '{trimmed}', expected hill(ell,M)"))
        })?;
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return Err(CliError::Invalid(
                "builtin operator needs exactly hill(ell,M)".into(),
            ));
        }
        let ell_val: f64 = parts[0]
            .parse()
            .map_err(|_| CliError::Invalid(format!("cannot parse ell from '{}'", parts[0])))?;
        let stride: u32 = parts[1]
            .parse()
            .map_err(|_| CliError::Invalid(format!("cannot parse M from '{}'", parts[1])))?;
        if !(ell_val > 0.0 && ell_val < 1.0) {
            return Err(CliError::Invalid(format!(
                "builtin operator requires 0 < ell < 1, got {ell_val}"
            )));
        }
        if stride < 1 {
            return Err(CliError::Invalid("builtin operator requires M >= 1".into()));
        }
        let ell = Modulus::new(ell_val)?;
        let spec = hill_operator(ell, stride)?;
        Ok(LoadedOperator {
            spec,
            builtin: Some((ell, stride)),
        })
    } else {
        let spec = OperatorSpec::from_json_file(Path::new(trimmed))?;
        Ok(LoadedOperator {
            spec,
            builtin: None,
        })
    }
}

fn emit(output: Option<&Path>, contents: &str) -> Result<(), CliError> {
    match output {
        Some(path) => {
            std::fs::write(path, contents).map_err(|e| CliError::Invalid(e.to_string()))
        }
        None => {
            print!("{contents}");
            std::io::stdout().flush().ok();
            Ok(())
        }
    }
}

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Spectrum {
            operator,
            mu,
            n,
            output,
            format,
        } => {
            let op = load_operator(&operator)?;
            let bloch = bloch_transform(&op.spec, mu)?;
            let mat = assemble(&bloch, n);
            let values: Vec<f64> = eigh(&mat)?.into_iter().map(|p| p.value).collect();
            let text = match format {
                Format::Json => {
                    let mut s = serde_json::to_string_pretty(&json!({
                        "mu": mu,
                        "N": n,
                        "eigenvalues": values,
                    }))
                    .map_err(|e| CliError::Invalid(e.to_string()))?;
                    s.push('\n');
                    s
                }
                Format::Csv => {
                    let mut s = String::from("index,lambda\n");
                    for (i, v) in values.iter().enumerate() {
                        s.push_str(&format!("{i},{}\n", fmt17(*v)));
                    }
                    s
                }
            };
            emit(output.as_deref(), &text)
        }

        Command::Bands {
            operator,
            n,
            mu_count,
            output,
            format,
        } => {
            let op = load_operator(&operator)?;
            let points = band_sweep(&op.spec, n, mu_count)?;
            let text = match format {
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_bands_csv(&mut buf, &points)
                        .map_err(|e| CliError::Invalid(e.to_string()))?;
                    String::from_utf8(buf).expect("csv output is utf-8")
                }
                Format::Json => {
                    let rows: Vec<_> = points
                        .iter()
                        .map(|p| json!({"mu": p.mu, "eigenvalues": p.eigenvalues}))
                        .collect();
                    let mut s = serde_json::to_string_pretty(&rows)
                        .map_err(|e| CliError::Invalid(e.to_string()))?;
                    s.push('\n');
                    s
                }
            };
            emit(output.as_deref(), &text)
        }

        Command::Converge {
            operator,
            mu,
            n_list,
            reference,
            zeta,
            r,
            output,
            format,
        } => {
            let op = load_operator(&operator)?;
            if n_list.is_empty() {
                return Err(CliError::Invalid("--N-list must be nonempty".into()));
            }
            let (reference, zeta, r) = study_defaults(&op, mu, reference, zeta, r)?;
            let records = convergence_study(&op.spec, mu, &n_list, reference, zeta, r)?;
            let text = match format {
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_converge_csv(&mut buf, &records)
                        .map_err(|e| CliError::Invalid(e.to_string()))?;
                    String::from_utf8(buf).expect("csv output is utf-8")
                }
                Format::Json => {
                    let rows: Vec<_> = records
                        .iter()
                        .map(|rec| {
                            json!({
                                "N": rec.n_trunc,
                                "lambda_N": rec.lambda_n,
                                "error": rec.error,
                                "bound": rec.bound,
                            })
                        })
                        .collect();
                    let mut s = serde_json::to_string_pretty(&rows)
                        .map_err(|e| CliError::Invalid(e.to_string()))?;
                    s.push('\n');
                    s
                }
            };
            emit(output.as_deref(), &text)
        }

        Command::Certify {
            operator,
            mu,
            n,
            zeta,
            r,
            lambda_near,
            output,
        } => {
            let op = load_operator(&operator)?;
            let report = certify_one(&op, mu, n, zeta, r, lambda_near)?;
            let mut text =
                serde_json::to_string_pretty(&report).map_err(|e| CliError::Invalid(e.to_string()))?;
            text.push('\n');
            emit(output.as_deref(), &text)
        }

        Command::Gersh {
            operator,
            mu,
            n,
            output,
            format,
        } => {
            let op = load_operator(&operator)?;
            let bloch = bloch_transform(&op.spec, mu)?;
            let mat = assemble(&bloch, n);
            let defect = hermiticity_defect(&mat);
            if defect > 1e-10 * mat.scale() {
                return Err(CliError::Numerical(format!(
                    "matrix not Hermitian: defect {defect:.3e}"
                )));
            }
            let comps = gershgorin(&mat);
            let text = match format {
                Format::Json => {
                    let mut s = serde_json::to_string_pretty(&comps)
                        .map_err(|e| CliError::Invalid(e.to_string()))?;
                    s.push('\n');
                    s
                }
                Format::Csv => {
                    let mut s = String::from("lo,hi,disk_count\n");
                    for c in &comps {
                        s.push_str(&format!("{},{},{}\n", fmt17(c.lo), fmt17(c.hi), c.disk_count));
                    }
                    s
                }
            };
            emit(output.as_deref(), &text)
        }

        Command::HillDemo { output } => hill_demo(&output),
    }
}

/// Fill in tracking defaults for convergence studies: explicit flags win,
/// the builtin operator supplies closed forms, anything else must be given.
fn study_defaults(
    op: &LoadedOperator,
    mu: f64,
    reference: Option<f64>,
    zeta: Option<f64>,
    r: Option<f64>,
) -> Result<(f64, f64, f64), CliError> {
    match (&op.builtin, reference, zeta, r) {
        (_, Some(reference), Some(zeta), Some(r)) => Ok((reference, zeta, r)),
        (Some((ell, _)), reference, zeta, r) => {
            let reference = reference.unwrap_or_else(|| hill_band_edges(*ell)[0]);
            let zeta = zeta.unwrap_or_else(|| hill_b(*ell, 0) + mu * mu);
            let r = r.unwrap_or_else(|| hill_interval_radius(*ell).max(1e-6));
            Ok((reference, zeta, r))
        }
        _ => Err(CliError::Invalid(
            "file-based operators need explicit --reference, --zeta and --r".into(),
        )),
    }
}

fn certify_one(
    op: &LoadedOperator,
    mu: f64,
    n: usize,
    zeta: Option<f64>,
    r: Option<f64>,
    lambda_near: Option<f64>,
) -> Result<serde_json::Value, CliError> {
    if zeta.is_some() != r.is_some() {
        return Err(CliError::Invalid(
            "--zeta and --r must be given together".into(),
        ));
    }
    let bloch = bloch_transform(&op.spec, mu)?;
    let mat = assemble(&bloch, n);
    let pairs = eigh(&mat)?;
    let eigs: Vec<f64> = pairs.iter().map(|p| p.value).collect();
    let comps = gershgorin(&mat);

    let target = lambda_near
        .or(zeta)
        .or_else(|| op.builtin.map(|(ell, _)| hill_b(ell, 0) + mu * mu))
        .ok_or_else(|| {
            CliError::Invalid(
                "file-based operators need --lambda-near or --zeta to pick an eigenvalue".into(),
            )
        })?;
    let pair = pairs
        .iter()
        .min_by(|a, b| {
            (a.value - target)
                .abs()
                .partial_cmp(&(b.value - target).abs())
                .unwrap()
        })
        .ok_or_else(|| CliError::Numerical("empty spectrum".into()))?;
    let component = comps.iter().find(|c| c.contains(pair.value));
    let component_count = component.map(|c| c.disk_count);

    let params = match (zeta, r) {
        (Some(z), Some(rr)) => Some((z, rr)),
        _ => certify::select_params(pair.value, &eigs, &comps),
    };
    let Some((zeta, r)) = params else {
        return Err(CliError::Numerical(format!(
            "no isolating ball exists around lambda_N = {}",
            pair.value
        )));
    };

    let cert = match &op.builtin {
        Some((ell, stride)) => hill_bound(*ell, *stride, n, &bloch, pair, &eigs, zeta, r),
        None => aposteriori_bound(&bloch, n, pair, &eigs, zeta, r),
    };
    match cert {
        Ok(mut cert) => {
            cert.component_count = component_count;
            Ok(serde_json::to_value(&cert).map_err(|e| CliError::Invalid(e.to_string()))?)
        }
        Err(Error::IsolationFailed(msg)) => Err(CliError::Numerical(format!(
            "isolation condition failed for lambda_N = {}: {msg}",
            pair.value
        ))),
        Err(other) => Err(other.into()),
    }
}

fn hill_demo(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Invalid(e.to_string()))?;
    let stride = 2u32;

    // band edges over 101 equispaced moduli in [0, 0.99]
    let grid: Vec<Modulus> = (0..101)
        .map(|i| Modulus::new(i as f64 * 0.99 / 100.0).expect("grid inside [0,1)"))
        .collect();
    let edges = band_edges_vs_ell(&grid, 40, stride)?;
    let mut buf = Vec::new();
    write_edges_csv(&mut buf, &edges).map_err(|e| CliError::Invalid(e.to_string()))?;
    std::fs::write(dir.join("edges.csv"), &buf).map_err(|e| CliError::Invalid(e.to_string()))?;

    // convergence with bounds for a family of moduli
    let mut converge = String::from("ell,N,lambda_N,error,bound\n");
    for &l in &[0.1, 0.3, 0.5, 0.7, 0.9] {
        let ell = Modulus::new(l).expect("fixed grid");
        let spec = hill_operator(ell, stride)?;
        let reference = hill_band_edges(ell)[0];
        let zeta = hill_b(ell, 0);
        let r = hill_interval_radius(ell);
        let n_list: Vec<usize> = (1..=8).map(|i| 5 * i).collect();
        let records = convergence_study(&spec, 0.0, &n_list, reference, zeta, r)?;
        for rec in &records {
            let opt = |v: Option<f64>| v.map(fmt17).unwrap_or_default();
            converge.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt17(l),
                rec.n_trunc,
                opt(rec.lambda_n),
                opt(rec.error),
                opt(rec.bound)
            ));
        }
    }
    std::fs::write(dir.join("converge.csv"), converge)
        .map_err(|e| CliError::Invalid(e.to_string()))?;

    // band structure at l = 0.1
    let ell = Modulus::new(0.1).expect("fixed modulus");
    let spec = hill_operator(ell, stride)?;
    let points = band_sweep(&spec, 40, 64)?;
    let mut buf = Vec::new();
    write_bands_csv(&mut buf, &points).map_err(|e| CliError::Invalid(e.to_string()))?;
    std::fs::write(dir.join("bands.csv"), &buf).map_err(|e| CliError::Invalid(e.to_string()))?;

    // Gershgorin reports across truncation sizes
    let bloch = bloch_transform(&spec, 0.0)?;
    let mut gersh_rows = Vec::new();
    for i in 1..=8usize {
        let n = 5 * i;
        let mat = assemble(&bloch, n);
        let comps = gershgorin(&mat);
        gersh_rows.push(json!({"N": n, "components": comps}));
    }
    let mut text = serde_json::to_string_pretty(&gersh_rows)
        .map_err(|e| CliError::Invalid(e.to_string()))?;
    text.push('\n');
    std::fs::write(dir.join("gershgorin.json"), text)
        .map_err(|e| CliError::Invalid(e.to_string()))?;

    // certificates for the lowest band edge at l = 0.1
    let zeta = hill_b(ell, 0);
    let r = hill_interval_radius(ell);
    let mut certs = Vec::new();
    for i in 2..=8usize {
        let n = 5 * i;
        let mat = assemble(&bloch, n);
        let pairs = eigh(&mat)?;
        let eigs: Vec<f64> = pairs.iter().map(|p| p.value).collect();
        let pair = pairs
            .iter()
            .min_by(|a, b| {
                (a.value - zeta)
                    .abs()
                    .partial_cmp(&(b.value - zeta).abs())
                    .unwrap()
            })
            .expect("nonempty spectrum");
        let mut cert = hill_bound(ell, stride, n, &bloch, pair, &eigs, zeta, r)?;
        cert.component_count = gershgorin(&mat)
            .iter()
            .find(|c| c.contains(pair.value))
            .map(|c| c.disk_count);
        certs.push(json!({"N": n, "certificate": cert}));
    }
    let mut text =
        serde_json::to_string_pretty(&certs).map_err(|e| CliError::Invalid(e.to_string()))?;
    text.push('\n');
    std::fs::write(dir.join("certificates.json"), text)
        .map_err(|e| CliError::Invalid(e.to_string()))?;

    println!(
        "wrote edges.csv, converge.csv, bands.csv, gershgorin.json, certificates.json to {}",
        dir.display()
    );
    Ok(())
}
