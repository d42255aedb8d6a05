//! Spectra of self-adjoint ordinary differential operators with periodic
//! coefficients, computed by Fourier truncation of the Floquet-Bloch
//! family, with mathematically certified a posteriori error bounds
//! attached to isolated eigenvalues.
//!
//! The pipeline: represent each coefficient function as a Fourier series
//! with a tail majorant ([`fourier`]), conjugate the operator by
//! exp(i mu x) and assemble the truncated Hermitian matrix on modes
//! -N..N ([`operator`]), solve it ([`eig`]), localize eigenvalues with
//! Gershgorin components and certify isolated ones ([`certify`]), and
//! drive parameter sweeps and convergence studies ([`sweep`]). The
//! worked example throughout is the second-order operator with potential
//! `6 l^2 sn^2(x, l) - 4 - l^2`, whose band edges are known in closed
//! form ([`specfun`], [`sweep::hill_band_edges`]).

pub mod certify;
pub mod eig;
pub mod error;
pub mod fourier;
pub mod operator;
pub mod specfun;
pub mod sweep;

pub use certify::{
    aposteriori_bound, check_isolation, gershgorin, hill_bound, hill_interval_radius,
    CertifiedEigenvalue, GershgorinComponent,
};
pub use eig::{eigh, spectral_norm, EigenPair, RectMatrix};
pub use error::{Error, Result};
pub use fourier::{CertLevel, PeriodicCoefficient, Tail};
pub use operator::{
    assemble, assemble_block, bloch_transform, hermiticity_defect, hill_operator, BlochOperator,
    HermitianMatrix, OperatorSpec,
};
pub use specfun::{elliptic_e, elliptic_k, hill_b, jacobi_sn, nome, Modulus};
pub use sweep::{
    band_edges_vs_ell, band_sweep, cluster_rate_probe, convergence_study, fit_exponential_rate,
    hill_band_edges, BandPoint, ConvergenceRecord, EdgeRecord, RateFit,
};
