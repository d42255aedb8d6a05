//! Benchmark-only crate; see `benches/kernels.rs`.
//!
//! Shared helpers for setting up the worked operator at a given modulus.

use hillcert::*;

/// Assembled truncation of the elliptic-potential operator, ready to solve.
pub fn assembled_hill(l: f64, stride: u32, mu: f64, n_trunc: usize) -> (BlochOperator, HermitianMatrix) {
    let ell = Modulus::new(l).expect("benchmark modulus inside [0,1)");
    let spec = hill_operator(ell, stride).expect("valid operator");
    let bloch = bloch_transform(&spec, mu).expect("mu inside the Brillouin interval");
    let mat = assemble(&bloch, n_trunc);
    (bloch, mat)
}
