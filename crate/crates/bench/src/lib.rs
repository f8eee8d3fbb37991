//! Fixtures shared by the benchmarks.

use linpres::equations::secant_degree_component;
use linpres::{LinearSubspace, TensorFormat};

pub fn multilinear(dims: &[usize]) -> TensorFormat {
    TensorFormat::multilinear(dims.to_vec()).expect("valid format")
}

/// Degree r+1 minors of σ_r.
pub fn secant_ideal(dims: &[usize], r: usize) -> (TensorFormat, LinearSubspace) {
    let f = multilinear(dims);
    let comp = secant_degree_component(&f, r).expect("multilinear format");
    (f, comp)
}
