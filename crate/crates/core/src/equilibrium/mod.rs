//! Equilibrium measures, Robin constants, capacity and Green functions.
//!
//! Real interval unions use the gap-polynomial representation of the
//! equilibrium density, `|Q(x)| / (π √|R(x)|)`. Families of planar curves use a
//! first-kind single-layer boundary integral equation.

mod curve;
mod real;

use num_complex::Complex64;

pub use curve::{solve_symm, BoundaryDensity};
pub use real::{solve_real_equilibrium, EquilibriumReal, DEFAULT_QUAD_ORDER};

/// Common view of an equilibrium solution.
pub trait Equilibrium {
    /// Robin constant `γ = −log cap(K)`.
    fn robin(&self) -> f64;

    /// Green function of the unbounded complement with pole at infinity.
    fn green(&self, z: Complex64) -> f64;

    /// Euclidean distance from `z` to the set.
    fn distance(&self, z: Complex64) -> f64;

    /// Diameter of the set.
    fn diameter(&self) -> f64;

    /// Logarithmic capacity, `exp(−robin)`.
    fn capacity(&self) -> f64 {
        (-self.robin()).exp()
    }
}

/// Logarithmic capacity of a solved set.
pub fn capacity<E: Equilibrium + ?Sized>(eq: &E) -> f64 {
    eq.capacity()
}
