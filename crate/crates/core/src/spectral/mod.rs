//! Moment coefficients of the potential, the shape's geometry coefficients,
//! the operators linking them, and singularity-radius estimation.

pub mod geometry;
pub mod moments;
pub mod operators;
pub mod radius;

pub use geometry::{
    geometry_coeffs, geometry_coeffs_bruteforce, geometry_coeffs_bruteforce_with, gn_apply, CReading,
    GeometryCoeffs,
};
pub use moments::{
    moment_scales, moments_closed_form, moments_contour, moments_contour_on, moments_from_geometry,
    ClosedFormProvider, ContourProvider, MomentProvider, MomentTable, TransportProvider,
};
pub use operators::{pascal_exp_sd, reexpand, theta_inverse, theta_matrix};
pub use radius::{
    localize_chebyshev, localize_chebyshev_with, singularity_radius, singularity_radius_with,
    RadiusEstimator, SearchBox,
};

use crate::Complex64;

/// `Θ_N(r − ν, α)⁻¹ Λ_N(ν)`, i.e. `−𝒜_n w̄₀ + ℬ_n w₀ + iω𝒞_n` for `n = 1..N`
/// when the position `(r, α)` is right.
pub fn invert_moments(table: &MomentTable, r: Complex64, alpha: f64) -> Vec<Complex64> {
    operators::invert_moments_raw(&table.lambdas, table.nu, r, alpha)
}
