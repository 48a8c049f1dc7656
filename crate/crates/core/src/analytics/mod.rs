//! Closed-form objects: killing rate, jump kernel, corrective-jump law, the boundary class of test
//! functions, the three generators and the two-dimensional SDE coefficients.

pub mod classd;
pub mod corrective;
pub mod generator;
pub mod kernel;
pub mod sde;

pub use classd::{class_d_residual, make_class_d, SmoothG, TestFunction};
pub use corrective::{corrective_jump_cdf, corrective_jump_density, corrective_jump_sampler, corrective_raw_density};
pub use generator::{
    bm_map_coefficients, generator_bm_map, generator_orthant_levy, generator_skorokhod_map, tangent_min_eigenvalue,
    CoordinateLevy, Variant,
};
pub use kernel::{exit_mass_quadrature, jump_kernel_density, jump_vector_v, killing_rate};
pub use sde::{effective_sigma, reference_sigma, sde_coefficients, SdeCoefficients};
