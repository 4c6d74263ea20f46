//! Spectral solvers for the cohomological equation of isotropic abelian
//! actions: the Fourier model on tori (small divisors) and the Hermite model
//! of the Schrödinger representation.

mod forms;
mod hermite;
mod torus;

pub use forms::{
    d_minus_one, differential, homotopy_k, project_m, tame_ratio, PForm, TameRatioConfig,
    TameRatioStats,
};
pub use hermite::{
    apply_ddx, apply_x, dilation_matrix, extend_e, flowed_current_norm, gaussian_coefficient,
    hermite_integrals, integrate_i, metaplectic_u, primitive_p, sobolev_norm, HermiteField,
    HermiteTruncation, InvariantCurrent, MAX_CUTOFF,
};
pub use torus::{
    torus_d, torus_diophantine, torus_solve, TorusForm, TorusFrame, TorusSolution,
    DIVISOR_FLOOR,
};

/// Test-support helpers exposed for oracles and probes.
pub mod test_support {
    pub use super::forms::random_form;
}
