//! Fourier multipliers, the linearised operators `L±` and their inverses.

mod krylov;
mod linearized;
mod logkernel;
mod multiplier;

pub use krylov::{gmres, minres, KrylovOptions, KrylovStats};
pub use linearized::{
    apply_l, coercivity, invert_l_on_subspace, invert_l_with, quadratic_form, solve_r, solve_rho, Inversion,
    LinearizedKind, LinearizedOp,
};
pub use logkernel::{
    logkernel_integrals, logkernel_sc_oracle, nodes_in_disc, resolve_prefactor, KernelPrefactor,
    LogKernelQuadrature, PrefactorReport,
};
pub(crate) use logkernel::sample_node;
pub use multiplier::{
    apply_multiplier, derivative_symbol_fd_error, lipschitz_in_c_check, multiplier_norm_certificate, zero_mode_value,
    LipschitzReport, MultiplierKind, MultiplierSpec, FD_STEP,
};
