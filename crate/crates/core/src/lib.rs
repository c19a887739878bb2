//! Numerical toolkit for studying how transport noise enhances dissipation.
//!
//! The objects of study are passive scalars on the torus advected by a
//! family of divergence-free fields modulated by independent white noises,
//! with a small diffusivity ν. Whether the noise speeds up the decay of
//! the scalar is governed by spectral quantities that this crate computes:
//!
//! * kernels of double-commutator superoperators built from the advection
//!   generators (a kernel element witnesses a joint invariant structure,
//!   which blocks enhancement),
//! * smallest eigenvalues of associated Schrödinger operators
//!   `−Δ + λ² V` whose growth in the coupling λ controls the decay rate,
//! * second-moment evolutions and direct Monte Carlo ensembles of the
//!   stochastic flow, which realize those rates dynamically,
//! * variational test functions concentrated at degenerate critical
//!   points of the shear profiles, which bound the rates from the other
//!   side.
//!
//! Module map:
//!
//! * [`profiles`]: trigonometric shear profiles, their critical points,
//!   and the overlap order of a family.
//! * [`numerics`]: periodic grids, complex fields, FFT-based operators.
//! * [`linalg`]: dense Hermitian solvers, Sturm bisection, the Dirichlet
//!   sine basis, and a preconditioned block eigensolver.
//! * [`schrodinger`]: potentials assembled from profile families, smallest
//!   eigenvalues, coupling-scaling studies, and Dirichlet model problems.
//! * [`twopoint`]: generator families, superoperator kernels, invariant
//!   subspace extraction, and the enhancement diagnostic.
//! * [`moments`]: deterministic evolution of the second moment of a
//!   stochastically sheared scalar, and decay-rate fitting.
//! * [`mcsim`]: path-level Monte Carlo simulation of the stochastic shear
//!   flow with reproducible counter-based noise streams.
//! * [`quasimode`]: anharmonic ground states and cutoff quasimodes whose
//!   Rayleigh quotients upper-bound the spectral rates.
//! * [`config`] and [`runner`]: JSON-driven experiment execution used by
//!   the `dissipation-lab` binary.
//! * [`report`]: artifact writers (CSV, JSON, binary fields, manifests).

pub mod error;
pub mod linalg;
pub mod numerics;
pub mod profiles;
pub mod quasimode;
pub mod schrodinger;

pub use error::{Error, Result};

/// Version string stamped into manifests.
pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");
