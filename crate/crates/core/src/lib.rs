//! Numerical test bench for matrix concentration inequalities driven by
//! Markov semigroups.
//!
//! The crate is organized around four layers:
//!
//! * [`hermitian`]: dense complex Hermitian linear algebra, with a cyclic Jacobi
//!   eigensolver, standard matrix functions, semidefinite-order tests, trace
//!   functionals, and the self-adjoint dilation.
//! * [`finite`]: an exact, enumeration-based implementation of the
//!   coordinate-resampling Markov semigroup on finite product spaces:
//!   semigroup action, generator, carré du champ operators, Dirichlet form,
//!   variances, trace moments and the trace mgf, all free of sampling error.
//! * [`models`]: samplers and closed-form carré du champ evaluators for the
//!   continuous models: log-concave diffusions (Ornstein–Uhlenbeck as the
//!   exact special case), the unit sphere, and the special orthogonal group.
//! * [`bounds`] + [`verify`]: pure calculators for every concentration bound
//!   and trace inequality, and the checking harness that compares them
//!   against exact enumeration or Monte Carlo estimates.
//!
//! [`config`] and [`runner`] turn declarative JSON experiment descriptions
//! into verification campaigns; the `carre` binary is a thin front end over
//! them.

pub mod bounds;
pub mod config;
pub mod finite;
pub mod hermitian;
pub mod models;
pub mod runner;
pub mod verify;

pub use hermitian::{CMatrix, Complex64, EigenDecomposition, HermitianMatrix, MatrixError};
