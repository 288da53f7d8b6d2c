//! Inverse-spectral integration of the periodic Volterra (Langmuir) chain
//!
//! ```text
//! u'_n = u_n (u_{n+1} - u_{n-1}),    u_{n+N} = u_n,    u_n > 0
//! ```
//!
//! The chain is mapped to the zero-diagonal discrete Hill equation
//! `a_{n-1} y_{n-1} + a_n y_{n+1} = λ y_n` with `a_n = ½√u_n`. Its
//! periodic/antiperiodic spectrum is time invariant, while the shifted
//! Dirichlet spectra `μ_{j,k}` move through the spectral gaps under a
//! Dubrovin-type flow. Integrating that flow and applying the trace
//! formulas rebuilds `u(t)`; every step is cross-checked against direct
//! Runge-Kutta integration of the lattice.
//!
//! Modules:
//!
//! - [`symm_poly`]: complete homogeneous symmetric polynomials and the
//!   generalized Lagrange power sums, exact and floating.
//! - [`lattice`]: chain state, equations of motion, reference RK4 integrator.
//! - [`hill`]: fundamental solutions, discriminant, periodic and Dirichlet
//!   spectra, branch signs and the closed-form spectral identities.
//! - [`flow`]: angle-form Dubrovin flow of all shifted Dirichlet spectra.
//! - [`reconstruct`]: trace formulas recovering `a_k²` from spectral data.
//! - [`verify`]: end-to-end cross-validation harness and JSON report types.

pub mod error;
pub mod flow;
pub mod hill;
pub mod lattice;
pub mod ode;
pub mod reconstruct;
pub mod symm_poly;
pub mod verify;

pub use error::{Error, Result};
pub use flow::{SpectralFlowState, SpectralTrajectory};
pub use hill::{AuxSpectrum, FundamentalPair, Gap, HillCoefficients, HillSpectrum};
pub use lattice::{ChainState, ChainTrajectory};
pub use reconstruct::ReconstructionReport;
pub use verify::{CheckResult, VerifyConfig, VerifyReport};
