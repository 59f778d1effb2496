//! Pseudospectral simulator and verification harness for generalized
//! Schrodinger equations `i d/dt phi = (p^{2 theta}/(2m) + V(t)) phi` with
//! time-dependent potentials on a periodic torus.
//!
//! The crate has three layers:
//!
//! * spectral machinery ([`spectral`]), the potential catalog ([`potential`])
//!   and the unitary split-step propagator ([`propagate`]);
//! * numerical certification of the structural assumptions (Hardy constant,
//!   integrability of `||dV/dt||_inf`, positivity) in [`assumptions`], and
//!   derivation plus verification of the two-sided kinetic/energy stability
//!   bounds in [`bounds`];
//! * scenario orchestration, configuration, sweeps and report emission in
//!   [`scenario`].

pub mod assumptions;
pub mod bounds;
pub mod error;
pub mod potential;
pub mod propagate;
pub mod quadrature;
pub mod scenario;
pub mod spectral;

pub use error::{Error, Result};
