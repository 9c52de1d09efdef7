//! Spectral invariants of compact nilmanifolds.
//!
//! A nilmanifold here is a quotient `M = Gamma \ G` of a graded nilpotent Lie
//! group (abelian, Heisenberg, or direct products of these, in exponential
//! coordinates) by a cocompact lattice. The crate computes, with explicit
//! error certificates:
//!
//! * exact group arithmetic, dilations, homogeneous quasi-norms, lattice ball
//!   enumeration and tail bounds, fundamental-domain quadrature grids
//!   ([`group`], [`lattice`]);
//! * eigenvalue streams with multiplicities for the torus Laplacian and the
//!   Heisenberg sub-Laplacian, spectral transforms `c R^l`, and product
//!   spectra ([`spectrum`]);
//! * periodisation of Schwartz kernels over the lattice and the short-dilation
//!   asymptotics of their diagonals, traces, and Hilbert-Schmidt norms
//!   ([`kernels`]);
//! * Plancherel-type constants `c0` and heat-kernel values `p_1(0)` by
//!   independent routes, including the two Heisenberg prefactor conventions
//!   ([`constants`]);
//! * heat traces with certified truncation, Weyl-law fits, and the analytic
//!   continuation of spectral zeta functions through a Mellin split, with
//!   cross-checks against closed torus formulas ([`theta`], [`zeta`]).
//!
//! The `examples/` directory is the front door: one runnable example per
//! capability (`cargo run -p nilspec --example <name>`). The thin `nilspec`
//! binary drives the same computations in batch mode and writes CSV/JSON
//! artifacts; see the crate README.

pub mod config;
pub mod constants;
pub mod error;
pub mod group;
pub mod kernels;
pub mod lattice;
pub mod quad;
pub mod report;
pub mod run;
pub mod special;
pub mod spectrum;
pub mod sum;
pub mod theta;
pub mod zeta;

pub use error::{Error, Result};
pub use num_complex::Complex64;
