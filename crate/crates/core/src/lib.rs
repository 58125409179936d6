//! Finite-element machinery for nonlinear conduction through a material
//! interface.
//!
//! The problem solved here is a scalar potential equation on a domain split
//! into two regions by an inner interface. The flux law is nonlinear and
//! differs per region (exponential-type in one, linear in the other), and the
//! potential may jump across the interface, where an exponential transfer law
//! of Butler-Volmer type relates the jump to the normal flux. Both laws are
//! gradients of convex potentials, so the discrete solution is the minimizer
//! of a convex energy over a broken piecewise-linear space.
//!
//! Module map:
//!
//! * [`nfunction`] — scalar convex N-functions: conjugation, Young gap,
//!   doubling-condition probes, Luxemburg norms.
//! * [`constitutive`] — the concrete flux/transfer laws, their inverses and
//!   potentials, and coercivity checks.
//! * [`mesh`] — interface-aware triangulations with region tags, boundary
//!   markers and oriented interface edges.
//! * [`space`] — the broken P1 space with doubled interface unknowns,
//!   jumps, and Dirichlet lifting.
//! * [`assembly`] — discrete energy, residual and Hessian.
//! * [`solver`] — damped Newton minimization, plus a semi-analytic slab
//!   reference solution.
//! * [`dualcheck`] — post-solve verification of the structural identities
//!   (Fenchel equality, conservation, interface condition, dual pairing).
//!
//! The crate is `no_std`-compatible (`alloc` required, transcendentals via
//! the `libm` feature); all file and process I/O lives in the companion
//! `oim` crate.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod assembly;
pub mod constitutive;
pub mod dualcheck;
pub mod linalg;
pub mod mesh;
pub mod nfunction;
pub mod solver;
pub mod space;
mod vec2;

pub use vec2::Vec2;
