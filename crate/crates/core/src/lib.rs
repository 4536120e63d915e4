//! Numerical toolkit for the free-boundary reaction-diffusion problem
//!
//! ```text
//! u_t = u_xx + f(u),            g(t) < x < h(t)
//! u(t, g) = u(t, h) = 0
//! g'(t) = -mu u_x(t, g),  h'(t) = -mu u_x(t, h)
//! ```
//!
//! The crate covers the reaction terms ([`nonlinearity`]), the phase-plane
//! quantities behind spreading and vanishing criteria ([`phase_plane`],
//! [`semiwave`]), a front-fixing time stepper ([`solver`]), long-time
//! classification and threshold search ([`classifier`]) and job
//! configuration/export ([`jobs`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classifier;
pub mod error;
pub mod jobs;
pub mod nonlinearity;
pub mod numerics;
pub mod ode;
pub mod par;
pub mod phase_plane;
pub mod semiwave;
pub mod solver;

pub use error::{Error, Result};
pub use nonlinearity::{Kind, Nonlinearity, NonlinearitySpec};
