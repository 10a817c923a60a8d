//! Core dynamics of a clamped-clamped beam carrying a loose frictional slider.
//!
//! The crate is organized around four building blocks:
//!
//! - [`rom`] — beam eigenvalues and mode shapes, the single-mode reduced-order
//!   model with rigidly attached slider inertia, and its multi-mode
//!   generalization with axial-stretch (von Kármán) coupling.
//! - [`ssim`] — the slow-flow amplitude map: single-term harmonic balance of
//!   the reduced model, solved as a cubic in squared amplitude over the slider
//!   position, with stability labels, backbone curve, phase lag, and the
//!   modulation threshold for the impact-absorber analogy.
//! - [`contact`] — non-smooth time-domain simulation of the beam and a free
//!   rigid slider coupled through four unilateral frictional contact points
//!   (Moreau midpoint stepping with an impulse-level Gauss-Seidel solver).
//! - [`locomotion`] — closed-form locomotion machinery: pitch limit and
//!   pitching transport, the sliding-pendulum equations of motion, slope- and
//!   rocking-induced slip estimates, and stick/slip verdicts.
//!
//! All computations are pure functions of their inputs; nothing here performs
//! IO. The crate is `no_std`-compatible (`alloc` required); disable the
//! default `std` feature for embedded use.

#![cfg_attr(not(feature = "std"), no_std)]
// Numerics idioms kept for clarity:
// - neg_cmp_op_on_partial_ord: `!(x > 0.0)` deliberately treats NaN as invalid
// - needless_range_loop: indexed loops couple several arrays per step
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod contact;
pub mod error;
pub mod locomotion;
pub mod quadrature;
pub mod rom;
pub mod ssim;

#[cfg(test)]
pub(crate) mod testutil;

pub use contact::{
    ContactFrame, ContactModel, ContactState, Excitation, SimMode, StepSettings, SystemState,
    Trajectory, TrajectorySample,
};
pub use error::{Error, Result};
pub use rom::{
    BeamParameters, ModalBasis, ModeShape, ModeShapeEval, MultiModeRom, RomCoefficients,
    SliderParameters,
};
pub use ssim::{ExcitationParameters, SsimBranch, SsimPoint, SsimSweep, Stability};
