//! Spillover analysis of multi-location price panels.
//!
//! The crate estimates vector autoregressions on year-indexed price panels,
//! decomposes H-step forecast-error variance into per-market shares, and
//! aggregates those shares into directed spillover indices, statically and
//! over rolling windows. Around that sit the supporting tools the analysis
//! needs end to end: panel cleaning (winsorization, differencing), unit-root
//! testing, conflict-fatality allocation, OLS with HAC errors, quantile
//! regression, and superposed epoch analysis.
//!
//! The crate is `no_std`-compatible (requires `alloc`); all float math goes
//! through `libm` so results are bit-identical across targets. Everything
//! here is pure computation over immutable inputs: no IO, no global state,
//! and every randomized routine takes an explicit seed.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod adf;
pub mod conflict;
pub mod error;
pub mod fevd;
pub mod graph;
pub mod linalg;
pub mod num;
pub mod panel;
pub mod quantile;
pub mod regress;
pub mod rng;
pub mod scatter;
pub mod sea;
pub mod spillover;
pub mod var;

pub use error::{Error, Warning};
pub use linalg::Mat;
pub use panel::{PricePanel, Transform};
