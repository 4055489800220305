// SPDX-License-Identifier: Apache-2.0

//! Finite groups of Lie type at desk scale: exact arithmetic, random Cayley graphs, and the
//! diagnostics around their expansion.
//!
//! - [`field`], [`group`], [`bruhat`]: finite fields, matrix groups, Bruhat cells.
//! - [`words`], [`walk`], [`spectral`]: free-group words, convolution walks, spectral norms.
//! - [`nonconc`], [`combinat`], [`sz`]: trap tests, product-set statistics, zero counts.
//! - [`pingpong`]: exact affine ping-pong in the rational plane.

pub mod bruhat;
pub mod combinat;
pub mod field;
pub mod group;
pub mod nonconc;
pub mod pingpong;
pub mod scalar;
pub mod seeding;
pub mod spectral;
pub mod sz;
pub mod walk;
pub mod words;

pub use field::{FieldCtx, FieldElem};
pub use group::{Family, GroupCtx, GroupElem};
pub use scalar::Weight;
pub use walk::Measure;
pub use words::{Letter, Word};

/// Crate version, embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
