//! Root closure of mixed-characteristic tower rings, Fontaine rings as
//! Frobenius-compatible sequences, and truncated Witt vectors.
//!
//! The crate is organized bottom-up:
//!
//! * [`valuation`]: p-adic valuations and exact binomials;
//! * [`tower`]: normal-form arithmetic in the level-n tower rings;
//! * [`closure`]: localized elements and root-closure certificates;
//! * [`fontaine`]: truncated Fontaine-ring elements and division by `P`;
//! * [`witt`]: universal Witt polynomials, `u`, and division by `P - p`;
//! * [`expr`], [`report`]: the expression language and the verification suites;
//! * [`sample`]: seeded generators shared by the suites, tests and benches.
//!
//! Batch work runs through [`par`], which uses rayon when the `parallel`
//! feature is enabled and falls back to plain iteration otherwise.

pub mod closure;
pub mod expr;
pub mod fontaine;
pub mod par;
pub mod report;
pub mod sample;
pub mod tower;
pub mod valuation;
pub mod witt;

pub use closure::{ClosureCert, LocalElem, Membership};
pub use fontaine::{ComponentMode, Decision, FontaineElem, PadicValue};
pub use witt::{WittCtx, WittVec};
pub use tower::{Monomial, ResidueElem, RingMode, TowerCtx, TowerElem};
pub use valuation::{Prime, Valuation};

