//! Simulator for two coded-placement schemes in a two-layer hierarchical
//! caching network: a server with `N` files feeds `K1` mirrors, each serving
//! `K2` users.
//!
//! Payloads are exact prime-field symbols and every cache item and
//! transmission carries its symbolic label, so the same run yields both
//! bit-exact decoding checks and exact memory/rate accounting.

pub mod cache;
pub mod coded;
pub mod delivery;
pub mod error;
pub mod gf;
pub mod harness;
pub mod model;
pub mod oracle;
pub mod rates;
pub mod scheme1;
pub mod scheme2;

pub use error::SimError;
pub use model::{Demand, DemandVector, FileLibrary, SystemConfig};
pub use rates::{Rational, SchemeId};
