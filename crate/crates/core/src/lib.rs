//! Channel-aware caching-aided coded multicast over binary broadcast channels.
// Negated comparisons reject NaN on purpose; index loops walk parallel arrays.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analytics;
pub mod bitset;
pub mod cache;
pub mod codec;
pub mod coloring;
pub mod config;
pub mod delivery;
pub mod error;
pub mod exact;
pub mod experiment;
pub mod graph;
pub mod model;
pub mod par;
pub mod rng;
pub mod schedule;
pub mod worked;

pub use error::{Error, Result};
