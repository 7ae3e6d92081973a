//! Sparse fault-tolerant routing networks built from balanced replacement
//! products, plus a round-synchronous simulator that measures how many node
//! pairs still communicate when an adversary controls some of the edges.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, configuration and
//! the experiment runner live in the companion `relaynet-lab` crate.
#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

pub mod adversary;
pub mod composition;
pub mod engine;
pub mod error;
pub mod graph;
pub mod msg;
pub mod protocols;
pub mod rng;

pub use error::Error;
pub use msg::{majority, Msg, Sym};
