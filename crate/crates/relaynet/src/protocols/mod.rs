//! Tolerant protocol families used as building blocks: flooding permutation
//! routing, all-pairs relaying, randomized relay sets, and doomed-set
//! measurement.

mod allpairs;
mod doomed;
mod flood;

pub use allpairs::{all_pairs_from_perm, amplified_all_pairs, round_robin, sample_relays, AllPairsSet, Embedded, Relays};
pub use doomed::{doomed_set_estimate, min_doomed_cover, DoomedEstimate, Threshold};
pub use flood::{flood_majority_perm, flood_star_out, valued_majority, Flood, FloodSet, ToleranceParams};

/// Default message length in bits.
pub const DEFAULT_LEN: u32 = 32;

/// Test message used when a success question does not depend on the
/// message: distinct from the forging constants and their bit flips at
/// every length the crate uses.
pub fn probe(len: u32) -> crate::Msg {
    let mask = if len >= 63 { u64::MAX >> 1 } else { (1u64 << len) - 1 };
    crate::Msg::val(0x2545_F491_4F6C_DD1D & mask)
}
