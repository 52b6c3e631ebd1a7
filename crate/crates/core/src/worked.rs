//! The three-receiver, three-file worked example: files a, b, c with four
//! descriptions each, requests (b, a, c), rates (1/2, 1/4, 1/4), a slot of 8
//! channel uses and an expected normalized length of 2.

use crate::cache::CacheRealization;
use crate::model::{ChannelKind, ChannelModel, ReceiverChannel, RequestVector, SystemConfig};

pub const A: usize = 0;
pub const B: usize = 1;
pub const C: usize = 2;

pub const RATES: [f64; 3] = [0.5, 0.25, 0.25];
pub const EXPECTED_PSI: f64 = 2.0;

pub fn cache() -> CacheRealization {
    let mut p = vec![vec![Vec::new(); 3]; 3];
    p[0][A] = vec![0, 1];
    p[0][C] = vec![0];
    p[1][B] = vec![0, 1];
    p[1][C] = vec![0];
    p[2][A] = vec![0];
    p[2][B] = vec![0, 2];
    CacheRealization::from_packets(4, p).expect("example caches are valid")
}

pub fn requests() -> RequestVector {
    RequestVector(vec![B, A, C])
}

/// `gamma = 2` with `F = 4` gives the 8-use slot.
pub fn system(seed: u64) -> SystemConfig {
    SystemConfig { files: 3, descriptions: 4, description_bits: 1, gamma: 2.0, receivers: 3, seed }
}

/// Noiseless channels served at the example rates.
pub fn channels() -> Vec<ReceiverChannel> {
    RATES
        .iter()
        .enumerate()
        .map(|(u, &eta)| ReceiverChannel {
            receiver: u,
            model: ChannelModel { kind: ChannelKind::Bsc, epsilon: 0.0 },
            eta,
        })
        .collect()
}
