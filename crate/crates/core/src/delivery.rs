//! End-to-end delivery of one slot: schedule, color, encode, send through the
//! receivers' channels and decode.
//!
//! Blocks have length `n = floor(slot / psi)`. Description counts are then
//! derived from `n` as `floor(n * eta_u / B)`, so every receiver's share of a
//! block fits its codebook payload `floor(n * eta_u)`.

use crate::cache::{rap_place, CacheRealization, CachingDistribution};
use crate::codec::{decode, encode, make_codebooks, transmit, DecodeMode, Library, MulticastCodeword, ReceiverOutcome};
use crate::coloring::{ca_hgc, Coloring, Growth};
use crate::error::{Error, Result};
use crate::graph::{ConflictGraph, PacketId};
use crate::model::{sample_requests, ChannelModel, DemandModel, ReceiverChannel, RequestVector, SystemConfig};
use crate::rng::{Component, Streams};
use crate::schedule::{schedule, Schedule, ScheduleMode};

/// Block length for a slot and a normalized length.
pub fn block_length(slot: u64, psi: f64) -> Result<usize> {
    if !(psi.is_finite() && psi > 0.0) {
        return Err(Error::domain(format!("normalized length must be positive, got {psi}")));
    }
    let n = (slot as f64 / psi + 1e-9).floor() as usize;
    if n == 0 {
        return Err(Error::domain(format!("slot {slot} is shorter than normalized length {psi}")));
    }
    Ok(n)
}

/// Every intermediate product of one delivered slot.
#[derive(Debug, Clone)]
pub struct DeliveryTrace {
    pub n: usize,
    pub schedule: Schedule,
    pub graph: ConflictGraph,
    pub coloring: Coloring,
    pub codeword: MulticastCodeword,
    pub outcomes: Vec<ReceiverOutcome>,
}

impl DeliveryTrace {
    /// Descriptions each receiver recovered.
    pub fn delivered(&self) -> Vec<usize> {
        self.outcomes.iter().map(|o| o.recovered.len()).collect()
    }

    pub fn all_succeeded(&self) -> bool {
        self.outcomes.iter().all(|o| o.success)
    }
}

#[allow(clippy::too_many_arguments)]
/// Deliver one slot for given caches and requests.
pub fn deliver(
    system: &SystemConfig,
    channels: &[ReceiverChannel],
    cache: &CacheRealization,
    requests: &RequestVector,
    psi: f64,
    growth: Growth,
    mode: DecodeMode,
    trial: u64,
) -> Result<DeliveryTrace> {
    let n = block_length(system.slot(), psi)?;
    let eta: Vec<f64> = channels.iter().map(|c| c.eta).collect();
    let bits = system.description_bits;
    let s = schedule(cache, requests, &eta, 1.0, n as u64, bits as u64, ScheduleMode::Expectation)?;
    let graph = ConflictGraph::build(cache, &s.scheduled)?;
    let coloring = ca_hgc(&graph, &s.d, growth);
    let books = make_codebooks(&eta, n)?;
    let library = Library::new(system.seed, bits);
    let codeword = encode(&graph, &coloring, &books, &library)?;
    let streams = Streams::new(system.seed);
    let models: Vec<ChannelModel> = channels.iter().map(|c| c.model).collect();
    let received = transmit(&codeword, &models, &streams, trial);
    let wanted: Vec<Vec<PacketId>> = s
        .scheduled
        .packets
        .iter()
        .enumerate()
        .map(|(u, pk)| pk.iter().map(|&packet| PacketId { file: requests.file(u) as u32, packet }).collect())
        .collect();
    let outcomes = decode(&codeword, &received, cache, &books, &models, &library, &wanted, mode)?;
    Ok(DeliveryTrace { n, schedule: s, graph, coloring, codeword, outcomes })
}

/// Random caches and demands for repeated delivery trials.
#[derive(Debug, Clone)]
pub struct DeliverySetup {
    pub system: SystemConfig,
    pub channels: Vec<ReceiverChannel>,
    pub demand: DemandModel,
    pub dist: CachingDistribution,
    pub psi: f64,
    pub growth: Growth,
    pub mode: DecodeMode,
}

/// One delivery trial with placement and demand drawn from the trial's streams.
pub fn simulate_delivery(setup: &DeliverySetup, trial: u64) -> Result<DeliveryTrace> {
    let streams = Streams::new(setup.system.seed);
    let cache =
        rap_place(&setup.dist, setup.system.descriptions, &mut streams.stream(Component::CachePlacement, trial))?;
    let requests = sample_requests(&setup.demand, &mut streams.stream(Component::Demand, trial));
    deliver(&setup.system, &setup.channels, &cache, &requests, setup.psi, setup.growth, setup.mode, trial)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::{example_cache, A, B, C};

    fn example_system() -> SystemConfig {
        SystemConfig { files: 3, descriptions: 4, description_bits: 1, gamma: 2.0, receivers: 3, seed: 3 }
    }

    fn example_channels(eps: [f64; 3]) -> Vec<ReceiverChannel> {
        [0.5, 0.25, 0.25]
            .iter()
            .zip(eps)
            .enumerate()
            .map(|(u, (&eta, e))| ReceiverChannel::with_rate(u, ChannelModel::bsc(e).unwrap(), eta).unwrap())
            .collect()
    }

    #[test]
    fn worked_example_end_to_end() {
        let sys = example_system();
        assert_eq!(sys.slot(), 8);
        let t = deliver(
            &sys,
            &example_channels([0.0; 3]),
            &example_cache(),
            &RequestVector(vec![B, A, C]),
            2.0,
            Growth::Greedy,
            DecodeMode::Ideal,
            0,
        )
        .unwrap();
        assert_eq!(t.n, 4);
        assert_eq!(t.schedule.d, vec![2, 1, 1]);
        assert_eq!(t.codeword.blocks.len(), 2);
        assert_eq!(t.codeword.total_len(), 8);
        assert!(t.all_succeeded());
        assert_eq!(t.delivered(), vec![2, 1, 1]);
    }

    #[test]
    fn ideal_decoding_fails_above_capacity() {
        let sys = example_system();
        // H2(0.3) > 0.75, so receiver 1's rate of 1/2 exceeds its capacity.
        let t = deliver(
            &sys,
            &[
                ReceiverChannel { receiver: 0, model: ChannelModel::bsc(0.3).unwrap(), eta: 0.5 },
                example_channels([0.0; 3])[1],
                example_channels([0.0; 3])[2],
            ],
            &example_cache(),
            &RequestVector(vec![B, A, C]),
            2.0,
            Growth::Greedy,
            DecodeMode::Ideal,
            0,
        )
        .unwrap();
        assert!(!t.outcomes[0].success);
        assert!(t.outcomes[1].success && t.outcomes[2].success);
    }

    #[test]
    fn block_length_guards() {
        assert_eq!(block_length(8, 2.0).unwrap(), 4);
        assert_eq!(block_length(9, 3.0).unwrap(), 3);
        assert!(block_length(1, 2.0).is_err());
        assert!(block_length(8, 0.0).is_err());
    }
}
