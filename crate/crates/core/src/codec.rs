//! Concatenated source-channel multicast: per-receiver codebooks, XOR of
//! codewords inside each GIS, symbol-level channels and two-stage decoding.
//!
//! Channel codes are modeled abstractly. A receiver's codeword is its
//! zero-padded payload repeated cyclically to `n` symbols, which is linear,
//! so XOR cancellation behaves exactly as with a real linear code. Whether
//! the channel-decoding stage succeeds is decided by a [`DecodeMode`]; on
//! success the payload is read from the noiseless block.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cache::CacheRealization;
use crate::coloring::Coloring;
use crate::error::{Error, Result};
use crate::graph::{ConflictGraph, PacketId};
use crate::model::{ChannelKind, ChannelModel};
use crate::rng::{Component, Streams};

/// Received symbol standing for an erasure.
pub const ERASED: u8 = 2;

/// Content source: every description is a fixed pseudo-random bit block.
#[derive(Debug, Clone, Copy)]
pub struct Library {
    streams: Streams,
    bits: usize,
}

impl Library {
    pub fn new(seed: u64, description_bits: usize) -> Self {
        Self { streams: Streams::new(seed), bits: description_bits }
    }

    pub fn description_bits(&self) -> usize {
        self.bits
    }

    pub fn description(&self, packet: PacketId) -> Vec<u8> {
        let mut rng = self.streams.stream2(Component::Library, packet.file as u64, packet.packet as u64);
        (0..self.bits).map(|_| rng.gen::<bool>() as u8).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Codebook {
    pub receiver: usize,
    pub n: usize,
    pub rate: f64,
    pub payload_bits: usize,
}

impl Codebook {
    /// Codeword for a payload of at most `payload_bits` bits.
    pub fn encode(&self, payload: &[u8]) -> Result<Vec<u8>> {
        if payload.len() > self.payload_bits {
            return Err(Error::contract(format!(
                "receiver {} payload of {} bits exceeds codebook payload {}",
                self.receiver + 1,
                payload.len(),
                self.payload_bits
            )));
        }
        let mut padded = payload.to_vec();
        padded.resize(self.payload_bits, 0);
        if padded.is_empty() {
            return Ok(vec![0; self.n]);
        }
        Ok((0..self.n).map(|i| padded[i % padded.len()]).collect())
    }
}

/// One codebook per receiver with a common codeword length `n`.
pub fn make_codebooks(eta: &[f64], n: usize) -> Result<Vec<Codebook>> {
    if n == 0 {
        return Err(Error::domain("codeword length must be at least 1"));
    }
    eta.iter()
        .enumerate()
        .map(|(u, &rate)| {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::domain(format!("channel rate {rate} outside [0, 1]")));
            }
            // Tolerance keeps exact products such as 4 * 0.5 from flooring down.
            let payload_bits = ((n as f64 * rate) + 1e-9).floor() as usize;
            Ok(Codebook { receiver: u, n, rate, payload_bits: payload_bits.min(n) })
        })
        .collect()
}

/// One multicast block: the XOR of the codewords of the receivers it serves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub symbols: Vec<u8>,
    /// Carried `(packet, receiver)` pairs, ordered by receiver then packet.
    pub header: Vec<(PacketId, usize)>,
}

impl Block {
    pub fn receivers(&self) -> Vec<usize> {
        let mut r: Vec<usize> = self.header.iter().map(|&(_, u)| u).collect();
        r.dedup();
        r
    }

    fn packets_for(&self, u: usize) -> Vec<PacketId> {
        self.header.iter().filter(|&&(_, w)| w == u).map(|&(p, _)| p).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MulticastCodeword {
    pub n: usize,
    pub blocks: Vec<Block>,
}

impl MulticastCodeword {
    pub fn total_len(&self) -> usize {
        self.n * self.blocks.len()
    }
}

fn payload_of(library: &Library, packets: &[PacketId]) -> Vec<u8> {
    packets.iter().flat_map(|&p| library.description(p)).collect()
}

/// Encode a coloring as concatenated XOR blocks, one per GIS.
///
/// A GIS in which two receivers carry the same description cannot be sent as
/// one XOR (neither could cancel the other's codeword), so its receivers are
/// split greedily into groups without shared descriptions, one block each.
pub fn encode(
    graph: &ConflictGraph,
    coloring: &Coloring,
    codebooks: &[Codebook],
    library: &Library,
) -> Result<MulticastCodeword> {
    let n = codebooks.first().map_or(0, |c| c.n);
    if codebooks.len() != graph.receivers() || codebooks.iter().any(|c| c.n != n) {
        return Err(Error::contract("one codebook per receiver with a common length is required"));
    }
    let mut blocks = Vec::new();
    for gis in coloring.giss() {
        let mut parts: Vec<(usize, Vec<PacketId>)> = Vec::new();
        let mut sorted = gis.clone();
        sorted.sort_by_key(|&v| (graph.vertex(v).receiver, graph.vertex(v).packet));
        for v in sorted {
            let vx = graph.vertex(v);
            match parts.last_mut() {
                Some((u, list)) if *u == vx.receiver => list.push(vx.packet),
                _ => parts.push((vx.receiver, vec![vx.packet])),
            }
        }
        let mut groups: Vec<Vec<(usize, Vec<PacketId>)>> = Vec::new();
        for part in parts {
            let slot = groups.iter_mut().find(|g| g.iter().all(|(_, other)| other.iter().all(|p| !part.1.contains(p))));
            match slot {
                Some(g) => g.push(part),
                None => groups.push(vec![part]),
            }
        }
        for group in groups {
            let mut symbols = vec![0u8; n];
            let mut header = Vec::new();
            for (u, packets) in group {
                let word = codebooks[u].encode(&payload_of(library, &packets))?;
                for (s, w) in symbols.iter_mut().zip(word) {
                    *s ^= w;
                }
                header.extend(packets.into_iter().map(|p| (p, u)));
            }
            blocks.push(Block { symbols, header });
        }
    }
    Ok(MulticastCodeword { n, blocks })
}

/// Pass the codeword through each receiver's channel.
pub fn transmit(
    codeword: &MulticastCodeword,
    channels: &[ChannelModel],
    streams: &Streams,
    trial: u64,
) -> Vec<Vec<u8>> {
    let x: Vec<u8> = codeword.blocks.iter().flat_map(|b| b.symbols.iter().copied()).collect();
    channels
        .iter()
        .enumerate()
        .map(|(u, ch)| {
            let mut rng = streams.stream2(Component::ChannelNoise, trial, u as u64);
            let eps = ch.epsilon;
            x.iter()
                .map(|&s| {
                    let hit = eps > 0.0 && (eps >= 1.0 || rng.gen_bool(eps));
                    match (hit, ch.kind) {
                        (false, _) => s,
                        (true, ChannelKind::Bsc) => s ^ 1,
                        (true, ChannelKind::Bec) => ERASED,
                    }
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecodeMode {
    /// Channel decoding succeeds iff the code rate is within capacity.
    #[default]
    Ideal,
    /// Erasure channels only: an MDS-like code decodes iff at least
    /// `payload_bits` symbols of the block arrive unerased.
    SimulatedBec,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReceiverOutcome {
    pub recovered: Vec<PacketId>,
    pub success: bool,
}

/// Stage 1: strip the codewords of other receivers using cached content.
/// Returns `None` when a needed description is neither cached nor own.
pub fn strip_interference(
    block: &Block,
    observed: &[u8],
    receiver: usize,
    cache: &CacheRealization,
    codebooks: &[Codebook],
    library: &Library,
) -> Option<Vec<u8>> {
    let mut y = observed.to_vec();
    for w in block.receivers().into_iter().filter(|&w| w != receiver) {
        let packets = block.packets_for(w);
        if packets.iter().any(|p| !cache.contains(receiver, p.file as usize, p.packet)) {
            return None;
        }
        let word = codebooks[w].encode(&payload_of(library, &packets)).ok()?;
        for (s, c) in y.iter_mut().zip(word) {
            if *s != ERASED {
                *s ^= c;
            }
        }
    }
    Some(y)
}

#[allow(clippy::too_many_arguments)]
/// Two-stage decoding at every receiver. `scheduled[u]` is what `u` expects.
pub fn decode(
    codeword: &MulticastCodeword,
    received: &[Vec<u8>],
    cache: &CacheRealization,
    codebooks: &[Codebook],
    channels: &[ChannelModel],
    library: &Library,
    scheduled: &[Vec<PacketId>],
    mode: DecodeMode,
) -> Result<Vec<ReceiverOutcome>> {
    let n = codeword.n;
    let bits = library.description_bits();
    let mut out = Vec::with_capacity(channels.len());
    for (u, ch) in channels.iter().enumerate() {
        if mode == DecodeMode::SimulatedBec && ch.kind != ChannelKind::Bec {
            return Err(Error::config("simulated-bec decoding needs erasure channels"));
        }
        let book = &codebooks[u];
        let mut recovered = Vec::new();
        let mut ok = true;
        for (bi, block) in codeword.blocks.iter().enumerate() {
            let own = block.packets_for(u);
            if own.is_empty() {
                continue;
            }
            let observed = &received[u][bi * n..(bi + 1) * n];
            let Some(stripped) = strip_interference(block, observed, u, cache, codebooks, library) else {
                ok = false;
                continue;
            };
            let decodable = match mode {
                DecodeMode::Ideal => book.rate <= ch.capacity() + 1e-12,
                DecodeMode::SimulatedBec => stripped.iter().filter(|&&s| s != ERASED).count() >= book.payload_bits,
            };
            if !decodable {
                ok = false;
                continue;
            }
            let clean = strip_interference(block, &block.symbols, u, cache, codebooks, library)
                .expect("noiseless stripping succeeds when noisy stripping did");
            for (i, p) in own.iter().enumerate() {
                if clean[i * bits..(i + 1) * bits] == library.description(*p)[..] {
                    recovered.push(*p);
                } else {
                    ok = false;
                }
            }
        }
        recovered.sort();
        let mut want = scheduled[u].clone();
        want.sort();
        out.push(ReceiverOutcome { success: ok && recovered == want, recovered });
    }
    Ok(out)
}
