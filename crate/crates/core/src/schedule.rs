//! Description scheduling: how many uncached descriptions each receiver gets
//! in one slot, proportional to its channel rate.

use serde::{Deserialize, Serialize};

use crate::cache::CacheRealization;
use crate::error::{Error, Result};
use crate::graph::ScheduledPackets;
use crate::model::RequestVector;

/// Which normalized length sets the description counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleMode {
    /// Length of the current demand and cache realization.
    PerRealization,
    /// Expected length over demands and caches; keeps codebooks fixed.
    #[default]
    Expectation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub d: Vec<usize>,
    pub scheduled: ScheduledPackets,
    pub mode: ScheduleMode,
    pub psi: f64,
}

/// Uncapped description count `slot * eta / (bits * psi)` rounded down.
pub fn description_quota(slot: u64, eta: f64, description_bits: u64, psi: f64) -> usize {
    let raw = slot as f64 * eta / (description_bits as f64 * psi);
    // Absorb representation error so exact ratios such as 8 * 0.5 / 2 stay integral.
    (raw + 1e-9).floor().max(0.0) as usize
}

/// Schedule the lowest-index uncached descriptions of each requested file.
pub fn schedule(
    cache: &CacheRealization,
    requests: &RequestVector,
    eta: &[f64],
    psi: f64,
    slot: u64,
    description_bits: u64,
    mode: ScheduleMode,
) -> Result<Schedule> {
    if !(psi.is_finite() && psi > 0.0) {
        return Err(Error::domain(format!("normalized length must be positive, got {psi}")));
    }
    let u_n = requests.receivers();
    if eta.len() != u_n || cache.receivers() != u_n {
        return Err(Error::config("rates, requests and caches must cover the same receivers"));
    }
    if let Some(e) = eta.iter().find(|e| !(e.is_finite() && **e >= 0.0)) {
        return Err(Error::domain(format!("channel rate must be non-negative, got {e}")));
    }
    requests.validate(cache.files())?;
    let dn = cache.descriptions();
    let mut d = Vec::with_capacity(u_n);
    let mut packets = Vec::with_capacity(u_n);
    for u in 0..u_n {
        let f = requests.file(u);
        let cached = cache.packets(u, f);
        let quota = description_quota(slot, eta[u], description_bits, psi).min(dn - cached.len());
        let chosen: Vec<u32> = (0..dn as u32).filter(|i| cached.binary_search(i).is_err()).take(quota).collect();
        d.push(chosen.len());
        packets.push(chosen);
    }
    Ok(Schedule { d, scheduled: ScheduledPackets { requests: requests.0.clone(), packets }, mode, psi })
}
