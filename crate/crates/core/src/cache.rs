//! Cache placement: RAP (random popularity-based) and LFU.
//!
//! A [`CachingDistribution`] gives, for every receiver, the fraction of its
//! cache that goes to each file. RAP turns it into a packet-level
//! [`CacheRealization`] by caching `floor(p_{f,u} * M_u * D)` distinct packets
//! of each file, chosen uniformly at random and independently across
//! `(receiver, file)` pairs. Leftover capacity from the rounding is not
//! redistributed.

use std::fmt::Write as _;

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::check_stochastic;

/// Slack used when flooring `p * M * D`, so that `0.3 * 10 * 10` yields 30.
const COUNT_SLACK: f64 = 1e-9;

/// Per-receiver caching fractions `p_{f,u}` and cache sizes `M_u` (in files).
#[derive(Debug, Clone, PartialEq)]
pub struct CachingDistribution {
    columns: Vec<Vec<f64>>,
    sizes: Vec<f64>,
}

impl CachingDistribution {
    pub fn new(columns: Vec<Vec<f64>>, sizes: Vec<f64>) -> Result<Self> {
        if columns.is_empty() || columns.len() != sizes.len() {
            return Err(Error::config("caching distribution needs one column and one cache size per receiver"));
        }
        let m = columns[0].len();
        for (u, (col, &size)) in columns.iter().zip(&sizes).enumerate() {
            if col.len() != m {
                return Err(Error::config("caching columns differ in length"));
            }
            if !(size >= 0.0) || size > m as f64 {
                return Err(Error::config(format!("cache size {size} of receiver {} outside [0, {m}]", u + 1)));
            }
            check_stochastic("caching column", col).map_err(|e| Error::config(e.to_string()))?;
            if size > 0.0 {
                if let Some(p) = col.iter().find(|&&p| p * size > 1.0 + COUNT_SLACK) {
                    return Err(Error::config(format!("p = {p} exceeds 1/M = {} for receiver {}", 1.0 / size, u + 1)));
                }
            }
        }
        Ok(Self { columns, sizes })
    }

    /// Same column and cache size at every receiver.
    pub fn symmetric(p: Vec<f64>, cache_files: f64, receivers: usize) -> Result<Self> {
        Self::new(vec![p; receivers], vec![cache_files; receivers])
    }

    pub fn receivers(&self) -> usize {
        self.columns.len()
    }

    pub fn files(&self) -> usize {
        self.columns[0].len()
    }

    pub fn column(&self, receiver: usize) -> &[f64] {
        &self.columns[receiver]
    }

    pub fn cache_size(&self, receiver: usize) -> f64 {
        self.sizes[receiver]
    }

    pub fn is_symmetric(&self) -> bool {
        self.columns.windows(2).all(|w| w[0] == w[1]) && self.sizes.windows(2).all(|w| w[0] == w[1])
    }

    /// Packets of file `f` that RAP caches at receiver `u`.
    pub fn packet_count(&self, receiver: usize, file: usize, descriptions: usize) -> usize {
        packet_count(self.columns[receiver][file], self.sizes[receiver], descriptions)
    }
}

pub(crate) fn packet_count(p: f64, cache_files: f64, descriptions: usize) -> usize {
    (p * cache_files * descriptions as f64 + COUNT_SLACK).floor() as usize
}

/// `p_f` proportional to `q_f`, clipped at `1/M` and renormalized until no
/// entry exceeds the cap.
pub fn proportional_distribution(q: &[f64], cache_files: f64) -> Result<Vec<f64>> {
    check_stochastic("demand", q)?;
    let m = q.len();
    if cache_files > m as f64 {
        return Err(Error::config(format!("cache size {cache_files} exceeds library size {m}")));
    }
    if cache_files <= 1.0 {
        return Ok(q.to_vec());
    }
    let cap = 1.0 / cache_files;
    let mut p = vec![0.0; m];
    let mut clipped = vec![false; m];
    loop {
        let free_mass = 1.0 - cap * clipped.iter().filter(|&&c| c).count() as f64;
        let free_q: f64 = q.iter().zip(&clipped).filter(|(_, &c)| !c).map(|(x, _)| x).sum();
        let mut changed = false;
        for f in 0..m {
            if clipped[f] {
                p[f] = cap;
                continue;
            }
            p[f] = if free_q > 0.0 { q[f] * free_mass / free_q } else { 0.0 };
            if p[f] > cap {
                clipped[f] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    // Zero-popularity files can leave mass unassigned when M is close to m;
    // spread it over the unclipped files in popularity order.
    let mut missing = 1.0 - p.iter().sum::<f64>();
    if missing > 1e-12 {
        for f in popularity_order(q) {
            let room = cap - p[f];
            let add = room.min(missing);
            p[f] += add;
            missing -= add;
            if missing <= 1e-15 {
                break;
            }
        }
    }
    Ok(p)
}

/// `p_f = 1/cutoff` for the `cutoff` most popular files, zero elsewhere.
pub fn uniform_cutoff_distribution(q: &[f64], cutoff: usize, cache_files: f64) -> Result<Vec<f64>> {
    let m = q.len();
    if cutoff == 0 || cutoff > m {
        return Err(Error::config(format!("cutoff {cutoff} outside 1..={m}")));
    }
    if cache_files > cutoff as f64 + COUNT_SLACK {
        return Err(Error::config(format!("cutoff {cutoff} is smaller than the cache size {cache_files}")));
    }
    let mut p = vec![0.0; m];
    for f in popularity_order(q).into_iter().take(cutoff) {
        p[f] = 1.0 / cutoff as f64;
    }
    Ok(p)
}

/// File indices sorted by decreasing popularity, ties by lower index.
pub fn popularity_order(q: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..q.len()).collect();
    order.sort_by(|&a, &b| q[b].total_cmp(&q[a]).then(a.cmp(&b)));
    order
}

/// Packet-level cache contents: for every receiver and file, the sorted
/// indices of cached packets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheRealization {
    descriptions: usize,
    packets: Vec<Vec<Vec<u32>>>,
}

impl CacheRealization {
    pub fn empty(receivers: usize, files: usize, descriptions: usize) -> Self {
        Self { descriptions, packets: vec![vec![Vec::new(); files]; receivers] }
    }

    /// Build from explicit packet lists (`packets[u][f]`), validating indices.
    pub fn from_packets(descriptions: usize, mut packets: Vec<Vec<Vec<u32>>>) -> Result<Self> {
        let files = packets.first().map_or(0, Vec::len);
        for per_file in &mut packets {
            if per_file.len() != files {
                return Err(Error::config("cache realization rows differ in file count"));
            }
            for list in per_file.iter_mut() {
                list.sort_unstable();
                if list.windows(2).any(|w| w[0] == w[1]) {
                    return Err(Error::config("duplicate packet index in cache"));
                }
                if list.last().is_some_and(|&l| l as usize >= descriptions) {
                    return Err(Error::config("cached packet index outside 1..=D"));
                }
            }
        }
        Ok(Self { descriptions, packets })
    }

    pub fn receivers(&self) -> usize {
        self.packets.len()
    }

    pub fn files(&self) -> usize {
        self.packets.first().map_or(0, Vec::len)
    }

    pub fn descriptions(&self) -> usize {
        self.descriptions
    }

    pub fn packets(&self, receiver: usize, file: usize) -> &[u32] {
        &self.packets[receiver][file]
    }

    pub fn count(&self, receiver: usize, file: usize) -> usize {
        self.packets[receiver][file].len()
    }

    pub fn contains(&self, receiver: usize, file: usize, packet: u32) -> bool {
        self.packets[receiver][file].binary_search(&packet).is_ok()
    }

    /// Total packets stored at a receiver.
    pub fn load(&self, receiver: usize) -> usize {
        self.packets[receiver].iter().map(Vec::len).sum()
    }

    /// Line-oriented dump: a header, then `u f idx...` (one-based) for every
    /// non-empty `(receiver, file)` pair in receiver-major order.
    pub fn to_text(&self) -> String {
        let mut out = format!("cache {} {} {}\n", self.receivers(), self.files(), self.descriptions);
        for (u, per_file) in self.packets.iter().enumerate() {
            for (f, list) in per_file.iter().enumerate().filter(|(_, l)| !l.is_empty()) {
                write!(out, "{} {}", u + 1, f + 1).unwrap();
                for idx in list {
                    write!(out, " {}", idx + 1).unwrap();
                }
                out.push('\n');
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
        let (_, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "missing header".into() })?;
        let head: Vec<&str> = header.split_whitespace().collect();
        let parse = |s: &str, line: usize| -> Result<usize> {
            s.parse().map_err(|_| Error::Parse { line, msg: format!("bad integer {s:?}") })
        };
        if head.len() != 4 || head[0] != "cache" {
            return Err(Error::Parse { line: 1, msg: "expected `cache U m D`".into() });
        }
        let (u_n, m, d) = (parse(head[1], 1)?, parse(head[2], 1)?, parse(head[3], 1)?);
        let mut packets = vec![vec![Vec::new(); m]; u_n];
        for (i, line) in lines {
            let nums = line.split_whitespace().map(|s| parse(s, i + 1)).collect::<Result<Vec<_>>>()?;
            let bad = |msg: &str| Error::Parse { line: i + 1, msg: msg.into() };
            if nums.len() < 2 || nums[..2].contains(&0) || nums[0] > u_n || nums[1] > m {
                return Err(bad("receiver or file out of range"));
            }
            let list = &mut packets[nums[0] - 1][nums[1] - 1];
            for &idx in &nums[2..] {
                if idx == 0 || idx > d {
                    return Err(bad("packet index out of range"));
                }
                list.push((idx - 1) as u32);
            }
        }
        Self::from_packets(d, packets)
    }
}

/// RAP placement: cache `floor(p_{f,u} M_u D)` uniformly random distinct
/// packets of every file at every receiver, independently.
pub fn rap_place<R: Rng + ?Sized>(
    dist: &CachingDistribution,
    descriptions: usize,
    rng: &mut R,
) -> Result<CacheRealization> {
    if descriptions == 0 {
        return Err(Error::config("D must be >= 1"));
    }
    let mut realization = CacheRealization::empty(dist.receivers(), dist.files(), descriptions);
    for u in 0..dist.receivers() {
        for f in 0..dist.files() {
            let c = dist.packet_count(u, f, descriptions);
            if c > descriptions {
                return Err(Error::config(format!(
                    "receiver {} would cache {c} packets of file {} but D = {descriptions}",
                    u + 1,
                    f + 1
                )));
            }
            if c == 0 {
                continue;
            }
            let mut chosen: Vec<u32> = if c == descriptions {
                (0..descriptions as u32).collect()
            } else {
                index::sample(rng, descriptions, c).into_iter().map(|i| i as u32).collect()
            };
            chosen.sort_unstable();
            realization.packets[u][f] = chosen;
        }
    }
    Ok(realization)
}

/// LFU placement for one popularity column, replicated at every receiver:
/// the `floor(M)` most popular files in full, then `floor(frac(M) D)`
/// lowest-index packets of the next one.
pub fn lfu_place(q: &[f64], cache_files: f64, descriptions: usize, receivers: usize) -> Result<CacheRealization> {
    let m = q.len();
    if !(cache_files >= 0.0) || cache_files > m as f64 {
        return Err(Error::config(format!("cache size {cache_files} outside [0, {m}]")));
    }
    let order = popularity_order(q);
    let whole = cache_files.floor() as usize;
    let partial = ((cache_files - whole as f64) * descriptions as f64 + COUNT_SLACK).floor() as usize;
    let mut per_file = vec![Vec::new(); m];
    for &f in order.iter().take(whole) {
        per_file[f] = (0..descriptions as u32).collect();
    }
    if partial > 0 && whole < m {
        per_file[order[whole]] = (0..partial.min(descriptions) as u32).collect();
    }
    Ok(CacheRealization { descriptions, packets: vec![per_file; receivers] })
}
