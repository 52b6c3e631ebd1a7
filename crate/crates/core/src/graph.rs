//! Index-coding conflict graph over scheduled packets.
//!
//! A vertex is a packet scheduled for one receiver. Vertex `a` interferes
//! with vertex `b` when the two carry different packets and `a`'s packet is
//! not in `b`'s receiver's cache; the graph has an edge when either
//! interferes with the other. Vertices of one receiver always form a clique.

use std::fmt::{self, Write as _};

use crate::bitset::BitSet;
use crate::cache::CacheRealization;
use crate::error::{Error, Result};

/// Identity of a packet: file and description index (zero-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PacketId {
    pub file: u32,
    pub packet: u32,
}

impl fmt::Display for PacketId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.file + 1, self.packet + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Vertex {
    pub packet: PacketId,
    pub receiver: usize,
}

impl Vertex {
    /// Deterministic tie-break key: (file, packet, receiver) ascending.
    pub fn order_key(&self) -> (u32, u32, usize) {
        (self.packet.file, self.packet.packet, self.receiver)
    }
}

/// Per-receiver requested file and the packets of it scheduled for delivery.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduledPackets {
    pub requests: Vec<usize>,
    pub packets: Vec<Vec<u32>>,
}

impl ScheduledPackets {
    pub fn receivers(&self) -> usize {
        self.requests.len()
    }

    pub fn counts(&self) -> Vec<usize> {
        self.packets.iter().map(Vec::len).collect()
    }

    fn contains(&self, receiver: usize, packet: PacketId) -> bool {
        self.requests[receiver] == packet.file as usize && self.packets[receiver].contains(&packet.packet)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictGraph {
    receivers: usize,
    vertices: Vec<Vertex>,
    adjacency: Vec<BitSet>,
    /// `K_v`: receivers that request or cache the vertex's packet.
    kv: Vec<BitSet>,
    clusters: Vec<Vec<usize>>,
}

impl ConflictGraph {
    /// Build the graph for a cache realization and a set of scheduled packets.
    pub fn build(cache: &CacheRealization, scheduled: &ScheduledPackets) -> Result<Self> {
        let u_n = scheduled.receivers();
        if cache.receivers() != u_n {
            return Err(Error::contract("cache and schedule disagree on the number of receivers"));
        }
        let mut vertices = Vec::new();
        for (u, list) in scheduled.packets.iter().enumerate() {
            let file = scheduled.requests[u];
            for (i, &packet) in list.iter().enumerate() {
                if cache.contains(u, file, packet) {
                    return Err(Error::contract(format!(
                        "packet {} scheduled for receiver {} is already in its cache",
                        PacketId { file: file as u32, packet },
                        u + 1
                    )));
                }
                if list[..i].contains(&packet) {
                    return Err(Error::contract("packet scheduled twice for one receiver"));
                }
                vertices.push(Vertex { packet: PacketId { file: file as u32, packet }, receiver: u });
            }
        }
        // cached[v] holds the receivers whose cache contains rho(v).
        let cached: Vec<BitSet> = vertices
            .iter()
            .map(|v| {
                let mut set = BitSet::new(u_n);
                for u in 0..u_n {
                    if cache.contains(u, v.packet.file as usize, v.packet.packet) {
                        set.insert(u);
                    }
                }
                set
            })
            .collect();
        let kv = vertices
            .iter()
            .zip(&cached)
            .map(|(v, c)| {
                let mut set = c.clone();
                for u in 0..u_n {
                    if scheduled.contains(u, v.packet) {
                        set.insert(u);
                    }
                }
                set
            })
            .collect();
        let n = vertices.len();
        let mut adjacency = vec![BitSet::new(n); n];
        for a in 0..n {
            for b in a + 1..n {
                let (va, vb) = (&vertices[a], &vertices[b]);
                let interferes =
                    va.packet != vb.packet && (!cached[a].contains(vb.receiver) || !cached[b].contains(va.receiver));
                if interferes {
                    adjacency[a].insert(b);
                    adjacency[b].insert(a);
                }
            }
        }
        Ok(Self::assemble(u_n, vertices, adjacency, kv))
    }

    fn assemble(receivers: usize, vertices: Vec<Vertex>, adjacency: Vec<BitSet>, kv: Vec<BitSet>) -> Self {
        let mut clusters = vec![Vec::new(); receivers];
        for (i, v) in vertices.iter().enumerate() {
            clusters[v.receiver].push(i);
        }
        Self { receivers, vertices, adjacency, kv, clusters }
    }

    /// Assemble a graph from explicit parts, checking that clusters are cliques.
    pub fn from_parts(
        receivers: usize,
        vertices: Vec<Vertex>,
        edges: &[(usize, usize)],
        kv: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let n = vertices.len();
        if kv.len() != n {
            return Err(Error::config("one K_v set per vertex required"));
        }
        if vertices.iter().any(|v| v.receiver >= receivers) {
            return Err(Error::config("vertex receiver out of range"));
        }
        let mut adjacency = vec![BitSet::new(n); n];
        for &(a, b) in edges {
            if a >= n || b >= n || a == b {
                return Err(Error::config(format!("bad edge ({}, {})", a + 1, b + 1)));
            }
            adjacency[a].insert(b);
            adjacency[b].insert(a);
        }
        let kv = kv
            .into_iter()
            .enumerate()
            .map(|(i, ks)| {
                let mut set = BitSet::new(receivers);
                set.insert(vertices[i].receiver);
                for u in ks {
                    if u >= receivers {
                        return Err(Error::config("K_v receiver out of range"));
                    }
                    set.insert(u);
                }
                Ok(set)
            })
            .collect::<Result<_>>()?;
        let graph = Self::assemble(receivers, vertices, adjacency, kv);
        for cluster in &graph.clusters {
            for (i, &a) in cluster.iter().enumerate() {
                if cluster[i + 1..].iter().any(|&b| !graph.adjacent(a, b)) {
                    return Err(Error::config(format!("cluster of vertex {} is not a clique", a + 1)));
                }
            }
        }
        Ok(graph)
    }

    pub fn receivers(&self) -> usize {
        self.receivers
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &Vertex {
        &self.vertices[i]
    }

    #[inline]
    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].contains(b)
    }

    pub fn neighbors(&self, v: usize) -> &BitSet {
        &self.adjacency[v]
    }

    pub fn kv(&self, v: usize) -> &BitSet {
        &self.kv[v]
    }

    pub fn kv_size(&self, v: usize) -> usize {
        self.kv[v].count()
    }

    /// Vertex ids scheduled for each receiver.
    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        self.clusters.iter().map(Vec::len).collect()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.len()).flat_map(move |a| self.adjacency[a].iter().filter(move |&b| b > a).map(move |b| (a, b)))
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(BitSet::count).sum::<usize>() / 2
    }

    /// Text dump: `graph U V E`, then `v id file packet receiver K=..` and
    /// `e id id` lines, all one-based.
    pub fn to_text(&self) -> String {
        let mut out = format!("graph {} {} {}\n", self.receivers, self.len(), self.edge_count());
        for (i, v) in self.vertices.iter().enumerate() {
            let ks: Vec<String> = self.kv[i].iter().map(|u| (u + 1).to_string()).collect();
            writeln!(
                out,
                "v {} {} {} {} K={}",
                i + 1,
                v.packet.file + 1,
                v.packet.packet + 1,
                v.receiver + 1,
                ks.join(",")
            )
            .unwrap();
        }
        for (a, b) in self.edges() {
            writeln!(out, "e {} {}", a + 1, b + 1).unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut receivers = None;
        let mut vertices = Vec::new();
        let mut kv = Vec::new();
        let mut edges = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| Error::Parse { line: i + 1, msg: msg.to_string() };
            let num = |s: &str| -> Result<usize> {
                match s.parse::<usize>() {
                    Ok(x) if x >= 1 => Ok(x - 1),
                    _ => Err(err(&format!("expected a positive integer, got {s:?}"))),
                }
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields[0] {
                "graph" if fields.len() >= 2 => receivers = Some(num(fields[1])? + 1),
                "v" if fields.len() >= 5 => {
                    if num(fields[1])? != vertices.len() {
                        return Err(err("vertex ids must be consecutive"));
                    }
                    vertices.push(Vertex {
                        packet: PacketId { file: num(fields[2])? as u32, packet: num(fields[3])? as u32 },
                        receiver: num(fields[4])?,
                    });
                    let ks = match fields.get(5).and_then(|f| f.strip_prefix("K=")) {
                        Some(list) if !list.is_empty() => list.split(',').map(num).collect::<Result<Vec<_>>>()?,
                        _ => Vec::new(),
                    };
                    kv.push(ks);
                }
                "e" if fields.len() == 3 => edges.push((num(fields[1])?, num(fields[2])?)),
                _ => return Err(err("unrecognized line")),
            }
        }
        let receivers = receivers.ok_or(Error::Parse { line: 1, msg: "missing `graph` header".into() })?;
        Self::from_parts(receivers, vertices, &edges, kv)
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    pub use crate::worked::{cache as example_cache, A, B, C};

    pub fn example_schedule() -> ScheduledPackets {
        ScheduledPackets { requests: vec![B, A, C], packets: vec![vec![0, 1], vec![0], vec![0]] }
    }

    pub fn example_graph() -> ConflictGraph {
        ConflictGraph::build(&example_cache(), &example_schedule()).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    fn kv_list(g: &ConflictGraph, v: usize) -> Vec<usize> {
        g.kv(v).iter().map(|u| u + 1).collect()
    }

    #[test]
    fn worked_example_structure() {
        let g = example_graph();
        assert_eq!(g.len(), 4);
        assert_eq!(g.cluster_sizes(), vec![2, 1, 1]);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 3)]);
    }

    #[test]
    fn worked_example_kv() {
        let g = example_graph();
        assert_eq!(kv_list(&g, 0), vec![1, 2, 3]);
        assert_eq!(kv_list(&g, 1), vec![1, 2]);
        assert_eq!(kv_list(&g, 2), vec![1, 2, 3]);
        assert_eq!(kv_list(&g, 3), vec![1, 2, 3]);
    }

    #[test]
    fn full_side_information_has_no_cross_edges() {
        // Each receiver caches everything scheduled for the others.
        let mut p = vec![vec![Vec::new(); 3]; 3];
        for u in 0..3 {
            for f in 0..3 {
                if f != u {
                    p[u][f] = vec![0, 1];
                }
            }
        }
        let cache = CacheRealization::from_packets(3, p).unwrap();
        let sched = ScheduledPackets { requests: vec![0, 1, 2], packets: vec![vec![0, 1]; 3] };
        let g = ConflictGraph::build(&cache, &sched).unwrap();
        let cross = g.edges().filter(|&(a, b)| g.vertex(a).receiver != g.vertex(b).receiver).count();
        assert_eq!(cross, 0);
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn empty_caches_give_complete_graph() {
        let cache = CacheRealization::empty(3, 3, 2);
        let sched = ScheduledPackets { requests: vec![0, 1, 2], packets: vec![vec![0, 1], vec![0], vec![1]] };
        let g = ConflictGraph::build(&cache, &sched).unwrap();
        assert_eq!(g.edge_count(), 4 * 3 / 2);
    }

    #[test]
    fn shared_packet_is_not_an_edge() {
        let cache = CacheRealization::empty(2, 1, 2);
        let sched = ScheduledPackets { requests: vec![0, 0], packets: vec![vec![0], vec![0]] };
        let g = ConflictGraph::build(&cache, &sched).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.kv_size(0), 2);
    }

    #[test]
    fn rejects_cached_scheduled_packet() {
        let mut sched = example_schedule();
        sched.requests[1] = C;
        assert!(matches!(ConflictGraph::build(&example_cache(), &sched), Err(Error::Contract(_))));
    }

    #[test]
    fn dump_round_trip() {
        let g = example_graph();
        let text = g.to_text();
        assert!(text.starts_with("graph 3 4 2\nv 1 2 1 1 K=1,2,3\n"));
        assert_eq!(ConflictGraph::from_text(&text).unwrap(), g);
    }

    #[test]
    fn dump_rejects_broken_cluster() {
        let text = "graph 1 2 0\nv 1 1 1 1\nv 2 1 2 1\n";
        assert!(ConflictGraph::from_text(text).is_err());
    }
}
