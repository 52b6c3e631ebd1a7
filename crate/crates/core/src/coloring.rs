//! Covering the conflict graph with generalized independent sets (GIS).
//!
//! A GIS groups vertices by receiver; groups of different receivers are
//! mutually disconnected and receiver `u` contributes at most `d_u` vertices.
//! All vertices of a GIS share one color and one multicast block.

use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::graph::ConflictGraph;

/// How a receiver's group grows while a GIS is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Growth {
    /// Greedy one-vertex-per-receiver pass over the hierarchy, then each
    /// represented receiver is topped up to `d_u` from the same hierarchy.
    #[default]
    Greedy,
    /// A receiver's group is topped up to `d_u` as soon as the receiver joins,
    /// drawing from the current hierarchy first and then from lower ones.
    FillOnJoin,
}

/// A partition of the vertex set into GISs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coloring {
    giss: Vec<Vec<usize>>,
    colors: Vec<usize>,
}

impl Coloring {
    /// Build from GIS vertex lists; checks that they partition `0..n`.
    pub fn new(n: usize, giss: Vec<Vec<usize>>) -> Result<Self> {
        let mut colors = vec![usize::MAX; n];
        for (c, gis) in giss.iter().enumerate() {
            if gis.is_empty() {
                return Err(Error::contract("empty GIS"));
            }
            for &v in gis {
                if v >= n || colors[v] != usize::MAX {
                    return Err(Error::contract(format!("vertex {} colored twice or out of range", v + 1)));
                }
                colors[v] = c;
            }
        }
        if let Some(v) = colors.iter().position(|&c| c == usize::MAX) {
            return Err(Error::contract(format!("vertex {} left uncolored", v + 1)));
        }
        Ok(Self { giss, colors })
    }

    pub fn len(&self) -> usize {
        self.giss.len()
    }

    pub fn is_empty(&self) -> bool {
        self.giss.is_empty()
    }

    pub fn giss(&self) -> &[Vec<usize>] {
        &self.giss
    }

    pub fn color_of(&self, v: usize) -> usize {
        self.colors[v]
    }

    /// GISs as sorted vertex lists, sorted among themselves; for comparisons.
    pub fn canonical(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = self
            .giss
            .iter()
            .map(|g| {
                let mut g = g.clone();
                g.sort_unstable();
                g
            })
            .collect();
        out.sort();
        out
    }

    /// Check every GIS against the graph and the per-receiver caps.
    pub fn validate(&self, graph: &ConflictGraph, d: &[usize]) -> Result<()> {
        if self.colors.len() != graph.len() {
            return Err(Error::contract("coloring and graph sizes differ"));
        }
        for (c, gis) in self.giss.iter().enumerate() {
            check_gis(graph, d, gis).map_err(|e| Error::contract(format!("GIS {}: {e}", c + 1)))?;
        }
        Ok(())
    }
}

/// Def.-5 validity plus the `s_u <= d_u` cap for one vertex set.
pub fn check_gis(graph: &ConflictGraph, d: &[usize], gis: &[usize]) -> Result<(), String> {
    let mut sizes = vec![0usize; graph.receivers()];
    for (i, &a) in gis.iter().enumerate() {
        let ra = graph.vertex(a).receiver;
        sizes[ra] += 1;
        for &b in &gis[i + 1..] {
            if graph.vertex(b).receiver != ra && graph.adjacent(a, b) {
                return Err(format!("vertices {} and {} of different receivers are adjacent", a + 1, b + 1));
            }
        }
    }
    for (u, (&s, &cap)) in sizes.iter().zip(d).enumerate() {
        if s > cap {
            return Err(format!("receiver {} has {s} vertices, cap {cap}", u + 1));
        }
    }
    Ok(())
}

/// Per-receiver group sizes `s_u` of a GIS.
pub fn group_sizes(graph: &ConflictGraph, gis: &[usize]) -> Vec<usize> {
    let mut sizes = vec![0; graph.receivers()];
    for &v in gis {
        sizes[graph.vertex(v).receiver] += 1;
    }
    sizes
}

/// Channel uses of one GIS sent as a block sized for its slowest member:
/// `max_u s_u * bits / eta_u`. Infinite if a member has zero rate.
pub fn gis_channel_uses(graph: &ConflictGraph, gis: &[usize], eta: &[f64], description_bits: usize) -> f64 {
    group_sizes(graph, gis)
        .iter()
        .zip(eta)
        .filter(|(&s, _)| s > 0)
        .map(|(&s, &e)| (s * description_bits) as f64 / e)
        .fold(0.0, f64::max)
}

/// Total channel uses of a coloring under [`gis_channel_uses`].
pub fn channel_uses(graph: &ConflictGraph, coloring: &Coloring, eta: &[f64], description_bits: usize) -> f64 {
    coloring.giss().iter().map(|g| gis_channel_uses(graph, g, eta, description_bits)).sum()
}

/// Processing order within a hierarchy: smaller `|K_v|` first, then
/// (file, packet, receiver).
fn order_key(graph: &ConflictGraph, v: usize) -> (usize, (u32, u32, usize)) {
    (graph.kv_size(v), graph.vertex(v).order_key())
}

struct Builder<'a> {
    graph: &'a ConflictGraph,
    d: &'a [usize],
    members: BitSet,
    list: Vec<usize>,
    sizes: Vec<usize>,
}

impl<'a> Builder<'a> {
    fn new(graph: &'a ConflictGraph, d: &'a [usize]) -> Self {
        Self { graph, d, members: BitSet::new(graph.len()), list: Vec::new(), sizes: vec![0; graph.receivers()] }
    }

    fn add(&mut self, v: usize) {
        self.members.insert(v);
        self.list.push(v);
        self.sizes[self.graph.vertex(v).receiver] += 1;
    }

    fn has_room(&self, u: usize) -> bool {
        self.sizes[u] < self.d[u]
    }

    /// No edge from `v` to any member.
    fn disconnected(&self, v: usize) -> bool {
        !self.graph.neighbors(v).intersects(&self.members)
    }

    /// No edge from `v` to members of receivers other than its own.
    fn disconnected_from_others(&self, v: usize) -> bool {
        let u = self.graph.vertex(v).receiver;
        let nbrs = self.graph.neighbors(v);
        self.list.iter().all(|&w| self.graph.vertex(w).receiver == u || !nbrs.contains(w))
    }

    fn receivers(&self) -> Vec<usize> {
        (0..self.sizes.len()).filter(|&u| self.sizes[u] > 0).collect()
    }
}

/// Try to grow a GIS from seed `v` at hierarchy `level`.
///
/// `hierarchy` holds the uncolored vertices of the level (including `v`);
/// `lower` holds uncolored vertices of lower levels, highest level first,
/// and is only consulted by [`Growth::FillOnJoin`]. Returns the GIS and its
/// receiver set, or two empty lists when fewer than `level` vertices are found.
pub fn gis_function(
    graph: &ConflictGraph,
    d: &[usize],
    hierarchy: &[usize],
    lower: &[usize],
    v: usize,
    level: usize,
    growth: Growth,
) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = hierarchy.iter().copied().filter(|&w| w != v).collect();
    order.sort_by_key(|&w| order_key(graph, w));
    let mut g = Builder::new(graph, d);
    g.add(v);
    match growth {
        Growth::Greedy => {
            for &w in &order {
                if g.disconnected(w) {
                    g.add(w);
                }
            }
            if g.list.len() < level {
                return (Vec::new(), Vec::new());
            }
            for &w in &order {
                let u = graph.vertex(w).receiver;
                if !g.members.contains(w) && g.sizes[u] > 0 && g.has_room(u) && g.disconnected_from_others(w) {
                    g.add(w);
                }
            }
        }
        Growth::FillOnJoin => {
            let fill = |g: &mut Builder, u: usize| {
                for &w in order.iter().chain(lower) {
                    if !g.has_room(u) {
                        break;
                    }
                    if graph.vertex(w).receiver == u && !g.members.contains(w) && g.disconnected_from_others(w) {
                        g.add(w);
                    }
                }
            };
            fill(&mut g, graph.vertex(v).receiver);
            for &w in &order {
                let u = graph.vertex(w).receiver;
                if g.sizes[u] == 0 && g.disconnected(w) {
                    g.add(w);
                    fill(&mut g, u);
                }
            }
            if g.list.len() < level {
                return (Vec::new(), Vec::new());
            }
        }
    }
    let receivers = g.receivers();
    (g.list, receivers)
}

/// Hierarchical greedy coloring (CA-HgC₂).
///
/// Vertices start in hierarchy `|K_v|`. Levels are processed from `U` down
/// to 1; a seed whose GIS attempt fails is demoted one level, keeping its
/// original `K_v`. Level 1 always succeeds, so every vertex gets colored.
pub fn ca_hgc2(graph: &ConflictGraph, d: &[usize], growth: Growth) -> Coloring {
    let n = graph.len();
    let u_n = graph.receivers();
    let mut levels: Vec<Vec<usize>> = vec![Vec::new(); u_n + 1];
    for v in 0..n {
        levels[graph.kv_size(v).clamp(1, u_n)].push(v);
    }
    for level in &mut levels {
        level.sort_by_key(|&v| order_key(graph, v));
    }
    let mut colored = vec![false; n];
    let mut giss = Vec::new();
    for i in (1..=u_n).rev() {
        loop {
            levels[i].retain(|&v| !colored[v]);
            let Some(&v) = levels[i].first() else { break };
            let lower: Vec<usize> = if growth == Growth::FillOnJoin {
                levels[1..i].iter().rev().flatten().copied().filter(|&w| !colored[w]).collect()
            } else {
                Vec::new()
            };
            let (gis, _) = gis_function(graph, d, &levels[i], &lower, v, i, growth);
            if gis.is_empty() {
                levels[i].remove(0);
                let key = order_key(graph, v);
                let below = &mut levels[i - 1];
                let at = below.partition_point(|&w| order_key(graph, w) < key);
                below.insert(at, v);
            } else {
                for &w in &gis {
                    colored[w] = true;
                }
                giss.push(gis);
            }
        }
    }
    for level in &mut levels {
        level.retain(|&v| !colored[v]);
    }
    debug_assert!(levels.iter().all(Vec::is_empty));
    Coloring::new(n, giss).expect("hierarchical coloring covers every vertex exactly once")
}

/// Uncoded coloring (CA-HgC₁): one color per distinct packet identity.
pub fn ca_hgc1(graph: &ConflictGraph) -> Coloring {
    let mut order: Vec<usize> = (0..graph.len()).collect();
    order.sort_by_key(|&v| graph.vertex(v).order_key());
    let mut giss: Vec<Vec<usize>> = Vec::new();
    for v in order {
        match giss.last_mut() {
            Some(last) if graph.vertex(last[0]).packet == graph.vertex(v).packet => last.push(v),
            _ => giss.push(vec![v]),
        }
    }
    Coloring::new(graph.len(), giss).expect("packet classes partition the vertex set")
}

/// The better of the two colorings; ties go to the hierarchical one.
pub fn ca_hgc(graph: &ConflictGraph, d: &[usize], growth: Growth) -> Coloring {
    let hier = ca_hgc2(graph, d, growth);
    let naive = ca_hgc1(graph);
    if naive.len() < hier.len() {
        naive
    } else {
        hier
    }
}
