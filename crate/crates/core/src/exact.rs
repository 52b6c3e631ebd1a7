//! Exact channel-aware chromatic number for small conflict graphs.
//!
//! Valid GISs are closed under taking subsets, so a minimum cover is a
//! minimum partition. The search is a dynamic program over vertex subsets:
//! the lowest uncovered vertex is always placed first, and each subset's
//! optimum is memoized. Cost is `3^|V|`, hence the size guard.

use rand::Rng;

use crate::cache::{rap_place, CachingDistribution};
use crate::coloring::Coloring;
use crate::error::{Error, Result};
use crate::graph::ConflictGraph;
use crate::model::RequestVector;
use crate::schedule::{schedule, ScheduleMode};

pub const EXACT_MAX_VERTICES: usize = 16;

/// Minimum number of GISs covering the graph under the `s_u <= d_u` caps,
/// with one optimal coloring.
pub fn ca_cic_exact(graph: &ConflictGraph, d: &[usize]) -> Result<(usize, Coloring)> {
    let n = graph.len();
    if n > EXACT_MAX_VERTICES {
        return Err(Error::Refused(format!("exact coloring is limited to {EXACT_MAX_VERTICES} vertices, got {n}")));
    }
    if d.len() != graph.receivers() {
        return Err(Error::config("one description count per receiver required"));
    }
    let full = (1usize << n) - 1;
    let mut cross = vec![0usize; n];
    let mut cluster = vec![0usize; graph.receivers()];
    for v in 0..n {
        let u = graph.vertex(v).receiver;
        cluster[u] |= 1 << v;
        for w in graph.neighbors(v).iter() {
            if graph.vertex(w).receiver != u {
                cross[v] |= 1 << w;
            }
        }
    }
    let mut valid = vec![false; full + 1];
    valid[0] = true;
    for s in 1..=full {
        let low = s.trailing_zeros() as usize;
        let rest = s & (s - 1);
        let u = graph.vertex(low).receiver;
        valid[s] = valid[rest] && cross[low] & rest == 0 && (s & cluster[u]).count_ones() as usize <= d[u];
    }
    let mut best = vec![u8::MAX; full + 1];
    let mut pick = vec![0usize; full + 1];
    best[0] = 0;
    for mask in 1..=full {
        let vbit = mask & mask.wrapping_neg();
        let rest = mask ^ vbit;
        let mut sub = rest;
        loop {
            let s = sub | vbit;
            if valid[s] {
                let cand = best[mask ^ s].saturating_add(1);
                if cand < best[mask] {
                    best[mask] = cand;
                    pick[mask] = s;
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }
    if n > 0 && best[full] == u8::MAX {
        return Err(Error::contract("a cluster exceeds its cap, so no valid cover exists"));
    }
    let mut giss = Vec::new();
    let mut mask = full;
    while mask != 0 {
        let s = pick[mask];
        giss.push((0..n).filter(|v| s >> v & 1 == 1).collect());
        mask ^= s;
    }
    Ok((best[full] as usize, Coloring::new(n, giss)?))
}

/// A random conflict graph built from real cache placement and scheduling,
/// with at most `max_vertices` vertices. Used for oracle comparisons.
pub fn random_instance<R: Rng + ?Sized>(
    rng: &mut R,
    max_receivers: usize,
    max_files: usize,
    max_descriptions: usize,
    max_vertices: usize,
) -> Result<(ConflictGraph, Vec<usize>)> {
    loop {
        let u_n = rng.gen_range(1..=max_receivers);
        let m = rng.gen_range(1..=max_files);
        let dn = rng.gen_range(1..=max_descriptions);
        let cache_files = rng.gen_range(0..=m * dn) as f64 / dn as f64;
        let columns: Vec<Vec<f64>> = (0..u_n)
            .map(|_| {
                let w: Vec<f64> = (0..m).map(|_| rng.gen::<f64>()).collect();
                let p = crate::cache::proportional_distribution(&normalize(&w), cache_files)?;
                Ok(p)
            })
            .collect::<Result<_>>()?;
        let dist = CachingDistribution::new(columns, vec![cache_files; u_n])?;
        let cache = rap_place(&dist, dn, rng)?;
        let requests = RequestVector((0..u_n).map(|_| rng.gen_range(0..m)).collect());
        let eta: Vec<f64> = (0..u_n).map(|_| [0.25, 0.5, 0.75, 1.0][rng.gen_range(0..4)]).collect();
        let slot = rng.gen_range(1..=2 * dn) as u64;
        let s = schedule(&cache, &requests, &eta, 1.0, slot, 1, ScheduleMode::PerRealization)?;
        let graph = ConflictGraph::build(&cache, &s.scheduled)?;
        if graph.len() <= max_vertices {
            return Ok((graph, s.d));
        }
    }
}

fn normalize(w: &[f64]) -> Vec<f64> {
    let total: f64 = w.iter().sum();
    w.iter().map(|x| x / total).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coloring::{ca_hgc, ca_hgc1, ca_hgc2, Growth};
    use crate::graph::fixtures::example_graph;
    use crate::graph::{PacketId, Vertex};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn worked_example_needs_two() {
        let g = example_graph();
        let (chi, c) = ca_cic_exact(&g, &[2, 1, 1]).unwrap();
        assert_eq!(chi, 2);
        c.validate(&g, &[2, 1, 1]).unwrap();
    }

    #[test]
    fn single_cluster_is_one_color() {
        let verts: Vec<Vertex> =
            (0..4).map(|i| Vertex { packet: PacketId { file: 0, packet: i }, receiver: 0 }).collect();
        let edges: Vec<(usize, usize)> = (0..4).flat_map(|a| (a + 1..4).map(move |b| (a, b))).collect();
        let g = ConflictGraph::from_parts(1, verts, &edges, vec![vec![]; 4]).unwrap();
        assert_eq!(ca_cic_exact(&g, &[4]).unwrap().0, 1);
        assert_eq!(ca_cic_exact(&g, &[2]).unwrap().0, 2);
    }

    #[test]
    fn refuses_large_graphs() {
        let verts: Vec<Vertex> =
            (0..17).map(|i| Vertex { packet: PacketId { file: 0, packet: i }, receiver: i as usize }).collect();
        let g = ConflictGraph::from_parts(17, verts, &[], vec![vec![]; 17]).unwrap();
        assert!(matches!(ca_cic_exact(&g, &[1; 17]), Err(Error::Refused(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn oracle_sandwich(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (g, d) = random_instance(&mut rng, 4, 4, 4, 8).unwrap();
            let (chi, best) = ca_cic_exact(&g, &d).unwrap();
            best.validate(&g, &d).unwrap();
            for growth in [Growth::Greedy, Growth::FillOnJoin] {
                let h2 = ca_hgc2(&g, &d, growth);
                h2.validate(&g, &d).unwrap();
                prop_assert!(chi <= h2.len());
                let h = ca_hgc(&g, &d, growth);
                prop_assert!(h.len() <= ca_hgc1(&g).len());
            }
            prop_assert!(chi <= ca_hgc1(&g).len());
        }
    }
}
