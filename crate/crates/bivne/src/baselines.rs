//! Reference embedders the bilevel search is measured against.
//!
//! All three follow the same frame — rank the vnodes, greedily pick a host
//! per vnode, route vlinks longest-first with first-fit slots, reject on
//! any failure — and differ only in how hosts are scored:
//!
//! - greedy: most spare node capacity wins;
//! - load-ranked: spare node capacity weighted by the free spectrum on the
//!   node's attached links, so well-connected nodes win;
//! - proximity-ranked: spare capacity discounted by the mean hop distance
//!   to the hosts already chosen, with routing over the K shortest paths
//!   instead of just one.
//!
//! None of them look at fragmentation or imbalance, and none consume
//! randomness: given a substrate state and a request they are pure. Each
//! implements the one-line characterization the comparison calls for, not
//! a full reconstruction of its source; the scoring is deliberately small
//! and isolated so alternates can be swapped in.

use std::cmp::Reverse;
use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::acs_upper::{EmbeddingSolution, RejectReason};
use crate::fragcost::{fitness_f64, FragConfig, PriceTable};
use crate::lower_solver::{
    hop_distance, prune_working_graph, shortest_path, vlink_order, LinkEmbedError,
    RouteAssignment, WorkingGraph,
};
use crate::substrate::{NodeId, SubstrateNetwork, SubstratePath};
use crate::vnr::{candidate_nodes, VirtualRequest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaselineConfig {
    /// Paths tried per vlink by the proximity-ranked embedder.
    pub k_paths: usize,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig { k_paths: 3 }
    }
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.k_paths == 0 {
            return Err("k_paths must be at least 1".into());
        }
        Ok(())
    }
}

/// Lowest-index aligned slot block of `demand` slots on `path`.
pub fn first_fit_slots(
    net: &SubstrateNetwork,
    path: &SubstratePath,
    demand: u32,
) -> Option<(usize, usize)> {
    net.path_free_runs(path)
        .iter()
        .find(|r| r.len() >= demand as usize)
        .map(|r| (r.start, r.start + demand as usize - 1))
}

/// Hop distances from every node to `dst`, skipping banned nodes and links.
fn constrained_distances(
    wg: &WorkingGraph,
    dst: NodeId,
    banned_nodes: &[bool],
    banned_links: &HashSet<usize>,
) -> Vec<Option<u32>> {
    let mut dist: Vec<Option<u32>> = vec![None; wg.node_count()];
    dist[dst] = Some(0);
    let mut queue = std::collections::VecDeque::from([dst]);
    while let Some(cur) = queue.pop_front() {
        let d = dist[cur].unwrap();
        for &(m, l) in wg.neighbors(cur) {
            if banned_nodes[m] || banned_links.contains(&l) || dist[m].is_some() {
                continue;
            }
            dist[m] = Some(d + 1);
            queue.push_back(m);
        }
    }
    dist
}

/// The `k` loop-free paths from `src` to `dst` shortest in hops, ordered by
/// (hop count, node sequence) — the first `k` entries of the exhaustive
/// enumeration of all simple paths sorted that way. Enumerated by spurring:
/// each accepted path is re-derived at every prefix with the prefix's known
/// continuations banned, which keeps the candidate pool polynomial instead
/// of flooding memory with partial paths on dense graphs.
pub fn k_shortest_paths(
    wg: &WorkingGraph,
    src: NodeId,
    dst: NodeId,
    k: usize,
) -> Vec<SubstratePath> {
    if k == 0 {
        return Vec::new();
    }
    let Some(first) = shortest_path(wg, src, dst) else {
        return Vec::new();
    };
    let mut accepted = vec![first];
    let mut pool: BTreeSet<(usize, Vec<NodeId>, Vec<usize>)> = BTreeSet::new();
    while accepted.len() < k {
        let prev = accepted.last().unwrap().clone();
        for i in 0..prev.nodes.len() - 1 {
            let spur = prev.nodes[i];
            // The spur path may not re-enter the prefix, and may not leave
            // the spur node over a link some accepted path with the same
            // prefix already takes — that forces a genuinely new suffix.
            let mut banned_nodes = vec![false; wg.node_count()];
            for &n in &prev.nodes[..i] {
                banned_nodes[n] = true;
            }
            let banned_links: HashSet<usize> = accepted
                .iter()
                .filter(|p| p.nodes.len() > i + 1 && p.nodes[..=i] == prev.nodes[..=i])
                .map(|p| p.links[i])
                .collect();
            let dist = constrained_distances(wg, dst, &banned_nodes, &banned_links);
            let Some(mut d) = dist[spur] else { continue };
            // Greedy descent toward dst, lowest node id first: the
            // lexicographically least shortest suffix, as in shortest_path.
            let mut nodes = prev.nodes[..=i].to_vec();
            let mut links = prev.links[..i].to_vec();
            let mut cur = spur;
            while d > 0 {
                let &(next, link) = wg
                    .neighbors(cur)
                    .iter()
                    .find(|&&(m, l)| {
                        !banned_nodes[m] && !banned_links.contains(&l) && dist[m] == Some(d - 1)
                    })
                    .expect("a reachable spur always has a descending neighbor");
                nodes.push(next);
                links.push(link);
                cur = next;
                d -= 1;
            }
            pool.insert((links.len(), nodes, links));
        }
        let Some((_, nodes, links)) = pool.pop_first() else {
            break;
        };
        accepted.push(SubstratePath { nodes, links });
    }
    accepted
}

/// Routes every vlink over its `k` shortest candidate paths with first-fit
/// slots, deleting each chosen path's links from the working copy.
fn route_first_fit(
    net: &SubstrateNetwork,
    vnr: &VirtualRequest,
    placements: &[NodeId],
    k: usize,
) -> Result<Vec<RouteAssignment>, LinkEmbedError> {
    let base = prune_working_graph(net, vnr.slot_demand);
    let mut wg = base.clone();
    let mut routes = Vec::with_capacity(vnr.vlinks.len());
    for vlink in vlink_order(&base, vnr, placements) {
        let (a, b) = vnr.vlinks[vlink];
        let (u, v) = (placements[a], placements[b]);
        if u == v {
            return Err(LinkEmbedError::NoPath { vlink });
        }
        let candidates = if k == 1 {
            shortest_path(&wg, u, v).into_iter().collect()
        } else {
            k_shortest_paths(&wg, u, v, k)
        };
        if candidates.is_empty() {
            return Err(LinkEmbedError::NoPath { vlink });
        }
        let Some((path, (s, e))) = candidates
            .into_iter()
            .find_map(|p| first_fit_slots(net, &p, vnr.slot_demand).map(|fit| (p, fit)))
        else {
            return Err(LinkEmbedError::NoSlots { vlink });
        };
        for &lid in &path.links {
            wg.remove_link(net, lid);
        }
        routes.push(RouteAssignment {
            vlink,
            path,
            slot_start: s,
            slot_end: e,
        });
    }
    Ok(routes)
}

/// Vnode indices in descending total demand, ties by index.
fn demand_order(vnr: &VirtualRequest) -> Vec<usize> {
    let mut order: Vec<usize> = (0..vnr.vnodes.len()).collect();
    order.sort_by_key(|&i| {
        let v = &vnr.vnodes[i];
        (Reverse(v.comp_demand as u64 + v.chan_demand as u64), i)
    });
    order
}

/// Picks hosts vnode by vnode, scoring with `score`; higher wins, ties to
/// the lowest host id. Hosts already used by this request are excluded.
fn place_by_score<S, F>(
    net: &SubstrateNetwork,
    vnr: &VirtualRequest,
    order: &[usize],
    mut score: F,
) -> Result<Vec<NodeId>, RejectReason>
where
    S: PartialOrd,
    F: FnMut(NodeId, &[Option<NodeId>]) -> S,
{
    let mut placements: Vec<Option<NodeId>> = vec![None; vnr.vnodes.len()];
    let mut taken = vec![false; net.node_count()];
    for &i in order {
        let mut best: Option<(S, NodeId)> = None;
        for host in candidate_nodes(net, &vnr.vnodes[i]) {
            if taken[host] {
                continue;
            }
            let s = score(host, &placements);
            if best.as_ref().map_or(true, |(b, _)| s > *b) {
                best = Some((s, host));
            }
        }
        let Some((_, host)) = best else {
            return Err(RejectReason::NoHost { vnode: i });
        };
        placements[i] = Some(host);
        taken[host] = true;
    }
    Ok(placements.into_iter().map(|p| p.unwrap()).collect())
}

fn finish(
    net: &SubstrateNetwork,
    vnr: &VirtualRequest,
    placed: Result<Vec<NodeId>, RejectReason>,
    routed: impl FnOnce(&[NodeId]) -> Result<Vec<RouteAssignment>, LinkEmbedError>,
    prices: &PriceTable,
    cfg: &FragConfig,
) -> EmbeddingSolution {
    let placements = match placed {
        Ok(p) => p,
        Err(reason) => return EmbeddingSolution::rejected(vnr.id, reason),
    };
    let routes = match routed(&placements) {
        Ok(r) => r,
        Err(e) => return EmbeddingSolution::rejected(vnr.id, e.into()),
    };
    let fitness = fitness_f64(net, vnr, &placements, &routes, prices, cfg)
        .expect("constructed solutions satisfy the cost preconditions");
    EmbeddingSolution {
        vnr_id: vnr.id,
        accepted: true,
        placements,
        routes,
        fitness: Some(fitness),
        reject_reason: None,
    }
}

/// Greediest capacity match: biggest vnodes first onto the hosts with the
/// most spare capacity, single shortest-path routing, first-fit slots.
pub fn greedy_sp_ff(
    net: &SubstrateNetwork,
    vnr: &VirtualRequest,
    prices: &PriceTable,
    cfg: &FragConfig,
) -> EmbeddingSolution {
    let placed = place_by_score(net, vnr, &demand_order(vnr), |host, _| {
        let n = &net.nodes[host];
        n.comp_free() as u64 + n.chan_free() as u64
    });
    finish(net, vnr, placed, |x| route_first_fit(net, vnr, x, 1), prices, cfg)
}

/// Local-resource-capacity ranking: spare node capacity times the free
/// slots on attached links decides hosts; vnodes are ranked by their demand
/// times their attached vlink demand.
pub fn lrc_sp_ff(
    net: &SubstrateNetwork,
    vnr: &VirtualRequest,
    prices: &PriceTable,
    cfg: &FragConfig,
) -> EmbeddingSolution {
    let mut order: Vec<usize> = (0..vnr.vnodes.len()).collect();
    order.sort_by_key(|&i| {
        let v = &vnr.vnodes[i];
        let demand = v.comp_demand as u128 + v.chan_demand as u128;
        let attached = vnr.degree(i) as u128 * vnr.slot_demand as u128;
        (Reverse(demand * attached), i)
    });
    let placed = place_by_score(net, vnr, &order, |host, _| {
        let n = &net.nodes[host];
        let spare = n.comp_free() as u128 + n.chan_free() as u128;
        let free_slots: u128 = net
            .incident_links(host)
            .iter()
            .map(|&l| net.links[l].free_slot_count() as u128)
            .sum();
        spare * free_slots
    });
    finish(net, vnr, placed, |x| route_first_fit(net, vnr, x, 1), prices, cfg)
}

/// Proximity-ranked placement with K-shortest-path routing: spare capacity
/// divided by (1 + mean hop distance to the already-placed hosts), routes
/// tried over the K hop-shortest loop-free paths, first fit wins.
pub fn pl_ksp_ff(
    net: &SubstrateNetwork,
    vnr: &VirtualRequest,
    prices: &PriceTable,
    cfg: &FragConfig,
    bcfg: &BaselineConfig,
) -> EmbeddingSolution {
    let base = prune_working_graph(net, vnr.slot_demand);
    let placed = place_by_score(net, vnr, &demand_order(vnr), |host, placements| {
        let n = &net.nodes[host];
        let spare = (n.comp_free() as u64 + n.chan_free() as u64) as f64;
        let placed_hosts: Vec<NodeId> = placements.iter().filter_map(|&p| p).collect();
        if placed_hosts.is_empty() {
            return spare;
        }
        let total: f64 = placed_hosts
            .iter()
            .map(|&other| {
                // An unreachable pair is worse than any real distance.
                hop_distance(&base, host, other)
                    .map_or(net.node_count() as f64, |d| d as f64)
            })
            .sum();
        spare / (1.0 + total / placed_hosts.len() as f64)
    });
    finish(
        net,
        vnr,
        placed,
        |x| route_first_fit(net, vnr, x, bcfg.k_paths),
        prices,
        cfg,
    )
}
