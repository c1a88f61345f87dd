//! Lower level: route and spectrum assignment for a fixed node placement.
//!
//! Given hosts for every vnode, each vlink is embedded in turn: a working
//! copy of the substrate graph is pruned to the links that can still carry
//! the request's slot demand, the hop-shortest path between the two hosts
//! is taken, and a contiguous slot block aligned across the whole path is
//! chosen to strand as few fragment slots as possible (exact fits win).
//! Each chosen path's links are then removed from the working copy, so no
//! two vlinks of one request share a physical link. Any failure rejects the
//! whole request; the real substrate is never touched here.
//!
//! Vlinks are processed in descending host-distance order (ties by vlink
//! id): the longest routes go first while the working copy is still rich.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fragcost::FragConfig;
use crate::substrate::{FreeRun, NodeId, SubstrateNetwork, SubstratePath};
use crate::vnr::VirtualRequest;

/// One embedded vlink: the physical path and the slot block, the same block
/// index range on every traversed link.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RouteAssignment {
    pub vlink: usize,
    pub path: SubstratePath,
    pub slot_start: usize,
    pub slot_end: usize,
}

impl RouteAssignment {
    pub fn slot_width(&self) -> usize {
        self.slot_end - self.slot_start + 1
    }
}

/// Why a vlink could not be embedded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum LinkEmbedError {
    #[error("no feasible path for vlink {vlink}")]
    NoPath { vlink: usize },
    #[error("no aligned slot block for vlink {vlink}")]
    NoSlots { vlink: usize },
}

/// A deletable view of the substrate graph used while embedding one
/// request. Per node, `(neighbor, link)` pairs sorted by neighbor id.
#[derive(Debug, Clone)]
pub struct WorkingGraph {
    adj: Vec<Vec<(NodeId, usize)>>,
}

impl WorkingGraph {
    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, node: NodeId) -> &[(NodeId, usize)] {
        &self.adj[node]
    }

    pub fn contains_link(&self, link: usize) -> bool {
        self.adj.iter().any(|inc| inc.iter().any(|&(_, l)| l == link))
    }

    /// Drops a link from both endpoints' neighbor lists.
    pub fn remove_link(&mut self, net: &SubstrateNetwork, link: usize) {
        for end in [net.links[link].a, net.links[link].b] {
            self.adj[end].retain(|&(_, l)| l != link);
        }
    }
}

/// Copy of the substrate graph keeping only links whose widest free run can
/// carry `demand_slots`.
pub fn prune_working_graph(net: &SubstrateNetwork, demand_slots: u32) -> WorkingGraph {
    let mut adj = vec![Vec::new(); net.node_count()];
    for link in &net.links {
        if link.largest_free_run() >= demand_slots as usize {
            adj[link.a].push((link.b, link.id));
            adj[link.b].push((link.a, link.id));
        }
    }
    for inc in &mut adj {
        inc.sort_unstable();
    }
    WorkingGraph { adj }
}

/// Hop distances from `src` to every node; `None` where unreachable.
pub fn bfs_distances(wg: &WorkingGraph, src: NodeId) -> Vec<Option<u32>> {
    let mut dist = vec![None; wg.node_count()];
    dist[src] = Some(0);
    let mut queue = std::collections::VecDeque::from([src]);
    while let Some(n) = queue.pop_front() {
        let d = dist[n].unwrap();
        for &(m, _) in wg.neighbors(n) {
            if dist[m].is_none() {
                dist[m] = Some(d + 1);
                queue.push_back(m);
            }
        }
    }
    dist
}

pub fn hop_distance(wg: &WorkingGraph, src: NodeId, dst: NodeId) -> Option<u32> {
    bfs_distances(wg, src)[dst]
}

/// Minimum-hop path from `src` to `dst`, or `None` if disconnected. Among
/// equal-hop paths the node sequence is made deterministic by always
/// stepping to the smallest-id neighbor that still lies on a shortest path.
pub fn shortest_path(wg: &WorkingGraph, src: NodeId, dst: NodeId) -> Option<SubstratePath> {
    debug_assert_ne!(src, dst, "path endpoints must differ");
    let to_dst = bfs_distances(wg, dst);
    to_dst[src]?;
    let mut nodes = vec![src];
    let mut links = Vec::new();
    let mut cur = src;
    while cur != dst {
        let d = to_dst[cur].unwrap();
        // Neighbor lists are sorted by id, so the first qualifying entry is
        // the smallest-id continuation.
        let &(next, link) = wg
            .neighbors(cur)
            .iter()
            .find(|&&(m, _)| to_dst[m] == Some(d - 1))
            .expect("a shortest path always has a descending neighbor");
        nodes.push(next);
        links.push(link);
        cur = next;
    }
    Some(SubstratePath { nodes, links })
}

/// A chosen slot block plus its billable spectrum units over the path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct FitChoice {
    start: usize,
    end: usize,
    /// Σ over path links of (demand + stranded fragment slots).
    units: u64,
}

/// Fragment slots and host-run leftover of placing `[start, start+len)`
/// inside the free run `run`.
fn split_waste(run: &FreeRun, start: usize, len: usize, cfg: &FragConfig) -> (u64, u64) {
    let left = start - run.start;
    let right = run.end - (start + len - 1);
    let xi = [left, right]
        .iter()
        .filter(|&&l| cfg.is_fragment_len(l))
        .sum::<usize>() as u64;
    (xi, (left + right) as u64)
}

fn exact_fit_choice(
    net: &SubstrateNetwork,
    path: &SubstratePath,
    demand: u32,
    cfg: &FragConfig,
) -> Option<FitChoice> {
    debug_assert!(demand >= 1);
    let demand = demand as usize;
    let per_link_runs: Vec<Vec<FreeRun>> = path
        .links
        .iter()
        .map(|&lid| net.links[lid].free_runs())
        .collect();
    let host_run = |link: usize, slot: usize| {
        per_link_runs[link]
            .iter()
            .find(|r| r.contains(slot))
            .expect("aligned slot lies in some free run of every link")
    };

    // (ξ total, leftover total, start): minimized lexicographically, and
    // ascending start order makes strict comparison keep the lowest start
    // among full ties.
    let mut best: Option<(u64, u64, usize)> = None;
    for run in net.path_free_runs(path) {
        if run.len() < demand {
            continue;
        }
        for start in run.start..=run.end + 1 - demand {
            let mut xi_total = 0u64;
            let mut leftover_total = 0u64;
            for link in 0..path.links.len() {
                let (xi, leftover) = split_waste(host_run(link, start), start, demand, cfg);
                xi_total += xi;
                leftover_total += leftover;
            }
            if best.map_or(true, |(xi, lo, _)| (xi_total, leftover_total) < (xi, lo)) {
                best = Some((xi_total, leftover_total, start));
            }
        }
    }
    best.map(|(xi_total, _, start)| FitChoice {
        start,
        end: start + demand - 1,
        units: path.links.len() as u64 * demand as u64 + xi_total,
    })
}

/// The aligned slot block for `demand` slots on `path` that strands the
/// fewest fragment slots, with ties broken by smaller total leftover in the
/// host runs, then by the lowest start index. `None` when no aligned free
/// block is wide enough.
pub fn exact_fit_slots(
    net: &SubstrateNetwork,
    path: &SubstratePath,
    demand: u32,
    cfg: &FragConfig,
) -> Option<(usize, usize)> {
    exact_fit_choice(net, path, demand, cfg).map(|c| (c.start, c.end))
}

/// Vlink indices in embedding order: descending host distance on `base`
/// (unreachable pairs first, so they fail fast), ties by vlink id.
pub fn vlink_order(base: &WorkingGraph, vnr: &VirtualRequest, placements: &[NodeId]) -> Vec<usize> {
    let mut order: Vec<(usize, u64)> = vnr
        .vlinks
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| {
            let dist = if placements[a] == placements[b] {
                0
            } else {
                hop_distance(base, placements[a], placements[b])
                    .map_or(u64::MAX, |d| d as u64)
            };
            (i, dist)
        })
        .collect();
    order.sort_by(|x, y| y.1.cmp(&x.1).then(x.0.cmp(&y.0)));
    order.into_iter().map(|(i, _)| i).collect()
}

/// [`embed_links`] starting from an already pruned working graph, also
/// returning the billable spectrum units (allocated + stranded slots) of
/// the produced routes. The pruned graph depends only on the substrate
/// state and the demand, so callers evaluating many placements against one
/// substrate snapshot can prune once and reuse it.
pub fn embed_links_from(
    base: &WorkingGraph,
    net: &SubstrateNetwork,
    vnr: &VirtualRequest,
    placements: &[NodeId],
    cfg: &FragConfig,
) -> Result<(Vec<RouteAssignment>, u64), LinkEmbedError> {
    debug_assert_eq!(placements.len(), vnr.vnodes.len());
    let mut wg = base.clone();
    let mut routes = Vec::with_capacity(vnr.vlinks.len());
    let mut units = 0u64;
    for vlink in vlink_order(base, vnr, placements) {
        let (a, b) = vnr.vlinks[vlink];
        let (u, v) = (placements[a], placements[b]);
        if u == v {
            return Err(LinkEmbedError::NoPath { vlink });
        }
        let path = shortest_path(&wg, u, v).ok_or(LinkEmbedError::NoPath { vlink })?;
        let fit = exact_fit_choice(net, &path, vnr.slot_demand, cfg)
            .ok_or(LinkEmbedError::NoSlots { vlink })?;
        for &lid in &path.links {
            wg.remove_link(net, lid);
        }
        units += fit.units;
        routes.push(RouteAssignment {
            vlink,
            path,
            slot_start: fit.start,
            slot_end: fit.end,
        });
    }
    Ok((routes, units))
}

/// Embeds every vlink of `vnr` under the placement `placements`, or rejects
/// the request. The substrate itself is read-only here; committing an
/// accepted solution is the caller's move.
pub fn embed_links(
    net: &SubstrateNetwork,
    vnr: &VirtualRequest,
    placements: &[NodeId],
    cfg: &FragConfig,
) -> Result<Vec<RouteAssignment>, LinkEmbedError> {
    let base = prune_working_graph(net, vnr.slot_demand);
    embed_links_from(&base, net, vnr, placements, cfg).map(|(routes, _)| routes)
}
