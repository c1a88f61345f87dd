//! Physical network model: MEC nodes, elastic optical links, spectrum state.
//!
//! Nodes carry computing and channel capacities plus planar coordinates;
//! links carry a frequency-slot occupancy bitmap. The network owns both and
//! exposes the spectrum queries (free runs, aligned runs along a path,
//! demand-feasible degree) that the embedding layers build on. Committing an
//! accepted embedding mutates the network through [`SubstrateNetwork::allocate`],
//! which re-validates the solution against the full constraint set before
//! touching any state; [`SubstrateNetwork::release`] restores it exactly.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::acs_upper::EmbeddingSolution;
use crate::harness::validate::{validate, SolutionDump};
use crate::vnr::VirtualRequest;

pub type NodeId = usize;
pub type LinkId = usize;

/// Straight-line distance between two planar points.
pub fn euclidean(a: (f64, f64), b: (f64, f64)) -> f64 {
    let dx = a.0 - b.0;
    let dy = a.1 - b.1;
    (dx * dx + dy * dy).sqrt()
}

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parsing {path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("node ids must be 0..n in order, found {found} at position {position}")]
    BadNodeId { found: usize, position: usize },
    #[error("link ids must be 0..m in order, found {found} at position {position}")]
    BadLinkId { found: usize, position: usize },
    #[error("link {link} references unknown node {node}")]
    UnknownEndpoint { link: LinkId, node: usize },
    #[error("link {link} is a self-loop on node {node}")]
    SelfLoop { link: LinkId, node: NodeId },
    #[error("links {first} and {second} join the same node pair")]
    DuplicateLink { first: LinkId, second: LinkId },
    #[error("link {link} has no frequency slots")]
    EmptySpectrum { link: LinkId },
    #[error("node {node} usage exceeds its capacity")]
    OverCapacity { node: NodeId },
    #[error("topology is not connected (node {node} unreachable from node 0)")]
    Disconnected { node: NodeId },
    #[error("{0}")]
    BadParams(String),
}

#[derive(Debug, Error)]
pub enum SubstrateError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("unknown link {0}")]
    UnknownLink(LinkId),
    #[error("nodes {a} and {b} are not adjacent")]
    NotAdjacent { a: NodeId, b: NodeId },
    #[error("path must visit at least two distinct nodes")]
    DegeneratePath,
    #[error("path revisits node {0}")]
    RepeatedNode(NodeId),
    #[error("embedding violates {count} constraint(s); first: {first}")]
    Invalid { count: usize, first: String },
    #[error("release does not match allocated state: {0}")]
    ReleaseMismatch(String),
}

/// An MEC node: planar position plus computing and channel pools.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubstrateNode {
    pub id: NodeId,
    pub x: f64,
    pub y: f64,
    /// Computing capacity (CPU units).
    pub comp_cap: u32,
    /// Channel capacity (bandwidth units toward served users).
    pub chan_cap: u32,
    /// Computing units currently committed to embedded requests.
    pub comp_used: u32,
    /// Channel units currently committed to embedded requests.
    pub chan_used: u32,
}

impl SubstrateNode {
    pub fn comp_free(&self) -> u32 {
        self.comp_cap - self.comp_used
    }

    pub fn chan_free(&self) -> u32 {
        self.chan_cap - self.chan_used
    }

    pub fn position(&self) -> (f64, f64) {
        (self.x, self.y)
    }
}

/// A maximal run of contiguous free frequency slots on one link.
///
/// `start..=end` are all free, and the slots just outside the run (where
/// they exist) are occupied. Runs of length one are still reported; they can
/// never host a demand because every assignment spans at least two slots,
/// which is what [`FreeRun::is_macsb`] flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreeRun {
    pub start: usize,
    pub end: usize,
}

impl FreeRun {
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Whether the run is wide enough to carry any assignment at all.
    pub fn is_macsb(&self) -> bool {
        self.len() >= 2
    }

    pub fn contains(&self, slot: usize) -> bool {
        self.start <= slot && slot <= self.end
    }
}

/// Maximal free runs of an occupancy bitmap, in ascending slot order.
pub fn free_runs_of(occupancy: &[bool]) -> Vec<FreeRun> {
    let mut runs = Vec::new();
    let mut start = None;
    for (i, &occ) in occupancy.iter().enumerate() {
        match (occ, start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                runs.push(FreeRun { start: s, end: i - 1 });
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push(FreeRun {
            start: s,
            end: occupancy.len() - 1,
        });
    }
    runs
}

/// An elastic optical link between two substrate nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpticalLink {
    pub id: LinkId,
    pub a: NodeId,
    pub b: NodeId,
    /// Per-slot occupancy; `true` means the slot is in use.
    pub occupancy: Vec<bool>,
}

impl OpticalLink {
    pub fn slot_count(&self) -> usize {
        self.occupancy.len()
    }

    pub fn free_slot_count(&self) -> usize {
        self.occupancy.iter().filter(|&&o| !o).count()
    }

    pub fn free_runs(&self) -> Vec<FreeRun> {
        free_runs_of(&self.occupancy)
    }

    /// Length of the widest free run, 0 when the link is full.
    pub fn largest_free_run(&self) -> usize {
        self.free_runs().iter().map(FreeRun::len).max().unwrap_or(0)
    }

    /// The other endpoint of the link.
    pub fn opposite(&self, node: NodeId) -> NodeId {
        if node == self.a {
            self.b
        } else {
            self.a
        }
    }

    /// Whether `start..start+len` is entirely free.
    pub fn block_free(&self, start: usize, len: usize) -> bool {
        start + len <= self.slot_count() && self.occupancy[start..start + len].iter().all(|&o| !o)
    }
}

/// A loop-free walk through the substrate: `nodes[i]`–`nodes[i+1]` is
/// traversed over `links[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubstratePath {
    pub nodes: Vec<NodeId>,
    pub links: Vec<LinkId>,
}

impl SubstratePath {
    pub fn hops(&self) -> usize {
        self.links.len()
    }

    pub fn src(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn dst(&self) -> NodeId {
        *self.nodes.last().unwrap()
    }
}

/// Parameters for random substrate generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomTopologyParams {
    pub nodes: usize,
    pub links: usize,
    /// Inclusive range for computing capacity draws.
    pub comp_cap: (u32, u32),
    /// Inclusive range for channel capacity draws.
    pub chan_cap: (u32, u32),
    /// Inclusive range for per-link frequency slot counts.
    pub slots: (u32, u32),
    /// Side length of the square on which node coordinates are drawn.
    pub side: f64,
}

impl RandomTopologyParams {
    pub fn validate(&self) -> Result<(), TopologyError> {
        let n = self.nodes;
        if n == 0 {
            return Err(TopologyError::BadParams("nodes must be at least 1".into()));
        }
        let min_links = n.saturating_sub(1);
        let max_links = n * (n - 1) / 2;
        if self.links < min_links || self.links > max_links {
            return Err(TopologyError::BadParams(format!(
                "links must lie in [{min_links}, {max_links}] for {n} nodes, got {}",
                self.links
            )));
        }
        for (name, (lo, hi)) in [
            ("comp_cap", self.comp_cap),
            ("chan_cap", self.chan_cap),
            ("slots", self.slots),
        ] {
            if lo == 0 || lo > hi {
                return Err(TopologyError::BadParams(format!(
                    "{name} range ({lo}, {hi}) must satisfy 1 <= lo <= hi"
                )));
            }
        }
        if !(self.side > 0.0) {
            return Err(TopologyError::BadParams("side must be positive".into()));
        }
        Ok(())
    }
}

/// On-disk topology document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyDoc {
    pub nodes: Vec<NodeDoc>,
    pub links: Vec<LinkDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeDoc {
    pub id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub x: f64,
    pub y: f64,
    pub comp_cap: u32,
    pub chan_cap: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkDoc {
    pub id: usize,
    pub a: usize,
    pub b: usize,
    pub slots: u32,
}

/// The physical network: nodes, links, and their adjacency.
#[derive(Debug, Clone, PartialEq)]
pub struct SubstrateNetwork {
    pub nodes: Vec<SubstrateNode>,
    pub links: Vec<OpticalLink>,
    /// Per node, the incident link ids sorted by the opposite endpoint.
    adjacency: Vec<Vec<LinkId>>,
}

impl SubstrateNetwork {
    pub fn new(nodes: Vec<SubstrateNode>, links: Vec<OpticalLink>) -> Result<Self, TopologyError> {
        for (i, n) in nodes.iter().enumerate() {
            if n.id != i {
                return Err(TopologyError::BadNodeId {
                    found: n.id,
                    position: i,
                });
            }
            if n.comp_used > n.comp_cap || n.chan_used > n.chan_cap {
                return Err(TopologyError::OverCapacity { node: n.id });
            }
        }
        let mut seen: HashMap<(NodeId, NodeId), LinkId> = HashMap::new();
        for (i, l) in links.iter().enumerate() {
            if l.id != i {
                return Err(TopologyError::BadLinkId {
                    found: l.id,
                    position: i,
                });
            }
            for end in [l.a, l.b] {
                if end >= nodes.len() {
                    return Err(TopologyError::UnknownEndpoint { link: l.id, node: end });
                }
            }
            if l.a == l.b {
                return Err(TopologyError::SelfLoop { link: l.id, node: l.a });
            }
            if l.occupancy.is_empty() {
                return Err(TopologyError::EmptySpectrum { link: l.id });
            }
            let key = (l.a.min(l.b), l.a.max(l.b));
            if let Some(&first) = seen.get(&key) {
                return Err(TopologyError::DuplicateLink { first, second: l.id });
            }
            seen.insert(key, l.id);
        }
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for l in &links {
            adjacency[l.a].push(l.id);
            adjacency[l.b].push(l.id);
        }
        for (n, inc) in adjacency.iter_mut().enumerate() {
            inc.sort_by_key(|&lid| links[lid].opposite(n));
        }
        let net = SubstrateNetwork {
            nodes,
            links,
            adjacency,
        };
        if let Some(node) = net.unreachable_node() {
            return Err(TopologyError::Disconnected { node });
        }
        Ok(net)
    }

    fn unreachable_node(&self) -> Option<NodeId> {
        if self.nodes.len() <= 1 {
            return None;
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(n) = stack.pop() {
            for &lid in &self.adjacency[n] {
                let m = self.links[lid].opposite(n);
                if !seen[m] {
                    seen[m] = true;
                    stack.push(m);
                }
            }
        }
        seen.iter().position(|&s| !s)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    /// Incident link ids of `node`, sorted by the opposite endpoint id.
    pub fn incident_links(&self, node: NodeId) -> &[LinkId] {
        &self.adjacency[node]
    }

    /// Neighbor node ids of `node` in ascending order.
    pub fn neighbors(&self, node: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.adjacency[node].iter().map(move |&lid| self.links[lid].opposite(node))
    }

    pub fn link_between(&self, a: NodeId, b: NodeId) -> Option<LinkId> {
        self.adjacency
            .get(a)?
            .iter()
            .copied()
            .find(|&lid| self.links[lid].opposite(a) == b)
    }

    /// Builds a path from a node sequence, checking adjacency and loop-freedom.
    pub fn path_from_nodes(&self, nodes: Vec<NodeId>) -> Result<SubstratePath, SubstrateError> {
        if nodes.len() < 2 {
            return Err(SubstrateError::DegeneratePath);
        }
        let mut seen = vec![false; self.nodes.len()];
        for &n in &nodes {
            if n >= self.nodes.len() {
                return Err(SubstrateError::UnknownNode(n));
            }
            if seen[n] {
                return Err(SubstrateError::RepeatedNode(n));
            }
            seen[n] = true;
        }
        let mut links = Vec::with_capacity(nodes.len() - 1);
        for w in nodes.windows(2) {
            let lid = self
                .link_between(w[0], w[1])
                .ok_or(SubstrateError::NotAdjacent { a: w[0], b: w[1] })?;
            links.push(lid);
        }
        Ok(SubstratePath { nodes, links })
    }

    /// Free runs common to every link of `path`: the runs of the AND of the
    /// per-link free bitmaps. Only slot indices below the shortest link
    /// spectrum participate.
    pub fn path_free_runs(&self, path: &SubstratePath) -> Vec<FreeRun> {
        let width = path
            .links
            .iter()
            .map(|&lid| self.links[lid].slot_count())
            .min()
            .unwrap_or(0);
        let mut combined = vec![false; width];
        for (i, slot) in combined.iter_mut().enumerate() {
            *slot = path.links.iter().any(|&lid| self.links[lid].occupancy[i]);
        }
        free_runs_of(&combined)
    }

    /// Number of incident links that can still carry a `demand_slots`-wide
    /// assignment, i.e. whose widest free run is at least that wide.
    pub fn available_degree(&self, node: NodeId, demand_slots: u32) -> Result<usize, SubstrateError> {
        if node >= self.nodes.len() {
            return Err(SubstrateError::UnknownNode(node));
        }
        Ok(self.adjacency[node]
            .iter()
            .filter(|&&lid| self.links[lid].largest_free_run() >= demand_slots as usize)
            .count())
    }

    /// Commits an accepted embedding. The solution is validated against the
    /// full constraint set first; on any violation the network is left
    /// untouched and the offending constraints are reported.
    pub fn allocate(
        &mut self,
        vnr: &VirtualRequest,
        solution: &EmbeddingSolution,
    ) -> Result<(), SubstrateError> {
        let dump = SolutionDump::from_solution(vnr, solution);
        let violations = validate(self, vnr, &dump);
        if !violations.is_empty() {
            return Err(SubstrateError::Invalid {
                count: violations.len(),
                first: violations[0].to_string(),
            });
        }
        for (vn, &host) in vnr.vnodes.iter().zip(&solution.placements) {
            self.nodes[host].comp_used += vn.comp_demand;
            self.nodes[host].chan_used += vn.chan_demand;
        }
        for route in &solution.routes {
            for &lid in &route.path.links {
                for slot in route.slot_start..=route.slot_end {
                    self.links[lid].occupancy[slot] = true;
                }
            }
        }
        Ok(())
    }

    /// Reverses a prior [`SubstrateNetwork::allocate`] of the same solution.
    /// Checks that every released resource is actually held, so a mismatched
    /// release fails loudly instead of corrupting the books.
    pub fn release(
        &mut self,
        vnr: &VirtualRequest,
        solution: &EmbeddingSolution,
    ) -> Result<(), SubstrateError> {
        if solution.placements.len() != vnr.vnodes.len() {
            return Err(SubstrateError::ReleaseMismatch(
                "placement count differs from vnode count".into(),
            ));
        }
        for (vn, &host) in vnr.vnodes.iter().zip(&solution.placements) {
            let node = self
                .nodes
                .get(host)
                .ok_or(SubstrateError::UnknownNode(host))?;
            if node.comp_used < vn.comp_demand || node.chan_used < vn.chan_demand {
                return Err(SubstrateError::ReleaseMismatch(format!(
                    "node {host} holds less than the released demand"
                )));
            }
        }
        for route in &solution.routes {
            for &lid in &route.path.links {
                let link = self
                    .links
                    .get(lid)
                    .ok_or(SubstrateError::UnknownLink(lid))?;
                if route.slot_end >= link.slot_count() {
                    return Err(SubstrateError::ReleaseMismatch(format!(
                        "slot {} outside link {lid} spectrum",
                        route.slot_end
                    )));
                }
                if !link.occupancy[route.slot_start..=route.slot_end].iter().all(|&o| o) {
                    return Err(SubstrateError::ReleaseMismatch(format!(
                        "slots {}..={} on link {lid} are not all occupied",
                        route.slot_start, route.slot_end
                    )));
                }
            }
        }
        for (vn, &host) in vnr.vnodes.iter().zip(&solution.placements) {
            self.nodes[host].comp_used -= vn.comp_demand;
            self.nodes[host].chan_used -= vn.chan_demand;
        }
        for route in &solution.routes {
            for &lid in &route.path.links {
                for slot in route.slot_start..=route.slot_end {
                    self.links[lid].occupancy[slot] = false;
                }
            }
        }
        Ok(())
    }

    pub fn from_doc(doc: &TopologyDoc) -> Result<Self, TopologyError> {
        let nodes = doc
            .nodes
            .iter()
            .map(|n| SubstrateNode {
                id: n.id,
                x: n.x,
                y: n.y,
                comp_cap: n.comp_cap,
                chan_cap: n.chan_cap,
                comp_used: 0,
                chan_used: 0,
            })
            .collect();
        let links = doc
            .links
            .iter()
            .map(|l| OpticalLink {
                id: l.id,
                a: l.a,
                b: l.b,
                occupancy: vec![false; l.slots as usize],
            })
            .collect();
        Self::new(nodes, links)
    }

    pub fn to_doc(&self) -> TopologyDoc {
        TopologyDoc {
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeDoc {
                    id: n.id,
                    name: None,
                    x: n.x,
                    y: n.y,
                    comp_cap: n.comp_cap,
                    chan_cap: n.chan_cap,
                })
                .collect(),
            links: self
                .links
                .iter()
                .map(|l| LinkDoc {
                    id: l.id,
                    a: l.a,
                    b: l.b,
                    slots: l.slot_count() as u32,
                })
                .collect(),
        }
    }

    /// Redraws node capacities and link slot counts from the given ranges,
    /// keeping the topology. Used to instantiate a stored topology with
    /// experiment-specific capacities.
    pub fn redraw_capacities<R: Rng>(
        &mut self,
        comp_cap: (u32, u32),
        chan_cap: (u32, u32),
        slots: (u32, u32),
        rng: &mut R,
    ) {
        for node in &mut self.nodes {
            node.comp_cap = rng.gen_range(comp_cap.0..=comp_cap.1);
            node.chan_cap = rng.gen_range(chan_cap.0..=chan_cap.1);
            node.comp_used = 0;
            node.chan_used = 0;
        }
        for link in &mut self.links {
            let n = rng.gen_range(slots.0..=slots.1);
            link.occupancy = vec![false; n as usize];
        }
    }

    /// Generates a connected random topology: a uniformly random spanning
    /// tree plus uniformly chosen extra edges until the link target is met.
    pub fn generate_random<R: Rng>(
        params: &RandomTopologyParams,
        rng: &mut R,
    ) -> Result<Self, TopologyError> {
        params.validate()?;
        let n = params.nodes;
        let mut nodes = Vec::with_capacity(n);
        for id in 0..n {
            nodes.push(SubstrateNode {
                id,
                x: rng.gen::<f64>() * params.side,
                y: rng.gen::<f64>() * params.side,
                comp_cap: rng.gen_range(params.comp_cap.0..=params.comp_cap.1),
                chan_cap: rng.gen_range(params.chan_cap.0..=params.chan_cap.1),
                comp_used: 0,
                chan_used: 0,
            });
        }

        let mut edges = random_spanning_tree(n, rng);
        let tree: std::collections::HashSet<(usize, usize)> = edges.iter().copied().collect();
        let mut spare: Vec<(usize, usize)> = Vec::new();
        for a in 0..n {
            for b in (a + 1)..n {
                if !tree.contains(&(a, b)) {
                    spare.push((a, b));
                }
            }
        }
        let extra = params.links - edges.len();
        for t in 0..extra {
            let j = rng.gen_range(t..spare.len());
            spare.swap(t, j);
            edges.push(spare[t]);
        }

        let links = edges
            .into_iter()
            .enumerate()
            .map(|(id, (a, b))| OpticalLink {
                id,
                a,
                b,
                occupancy: vec![false; rng.gen_range(params.slots.0..=params.slots.1) as usize],
            })
            .collect();
        Self::new(nodes, links)
    }
}

/// Uniformly random labeled spanning tree on `n` nodes via a random
/// generator sequence of length `n - 2`. Edges come out normalized as
/// `(min, max)`.
fn random_spanning_tree<R: Rng>(n: usize, rng: &mut R) -> Vec<(usize, usize)> {
    match n {
        0 | 1 => return Vec::new(),
        2 => return vec![(0, 1)],
        _ => {}
    }
    let seq: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &s in &seq {
        degree[s] += 1;
    }
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;
    let mut leaves: BinaryHeap<Reverse<usize>> = degree
        .iter()
        .enumerate()
        .filter(|&(_, &d)| d == 1)
        .map(|(i, _)| Reverse(i))
        .collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &s in &seq {
        let Reverse(leaf) = leaves.pop().expect("tree decode invariant");
        edges.push((leaf.min(s), leaf.max(s)));
        degree[leaf] -= 1;
        degree[s] -= 1;
        if degree[s] == 1 {
            leaves.push(Reverse(s));
        }
    }
    let Reverse(u) = leaves.pop().expect("two leaves remain");
    let Reverse(v) = leaves.pop().expect("two leaves remain");
    edges.push((u.min(v), u.max(v)));
    edges
}

/// Reads a topology document from disk and instantiates the network.
pub fn load_topology(path: &Path) -> Result<SubstrateNetwork, TopologyError> {
    let text = std::fs::read_to_string(path).map_err(|source| TopologyError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let doc: TopologyDoc = serde_json::from_str(&text).map_err(|source| TopologyError::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    SubstrateNetwork::from_doc(&doc)
}

impl fmt::Display for SubstrateNetwork {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "substrate: {} nodes, {} links",
            self.nodes.len(),
            self.links.len()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn occ(pattern: &str) -> Vec<bool> {
        pattern.chars().map(|c| c == '#').collect()
    }

    /// Line network 0-1-2-3 with the given occupancy patterns.
    fn line_net(patterns: &[&str]) -> SubstrateNetwork {
        let nodes = (0..patterns.len() + 1)
            .map(|id| SubstrateNode {
                id,
                x: id as f64 * 100.0,
                y: 0.0,
                comp_cap: 50,
                chan_cap: 50,
                comp_used: 0,
                chan_used: 0,
            })
            .collect();
        let links = patterns
            .iter()
            .enumerate()
            .map(|(id, p)| OpticalLink {
                id,
                a: id,
                b: id + 1,
                occupancy: occ(p),
            })
            .collect();
        SubstrateNetwork::new(nodes, links).unwrap()
    }

    #[test]
    fn free_runs_scan_finds_maximal_runs() {
        let runs = free_runs_of(&occ("#..#.###..."));
        assert_eq!(
            runs,
            vec![
                FreeRun { start: 1, end: 2 },
                FreeRun { start: 4, end: 4 },
                FreeRun { start: 8, end: 10 },
            ]
        );
        assert!(runs[0].is_macsb());
        assert!(!runs[1].is_macsb());
        assert_eq!(runs[2].len(), 3);
    }

    #[test]
    fn free_runs_handles_all_free_and_all_full() {
        assert_eq!(free_runs_of(&occ("....")), vec![FreeRun { start: 0, end: 3 }]);
        assert!(free_runs_of(&occ("####")).is_empty());
        assert!(free_runs_of(&[]).is_empty());
    }

    #[test]
    fn path_free_runs_intersects_links() {
        let net = line_net(&["#...#...", "..##....", "........"]);
        let path = net.path_from_nodes(vec![0, 1, 2]).unwrap();
        // Intersection of "#...#..." and "..##....": free at 1, 5, 6, 7
        // minus slot 4 occupied on link 0 -> runs [1,1] and [5,7].
        assert_eq!(
            net.path_free_runs(&path),
            vec![FreeRun { start: 1, end: 1 }, FreeRun { start: 5, end: 7 }]
        );
    }

    #[test]
    fn path_free_runs_respects_shortest_spectrum() {
        let net = line_net(&["........", "....", "........"]);
        let path = net.path_from_nodes(vec![0, 1, 2, 3]).unwrap();
        assert_eq!(net.path_free_runs(&path), vec![FreeRun { start: 0, end: 3 }]);
    }

    #[test]
    fn available_degree_counts_feasible_links() {
        // Widest runs: 3, 2, 8.
        let net = line_net(&["#...#..#", "..##..#.", "........"]);
        assert_eq!(net.available_degree(1, 2).unwrap(), 2);
        assert_eq!(net.available_degree(1, 3).unwrap(), 1);
        assert_eq!(net.available_degree(2, 2).unwrap(), 2);
        assert_eq!(net.available_degree(2, 5).unwrap(), 1);
        assert!(net.available_degree(9, 1).is_err());
    }

    #[test]
    fn path_from_nodes_rejects_bad_walks() {
        let net = line_net(&["....", "....", "...."]);
        assert!(matches!(
            net.path_from_nodes(vec![0]),
            Err(SubstrateError::DegeneratePath)
        ));
        assert!(matches!(
            net.path_from_nodes(vec![0, 2]),
            Err(SubstrateError::NotAdjacent { .. })
        ));
        assert!(matches!(
            net.path_from_nodes(vec![0, 1, 0]),
            Err(SubstrateError::RepeatedNode(0))
        ));
    }

    #[test]
    fn constructor_rejects_malformed_topologies() {
        let node = |id| SubstrateNode {
            id,
            x: 0.0,
            y: 0.0,
            comp_cap: 10,
            chan_cap: 10,
            comp_used: 0,
            chan_used: 0,
        };
        let link = |id, a, b| OpticalLink {
            id,
            a,
            b,
            occupancy: vec![false; 4],
        };
        assert!(matches!(
            SubstrateNetwork::new(vec![node(0), node(1)], vec![link(0, 0, 0)]),
            Err(TopologyError::SelfLoop { .. })
        ));
        assert!(matches!(
            SubstrateNetwork::new(
                vec![node(0), node(1)],
                vec![link(0, 0, 1), link(1, 1, 0)]
            ),
            Err(TopologyError::DuplicateLink { .. })
        ));
        assert!(matches!(
            SubstrateNetwork::new(vec![node(0), node(1), node(2)], vec![link(0, 0, 1)]),
            Err(TopologyError::Disconnected { node: 2 })
        ));
        assert!(matches!(
            SubstrateNetwork::new(vec![node(0), node(2)], vec![link(0, 0, 1)]),
            Err(TopologyError::BadNodeId { found: 2, position: 1 })
        ));
    }

    #[test]
    fn doc_round_trip_preserves_topology() {
        let net = line_net(&["....", ".....", "......"]);
        let doc = net.to_doc();
        let again = SubstrateNetwork::from_doc(&doc).unwrap();
        assert_eq!(net, again);
        let json = serde_json::to_string(&doc).unwrap();
        let parsed: TopologyDoc = serde_json::from_str(&json).unwrap();
        assert_eq!(doc, parsed);
    }

    #[test]
    fn random_topology_is_connected_with_exact_link_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &(n, m) in &[(5usize, 4usize), (10, 20), (50, 166), (2, 1), (6, 15)] {
            let params = RandomTopologyParams {
                nodes: n,
                links: m,
                comp_cap: (50, 100),
                chan_cap: (50, 100),
                slots: (50, 100),
                side: 1000.0,
            };
            let net = SubstrateNetwork::generate_random(&params, &mut rng).unwrap();
            assert_eq!(net.node_count(), n);
            assert_eq!(net.link_count(), m);
            for node in &net.nodes {
                assert!((50..=100).contains(&node.comp_cap));
                assert!((50..=100).contains(&node.chan_cap));
                assert!(node.x >= 0.0 && node.x <= 1000.0);
                assert!(node.y >= 0.0 && node.y <= 1000.0);
            }
            for link in &net.links {
                assert!((50..=100).contains(&(link.slot_count() as u32)));
            }
        }
    }

    #[test]
    fn random_topology_is_deterministic_per_seed() {
        let params = RandomTopologyParams {
            nodes: 12,
            links: 20,
            comp_cap: (50, 100),
            chan_cap: (50, 100),
            slots: (50, 100),
            side: 1000.0,
        };
        let a = SubstrateNetwork::generate_random(&params, &mut ChaCha8Rng::seed_from_u64(3))
            .unwrap();
        let b = SubstrateNetwork::generate_random(&params, &mut ChaCha8Rng::seed_from_u64(3))
            .unwrap();
        let c = SubstrateNetwork::generate_random(&params, &mut ChaCha8Rng::seed_from_u64(4))
            .unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn random_topology_rejects_bad_parameters() {
        let base = RandomTopologyParams {
            nodes: 5,
            links: 4,
            comp_cap: (50, 100),
            chan_cap: (50, 100),
            slots: (50, 100),
            side: 1000.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for bad in [
            RandomTopologyParams { nodes: 0, ..base.clone() },
            RandomTopologyParams { links: 3, ..base.clone() },
            RandomTopologyParams { links: 11, ..base.clone() },
            RandomTopologyParams { comp_cap: (0, 5), ..base.clone() },
            RandomTopologyParams { slots: (9, 3), ..base.clone() },
            RandomTopologyParams { side: 0.0, ..base.clone() },
        ] {
            assert!(SubstrateNetwork::generate_random(&bad, &mut rng).is_err());
        }
        assert!(SubstrateNetwork::generate_random(&base, &mut rng).is_ok());
    }

    #[test]
    fn spanning_tree_covers_all_nodes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 2..30 {
            let edges = random_spanning_tree(n, &mut rng);
            assert_eq!(edges.len(), n - 1);
            let mut parent: Vec<usize> = (0..n).collect();
            fn find(parent: &mut Vec<usize>, x: usize) -> usize {
                if parent[x] != x {
                    let r = find(parent, parent[x]);
                    parent[x] = r;
                }
                parent[x]
            }
            for &(a, b) in &edges {
                assert!(a < b && b < n);
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                assert_ne!(ra, rb, "tree must be acyclic");
                parent[ra] = rb;
            }
        }
    }
}
