//! Independent checker for the eleven embedding constraints.
//!
//! The validator never trusts the solver: it takes the substrate as it was
//! *before* the request was committed, the request, and a flat dump of the
//! proposed assignment, and re-derives every requirement from scratch —
//! each vnode hosted exactly once (C1) on its own node (C2) with enough
//! computing (C3) and channel (C4) capacity inside its preference disc
//! (C5); each vlink riding one real path between its endpoints' hosts (C6)
//! with sufficient link capacity (C7); and the slot assignment giving each
//! path link exactly the demanded count (C8) of contiguous (C9) slots at
//! identical indices along the whole path (C10), overlapping neither the
//! existing occupancy nor a sibling vlink of the same request (C11).
//!
//! Violations are data, not errors: callers get the complete list. The
//! dump format is deliberately more expressive than anything the solvers
//! can produce — per-link index lists instead of a single range — so that
//! broken alignment or torn contiguity is representable and detectable.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::acs_upper::EmbeddingSolution;
use crate::substrate::{euclidean, LinkId, NodeId, SubstrateNetwork};
use crate::vnr::VirtualRequest;

/// The constraint families, named as reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Constraint {
    C1,
    C2,
    C3,
    C4,
    C5,
    C6,
    C7,
    C8,
    C9,
    C10,
    C11,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// One broken constraint with a human-readable account of where.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: Constraint,
    pub detail: String,
}

impl Violation {
    fn new(constraint: Constraint, detail: impl Into<String>) -> Self {
        Violation {
            constraint,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.constraint, self.detail)
    }
}

/// Slot indices claimed on one physical link.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkSlots {
    pub link: LinkId,
    pub indices: Vec<usize>,
}

/// One vlink's assignment: the path and the per-link slot claims.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RouteDump {
    pub vlink: usize,
    pub nodes: Vec<NodeId>,
    pub links: Vec<LinkId>,
    pub slots: Vec<LinkSlots>,
}

/// A complete embedding flattened for inspection, with no invariants of its
/// own — that is the point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionDump {
    pub vnr_id: u64,
    pub placements: Vec<NodeId>,
    pub routes: Vec<RouteDump>,
}

impl SolutionDump {
    pub fn from_solution(vnr: &VirtualRequest, solution: &EmbeddingSolution) -> Self {
        let routes = solution
            .routes
            .iter()
            .map(|r| RouteDump {
                vlink: r.vlink,
                nodes: r.path.nodes.clone(),
                links: r.path.links.clone(),
                slots: r
                    .path
                    .links
                    .iter()
                    .map(|&link| LinkSlots {
                        link,
                        indices: (r.slot_start..=r.slot_end).collect(),
                    })
                    .collect(),
            })
            .collect();
        SolutionDump {
            vnr_id: vnr.id,
            placements: solution.placements.clone(),
            routes,
        }
    }
}

/// Checks `dump` against `net` (pre-commit state) and `vnr`, reporting every
/// violation found. An empty result means the embedding is sound.
pub fn validate(
    net: &SubstrateNetwork,
    vnr: &VirtualRequest,
    dump: &SolutionDump,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let v = &mut out;

    // C1: every vnode mapped to exactly one existing node.
    let arity_ok = dump.placements.len() == vnr.vnodes.len();
    if !arity_ok {
        v.push(Violation::new(
            Constraint::C1,
            format!(
                "{} placements for {} vnodes",
                dump.placements.len(),
                vnr.vnodes.len()
            ),
        ));
    }
    let host_of = |vn: usize| -> Option<NodeId> {
        dump.placements
            .get(vn)
            .copied()
            .filter(|&h| h < net.node_count())
    };
    for (vn, &host) in dump.placements.iter().enumerate() {
        if host >= net.node_count() {
            v.push(Violation::new(
                Constraint::C1,
                format!("vnode {vn} mapped to unknown node {host}"),
            ));
        }
    }

    // C2: no physical node hosts two vnodes of this request.
    let mut seen: HashMap<NodeId, usize> = HashMap::new();
    for (vn, &host) in dump.placements.iter().enumerate() {
        if host >= net.node_count() {
            continue;
        }
        if let Some(&prev) = seen.get(&host) {
            v.push(Violation::new(
                Constraint::C2,
                format!("node {host} hosts both vnode {prev} and vnode {vn}"),
            ));
        } else {
            seen.insert(host, vn);
        }
    }

    // C3/C4/C5: per-vnode capacity and location, against pre-commit state.
    for vn in 0..vnr.vnodes.len() {
        let Some(host) = host_of(vn) else { continue };
        let d = &vnr.vnodes[vn];
        let n = &net.nodes[host];
        if n.comp_free() < d.comp_demand {
            v.push(Violation::new(
                Constraint::C3,
                format!(
                    "vnode {vn} needs {} computing units, node {host} has {}",
                    d.comp_demand,
                    n.comp_free()
                ),
            ));
        }
        if n.chan_free() < d.chan_demand {
            v.push(Violation::new(
                Constraint::C4,
                format!(
                    "vnode {vn} needs {} channel units, node {host} has {}",
                    d.chan_demand,
                    n.chan_free()
                ),
            ));
        }
        let dist = euclidean(d.pref_center, n.position());
        if dist > d.pref_radius {
            v.push(Violation::new(
                Constraint::C5,
                format!(
                    "vnode {vn} on node {host} at distance {dist:.3} exceeds radius {:.3}",
                    d.pref_radius
                ),
            ));
        }
    }

    // C6: exactly one structurally sound path per vlink, between the hosts
    // of the vlink's endpoints.
    let mut route_of: Vec<Option<&RouteDump>> = vec![None; vnr.vlinks.len()];
    for route in &dump.routes {
        if route.vlink >= vnr.vlinks.len() {
            v.push(Violation::new(
                Constraint::C6,
                format!("route for unknown vlink {}", route.vlink),
            ));
            continue;
        }
        if route_of[route.vlink].is_some() {
            v.push(Violation::new(
                Constraint::C6,
                format!("vlink {} routed twice", route.vlink),
            ));
            continue;
        }
        route_of[route.vlink] = Some(route);
    }
    for (vlink, slot) in route_of.iter().enumerate() {
        if slot.is_none() {
            v.push(Violation::new(
                Constraint::C6,
                format!("vlink {vlink} has no route"),
            ));
        }
    }

    // Structural soundness per route; slot checks only run on sound paths.
    for route in route_of.iter().flatten() {
        let vlink = route.vlink;
        let mut sound = true;
        if route.nodes.len() < 2 || route.links.len() + 1 != route.nodes.len() {
            v.push(Violation::new(
                Constraint::C6,
                format!(
                    "vlink {vlink} path has {} nodes and {} links",
                    route.nodes.len(),
                    route.links.len()
                ),
            ));
            sound = false;
        }
        if route.nodes.iter().any(|&n| n >= net.node_count())
            || route.links.iter().any(|&l| l >= net.link_count())
        {
            v.push(Violation::new(
                Constraint::C6,
                format!("vlink {vlink} path references unknown nodes or links"),
            ));
            sound = false;
        }
        if sound {
            for (i, &lid) in route.links.iter().enumerate() {
                let link = &net.links[lid];
                let (u, w) = (route.nodes[i], route.nodes[i + 1]);
                if !((link.a == u && link.b == w) || (link.a == w && link.b == u)) {
                    v.push(Violation::new(
                        Constraint::C6,
                        format!("vlink {vlink} hop {i}: link {lid} does not join {u} and {w}"),
                    ));
                    sound = false;
                }
            }
            let mut visited = route.nodes.clone();
            visited.sort_unstable();
            visited.dedup();
            if visited.len() != route.nodes.len() {
                v.push(Violation::new(
                    Constraint::C6,
                    format!("vlink {vlink} path revisits a node"),
                ));
            }
            let (a, b) = vnr.vlinks[vlink];
            match (host_of(a), host_of(b)) {
                (Some(src), Some(dst)) => {
                    let ends = (route.nodes[0], *route.nodes.last().unwrap());
                    if ends != (src, dst) && ends != (dst, src) {
                        v.push(Violation::new(
                            Constraint::C6,
                            format!(
                                "vlink {vlink} path runs {}..{} but its endpoints are hosted on {src} and {dst}",
                                ends.0, ends.1
                            ),
                        ));
                    }
                }
                // Unplaced endpoints were already reported under C1.
                _ => {}
            }
        }
        if !sound {
            continue;
        }

        // C7: every traversed link must carry at least the demanded width.
        for &lid in &route.links {
            if net.links[lid].slot_count() < vnr.slot_demand as usize {
                v.push(Violation::new(
                    Constraint::C7,
                    format!(
                        "vlink {vlink}: link {lid} has only {} slots for demand {}",
                        net.links[lid].slot_count(),
                        vnr.slot_demand
                    ),
                ));
            }
        }

        // C8: the slot claims cover exactly the path links, with exactly
        // the demanded number of distinct in-range slots on each.
        let mut claimed: HashMap<LinkId, &LinkSlots> = HashMap::new();
        for ls in &route.slots {
            if !route.links.contains(&ls.link) {
                v.push(Violation::new(
                    Constraint::C8,
                    format!("vlink {vlink} claims slots on off-path link {}", ls.link),
                ));
                continue;
            }
            if claimed.insert(ls.link, ls).is_some() {
                v.push(Violation::new(
                    Constraint::C8,
                    format!("vlink {vlink} claims link {} twice", ls.link),
                ));
            }
        }
        let mut per_link_ok = true;
        for &lid in &route.links {
            let Some(ls) = claimed.get(&lid) else {
                v.push(Violation::new(
                    Constraint::C8,
                    format!("vlink {vlink}: no slots claimed on path link {lid}"),
                ));
                per_link_ok = false;
                continue;
            };
            let slots = net.links[lid].slot_count();
            let mut idx = ls.indices.clone();
            idx.sort_unstable();
            idx.dedup();
            if idx.len() != ls.indices.len() || idx.iter().any(|&b| b >= slots) {
                v.push(Violation::new(
                    Constraint::C8,
                    format!("vlink {vlink}: duplicate or out-of-range slot on link {lid}"),
                ));
                per_link_ok = false;
                continue;
            }
            if idx.len() != vnr.slot_demand as usize {
                v.push(Violation::new(
                    Constraint::C8,
                    format!(
                        "vlink {vlink}: {} slots on link {lid}, demand is {}",
                        idx.len(),
                        vnr.slot_demand
                    ),
                ));
                per_link_ok = false;
            }
        }
        if !per_link_ok {
            continue;
        }

        // C9: slots on each link are contiguous.
        let mut blocks: Vec<(usize, usize)> = Vec::new();
        for &lid in &route.links {
            let mut idx = claimed[&lid].indices.clone();
            idx.sort_unstable();
            let contiguous = idx.windows(2).all(|w| w[1] == w[0] + 1);
            if !contiguous {
                v.push(Violation::new(
                    Constraint::C9,
                    format!("vlink {vlink}: slots on link {lid} are not contiguous"),
                ));
            }
            blocks.push((idx[0], *idx.last().unwrap()));
        }

        // C10: the same indices on every link of the path.
        if let Some((first, rest)) = blocks.split_first() {
            for (i, b) in rest.iter().enumerate() {
                if b != first {
                    v.push(Violation::new(
                        Constraint::C10,
                        format!(
                            "vlink {vlink}: link {} uses slots {}..={} but link {} uses {}..={}",
                            route.links[0], first.0, first.1, route.links[i + 1], b.0, b.1
                        ),
                    ));
                }
            }
        }
    }

    // C11: claimed slots are free in the pre-commit occupancy and no two
    // vlinks of this request claim the same slot on the same link.
    let mut owner: HashMap<(LinkId, usize), usize> = HashMap::new();
    for route in route_of.iter().flatten() {
        for ls in &route.slots {
            if ls.link >= net.link_count() {
                continue;
            }
            let occ = &net.links[ls.link].occupancy;
            for &b in &ls.indices {
                if b >= occ.len() {
                    continue; // already reported under C8
                }
                if occ[b] {
                    v.push(Violation::new(
                        Constraint::C11,
                        format!(
                            "vlink {}: slot {b} on link {} is already occupied",
                            route.vlink, ls.link
                        ),
                    ));
                }
                if let Some(&prev) = owner.get(&(ls.link, b)) {
                    if prev != route.vlink {
                        v.push(Violation::new(
                            Constraint::C11,
                            format!(
                                "slot {b} on link {} claimed by both vlink {prev} and vlink {}",
                                ls.link, route.vlink
                            ),
                        ));
                    }
                } else {
                    owner.insert((ls.link, b), route.vlink);
                }
            }
        }
    }

    out
}
