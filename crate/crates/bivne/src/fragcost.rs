//! Fragmentation metrics and the money model.
//!
//! Two kinds of waste are priced in addition to the resources a request
//! actually consumes. At nodes, committing unequal shares of computing and
//! channel capacity strands the overhang of whichever pool empties slower;
//! the level of imbalance (LoI) measures that skew and its increase scales
//! the node bill. At links, a slot assignment can chop a free run into
//! leftovers too narrow to ever host another demand; those leftover slots
//! are billed alongside the allocated ones.
//!
//! Money is exact: integer prices and integer resource counts combine with
//! the rational LoI increase, so ledger identities (profit = revenue − cost
//! over accepted requests) hold bit-for-bit. The `*_f64` twins evaluate the
//! same integer cores in floating point for search-time ranking, where speed
//! matters and only the ordering does.

use num::rational::BigRational;
use num::{BigInt, FromPrimitive, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lower_solver::RouteAssignment;
use crate::substrate::{euclidean, NodeId, SubstrateNetwork, SubstrateNode};
use crate::vnr::{VirtualNode, VirtualRequest};

/// Exact money amount.
pub type Money = BigRational;

pub fn money_int(v: u64) -> Money {
    BigRational::from_integer(BigInt::from(v))
}

pub fn money_to_f64(m: &Money) -> f64 {
    m.to_f64().expect("money values stay in f64 range")
}

#[derive(Debug, Error, PartialEq)]
pub enum CostError {
    #[error("node {0} has a zero capacity")]
    ZeroCapacity(NodeId),
    #[error("allocation escapes the spectrum (start {start}, len {len}, slots {slots})")]
    OutOfRange {
        start: usize,
        len: usize,
        slots: usize,
    },
    #[error("allocation covers occupied slot {0}")]
    AllocationOverlap(usize),
    #[error("placement violates constraints: {0}")]
    InfeasiblePlacement(String),
    #[error("routes violate constraints: {0}")]
    InfeasibleRoute(String),
}

/// Per-unit prices: `alpha`/`kappa`/`gamma` are what tenants are charged for
/// computing, channel, and spectrum units; the primed `_p` counterparts are
/// what the provider pays for the same units (used in the cost formulas).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PriceTable {
    pub alpha: u32,
    pub kappa: u32,
    pub gamma: u32,
    pub alpha_p: u32,
    pub kappa_p: u32,
    pub gamma_p: u32,
}

impl Default for PriceTable {
    fn default() -> Self {
        PriceTable {
            alpha: 3,
            kappa: 3,
            gamma: 3,
            alpha_p: 1,
            kappa_p: 1,
            gamma_p: 1,
        }
    }
}

/// What counts as a spectral fragment.
///
/// A leftover free run qualifies when its length is at most `xi_max` slots.
/// Length-1 leftovers are included by default — a single stranded slot can
/// never carry an assignment, which spans at least two slots — but the
/// stricter reading that only multi-slot blocks count is available by
/// turning `include_single_slot` off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FragConfig {
    /// Largest leftover length (slots) still considered a fragment.
    pub xi_max: u32,
    /// Whether length-1 leftovers count as fragments.
    pub include_single_slot: bool,
}

impl Default for FragConfig {
    fn default() -> Self {
        FragConfig {
            xi_max: 2,
            include_single_slot: true,
        }
    }
}

impl FragConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.xi_max == 0 {
            return Err("xi_max must be at least 1".into());
        }
        Ok(())
    }

    fn min_fragment_len(&self) -> usize {
        if self.include_single_slot {
            1
        } else {
            2
        }
    }

    /// Whether a leftover free run of `len` slots counts as a fragment.
    pub fn is_fragment_len(&self, len: usize) -> bool {
        len >= self.min_fragment_len() && len <= self.xi_max as usize
    }
}

/// Integer core of the LoI: (|C_used·W − W_used·C|, C·W).
fn loi_parts(node: &SubstrateNode) -> Result<(u128, u128), CostError> {
    if node.comp_cap == 0 || node.chan_cap == 0 {
        return Err(CostError::ZeroCapacity(node.id));
    }
    let c = node.comp_cap as u128;
    let w = node.chan_cap as u128;
    let lhs = node.comp_used as u128 * w;
    let rhs = node.chan_used as u128 * c;
    Ok((lhs.abs_diff(rhs), c * w))
}

/// Level of imbalance at a node: |C_used/C − W_used/W|, in [0, 1].
pub fn loi(node: &SubstrateNode) -> Result<Money, CostError> {
    let (num, den) = loi_parts(node)?;
    Ok(ratio(num, den))
}

/// Integer core of the LoI increase caused by adding `vn`'s demands:
/// (max(ϱ′ − ϱ, 0) numerator, common denominator C·W).
fn loi_increase_parts(node: &SubstrateNode, vn: &VirtualNode) -> Result<(u128, u128), CostError> {
    let (before, den) = loi_parts(node)?;
    if node.comp_used as u64 + vn.comp_demand as u64 > node.comp_cap as u64
        || node.chan_used as u64 + vn.chan_demand as u64 > node.chan_cap as u64
    {
        return Err(CostError::InfeasiblePlacement(format!(
            "node {} cannot absorb demand ({}, {})",
            node.id, vn.comp_demand, vn.chan_demand
        )));
    }
    let c = node.comp_cap as u128;
    let w = node.chan_cap as u128;
    let lhs = (node.comp_used as u128 + vn.comp_demand as u128) * w;
    let rhs = (node.chan_used as u128 + vn.chan_demand as u128) * c;
    let after = lhs.abs_diff(rhs);
    Ok((after.saturating_sub(before), den))
}

/// Increase in LoI caused by hosting `vn` on `node`; 0 when the placement
/// rebalances the pools.
pub fn loi_increase(node: &SubstrateNode, vn: &VirtualNode) -> Result<Money, CostError> {
    let (num, den) = loi_increase_parts(node, vn)?;
    Ok(ratio(num, den))
}

fn ratio(num: u128, den: u128) -> Money {
    BigRational::new(
        BigInt::from_u128(num).unwrap(),
        BigInt::from_u128(den).unwrap(),
    )
}

/// Slots stranded by placing `alloc_len` slots at `alloc_start`: the host
/// free run's left and right leftovers that qualify as fragments under
/// `cfg`. The allocation must sit entirely on free slots.
pub fn new_fragment_slots(
    link_occupancy: &[bool],
    alloc_start: usize,
    alloc_len: usize,
    cfg: &FragConfig,
) -> Result<u32, CostError> {
    if alloc_len == 0 || alloc_start + alloc_len > link_occupancy.len() {
        return Err(CostError::OutOfRange {
            start: alloc_start,
            len: alloc_len,
            slots: link_occupancy.len(),
        });
    }
    if let Some(slot) = (alloc_start..alloc_start + alloc_len).find(|&s| link_occupancy[s]) {
        return Err(CostError::AllocationOverlap(slot));
    }
    let mut lo = alloc_start;
    while lo > 0 && !link_occupancy[lo - 1] {
        lo -= 1;
    }
    let mut hi = alloc_start + alloc_len - 1;
    while hi + 1 < link_occupancy.len() && !link_occupancy[hi + 1] {
        hi += 1;
    }
    let leftovers = [alloc_start - lo, hi - (alloc_start + alloc_len - 1)];
    Ok(leftovers
        .iter()
        .filter(|&&len| cfg.is_fragment_len(len))
        .sum::<usize>() as u32)
}

/// Revenue from fulfilling a request: demands times the charged prices.
pub fn revenue(vnr: &VirtualRequest, prices: &PriceTable) -> Money {
    let node_part: u128 = vnr
        .vnodes
        .iter()
        .map(|v| {
            prices.alpha as u128 * v.comp_demand as u128
                + prices.kappa as u128 * v.chan_demand as u128
        })
        .sum();
    let link_part = vnr.vlinks.len() as u128 * prices.gamma as u128 * vnr.slot_demand as u128;
    ratio(node_part + link_part, 1)
}

/// Per-vnode node bill core: the integer triple (K, Δϱ numerator, Δϱ
/// denominator) such that the bill is K·(den + num)/den, with
/// K = α′·C(vn) + κ′·W(vn).
fn node_term_parts(
    node: &SubstrateNode,
    vn: &VirtualNode,
    prices: &PriceTable,
) -> Result<(u128, u128, u128), CostError> {
    let (num, den) = loi_increase_parts(node, vn)?;
    let k = prices.alpha_p as u128 * vn.comp_demand as u128
        + prices.kappa_p as u128 * vn.chan_demand as u128;
    Ok((k, num, den))
}

/// Cost of hosting one vnode on one node: (1 + Δϱ)·(α′C + κ′W).
pub fn node_cost_term(
    node: &SubstrateNode,
    vn: &VirtualNode,
    prices: &PriceTable,
) -> Result<Money, CostError> {
    let (k, num, den) = node_term_parts(node, vn, prices)?;
    let k = BigInt::from_u128(k).unwrap();
    Ok(BigRational::new(
        k * BigInt::from_u128(den + num).unwrap(),
        BigInt::from_u128(den).unwrap(),
    ))
}

/// Floating-point twin of [`node_cost_term`].
pub fn node_cost_term_f64(
    node: &SubstrateNode,
    vn: &VirtualNode,
    prices: &PriceTable,
) -> Result<f64, CostError> {
    let (k, num, den) = node_term_parts(node, vn, prices)?;
    Ok(k as f64 * (1.0 + num as f64 / den as f64))
}

fn check_placements(
    placements: &[NodeId],
    net: &SubstrateNetwork,
    vnr: &VirtualRequest,
) -> Result<(), CostError> {
    if placements.len() != vnr.vnodes.len() {
        return Err(CostError::InfeasiblePlacement(format!(
            "{} placements for {} vnodes",
            placements.len(),
            vnr.vnodes.len()
        )));
    }
    for (i, &host) in placements.iter().enumerate() {
        if host >= net.node_count() {
            return Err(CostError::InfeasiblePlacement(format!(
                "vnode {i} placed on unknown node {host}"
            )));
        }
        if placements[..i].contains(&host) {
            return Err(CostError::InfeasiblePlacement(format!(
                "node {host} hosts more than one vnode"
            )));
        }
        let vn = &vnr.vnodes[i];
        let dist = euclidean(net.nodes[host].position(), vn.pref_center);
        if dist > vn.pref_radius {
            return Err(CostError::InfeasiblePlacement(format!(
                "vnode {i} placed {dist:.1} away, radius {:.1}",
                vn.pref_radius
            )));
        }
    }
    Ok(())
}

/// Node bill of a full placement: Σ (1 + Δϱ)·(α′C + κ′W) over vnodes, each
/// Δϱ taken against the hosts' usage at request arrival. Distinct hosts per
/// vnode (guaranteed by the placement constraints) keep the per-host terms
/// independent of evaluation order.
pub fn node_cost(
    placements: &[NodeId],
    net: &SubstrateNetwork,
    vnr: &VirtualRequest,
    prices: &PriceTable,
) -> Result<Money, CostError> {
    check_placements(placements, net, vnr)?;
    let mut total = Money::zero();
    for (vn, &host) in vnr.vnodes.iter().zip(placements) {
        total += node_cost_term(&net.nodes[host], vn, prices)?;
    }
    Ok(total)
}

/// Floating-point twin of [`node_cost`].
pub fn node_cost_f64(
    placements: &[NodeId],
    net: &SubstrateNetwork,
    vnr: &VirtualRequest,
    prices: &PriceTable,
) -> Result<f64, CostError> {
    check_placements(placements, net, vnr)?;
    let mut total = 0.0;
    for (vn, &host) in vnr.vnodes.iter().zip(placements) {
        total += node_cost_term_f64(&net.nodes[host], vn, prices)?;
    }
    Ok(total)
}

/// Billable spectrum units of a route set: per (vlink, traversed link), the
/// allocated slots plus the fragment slots the allocation strands. Routes
/// are evaluated in order against a shadow copy of the current spectrum, so
/// sibling vlinks sharing a link see each other's slots as occupied.
pub fn link_cost_units(
    net: &SubstrateNetwork,
    routes: &[RouteAssignment],
    cfg: &FragConfig,
) -> Result<u64, CostError> {
    let mut shadow: std::collections::HashMap<usize, Vec<bool>> = std::collections::HashMap::new();
    let mut units: u64 = 0;
    for route in routes {
        let width = route.slot_end - route.slot_start + 1;
        for &lid in &route.path.links {
            let link = net
                .links
                .get(lid)
                .ok_or_else(|| CostError::InfeasibleRoute(format!("unknown link {lid}")))?;
            let occ = shadow
                .entry(lid)
                .or_insert_with(|| link.occupancy.clone());
            let xi = new_fragment_slots(occ, route.slot_start, width, cfg).map_err(|e| {
                CostError::InfeasibleRoute(format!("vlink {} on link {lid}: {e}", route.vlink))
            })?;
            units += width as u64 + xi as u64;
            for slot in route.slot_start..=route.slot_end {
                occ[slot] = true;
            }
        }
    }
    Ok(units)
}

/// Spectrum bill of a route set: γ′ times the billable units.
pub fn link_cost(
    net: &SubstrateNetwork,
    routes: &[RouteAssignment],
    prices: &PriceTable,
    cfg: &FragConfig,
) -> Result<Money, CostError> {
    let units = link_cost_units(net, routes, cfg)?;
    Ok(ratio(prices.gamma_p as u128 * units as u128, 1))
}

/// Full bill of one embedded request: node bill plus spectrum bill. Lower
/// is better; this is what the placement search minimizes.
pub fn fitness(
    net: &SubstrateNetwork,
    vnr: &VirtualRequest,
    placements: &[NodeId],
    routes: &[RouteAssignment],
    prices: &PriceTable,
    cfg: &FragConfig,
) -> Result<Money, CostError> {
    Ok(node_cost(placements, net, vnr, prices)? + link_cost(net, routes, prices, cfg)?)
}

/// Floating-point twin of [`fitness`].
pub fn fitness_f64(
    net: &SubstrateNetwork,
    vnr: &VirtualRequest,
    placements: &[NodeId],
    routes: &[RouteAssignment],
    prices: &PriceTable,
    cfg: &FragConfig,
) -> Result<f64, CostError> {
    let units = link_cost_units(net, routes, cfg)?;
    Ok(node_cost_f64(placements, net, vnr, prices)? + prices.gamma_p as f64 * units as f64)
}

/// Ledger entry for one request: what it earned and what it cost.
#[derive(Debug, Clone, PartialEq)]
pub struct VnrOutcome {
    pub accepted: bool,
    pub revenue: Money,
    pub node_cost: Money,
    pub link_cost: Money,
}

/// Provider profit over a batch: Σ (revenue − node cost − link cost) of the
/// accepted requests. Rejected requests earn and cost nothing.
pub fn profit(outcomes: &[VnrOutcome]) -> Money {
    let mut total = Money::zero();
    for o in outcomes.iter().filter(|o| o.accepted) {
        total += &o.revenue - &o.node_cost - &o.link_cost;
    }
    total
}
