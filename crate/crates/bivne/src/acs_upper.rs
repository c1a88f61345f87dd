//! Upper level: ant colony search over node placements.
//!
//! Each request gets its own colony. Candidate hosts are first reduced by
//! capacity, location, and spectrum-feasible degree; vnodes are then placed
//! in ascending candidate-count order (scarcest first), which keeps early
//! choices from stranding later vnodes whose options are a subset of
//! earlier ones. Hosts are drawn by the pseudorandom-proportional rule —
//! exploit the best pheromone × heuristic product with probability `q0`,
//! otherwise roulette-wheel over the weights — where the heuristic is the
//! reciprocal of the marginal bill: the node-cost increment plus the hop
//! distance to already-placed neighbors priced at the slot demand.
//!
//! Every complete placement is handed to the lower level for routes and
//! slots, and the resulting bill is the fitness. The iteration best is
//! polished by a one-pass local search and reinforces its pheromone trail;
//! the best embedding over all generations is returned.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines;
use crate::fragcost::{money_to_f64, node_cost_term_f64, revenue, FragConfig, PriceTable};
use crate::lower_solver::{
    bfs_distances, embed_links_from, prune_working_graph, LinkEmbedError, RouteAssignment,
    WorkingGraph,
};
use crate::substrate::{NodeId, SubstrateNetwork};
use crate::vnr::{candidate_nodes, VirtualRequest};

/// Stand-in denominator weight when a placement is literally free (zero
/// demands or zero prices): large enough to dominate any real bill, finite
/// so the selection weights stay well-defined.
const FREE_PLACEMENT_ETA: f64 = 1e12;

/// Colony parameters. `tau0: None` derives the initial pheromone per
/// request as 1/(node count × greedy bill), falling back to the request's
/// revenue when the greedy embedder fails.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AcsParams {
    pub colony_size: usize,
    pub max_generations: usize,
    /// Heuristic exponent β.
    pub beta: f64,
    /// Exploitation threshold q0.
    pub q0: f64,
    /// Local pheromone decay φ.
    pub phi: f64,
    /// Global pheromone decay ρ.
    pub rho: f64,
    /// Fixed initial pheromone τ0; derived per request when absent.
    pub tau0: Option<f64>,
    /// Stop after this many generations without improvement; off by default.
    pub early_stop: Option<usize>,
}

impl Default for AcsParams {
    fn default() -> Self {
        AcsParams {
            colony_size: 10,
            max_generations: 150,
            beta: 2.0,
            q0: 0.9,
            phi: 0.1,
            rho: 0.1,
            tau0: None,
            early_stop: None,
        }
    }
}

impl AcsParams {
    pub fn validate(&self) -> Result<(), String> {
        if self.colony_size == 0 {
            return Err("colony_size must be at least 1".into());
        }
        if self.max_generations == 0 {
            return Err("max_generations must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.q0) {
            return Err(format!("q0 {} must lie in [0, 1]", self.q0));
        }
        for (name, v) in [("phi", self.phi), ("rho", self.rho)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(format!("{name} {v} must lie in (0, 1)"));
            }
        }
        if !(self.beta >= 0.0) {
            return Err(format!("beta {} must be non-negative", self.beta));
        }
        if let Some(t) = self.tau0 {
            if !(t > 0.0) {
                return Err(format!("tau0 {t} must be positive"));
            }
        }
        if self.early_stop == Some(0) {
            return Err("early_stop must be at least 1 generation".into());
        }
        Ok(())
    }
}

/// Pheromone trail per (vnode, host) pair, strictly positive.
#[derive(Debug, Clone)]
pub struct PheromoneMatrix {
    tau0: f64,
    values: Vec<Vec<f64>>,
}

impl PheromoneMatrix {
    pub fn new(vnodes: usize, hosts: usize, tau0: f64) -> Self {
        assert!(tau0 > 0.0, "initial pheromone must be positive");
        PheromoneMatrix {
            tau0,
            values: vec![vec![tau0; hosts]; vnodes],
        }
    }

    pub fn tau0(&self) -> f64 {
        self.tau0
    }

    pub fn get(&self, vn: usize, host: NodeId) -> f64 {
        self.values[vn][host]
    }

    /// Evaporates the just-used pair toward τ0: τ ← (1−φ)τ + φτ0.
    pub fn local_update(&mut self, vn: usize, host: NodeId, phi: f64) {
        let t = &mut self.values[vn][host];
        *t = (1.0 - phi) * *t + phi * self.tau0;
    }

    /// Reinforces the pairs used by the best placement:
    /// τ ← (1−ρ)τ + ρ·Δτ on those pairs, others untouched.
    pub fn global_update(&mut self, placements: &[NodeId], rho: f64, delta: f64) {
        for (vn, &host) in placements.iter().enumerate() {
            let t = &mut self.values[vn][host];
            *t = (1.0 - rho) * *t + rho * delta;
        }
    }

    /// (min, max) over all pairs, for sanity assertions.
    pub fn bounds(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for row in &self.values {
            for &v in row {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        (lo, hi)
    }
}

/// Why a request was turned away.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum RejectReason {
    #[error("vnode {vnode} has no candidate host")]
    EmptyCandidateSet { vnode: usize },
    #[error("no ant produced a feasible embedding")]
    NoFeasibleAnt,
    #[error("vnode {vnode} has no remaining host")]
    NoHost { vnode: usize },
    #[error(transparent)]
    Link(#[from] LinkEmbedError),
}

/// The outcome of embedding one request: either a full placement with
/// routes and its bill, or a rejection with empty assignments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingSolution {
    pub vnr_id: u64,
    pub accepted: bool,
    pub placements: Vec<NodeId>,
    pub routes: Vec<RouteAssignment>,
    pub fitness: Option<f64>,
    pub reject_reason: Option<RejectReason>,
}

impl EmbeddingSolution {
    pub fn rejected(vnr_id: u64, reason: RejectReason) -> Self {
        EmbeddingSolution {
            vnr_id,
            accepted: false,
            placements: Vec::new(),
            routes: Vec::new(),
            fitness: None,
            reject_reason: Some(reason),
        }
    }
}

/// Candidate hosts per vnode: capacity and location feasible, and with at
/// least as many spectrum-feasible attached links (at this request's slot
/// demand) as the vnode has vlinks. Any empty set dooms the request before
/// the colony starts.
pub fn reduce_candidates(net: &SubstrateNetwork, vnr: &VirtualRequest) -> Vec<Vec<NodeId>> {
    vnr.vnodes
        .iter()
        .enumerate()
        .map(|(i, vn)| {
            let need = vnr.degree(i);
            candidate_nodes(net, vn)
                .into_iter()
                .filter(|&host| {
                    net.available_degree(host, vnr.slot_demand)
                        .expect("candidate host exists")
                        >= need
                })
                .collect()
        })
        .collect()
}

/// Vnode placement order: ascending candidate-set size, ties by vnode id.
/// Placing the scarcest vnodes first never strands a vnode whose options
/// are a superset of an earlier one's.
pub fn sorted_vnodes(candidates: &[Vec<NodeId>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by_key(|&i| (candidates[i].len(), i));
    order
}

/// Precomputed per-request heuristic ingredients: marginal node bills, hop
/// distances on the demand-pruned graph, and vnode adjacency.
pub struct HeuristicCtx {
    /// [vnode][host] marginal node bill; NaN where not a candidate.
    node_inc: Vec<Vec<f64>>,
    /// [host][host] hop distances on the pruned graph.
    hops: Vec<Vec<Option<u32>>>,
    /// Vnode neighbor lists.
    neighbors: Vec<Vec<usize>>,
    /// Price of one hop for this request: slot demand × γ′.
    hop_price: f64,
}

impl HeuristicCtx {
    pub fn build(
        net: &SubstrateNetwork,
        vnr: &VirtualRequest,
        candidates: &[Vec<NodeId>],
        base: &WorkingGraph,
        prices: &PriceTable,
    ) -> Self {
        let mut node_inc = vec![vec![f64::NAN; net.node_count()]; vnr.vnodes.len()];
        for (vn, cands) in candidates.iter().enumerate() {
            for &host in cands {
                node_inc[vn][host] =
                    node_cost_term_f64(&net.nodes[host], &vnr.vnodes[vn], prices)
                        .expect("candidate hosts can absorb the demand");
            }
        }
        let hops = (0..net.node_count())
            .map(|src| bfs_distances(base, src))
            .collect();
        let neighbors = (0..vnr.vnodes.len()).map(|i| vnr.neighbors(i)).collect();
        HeuristicCtx {
            node_inc,
            hops,
            neighbors,
            hop_price: vnr.slot_demand as f64 * prices.gamma_p as f64,
        }
    }

    /// Attractiveness of placing `vn` on `host` given the partial
    /// placement: the reciprocal of the marginal bill (node-cost increment
    /// plus priced hop distance to each already-placed neighbor). `None`
    /// when a placed neighbor is unreachable — such a host must not be
    /// selectable, as the lower level could never route the vlink.
    pub fn heuristic(&self, vn: usize, host: NodeId, placement: &[Option<NodeId>]) -> Option<f64> {
        let mut denom = self.node_inc[vn][host];
        debug_assert!(!denom.is_nan(), "host {host} is not a candidate of vnode {vn}");
        for &nbr in &self.neighbors[vn] {
            if let Some(other) = placement[nbr] {
                match self.hops[host][other] {
                    Some(d) => denom += d as f64 * self.hop_price,
                    None => return None,
                }
            }
        }
        Some(if denom > 0.0 { 1.0 / denom } else { FREE_PLACEMENT_ETA })
    }
}

/// Normalized selection probabilities of a weight vector.
pub fn selection_probabilities(weights: &[f64]) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    weights.iter().map(|w| w / total).collect()
}

/// Draws a host for `vn` by the pseudorandom-proportional rule: with
/// probability `q0` the argmax of τ·η^β (ties to the lowest host id),
/// otherwise a roulette-wheel draw over the normalized weights. Hosts
/// already taken by this request's other vnodes, and hosts whose heuristic
/// is undefined, are out. `None` when nothing remains.
pub fn select_host<R: Rng>(
    vn: usize,
    candidates: &[NodeId],
    taken: &[bool],
    placement: &[Option<NodeId>],
    pheromone: &PheromoneMatrix,
    params: &AcsParams,
    ctx: &HeuristicCtx,
    rng: &mut R,
) -> Option<NodeId> {
    let mut hosts = Vec::with_capacity(candidates.len());
    let mut weights = Vec::with_capacity(candidates.len());
    for &host in candidates {
        if taken[host] {
            continue;
        }
        let Some(eta) = ctx.heuristic(vn, host, placement) else {
            continue;
        };
        hosts.push(host);
        weights.push(pheromone.get(vn, host) * eta.powf(params.beta));
    }
    if hosts.is_empty() {
        return None;
    }
    let q: f64 = rng.gen();
    if q <= params.q0 {
        // Candidates ascend by id, so strict improvement keeps the lowest
        // id among ties.
        let mut best = 0;
        for i in 1..hosts.len() {
            if weights[i] > weights[best] {
                best = i;
            }
        }
        return Some(hosts[best]);
    }
    let probs = selection_probabilities(&weights);
    debug_assert!(
        (probs.iter().sum::<f64>() - 1.0).abs() <= 1e-12,
        "selection probabilities must sum to 1"
    );
    let total: f64 = weights.iter().sum();
    let t = rng.gen::<f64>() * total;
    let mut cum = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        cum += w;
        if t < cum {
            return Some(hosts[i]);
        }
    }
    Some(*hosts.last().unwrap())
}

/// One ant's walk: place vnodes in `order`, drawing hosts via
/// [`select_host`], locally evaporating each used pair, and reserving each
/// chosen host so no two vnodes share one. `None` when some vnode runs out
/// of eligible hosts mid-walk (the local updates made so far stand, as the
/// trail was genuinely walked).
pub fn construct_solution<R: Rng>(
    vnr: &VirtualRequest,
    candidates: &[Vec<NodeId>],
    order: &[usize],
    pheromone: &mut PheromoneMatrix,
    params: &AcsParams,
    ctx: &HeuristicCtx,
    taken_scratch: &mut Vec<bool>,
    rng: &mut R,
) -> Option<Vec<NodeId>> {
    let mut placement: Vec<Option<NodeId>> = vec![None; vnr.vnodes.len()];
    taken_scratch.iter_mut().for_each(|t| *t = false);
    for &vn in order {
        let host = select_host(
            vn,
            &candidates[vn],
            taken_scratch,
            &placement,
            pheromone,
            params,
            ctx,
            rng,
        )?;
        placement[vn] = Some(host);
        taken_scratch[host] = true;
        pheromone.local_update(vn, host, params.phi);
    }
    Some(placement.into_iter().map(|p| p.unwrap()).collect())
}

/// One pass of best-improvement local search over vnodes in `order`: for
/// each vnode, every unused alternative candidate is tried with a fresh
/// lower-level solve, and the best strict improvement (if any) is adopted
/// before moving on. Output fitness never exceeds the input fitness.
#[allow(clippy::too_many_arguments)]
fn local_search(
    net: &SubstrateNetwork,
    vnr: &VirtualRequest,
    base: &WorkingGraph,
    candidates: &[Vec<NodeId>],
    order: &[usize],
    ctx: &HeuristicCtx,
    cfg: &FragConfig,
    gamma_p: f64,
    mut placements: Vec<NodeId>,
    mut routes: Vec<RouteAssignment>,
    mut fit: f64,
) -> (Vec<NodeId>, Vec<RouteAssignment>, f64) {
    let mut taken = vec![false; net.node_count()];
    for &h in &placements {
        taken[h] = true;
    }
    for &vn in order {
        let current = placements[vn];
        let mut best_alt: Option<(f64, NodeId, Vec<RouteAssignment>)> = None;
        for &alt in &candidates[vn] {
            if alt == current || taken[alt] {
                continue;
            }
            placements[vn] = alt;
            if let Ok((r, units)) = embed_links_from(base, net, vnr, &placements, cfg) {
                let f = node_part(ctx, &placements) + gamma_p * units as f64;
                if f < fit && best_alt.as_ref().map_or(true, |b| f < b.0) {
                    best_alt = Some((f, alt, r));
                }
            }
        }
        placements[vn] = current;
        if let Some((f, alt, r)) = best_alt {
            taken[current] = false;
            taken[alt] = true;
            placements[vn] = alt;
            routes = r;
            fit = f;
        }
    }
    (placements, routes, fit)
}

fn node_part(ctx: &HeuristicCtx, placements: &[NodeId]) -> f64 {
    placements
        .iter()
        .enumerate()
        .map(|(vn, &host)| ctx.node_inc[vn][host])
        .sum()
}

/// Embeds one request with the full bilevel search and returns the best
/// embedding found, or a rejection. Deterministic given the rng state.
pub fn bivne_embed<R: Rng>(
    net: &SubstrateNetwork,
    vnr: &VirtualRequest,
    params: &AcsParams,
    prices: &PriceTable,
    cfg: &FragConfig,
    rng: &mut R,
) -> EmbeddingSolution {
    debug_assert!(params.validate().is_ok());
    let candidates = reduce_candidates(net, vnr);
    if let Some(vnode) = candidates.iter().position(|c| c.is_empty()) {
        return EmbeddingSolution::rejected(vnr.id, RejectReason::EmptyCandidateSet { vnode });
    }
    let order = sorted_vnodes(&candidates);
    let base = prune_working_graph(net, vnr.slot_demand);
    let ctx = HeuristicCtx::build(net, vnr, &candidates, &base, prices);
    let gamma_p = prices.gamma_p as f64;

    // τ0 = 1/(|nodes| · greedy bill); the request's revenue stands in when
    // the greedy embedder cannot place it at all.
    let tau0 = params.tau0.unwrap_or_else(|| {
        let greedy = baselines::greedy_sp_ff(net, vnr, prices, cfg);
        let cost = match greedy.fitness {
            Some(f) if f > 0.0 => f,
            _ => money_to_f64(&revenue(vnr, prices)),
        };
        let denom = net.node_count() as f64 * cost;
        if denom > 0.0 && denom.is_finite() {
            1.0 / denom
        } else {
            1.0
        }
    });
    let mut pheromone = PheromoneMatrix::new(vnr.vnodes.len(), net.node_count(), tau0);

    let mut best: Option<(Vec<NodeId>, Vec<RouteAssignment>, f64)> = None;
    let mut taken = vec![false; net.node_count()];
    let mut stagnant = 0usize;
    for _generation in 0..params.max_generations {
        let mut iter_best: Option<(Vec<NodeId>, Vec<RouteAssignment>, f64)> = None;
        for _ant in 0..params.colony_size {
            let Some(x) = construct_solution(
                vnr,
                &candidates,
                &order,
                &mut pheromone,
                params,
                &ctx,
                &mut taken,
                rng,
            ) else {
                continue;
            };
            let Ok((routes, units)) = embed_links_from(&base, net, vnr, &x, cfg) else {
                continue;
            };
            let fit = node_part(&ctx, &x) + gamma_p * units as f64;
            if iter_best.as_ref().map_or(true, |b| fit < b.2) {
                iter_best = Some((x, routes, fit));
            }
        }

        let mut improved = false;
        if let Some((x, routes, fit)) = iter_best {
            let (x, routes, fit) = local_search(
                net, vnr, &base, &candidates, &order, &ctx, cfg, gamma_p, x, routes, fit,
            );
            let delta = if fit > 0.0 { 1.0 / fit } else { 0.0 };
            pheromone.global_update(&x, params.rho, delta);
            if best.as_ref().map_or(true, |b| fit < b.2) {
                best = Some((x, routes, fit));
                improved = true;
            }
        }

        #[cfg(debug_assertions)]
        {
            let (lo, hi) = pheromone.bounds();
            let best_delta = best
                .as_ref()
                .map_or(tau0, |b| if b.2 > 0.0 { 1.0 / b.2 } else { tau0 });
            let cap = tau0.max(best_delta) + tau0;
            debug_assert!(lo > 0.0, "pheromone must stay positive");
            debug_assert!(hi <= cap * (1.0 + 1e-9), "pheromone {hi} above bound {cap}");
        }

        if improved {
            stagnant = 0;
        } else {
            stagnant += 1;
            if params.early_stop.is_some_and(|k| stagnant >= k) {
                break;
            }
        }
    }

    match best {
        Some((placements, routes, fitness)) => EmbeddingSolution {
            vnr_id: vnr.id,
            accepted: true,
            placements,
            routes,
            fitness: Some(fitness),
            reject_reason: None,
        },
        None => EmbeddingSolution::rejected(vnr.id, RejectReason::NoFeasibleAnt),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::substrate::{OpticalLink, SubstrateNode};
    use crate::vnr::VirtualNode;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn occ(pattern: &str) -> Vec<bool> {
        pattern.chars().map(|c| c == '#').collect()
    }

    fn node(id: usize, comp: u32, chan: u32) -> SubstrateNode {
        SubstrateNode {
            id,
            x: 0.0,
            y: 0.0,
            comp_cap: comp,
            chan_cap: chan,
            comp_used: 0,
            chan_used: 0,
        }
    }

    fn vn(comp: u32, chan: u32) -> VirtualNode {
        VirtualNode {
            comp_demand: comp,
            chan_demand: chan,
            pref_center: (0.0, 0.0),
            pref_radius: 1.0e9,
        }
    }

    /// Line 0-1-2-3-4 with wide-open 10-slot links.
    fn line5() -> SubstrateNetwork {
        let nodes = (0..5).map(|i| node(i, 100, 100)).collect();
        let links = (0..4)
            .map(|id| OpticalLink { id, a: id, b: id + 1, occupancy: occ(".........." ) })
            .collect();
        SubstrateNetwork::new(nodes, links).unwrap()
    }

    #[test]
    fn candidate_reduction_applies_degree_filter() {
        // Node 2 sits mid-line with 2 feasible attached links; the ends
        // have 1. A degree-3 vnode rules everything out; degree-2 keeps
        // only the middle ones; degree-0 keeps all.
        let net = line5();
        let hub = VirtualRequest::new(
            0,
            vec![vn(1, 1), vn(1, 1), vn(1, 1), vn(1, 1)],
            vec![(0, 1), (0, 2), (0, 3)],
            2,
        )
        .unwrap();
        let cands = reduce_candidates(&net, &hub);
        assert!(cands[0].is_empty(), "no host has 3 wide-enough links");
        assert_eq!(cands[1], vec![0, 1, 2, 3, 4]);

        let chain = VirtualRequest::new(
            1,
            vec![vn(1, 1), vn(1, 1), vn(1, 1)],
            vec![(0, 1), (1, 2)],
            2,
        )
        .unwrap();
        let cands = reduce_candidates(&net, &chain);
        assert_eq!(cands[1], vec![1, 2, 3], "middle vnode needs degree 2");

        // Saturating the spectrum empties every set for slot demands > 1.
        let mut full = net.clone();
        for l in &mut full.links {
            l.occupancy.iter_mut().for_each(|s| *s = true);
        }
        let cands = reduce_candidates(&full, &chain);
        assert!(cands.iter().all(|c| c.is_empty()));
    }

    #[test]
    fn vnodes_sort_by_scarcity_then_id() {
        let cands = vec![vec![0, 1, 2], vec![0, 1], vec![0]];
        assert_eq!(sorted_vnodes(&cands), vec![2, 1, 0]);
        let equal = vec![vec![0, 1], vec![2, 3], vec![4, 5]];
        assert_eq!(sorted_vnodes(&equal), vec![0, 1, 2]);
        assert_eq!(sorted_vnodes(&[vec![7]]), vec![0]);
    }

    #[test]
    fn heuristic_prices_node_bill_plus_neighbor_distance() {
        // Host capacities keep Δϱ at 0 for a (5,3) demand: 100 vs 60 makes
        // the utilization shares equal (5/100 = 3/60).
        let nodes = (0..3).map(|i| node(i, 100, 60)).collect();
        let links = (0..2)
            .map(|id| OpticalLink { id, a: id, b: id + 1, occupancy: occ("....") })
            .collect();
        let net = SubstrateNetwork::new(nodes, links).unwrap();
        let vnr = VirtualRequest::new(0, vec![vn(5, 3), vn(5, 3)], vec![(0, 1)], 2).unwrap();
        let cands = reduce_candidates(&net, &vnr);
        let base = prune_working_graph(&net, vnr.slot_demand);
        let ctx = HeuristicCtx::build(&net, &vnr, &cands, &base, &PriceTable::default());

        // No placed neighbor: η is the reciprocal of the node bill alone.
        let none = vec![None, None];
        assert_relative_eq!(ctx.heuristic(0, 0, &none).unwrap(), 1.0 / 8.0);
        // Neighbor placed 2 hops away: bill 8 + 2 hops · (B=2 · γ′=1) = 12.
        let placed = vec![None, Some(2)];
        assert_relative_eq!(ctx.heuristic(0, 0, &placed).unwrap(), 1.0 / 12.0);
    }

    #[test]
    fn heuristic_favors_closer_hosts_three_to_one() {
        // Zero node prices isolate the distance term: hosts 1 hop vs 3 hops
        // from the placed neighbor weigh 3:1.
        let net = line5();
        let vnr = VirtualRequest::new(0, vec![vn(1, 1), vn(1, 1)], vec![(0, 1)], 2).unwrap();
        let cands = reduce_candidates(&net, &vnr);
        let base = prune_working_graph(&net, vnr.slot_demand);
        let prices = PriceTable { alpha_p: 0, kappa_p: 0, ..PriceTable::default() };
        let ctx = HeuristicCtx::build(&net, &vnr, &cands, &base, &prices);
        let placed = vec![None, Some(0)];
        let near = ctx.heuristic(0, 1, &placed).unwrap();
        let far = ctx.heuristic(0, 3, &placed).unwrap();
        assert_relative_eq!(near / far, 3.0);
        // A free placement with no placed neighbors hits the sentinel, not
        // a division by zero.
        assert_relative_eq!(ctx.heuristic(0, 1, &vec![None, None]).unwrap(), FREE_PLACEMENT_ETA);
    }

    #[test]
    fn unreachable_neighbor_disqualifies_host() {
        // Cut the line between 1 and 2 by saturating that link: host 0
        // cannot reach a neighbor placed on 3.
        let mut net = line5();
        net.links[1].occupancy.iter_mut().for_each(|s| *s = true);
        let vnr = VirtualRequest::new(0, vec![vn(1, 1), vn(1, 1)], vec![(0, 1)], 2).unwrap();
        let cands = reduce_candidates(&net, &vnr);
        let base = prune_working_graph(&net, vnr.slot_demand);
        let ctx = HeuristicCtx::build(&net, &vnr, &cands, &base, &PriceTable::default());
        let placed = vec![None, Some(3)];
        assert_eq!(ctx.heuristic(0, 0, &placed), None);
        assert!(ctx.heuristic(0, 4, &placed).is_some());

        // select_host skips such hosts entirely.
        let params = AcsParams { q0: 1.0, ..AcsParams::default() };
        let pher = PheromoneMatrix::new(2, 5, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let taken = vec![false; 5];
        let picked = select_host(0, &cands[0], &taken, &placed, &pher, &params, &ctx, &mut rng);
        assert!(matches!(picked, Some(h) if h >= 2));
    }

    #[test]
    fn pheromone_updates_match_hand_values() {
        let mut pher = PheromoneMatrix::new(1, 2, 0.2);
        pher.values[0][0] = 0.5;
        pher.local_update(0, 0, 0.1);
        assert_relative_eq!(pher.get(0, 0), 0.47, epsilon = 1e-12);

        let mut pher = PheromoneMatrix::new(1, 2, 0.2);
        pher.values[0][0] = 0.5;
        pher.values[0][1] = 0.33;
        pher.global_update(&[0], 0.1, 1.0 / 100.0);
        assert_relative_eq!(pher.get(0, 0), 0.451, epsilon = 1e-12);
        // The pair not in the best placement is untouched.
        assert_relative_eq!(pher.get(0, 1), 0.33);
    }

    #[test]
    fn selection_probabilities_normalize() {
        let p = selection_probabilities(&[0.2 * 1.0, 0.1 * 1.0]);
        assert_relative_eq!(p[0], 2.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(p[1], 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn roulette_frequencies_track_weights() {
        // τ = {0.2, 0.1}, equal η, β = 2, q0 = 0 → picks follow {2/3, 1/3}.
        let net = line5();
        let vnr = VirtualRequest::new(0, vec![vn(1, 1)], vec![], 1).unwrap();
        let cands = vec![vec![0, 1]];
        let base = prune_working_graph(&net, 1);
        let ctx = HeuristicCtx::build(&net, &vnr, &cands, &base, &PriceTable::default());
        let mut pher = PheromoneMatrix::new(1, 5, 0.1);
        pher.values[0][0] = 0.2;
        let params = AcsParams { q0: 0.0, ..AcsParams::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let taken = vec![false; 5];
        let none = vec![None];
        let mut first = 0usize;
        let n = 20_000;
        for _ in 0..n {
            match select_host(0, &cands[0], &taken, &none, &pher, &params, &ctx, &mut rng) {
                Some(0) => first += 1,
                Some(1) => {}
                other => panic!("unexpected pick {other:?}"),
            }
        }
        let freq = first as f64 / n as f64;
        assert!((freq - 2.0 / 3.0).abs() < 0.02, "frequency {freq} strays from 2/3");
    }

    #[test]
    fn exploitation_always_takes_argmax() {
        let net = line5();
        let vnr = VirtualRequest::new(0, vec![vn(1, 1)], vec![], 1).unwrap();
        let cands = vec![vec![0, 1, 2]];
        let base = prune_working_graph(&net, 1);
        let ctx = HeuristicCtx::build(&net, &vnr, &cands, &base, &PriceTable::default());
        let mut pher = PheromoneMatrix::new(1, 5, 0.1);
        pher.values[0][1] = 0.9;
        let params = AcsParams { q0: 1.0, ..AcsParams::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let taken = vec![false; 5];
        let none = vec![None];
        for _ in 0..50 {
            assert_eq!(
                select_host(0, &cands[0], &taken, &none, &pher, &params, &ctx, &mut rng),
                Some(1)
            );
        }
        // Equal weights: ties resolve to the lowest host id.
        let pher = PheromoneMatrix::new(1, 5, 0.1);
        assert_eq!(
            select_host(0, &cands[0], &taken, &none, &pher, &params, &ctx, &mut rng),
            Some(0)
        );
    }

    #[test]
    fn construction_respects_host_exclusivity() {
        let net = line5();
        let vnr = VirtualRequest::new(
            0,
            vec![vn(1, 1), vn(1, 1), vn(1, 1)],
            vec![(0, 1), (1, 2)],
            1,
        )
        .unwrap();
        let cands = reduce_candidates(&net, &vnr);
        let order = sorted_vnodes(&cands);
        let base = prune_working_graph(&net, 1);
        let ctx = HeuristicCtx::build(&net, &vnr, &cands, &base, &PriceTable::default());
        let params = AcsParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut taken = vec![false; 5];
        for _ in 0..500 {
            let mut pher = PheromoneMatrix::new(3, 5, 0.2);
            let x = construct_solution(
                &vnr, &cands, &order, &mut pher, &params, &ctx, &mut taken, &mut rng,
            )
            .expect("line network always has room");
            let mut sorted = x.clone();
            sorted.sort_unstable();
            sorted.dedup();
            assert_eq!(sorted.len(), x.len(), "hosts must be pairwise distinct");
        }
    }

    #[test]
    fn nested_candidate_sets_always_complete_in_sorted_order() {
        // Sets {0,1,2} ⊃ {0,1} ⊃ {0}: scarcest-first can never strand a
        // vnode, whatever the draws.
        let net = line5();
        let vnr = VirtualRequest::new(0, vec![vn(1, 1), vn(1, 1), vn(1, 1)], vec![], 1).unwrap();
        let cands = vec![vec![0, 1, 2], vec![0, 1], vec![0]];
        let order = sorted_vnodes(&cands);
        let base = prune_working_graph(&net, 1);
        let ctx = HeuristicCtx::build(&net, &vnr, &cands, &base, &PriceTable::default());
        let params = AcsParams { q0: 0.0, ..AcsParams::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut taken = vec![false; 5];
        for _ in 0..300 {
            let mut pher = PheromoneMatrix::new(3, 5, 0.2);
            let x = construct_solution(
                &vnr, &cands, &order, &mut pher, &params, &ctx, &mut taken, &mut rng,
            );
            assert!(x.is_some(), "sorted order must always complete");
        }
    }

    #[test]
    fn forced_placement_embeds_in_one_generation() {
        // Tight placement discs pin each vnode to exactly one host: the
        // colony has no choice to make and accepts in generation 1.
        let mut nodes: Vec<SubstrateNode> = (0..3).map(|i| node(i, 10, 10)).collect();
        for (i, n) in nodes.iter_mut().enumerate() {
            n.x = i as f64 * 100.0;
        }
        let links = vec![
            OpticalLink { id: 0, a: 0, b: 1, occupancy: occ("....") },
            OpticalLink { id: 1, a: 1, b: 2, occupancy: occ("....") },
        ];
        let net = SubstrateNetwork::new(nodes, links).unwrap();
        let mut vnr = VirtualRequest::new(0, vec![vn(5, 5), vn(2, 2)], vec![(0, 1)], 2).unwrap();
        vnr.vnodes[0].pref_center = (0.0, 0.0);
        vnr.vnodes[0].pref_radius = 1.0;
        vnr.vnodes[1].pref_center = (100.0, 0.0);
        vnr.vnodes[1].pref_radius = 1.0;
        let params = AcsParams { max_generations: 1, colony_size: 1, ..AcsParams::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sol = bivne_embed(&net, &vnr, &params, &PriceTable::default(), &FragConfig::default(), &mut rng);
        assert!(sol.accepted);
        assert_eq!(sol.placements, vec![0, 1]);
        assert_eq!(sol.routes.len(), 1);

        // An impossible vnode rejects before any generation runs.
        let mut heavy = vnr.clone();
        heavy.vnodes[0].comp_demand = 99;
        let sol = bivne_embed(&net, &heavy, &params, &PriceTable::default(), &FragConfig::default(), &mut rng);
        assert!(!sol.accepted);
        assert_eq!(sol.reject_reason, Some(RejectReason::EmptyCandidateSet { vnode: 0 }));
        assert!(sol.placements.is_empty() && sol.routes.is_empty());
    }

    #[test]
    fn embedding_is_reproducible_per_seed() {
        let net = line5();
        let vnr = VirtualRequest::new(
            0,
            vec![vn(3, 4), vn(2, 2), vn(5, 1)],
            vec![(0, 1), (1, 2)],
            2,
        )
        .unwrap();
        let params = AcsParams { max_generations: 10, ..AcsParams::default() };
        let run = |seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            bivne_embed(&net, &vnr, &params, &PriceTable::default(), &FragConfig::default(), &mut rng)
        };
        assert_eq!(run(5), run(5));
        let a = run(5);
        assert!(a.accepted);
        // Accepted output carries a fitness and clean routes.
        assert!(a.fitness.unwrap() > 0.0);
    }
}
