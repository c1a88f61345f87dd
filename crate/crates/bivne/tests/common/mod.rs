//! Shared fixtures and independent reference computations for the
//! acceptance suite: tiny substrate builders, brute-force spectrum scans,
//! and an all-pairs hop-count oracle. Everything here recomputes results
//! from first principles so the suite never certifies the library against
//! itself.

use bivne::fragcost::FragConfig;
use bivne::substrate::{OpticalLink, SubstrateNetwork, SubstrateNode};
use bivne::vnr::VirtualNode;

/// Prints one verdict line for a criterion and fails the test on FAIL.
/// Run the suite with `--nocapture` to see the PASS lines too.
pub fn verdict(criterion: &str, ok: bool, detail: &str) {
    if ok {
        println!("{criterion}: PASS — {detail}");
    } else {
        println!("{criterion}: FAIL — {detail}");
        panic!("{criterion} failed: {detail}");
    }
}

/// Spectrum from a picture: `'#'` occupied, `'.'` free.
pub fn occ(pattern: &str) -> Vec<bool> {
    pattern.chars().map(|c| c == '#').collect()
}

pub fn node_at(id: usize, pos: (f64, f64), comp: u32, chan: u32) -> SubstrateNode {
    SubstrateNode {
        id,
        x: pos.0,
        y: pos.1,
        comp_cap: comp,
        chan_cap: chan,
        comp_used: 0,
        chan_used: 0,
    }
}

pub fn link(id: usize, a: usize, b: usize, pattern: &str) -> OpticalLink {
    OpticalLink {
        id,
        a,
        b,
        occupancy: occ(pattern),
    }
}

pub fn vnode(comp: u32, chan: u32, center: (f64, f64), radius: f64) -> VirtualNode {
    VirtualNode {
        comp_demand: comp,
        chan_demand: chan,
        pref_center: center,
        pref_radius: radius,
    }
}

pub fn net_from(
    nodes: Vec<SubstrateNode>,
    links: Vec<OpticalLink>,
) -> SubstrateNetwork {
    SubstrateNetwork::new(nodes, links).expect("fixture topology is well-formed")
}

/// Maximal free runs as inclusive `(start, end)` pairs, by direct scan.
pub fn free_runs_brute(occupancy: &[bool]) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut start = None;
    for (i, &used) in occupancy.iter().enumerate() {
        match (used, start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                runs.push((s, i - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push((s, occupancy.len() - 1));
    }
    runs
}

/// The fragment qualification rule, restated independently of the library:
/// a free run is a fragment when it is too short to be worth keeping.
pub fn counts_as_fragment(len: usize, cfg: &FragConfig) -> bool {
    let min = if cfg.include_single_slot { 1 } else { 2 };
    len >= min && len <= cfg.xi_max as usize
}

/// Total slots of qualifying free runs lying entirely inside `[lo, hi]`.
pub fn fragment_census_within(
    occupancy: &[bool],
    lo: usize,
    hi: usize,
    cfg: &FragConfig,
) -> u64 {
    free_runs_brute(occupancy)
        .into_iter()
        .filter(|&(s, e)| s >= lo && e <= hi && counts_as_fragment(e - s + 1, cfg))
        .map(|(s, e)| (e - s + 1) as u64)
        .sum()
}

/// All-pairs hop counts by Floyd–Warshall over an undirected edge list.
pub fn floyd_warshall(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<Option<u32>>> {
    let mut d = vec![vec![None; n]; n];
    for v in 0..n {
        d[v][v] = Some(0);
    }
    for &(a, b) in edges {
        d[a][b] = Some(1);
        d[b][a] = Some(1);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(x), Some(y)) = (d[i][k], d[k][j]) {
                    if d[i][j].map_or(true, |cur| x + y < cur) {
                        d[i][j] = Some(x + y);
                    }
                }
            }
        }
    }
    d
}
