//! Virtual network requests: what tenants ask the substrate to host.
//!
//! A request is a small graph of virtual nodes (computing + channel demands,
//! a preferred location disc) joined by virtual links. All virtual links of
//! one request share a single frequency-slot demand, so every route embedded
//! for the request occupies the same number of slots end to end.

use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::substrate::{euclidean, NodeId, SubstrateNetwork};

#[derive(Debug, Error)]
pub enum VnrError {
    #[error("request {vnr}: {reason}")]
    Invalid { vnr: u64, reason: String },
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
    #[error("{0}")]
    BadProfile(String),
}

/// One virtual node of a request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VirtualNode {
    /// Computing demand (CPU units).
    pub comp_demand: u32,
    /// Channel demand (bandwidth units).
    pub chan_demand: u32,
    /// Center of the preferred placement disc.
    pub pref_center: (f64, f64),
    /// Radius of the preferred placement disc.
    pub pref_radius: f64,
}

/// A virtual network request. Virtual nodes are addressed by their index in
/// `vnodes`; `vlinks` holds normalized `(low, high)` index pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VirtualRequest {
    pub id: u64,
    pub vnodes: Vec<VirtualNode>,
    pub vlinks: Vec<(usize, usize)>,
    /// Frequency slots demanded by every virtual link of this request.
    pub slot_demand: u32,
}

impl VirtualRequest {
    pub fn new(
        id: u64,
        vnodes: Vec<VirtualNode>,
        vlinks: Vec<(usize, usize)>,
        slot_demand: u32,
    ) -> Result<Self, VnrError> {
        let fail = |reason: String| Err(VnrError::Invalid { vnr: id, reason });
        if vnodes.is_empty() {
            return fail("request has no virtual nodes".into());
        }
        for (i, vn) in vnodes.iter().enumerate() {
            if vn.comp_demand == 0 || vn.chan_demand == 0 {
                return fail(format!("vnode {i} has a zero demand"));
            }
            if !(vn.pref_radius > 0.0) || !vn.pref_radius.is_finite() {
                return fail(format!("vnode {i} has a non-positive placement radius"));
            }
        }
        if slot_demand == 0 {
            return fail("slot demand must be at least 1".into());
        }
        let mut normalized = Vec::with_capacity(vlinks.len());
        for &(a, b) in &vlinks {
            if a >= vnodes.len() || b >= vnodes.len() {
                return fail(format!("vlink ({a}, {b}) references a missing vnode"));
            }
            if a == b {
                return fail(format!("vlink ({a}, {b}) is a self-loop"));
            }
            let pair = (a.min(b), a.max(b));
            if normalized.contains(&pair) {
                return fail(format!("duplicate vlink ({}, {})", pair.0, pair.1));
            }
            normalized.push(pair);
        }
        Ok(VirtualRequest {
            id,
            vnodes,
            vlinks: normalized,
            slot_demand,
        })
    }

    /// Number of virtual links attached to vnode `idx`.
    pub fn degree(&self, idx: usize) -> usize {
        self.vlinks.iter().filter(|&&(a, b)| a == idx || b == idx).count()
    }

    /// Indices of vnodes joined to `idx` by a vlink.
    pub fn neighbors(&self, idx: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .vlinks
            .iter()
            .filter_map(|&(a, b)| {
                if a == idx {
                    Some(b)
                } else if b == idx {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Total computing demand over all vnodes.
    pub fn total_comp(&self) -> u64 {
        self.vnodes.iter().map(|v| v.comp_demand as u64).sum()
    }

    /// Total channel demand over all vnodes.
    pub fn total_chan(&self) -> u64 {
        self.vnodes.iter().map(|v| v.chan_demand as u64).sum()
    }
}

/// Substrate nodes able to host `vn` right now: enough spare computing and
/// channel capacity, and inside the preferred disc. Ascending node id.
pub fn candidate_nodes(net: &SubstrateNetwork, vn: &VirtualNode) -> Vec<NodeId> {
    net.nodes
        .iter()
        .filter(|n| {
            n.comp_free() >= vn.comp_demand
                && n.chan_free() >= vn.chan_demand
                && euclidean(n.position(), vn.pref_center) <= vn.pref_radius
        })
        .map(|n| n.id)
        .collect()
}

/// Distributions from which request batches are drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VnrProfile {
    /// Inclusive range for the vnode count per request.
    pub vnodes: (usize, usize),
    /// Probability that any given vnode pair is joined by a vlink.
    pub link_prob: f64,
    /// Inclusive range for per-vnode computing demand.
    pub comp_demand: (u32, u32),
    /// Inclusive range for per-vnode channel demand.
    pub chan_demand: (u32, u32),
    /// Inclusive range for the per-request slot demand.
    pub slot_demand: (u32, u32),
    /// Inclusive range for the preferred-disc radius.
    pub radius: (f64, f64),
    /// Side length of the square on which disc centers are drawn.
    pub side: f64,
}

impl VnrProfile {
    pub fn validate(&self) -> Result<(), VnrError> {
        if self.vnodes.0 == 0 || self.vnodes.0 > self.vnodes.1 {
            return Err(VnrError::BadProfile(format!(
                "vnodes range ({}, {}) must satisfy 1 <= lo <= hi",
                self.vnodes.0, self.vnodes.1
            )));
        }
        if !(0.0..=1.0).contains(&self.link_prob) {
            return Err(VnrError::BadProfile(format!(
                "link_prob {} must lie in [0, 1]",
                self.link_prob
            )));
        }
        for (name, (lo, hi)) in [
            ("comp_demand", self.comp_demand),
            ("chan_demand", self.chan_demand),
            ("slot_demand", self.slot_demand),
        ] {
            if lo == 0 || lo > hi {
                return Err(VnrError::BadProfile(format!(
                    "{name} range ({lo}, {hi}) must satisfy 1 <= lo <= hi"
                )));
            }
        }
        if !(self.radius.0 > 0.0) || self.radius.0 > self.radius.1 {
            return Err(VnrError::BadProfile(format!(
                "radius range ({}, {}) must satisfy 0 < lo <= hi",
                self.radius.0, self.radius.1
            )));
        }
        if !(self.side > 0.0) {
            return Err(VnrError::BadProfile("side must be positive".into()));
        }
        Ok(())
    }
}

/// Draws `count` requests from `profile`. Requests are drawn one after the
/// other, so with a fixed generator state the first `k` requests of a longer
/// batch equal a `k`-request batch: growing a sweep extends it rather than
/// reshuffling it.
pub fn generate_requests<R: Rng>(
    profile: &VnrProfile,
    count: usize,
    rng: &mut R,
) -> Result<Vec<VirtualRequest>, VnrError> {
    profile.validate()?;
    let mut out = Vec::with_capacity(count);
    for id in 0..count {
        let n = rng.gen_range(profile.vnodes.0..=profile.vnodes.1);
        let mut vnodes = Vec::with_capacity(n);
        for _ in 0..n {
            vnodes.push(VirtualNode {
                comp_demand: rng.gen_range(profile.comp_demand.0..=profile.comp_demand.1),
                chan_demand: rng.gen_range(profile.chan_demand.0..=profile.chan_demand.1),
                pref_center: (
                    rng.gen::<f64>() * profile.side,
                    rng.gen::<f64>() * profile.side,
                ),
                pref_radius: profile.radius.0
                    + rng.gen::<f64>() * (profile.radius.1 - profile.radius.0),
            });
        }
        let slot_demand = rng.gen_range(profile.slot_demand.0..=profile.slot_demand.1);
        let mut vlinks = Vec::new();
        for a in 0..n {
            for b in (a + 1)..n {
                if rng.gen_bool(profile.link_prob) {
                    vlinks.push((a, b));
                }
            }
        }
        out.push(VirtualRequest::new(id as u64, vnodes, vlinks, slot_demand)?);
    }
    Ok(out)
}

/// On-disk request batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VnrBatchDoc {
    pub vnrs: Vec<VirtualRequest>,
}

/// Reads a request batch from disk, re-checking every request's invariants.
pub fn load_batch(path: &Path) -> Result<Vec<VirtualRequest>, VnrError> {
    let text = std::fs::read_to_string(path).map_err(|source| VnrError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let doc: VnrBatchDoc = serde_json::from_str(&text).map_err(|source| VnrError::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    doc.vnrs
        .into_iter()
        .map(|r| VirtualRequest::new(r.id, r.vnodes, r.vlinks, r.slot_demand))
        .collect()
}
