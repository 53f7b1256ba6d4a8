//! Localized geometric routing over a [`NodeSet`].
//!
//! At each step the holder of the packet delivers directly if the destination
//! is within range `R`; otherwise it forms the η-disk pointing at the
//! destination and hands the packet to a relay chosen from the nodes inside
//! it. Relays may revisit earlier nodes.

use std::io::Write;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{normalize_angle, Point2D, Wedge};
use crate::network::{NetworkParams, NodeId, NodeSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelayPolicy {
    /// Uniform choice among the wedge members.
    #[default]
    RandomWedge,
    /// Member closest to the destination, among those closer than the holder.
    Greedy,
    /// Most forward progress along the holder→destination axis.
    Mfr,
    /// Nearest member with positive progress.
    Nfp,
    /// Smallest angular deviation from the holder→destination axis.
    Compass,
}

impl FromStr for RelayPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "random_wedge" | "random" => RelayPolicy::RandomWedge,
            "greedy" => RelayPolicy::Greedy,
            "mfr" => RelayPolicy::Mfr,
            "nfp" => RelayPolicy::Nfp,
            "compass" => RelayPolicy::Compass,
            other => return Err(Error::invalid(format!("unknown relay policy `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RouteStatus {
    Delivered,
    Stuck,
    HopCapExceeded,
}

/// Result of routing one packet.
///
/// `hops` counts transmissions, including the final one to the destination
/// when delivered. `path` lists the nodes that held the packet in order; it
/// starts with the source when the source is a node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteOutcome {
    pub status: RouteStatus,
    pub hops: u64,
    pub path: Vec<NodeId>,
    pub final_distance: f64,
}

/// `⌈40·h/R⌉ + 100`.
pub fn default_hop_cap(h: f64, range: f64) -> u64 {
    (40.0 * h / range).ceil() as u64 + 100
}

/// Picks the next relay among `candidates` (id, position). Returns `None`
/// when the policy finds no eligible candidate: an empty list, or no node
/// with positive progress (greedy, MFR, NFP).
pub fn select_relay<R: Rng + ?Sized>(
    policy: RelayPolicy,
    candidates: &[(NodeId, Point2D)],
    current: Point2D,
    dst: Point2D,
    rng: &mut R,
) -> Option<NodeId> {
    if candidates.is_empty() {
        return None;
    }
    let axis = dst - current;
    let axis_len = axis.norm();
    let progress = |p: Point2D| (p - current).dot(axis) / axis_len;
    let by = |f: &dyn Fn(Point2D) -> f64| {
        candidates
            .iter()
            .map(|&(id, p)| (id, f(p)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(id, _)| id)
    };
    match policy {
        RelayPolicy::RandomWedge => Some(candidates[rng.random_range(0..candidates.len())].0),
        RelayPolicy::Greedy => {
            let here = axis_len;
            by(&|p| {
                let d = p.distance(dst);
                if d < here {
                    d
                } else {
                    f64::INFINITY
                }
            })
            .filter(|&id| lookup(candidates, id).distance(dst) < here)
        }
        RelayPolicy::Mfr => by(&|p| -progress(p)).filter(|&id| progress(lookup(candidates, id)) > 0.0),
        RelayPolicy::Nfp => by(&|p| {
            if progress(p) > 0.0 {
                p.distance(current)
            } else {
                f64::INFINITY
            }
        })
        .filter(|&id| progress(lookup(candidates, id)) > 0.0),
        RelayPolicy::Compass => {
            let heading = axis.angle();
            by(&|p| normalize_angle((p - current).angle() - heading).abs())
        }
    }
}

fn lookup(candidates: &[(NodeId, Point2D)], id: NodeId) -> Point2D {
    candidates.iter().find(|c| c.0 == id).map(|c| c.1).expect("selected id is a candidate")
}

/// Routes from node `src` to node `dst`.
pub fn route_packet<R: Rng + ?Sized>(
    ns: &NodeSet,
    src: NodeId,
    dst: NodeId,
    policy: RelayPolicy,
    params: &NetworkParams,
    hop_cap: u64,
    rng: &mut R,
) -> Result<RouteOutcome> {
    let src_pos = ns.position(src)?;
    let dst_pos = ns.position(dst)?;
    if src == dst {
        return Err(Error::invalid("source and destination must differ"));
    }
    if hop_cap == 0 {
        return Err(Error::invalid("hop cap must be at least 1"));
    }
    Ok(route(ns, Some(src), src_pos, dst_pos, policy, params, hop_cap, rng))
}

/// Routes from an arbitrary position to an arbitrary destination position;
/// neither endpoint needs to be a node. The destination only terminates
/// routing (delivery when within range).
pub fn route_between_points<R: Rng + ?Sized>(
    ns: &NodeSet,
    origin: Point2D,
    dst: Point2D,
    policy: RelayPolicy,
    params: &NetworkParams,
    hop_cap: u64,
    rng: &mut R,
) -> Result<RouteOutcome> {
    if hop_cap == 0 {
        return Err(Error::invalid("hop cap must be at least 1"));
    }
    Ok(route(ns, None, origin, dst, policy, params, hop_cap, rng))
}

#[allow(clippy::too_many_arguments)]
fn route<R: Rng + ?Sized>(
    ns: &NodeSet,
    src: Option<NodeId>,
    origin: Point2D,
    dst: Point2D,
    policy: RelayPolicy,
    params: &NetworkParams,
    hop_cap: u64,
    rng: &mut R,
) -> RouteOutcome {
    let range = params.range;
    let mut path: Vec<NodeId> = src.into_iter().collect();
    let mut current = src;
    let mut pos = origin;
    let mut hops = 0u64;
    let mut candidates: Vec<(NodeId, Point2D)> = Vec::new();
    loop {
        let distance = pos.distance(dst);
        if hops >= hop_cap {
            return RouteOutcome { status: RouteStatus::HopCapExceeded, hops, path, final_distance: distance };
        }
        if distance <= range {
            return RouteOutcome { status: RouteStatus::Delivered, hops: hops + 1, path, final_distance: distance };
        }
        let wedge = Wedge::toward(pos, dst, range, params.eta).expect("validated parameters");
        candidates.clear();
        ns.for_each_in_wedge(&wedge, current, |id, p| candidates.push((id, p)));
        let Some(next) = select_relay(policy, &candidates, pos, dst, rng) else {
            return RouteOutcome { status: RouteStatus::Stuck, hops, path, final_distance: distance };
        };
        let next_pos = ns.positions()[next];
        debug_assert!(wedge.contains(next_pos));
        current = Some(next);
        pos = next_pos;
        path.push(next);
        hops += 1;
    }
}

/// Writes `hop,node_id,x,y,distance_to_dst`, one row per holder of the packet
/// followed by the destination row when delivered. A synthetic origin (not a
/// node) is written with an empty `node_id`.
pub fn write_trace_csv<W: Write>(
    out: &mut W,
    outcome: &RouteOutcome,
    ns: &NodeSet,
    origin: Point2D,
    origin_is_node: bool,
    dst: Point2D,
    dst_id: Option<NodeId>,
) -> Result<()> {
    writeln!(out, "hop,node_id,x,y,distance_to_dst")?;
    let mut hop = 0usize;
    if !origin_is_node {
        writeln!(out, "0,,{},{},{}", origin.x, origin.y, origin.distance(dst))?;
        hop = 1;
    }
    for &id in &outcome.path {
        let p = ns.positions()[id];
        writeln!(out, "{hop},{id},{},{},{}", p.x, p.y, p.distance(dst))?;
        hop += 1;
    }
    if outcome.status == RouteStatus::Delivered {
        let id = dst_id.map(|i| i.to_string()).unwrap_or_default();
        writeln!(out, "{hop},{id},{},{},0", dst.x, dst.y)?;
    }
    Ok(())
}
