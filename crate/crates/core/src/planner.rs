//! Reply pacing planner.
//!
//! Given a network, decides how much sending-queue space each router needs to
//! hold a full reply burst and how far apart consecutive reply bursts must be
//! so that every router drains one burst before the next one reaches it.
//!
//! The interval for a candidate router `r` is
//!
//! ```text
//! interval(r) = sum_{k=1..big} T(x_k) + gaps * t_avg - t_max - os * t_avg
//! ```
//!
//! where `big` is the number of replies `r` forwards per burst, `T(x_k)` the
//! serialization time of reply `k` on its egress link at `r`, `gaps` the
//! number of idle message times before the first remote reply arrives, `t_max`
//! the largest single reply time at `r` and `os` the number of spare queue
//! slots that let bursts overlap. The `os` term is optional; without it the
//! interval is the plain drain-before-next-burst bound. The network interval
//! is the largest candidate interval.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::scalar::Scalar;
use crate::topology::{Layout, LinkClass, LinkId, Network, NodeId, TopologyError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanError {
    #[error("network has no clients")]
    NoClients,
    #[error("network has no services")]
    NoServices,
    #[error("router {0} has no attached clients")]
    NoAttachedClients(NodeId),
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

pub type Result<T> = std::result::Result<T, PlanError>;

/// A message of `size_bytes` carried at `bandwidth_bps`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MessageSpec {
    pub size_bytes: u32,
    pub bandwidth_bps: u64,
}

impl MessageSpec {
    pub fn new(size_bytes: u32, bandwidth_bps: u64) -> Self {
        assert!(size_bytes > 0 && bandwidth_bps > 0, "empty message spec");
        MessageSpec {
            size_bytes,
            bandwidth_bps,
        }
    }
}

/// Time the message occupies the link: `size * 8 / bandwidth`.
pub fn message_time<T: Scalar>(spec: MessageSpec) -> T {
    T::from_count(u64::from(spec.size_bytes) * 8) / T::from_count(spec.bandwidth_bps)
}

/// Required sending-queue space, per directed link and per router.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct QueuePlan {
    /// Number of (service, client) reply pairs whose route uses the link.
    pub per_link: BTreeMap<LinkId, usize>,
    /// Replies a router forwards per full burst (sum over its egress links),
    /// never less than 1.
    pub per_router: BTreeMap<NodeId, usize>,
}

impl QueuePlan {
    pub fn link(&self, link: LinkId) -> usize {
        self.per_link.get(&link).copied().unwrap_or(0)
    }

    pub fn router(&self, router: NodeId) -> usize {
        self.per_router.get(&router).copied().unwrap_or(1)
    }
}

pub fn queue_sizes(net: &Network) -> Result<QueuePlan> {
    let clients = net.clients();
    let services = net.services();
    if clients.is_empty() {
        return Err(PlanError::NoClients);
    }
    if services.is_empty() {
        return Err(PlanError::NoServices);
    }
    let mut per_link: BTreeMap<LinkId, usize> = BTreeMap::new();
    for &s in &services {
        for &c in &clients {
            for l in net.route(s, c)?.links {
                *per_link.entry(l).or_default() += 1;
            }
        }
    }
    let per_router = net
        .routers()
        .into_iter()
        .map(|r| {
            let forwarded: usize = net
                .egress(r)
                .iter()
                .map(|l| per_link.get(l).copied().unwrap_or(0))
                .sum();
            (r, forwarded.max(1))
        })
        .collect();
    Ok(QueuePlan {
        per_link,
        per_router,
    })
}

/// Burst accounting for one candidate router.
#[derive(Clone, Debug, PartialEq)]
pub struct BurstProfile<T> {
    pub router: NodeId,
    /// Replies forwarded by the router per burst.
    pub big: usize,
    /// Idle message times before the first remote reply arrives.
    pub gaps: usize,
    /// Largest single reply time on an egress link of the router.
    pub t_max: T,
    /// Reply time at the average link bandwidth.
    pub t_avg: T,
    /// Spare queue slots that allow consecutive bursts to overlap.
    pub os: usize,
    /// Sum of the `big` reply times, each on its own egress link.
    pub burst_time: T,
}

impl<T: Scalar> BurstProfile<T> {
    /// Candidate interval, with or without the overlap credit. Clamped at 0.
    pub fn interval(&self, use_os: bool) -> T {
        let mut v = self.burst_time + T::from_count(self.gaps as u64) * self.t_avg - self.t_max;
        if use_os {
            v = v - T::from_count(self.os as u64) * self.t_avg;
        }
        v.clamp_non_negative()
    }
}

fn mean_bandwidth<T: Scalar>(net: &Network, class: LinkClass) -> Option<T> {
    let bws: Vec<u64> = net
        .links()
        .iter()
        .filter(|l| l.class == class)
        .map(|l| l.bandwidth_bps)
        .collect();
    if bws.is_empty() {
        None
    } else {
        Some(T::from_count(bws.iter().sum()) / T::from_count(bws.len() as u64))
    }
}

/// Average of the mean main-link and mean sub-link bandwidths.
fn average_bandwidth<T: Scalar>(net: &Network) -> T {
    let main = mean_bandwidth::<T>(net, LinkClass::Main);
    let sub = mean_bandwidth::<T>(net, LinkClass::Sub);
    match (main, sub) {
        (Some(m), Some(s)) => (m + s) / T::from_count(2),
        (Some(x), None) | (None, Some(x)) => x,
        (None, None) => T::one(),
    }
}

/// Service-hosting routers other than `router`, with their service counts.
fn service_routers(net: &Network) -> Vec<(NodeId, usize)> {
    net.routers()
        .into_iter()
        .filter_map(|r| {
            let n = net.service_count(r).unwrap_or(0);
            (n > 0).then_some((r, n))
        })
        .collect()
}

pub fn burst_profile<T: Scalar>(
    net: &Network,
    router: NodeId,
    reply_bytes: u32,
) -> Result<BurstProfile<T>> {
    let clients = net.clients_of(router)?;
    if clients.is_empty() {
        return Err(PlanError::NoAttachedClients(router));
    }
    let total_services = net.services().len();
    if total_services == 0 {
        return Err(PlanError::NoServices);
    }
    let big = clients.len() * total_services;

    let reply_time = |link: LinkId| {
        message_time::<T>(MessageSpec::new(reply_bytes, net.link(link).bandwidth_bps))
    };

    let mut burst_time = T::zero();
    for &c in &clients {
        let link = net
            .link_between(router, c)
            .expect("client is attached to its router");
        burst_time = burst_time + T::from_count(total_services as u64) * reply_time(link);
    }

    let gaps = service_routers(net)
        .iter()
        .filter(|&&(r, _)| r != router)
        .filter_map(|&(r, _)| net.router_hops(r, router))
        .min()
        .map_or(0, |h| h + 1);

    let t_max = net
        .egress(router)
        .iter()
        .map(|&l| reply_time(l))
        .fold(T::zero(), T::max_of);

    let t_avg = T::from_count(u64::from(reply_bytes) * 8) / average_bandwidth::<T>(net);

    let qsize = queue_sizes(net)?.router(router);
    let os = overlapped_space(net, router, qsize)?;

    Ok(BurstProfile {
        router,
        big,
        gaps,
        t_max,
        t_avg,
        os,
        burst_time,
    })
}

/// Spare sending-queue slots at `router` once the largest single-router
/// contribution for every receiver is reserved.
pub fn overlapped_space(net: &Network, router: NodeId, qsize: usize) -> Result<usize> {
    overlapped_space_for_bursts(net, router, qsize, 1)
}

/// As [`overlapped_space`], for scenarios where every client issues
/// `bursts_per_client` consecutive requests. A lone client receiving several
/// consecutive bursts counts as that many receivers.
pub fn overlapped_space_for_bursts(
    net: &Network,
    router: NodeId,
    qsize: usize,
    bursts_per_client: usize,
) -> Result<usize> {
    let clients = net.client_count(router)?;
    let receivers = if clients == 1 {
        bursts_per_client.max(1)
    } else {
        clients
    };
    let largest = service_routers(net)
        .iter()
        .map(|&(_, n)| n)
        .max()
        .unwrap_or(0);
    Ok(qsize.saturating_sub(largest * receivers))
}

/// Candidate routers in selection order, duplicates removed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateSet {
    pub routers: Vec<NodeId>,
}

impl CandidateSet {
    pub fn z(&self) -> usize {
        self.routers.len()
    }

    fn push(&mut self, r: NodeId) {
        if !self.routers.contains(&r) {
            self.routers.push(r);
        }
    }
}

fn client_routers(net: &Network) -> Result<Vec<NodeId>> {
    let routers: Vec<NodeId> = net
        .routers()
        .into_iter()
        .filter(|&r| net.client_count(r).map(|n| n > 0).unwrap_or(false))
        .collect();
    if routers.is_empty() {
        Err(PlanError::NoClients)
    } else {
        Ok(routers)
    }
}

/// Candidate selection on a router chain.
///
/// 1. the router of the client with the longest service-to-client path;
/// 2. the router with the most clients, ties going to the one receiving
///    the most services from a single side;
/// 3. the client-attached router nearest a chain end;
/// 4. for any selected router with a single client, the nearest other
///    client-attached router.
///
/// Remaining ties resolve to the lowest node id.
pub fn candidates_decentralised(net: &Network) -> Result<CandidateSet> {
    if net.layout() != Layout::Decentralised {
        return Err(TopologyError::WrongLayout {
            expected: Layout::Decentralised,
        }
        .into());
    }
    let with_clients = client_routers(net)?;
    let chain = net.router_chain()?;
    let pos = |r: NodeId| chain.iter().position(|&x| x == r).expect("router on chain");
    let mut set = CandidateSet {
        routers: Vec::new(),
    };

    // rule 1
    let mut longest: Option<(usize, NodeId)> = None;
    for s in net.services() {
        for c in net.clients() {
            let len = net.route(s, c)?.len();
            let r = net.attached_router(c)?;
            let better = match longest {
                None => true,
                Some((best, br)) => len > best || (len == best && r < br),
            };
            if better {
                longest = Some((len, r));
            }
        }
    }
    if let Some((_, r)) = longest {
        set.push(r);
    }

    // rule 2
    let one_side = |r: NodeId| -> Result<usize> {
        let split = net.split_at_router(r)?;
        let count = |side: &BTreeSet<NodeId>| {
            side.iter()
                .filter(|&&n| matches!(net.kind(n), Ok(crate::topology::NodeKind::Service)))
                .count()
        };
        Ok(count(&split.left).max(count(&split.right)))
    };
    let mut best2: Option<(usize, usize, NodeId)> = None;
    for &r in &with_clients {
        let key = (net.client_count(r)?, one_side(r)?, r);
        let better = match best2 {
            None => true,
            Some((c, s, br)) => (key.0, key.1) > (c, s) || ((key.0, key.1) == (c, s) && r < br),
        };
        if better {
            best2 = Some(key);
        }
    }
    if let Some((_, _, r)) = best2 {
        set.push(r);
    }

    // rule 3
    let end_distance = |r: NodeId| {
        let p = pos(r);
        p.min(chain.len() - 1 - p)
    };
    if let Some(&r) = with_clients.iter().min_by_key(|&&r| (end_distance(r), r)) {
        set.push(r);
    }

    // rule 4
    let selected = set.routers.clone();
    for r in selected {
        if net.client_count(r)? == 1 {
            let nearest = with_clients
                .iter()
                .copied()
                .filter(|&o| o != r)
                .min_by_key(|&o| (pos(o).abs_diff(pos(r)), o));
            if let Some(o) = nearest {
                set.push(o);
            }
        }
    }
    Ok(set)
}

/// The router with the most clients and, among those, the fewest services.
pub fn candidate_centralised(net: &Network) -> Result<CandidateSet> {
    if net.layout() != Layout::Centralised {
        return Err(TopologyError::WrongLayout {
            expected: Layout::Centralised,
        }
        .into());
    }
    let with_clients = client_routers(net)?;
    let mut keyed = Vec::with_capacity(with_clients.len());
    for r in with_clients {
        keyed.push((net.client_count(r)?, net.service_count(r)?, r));
    }
    let chosen = keyed
        .into_iter()
        .min_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)))
        .map(|(_, _, r)| r)
        .expect("non-empty");
    Ok(CandidateSet {
        routers: vec![chosen],
    })
}

pub fn candidates(net: &Network) -> Result<CandidateSet> {
    match net.layout() {
        Layout::Decentralised => candidates_decentralised(net),
        Layout::Centralised => candidate_centralised(net),
    }
}

/// Planner output for one network.
#[derive(Clone, Debug, PartialEq)]
pub struct PacingPlan<T> {
    pub best_interval: T,
    pub use_os: bool,
    pub queues: QueuePlan,
    pub candidates: CandidateSet,
    pub profiles: BTreeMap<NodeId, BurstProfile<T>>,
    pub intervals: BTreeMap<NodeId, T>,
}

/// Plan the reply spacing for `net`. With `use_os` the overlap credit is
/// subtracted from every candidate interval.
pub fn best_interval<T: Scalar>(
    net: &Network,
    reply_bytes: u32,
    use_os: bool,
) -> Result<PacingPlan<T>> {
    let queues = queue_sizes(net)?;
    let candidates = candidates(net)?;
    let mut profiles = BTreeMap::new();
    let mut intervals = BTreeMap::new();
    let mut best = T::zero();
    for &r in &candidates.routers {
        let profile = burst_profile::<T>(net, r, reply_bytes)?;
        let interval = profile.interval(use_os);
        best = best.max_of(interval);
        intervals.insert(r, interval);
        profiles.insert(r, profile);
    }
    Ok(PacingPlan {
        best_interval: best,
        use_os,
        queues,
        candidates,
        profiles,
        intervals,
    })
}
