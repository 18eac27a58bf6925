//! Discovery participants: clients multicasting M-SEARCH requests, services
//! answering with unicast replies, and background cross-traffic flows.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::sim::{Agent, Destination, Injection, Packet, PacketKind};
use crate::time::SimTime;
use crate::topology::{Network, NodeId, NodeKind};

pub const MSEARCH_BYTES: u32 = 64;
pub const REPLY_BYTES: u32 = 128;

/// How a service spaces its replies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ReplyPolicy {
    /// Each reply waits an independent uniform delay in `[0, mx]` seconds
    /// after its request arrives. `mx = 0` answers immediately.
    Baseline { mx: f64 },
    /// The i-th reply of a service leaves `i * interval` seconds after the
    /// service's first reply.
    Paced { interval: f64 },
}

impl ReplyPolicy {
    pub fn immediate() -> Self {
        ReplyPolicy::Baseline { mx: 0.0 }
    }

    pub fn is_paced(&self) -> bool {
        matches!(self, ReplyPolicy::Paced { .. })
    }
}

/// Delay for the reply with position `reply_index` among a service's replies.
pub fn reply_delay(policy: ReplyPolicy, reply_index: usize, rng: &mut impl Rng) -> f64 {
    match policy {
        ReplyPolicy::Baseline { mx } if mx > 0.0 => rng.gen_range(0.0..=mx),
        ReplyPolicy::Baseline { .. } => 0.0,
        ReplyPolicy::Paced { interval } => reply_index as f64 * interval,
    }
}

/// Per-service reply timing state.
#[derive(Clone, Debug)]
pub struct ReplyScheduler {
    policy: ReplyPolicy,
    first_receipt: Option<SimTime>,
    answered: usize,
}

impl ReplyScheduler {
    pub fn new(policy: ReplyPolicy) -> Self {
        ReplyScheduler {
            policy,
            first_receipt: None,
            answered: 0,
        }
    }

    /// Injection time for the reply to a request received at `receipt`.
    pub fn schedule(&mut self, receipt: SimTime, rng: &mut impl Rng) -> SimTime {
        let index = self.answered;
        self.answered += 1;
        let delay = SimTime::from_secs_f64(reply_delay(self.policy, index, rng));
        match self.policy {
            ReplyPolicy::Baseline { .. } => receipt + delay,
            ReplyPolicy::Paced { .. } => {
                let base = *self.first_receipt.get_or_insert(receipt);
                // never before the request itself arrived
                (base + delay).max(receipt)
            }
        }
    }
}

/// One 64-byte multicast request per client at `t`.
pub fn emit_msearch(clients: &[NodeId], t: SimTime) -> Vec<Injection> {
    clients
        .iter()
        .map(|&c| Injection {
            at: t,
            kind: PacketKind::MSearch,
            size_bytes: MSEARCH_BYTES,
            src: c,
            dst: Destination::Multicast,
        })
        .collect()
}

/// Replies from `service` to every received request `(receipt time, client)`.
/// Requests are answered in arrival order, ties by client id.
pub fn emit_replies(
    service: NodeId,
    requests: &[(SimTime, NodeId)],
    policy: ReplyPolicy,
    rng: &mut impl Rng,
) -> Vec<Injection> {
    let mut ordered = requests.to_vec();
    ordered.sort();
    let mut sched = ReplyScheduler::new(policy);
    ordered
        .into_iter()
        .map(|(receipt, client)| Injection {
            at: sched.schedule(receipt, rng),
            kind: PacketKind::Reply,
            size_bytes: REPLY_BYTES,
            src: service,
            dst: Destination::Unicast(client),
        })
        .collect()
}

/// Constant-rate background flow between two leaves.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossFlow {
    pub src: NodeId,
    pub dst: NodeId,
    pub packet_size: u32,
    pub send_interval: f64,
    pub start: f64,
    pub stop: f64,
    pub bidirectional: bool,
}

impl CrossFlow {
    /// Offered load in bits per second on a link the flow crosses, counting
    /// one direction.
    pub fn offered_bps(&self) -> f64 {
        f64::from(self.packet_size) * 8.0 / self.send_interval
    }
}

/// Packets every `send_interval` in `[start, stop)`, in each configured
/// direction.
pub fn emit_cross_traffic(flow: &CrossFlow) -> Vec<Injection> {
    assert!(flow.send_interval > 0.0, "send interval must be positive");
    assert!(flow.start < flow.stop, "flow must start before it stops");
    let mut dirs = vec![(flow.src, flow.dst)];
    if flow.bidirectional {
        dirs.push((flow.dst, flow.src));
    }
    let start = SimTime::from_secs_f64(flow.start);
    let stop = SimTime::from_secs_f64(flow.stop);
    let step = SimTime::from_secs_f64(flow.send_interval);
    let mut out = Vec::new();
    let mut t = start;
    while t < stop {
        for &(src, dst) in &dirs {
            out.push(Injection {
                at: t,
                kind: PacketKind::Cross,
                size_bytes: flow.packet_size,
                src,
                dst: Destination::Unicast(dst),
            });
        }
        t = t + step;
    }
    out
}

/// Services answer every M-SEARCH copy they receive; clients and cross-traffic
/// sinks stay silent.
#[derive(Debug)]
pub struct DiscoveryAgent {
    policy: ReplyPolicy,
    kinds: Vec<NodeKind>,
    schedulers: BTreeMap<NodeId, ReplyScheduler>,
}

impl DiscoveryAgent {
    pub fn new(net: &Network, policy: ReplyPolicy) -> Self {
        DiscoveryAgent {
            policy,
            kinds: net.nodes().iter().map(|n| n.kind).collect(),
            schedulers: BTreeMap::new(),
        }
    }
}

impl Agent for DiscoveryAgent {
    fn on_deliver(
        &mut self,
        now: SimTime,
        node: NodeId,
        packet: &Packet,
        rng: &mut ChaCha8Rng,
    ) -> Vec<Injection> {
        if packet.kind != PacketKind::MSearch || self.kinds[node.0 as usize] != NodeKind::Service {
            return Vec::new();
        }
        let policy = self.policy;
        let at = self
            .schedulers
            .entry(node)
            .or_insert_with(|| ReplyScheduler::new(policy))
            .schedule(now, rng);
        vec![Injection {
            at,
            kind: PacketKind::Reply,
            size_bytes: REPLY_BYTES,
            src: node,
            dst: Destination::Unicast(packet.src),
        }]
    }
}
