//! Metrics computed from a finished trace.

use std::collections::BTreeSet;
use std::fmt;

use crate::sim::{Fate, PacketKind, Trace};
use crate::time::SimTime;
use crate::topology::{LinkClass, LinkId, Network, NodeId};

/// Services heard by one client.
#[derive(Clone, Debug, PartialEq)]
pub struct ClientDiscovery {
    pub client: NodeId,
    pub name: String,
    pub heard: usize,
    pub total: usize,
}

impl ClientDiscovery {
    pub fn rate(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.heard as f64 / self.total as f64
        }
    }
}

/// Distinct services whose reply reached `client`, and the service total.
pub fn discovery(net: &Network, trace: &Trace, client: NodeId) -> ClientDiscovery {
    let heard: BTreeSet<NodeId> = trace
        .packets
        .iter()
        .filter(|p| p.kind == PacketKind::Reply)
        .filter_map(|p| match p.fate {
            Fate::Delivered { node, .. } if node == client => Some(p.src),
            _ => None,
        })
        .collect();
    ClientDiscovery {
        client,
        name: net.name(client).to_string(),
        heard: heard.len(),
        total: net.services().len(),
    }
}

pub fn discovery_rate(net: &Network, trace: &Trace, client: NodeId) -> f64 {
    discovery(net, trace, client).rate()
}

/// Closed time interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    pub start: SimTime,
    pub end: SimTime,
}

impl Window {
    pub fn contains(&self, t: SimTime) -> bool {
        self.start <= t && t <= self.end
    }
}

/// From the first reply injection to the last reply delivery or drop.
/// Replies still in flight at the end of the run extend the window to the
/// trace end. `None` when no reply was sent.
pub fn reply_window(trace: &Trace) -> Option<Window> {
    let replies = trace.packets.iter().filter(|p| p.kind == PacketKind::Reply);
    let start = replies.clone().map(|p| p.created_at).min()?;
    let end = replies
        .map(|p| p.terminal_time().unwrap_or(trace.end_time))
        .max()?;
    Some(Window { start, end })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Phase {
    /// Every M-SEARCH copy over the whole run.
    Request,
    /// Original reply packets.
    Reply,
    /// Everything created inside the reply window, cross traffic included.
    Window,
    /// Cross traffic over the whole run.
    Cross,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Request => "request",
            Phase::Reply => "reply",
            Phase::Window => "window",
            Phase::Cross => "cross",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseDrops {
    pub phase: Phase,
    pub sent: usize,
    pub dropped: usize,
}

impl PhaseDrops {
    /// Dropped over sent; 0 when nothing was sent.
    pub fn rate(&self) -> f64 {
        if self.sent == 0 {
            0.0
        } else {
            self.dropped as f64 / self.sent as f64
        }
    }
}

fn count(
    trace: &Trace,
    phase: Phase,
    keep: impl Fn(&crate::sim::PacketRecord) -> bool,
) -> PhaseDrops {
    let mut d = PhaseDrops {
        phase,
        sent: 0,
        dropped: 0,
    };
    for p in trace.packets.iter().filter(|p| keep(p)) {
        d.sent += 1;
        if matches!(p.fate, Fate::Dropped { .. }) {
            d.dropped += 1;
        }
    }
    d
}

/// Packets created in `window` and how many of them were dropped. An empty
/// window, or `None`, yields zero sent and a rate of 0.
pub fn drop_rate(trace: &Trace, window: Option<Window>) -> PhaseDrops {
    match window {
        Some(w) => count(trace, Phase::Window, |p| w.contains(p.created_at)),
        None => PhaseDrops {
            phase: Phase::Window,
            sent: 0,
            dropped: 0,
        },
    }
}

pub fn phase_drops(trace: &Trace) -> Vec<PhaseDrops> {
    vec![
        count(trace, Phase::Request, |p| p.kind == PacketKind::MSearch),
        count(trace, Phase::Reply, |p| {
            p.kind == PacketKind::Reply && p.is_original()
        }),
        drop_rate(trace, reply_window(trace)),
        count(trace, Phase::Cross, |p| p.kind == PacketKind::Cross),
    ]
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UtilBin {
    pub start: SimTime,
    pub bits: f64,
    pub utilization: f64,
}

/// Bits serialized on `link` per bin, as a fraction of what the link could
/// carry in that bin. A transmission spanning a bin edge is split in
/// proportion to its time on each side. Bins cover `[0, trace end)`.
pub fn utilization_series(
    net: &Network,
    trace: &Trace,
    link: LinkId,
    bin: SimTime,
) -> Vec<UtilBin> {
    assert!(bin > SimTime::ZERO, "bin must be positive");
    let w = bin.as_nanos();
    let n = trace.end_time.as_nanos().div_ceil(w).max(1) as usize;
    let mut bits = vec![0.0f64; n];
    for tx in trace.link_transmissions(link) {
        let (s, e) = (tx.start.as_nanos(), tx.end.as_nanos());
        let span = (e - s) as f64;
        if span == 0.0 {
            continue;
        }
        let mut t = s;
        while t < e {
            let idx = (t / w) as usize;
            let edge = ((t / w) + 1) * w;
            let stop = edge.min(e);
            if idx < n {
                bits[idx] += tx.bits as f64 * (stop - t) as f64 / span;
            }
            t = stop;
        }
    }
    let capacity = net.link(link).bandwidth_bps as f64 * bin.as_secs_f64();
    bits.into_iter()
        .enumerate()
        .map(|(i, b)| UtilBin {
            start: SimTime(i as u64 * w),
            bits: b,
            utilization: b / capacity,
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinkSeries {
    pub link: LinkId,
    pub name: String,
    pub class: LinkClass,
    pub bins: Vec<UtilBin>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsBundle {
    pub utilization: Vec<LinkSeries>,
    pub discovery: Vec<ClientDiscovery>,
    pub drops: Vec<PhaseDrops>,
    pub reply_window: Option<Window>,
}

impl MetricsBundle {
    pub fn compute(net: &Network, trace: &Trace, bin: SimTime) -> Self {
        let utilization = net
            .links()
            .iter()
            .map(|l| LinkSeries {
                link: l.id,
                name: format!("{}->{}", net.name(l.src), net.name(l.dst)),
                class: l.class,
                bins: utilization_series(net, trace, l.id, bin),
            })
            .collect();
        MetricsBundle {
            utilization,
            discovery: net
                .clients()
                .into_iter()
                .map(|c| discovery(net, trace, c))
                .collect(),
            drops: phase_drops(trace),
            reply_window: reply_window(trace),
        }
    }

    pub fn phase(&self, phase: Phase) -> PhaseDrops {
        self.drops
            .iter()
            .copied()
            .find(|d| d.phase == phase)
            .unwrap_or(PhaseDrops {
                phase,
                sent: 0,
                dropped: 0,
            })
    }

    /// Reply-window drop rate.
    pub fn drop_rate(&self) -> f64 {
        self.phase(Phase::Window).rate()
    }

    pub fn reply_sent(&self) -> usize {
        self.phase(Phase::Reply).sent
    }

    pub fn min_discovery(&self) -> f64 {
        self.discovery
            .iter()
            .map(ClientDiscovery::rate)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_discovery(&self) -> f64 {
        self.discovery
            .iter()
            .map(ClientDiscovery::rate)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn series(&self, name: &str) -> Option<&LinkSeries> {
        self.utilization.iter().find(|s| s.name == name)
    }
}
