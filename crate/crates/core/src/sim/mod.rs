//! Deterministic discrete-event packet engine.
//!
//! Store-and-forward over directed links with drop-tail egress queues and no
//! router processing delay. Events run in `(time, ordinal)` order, where the
//! ordinal is the insertion sequence number, so identical inputs and seed
//! always give the same trace.

mod packet;
mod queue;
mod trace;

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use packet::{Destination, Fate, Hop, Injection, Packet, PacketId, PacketKind, PacketRecord};
pub use queue::{EgressQueue, EnqueueOutcome};
pub use trace::{Tally, Trace, Transmission};

use crate::time::SimTime;
use crate::topology::{LinkId, Network, NodeId, NodeKind, TopologyError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("end time must be positive")]
    InvalidEndTime,
    #[error("event at {at} scheduled in the past (now {now})")]
    EventInPast { at: SimTime, now: SimTime },
    #[error("packet size must be positive")]
    EmptyPacket,
    #[error("multicast packets must originate at a leaf node")]
    MulticastFromRouter,
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

pub type Result<T> = std::result::Result<T, SimError>;

/// Reacts to packets delivered at leaf nodes by creating new packets.
pub trait Agent {
    fn on_deliver(
        &mut self,
        now: SimTime,
        node: NodeId,
        packet: &Packet,
        rng: &mut ChaCha8Rng,
    ) -> Vec<Injection>;
}

/// Agent that never responds.
#[derive(Debug, Default)]
pub struct Sink;

impl Agent for Sink {
    fn on_deliver(
        &mut self,
        _: SimTime,
        _: NodeId,
        _: &Packet,
        _: &mut ChaCha8Rng,
    ) -> Vec<Injection> {
        Vec::new()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Action {
    Inject(Injection),
    Arrive {
        packet: PacketId,
        node: NodeId,
        via: Option<LinkId>,
    },
    TransmitDone(LinkId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct SimEvent {
    time: SimTime,
    ordinal: u64,
    action: Action,
}

impl Ord for SimEvent {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.time, self.ordinal).cmp(&(other.time, other.ordinal))
    }
}

impl PartialOrd for SimEvent {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

struct Engine<'a> {
    net: &'a Network,
    now: SimTime,
    events: BinaryHeap<Reverse<SimEvent>>,
    ordinal: u64,
    packets: Vec<Packet>,
    records: Vec<PacketRecord>,
    queues: Vec<EgressQueue>,
    transmissions: Vec<Vec<Transmission>>,
    rng: ChaCha8Rng,
}

impl<'a> Engine<'a> {
    fn new(net: &'a Network, seed: u64) -> Self {
        Engine {
            net,
            now: SimTime::ZERO,
            events: BinaryHeap::new(),
            ordinal: 0,
            packets: Vec::new(),
            records: Vec::new(),
            queues: net.links().iter().map(EgressQueue::new).collect(),
            transmissions: vec![Vec::new(); net.links().len()],
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn schedule(&mut self, time: SimTime, action: Action) -> Result<()> {
        if time < self.now {
            return Err(SimError::EventInPast {
                at: time,
                now: self.now,
            });
        }
        self.events.push(Reverse(SimEvent {
            time,
            ordinal: self.ordinal,
            action,
        }));
        self.ordinal += 1;
        Ok(())
    }

    fn new_packet(&mut self, mut packet: Packet) -> PacketId {
        let id = PacketId(self.packets.len());
        packet.id = id;
        self.records.push(PacketRecord {
            id,
            kind: packet.kind,
            size_bytes: packet.size_bytes,
            src: packet.src,
            dst: packet.dst,
            created_at: packet.created_at,
            parent: packet.parent,
            hops: Vec::new(),
            fate: Fate::InFlight,
        });
        self.packets.push(packet);
        id
    }

    fn inject(&mut self, inj: Injection) -> Result<()> {
        if inj.size_bytes == 0 {
            return Err(SimError::EmptyPacket);
        }
        let route = match inj.dst {
            Destination::Unicast(dst) => self.net.route(inj.src, dst)?.links,
            Destination::Multicast => {
                if self.net.kind(inj.src)? == NodeKind::Router {
                    return Err(SimError::MulticastFromRouter);
                }
                Vec::new()
            }
        };
        let id = self.new_packet(Packet {
            id: PacketId(0),
            kind: inj.kind,
            size_bytes: inj.size_bytes,
            src: inj.src,
            dst: inj.dst,
            created_at: self.now,
            route,
            hop: 0,
            parent: None,
        });
        self.arrive(id, inj.src, None)
    }

    fn enqueue(&mut self, packet: PacketId, link: LinkId) -> Result<()> {
        let size = self.packets[packet.0].size_bytes;
        let now = self.now;
        let record = &mut self.records[packet.0];
        record.hops.push(Hop {
            link,
            enqueued_at: now,
            tx_start: None,
            tx_end: None,
        });
        match self.queues[link.0].enqueue(packet, size) {
            EnqueueOutcome::Accepted => self.try_transmit(link),
            EnqueueOutcome::Dropped => {
                record.fate = Fate::Dropped { at: now, link };
                Ok(())
            }
        }
    }

    fn try_transmit(&mut self, link: LinkId) -> Result<()> {
        if let Some((id, done)) = self.queues[link.0].transmit_next(self.now) {
            let rec = &mut self.records[id.0];
            let hop = rec.hops.last_mut().expect("enqueued packet has a hop");
            hop.tx_start = Some(self.now);
            hop.tx_end = Some(done);
            self.transmissions[link.0].push(Transmission {
                start: self.now,
                end: done,
                bits: u64::from(rec.size_bytes) * 8,
                kind: rec.kind,
            });
            self.schedule(done, Action::TransmitDone(link))?;
        }
        Ok(())
    }

    fn transmit_done(&mut self, link: LinkId) -> Result<()> {
        let id = self.queues[link.0]
            .finish()
            .expect("transmit-done for an idle link");
        let l = self.net.link(link);
        let (dst, delay) = (l.dst, l.delay);
        self.schedule(
            self.now + delay,
            Action::Arrive {
                packet: id,
                node: dst,
                via: Some(link),
            },
        )?;
        self.try_transmit(link)
    }

    fn deliver(&mut self, packet: PacketId, node: NodeId, agent: &mut dyn Agent) -> Result<()> {
        self.records[packet.0].fate = Fate::Delivered { at: self.now, node };
        let injections = agent.on_deliver(self.now, node, &self.packets[packet.0], &mut self.rng);
        for inj in injections {
            let at = inj.at;
            self.schedule(at, Action::Inject(inj))?;
        }
        Ok(())
    }

    fn arrive(&mut self, packet: PacketId, node: NodeId, via: Option<LinkId>) -> Result<()> {
        let kind = self.net.kind(node)?;
        let p = &self.packets[packet.0];
        match p.dst {
            Destination::Unicast(dst) => {
                debug_assert_ne!(node, dst, "deliveries are handled in step()");
                let next = p.route[p.hop];
                self.packets[packet.0].hop += 1;
                self.enqueue(packet, next)
            }
            Destination::Multicast => match (kind, via) {
                (NodeKind::Router, Some(arrival)) => {
                    let back = self.net.reverse(arrival);
                    let out: Vec<LinkId> = self
                        .net
                        .egress(node)
                        .iter()
                        .copied()
                        .filter(|&l| l != back)
                        .collect();
                    self.records[packet.0].fate = Fate::Delivered { at: self.now, node };
                    let template = self.packets[packet.0].clone();
                    for l in out {
                        let copy = self.new_packet(Packet {
                            id: PacketId(0),
                            created_at: self.now,
                            parent: Some(packet),
                            ..template.clone()
                        });
                        self.enqueue(copy, l)?;
                    }
                    Ok(())
                }
                (NodeKind::Router, None) => Err(SimError::MulticastFromRouter),
                (_, None) => {
                    let up = self.net.egress(node)[0];
                    self.enqueue(packet, up)
                }
                (_, Some(_)) => unreachable!("leaf deliveries are handled in step()"),
            },
        }
    }

    fn is_delivery(&self, packet: PacketId, node: NodeId, via: Option<LinkId>) -> bool {
        match self.packets[packet.0].dst {
            Destination::Unicast(dst) => dst == node,
            Destination::Multicast => {
                via.is_some()
                    && self
                        .net
                        .kind(node)
                        .map(|k| k != NodeKind::Router)
                        .unwrap_or(false)
            }
        }
    }

    fn step(&mut self, event: SimEvent, agent: &mut dyn Agent) -> Result<()> {
        self.now = event.time;
        match event.action {
            Action::Inject(inj) => self.inject(inj),
            Action::TransmitDone(link) => self.transmit_done(link),
            Action::Arrive { packet, node, via } => {
                if self.is_delivery(packet, node, via) {
                    self.deliver(packet, node, agent)
                } else {
                    self.arrive(packet, node, via)
                }
            }
        }
    }

    fn finish(self) -> Trace {
        Trace {
            end_time: self.now,
            high_water: self.queues.iter().map(EgressQueue::high_water).collect(),
            packets: self.records,
            transmissions: self.transmissions,
        }
    }
}

/// Run with no reacting agents.
pub fn run(net: &Network, initial: Vec<Injection>, end_time: SimTime, seed: u64) -> Result<Trace> {
    run_with(net, initial, end_time, seed, &mut Sink)
}

/// Process events in order until `end_time` (inclusive). Packets still queued
/// or on the wire at that point stay `InFlight`.
pub fn run_with(
    net: &Network,
    initial: Vec<Injection>,
    end_time: SimTime,
    seed: u64,
    agent: &mut dyn Agent,
) -> Result<Trace> {
    if end_time == SimTime::ZERO {
        return Err(SimError::InvalidEndTime);
    }
    let mut engine = Engine::new(net, seed);
    let mut initial = initial;
    // stable: equal times keep caller order
    initial.sort_by_key(|i| i.at);
    for inj in initial {
        let at = inj.at;
        engine.schedule(at, Action::Inject(inj))?;
    }
    while let Some(Reverse(event)) = engine.events.pop() {
        if event.time > end_time {
            break;
        }
        engine.step(event, agent)?;
    }
    engine.now = end_time;
    Ok(engine.finish())
}
