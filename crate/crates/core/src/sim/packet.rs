use std::fmt;

use crate::time::SimTime;
use crate::topology::{LinkId, NodeId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PacketId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PacketKind {
    MSearch,
    Reply,
    Cross,
}

impl fmt::Display for PacketKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PacketKind::MSearch => "msearch",
            PacketKind::Reply => "reply",
            PacketKind::Cross => "cross",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Destination {
    Unicast(NodeId),
    /// Flooded down the tree to every leaf except the sender.
    Multicast,
}

/// A packet to be created at `src` at time `at`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Injection {
    pub at: SimTime,
    pub kind: PacketKind,
    pub size_bytes: u32,
    pub src: NodeId,
    pub dst: Destination,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Packet {
    pub id: PacketId,
    pub kind: PacketKind,
    pub size_bytes: u32,
    /// Originating node. Multicast copies keep the requester here.
    pub src: NodeId,
    pub dst: Destination,
    pub created_at: SimTime,
    /// Unicast path; empty for multicast.
    pub route: Vec<LinkId>,
    /// Index of the next link in `route`.
    pub hop: usize,
    /// Multicast copy made from this packet at a router.
    pub parent: Option<PacketId>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fate {
    InFlight,
    Delivered { at: SimTime, node: NodeId },
    Dropped { at: SimTime, link: LinkId },
}

/// One link traversal of a packet.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Hop {
    pub link: LinkId,
    pub enqueued_at: SimTime,
    pub tx_start: Option<SimTime>,
    pub tx_end: Option<SimTime>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PacketRecord {
    pub id: PacketId,
    pub kind: PacketKind,
    pub size_bytes: u32,
    pub src: NodeId,
    pub dst: Destination,
    pub created_at: SimTime,
    pub parent: Option<PacketId>,
    pub hops: Vec<Hop>,
    pub fate: Fate,
}

impl PacketRecord {
    pub fn is_original(&self) -> bool {
        self.parent.is_none()
    }

    pub fn terminal_time(&self) -> Option<SimTime> {
        match self.fate {
            Fate::InFlight => None,
            Fate::Delivered { at, .. } | Fate::Dropped { at, .. } => Some(at),
        }
    }
}
