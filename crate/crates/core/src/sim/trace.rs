use super::packet::{Fate, PacketKind, PacketRecord};
use crate::time::SimTime;
use crate::topology::LinkId;

/// One serialization interval on a link.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Transmission {
    pub start: SimTime,
    pub end: SimTime,
    pub bits: u64,
    pub kind: PacketKind,
}

/// Everything a run produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub end_time: SimTime,
    pub packets: Vec<PacketRecord>,
    /// Indexed by `LinkId`.
    pub transmissions: Vec<Vec<Transmission>>,
    /// Peak number of waiting packets per link.
    pub high_water: Vec<usize>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Tally {
    pub created: usize,
    pub delivered: usize,
    pub dropped: usize,
    pub in_flight: usize,
}

impl Trace {
    pub fn is_empty(&self) -> bool {
        self.packets.is_empty()
    }

    pub fn link_transmissions(&self, link: LinkId) -> &[Transmission] {
        self.transmissions
            .get(link.0)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Counts over every packet record, multicast copies included.
    pub fn tally(&self) -> Tally {
        let mut t = Tally::default();
        for p in &self.packets {
            t.created += 1;
            match p.fate {
                Fate::InFlight => t.in_flight += 1,
                Fate::Delivered { .. } => t.delivered += 1,
                Fate::Dropped { .. } => t.dropped += 1,
            }
        }
        t
    }

    pub fn dropped_of_kind(&self, kind: PacketKind) -> usize {
        self.packets
            .iter()
            .filter(|p| p.kind == kind && matches!(p.fate, Fate::Dropped { .. }))
            .count()
    }
}
