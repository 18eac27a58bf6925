use std::collections::VecDeque;

use super::packet::PacketId;
use crate::time::SimTime;
use crate::topology::Link;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnqueueOutcome {
    Accepted,
    Dropped,
}

/// FIFO drop-tail buffer in front of one directed link.
///
/// `capacity` bounds the waiting packets; the packet being serialized is on
/// the wire and does not occupy a slot.
#[derive(Clone, Debug)]
pub struct EgressQueue {
    pub bandwidth_bps: u64,
    pub delay: SimTime,
    pub capacity: usize,
    pending: VecDeque<(PacketId, u32)>,
    in_service: Option<PacketId>,
    busy_until: SimTime,
    high_water: usize,
}

impl EgressQueue {
    pub fn new(link: &Link) -> Self {
        EgressQueue {
            bandwidth_bps: link.bandwidth_bps,
            delay: link.delay,
            capacity: link.queue_capacity,
            pending: VecDeque::new(),
            in_service: None,
            busy_until: SimTime::ZERO,
            high_water: 0,
        }
    }

    pub fn is_idle(&self) -> bool {
        self.in_service.is_none()
    }

    pub fn len(&self) -> usize {
        self.pending.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pending.is_empty()
    }

    pub fn busy_until(&self) -> SimTime {
        self.busy_until
    }

    /// Largest number of waiting packets seen.
    pub fn high_water(&self) -> usize {
        self.high_water
    }

    pub fn enqueue(&mut self, packet: PacketId, size_bytes: u32) -> EnqueueOutcome {
        if self.pending.len() >= self.capacity {
            return EnqueueOutcome::Dropped;
        }
        self.pending.push_back((packet, size_bytes));
        self.high_water = self.high_water.max(self.pending.len());
        EnqueueOutcome::Accepted
    }

    /// Put the head packet on the wire if the link is idle. Returns the packet
    /// and the instant its last bit leaves.
    pub fn transmit_next(&mut self, now: SimTime) -> Option<(PacketId, SimTime)> {
        if !self.is_idle() {
            return None;
        }
        let (id, size) = self.pending.pop_front()?;
        let done = now + SimTime::serialization(size, self.bandwidth_bps);
        self.in_service = Some(id);
        self.busy_until = done;
        Some((id, done))
    }

    /// Take the packet whose transmission just finished.
    pub fn finish(&mut self) -> Option<PacketId> {
        self.in_service.take()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{LinkClass, LinkId, NodeId};

    fn link(capacity: usize, bw: u64) -> Link {
        Link {
            id: LinkId(0),
            src: NodeId(0),
            dst: NodeId(1),
            bandwidth_bps: bw,
            delay: SimTime::ZERO,
            queue_capacity: capacity,
            class: LinkClass::Main,
        }
    }

    #[test]
    fn drop_tail() {
        let mut q = EgressQueue::new(&link(1, 512_000));
        assert_eq!(q.enqueue(PacketId(0), 64), EnqueueOutcome::Accepted);
        assert_eq!(q.enqueue(PacketId(1), 64), EnqueueOutcome::Dropped);
        q.transmit_next(SimTime::ZERO).unwrap();
        // head is on the wire, slot free again
        assert_eq!(q.enqueue(PacketId(2), 64), EnqueueOutcome::Accepted);
        assert_eq!(q.enqueue(PacketId(3), 64), EnqueueOutcome::Dropped);
    }

    #[test]
    fn serialization_and_fifo() {
        let mut q = EgressQueue::new(&link(10, 512_000));
        q.enqueue(PacketId(0), 64);
        q.enqueue(PacketId(1), 300);
        let (id, done) = q.transmit_next(SimTime::ZERO).unwrap();
        assert_eq!((id, done), (PacketId(0), SimTime(1_000_000)));
        assert!(q.transmit_next(done).is_none(), "busy until finish()");
        assert_eq!(q.finish(), Some(PacketId(0)));
        let (id, done2) = q.transmit_next(done).unwrap();
        assert_eq!(id, PacketId(1));
        assert_eq!(done2 - done, SimTime(4_687_500));
    }

    #[test]
    fn fifty_four_reply_burst_fits_planner_capacity() {
        let mut q = EgressQueue::new(&link(54, 256_000));
        for i in 0..54 {
            assert_eq!(q.enqueue(PacketId(i), 128), EnqueueOutcome::Accepted);
        }
        assert_eq!(q.enqueue(PacketId(54), 128), EnqueueOutcome::Dropped);
        assert_eq!(q.high_water(), 54);
    }
}
