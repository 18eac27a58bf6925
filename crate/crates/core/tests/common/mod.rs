#![allow(dead_code)]

use std::collections::BTreeMap;

use ssdp_pacing::harness::{PolicyKind, Scenario, ScenarioRun};
use ssdp_pacing::sim::{Destination, Fate, PacketKind, Trace};
use ssdp_pacing::topology::{Layout, Network};

/// Scenario pairs with reference results: six clients at every cross
/// load in both layouts, plus eight clients at the lightest load.
pub fn reference_pairs() -> Vec<Scenario> {
    let mut out = Vec::new();
    for layout in [Layout::Decentralised, Layout::Centralised] {
        for cross in [100, 200, 300] {
            out.push(Scenario::reference(layout, 6, cross, PolicyKind::Baseline));
        }
    }
    out.push(Scenario::reference(
        Layout::Decentralised,
        8,
        100,
        PolicyKind::Baseline,
    ));
    out
}

/// Packet bookkeeping checks; returns a description of the first violation.
pub fn conservation(net: &Network, trace: &Trace) -> Result<(), String> {
    let mut tx_per_link: BTreeMap<usize, usize> = BTreeMap::new();
    for p in &trace.packets {
        for h in &p.hops {
            if h.tx_start.is_some() {
                *tx_per_link.entry(h.link.0).or_default() += 1;
            }
        }
        match (p.fate, p.dst) {
            (Fate::Delivered { node, .. }, Destination::Unicast(dst)) if node != dst => {
                return Err(format!("{:?} delivered at {node} instead of {dst}", p.id))
            }
            (Fate::Dropped { link, .. }, _) => {
                let last = p
                    .hops
                    .last()
                    .ok_or(format!("{:?} dropped before any hop", p.id))?;
                if last.link != link || last.tx_start.is_some() {
                    return Err(format!("{:?} dropped inconsistently", p.id));
                }
            }
            _ => {}
        }
        if let Some(parent) = p.parent {
            let par = &trace.packets[parent.0];
            if par.kind != p.kind || !matches!(par.fate, Fate::Delivered { .. }) {
                return Err(format!("{:?} copied from an undelivered parent", p.id));
            }
        }
    }
    for l in net.links() {
        let n = trace.link_transmissions(l.id).len();
        if n != tx_per_link.get(&l.id.0).copied().unwrap_or(0) {
            return Err(format!("link {} transmission count mismatch", l.id.0));
        }
    }
    let t = trace.tally();
    if t.created != t.delivered + t.dropped + t.in_flight {
        return Err(format!("tally does not add up: {t:?}"));
    }
    // every service answers each request copy it receives
    let heard = trace
        .packets
        .iter()
        .filter(|p| {
            p.kind == PacketKind::MSearch
                && matches!(p.fate, Fate::Delivered { node, .. }
                    if net.kind(node).map(|k| k == ssdp_pacing::topology::NodeKind::Service).unwrap_or(false))
        })
        .count();
    let replies = trace
        .packets
        .iter()
        .filter(|p| p.kind == PacketKind::Reply)
        .count();
    if heard != replies {
        return Err(format!(
            "{heard} requests reached services but {replies} replies exist"
        ));
    }
    Ok(())
}

pub fn reply_drops(run: &ScenarioRun) -> usize {
    run.trace.dropped_of_kind(PacketKind::Reply)
}
