use std::collections::BTreeMap;

use proptest::prelude::*;
use ssdp_pacing::planner::{best_interval, queue_sizes};
use ssdp_pacing::protocol::REPLY_BYTES;
use ssdp_pacing::sim::{run, Destination, Injection, PacketKind};
use ssdp_pacing::time::SimTime;
use ssdp_pacing::topology::{
    reference_network, reference_network_with, Layout, LinkParams, Network, NetworkBuilder,
};
use ssdp_pacing::{Exact, Plan, PlanExact};

/// Chain of routers; `leaves[i]` = (services, clients) on router i.
fn chain(leaves: &[(usize, usize)]) -> Network {
    let mut b = NetworkBuilder::new(Layout::Decentralised, LinkParams::default());
    let routers: Vec<_> = (0..leaves.len())
        .map(|i| b.router(format!("R{i}")))
        .collect();
    for w in routers.windows(2) {
        b.connect(w[0], w[1]);
    }
    let (mut s, mut c) = (0, 0);
    for (i, &(ns, nc)) in leaves.iter().enumerate() {
        for _ in 0..ns {
            b.service(format!("S{s}"), routers[i]);
            s += 1;
        }
        for _ in 0..nc {
            b.client(format!("C{c}"), routers[i]);
            c += 1;
        }
    }
    b.build().unwrap()
}

fn leaves() -> impl Strategy<Value = Vec<(usize, usize)>> {
    prop::collection::vec((0usize..4, 0usize..4), 2..6)
}

proptest! {
    #[test]
    fn overlap_credit_never_lengthens_interval(l in leaves()) {
        let net = chain(&l);
        let plain = best_interval::<f64>(&net, REPLY_BYTES, false);
        let credit = best_interval::<f64>(&net, REPLY_BYTES, true);
        prop_assume!(plain.is_ok() && credit.is_ok());
        let (plain, credit) = (plain.unwrap(), credit.unwrap());
        prop_assert!(credit.best_interval <= plain.best_interval + 1e-12);
        for plan in [&plain, &credit] {
            let max = plan.intervals.values().copied().fold(0.0, f64::max);
            prop_assert_eq!(plan.best_interval, max);
            prop_assert!(plan.intervals.values().all(|&i| i >= 0.0));
        }
    }

    #[test]
    fn float_and_exact_plans_agree(l in leaves(), use_os in any::<bool>()) {
        let net = chain(&l);
        let f = best_interval::<f64>(&net, REPLY_BYTES, use_os);
        let e = best_interval::<Exact>(&net, REPLY_BYTES, use_os);
        prop_assert_eq!(f.is_ok(), e.is_ok());
        if let (Ok(f), Ok(e)) = (f, e) {
            let (f, e): (Plan, PlanExact) = (f, e);
            let exact = *e.best_interval.numer() as f64 / *e.best_interval.denom() as f64;
            prop_assert!((f.best_interval - exact).abs() < 1e-9);
            prop_assert_eq!(f.candidates, e.candidates);
        }
    }

    #[test]
    fn queue_sizes_count_route_uses(l in leaves()) {
        let net = chain(&l);
        let plan = queue_sizes(&net);
        prop_assume!(plan.is_ok());
        let plan = plan.unwrap();
        let mut uses: BTreeMap<_, usize> = BTreeMap::new();
        for s in net.services() {
            for c in net.clients() {
                for link in net.route(s, c).unwrap().links {
                    *uses.entry(link).or_default() += 1;
                }
            }
        }
        for l in net.links() {
            let need = uses.get(&l.id).copied().unwrap_or(0);
            if need > 0 {
                prop_assert_eq!(plan.link(l.id), need);
            }
        }
    }

    #[test]
    fn more_clients_never_shorten_plain_interval(n in 1usize..12, extra in 1usize..6) {
        for layout in [Layout::Decentralised, Layout::Centralised] {
            let a: Plan = best_interval(&reference_network(layout, n), REPLY_BYTES, false).unwrap();
            let b: Plan = best_interval(&reference_network(layout, n + extra), REPLY_BYTES, false).unwrap();
            prop_assert!(b.best_interval >= a.best_interval);
        }
    }

    #[test]
    fn simulation_conserves_and_repeats(
        cap in 1usize..6,
        sends in prop::collection::vec((0u64..2_000, 0usize..15, 0usize..15, 32u32..600), 1..80),
        seed in any::<u64>(),
    ) {
        let params = LinkParams { queue_capacity: cap, ..LinkParams::default() };
        let net = reference_network_with(Layout::Decentralised, 6, params);
        let leaves: Vec<_> = net.services().into_iter().chain(net.clients()).collect();
        let injections: Vec<Injection> = sends
            .iter()
            .filter(|(_, a, b, _)| a != b)
            .map(|&(ms, a, b, size)| Injection {
                at: SimTime(ms * 1_000_000),
                kind: PacketKind::Cross,
                size_bytes: size,
                src: leaves[a],
                dst: Destination::Unicast(leaves[b]),
            })
            .collect();
        let end = SimTime::from_secs_f64(5.0);
        let t1 = run(&net, injections.clone(), end, seed).unwrap();
        let t2 = run(&net, injections.clone(), end, seed).unwrap();
        prop_assert_eq!(&t1, &t2);
        let tally = t1.tally();
        prop_assert_eq!(tally.created, injections.len());
        // everything drains well before the end at these loads
        prop_assert_eq!(tally.in_flight, 0);
        prop_assert_eq!(tally.delivered + tally.dropped, injections.len());
        for (l, txs) in t1.transmissions.iter().enumerate() {
            for w in txs.windows(2) {
                prop_assert!(w[0].end <= w[1].start, "overlap on link {}", l);
            }
        }
    }
}
