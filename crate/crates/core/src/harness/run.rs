//! Scenario execution.

use thiserror::Error;

use super::metrics::MetricsBundle;
use super::scenario::{ConfigError, PolicyKind, QueueMode, Scenario};
use crate::planner::{best_interval, PlanError};
use crate::protocol::{
    emit_cross_traffic, emit_msearch, CrossFlow, DiscoveryAgent, ReplyPolicy, REPLY_BYTES,
};
use crate::sim::{run_with, SimError, Trace};
use crate::time::SimTime;
use crate::topology::{reference_network_with, LinkParams, Network, TopologyError};
use crate::Plan;

/// Cross-traffic endpoints in the reference network.
pub const CROSS_PAIRS: [(&str, &str); 2] = [("S0", "S8"), ("S1", "S7")];

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("scenarios are not comparable: {0}")]
    Mismatch(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

/// Everything one scenario run produced.
#[derive(Clone, Debug)]
pub struct ScenarioRun {
    pub scenario: Scenario,
    pub network: Network,
    pub plan: Option<Plan>,
    pub policy: ReplyPolicy,
    pub trace: Trace,
    pub metrics: MetricsBundle,
}

/// Reference network for `s` with queue capacities applied.
pub fn build_network(s: &Scenario) -> Result<(Network, Option<Plan>)> {
    let params = LinkParams {
        queue_capacity: s.queue_capacity,
        ..LinkParams::default()
    };
    let mut net = reference_network_with(s.layout, s.clients, params);
    let needs_plan = s.policy == PolicyKind::Paced || s.queue_mode == QueueMode::Planner;
    // planned once from the topology alone; cross traffic does not enter
    let plan = if needs_plan {
        Some(best_interval::<f64>(&net, REPLY_BYTES, s.use_os)?)
    } else {
        None
    };
    if let (QueueMode::Planner, Some(plan)) = (s.queue_mode, &plan) {
        let ids: Vec<_> = net.links().iter().map(|l| l.id).collect();
        for l in ids {
            let need = plan.queues.link(l).max(s.queue_capacity);
            net.set_queue_capacity(l, need)?;
        }
    }
    Ok((net, plan))
}

pub fn cross_flows(net: &Network, s: &Scenario) -> Vec<CrossFlow> {
    if s.cross_size == 0 {
        return Vec::new();
    }
    CROSS_PAIRS
        .iter()
        .filter_map(|(a, b)| {
            Some(CrossFlow {
                src: net.node_by_name(a)?,
                dst: net.node_by_name(b)?,
                packet_size: s.cross_size,
                send_interval: s.cross_interval,
                start: 0.0,
                stop: s.sim_time,
                bidirectional: s.cross_bidirectional,
            })
        })
        .collect()
}

pub fn run_scenario(s: &Scenario) -> Result<ScenarioRun> {
    s.validate()?;
    let (network, plan) = build_network(s)?;
    let policy = match s.policy {
        PolicyKind::Baseline => ReplyPolicy::Baseline { mx: s.mx },
        PolicyKind::Paced => ReplyPolicy::Paced {
            interval: s
                .interval
                .or(plan.as_ref().map(|p| p.best_interval))
                .unwrap_or(0.0),
        },
    };
    let mut injections = Vec::new();
    if s.discovery {
        injections.extend(emit_msearch(
            &network.clients(),
            SimTime::from_secs_f64(s.request_time),
        ));
    }
    for flow in cross_flows(&network, s) {
        injections.extend(emit_cross_traffic(&flow));
    }
    let mut agent = DiscoveryAgent::new(&network, policy);
    let trace = run_with(
        &network,
        injections,
        SimTime::from_secs_f64(s.sim_time),
        s.seed,
        &mut agent,
    )?;
    let metrics =
        MetricsBundle::compute(&network, &trace, SimTime::from_secs_f64(s.utilization_bin));
    Ok(ScenarioRun {
        scenario: s.clone(),
        network,
        plan,
        policy,
        trace,
        metrics,
    })
}
