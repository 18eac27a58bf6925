//! Baseline/paced comparison and the reference thresholds it is checked
//! against.

use std::fmt;

use super::metrics::{MetricsBundle, Phase};
use super::run::{HarnessError, Result, ScenarioRun};
use super::scenario::Scenario;
use crate::topology::Layout;

const EPS: f64 = 1e-9;
/// One service out of nine.
pub const ONE_SERVICE: f64 = 1.0 / 9.0;

/// Rate band `[lo, hi]`, inclusive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

impl Band {
    pub fn new(lo: f64, hi: f64) -> Self {
        Band { lo, hi }
    }

    /// Widen by `tol` on both sides, staying inside `[0, 1]`.
    pub fn widened(self, tol: f64) -> Self {
        Band {
            lo: (self.lo - tol).max(0.0),
            hi: (self.hi + tol).min(1.0),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo - EPS && x <= self.hi + EPS
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.4}, {:.4}]", self.lo, self.hi)
    }
}

/// Reference outcome for one scenario pair.
#[derive(Clone, Debug, PartialEq)]
pub struct Expectation {
    /// Every paced client rate must fall in this band.
    pub paced: Option<Band>,
    /// Every baseline client rate must fall in this band.
    pub baseline: Option<Band>,
    /// The lowest baseline client rate must fall in this band.
    pub baseline_min: Option<Band>,
    /// Baseline drop rate must exceed this multiple of the paced one.
    pub min_drop_ratio: Option<f64>,
    /// Paced drop count strictly below baseline.
    pub fewer_paced_drops: bool,
}

impl Expectation {
    /// Reference ranges, each endpoint widened by one service, for the
    /// scenarios that have them (100-byte cross traffic).
    pub fn for_scenario(layout: Layout, clients: usize, cross_size: u32) -> Option<Self> {
        if cross_size != 100 {
            return None;
        }
        let none = Expectation {
            paced: None,
            baseline: None,
            baseline_min: None,
            min_drop_ratio: None,
            fewer_paced_drops: false,
        };
        match (layout, clients) {
            (Layout::Decentralised, 6) => Some(Expectation {
                paced: Some(Band::new(7.0 / 9.0, 1.0)),
                baseline: Some(Band::new(5.0 / 9.0, 7.0 / 9.0).widened(ONE_SERVICE)),
                min_drop_ratio: Some(4.0),
                ..none
            }),
            (Layout::Centralised, 6) => Some(Expectation {
                paced: Some(Band::new(8.0 / 9.0, 1.0).widened(ONE_SERVICE)),
                baseline: Some(Band::new(2.0 / 9.0, 5.0 / 9.0).widened(ONE_SERVICE)),
                fewer_paced_drops: true,
                ..none
            }),
            (Layout::Decentralised, 8) => Some(Expectation {
                paced: Some(Band::new(7.0 / 9.0, 1.0).widened(ONE_SERVICE)),
                baseline_min: Some(Band::new(0.45, 0.45).widened(ONE_SERVICE)),
                ..none
            }),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport {
    pub baseline_name: String,
    pub paced_name: String,
    pub baseline: MetricsBundle,
    pub paced: MetricsBundle,
    pub baseline_min: f64,
    pub baseline_max: f64,
    pub paced_min: f64,
    pub paced_max: f64,
    pub baseline_drop_rate: f64,
    pub paced_drop_rate: f64,
    /// Baseline over paced reply-window drop rate; infinite when only the
    /// paced run is loss-free, 1 when both are.
    pub drop_ratio: f64,
    /// A run had no packets in its reply window.
    pub degenerate_window: bool,
    pub checks: Vec<Check>,
}

impl ComparisonReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn drop_ratio(baseline: f64, paced: f64) -> f64 {
    if paced > 0.0 {
        baseline / paced
    } else if baseline > 0.0 {
        f64::INFINITY
    } else {
        1.0
    }
}

fn comparable(a: &Scenario, b: &Scenario) -> std::result::Result<(), String> {
    let mut diffs = Vec::new();
    macro_rules! same {
        ($($f:ident),*) => {$(
            if a.$f != b.$f {
                diffs.push(format!("{}: {:?} vs {:?}", stringify!($f), a.$f, b.$f));
            }
        )*};
    }
    same!(
        layout,
        clients,
        cross_size,
        cross_interval,
        cross_bidirectional,
        seed,
        sim_time,
        request_time,
        utilization_bin,
        discovery
    );
    if diffs.is_empty() {
        Ok(())
    } else {
        Err(diffs.join(", "))
    }
}

fn check(checks: &mut Vec<Check>, name: &str, passed: bool, detail: String) {
    checks.push(Check {
        name: name.into(),
        passed,
        detail,
    });
}

/// Pair a baseline and a paced run of the same network and traffic.
pub fn compare(baseline: &ScenarioRun, paced: &ScenarioRun) -> Result<ComparisonReport> {
    comparable(&baseline.scenario, &paced.scenario).map_err(HarnessError::Mismatch)?;
    if baseline.network != paced.network_with_capacities_of(baseline) {
        return Err(HarnessError::Mismatch("topologies differ".into()));
    }
    let (b, p) = (&baseline.metrics, &paced.metrics);
    let bw = b.phase(Phase::Window);
    let pw = p.phase(Phase::Window);
    let mut checks = Vec::new();

    check(
        &mut checks,
        "paced min >= baseline min",
        p.min_discovery() >= b.min_discovery() - EPS,
        format!("{:.4} vs {:.4}", p.min_discovery(), b.min_discovery()),
    );
    for (label, m) in [("baseline", b), ("paced", p)] {
        let r = m.phase(Phase::Request);
        check(
            &mut checks,
            &format!("{label} request drops = 0"),
            r.dropped == 0,
            format!("{} of {}", r.dropped, r.sent),
        );
    }

    let s = &baseline.scenario;
    if let Some(e) = Expectation::for_scenario(s.layout, s.clients, s.cross_size) {
        let all_in =
            |m: &MetricsBundle, band: Band| m.discovery.iter().all(|d| band.contains(d.rate()));
        if let Some(band) = e.paced {
            check(
                &mut checks,
                "paced rates in band",
                all_in(p, band),
                format!(
                    "[{:.4}, {:.4}] within {band}",
                    p.min_discovery(),
                    p.max_discovery()
                ),
            );
        }
        if let Some(band) = e.baseline {
            check(
                &mut checks,
                "baseline rates in band",
                all_in(b, band),
                format!(
                    "[{:.4}, {:.4}] within {band}",
                    b.min_discovery(),
                    b.max_discovery()
                ),
            );
        }
        if let Some(band) = e.baseline_min {
            check(
                &mut checks,
                "baseline min in band",
                band.contains(b.min_discovery()),
                format!("{:.4} within {band}", b.min_discovery()),
            );
        }
        if let Some(k) = e.min_drop_ratio {
            let ratio = drop_ratio(bw.rate(), pw.rate());
            check(
                &mut checks,
                "drop-rate ratio",
                ratio > k,
                format!("{ratio:.3} > {k}"),
            );
        }
        if e.fewer_paced_drops {
            check(
                &mut checks,
                "paced drops < baseline drops",
                pw.dropped < bw.dropped,
                format!("{} vs {}", pw.dropped, bw.dropped),
            );
        }
    }

    Ok(ComparisonReport {
        baseline_name: baseline.scenario.name.clone(),
        paced_name: paced.scenario.name.clone(),
        baseline_min: b.min_discovery(),
        baseline_max: b.max_discovery(),
        paced_min: p.min_discovery(),
        paced_max: p.max_discovery(),
        baseline_drop_rate: bw.rate(),
        paced_drop_rate: pw.rate(),
        drop_ratio: drop_ratio(bw.rate(), pw.rate()),
        degenerate_window: bw.sent == 0 || pw.sent == 0,
        baseline: b.clone(),
        paced: p.clone(),
        checks,
    })
}

impl ScenarioRun {
    /// This run's network with queue capacities taken from `other`, so
    /// topologies can be compared regardless of queue sizing.
    fn network_with_capacities_of(&self, other: &ScenarioRun) -> crate::topology::Network {
        let mut net = self.network.clone();
        for l in other.network.links() {
            if l.id.0 < net.links().len() {
                let _ = net.set_queue_capacity(l.id, l.queue_capacity);
            }
        }
        net
    }
}

impl fmt::Display for ComparisonReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} vs {}", self.baseline_name, self.paced_name)?;
        writeln!(
            f,
            "  discovery  baseline [{:.4}, {:.4}]  paced [{:.4}, {:.4}]",
            self.baseline_min, self.baseline_max, self.paced_min, self.paced_max
        )?;
        writeln!(
            f,
            "  drop rate  baseline {:.4}  paced {:.4}  ratio {}",
            self.baseline_drop_rate,
            self.paced_drop_rate,
            if self.drop_ratio.is_infinite() {
                "inf".to_string()
            } else {
                format!("{:.3}", self.drop_ratio)
            }
        )?;
        if self.degenerate_window {
            writeln!(
                f,
                "  note: a reply window was empty; its drop rate is 0 by convention"
            )?;
        }
        for c in &self.checks {
            writeln!(
                f,
                "  [{}] {}: {}",
                if c.passed { "pass" } else { "FAIL" },
                c.name,
                c.detail
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::run::run_scenario;
    use crate::harness::scenario::PolicyKind;

    fn short(layout: Layout, clients: usize, policy: PolicyKind) -> Scenario {
        let mut s = Scenario::reference(layout, clients, 100, policy);
        s.sim_time = 20.0;
        s
    }

    #[test]
    fn ratio_guard() {
        assert_eq!(drop_ratio(0.2, 0.0), f64::INFINITY);
        assert_eq!(drop_ratio(0.0, 0.0), 1.0);
        assert_eq!(drop_ratio(0.2, 0.05), 4.0);
    }

    #[test]
    fn identical_runs_compare_equal() {
        let r = run_scenario(&short(Layout::Decentralised, 6, PolicyKind::Baseline)).unwrap();
        let rep = compare(&r, &r).unwrap();
        assert_eq!(rep.drop_ratio, 1.0);
        assert_eq!(rep.baseline_min, rep.paced_min);
        assert_eq!(rep.baseline_max, rep.paced_max);
    }

    #[test]
    fn differing_topologies_are_rejected() {
        let a = run_scenario(&short(Layout::Decentralised, 6, PolicyKind::Baseline)).unwrap();
        let b = run_scenario(&short(Layout::Centralised, 6, PolicyKind::Paced)).unwrap();
        assert!(matches!(compare(&a, &b), Err(HarnessError::Mismatch(_))));
        let c = run_scenario(&short(Layout::Decentralised, 8, PolicyKind::Paced)).unwrap();
        assert!(matches!(compare(&a, &c), Err(HarnessError::Mismatch(_))));
    }

    #[test]
    fn bands() {
        let b = Band::new(5.0 / 9.0, 7.0 / 9.0).widened(ONE_SERVICE);
        assert!(b.contains(4.0 / 9.0) && b.contains(8.0 / 9.0));
        assert!(!b.contains(1.0) && !b.contains(3.0 / 9.0));
        assert_eq!(Band::new(0.9, 1.0).widened(0.2).hi, 1.0);
    }
}
