//! Baseline/paced pairs and the cross-traffic sweep.

use rayon::prelude::*;

use super::report::{compare, ComparisonReport};
use super::run::{run_scenario, Result, ScenarioRun};
use super::scenario::{PolicyKind, Scenario};
use crate::topology::Layout;

pub const SWEEP_CROSS_SIZES: [u32; 3] = [100, 200, 300];
pub const SWEEP_CLIENTS: [usize; 2] = [6, 8];

#[derive(Clone, Debug)]
pub struct PairResult {
    /// `layout_cN_xB`, shared by both runs.
    pub key: String,
    pub baseline: ScenarioRun,
    pub paced: ScenarioRun,
    pub report: ComparisonReport,
}

/// Run `template` under both policies. The template's own policy is ignored.
pub fn run_pair(template: &Scenario) -> Result<PairResult> {
    let baseline = template.counterpart(PolicyKind::Baseline);
    let paced = template.counterpart(PolicyKind::Paced);
    let (b, p) = rayon::join(|| run_scenario(&baseline), || run_scenario(&paced));
    let (b, p) = (b?, p?);
    let report = compare(&b, &p)?;
    Ok(PairResult {
        key: format!(
            "{}_c{}_x{}",
            template.layout, template.clients, template.cross_size
        ),
        baseline: b,
        paced: p,
        report,
    })
}

/// Every cross size and client count for each layout, keyed and ordered by
/// scenario name. `template` supplies seed and timing.
pub fn sweep(layouts: &[Layout], template: &Scenario) -> Result<Vec<PairResult>> {
    let mut grid = Vec::new();
    for &layout in layouts {
        for &cross in &SWEEP_CROSS_SIZES {
            for &clients in &SWEEP_CLIENTS {
                let mut s = template.clone();
                s.layout = layout;
                s.cross_size = cross;
                s.clients = clients;
                s.name = s.default_name();
                grid.push(s);
            }
        }
    }
    let mut out: Vec<PairResult> = grid.par_iter().map(run_pair).collect::<Result<_>>()?;
    out.sort_by(|a, b| a.key.cmp(&b.key));
    Ok(out)
}
