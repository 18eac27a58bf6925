//! CSV persistence. Floats use fixed precision so reruns are byte-identical.

use std::fs::{self, File};
use std::path::Path;

use super::metrics::MetricsBundle;
use super::run::Result;

pub const UTILIZATION_CSV: &str = "utilization.csv";
pub const DISCOVERY_CSV: &str = "discovery.csv";
pub const DROPS_CSV: &str = "drops.csv";

/// Append-only writers for the three result files of one output directory.
pub struct CsvSink {
    utilization: csv::Writer<File>,
    discovery: csv::Writer<File>,
    drops: csv::Writer<File>,
}

impl CsvSink {
    /// Create `dir` if needed and start fresh files with headers.
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        let mut utilization = csv::Writer::from_path(dir.join(UTILIZATION_CSV))?;
        utilization.write_record(["scenario", "link", "bin_start_s", "bits", "utilization"])?;
        let mut discovery = csv::Writer::from_path(dir.join(DISCOVERY_CSV))?;
        discovery.write_record([
            "scenario",
            "client",
            "services_heard",
            "services_total",
            "rate",
        ])?;
        let mut drops = csv::Writer::from_path(dir.join(DROPS_CSV))?;
        drops.write_record(["scenario", "phase", "sent", "dropped", "rate"])?;
        Ok(CsvSink {
            utilization,
            discovery,
            drops,
        })
    }

    pub fn write(&mut self, scenario: &str, m: &MetricsBundle) -> Result<()> {
        for series in &m.utilization {
            for b in &series.bins {
                self.utilization.write_record([
                    scenario,
                    &series.name,
                    &format!("{:.3}", b.start.as_secs_f64()),
                    &format!("{:.3}", b.bits),
                    &format!("{:.6}", b.utilization),
                ])?;
            }
        }
        for d in &m.discovery {
            self.discovery.write_record([
                scenario,
                &d.name,
                &d.heard.to_string(),
                &d.total.to_string(),
                &format!("{:.6}", d.rate()),
            ])?;
        }
        for d in &m.drops {
            self.drops.write_record([
                scenario,
                &d.phase.to_string(),
                &d.sent.to_string(),
                &d.dropped.to_string(),
                &format!("{:.6}", d.rate()),
            ])?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.utilization.flush()?;
        self.discovery.flush()?;
        self.drops.flush()?;
        Ok(())
    }
}

/// Write one or more runs' metrics into `dir`.
pub fn write_csvs<'a>(
    dir: &Path,
    runs: impl IntoIterator<Item = (&'a str, &'a MetricsBundle)>,
) -> Result<()> {
    let mut sink = CsvSink::create(dir)?;
    for (name, m) in runs {
        sink.write(name, m)?;
    }
    sink.finish()
}
