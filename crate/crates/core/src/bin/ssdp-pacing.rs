use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ssdp_pacing::harness::output::write_csvs;
use ssdp_pacing::harness::sweep::{run_pair, sweep, PairResult};
use ssdp_pacing::harness::{run_scenario, HarnessError, PolicyKind, Scenario};
use ssdp_pacing::protocol::REPLY_BYTES;
use ssdp_pacing::topology::{reference_network, Layout};
use ssdp_pacing::{best_interval, Plan};

#[derive(Parser)]
#[command(version, about = "Reply pacing planner and discovery storm simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the pacing plan for a reference network.
    Plan {
        #[arg(long, default_value = "decentralised")]
        layout: Layout,
        #[arg(long, default_value_t = 6)]
        clients: usize,
        /// Ignore the overlap credit.
        #[arg(long)]
        no_os: bool,
    },
    /// Run one scenario from a config file and write its CSVs.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run a scenario under both reply policies and compare them.
    Compare {
        /// Scenario config; its policy and queue mode are overridden.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, conflicts_with = "config")]
        layout: Option<Layout>,
        #[arg(long, conflicts_with = "config")]
        clients: Option<usize>,
        #[arg(long, conflicts_with = "config")]
        cross_size: Option<u32>,
        /// Exit with status 2 when a reference threshold is missed.
        #[arg(long)]
        check: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Compare both policies over every cross size and client count.
    Sweep {
        #[arg(long, value_enum, default_value_t = LayoutChoice::Both)]
        layout: LayoutChoice,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum LayoutChoice {
    Decentralised,
    Centralised,
    Both,
}

impl LayoutChoice {
    fn layouts(self) -> Vec<Layout> {
        match self {
            LayoutChoice::Decentralised => vec![Layout::Decentralised],
            LayoutChoice::Centralised => vec![Layout::Centralised],
            LayoutChoice::Both => vec![Layout::Decentralised, Layout::Centralised],
        }
    }
}

fn load(path: &Path, seed: Option<u64>) -> Result<Scenario, HarnessError> {
    let text = fs::read_to_string(path)?;
    let mut s = Scenario::from_config_str(&text)?;
    if let Some(seed) = seed {
        s.seed = seed;
    }
    Ok(s)
}

fn print_plan(plan: &Plan, net: &ssdp_pacing::Network) {
    for (r, p) in &plan.profiles {
        println!(
            "router {}: big={} gaps={} t_max={:.6} t_avg={:.6} os={} interval={:.6}",
            net.name(*r),
            p.big,
            p.gaps,
            p.t_max,
            p.t_avg,
            p.os,
            plan.intervals[r]
        );
    }
}

fn cmd_plan(layout: Layout, clients: usize, no_os: bool) -> Result<(), HarnessError> {
    let net = reference_network(layout, clients);
    let plan: Plan = best_interval(&net, REPLY_BYTES, !no_os)?;
    let names = |ids: &[ssdp_pacing::topology::NodeId]| {
        ids.iter()
            .map(|&r| net.name(r).to_string())
            .collect::<Vec<_>>()
    };
    let candidates = names(&plan.candidates.routers);
    println!(
        "{layout} network, {clients} clients, {} services",
        net.services().len()
    );
    println!(
        "best interval {:.6} s (overlap credit {})",
        plan.best_interval,
        if plan.use_os { "on" } else { "off" }
    );
    println!("candidates: {}", candidates.join(" "));
    print_plan(&plan, &net);
    println!("layout={layout}");
    println!("clients={clients}");
    println!("use_os={}", plan.use_os);
    println!("bi_seconds={:.6}", plan.best_interval);
    println!("candidates={}", candidates.join(","));
    for (r, q) in &plan.queues.per_router {
        println!("queue.{}={q}", net.name(*r));
    }
    Ok(())
}

fn cmd_simulate(config: &Path, common: &Common) -> Result<(), HarnessError> {
    let s = load(config, common.seed)?;
    let run = run_scenario(&s)?;
    write_csvs(&common.out, [(s.name.as_str(), &run.metrics)])?;
    println!("{}: seed {}", s.name, s.seed);
    if let Some(plan) = &run.plan {
        println!("  best interval {:.6} s", plan.best_interval);
    }
    for d in &run.metrics.drops {
        println!(
            "  {:<8} sent {:>6} dropped {:>5} rate {:.4}",
            d.phase.to_string(),
            d.sent,
            d.dropped,
            d.rate()
        );
    }
    let rates: Vec<String> = run
        .metrics
        .discovery
        .iter()
        .map(|d| format!("{}={}/{}", d.name, d.heard, d.total))
        .collect();
    println!("  discovery {}", rates.join(" "));
    println!("  csv written to {}", common.out.display());
    Ok(())
}

fn write_pair(dir: &Path, pair: &PairResult) -> Result<(), HarnessError> {
    write_csvs(
        dir,
        [
            (pair.baseline.scenario.name.as_str(), &pair.baseline.metrics),
            (pair.paced.scenario.name.as_str(), &pair.paced.metrics),
        ],
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Plan {
            layout,
            clients,
            no_os,
        } => cmd_plan(layout, clients, no_os).map(|_| true),
        Command::Simulate { config, common } => cmd_simulate(&config, &common).map(|_| true),
        Command::Compare {
            config,
            layout,
            clients,
            cross_size,
            check,
            common,
        } => (|| {
            let mut s = match config {
                Some(path) => load(&path, common.seed)?,
                None => {
                    let mut s = Scenario::reference(
                        layout.unwrap_or(Layout::Decentralised),
                        clients.unwrap_or(6),
                        cross_size.unwrap_or(100),
                        PolicyKind::Baseline,
                    );
                    if let Some(seed) = common.seed {
                        s.seed = seed;
                    }
                    s
                }
            };
            s.validate()?;
            s.name = s.default_name();
            let pair = run_pair(&s)?;
            write_pair(&common.out, &pair)?;
            print!("{}", pair.report);
            Ok::<bool, HarnessError>(!check || pair.report.passed())
        })(),
        Command::Sweep { layout, common } => (|| {
            let mut template =
                Scenario::reference(Layout::Decentralised, 6, 100, PolicyKind::Baseline);
            if let Some(seed) = common.seed {
                template.seed = seed;
            }
            let pairs = sweep(&layout.layouts(), &template)?;
            let mut summary = csv::Writer::from_path({
                fs::create_dir_all(&common.out)?;
                common.out.join("summary.csv")
            })?;
            summary.write_record([
                "pair",
                "baseline_min",
                "baseline_max",
                "paced_min",
                "paced_max",
                "baseline_drop_rate",
                "paced_drop_rate",
                "checks_passed",
            ])?;
            for pair in &pairs {
                write_pair(&common.out.join(&pair.key), pair)?;
                let r = &pair.report;
                summary.write_record([
                    pair.key.clone(),
                    format!("{:.6}", r.baseline_min),
                    format!("{:.6}", r.baseline_max),
                    format!("{:.6}", r.paced_min),
                    format!("{:.6}", r.paced_max),
                    format!("{:.6}", r.baseline_drop_rate),
                    format!("{:.6}", r.paced_drop_rate),
                    r.passed().to_string(),
                ])?;
                print!("{}", r);
            }
            summary.flush()?;
            println!(
                "{} scenario pairs written to {}",
                pairs.len(),
                common.out.display()
            );
            Ok(true)
        })(),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: reference thresholds not met");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
