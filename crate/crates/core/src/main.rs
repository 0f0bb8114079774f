// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};

use beamnet::engine::Trace;
use beamnet::experiment::{simulate, summarize, Metric, SummaryRow, SweepPlan};
use beamnet::report::{self, RunManifest};
use beamnet::validate::{run_validation, LibraryMeasures};
use beamnet::{run_sweep, WorldConfig};

type Error = Box<dyn std::error::Error>;

/// Simulator of self-organizing wireless nodes with flocking-style sector
/// beamforming.
///
/// Parameter precedence: command-line flags override the config file, which
/// overrides BEAMNET_SEED (seed only), which overrides built-in defaults.
#[derive(Parser)]
#[command(name = "beamnet", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one trial and write its metrics and protocol dumps.
    Trial {
        #[command(flatten)]
        world: WorldArgs,
        /// Output directory.
        #[arg(long, default_value = "out/trial")]
        out: PathBuf,
        /// Also write a round-by-round trace of region formation.
        #[arg(short, long)]
        verbose: bool,
    },
    /// Run the (n, gradient, seed) sweep and write records, summary and plots.
    Sweep {
        #[command(flatten)]
        world: WorldArgs,
        /// Node counts, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = SweepPlan::DEFAULT_N)]
        n_values: Vec<usize>,
        /// Gradient bounds, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = SweepPlan::DEFAULT_GRADIENTS)]
        gradients: Vec<u32>,
        /// Topologies per (n, gradient) cell.
        #[arg(long, default_value_t = SweepPlan::DEFAULT_SEEDS)]
        seeds: u64,
        /// Worker threads. Never changes results.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Output directory.
        #[arg(long, default_value = "out/sweep")]
        out: PathBuf,
    },
    /// Check graph measures against brute-force oracles and trial invariants.
    Validate {
        #[command(flatten)]
        world: WorldArgs,
    },
    /// Re-plot summary CSV and SVG charts from an existing records CSV.
    Plot {
        /// Records CSV written by `sweep`.
        records: PathBuf,
        /// Field side length used for the density axis.
        #[arg(long, default_value_t = 10.0)]
        field_size: f64,
        /// Output directory.
        #[arg(long, default_value = "out/plot")]
        out: PathBuf,
    },
}

/// One flag per configuration key.
#[derive(Args)]
struct WorldArgs {
    /// `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Side length of the square field.
    #[arg(long)]
    field_size: Option<f64>,
    /// Omnidirectional radio range.
    #[arg(long)]
    radio_range: Option<f64>,
    /// Number of nodes.
    #[arg(long, visible_alias = "n")]
    node_count: Option<usize>,
    /// Maximum region hopcount.
    #[arg(long)]
    gradient: Option<u32>,
    /// Path-loss exponent for sector range.
    #[arg(long)]
    alpha: Option<f64>,
    /// Smallest antenna element count.
    #[arg(long)]
    elements_min: Option<u32>,
    /// Largest antenna element count.
    #[arg(long)]
    elements_max: Option<u32>,
    /// Centroid candidacy margin in virtual coordinates.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Averaging consensus tolerance.
    #[arg(long)]
    delta: Option<f64>,
    /// Beam sweep step in radians (must divide 2π).
    #[arg(long)]
    sweep_step: Option<f64>,
    /// Master seed (falls back to BEAMNET_SEED).
    #[arg(long)]
    seed: Option<u64>,
    /// Break head ties by lower id instead of a coin flip.
    #[arg(long)]
    deterministic_ties: Option<bool>,
}

impl WorldArgs {
    fn resolve(&self) -> Result<WorldConfig, Error> {
        let mut cfg = WorldConfig::default();
        if let Ok(seed) = std::env::var("BEAMNET_SEED") {
            cfg.set("seed", &seed)?;
        }
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        macro_rules! apply {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field {
                    cfg.$field = v;
                })*
            };
        }
        apply!(
            field_size,
            radio_range,
            node_count,
            gradient,
            alpha,
            elements_min,
            elements_max,
            epsilon,
            delta,
            sweep_step,
            seed,
            deterministic_ties
        );
        cfg.validate()?;
        Ok(cfg)
    }
}

fn manifest(config: &WorldConfig, subcommand: &str, out: &Path, extra: Vec<(String, String)>) -> RunManifest {
    RunManifest {
        config: config.clone(),
        subcommand: subcommand.to_string(),
        output_dir: out.display().to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        extra,
    }
}

fn write_plots(rows: &[SummaryRow], field_size: f64, out: &Path) -> Result<(), Error> {
    report::write_summary_csv(rows, field_size, BufWriter::new(File::create(out.join("summary.csv"))?))?;
    for metric in Metric::ALL {
        fs::write(
            out.join(format!("{metric}.svg")),
            report::render_svg(rows, metric, field_size),
        )?;
    }
    Ok(())
}

fn summarize_all(records: &[beamnet::MetricsRecord]) -> Vec<SummaryRow> {
    Metric::ALL.iter().flat_map(|&m| summarize(records, m)).collect()
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Trial { world, out, verbose } => {
            let config = world.resolve()?;
            fs::create_dir_all(&out)?;
            let mut trace = Trace::default();
            let t = simulate(&config, verbose.then_some(&mut trace))?;
            report::write_records_csv(
                std::slice::from_ref(&t.metrics),
                BufWriter::new(File::create(out.join("metrics.csv"))?),
            )?;
            fs::write(out.join("placement.txt"), t.placement.to_text())?;
            fs::write(out.join("omni.edges"), t.omni.to_edge_list())?;
            fs::write(
                out.join("directional.edges"),
                t.beams.links.symmetric_graph(config.node_count).to_edge_list(),
            )?;
            fs::write(out.join("regions.txt"), t.formation.dump())?;
            fs::write(out.join("centroids.txt"), t.centroids.dump())?;
            fs::write(out.join("beams.txt"), t.beams.dump())?;
            if verbose {
                fs::write(out.join("trace.txt"), trace.to_string())?;
            }
            let stats = &t.formation.stats;
            let extra = vec![
                ("formation_rounds".into(), stats.rounds.to_string()),
                ("formation_repairs".into(), stats.repairs.to_string()),
                ("malformed_dropped".into(), stats.malformed_dropped.to_string()),
                ("rebuilt_hop_over_gradient".into(), t.centroids.gradient_violations.to_string()),
            ];
            fs::write(out.join("manifest.txt"), manifest(&config, "trial", &out, extra).to_text())?;
            let m = &t.metrics;
            println!(
                "n={} gradient={} seed={} apl {:.4} -> {:.4}, cc {:.4} -> {:.4}, components {} -> {}, peripheral {:.3}, centroid {:.3}, unidirectional {}",
                m.n, m.gradient, m.seed, m.apl_omni, m.apl_dir, m.cc_omni, m.cc_dir,
                m.components_omni, m.components_dir, m.frac_peripheral, m.frac_centroid, m.unidirectional_links
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { world, n_values, gradients, seeds, jobs, out } => {
            let config = world.resolve()?;
            fs::create_dir_all(&out)?;
            let plan = SweepPlan {
                base: config.clone(),
                n_values,
                gradients,
                seeds,
            };
            let result = run_sweep(&plan, jobs);
            report::write_records_csv(&result.records, BufWriter::new(File::create(out.join("records.csv"))?))?;
            write_plots(&summarize_all(&result.records), config.field_size, &out)?;
            let failures: String = result
                .failures
                .iter()
                .map(|f| format!("{} {} {} {}\n", f.spec.n, f.spec.gradient, f.spec.seed, f.reason))
                .collect();
            fs::write(out.join("failures.txt"), failures)?;
            let join = |v: Vec<String>| v.join(",");
            let extra = vec![
                ("n_values".into(), join(plan.n_values.iter().map(|x| x.to_string()).collect())),
                ("gradients".into(), join(plan.gradients.iter().map(|x| x.to_string()).collect())),
                ("seeds".into(), plan.seeds.to_string()),
                ("jobs".into(), jobs.to_string()),
                ("failed_trials".into(), result.failures.len().to_string()),
            ];
            fs::write(out.join("manifest.txt"), manifest(&config, "sweep", &out, extra).to_text())?;
            println!(
                "{} trials, {} failed; artifacts in {}",
                result.records.len() + result.failures.len(),
                result.failures.len(),
                out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { world } => {
            let config = world.resolve()?;
            let report = run_validation(&LibraryMeasures, &config);
            print!("{report}");
            Ok(if report.passed() {
                println!("all checks passed");
                ExitCode::SUCCESS
            } else {
                println!("validation FAILED");
                ExitCode::FAILURE
            })
        }
        Command::Plot { records, field_size, out } => {
            let file = File::open(&records).map_err(|e| format!("cannot open {}: {e}", records.display()))?;
            let recs = report::read_records_csv(file)?;
            fs::create_dir_all(&out)?;
            write_plots(&summarize_all(&recs), field_size, &out)?;
            println!("{} records re-plotted into {}", recs.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
