//! Command-line front end.
//!
//! Exit codes: 0 success, 1 configuration error, 2 runtime failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pixelprobe::harness::{
    self, bench, config::RunConfig, corpus, report::CoverageSet, BenchSuite, PolicyKind,
};
use pixelprobe::simenv::{generate_app, SimApp};

#[derive(Parser)]
#[command(
    name = "pixelprobe",
    about = "Pixel-driven GUI exploration testing against simulated apps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a simulated app definition.
    Genapp {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 30)]
        screens: u32,
        #[arg(long, default_value_t = 0.3)]
        edge_density: f64,
        #[arg(long, default_value_t = 0.03)]
        crash_rate: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one exploration session and write its artifacts.
    Explore {
        /// App definition; generated from the config's app seed when omitted.
        #[arg(long)]
        app: Option<PathBuf>,
        #[arg(long, default_value = "dqn", value_parser = parse_policy)]
        policy: PolicyKind,
        #[arg(long, default_value_t = 300)]
        budget: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "mobile", value_parser = parse_platform)]
        platform: pixelprobe::actions::Platform,
        /// JSON run configuration (defaults apply to missing fields).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Recompute the report for an existing episode log.
    Report {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        app: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-coverage between two reports over the same app.
    Crosscov {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Run the benchmark suite and write per-run CSV plus a JSON summary.
    Bench {
        /// Suite definition; the canonical 20-app suite when omitted.
        #[arg(long)]
        suite: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Also write the resolved suite definition and exit.
        #[arg(long)]
        emit_suite: Option<PathBuf>,
    },
    /// Export a labeled screenshot corpus (PGM + JSON sidecars).
    Gencorpus {
        #[arg(long, default_value_t = 100)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        screenshots: usize,
        #[arg(long, default_value_t = 360)]
        width: usize,
        #[arg(long, default_value_t = 640)]
        height: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate widget detection against ground truth.
    EvalVision {
        /// Corpus directory (PGM + JSON); generated in memory when omitted.
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        screenshots: usize,
        #[arg(long, default_value_t = 0.8)]
        iou: f64,
    },
}

fn parse_policy(s: &str) -> Result<PolicyKind, String> {
    match s {
        "dqn" => Ok(PolicyKind::Dqn),
        "random" => Ok(PolicyKind::Random),
        "monkey" => Ok(PolicyKind::Monkey),
        other => Err(format!("unknown policy {other:?} (dqn|random|monkey)")),
    }
}

fn parse_platform(s: &str) -> Result<pixelprobe::actions::Platform, String> {
    match s {
        "mobile" => Ok(pixelprobe::actions::Platform::Mobile),
        "web" => Ok(pixelprobe::actions::Platform::Web),
        other => Err(format!("unknown platform {other:?} (mobile|web)")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(message)) => {
            eprintln!("config error: {message}");
            ExitCode::from(1)
        }
        Err(CliError::Runtime(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

enum CliError {
    Config(String),
    Runtime(String),
}

impl From<harness::HarnessError> for CliError {
    fn from(e: harness::HarnessError) -> Self {
        match e {
            harness::HarnessError::Config { .. } => CliError::Config(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn load_config(path: Option<&PathBuf>) -> Result<RunConfig, CliError> {
    let cfg = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            RunConfig::from_json(&text).map_err(|e| CliError::Config(e.to_string()))?
        }
        None => RunConfig::default(),
    };
    if let Err(issues) = cfg.validate() {
        let joined = issues
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join("; ");
        return Err(CliError::Config(joined));
    }
    Ok(cfg)
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Genapp {
            seed,
            screens,
            edge_density,
            crash_rate,
            out,
        } => {
            let app = generate_app(&pixelprobe::simenv::GenParams {
                seed,
                n_screens: screens,
                edge_density,
                crash_rate,
                ..Default::default()
            })
            .map_err(|e| CliError::Config(e.to_string()))?;
            std::fs::write(&out, app.to_canonical_json())?;
            println!(
                "wrote {} ({} screens, {} transitions, {} crashes, {:.0}% reachable)",
                out.display(),
                app.screens.len(),
                app.transitions.len(),
                app.crashes.len(),
                app.reachable_fraction * 100.0
            );
            Ok(())
        }
        Command::Explore {
            app,
            policy,
            budget,
            seed,
            platform,
            config,
            out_dir,
        } => {
            let mut cfg = load_config(config.as_ref())?;
            cfg.policy = policy;
            cfg.budget = budget;
            cfg.seeds.agent = seed;
            cfg.platform = platform;
            let artifacts = match app {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)?;
                    let app =
                        SimApp::from_json(&text).map_err(|e| CliError::Config(e.to_string()))?;
                    cfg.seeds.app = app.seed;
                    std::fs::create_dir_all(&out_dir)?;
                    let artifacts = harness::runner::run_on_app(&cfg, &app)?;
                    std::fs::write(out_dir.join("episode.ndjson"), artifacts.log.to_ndjson())?;
                    std::fs::write(out_dir.join("report.json"), artifacts.report.to_json())?;
                    if let Some(net) = &artifacts.network {
                        net.save(&out_dir.join("weights.bin"))
                            .map_err(|e| CliError::Runtime(e.to_string()))?;
                    }
                    artifacts
                }
                None => harness::runner::run(&cfg, Some(&out_dir))?,
            };
            println!(
                "{}: {} steps, screen coverage {:.3}, {} crashes -> {}",
                artifacts.report.policy,
                artifacts.report.counters.steps,
                artifacts.report.screen_coverage,
                artifacts.report.crashes.len(),
                out_dir.display()
            );
            Ok(())
        }
        Command::Report { log, app, out } => {
            let log_text = std::fs::read_to_string(&log)?;
            let episode = pixelprobe::agent::EpisodeLog::from_ndjson(&log_text)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let app_text = std::fs::read_to_string(&app)?;
            let app =
                SimApp::from_json(&app_text).map_err(|e| CliError::Config(e.to_string()))?;
            let report = harness::report::build_report(&episode, &app)?;
            match out {
                Some(path) => std::fs::write(path, report.to_json())?,
                None => println!("{}", report.to_json()),
            }
            Ok(())
        }
        Command::Crosscov { a, b } => {
            let ra = harness::report::Report::from_json(&std::fs::read_to_string(&a)?)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let rb = harness::report::Report::from_json(&std::fs::read_to_string(&b)?)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let sa = CoverageSet::screens(&ra);
            let sb = CoverageSet::screens(&rb);
            let ta = CoverageSet::transitions(&ra);
            let tb = CoverageSet::transitions(&rb);
            let out = serde_json::json!({
                "screens": {
                    "a_over_b": harness::report::cross_coverage(&sa, &sb)?,
                    "b_over_a": harness::report::cross_coverage(&sb, &sa)?,
                    "intersection": harness::report::intersection_coverage(&sa, &sb)?,
                },
                "transitions": {
                    "a_over_b": harness::report::cross_coverage(&ta, &tb)?,
                    "b_over_a": harness::report::cross_coverage(&tb, &ta)?,
                    "intersection": harness::report::intersection_coverage(&ta, &tb)?,
                },
            });
            println!("{}", serde_json::to_string_pretty(&out).expect("json"));
            Ok(())
        }
        Command::Bench {
            suite,
            out,
            emit_suite,
        } => {
            let suite_def = match suite {
                Some(path) => BenchSuite::from_json(&std::fs::read_to_string(&path)?)
                    .map_err(|e| CliError::Config(e.to_string()))?,
                None => BenchSuite::canonical(),
            };
            if let Some(path) = emit_suite {
                std::fs::write(
                    &path,
                    serde_json::to_string_pretty(&suite_def).expect("suite serializes"),
                )?;
                println!("wrote {}", path.display());
                return Ok(());
            }
            if let Err(issues) = suite_def.base.validate() {
                let joined = issues
                    .iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
                    .join("; ");
                return Err(CliError::Config(joined));
            }
            let summary = bench::run_bench(&suite_def)?;
            std::fs::create_dir_all(out.parent().unwrap_or(std::path::Path::new(".")))?;
            bench::write_csv(&summary, &out)?;
            let summary_path = out.with_extension("summary.json");
            std::fs::write(
                &summary_path,
                serde_json::to_string_pretty(&summary).expect("summary serializes"),
            )?;
            for p in &summary.per_policy {
                println!(
                    "{}: median screen coverage {:.3}, distinct crashes {}",
                    p.policy, p.median_screen_coverage, p.distinct_crashes
                );
            }
            if let Some(c) = &summary.comparison {
                println!(
                    "dqn vs random: +{:.1}% relative median, wilcoxon p = {:.4}",
                    c.relative_median_improvement * 100.0,
                    c.wilcoxon_p
                );
            }
            println!("wrote {} and {}", out.display(), summary_path.display());
            Ok(())
        }
        Command::Gencorpus {
            seed,
            screenshots,
            width,
            height,
            out,
        } => {
            let corpus = corpus::generate_typed_corpus(seed, screenshots, width, height)?;
            corpus::export_corpus(&corpus, &out)?;
            println!("wrote {} screenshots to {}", corpus.len(), out.display());
            Ok(())
        }
        Command::EvalVision {
            corpus: corpus_dir,
            seed,
            screenshots,
            iou,
        } => {
            let corpus = match corpus_dir {
                Some(dir) => corpus::load_corpus(&dir)?,
                None => corpus::generate_labeled_corpus(seed, screenshots, 360, 640)?,
            };
            let stats =
                corpus::evaluate_vision(&corpus, &pixelprobe::vision::VisionConfig::default(), iou);
            let out = serde_json::json!({
                "screenshots": corpus.len(),
                "iou_threshold": iou,
                "true_positives": stats.true_positives,
                "false_positives": stats.false_positives,
                "false_negatives": stats.false_negatives,
                "precision": stats.precision(),
                "recall": stats.recall(),
                "f1": stats.f1(),
            });
            println!("{}", serde_json::to_string_pretty(&out).expect("json"));
            Ok(())
        }
    }
}
