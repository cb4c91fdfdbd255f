//! `vids`: validate, generate, measure, split, score, export, and mutate
//! verified imaging datasets.
//!
//! Exit codes: 0 pass/success, 1 validation failed, 2 usage error,
//! 3 operational error (I/O, bad input data, source fails validation).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use vids_core::error::Error;
use vids_core::model::{Profile, ReportStatus, RuleId, Scorecard};
use vids_core::scaffold::FixtureConfig;
use vids_core::validator::{render_report, validate, RenderFormat};
use vids_core::{exporter, quality, scaffold, scorer, splits};

#[derive(Parser)]
#[command(
    name = "vids",
    version,
    about = "Verified imaging dataset toolkit",
    after_help = "Exit codes: 0 pass, 1 validation failed, 2 usage error, 3 operational error."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    /// Read the profile from the .vids marker.
    Auto,
    Poc,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaffoldProfile {
    Poc,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum LayoutArg {
    Flat,
    Training,
}

#[derive(Args)]
struct JsonFlag {
    /// Emit a single JSON document on stdout instead of human output.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a dataset against the 21-rule catalog.
    Validate {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        profile: ProfileArg,
        #[command(flatten)]
        json: JsonFlag,
    },
    /// Generate a compliant dataset: a POC skeleton or a Full fixture with
    /// multi-reader masks, quality artifacts, and splits.
    Scaffold {
        path: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        subjects: u32,
        #[arg(long, value_enum, default_value = "poc")]
        profile: ScaffoldProfile,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Readers per subject (Full fixtures).
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(2..))]
        readers: u32,
        #[command(flatten)]
        json: JsonFlag,
    },
    /// Recompute inter-annotator agreement from per-reader masks under
    /// derivatives/readers/ and write the quality artifacts.
    Quality {
        path: PathBuf,
        #[command(flatten)]
        json: JsonFlag,
    },
    /// Generate ml/splits.json for the dataset's subjects.
    Splits {
        path: PathBuf,
        #[arg(long)]
        seed: u64,
        /// Train,val,test ratios summing to 1.
        #[arg(long, value_parser = parse_ratios, default_value = "0.70,0.15,0.15")]
        ratios: (f64, f64, f64),
        #[command(flatten)]
        json: JsonFlag,
    },
    /// Score a 22-dimension compliance scorecard.
    Score {
        scorecard: PathBuf,
        #[command(flatten)]
        json: JsonFlag,
    },
    /// Export a dataset to a downstream layout with provenance companion.
    Export {
        path: PathBuf,
        out: PathBuf,
        #[arg(long, value_enum)]
        layout: LayoutArg,
        /// Task name for the training layout file prefix.
        #[arg(long, default_value = "Task")]
        task: String,
        #[command(flatten)]
        json: JsonFlag,
    },
    /// Copy a fixture and violate exactly one rule (test harness).
    Mutate {
        src: PathBuf,
        dst: PathBuf,
        #[arg(long, value_parser = parse_rule)]
        rule: RuleId,
        #[command(flatten)]
        json: JsonFlag,
    },
}

fn parse_ratios(s: &str) -> Result<(f64, f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err("expected three comma-separated ratios, e.g. 0.70,0.15,0.15".into());
    }
    let mut values = [0f64; 3];
    for (slot, part) in values.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|e| format!("bad ratio {part:?}: {e}"))?;
    }
    Ok((values[0], values[1], values[2]))
}

fn parse_rule(s: &str) -> Result<RuleId, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("serializable output")
    );
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Validate {
            path,
            profile,
            json,
        } => {
            let profile_override = match profile {
                ProfileArg::Auto => None,
                ProfileArg::Poc => Some(Profile::Poc),
                ProfileArg::Full => Some(Profile::Full),
            };
            let report = validate(&path, profile_override)?;
            let format = if json.json {
                RenderFormat::Json
            } else {
                RenderFormat::Human
            };
            print!("{}", render_report(&report, format));
            if json.json {
                println!();
            }
            Ok(match report.status() {
                ReportStatus::Pass => ExitCode::SUCCESS,
                ReportStatus::Fail => ExitCode::from(1),
            })
        }
        Command::Scaffold {
            path,
            subjects,
            profile,
            seed,
            readers,
            json,
        } => {
            let mut config = FixtureConfig::new(subjects);
            config.seed = seed;
            config.readers_per_subject = readers;
            match profile {
                ScaffoldProfile::Poc => {
                    scaffold::scaffold_dataset(&path, &config)?;
                    if json.json {
                        print_json(&serde_json::json!({
                            "Root": path.display().to_string(),
                            "Profile": "poc",
                            "Subjects": subjects,
                        }));
                    } else {
                        println!(
                            "scaffolded {} subject(s) at {} (profile poc)",
                            subjects,
                            path.display()
                        );
                    }
                }
                ScaffoldProfile::Full => {
                    config.profile = Profile::Full;
                    let stats = scaffold::generate_fixture(&path, &config)?;
                    if json.json {
                        print_json(&stats);
                    } else {
                        println!(
                            "generated {} subject(s) at {} (profile full, {} reader masks, \
                             mean pairwise dice {})",
                            stats.subjects,
                            path.display(),
                            stats.reader_masks,
                            stats
                                .mean_pairwise_dice
                                .map(|d| format!("{d:.4}"))
                                .unwrap_or_else(|| "n/a".into()),
                        );
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Quality { path, json } => {
            let (summary, agreement) = quality::compute_agreement_from_tree(&path)?;
            quality::write_quality_artifacts(&path, &summary, &agreement)?;
            if json.json {
                print_json(&summary);
            } else {
                println!(
                    "quality artifacts written: {} subject(s), {} pair record(s){}",
                    summary.per_subject.len(),
                    agreement.pairs.len(),
                    summary
                        .dataset
                        .as_ref()
                        .map(|d| format!(", mean pairwise dice {:.4}", d.mean_pairwise_dice))
                        .unwrap_or_default(),
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Splits {
            path,
            seed,
            ratios,
            json,
        } => {
            let index = vids_core::validator::scan_dataset(&path)?;
            let ids: Vec<String> = index.subjects.iter().map(|s| s.id.clone()).collect();
            let spec = splits::generate_splits(&ids, ratios, seed)?;
            let out = path.join("ml/splits.json");
            if let Some(parent) = out.parent() {
                std::fs::create_dir_all(parent).map_err(|e| Error::IoFailure {
                    path: parent.into(),
                    source: e,
                })?;
            }
            let text = serde_json::to_string_pretty(&spec).expect("serializable splits");
            std::fs::write(&out, text + "\n").map_err(|e| Error::IoFailure {
                path: out.clone(),
                source: e,
            })?;
            if json.json {
                print_json(&spec);
            } else {
                println!(
                    "wrote {} (train {}, val {}, test {})",
                    out.display(),
                    spec.train.len(),
                    spec.val.len(),
                    spec.test.len()
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Score { scorecard, json } => {
            let text = std::fs::read_to_string(&scorecard).map_err(|e| Error::IoFailure {
                path: scorecard.clone(),
                source: e,
            })?;
            let card: Scorecard = serde_json::from_str(&text).map_err(|e| Error::Json {
                path: scorecard.clone(),
                source: e,
            })?;
            let report = scorer::score(&card)?;
            if json.json {
                print_json(&report);
            } else {
                println!("Structure    {:>4.1}/6", report.structure);
                println!("Imaging      {:>4.1}/3", report.imaging);
                println!("Annotation   {:>4.1}/4", report.annotation);
                println!("Provenance   {:>4.1}/5", report.provenance);
                println!("Quality      {:>4.1}/2", report.quality);
                println!("MLReadiness  {:>4.1}/2", report.ml_readiness);
                println!("Total        {:>4.1}/22 ({}%)", report.total, report.percent);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Export {
            path,
            out,
            layout,
            task,
            json,
        } => {
            let manifest = match layout {
                LayoutArg::Flat => exporter::export_flat(&path, &out)?,
                LayoutArg::Training => exporter::export_training_layout(&path, &out, &task)?,
            };
            if json.json {
                print_json(&manifest);
            } else {
                println!(
                    "exported {} case(s) to {} (layout {})",
                    manifest.entries.len(),
                    out.display(),
                    manifest.layout
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Mutate {
            src,
            dst,
            rule,
            json,
        } => {
            let description = scaffold::mutate_fixture(&src, rule, &dst)?;
            if json.json {
                print_json(&serde_json::json!({
                    "Rule": rule.to_string(),
                    "Description": description,
                }));
            } else {
                println!("{rule}: {description}");
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
