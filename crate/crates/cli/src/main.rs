use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use repairlab::pipeline::{
    compare_interventions, manifest, run_pipeline, write_artifacts, Artifacts, PipelineConfig, PipelineError,
    PreprocessConfig,
};

/// Config-driven fairness-intervention experiments.
#[derive(Parser)]
#[command(name = "repairlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the single pipeline described by the config.
    Run(Common),
    /// Run every `[[sweep]]` stack and write comparison.csv.
    Compare(Common),
}

#[derive(Args)]
struct Common {
    /// TOML config, or a manifest.json from an earlier run.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Print the stage log to stderr.
    #[arg(long)]
    verbose: bool,
}

fn budget_notes(config: &PipelineConfig) -> Vec<String> {
    let stacks = std::iter::once((String::from("main"), config.preprocess.as_ref()))
        .chain(config.sweep.iter().map(|s| (s.name.clone(), s.preprocess.as_ref())));
    stacks
        .filter_map(|(name, pre)| match pre {
            Some(PreprocessConfig::Optimize { problem, .. }) => Some(format!(
                "note: the distortion budget c has no default; stack `{name}` uses c = {}",
                serde_json::to_string(&problem.distortion_budget).unwrap_or_default()
            )),
            _ => None,
        })
        .collect()
}

fn execute(compare: bool, args: &Common) -> Result<Vec<String>, PipelineError> {
    let mut config = PipelineConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    for note in budget_notes(&config) {
        eprintln!("{note}");
    }
    let (mut artifacts, log, command): (Artifacts, Vec<String>, &str) = if compare {
        let out = compare_interventions(&config)?;
        (out.artifacts, out.log, "compare")
    } else {
        let out = run_pipeline(&config)?;
        (out.artifacts, out.log, "run")
    };
    let m = manifest(&config, command, &artifacts);
    artifacts.insert("manifest.json".into(), m);
    write_artifacts(&args.out_dir, &artifacts)?;
    Ok(log)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (compare, args) = match &cli.command {
        Command::Run(a) => (false, a),
        Command::Compare(a) => (true, a),
    };
    match execute(compare, args) {
        Ok(log) => {
            if args.verbose {
                for line in log {
                    eprintln!("{line}");
                }
            }
            println!("{}", args.out_dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
