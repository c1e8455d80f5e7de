use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use log::info;

use jfs_core::dataio::{
    self, class_mask_path, load_candidate_bank, load_class_masks, load_dataset, write_details, write_report,
    ReportFormat, Split, CANDIDATES_DIR, COARSE_DIR, MANIFEST_FILE,
};
use jfs_core::eval::{evaluate, Arbiter, EvalConfig, GroupSpec};
use jfs_core::judge::{judge, JudgeCase, JudgeSupport};
use jfs_core::refine::{refine, RefineConfig};
use jfs_core::synth::{generate_benchmark, BenchmarkConfig};
use jfs_core::{BackendSpec, PrototypeConfig};

#[derive(Parser)]
#[command(name = "jfs", version, about = "Judge segmentation refinement with a few-shot segmentation oracle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded synthetic benchmark tree.
    Synth(SynthArgs),
    /// Merge candidate segments into refined class masks.
    Refine(RefineArgs),
    /// Judge one coarse/refined pair and print the scores as JSON.
    Judge(JudgeArgs),
    /// Run the full harness and write report and per-sample details.
    Eval(EvalArgs),
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1]"))
    }
}

fn non_negative(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{v} must be finite and >= 0"))
    }
}

fn backend_spec(s: &str) -> Result<BackendSpec, String> {
    s.parse().map_err(|e: jfs_core::Error| e.to_string())
}

#[derive(Clone, Debug)]
struct Groups(Vec<GroupSpec>);

fn groups(s: &str) -> Result<Groups, String> {
    GroupSpec::parse_list(s).map(Groups).map_err(|e| e.to_string())
}

#[derive(Clone, Debug)]
struct SupportArg {
    image: PathBuf,
    mask: PathBuf,
}

fn support_arg(s: &str) -> Result<SupportArg, String> {
    let (image, mask) = s
        .split_once(':')
        .ok_or_else(|| format!("expected IMAGE:MASK, got `{s}`"))?;
    if image.is_empty() || mask.is_empty() {
        return Err(format!("expected IMAGE:MASK, got `{s}`"));
    }
    Ok(SupportArg {
        image: image.into(),
        mask: mask.into(),
    })
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    seed: u64,
    /// Number of query samples.
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long, default_value_t = 0.5, value_parser = unit_interval)]
    corrupt_fraction: f64,
    /// Number of held-out support images.
    #[arg(long, default_value_t = 48)]
    support_pool: usize,
    #[arg(long, default_value_t = 4)]
    granularity: u32,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RefineArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, default_value = "train")]
    split: String,
    /// Coarse mask directory; defaults to <dataset>/coarse.
    #[arg(long)]
    coarse: Option<PathBuf>,
    /// Candidate directory; defaults to <dataset>/candidates.
    #[arg(long)]
    candidates: Option<PathBuf>,
    /// Minimum fraction of a candidate covered by its class's coarse mask.
    #[arg(long, default_value_t = 0.0, value_parser = unit_interval)]
    min_overlap: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct JudgeArgs {
    /// Image the judged masks belong to.
    #[arg(long)]
    query: PathBuf,
    #[arg(long)]
    coarse: PathBuf,
    #[arg(long)]
    refined: PathBuf,
    /// Held-out IMAGE:MASK pair with trusted ground truth; repeat for more shots.
    #[arg(long, required = true, value_parser = support_arg)]
    support: Vec<SupportArg>,
    #[arg(long, default_value = "builtin:prototype", value_parser = backend_spec)]
    backend: BackendSpec,
    /// Spatial weight of the prototype backend.
    #[arg(long, default_value_t = 0.0, value_parser = non_negative)]
    lambda: f64,
    #[arg(long, default_value_t = 1)]
    class_id: u8,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, default_value = "builtin:prototype", value_parser = backend_spec)]
    backend: BackendSpec,
    /// Comma-separated groups: top:K, bottom:K, topbottom:K, random:PERxCLASSES.
    #[arg(long, default_value = "top:20,bottom:20,random:20x4", value_parser = groups)]
    groups: Groups,
    #[arg(long, default_value_t = 1)]
    shots: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 0.0, value_parser = non_negative)]
    lambda: f64,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Directory receiving report.csv, report.json and details.csv.
    #[arg(long)]
    out: PathBuf,
}

fn cmd_synth(args: &SynthArgs) -> anyhow::Result<()> {
    let config = BenchmarkConfig {
        n_samples: args.n,
        corrupt_fraction: args.corrupt_fraction,
        support_pool: args.support_pool,
        granularity: args.granularity,
        ..BenchmarkConfig::default()
    };
    let index = generate_benchmark(args.seed, &config, &args.out)?;
    info!("wrote {} samples to {}", index.entries.len(), args.out.display());
    println!("{}", args.out.join(MANIFEST_FILE).display());
    Ok(())
}

fn cmd_refine(args: &RefineArgs) -> anyhow::Result<()> {
    let split: Split = args.split.parse()?;
    let index = load_dataset(&args.dataset, split)?;
    let coarse_dir = args.coarse.clone().unwrap_or_else(|| args.dataset.join(COARSE_DIR));
    let cand_dir = args.candidates.clone().unwrap_or_else(|| args.dataset.join(CANDIDATES_DIR));
    let config = RefineConfig::new(args.min_overlap)?;
    let mut written = 0;
    for entry in &index.entries {
        let coarse = load_class_masks(&coarse_dir, &entry.image_id)?;
        if coarse.is_empty() {
            continue;
        }
        let dims = coarse.values().next().map(|m| m.dims());
        let bank = load_candidate_bank(&cand_dir, &entry.image_id, dims)?;
        let refined = refine(&coarse, &bank, &config).with_context(|| format!("refining {}", entry.image_id))?;
        for (class_id, mask) in &refined {
            dataio::save_mask(&class_mask_path(&args.out, &entry.image_id, *class_id), mask)?;
            written += 1;
        }
    }
    println!("{written}");
    Ok(())
}

fn cmd_judge(args: &JudgeArgs) -> anyhow::Result<()> {
    let query = dataio::load_image(&args.query)?;
    let coarse = dataio::load_mask(&args.coarse)?;
    let refined = dataio::load_mask(&args.refined)?;
    let pairs = args
        .support
        .iter()
        .map(|s| Ok((dataio::load_image(&s.image)?, dataio::load_mask(&s.mask)?)))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let backend = args.backend.build(PrototypeConfig::new(args.lambda)?)?;
    let case = JudgeCase {
        query_image: &query,
        coarse: &coarse,
        refined: &refined,
        supports: pairs.iter().map(|(image, mask)| JudgeSupport { image, mask }).collect(),
        class_id: args.class_id,
    };
    let result = judge(backend.as_ref(), &case)?;
    let line = serde_json::json!({
        "e_coarse": result.e_coarse,
        "e_refined": result.e_refined,
        "verdict": result.verdict.as_str(),
    });
    println!("{line}");
    Ok(())
}

fn cmd_eval(args: &EvalArgs) -> anyhow::Result<()> {
    if args.groups.0.is_empty() {
        bail!("at least one group is required");
    }
    let backend = args.backend.build(PrototypeConfig::new(args.lambda)?)?;
    let config = EvalConfig {
        groups: args.groups.0.clone(),
        shots: args.shots,
        seed: args.seed,
        jobs: args.jobs,
    };
    let evaluation = evaluate(&args.dataset, Arbiter::Fss(backend.as_ref()), &config)?;
    let out: &Path = &args.out;
    write_report(&evaluation.report, &out.join("report.csv"), ReportFormat::Csv)?;
    write_report(&evaluation.report, &out.join("report.json"), ReportFormat::Json)?;
    write_details(&evaluation.records, &out.join("details.csv"))?;
    print!("{}", std::fs::read_to_string(out.join("report.csv"))?);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("JFS_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Synth(a) => cmd_synth(a),
        Command::Refine(a) => cmd_refine(a),
        Command::Judge(a) => cmd_judge(a),
        Command::Eval(a) => cmd_eval(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
