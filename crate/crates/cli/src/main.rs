use clap::{Parser, Subcommand};
use linfol_cli::config::{ExperimentConfig, Overrides};
use linfol_cli::instance::Instance;
use linfol_cli::ops::Context;
use linfol_cli::report::{Meta, Record, Report};
use linfol_cli::table::table;
use linfol_cli::CliError;
use linfol::covering::refine;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "linfol", version, about = "Local-model verification runs for linear foliations")]
struct Cli {
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Multiplies R inside the exponential scales only.
    #[arg(long = "scale-R", global = true)]
    scale_r: Option<f64>,
    /// Multiplies λ inside the exponential scales only.
    #[arg(long = "scale-lambda", global = true)]
    scale_lambda: Option<f64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Chart shape, boundary distance and η̂ at the configured point.
    Model,
    /// Density bounds at random leaf points.
    Metric,
    /// Separated-set counts and entropy rates.
    Entropy,
    /// One lemma check by id.
    Verify { id: String },
    /// Covering refinement on an instance file.
    Refine { instance: PathBuf },
    /// Render a table from saved machine reports.
    Report {
        #[arg(long)]
        table: String,
        #[arg(required = true)]
        reports: Vec<PathBuf>,
    },
    /// Every op listed in the config.
    Run,
}

fn load(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    cfg.apply(&Overrides {
        seed: cli.seed,
        samples: cli.samples,
        out: cli.out.as_ref().map(|p| p.display().to_string()),
        scale_r: cli.scale_r,
        scale_lambda: cli.scale_lambda,
    })?;
    Ok(cfg)
}

fn refine_report(cfg: &ExperimentConfig, path: &Path) -> Result<Report, CliError> {
    let inst = Instance::parse(&std::fs::read_to_string(path)?)?;
    let meta = Meta { config_hash: cfg.hash(), seed: cfg.run.seed, version: env!("CARGO_PKG_VERSION").into(), ops: vec!["disccount".into()] };
    let record = match refine(&inst.points, &inst.coverings, inst.m) {
        Ok(res) => {
            let chk = res.check(&inst.points, &inst.coverings, inst.m);
            vec![
                Record::at_most("disccount", "refinement count ≤ 200^n M", chk.count as f64, chk.bound).with("chart", inst.chart.clone()),
                Record::new("disccount", "doubled containment and coverage exact", chk.containment_violations == 0 && chk.uncovered == 0),
            ]
        }
        Err(e) => vec![Record::error("disccount", e)],
    };
    Ok(Report { meta, records: record })
}

fn execute(cli: &Cli) -> Result<bool, CliError> {
    if let Cmd::Report { table: sel, reports } = &cli.cmd {
        let reps = reports
            .iter()
            .map(|p| Report::from_jsonl(&std::fs::read_to_string(p)?))
            .collect::<Result<Vec<_>, _>>()?;
        print!("{}", table(&reps, sel)?);
        return Ok(true);
    }
    let cfg = load(cli)?;
    let (name, report) = match &cli.cmd {
        Cmd::Refine { instance } => ("refine".to_string(), refine_report(&cfg, instance)?),
        cmd => {
            let (name, ops): (String, Vec<String>) = match cmd {
                Cmd::Model => ("model".into(), vec!["model".into()]),
                Cmd::Metric => ("metric".into(), vec!["metric".into()]),
                Cmd::Entropy => ("entropy".into(), vec!["entropy".into()]),
                Cmd::Verify { id } => (id.clone(), vec![id.clone()]),
                _ => ("run".into(), cfg.run.ops.clone()),
            };
            let mut checked = cfg.clone();
            checked.run.ops = ops.clone();
            let ctx = Context::new(checked)?;
            (name, ctx.run(&ops))
        }
    };
    print!("{}", report.summary());
    if let Some(dir) = &cfg.output.dir {
        let dir = Path::new(dir);
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("{name}.jsonl")), report.to_jsonl())?;
        std::fs::write(dir.join(format!("{name}.txt")), report.summary())?;
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
