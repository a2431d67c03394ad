//! Command-line front end: analyze a configuration, verify the analytic
//! indices against the Monte-Carlo estimator, sweep parameter grids to CSV,
//! or search for a network that loses stability while one cycle keeps it.
//!
//! Exit codes: 0 success, 1 invalid input, 2 unsupported regime,
//! 3 verification failure.

mod config;
mod sweep;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use config::{RunConfig, Validated};
use hetnet::b3b3::{self, ParamBox};
use hetnet::network::NuConvention;
use hetnet::report::{analyze_b2, analyze_b3, render_text};
use hetnet::simkit::{FollowCaps, McOptions};

#[derive(Parser)]
#[command(
    name = "hetnet",
    version,
    about = "Stability indices for simple heteroclinic networks in R^4"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for report files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Override the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the configured per-epsilon sample count.
    #[arg(long)]
    samples: Option<usize>,
    /// Override the configured epsilon grid, e.g. "1e-2,3e-3,1e-3".
    #[arg(long, value_delimiter = ',')]
    eps_grid: Option<Vec<f64>>,
    /// Loop-exponent convention for the derived quantities.
    #[arg(long, value_enum)]
    nu_convention: Option<NuArg>,
}

#[derive(clap::ValueEnum, Clone, Copy)]
enum NuArg {
    Composed,
    Display,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a spec and write the index report.
    Analyze(CommonArgs),
    /// Compare analytic indices against the Monte-Carlo estimator.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Absolute tolerance for finite index comparisons.
        #[arg(long)]
        tolerance: Option<f64>,
        /// Dump the first N raw samples per connection to CSV.
        #[arg(long, default_value_t = 0)]
        dump_samples: usize,
    },
    /// Evaluate a parameter grid and write one CSV row per point.
    Sweep(CommonArgs),
    /// Search for a spec whose xi3-cycle is predominantly stable while the
    /// network index along [xi4 -> xi1] is negative.
    Witness {
        #[command(flatten)]
        common: CommonArgs,
        /// Cap on rejection-sampling draws.
        #[arg(long)]
        max_draws: Option<usize>,
    },
}

fn main() -> ExitCode {
    init_threads();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e
                .downcast_ref::<hetnet::Error>()
                .map(|he| match he {
                    hetnet::Error::UnsupportedRegime(_) => 2u8,
                    _ => 1u8,
                })
                .unwrap_or(1);
            ExitCode::from(code)
        }
    }
}

fn init_threads() {
    if let Ok(v) = std::env::var("HETNET_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Analyze(common) => cmd_analyze(&common),
        Command::Verify {
            common,
            tolerance,
            dump_samples,
        } => cmd_verify(&common, tolerance, dump_samples),
        Command::Sweep(common) => cmd_sweep(&common),
        Command::Witness { common, max_draws } => cmd_witness(&common, max_draws),
    }
}

fn load(common: &CommonArgs) -> anyhow::Result<RunConfig> {
    let mut cfg = RunConfig::load(&common.config)?;
    if let Some(s) = common.seed {
        cfg.options.seed = s;
    }
    if let Some(s) = common.samples {
        cfg.options.samples = s;
    }
    if let Some(g) = &common.eps_grid {
        cfg.options.eps_grid = g.clone();
    }
    if let Some(nu) = common.nu_convention {
        cfg.options.nu_convention = match nu {
            NuArg::Composed => NuConvention::Composed,
            NuArg::Display => NuConvention::Display,
        };
    }
    Ok(cfg)
}

fn write_out(dir: &PathBuf, name: &str, contents: &str) -> anyhow::Result<PathBuf> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn cmd_analyze(common: &CommonArgs) -> anyhow::Result<ExitCode> {
    let cfg = load(common)?;
    let report = match cfg.validated()? {
        Validated::B3(v) => analyze_b3(&v, cfg.options.n_cap)?,
        Validated::B2(v) => analyze_b2(&v, cfg.options.n_cap)?,
    };
    let json = serde_json::to_string_pretty(&report)?;
    let text = render_text(&report);
    write_out(&common.out, "report.json", &json)?;
    write_out(&common.out, "report.txt", &text)?;
    print!("{text}");
    Ok(ExitCode::SUCCESS)
}

fn mc_options(cfg: &RunConfig) -> McOptions {
    McOptions {
        eps_grid: cfg.options.eps_grid.clone(),
        samples: cfg.options.samples,
        seed: cfg.options.seed,
        caps: FollowCaps::default(),
    }
}

fn cmd_verify(
    common: &CommonArgs,
    tolerance: Option<f64>,
    dump_samples: usize,
) -> anyhow::Result<ExitCode> {
    let cfg = load(common)?;
    let tol = tolerance.unwrap_or(cfg.options.tolerance);
    let opts = mc_options(&cfg);
    let report = match cfg.validated()? {
        Validated::B3(v) => {
            if dump_samples > 0 {
                dump_rows(
                    &common.out,
                    &hetnet::simkit::Model::B3(v),
                    hetnet::simkit::Conn::B3(hetnet::b3b3::B3Connection::X1toX2),
                    &opts,
                    dump_samples,
                )?;
            }
            verify::verify_b3(&v, &opts, tol, cfg.options.n_cap)?
        }
        Validated::B2(v) => {
            if dump_samples > 0 {
                dump_rows(
                    &common.out,
                    &hetnet::simkit::Model::B2(v),
                    hetnet::simkit::Conn::B2(hetnet::b2b2::B2Connection::AtoB),
                    &opts,
                    dump_samples,
                )?;
            }
            verify::verify_b2(&v, &opts, tol, cfg.options.n_cap)?
        }
    };
    let json = serde_json::to_string_pretty(&report)?;
    write_out(&common.out, "verify.json", &json)?;
    let text = verify::render_verify_text(&report);
    print!("{text}");
    write_out(&common.out, "verify.txt", &text)?;
    if report.all_passed {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(3))
    }
}

fn dump_rows(
    out: &PathBuf,
    model: &hetnet::simkit::Model,
    conn: hetnet::simkit::Conn,
    opts: &McOptions,
    n: usize,
) -> anyhow::Result<()> {
    let eps = opts.eps_grid.first().copied().unwrap_or(1e-2);
    let rows = hetnet::simkit::sample_rows(model, conn, eps, n, opts.seed, &opts.caps);
    let mut csv = String::from("eps,x,y,outcome,steps,exit_reason\n");
    for r in rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.eps,
            r.x,
            r.y,
            r.outcome,
            r.loops,
            r.exit_reason.replace(',', ";")
        ));
    }
    write_out(out, "samples.csv", &csv)?;
    Ok(())
}

fn cmd_sweep(common: &CommonArgs) -> anyhow::Result<ExitCode> {
    let cfg = load(common)?;
    let csv = sweep::run_sweep(&cfg)?;
    let path = write_out(&common.out, "sweep.csv", &csv)?;
    println!(
        "wrote {} ({} rows)",
        path.display(),
        csv.lines().count().saturating_sub(1)
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_witness(common: &CommonArgs, max_draws: Option<usize>) -> anyhow::Result<ExitCode> {
    let cfg = load(common)?;
    if cfg.network != "B3B3" {
        anyhow::bail!("the witness search applies to the four-node network only");
    }
    let bx = cfg.witness_box.clone().unwrap_or_else(ParamBox::default);
    let draws = max_draws.unwrap_or(cfg.options.max_draws);
    let spec = b3b3::find_nonpas_witness(&bx, cfg.options.seed, draws)?;
    let v = b3b3::validate(
        &spec,
        hetnet::network::Assumptions::A1_A2,
        cfg.options.nu_convention,
    )?;
    let report = analyze_b3(&v, cfg.options.n_cap)?;
    let payload = serde_json::json!({
        "witness_spec": spec,
        "report": report,
    });
    write_out(
        &common.out,
        "witness.json",
        &serde_json::to_string_pretty(&payload)?,
    )?;
    print!("{}", render_text(&report));
    println!(
        "witness found: xi3-cycle predominantly stable, network index along xi4->xi1 negative"
    );
    Ok(ExitCode::SUCCESS)
}
