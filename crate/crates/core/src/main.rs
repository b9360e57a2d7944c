use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use systolic_core::averaging::{average_check, AverageCheckReport, DiskField, NamedDiskField};
use systolic_core::config::MetricConfig;
use systolic_core::defect::{
    build_report, corpus_csv_row, corpus_reports, equality_case, random_corpus, CORPUS_CSV_HEADER,
    CORPUS_GRID,
};
use systolic_core::field::grid_file;
use systolic_core::liouville::{sweep_csv, variance_sweep_experiment};
use systolic_core::systole::systole;
use systolic_core::Vec2;

#[derive(Parser)]
#[command(name = "systolic", version, about = "Curvature, systoles and the isosystolic defect of conformal tori")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full inequality report for one metric.
    Verify {
        #[arg(long)]
        config: PathBuf,
    },
    /// Reports for a seeded random corpus, written as CSV.
    Corpus {
        #[arg(long)]
        count: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Grid size per side.
        #[arg(long, default_value_t = CORPUS_GRID)]
        grid: usize,
    },
    /// Gaussian curvature of a metric, written as a grid file.
    Curvature {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Systole and a shortest loop.
    Systole {
        #[arg(long)]
        config: PathBuf,
        /// Write the shortest loop as `x,y` CSV.
        #[arg(long)]
        emit_path: Option<PathBuf>,
    },
    /// Disk variance of random holomorphic solutions against Riemann's.
    Sweep {
        #[arg(long, default_value_t = 4.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0.5)]
        rho: f64,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rotational-averaging checks on a disk.
    AverageCheck(AverageArgs),
}

#[derive(Args)]
struct AverageArgs {
    /// Built-in field: riemann, riemann-perturbed, jensen-cos or constant.
    #[arg(long, conflicts_with = "grid_file", required_unless_present = "grid_file")]
    field: Option<String>,
    /// Positive factor read from a grid file.
    #[arg(long)]
    grid_file: Option<PathBuf>,
    /// Disk centre for grid files.
    #[arg(long, num_args = 2, value_names = ["X", "Y"], default_values_t = [0.0, 0.0])]
    center: Vec<f64>,
    /// Disk radius for grid files.
    #[arg(long, default_value_t = 0.25)]
    radius: f64,
    /// Curvature lower bound; defaults to the measured minimum.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 200)]
    nr: usize,
    #[arg(long, default_value_t = 64)]
    ntheta: usize,
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load(path: &Path) -> anyhow::Result<MetricConfig> {
    MetricConfig::load(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Returns whether every checked inequality passed.
fn run(command: Command) -> anyhow::Result<bool> {
    match command {
        Command::Verify { config } => {
            let metric = load(&config)?.metric()?;
            let report = build_report(&metric)?;
            print!("{}", report.summary());
            println!("chain gap      {:.3e}", report.chain_gap());
            println!("equality case  {}", equality_case(&report));
            Ok(report.all_pass())
        }
        Command::Corpus {
            count,
            seed,
            out,
            grid,
        } => {
            let corpus = random_corpus(count, seed, grid)?;
            let mut csv = format!("{CORPUS_CSV_HEADER}\n");
            let mut failures = 0;
            for (entry, report) in corpus.iter().zip(corpus_reports(&corpus)) {
                let report = report.with_context(|| format!("corpus metric {}", entry.index))?;
                if !report.all_pass() {
                    failures += 1;
                }
                csv.push_str(&corpus_csv_row(entry.index, &report));
                csv.push('\n');
            }
            write(&out, &csv)?;
            println!("{count} metrics, {failures} failing, written to {}", out.display());
            Ok(failures == 0)
        }
        Command::Curvature { config, out } => {
            let metric = load(&config)?.metric()?;
            let k = metric.gaussian_curvature();
            grid_file::write(&k, &out)?;
            println!(
                "curvature in [{:.6}, {:.6}], written to {}",
                k.min(),
                k.max(),
                out.display()
            );
            Ok(true)
        }
        Command::Systole { config, emit_path } => {
            let metric = load(&config)?.metric()?;
            let res = systole(&metric)?;
            println!("sys              {:.10}", res.sys);
            println!(
                "class            ({}, {})",
                res.witness_class.m, res.witness_class.n
            );
            println!("classes examined {}", res.classes_examined);
            println!("straight bound   {:.10}", res.straight_bound);
            if let Some(path) = emit_path {
                let mut csv = String::from("x,y\n");
                for p in &res.witness_path {
                    let _ = writeln!(csv, "{:.16e},{:.16e}", p.x, p.y);
                }
                write(&path, &csv)?;
            }
            Ok(true)
        }
        Command::Sweep {
            alpha,
            rho,
            samples,
            seed,
            out,
        } => {
            let rows = variance_sweep_experiment(alpha, rho, samples, seed)?;
            write(&out, &sweep_csv(&rows))?;
            println!("{} rows written to {}", rows.len(), out.display());
            Ok(true)
        }
        Command::AverageCheck(args) => {
            let f = match (&args.field, &args.grid_file) {
                (Some(name), None) => NamedDiskField::parse(name)?.sample(args.nr, args.ntheta)?,
                (None, Some(path)) => {
                    let field = grid_file::read(path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    let center = Vec2::new(args.center[0], args.center[1]);
                    DiskField::resample(&field, center, args.radius, args.nr, args.ntheta)?
                }
                _ => bail!("give exactly one of --field or --grid-file"),
            };
            let report = average_check(&f, args.alpha)?;
            print_average_report(&report);
            Ok(report.all_pass())
        }
    }
}

fn print_average_report(r: &AverageCheckReport) {
    let flag = |ok: bool| if ok { "pass" } else { "FAIL" };
    let a = &r.averaged;
    println!("jensen min slack        {:.3e}  {}", r.jensen.min_slack, flag(r.jensen.ok));
    println!(
        "mean(h), mean(h_av)     {:.12} {:.12}",
        r.variance.mean_h, r.variance.mean_hav
    );
    println!(
        "var(h) >= var(h_av)     {:.12} {:.12}  {}",
        r.variance.var_h,
        r.variance.var_hav,
        flag(r.variance.ok)
    );
    println!(
        "am-gm min slack         {:.3e}  {}",
        r.am_gm_slack,
        flag(r.am_gm_slack >= -systolic_core::averaging::IDENTITY_TOL)
    );
    println!(
        "curvature >= alpha      {:.6} >= {:.6}  {}",
        a.min_curvature,
        a.alpha,
        if a.hypothesis_ok { "holds" } else { "violated" }
    );
    println!(
        "margin vs a e^(2h_av)   {:.3e}  {}",
        a.margin_squared,
        flag(a.squared_ok)
    );
    println!(
        "margin vs a e^(h_av)    {:.3e}  {}",
        a.margin_plain,
        if a.plain_ok { "pass" } else { "fail (not gated)" }
    );
}
