use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use germlab::directions::{directional_report, directions_for, estimate_dimension, DirectionalParams};
use germlab::germs::io::germ_from_json;
use germlab::seatangle::{check_containment, mc_volume, STParams};
use germlab::{ScaleSchedule, SetGerm};
use lab::{run_experiment, ExperimentConfig, EXPERIMENTS};

#[derive(Parser)]
#[command(name = "lab", version, about = "Direction sets and sea-tangle neighbourhoods of set-germs")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named experiment and write its report, tables and plots.
    Run {
        name: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, env = "LAB_OUT_DIR")]
        out: Option<PathBuf>,
    },
    /// List experiments.
    List,
    /// Estimate the direction set of a germ and its dimension.
    Directions {
        #[command(flatten)]
        germ: GermArg,
        #[command(flatten)]
        sched: ScheduleArgs,
        /// Write the stable direction cloud to this CSV file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// dim(D(A) ∩ D(B)).
    Dimension {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[command(flatten)]
        sched: ScheduleArgs,
        #[arg(long, default_value_t = 0.05)]
        angular_tol: f64,
    },
    /// Monte Carlo volume of ST_d(A;C) ∩ B_eps.
    StVolume {
        #[command(flatten)]
        germ: GermArg,
        #[arg(long)]
        d: f64,
        #[arg(long = "C")]
        c: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Check A ⊂ ST_d(B;C) on sampled points of A.
    Containment {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        d: f64,
        #[arg(long = "C")]
        c: f64,
        #[command(flatten)]
        sched: ScheduleArgs,
    },
}

#[derive(Args)]
struct GermArg {
    /// Germ description (JSON).
    #[arg(long)]
    germ: PathBuf,
}

#[derive(Args)]
struct ScheduleArgs {
    #[arg(long, default_value_t = 0.1)]
    eps0: f64,
    #[arg(long, default_value_t = 0.5)]
    ratio: f64,
    #[arg(long, default_value_t = 12)]
    count: usize,
    #[arg(long, default_value_t = 2000)]
    per_scale: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

impl ScheduleArgs {
    fn params(&self) -> anyhow::Result<DirectionalParams> {
        Ok(DirectionalParams { schedule: ScaleSchedule::new(self.eps0, self.ratio, self.count)?, per_scale: self.per_scale, seed: self.seed, ..Default::default() })
    }
}

fn load_germ(path: &PathBuf) -> anyhow::Result<SetGerm> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(germ_from_json(&text)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn execute(command: Command) -> anyhow::Result<bool> {
    match command {
        Command::List => {
            for (name, about) in EXPERIMENTS {
                println!("{name:<20} {about}");
            }
            Ok(true)
        }
        Command::Run { name, config, seed, out } => {
            let mut cfg = match &config {
                Some(p) => ExperimentConfig::from_json(&std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)?,
                None => ExperimentConfig::named(&name),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(o) = out {
                cfg.out_dir = Some(o);
            }
            if cfg.out_dir.is_none() {
                cfg.out_dir = Some(PathBuf::from("lab-out"));
            }
            let report = run_experiment(&name, &cfg)?;
            for a in &report.assertions {
                println!("{} {:<60} measured {} expected {}", if a.pass { "PASS" } else { "FAIL" }, a.id, a.measured, a.expected);
            }
            if let Some(e) = &report.error {
                println!("ERROR {e}");
            }
            let dir = lab::experiment_dir(&report.config, &name).unwrap_or_default();
            println!("{}: {} in {:.1} s, report {}", name, if report.pass { "pass" } else { "FAIL" }, report.runtime_seconds, dir.join("report.json").display());
            Ok(report.pass)
        }
        Command::Directions { germ, sched, out } => {
            let g = load_germ(&germ.germ)?;
            let dp = sched.params()?;
            let est = directions_for(&g, &dp, dp.seed)?;
            let dim = estimate_dimension(&est.stable, &dp.caps)?;
            println!("{}: {} stable directions, dim {} (slope {:.3})", g.label(), est.stable.len(), dim.dim, dim.slope);
            if let Some(p) = out {
                est.stable.write_csv(std::fs::File::create(&p)?)?;
            }
            Ok(true)
        }
        Command::Dimension { a, b, sched, angular_tol } => {
            let dp = DirectionalParams { angular_tol, ..sched.params()? };
            let rep = directional_report(&load_germ(&a)?, &load_germ(&b)?, &dp)?;
            println!("dim(D(A) ∩ D(B)) = {} (slope {:.3}, {} directions)", rep.dim(), rep.dimension.slope, rep.intersection.len());
            Ok(true)
        }
        Command::StVolume { germ, d, c, eps, n, seed } => {
            let g = load_germ(&germ.germ)?;
            let v = mc_volume(&g, &STParams::new(d, c)?, eps, n, seed)?;
            println!("volume {} ± {} ({} of {} samples)", v.volume, v.half_width_ci, v.hits, v.samples);
            Ok(true)
        }
        Command::Containment { a, b, d, c, sched } => {
            let dp = sched.params()?;
            let rep = check_containment(&load_germ(&a)?, &load_germ(&b)?, &STParams::new(d, c)?, &dp.schedule, dp.per_scale, dp.seed)?;
            for s in &rep.per_scale_fraction {
                println!("scale {:>3} r {:<12.4e} fraction {:.4}", s.scale_index, s.scale, s.fraction);
            }
            println!("verdict {}", rep.verdict);
            if !rep.verdict && rep.per_scale_fraction.is_empty() {
                bail!("no samples");
            }
            Ok(rep.verdict)
        }
    }
}
