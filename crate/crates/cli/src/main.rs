// Copyright 2026 The cacc-reach Authors
// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cacc_reach::discretize::zoh_discretize;
use cacc_reach::exec::Execution;
use cacc_reach::platoon::{
    build_continuous, stability_spectrum, AttackSet, ClosedLoopModel, ControllerTag,
};
use cacc_reach::reach::ReachSolution;
use cacc_reach::report::{emit_reports, read_summary};
use cacc_reach::sim::{
    containment_campaign, random_signal, simulate, validate_containment, CampaignOptions, Channel,
    DiscreteSystem, SignalSpec,
};
use cacc_reach::study::{self, run_points, PointSpec, StudyConfig, StudyKind, SweepRecord};
use cacc_reach::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::{DVector, Dim, Matrix, RawStorage};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "cacc-reach",
    version,
    about = "Reachable-set security analysis of CACC controllers"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Study configuration (JSON). Defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config's output_dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for random signals (overrides the config's seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 1 runs sequentially.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Also write SVG figures.
    #[arg(long, global = true)]
    svg: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Tag {
    C1,
    C2,
}

impl From<Tag> for ControllerTag {
    fn from(t: Tag) -> Self {
        match t {
            Tag::C1 => ControllerTag::C1,
            Tag::C2 => ControllerTag::C2,
        }
    }
}

#[derive(Args)]
struct Target {
    #[arg(long, value_enum, default_value = "c1")]
    controller: Tag,
    /// Attacked sensors, e.g. `1,3`, `full` or `none`.
    #[arg(long, default_value = "full", value_parser = parse_attack_set)]
    attack_set: AttackSet,
    /// Headway override.
    #[arg(long)]
    h: Option<f64>,
    /// Sampling-time override.
    #[arg(long)]
    ts: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the continuous and discrete closed-loop matrices.
    Model(Target),
    /// Solve one minimum-volume problem.
    Reach(Target),
    /// Sensor study over the configured attack sets.
    SweepSensors,
    /// Headway sweep.
    SweepH,
    /// Sampling-time sweep.
    SweepTs,
    /// Simulate one trajectory and check it against the reach ellipsoid.
    Simulate {
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value_t = 500)]
        steps: usize,
        /// JSON map from channel (`1`..`6`, `v`) to signal spec; random
        /// admissible signals when omitted.
        #[arg(long)]
        signals: Option<PathBuf>,
    },
    /// Monte-Carlo containment campaign.
    Validate {
        /// Attack sets to check; defaults to none, {3} and full.
        #[arg(long, value_parser = parse_attack_set)]
        attack_set: Vec<AttackSet>,
        #[arg(long, default_value_t = 1000)]
        trajectories: usize,
        #[arg(long, default_value_t = 500)]
        steps: usize,
    },
    /// Re-emit reports from a saved summary.json.
    Report {
        #[arg(long)]
        from: PathBuf,
    },
}

fn parse_attack_set(s: &str) -> Result<AttackSet, String> {
    match s.trim() {
        "full" => Ok(AttackSet::full()),
        "none" | "empty" | "" => Ok(AttackSet::empty()),
        list => {
            let js = list
                .trim_matches(|c| c == '{' || c == '}')
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<u8>()
                        .map_err(|e| format!("bad sensor `{t}`: {e}"))
                })
                .collect::<Result<Vec<_>, _>>()?;
            AttackSet::new(js).map_err(|e| e.to_string())
        }
    }
}

enum Failure {
    Core(Error),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Core(Error::Io(e))
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_)
        | Error::Schema { .. }
        | Error::InvalidParams(_)
        | Error::MissingBound(_)
        | Error::InadmissibleSignal { .. }
        | Error::MissingSignal(_) => 2,
        Error::AllInfeasible => 3,
        Error::Io(_) => 4,
        _ => 1,
    }
}

struct Ctx {
    cfg: StudyConfig,
    out: PathBuf,
    exec: Execution,
    svg: bool,
    out_given: bool,
}

fn load(common: &Common) -> Result<Ctx, Failure> {
    let mut cfg = match &common.config {
        Some(p) => study::load_config(p).map_err(|e| match e {
            Error::Io(io) => Error::Parse(format!("{}: {io}", p.display())),
            other => other,
        })?,
        None => StudyConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    let out = common.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    cfg.output_dir = out.clone();
    let exec = match common.jobs {
        Some(0) => return Err(Error::Parse("--jobs must be at least 1".into()).into()),
        Some(1) => Execution::Sequential,
        Some(n) => {
            if let Err(e) = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
            {
                log::warn!("thread pool already configured: {e}");
            }
            Execution::Parallel
        }
        None => Execution::Parallel,
    };
    Ok(Ctx {
        cfg,
        out,
        exec,
        svg: common.svg,
        out_given: common.out.is_some(),
    })
}

fn target_params(ctx: &Ctx, t: &Target) -> Result<cacc_reach::platoon::PlatoonParams, Failure> {
    let mut p = ctx.cfg.params;
    if let Some(h) = t.h {
        p.h = h;
    }
    if let Some(ts) = t.ts {
        p.ts = ts;
    }
    p.validate()?;
    Ok(p)
}

fn discrete_model(ctx: &Ctx, t: &Target) -> Result<ClosedLoopModel, Failure> {
    let p = target_params(ctx, t)?;
    Ok(zoh_discretize(&build_continuous(
        &p,
        t.controller.into(),
        &t.attack_set,
    )?)?)
}

fn print_json(v: &serde_json::Value) {
    use std::io::Write;
    // A closed pipe (e.g. `| head`) is not an error worth reporting.
    let _ = writeln!(
        std::io::stdout(),
        "{}",
        serde_json::to_string_pretty(v).expect("json value")
    );
}

fn matrix_rows<R: Dim, C: Dim, S: RawStorage<f64, R, C>>(
    m: &Matrix<f64, R, C, S>,
) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn model_json(m: &ClosedLoopModel) -> serde_json::Value {
    let a = matrix_rows(&m.a_mat);
    let gammas: BTreeMap<String, Vec<f64>> = m
        .gamma_cols
        .iter()
        .map(|(j, c)| (j.to_string(), c.iter().copied().collect()))
        .collect();
    json!({
        "time_domain": m.time_domain,
        "a": a,
        "b_v": m.bv_col.iter().copied().collect::<Vec<_>>(),
        "gamma": gammas,
    })
}

fn cmd_model(ctx: &Ctx, t: &Target) -> Result<(), Failure> {
    let p = target_params(ctx, t)?;
    let cont = build_continuous(&p, t.controller.into(), &t.attack_set)?;
    let disc = zoh_discretize(&cont)?;
    let eig: Vec<[f64; 2]> = stability_spectrum(&cont)?
        .iter()
        .map(|l| [l.re, l.im])
        .collect();
    print_json(&json!({
        "controller": cont.tag.to_string(),
        "attack_set": t.attack_set.to_string(),
        "params": p,
        "continuous": model_json(&cont),
        "discrete": model_json(&disc),
        "continuous_eigenvalues": eig,
    }));
    Ok(())
}

fn solution_json(sol: &ReachSolution) -> serde_json::Value {
    json!({
        "a_star": sol.a,
        "alpha_inf": sol.alpha_inf,
        "n_dist": sol.n_dist,
        "volume_4d": sol.volume_4d,
        "volume_vz": sol.volume_vz,
        "a_splits": sol.a_splits,
        "p": matrix_rows(&sol.p_mat),
        "p_vz": matrix_rows(&sol.vz_p_mat),
        "diagnostics": sol.diagnostics,
    })
}

fn cmd_reach(ctx: &Ctx, t: &Target) -> Result<(), Failure> {
    let p = target_params(ctx, t)?;
    let point = PointSpec {
        study: StudyKind::Single,
        controller: t.controller.into(),
        attack_set: t.attack_set.clone(),
        params: p,
    };
    let sol = study::solve_point(&ctx.cfg, point.controller, &point.attack_set, &p)?;
    print_json(&solution_json(&sol));
    if ctx.svg || ctx.out_given {
        let recs = run_points(&ctx.cfg, &[point], Execution::Sequential);
        emit_reports(&recs, &ctx.cfg, &ctx.out, ctx.svg)?;
    }
    Ok(())
}

fn finish_sweep(ctx: &Ctx, records: Vec<SweepRecord>) -> Result<(), Failure> {
    let paths = emit_reports(&records, &ctx.cfg, &ctx.out, ctx.svg)?;
    let feasible = records.iter().filter(|r| r.feasible).count();
    eprintln!(
        "{} records ({} feasible) written to {}",
        records.len(),
        feasible,
        paths.volumes.display()
    );
    if feasible == 0 {
        return Err(Error::AllInfeasible.into());
    }
    Ok(())
}

fn cmd_simulate(
    ctx: &Ctx,
    t: &Target,
    steps: usize,
    signals: Option<&Path>,
) -> Result<(), Failure> {
    let model = discrete_model(ctx, t)?;
    let bounds = &ctx.cfg.bounds;
    let system = DiscreteSystem::from_model(&model, bounds)?;
    let signals: BTreeMap<Channel, SignalSpec> = match signals {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            serde_json::from_str(&text)
                .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.cfg.seed);
            system
                .channels
                .iter()
                .zip(&system.bounds)
                .map(|(c, b)| (*c, random_signal(&mut rng, *b)))
                .collect()
        }
    };
    let traj = simulate(&model, bounds, &signals, &DVector::zeros(4), steps)?;
    let sol = cacc_reach::reach::min_volume(&model, bounds, &ctx.cfg.a_search)?;
    let check = validate_containment(&traj, &sol);
    fs::create_dir_all(&ctx.out)?;
    let path = ctx.out.join("trajectory.csv");
    traj.write_csv(std::io::BufWriter::new(fs::File::create(&path)?))?;
    print_json(&json!({
        "trajectory": path,
        "steps": steps,
        "signals": signals,
        "violations": check.violations,
        "max_ratio": check.max_ratio,
        "replays_exactly": traj.replays_exactly(&system),
    }));
    if check.violations > 0 {
        return Err(Failure::Check(format!(
            "{} containment violations",
            check.violations
        )));
    }
    Ok(())
}

fn cmd_validate(
    ctx: &Ctx,
    sets: &[AttackSet],
    trajectories: usize,
    steps: usize,
) -> Result<(), Failure> {
    let sets = if sets.is_empty() {
        vec![
            AttackSet::empty(),
            AttackSet::singleton(3)?,
            AttackSet::full(),
        ]
    } else {
        sets.to_vec()
    };
    let opts = CampaignOptions {
        trajectories,
        steps,
        seed: ctx.cfg.seed,
        execution: ctx.exec,
    };
    let mut rows = Vec::new();
    let mut total = 0usize;
    for &tag in &ctx.cfg.controllers {
        for l in &sets {
            let model = zoh_discretize(&build_continuous(&ctx.cfg.params, tag, l)?)?;
            let sol = cacc_reach::reach::min_volume(&model, &ctx.cfg.bounds, &ctx.cfg.a_search)?;
            let system = DiscreteSystem::from_model(&model, &ctx.cfg.bounds)?;
            let rep = containment_campaign(&system, &sol.p_mat, sol.alpha_inf, &opts)?;
            total += rep.violations;
            rows.push(json!({
                "controller": tag.to_string(),
                "attack_set": l.to_string(),
                "report": rep,
            }));
        }
    }
    let out = json!({ "seed": ctx.cfg.seed, "campaigns": rows, "violations": total });
    fs::create_dir_all(&ctx.out)?;
    fs::write(
        ctx.out.join("validation.json"),
        serde_json::to_string_pretty(&out).expect("json") + "\n",
    )?;
    print_json(&out);
    if total > 0 {
        return Err(Failure::Check(format!("{total} containment violations")));
    }
    Ok(())
}

fn cmd_report(ctx: &Ctx, from: &Path) -> Result<(), Failure> {
    let summary = read_summary(from)?;
    let mut cfg = summary.config;
    cfg.output_dir = ctx.out.clone();
    let ctx = Ctx {
        cfg,
        out: ctx.out.clone(),
        exec: ctx.exec,
        svg: ctx.svg,
        out_given: true,
    };
    finish_sweep(&ctx, summary.records)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let ctx = load(&cli.common)?;
    match &cli.command {
        Command::Model(t) => cmd_model(&ctx, t),
        Command::Reach(t) => cmd_reach(&ctx, t),
        Command::SweepSensors => finish_sweep(&ctx, study::run_sensor_study(&ctx.cfg, ctx.exec)?),
        Command::SweepH => finish_sweep(&ctx, study::run_h_sweep(&ctx.cfg, ctx.exec)?),
        Command::SweepTs => finish_sweep(&ctx, study::run_ts_sweep(&ctx.cfg, ctx.exec)?),
        Command::Simulate {
            target,
            steps,
            signals,
        } => cmd_simulate(&ctx, target, *steps, signals.as_deref()),
        Command::Validate {
            attack_set,
            trajectories,
            steps,
        } => cmd_validate(&ctx, attack_set, *trajectories, *steps),
        Command::Report { from } => cmd_report(&ctx, from),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
    }
}
