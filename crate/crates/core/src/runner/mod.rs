//! Command-line driver: loads an [`ExperimentConfig`], runs one subcommand
//! and writes `<out>/<subcommand>.csv` plus a JSON sidecar.
//!
//! Exit status is 0 on success, 1 on a runtime failure or a failed
//! `verify`, 2 on a usage error (in which case nothing is written).

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

pub use config::*;
pub use output::*;

use crate::acceptance::{self, Context, Scale};
use crate::diagrams::{self, test_functions as tf, OffpointSettings, BRUTE_BUDGET};
use crate::invasion::{critical_curve, invade, run_seed, symmetric_rho_grid, CurvePoint, InvasionParams};
use crate::percolation::{
    class_census, connection_prob_class, estimate_g, extrinsic_ballisticity, median_ratio, moment_tail_check, subcritical_stability,
    Caps, Model, Sampling,
};
use crate::schramm::{connection_vs_2_over_m, invariance_test, mean_root_degree, return_probability, transience_threshold, SchrammParams};
use crate::seed::stream_seed;
use crate::tree::{GraphKind, LevelSpec};

#[derive(Debug, Parser)]
#[command(name = "treeperc", version, about = "Bond percolation on products of regular trees")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML experiment file; defaults apply to anything it leaves out.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Override any config field, e.g. `--set gball.trials=500`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Expected chemical-ball sizes, with optional moments, ballisticity and subcritical checks.
    Gball,
    /// Two-point function by level class.
    Connprob,
    /// Closed and open triangle sums, reduced and brute force.
    Triangle,
    /// Both sides of the open-triangle inequality.
    Offpointa,
    /// Schramm branching-process experiments.
    Schramm,
    /// Invasion percolation runs.
    Invade,
    /// Critical curve over a symmetric rho grid.
    Curve,
    /// The acceptance suite.
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Gball => "gball",
            Command::Connprob => "connprob",
            Command::Triangle => "triangle",
            Command::Offpointa => "offpointa",
            Command::Schramm => "schramm",
            Command::Invade => "invade",
            Command::Curve => "curve",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Usage(#[from] ConfigError),
    #[error("{0}")]
    Failed(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

fn failed<E: std::fmt::Display>(e: E) -> RunError {
    RunError::Failed(e.to_string())
}

/// What a subcommand produced.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub records: Vec<Record>,
    pub reports: Vec<Value>,
    pub curve: Vec<CurveRow>,
    pub extra_json: Vec<(&'static str, Value)>,
    /// Set when the run completed but a check inside it failed.
    pub failure: Option<String>,
}

/// Parses arguments and runs. Used by the `treeperc` binary.
pub fn main_from_args() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(dir) => {
            eprintln!("wrote {}", dir.display());
            ExitCode::SUCCESS
        }
        Err(RunError::Usage(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

pub fn resolve_config(cli: &Cli) -> Result<ExperimentConfig, ConfigError> {
    let mut overrides = cli.overrides.clone();
    if let Some(s) = cli.seed {
        overrides.push(format!("seed={s}"));
    }
    if let Some(w) = cli.workers {
        overrides.push(format!("workers={w}"));
    }
    if let Some(o) = &cli.out {
        overrides.push(format!("out={}", toml::Value::String(o.display().to_string())));
    }
    ExperimentConfig::load(cli.config.as_deref(), &overrides)
}

/// Runs the subcommand and writes its outputs; returns the output directory.
pub fn execute(cli: &Cli) -> Result<PathBuf, RunError> {
    let cfg = resolve_config(cli)?;
    if cfg.workers > 0 {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build_global();
    }
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let clock = Instant::now();
    let name = cli.command.name();
    let out = cfg.out.clone();
    let marker = out.join(format!("{name}.FAILED"));
    let result = run(cli.command, &cfg);
    let mut art = match result {
        Ok(a) => a,
        Err(RunError::Failed(msg)) => {
            write_atomic(&marker, format!("{msg}\n").as_bytes())?;
            return Err(RunError::Failed(msg));
        }
        Err(e) => return Err(e),
    };
    let hash = cfg.hash();
    for r in &mut art.records {
        r.config_hash = hash.clone();
    }
    write_csv(&out.join(format!("{name}.csv")), &art.records)?;
    if !art.curve.is_empty() {
        write_curve_csv(&out.join("curve_points.csv"), &art.curve)?;
    }
    for (file, value) in &art.extra_json {
        write_json(&out.join(file), value)?;
    }
    let sidecar = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "config_hash": hash,
        "started": started,
        "elapsed_s": clock.elapsed().as_secs_f64(),
        "subcommand": name,
        "config": cfg,
        "reports": art.reports,
    });
    write_json(&out.join(format!("{name}.json")), &sidecar)?;
    match art.failure {
        Some(msg) => {
            write_atomic(&marker, format!("{msg}\n").as_bytes())?;
            Err(RunError::Failed(msg))
        }
        None => {
            if marker.exists() {
                std::fs::remove_file(&marker)?;
            }
            Ok(out)
        }
    }
}

/// Runs a subcommand without touching the filesystem.
pub fn run(command: Command, cfg: &ExperimentConfig) -> Result<Artifacts, RunError> {
    match command {
        Command::Gball => gball(cfg),
        Command::Connprob => connprob(cfg),
        Command::Triangle => triangle(cfg),
        Command::Offpointa => offpointa(cfg),
        Command::Schramm => schramm(cfg),
        Command::Invade => invade_runs(cfg),
        Command::Curve => curve(cfg),
        Command::Verify => verify(cfg),
    }
}

/// The models of the `p` grid, plus the `p̂_c` estimate they were scaled
/// from (if any).
pub fn models(cfg: &ExperimentConfig) -> Result<(Vec<Model>, Option<CurvePoint>), RunError> {
    let graph = cfg.graph();
    let make = |p: f64| Model::new(graph, p, (cfg.rho * p).min(1.0)).map_err(|e| RunError::Usage(ConfigError::Parse(e.to_string())));
    if !cfg.p.is_empty() {
        return Ok((cfg.p.iter().map(|&p| make(p)).collect::<Result<_, _>>()?, None));
    }
    let pc = crate::invasion::estimate_critical_point(graph, cfg.rho, cfg.pc.target, cfg.pc.seeds, cfg.seed).map_err(failed)?;
    let ms = cfg.p_factor.iter().map(|f| make((f * pc.p1_hat).min(1.0))).collect::<Result<_, _>>()?;
    Ok((ms, Some(pc)))
}

fn pc_records(cfg: &ExperimentConfig, pc: &Option<CurvePoint>, art: &mut Artifacts) {
    if let Some(pc) = pc {
        let se = pc.uncertainty / (pc.runs.len().max(1) as f64).sqrt();
        art.records.push(
            Record::unparametrized(&cfg.graph(), "p1_hat", pc.p1_hat, cfg.seed)
                .rho(pc.rho)
                .stderr(se)
                .counts(pc.runs.len() as u64, pc.failures as u64),
        );
    }
}

fn sampling(cfg: &ExperimentConfig, trials: usize, index: u64, stream: u64) -> Sampling {
    Sampling::new(trials, Caps::cluster(cfg.n_cap), stream_seed(cfg.seed, index, stream))
}

fn gball(cfg: &ExperimentConfig) -> Result<Artifacts, RunError> {
    let (models, pc) = models(cfg)?;
    let mut art = Artifacts::default();
    pc_records(cfg, &pc, &mut art);
    let g = &cfg.gball;
    let r_max = *g.radii.iter().max().expect("validated nonempty");
    for (i, model) in models.iter().enumerate() {
        let i = i as u64;
        let s = sampling(cfg, g.trials, i, 0x100);
        let est = estimate_g(model, r_max, &s).map_err(failed)?;
        for &r in &g.radii {
            art.records.push(
                Record::new(model, "G", est.mean[r as usize], s.seed)
                    .radius(r)
                    .stderr(est.stderr[r as usize])
                    .counts(est.trials as u64, est.truncated_trials as u64),
            );
        }
        if g.moment_radius > 0 {
            let s = sampling(cfg, g.trials, i, 0x101);
            let rep = moment_tail_check(model, g.moment_radius, &s).map_err(failed)?;
            let censored = (rep.truncated_fraction * rep.trials as f64).round() as u64;
            for n in 0..3 {
                art.records.push(
                    Record::new(model, &format!("moment_{}", n + 1), rep.moments[n], s.seed)
                        .radius(g.moment_radius)
                        .stderr(rep.moment_stderr[n])
                        .counts(rep.trials as u64, censored),
                );
                art.records.push(
                    Record::new(model, &format!("moment_bound_{}", n + 1), rep.bounds[n], s.seed)
                        .radius(g.moment_radius)
                        .counts(rep.trials as u64, censored),
                );
            }
            art.reports.push(json!({ "p1": model.p1, "moments": rep }));
        }
        if !g.ballistic_radii.is_empty() {
            let s = sampling(cfg, g.trials, i, 0x102);
            let sums = extrinsic_ballisticity(model, &g.ballistic_radii, &s).map_err(failed)?;
            for b in &sums {
                let median = b.median().map_or(f64::NAN, f64::from);
                art.records.push(
                    Record::new(model, "shell_median_norm", median, s.seed)
                        .radius(b.r)
                        .counts(b.trials as u64, b.empty_trials as u64),
                );
            }
            let (lo, hi) = (&sums[0], &sums[sums.len() - 1]);
            if let Some(mr) = median_ratio(lo, hi, g.bootstrap, stream_seed(s.seed, 0, 0x103)) {
                art.records.push(
                    Record::new(model, "shell_median_ratio", mr.ratio, s.seed)
                        .bracket(mr.lower, mr.upper)
                        .radius(hi.r)
                        .counts(hi.trials as u64, hi.empty_trials as u64),
                );
            }
            art.reports.push(json!({ "p1": model.p1, "ballistic": sums, }));
        }
        if !g.stability_caps.is_empty() {
            let seed = stream_seed(cfg.seed, i, 0x104);
            let rep = subcritical_stability(model, &g.stability_caps, g.trials, seed).map_err(failed)?;
            for (k, cap) in rep.caps.iter().enumerate() {
                art.records.push(
                    Record::new(model, &format!("capped_mean_cluster@{cap}"), rep.estimates[k], seed)
                        .stderr(rep.stderr[k])
                        .counts(rep.trials as u64, 0),
                );
            }
            art.reports.push(json!({ "p1": model.p1, "stability": rep }));
        }
    }
    Ok(art)
}

fn connprob(cfg: &ExperimentConfig) -> Result<Artifacts, RunError> {
    let (models, pc) = models(cfg)?;
    let mut art = Artifacts::default();
    pc_records(cfg, &pc, &mut art);
    let c = &cfg.connprob;
    let restrict = (c.restrict > 0).then_some(c.restrict);
    for (i, model) in models.iter().enumerate() {
        let s = sampling(cfg, c.trials, i as u64, 0x200);
        let table = class_census(model, c.max_norm, restrict, &s).map_err(failed)?;
        for (spec, e) in &table.table {
            let mut rec = Record::new(model, "connection", e.lower, s.seed)
                .bracket(e.lower, e.upper)
                .class(spec.k1, spec.k2)
                .stderr(e.stderr)
                .counts(e.trials, e.censored);
            rec.r = restrict;
            art.records.push(rec);
        }
        for (j, spec) in ExperimentConfig::level_specs(&c.specs).into_iter().enumerate() {
            let s = sampling(cfg, c.trials, ((i as u64) << 16) | j as u64, 0x201);
            let e = connection_prob_class(model, spec, &s).map_err(failed)?;
            art.records.push(
                Record::new(model, "connection_point", e.lower, s.seed)
                    .bracket(e.lower, e.upper)
                    .class(spec.k1, spec.k2)
                    .stderr(e.stderr)
                    .counts(e.trials, e.censored),
            );
        }
    }
    Ok(art)
}

fn triangle(cfg: &ExperimentConfig) -> Result<Artifacts, RunError> {
    let graph = cfg.graph();
    if graph.kind != GraphKind::Txt {
        return Err(ConfigError::Invalid {
            field: "graph",
            reason: "triangle sums are implemented for txt only".into(),
        }
        .into());
    }
    let t = &cfg.triangle;
    let openings = ExperimentConfig::level_specs(&t.openings);
    let mut art = Artifacts::default();
    let d = graph.d;
    let analytic: Option<Box<dyn Fn(u32, u32) -> f64>> = match t.function {
        TriangleFunction::Geometric => Some(Box::new(tf::geometric(d, 1.0))),
        TriangleFunction::Anisotropic => Some(Box::new(tf::anisotropic)),
        TriangleFunction::Oded => Some(Box::new(tf::oded_shaped(d, 1.0))),
        TriangleFunction::Census => None,
    };
    if let Some(g) = analytic {
        let name = format!("{:?}", t.function).to_lowercase();
        let mut worst = 0.0f64;
        for &r in &t.radii {
            for &w in &openings {
                let reduced: f64 = diagrams::open_triangle(&graph, &g, w, r).map_err(failed)?;
                art.records.push(Record::unparametrized(&graph, &format!("triangle_{name}"), reduced, cfg.seed).class(w.k1, w.k2).radius(r));
                if t.brute {
                    match diagrams::brute_open_triangle_with(&graph, r, w, &g, &g, &g, BRUTE_BUDGET) {
                        Ok(brute) => {
                            let brute: f64 = brute;
                            worst = worst.max((brute - reduced).abs() / brute.abs().max(f64::MIN_POSITIVE));
                            art.records.push(
                                Record::unparametrized(&graph, &format!("triangle_{name}_brute"), brute, cfg.seed)
                                    .class(w.k1, w.k2)
                                    .radius(r),
                            );
                        }
                        Err(diagrams::DiagramError::Tree(crate::tree::TreeError::Budget { .. })) => {}
                        Err(e) => return Err(failed(e)),
                    }
                }
            }
        }
        art.reports.push(json!({ "function": name, "max_rel_error": worst }));
        return Ok(art);
    }
    let (models, pc) = models(cfg)?;
    pc_records(cfg, &pc, &mut art);
    for (i, model) in models.iter().enumerate() {
        for &r in &t.radii {
            let max_norm = 2 * r + openings.iter().map(|w| w.norm()).max().unwrap_or(0);
            let idx = ((i as u64) << 16) | r as u64;
            let s = sampling(cfg, t.trials, idx, 0x300);
            let restricted = class_census(model, max_norm, Some(r), &s).map_err(failed)?;
            let s2 = sampling(cfg, t.trials, idx, 0x301);
            let unrestricted = class_census(model, max_norm, None, &s2).map_err(failed)?;
            let censored = unrestricted.table.values().map(|e| e.censored).max().unwrap_or(0);
            for &w in &openings {
                let v = diagrams::estimated_open_triangle(&graph, &restricted, &unrestricted, w, r).map_err(failed)?;
                art.records.push(
                    Record::new(model, "triangle_census", v, s.seed)
                        .class(w.k1, w.k2)
                        .radius(r)
                        .counts(t.trials as u64, censored),
                );
            }
        }
    }
    Ok(art)
}

fn offpointa(cfg: &ExperimentConfig) -> Result<Artifacts, RunError> {
    let (models, pc) = models(cfg)?;
    let mut art = Artifacts::default();
    pc_records(cfg, &pc, &mut art);
    let o = &cfg.offpointa;
    let mut failures = Vec::new();
    for (i, model) in models.iter().enumerate() {
        for (j, &[r, wn]) in o.cases.iter().enumerate() {
            let w = acceptance::balanced_opening(wn);
            let seed = stream_seed(cfg.seed, ((i as u64) << 16) | j as u64, 0x400);
            let settings = OffpointSettings {
                trials: o.trials,
                census_trials: o.census_trials,
                blocks: o.blocks,
                n_cap: o.n_cap,
                seed,
            };
            let rep = diagrams::offpointa_check(model, r, w, &settings).map_err(failed)?;
            let censored = (rep.censored_fraction * rep.trials as f64).round() as u64;
            let row = |q: &str, v: f64| Record::new(model, q, v, seed).class(w.k1, w.k2).radius(r).counts(rep.trials as u64, censored);
            art.records.push(row("offpointa_lhs", rep.lhs_low).bracket(rep.lhs_low, rep.lhs_high).stderr(rep.lhs_stderr));
            art.records.push(row("offpointa_rhs", rep.rhs).stderr(rep.rhs_stderr));
            art.records.push(row("offpointa_triangle", rep.triangle).stderr(rep.triangle_stderr));
            art.records.push(row("offpointa_g", rep.g_hat).stderr(rep.g_stderr));
            if !rep.passed {
                failures.push(format!("p={} r={r} w=({},{})", model.p1, w.k1, w.k2));
            }
            art.reports.push(serde_json::to_value(&rep).expect("serializable"));
        }
    }
    // the inequality is recorded, not enforced; `verify` enforces it
    art.reports.push(json!({ "violations": failures }));
    Ok(art)
}

fn schramm(cfg: &ExperimentConfig) -> Result<Artifacts, RunError> {
    let (models, pc) = models(cfg)?;
    let mut art = Artifacts::default();
    pc_records(cfg, &pc, &mut art);
    let sc = &cfg.schramm;
    let graph = cfg.graph();
    let spec = LevelSpec::new(sc.spec[0], sc.spec[1]);
    let m = if sc.m > 0 { sc.m } else { transience_threshold(spec, graph.d, sc.c).map_err(failed)? };
    let caps = Caps::cluster(cfg.n_cap);
    let mut invariance = Vec::new();
    if sc.experiments.contains(&SchrammExperiment::Returns) {
        for &l in &sc.return_steps {
            let seed = stream_seed(cfg.seed, l as u64, 0x500);
            let rep = return_probability(&graph, spec, l, sc.trials, seed).map_err(failed)?;
            let row = |q: &str, v: f64| Record::unparametrized(&graph, q, v, seed).class(spec.k1, spec.k2).radius(l).counts(rep.trials as u64, 0);
            art.records.push(row("return_probability", rep.joint).bracket(rep.joint, rep.joint_upper).stderr(rep.joint_stderr));
            art.records.push(row("return_probability_exact", rep.exact[2]));
            art.reports.push(serde_json::to_value(&rep).expect("serializable"));
        }
    }
    for (i, model) in models.iter().enumerate() {
        let i = i as u64;
        let params = SchrammParams::new(*model, spec, m, sc.depth);
        for exp in &sc.experiments {
            match exp {
                SchrammExperiment::Degree => {
                    let seed = stream_seed(cfg.seed, i, 0x501);
                    let rep = mean_root_degree(&SchrammParams { depth: 1, ..params }, sc.trials, seed, caps).map_err(failed)?;
                    art.records.push(
                        Record::new(model, "w_root_degree", rep.mean, seed)
                            .bracket(rep.mean, rep.mean_high)
                            .class(spec.k1, spec.k2)
                            .stderr(rep.stderr)
                            .counts(rep.trials as u64, rep.censored),
                    );
                    art.records.push(
                        Record::new(model, "w_root_degree_upper99", rep.upper_99, seed)
                            .class(spec.k1, spec.k2)
                            .counts(rep.trials as u64, rep.censored),
                    );
                    art.reports.push(json!({ "p1": model.p1, "degree": rep }));
                }
                SchrammExperiment::TwoOverM => {
                    let s = sampling(cfg, sc.trials, i, 0x502);
                    let rep = connection_vs_2_over_m(model, spec, m, &s).map_err(failed)?;
                    let e = &rep.entry;
                    art.records.push(
                        Record::new(model, "connection_point", e.lower, s.seed)
                            .bracket(e.lower, e.upper)
                            .class(spec.k1, spec.k2)
                            .stderr(e.stderr)
                            .counts(e.trials, e.censored),
                    );
                    art.records.push(Record::new(model, "two_over_m_plus_1", rep.bound, s.seed).class(spec.k1, spec.k2));
                    art.reports.push(json!({ "p1": model.p1, "two_over_m": rep }));
                }
                SchrammExperiment::Invariance => {
                    let seed = stream_seed(cfg.seed, i, 0x503);
                    let rep = invariance_test(&params, sc.trials, seed, caps).map_err(failed)?;
                    art.records.push(
                        Record::new(model, "invariance_adjusted_p", rep.adjusted_p, seed)
                            .class(spec.k1, spec.k2)
                            .radius(sc.depth)
                            .counts(rep.trials as u64, rep.censored),
                    );
                    invariance.push(json!({ "p1": model.p1, "p2": model.p2, "report": rep }));
                }
                SchrammExperiment::Returns => {}
            }
        }
    }
    if !invariance.is_empty() {
        art.extra_json.push(("invariance.json", json!({ "m": m, "spec": spec, "depth": sc.depth, "tests": invariance })));
    }
    Ok(art)
}

fn invade_runs(cfg: &ExperimentConfig) -> Result<Artifacts, RunError> {
    let graph = cfg.graph();
    let iv = &cfg.invade;
    let cells: Vec<(f64, u64)> = iv.rho.iter().flat_map(|&rho| (0..iv.seeds as u64).map(move |s| (rho, s))).collect();
    let results = crate::percolation::run_trials(cells.len(), |c| {
        let (rho, s) = cells[c as usize];
        invade(InvasionParams::new(graph, rho, iv.target, run_seed(cfg.seed, s)))
    });
    let mut art = Artifacts::default();
    for result in results {
        let s = result.map_err(failed)?;
        let censored = s.memory_exceeded as u64;
        for (q, v) in [("p1_hat", s.p1_hat), ("p2_hat", s.p2_hat)] {
            art.records.push(Record::unparametrized(&graph, q, v, s.seed).rho(s.rho).counts(s.cluster_size as u64, censored));
        }
        art.reports.push(serde_json::to_value(&s).expect("serializable"));
    }
    Ok(art)
}

fn curve(cfg: &ExperimentConfig) -> Result<Artifacts, RunError> {
    let graph = cfg.graph();
    let c = &cfg.curve;
    let grid = symmetric_rho_grid(c.rho_extreme, &c.rho_inner);
    let pts = critical_curve(graph, &grid, c.target, c.seeds, cfg.seed).map_err(failed)?;
    let mut art = Artifacts::default();
    for p in &pts {
        let n = p.runs.len().max(1) as f64;
        for (q, v, sd) in [("p1_hat", p.p1_hat, p.uncertainty), ("p2_hat", p.p2_hat, p.p2_uncertainty)] {
            art.records.push(
                Record::unparametrized(&graph, q, v, cfg.seed)
                    .rho(p.rho)
                    .stderr(sd / n.sqrt())
                    .counts(p.runs.len() as u64, p.failures as u64),
            );
        }
        art.curve.push(CurveRow {
            graph: graph.kind.name().to_string(),
            d: graph.d,
            rho: p.rho,
            p1_hat: p.p1_hat,
            p2_hat: p.p2_hat,
            target_size: c.target,
            seed: cfg.seed,
            uncertainty: p.uncertainty,
        });
        art.reports.push(json!({ "rho": p.rho, "p1_hat": p.p1_hat, "p2_hat": p.p2_hat, "sd": p.uncertainty, "runs": p.runs }));
    }
    Ok(art)
}

fn verify(cfg: &ExperimentConfig) -> Result<Artifacts, RunError> {
    let scale = match cfg.verify.scale {
        VerifyScale::Full => Scale::full(),
        VerifyScale::Smoke => Scale::smoke(),
    };
    let ids: Vec<u8> = if cfg.verify.criteria.is_empty() { (1..=14).collect() } else { cfg.verify.criteria.clone() };
    let ctx = Context::new(scale, cfg.seed);
    let graph = crate::tree::ProductGraph::txt(3);
    let mut art = Artifacts::default();
    let mut failed_ids = Vec::new();
    for id in ids {
        let out = acceptance::run(id, &ctx);
        println!("{}", out.line());
        for w in &out.warnings {
            println!("       warning: {w}");
        }
        if !out.passed {
            failed_ids.push(id);
        }
        art.records.push(
            Record::unparametrized(&graph, &format!("criterion_{id:02}"), out.value, cfg.seed)
                .bracket(out.value, out.threshold)
                .counts(1, !out.passed as u64),
        );
        art.reports.push(serde_json::to_value(&out).expect("serializable"));
    }
    if !failed_ids.is_empty() {
        art.failure = Some(format!("criteria failed: {failed_ids:?}"));
    }
    Ok(art)
}

