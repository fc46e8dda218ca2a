//! `nlslab` command-line front end.
//!
//! Every subcommand reads an optional JSON config, writes its outputs into
//! one directory and finishes with `manifest.json`, which lists each file
//! with its SHA-256.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use num_complex::Complex64 as C64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use nlslab::classify::{self, ConditionReport};
use nlslab::elliptic;
use nlslab::io::{csv_string, line_plot_svg, PlotSpec, Series, SystemSpec};
use nlslab::ode;
use nlslab::pde::{self, Datum, Grid, Schedule};
use nlslab::quartic;
use nlslab::standard;
use nlslab::verify::{self, PdeStudy, PhaseStudy};
use nlslab::{CubicSystem, PairState};

#[derive(Parser)]
#[command(name = "nlslab", version, about = "Two-component cubic NLS systems: structure, ODE and PDE experiments")]
struct Cli {
    /// JSON config for the subcommand; defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = "NLSLAB_OUT", default_value = "nlslab-out")]
    out: PathBuf,
    #[arg(long, global = true, default_value_t = 2024)]
    seed: u64,
    /// Worker threads for parallel sweeps.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Structural conditions of a system.
    Classify,
    /// Reduction to standard form.
    Reduce,
    /// Limit ODE trajectory.
    Ode,
    /// Closed-form solution of the model ODE.
    ModelExact,
    /// Split-step simulation with asymptotic diagnostics.
    Pde,
    /// Acceptance suite.
    Verify,
    /// Table of Jacobi elliptic functions.
    Elliptic,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Classify => "classify",
            Command::Reduce => "reduce",
            Command::Ode => "ode",
            Command::ModelExact => "model-exact",
            Command::Pde => "pde",
            Command::Verify => "verify",
            Command::Elliptic => "elliptic",
        }
    }
}

enum Failure {
    Schema(String),
    Module(nlslab::Error),
    Io(String),
}

impl From<nlslab::Error> for Failure {
    fn from(e: nlslab::Error) -> Self {
        match e {
            nlslab::Error::InvalidInput(m) => Failure::Schema(m),
            e => Failure::Module(e),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type Res<T> = std::result::Result<T, Failure>;

fn preset_model() -> SystemSpec {
    serde_json::from_str(r#"{"preset":"model"}"#).expect("preset literal")
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Output directory plus the record of what was written.
struct Out {
    dir: PathBuf,
    files: Vec<serde_json::Value>,
}

impl Out {
    fn new(dir: &Path) -> Res<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Res<()> {
        std::fs::write(self.dir.join(name), bytes)?;
        self.files.push(json!({ "path": name, "sha256": sha256_hex(bytes), "bytes": bytes.len() }));
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, v: &T) -> Res<()> {
        let mut s = serde_json::to_string_pretty(v).map_err(|e| Failure::Io(e.to_string()))?;
        s.push('\n');
        self.write(name, s.as_bytes())
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<f64>]) -> Res<()> {
        self.write(name, csv_string(header, rows).as_bytes())
    }

    fn svg(&mut self, name: &str, spec: PlotSpec, series: &[Series]) -> Res<()> {
        self.write(name, line_plot_svg(&spec, series).as_bytes())
    }
}

fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Res<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| Failure::Schema(format!("{}: {e}", p.display())))
        }
    }
}

fn pair(a: [f64; 2]) -> C64 {
    C64::new(a[0], a[1])
}

fn state_row(tau: f64, s: &PairState) -> Vec<f64> {
    vec![tau, s.a1.re, s.a1.im, s.a2.re, s.a2.im]
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ClassifyConfig {
    system: SystemSpec,
    /// Random states for the dissipative-condition probe.
    samples: usize,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self { system: preset_model(), samples: 2000 }
    }
}

fn cmd_classify(cfg: &ClassifyConfig, seed: u64, out: &mut Out) -> Res<()> {
    let sys = cfg.system.to_system()?;
    let rep = sys.to_matrix_vector();
    let eig = classify::eigenvalues3(&rep.a).map(|z| [z.re, z.im]);
    let h = classify::HermitianCandidate::new(1.0, 0.0, 0.0, 1.0);
    let d0 = classify::check_d0_candidate(&sys, &h, cfg.samples, seed)?;
    let ConditionReport { assumption, s1, h0, family, rank, .. } = classify::classify(&sys, seed);
    let quartic = quartic::build_quartic(&rep).ok();
    let bounds = quartic.as_ref().map(quartic::coercivity_bounds);
    out.json(
        "classify.json",
        &json!({
            "rep": rep,
            "eigenvalues": eig,
            "assumption": assumption,
            "S1": s1,
            "H0": h0,
            "d0_probe": d0,
            "family": family,
            "rank": rank,
            "quartic": quartic,
            "coercivity_bounds": bounds,
        }),
    )?;
    println!("assumption {} S1 {} H0 {} rank {}", assumption.holds, s1, h0, rank);
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ReduceConfig {
    system: SystemSpec,
}

impl Default for ReduceConfig {
    fn default() -> Self {
        Self { system: preset_model() }
    }
}

fn cmd_reduce(cfg: &ReduceConfig, out: &mut Out) -> Res<()> {
    let rep = cfg.system.to_system()?.to_matrix_vector();
    let cert = standard::reduce(&rep)?;
    let energy = standard::energy_like_condition(&cert.params);
    out.json("reduce.json", &json!({ "certificate": cert, "energy_like": energy }))?;
    let p = cert.params;
    println!(
        "sigma {} eta1 {:.6} eta2 {:.6} eta3 {:.6} lambda0 {:.6} (residual {:.1e})",
        p.sigma, p.eta1, p.eta2, p.eta3, p.lambda0, cert.transport_residual
    );
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct OdeConfig {
    system: SystemSpec,
    psi1: [f64; 2],
    psi2: [f64; 2],
    tau_end: f64,
    step: f64,
    tol: f64,
}

impl Default for OdeConfig {
    fn default() -> Self {
        Self { system: preset_model(), psi1: [0.8, 0.0], psi2: [0.6, 0.0], tau_end: 10.0, step: 0.01, tol: 1e-10 }
    }
}

fn cmd_ode(cfg: &OdeConfig, out: &mut Out) -> Res<()> {
    let sys = cfg.system.to_system()?;
    if !(cfg.step > 0.0) {
        return Err(Failure::Schema("step must be positive".into()));
    }
    let s0 = PairState::new(pair(cfg.psi1), pair(cfg.psi2));
    let traj = ode::integrate_grid(&sys, s0, &ode::uniform_grid(cfg.tau_end, cfg.step), cfg.tol)?;
    let rows: Vec<Vec<f64>> = traj
        .tau
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let q = traj.quad[i];
            let mut r = state_row(t, &traj.states[i]);
            r.extend([q.rho1, q.r, q.rho2, q.i]);
            r.push(traj.quartic.as_ref().map_or(f64::NAN, |v| v[i]));
            r
        })
        .collect();
    out.csv("ode.csv", &["tau", "re_a1", "im_a1", "re_a2", "im_a2", "rho1", "R", "rho2", "I", "Q"], &rows)?;
    let summary = json!({
        "final": traj.last(),
        "quartic_drift": traj.quartic_drift(),
        "quad_residual": ode::quad_residual(&sys, &traj),
    });
    out.json("ode.json", &summary)?;
    let col = |j: usize| rows.iter().map(|r| (r[0], r[j])).collect::<Vec<_>>();
    out.svg(
        "ode.svg",
        PlotSpec { title: "quadratic quantities".into(), xlabel: "tau".into(), ylabel: "value".into(), ..Default::default() },
        &[Series::new("rho1", col(5)), Series::new("R", col(6)), Series::new("rho2", col(7))],
    )?;
    println!("{} samples, quartic drift {:?}", rows.len(), traj.quartic_drift());
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ModelExactConfig {
    psi1: [f64; 2],
    psi2: [f64; 2],
    tau_end: f64,
    step: f64,
    /// Also integrate numerically and report the largest deviation.
    cross_check: bool,
    tol: f64,
}

impl Default for ModelExactConfig {
    fn default() -> Self {
        Self { psi1: [0.8, 0.0], psi2: [0.6, 0.0], tau_end: 10.0, step: 0.01, cross_check: true, tol: 1e-12 }
    }
}

fn cmd_model_exact(cfg: &ModelExactConfig, out: &mut Out) -> Res<()> {
    if !(cfg.step > 0.0 && cfg.tau_end > 0.0) {
        return Err(Failure::Schema("step and tau_end must be positive".into()));
    }
    let (p1, p2) = (pair(cfg.psi1), pair(cfg.psi2));
    let params = ode::model_params(p1, p2)?;
    let grid = ode::uniform_grid(cfg.tau_end, cfg.step);
    let series = ode::model_explicit_series(&params, &grid);
    let rows: Vec<Vec<f64>> = grid.iter().zip(&series).map(|(&t, s)| state_row(t, s)).collect();
    out.csv("model_exact.csv", &["tau", "re_a1", "im_a1", "re_a2", "im_a2"], &rows)?;
    let deviation = if cfg.cross_check {
        let traj = ode::integrate_grid(&CubicSystem::model(), PairState::new(p1, p2), &grid, cfg.tol)?;
        let d = traj
            .states
            .iter()
            .zip(&series)
            .map(|(a, b)| (a.a1 - b.a1).norm().max((a.a2 - b.a2).norm()))
            .fold(0.0, f64::max);
        Some(d)
    } else {
        None
    };
    let ratio = if params.m > 0.0 && params.m < 0.5 { ode::periodicity_ratio(&params).ok() } else { None };
    let convergents = ratio.map(|r| ode::best_rationals(r, 1000));
    out.json(
        "model_exact.json",
        &json!({ "params": params, "max_deviation": deviation, "periodicity_ratio": ratio, "convergents": convergents }),
    )?;
    let modulus = |f: fn(&PairState) -> f64| grid.iter().zip(&series).map(|(&t, s)| (t, f(s))).collect::<Vec<_>>();
    out.svg(
        "model_exact.svg",
        PlotSpec { title: "model profile".into(), xlabel: "tau".into(), ylabel: "modulus".into(), ..Default::default() },
        &[Series::new("|A1|", modulus(|s| s.a1.norm())), Series::new("|A2|", modulus(|s| s.a2.norm()))],
    )?;
    match deviation {
        Some(d) => println!("alpha {:.6} m {:.6} max deviation {d:.3e}", params.alpha, params.m),
        None => println!("alpha {:.6} m {:.6}", params.alpha, params.m),
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatumConfig {
    eps: f64,
    c1: [f64; 2],
    c2: [f64; 2],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct PdeConfig {
    system: SystemSpec,
    grid: Grid,
    datum: DatumConfig,
    dt: f64,
    snapshots: Vec<f64>,
    /// Optional pair `[t1, t2]` for the asymptotic-matching error.
    #[serde(rename = "match")]
    match_times: Option<[f64; 2]>,
    ode_tol: f64,
}

impl Default for PdeConfig {
    fn default() -> Self {
        Self {
            system: preset_model(),
            grid: Grid { l: 200.0 * std::f64::consts::PI, n: 1 << 12 },
            datum: DatumConfig { eps: 0.3, c1: [0.8, 0.0], c2: [0.6, 0.0] },
            dt: 0.01,
            snapshots: vec![1.0, 2.0, 4.0, 8.0, 16.0],
            match_times: None,
            ode_tol: 1e-10,
        }
    }
}

fn cmd_pde(cfg: &PdeConfig, out: &mut Out) -> Res<()> {
    let sys = cfg.system.to_system()?;
    let grid = Grid::new(cfg.grid.l, cfg.grid.n)?;
    let datum = Datum::new(cfg.datum.eps, pair(cfg.datum.c1), pair(cfg.datum.c2))?;
    let is_model = sys == CubicSystem::model();
    let fields = if is_model { cfg.snapshots.clone() } else { Vec::new() };
    let sched = Schedule { dt: cfg.dt, snapshots: cfg.snapshots.clone(), fields };
    let run = pde::run(&sys, grid, &datum, &sched)?;
    let nan = f64::NAN;
    let rows: Vec<Vec<f64>> = run
        .rows
        .iter()
        .map(|r| {
            let c = r.conserved.unwrap_or([nan, nan]);
            vec![
                r.t,
                r.l2[0],
                r.l2[1],
                r.sup[0],
                r.sup[1],
                r.j[0],
                r.j[1],
                r.x_boot,
                r.y_boot,
                r.r_sup[0],
                r.r_sup[1],
                r.r_l2[0],
                r.r_l2[1],
                r.quartic_drift.unwrap_or(nan),
                c[0],
                c[1],
            ]
        })
        .collect();
    let header = [
        "t", "l2_1", "l2_2", "sup_1", "sup_2", "j_1", "j_2", "x_boot", "y_boot", "r_sup_1", "r_sup_2", "r_l2_1",
        "r_l2_2", "quartic_drift", "mass", "energy",
    ];
    out.csv("pde.csv", &header, &rows)?;
    if let Some(last) = run.profiles.last() {
        let xi = grid.xis();
        let prof: Vec<Vec<f64>> =
            (0..grid.n).map(|k| vec![xi[k], last.w1[k].re, last.w1[k].im, last.w2[k].re, last.w2[k].im]).collect();
        out.csv("profile.csv", &["xi", "re_w1", "im_w1", "re_w2", "im_w2"], &prof)?;
    }
    let late: Vec<&pde::DiagnosticRow> = run.rows.iter().filter(|r| r.t >= 1.0).collect();
    let slope = (late.len() >= 2).then(|| {
        let t: Vec<f64> = late.iter().map(|r| r.t).collect();
        let y: Vec<f64> = late.iter().map(|r| r.r_sup[0].max(r.r_sup[1])).collect();
        pde::loglog_slope(&t, &y)
    });
    let conserved = if is_model { Some(pde::model_conserved_checks(&sys, grid, &run.fields)?) } else { None };
    let matching = match cfg.match_times {
        Some([t1, t2]) => {
            let (p1, p2) = (run.profile_at(t1), run.profile_at(t2));
            let (p1, p2) = p1.zip(p2).ok_or_else(|| Failure::Schema("match times must be snapshots".into()))?;
            Some(pde::asymptotic_match(&sys, &grid, p1, p2, cfg.ode_tol)?)
        }
        None => None,
    };
    out.json(
        "pde.json",
        &json!({ "remainder_sup_exponent": slope, "conserved": conserved, "match": matching, "snapshots": run.rows.len() }),
    )?;
    let series = |f: &dyn Fn(&pde::DiagnosticRow) -> f64| late.iter().map(|r| (r.t, f(r))).collect::<Vec<_>>();
    out.svg(
        "remainders.svg",
        PlotSpec { title: "remainder sup norm".into(), xlabel: "t".into(), ylabel: "|r|".into(), logx: true, logy: true },
        &[Series::new("r1", series(&|r| r.r_sup[0])), Series::new("r2", series(&|r| r.r_sup[1]))],
    )?;
    out.svg(
        "decay.svg",
        PlotSpec { title: "t^1/2 sup|u|".into(), xlabel: "t".into(), ylabel: "value".into(), logx: true, ..Default::default() },
        &[Series::new("u1", series(&|r| r.t.sqrt() * r.sup[0])), Series::new("u2", series(&|r| r.t.sqrt() * r.sup[1]))],
    )?;
    println!("{} snapshots, remainder exponent {:?}", run.rows.len(), slope);
    Ok(())
}

#[derive(Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct VerifyConfig {
    pde: PdeStudy,
    phase: PhaseStudy,
    /// Criteria to run; all when absent.
    only: Option<Vec<u32>>,
}

fn cmd_verify(cfg: &VerifyConfig, seed: u64, out: &mut Out) -> Res<bool> {
    let outcomes = verify::run_suite(seed, &cfg.pde, &cfg.phase, cfg.only.as_deref());
    for o in &outcomes {
        println!("{}", o.line());
    }
    let all = outcomes.iter().all(|o| o.pass);
    out.json("verify.json", &json!({ "seed": seed, "pass": all, "criteria": outcomes }))?;
    Ok(all)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct EllipticConfig {
    m: f64,
    u_start: f64,
    u_end: f64,
    n: usize,
}

impl Default for EllipticConfig {
    fn default() -> Self {
        Self { m: 0.5, u_start: 0.0, u_end: 10.0, n: 201 }
    }
}

fn cmd_elliptic(cfg: &EllipticConfig, out: &mut Out) -> Res<()> {
    if cfg.n < 2 {
        return Err(Failure::Schema("n must be at least 2".into()));
    }
    let k = elliptic::complete_k(cfg.m)?;
    let h = (cfg.u_end - cfg.u_start) / (cfg.n - 1) as f64;
    let mut rows = Vec::with_capacity(cfg.n);
    for i in 0..cfg.n {
        let u = cfg.u_start + i as f64 * h;
        let e = elliptic::jacobi(u, cfg.m)?;
        rows.push(vec![u, e.sn, e.cn, e.dn]);
    }
    out.csv("elliptic.csv", &["u", "sn", "cn", "dn"], &rows)?;
    out.json("elliptic.json", &json!({ "m": cfg.m, "K": k }))?;
    let col = |j: usize| rows.iter().map(|r| (r[0], r[j])).collect::<Vec<_>>();
    out.svg(
        "elliptic.svg",
        PlotSpec { title: format!("m = {}", cfg.m), xlabel: "u".into(), ylabel: "value".into(), ..Default::default() },
        &[Series::new("sn", col(1)), Series::new("cn", col(2)), Series::new("dn", col(3))],
    )?;
    println!("K({}) = {}", cfg.m, nlslab::io::fmt_f64(k));
    Ok(())
}

/// Parses the config, runs the command and returns `(config, passed)`.
fn dispatch(cli: &Cli, out: &mut Out) -> Res<(serde_json::Value, bool)> {
    let path = cli.config.as_deref();
    let mut ok = true;
    let cfg = match cli.command {
        Command::Classify => {
            let c: ClassifyConfig = load(path)?;
            cmd_classify(&c, cli.seed, out)?;
            value(&c)
        }
        Command::Reduce => {
            let c: ReduceConfig = load(path)?;
            cmd_reduce(&c, out)?;
            value(&c)
        }
        Command::Ode => {
            let c: OdeConfig = load(path)?;
            cmd_ode(&c, out)?;
            value(&c)
        }
        Command::ModelExact => {
            let c: ModelExactConfig = load(path)?;
            cmd_model_exact(&c, out)?;
            value(&c)
        }
        Command::Pde => {
            let c: PdeConfig = load(path)?;
            cmd_pde(&c, out)?;
            value(&c)
        }
        Command::Verify => {
            let c: VerifyConfig = load(path)?;
            ok = cmd_verify(&c, cli.seed, out)?;
            value(&c)
        }
        Command::Elliptic => {
            let c: EllipticConfig = load(path)?;
            cmd_elliptic(&c, out)?;
            value(&c)
        }
    };
    Ok((cfg, ok))
}

fn value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).unwrap_or(serde_json::Value::Null)
}

fn report(f: Failure) -> ExitCode {
    let (kind, message, code) = match f {
        Failure::Schema(m) => ("SchemaError".to_string(), m, 2),
        Failure::Module(e) => (e.kind().to_string(), e.to_string(), 1),
        Failure::Io(m) => ("IoError".to_string(), m, 1),
    };
    eprintln!("{}", json!({ "error": kind, "message": message }));
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            return report(Failure::Io(e.to_string()));
        }
    }
    let mut out = match Out::new(&cli.out) {
        Ok(o) => o,
        Err(f) => return report(f),
    };
    let (cfg, ok) = match dispatch(&cli, &mut out) {
        Ok(v) => v,
        Err(f) => return report(f),
    };
    let cfg_text = serde_json::to_string(&cfg).unwrap_or_default();
    if let Err(f) = out.json("config.json", &cfg) {
        return report(f);
    }
    let manifest = json!({
        "command": cli.command.name(),
        "seed": cli.seed,
        "config_sha256": sha256_hex(cfg_text.as_bytes()),
        "versions": { "nlslab": env!("CARGO_PKG_VERSION"), "nlslab-cli": env!("CARGO_PKG_VERSION") },
        "wall_seconds": start.elapsed().as_secs_f64(),
        "files": out.files,
    });
    let text = serde_json::to_string_pretty(&manifest).unwrap_or_default() + "\n";
    if let Err(e) = std::fs::write(out.dir.join("manifest.json"), text) {
        return report(Failure::Io(e.to_string()));
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
