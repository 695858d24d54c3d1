//! Command line driver: runs one scenario and writes CSV tables and a run manifest.

mod config;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::Parser;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use config::{MeshSpec, Orders, Overrides, Scenario, ScenarioConfig};
use rhdg::analysis::{convergence_rows, errors_csv, fit_k_decay, render_table};
use rhdg::assembly::Discretization;
use rhdg::problems::{kovasznay_lambda, Lattice};
use rhdg::reconstruction::check_reconstruction;
use rhdg::scenarios::{
    cylinder_run, infsup_study, kovasznay_study, lattice_run, manufactured_study, SteadyCase, UnsteadySettings,
};
use rhdg::solvers::{diagnostics_csv, stokes_system, Scheme, SemiDiscretization, StokesVariant};
use rhdg::space::SpaceKind;
use rhdg::Error;

/// Largest mean drag coefficient of the full cylinder benchmark.
const REFERENCE_CD_MAX: f64 = 3.2277;

/// Limits on the reconstruction checks.
const JUMP_LIMIT: f64 = 1e-10;
const MOMENT_LIMIT: f64 = 1e-12;
const STABILITY_LIMIT: f64 = 10.0;

#[derive(Debug, Parser)]
#[command(name = "rhdg", version, about = "Relaxed H(div) hybrid DG flow solver")]
struct Cli {
    /// Scenario to run (alternatively `--scenario`).
    #[arg(value_enum)]
    scenario: Option<Scenario>,
    #[arg(long = "scenario", value_enum, conflicts_with = "scenario")]
    scenario_flag: Option<Scenario>,
    /// Polynomial order or inclusive range `a..b`.
    #[arg(long)]
    k: Option<Orders>,
    /// `square:N`, `square-periodic:N`, `channel:H`, `kovasznay:N` or `file:PATH`.
    #[arg(long)]
    mesh: Option<MeshSpec>,
    /// Target element count of the Kovasznay mesh.
    #[arg(long)]
    nt: Option<usize>,
    /// Cells per side; a comma list gives the meshes of the refinement study.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long)]
    nu: Option<f64>,
    /// Penalty parameter multiplying `k^2 / h`.
    #[arg(long)]
    lambda: Option<f64>,
    /// Comma list of `B` and `PR`.
    #[arg(long, value_delimiter = ',')]
    variant: Option<Vec<StokesVariant>>,
    /// Convection discretization: a, b, c or d.
    #[arg(long)]
    semidisc: Option<SemiDiscretization>,
    /// Time stepping: imex1 or sbdf2.
    #[arg(long)]
    scheme: Option<Scheme>,
    /// Replace every new velocity by its reconstruction.
    #[arg(long)]
    post_reconstruct: Option<bool>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    tend: Option<f64>,
    /// Record diagnostics every this many steps.
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Random fields per order for `reconstruct-check`.
    #[arg(long)]
    samples: Option<usize>,
    /// Run the cylinder flow to the full benchmark horizon.
    #[arg(long)]
    full_benchmark: bool,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the steady saddle-point matrix of the first order in MatrixMarket format.
    #[arg(long)]
    dump_system: Option<PathBuf>,
    /// Repeat the run recorded in a manifest; `--out` may redirect its outputs.
    #[arg(long, conflicts_with_all = ["scenario", "scenario_flag"])]
    manifest: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
struct MeshInfo {
    spec: String,
    elements: usize,
    fingerprint: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    config: ScenarioConfig,
    versions: BTreeMap<String, String>,
    mesh: MeshInfo,
    /// Wall-clock seconds; everything else in the run is deterministic.
    timings: BTreeMap<String, f64>,
    results: Value,
    outputs: Vec<String>,
}

/// What a scenario produced.
struct Outcome {
    files: Vec<(&'static str, String)>,
    results: Value,
    timings: BTreeMap<String, f64>,
    summary: String,
    violated: bool,
}

impl Outcome {
    fn new(results: Value, summary: String) -> Self {
        Outcome {
            files: Vec::new(),
            results,
            timings: BTreeMap::new(),
            summary,
            violated: false,
        }
    }
}

fn resolve(cli: Cli) -> anyhow::Result<ScenarioConfig> {
    if let Some(path) = &cli.manifest {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read manifest {}: {e}", path.display())))?;
        let value: Value = serde_json::from_str(&text).map_err(|e| Error::Config(format!("bad manifest: {e}")))?;
        let mut config: ScenarioConfig = serde_json::from_value(value.get("config").cloned().unwrap_or(Value::Null))
            .map_err(|e| Error::Config(format!("bad manifest config: {e}")))?;
        if let Some(out) = cli.out {
            config.out = out;
        }
        config.validate()?;
        return Ok(config);
    }
    let scenario = cli
        .scenario
        .or(cli.scenario_flag)
        .ok_or_else(|| Error::Config("no scenario given".into()))?;
    let overrides = Overrides {
        k: cli.k,
        mesh: cli.mesh,
        nt: cli.nt,
        n: cli.n,
        nu: cli.nu,
        lambda: cli.lambda,
        variants: cli.variant,
        semidisc: cli.semidisc,
        scheme: cli.scheme,
        post_reconstruct: cli.post_reconstruct,
        dt: cli.dt,
        t_end: cli.tend,
        stride: cli.stride,
        seed: cli.seed,
        samples: cli.samples,
        full_benchmark: cli.full_benchmark,
        out: cli.out,
        dump_system: cli.dump_system,
    };
    Ok(ScenarioConfig::resolve(scenario, overrides)?)
}

fn steady_timings(cases: &[SteadyCase]) -> BTreeMap<String, f64> {
    cases
        .iter()
        .map(|c| {
            (
                format!("{} k={} h={:.4e}", c.label, c.report.k, c.report.h),
                c.stats.assembly_seconds + c.stats.solve_seconds,
            )
        })
        .collect()
}

fn run_kovasznay(cfg: &ScenarioConfig, mesh: &std::sync::Arc<rhdg::mesh::Mesh>) -> anyhow::Result<Outcome> {
    let cases = kovasznay_study(mesh, &cfg.k.all(), &cfg.variants, cfg.nu, cfg.lambda, false)?;
    let rows = convergence_rows(cases.iter().map(|c| (c.label.clone(), c.report.clone())).collect());
    let mut decay = serde_json::Map::new();
    for v in &cfg.variants {
        let (ks, errs): (Vec<usize>, Vec<f64>) = cases
            .iter()
            .filter(|c| c.label == v.name())
            .map(|c| (c.report.k, c.report.h1_u))
            .unzip();
        decay.insert(v.name().into(), json!(fit_k_decay(&ks, &errs)));
    }
    let per_case: Vec<Value> = cases
        .iter()
        .map(|c| json!({"case": c.label, "k": c.report.k, "h1_u": c.report.h1_u, "post_h1_u": c.post_h1}))
        .collect();
    let lambda_kov = kovasznay_lambda(cfg.nu);
    let results = json!({"lambda_kov": lambda_kov, "h1_decay_per_order": decay, "cases": per_case});
    let mut out = Outcome::new(results, render_table(&rows));
    let _ = writeln!(out.summary, "lambda_kov = {lambda_kov:.6}");
    out.files.push(("errors.csv", errors_csv(&rows)));
    out.timings = steady_timings(&cases);
    Ok(out)
}

fn run_manufactured(cfg: &ScenarioConfig) -> anyhow::Result<Outcome> {
    if cfg.nu != 1.0 {
        return Err(Error::Config("the manufactured study runs with nu = 1".into()).into());
    }
    let mut cases = Vec::new();
    let mut rates = Vec::new();
    for k in cfg.k.all() {
        for &v in &cfg.variants {
            let study = manufactured_study(k, &cfg.refinements, v, cfg.lambda)?;
            rates.push(json!({"case": v.name(), "k": k, "h1_rate": study.h1_rate, "pressure_rate": study.pressure_rate}));
            cases.extend(study.cases);
        }
    }
    let rows = convergence_rows(cases.iter().map(|c| (c.label.clone(), c.report.clone())).collect());
    let mut out = Outcome::new(json!({"rates": rates}), render_table(&rows));
    out.files.push(("errors.csv", errors_csv(&rows)));
    out.timings = steady_timings(&cases);
    Ok(out)
}

fn settings(cfg: &ScenarioConfig) -> anyhow::Result<UnsteadySettings> {
    Ok(UnsteadySettings {
        k: cfg.k.single()?,
        nu: cfg.nu,
        lambda: cfg.lambda,
        dt: cfg.dt,
        t_end: cfg.t_end,
        scheme: cfg.scheme,
        semidisc: cfg.semidisc,
        post_reconstruct: cfg.post_reconstruct,
        stride: cfg.stride,
    })
}

fn run_lattice(cfg: &ScenarioConfig) -> anyhow::Result<Outcome> {
    let MeshSpec::SquarePeriodic(n) = cfg.mesh else {
        return Err(Error::Config("lattice flow needs a square-periodic mesh".into()).into());
    };
    let s = settings(cfg)?;
    let t0 = Instant::now();
    let r = lattice_run(n, &s)?;
    let exact = Lattice { nu: cfg.nu };
    let t_final = r.diagnostics.last().map_or(0.0, |d| d.t);
    let results = json!({
        "steps": s.steps(),
        "initial_norm": r.diagnostics[0].norm,
        "final_norm": r.final_norm,
        "exact_final_norm": exact.exact_norm(t_final),
        "max_step_growth": r.max_step_growth,
        "max_decay_deviation": r.max_decay_deviation,
    });
    let summary = format!(
        "lattice: {} steps, norm {:.8} -> {:.8} (exact {:.8}), max step growth {:.3e}\n",
        s.steps(),
        r.diagnostics[0].norm,
        r.final_norm,
        exact.exact_norm(t_final),
        r.max_step_growth
    );
    let mut out = Outcome::new(results, summary);
    out.files.push(("diag.csv", diagnostics_csv(&r.diagnostics)));
    out.timings.insert("time stepping".into(), t0.elapsed().as_secs_f64());
    Ok(out)
}

fn run_cylinder(cfg: &ScenarioConfig, mesh: std::sync::Arc<rhdg::mesh::Mesh>) -> anyhow::Result<Outcome> {
    let s = settings(cfg)?;
    if cfg.full_benchmark {
        eprintln!(
            "warning: full benchmark horizon t = {} with dt = {} means {} implicit steps; this takes hours",
            cfg.t_end,
            cfg.dt,
            s.steps()
        );
    }
    let t0 = Instant::now();
    let r = cylinder_run(mesh, &s)?;
    let trace = r.drag_trace();
    let cd_max = trace.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let cd_mean = trace.iter().map(|p| p.1).sum::<f64>() / trace.len().max(1) as f64;
    let cl_max = r
        .diagnostics
        .iter()
        .filter_map(|d| d.drag_lift.map(|f| f.1))
        .fold(f64::NEG_INFINITY, f64::max);
    let mut results = json!({
        "elements": r.elements,
        "unknowns": r.unknowns,
        "steps": s.steps(),
        "cd_max": cd_max,
        "cd_mean": cd_mean,
        "cl_max": cl_max,
        "final_norm": r.diagnostics.last().map(|d| d.norm),
    });
    if cfg.full_benchmark {
        results["reference_cd_max"] = json!(REFERENCE_CD_MAX);
        results["cd_max_relative_deviation"] = json!((cd_max - REFERENCE_CD_MAX).abs() / REFERENCE_CD_MAX);
    }
    let summary = format!(
        "cylinder: {} elements, {} unknowns, {} steps; c_D max {cd_max:.4}, mean {cd_mean:.4}; c_L max {cl_max:.4}\n",
        r.elements,
        r.unknowns,
        s.steps()
    );
    let mut out = Outcome::new(results, summary);
    out.files.push(("diag.csv", diagnostics_csv(&r.diagnostics)));
    out.timings.insert("time stepping".into(), t0.elapsed().as_secs_f64());
    Ok(out)
}

fn run_infsup(cfg: &ScenarioConfig, mesh: &std::sync::Arc<rhdg::mesh::Mesh>) -> anyhow::Result<Outcome> {
    let t0 = Instant::now();
    let reports = infsup_study(mesh, &cfg.k.all(), cfg.nu, cfg.lambda)?;
    let mut csv = String::from("k,h,c_lbb,c_co\n");
    let mut summary = String::new();
    let mut violated = false;
    for r in &reports {
        let _ = writeln!(csv, "{},{:.6e},{:.8e},{:.8e}", r.k, r.h, r.c_lbb, r.c_co);
        let ok = r.c_lbb > 0.0 && r.c_co > 0.0;
        violated |= !ok;
        let _ = writeln!(
            summary,
            "k={} c_LBB={:.4} c_CO={:.4}{}",
            r.k,
            r.c_lbb,
            r.c_co,
            if ok { "" } else { "  VIOLATED" }
        );
    }
    let mut out = Outcome::new(json!({"reports": reports}), summary);
    out.files.push(("infsup.csv", csv));
    out.timings.insert("eigenvalue estimates".into(), t0.elapsed().as_secs_f64());
    out.violated = violated;
    Ok(out)
}

fn run_reconstruct_check(cfg: &ScenarioConfig, mesh: &std::sync::Arc<rhdg::mesh::Mesh>) -> anyhow::Result<Outcome> {
    let mut csv = String::from("k,samples,normal_jump,facet_moment,interior_moment,stability\n");
    let mut checks = Vec::new();
    let mut out = Outcome::new(Value::Null, String::new());
    let mut violations = 0usize;
    for k in cfg.k.all() {
        let t0 = Instant::now();
        let disc = Discretization::new(mesh.clone(), k, SpaceKind::WRelaxed)?;
        let c = check_reconstruction(&disc, cfg.samples, cfg.seed)?;
        out.timings.insert(format!("k={k}"), t0.elapsed().as_secs_f64());
        let _ = writeln!(
            csv,
            "{},{},{:.3e},{:.3e},{:.3e},{:.8e}",
            c.k, c.samples, c.normal_jump, c.facet_moment, c.interior_moment, c.stability
        );
        violations += usize::from(c.normal_jump > JUMP_LIMIT)
            + usize::from(c.facet_moment > MOMENT_LIMIT)
            + usize::from(c.interior_moment > MOMENT_LIMIT)
            + usize::from(c.stability > STABILITY_LIMIT);
        checks.push(c);
    }
    let max_stability = checks.iter().map(|c| c.stability).fold(0.0, f64::max);
    let _ = writeln!(
        out.summary,
        "reconstruction check k={}: max stability ratio {max_stability:.4}, violated constraints {violations}",
        cfg.k
    );
    out.results = json!({"max_stability": max_stability, "violations": violations, "checks": checks});
    out.files.push(("reconstruct.csv", csv));
    out.violated = violations > 0;
    Ok(out)
}

fn dump_system(cfg: &ScenarioConfig, mesh: &std::sync::Arc<rhdg::mesh::Mesh>, path: &Path) -> anyhow::Result<()> {
    let disc = Discretization::new(mesh.clone(), cfg.k.first, SpaceKind::WRelaxed)?;
    let system = stokes_system(&disc, cfg.nu, cfg.lambda)?;
    system.matrix.write_matrix_market(path)?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let cfg = resolve(cli)?;
    let start = Instant::now();
    let mesh_spec = match cfg.scenario {
        Scenario::Manufactured => MeshSpec::Square(cfg.refinements[0]),
        _ => cfg.mesh.clone(),
    };
    let mesh = mesh_spec.build()?;
    let outcome = match cfg.scenario {
        Scenario::Kovasznay => run_kovasznay(&cfg, &mesh)?,
        Scenario::Manufactured => run_manufactured(&cfg)?,
        Scenario::Lattice => run_lattice(&cfg)?,
        Scenario::Cylinder => run_cylinder(&cfg, mesh.clone())?,
        Scenario::Infsup => run_infsup(&cfg, &mesh)?,
        Scenario::ReconstructCheck => run_reconstruct_check(&cfg, &mesh)?,
    };
    if let Some(path) = &cfg.dump_system {
        dump_system(&cfg, &mesh, path)?;
    }
    fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    let mut outputs = Vec::new();
    for (name, content) in &outcome.files {
        let path = cfg.out.join(name);
        fs::write(&path, content).with_context(|| format!("writing {}", path.display()))?;
        outputs.push(name.to_string());
    }
    let mut timings = outcome.timings;
    timings.insert("total".into(), start.elapsed().as_secs_f64());
    let manifest = Manifest {
        versions: BTreeMap::from([
            ("rhdg".to_string(), rhdg::VERSION.to_string()),
            ("rhdg-cli".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ]),
        mesh: MeshInfo {
            spec: mesh_spec.to_string(),
            elements: mesh.num_elements(),
            fingerprint: mesh.content_hash(),
        },
        timings,
        results: outcome.results,
        outputs,
        config: cfg.clone(),
    };
    let path = cfg.out.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n").with_context(|| format!("writing {}", path.display()))?;
    print!("{}", outcome.summary);
    println!("wrote {}", cfg.out.display());
    Ok(if outcome.violated { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

/// 2 for configuration problems, 3 for numerical or I/O failures.
fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(
            Error::Config(_)
            | Error::UnsupportedOrder { .. }
            | Error::Parse { .. }
            | Error::Topology(_)
            | Error::MeshGeneration(_)
            | Error::MissingTag(_)
            | Error::DimensionLimit { .. },
        ) => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
