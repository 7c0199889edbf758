use clap::{Parser, ValueEnum};
use freqbc_harness::layer::{layer_report, REFERENCE_ETAS};
use freqbc_harness::study::richardson;
use freqbc_harness::{emit_report, run_point, run_study, ConfigError, HarnessError, Status, StudyConfig, StudyOutput};
use freqbc_fem::homogenized::limit_operators;
use freqbc_fem::mesh::triangulate;
use freqbc_fem::{disk_oracle, solve_eigs_with, LimitKind, MeshOptions, SolveOptions};
use serde::Deserialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Verb {
    /// One sweep point (the first N of the config).
    Solve,
    /// Limit problems on a plain mesh, against the disk oracle where it applies.
    Homogenize,
    /// Cell-function integrals and their exact identities.
    Layer,
    /// The full sweep with checks and reports.
    Study,
    /// Re-render reports from a study.json.
    Report,
}

#[derive(Debug, Parser)]
#[command(name = "freqbc", version, about = "Eigenvalue studies for frequently alternating boundary conditions")]
struct Cli {
    verb: Verb,
    /// Study config (JSON); for `report`, a study.json; for `layer`, optional `{etas, quad_tol}`.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the number of modes.
    #[arg(long)]
    modes: Option<usize>,
    /// Sweep points run concurrently.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Overrides the eigen-residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

fn read(path: &Path) -> Result<String, HarnessError> {
    std::fs::read_to_string(path).map_err(|e| ConfigError::Parse(format!("{}: {e}", path.display())).into())
}

fn load_config(cli: &Cli) -> Result<StudyConfig, HarnessError> {
    let path = cli.config.as_ref().ok_or_else(|| ConfigError::Parse("--config is required".into()))?;
    let mut cfg = StudyConfig::from_json(&read(path)?)?;
    if let Some(k) = cli.modes {
        cfg.modes = k;
    }
    if let Some(t) = cli.tol {
        cfg.tol.eig = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_out(dir: &Path, name: &str, body: &str) -> Result<(), HarnessError> {
    let io = |e: std::io::Error| {
        HarnessError::Report(freqbc_harness::report::ReportError::Io {
            path: dir.join(name),
            source: e,
        })
    };
    std::fs::create_dir_all(dir).map_err(io)?;
    std::fs::write(dir.join(name), body).map_err(io)
}

fn solve(cli: &Cli) -> Result<(), HarnessError> {
    let cfg = load_config(cli)?;
    let r = run_point(&cfg, cfg.sweep[0]);
    let json = serde_json::to_string_pretty(&r).expect("record serializes");
    println!("{json}");
    write_out(&cli.out, "point.json", &(json + "\n"))?;
    write_out(&cli.out, "results.csv", &freqbc_harness::results_csv(std::slice::from_ref(&r), cfg.modes))?;
    match r.status {
        Status::Ok => Ok(()),
        Status::Failed => Err(HarnessError::Numerical(r.reason.unwrap_or_default())),
        Status::Flagged => Err(HarnessError::Violation(format!("N={} violates the sign constraint", r.n))),
    }
}

fn homogenize(cli: &Cli) -> Result<(), HarnessError> {
    let cfg = load_config(cli)?;
    let curve = cfg.curve.build();
    let map = cfg.theta_map().map_err(ConfigError::from)?;
    let a = match cfg.regime.robin_a() {
        a if a > 0.0 => a,
        _ => 1.0,
    };
    let mut kinds = vec![LimitKind::Dirichlet, LimitKind::Neumann, LimitKind::RobinA { a }];
    if let (Some(mu), a) = (cfg.eta.mu_at(cfg.sweep[0]), cfg.regime.robin_a()) {
        if a > 0.0 {
            kinds.push(LimitKind::Corrected { a, mu });
        }
    }
    let oracle_ok = cfg.curve.is_unit_circle() && cfg.theta == freqbc_core::geometry::ThetaKind::Identity;
    let num = |e: &dyn std::fmt::Display| HarnessError::Numerical(e.to_string());
    let mut mesh = triangulate(&*curve, None, &MeshOptions::new(cfg.mesh.h)).map_err(|e| num(&e))?;
    let mut opts = SolveOptions::new(cfg.modes, cfg.tol.eig);
    opts.cluster_tol = cfg.tol.cluster;
    let mut per_level: Vec<Vec<Vec<f64>>> = vec![Vec::new(); kinds.len()];
    for lev in 0..=cfg.mesh.levels {
        if lev > 0 {
            mesh = mesh.refine_uniform(&*curve).map_err(|e| num(&e))?;
        }
        for (i, kind) in kinds.iter().enumerate() {
            let (_, ops) = limit_operators(kind, &mesh, &map).map_err(|e| num(&e))?;
            let s = solve_eigs_with(&ops, &opts).map_err(|e| num(&e))?;
            per_level[i].push(s.eigenvalues);
        }
    }
    let mut csv = String::from("kind,mode,fem,oracle,rel_err\n");
    for (i, kind) in kinds.iter().enumerate() {
        let fem = richardson(&per_level[i]);
        let oracle = oracle_ok.then(|| disk_oracle(kind, fem.len()).values(fem.len()));
        let name = serde_json::to_value(kind).expect("kind serializes")["kind"].as_str().unwrap_or("").to_string();
        for (k, v) in fem.iter().enumerate() {
            let (o, rel) = match &oracle {
                Some(o) => {
                    let rel = if o[k] == 0.0 { v.abs() } else { (v - o[k]).abs() / o[k] };
                    (format!("{:.12e}", o[k]), format!("{rel:.3e}"))
                }
                None => (String::new(), String::new()),
            };
            let _ = writeln!(csv, "{name},{},{v:.12e},{o},{rel}", k + 1);
        }
    }
    print!("{csv}");
    write_out(&cli.out, "homogenized.csv", &csv)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerConfig {
    #[serde(default = "reference_etas")]
    etas: Vec<f64>,
    #[serde(default = "default_quad_tol")]
    quad_tol: f64,
}

fn reference_etas() -> Vec<f64> {
    REFERENCE_ETAS.to_vec()
}

fn default_quad_tol() -> f64 {
    1e-11
}

fn layer(cli: &Cli) -> Result<(), HarnessError> {
    let lc: LayerConfig = match &cli.config {
        Some(p) => serde_json::from_str(&read(p)?).map_err(|e| ConfigError::Parse(e.to_string()))?,
        None => LayerConfig {
            etas: reference_etas(),
            quad_tol: default_quad_tol(),
        },
    };
    if lc.etas.iter().any(|e| !(*e > 0.0 && *e < std::f64::consts::FRAC_PI_2)) {
        return Err(ConfigError::Incompatible("every eta must lie in (0, pi/2)".into()).into());
    }
    let rep = layer_report(&lc.etas, lc.quad_tol).map_err(|e| HarnessError::Numerical(e.to_string()))?;
    let csv = rep.to_csv();
    print!("{csv}");
    println!(
        "dirichlet value err {:.2e}, neumann flux err {:.2e}, far-field Y err {:.2e}, Y1 err {:.2e}",
        rep.dirichlet_value_err, rep.neumann_flux_err, rep.far_y_err, rep.far_y1_err
    );
    write_out(&cli.out, "layer.csv", &csv)?;
    if rep.passed() {
        Ok(())
    } else {
        Err(HarnessError::Violation("cell identities out of tolerance".into()))
    }
}

fn finish(out: &StudyOutput, dir: &Path) -> Result<(), HarnessError> {
    for p in emit_report(out, dir)? {
        println!("wrote {}", p.display());
    }
    for c in &out.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    for f in &out.fits {
        println!("mode {} remainder slope {:.3}, ratios {:?}", f.mode, f.fit.slope, f.fit.ratios);
    }
    match out.violations() {
        Some(v) => Err(HarnessError::Violation(v)),
        None => Ok(()),
    }
}

fn study(cli: &Cli) -> Result<(), HarnessError> {
    let cfg = load_config(cli)?;
    let out = run_study(&cfg, cli.jobs)?;
    finish(&out, &cli.out)
}

fn report(cli: &Cli) -> Result<(), HarnessError> {
    let path = cli.config.clone().unwrap_or_else(|| cli.out.join("study.json"));
    let out = StudyOutput::load(&path).map_err(|e| ConfigError::Parse(e.to_string()))?;
    finish(&out, &cli.out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.verb {
        Verb::Solve => solve(&cli),
        Verb::Homogenize => homogenize(&cli),
        Verb::Layer => layer(&cli),
        Verb::Study => study(&cli),
        Verb::Report => report(&cli),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("freqbc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
