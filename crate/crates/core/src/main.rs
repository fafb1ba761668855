//! Command-line driver: penalty tables, 1D profile/F-sweep CSVs, and the
//! two plane-strain benchmarks (single-edge-notched shear, pressurized
//! interior crack), configured by flat key=value files.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use phasefield::config::Config;
use phasefield::evolution::SolverTolerances;
use phasefield::material::{MaterialSpec, ModelKind, SplitKind};
use phasefield::profiles::{
    self, fd_oracle_refined, write_profile_csv, OracleKind, Profile1d,
};
use phasefield::runner::{
    default_stations, norm_definitions, run_sen, run_sneddon, write_cod_csv, write_meta,
    write_steps_csv, PenaltyChoice, SenParams, SneddonParams, DEFAULT_TOL_IRR, DEFAULT_TOL_REC,
};
use phasefield::tuner::{gamma_opt, r_opt, rho_opt, s_opt};
use phasefield::{Error, Result};

#[derive(Parser)]
#[command(
    name = "phasefield",
    version,
    about = "Phase-field brittle fracture toolkit: penalty tuning, 1D profiles, 2D benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Run-configuration file; may be given several times to sweep.
    #[arg(long, global = true)]
    config: Vec<PathBuf>,
    /// Output directory (per-config subdirectories when sweeping).
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Echo the primary CSV artifact to stdout.
    #[arg(long, global = true)]
    csv: bool,
    /// Worker threads used to fan out multiple --config runs.
    #[arg(long, global = true)]
    sweep: Option<usize>,
}

#[derive(Subcommand, Clone, Copy, PartialEq)]
enum Cmd {
    /// Print the optimal penalty table for the configured material data.
    Tune,
    /// Write 1D optimal/penalized profile samples and F-function sweeps.
    Profiles,
    /// Run the single-edge-notched shear loading-unloading schedule.
    Sen,
    /// Run the pressurized interior crack benchmark with COD extraction.
    Sneddon,
}

impl Cmd {
    fn name(self) -> &'static str {
        match self {
            Cmd::Tune => "tune",
            Cmd::Profiles => "profiles",
            Cmd::Sen => "sen",
            Cmd::Sneddon => "sneddon",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let configs: Vec<Option<PathBuf>> = if cli.config.is_empty() {
        vec![None]
    } else {
        cli.config.iter().cloned().map(Some).collect()
    };

    if configs.len() == 1 {
        let report = run_one(cli.cmd, configs[0].as_deref(), &cli.out, cli.csv);
        return finish(&[("".into(), report)]);
    }

    // Sweep: isolated output directory per config, fanned out over a
    // fixed-size worker pool; reports printed in input order.
    let workers = cli.sweep.unwrap_or(1).max(1).min(configs.len());
    let next = std::sync::atomic::AtomicUsize::new(0);
    let mut reports: Vec<(String, Result<String>)> = Vec::with_capacity(configs.len());
    for _ in 0..configs.len() {
        reports.push((String::new(), Ok(String::new())));
    }
    let reports = std::sync::Mutex::new(&mut reports);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                let Some(cfg) = configs.get(i) else { break };
                let path = cfg.as_deref().unwrap();
                let sub = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| format!("run{i}"));
                let out = cli.out.join(&sub);
                let report = run_one(cli.cmd, Some(path), &out, cli.csv);
                let label = path.display().to_string();
                reports.lock().unwrap()[i] = (label, report);
            });
        }
    });
    let reports = reports.into_inner().unwrap();
    finish(reports)
}

fn finish(reports: &[(String, Result<String>)]) -> ExitCode {
    let mut worst = 0u8;
    for (label, report) in reports {
        let prefix = if label.is_empty() {
            String::new()
        } else {
            format!("[{label}] ")
        };
        match report {
            Ok(summary) => {
                for line in summary.lines() {
                    println!("{prefix}{line}");
                }
            }
            Err(e) => {
                eprintln!("{prefix}error: {e}");
                worst = worst.max(exit_code(e));
            }
        }
    }
    ExitCode::from(worst)
}

/// Input and configuration problems exit with 2; numerical failures
/// (non-converged or broken-down solves) with 3.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Material(_)
        | Error::Domain(_)
        | Error::Config(_)
        | Error::Mesh(_)
        | Error::Assembly(_)
        | Error::Io(_) => 2,
        Error::LinearSolver { .. } | Error::NewtonDiverged { .. } | Error::StaggeredDiverged { .. } => 3,
    }
}

fn run_one(cmd: Cmd, config: Option<&Path>, out: &Path, echo_csv: bool) -> Result<String> {
    std::fs::create_dir_all(out)?;
    let cfg = match config {
        Some(path) => Some(Config::from_file(path)?),
        None => None,
    };
    if let Some(cfg) = &cfg {
        if let Some(bench) = cfg.get("run", "benchmark") {
            if bench != cmd.name() {
                return Err(Error::Config(format!(
                    "config requests benchmark {bench:?} but the {} subcommand was invoked",
                    cmd.name()
                )));
            }
        }
    }
    match cmd {
        Cmd::Tune => run_tune(cfg.as_ref(), out, echo_csv),
        Cmd::Profiles => run_profiles(cfg.as_ref(), out, echo_csv),
        Cmd::Sen => run_sen_cmd(cfg.as_ref(), out, echo_csv),
        Cmd::Sneddon => run_sneddon_cmd(cfg.as_ref(), out, echo_csv),
    }
}

// ---------------------------------------------------------------- config glue

fn material_from(cfg: Option<&Config>, default: MaterialSpec) -> Result<MaterialSpec> {
    let Some(cfg) = cfg else { return Ok(default) };
    MaterialSpec::new(
        cfg.get_f64("material", "young_modulus")?.unwrap_or(default.young_modulus),
        cfg.get_f64("material", "poisson_ratio")?.unwrap_or(default.poisson_ratio),
        cfg.get_f64("material", "toughness")?.unwrap_or(default.toughness),
        cfg.get_f64("material", "length_scale")?.unwrap_or(default.length_scale),
    )
}

fn model_from(cfg: Option<&Config>, default: ModelKind) -> Result<ModelKind> {
    match cfg.and_then(|c| c.get("model", "model")) {
        None => Ok(default),
        Some("at1") => Ok(ModelKind::At1),
        Some("at2") => Ok(ModelKind::At2),
        Some(other) => Err(Error::Config(format!(
            "[model] model: expected at1 or at2, got {other:?}"
        ))),
    }
}

fn split_from(cfg: Option<&Config>, default: SplitKind) -> Result<SplitKind> {
    match cfg.and_then(|c| c.get("model", "split")) {
        None => Ok(default),
        Some("none") => Ok(SplitKind::NoSplit),
        Some("voldev") => Ok(SplitKind::VolDev),
        Some("spectral") => Ok(SplitKind::Spectral),
        Some(other) => Err(Error::Config(format!(
            "[model] split: expected none, voldev or spectral, got {other:?}"
        ))),
    }
}

fn tols_from(cfg: Option<&Config>, default: SolverTolerances) -> Result<SolverTolerances> {
    let Some(cfg) = cfg else { return Ok(default) };
    let mut t = SolverTolerances::new(
        cfg.get_f64("tolerances", "tol_stag")?.unwrap_or(default.tol_stag),
        cfg.get_f64("tolerances", "tol_nr")?.unwrap_or(default.tol_nr),
    )?;
    t.max_stag_iters = cfg
        .get_usize("tolerances", "max_stag_iters")?
        .unwrap_or(default.max_stag_iters);
    t.max_nr_iters = cfg
        .get_usize("tolerances", "max_nr_iters")?
        .unwrap_or(default.max_nr_iters);
    Ok(t)
}

/// Parses a penalty key: `auto`, `history` (if allowed), or a number.
fn penalty_from(
    cfg: Option<&Config>,
    key: &str,
    allow_history: bool,
    default: Option<PenaltyChoice>,
) -> Result<Option<PenaltyChoice>> {
    match cfg.and_then(|c| c.get("penalty", key)) {
        None => Ok(default),
        Some("auto") => Ok(Some(PenaltyChoice::Auto)),
        Some("history") if allow_history => Ok(None),
        Some(s) => s.parse().map(|v| Some(PenaltyChoice::Fixed(v))).map_err(|_| {
            Error::Config(format!("[penalty] {key}: expected auto{}or a number, got {s:?}",
                if allow_history { ", history, " } else { " " }))
        }),
    }
}

fn mesh_file_from(cfg: Option<&Config>) -> Option<PathBuf> {
    cfg.and_then(|c| c.get("mesh", "file")).map(PathBuf::from)
}

fn echo(path: &Path) -> Result<()> {
    print!("{}", std::fs::read_to_string(path)?);
    Ok(())
}

// ----------------------------------------------------------------------- tune

struct TuneRow {
    dataset: String,
    model: ModelKind,
    tol_irr: f64,
    tol_rec: f64,
    ratio: f64,
    gamma: f64,
    rho: f64,
}

fn tune_rows(cfg: Option<&Config>) -> Result<Vec<TuneRow>> {
    let mut datasets: Vec<(String, MaterialSpec, f64)> = Vec::new();
    if cfg.is_some() {
        let m = material_from(cfg, MaterialSpec::new(1.0, 0.2, 1.0, 0.02)?)?;
        let ratio = cfg
            .and_then(|c| c.get_f64("tune", "ratio").transpose())
            .transpose()?
            .unwrap_or(200.0);
        datasets.push(("config".into(), m, ratio));
    } else {
        // Built-in reference data: a steel-like SI set for the shear
        // benchmark and the unit-modulus pressurized-crack set.
        datasets.push((
            "sen-steel-si".into(),
            MaterialSpec::new(210e9, 0.3, 2700.0, 1e-5)?,
            2.0 * 0.5e-3 / 1e-5,
        ));
        datasets.push((
            "sneddon-unit".into(),
            MaterialSpec::new(1.0, 0.2, 1.0, 0.02)?,
            2.0 * 2.0 / 0.02,
        ));
    }
    let tol_irr = cfg
        .and_then(|c| c.get_f64("tune", "tol_irr").transpose())
        .transpose()?
        .unwrap_or(DEFAULT_TOL_IRR);
    let tol_rec = cfg
        .and_then(|c| c.get_f64("tune", "tol_rec").transpose())
        .transpose()?
        .unwrap_or(DEFAULT_TOL_REC);
    let mut rows = Vec::new();
    for (name, m, ratio) in datasets {
        for model in [ModelKind::At1, ModelKind::At2] {
            rows.push(TuneRow {
                dataset: name.clone(),
                model,
                tol_irr,
                tol_rec,
                ratio,
                gamma: gamma_opt(model, m.toughness, m.length_scale, tol_irr)?,
                rho: rho_opt(m.toughness, m.length_scale, ratio, tol_rec)?,
            });
        }
    }
    Ok(rows)
}

fn run_tune(cfg: Option<&Config>, out: &Path, echo_csv: bool) -> Result<String> {
    let rows = tune_rows(cfg)?;
    let csv_path = out.join("penalties.csv");
    {
        use std::io::Write as _;
        let mut f = std::io::BufWriter::new(std::fs::File::create(&csv_path)?);
        writeln!(
            f,
            "dataset,model,tol_irr[-],s_opt[-],gamma_opt[Gc/length^2],\
tol_rec[-],ratio[-],r_opt[-],rho_opt[Gc/length^2]"
        )?;
        for r in &rows {
            writeln!(
                f,
                "{},{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                r.dataset,
                match r.model {
                    ModelKind::At1 => "at1",
                    ModelKind::At2 => "at2",
                },
                r.tol_irr,
                s_opt(r.model, r.tol_irr)?,
                r.gamma,
                r.tol_rec,
                r.ratio,
                r_opt(r.ratio, r.tol_rec)?,
                r.rho,
            )?;
        }
    }
    if echo_csv {
        echo(&csv_path)?;
    }
    let mut summary = String::new();
    summary.push_str(&format!("wrote {}\n", csv_path.display()));
    for r in &rows {
        summary.push_str(&format!(
            "{} {:?}: s_opt = {:.0}, gamma_opt = {:.4e}; r_opt = {:.4e}, rho_opt = {:.4e}\n",
            r.dataset,
            r.model,
            s_opt(r.model, r.tol_irr)?,
            r.gamma,
            r_opt(r.ratio, r.tol_rec)?,
            r.rho,
        ));
    }
    Ok(summary)
}

// ------------------------------------------------------------------- profiles

fn parse_list(cfg: Option<&Config>, section: &str, key: &str, default: &[f64]) -> Result<Vec<f64>> {
    match cfg.and_then(|c| c.get(section, key)) {
        None => Ok(default.to_vec()),
        Some(s) => s
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse().map_err(|_| {
                    Error::Config(format!("[{section}] {key}: not a number: {t:?}"))
                })
            })
            .collect(),
    }
}

fn sample(p: &Profile1d, n: usize) -> Vec<(f64, f64)> {
    let l = p.half_length();
    (0..n)
        .map(|k| {
            let x = -l + 2.0 * l * k as f64 / (n - 1) as f64;
            (x, p.eval_mirrored(x))
        })
        .collect()
}

/// Tag for embedding a penalty value in a file name: `1.5e3` -> `1_5e3`.
fn tag(v: f64) -> String {
    format!("{v:e}").replace('.', "_")
}

fn run_profiles(cfg: Option<&Config>, out: &Path, echo_csv: bool) -> Result<String> {
    let ell = cfg
        .and_then(|c| c.get_f64("profiles", "ell").transpose())
        .transpose()?
        .unwrap_or(1.0);
    let ratio = cfg
        .and_then(|c| c.get_f64("profiles", "ratio").transpose())
        .transpose()?
        .unwrap_or(4.0);
    let samples = cfg
        .and_then(|c| c.get_usize("profiles", "samples").transpose())
        .transpose()?
        .unwrap_or(401);
    if samples < 2 {
        return Err(Error::Config("[profiles] samples: need at least 2".into()));
    }
    let s_values = parse_list(cfg, "profiles", "gamma_scales", &[1e2, 1e4])?;
    let r_values = parse_list(cfg, "profiles", "rho_scales", &[4.0, 40.0])?;
    let sweep_ratio = cfg
        .and_then(|c| c.get_f64("profiles", "sweep_ratio").transpose())
        .transpose()?
        .unwrap_or(200.0);
    let half = ratio * ell;

    let mut written = Vec::new();
    let mut put = |name: String, p: &Profile1d| -> Result<()> {
        let path = out.join(name);
        write_profile_csv(&path, &sample(p, samples))?;
        written.push(path);
        Ok(())
    };
    put("profile_linear_optimal.csv".into(), &profiles::linear_optimal(ell, half)?)?;
    put("profile_quadratic_optimal.csv".into(), &profiles::quadratic_optimal(ell, half)?)?;
    put(
        "profile_linear_unconstrained.csv".into(),
        &profiles::linear_unconstrained(ell, half)?,
    )?;
    for &s in &s_values {
        put(format!("profile_gamma_linear_s{}.csv", tag(s)), &profiles::gamma_linear(ell, half, s)?)?;
        put(
            format!("profile_gamma_quadratic_s{}.csv", tag(s)),
            &profiles::gamma_quadratic(ell, half, s)?,
        )?;
    }
    for &r in &r_values {
        put(format!("profile_rho_r{}.csv", tag(r)), &profiles::rho_profile(ell, half, r)?)?;
    }

    use std::io::Write as _;
    let f_gamma_path = out.join("f_gamma_sweep.csv");
    {
        let mut f = std::io::BufWriter::new(std::fs::File::create(&f_gamma_path)?);
        writeln!(
            f,
            "s[-],f_linear[-],f_linear_exact[-],f_quadratic[-],f_quadratic_exact[-]"
        )?;
        for k in 0..=60 {
            let s = 10f64.powf(1.0 + k as f64 * 0.1);
            writeln!(
                f,
                "{s:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                phasefield::tuner::f_gamma(ModelKind::At1, s, sweep_ratio)?,
                phasefield::tuner::f_gamma_exact(ModelKind::At1, s, sweep_ratio)?,
                phasefield::tuner::f_gamma(ModelKind::At2, s, sweep_ratio)?,
                phasefield::tuner::f_gamma_exact(ModelKind::At2, s, sweep_ratio)?,
            )?;
        }
    }
    let f_rho_path = out.join("f_rho_sweep.csv");
    {
        let mut f = std::io::BufWriter::new(std::fs::File::create(&f_rho_path)?);
        writeln!(f, "r[-],f_rho[-],f_rho_exact[-]")?;
        for k in 0..=60 {
            let r = 10f64.powf(0.5 + k as f64 * 0.1);
            writeln!(
                f,
                "{r:.17e},{:.17e},{:.17e}",
                phasefield::tuner::f_rho(r, sweep_ratio)?,
                phasefield::tuner::f_rho_exact(r, sweep_ratio)?,
            )?;
        }
    }

    // Cross-check one penalized profile against the finite-difference
    // oracle so a profiles run self-reports its own consistency.
    let oracle_err = {
        let p = profiles::gamma_linear(ell, half, 1e4)?;
        let sol = fd_oracle_refined(OracleKind::GammaLinear, ell, half, 1e4, 100)?;
        sol.iter()
            .map(|&(x, a)| (a - p.eval(x)).abs())
            .fold(0.0f64, f64::max)
    };

    if echo_csv {
        echo(&f_gamma_path)?;
    }
    Ok(format!(
        "wrote {} profile CSVs and 2 sweep CSVs to {}\noracle sup-error (linear, s = 1e4): {oracle_err:.3e}\n",
        written.len(),
        out.display()
    ))
}

// ------------------------------------------------------------------------ sen

fn run_sen_cmd(cfg: Option<&Config>, out: &Path, echo_csv: bool) -> Result<String> {
    let model = model_from(cfg, ModelKind::At2)?;
    let split = split_from(cfg, SplitKind::VolDev)?;
    let mut p = SenParams::desk_scale(model, split);
    p.material = material_from(cfg, p.material)?;
    p.tols = tols_from(cfg, p.tols)?;
    p.gamma = penalty_from(cfg, "irreversibility", true, p.gamma)?;
    if let Some(cfg) = cfg {
        p.a = cfg.get_f64("mesh", "a")?.unwrap_or(p.a);
        p.h_fine = cfg.get_f64("mesh", "h_fine")?.unwrap_or(p.h_fine);
        p.h_coarse = cfg.get_f64("mesh", "h_coarse")?.unwrap_or(p.h_coarse);
        p.band = cfg.get_f64("mesh", "band")?.unwrap_or(p.band);
        if let Some(n) = cfg.get_usize("schedule", "max_steps")? {
            p.schedule.steps.truncate(n);
        }
        if let Some(scale) = cfg.get_f64("schedule", "scale")? {
            for step in &mut p.schedule.steps {
                step.displacement *= scale;
            }
        }
    }
    p.mesh_file = mesh_file_from(cfg);

    let outcome = run_sen(&p)?;
    let steps_path = out.join("steps.csv");
    write_steps_csv(&steps_path, &outcome.records, "mm", "N/mm", "N*mm/mm")?;
    let mut meta = vec![
        "benchmark: single-edge-notched shear".into(),
        format!("model: {:?}, split: {:?}", p.model, p.split),
        format!(
            "material: E = {}, nu = {}, Gc = {}, l = {}",
            p.material.young_modulus, p.material.poisson_ratio, p.material.toughness,
            p.material.length_scale
        ),
        match p.gamma {
            Some(_) => format!(
                "irreversibility: gamma-penalty, resolved gamma = {:.17e}",
                outcome.resolved_gamma
            ),
            None => format!(
                "irreversibility: history field (resolved rho = {:.17e})",
                outcome.resolved_rho
            ),
        },
        format!(
            "mesh: {} nodes, {} triangles (a = {}, h_fine = {}, h_coarse = {}, band = {})",
            outcome.mesh.n_nodes(), outcome.mesh.n_triangles(), p.a, p.h_fine, p.h_coarse, p.band
        ),
        format!(
            "tolerances: tol_stag = {:e}, tol_nr = {:e}, max_stag = {}, max_nr = {}",
            p.tols.tol_stag, p.tols.tol_nr, p.tols.max_stag_iters, p.tols.max_nr_iters
        ),
        "assumption: the notch is a horizontal slit at mid-height running from the".into(),
        "  left edge to the center; the top edge is sheared in +x with its vertical".into(),
        "  component held at zero and the bottom edge fully fixed".into(),
    ];
    meta.extend(norm_definitions());
    write_meta(&out.join("meta.txt"), &meta)?;
    if echo_csv {
        echo(&steps_path)?;
    }
    let peak = outcome
        .records
        .iter()
        .map(|r| r.reaction.abs())
        .fold(0.0f64, f64::max);
    let last = outcome.records.last();
    Ok(format!(
        "wrote {} and meta.txt\nsteps: {}, peak |reaction| = {:.6e}, final reaction = {:.6e}\n",
        steps_path.display(),
        outcome.records.len(),
        peak,
        last.map_or(0.0, |r| r.reaction),
    ))
}

// -------------------------------------------------------------------- sneddon

fn run_sneddon_cmd(cfg: Option<&Config>, out: &Path, echo_csv: bool) -> Result<String> {
    let model = model_from(cfg, ModelKind::At2)?;
    let split = split_from(cfg, SplitKind::VolDev)?;
    let mut p = SneddonParams::reference(model, split);
    p.material = material_from(cfg, p.material)?;
    p.tols = tols_from(cfg, p.tols)?;
    if let Some(choice) = penalty_from(cfg, "irreversibility", false, Some(p.gamma))? {
        p.gamma = choice;
    }
    if let Some(choice) = penalty_from(cfg, "recovery", false, Some(p.rho))? {
        p.rho = choice;
    }
    if let Some(cfg) = cfg {
        p.a = cfg.get_f64("mesh", "a")?.unwrap_or(p.a);
        p.b = cfg.get_f64("mesh", "b")?.unwrap_or(p.b);
        p.l0 = cfg.get_f64("mesh", "l0")?.unwrap_or(p.l0);
        p.h_min = cfg.get_f64("mesh", "h_min")?.or(p.h_min);
        p.h_fine = cfg.get_f64("mesh", "h_fine")?.unwrap_or(p.h_fine);
        p.h_coarse = cfg.get_f64("mesh", "h_coarse")?.unwrap_or(p.h_coarse);
        p.band = cfg.get_f64("mesh", "band")?.unwrap_or(p.band);
        p.pressure = cfg.get_f64("load", "pressure")?.unwrap_or(p.pressure);
        p.stations = parse_list(Some(cfg), "load", "stations", &[])?;
    }
    p.mesh_file = mesh_file_from(cfg);

    let outcome = run_sneddon(&p)?;
    let cod_path = out.join("cod.csv");
    write_cod_csv(&cod_path, &outcome.cod, "length")?;
    let steps_path = out.join("steps.csv");
    write_steps_csv(&steps_path, &outcome.records, "pressure", "force", "energy")?;
    let overshoot =
        (outcome.recovery_surface_energy / p.material.toughness / (2.0 * p.l0) - 1.0) * 100.0;
    let mut meta = vec![
        "benchmark: pressurized interior crack".into(),
        format!("model: {:?}, split: {:?}", p.model, p.split),
        format!(
            "material: E = {}, nu = {}, Gc = {}, l = {}",
            p.material.young_modulus, p.material.poisson_ratio, p.material.toughness,
            p.material.length_scale
        ),
        format!("resolved gamma = {:.17e}", outcome.resolved_gamma),
        format!("resolved rho = {:.17e}", outcome.resolved_rho),
        format!(
            "mesh: {} nodes, {} triangles (a = {}, b = {}, l0 = {}, h_min = {}, h_fine = {}, band = {})",
            outcome.mesh.n_nodes(), outcome.mesh.n_triangles(), p.a, p.b, p.l0,
            p.h_min.unwrap_or(p.h_fine), p.h_fine, p.band
        ),
        format!("pressure = {}, stations = {}", p.pressure, if p.stations.is_empty() {
            default_stations(p.l0).len()
        } else {
            p.stations.len()
        }),
        format!(
            "recovered surface energy / Gc = {:.17e} (overshoot of 2*l0: {overshoot:.4} %)",
            outcome.recovery_surface_energy / p.material.toughness
        ),
        "cod column: phase-field opening -int u . grad(alpha) dy on vertical chords".into(),
        "cod_analytic column: plane-strain closed form for an infinite domain".into(),
    ];
    meta.extend(norm_definitions());
    write_meta(&out.join("meta.txt"), &meta)?;
    if echo_csv {
        echo(&cod_path)?;
    }
    let mid = outcome
        .cod
        .iter()
        .min_by(|a, b| a.0.abs().total_cmp(&b.0.abs()))
        .map(|&(_, c, a)| (c, a))
        .unwrap_or((0.0, 0.0));
    Ok(format!(
        "wrote {}, {} and meta.txt\nrecovery E_S/Gc = {:.6} (overshoot {overshoot:.3} %)\nCOD(0) = {:.6e}, analytic {:.6e}\n",
        cod_path.display(),
        steps_path.display(),
        outcome.recovery_surface_energy / p.material.toughness,
        mid.0,
        mid.1,
    ))
}
