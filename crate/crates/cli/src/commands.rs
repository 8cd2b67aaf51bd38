use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use fosc::drive::{evolve_mode, CurrentProfile, DriveOptions, TimeSeries};
use fosc::field::{scale_report, ModeRegistry};
use fosc::nlcs::{build_nlcs, eigen_residual, resolution_of_identity_check, RESIDUAL_TARGET, TAIL_CONTRACT};
use fosc::ode::StepperOptions;
use fosc::spectrum::{
    analytic_spectrum, derive_params, solve_schrodinger, table1_report, PotentialKind, PotentialSpec,
};
use fosc::stats::{figure_series, run_sweep, FigureSeries, FixedParams, SweepVariable};
use fosc::C64;
use rayon::prelude::*;

use crate::config::{config_hash, RunConfig};
use crate::output::{dec8, sig, write_atomic, Csv};
use crate::{CliError, Command, ProfileKind, SpectrumKind};

fn header(name: &str, cfg: &RunConfig, args: &BTreeMap<String, String>) -> String {
    let mut s = format!("fosc {name} config_sha256={}", config_hash(cfg, args));
    for (k, v) in &cfg.tolerances {
        s.push_str(&format!(" tol.{k}={v:e}"));
    }
    s.push_str(&format!(" residual_target={RESIDUAL_TARGET:e} tail_contract={TAIL_CONTRACT:e}"));
    s
}

fn args(pairs: &[(&str, String)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn require_a(flag: Option<f64>, cfg: &RunConfig) -> Result<f64, CliError> {
    flag.or(cfg.a).ok_or_else(|| CliError::Usage("missing well half-width: pass --a or set a = ... in the config".into()))
}

fn finish(cfg: &RunConfig, file: &str, csv: &Csv) -> Result<PathBuf, CliError> {
    write_atomic(&cfg.output_dir, file, &csv.render())
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", cfg.output_dir.join(file).display())))
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(";")
}

pub fn dispatch(cmd: &Command, cfg: &RunConfig) -> Result<PathBuf, CliError> {
    match cmd {
        Command::Spectrum { kind, levels, a, grid_points } => spectrum(cfg, *kind, *levels, *a, *grid_points),
        Command::Table1 { grid_points } => table1(cfg, *grid_points),
        Command::Fig { which, points, a, beta_sq, phi } => fig(cfg, *which, *points, a, beta_sq, phi),
        Command::Scales { n_max, a } => scales(cfg, *n_max, *a),
        Command::State { a, beta_abs, beta_phase } => state(cfg, *a, *beta_abs, *beta_phase),
        Command::Identity { a, n_max, panels } => identity(cfg, *a, *n_max, *panels),
        Command::Drive { profile, a, amplitude, duration, charge, velocity, series, modes, t_final, samples, volume } => {
            let spec = DriveSpec {
                profile: *profile,
                a: require_a(*a, cfg)?,
                amplitude: parse_complex(amplitude)?,
                duration: *duration,
                charge: *charge,
                velocity: *velocity,
                series: series.clone(),
                modes: *modes,
                t_final: *t_final,
                samples: *samples,
                volume: *volume,
            };
            drive(cfg, &spec)
        }
    }
}

fn spectrum(cfg: &RunConfig, kind: SpectrumKind, levels: usize, a: Option<f64>, grid: usize) -> Result<PathBuf, CliError> {
    let a = require_a(a, cfg)?;
    if levels == 0 {
        return Err(CliError::Usage("--levels must be >= 1".into()));
    }
    let k = cfg.m * cfg.omega * cfg.omega;
    let result = match kind {
        SpectrumKind::Model => analytic_spectrum(&derive_params(a, cfg.m, cfg.omega)?, levels),
        SpectrumKind::ModelFd => solve_schrodinger(&PotentialSpec::new(PotentialKind::ModelTan, a, k, cfg.m)?, levels, grid)?,
        SpectrumKind::Hardwall => {
            solve_schrodinger(&PotentialSpec::new(PotentialKind::HardWallHo, a, k, cfg.m)?, levels, grid)?
        }
    };
    let kind_name = match kind {
        SpectrumKind::Model => "model",
        SpectrumKind::ModelFd => "model-fd",
        SpectrumKind::Hardwall => "hardwall",
    };
    let mut cmd = vec![("kind", kind_name.to_string()), ("levels", levels.to_string()), ("a", format!("{a:e}"))];
    if kind != SpectrumKind::Model {
        cmd.push(("grid_points", grid.to_string()));
    }
    let mut csv = Csv::new(header("spectrum", cfg, &args(&cmd)), &["n", "energy", "error_estimate"]);
    for (n, e) in result.levels.iter().enumerate() {
        let est = result.richardson_error_estimate.as_ref().map_or(0.0, |v| v[n]);
        csv.push(vec![n.to_string(), sig(*e), sig(est)]);
    }
    finish(cfg, "spectrum.csv", &csv)
}

fn table1(cfg: &RunConfig, grid: usize) -> Result<PathBuf, CliError> {
    let rows = table1_report(grid)?;
    let cols = ["state", "a", "analytic", "fd_model", "fd_hardwall", "ref_model", "ref_numeric", "dev_model", "dev_numeric"];
    let mut csv = Csv::new(header("table1", cfg, &args(&[("grid_points", grid.to_string())])), &cols);
    for r in &rows {
        csv.push(vec![
            r.state.to_string(),
            dec8(r.a),
            dec8(r.analytic),
            dec8(r.fd_model),
            dec8(r.fd_hardwall),
            dec8(r.ref_model),
            dec8(r.ref_numeric),
            dec8(r.dev_model()),
            dec8(r.dev_numeric()),
        ]);
    }
    finish(cfg, "table1.csv", &csv)
}

fn single(name: &str, v: &[f64]) -> Result<Option<f64>, CliError> {
    match v {
        [] => Ok(None),
        [x] => Ok(Some(*x)),
        _ => Err(CliError::Usage(format!("--{name} takes a single value for this figure"))),
    }
}

fn fig(cfg: &RunConfig, which: u8, points: usize, a: &[f64], beta_sq: &[f64], phi: &[f64]) -> Result<PathBuf, CliError> {
    let base = FixedParams { m: cfg.m, omega: cfg.omega, beta_phase_deg: cfg.beta_phase_deg, ..FixedParams::default() };
    let mut series = figure_series(which, points, base)?;
    let template = series[0].clone();
    // The series variable accepts a list; the others fix a single value.
    let (series_values, fixed_flags): (&[f64], [(&str, &[f64]); 2]) = match template.series_name {
        "beta_sq" => (beta_sq, [("a", a), ("phi", phi)]),
        "a_over_l0" => (a, [("beta-sq", beta_sq), ("phi", phi)]),
        _ => (phi, [("a", a), ("beta-sq", beta_sq)]),
    };
    if !series_values.is_empty() {
        series = series_values
            .iter()
            .map(|&v| {
                let mut s = FigureSeries { series_value: v, ..template.clone() };
                match s.series_name {
                    "beta_sq" => s.spec.fixed.beta_sq = v,
                    "a_over_l0" => s.spec.fixed.a_over_l0 = v,
                    _ => s.spec.fixed.phi_deg = v,
                }
                s
            })
            .collect();
    }
    for (flag, values) in fixed_flags {
        let Some(v) = single(flag, values)? else { continue };
        let swept = match template.spec.variable {
            SweepVariable::AOverL0 => "a",
            SweepVariable::Phi => "phi",
            SweepVariable::BetaSq => "beta-sq",
        };
        if flag == swept {
            return Err(CliError::Usage(format!("--{flag} is the x axis of figure {which}")));
        }
        for s in &mut series {
            match flag {
                "a" => s.spec.fixed.a_over_l0 = v,
                "phi" => s.spec.fixed.phi_deg = v,
                _ => s.spec.fixed.beta_sq = v,
            }
        }
    }

    let results: Vec<_> = series.iter().map(|s| run_sweep(&s.spec)).collect::<Result<_, _>>()?;
    let x_name = template.spec.variable.name();
    let obs_name = template.spec.observable.name();
    let cmd = args(&[
        ("which", which.to_string()),
        ("points", points.to_string()),
        ("series", fmt_list(&series.iter().map(|s| s.series_value).collect::<Vec<_>>())),
        ("fixed", format!("{:?}", series.iter().map(|s| s.spec.fixed).collect::<Vec<_>>())),
    ]);
    let mut csv = Csv::new(header("fig", cfg, &cmd), &[template.series_name, x_name, obs_name, "dim", "residual"]);
    for (s, rows) in series.iter().zip(&results) {
        for r in rows {
            csv.push(vec![sig(s.series_value), sig(r.x), sig(r.value), r.dim.to_string(), sig(r.residual)]);
        }
    }
    finish(cfg, &format!("fig{which}.csv"), &csv)
}

fn scales(cfg: &RunConfig, n_max: usize, a: Option<f64>) -> Result<PathBuf, CliError> {
    let a = require_a(a, cfg)?;
    let f = derive_params(a, cfg.m, cfg.omega)?.deformation();
    let rep = scale_report(a, &f, n_max);
    let cmd = args(&[("a", format!("{a:e}")), ("n_max", n_max.to_string())]);
    let mut csv = Csv::new(
        header("scales", cfg, &cmd),
        &["a", "gamma", "alpha", "propagator", "n", "ln_smatrix", "smatrix"],
    );
    for row in &rep.rows {
        csv.push(vec![
            sig(rep.a),
            sig(rep.gamma),
            sig(rep.alpha),
            sig(rep.propagator),
            row.n.to_string(),
            sig(row.smatrix.ln_value),
            sig(row.smatrix.value()),
        ]);
    }
    finish(cfg, "scales.csv", &csv)
}

fn state(cfg: &RunConfig, a: Option<f64>, beta_abs: Option<f64>, beta_phase: Option<f64>) -> Result<PathBuf, CliError> {
    let a = require_a(a, cfg)?;
    let r = beta_abs.unwrap_or(cfg.beta_abs);
    let phase = beta_phase.unwrap_or(cfg.beta_phase_deg);
    let f = derive_params(a, cfg.m, cfg.omega)?.deformation();
    let beta = C64::from_polar(r, phase.to_radians());
    let s = build_nlcs(&f, beta)?;
    if s.dim() > cfg.fock_dim_cap {
        return Err(CliError::Numerical(format!(
            "state needs {} levels, above fock_dim_cap = {}",
            s.dim(),
            cfg.fock_dim_cap
        )));
    }
    let residual = eigen_residual(&f, &s, beta)?;
    let cmd = args(&[("a", format!("{a:e}")), ("beta_abs", format!("{r:e}")), ("beta_phase_deg", format!("{phase:e}"))]);
    let comment = format!("{} eigen_residual={}", header("state", cfg, &cmd), sig(residual));
    let mut csv = Csv::new(comment, &["n", "re", "im"]);
    for (n, c) in s.coefficients().iter().enumerate() {
        csv.push(vec![n.to_string(), sig(c.re), sig(c.im)]);
    }
    finish(cfg, "state.csv", &csv)
}

fn identity(cfg: &RunConfig, a: Option<f64>, n_max: usize, panels: usize) -> Result<PathBuf, CliError> {
    let a = require_a(a, cfg)?;
    let f = derive_params(a, cfg.m, cfg.omega)?.deformation();
    let rows = resolution_of_identity_check(&f, n_max, panels)?;
    let cmd = args(&[("a", format!("{a:e}")), ("n_max", n_max.to_string()), ("panels", panels.to_string())]);
    let mut csv = Csv::new(header("identity", cfg, &cmd), &["n", "order", "power", "value", "deviation"]);
    for r in &rows {
        csv.push(vec![r.n.to_string(), sig(r.order), sig(r.power), sig(r.value), sig(r.deviation)]);
    }
    finish(cfg, "identity.csv", &csv)
}

fn parse_complex(s: &str) -> Result<C64, CliError> {
    let bad = || CliError::Usage(format!("amplitude must be 're' or 're,im', got '{s}'"));
    let mut parts = s.split(',').map(|p| p.trim().parse::<f64>());
    let re = parts.next().ok_or_else(bad)?.map_err(|_| bad())?;
    let im = match parts.next() {
        Some(v) => v.map_err(|_| bad())?,
        None => 0.0,
    };
    if parts.next().is_some() {
        return Err(bad());
    }
    Ok(C64::new(re, im))
}

/// Read `k,t,re,im` rows into one series per mode.
fn read_series(path: &Path) -> Result<Vec<(usize, TimeSeries)>, CliError> {
    let usage = |msg: String| CliError::Usage(format!("{}: {msg}", path.display()));
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| usage(e.to_string()))?;
    let mut grouped: BTreeMap<usize, (Vec<f64>, Vec<C64>)> = BTreeMap::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| usage(e.to_string()))?;
        if rec.len() != 4 {
            return Err(usage(format!("expected 4 columns k,t,re,im, got {}", rec.len())));
        }
        let k: usize = rec[0].parse().map_err(|_| usage(format!("bad mode index '{}'", &rec[0])))?;
        let nums: Vec<f64> = (1..4)
            .map(|i| rec[i].parse::<f64>().map_err(|_| usage(format!("bad number '{}'", &rec[i]))))
            .collect::<Result<_, _>>()?;
        let entry = grouped.entry(k).or_default();
        entry.0.push(nums[0]);
        entry.1.push(C64::new(nums[1], nums[2]));
    }
    if grouped.is_empty() {
        return Err(usage("no samples".into()));
    }
    grouped.into_iter().map(|(k, (t, v))| Ok((k, TimeSeries::new(t, v)?))).collect()
}

struct DriveSpec {
    profile: ProfileKind,
    a: f64,
    amplitude: C64,
    duration: f64,
    charge: f64,
    velocity: f64,
    series: Option<PathBuf>,
    modes: usize,
    t_final: Option<f64>,
    samples: usize,
    volume: Option<f64>,
}

fn drive(cfg: &RunConfig, spec: &DriveSpec) -> Result<PathBuf, CliError> {
    if spec.samples < 1 {
        return Err(CliError::Usage("--samples must be >= 1".into()));
    }
    let current = match spec.profile {
        ProfileKind::Rectangular => CurrentProfile::Rectangular { amplitude: spec.amplitude, duration: spec.duration },
        ProfileKind::Resonant => CurrentProfile::Resonant { amplitude: spec.amplitude, duration: spec.duration },
        ProfileKind::PointCharge => {
            CurrentProfile::PointCharge { charge: spec.charge, velocity: spec.velocity, half_width: spec.a }
        }
        ProfileKind::Tabulated => {
            let path = spec.series.as_ref().ok_or_else(|| CliError::Usage("tabulated profile needs --series".into()))?;
            CurrentProfile::Tabulated(read_series(path)?)
        }
    };
    current.validate()?;
    let f = derive_params(spec.a, cfg.m, cfg.omega)?.deformation();
    let mut registry = ModeRegistry::sine_modes(spec.modes, spec.a, cfg.fock_dim_cap, f)?;
    if let Some(v) = spec.volume {
        if !(v > 0.0 && v.is_finite()) {
            return Err(CliError::Usage(format!("--volume must be positive, got {v}")));
        }
        registry.volume = v;
    }
    let windows: Vec<(f64, f64)> = registry.modes.iter().map(|m| current.window(m)).collect();
    let t_start = windows.iter().map(|w| w.0).fold(f64::INFINITY, f64::min);
    let t_final = spec.t_final.unwrap_or_else(|| windows.iter().map(|w| w.1).fold(f64::NEG_INFINITY, f64::max));
    if !t_final.is_finite() {
        return Err(CliError::Usage("--t-final must be finite".into()));
    }
    let times: Vec<f64> = if spec.samples == 1 {
        vec![t_final]
    } else {
        (0..spec.samples).map(|i| t_start + (t_final - t_start) * i as f64 / (spec.samples - 1) as f64).collect()
    };
    let opts = DriveOptions {
        stepper: StepperOptions { rel_tol: cfg.tol("ode_rel"), abs_tol: cfg.tol("ode_abs"), ..StepperOptions::default() },
    };
    let jobs: Vec<(usize, f64)> = (0..registry.modes.len()).flat_map(|i| times.iter().map(move |&t| (i, t))).collect();
    let results = jobs
        .par_iter()
        .map(|&(i, t)| evolve_mode(&registry.modes[i], &current, &registry.deformation, registry.volume, t, opts))
        .collect::<Result<Vec<_>, _>>()?;

    let profile_name = format!("{:?}", spec.profile).to_lowercase();
    let cmd = args(&[
        ("profile", profile_name),
        ("a", format!("{:e}", spec.a)),
        ("amplitude", format!("{:e},{:e}", spec.amplitude.re, spec.amplitude.im)),
        ("duration", format!("{:e}", spec.duration)),
        ("charge", format!("{:e}", spec.charge)),
        ("velocity", format!("{:e}", spec.velocity)),
        ("series", format!("{:?}", current)),
        ("modes", spec.modes.to_string()),
        ("t_final", format!("{t_final:e}")),
        ("samples", spec.samples.to_string()),
        ("volume", format!("{:e}", registry.volume)),
    ]);
    let mut csv = Csv::new(header("drive", cfg, &cmd), &["k", "t", "beta_re", "beta_im", "fidelity", "infidelity", "norm_drift"]);
    for (&(i, t), r) in jobs.iter().zip(&results) {
        csv.push(vec![
            registry.modes[i].k_index.to_string(),
            sig(t),
            sig(r.beta.re),
            sig(r.beta.im),
            sig(r.fidelity),
            sig(1.0 - r.fidelity),
            sig(r.norm_drift),
        ]);
    }
    finish(cfg, "drive.csv", &csv)
}
