//! Configuration-driven experiment runner behind the `bohm-vortex` binary.
//!
//! Every command reads one [`ExperimentConfig`], writes its data files into
//! an output directory and copies the normalized configuration next to
//! them as `config.toml`.

pub mod config;
mod svg;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::chaos::{
    detect_homoclinic, find_fixed_point_with, guess_grid, lyapunov_exponent, scan_transition, search_fixed_points,
    trace_manifold, Branch, FixedPointKind, FixedPointRecord, GuessOutcome, ManifoldParams, ManifoldPolyline,
    NewtonOptions, ScanParams, Stability,
};
use crate::integrate::{stroboscopic_section, IntegratorSettings, PeriodMap, SectionDataset};
use crate::pointvortex::PointVortexField;
use crate::velocity::{vortex_position, BohmField, PlanePoint, VelocityField};
use crate::wavefunction::SuperpositionState;
pub use config::{ConfigError, ExperimentConfig, ModelKind};
use svg::{data_bounds, Plot, PALETTE};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Section,
    VortexPath,
    FixedPoint,
    Manifolds,
    Lyapunov,
    Scan,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Section,
        Command::VortexPath,
        Command::FixedPoint,
        Command::Manifolds,
        Command::Lyapunov,
        Command::Scan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Section => "section",
            Command::VortexPath => "vortex-path",
            Command::FixedPoint => "fixed-point",
            Command::Manifolds => "manifolds",
            Command::Lyapunov => "lyapunov",
            Command::Scan => "scan",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("runtime error: {0}")]
    Runtime(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    /// 2 for configuration problems, 3 for everything that fails later.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 3,
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        match e {
            crate::Error::DegenerateState(_) | crate::Error::InvalidArgument(_) => {
                CliError::Config(ConfigError::new(e.code(), e.to_string()))
            }
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

pub fn load_config(path: &Path) -> CliResult<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|e| ConfigError::new("config", format!("{}: {e}", path.display())))?;
    Ok(ExperimentConfig::parse(&text)?)
}

pub fn run(command: Command, config: &ExperimentConfig, out: &Path) -> CliResult<()> {
    config.validate()?;
    fs::create_dir_all(out).map_err(|source| CliError::Io { path: out.to_path_buf(), source })?;
    write(out, "config.toml", &config.to_toml())?;
    match command {
        Command::Section => cmd_section(config, out),
        Command::VortexPath => cmd_vortex_path(config, out),
        Command::FixedPoint => cmd_fixed_point(config, out),
        Command::Manifolds => cmd_manifolds(config, out),
        Command::Lyapunov => cmd_lyapunov(config, out),
        Command::Scan => cmd_scan(config, out),
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> CliResult<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| CliError::Io { path, source })
}

fn json_text<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

/// 17 significant digits: exact round trip for doubles.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn build_field(config: &ExperimentConfig) -> CliResult<Box<dyn VelocityField>> {
    Ok(match config.model.kind {
        ModelKind::Oscillator => Box::new(BohmField::new(config.superposition()?)),
        ModelKind::PointVortex => Box::new(PointVortexField::new(config.vortex_path()?)),
    })
}

/// Newton solves and Jacobians need tighter integration than sections.
fn newton_settings(config: &ExperimentConfig) -> IntegratorSettings {
    let tight = IntegratorSettings::for_jacobian();
    IntegratorSettings {
        rel_tol: config.integrator.rel_tol.min(tight.rel_tol),
        abs_tol: config.integrator.abs_tol.min(tight.abs_tol),
        ..config.integrator
    }
}

fn newton_options(config: &ExperimentConfig) -> NewtonOptions {
    let f = &config.fixed_point;
    NewtonOptions { tol: f.newton_tol, max_iter: f.max_iter, fd_step: f.fd_step }
}

fn vortex_trace(field: &dyn VelocityField, samples: usize) -> Vec<PlanePoint> {
    let t0 = field.period();
    (0..=samples).filter_map(|k| field.vortex_position(t0 * k as f64 / samples as f64)).collect()
}

fn plot_for(config: &ExperimentConfig, points: &[PlanePoint], title: &str) -> Plot {
    let (bx, by) = data_bounds(points);
    Plot::new(config.plot.x_range.unwrap_or(bx), config.plot.y_range.unwrap_or(by), title)
}

fn section_csv(data: &SectionDataset) -> String {
    let mut s = String::from("seed_id,n,x,y,status\n");
    for (id, seed) in data.seeds.iter().enumerate() {
        for (n, p) in seed.points.iter().enumerate() {
            let _ = writeln!(s, "{id},{n},{},{},{}", num(p.x), num(p.y), seed.status.as_str());
        }
    }
    s
}

fn section_plot(config: &ExperimentConfig, data: &SectionDataset, field: &dyn VelocityField, title: &str) -> Plot {
    let all: Vec<PlanePoint> = data.seeds.iter().flat_map(|s| s.points.iter().copied()).collect();
    let mut plot = plot_for(config, &all, title);
    for (i, s) in data.seeds.iter().enumerate() {
        plot.points(&s.points, PALETTE[i % PALETTE.len()], 1.2);
    }
    let path = vortex_trace(field, 256);
    plot.polyline(&path, &[], "black", 1.0);
    plot
}

fn cmd_section(config: &ExperimentConfig, out: &Path) -> CliResult<()> {
    let field = build_field(config)?;
    let seeds = config.seed_points()?;
    let data = stroboscopic_section(field.as_ref(), &seeds, config.section.periods, &config.integrator)?;
    write(out, "section.csv", &section_csv(&data))?;
    let title = format!("stroboscopic section, {} seeds × {} periods", seeds.len(), config.section.periods);
    write(out, "section.svg", &section_plot(config, &data, field.as_ref(), &title).finish())
}

fn cmd_vortex_path(config: &ExperimentConfig, out: &Path) -> CliResult<()> {
    if config.model.kind != ModelKind::Oscillator {
        return Err(ConfigError::new("model.kind", "vortex-path needs the oscillator model").into());
    }
    let state = config.superposition()?;
    let n = config.vortex_path.samples;
    let sample = |s: &SuperpositionState| -> CliResult<Vec<(f64, PlanePoint)>> {
        (0..n)
            .map(|k| {
                let t = s.period() * k as f64 / n as f64;
                Ok((t, vortex_position(s, t)?))
            })
            .collect()
    };
    let main = sample(&state)?;
    let mut csv = String::from("t,x_v,y_v\n");
    for (t, p) in &main {
        let _ = writeln!(csv, "{},{},{}", num(*t), num(p.x), num(p.y));
    }
    write(out, "vortex.csv", &csv)?;

    let mut curves = vec![(state.a() / state.b(), main.iter().map(|s| s.1).collect::<Vec<_>>())];
    for &ratio in &config.vortex_path.overlay_ratios {
        let s = SuperpositionState::from_ratios(ratio, state.c() / state.b(), state.gamma1(), state.gamma2())
            .map_err(|e| ConfigError::new("vortex_path.overlay_ratios", e.to_string()))?;
        curves.push((ratio, sample(&s)?.into_iter().map(|s| s.1).collect()));
    }
    let all: Vec<PlanePoint> = curves.iter().flat_map(|c| c.1.iter().copied()).collect();
    let mut plot = plot_for(config, &all, "vortex path over one period");
    for (i, (ratio, pts)) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut closed = pts.clone();
        closed.push(pts[0]);
        plot.polyline(&closed, &[], color, 2.0);
        plot.points(&pts[..1], color, 3.0);
        plot.legend(i, color, &format!("a/b = {ratio}"));
    }
    write(out, "vortex.svg", &plot.finish())
}

#[derive(Serialize)]
struct GuessReport {
    guess: PlanePoint,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    location: Option<PlanePoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    classification: Option<FixedPointKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    message: Option<String>,
}

fn guess_reports(outcomes: &[GuessOutcome]) -> Vec<GuessReport> {
    outcomes
        .iter()
        .map(|o| match &o.result {
            Ok(r) => GuessReport {
                guess: o.guess,
                status: "CONVERGED",
                location: Some(r.location),
                classification: Some(r.classification),
                message: None,
            },
            Err(e) => GuessReport {
                guess: o.guess,
                status: e.code(),
                location: None,
                classification: None,
                message: Some(e.to_string()),
            },
        })
        .collect()
}

fn cmd_fixed_point(config: &ExperimentConfig, out: &Path) -> CliResult<()> {
    let field = build_field(config)?;
    let opts = newton_options(config);
    let fp = &config.fixed_point;
    let guesses: Vec<PlanePoint> = if fp.guesses.is_empty() {
        guess_grid(fp.grid_range[0], fp.grid_range[1], fp.grid_points)
    } else {
        fp.guesses.iter().map(|g| PlanePoint::new(g[0], g[1])).collect()
    };
    let map = PeriodMap::new(field.as_ref(), newton_settings(config));
    let (unique, outcomes) = search_fixed_points(&map, &guesses, &opts, fp.dedup_tol);
    let has_saddle = unique.iter().any(|r| r.classification == FixedPointKind::Saddle);
    // period-2 orbits are looked for only when R itself shows no saddle
    let period2 = (!has_saddle).then(|| {
        let (u2, o2) = search_fixed_points(&map.iterated(2), &guesses, &opts, fp.dedup_tol);
        json!({ "fixed_points": u2, "guesses": guess_reports(&o2) })
    });
    let report = json!({
        "map_period": field.period(),
        "newton_tol": fp.newton_tol,
        "fixed_points": unique,
        "guesses": guess_reports(&outcomes),
        "period_2": period2,
    });
    write(out, "fixed_points.json", &json_text(&report))
}

fn manifold_csv(lines: &[ManifoldPolyline]) -> String {
    let mut s = String::from("branch,index,x,y,level,gap\n");
    for m in lines {
        for (i, p) in m.points.iter().enumerate() {
            let gap = u8::from(m.gaps.contains(&i));
            let _ = writeln!(s, "{},{i},{},{},{},{gap}", m.branch.label(), num(p.x), num(p.y), m.levels[i]);
        }
    }
    s
}

fn find_saddle(config: &ExperimentConfig, field: &dyn VelocityField) -> CliResult<FixedPointRecord> {
    let g = config.manifolds.guess;
    let map = PeriodMap::new(field, newton_settings(config));
    let fp = find_fixed_point_with(&map, PlanePoint::new(g[0], g[1]), &newton_options(config))
        .map_err(|e| CliError::Runtime(format!("fixed point from guess ({}, {}): {e}", g[0], g[1])))?;
    if fp.classification != FixedPointKind::Saddle {
        return Err(CliError::Runtime(format!(
            "fixed point at ({}, {}) is {:?}, not a saddle",
            fp.location.x, fp.location.y, fp.classification
        )));
    }
    Ok(fp)
}

fn cmd_manifolds(config: &ExperimentConfig, out: &Path) -> CliResult<()> {
    let field = build_field(config)?;
    let fp = find_saddle(config, field.as_ref())?;
    let m = &config.manifolds;
    let params = ManifoldParams {
        seed_delta: m.seed_delta,
        max_arclength: m.max_arclength,
        max_spacing: m.max_spacing,
        max_levels: m.max_levels,
        ..Default::default()
    };
    let map = PeriodMap::new(field.as_ref(), config.integrator);
    let lines = Branch::ALL
        .par_iter()
        .map(|&b| trace_manifold(&map, &fp, b, &params))
        .collect::<crate::Result<Vec<_>>>()?;
    write(out, "manifolds.csv", &manifold_csv(&lines))?;

    let mut crossings = Vec::new();
    for u in lines.iter().filter(|l| l.branch.stability == Stability::Unstable) {
        for s in lines.iter().filter(|l| l.branch.stability == Stability::Stable) {
            for c in detect_homoclinic(s, u, m.transversality_tol) {
                crossings.push(json!({
                    "unstable_branch": u.branch.label(),
                    "stable_branch": s.branch.label(),
                    "location": c.location,
                    "angle": c.angle,
                    "unstable_segment": c.unstable_segment,
                    "stable_segment": c.stable_segment,
                }));
            }
        }
    }
    let max_angle = crossings.iter().filter_map(|c| c["angle"].as_f64()).fold(0.0_f64, f64::max);
    let report = json!({
        "fixed_point": fp,
        "seed_delta": m.seed_delta,
        "max_spacing": m.max_spacing,
        "transversality_tol": m.transversality_tol,
        "exclusion_radius": crate::chaos::manifold::EXCLUSION_FACTOR * m.seed_delta,
        "branches": lines.iter().map(|l| json!({
            "branch": l.branch.label(),
            "points": l.points.len(),
            "arclength": l.arclength,
            "gaps": l.gaps.len(),
        })).collect::<Vec<_>>(),
        "crossing_count": crossings.len(),
        "max_angle": max_angle,
        "crossings": crossings,
    });
    write(out, "homoclinic.json", &json_text(&report))?;

    let seeds = config.seed_points()?;
    let background = stroboscopic_section(field.as_ref(), &seeds, m.section_periods, &config.integrator)?;
    let curve_points: Vec<PlanePoint> = lines.iter().flat_map(|l| l.points.iter().copied()).collect();
    let (bx, by) = data_bounds(&curve_points);
    let mut plot = Plot::new(
        config.plot.x_range.unwrap_or(bx),
        config.plot.y_range.unwrap_or(by),
        "invariant manifolds of the saddle",
    );
    for s in &background.seeds {
        plot.points(&s.points, "#bbbbbb", 1.0);
    }
    for (i, l) in lines.iter().enumerate() {
        let color = if l.branch.stability == Stability::Unstable { "#d62728" } else { "#1f77b4" };
        plot.polyline(&l.points, &l.gaps, color, 1.0);
        plot.legend(i, color, l.branch.label());
    }
    plot.marker(fp.location, "black", "p0");
    write(out, "manifolds.svg", &plot.finish())
}

fn cmd_lyapunov(config: &ExperimentConfig, out: &Path) -> CliResult<()> {
    let field = build_field(config)?;
    let seeds = config.seed_points()?;
    let l = &config.lyapunov;
    let t0 = field.period();
    let results = seeds
        .par_iter()
        .map(|&s| lyapunov_exponent(field.as_ref(), s, l.periods as f64 * t0, l.renorm_periods * t0, &config.integrator))
        .collect::<crate::Result<Vec<_>>>()?;
    let mut csv = String::from("seed_id,x,y,lambda_per_time,lambda_per_period,time_covered,status,chaotic\n");
    let mut chaotic = 0;
    for (id, (s, r)) in seeds.iter().zip(&results).enumerate() {
        let is = r.per_period > l.threshold;
        chaotic += usize::from(is);
        let status = serde_json::to_value(r.status).expect("status serializes");
        let _ = writeln!(
            csv,
            "{id},{},{},{},{},{},{},{}",
            num(s.x),
            num(s.y),
            num(r.per_unit_time),
            num(r.per_period),
            num(r.time_covered),
            status.as_str().unwrap_or_default(),
            u8::from(is)
        );
    }
    write(out, "lyapunov.csv", &csv)?;
    let n = seeds.len().max(1) as f64;
    let report = json!({
        "threshold_per_period": l.threshold,
        "periods": l.periods,
        "renorm_interval": l.renorm_periods * t0,
        "shadow_separation": crate::chaos::lyapunov::SHADOW_SEPARATION,
        "seeds": seeds.len(),
        "chaotic_seeds": chaotic,
        "chaotic_fraction": chaotic as f64 / n,
        "mean_lambda_per_period": results.iter().map(|r| r.per_period).sum::<f64>() / n,
        "partial_results": results.iter().filter(|r| r.status != crate::chaos::LyapunovStatus::Complete).count(),
    });
    write(out, "lyapunov.json", &json_text(&report))
}

fn cmd_scan(config: &ExperimentConfig, out: &Path) -> CliResult<()> {
    if config.model.kind != ModelKind::Oscillator {
        return Err(ConfigError::new("model.kind", "scan needs the oscillator model").into());
    }
    let base = config.superposition()?;
    let states = config
        .scan
        .a_over_b
        .iter()
        .map(|&r| SuperpositionState::from_ratios(r, base.c() / base.b(), base.gamma1(), base.gamma2()))
        .collect::<crate::Result<Vec<_>>>()
        .map_err(|e| ConfigError::new("scan.a_over_b", e.to_string()))?;
    let seeds = config.seed_points()?;
    let params = ScanParams {
        lyapunov_periods: config.scan.periods,
        section_periods: config.section.periods,
        threshold: config.scan.threshold,
    };
    let summaries = scan_transition(&states, &seeds, &params, &config.integrator)?;

    let mut table = String::from("state_id,a_over_b,seeds,chaotic_seeds,chaotic_fraction,mean_lambda_per_period,threshold,periods\n");
    let mut per_seed = String::from("state_id,seed_id,x,y,lambda_per_period,status,chaotic\n");
    for (k, s) in summaries.iter().enumerate() {
        let _ = writeln!(
            table,
            "{k},{},{},{},{},{},{},{}",
            num(s.a_over_b),
            s.seeds.len(),
            s.seeds.iter().filter(|e| e.chaotic).count(),
            num(s.chaotic_fraction),
            num(s.mean_lambda),
            num(s.threshold),
            params.lyapunov_periods
        );
        for (id, e) in s.seeds.iter().enumerate() {
            let status = serde_json::to_value(e.lyapunov.status).expect("status serializes");
            let _ = writeln!(
                per_seed,
                "{k},{id},{},{},{},{},{}",
                num(e.seed.x),
                num(e.seed.y),
                num(e.lyapunov.per_period),
                status.as_str().unwrap_or_default(),
                u8::from(e.chaotic)
            );
        }
        write(out, &format!("section_{k}.csv"), &section_csv(&s.section))?;
        let field = BohmField::new(states[k]);
        let title = format!("a/b = {}: chaotic fraction {:.3}", s.a_over_b, s.chaotic_fraction);
        write(out, &format!("section_{k}.svg"), &section_plot(config, &s.section, &field, &title).finish())?;
    }
    write(out, "scan.csv", &table)?;
    write(out, "scan_seeds.csv", &per_seed)?;
    let report = json!({
        "threshold_per_period": params.threshold,
        "lyapunov_periods": params.lyapunov_periods,
        "section_periods": params.section_periods,
        "states": summaries.iter().map(|s| json!({
            "a_over_b": s.a_over_b,
            "chaotic_fraction": s.chaotic_fraction,
            "mean_lambda_per_period": s.mean_lambda,
        })).collect::<Vec<_>>(),
    });
    write(out, "scan.json", &json_text(&report))
}
