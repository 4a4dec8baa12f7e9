//! Executes one configured experiment and writes its report files into the
//! output directory.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use skewsim_core::attractor::{
    bernoulli_windows, bone_census, census_of_windows, classify_fiber, invariance_residual, targeted_zero_tail_windows,
    thickness_coverage, BoneCensus, ClassifyOptions,
};
use skewsim_core::ergodic::{correlation_decay, orbit_stability, pointwise_exponent, sup_norm_exponent};
use skewsim_core::measures::{
    graph_distance, graph_measure, hutchinson_distance, stationary_measure, stationary_measure_from, transfer_apply,
    DiscreteMeasure,
};
use skewsim_core::sampling::{mean_se, median, par_indexed};
use skewsim_core::system::{bony_perturbation_at_distance, dist_c2, probe_windows};
use skewsim_core::{check_conditions, SkewError, SkewSystem, SymbolWindow};

use crate::config::{Command, ExperimentConfig, SystemSpec};
use crate::error::{CliError, Context};
use crate::output::{digest, write_csv, write_file, write_json, Cell};
use crate::plot::{plot, PlotKind};

pub const TOOL: &str = "skewsim";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const REPORT_FILE: &str = "report.json";
pub const CONFIG_FILE: &str = "config.json";

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: ExperimentConfig,
    pub system: SkewSystem,
    /// SHA-256 of the compact JSON of `system`.
    pub system_digest: String,
    pub seed: u64,
    pub result: Value,
}

/// Output of a run: the report and every file written, in write order.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: Report,
    pub files: Vec<PathBuf>,
}

struct Sink {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Sink {
    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.files.push(p.clone());
        p
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: Vec<Vec<Cell>>) -> Result<PathBuf, CliError> {
        let p = self.path(name);
        write_csv(&p, header, rows)?;
        Ok(p)
    }

    fn svg(&mut self, name: &str, csv: &Path, kind: PlotKind) -> Result<(), CliError> {
        let svg = plot(csv, kind)?;
        let p = self.path(name);
        write_file(&p, &svg)
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("plain data serializes")
}

pub fn run(config: &ExperimentConfig) -> Result<RunOutput, CliError> {
    config.check()?;
    let system = config.system.resolve()?;
    fs::create_dir_all(&config.out).map_err(|e| CliError::io(format!("{}: {e}", config.out.display())))?;
    let mut sink = Sink {
        dir: config.out.clone(),
        files: Vec::new(),
    };
    let p = sink.path(CONFIG_FILE);
    write_json(&p, config)?;
    let result = match config.command {
        Command::CheckConditions => run_check(config, &system)?,
        Command::Graph => run_graph(config, &system, &mut sink)?,
        Command::Bones => run_bones(config, &system, &mut sink)?,
        Command::Thickness => run_thickness(config, &system, &mut sink)?,
        Command::Lyapunov => run_lyapunov(config, &system, &mut sink)?,
        Command::Stationary => run_stationary(config, &system, &mut sink)?,
        Command::Hutchinson => run_hutchinson(config)?,
        Command::GraphMeasure => run_graph_measure(config, &system, &mut sink)?,
        Command::GraphDistance => run_graph_distance(config, &system)?,
        Command::Stability => run_stability(config, &system, &mut sink)?,
        Command::Mixing => run_mixing(config, &system, &mut sink)?,
        Command::Sweep => run_sweep(config, &system, &mut sink)?,
    };
    let report = Report {
        tool: TOOL,
        version: VERSION,
        command: config.command.name(),
        config: config.clone(),
        system_digest: digest(&system),
        system,
        seed: config.seed,
        result,
    };
    let p = sink.path(REPORT_FILE);
    write_json(&p, &report)?;
    Ok(RunOutput {
        report,
        files: sink.files,
    })
}

fn compare_system(config: &ExperimentConfig) -> Result<SkewSystem, CliError> {
    config
        .compare
        .clone()
        .unwrap_or_else(|| SystemSpec::Preset("bony".into()))
        .resolve()
}

fn step_maps(system: &SkewSystem, what: &str) -> Result<Vec<skewsim_core::IntervalMap>, CliError> {
    system
        .step_maps()
        .map(<[_]>::to_vec)
        .ok_or(SkewError::NonStepSystem)
        .context(what)
}

fn run_check(config: &ExperimentConfig, system: &SkewSystem) -> Result<Value, CliError> {
    let report = check_conditions(system, config.params.grid).context("check-conditions")?;
    Ok(to_value(&report))
}

fn options(config: &ExperimentConfig) -> ClassifyOptions {
    ClassifyOptions {
        max_depth: config.params.depth,
        tol: config.params.tol,
        epsilon_bone: config.params.epsilon_bone,
    }
}

fn census_summary(c: &BoneCensus) -> Value {
    json!({
        "samples": c.samples,
        "points": c.points,
        "bones": c.bones,
        "indeterminate": c.indeterminate,
        "bone_fraction": c.bone_fraction,
        "epsilon_bone": c.epsilon_bone,
        "bone_examples": c.bone_examples,
    })
}

fn run_graph(config: &ExperimentConfig, system: &SkewSystem, sink: &mut Sink) -> Result<Value, CliError> {
    let p = &config.params;
    let windows = bernoulli_windows(system, p.samples, p.depth, config.seed);
    let census = census_of_windows(system, &windows, &options(config));
    let residuals = par_indexed(windows.len(), |i| {
        if census.rows[i].class == "point" {
            invariance_residual(system, &windows[i], p.depth).ok()
        } else {
            None
        }
    });
    let rows = census
        .rows
        .iter()
        .zip(&residuals)
        .map(|(r, res)| {
            vec![
                r.id.into(),
                windows[r.id].past_coordinate().into(),
                r.depth.into(),
                r.lo.into(),
                r.hi.into(),
                r.width.into(),
                r.class.as_str().into(),
                res.unwrap_or(f64::NAN).into(),
            ]
        })
        .collect();
    let csv = sink.csv(
        "graph.csv",
        &["id", "coordinate", "depth", "lo", "hi", "width", "class", "residual"],
        rows,
    )?;
    sink.svg("graph-scatter.svg", &csv, PlotKind::GraphScatter)?;
    let res: Vec<f64> = residuals.iter().flatten().copied().collect();
    let narrow = census
        .rows
        .iter()
        .filter(|r| r.class == "point" && r.width < p.tol)
        .count();
    let mut summary = census_summary(&census);
    summary["point_fraction"] = json!(census.points as f64 / census.samples.max(1) as f64);
    summary["narrow_points"] = json!(narrow);
    summary["residual_below_1e-8"] = json!(res.iter().filter(|&&r| r < 1e-8).count());
    summary["residual_max"] = json!(res.iter().copied().fold(0.0, f64::max));
    Ok(summary)
}

fn run_bones(config: &ExperimentConfig, system: &SkewSystem, sink: &mut Sink) -> Result<Value, CliError> {
    let p = &config.params;
    let opts = options(config);
    let random = bone_census(system, p.samples, p.depth, p.epsilon_bone, config.seed);
    let targeted_windows = targeted_zero_tail_windows(system.k, p.targeted_words, config.seed).context("bones")?;
    let targeted = census_of_windows(system, &targeted_windows, &opts);
    let zero = SymbolWindow::constant(system.k, 0).context("bones")?;
    let all_zero = classify_fiber(system, &zero, &opts).context("bones: all-zero window")?;
    let mut rows = Vec::new();
    for (family, census) in [("bernoulli", &random), ("targeted", &targeted)] {
        for r in &census.rows {
            rows.push(vec![
                family.into(),
                r.id.into(),
                r.depth.into(),
                r.lo.into(),
                r.hi.into(),
                r.width.into(),
                r.class.as_str().into(),
            ]);
        }
    }
    let csv = sink.csv("census.csv", &["family", "id", "depth", "lo", "hi", "width", "class"], rows)?;
    sink.svg("width-histogram.svg", &csv, PlotKind::WidthHistogram)?;
    Ok(json!({
        "bernoulli": census_summary(&random),
        "targeted": census_summary(&targeted),
        "all_zero": all_zero,
    }))
}

fn run_thickness(config: &ExperimentConfig, system: &SkewSystem, sink: &mut Sink) -> Result<Value, CliError> {
    let p = &config.params;
    let b = system
        .covering_interval()
        .ok_or_else(|| CliError::config("system metadata has no covering interval"))?;
    let record = thickness_coverage(system, b, p.grid_step, p.depth).context("thickness")?;
    let rows = record
        .points
        .iter()
        .map(|t| vec![t.x.into(), t.achieved.into(), t.width.into(), t.covered.into()])
        .collect();
    sink.csv("thickness.csv", &["x", "achieved", "width", "covered"], rows)?;
    let widths: Vec<f64> = record.points.iter().map(|t| t.width).collect();
    Ok(json!({
        "covering_interval": b,
        "grid_step": record.grid_step,
        "depth": record.depth,
        "coverage": record.coverage,
        "points": record.points.len(),
        "median_final_diameter": median(&widths),
    }))
}

fn run_lyapunov(config: &ExperimentConfig, system: &SkewSystem, sink: &mut Sink) -> Result<Value, CliError> {
    let p = &config.params;
    let sup = sup_norm_exponent(system, p.depth, p.x_grid, p.samples, config.seed).context("lyapunov: sup-norm")?;
    let pw = pointwise_exponent(system, p.depth, p.samples, config.seed).context("lyapunov: pointwise")?;
    let mut rows = Vec::new();
    for (name, e) in [("sup_norm", &sup), ("pointwise", &pw)] {
        for (i, v) in e.per_sample.iter().enumerate() {
            rows.push(vec![i.into(), name.into(), (*v).into(), e.depth.into()]);
        }
    }
    sink.csv("lyapunov.csv", &["id", "estimator", "estimate", "depth"], rows)?;
    let combined_se = (sup.standard_error.powi(2) + pw.standard_error.powi(2)).sqrt();
    let summary = |e: &skewsim_core::ergodic::ExponentEstimate| {
        json!({"mean": e.value, "standard_error": e.standard_error, "depth": e.depth, "samples": e.samples})
    };
    Ok(json!({
        "sup_norm": summary(&sup),
        "pointwise": summary(&pw),
        "combined_standard_error": combined_se,
    }))
}

fn histogram_weights(m: &DiscreteMeasure) -> &[f64] {
    match m {
        DiscreteMeasure::Histogram { weights } => weights,
        DiscreteMeasure::Atoms { .. } => &[],
    }
}

fn run_stationary(config: &ExperimentConfig, system: &SkewSystem, sink: &mut Sink) -> Result<Value, CliError> {
    let p = &config.params;
    let maps = step_maps(system, "stationary")?;
    let m = stationary_measure(&maps, p.bins, p.tol, p.max_iter).context("stationary")?;
    let restart = stationary_measure_from(&maps, &DiscreteMeasure::histogram_dirac(p.bins, 0.0), p.tol, p.max_iter)
        .context("stationary: restart")?;
    let image = transfer_apply(&m.measure, &maps).context("stationary: residual")?;
    let residual = hutchinson_distance(&image, &m.measure).context("stationary: residual")?;
    let agreement = hutchinson_distance(&m.measure, &restart.measure).context("stationary: restart")?;
    let h = 1.0 / p.bins as f64;
    let rows = histogram_weights(&m.measure)
        .iter()
        .enumerate()
        .map(|(i, &w)| vec![i.into(), ((i as f64 + 0.5) * h).into(), w.into()])
        .collect();
    sink.csv("stationary.csv", &["bin", "center", "weight"], rows)?;
    Ok(json!({
        "bins": p.bins,
        "iterations": m.iterations,
        "last_change": m.last_change,
        "residual": residual,
        "restart_iterations": restart.iterations,
        "restart_distance": agreement,
    }))
}

fn run_hutchinson(config: &ExperimentConfig) -> Result<Value, CliError> {
    let (mu, nu) = config.measures.as_ref().ok_or_else(|| CliError::Config {
        message: "hutchinson needs two measures".into(),
        offending_keys: vec!["measures".into()],
    })?;
    let d = hutchinson_distance(mu, nu).context("hutchinson")?;
    Ok(json!({ "distance": d }))
}

fn run_graph_measure(config: &ExperimentConfig, system: &SkewSystem, sink: &mut Sink) -> Result<Value, CliError> {
    let p = &config.params;
    let sample = graph_measure(system, p.samples, p.depth, config.seed).context("graph-measure")?;
    let rows = sample
        .points
        .iter()
        .map(|g| vec![g.id.into(), g.coordinate.into(), g.gamma.into()])
        .collect();
    let csv = sink.csv("graph_measure.csv", &["id", "coordinate", "gamma"], rows)?;
    sink.svg("graph-measure-scatter.svg", &csv, PlotKind::GraphScatter)?;
    let gammas: Vec<f64> = sample.points.iter().map(|g| g.gamma).collect();
    let (mean, se) = mean_se(&gammas);
    let mut out = json!({
        "samples": p.samples,
        "points": sample.points.len(),
        "bones": sample.bones,
        "indeterminate": sample.indeterminate,
        "mean": mean,
        "standard_error": se,
    });
    if let Some(maps) = system.step_maps() {
        let m = stationary_measure(maps, p.bins, 1e-10, p.max_iter).context("graph-measure: stationary")?;
        let marginal = sample.fiber_marginal().context("graph-measure")?;
        out["distance_to_stationary"] = json!(hutchinson_distance(&marginal, &m.measure).context("graph-measure")?);
    }
    Ok(out)
}

fn run_graph_distance(config: &ExperimentConfig, system: &SkewSystem) -> Result<Value, CliError> {
    let p = &config.params;
    let other = compare_system(config)?;
    let d = graph_distance(system, &other, p.samples, p.depth, config.seed).context("graph-distance")?;
    Ok(json!({ "compare_digest": digest(&other), "distance": d }))
}

fn run_stability(config: &ExperimentConfig, system: &SkewSystem, sink: &mut Sink) -> Result<Value, CliError> {
    let p = &config.params;
    let other = compare_system(config)?;
    let r = orbit_stability(system, &other, p.samples, p.horizon, p.epsilon, config.seed).context("stability")?;
    let rows = r
        .exceedance
        .iter()
        .enumerate()
        .map(|(i, &e)| vec![i.into(), e.into(), p.horizon.into()])
        .collect();
    sink.csv("stability.csv", &["id", "exceedance", "horizon"], rows)?;
    Ok(json!({
        "compare_digest": digest(&other),
        "epsilon": r.epsilon,
        "horizon": r.horizon,
        "median": r.median,
        "median_ci95": r.median_ci95,
        "mean": r.mean,
    }))
}

fn run_mixing(config: &ExperimentConfig, system: &SkewSystem, sink: &mut Sink) -> Result<Value, CliError> {
    let p = &config.params;
    let d = correlation_decay(system, p.depth, &p.lags, p.samples, config.seed).context("mixing")?;
    let rows = d
        .lags
        .iter()
        .map(|l| vec![l.lag.into(), l.covariance.into(), l.abs.into(), l.standard_error.into()])
        .collect();
    let csv = sink.csv("mixing.csv", &["lag", "covariance", "abs", "standard_error"], rows)?;
    sink.svg("decay-curve.svg", &csv, PlotKind::DecayCurve)?;
    Ok(to_value(&d))
}

/// Shape of the bony perturbation, read from the comparison system metadata.
fn bony_shape(other: &SkewSystem) -> Result<(usize, (f64, f64), f64), CliError> {
    let get = |key: &str| {
        other.metadata.get(key).copied().ok_or_else(|| CliError::Config {
            message: format!("comparison system lacks metadata `{key}`"),
            offending_keys: vec!["compare".into()],
        })
    };
    Ok((
        get("bony_radius")? as usize,
        (get("bony_u_lo")?, get("bony_u_hi")?),
        get("bony_transition")?,
    ))
}

fn run_sweep(config: &ExperimentConfig, system: &SkewSystem, sink: &mut Sink) -> Result<Value, CliError> {
    let p = &config.params;
    let (m, u, transition) = bony_shape(&compare_system(config)?)?;
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    for &delta in &p.deltas {
        let g = bony_perturbation_at_distance(system, m, u, transition, delta, p.grid).context("sweep")?;
        let s = orbit_stability(system, &g.system, p.samples, p.horizon, p.epsilon, config.seed).context("sweep")?;
        let d = graph_distance(system, &g.system, p.distance_samples, p.depth, config.seed).context("sweep")?;
        rows.push(vec![
            delta.into(),
            g.distance.into(),
            d.upper.into(),
            s.median.into(),
            d.lower.into(),
            d.upper_se.into(),
            s.median_ci95.0.into(),
            s.median_ci95.1.into(),
            s.mean.into(),
            g.scale.into(),
        ]);
        entries.push(json!({
            "delta": delta,
            "scale": g.scale,
            "dist_C2": g.distance,
            "graph_distance": d,
            "exceedance_median": s.median,
            "exceedance_median_ci95": s.median_ci95,
            "exceedance_mean": s.mean,
        }));
    }
    let csv = sink.csv(
        "sweep.csv",
        &[
            "delta",
            "dist_C2",
            "graph_distance_U",
            "exceedance_median",
            "graph_distance_L",
            "graph_distance_U_se",
            "exceedance_ci_lo",
            "exceedance_ci_hi",
            "exceedance_mean",
            "scale",
        ],
        rows,
    )?;
    sink.svg("sweep-lines.svg", &csv, PlotKind::SweepLines)?;

    // G = F as the zero-distance reference.
    let probes = probe_windows(&[system]).context("sweep: identity")?;
    let s = orbit_stability(system, system, p.samples, p.horizon, p.epsilon, config.seed).context("sweep: identity")?;
    let d = graph_distance(system, system, p.distance_samples, p.depth, config.seed).context("sweep: identity")?;
    Ok(json!({
        "radius": m,
        "u": u,
        "transition": transition,
        "rows": entries,
        "identity": {
            "dist_C2": dist_c2(system, system, &probes, p.grid).context("sweep: identity")?,
            "exceedance_median": s.median,
            "graph_distance_U": d.upper,
        },
    }))
}
