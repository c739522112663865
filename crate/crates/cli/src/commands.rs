//! The four scenario commands. Each writes its files into the output
//! directory and returns a JSON summary plus the list of failed checks.

use std::path::Path;

use log::info;
use serde_json::{json, Value};

use subdiff_core::assembly::{InterfaceMode, MediumSpec, Phase};
use subdiff_core::fracops::CorrectionSet;
use subdiff_core::homogenize::{run_cell_problem, wood_cell_run, CellProblemSpec, CellStop, EffectiveTensorSeries, WoodConstants, WoodScenario};
use subdiff_core::layered::LayeredOracle;
use subdiff_core::mesh::{read_msh, Mesh, Morphology};
use subdiff_core::stepper::SteadyRule;
use subdiff_core::studies::{convergence_study, profile_gap, strip_profiles, StripCase};

use crate::config::{
    ConvergenceConfig, HomogenizeConfig, InterfaceKind, LayeredConfig, MorphologyKind, TensorExpect, WoodConfig,
};
use crate::error::CliError;
use crate::output::{num, opt, write_json, write_vtk, Table};

pub struct Outcome {
    pub summary: Value,
    pub failures: Vec<String>,
}

fn load(path: &Path) -> Result<Mesh, CliError> {
    info!("reading {}", path.display());
    Ok(read_msh(path)?)
}

fn within(name: &str, got: f64, want: f64, rel: f64, failures: &mut Vec<String>) {
    if !((got - want).abs() <= rel * want.abs()) {
        failures.push(format!("{name} = {got:.6e}, expected {want:.6e} within {rel:e} relative"));
    }
}

pub fn convergence(cfg: &ConvergenceConfig, out: &Path) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let meshes: Vec<Mesh> = cfg.meshes.iter().map(|p| load(p)).collect::<Result<_, _>>()?;
    let corrected = match cfg.m {
        Some(m) => CorrectionSet::truncated(cfg.gamma, m),
        None => CorrectionSet::for_order(cfg.gamma),
    }
    .map_err(|e| CliError::Config(e.to_string()))?;
    let mut variants = vec![("corrected", corrected)];
    if cfg.uncorrected {
        variants.push(("uncorrected", CorrectionSet::none()));
    }
    let mut table = Table::new("convergence", cfg, &["variant", "h", "nodes", "error", "order"])?;
    let mut summary = serde_json::Map::new();
    let mut finest = Vec::new();
    for (name, set) in &variants {
        info!("{name}: gamma {} with {} correction terms", cfg.gamma, set.len());
        let study = convergence_study(&meshes, cfg.gamma, set, cfg.tau, cfg.t_final)?;
        for r in &study.rows {
            table.push(vec![name.to_string(), num(r.h), r.nodes.to_string(), num(r.error), opt(r.order)]);
        }
        let fitted = if study.rows.len() > 1 { Some(study.fitted_order()) } else { None };
        let last = study.rows.last().map(|r| r.error).unwrap_or(f64::NAN);
        finest.push((*name, last, fitted));
        summary.insert(
            name.to_string(),
            json!({ "corrections": study.corrections, "finest_error": last, "fitted_order": fitted }),
        );
    }
    table.write(&out.join("convergence.csv"))?;
    summary.insert("config".into(), serde_json::to_value(cfg)?);
    write_json(&out.join("convergence.json"), &summary)?;

    let mut failures = Vec::new();
    if let Some(e) = &cfg.expect {
        for (name, err, fitted) in &finest {
            let want = if *name == "corrected" { e.error } else { e.uncorrected_error };
            if let Some(w) = want {
                within(&format!("{name} finest error"), *err, w, e.rel_tol, &mut failures);
            }
            if *name == "corrected" {
                let p = fitted.unwrap_or(f64::NAN);
                if e.order_min.is_some_and(|lo| !(p >= lo)) || e.order_max.is_some_and(|hi| !(p <= hi)) {
                    failures.push(format!("fitted order {p:.3} outside [{:?}, {:?}]", e.order_min, e.order_max));
                }
            }
        }
    }
    Ok(Outcome { summary: Value::Object(summary), failures })
}

fn strip_case(cfg: &LayeredConfig, pair: [f64; 2]) -> StripCase {
    let mut case = StripCase::reference(pair[0], pair[1]);
    case.inclusion.0 = cfg.d_inclusion;
    case.matrix.0 = cfg.d_matrix;
    case.jump = cfg.jump;
    case.u0 = cfg.u0;
    case.tau = cfg.tau;
    case.probe_y = cfg.probe_y;
    case.t_final = *cfg.output_times.last().expect("validated");
    if cfg.interface == InterfaceKind::Classical {
        case.interface = InterfaceMode::ClassicalFlux;
    }
    case
}

fn pair_label(pair: [f64; 2]) -> String {
    format!("g{}_{}", pair[0], pair[1])
}

pub fn layered(cfg: &LayeredConfig, out: &Path) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let mesh = load(&cfg.mesh)?;
    let b = mesh.bbox();
    let mass_scale = (cfg.u0.abs() * (b[2] - b[0]) * (b[3] - b[1])).max(f64::MIN_POSITIVE);
    let mut failures = Vec::new();
    let mut results = Vec::new();
    let mut balance = Table::new("layered-mass", cfg, &["pair", "time", "fvm_mean", "reference_mean"])?;
    for &pair in &cfg.pairs {
        let case = strip_case(cfg, pair);
        let label = pair_label(pair);
        info!("pair {label}: {:?} interface", cfg.interface);
        let profiles = strip_profiles(&mesh, &case, &cfg.output_times)?;
        let (reference, gap_kind): (Vec<Vec<f64>>, &str) = match cfg.interface {
            InterfaceKind::Rl => {
                let oracle = LayeredOracle::new(case.layered_spec()).map_err(|e| CliError::Solver(e.to_string()))?;
                let refs = profiles
                    .iter()
                    .map(|p| oracle.profile(&p.x, p.run.time))
                    .collect::<Result<_, _>>()
                    .map_err(|e| CliError::Solver(e.to_string()))?;
                for p in &profiles {
                    let m = oracle.mass_balance(p.run.time).map_err(|e| CliError::Solver(e.to_string()))?;
                    balance.push(vec![label.clone(), num(p.run.time), num(p.mean), num(m)]);
                }
                (refs, "absolute")
            }
            InterfaceKind::Classical => {
                let steady = StripCase {
                    tau: 1e-2,
                    t_final: 50.0,
                    interface: InterfaceMode::FractionalFlux,
                    corrections: CorrectionSet::none(),
                    inclusion: (case.inclusion.0, 1.0),
                    matrix: (case.matrix.0, 1.0),
                    ..case.clone()
                };
                let reference = strip_profiles(&mesh, &steady, &[steady.t_final])?.pop().expect("one snapshot");
                for p in &profiles {
                    balance.push(vec![label.clone(), num(p.run.time), num(p.mean), num(reference.mean)]);
                }
                (vec![reference.values; profiles.len()], "relative")
            }
        };
        let mut table = Table::new("layered", &json!({ "pair": pair, "layered": cfg }), &["time", "x", "fvm", "reference"])?;
        for (p, r) in profiles.iter().zip(&reference) {
            for ((x, v), w) in p.x.iter().zip(&p.values).zip(r) {
                table.push(vec![num(p.run.time), num(*x), num(*v), num(*w)]);
            }
        }
        table.write(&out.join(format!("layered_{label}.csv")))?;
        let last = profiles.last().expect("validated");
        let r = reference.last().expect("validated");
        let gap = match cfg.interface {
            InterfaceKind::Rl => last.values.iter().zip(r).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max),
            InterfaceKind::Classical => profile_gap(&last.values, r),
        };
        info!("pair {label}: max gap {gap:.3e} ({gap_kind})");
        if let Some(e) = &cfg.expect {
            if !(gap <= e.max_gap) {
                failures.push(format!("pair {label}: gap {gap:.3e} above {:.3e}", e.max_gap));
            }
        }
        results.push(json!({
            "pair": pair,
            "time": last.run.time,
            "max_gap": gap,
            "gap_kind": gap_kind,
            "mass_drift": profiles.iter().map(|p| p.run.mass_drift).fold(0.0, f64::max) / mass_scale,
        }));
    }
    balance.write(&out.join("layered_mass.csv"))?;
    let summary = json!({ "pairs": results, "config": cfg });
    write_json(&out.join("layered.json"), &summary)?;
    Ok(Outcome { summary, failures })
}

fn stop_rule(t_final: Option<f64>, tol: f64, window: usize, max_steps: usize) -> CellStop {
    match t_final {
        Some(t) => CellStop { steady: None, t_final: Some(t), max_steps },
        None => CellStop { steady: Some(SteadyRule { tol, window }), t_final: None, max_steps },
    }
}

fn tensor_table(schema: &str, cfg: &impl serde::Serialize, series: &EffectiveTensorSeries) -> Result<Table, CliError> {
    let mut table = Table::new(schema, cfg, &["time", "D_bx", "D_bxy", "D_byx", "D_by", "K1", "K2"])?;
    let (k1, k2) = series.bounds;
    for (t, d) in series.times.iter().zip(&series.tensors) {
        table.push(vec![num(*t), num(d[0][0]), num(d[0][1]), num(d[1][0]), num(d[1][1]), num(k1), num(k2)]);
    }
    Ok(table)
}

fn series_summary(series: &EffectiveTensorSeries) -> Value {
    let d = series.final_tensor;
    json!({
        "time": series.times.last(),
        "steps": series.steps,
        "steady": series.steady,
        "D_bx": d[0][0],
        "D_bxy": d[0][1],
        "D_byx": d[1][0],
        "D_by": d[1][1],
        "K1": series.bounds.0,
        "K2": series.bounds.1,
        "inclusion_fraction": series.inclusion_fraction,
        "mass_drift": series.mass_drift,
    })
}

fn check_tensor(series: &EffectiveTensorSeries, e: &TensorExpect) -> Vec<String> {
    let mut failures = Vec::new();
    let d = series.final_tensor;
    for (name, got, want) in [("D_bx", d[0][0], e.dbx), ("D_by", d[1][1], e.dby), ("D_bxy", d[0][1], e.dbxy)] {
        if let Some(w) = want {
            within(name, got, w, e.rel_tol, &mut failures);
        }
    }
    let (k1, k2) = series.bounds;
    for (name, v) in [("D_bx", d[0][0]), ("D_by", d[1][1])] {
        if e.within_bounds && !(v >= k1 - 1e-3 && v <= k2 + 1e-3) {
            failures.push(format!("{name} = {v:.6} outside [{k1:.6}, {k2:.6}]"));
        }
        if e.below_series && !(v < k1 * (1.0 - 1e-3)) {
            failures.push(format!("{name} = {v:.6} not below the series bound {k1:.6}"));
        }
    }
    failures
}

pub fn homogenize(cfg: &HomogenizeConfig, out: &Path) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let mesh = load(&cfg.mesh)?;
    let morphology = match cfg.morphology {
        MorphologyKind::Rect => Morphology::strip(),
        MorphologyKind::Circle => Morphology::disc(),
        MorphologyKind::Lshape => Morphology::l_shape(),
        MorphologyKind::Tagged => Morphology::Tagged { inclusion_tag: cfg.inclusion_tag },
    };
    let medium = MediumSpec::binary(
        Phase::new(cfg.ratio * cfg.d_matrix, 1.0 - cfg.alpha1),
        Phase::new(cfg.d_matrix, 1.0 - cfg.alpha2),
    );
    let mut spec = CellProblemSpec::new(morphology, medium, cfg.tau);
    spec.initial = cfg.u0;
    spec.outputs_per_decade = cfg.outputs_per_decade;
    spec.stop = stop_rule(cfg.t_final, cfg.steady_tol, cfg.steady_window, cfg.max_steps);
    info!("cell problems on {} nodes, tau {}", mesh.nodes.len(), cfg.tau);
    let series = run_cell_problem(&mesh, &spec)?;
    info!("finished after {} steps, steady {}", series.steps, series.steady);
    tensor_table("homogenize", cfg, &series)?.write(&out.join("homogenize.csv"))?;
    if cfg.vtk {
        let [fx, fy] = &series.fields;
        let mut fields = Vec::new();
        if let Some(f) = fx {
            fields.push(("cell_x", f.as_slice()));
        }
        if let Some(f) = fy {
            fields.push(("cell_y", f.as_slice()));
        }
        write_vtk(&out.join("homogenize.vtk"), &mesh, &fields)?;
    }
    let summary = json!({ "result": series_summary(&series), "config": cfg });
    write_json(&out.join("homogenize.json"), &summary)?;
    let failures = cfg.expect.as_ref().map(|e| check_tensor(&series, e)).unwrap_or_default();
    Ok(Outcome { summary, failures })
}

pub fn wood(cfg: &WoodConfig, out: &Path) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let mesh = load(&cfg.mesh)?;
    let c = &cfg.constants;
    let scenario = WoodScenario {
        constants: WoodConstants {
            solid_density: c.solid_density,
            bound_diffusivity: c.bound_diffusivity,
            vapour_diffusivity: c.vapour_diffusivity,
            vapour_fraction: c.vapour_fraction,
            vapour_density_slope: c.vapour_density_slope,
        },
        gradient: cfg.gradient,
        solid_order: 1.0 - cfg.solid_alpha,
        lumen_tag: cfg.lumen_tag,
        tau: cfg.tau,
        stop: stop_rule(cfg.t_final, cfg.steady_tol, cfg.steady_window, cfg.max_steps),
    };
    info!("wood cell on {} nodes, solid memory order {}", mesh.nodes.len(), cfg.solid_alpha);
    let series = wood_cell_run(&mesh, &scenario)?;
    info!("finished after {} steps, steady {}", series.steps, series.steady);
    tensor_table("wood", cfg, &series)?.write(&out.join("wood.csv"))?;
    let summary = json!({ "result": series_summary(&series), "config": cfg });
    write_json(&out.join("wood.json"), &summary)?;
    let failures = cfg.expect.as_ref().map(|e| check_tensor(&series, e)).unwrap_or_default();
    Ok(Outcome { summary, failures })
}
