//! Acceptance criteria, one PASS/FAIL line each. Scenario runs go through the
//! `subdiff` binary with the shipped configs; oracle and discretisation
//! invariants call the library directly.
//!
//! Exits 0 regardless of failures unless `ACCEPTANCE_STRICT=1`.

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

use subdiff_core::assembly::{stiffness, MediumSpec, Phase};
use subdiff_core::fracops::{gamma, mittag_leffler};
use subdiff_core::layered::{CfRule, Complex64, LayeredOracle, LayeredSpec};
use subdiff_core::mesh::{read_msh, tag_regions, CvMesh, Morphology, RegionTags};

const CONVERGENCE_REL: f64 = 0.25;
const ORDER_RANGE: (f64, f64) = (1.8, 2.5);
const ORACLE_GAP: f64 = 5e-4;
const CLASSICAL_REL: f64 = 1e-2;
const FRACTIONAL_REL: f64 = 5e-2;
const ALPHA_AGREEMENT: f64 = 1e-2;
const DRIFT_REL: f64 = 1e-9;
const CF_REL: f64 = 1e-8;
const ORACLE_INVARIANT: f64 = 1e-8;
const ORACLE_MEAN: f64 = 1e-9;
const NULL_RESULT_REL: f64 = 1e-6;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

struct Workspace {
    dir: tempfile::TempDir,
    runs: usize,
}

impl Workspace {
    /// Runs `subdiff <command> --config configs/<name>.toml [extra]` and
    /// returns the JSON summary it prints.
    fn run(&mut self, command: &str, name: &str, extra: &[&str]) -> Result<Value, String> {
        self.runs += 1;
        let out = self.dir.path().join(format!("{}-{name}", self.runs));
        let config = root().join("configs").join(format!("{name}.toml"));
        let output = Command::new(env!("CARGO_BIN_EXE_subdiff"))
            .arg(command)
            .arg("--config")
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .args(extra)
            .env("RUST_LOG", "warn")
            .output()
            .map_err(|e| format!("cannot start subdiff: {e}"))?;
        if !output.status.success() {
            return Err(format!(
                "subdiff {command} {name} exited with {}: {}",
                output.status,
                String::from_utf8_lossy(&output.stderr).trim()
            ));
        }
        serde_json::from_slice(&output.stdout).map_err(|e| format!("bad summary from {name}: {e}"))
    }
}

fn field(v: &Value, path: &[&str]) -> f64 {
    let mut cur = v;
    for k in path {
        cur = &cur[*k];
    }
    cur.as_f64().unwrap_or(f64::NAN)
}

fn rel(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs()
}

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn error(e: String) -> Self {
        Verdict { pass: false, detail: e }
    }
}

fn criterion_convergence(ws: &mut Workspace) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, g, corrected, uncorrected) in
        [("convergence_gamma05", 0.5, 7.3674e-6, 2.2821e-3), ("convergence_gamma08", 0.8, 7.4373e-6, 7.2710e-5)]
    {
        let v = match ws.run("convergence", name, &[]) {
            Ok(v) => v,
            Err(e) => return Verdict::error(e),
        };
        let e = field(&v, &["corrected", "finest_error"]);
        let p = field(&v, &["corrected", "fitted_order"]);
        let u = field(&v, &["uncorrected", "finest_error"]);
        let ok = rel(e, corrected) <= CONVERGENCE_REL
            && (ORDER_RANGE.0..=ORDER_RANGE.1).contains(&p)
            && rel(u, uncorrected) <= CONVERGENCE_REL;
        pass &= ok;
        parts.push(format!(
            "gamma={g}: corrected {e:.3e} (want {corrected:.4e}), order {p:.2}, uncorrected {u:.3e} (want {uncorrected:.4e})"
        ));
    }
    Verdict { pass, detail: parts.join("; ") }
}

fn pair_gaps(v: &Value) -> Vec<(String, f64, f64)> {
    v["pairs"]
        .as_array()
        .map(|a| {
            a.iter()
                .map(|p| {
                    let pair = format!("({}, {})", p["pair"][0], p["pair"][1]);
                    (pair, field(p, &["max_gap"]), field(p, &["mass_drift"]))
                })
                .collect()
        })
        .unwrap_or_default()
}

fn criterion_oracle_gap(ws: &mut Workspace, drifts: &mut Vec<(String, f64)>) -> Verdict {
    let v = match ws.run("layered", "layered_oracle", &[]) {
        Ok(v) => v,
        Err(e) => return Verdict::error(e),
    };
    let gaps = pair_gaps(&v);
    for (p, _, d) in &gaps {
        drifts.push((format!("layered {p}"), *d));
    }
    let bad: Vec<String> = gaps.iter().filter(|g| !(g.1 <= ORACLE_GAP)).map(|g| format!("{} {:.2e}", g.0, g.1)).collect();
    let worst = gaps.iter().map(|g| g.1).fold(0.0, f64::max);
    Verdict {
        pass: gaps.len() == 12 && bad.is_empty(),
        detail: format!(
            "{} pairs, worst gap {worst:.2e} (bound {ORACLE_GAP:e}); above bound: [{}]",
            gaps.len(),
            bad.join(", ")
        ),
    }
}

fn tensor_entry(v: &Value, key: &str) -> f64 {
    field(v, &["result", key])
}

fn criterion_classical(ws: &mut Workspace, drifts: &mut Vec<(String, f64)>) -> Verdict {
    let cases: [(&str, &[(&str, f64)]); 6] = [
        ("classical_strip_ratio10", &[("D_bx", 1.290), ("D_by", 3.250)]),
        ("classical_strip_ratio01", &[("D_bx", 0.309), ("D_by", 0.775)]),
        ("classical_disc_ratio10", &[("D_bx", 1.520), ("D_by", 1.520)]),
        ("classical_disc_ratio01", &[("D_bx", 0.659), ("D_by", 0.659)]),
        ("classical_lshape_ratio10", &[("D_bx", 1.48), ("D_by", 1.88), ("D_bxy", -0.0796)]),
        ("classical_lshape_ratio01", &[("D_bx", 0.533), ("D_by", 0.675), ("D_bxy", -0.0286)]),
    ];
    let mut pass = true;
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (name, entries) in cases {
        let v = match ws.run("homogenize", name, &[]) {
            Ok(v) => v,
            Err(e) => return Verdict::error(e),
        };
        drifts.push((name.to_string(), tensor_entry(&v, "mass_drift")));
        let got: Vec<String> = entries
            .iter()
            .map(|(k, want)| {
                let g = tensor_entry(&v, k);
                let r = rel(g, *want);
                worst = worst.max(r);
                pass &= r <= CLASSICAL_REL;
                format!("{g:.4}")
            })
            .collect();
        parts.push(format!("{name} ({})", got.join(", ")));
    }
    Verdict { pass, detail: format!("worst relative error {worst:.2e}; {}", parts.join("; ")) }
}

fn tensor_of(v: &Value) -> [f64; 4] {
    ["D_bx", "D_bxy", "D_byx", "D_by"].map(|k| tensor_entry(v, k))
}

fn tensor_gap(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    diff / b.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

fn criterion_fractional(ws: &mut Workspace, drifts: &mut Vec<(String, f64)>) -> Verdict {
    let cases: [(&str, &[(&str, f64)]); 3] = [
        ("fractional_strip", &[("D_bx", 10.0)]),
        ("fractional_disc", &[("D_bx", 4.6006), ("D_by", 4.6006)]),
        ("fractional_lshape", &[("D_bx", 6.5561), ("D_by", 4.5559), ("D_bxy", 0.46969)]),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, entries) in cases {
        let strong = match ws.run("homogenize", name, &[]) {
            Ok(v) => v,
            Err(e) => return Verdict::error(e),
        };
        let mild = match ws.run("homogenize", name, &["--alpha1", "0.5"]) {
            Ok(v) => v,
            Err(e) => return Verdict::error(e),
        };
        drifts.push((name.to_string(), tensor_entry(&strong, "mass_drift")));
        drifts.push((format!("{name} alpha1=0.5"), tensor_entry(&mild, "mass_drift")));
        let mut worst: f64 = 0.0;
        for (k, want) in entries {
            worst = worst.max(rel(tensor_entry(&strong, k), *want));
        }
        let agree = tensor_gap(&tensor_of(&mild), &tensor_of(&strong));
        pass &= worst <= FRACTIONAL_REL && agree <= ALPHA_AGREEMENT;
        let shown: Vec<String> = entries.iter().map(|(k, _)| format!("{:.4}", tensor_entry(&strong, k))).collect();
        parts.push(format!(
            "{} ({}) off {:.2}%, alpha1 0.5 vs 0.9 {:.2}%",
            name.trim_start_matches("fractional_"),
            shown.join(", "),
            100.0 * worst,
            100.0 * agree
        ));
    }
    Verdict { pass, detail: parts.join("; ") }
}

fn morphology_of(name: &str) -> Option<Morphology> {
    match name.split('_').next()? {
        "rect" => Some(Morphology::strip()),
        "circle" => Some(Morphology::disc()),
        "lshape" => Some(Morphology::l_shape()),
        "lumen" => Some(Morphology::Tagged { inclusion_tag: 1 }),
        _ => None,
    }
}

fn mesh_invariants(dir: &Path) -> Result<usize, String> {
    let mut count = 0;
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "msh"))
        .collect();
    paths.sort();
    for p in paths {
        let name = p.file_stem().unwrap().to_string_lossy().into_owned();
        let mesh = read_msh(&p).map_err(|e| format!("{name}: {e}"))?;
        let cv = CvMesh::build(mesh.clone()).map_err(|e| format!("{name}: {e}"))?;
        let b = mesh.bbox();
        let area = (b[2] - b[0]) * (b[3] - b[1]);
        if (cv.total_volume() - area).abs() > 1e-12 * area {
            return Err(format!("{name}: dual volumes do not tile the cell"));
        }
        if cv.gradients.iter().any(|g| g.iter().map(|v| v[0]).sum::<f64>().abs() > 1e-9 || g.iter().map(|v| v[1]).sum::<f64>().abs() > 1e-9) {
            return Err(format!("{name}: basis gradients do not sum to zero"));
        }
        let tags = match morphology_of(&name) {
            Some(m) => tag_regions(&mesh, &m).map_err(|e| format!("{name}: {e}"))?,
            None => RegionTags::uniform(&mesh),
        };
        let k = stiffness(&cv, &tags, &MediumSpec::binary(Phase::new(10.0, 0.5), Phase::new(1.0, 1.0)), None);
        let scale = k.max_abs();
        if k.row_sums().iter().any(|s| s.abs() > 1e-12 * scale) {
            return Err(format!("{name}: stiffness rows do not sum to zero"));
        }
        let uniform = stiffness(&cv, &tags, &MediumSpec::uniform(1.0, 1.0), None);
        let u: Vec<f64> = mesh.nodes.iter().map(|p| 0.7 - 1.3 * p[0] + 2.1 * p[1]).collect();
        let mut ku = vec![0.0; u.len()];
        uniform.mul_vec(&u, &mut ku);
        let mut interior = vec![true; u.len()];
        for i in cv.boundary_nodes() {
            interior[i] = false;
        }
        if ku.iter().zip(&interior).any(|(v, &inside)| inside && v.abs() > 1e-10) {
            return Err(format!("{name}: linear patch test fails"));
        }
        count += 1;
    }
    Ok(count)
}

fn criterion_conservation(drifts: &[(String, f64)]) -> Verdict {
    let (worst_name, worst) = drifts
        .iter()
        .fold(("none".to_string(), 0.0f64), |acc, (n, d)| if !(*d <= acc.1) { (n.clone(), *d) } else { acc });
    let meshes = mesh_invariants(&root().join("meshes"));
    let pass = !drifts.is_empty() && worst <= DRIFT_REL && meshes.is_ok();
    let mesh_note = match meshes {
        Ok(n) => format!("invariants hold on {n} meshes"),
        Err(e) => format!("invariant failure: {e}"),
    };
    Verdict {
        pass,
        detail: format!(
            "{} periodic runs, worst relative drift {worst:.1e} ({worst_name}), bound {DRIFT_REL:e}; {mesh_note}",
            drifts.len()
        ),
    }
}

fn criterion_oracle_self() -> Verdict {
    let rule = CfRule::standard();
    let mut cf_worst: f64 = 0.0;
    let g = 0.7;
    for t in [1e-2, 0.3, 1.0, 10.0, 1e3, 1e6] {
        let pairs: [(Box<dyn Fn(Complex64) -> Complex64>, f64); 5] = [
            (Box::new(|s| 1.0 / s), 1.0),
            (Box::new(|s| 1.0 / (s * s)), t),
            (Box::new(|s| gamma(1.5) / s.powf(1.5)), t.sqrt()),
            (Box::new(|s| 1.0 / (s * (s + 1.0))), 1.0 - (-t).exp()),
            (Box::new(move |s| s.powf(g - 1.0) / (s.powf(g) + 1.0)), mittag_leffler(g, 1.0, -t.powf(g)).unwrap()),
        ];
        for (f, want) in pairs {
            match rule.invert(f, t) {
                Ok(v) => cf_worst = cf_worst.max(rel(v, want)),
                Err(e) => return Verdict::error(e.to_string()),
            }
        }
    }
    let mut jump_worst: f64 = 0.0;
    let mut mean_worst: f64 = 0.0;
    for (gi, go) in [(0.2, 0.2), (0.5, 0.5), (0.8, 1.0), (0.2, 1.0)] {
        let mut spec = LayeredSpec::strip((10.0, gi), (1.0, go), 1.0, 1.0);
        spec.initial = [0.2, 1.5, -0.4];
        let want = spec.initial_mean();
        let oracle = match LayeredOracle::new(spec) {
            Ok(o) => o,
            Err(e) => return Verdict::error(e.to_string()),
        };
        for t in [0.01, 1.0, 100.0] {
            let eval = |k: usize, x: f64| oracle.evaluate_in(k, x, t).unwrap_or(f64::NAN);
            jump_worst = jump_worst.max((eval(2, 1.0) - eval(0, 0.0) - 1.0).abs());
            for (k, x) in [(0, 0.375), (1, 0.625)] {
                jump_worst = jump_worst.max((eval(k, x) - eval(k + 1, x)).abs());
            }
            let mean = oracle.mass_balance(t).unwrap_or(f64::NAN);
            mean_worst = mean_worst.max((mean - want).abs() / want.abs().max(1.0));
        }
    }
    Verdict {
        pass: cf_worst <= CF_REL && jump_worst <= ORACLE_INVARIANT && mean_worst <= ORACLE_MEAN,
        detail: format!(
            "CF pairs worst {cf_worst:.1e} (bound {CF_REL:e}), jump/continuity {jump_worst:.1e}, mean {mean_worst:.1e} (bound {ORACLE_MEAN:e})"
        ),
    }
}

fn criterion_null_result(ws: &mut Workspace) -> Verdict {
    let v = match ws.run("layered", "classical_flux_interface", &[]) {
        Ok(v) => v,
        Err(e) => return Verdict::error(e),
    };
    let gaps = pair_gaps(&v);
    let pass = gaps.len() == 2 && gaps.iter().all(|g| g.1 <= NULL_RESULT_REL);
    let shown: Vec<String> = gaps.iter().map(|g| format!("{} {:.1e}", g.0, g.1)).collect();
    Verdict { pass, detail: format!("relative gap to the classical profile: {} (bound {NULL_RESULT_REL:e})", shown.join(", ")) }
}

fn criterion_wood(ws: &mut Workspace, drifts: &mut Vec<(String, f64)>) -> Verdict {
    let classical = match ws.run("wood", "wood_classical", &[]) {
        Ok(v) => v,
        Err(e) => return Verdict::error(e),
    };
    let fractional = match ws.run("wood", "wood_fractional", &[]) {
        Ok(v) => v,
        Err(e) => return Verdict::error(e),
    };
    drifts.push(("wood_classical".into(), tensor_entry(&classical, "mass_drift")));
    drifts.push(("wood_fractional".into(), tensor_entry(&fractional, "mass_drift")));
    let (k1, k2) = (tensor_entry(&classical, "K1"), tensor_entry(&classical, "K2"));
    let cd = [tensor_entry(&classical, "D_bx"), tensor_entry(&classical, "D_by")];
    let fd = [tensor_entry(&fractional, "D_bx"), tensor_entry(&fractional, "D_by")];
    let pass = cd.iter().all(|d| (k1..=k2).contains(d)) && fd.iter().all(|d| *d < k1);
    Verdict {
        pass,
        detail: format!(
            "bounds [{k1:.4}, {k2:.4}]; classical ({:.4}, {:.4}); fractional ({:.4}, {:.4})",
            cd[0], cd[1], fd[0], fd[1]
        ),
    }
}

fn main() {
    let mut ws = Workspace { dir: tempfile::tempdir().expect("temporary directory"), runs: 0 };
    let mut drifts = Vec::new();
    let mut verdicts = Vec::new();
    verdicts.push(("convergence study", criterion_convergence(&mut ws)));
    verdicts.push(("oracle cross-validation", criterion_oracle_gap(&mut ws, &mut drifts)));
    verdicts.push(("classical homogenisation", criterion_classical(&mut ws, &mut drifts)));
    verdicts.push(("fractional steady state", criterion_fractional(&mut ws, &mut drifts)));
    let wood = criterion_wood(&mut ws, &mut drifts);
    verdicts.push(("conservation suite", criterion_conservation(&drifts)));
    verdicts.push(("oracle self-tests", criterion_oracle_self()));
    verdicts.push(("classical-flux null result", criterion_null_result(&mut ws)));
    verdicts.push(("wood scenario", wood));

    let mut passed = 0;
    for (i, (name, v)) in verdicts.iter().enumerate() {
        if v.pass {
            passed += 1;
        }
        println!("{} {}. {name}: {}", if v.pass { "PASS" } else { "FAIL" }, i + 1, v.detail);
    }
    println!("acceptance: {passed}/{} criteria passed", verdicts.len());
    if passed < verdicts.len() && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
