use super::*;

fn table_spec(g_inner: f64, g_outer: f64) -> LayeredSpec {
    LayeredSpec::strip((10.0, g_inner), (1.0, g_outer), 1.0, 1.0)
}

#[test]
fn eigenbasis_is_orthonormal() {
    let spec = table_spec(0.5, 0.5);
    let bases = eigenbasis(&spec, 6);
    let outer = &bases[0];
    assert!((outer.eigenvalues[1] - std::f64::consts::PI / 0.375).abs() < 1e-14);
    assert!((outer.function(1, 0.0) - (2.0f64 / 0.375).sqrt()).abs() < 1e-14);
    let n = 4000;
    for m in 0..5 {
        for k in 0..5 {
            let h = outer.width / n as f64;
            let integral: f64 = (0..n)
                .map(|j| {
                    let x = outer.start + (j as f64 + 0.5) * h;
                    outer.function(m, x) * outer.function(k, x) * h
                })
                .sum();
            let want = if m == k { 1.0 } else { 0.0 };
            assert!((integral - want).abs() < 1e-6, "({m},{k}) {integral}");
        }
    }
}

#[test]
fn no_jump_no_flux() {
    let mut spec = table_spec(0.5, 0.5);
    spec.jump = 0.0;
    let oracle = LayeredOracle::new(spec).unwrap();
    let v = oracle.interface_fluxes(Complex64::new(0.3, 1.2)).unwrap();
    assert!(v.iter().all(|f| f.norm() < 1e-14));
    for x in [0.0, 0.2, 0.5, 1.0] {
        assert!((oracle.evaluate(x, 1.0).unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn classical_single_medium_flux_limit() {
    let spec = LayeredSpec {
        breakpoints: [0.0, 0.3, 0.7, 1.0],
        diffusivity: [2.0; 3],
        order: [1.0; 3],
        jump: 1.0,
        initial: [1.0; 3],
    };
    let oracle = LayeredOracle::new(spec).unwrap();
    let s = Complex64::new(1e-7, 0.0);
    let v = oracle.interface_fluxes(s).unwrap();
    for f in v {
        assert!(((f * s).re - 2.0).abs() < 1e-5, "{f}");
    }
    let late = oracle.fluxes(50.0).unwrap();
    assert!(late.iter().all(|f| (f - 2.0).abs() < 1e-8), "{late:?}");
}

#[test]
fn classical_steady_profile_is_piecewise_linear() {
    let oracle = LayeredOracle::new(table_spec(1.0, 1.0)).unwrap();
    // Flux continuity: slopes in ratio 1:10, total rise q0 = 1 across the cell.
    let slope_outer = 1.0 / (0.75 + 0.25 / 10.0);
    let slope_inner = slope_outer / 10.0;
    let centre = 1.0;
    let xs = [0.1, 0.4, 0.5, 0.6, 0.9];
    let got = oracle.profile(&xs, 200.0).unwrap();
    for (x, v) in xs.iter().zip(got) {
        let want = if (0.375..=0.625).contains(x) {
            centre + slope_inner * (x - 0.5)
        } else if *x < 0.375 {
            centre - slope_inner * 0.125 - slope_outer * (0.375 - x)
        } else {
            centre + slope_inner * 0.125 + slope_outer * (x - 0.625)
        };
        assert!((v - want).abs() < 1e-8, "x={x}: {v} vs {want}");
    }
}

#[test]
fn jump_continuity_and_mean() {
    for (gi, go) in [(0.5, 0.5), (0.2, 1.0), (0.8, 0.2)] {
        let oracle = LayeredOracle::new(table_spec(gi, go)).unwrap();
        for t in [0.01, 1.0, 100.0] {
            let left = oracle.evaluate_in(0, 0.0, t).unwrap();
            let right = oracle.evaluate_in(2, 1.0, t).unwrap();
            assert!((right - left - 1.0).abs() < 1e-8, "jump {gi},{go},{t}");
            for (k, x) in [(0, 0.375), (1, 0.625)] {
                let a = oracle.evaluate_in(k, x, t).unwrap();
                let b = oracle.evaluate_in(k + 1, x, t).unwrap();
                assert!((a - b).abs() < 1e-8, "continuity at {x}: {a} {b}");
            }
            let mean = oracle.mass_balance(t).unwrap();
            assert!((mean - 1.0).abs() < 1e-9, "mean {mean}");
        }
    }
}

#[test]
fn mean_is_conserved_for_layered_initial_data() {
    let mut spec = table_spec(0.5, 0.8);
    spec.initial = [0.2, 1.5, -0.4];
    let want = spec.initial_mean();
    let oracle = LayeredOracle::new(spec).unwrap();
    for t in [0.0, 0.1, 3.0, 1e4] {
        let mean = oracle.mass_balance(t).unwrap();
        assert!((mean - want).abs() < 1e-9 * want.abs().max(1.0), "t={t}");
    }
}

#[test]
fn mode_sum_approaches_closed_form() {
    let spec = table_spec(0.5, 0.8);
    let exact = LayeredOracle::new(spec.clone()).unwrap();
    let xs = [0.2, 0.5, 0.8];
    let want = exact.profile(&xs, 1.0).unwrap();
    let mut last = f64::INFINITY;
    for m in [50, 200, 800] {
        let approx = LayeredOracle::with_expansion(spec.clone(), Expansion::Modes(m)).unwrap();
        let got = approx.profile(&xs, 1.0).unwrap();
        let gap = got.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(gap < last, "modes {m}: {gap}");
        last = gap;
    }
    assert!(last < 1e-3, "{last}");
}

#[test]
fn rejects_bad_input() {
    let mut spec = table_spec(0.5, 0.5);
    spec.order[2] = 0.3;
    assert!(LayeredOracle::new(spec).is_err());
    let oracle = LayeredOracle::new(table_spec(0.5, 0.5)).unwrap();
    assert!(oracle.evaluate(1.5, 1.0).is_err());
    assert!(oracle.evaluate(0.5, -1.0).is_err());
    assert!(LayeredOracle::with_expansion(table_spec(0.5, 0.5), Expansion::Modes(0)).is_err());
}
