use interface_sim::dynamics::Scheme;
use interface_sim::measures::GeofOptions;
use interface_sim::optimize::{
    optimize_eta, physical_run, Objective, ETA_MAX, ETA_MIN, GRID_POINTS,
};

fn grid_best(n: usize, r: f64, scheme: Scheme, objective: Objective) -> f64 {
    let (lo, hi) = (ETA_MIN.ln(), ETA_MAX.ln());
    (0..GRID_POINTS)
        .map(|i| {
            let eta = (lo + (hi - lo) * i as f64 / (GRID_POINTS - 1) as f64).exp();
            let state = physical_run(n, 25.0, r, eta, scheme, None).unwrap();
            let v = objective
                .metric(scheme, &state, &GeofOptions::default())
                .unwrap();
            objective.cost(v)
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn optimum_is_never_worse_than_the_coarse_grid() {
    for (n, r, scheme) in [
        (1, 0.0, Scheme::Unswitched),
        (4, 0.02, Scheme::Switched),
        (9, 0.02, Scheme::Unswitched),
    ] {
        for objective in [
            Objective::MaximizeGeof,
            Objective::MinimizeEpr,
            Objective::MinimizeAtomicP,
        ] {
            let res = optimize_eta(n, 25.0, r, scheme, objective).unwrap();
            let grid = grid_best(n, r, scheme, objective);
            assert!(
                objective.cost(res.value) <= grid + 1e-12,
                "{n} {scheme:?} {objective:?}"
            );
        }
    }
}

#[test]
fn reflection_free_curves_improve_with_passes() {
    for scheme in [Scheme::Unswitched, Scheme::Switched] {
        let mut prev_geof = 0.0;
        let mut prev_epr = f64::INFINITY;
        for n in 1..=6 {
            let g = optimize_eta(n, 25.0, 0.0, scheme, Objective::MaximizeGeof)
                .unwrap()
                .value;
            let e = optimize_eta(n, 25.0, 0.0, scheme, Objective::MinimizeEpr)
                .unwrap()
                .value;
            assert!(
                g >= prev_geof - 1e-9 && e <= prev_epr + 1e-9,
                "{scheme:?} n={n}"
            );
            if scheme == Scheme::Unswitched {
                assert!(e >= 0.5 - 1e-9);
            }
            prev_geof = g;
            prev_epr = e;
        }
        if scheme == Scheme::Switched {
            assert!(prev_epr < 0.5);
        }
    }
}
