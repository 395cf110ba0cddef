use approx::assert_abs_diff_eq;
use ladder_ent::analysis::{compare_exact_rvb, fit_scaling, Trend};
use ladder_ent::ggm::validate_restricted_strategy;
use ladder_ent::rvb::{build_rvb_enumerated, recursive_restricted_ggm};
use ladder_ent::{build_ladder, compute_ggm, ground_state, Boundary, HamiltonianSpec, LanczosOptions, Strategy};

#[test]
fn rvb_ring_full_search_is_finite() {
    // Reduced states of this ring have exactly decoupled sector blocks that
    // used to send the QR eigensolver to inf.
    let g = build_ladder(1, 16, Boundary::PeriodicAlongLegs).unwrap();
    let psi = build_rvb_enumerated(&g).unwrap().normalized().unwrap();
    let v = validate_restricted_strategy(&psi, &g).unwrap();
    assert!(v.full.value.is_finite());
    assert!(!v.violation, "gap {}", v.gap);
    assert_abs_diff_eq!(v.full.value, 0.37209, epsilon = 1e-5);
}

#[test]
fn recursion_matches_enumerated_restricted_ggm() {
    for (legs, rungs, b) in [(2, 6, Boundary::Open), (2, 6, Boundary::PeriodicAlongLegs), (3, 4, Boundary::Open)] {
        let g = build_ladder(legs, rungs, b).unwrap();
        let psi = build_rvb_enumerated(&g).unwrap().normalized().unwrap();
        let direct = compute_ggm(&psi, Strategy::Restricted2xL, Some(&g)).unwrap();
        let rec = recursive_restricted_ggm(&g).unwrap();
        assert_abs_diff_eq!(direct.value, rec.value, epsilon = 1e-12);
    }
}

#[test]
fn heisenberg_two_leg_energy() {
    // 2x2 open plaquette: E0 = -2J in these units
    let g = build_ladder(2, 2, Boundary::Open).unwrap();
    let spec = HamiltonianSpec::new(g, 1.0, 1.0).unwrap();
    let gs = ground_state(&spec, &LanczosOptions::default()).unwrap();
    assert_abs_diff_eq!(gs.energy, -2.0, epsilon = 1e-10);
}

#[test]
fn plaquette_rvb_is_the_ground_state() {
    let g = build_ladder(2, 2, Boundary::Open).unwrap();
    let rec = compare_exact_rvb(&g, 1.0).unwrap();
    assert_abs_diff_eq!(rec.fidelity, 1.0, epsilon = 1e-10);
    assert_abs_diff_eq!(rec.delta_e, 0.0, epsilon = 1e-10);
    assert_abs_diff_eq!(rec.ggm_exact, rec.ggm_rvb, epsilon = 1e-10);
}

#[test]
fn fit_recovers_decreasing_law() {
    let pts: Vec<(usize, f64)> = (2..12).map(|m| 4 * m).map(|n| (n, 0.2 + 0.5 * (n as f64).powf(-1.5))).collect();
    let fit = fit_scaling(&pts, None).unwrap();
    assert_eq!(fit.sign, Trend::Decreasing);
    assert_abs_diff_eq!(fit.g_c, 0.2, epsilon = 1e-7);
    assert_abs_diff_eq!(fit.x, 1.5, epsilon = 1e-6);
}
