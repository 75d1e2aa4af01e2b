use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use steane_xai::analysis::correlation::Grid;
use steane_xai::analysis::{attribution_correlations, fit_infidelity, fit_scaling, infidelity, wilson_interval, HookSignatureSet};
use steane_xai::sim::Simulator;
use steane_xai::steane::{CodeDefinition, StabilizerKind};

#[test]
fn wilson_no_failures_in_ten() {
    let w = wilson_interval(0, 10, 1.0).unwrap();
    assert_eq!(w.p_hat, 0.0);
    assert_eq!(w.p_min, 0.0);
    assert!((w.p_max - 0.0909).abs() < 1e-4);
}

#[test]
fn wilson_all_failures_pins_upper_bound() {
    for n in [1u64, 5, 10, 41, 1000] {
        assert_eq!(wilson_interval(n, n, 1.0).unwrap().p_max, 1.0);
    }
}

#[test]
fn wilson_fringe_is_wider_for_large_samples() {
    // Three failures in 41 trials lie within the fringe, in 40 they do not.
    assert_eq!(wilson_interval(3, 41, 1.0).unwrap().p_min, 0.0);
    assert!(wilson_interval(3, 40, 1.0).unwrap().p_min > 0.0);
}

#[test]
fn planted_infidelity_curve_is_recovered() {
    let pts: Vec<(f64, f64)> = (1..=8).map(|t| (t as f64, infidelity(t as f64, 0.01, 0.5))).collect();
    let f = fit_infidelity(&pts).unwrap();
    assert!((f.p_l() - 0.01).abs() < 1e-6, "{}", f.p_l());
    assert!((f.t0() - 0.5).abs() < 1e-6, "{}", f.t0());
}

#[test]
fn infidelity_has_the_expected_form() {
    let i = infidelity(3.0, 0.02, 1.0);
    assert!((i - 0.5 * (1.0 - 0.96f64.powi(2))).abs() < 1e-15);
    assert_eq!(infidelity(1.0, 0.3, 1.0), 0.0);
}

#[test]
fn planted_quadratic_scaling_is_recovered() {
    let pts: Vec<(f64, f64)> = [1e-3, 2e-3, 5e-3].iter().map(|&p| (p, 40.0 * p * p)).collect();
    let f = fit_scaling(&pts).unwrap();
    assert!((f.b() - 2.0).abs() < 1e-9);
    assert!((f.a() - 40.0).abs() < 1e-6);
    assert!(fit_scaling(&pts[..1]).is_err());
    assert!(fit_scaling(&[(1e-3, 0.0), (2e-3, 1e-5)]).is_err());
}

fn shifted_grids(seed: u64, sign: f64) -> Vec<Grid> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..200)
        .map(|_| {
            let xs: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
            (0..6)
                .map(|t| {
                    let prev = if t == 0 { rng.gen_range(-1.0..1.0) } else { xs[t - 1] };
                    vec![xs[t], sign * prev, rng.gen_range(-1.0..1.0), 0.0]
                })
                .collect()
        })
        .collect()
}

#[test]
fn lagged_copy_is_perfectly_correlated() {
    let r = attribution_correlations(&shifted_grids(1, 1.0), 1).unwrap();
    assert!((r.matrix[0][1] - 1.0).abs() < 1e-12);
    assert!(r.matrix[0][2].abs() < 0.1);
    assert!(r.zero_variance[3]);
    assert_eq!(r.matrix[3][0], 0.0);
    assert_eq!(r.pairs, 200 * 5);
    let r = attribution_correlations(&shifted_grids(1, -1.0), 1).unwrap();
    assert!((r.matrix[0][1] + 1.0).abs() < 1e-12);
}

#[test]
fn top_pairs_lead_with_the_strongest_entry() {
    let r = attribution_correlations(&shifted_grids(2, 1.0), 1).unwrap();
    let top = r.top_pairs(2);
    assert_eq!((top[0].0, top[0].1), (0, 1));
    assert!(top[0].2 >= top[1].2);
}

#[test]
fn hook_signatures_follow_the_coupling_order() {
    let sim = Simulator::new(CodeDefinition::steane());
    let names = |kind| {
        let set = HookSignatureSet::for_plaquettes(&sim, kind);
        assert_eq!(set.hook.len() + set.baseline.len(), 9);
        set.hook.iter().map(|p| format!("{}/{}@{}", p.flag, p.syndrome, p.lag)).collect::<Vec<_>>()
    };
    assert_eq!(names(StabilizerKind::X), ["F_X1/S_Z2@0", "F_X2/S_Z3@0", "F_X3/S_Z2@0"]);
    assert_eq!(names(StabilizerKind::Z), ["F_Z1/S_X2@1", "F_Z2/S_X3@1", "F_Z3/S_X2@1"]);
}
