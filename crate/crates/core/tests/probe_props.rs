mod common;

use std::sync::Arc;

use degenkit_core::probes::{
    ball_directions, compactness_probe, darbo_growth_probe, frechet_residual_probe, lipschitz_local_estimate,
    lipschitz_pointwise_check, lipschitz_transfer_check, local_mnc_ratio, mixture_set, mnc_estimate, DarboParams,
    LipschitzParams, MixtureMode, DEFAULT_FLOOR, EXACT_TOLERANCE,
};
use degenkit_core::{GridFunction, KernelSpec, NormSpec, OperatorSpec, ProbeSetup, Verdict};
use rand::Rng;

fn setup(k0: Option<&str>, k1: Option<&str>, k2: Option<&str>, n: usize) -> ProbeSetup {
    let g = common::uniform(n);
    let op = OperatorSpec::new(KernelSpec::parse(k0, k1, k2).unwrap(), Arc::clone(&g), 1).unwrap();
    ProbeSetup::new(op, GridFunction::zeros(g, 1), NormSpec::Lp(2.0), NormSpec::Lp(2.0)).unwrap()
}

fn kuramoto(n: usize) -> ProbeSetup {
    setup(None, None, Some("sin(u - v)"), n)
}

#[test]
fn mnc_bounds_are_coherent_and_packings_sound() {
    let mut r = common::rng(1);
    let ns = NormSpec::Lp(2.0);
    for _ in 0..10 {
        let g = common::uniform(r.random_range(2..20));
        let count = r.random_range(1..120);
        let points: Vec<GridFunction> = (0..count).map(|_| common::random_function(&g, &mut r, -2.0, 2.0)).collect();
        let k_max = r.random_range(1..30);
        let est = mnc_estimate(&points, &ns, k_max).unwrap();
        for ((k, up), (_, lo)) in est.upper.iter().zip(&est.lower) {
            assert!(lo <= up, "k = {k}: lower {lo} > upper {up}");
        }
        assert!(est.upper.windows(2).all(|w| w[1].1 <= w[0].1));
        for (k, lo) in &est.lower {
            if *lo == 0.0 {
                continue;
            }
            let witness = &est.witness[..=*k];
            let mut min = f64::INFINITY;
            for (a, &i) in witness.iter().enumerate() {
                for &j in &witness[a + 1..] {
                    min = min.min(ns.distance(&points[i], &points[j]).unwrap());
                }
            }
            assert!(min >= 2.0 * lo - 1e-12, "k = {k}: packing {min} < 2·{lo}");
        }
    }
}

/// Best single center among the data points is worse than the midpoint net.
#[test]
fn midpoint_net_beats_data_centers() {
    let g = common::uniform(6);
    let y1 = GridFunction::constant(Arc::clone(&g), 1.0).unwrap();
    let y2 = GridFunction::zeros(g, 1);
    let set = mixture_set(&y1, &y2, MixtureMode::Enumerate).unwrap();
    let ns = NormSpec::Lp(2.0);
    let best_data_center = set
        .iter()
        .map(|c| set.iter().map(|p| ns.distance(c, p).unwrap()).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min);
    let est = mnc_estimate(&set, &ns, 1).unwrap();
    assert_eq!(est.upper_at(1), Some(0.5));
    assert!(best_data_center >= 1.0 - 1e-12);
}

#[test]
fn mixture_sampling_is_seeded() {
    let g = common::uniform(30);
    let y1 = GridFunction::constant(Arc::clone(&g), 1.0).unwrap();
    let y2 = GridFunction::zeros(g, 1);
    let a = mixture_set(&y1, &y2, MixtureMode::Sample { count: 40, seed: 9 }).unwrap();
    let b = mixture_set(&y1, &y2, MixtureMode::Sample { count: 40, seed: 9 }).unwrap();
    assert_eq!(a, b);
    assert!(a.iter().all(|m| m.values().iter().all(|&v| v == 0.0 || v == 1.0)));
}

#[test]
fn affine_specs_have_no_residual() {
    let mut r = common::rng(2);
    for _ in 0..3 {
        let k0 = format!("{:.3} * u + sin(t)", r.random_range(-3.0..3.0));
        let k1 = format!("(t - s) * v + {:.3}", r.random_range(-3.0..3.0));
        let s = setup(Some(&k0), Some(&k1), Some("t * s * u"), 32);
        let out = frechet_residual_probe(&s, 1.7, 7, DEFAULT_FLOOR).unwrap();
        assert!(out.curve.iter().all(|p| p.value <= 1e-10));
        assert_eq!(out.verdict, Verdict::NoWitnessFound);
    }
}

#[test]
fn kuramoto_local_ratio_stays_positive() {
    let out = local_mnc_ratio(&kuramoto(64), &[0.5, 0.25, 0.1, 0.05], 256, 8, 4).unwrap();
    let floor = out.curve.iter().map(|e| e.lower).fold(f64::INFINITY, f64::min);
    assert!(floor > 0.3, "{:?}", out.curve);
    assert!(out.curve.iter().all(|e| e.lower <= e.upper));
    assert_eq!(out.report().verdict, Verdict::DegeneracyWitnessed);
}

#[test]
fn identity_lower_ratio_from_disjoint_cells() {
    let out = local_mnc_ratio(&setup(Some("u"), None, None, 64), &[1.0, 0.3], 128, 8, 0).unwrap();
    assert!(out.curve.iter().all(|e| e.lower >= 0.5f64.sqrt() - 1e-12));
}

/// The image of a rank-one map is a segment, which `k` centers cover within
/// `diam/(2k)`; the lower bound can not exceed that.
#[test]
fn rank_one_image_lower_bound_shrinks_with_budget() {
    let s = setup(None, Some("v"), None, 32);
    let dirs = ball_directions(s.grid(), &s.ns_x, 256, 1).unwrap();
    let images: Vec<f64> = dirs.iter().map(|d| s.op.eval_f(d).unwrap().at(0)).collect();
    let diam = images.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - images.iter().cloned().fold(f64::INFINITY, f64::min);
    for k in [1, 4, 16, 32] {
        let out = compactness_probe(&s, 1.0, 256, k, 1, DEFAULT_FLOOR).unwrap();
        assert!(out.alpha_lower <= diam / (2.0 * k as f64) + 1e-12, "k = {k}");
        assert!(out.linear_compact);
    }
    let out = compactness_probe(&s, 1.0, 256, 32, 1, DEFAULT_FLOOR).unwrap();
    assert!(out.alpha_lower <= 0.02);
}

#[test]
fn separated_kernel_satisfies_pointwise_and_transfer_bounds() {
    // G(y1, y2)(t) = sin(y1(t)) + y1(t)·∫ g2(t, s, y2(s)) ds with 0.5 ≤ g2 ≤ 1.5,
    // so |G2(y2)| ≤ 3·|G2(x0)| and K0 is 1-Lipschitz.
    let s = setup(Some("sin(u)"), None, Some("u * (1 + 0.5 * cos(v + t*s))"), 32);
    let r = 0.5;
    let l = lipschitz_local_estimate(&s, r, 300, 3).unwrap();
    let tau = 3.0;
    let ell = (1.0 + tau) * 1.0;
    let l2 = 0.5 * r;
    let params = LipschitzParams::derived(tau, ell, l, l2).unwrap();
    let transfer = lipschitz_transfer_check(&s, &params, r, 300, 4, EXACT_TOLERANCE).unwrap();
    assert_eq!(transfer.verdict, Verdict::BoundSatisfied, "{transfer:?}");
    let mut rng = common::rng(5);
    for _ in 0..1000 {
        let y1 = common::random_function(s.grid(), &mut rng, -4.0, 4.0);
        let y2 = common::random_function(s.grid(), &mut rng, -4.0, 4.0);
        let e = lipschitz_pointwise_check(&s.op, &y1, &y2, &s.x0, params.l1).unwrap();
        assert!(e.max_excess <= 0.0);
    }
}

#[test]
fn darbo_affine_lhs_matches_operator_norm() {
    let params = DarboParams {
        radii: vec![1.0, 0.5, 0.1],
        trials: 64,
        k_budget: 4,
        c: 1.0,
        tolerance: 0.05,
        seed: 7,
    };
    let out = darbo_growth_probe(&setup(Some("-2*u + t"), None, None, 16), &params).unwrap();
    assert!(out.lhs.iter().all(|p| (p.value - 2.0).abs() < 1e-12));
}

#[test]
fn reports_are_reproducible_across_thread_counts() {
    let run = || {
        let s = kuramoto(32);
        let a = local_mnc_ratio(&s, &[1.0, 0.25], 96, 6, 11).unwrap().report();
        let b = compactness_probe(&s, 1.0, 96, 6, 11, DEFAULT_FLOOR).unwrap().report(6);
        let params = LipschitzParams::derived(1.0, 1.0, 1.0, 1.0).unwrap();
        let c = lipschitz_transfer_check(&s, &params, 0.5, 50, 11, EXACT_TOLERANCE).unwrap().report(&params);
        (a, b, c)
    };
    let pool = |n| rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
    let one = pool(1).install(run);
    let four = pool(4).install(run);
    assert_eq!(one, four);
    assert_eq!(one.0.to_csv(), four.0.to_csv());
    assert_eq!(one, run());
}
