//! Acceptance harness: one PASS/FAIL line per criterion, nonzero exit status
//! if any criterion fails. Run with `cargo test -p degenkit-core --test acceptance`.

mod common;

use std::f64::consts::{FRAC_PI_2, PI};
use std::panic;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use degenkit_core::funcspace::{
    average_stability_check, mean_value_check, simple_approx, Exponent, YoungSpec,
};
use degenkit_core::kernel_lang::{diff_expr, parse_expr, Var};
use degenkit_core::probes::{
    compactness_probe, darbo_growth_probe, frechet_residual_probe, lipschitz_local_estimate,
    lipschitz_pointwise_check, local_mnc_ratio, mixture_set, mnc_estimate, DarboParams, MixtureMode,
    DEFAULT_FLOOR,
};
use degenkit_core::{GridFunction, KernelSpec, NormSpec, OperatorSpec, ProbeSetup, VarSet, YoungFunction};
use rand::Rng;

use common::{random_expression, random_function, rng, uniform};

type Outcome = Result<String, String>;
type Criterion = (&'static str, u64, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn l2() -> NormSpec {
    NormSpec::Lp(2.0)
}

fn setup(k0: Option<&str>, k1: Option<&str>, k2: Option<&str>, n: usize) -> ProbeSetup {
    let g = uniform(n);
    let op = OperatorSpec::new(KernelSpec::parse(k0, k1, k2).unwrap(), Arc::clone(&g), 1).unwrap();
    ProbeSetup::new(op, GridFunction::zeros(g, 1), l2(), l2()).unwrap()
}

fn kuramoto(n: usize) -> ProbeSetup {
    setup(None, None, Some("sin(u - v)"), n)
}

fn c1_kuramoto_residual() -> Outcome {
    let out = frechet_residual_probe(&kuramoto(1024), FRAC_PI_2, 10, DEFAULT_FLOOR).map_err(|e| e.to_string())?;
    let limit = 1.0 - 2.0 / PI;
    let mut worst = 0.0f64;
    for (n, p) in (1..).zip(&out.curve) {
        let want = limit * (1.0 - 0.5f64.powi(n)).sqrt();
        worst = worst.max((p.value - want).abs());
    }
    ensure(worst <= 1e-9, || format!("closed-form deviation {worst:e}"))?;
    let last = out.curve[9].value;
    ensure((last - limit).abs() <= 1e-3, || format!("ratio_10 = {last}"))?;
    Ok(format!("max deviation {worst:.1e}, ratio_10 = {last:.6}, verdict {}", out.verdict))
}

fn c2_affine_baseline() -> Outcome {
    let mut r = rng(2);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let mut c = || r.random_range(-2.0..2.0);
        let k0 = format!("{} * u + {} * t", c(), c());
        let k1 = format!("({} + {} * t * s) * v + {}", c(), c(), c());
        let k2 = format!("{} * s * u + {} * cos(t - s) * v", c(), c());
        let amp = c();
        let s = setup(Some(&k0), Some(&k1), Some(&k2), 256);
        let x0 = random_function(s.grid(), &mut r, -1.0, 1.0);
        let s = ProbeSetup::new(s.op.clone(), x0, l2(), l2()).unwrap();
        let out = frechet_residual_probe(&s, amp, 8, DEFAULT_FLOOR).map_err(|e| e.to_string())?;
        worst = out.curve.iter().map(|p| p.value).fold(worst, f64::max);
    }
    ensure(worst <= 1e-10, || format!("largest residual ratio {worst:e}"))?;
    Ok(format!("largest residual ratio {worst:.1e} over 10 specs"))
}

fn c3_derivative_consistency() -> Outcome {
    let mut r = rng(3);
    let g = uniform(64);
    let step = 1e-4;
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let k1 = random_expression(&mut r, &["t", "s", "v"], 3);
        let k2 = random_expression(&mut r, &["t", "s", "u", "v"], 3);
        let kernels = KernelSpec::parse(None, Some(&k1), Some(&k2)).map_err(|e| e.to_string())?;
        let op = OperatorSpec::new(kernels, Arc::clone(&g), 1).map_err(|e| e.to_string())?;
        let x1 = random_function(&g, &mut r, -1.0, 1.0);
        let x2 = random_function(&g, &mut r, -1.0, 1.0);
        let m = op.d2g_matrix(&x1, &x2).map_err(|e| e.to_string())?;
        let scale = m.to_dense().iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
        let mut err = 0.0f64;
        for j in 0..g.len() {
            let mut plus = x2.values().to_vec();
            let mut minus = x2.values().to_vec();
            plus[j] += step;
            minus[j] -= step;
            let gp = op.eval_g(&x1, &GridFunction::scalar(Arc::clone(&g), plus).unwrap()).unwrap();
            let gm = op.eval_g(&x1, &GridFunction::scalar(Arc::clone(&g), minus).unwrap()).unwrap();
            for i in 0..g.len() {
                let fd = (gp.at(i) - gm.at(i)) / (2.0 * step);
                err = err.max((fd - m.entry(i, j)).abs());
            }
        }
        let rel = err / scale;
        ensure(rel <= 1e-6, || format!("relative error {rel:e} for k1 = {k1}, k2 = {k2}"))?;
        worst = worst.max(rel);
    }
    Ok(format!("largest relative error {worst:.1e} over 20 kernels"))
}

fn c4_l2_nondegeneracy() -> Outcome {
    let g = uniform(16);
    let y1 = GridFunction::constant(Arc::clone(&g), 1.0).unwrap();
    let y2 = GridFunction::zeros(Arc::clone(&g), 1);
    let set = mixture_set(&y1, &y2, MixtureMode::Enumerate).map_err(|e| e.to_string())?;
    ensure(set.len() == 1 << 16, || format!("{} mixtures", set.len()))?;
    let est = mnc_estimate(&set, &l2(), 50).map_err(|e| e.to_string())?;
    let (u1, l1, l50) = (
        est.upper_at(1).unwrap(),
        est.lower_at(1).unwrap(),
        est.lower_at(50).unwrap(),
    );
    ensure((u1 - 0.5).abs() <= 1e-12, || format!("upper(1) = {u1}"))?;
    ensure((l1 - 0.5).abs() <= 1e-12, || format!("lower(1) = {l1}"))?;
    ensure(l50 >= 0.3, || format!("lower(50) = {l50}"))?;
    Ok(format!("upper(1) = {u1}, lower(1) = {l1}, lower(50) = {l50:.4}"))
}

fn c5_pointwise_transfer() -> Outcome {
    let s = setup(Some("sin(u)"), None, None, 64);
    let l_hat = lipschitz_local_estimate(&s, 1.0, 1000, 5).map_err(|e| e.to_string())?;
    let l1 = l_hat + 0.02;
    let mut r = rng(5);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..100 {
        let y1 = random_function(s.grid(), &mut r, -3.0, 3.0);
        let y2 = random_function(s.grid(), &mut r, -3.0, 3.0);
        let e = lipschitz_pointwise_check(&s.op, &y1, &y2, &s.x0, l1).map_err(|e| e.to_string())?;
        worst = worst.max(e.max_excess);
    }
    ensure(worst <= 0.0, || format!("max_excess {worst} with L1 = {l1}"))?;
    Ok(format!("L-hat = {l_hat:.6}, max_excess = {worst:.3e}"))
}

fn c6_violation_detection() -> Outcome {
    let s = setup(Some("u^2"), None, None, 16);
    let y1 = GridFunction::constant(Arc::clone(s.grid()), 2.0).unwrap();
    let y2 = GridFunction::constant(Arc::clone(s.grid()), 1.0).unwrap();
    let e = lipschitz_pointwise_check(&s.op, &y1, &y2, &s.x0, 1.0).map_err(|e| e.to_string())?;
    ensure(e.max_excess == 2.0, || format!("max_excess = {}", e.max_excess))?;
    Ok(format!("max_excess = {} at cell {}", e.max_excess, e.cell))
}

fn c7_luxemburg() -> Outcome {
    let mut r = rng(7);
    let mut worst = 0.0f64;
    for &p in &[1.0, 1.5, 2.0, 4.0] {
        let orlicz = NormSpec::orlicz(YoungFunction::power(p).map_err(|e| e.to_string())?);
        for _ in 0..100 {
            let n = r.random_range(1..200);
            let measures: Vec<f64> = (0..n).map(|_| r.random_range(0.01..1.0)).collect();
            let g = Arc::new(degenkit_core::Grid::from_measures(&measures).unwrap());
            let scale = 10f64.powf(r.random_range(-3.0..3.0));
            let x = random_function(&g, &mut r, -scale, scale);
            let closed: f64 = g
                .weights()
                .zip(x.values())
                .map(|(w, v)| w * v.abs().powf(p))
                .sum::<f64>()
                .powf(1.0 / p);
            let got = orlicz.norm(&x).map_err(|e| e.to_string())?;
            worst = worst.max((got - closed).abs() / closed);
        }
    }
    ensure(worst <= 1e-10, || format!("relative error {worst:e}"))?;
    let split = YoungFunction::new(YoungSpec::VariableExponent(Exponent::Steps {
        breaks: vec![0.5],
        values: vec![2.0, 4.0],
    }))
    .map_err(|e| e.to_string())?;
    let ns = NormSpec::orlicz(split);
    let mut worst_c = 0.0f64;
    for &c in &[0.1, 0.7, 1.0, 3.5, 250.0] {
        let x = GridFunction::constant(uniform(64), c).unwrap();
        worst_c = worst_c.max((ns.norm(&x).unwrap() - c).abs() / c);
    }
    ensure(worst_c <= 1e-10, || format!("variable exponent relative error {worst_c:e}"))?;
    Ok(format!("L_p relative error {worst:.1e}, variable exponent {worst_c:.1e}"))
}

fn c8_darbo_growth() -> Outcome {
    let params = DarboParams {
        radii: vec![0.5, 0.25, 0.1, 0.05],
        trials: 256,
        k_budget: 8,
        c: 1.0,
        tolerance: 0.05,
        seed: 8,
    };
    let out = darbo_growth_probe(&kuramoto(64), &params).map_err(|e| e.to_string())?;
    for p in &out.lhs {
        ensure(p.value <= out.rhs + 0.05, || format!("lhs({}) = {} > rhs {}", p.parameter, p.value, out.rhs))?;
    }
    ensure(out.growth_excess <= 1e-9, || format!("pointwise growth excess {}", out.growth_excess))?;
    let lhs: Vec<String> = out.lhs.iter().map(|p| format!("{:.4}", p.value)).collect();
    Ok(format!(
        "lhs = [{}], rhs = {:.4}, growth excess = {:.3e}",
        lhs.join(", "),
        out.rhs,
        out.growth_excess
    ))
}

fn c9_noncompactness() -> Outcome {
    let run = |n| compactness_probe(&kuramoto(n), 1.0, 1024, 32, 9, DEFAULT_FLOOR).map_err(|e| e.to_string());
    let coarse = run(256)?;
    let fine = run(512)?;
    ensure(coarse.alpha_lower > 0.1, || format!("alpha_lower = {}", coarse.alpha_lower))?;
    let drift = (fine.alpha_lower - coarse.alpha_lower).abs() / coarse.alpha_lower;
    ensure(drift <= 0.2, || format!("alpha_lower {} -> {}", coarse.alpha_lower, fine.alpha_lower))?;
    Ok(format!(
        "alpha_lower {:.4} (256) / {:.4} (512), verdict {}",
        coarse.alpha_lower, fine.alpha_lower, coarse.verdict
    ))
}

fn c10_parser_and_determinism() -> Outcome {
    let mut r = rng(10);
    let names = ["t", "s", "u", "v"];
    let vars = [Var::T, Var::S, Var::U, Var::V];
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let text = random_expression(&mut r, &names, 3);
        let e = parse_expr(&text, VarSet::K2).map_err(|e| format!("{text}: {e}"))?;
        let again = parse_expr(&e.to_string(), VarSet::K2).map_err(|e| e.to_string())?;
        ensure(again == e, || format!("round trip changed `{text}`"))?;
        let point: Vec<f64> = (0..4).map(|_| r.random_range(-1.0..1.0)).collect();
        for (k, var) in vars.iter().enumerate() {
            let d = diff_expr(&e, *var).map_err(|e| e.to_string())?;
            let sym = d.eval_slots(&[point[0], point[1], point[2], point[3]]).unwrap();
            let h = 1e-5;
            let (mut p, mut m) = (point.clone(), point.clone());
            p[k] += h;
            m[k] -= h;
            let fd = (e.eval_slots(&[p[0], p[1], p[2], p[3]]).unwrap()
                - e.eval_slots(&[m[0], m[1], m[2], m[3]]).unwrap())
                / (2.0 * h);
            let err = (sym - fd).abs() / (1.0 + sym.abs());
            ensure(err <= 1e-6, || format!("d/d{} of `{text}`: {sym} vs {fd}", names[k]))?;
            worst = worst.max(err);
        }
    }
    let csv = || -> Result<String, String> {
        let s = kuramoto(32);
        let a = local_mnc_ratio(&s, &[1.0, 0.5], 128, 4, 42).map_err(|e| e.to_string())?;
        let params = DarboParams {
            radii: vec![0.5, 0.1],
            trials: 64,
            k_budget: 4,
            c: 1.0,
            tolerance: 0.05,
            seed: 42,
        };
        let b = darbo_growth_probe(&s, &params).map_err(|e| e.to_string())?;
        Ok(a.report().to_csv() + &b.report().to_csv())
    };
    ensure(csv()? == csv()?, || "re-run produced different CSV".into())?;
    Ok(format!("50 expressions, worst FD mismatch {worst:.1e}; CSV reproducible"))
}

fn c11_appendix() -> Outcome {
    let mut r = rng(11);
    let youngs = [
        YoungSpec::VariableExponent(Exponent::Expr(parse_expr("1.5 + t", VarSet::T_ONLY).unwrap())),
        YoungSpec::VariableExponent(Exponent::Expr(parse_expr("2 + sin(3*t)", VarSet::T_ONLY).unwrap())),
        YoungSpec::VariableExponent(Exponent::Steps {
            breaks: vec![0.3, 0.7],
            values: vec![1.5, 3.0, 2.0],
        }),
        YoungSpec::Expr(parse_expr("(1 + t) * u^2", VarSet::YOUNG).unwrap()),
        YoungSpec::VariableExponent(Exponent::constant(2.0)),
    ];
    let mut worst = 0.0f64;
    for k in 0..20 {
        let phi = YoungFunction::new(youngs[k % youngs.len()].clone()).map_err(|e| e.to_string())?;
        let ns = NormSpec::orlicz(phi);
        let n = r.random_range(2..12);
        let a1: Vec<f64> = (0..n).map(|_| r.random_range(0.1..3.0)).collect();
        let a2: Vec<f64> = (0..n).map(|_| r.random_range(0.1..3.0)).collect();
        let out = average_stability_check(&a1, &a2, &uniform(n), &ns, 1.0, 0.05, 1000, k as u64)
            .map_err(|e| e.to_string())?;
        ensure(out.pass, || format!("instance {k}: worst ratio {}", out.worst_ratio))?;
        worst = worst.max(out.worst_ratio);
    }
    let curve = |f: &dyn Fn(f64) -> Vec<f64>| -> Vec<Vec<f64>> { (0..=100).map(|i| f(i as f64 / 100.0)).collect() };
    for (name, samples) in [
        ("circle", curve(&|l| vec![l.cos(), l.sin()])),
        ("constant", curve(&|_| vec![1.0, -2.0])),
        ("square", curve(&|l| vec![l * l])),
    ] {
        let m = mean_value_check(&samples, 0.01).map_err(|e| e.to_string())?;
        ensure(m.pass, || format!("mean value check failed for {name}: {m:?}"))?;
    }
    for _ in 0..100 {
        let g = uniform(r.random_range(1..128));
        let values = (0..g.len())
            .map(|_| if r.random_bool(0.2) { 0.0 } else { r.random_range(-50.0..50.0) })
            .collect();
        let x = GridFunction::scalar(Arc::clone(&g), values).unwrap();
        let eps = r.random_range(0.001..0.5);
        let y = simple_approx(&x, eps).map_err(|e| e.to_string())?;
        for i in 0..g.len() {
            ensure((x.at(i) - y.at(i)).abs() <= eps * x.at(i).abs(), || {
                format!("cell {i}: {} vs {} at eps {eps}", x.at(i), y.at(i))
            })?;
        }
    }
    Ok(format!("stability worst ratio {worst:.4}; mean value 3/3; simple_approx 100/100"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("Kuramoto non-differentiability", 10, c1_kuramoto_residual),
        ("affine degeneracy baseline", 5, c2_affine_baseline),
        ("derivative-formula consistency", 30, c3_derivative_consistency),
        ("(alpha,1)-nondegeneracy of L_2", 60, c4_l2_nondegeneracy),
        ("pointwise Lipschitz transfer", 10, c5_pointwise_transfer),
        ("Lipschitz violation detection", 1, c6_violation_detection),
        ("Luxemburg norm correctness", 5, c7_luxemburg),
        ("Darbo growth bound", 60, c8_darbo_growth),
        ("non-compactness witness", 120, c9_noncompactness),
        ("parser, differentiator, determinism", 5, c10_parser_and_determinism),
        ("appendix checks", 30, c11_appendix),
    ];
    let mut failures = 0;
    for (i, (name, limit, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|detail| {
            if elapsed <= Duration::from_secs(limit) {
                Ok(detail)
            } else {
                Err(format!("{detail}; runtime over the {limit} s limit"))
            }
        });
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failures += 1;
                ("FAIL", d)
            }
        };
        println!("[{tag}] {:>2}. {name}: {detail} ({:.2} s)", i + 1, elapsed.as_secs_f64());
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
