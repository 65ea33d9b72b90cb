mod common;

use degenkit_core::kernel_lang::{diff_expr, eval_expr, parse_expr, Var, VarSet};
use degenkit_core::KernelSpec;
use rand::Rng;

const NAMES: [&str; 4] = ["t", "s", "u", "v"];
const VARS: [Var; 4] = [Var::T, Var::S, Var::U, Var::V];

fn corpus() -> Vec<String> {
    let mut r = common::rng(50);
    (0..50).map(|_| common::random_expression(&mut r, &NAMES, 3)).collect()
}

#[test]
fn print_parse_is_idempotent() {
    for text in corpus() {
        let e = parse_expr(&text, VarSet::K2).unwrap();
        let printed = e.to_string();
        let again = parse_expr(&printed, VarSet::K2).unwrap();
        assert_eq!(again, e, "{text}");
        assert_eq!(again.to_string(), printed);
    }
}

#[test]
fn symbolic_derivatives_match_central_differences() {
    let mut r = common::rng(51);
    for text in corpus() {
        let e = parse_expr(&text, VarSet::K2).unwrap();
        for _ in 0..4 {
            let p: Vec<f64> = (0..4).map(|_| r.random_range(-1.0..1.0)).collect();
            for (k, var) in VARS.iter().enumerate() {
                let d = diff_expr(&e, *var).unwrap();
                let sym = eval_expr(&d, &common::bindings(&NAMES, &p)).unwrap();
                let h = 1e-5;
                let (mut hi, mut lo) = (p.clone(), p.clone());
                hi[k] += h;
                lo[k] -= h;
                let fd = (eval_expr(&e, &common::bindings(&NAMES, &hi)).unwrap()
                    - eval_expr(&e, &common::bindings(&NAMES, &lo)).unwrap())
                    / (2.0 * h);
                assert!((sym - fd).abs() <= 1e-6 * (1.0 + sym.abs()), "d/d{} {text}: {sym} vs {fd}", NAMES[k]);
            }
        }
    }
}

#[test]
fn evaluation_is_pure() {
    let mut r = common::rng(52);
    for text in corpus() {
        let e = parse_expr(&text, VarSet::K2).unwrap();
        let p: Vec<f64> = (0..4).map(|_| r.random_range(-1.0..1.0)).collect();
        let a = e.eval_slots(&[p[0], p[1], p[2], p[3]]).unwrap();
        let b = e.eval_slots(&[p[0], p[1], p[2], p[3]]).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }
}

#[test]
fn spec_slot_signatures() {
    assert!(KernelSpec::parse(Some("sin(t) * u"), Some("t*s*v"), Some("sin(u - v)")).is_ok());
    let err = KernelSpec::parse(Some("sin(x)"), None, None).unwrap_err();
    assert!(err.to_string().contains('x'), "{err}");
    assert!(KernelSpec::parse(Some("v"), None, None).is_err());
    assert!(KernelSpec::parse(None, Some("u"), None).is_err());
    assert!(KernelSpec::parse(None, None, None).is_err());
}
