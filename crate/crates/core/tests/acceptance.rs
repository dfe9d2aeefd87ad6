//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::sync::Arc;
use std::time::{Duration, Instant};

use num_complex::Complex64 as C;
use rarita::cli::random_directions;
use rarita::curvature::boxes::expand_box_factor;
use rarita::curvature::RuleTable;
use rarita::derivations::{run_checks, verify_all, VerifyDocument};
use rarita::evolver::convergence::{mode_matrix, spatial_error, temporal_order};
use rarita::evolver::symbol::symmetrizer_residual;
use rarita::evolver::{
    apply_gauge, characteristic_speeds, evolve, find_symmetrizer, principal_symbol, Closure, GaugeField, GaugeVariant,
    InitMode, Lab, SimConfig, SpatialBasis, SymbolParams,
};
use rarita::ir::{equal, jet_eval, parse, Expression, JetAssignment};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn symbolic_suite(doc: &VerifyDocument, elapsed: Duration) -> Outcome {
    let passed = doc.checks.values().filter(|r| r.passed()).count();
    let failed: Vec<&str> = doc.checks.values().filter(|r| !r.passed()).map(|r| r.check.as_str()).collect();
    outcome(
        doc.checks.len() == 10 && failed.is_empty() && elapsed <= Duration::from_secs(60),
        format!("{passed}/{} checks pass in {:.2} s; failing: {failed:?}", doc.checks.len(), elapsed.as_secs_f64()),
    )
}

fn trace_expr(doc: &VerifyDocument, check: &str, name: &str) -> Option<Expression> {
    let step = doc.checks.get(check)?.trace.iter().find(|t| t.name == name)?;
    parse(&step.expr).ok()
}

fn assertion_ok(doc: &VerifyDocument, check: &str, what: &str) -> bool {
    doc.checks.get(check).is_some_and(|r| r.assertions.iter().any(|a| a.what == what && a.passed))
}

fn buchdahl_fidelity(doc: &VerifyDocument) -> Outcome {
    let eq19 = assertion_ok(doc, "derive_buchdahl", "R19 = 0") && assertion_ok(doc, "derive_buchdahl", "Q19 = 0");
    let Some(x20) = trace_expr(doc, "derive_buchdahl", "X20") else {
        return outcome(false, "expanded condition missing from the trace");
    };
    let canon = rarita::ir::canonicalize(&x20);
    let psi_free = canon.terms.iter().all(|t| t.factors.iter().all(|f| f.name() != "Psi"));
    // 6m²τ_A minus the expansion, with coefficients (Φ, Λ, ieF', ieF)
    let lhs = parse("6 m m tau_{A}").unwrap().add(&x20.neg());
    let monomials = ["Phi_{A}^{B A' B'} tau_{B A' B'}", "Lambda tau_{A}", "e F^{A' B'} tau_{A A' B'}", "e F_{A B} tau^{B}"];
    let form = |c: [&str; 4]| {
        c.iter().zip(monomials).fold(Expression::zero(), |acc, (k, m)| acc.add(&parse(&format!("{k} {m}")).expect("monomial parses")))
    };
    let expected = ["1", "-6", "i", "-2 i"];
    let matches = equal(&lhs, &form(expected)).unwrap_or(false);
    let flipped = ["-1", "6", "-i", "2 i"];
    let rejects_each_flip = (0..4).all(|k| {
        let mut c = expected;
        c[k] = flipped[k];
        !equal(&lhs, &form(c)).unwrap_or(true)
    });
    outcome(
        eq19 && matches && rejects_each_flip && psi_free,
        format!(
            "contracted condition exact: {eq19}; coefficient set {{+Phi, -6 Lambda, +ie, -2ie}}: {matches}; single-coefficient changes rejected: {rejects_each_flip}; no Psi: {psi_free}"
        ),
    )
}

fn oracle_soundness(doc: &VerifyDocument, table: &RuleTable) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut claims = 0;
    let mut errors = vec![];
    for r in doc.checks.values() {
        claims += r.claimed_zero.len();
        for seed in 0..100u64 {
            let t = table.clone();
            let mut a = JetAssignment::random(seed).with_box_rule(Arc::new(move |f| expand_box_factor(f, &t)));
            for e in &r.claimed_zero {
                match jet_eval(e, &mut a) {
                    Ok(v) => worst = worst.max(v.max_abs()),
                    Err(err) => errors.push(format!("{}: {err}", r.check)),
                }
            }
        }
    }
    let names = ["check_clifford", "translate_rs", "derive_buchdahl"];
    let flips = table.single_sign_flips();
    let mut undetected = vec![];
    for (label, t) in &flips {
        let reports = run_checks(&names, t).expect("registered checks");
        if reports.values().all(|r| r.passed()) {
            undetected.push(label.clone());
        }
    }
    outcome(
        worst <= 1e-10 && errors.is_empty() && undetected.is_empty() && !flips.is_empty(),
        format!(
            "{claims} claimed zeros x 100 assignments, worst |value| {worst:.1e}, eval errors {}; {} sign flips, undetected: {undetected:?}",
            errors.len(),
            flips.len()
        ),
    )
}

fn characteristics() -> Outcome {
    let basis = SpatialBasis::default();
    let params = SymbolParams::default();
    let third = 1.0 / 3.0;
    let expected = [-1.0, -1.0, -third, -third, -third, -third, third, third, third, third, 1.0, 1.0];
    let mut dev: f64 = 0.0;
    let mut hyperbolic = true;
    let dirs = random_directions(20, 2024);
    for k in &dirs {
        match characteristic_speeds(&basis, *k, params) {
            Ok(s) => dev = s.iter().zip(&expected).map(|(a, b)| (a - b).abs()).fold(dev, f64::max),
            Err(_) => hyperbolic = false,
        }
    }
    let (pd, res) = match find_symmetrizer(&basis, params) {
        Ok(h) => {
            let res = dirs.iter().map(|k| symmetrizer_residual(&h.h, &principal_symbol(&basis, *k, params))).fold(0.0, f64::max);
            (h.spectrum[0], res)
        }
        Err(_) => (f64::NAN, f64::NAN),
    };
    outcome(
        hyperbolic && dev <= 1e-12 && pd > 0.0 && res <= 1e-12,
        format!("20 directions, speed deviation {dev:.1e}; H min eigenvalue {pd:.3}, max |HM + (HM)*| {res:.1e}"),
    )
}

fn run(cfg: SimConfig) -> Vec<(f64, f64)> {
    match evolve(&cfg) {
        Ok((ts, _)) => ts.rows.iter().map(|r| (r.norm_t, r.norm_s)).collect(),
        Err(_) => vec![(f64::NAN, f64::NAN)],
    }
}

fn dichotomy() -> Outcome {
    let start = Instant::now();
    let base = SimConfig { n: 64, dt: 0.005, steps: 2000, background: 1.0, ..SimConfig::default() };
    let (mut drift, mut min_growth, mut min_final, mut sym_max) = (0.0f64, f64::INFINITY, f64::INFINITY, 0.0f64);
    for seed in 1..=10 {
        let a = run(SimConfig { mass: 0.0, closure: Closure::StaticDifference, init: InitMode::RandomModes, seed, ..base.clone() });
        let (t0, s0) = a[0];
        for (t, s) in &a {
            drift = drift.max(((t - t0) / t0).abs()).max(((s - s0) / s0).abs());
        }
        let b = run(SimConfig { mass: 1.0, closure: Closure::StaticDifference, init: InitMode::Constrained, seed, ..base.clone() });
        let (b0, b1) = (b[0].0, b[b.len() - 1].0);
        min_growth = min_growth.min(b1 / b0);
        min_final = min_final.min(b1);
        let c = run(SimConfig { mass: 1.0, closure: Closure::Symmetric, init: InitMode::Constrained, seed, ..base.clone() });
        for (t, s) in &c {
            sym_max = sym_max.max(*t).max(*s);
        }
    }
    let elapsed = start.elapsed();
    outcome(
        drift <= 1e-10 && min_growth >= 1e2 && min_final > 1e-3 && sym_max <= 1e-8 && elapsed <= Duration::from_secs(300),
        format!(
            "10 seeds, N=64, T=10: (a) m=0 relative drift {drift:.1e}; (b) m=1 static growth >= {min_growth:.1e} (final >= {min_final:.1e}); (c) m=1 symmetric max {sym_max:.1e}; {:.1} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn convergence() -> Outcome {
    let base = SimConfig { mass: 0.0, ..SimConfig::default() };
    let study = temporal_order(&base, 8, 0.05, 4, 1.0, 11);
    let orders = study.map(|s| s.orders).unwrap_or_default();
    let in_band = !orders.is_empty() && orders.iter().all(|p| (3.8..=4.2).contains(p));
    let lab = Lab::new(base).expect("default config");
    let spatial = spatial_error(&lab, 5);
    let mode = (1..32)
        .map(|bin| {
            let m = principal_symbol(&SpatialBasis::default(), [0.0, 0.0, lab.grid.k[bin]], SymbolParams::default());
            (mode_matrix(&lab, bin) - m).norm()
        })
        .fold(0.0, f64::max);
    outcome(
        in_band && spatial <= 1e-10 && mode <= 1e-10,
        format!("temporal orders {orders:.3?}; spatial error {spatial:.1e}; resolved-mode symbol error {mode:.1e}"),
    )
}

fn gauge() -> Outcome {
    let cfg = SimConfig { mass: 0.0, init: InitMode::RandomModes, steps: 200, ..SimConfig::default() };
    let lab = Lab::new(cfg.clone()).expect("config");
    let (_, mut s) = match evolve(&cfg) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("evolution failed: {e}")),
    };
    let (t0, s0) = lab.constraints(&s);
    let mut change: f64 = 0.0;
    for seed in 0..5 {
        let g = GaugeField::random(&lab, seed);
        if apply_gauge(&lab, &mut s, &g, GaugeVariant::Derived).is_err() {
            return outcome(false, "gauge shift refused");
        }
        let (t1, s1) = lab.constraints(&s);
        let d: Vec<[C; 2]> = t0.iter().zip(&t1).map(|(a, b)| [a[0] - b[0], a[1] - b[1]]).collect();
        let e: Vec<[C; 2]> = s0.iter().zip(&s1).map(|(a, b)| [a[0] - b[0], a[1] - b[1]]).collect();
        change = change.max(lab.norm(&d)).max(lab.norm(&e));
    }
    let g = GaugeField::removing_tau(&s);
    let _ = apply_gauge(&lab, &mut s, &g, GaugeVariant::Derived);
    let tau = (0..cfg.n).flat_map(|j| s.tau(j)).map(|z| z.norm()).fold(0.0, f64::max);
    let massive = Lab::new(SimConfig { mass: 1.0, ..cfg }).expect("config");
    let refused = apply_gauge(&massive, &mut s.clone(), &g, GaugeVariant::Derived).is_err();
    outcome(
        change <= 1e-10 && tau <= 1e-10 && refused,
        format!("constraint change under 5 random shifts {change:.1e}; max |tau| after removal {tau:.1e}; m=1 refused: {refused}"),
    )
}

fn main() {
    let table = RuleTable::default();
    let start = Instant::now();
    let doc = verify_all(&table, "default");
    let elapsed = start.elapsed();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("symbolic regression suite", Box::new(|| symbolic_suite(&doc, elapsed))),
        ("curvature-form fidelity", Box::new(|| buchdahl_fidelity(&doc))),
        ("oracle soundness and fault injection", Box::new(|| oracle_soundness(&doc, &table))),
        ("characteristics and symmetrizer", Box::new(characteristics)),
        ("constraint dichotomy", Box::new(dichotomy)),
        ("convergence", Box::new(convergence)),
        ("massless gauge experiment", Box::new(gauge)),
    ];
    let mut failures = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = f();
        if !o.passed {
            failures += 1;
        }
        println!("{} {} {name} ({:.1} s): {}", if o.passed { "PASS" } else { "FAIL" }, k + 1, t.elapsed().as_secs_f64(), o.detail);
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
