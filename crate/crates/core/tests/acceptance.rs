//! One PASS/FAIL line per acceptance criterion; exits nonzero on any FAIL.

use std::sync::Arc;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use steinpsd::bound::{m_star, NbFit, VariantRegistry};
use steinpsd::dependent::{enumerate_moments, DependentSequence, SummandModel};
use steinpsd::oracle::{brute_force_law, dp_law, RunAutomaton};
use steinpsd::psd::{delta_g_uniform_bound, stein_expectation, stein_solve, PanjerPSD, PowerSeries};
use steinpsd::runs::{k1k2_moments, table1, table1_check, two_runs_cbar, two_runs_moments, K1K2Model, TwoRunsModel};
use steinpsd::verify::{verify_model, Status, VerifyOptions};

type Outcome = Result<String, String>;

fn families() -> Vec<(String, PanjerPSD)> {
    let mut out = Vec::new();
    for l in [0.5, 1.0, 4.0] {
        out.push((format!("Poisson({l})"), PanjerPSD::poisson(l).unwrap()));
    }
    for a in [1.0, 3.0] {
        for p in [0.3, 0.6] {
            out.push((format!("NB({a}, {p})"), PanjerPSD::negative_binomial(a, p).unwrap()));
        }
    }
    for n in [5, 20] {
        for p in [0.2, 0.5] {
            out.push((format!("Bi({n}, {p})"), PanjerPSD::binomial(n, p).unwrap()));
        }
    }
    out
}

fn c1_table() -> Outcome {
    let start = Instant::now();
    let cells = table1().map_err(|e| e.to_string())?;
    let bad = table1_check(&cells);
    let secs = start.elapsed().as_secs_f64();
    if !bad.is_empty() {
        return Err(format!("{} mismatches, first {:?}", bad.len(), bad[0]));
    }
    if secs >= 1.0 {
        return Err(format!("took {secs:.3} s"));
    }
    Ok(format!("18 cells, both columns, 6 decimals, {secs:.2e} s"))
}

fn c2_comparison() -> Outcome {
    let cells = table1().map_err(|e| e.to_string())?;
    match cells.iter().find(|c| !(c.closed_form < c.brown_xia)) {
        Some(c) => Err(format!("({}, {}) gives {} vs {}", c.n, c.p, c.closed_form, c.brown_xia)),
        None => {
            let gap = cells.iter().map(|c| c.brown_xia - c.closed_form).fold(f64::INFINITY, f64::min);
            Ok(format!("closed form below the comparison at all 18 cells, smallest gap {gap:.6}"))
        }
    }
}

fn c3_stein_identity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for (name, spec) in families() {
        for _ in 0..100 {
            let values: Vec<f64> = (0..257).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let g = move |k: u64| if k == 0 { 0.0 } else { values[(k % 257) as usize] };
            let e = stein_expectation(&spec, &g, 1.0).map_err(|e| format!("{name}: {e}"))?;
            worst = worst.max(e.abs_upper());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if worst >= 1e-10 || secs >= 10.0 {
        return Err(format!("max |E A g| + certified tail = {worst:.3e}, {secs:.2} s"));
    }
    Ok(format!("11 families x 100 functions, max |E A g| + certified tail = {worst:.3e}, {secs:.2} s"))
}

fn c4_delta_g() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = f64::NEG_INFINITY;
    for (name, spec) in families() {
        let bound = delta_g_uniform_bound(&spec).map_err(|e| e.to_string())?;
        let k_max = spec.support_max().unwrap_or(80).min(80);
        for _ in 0..200 {
            let set: Vec<bool> = (0..=30).map(|_| rng.gen_bool(0.5)).collect();
            let f = |k: u64| (k <= 30 && set[k as usize]) as u8 as f64;
            let sol = stein_solve(&spec, &f, k_max).map_err(|e| format!("{name}: {e}"))?;
            let sup = sol.max_abs_delta().max((sol.g(1) - sol.g(0)).abs());
            worst = worst.max(sup - bound);
            if sup > bound + 1e-12 {
                return Err(format!("{name}: sup |Δg| = {sup} exceeds {bound}"));
            }
        }
    }
    Ok(format!("11 families x 200 sets, max(sup |Δg| - bound) = {worst:.3e}"))
}

fn ratio(k: u32) -> BigRational {
    BigRational::new(BigInt::from(k), BigInt::from(20))
}

fn c5_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut count = 0;
    for (k1, k2) in [(0, 0), (1, 1), (1, 2), (2, 2)] {
        for _ in 0..50 {
            let model: Arc<dyn SummandModel>;
            let exact: Vec<BigRational>;
            if k1 == 0 {
                let trials = rng.gen_range(3..=15);
                let k: Vec<u32> = (0..trials).map(|_| rng.gen_range(0..=20)).collect();
                exact = k.iter().map(|&k| ratio(k)).collect();
                model = Arc::new(TwoRunsModel::new(k.iter().map(|&k| k as f64 / 20.0).collect()).unwrap());
            } else {
                let m = k1 + k2 - 1;
                let blocks = rng.gen_range(2..=15 / m);
                let k: Vec<u32> = (0..blocks * m).map(|_| rng.gen_range(0..=20)).collect();
                exact = k.iter().map(|&k| ratio(k)).collect();
                model = Arc::new(K1K2Model::new(k1, k2, k.iter().map(|&k| k as f64 / 20.0).collect()).unwrap());
            }
            let automaton = RunAutomaton::new(model.count_pattern().unwrap()).unwrap();
            let dp = dp_law(&automaton, &exact);
            let bf = brute_force_law(model.as_ref(), &exact, 1 << 16).map_err(|e| e.to_string())?;
            if dp != bf {
                return Err(format!("{} with {} trials: laws differ", model.kind(), exact.len()));
            }
            count += 1;
        }
    }
    Ok(format!("{count} random models (2-runs and (1,1), (1,2), (2,2)-runs, ≤ 15 trials), exact rational equality"))
}

/// `E X_i X_{i+1}` and `E X_i X_{i+1} X_{i+2}` by enumeration.
fn enumerated_products(seq: &DependentSequence) -> (Vec<f64>, Vec<f64>) {
    let n = seq.len();
    let mut pair = vec![0.0; n];
    let mut triple = vec![0.0; n];
    seq.for_each(|x, p| {
        for i in 0..n {
            if i + 1 < n {
                pair[i] += p * (x[i] * x[i + 1]) as f64;
            }
            if i + 2 < n {
                triple[i] += p * (x[i] * x[i + 1] * x[i + 2]) as f64;
            }
        }
    })
    .unwrap();
    (pair, triple)
}

fn c6_moments() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    let mut models = 0;
    for _ in 0..25 {
        let n = rng.gen_range(3..=14);
        let model = TwoRunsModel::new((0..=n).map(|_| rng.gen_range(0.0..=1.0)).collect()).unwrap();
        let exact = enumerate_moments(&DependentSequence::exact(Arc::new(model.clone()))).unwrap();
        for i in 1..=n {
            let m = two_runs_moments(&model, i).unwrap();
            let e = exact.per_index[i - 1];
            for (x, y) in [(m.a1, e.e_x), (m.abar1, e.bracket_n1), (m.abar2, e.bracket_x_n1), (m.abar3, e.x_n2_minus_1)] {
                worst = worst.max((x - y).abs());
            }
        }
        models += 1;
    }
    for (k1, k2) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
        for _ in 0..20 {
            let m = k1 + k2 - 1;
            let blocks = rng.gen_range(2..=18 / m);
            let model = K1K2Model::new(k1, k2, (0..blocks * m).map(|_| rng.gen_range(0.0..=1.0)).collect()).unwrap();
            let seq = DependentSequence::exact(Arc::new(model.clone()));
            let exact = enumerate_moments(&seq).unwrap();
            let (pair, triple) = enumerated_products(&seq);
            for i in 1..=model.len() {
                let c = k1k2_moments(&model, i).unwrap();
                let e = exact.per_index[i - 1];
                for (x, y) in [
                    (c.a_star, e.e_x),
                    (c.a_star_pair, pair[i - 1]),
                    (c.a_star_triple, triple[i - 1]),
                    (c.a1_star, e.bracket_n1),
                    (c.a2_star, e.bracket_x_n1),
                    (c.a3_star, e.x_n2_minus_1),
                ] {
                    worst = worst.max((x - y).abs());
                }
            }
            models += 1;
        }
    }
    if worst > 1e-12 {
        return Err(format!("max gap {worst:.3e}"));
    }
    Ok(format!("{models} random models, every index, max gap {worst:.3e}"))
}

const DOMINATION_VARIANTS: [&str; 5] = ["theorem31", "d1", "d2", "min", "closed-form"];

fn c7_domination() -> Outcome {
    let mut instances: Vec<(String, Arc<dyn SummandModel>)> = Vec::new();
    for n in 8..=14 {
        for p in [0.1, 0.2, 0.3, 0.4, 0.5] {
            instances.push((format!("2-runs n={n} p={p}"), Arc::new(TwoRunsModel::iid(n, p).unwrap())));
        }
    }
    for n in 6..=9 {
        for p in [0.2, 0.35, 0.5] {
            instances.push((format!("(1,2)-runs n={n} p={p}"), Arc::new(K1K2Model::iid(1, 2, n, p).unwrap())));
        }
    }
    let mut evaluated = 0;
    let mut failures = Vec::new();
    for (label, model) in &instances {
        let report = verify_model(model.clone(), &VerifyOptions::default()).map_err(|e| format!("{label}: {e}"))?;
        for v in DOMINATION_VARIANTS {
            let name = format!("bound-dominates-tv:{v}");
            match report.checks.iter().find(|c| c.name == name) {
                Some(c) if c.status == Status::Pass => evaluated += 1,
                Some(c) => failures.push(format!("{label} {v}: {:?} {}", c.status, c.detail)),
                None => failures.push(format!("{label} {v}: missing")),
            }
        }
    }
    if !failures.is_empty() {
        return Err(format!("{} of {} cases: {}", failures.len(), evaluated + failures.len(), failures.join("; ")));
    }
    Ok(format!("{} instances, {evaluated} bound evaluations, all ≥ exact d_TV", instances.len()))
}

fn c8_order() -> Outcome {
    let ns = [50usize, 100, 200, 400, 800];
    let d1 = VariantRegistry::builtin().get("d1").unwrap();
    let mut pts = Vec::new();
    for &n in &ns {
        let seq = DependentSequence::exact(Arc::new(TwoRunsModel::iid(n, 0.25).unwrap()));
        let ctx = steinpsd::bound::BoundContext::fitted(seq, &NbFit).map_err(|e| e.to_string())?;
        let r = d1.evaluate(&ctx).map_err(|e| e.to_string())?;
        if r.term_tau > 1e-9 {
            return Err(format!("τ term {} at n = {n}", r.term_tau));
        }
        pts.push(((n as f64).ln(), r.total.ln()));
    }
    let k = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / k, sy / k);
    let num: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    let slope = num / den;
    if (slope + 0.5).abs() > 0.1 {
        return Err(format!("slope {slope:.4}"));
    }
    Ok(format!("log-log slope {slope:.4} over n = 50..800"))
}

fn c9_arithmetic() -> Outcome {
    let checks = [
        (m_star(20) == 10, "m*(20) = 10"),
        (m_star(21) == 11, "m*(21) = 11"),
        ((two_runs_cbar(20).unwrap() - 4.0 / 7f64.sqrt()).abs() < 1e-12, "c̄(20) = 4/√7"),
        (two_runs_cbar(8).is_ok(), "n = 8 accepted"),
        (two_runs_cbar(7).is_err_and(|e| e.to_string().contains("n ≥ 8")), "n = 7 rejected with 'n ≥ 8'"),
    ];
    match checks.iter().find(|(ok, _)| !ok) {
        Some((_, what)) => Err(format!("{what} does not hold")),
        None => Ok(checks.map(|(_, w)| w).join(", ")),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("table reproduction", c1_table),
        ("comparison claim", c2_comparison),
        ("Stein identity", c3_stein_identity),
        ("Δg uniform bound", c4_delta_g),
        ("oracle equivalence", c5_oracles),
        ("closed-form moments", c6_moments),
        ("bound domination", c7_domination),
        ("order of d1", c8_order),
        ("m* and c̄ arithmetic", c9_arithmetic),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {} ({name}): {detail} [{secs:.2} s]", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {} ({name}): {detail} [{secs:.2} s]", k + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
