//! Acceptance checks, one PASS/FAIL line per criterion. Exits nonzero on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use hypercross::approx::{
    bernstein_battery, eps_dimension, jackson_battery, log_grid, rate_study, worst_case_element,
};
use hypercross::bounds::{
    analytic_constant, gamma_h_upper, gamma_reference_spec, h_reference_spec, korobov_constants,
    sandwich_report, simplex_bounds, superexp_bound, FiniteSet,
};
use hypercross::fixtures::{oracle_family, signed, spec_a1, spec_a2, spec_k1, spec_k2};
use hypercross::report::to_json_string;
use hypercross::spde::{run_demo, SpdeConfig};
use hypercross::{
    brute_force_count, count_cross, simplex_count, BruteBox, CrossSpec, SmoothnessSequence, ValidatedSpec,
};

type Outcome = Result<String, String>;

const T_GRID: [f64; 13] = [1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 25.0, 40.0, 64.0, 100.0];
const BOX_LIMIT: f64 = 2e6;
const SIGNS: [(bool, bool); 4] = [(false, false), (true, false), (false, true), (true, true)];

/// Every (spec, T) pair of the oracle matrix whose brute-force box is small enough to scan.
fn oracle_matrix() -> Vec<(String, ValidatedSpec, f64)> {
    let mut out = Vec::new();
    for (name, base) in oracle_family() {
        for (xs, ys) in SIGNS {
            let spec = signed(&base, xs, ys);
            for t in T_GRID {
                let bbox = BruteBox::default_for(&spec, t).expect("box");
                if bbox.points(&spec) <= BOX_LIMIT {
                    out.push((format!("{name}[x{}y{}]", xs as u8, ys as u8), spec.clone(), t));
                }
            }
        }
    }
    out
}

/// `value > bound` beyond the `1e−9` slack allowed on real-valued bounds.
fn exceeds(value: f64, bound: f64) -> bool {
    value > bound + 1e-9
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let spent = start.elapsed();
    if spent <= limit {
        Ok(())
    } else {
        Err(format!("took {spent:.1?}, limit {limit:?}"))
    }
}

fn oracle_equivalence(matrix: &[(String, ValidatedSpec, f64)]) -> Outcome {
    let start = Instant::now();
    let mut m_seen = [false; 4];
    let mut signs_seen = [false; 4];
    for (name, spec, t) in matrix {
        let fast = count_cross(spec, *t, None).map_err(|e| format!("{name}@{t}: {e}"))?;
        let slow = brute_force_count(spec, *t, None).map_err(|e| format!("{name}@{t}: {e}"))?;
        if fast.total != slow.total {
            return Err(format!("{name}@{t}: count {} != brute force {}", fast.total, slow.total));
        }
        m_seen[spec.m as usize] = true;
        signs_seen[usize::from(spec.x_signed) + 2 * usize::from(spec.y_signed)] = true;
    }
    if matrix.len() < 200 {
        return Err(format!("only {} pairs", matrix.len()));
    }
    if !m_seen.iter().all(|&b| b) || !signs_seen.iter().all(|&b| b) {
        return Err("matrix misses an m value or a sign combination".into());
    }
    within(Duration::from_secs(60), start)?;
    Ok(format!("{} pairs agree in {:.1?}", matrix.len(), start.elapsed()))
}

fn fixed_counts() -> Outcome {
    let cases = [
        ("K1@4", spec_k1(), 4.0, 9u128),
        ("A1@8", spec_a1(), 8.0, 12),
        ("K1 signed-both@4", signed(&spec_k1(), true, true), 4.0, 19),
    ];
    for (name, spec, t, want) in cases {
        let got = count_cross(&spec, t, None).map_err(|e| e.to_string())?.total;
        if got != want {
            return Err(format!("{name}: {got} != {want}"));
        }
    }
    Ok("9, 12, 19".into())
}

fn constants() -> Outcome {
    let k1 = korobov_constants(&spec_k1()).map_err(|e| e.to_string())?.m_t;
    let k2 = korobov_constants(&spec_k2()).map_err(|e| e.to_string())?.m_t;
    let a1 = analytic_constant(&spec_a1()).map_err(|e| e.to_string())?;
    let a2 = analytic_constant(&spec_a2()).map_err(|e| e.to_string())?;
    let checks = [
        ("M(0) K1", k1, 3f64.ln(), 1e-9),
        ("M(0) r_j=2j", k2, 0.5 * 5f64.ln() - 2.0 / 3.0, 1e-6),
        ("M_0q A1", a1, 0.8202, 1e-4),
        ("M_pq A2", a2, 1.5589, 1e-3),
    ];
    for (name, got, want, tol) in checks {
        if !close(got, want, tol) {
            return Err(format!("{name} = {got}, expected {want} ± {tol}"));
        }
    }
    Ok(format!("M(0)={k1:.10}, {k2:.8}; M_0q={a1:.6}; M_pq={a2:.6}"))
}

fn sandwich_suite(matrix: &[(String, ValidatedSpec, f64)]) -> Outcome {
    let mut certified = 0;
    let mut violations = Vec::new();
    for (name, spec, t) in matrix {
        let report = sandwich_report(spec, *t).map_err(|e| format!("{name}@{t}: {e}"))?;
        if report.hypotheses_ok {
            certified += 1;
            if !report.sandwich_holds() {
                violations.push(format!(
                    "{name}@{t}: lower {} exact {} upper {:.4}",
                    report.lower,
                    report.exact.unwrap_or_default(),
                    report.upper.unwrap_or(f64::NAN)
                ));
            }
        }
    }

    let mut finite_sets = 0;
    for m in 1..=3 {
        let spec = gamma_reference_spec(m).map_err(|e| e.to_string())?;
        for t in T_GRID {
            let exact = count_cross(&spec, t, None).map_err(|e| e.to_string())?.total as f64;
            let bound = gamma_h_upper(FiniteSet::Gamma, m, 0, 1.0, 1.0, t).map_err(|e| e.to_string())?;
            if exceeds(exact, bound) {
                violations.push(format!("Gamma m={m} T={t}: {exact} > {bound}"));
            }
            finite_sets += 1;
        }
    }
    for m in 1..=3 {
        for t_par in 0..=2 {
            for a in [1.0, 2.0] {
                for r in [0.5, 1.0, 2.0] {
                    let spec = h_reference_spec(m, t_par, a, r).map_err(|e| e.to_string())?;
                    for t in T_GRID {
                        let exact = count_cross(&spec, t, None).map_err(|e| e.to_string())?.total as f64;
                        let bound =
                            gamma_h_upper(FiniteSet::H, m, t_par, a, r, t).map_err(|e| e.to_string())?;
                        if exceeds(exact, bound) {
                            violations.push(format!("H m={m} t={t_par} a={a} r={r} T={t}: {exact} > {bound}"));
                        }
                        finite_sets += 1;
                    }
                }
            }
        }
    }

    let mut simplex = 0;
    let choices = [0.5, 1.0, 2.0, std::f64::consts::E];
    let mut stack: Vec<Vec<usize>> = (0..choices.len()).map(|i| vec![i]).collect();
    while let Some(pick) = stack.pop() {
        let rates: Vec<f64> = pick.iter().map(|&i| choices[i]).collect();
        for e in 1..=8 {
            let t = f64::from(e).exp();
            let (lo, hi) = match simplex_bounds(&rates, rates.len(), t) {
                Ok(b) => b,
                Err(_) => continue,
            };
            let exact = simplex_count(&rates, t.ln()).map_err(|e| e.to_string())? as f64;
            if exceeds(lo, exact) || exceeds(exact, hi) {
                violations.push(format!("simplex {rates:?} T=e^{e}: {exact} outside [{lo}, {hi}]"));
            }
            simplex += 1;
        }
        if pick.len() < 5 {
            let last = *pick.last().expect("nonempty");
            stack.extend((last..choices.len()).map(|i| [pick.as_slice(), &[i]].concat()));
        }
    }

    let e = std::f64::consts::E;
    let zero_m = |seq| CrossSpec::analytic(0, 2.0, 1.0, 0.0, 0.0, seq).validate().expect("valid");
    for (omega, tau) in [(1.0, 1.0), (1.0, 2.0), (e, 1.0), (e, 2.0)] {
        let spec = zero_m(SmoothnessSequence::power(omega, tau));
        for k in 1..=8 {
            let t = f64::from(k).exp();
            let exact = count_cross(&spec, t, None).map_err(|e| e.to_string())?.total as f64;
            let bound = superexp_bound(omega, tau, t).map_err(|e| e.to_string())?;
            if exceeds(exact, bound) {
                violations.push(format!("superexp omega={omega} tau={tau} T=e^{k}: {exact} > {bound}"));
            }
        }
    }
    let ej = zero_m(SmoothnessSequence::affine(0.0, e));
    for k in 1..=8 {
        let t = f64::from(k).exp();
        let exact = count_cross(&ej, t, None).map_err(|e| e.to_string())?.total as f64;
        let bound = e / (2.0 * std::f64::consts::PI) * t;
        if exceeds(exact, bound) {
            violations.push(format!("r_j = e*j, T=e^{k}: {exact} > e/(2 pi) T = {bound}"));
        }
    }
    let checked = format!(
        "{certified} certified pairs, {finite_sets} Gamma/H checks, {simplex} simplex checks, superexp and e*j grids"
    );
    if violations.is_empty() {
        Ok(checked)
    } else {
        Err(format!("{} violations among {checked}: {}", violations.len(), violations.join("; ")))
    }
}

fn batteries() -> Outcome {
    let ts = [1.0, 2.0, 4.0, 8.0, 16.0];
    let mut cases = 0;
    for (name, spec) in [("K1", spec_k1()), ("K2", spec_k2()), ("A1", spec_a1()), ("A2", spec_a2())] {
        let j = jackson_battery(&spec, 1000, &ts, 11).map_err(|e| e.to_string())?;
        let b = bernstein_battery(&spec, 1000, &ts, 12).map_err(|e| e.to_string())?;
        if j.violations > 0 || b.violations > 0 {
            return Err(format!("{name}: {} Jackson and {} Bernstein violations", j.violations, b.violations));
        }
        cases += j.cases + b.cases;
    }
    let worst = worst_case_element(&spec_a1(), 8.0).map_err(|e| e.to_string())?;
    let target = 1.0 / (3.0 * std::f64::consts::E);
    if !close(worst.gap, target, 1e-12) {
        return Err(format!("worst-case gap {} != 1/(3e) = {target}", worst.gap));
    }
    Ok(format!("{cases} cases without violation; worst-case gap {:.15}", worst.gap))
}

fn rates() -> Outcome {
    let start = Instant::now();
    let grid = log_grid(2f64.powi(-3), 2f64.powi(-17), 15).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    for (name, spec, lo, hi) in
        [("A1", spec_a1(), 0.9, 1.1), ("K2", spec_k2(), 0.9, 1.1), ("K1", spec_k1(), 1.0, 1.3)]
    {
        let study = rate_study(&spec, &grid).map_err(|e| e.to_string())?;
        let ratio = study.fitted_slope / study.theoretical_exponent;
        if !(lo..=hi).contains(&ratio) {
            return Err(format!("{name}: slope ratio {ratio:.4} outside [{lo}, {hi}]"));
        }
        parts.push(format!("{name} {ratio:.4}"));
    }
    within(Duration::from_secs(120), start)?;
    Ok(format!("slope/exponent: {} in {:.1?}", parts.join(", "), start.elapsed()))
}

fn d_independence() -> Outcome {
    let specs = [spec_k1(), spec_k2(), spec_a1(), spec_a2(), oracle_family().swap_remove(9).1];
    let mut pairs = 0;
    for spec in &specs {
        for i in 1..=10 {
            let eps = 2f64.powi(-i);
            let full = eps_dimension(spec, eps, None).map_err(|e| e.to_string())?.n;
            let d = spec.active_dimension(1.0 / eps).map_err(|e| e.to_string())?;
            for cap in [d, d + 1, d + 7, d + 100] {
                let capped = eps_dimension(spec, eps, Some(cap)).map_err(|e| e.to_string())?.n;
                if capped != full {
                    return Err(format!("eps={eps} cap={cap}: {capped} != {full}"));
                }
            }
            pairs += 1;
        }
    }
    Ok(format!("{pairs} (spec, eps) pairs"))
}

fn spde_demo() -> Outcome {
    let start = Instant::now();
    let report = run_demo(&SpdeConfig::default(), 3, Some(12)).map_err(|e| e.to_string())?;
    let cond = report.conditions.condition_value;
    let f_dual = report.coefficients.f_dual_norm;
    let margin = report.coefficients.min_margin();
    let checks = [
        (close(cond, 0.4029, 1e-3), format!("condition {cond}")),
        (close(report.sigma_min_cert, 0.857987, 1e-6), format!("sigma_min {}", report.sigma_min_cert)),
        (close(f_dual, (2.0f64 / 3.0).sqrt(), 2e-4), format!("dual norm {f_dual}")),
        (margin >= 1.0, format!("min margin {margin}")),
        ((3.5..=4.5).contains(&report.richardson_ratio), format!("Richardson {}", report.richardson_ratio)),
    ];
    if let Some((_, msg)) = checks.iter().find(|(ok, _)| !ok) {
        return Err(msg.clone());
    }
    within(Duration::from_secs(300), start)?;
    Ok(format!(
        "condition {cond:.5}, dual norm {f_dual:.6}, min margin {margin:.3}, Richardson {:.3}",
        report.richardson_ratio
    ))
}

/// A report touching every parallel code path.
fn suite_report(matrix: &[(String, ValidatedSpec, f64)]) -> String {
    let counts: Vec<_> = matrix
        .iter()
        .step_by(5)
        .map(|(_, spec, t)| count_cross(spec, *t, None).expect("count"))
        .collect();
    let ts = [1.0, 4.0, 16.0];
    let batteries: Vec<_> = [spec_k1(), spec_a2()]
        .iter()
        .flat_map(|s| [jackson_battery(s, 200, &ts, 5).expect("battery"), bernstein_battery(s, 200, &ts, 6).expect("battery")])
        .collect();
    let grid = log_grid(0.125, 1e-3, 6).expect("grid");
    let study = rate_study(&spec_k1(), &grid).expect("study");
    let spde = run_demo(&SpdeConfig { n: 129, ..SpdeConfig::default() }, 2, None).expect("demo");
    let all = serde_json::json!({
        "counts": counts,
        "batteries": batteries,
        "study": study,
        "spde": spde,
    });
    to_json_string(&all).expect("json")
}

fn determinism(matrix: &[(String, ValidatedSpec, f64)]) -> Outcome {
    let mut reference: Option<String> = None;
    for threads in [1, 2, 3, 8, 1] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| e.to_string())?;
        let report = pool.install(|| suite_report(matrix));
        match &reference {
            None => reference = Some(report),
            Some(r) if *r != report => return Err(format!("report differs with {threads} threads")),
            Some(_) => {}
        }
    }
    Ok(format!("identical {}-byte reports for 1, 2, 3, 8 threads", reference.map_or(0, |r| r.len())))
}

fn main() -> ExitCode {
    let matrix = oracle_matrix();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("oracle equivalence", Box::new(|| oracle_equivalence(&matrix))),
        ("fixed-point counts", Box::new(fixed_counts)),
        ("constants", Box::new(constants)),
        ("sandwich suite", Box::new(|| sandwich_suite(&matrix))),
        ("Jackson/Bernstein batteries", Box::new(batteries)),
        ("rate reproduction", Box::new(rates)),
        ("d-independence", Box::new(d_independence)),
        ("SPDE demo", Box::new(spde_demo)),
        ("determinism", Box::new(|| determinism(&matrix))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {}. {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {}. {name}: {detail}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
