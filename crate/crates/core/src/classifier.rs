//! Long-time classification of runs: certified sufficient conditions for
//! vanishing and spreading, heuristics at the final time, the threshold
//! search in the amplitude `sigma`, and the asymptotic front speed.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinearity::{Kind, Nonlinearity};
use crate::numerics;
use crate::par;
use crate::phase_plane::{self, StationaryProfile};
use crate::semiwave;
use crate::solver::{self, InitialData, Run, SolverConfig, SolverParams, Snapshot};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Spreading,
    Vanishing,
    TransitionBistable,
    TransitionCombustion,
    Undecided,
}

impl Outcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            Outcome::Spreading => "spreading",
            Outcome::Vanishing => "vanishing",
            Outcome::TransitionBistable => "transition_bistable",
            Outcome::TransitionCombustion => "transition_combustion",
            Outcome::Undecided => "undecided",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Certificate {
    /// bistable/combustion, `max u <= theta`
    ThetaCap,
    /// bistable/combustion, `int u <= theta sqrt(2 pi / (e K))`
    MassCap,
    /// monostable, short interval and small amplitude
    SmallAmpMono,
    /// monostable, `h - g >= pi / sqrt(f'(0))`
    WidthMono,
    /// bistable/combustion, `u >= v_Z` on a window of length `2Z`
    DominatesVZ,
    Heuristic,
}

/// Numbers behind a verdict. For certificates, `lhs <= rhs` (or `>=` for the
/// spreading ones) is the inequality that fired.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub t: f64,
    pub max_u: f64,
    pub width: f64,
    pub mass: f64,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    /// Recentring shift (minus the argmax position).
    pub gamma_hat: Option<f64>,
}

impl Evidence {
    fn of(s: &Snapshot) -> Evidence {
        Evidence { t: s.t, max_u: s.max_u(), width: s.width(), mass: s.mass(), lhs: None, rhs: None, gamma_hat: None }
    }

    fn with(mut self, lhs: f64, rhs: f64) -> Evidence {
        self.lhs = Some(lhs);
        self.rhs = Some(rhs);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub outcome: Outcome,
    pub certificate: Certificate,
    pub evidence: Evidence,
}

/// Heuristic thresholds used when no certificate fired.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierTolerances {
    pub spread_tol: f64,
    pub vanish_tol: f64,
    pub trans_tol: f64,
    /// `Z = critical length + vz_margin` for the dominance certificate.
    pub vz_margin: f64,
}

impl Default for ClassifierTolerances {
    fn default() -> Self {
        ClassifierTolerances { spread_tol: 1e-2, vanish_tol: 1e-4, trans_tol: 5e-2, vz_margin: 0.25 }
    }
}

/// Largest `delta` with `pi^2 / (4 (1+delta)^2 L^2) - f'(0) >= 2 delta`.
fn small_amp_delta(fp0: f64, l: f64) -> Option<f64> {
    let g = |d: f64| PI * PI / (4.0 * (1.0 + d).powi(2) * l * l) - fp0 - 2.0 * d;
    if !(g(0.0) > 0.0) {
        return None;
    }
    let mut hi = 1.0;
    while g(hi) > 0.0 {
        hi *= 2.0;
    }
    let (lo, _) = numerics::bisect_predicate(|d| g(d) >= 0.0, 0.0, hi, 1e-12 * hi);
    (lo > 0.0).then_some(lo)
}

/// Precomputed constants for [`Certifier::certify`].
#[derive(Debug, Clone)]
pub struct Certifier {
    nl: Nonlinearity,
    mu: f64,
    mass_cap: Option<f64>,
    width_cap: Option<f64>,
    vz: Option<StationaryProfile>,
}

impl Certifier {
    pub fn new(nl: &Nonlinearity, mu: f64) -> Result<Certifier> {
        Certifier::with_margin(nl, mu, ClassifierTolerances::default().vz_margin)
    }

    pub fn with_margin(nl: &Nonlinearity, mu: f64, vz_margin: f64) -> Result<Certifier> {
        let mut c = Certifier { nl: nl.clone(), mu, mass_cap: None, width_cap: None, vz: None };
        match nl.kind() {
            Kind::Monostable => {
                c.width_cap = Some(PI / nl.fp0().sqrt());
            }
            Kind::Bistable | Kind::Combustion => {
                let theta = nl.theta().unwrap();
                c.mass_cap = Some(theta * (2.0 * PI / (std::f64::consts::E * nl.sup_slope())).sqrt());
                let crit = phase_plane::critical_length(nl)?;
                c.vz = Some(phase_plane::stationary_profile_with(nl, crit.inf + vz_margin, &crit, 201)?);
            }
            Kind::Custom => {
                return Err(Error::Kind { expected: "monostable, bistable or combustion", got: "custom".into() });
            }
        }
        Ok(c)
    }

    pub fn v_z(&self) -> Option<&StationaryProfile> {
        self.vz.as_ref()
    }

    /// Amplitude below which a monostable state on an interval of
    /// half-length `l` is certified to vanish (0 when none applies).
    pub fn small_amp_bound(&self, l: f64) -> f64 {
        let fp0 = self.nl.fp0();
        let Some(delta) = small_amp_delta(fp0, l) else { return 0.0 };
        let slope = fp0 + delta;
        // largest s <= 1 with f(u) <= (f'(0) + delta) u on [0, s]
        let n = 2000;
        let mut s_f = 1.0;
        for k in 1..=n {
            let u = k as f64 / n as f64;
            if self.nl.f(u) > slope * u {
                s_f = (k - 1) as f64 / n as f64;
                break;
            }
        }
        let s = (delta * delta * l * l / (PI * self.mu)).min(s_f);
        s * (PI / (2.0 + delta)).cos()
    }

    /// First applicable certificate for `snap` taken as initial data.
    pub fn certify(&self, snap: &Snapshot) -> Option<Verdict> {
        let ev = Evidence::of(snap);
        let vanish = |c, ev| Some(Verdict { outcome: Outcome::Vanishing, certificate: c, evidence: ev });
        let spread = |c, ev| Some(Verdict { outcome: Outcome::Spreading, certificate: c, evidence: ev });
        match self.nl.kind() {
            Kind::Bistable | Kind::Combustion => {
                let theta = self.nl.theta().unwrap();
                if ev.max_u <= theta {
                    return vanish(Certificate::ThetaCap, ev.clone().with(ev.max_u, theta));
                }
                let cap = self.mass_cap.unwrap();
                if ev.mass <= cap {
                    return vanish(Certificate::MassCap, ev.clone().with(ev.mass, cap));
                }
                if let Some(x0) = self.dominance_center(snap) {
                    let mut e = ev.with(snap.value_at(x0), self.vz.as_ref().unwrap().q_top);
                    e.gamma_hat = Some(-x0);
                    return spread(Certificate::DominatesVZ, e);
                }
                None
            }
            Kind::Monostable => {
                let wcap = self.width_cap.unwrap();
                if ev.width < wcap {
                    let bound = self.small_amp_bound(0.5 * ev.width);
                    if ev.max_u <= bound {
                        return vanish(Certificate::SmallAmpMono, ev.clone().with(ev.max_u, bound));
                    }
                }
                if ev.width >= wcap {
                    return spread(Certificate::WidthMono, ev.clone().with(ev.width, wcap));
                }
                None
            }
            Kind::Custom => None,
        }
    }

    /// A center `x0` with `u(x0 + xi) >= v_Z(xi)` for `|xi| <= Z`.
    fn dominance_center(&self, snap: &Snapshot) -> Option<f64> {
        let vz = self.vz.as_ref()?;
        let z = vz.half_length;
        if snap.width() < 2.0 * z || snap.max_u() < vz.q_top {
            return None;
        }
        let xs = snap.xs();
        let stride = (vz.profile.len() / 100).max(1);
        let pts: Vec<(f64, f64)> = vz.profile.iter().step_by(stride).copied().collect();
        xs.iter()
            .zip(&snap.u)
            .filter(|(&x, &u)| u >= vz.q_top && x - z >= snap.g && x + z <= snap.h)
            .map(|(&x, _)| x)
            .find(|&x0| pts.iter().all(|&(xi, v)| snap.value_at(x0 + xi) >= v))
    }
}

/// Certificate check for one snapshot, building the constants on the fly.
pub fn certify(snap: &Snapshot, nl: &Nonlinearity, mu: f64) -> Option<Verdict> {
    Certifier::new(nl, mu).ok()?.certify(snap)
}

/// Final-time heuristics plus certificate passthrough.
#[derive(Debug, Clone)]
pub struct Classifier {
    nl: Nonlinearity,
    tol: ClassifierTolerances,
    ground: Option<StationaryProfile>,
}

impl Classifier {
    pub fn new(nl: &Nonlinearity, tol: ClassifierTolerances) -> Result<Classifier> {
        let ground = if nl.kind() == Kind::Bistable {
            Some(semiwave::ground_state(nl, semiwave::GROUND_TAIL_TOL)?)
        } else {
            None
        };
        Ok(Classifier { nl: nl.clone(), tol, ground })
    }

    pub fn ground_state(&self) -> Option<&StationaryProfile> {
        self.ground.as_ref()
    }

    /// Sup-norm distance between the snapshot recentred at its argmax and
    /// the ground state, over the window where the ground state exceeds 0.01.
    pub fn ground_state_distance(&self, snap: &Snapshot) -> Option<(f64, f64)> {
        let v = self.ground.as_ref()?;
        let x0 = snap.argmax_x();
        let d = v
            .profile
            .iter()
            .filter(|&&(_, vv)| vv > 0.01)
            .map(|&(xi, vv)| (snap.value_at(x0 + xi) - vv).abs())
            .fold(0.0, f64::max);
        Some((d, -x0))
    }

    /// `max |U - theta|` over `|x| <= h / 4`.
    pub fn plateau_distance(&self, snap: &Snapshot) -> Option<f64> {
        let theta = self.nl.theta()?;
        let lim = 0.25 * snap.h;
        let xs = snap.xs();
        let d = xs
            .iter()
            .zip(&snap.u)
            .filter(|(&x, _)| x.abs() <= lim)
            .map(|(_, &u)| (u - theta).abs())
            .fold(0.0, f64::max);
        Some(d)
    }

    pub fn classify(&self, run: &Run) -> Verdict {
        if let Some(c) = &run.certificate {
            return c.verdict.clone();
        }
        let s = run.last();
        let mut ev = Evidence::of(s);
        let heur = |outcome, ev| Verdict { outcome, certificate: Certificate::Heuristic, evidence: ev };
        if s.max_u() <= self.tol.vanish_tol {
            return heur(Outcome::Vanishing, ev.with(s.max_u(), self.tol.vanish_tol));
        }
        let core_min = mid_half_min(s);
        if core_min >= 1.0 - self.tol.spread_tol && fronts_not_decelerating(run) {
            return heur(Outcome::Spreading, ev.with(core_min, 1.0 - self.tol.spread_tol));
        }
        match self.nl.kind() {
            Kind::Combustion => {
                let theta = self.nl.theta().unwrap();
                let d = self.plateau_distance(s).unwrap();
                if (s.max_u() - theta).abs() <= self.tol.trans_tol && d <= self.tol.trans_tol {
                    return heur(Outcome::TransitionCombustion, ev.with(d, self.tol.trans_tol));
                }
            }
            Kind::Bistable => {
                let (d, gamma) = self.ground_state_distance(s).unwrap();
                ev.gamma_hat = Some(gamma);
                if d <= self.tol.trans_tol {
                    return heur(Outcome::TransitionBistable, ev.with(d, self.tol.trans_tol));
                }
            }
            _ => {}
        }
        heur(Outcome::Undecided, ev)
    }
}

/// `min U` over the middle half of the current interval.
fn mid_half_min(s: &Snapshot) -> f64 {
    let c = 0.5 * (s.g + s.h);
    let r = 0.25 * s.width();
    s.xs()
        .iter()
        .zip(&s.u)
        .filter(|(&x, _)| (x - c).abs() <= r)
        .map(|(_, &u)| u)
        .fold(f64::INFINITY, f64::min)
}

/// Final front speed at least half the average over the second half of the run.
fn fronts_not_decelerating(run: &Run) -> bool {
    let f = run.fronts.last().unwrap();
    let t_half = 0.5 * f.t;
    let i = run.fronts.partition_point(|r| r.t < t_half).min(run.fronts.len() - 1);
    let m = &run.fronts[i];
    let dt = f.t - m.t;
    if dt <= 0.0 {
        return f.hprime > 0.0;
    }
    let avg = ((f.h - m.h) + (m.g - f.g)) / (2.0 * dt);
    0.5 * (f.hprime - f.gprime) >= 0.5 * avg
}

/// Verdict of a completed run with default tolerances.
pub fn classify_run(run: &Run, nl: &Nonlinearity, _mu: f64) -> Result<Verdict> {
    Ok(Classifier::new(nl, ClassifierTolerances::default())?.classify(run))
}

/// Settings for [`sigma_star`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdOptions {
    /// Target bracket width.
    pub tol: f64,
    /// Interpret `tol` relative to `sigma_lo`.
    pub relative: bool,
    /// Maximum number of runs.
    pub budget: usize,
    /// Points per refinement round (1 is plain bisection). 0 picks the
    /// number of workers.
    pub points_per_round: usize,
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        ThresholdOptions { tol: 1e-2, relative: true, budget: 40, points_per_round: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eval {
    pub sigma: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub sigma_lo: f64,
    /// `f64::INFINITY` when no spreading run was found within the budget.
    pub sigma_hi: f64,
    pub width: f64,
    pub evals: Vec<Eval>,
    pub budget_hit: bool,
    /// Refinement stopped because no decisive run was found inside the bracket.
    pub stalled: bool,
}

impl ThresholdResult {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.sigma_lo + self.sigma_hi)
    }
}

/// A run at amplitude `sigma` and its verdict.
pub fn evaluate(
    nl: &Nonlinearity,
    mu: f64,
    h0: f64,
    phi: &InitialData,
    params: &SolverParams,
    classifier: &Classifier,
    sigma: f64,
) -> Result<(Run, Verdict)> {
    let cfg = SolverConfig { nl: nl.clone(), mu, h0, u0: phi.with_sigma(sigma), params: params.clone() };
    let run = solver::run(&cfg)?;
    let v = classifier.classify(&run);
    Ok((run, v))
}

/// Bracket the amplitude threshold `sigma*` for `u0 = sigma phi`.
pub fn sigma_star(
    nl: &Nonlinearity,
    mu: f64,
    h0: f64,
    phi: &InitialData,
    params: &SolverParams,
    ctol: &ClassifierTolerances,
    opts: &ThresholdOptions,
) -> Result<ThresholdResult> {
    if opts.budget < 10 {
        return Err(Error::Domain(format!("budget {} below 10 runs", opts.budget)));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Domain(format!("tol = {} must be positive", opts.tol)));
    }
    let classifier = Classifier::new(nl, ctol.clone())?;
    let certifier = Certifier::with_margin(nl, mu, ctol.vz_margin)?;
    let mut params = params.clone();
    params.early_stop = true;
    let y = solver::y_grid(params.n);
    let shape = phi.with_sigma(1.0).sample(h0, &y)?;
    let sup_phi = shape.iter().copied().fold(0.0, f64::max);
    let int_phi = 2.0 * h0 / (params.n - 1) as f64 * shape.iter().sum::<f64>();

    let mut evals: Vec<Eval> = Vec::new();
    let run_at = |s: f64| evaluate(nl, mu, h0, phi, &params, &classifier, s).map(|(_, v)| Eval { sigma: s, verdict: v });

    // Certified lower end without running anything.
    let sigma_lo0 = match nl.kind() {
        Kind::Monostable => {
            if 2.0 * h0 >= certifier.width_cap.unwrap() {
                evals.push(run_at(1.0)?);
                return Ok(ThresholdResult {
                    sigma_lo: 0.0,
                    sigma_hi: 0.0,
                    width: 0.0,
                    evals,
                    budget_hit: false,
                    stalled: false,
                });
            }
            certifier.small_amp_bound(h0) / sup_phi
        }
        _ => {
            let theta = nl.theta().unwrap();
            (theta / sup_phi).max(certifier.mass_cap.unwrap() / int_phi)
        }
    };
    let mut lo = sigma_lo0;
    let mut hi = f64::INFINITY;
    let target = |lo: f64| if opts.relative { opts.tol * lo.max(f64::MIN_POSITIVE) } else { opts.tol };

    // Upper end by doubling.
    let mut s = if lo > 0.0 { 2.0 * lo } else { 1.0 };
    while hi.is_infinite() {
        if evals.len() >= opts.budget {
            return Ok(ThresholdResult { sigma_lo: lo, sigma_hi: hi, width: f64::INFINITY, evals, budget_hit: true, stalled: false });
        }
        let e = run_at(s)?;
        match e.verdict.outcome {
            Outcome::Spreading => hi = s,
            Outcome::Vanishing => lo = lo.max(s),
            _ => {}
        }
        evals.push(e);
        s *= 2.0;
    }

    let k = if opts.points_per_round == 0 { par::workers().clamp(1, 8) } else { opts.points_per_round };
    let mut stalled = false;
    let mut budget_hit = false;
    while hi - lo > target(lo) {
        let room = opts.budget.saturating_sub(evals.len());
        if room == 0 {
            budget_hit = true;
            break;
        }
        let m = k.min(room);
        let pts: Vec<f64> = (1..=m).map(|i| lo + (hi - lo) * i as f64 / (m + 1) as f64).collect();
        let results = par::map(&pts, |&s| run_at(s));
        let mut progressed = false;
        for r in results {
            let e = r?;
            match e.verdict.outcome {
                Outcome::Spreading if e.sigma < hi => {
                    hi = e.sigma;
                    progressed = true;
                }
                Outcome::Vanishing if e.sigma > lo => {
                    lo = e.sigma;
                    progressed = true;
                }
                _ => {}
            }
            evals.push(e);
        }
        check_monotone(&evals)?;
        if !progressed {
            stalled = true;
            break;
        }
    }
    evals.sort_by(|a, b| a.sigma.partial_cmp(&b.sigma).unwrap());
    Ok(ThresholdResult { sigma_lo: lo, sigma_hi: hi, width: hi - lo, evals, budget_hit, stalled })
}

/// Every vanishing amplitude must lie below every spreading one.
pub fn check_monotone(evals: &[Eval]) -> Result<()> {
    let max_v = evals
        .iter()
        .filter(|e| e.verdict.outcome == Outcome::Vanishing)
        .map(|e| e.sigma)
        .fold(f64::NEG_INFINITY, f64::max);
    let min_s = evals
        .iter()
        .filter(|e| e.verdict.outcome == Outcome::Spreading)
        .map(|e| e.sigma)
        .fold(f64::INFINITY, f64::min);
    if max_v >= min_s {
        return Err(Error::MonotoneViolation(format!("vanishing at sigma = {max_v} but spreading at {min_s}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedEstimate {
    pub c_hat: f64,
    pub slope_h: f64,
    pub slope_g: f64,
    /// `|slope_h - slope_g|`
    pub asymmetry: f64,
    pub fit_rms: f64,
    /// Slope of `log |u(t, 0) - 1|` against `t` (NaN with fewer than two usable points).
    pub decay_slope: f64,
    pub decay_rms: f64,
}

/// Least-squares front speeds over `[t_end / 2, t_end]`.
pub fn speed_estimate(run: &Run) -> Result<SpeedEstimate> {
    let spreading = match &run.certificate {
        Some(c) => c.verdict.outcome == Outcome::Spreading,
        None => false,
    } || mid_half_min(run.last()) >= 1.0 - ClassifierTolerances::default().spread_tol;
    if !spreading {
        return Err(Error::NotSpreading);
    }
    let t_end = run.t_end();
    let win: Vec<_> = run.fronts.iter().filter(|f| f.t >= 0.5 * t_end).collect();
    if win.len() < 3 {
        return Err(Error::NotSpreading);
    }
    let t: Vec<f64> = win.iter().map(|f| f.t).collect();
    let h: Vec<f64> = win.iter().map(|f| f.h).collect();
    let g: Vec<f64> = win.iter().map(|f| -f.g).collect();
    let (sh, _, rh) = numerics::linear_fit(&t, &h);
    let (sg, _, rg) = numerics::linear_fit(&t, &g);
    let (mut ts, mut ls) = (Vec::new(), Vec::new());
    for s in run.snapshots.iter().filter(|s| s.t >= 0.5 * t_end) {
        let d = (s.value_at(0.0) - 1.0).abs();
        if d > 1e-12 {
            ts.push(s.t);
            ls.push(d.ln());
        }
    }
    let (decay_slope, _, decay_rms) =
        if ts.len() >= 2 { numerics::linear_fit(&ts, &ls) } else { (f64::NAN, f64::NAN, f64::NAN) };
    Ok(SpeedEstimate {
        c_hat: 0.5 * (sh + sg),
        slope_h: sh,
        slope_g: sg,
        asymmetry: (sh - sg).abs(),
        fit_rms: rh.max(rg),
        decay_slope,
        decay_rms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snap(g: f64, h: f64, u: Vec<f64>) -> Snapshot {
        Snapshot { t: 0.0, g, h, u }
    }

    fn bump(n: usize, amp: f64) -> Vec<f64> {
        solver::y_grid(n).iter().map(|&y| amp * (PI * y / 2.0).cos()).collect()
    }

    #[test]
    fn theta_cap_fires_below_theta() {
        let nl = Nonlinearity::cubic_bistable(0.25).unwrap();
        let c = Certifier::new(&nl, 1.0).unwrap();
        let v = c.certify(&snap(-5.0, 5.0, bump(101, 0.24))).unwrap();
        assert_eq!((v.outcome, v.certificate), (Outcome::Vanishing, Certificate::ThetaCap));
        assert_eq!(v.evidence.rhs, Some(0.25));
    }

    #[test]
    fn mass_cap_constant() {
        let nl = Nonlinearity::cubic_bistable(0.25).unwrap();
        let c = Certifier::new(&nl, 1.0).unwrap();
        // K = (1 - theta)^2 / 4 for the cubic
        let k: f64 = 0.75f64.powi(2) / 4.0;
        let exact = 0.25 * (2.0 * PI / (std::f64::consts::E * k)).sqrt();
        assert!((c.mass_cap.unwrap() - exact).abs() < 1e-9);
    }

    #[test]
    fn width_certificate_for_logistic() {
        let nl = Nonlinearity::logistic().unwrap();
        let c = Certifier::new(&nl, 1.0).unwrap();
        let v = c.certify(&snap(-1.6, 1.6, bump(101, 0.5))).unwrap();
        assert_eq!((v.outcome, v.certificate), (Outcome::Spreading, Certificate::WidthMono));
        let tiny = c.certify(&snap(-0.5, 0.5, bump(101, 1e-6))).unwrap();
        assert_eq!(tiny.certificate, Certificate::SmallAmpMono);
        assert!(c.certify(&snap(-1.0, 1.0, bump(101, 0.5))).is_none());
    }

    #[test]
    fn small_amp_delta_satisfies_inequality() {
        let d = small_amp_delta(1.0, 1.0).unwrap();
        let g = PI * PI / (4.0 * (1.0 + d).powi(2)) - 1.0 - 2.0 * d;
        assert!((0.0..1e-9).contains(&g));
        assert!(small_amp_delta(1.0, PI / 2.0).is_none());
    }

    #[test]
    fn no_certificate_between_theta_and_vz() {
        let nl = Nonlinearity::cubic_bistable(0.25).unwrap();
        let c = Certifier::new(&nl, 1.0).unwrap();
        let z = c.v_z().unwrap().half_length;
        // wide, above theta, below the stationary profile peak
        let s = snap(-3.0 * z, 3.0 * z, bump(401, 0.3));
        assert!(c.certify(&s).is_none());
        // a plateau at 1 over a wide window dominates v_Z
        let n = 401;
        let u: Vec<f64> = solver::y_grid(n).iter().map(|&y| if y.abs() < 0.999 { 1.0 - y.powi(40) } else { 0.0 }).collect();
        let v = c.certify(&snap(-3.0 * z, 3.0 * z, u)).unwrap();
        assert_eq!(v.certificate, Certificate::DominatesVZ);
    }

    #[test]
    fn monotone_check() {
        let mk = |s: f64, o: Outcome| Eval {
            sigma: s,
            verdict: Verdict {
                outcome: o,
                certificate: Certificate::Heuristic,
                evidence: Evidence { t: 0.0, max_u: 0.0, width: 0.0, mass: 0.0, lhs: None, rhs: None, gamma_hat: None },
            },
        };
        assert!(check_monotone(&[mk(0.1, Outcome::Vanishing), mk(0.2, Outcome::Spreading)]).is_ok());
        assert!(check_monotone(&[mk(0.3, Outcome::Vanishing), mk(0.2, Outcome::Spreading)]).is_err());
    }
}
