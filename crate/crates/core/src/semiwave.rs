//! Semi-waves: the trajectory of `q' = p, p' = c p - f(q)` entering the
//! saddle `(1, 0)`, the speed `c0` beyond which it no longer reaches the
//! axis `q = 0` with `p > 0`, and the speed `c*` matched to the Stefan
//! condition `mu q'(0) = c`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinearity::{Kind, Nonlinearity};
use crate::numerics;
use crate::ode::{self, OdeOptions, Stop};
use crate::phase_plane::{self, FiniteWave, PhaseTrajectory, StationaryProfile, Termination};

pub const DEFAULT_EPS_START: f64 = 1e-5;
pub const P_ZERO_TOL: f64 = 1e-9;
pub const BISECT_WIDTH: f64 = 1e-8;
pub const PROFILE_TAIL_TOL: f64 = 1e-6;
pub const GROUND_TAIL_TOL: f64 = 1e-6;
/// Radius around the origin inside which the flow is treated as linear.
const LINEAR_RADIUS: f64 = 1e-7;
const Z_LIMIT: f64 = 1e4;

/// The branch of the saddle's stable set written as `p = P_c(q)` on `[q_c, 1]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SaddleTrajectory {
    pub c: f64,
    /// Samples ordered from the saddle towards `q = 0`.
    pub trajectory: PhaseTrajectory,
    /// Backward time of each sample, measured from the start near the saddle.
    pub s: Vec<f64>,
    /// Where `P_c` first vanishes (0 when it reaches the axis).
    pub q_c: f64,
    /// `P_c(0)` (0 when the curve stops short of the axis or enters the origin).
    pub p_at_0: f64,
    /// The curve crosses `q = 0` with `p > 0`.
    pub reaches_axis: bool,
    /// The crossing was decided by the linearisation at the origin (spiral
    /// or node); `p_at_0` may then underflow.
    pub decided_linear: bool,
}

impl SaddleTrajectory {
    /// True when `c` belongs to the set whose supremum is `c0`.
    pub fn positive_on_axis(&self, p_zero_tol: f64) -> bool {
        self.reaches_axis && (self.p_at_0 > p_zero_tol || self.decided_linear)
    }

    /// `P_c(q)` for `q` in `[q_c, 1]`, zero below `q_c`. Cubic Hermite
    /// between samples using `dP/dq = c - f(q)/P`.
    pub fn p_at(&self, nl: &Nonlinearity, q: f64) -> f64 {
        if q >= 1.0 {
            return 0.0;
        }
        if !self.reaches_axis && q <= self.q_c {
            return 0.0;
        }
        if q <= 0.0 {
            return self.p_at_0;
        }
        let pts = &self.trajectory.samples;
        // samples run from the saddle down, so q decreases
        let i = pts.partition_point(|s| s.0 > q);
        if i == 0 || i >= pts.len() {
            return self.trajectory.p_at(q).unwrap_or(0.0);
        }
        let (qa, pa) = pts[i];
        let (qb, pb) = pts[i - 1];
        let h = qb - qa;
        if h <= 0.0 || pa <= 0.0 || pb <= 0.0 {
            return self.trajectory.p_at(q).unwrap_or(0.0);
        }
        let da = self.c - nl.f(qa) / pa;
        let db = self.c - nl.f(qb) / pb;
        let t = (q - qa) / h;
        let (t2, t3) = (t * t, t * t * t);
        (2.0 * t3 - 3.0 * t2 + 1.0) * pa
            + (t3 - 2.0 * t2 + t) * h * da
            + (-2.0 * t3 + 3.0 * t2) * pb
            + (t3 - t2) * h * db
    }

    /// Slope of the stable direction at the saddle.
    pub fn saddle_slope(nl: &Nonlinearity, c: f64) -> f64 {
        0.5 * (c - (c * c - 4.0 * nl.fp1()).sqrt())
    }
}

/// `P_0(q) = sqrt(2 int_q^1 f)`, the `c = 0` saddle curve.
pub fn p0_curve(nl: &Nonlinearity, q: f64) -> Result<f64> {
    Ok((2.0 * nl.primitive(q, 1.0)?).max(0.0).sqrt())
}

fn require_named(nl: &Nonlinearity) -> Result<()> {
    nl.require(&[Kind::Monostable, Kind::Bistable, Kind::Combustion], "monostable, bistable or combustion")
}

/// Outcome of the linear flow `q'' + c q' + a q = 0` (backward time) from
/// `(q, p)` in the open first quadrant: `Some(p)` at the first crossing of
/// `q = 0`, `None` if it enters the origin without crossing.
fn linear_crossing(a: f64, c: f64, q: f64, p: f64) -> Option<f64> {
    let disc = c * c - 4.0 * a;
    let dq0 = -p;
    if disc < 0.0 {
        // Focus: the orbit always reaches q = 0. The crossing value is only
        // informative, it is usually far below any tolerance.
        let w = 0.5 * (-disc).sqrt();
        let b = (dq0 + 0.5 * c * q) / w;
        // q(s) = e^{-cs/2} (q cos ws + b sin ws)
        let mut s = (-q).atan2(b) / w;
        if s <= 0.0 {
            s += std::f64::consts::PI / w;
        }
        let env = (-0.5 * c * s).exp();
        let (sn, cs) = (w * s).sin_cos();
        let dq = env * (-0.5 * c * (q * cs + b * sn) + w * (-q * sn + b * cs));
        return Some((-dq).max(f64::MIN_POSITIVE));
    }
    if disc == 0.0 {
        let r = -0.5 * c;
        let bb = dq0 - r * q;
        if bb >= 0.0 {
            return None;
        }
        let s = -q / bb;
        let dq = (bb + r * (q + bb * s)) * (r * s).exp();
        return Some((-dq).max(f64::MIN_POSITIVE));
    }
    let sq = disc.sqrt();
    let r1 = 0.5 * (-c + sq);
    let r2 = 0.5 * (-c - sq);
    // q = A e^{r1 s} + B e^{r2 s}
    let bcoef = (dq0 - r1 * q) / (r2 - r1);
    let acoef = q - bcoef;
    // The slow mode A dominates as s grows; q changes sign iff A < 0 or
    // the fast mode pulls it through zero first (-B/A > 1).
    if acoef == 0.0 || (acoef > 0.0 && -bcoef / acoef <= 1.0) {
        return None;
    }
    let s = ((-bcoef / acoef).ln() / (r1 - r2)).max(0.0);
    let dq = acoef * r1 * (r1 * s).exp() + bcoef * r2 * (r2 * s).exp();
    Some((-dq).max(f64::MIN_POSITIVE))
}

/// Integrate the saddle curve backward from `q = 1 - eps_start`.
pub fn saddle_trajectory(nl: &Nonlinearity, c: f64, eps_start: f64) -> Result<SaddleTrajectory> {
    saddle_trajectory_sampled(nl, c, eps_start, None)
}

pub fn saddle_trajectory_sampled(
    nl: &Nonlinearity,
    c: f64,
    eps_start: f64,
    sample_every: Option<f64>,
) -> Result<SaddleTrajectory> {
    saddle_run(nl, c, eps_start, sample_every, 0.0)
}

fn saddle_run(
    nl: &Nonlinearity,
    c: f64,
    eps_start: f64,
    sample_every: Option<f64>,
    s0: f64,
) -> Result<SaddleTrajectory> {
    if !(nl.fp1() < 0.0) {
        return Err(Error::Degenerate(format!("f'(1) = {} is not negative", nl.fp1())));
    }
    if !(c >= 0.0) {
        return Err(Error::Domain(format!("c = {c} < 0")));
    }
    if !(eps_start > 0.0 && eps_start <= 1e-3) {
        return Err(Error::Domain(format!("eps_start = {eps_start} not in (0, 1e-3]")));
    }
    let slope = SaddleTrajectory::saddle_slope(nl, c);
    let start = [1.0 - eps_start, -slope * eps_start];
    let a = nl.fp0();
    let ev_q = |y: &[f64; 2]| y[0];
    let ev_p = |y: &[f64; 2]| y[1];
    let ev_origin = |y: &[f64; 2]| {
        if a > 0.0 {
            y[0].hypot(y[1]) - LINEAR_RADIUS
        } else {
            1.0
        }
    };
    let opts = OdeOptions {
        rtol: 1e-11,
        atol: 1e-16,
        h_init: 1e-3,
        h_max: sample_every.unwrap_or(0.5),
        sample_every,
        max_steps: 4_000_000,
    };
    let tr = ode::integrate(
        |y: &[f64; 2]| [-y[1], -(c * y[1] - nl.f(y[0]))],
        s0,
        start,
        s0 + Z_LIMIT,
        &[&ev_q, &ev_p, &ev_origin],
        &opts,
    )?;
    let (_, end) = tr.last();
    let (q_c, p_at_0, reaches_axis, decided_linear, term) = match tr.stop {
        Stop::Event(0) => (0.0, end[1].max(0.0), end[1] > 0.0, false, Termination::QReachedTarget),
        Stop::Event(1) => (end[0].max(0.0), 0.0, false, false, Termination::PHitZero),
        Stop::Event(_) => match linear_crossing(a, c, end[0], end[1]) {
            Some(p) => (0.0, p, true, true, Termination::QReachedTarget),
            None => (0.0, 0.0, false, true, Termination::QReachedTarget),
        },
        Stop::End | Stop::StepLimit => (0.0, 0.0, false, false, Termination::StepLimit),
    };
    let samples: Vec<(f64, f64)> = tr.y.iter().map(|y| (y[0], y[1])).collect();
    Ok(SaddleTrajectory {
        c,
        trajectory: PhaseTrajectory {
            c,
            start: (start[0], start[1]),
            end: (end[0], end[1]),
            samples,
            terminated_by: term,
        },
        s: tr.t,
        q_c,
        p_at_0,
        reaches_axis,
        decided_linear,
    })
}

/// Largest change of `P_c` on `[0.1, 0.9]` when `eps_start` is halved.
pub fn richardson_defect(nl: &Nonlinearity, c: f64, eps_start: f64) -> Result<f64> {
    let a = saddle_trajectory(nl, c, eps_start)?;
    let b = saddle_trajectory(nl, c, 0.5 * eps_start)?;
    Ok((0..=80)
        .map(|k| 0.1 + 0.01 * k as f64)
        .filter(|&q| q > a.q_c.max(b.q_c))
        .map(|q| (a.p_at(nl, q) - b.p_at(nl, q)).abs())
        .fold(0.0, f64::max))
}

/// `c0 = sup { c : P_c > 0 on [0, 1) }` by bisection on `[0, 2 sqrt(K)]`.
pub fn c0(nl: &Nonlinearity) -> Result<f64> {
    require_named(nl)?;
    let hi = 2.0 * nl.sup_slope().sqrt();
    let mut err = None;
    let mut pred = |c: f64| match saddle_trajectory(nl, c, DEFAULT_EPS_START) {
        Ok(t) => t.positive_on_axis(P_ZERO_TOL),
        Err(e) => {
            err.get_or_insert(e);
            false
        }
    };
    if pred(hi) {
        return Ok(hi);
    }
    let (lo, hi) = numerics::bisect_predicate(&mut pred, 0.0, hi, BISECT_WIDTH);
    if let Some(e) = err {
        return Err(e);
    }
    Ok(0.5 * (lo + hi))
}

/// Result of the semi-wave computation for one `mu`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SemiWaveResult {
    pub c0: f64,
    pub c_star: f64,
    pub mu: f64,
    pub omega_star: f64,
    /// `(z, q*(z))` with `q*(0) = 0`.
    pub profile: Vec<(f64, f64)>,
    /// Every `(c, xi(c))` evaluated by the bisection.
    pub xi_trace: Vec<(f64, f64)>,
}

impl SemiWaveResult {
    /// Max `|q'' - c q' + f(q)|` at interior profile samples.
    pub fn profile_residual(&self, nl: &Nonlinearity) -> f64 {
        phase_plane::second_difference_residual(&self.profile, |_, q| nl.f(q), self.c_star)
    }

    /// One-sided second-order slope of the profile at `z = 0`.
    pub fn slope_at_origin(&self) -> f64 {
        let (z0, q0) = self.profile[0];
        let (z1, q1) = self.profile[1];
        let (z2, q2) = self.profile[2];
        let h1 = z1 - z0;
        let h2 = z2 - z0;
        // quadratic through three points, derivative at z0
        (q1 * h2 * h2 - q2 * h1 * h1 - q0 * (h2 * h2 - h1 * h1)) / (h1 * h2 * (h2 - h1))
    }
}

/// `xi(c) = P_c(0) - c / mu`.
pub fn xi(nl: &Nonlinearity, mu: f64, c: f64) -> Result<f64> {
    let t = saddle_trajectory(nl, c, DEFAULT_EPS_START)?;
    Ok(t.p_at_0 - c / mu)
}

/// Semi-wave speed for Stefan coefficient `mu`.
pub fn c_star(nl: &Nonlinearity, mu: f64) -> Result<SemiWaveResult> {
    let c0v = c0(nl)?;
    c_star_with(nl, mu, c0v)
}

/// As [`c_star`], reusing a computed `c0`.
pub fn c_star_with(nl: &Nonlinearity, mu: f64, c0v: f64) -> Result<SemiWaveResult> {
    require_named(nl)?;
    if !(mu > 0.0) {
        return Err(Error::Domain(format!("mu = {mu} must be positive")));
    }
    let mut trace = Vec::new();
    let mut err = None;
    let (lo, hi) = numerics::bisect_predicate(
        |c| match xi(nl, mu, c) {
            Ok(v) => {
                trace.push((c, v));
                v > 0.0
            }
            Err(e) => {
                err.get_or_insert(e);
                false
            }
        },
        0.0,
        c0v,
        BISECT_WIDTH,
    );
    if let Some(e) = err {
        return Err(e);
    }
    trace.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let cs = 0.5 * (lo + hi);
    let omega_star = cs / mu;
    let profile = semiwave_profile(nl, cs, 5e-3)?;
    Ok(SemiWaveResult { c0: c0v, c_star: cs, mu, omega_star, profile, xi_trace: trace })
}

/// Profile `q(z)` of the saddle curve at speed `c`, from `q = 0` up to
/// `1 - PROFILE_TAIL_TOL`, sampled every `dz`.
pub fn semiwave_profile(nl: &Nonlinearity, c: f64, dz: f64) -> Result<Vec<(f64, f64)>> {
    let t = saddle_trajectory_sampled(nl, c, PROFILE_TAIL_TOL, Some(dz))?;
    if !t.reaches_axis || t.decided_linear {
        return Err(Error::NoSolution(format!("saddle curve at c = {c} does not reach q = 0")));
    }
    // (z, q, q') with z increasing from the crossing
    let s_hit = *t.s.last().unwrap();
    let mut knots: Vec<(f64, f64, f64)> = Vec::with_capacity(t.s.len());
    for (&s, &(q, p)) in t.s.iter().zip(&t.trajectory.samples).rev() {
        let z = s_hit - s;
        if knots.last().is_none_or(|k| z > k.0) {
            knots.push((z, q.max(0.0), p));
        }
    }
    // The crossing is not on the sample lattice; resample onto z = k dz by
    // cubic Hermite interpolation so the profile spacing is exactly uniform.
    let z_max = knots.last().unwrap().0;
    let n = (z_max / dz).floor() as usize;
    let mut out = Vec::with_capacity(n + 1);
    let mut j = 0;
    for k in 0..=n {
        let z = k as f64 * dz;
        while j + 2 < knots.len() && knots[j + 1].0 < z {
            j += 1;
        }
        let (za, qa, pa) = knots[j];
        let (zb, qb, pb) = knots[j + 1];
        let h = zb - za;
        let u = ((z - za) / h).clamp(0.0, 1.0);
        let (u2, u3) = (u * u, u * u * u);
        let q = (2.0 * u3 - 3.0 * u2 + 1.0) * qa
            + (u3 - 2.0 * u2 + u) * h * pa
            + (-2.0 * u3 + 3.0 * u2) * qb
            + (u3 - u2) * h * pb;
        out.push((z, q.max(0.0)));
    }
    Ok(out)
}

/// Finite wave started at `(0, omega*)` with speed `c < c*`.
pub fn perturbed_finite_wave(nl: &Nonlinearity, sw: &SemiWaveResult, c: f64) -> Result<FiniteWave> {
    if !(c > 0.0 && c < sw.c_star) {
        return Err(Error::Domain(format!("c = {c} not in (0, c* = {})", sw.c_star)));
    }
    phase_plane::finite_wave(nl, c, sw.omega_star)
}

/// Even ground state of `v'' + f(v) = 0` on the line with peak `theta_bar`,
/// truncated where `v < tail_tol`.
pub fn ground_state(nl: &Nonlinearity, tail_tol: f64) -> Result<StationaryProfile> {
    let top = nl.theta_bar()?;
    let split = 0.25 * top;
    let n_top = 401;
    let n_tail = 301;
    // q values from the peak down to the tail, then panel times.
    let smax = (top - split).sqrt();
    let mut qs: Vec<f64> = (0..n_top).map(|k| top - (smax * k as f64 / (n_top - 1) as f64).powi(2)).collect();
    let ratio = (tail_tol / split).ln();
    qs.extend((1..n_tail).map(|k| split * (ratio * k as f64 / (n_tail - 1) as f64).exp()));
    let mut xs = vec![0.0; qs.len()];
    for k in 1..n_top {
        xs[k] = xs[k - 1] + phase_plane::descent_time(nl, top, qs[k], qs[k - 1])?;
    }
    // Below the split use int_r^top f = -int_0^r f (the primitive vanishes
    // at the peak), which avoids cancelling two O(1) integrals down to
    // O(r^2), and integrate in log r.
    let minus_primitive = |r: f64| -> f64 {
        let scale = r * (nl.f(r).abs() + nl.f(0.5 * r).abs());
        match numerics::simpson_split(&|u| nl.f(u), 0.0, r, nl.breaks(), 1e-12 * scale) {
            Ok(v) if v < 0.0 => -v,
            _ => f64::NAN,
        }
    };
    let integrand = |v: f64| {
        let r = v.exp();
        r / (2.0 * minus_primitive(r)).sqrt()
    };
    for k in n_top..qs.len() {
        let (a, b) = (qs[k].ln(), qs[k - 1].ln());
        let dt = numerics::simpson(&integrand, a, b, 1e-10 * (b - a))?;
        if !dt.is_finite() {
            return Err(Error::Domain(format!("ground state tail is not positive below {}", qs[k - 1])));
        }
        xs[k] = xs[k - 1] + dt;
    }
    let extent = *xs.last().unwrap();
    let mut profile: Vec<(f64, f64)> = xs.iter().zip(&qs).rev().map(|(&x, &q)| (-x, q)).collect();
    profile.extend(xs.iter().zip(&qs).skip(1).map(|(&x, &q)| (x, q)));
    let q_last = *qs.last().unwrap();
    Ok(StationaryProfile {
        half_length: extent,
        q_top: top,
        profile,
        boundary_slope: (-2.0 * nl.primitive(0.0, q_last)?).max(0.0).sqrt(),
    })
}
