//! Phase-plane quantities for `q'' - c q' + f(q) = 0`, written as
//! `q' = p, p' = c p - f(q)`: time maps, critical lengths, stationary
//! profiles on `[-Z, Z]` and waves of finite length.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinearity::{Kind, Nonlinearity};
use crate::numerics;
use crate::ode::{self, OdeOptions, Stop};

const TIME_MAP_TOL: f64 = 1e-10;
const SCAN_POINTS: usize = 33;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    PHitZero,
    QReachedTarget,
    StepLimit,
}

/// A sampled curve `p = P(q)` of `dp/dq = c - f(q)/p`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseTrajectory {
    pub c: f64,
    /// `(q, p)` pairs, ordered along the trajectory.
    pub samples: Vec<(f64, f64)>,
    pub start: (f64, f64),
    pub end: (f64, f64),
    pub terminated_by: Termination,
}

impl PhaseTrajectory {
    /// Largest midpoint residual `|dp/dq - (c - f(q)/p)| / (1 + |c|)` over
    /// consecutive samples where `p` stays above `p_floor`.
    pub fn ode_residual(&self, nl: &Nonlinearity, p_floor: f64) -> f64 {
        self.samples
            .windows(2)
            .filter(|w| w[0].1 > p_floor && w[1].1 > p_floor && w[1].0 != w[0].0)
            .map(|w| {
                let (q0, p0) = w[0];
                let (q1, p1) = w[1];
                let (qm, pm) = (0.5 * (q0 + q1), 0.5 * (p0 + p1));
                let slope = (p1 - p0) / (q1 - q0);
                (slope - (self.c - nl.f(qm) / pm)).abs() / (1.0 + self.c.abs())
            })
            .fold(0.0, f64::max)
    }

    /// `P(q)` by linear interpolation (samples must be monotone in `q`).
    pub fn p_at(&self, q: f64) -> Option<f64> {
        let mut pts = self.samples.clone();
        if pts.len() < 2 {
            return None;
        }
        if pts[0].0 > pts[pts.len() - 1].0 {
            pts.reverse();
        }
        if q < pts[0].0 || q > pts[pts.len() - 1].0 {
            return None;
        }
        let i = pts.partition_point(|s| s.0 <= q).clamp(1, pts.len() - 1);
        let (qa, pa) = pts[i - 1];
        let (qb, pb) = pts[i];
        if qb == qa {
            return Some(pa);
        }
        Some(pa + (q - qa) / (qb - qa) * (pb - pa))
    }
}

/// Wave of finite length: `q(0) = 0`, `q'(z_end) = 0`, `q` increasing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiniteWave {
    pub c: f64,
    pub omega: f64,
    pub q_end: f64,
    pub z_end: f64,
    /// `(z, q)` samples on `[0, z_end]`.
    pub profile: Vec<(f64, f64)>,
    pub trajectory: PhaseTrajectory,
}

/// Symmetric positive solution of `v'' + f(v) = 0` on `[-Z, Z]` vanishing at `±Z`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StationaryProfile {
    pub half_length: f64,
    pub q_top: f64,
    /// `(x, v)` samples on `[-Z, Z]`, increasing in `x`.
    pub profile: Vec<(f64, f64)>,
    /// `v'(-Z) > 0`.
    pub boundary_slope: f64,
}

impl StationaryProfile {
    /// Max `|v'' + f(v)|` at interior samples, three-point nonuniform stencil.
    pub fn residual(&self, nl: &Nonlinearity) -> f64 {
        second_difference_residual(&self.profile, |_, v| nl.f(v), 0.0)
    }

    /// `v(x)` by linear interpolation, zero outside `[-Z, Z]`.
    pub fn value_at(&self, x: f64) -> f64 {
        if x.abs() >= self.half_length {
            return 0.0;
        }
        let xs: Vec<f64> = self.profile.iter().map(|s| s.0).collect();
        let vs: Vec<f64> = self.profile.iter().map(|s| s.1).collect();
        numerics::interp_linear(&xs, &vs, x)
    }
}

/// Max over interior samples of `|y'' + src(x, y) - c y'|` using the
/// nonuniform three-point formulas.
pub(crate) fn second_difference_residual<F: Fn(f64, f64) -> f64>(
    samples: &[(f64, f64)],
    src: F,
    c: f64,
) -> f64 {
    samples
        .windows(3)
        .filter(|w| w[1].0 - w[0].0 > 0.0 && w[2].0 - w[1].0 > 0.0)
        .map(|w| {
            let (x0, y0) = w[0];
            let (x1, y1) = w[1];
            let (x2, y2) = w[2];
            let hm = x1 - x0;
            let hp = x2 - x1;
            let d2 = 2.0 * ((y2 - y1) / hp - (y1 - y0) / hm) / (hm + hp);
            let d1 = (hm * hm * (y2 - y1) + hp * hp * (y1 - y0)) / (hm * hp * (hm + hp));
            (d2 - c * d1 + src(x1, y1)).abs()
        })
        .fold(0.0, f64::max)
}

fn admissible(nl: &Nonlinearity, q: f64) -> Result<()> {
    let lo = nl.peak_floor();
    if !(q > lo && q < 1.0) {
        return Err(Error::Domain(format!(
            "peak q = {q} outside admissible range ({lo}, 1) for {}",
            nl.kind()
        )));
    }
    Ok(())
}

/// `p0(q; omega) = sqrt(omega^2 - 2 int_0^q f)`.
pub fn p0(nl: &Nonlinearity, omega: f64, q: f64) -> Result<f64> {
    let rad = omega * omega - 2.0 * nl.primitive(0.0, q)?;
    if rad < -1e-12 {
        return Err(Error::Domain(format!("negative radicand {rad} at q = {q}, omega = {omega}")));
    }
    Ok(rad.max(0.0).sqrt())
}

/// Peak `q^omega` solving `omega^2 = 2 int_0^q f` in `(peak_floor, 1)`.
pub fn q_top(nl: &Nonlinearity, omega: f64) -> Result<f64> {
    nl.require(&[Kind::Monostable, Kind::Bistable, Kind::Combustion], "monostable, bistable or combustion")?;
    if !(omega > 0.0 && omega < nl.omega0()) {
        return Err(Error::Domain(format!("omega = {omega} not in (0, {})", nl.omega0())));
    }
    let target = 0.5 * omega * omega;
    numerics::bisect(
        |q| nl.primitive(0.0, q).map(|v| v - target).unwrap_or(f64::NAN),
        nl.peak_floor(),
        1.0,
        1e-12,
    )
}

/// `omega` whose trajectory peaks at `top`: `sqrt(2 int_0^top f)`.
pub fn omega_for_peak(nl: &Nonlinearity, top: f64) -> Result<f64> {
    let m = nl.primitive(0.0, top)?;
    if !(m > 0.0) {
        return Err(Error::Domain(format!("int_0^{top} f = {m} is not positive")));
    }
    Ok((2.0 * m).sqrt())
}

/// Integrand of the descent time after `r = top - s^2`: `2 s / sqrt(2 int_r^top f)`.
fn descent_integrand(nl: &Nonlinearity, top: f64, s: f64) -> f64 {
    if s == 0.0 {
        let ft = nl.f(top);
        return if ft > 0.0 { 2.0 / (2.0 * ft).sqrt() } else { f64::NAN };
    }
    match nl.primitive_below(top, s * s) {
        Ok(m) if m > 0.0 => 2.0 * s / (2.0 * m).sqrt(),
        _ => f64::NAN,
    }
}

/// `int_{top - sb^2}^{top - sa^2} dr / sqrt(2 int_r^top f)` in the `s` variable.
fn descent_s(nl: &Nonlinearity, top: f64, sa: f64, sb: f64, tol: f64) -> Result<f64> {
    let g = |s: f64| descent_integrand(nl, top, s);
    // Kinks of f at r = b map to s = sqrt(top - b).
    let breaks: Vec<f64> = nl
        .breaks()
        .iter()
        .filter(|&&b| b < top)
        .map(|&b| (top - b).sqrt())
        .collect();
    let v = numerics::simpson_split(&g, sa, sb, &breaks, tol)?;
    if !v.is_finite() {
        return Err(Error::Domain(format!(
            "inner integral loses positivity below peak {top}"
        )));
    }
    Ok(v)
}

/// Time `int_a^b dr / sqrt(2 int_r^top f)` for `0 <= a <= b <= top`.
pub fn descent_time(nl: &Nonlinearity, top: f64, a: f64, b: f64) -> Result<f64> {
    descent_s(nl, top, (top - b).max(0.0).sqrt(), (top - a).max(0.0).sqrt(), TIME_MAP_TOL)
}

/// `Z(q) = int_0^q dr / sqrt(2 int_r^q f)`, the half-length of the stationary
/// profile peaking at `q`.
pub fn time_map(nl: &Nonlinearity, q: f64) -> Result<f64> {
    admissible(nl, q)?;
    descent_time(nl, q, 0.0, q)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriticalLength {
    /// `inf Z(q)` over the admissible range (Z'_M, Z_B or Z_C).
    pub inf: f64,
    /// Peak at which the infimum is (approximately) attained.
    pub argmin: f64,
    /// `pi / (2 sqrt(f'(0)))`, monostable only.
    pub z_m: Option<f64>,
    /// The coarse scan found more than one local minimum.
    pub multiple_minima: bool,
}

/// Infimum of the time map: 33-point scan followed by golden section.
pub fn critical_length(nl: &Nonlinearity) -> Result<CriticalLength> {
    nl.require(&[Kind::Monostable, Kind::Bistable, Kind::Combustion], "monostable, bistable or combustion")?;
    let lo = nl.peak_floor();
    let span = 1.0 - lo;
    let qs: Vec<f64> = (1..=SCAN_POINTS)
        .map(|i| lo + span * i as f64 / (SCAN_POINTS + 1) as f64)
        .collect();
    let zs: Vec<f64> = qs.iter().map(|&q| time_map(nl, q)).collect::<Result<_>>()?;
    let mut minima = Vec::new();
    for i in 0..zs.len() {
        let left = if i == 0 { f64::INFINITY } else { zs[i - 1] };
        let right = if i + 1 == zs.len() { f64::INFINITY } else { zs[i + 1] };
        if zs[i] <= left && zs[i] <= right {
            minima.push(i);
        }
    }
    let multiple_minima = minima.len() > 1;
    if multiple_minima {
        warn!("time map has {} local minima on the scan; reporting the global one", minima.len());
    }
    let eps = 1e-9 * span;
    let mut best = (f64::NAN, f64::INFINITY);
    for &i in &minima {
        let a = if i == 0 { lo + eps } else { qs[i - 1] };
        let b = if i + 1 == qs.len() { 1.0 - eps } else { qs[i + 1] };
        let (x, v) = numerics::golden_min(|q| time_map(nl, q).unwrap_or(f64::INFINITY), a, b, 1e-9);
        let (x, v) = if zs[i] < v { (qs[i], zs[i]) } else { (x, v) };
        if v < best.1 {
            best = (x, v);
        }
    }
    let z_m = (nl.kind() == Kind::Monostable).then(|| std::f64::consts::PI / (2.0 * nl.fp0().sqrt()));
    if let Some(zm) = z_m {
        if best.1 > zm + 1e-6 {
            return Err(Error::Domain(format!("Z'_M = {} exceeds Z_M = {zm}", best.1)));
        }
    }
    Ok(CriticalLength { inf: best.1, argmin: best.0, z_m, multiple_minima })
}

/// Stationary profile of half-length `z` on the maximal branch.
pub fn stationary_profile(nl: &Nonlinearity, z: f64) -> Result<StationaryProfile> {
    let crit = critical_length(nl)?;
    stationary_profile_with(nl, z, &crit, 801)
}

/// As [`stationary_profile`], reusing a precomputed critical length; `n`
/// samples on each half.
pub fn stationary_profile_with(
    nl: &Nonlinearity,
    z: f64,
    crit: &CriticalLength,
    n: usize,
) -> Result<StationaryProfile> {
    let strict = nl.kind() == Kind::Monostable;
    if z < crit.inf - 1e-9 || (strict && z <= crit.inf) {
        return Err(Error::NoSolution(format!(
            "half-length {z} below critical length {}",
            crit.inf
        )));
    }
    let lo = crit.argmin;
    let top = if z <= crit.inf {
        lo
    } else {
        let mut hi = None;
        for k in 2..15 {
            let q = 1.0 - 10f64.powi(-k);
            if q > lo && time_map(nl, q)? > z {
                hi = Some(q);
                break;
            }
        }
        let hi = hi.ok_or_else(|| Error::NoSolution(format!("time map stays below {z}")))?;
        numerics::bisect(|q| time_map(nl, q).map(|v| v - z).unwrap_or(f64::NAN), lo, hi, 1e-13)?
    };
    let omega = omega_for_peak(nl, top)?;
    let half = profile_by_quadrature(nl, top, n)?;
    let total = half.last().map(|s| s.0).unwrap_or(0.0);
    let mut profile: Vec<(f64, f64)> = half.iter().map(|&(d, q)| (d - total, q)).collect();
    profile.extend(half.iter().rev().skip(1).map(|&(d, q)| (total - d, q)));
    Ok(StationaryProfile { half_length: total, q_top: top, profile, boundary_slope: omega })
}

/// `(z, q)` samples of the increasing half of the profile peaking at `top`,
/// with `z = int_0^q dr / sqrt(2 int_r^top f)`. Samples are uniform in
/// `s = sqrt(top - q)`.
pub fn profile_by_quadrature(nl: &Nonlinearity, top: f64, n: usize) -> Result<Vec<(f64, f64)>> {
    let n = n.max(3);
    let smax = top.sqrt();
    let ss: Vec<f64> = (0..n).map(|k| smax * k as f64 / (n - 1) as f64).collect();
    // Cumulative time from the peak (s = 0) outward.
    let mut from_top = vec![0.0; n];
    for k in 1..n {
        from_top[k] = from_top[k - 1] + descent_s(nl, top, ss[k - 1], ss[k], TIME_MAP_TOL / n as f64)?;
    }
    let total = from_top[n - 1];
    Ok((0..n)
        .rev()
        .map(|k| (total - from_top[k], (top - ss[k] * ss[k]).max(0.0)))
        .collect())
}

/// Integrate `q' = p, p' = c p - f(q)` from `(0, omega)` until `p = 0`.
pub fn finite_wave(nl: &Nonlinearity, c: f64, omega: f64) -> Result<FiniteWave> {
    finite_wave_sampled(nl, c, omega, 1e-2)
}

pub fn finite_wave_sampled(nl: &Nonlinearity, c: f64, omega: f64, dz: f64) -> Result<FiniteWave> {
    if !(c >= 0.0) {
        return Err(Error::Domain(format!("wave speed c = {c} < 0")));
    }
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("omega = {omega} must be positive")));
    }
    let p_zero = |y: &[f64; 2]| y[1];
    let q_cap = |y: &[f64; 2]| (1.0 - 1e-9) - y[0];
    let opts = OdeOptions { rtol: 1e-11, atol: 1e-13, h_max: dz, sample_every: Some(dz), ..Default::default() };
    let tr = ode::integrate(
        |y: &[f64; 2]| [y[1], c * y[1] - nl.f(y[0])],
        0.0,
        [0.0, omega],
        1e5,
        &[&p_zero, &q_cap],
        &opts,
    )?;
    let terminated_by = match tr.stop {
        Stop::Event(0) => Termination::PHitZero,
        Stop::Event(_) => {
            return Err(Error::NoTermination(format!(
                "q reached 1 with p > 0 (c = {c}, omega = {omega})"
            )))
        }
        _ => {
            return Err(Error::NoTermination(format!(
                "p did not vanish (c = {c}, omega = {omega})"
            )))
        }
    };
    let (z_end, y_end) = tr.last();
    let profile: Vec<(f64, f64)> = tr.t.iter().zip(&tr.y).map(|(&z, y)| (z, y[0])).collect();
    let samples: Vec<(f64, f64)> = tr.y.iter().map(|y| (y[0], y[1].max(0.0))).collect();
    Ok(FiniteWave {
        c,
        omega,
        q_end: y_end[0],
        z_end,
        profile,
        trajectory: PhaseTrajectory {
            c,
            samples,
            start: (0.0, omega),
            end: (y_end[0], y_end[1].max(0.0)),
            terminated_by,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn p0_closed_forms() {
        let nl = Nonlinearity::logistic().unwrap();
        assert_eq!(p0(&nl, 0.1, 0.0).unwrap(), 0.1);
        let exact = (0.01f64 - 2.0 * (0.01 / 2.0 - 0.001 / 3.0)).sqrt();
        assert!((p0(&nl, 0.1, 0.1).unwrap() - exact).abs() < 1e-12);
        assert!((exact - 0.02582).abs() < 1e-5);
        let top = q_top(&nl, 0.1).unwrap();
        assert!(p0(&nl, 0.1, top).unwrap() < 1e-5);
        // p0 squared vanishes to bisection accuracy at the peak
        assert!(p0(&nl, 0.1, top).unwrap().powi(2) < 1e-10);
    }

    #[test]
    fn q_top_limits() {
        let nl = Nonlinearity::cubic_bistable(0.25).unwrap();
        let w0 = nl.omega0();
        assert!(q_top(&nl, 1e-6).unwrap() - 0.392375 < 1e-5);
        assert!(q_top(&nl, w0 * (1.0 - 1e-9)).unwrap() > 0.99);
        assert!(matches!(q_top(&nl, w0), Err(Error::Domain(_))));
        let nc = Nonlinearity::combustion(0.25).unwrap();
        assert!((q_top(&nc, 1e-6).unwrap() - 0.25).abs() < 1e-3);
        let mut prev = 0.0;
        for k in 1..10 {
            let q = q_top(&nl, 0.1 * k as f64 * w0).unwrap();
            assert!(q > prev);
            prev = q;
        }
    }

    #[test]
    fn time_map_limits() {
        let nl = Nonlinearity::logistic().unwrap();
        assert!((time_map(&nl, 1e-6).unwrap() - PI / 2.0).abs() < 1e-5);
        let z = |q| time_map(&nl, q).unwrap();
        assert!(z(0.999) > z(0.99) && z(0.99) > z(0.9));
        let nb = Nonlinearity::cubic_bistable(0.25).unwrap();
        let tb = nb.theta_bar().unwrap();
        let zb = |q| time_map(&nb, q).unwrap();
        assert!(zb(tb + 1e-4) > zb(tb + 1e-2) && zb(tb + 1e-2) > zb(tb + 0.1));
        assert!(matches!(time_map(&nb, 0.3), Err(Error::Domain(_))));
    }

    #[test]
    fn logistic_critical_length() {
        let nl = Nonlinearity::logistic().unwrap();
        let c = critical_length(&nl).unwrap();
        assert!((c.z_m.unwrap() - PI / 2.0).abs() < 1e-15);
        assert!(c.inf > 0.0 && c.inf <= PI / 2.0 + 1e-6);
    }

    #[test]
    fn stationary_profile_below_critical_is_rejected() {
        let nl = Nonlinearity::cubic_bistable(0.25).unwrap();
        let c = critical_length(&nl).unwrap();
        assert!(matches!(
            stationary_profile_with(&nl, c.inf - 1e-3, &c, 101),
            Err(Error::NoSolution(_))
        ));
    }

    #[test]
    fn finite_wave_c0_matches_closed_form() {
        let nl = Nonlinearity::logistic().unwrap();
        let w = 0.3;
        let fw = finite_wave(&nl, 0.0, w).unwrap();
        let top = q_top(&nl, w).unwrap();
        assert!((fw.q_end - top).abs() < 1e-6, "{} vs {top}", fw.q_end);
        let z = time_map(&nl, top).unwrap();
        assert!((fw.z_end - z).abs() < 1e-6, "{} vs {z}", fw.z_end);
        assert!(fw.trajectory.ode_residual(&nl, 1e-2) < 1e-3);
    }

    #[test]
    fn finite_wave_rejects_large_speed() {
        let nl = Nonlinearity::logistic().unwrap();
        assert!(matches!(finite_wave(&nl, 3.0, 0.5), Err(Error::NoTermination(_))));
    }
}
