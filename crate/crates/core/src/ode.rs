//! Dormand-Prince 5(4) integrator for small autonomous systems with terminal
//! events located by bisection on exact sub-steps.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub max_steps: usize,
    /// Record a sample every `sample_every` units of the independent
    /// variable; steps are clipped to land on these points. `None` records
    /// every accepted step.
    pub sample_every: Option<f64>,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-9,
            atol: 1e-12,
            h_init: 1e-3,
            h_max: 0.5,
            max_steps: 2_000_000,
            sample_every: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stop {
    /// Event `i` changed sign from positive to non-positive.
    Event(usize),
    End,
    StepLimit,
}

/// Terminal event: stops the integration where it reaches zero.
pub type Event<'a, const N: usize> = &'a dyn Fn(&[f64; N]) -> f64;

#[derive(Debug, Clone)]
pub struct Trace<const N: usize> {
    pub t: Vec<f64>,
    pub y: Vec<[f64; N]>,
    pub stop: Stop,
}

impl<const N: usize> Trace<N> {
    pub fn last(&self) -> (f64, [f64; N]) {
        (*self.t.last().unwrap(), *self.y.last().unwrap())
    }
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// One Dormand-Prince step; returns the 5th-order solution and the error estimate.
fn dp_step<const N: usize, F: Fn(&[f64; N]) -> [f64; N]>(
    rhs: &F,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
) -> ([f64; N], [f64; N], [f64; N]) {
    let k2 = rhs(&axpy(y, h, &[(A21, k1)]));
    let k3 = rhs(&axpy(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = rhs(&axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = rhs(&axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = rhs(&axpy(
        y,
        h,
        &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
    ));
    let y5 = axpy(y, h, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = rhs(&y5);
    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    (y5, err, k7)
}

fn err_norm<const N: usize>(y0: &[f64; N], y1: &[f64; N], err: &[f64; N], o: &OdeOptions) -> f64 {
    let mut s = 0.0;
    for i in 0..N {
        let sc = o.atol + o.rtol * y0[i].abs().max(y1[i].abs());
        s += (err[i] / sc).powi(2);
    }
    (s / N as f64).sqrt()
}

/// Integrate `y' = rhs(y)` from `t0` until `t_end`, a terminal event, or the
/// step limit. Events are functions that are positive at the start; the
/// first one to become non-positive stops the integration at its root.
pub fn integrate<const N: usize, F>(
    rhs: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    events: &[Event<'_, N>],
    opts: &OdeOptions,
) -> Result<Trace<N>>
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    for (i, ev) in events.iter().enumerate() {
        if ev(&y0) <= 0.0 {
            return Ok(Trace { t: vec![t0], y: vec![y0], stop: Stop::Event(i) });
        }
    }
    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(&y);
    let mut h = opts.h_init.min(opts.h_max);
    let mut trace = Trace { t: vec![t0], y: vec![y0], stop: Stop::End };
    let mut sample_k = 1usize;
    let mut next_sample = opts.sample_every.map(|d| t0 + d);
    let mut steps = 0usize;
    while t < t_end {
        if steps >= opts.max_steps {
            trace.stop = Stop::StepLimit;
            return Ok(trace);
        }
        steps += 1;
        let mut h_try = h.min(t_end - t);
        let mut on_sample = false;
        if let Some(ns) = next_sample {
            if t + h_try >= ns - 1e-14 * ns.abs().max(1.0) {
                h_try = ns - t;
                on_sample = true;
            }
        }
        let (y_new, err, k_new) = dp_step(&rhs, &y, &k1, h_try);
        let en = err_norm(&y, &y_new, &err, opts);
        if !en.is_finite() {
            h *= 0.25;
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::NoTermination(format!("step size underflow at t = {t}")));
            }
            continue;
        }
        if en > 1.0 {
            h = h_try * (0.9 * en.powf(-0.2)).max(0.2);
            if h < 1e-15 * t.abs().max(1.0) {
                return Err(Error::NoTermination(format!("step size underflow at t = {t}")));
            }
            continue;
        }
        // Accepted: check events on the new state.
        let fired = events.iter().position(|ev| ev(&y_new) <= 0.0);
        if let Some(i) = fired {
            let ev = events[i];
            let (mut lo, mut hi) = (0.0, h_try);
            let mut y_hit = y_new;
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let (ym, _, _) = dp_step(&rhs, &y, &k1, mid);
                if ev(&ym) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                    y_hit = ym;
                }
                if hi - lo <= 1e-15 * (t.abs() + hi).max(1e-300) {
                    break;
                }
            }
            trace.t.push(t + hi);
            trace.y.push(y_hit);
            trace.stop = Stop::Event(i);
            return Ok(trace);
        }
        t += h_try;
        y = y_new;
        k1 = k_new;
        if on_sample {
            t = next_sample.unwrap();
            sample_k += 1;
            next_sample = opts.sample_every.map(|d| t0 + sample_k as f64 * d);
            trace.t.push(t);
            trace.y.push(y);
        } else if opts.sample_every.is_none() {
            trace.t.push(t);
            trace.y.push(y);
        }
        let fac = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
        // Do not let a clipped sample step shrink the controller's step.
        h = (h.max(h_try) * fac).min(opts.h_max);
    }
    let last = *trace.t.last().unwrap();
    if (last - t).abs() > 1e-12 * t.abs().max(1.0) {
        trace.t.push(t);
        trace.y.push(y);
    }
    Ok(trace)
}
