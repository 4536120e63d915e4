//! Front-fixing finite differences for the free-boundary problem.
//!
//! With `y = (2x - (g + h)) / (h - g)` the moving interval becomes `[-1, 1]`
//! and `U(t, y) = u(t, x)` solves
//! `U_t = 4/(h-g)^2 U_yy + a(y) U_y + f(U)`. Each step moves the fronts by
//! forward Euler from the one-sided boundary flux, then advances `U` with
//! implicit diffusion and explicit advection and reaction.

use serde::{Deserialize, Serialize};

use crate::classifier::{Certifier, Verdict};
use crate::error::{Error, Result};
use crate::nonlinearity::Nonlinearity;
use crate::numerics;

/// Shape of the initial datum `u0 = sigma * phi` on `[-h0, h0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    /// `phi = cos(pi x / (2 h0))`
    CosineBump { sigma: f64 },
    /// `phi = 1 - (x / h0)^2`
    QuadBump { sigma: f64 },
    /// `phi = cos(pi x / (2 h0)) (1 + tilt x / h0)`, `|tilt| < 1`.
    TiltedBump { sigma: f64, tilt: f64 },
    /// Piecewise linear through `(x, u)`; `x` must run from `-h0` to `h0`.
    Samples { sigma: f64, x: Vec<f64>, u: Vec<f64> },
}

impl InitialData {
    pub fn sigma(&self) -> f64 {
        match self {
            InitialData::CosineBump { sigma }
            | InitialData::QuadBump { sigma }
            | InitialData::TiltedBump { sigma, .. }
            | InitialData::Samples { sigma, .. } => *sigma,
        }
    }

    /// Same shape, different amplitude.
    pub fn with_sigma(&self, s: f64) -> InitialData {
        let mut out = self.clone();
        match &mut out {
            InitialData::CosineBump { sigma }
            | InitialData::QuadBump { sigma }
            | InitialData::TiltedBump { sigma, .. }
            | InitialData::Samples { sigma, .. } => *sigma = s,
        }
        out
    }

    /// `phi(x)` (without the amplitude).
    pub fn shape(&self, h0: f64, x: f64) -> f64 {
        if x.abs() > h0 {
            return 0.0;
        }
        let cb = (std::f64::consts::FRAC_PI_2 * x / h0).cos();
        match self {
            InitialData::CosineBump { .. } => cb,
            InitialData::QuadBump { .. } => 1.0 - (x / h0).powi(2),
            InitialData::TiltedBump { tilt, .. } => cb * (1.0 + tilt * x / h0),
            InitialData::Samples { x: xs, u, .. } => numerics::interp_linear(xs, u, x),
        }
    }

    /// Node values of `u0` on the grid `y` for half-length `h0`, after
    /// checking membership in the admissible class.
    pub fn sample(&self, h0: f64, y: &[f64]) -> Result<Vec<f64>> {
        let sigma = self.sigma();
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Domain(format!("sigma = {sigma} must be positive")));
        }
        match self {
            InitialData::TiltedBump { tilt, .. } if !(tilt.abs() < 1.0) => {
                return Err(Error::Domain(format!("tilt = {tilt} must satisfy |tilt| < 1")));
            }
            InitialData::Samples { x, u, .. } => {
                if x.len() != u.len() || x.len() < 3 {
                    return Err(Error::Domain("samples need matching x and u of length >= 3".into()));
                }
                if (x[0] + h0).abs() > 1e-12 * h0 || (x[x.len() - 1] - h0).abs() > 1e-12 * h0 {
                    return Err(Error::Domain(format!("samples must span [-{h0}, {h0}]")));
                }
                if x.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Domain("sample abscissae must increase".into()));
                }
            }
            _ => {}
        }
        let n = y.len();
        let mut u: Vec<f64> = y.iter().map(|&yj| sigma * self.shape(h0, yj * h0)).collect();
        u[0] = 0.0;
        u[n - 1] = 0.0;
        if let InitialData::Samples { u: us, .. } = self {
            if us[0].abs() > 1e-12 || us[us.len() - 1].abs() > 1e-12 {
                return Err(Error::Domain("samples must vanish at both ends".into()));
            }
        }
        if let Some(j) = (1..n - 1).find(|&j| !(u[j] > 0.0)) {
            return Err(Error::Domain(format!("u0 is not positive at x = {}", y[j] * h0)));
        }
        // one-sided slopes at the ends
        if !(4.0 * u[1] - u[2] > 0.0 && 4.0 * u[n - 2] - u[n - 3] > 0.0) {
            return Err(Error::Domain("u0 has a degenerate slope at an end point".into()));
        }
        Ok(u)
    }
}

/// Tolerances for runtime checks and stopping rules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Allowed excursion of `U` outside `[0, max(|u0|, 1)]`.
    pub overshoot_tol: f64,
    /// Violations of the runtime bounds above this are recorded.
    pub check_tol: f64,
    /// Inward front speed treated as an instability.
    pub sign_tol: f64,
    /// `max U` below this ends the run (with `early_stop`).
    pub vanish_tol: f64,
    /// Blow-up is declared above `blowup_factor * max(|u0|, 1)`.
    pub blowup_factor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { overshoot_tol: 1e-6, check_tol: 1e-4, sign_tol: 1e-8, vanish_tol: 1e-4, blowup_factor: 10.0 }
    }
}

/// Discretisation and stopping parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverParams {
    pub n: usize,
    pub dt_safety: f64,
    pub t_max: f64,
    pub snapshot_every: f64,
    /// Stop at the first certificate or when `max U` drops below `vanish_tol`.
    pub early_stop: bool,
    pub tolerances: Tolerances,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            n: 401,
            dt_safety: 0.4,
            t_max: 50.0,
            snapshot_every: 1.0,
            early_stop: true,
            tolerances: Tolerances::default(),
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        if self.n < 5 || self.n.is_multiple_of(2) {
            return Err(Error::Domain(format!("n = {} must be odd and at least 5", self.n)));
        }
        if !(self.dt_safety > 0.0 && self.dt_safety <= 1.0) {
            return Err(Error::Domain(format!("dt_safety = {} not in (0, 1]", self.dt_safety)));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::Domain(format!("t_max = {} must be positive", self.t_max)));
        }
        if !(self.snapshot_every > 0.0) {
            return Err(Error::Domain(format!("snapshot_every = {} must be positive", self.snapshot_every)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub nl: Nonlinearity,
    pub mu: f64,
    pub h0: f64,
    pub u0: InitialData,
    pub params: SolverParams,
}

impl SolverConfig {
    pub fn new(nl: Nonlinearity, mu: f64, h0: f64, u0: InitialData) -> Self {
        SolverConfig { nl, mu, h0, u0, params: SolverParams::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::Domain(format!("mu = {} must be positive", self.mu)));
        }
        if !(self.h0 > 0.0 && self.h0.is_finite()) {
            return Err(Error::Domain(format!("h0 = {} must be positive", self.h0)));
        }
        self.params.validate()
    }

    /// Stable 64-bit FNV-1a hash of the run parameters.
    pub fn hash(&self) -> String {
        let text = serde_json::json!({
            "kind": self.nl.kind().to_string(),
            "theta": self.nl.theta(),
            "mu": self.mu,
            "h0": self.h0,
            "u0": self.u0,
            "params": self.params,
        })
        .to_string();
        let mut h: u64 = 0xcbf29ce484222325;
        for b in text.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        format!("{h:016x}")
    }
}

/// Composite Simpson on an odd number of equally spaced values.
pub fn simpson_nodes(u: &[f64], dx: f64) -> f64 {
    let n = u.len();
    let mut s = u[0] + u[n - 1];
    for (j, v) in u.iter().enumerate().take(n - 1).skip(1) {
        s += if j % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    s * dx / 3.0
}

/// Uniform nodes on `[-1, 1]`.
pub fn y_grid(n: usize) -> Vec<f64> {
    let dy = 2.0 / (n - 1) as f64;
    (0..n).map(|j| if j == n - 1 { 1.0 } else { -1.0 + j as f64 * dy }).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub g: f64,
    pub h: f64,
    /// Values at the fixed nodes `y_j`, zero at both ends.
    pub u: Vec<f64>,
}

impl Snapshot {
    pub fn x(&self, y: f64) -> f64 {
        0.5 * ((self.h - self.g) * y + (self.g + self.h))
    }

    pub fn xs(&self) -> Vec<f64> {
        y_grid(self.u.len()).into_iter().map(|y| self.x(y)).collect()
    }

    pub fn width(&self) -> f64 {
        self.h - self.g
    }

    pub fn max_u(&self) -> f64 {
        self.u.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_u(&self) -> f64 {
        self.u.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `int_g^h u dx` by composite Simpson (the node count is odd).
    pub fn mass(&self) -> f64 {
        simpson_nodes(&self.u, self.width() / (self.u.len() - 1) as f64)
    }

    /// `u` at physical position `x` (zero outside `[g, h]`).
    pub fn value_at(&self, x: f64) -> f64 {
        if x <= self.g || x >= self.h {
            return 0.0;
        }
        let n = self.u.len();
        let pos = (2.0 * x - (self.g + self.h)) / (self.h - self.g);
        let s = (pos + 1.0) * 0.5 * (n - 1) as f64;
        let j = (s.floor() as usize).min(n - 2);
        let w = s - j as f64;
        self.u[j] * (1.0 - w) + self.u[j + 1] * w
    }

    /// Physical position of the largest node value.
    pub fn argmax_x(&self) -> f64 {
        let (j, _) = self
            .u
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |b, (j, &v)| if v > b.1 { (j, v) } else { b });
        self.x(-1.0 + 2.0 * j as f64 / (self.u.len() - 1) as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontRecord {
    pub t: f64,
    pub g: f64,
    pub h: f64,
    pub gprime: f64,
    pub hprime: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunTermination {
    TMax,
    VanishTol,
    SpreadCertified,
    VanishCertified,
    Blowup,
}

/// Tally for one runtime bound.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckStat {
    pub evaluated: usize,
    pub violations: usize,
    /// Largest excess over the bound (negative when always satisfied).
    pub worst: f64,
}

impl CheckStat {
    fn record(&mut self, excess: f64, tol: f64) -> bool {
        if self.evaluated == 0 || excess > self.worst {
            self.worst = excess;
        }
        self.evaluated += 1;
        if excess > tol {
            self.violations += 1;
            return true;
        }
        false
    }

    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RuntimeChecks {
    /// `|g + h| < 2 h0`, every step.
    pub center_bound: CheckStat,
    /// `g` non-increasing and `h` non-decreasing, every step.
    pub front_monotone: CheckStat,
    /// `max U <= zeta(t)`, `zeta' = f(zeta)`, `zeta(0) = |u0|_inf`.
    pub zeta_bound: CheckStat,
    /// `max U <= e^{Kt} / (2 sqrt(pi t)) int u0`, when `K > 0`.
    pub heat_bound: CheckStat,
    /// `0 <= U <= max(|u0|_inf, 1)` up to the overshoot tolerance.
    pub range: CheckStat,
    /// `U` increasing left of `-h0` and decreasing right of `h0`.
    pub outer_monotone: CheckStat,
}

impl RuntimeChecks {
    pub fn all_hold(&self) -> bool {
        [
            &self.center_bound,
            &self.front_monotone,
            &self.zeta_bound,
            &self.heat_bound,
            &self.range,
            &self.outer_monotone,
        ]
        .iter()
        .all(|c| c.holds())
    }
}

/// A certificate together with the snapshot time at which it fired.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifiedAt {
    pub t: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Run {
    pub config_hash: String,
    pub mu: f64,
    pub h0: f64,
    pub sigma: f64,
    pub snapshots: Vec<Snapshot>,
    pub fronts: Vec<FrontRecord>,
    pub termination: RunTermination,
    pub certificate: Option<CertifiedAt>,
    pub checks: RuntimeChecks,
    pub warnings: Vec<String>,
    pub steps: usize,
}

impl Run {
    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().unwrap()
    }

    pub fn t_end(&self) -> f64 {
        self.last().t
    }

    /// `int u + (h - g) / mu` at each snapshot.
    pub fn conserved(&self) -> Vec<(f64, f64)> {
        self.snapshots.iter().map(|s| (s.t, s.mass() + s.width() / self.mu)).collect()
    }
}

/// Advection coefficient and diffusion coefficient of the transformed equation.
#[derive(Debug, Clone, PartialEq)]
pub struct Transformed {
    pub diffusion: f64,
    pub advection: Vec<f64>,
}

/// Coefficients of `U_t = D U_yy + a(y) U_y + f(U)` for fronts `(g, h)`
/// moving with speeds `(gp, hp)`.
pub fn front_fix(g: f64, h: f64, gp: f64, hp: f64, y: &[f64]) -> Transformed {
    let w = h - g;
    Transformed {
        diffusion: 4.0 / (w * w),
        advection: y.iter().map(|&yj| (gp * (1.0 - yj) + hp * (1.0 + yj)) / w).collect(),
    }
}

/// Stefan speeds `(g', h')` from third-order one-sided four-point differences.
pub fn boundary_flux(u: &[f64], g: f64, h: f64, mu: f64) -> (f64, f64) {
    let n = u.len();
    let dy = 2.0 / (n - 1) as f64;
    let scale = 2.0 / (h - g);
    let ux_h = scale * (11.0 * u[n - 1] - 18.0 * u[n - 2] + 9.0 * u[n - 3] - 2.0 * u[n - 4]) / (6.0 * dy);
    let ux_g = scale * (-11.0 * u[0] + 18.0 * u[1] - 9.0 * u[2] + 2.0 * u[3]) / (6.0 * dy);
    (-mu * ux_g, -mu * ux_h)
}

/// Mutable solver state.
#[derive(Debug, Clone)]
pub struct State {
    pub t: f64,
    pub g: f64,
    pub h: f64,
    pub gp: f64,
    pub hp: f64,
    pub u: Vec<f64>,
    y: Vec<f64>,
    scratch: Vec<f64>,
    saved: Vec<f64>,
    rhs: Vec<f64>,
}

impl State {
    pub fn new(h0: f64, u: Vec<f64>, mu: f64) -> State {
        let n = u.len();
        let (gp, hp) = boundary_flux(&u, -h0, h0, mu);
        State {
            t: 0.0,
            g: -h0,
            h: h0,
            gp,
            hp,
            u,
            y: y_grid(n),
            scratch: Vec::new(),
            saved: Vec::new(),
            rhs: vec![0.0; n - 2],
        }
    }

    pub fn dx(&self) -> f64 {
        (self.h - self.g) / (self.u.len() - 1) as f64
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot { t: self.t, g: self.g, h: self.h, u: self.u.clone() }
    }

    /// Step size from the diffusive and front-CFL limits, plus a reaction
    /// limit `dt |f'| <= dt_safety` so the explicit reaction stays monotone.
    pub fn stable_dt(&self, dt_safety: f64, lip: f64) -> f64 {
        let dx = self.dx();
        let speed = self.gp.abs().max(self.hp.abs());
        let mut dt = dx * dx;
        if speed > 0.0 {
            dt = dt.min(dx / speed);
        }
        if lip > 0.0 {
            dt = dt.min(1.0 / lip);
        }
        dt_safety * dt
    }

    /// One step of size `dt`.
    /// One step of size `dt`. The predictor moves the fronts with the
    /// current flux; the corrector repeats the step with the flux of the
    /// predicted profile, so front motion and the implicit diffusion see
    /// the same time level.
    pub fn step(&mut self, nl: &Nonlinearity, mu: f64, dt: f64) {
        let (g0, h0) = (self.g, self.h);
        self.saved.clone_from(&self.u);
        self.advance(nl, dt, self.gp, self.hp);
        let (gp1, hp1) = boundary_flux(&self.u, self.g, self.h, mu);
        self.g = g0;
        self.h = h0;
        self.u.copy_from_slice(&self.saved);
        self.advance(nl, dt, gp1, hp1);
        self.t += dt;
        let (gp, hp) = boundary_flux(&self.u, self.g, self.h, mu);
        self.gp = gp;
        self.hp = hp;
    }

    fn advance(&mut self, nl: &Nonlinearity, dt: f64, gp: f64, hp: f64) {
        let n = self.u.len();
        let dy = 2.0 / (n - 1) as f64;
        let w_old = self.h - self.g;
        // explicit advection and reaction with the old geometry;
        // a(y) = a0 + a1 y
        let a0 = (gp + hp) / w_old;
        let a1 = (hp - gp) / w_old;
        let half_inv_dy = 0.5 / dy;
        let mut rhs = std::mem::take(&mut self.rhs);
        for ((r, w3), &yj) in rhs.iter_mut().zip(self.u.windows(3)).zip(&self.y[1..n - 1]) {
            let uy = (w3[2] - w3[0]) * half_inv_dy;
            *r = w3[1] + dt * ((a0 + a1 * yj) * uy + nl.f(w3[1]));
        }
        self.g += dt * gp;
        self.h += dt * hp;
        let w = self.h - self.g;
        let r = dt * 4.0 / (w * w) / (dy * dy);
        numerics::solve_toeplitz_tridiagonal(r, &mut rhs, &mut self.scratch);
        self.u[1..n - 1].copy_from_slice(&rhs);
        self.u[0] = 0.0;
        self.u[n - 1] = 0.0;
        self.rhs = rhs;
    }
}

fn rk4(nl: &Nonlinearity, z: f64, dt: f64) -> f64 {
    let k1 = nl.f(z);
    let k2 = nl.f(z + 0.5 * dt * k1);
    let k3 = nl.f(z + 0.5 * dt * k2);
    let k4 = nl.f(z + dt * k3);
    z + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

const MAX_WARNINGS: usize = 20;

/// Largest `|f'|` on `[0, cap]`, sampled.
fn lipschitz(nl: &Nonlinearity, cap: f64) -> f64 {
    (0..=200).map(|k| nl.df(cap * k as f64 / 200.0).abs()).fold(0.0, f64::max)
}

/// Integrate a configuration. Certificates are evaluated at every snapshot;
/// with `early_stop` the first one (or `max U < vanish_tol`) ends the run.
pub fn run(cfg: &SolverConfig) -> Result<Run> {
    cfg.validate()?;
    let p = &cfg.params;
    let tol = &p.tolerances;
    let nl = &cfg.nl;
    let y = y_grid(p.n);
    let u0 = cfg.u0.sample(cfg.h0, &y)?;
    let sup0 = u0.iter().copied().fold(0.0, f64::max);
    let cap = sup0.max(1.0);
    let blowup_cap = tol.blowup_factor * cap;
    let mass0 = simpson_nodes(&u0, 2.0 * cfg.h0 / (p.n - 1) as f64);
    let lip = lipschitz(nl, cap.min(nl.u_cap()));
    let kk = nl.sup_slope();
    let certifier = Certifier::new(nl, cfg.mu).ok();

    let mut st = State::new(cfg.h0, u0, cfg.mu);
    let mut out = Run {
        config_hash: cfg.hash(),
        mu: cfg.mu,
        h0: cfg.h0,
        sigma: cfg.u0.sigma(),
        snapshots: vec![st.snapshot()],
        fronts: vec![FrontRecord { t: 0.0, g: st.g, h: st.h, gprime: st.gp, hprime: st.hp }],
        termination: RunTermination::TMax,
        certificate: None,
        checks: RuntimeChecks::default(),
        warnings: Vec::new(),
        steps: 0,
    };
    let mut warn = |out: &mut Run, msg: String| {
        if out.warnings.len() < MAX_WARNINGS {
            log::warn!("{msg}");
            out.warnings.push(msg);
        }
    };
    if let Some(c) = &certifier {
        if let Some(v) = c.certify(&out.snapshots[0]) {
            out.certificate = Some(CertifiedAt { t: 0.0, verdict: v.clone() });
            if p.early_stop {
                out.termination = termination_for(&v);
                return Ok(out);
            }
        }
    }
    let mut zeta = sup0;
    let mut next_snap = 1usize;
    let eps_t = 1e-12 * p.t_max;
    loop {
        let t_snap = (next_snap as f64 * p.snapshot_every).min(p.t_max);
        let mut dt = st.stable_dt(p.dt_safety, lip);
        let at_snap = st.t + dt >= t_snap - eps_t;
        if at_snap {
            dt = t_snap - st.t;
        }
        let (g_prev, h_prev) = (st.g, st.h);
        st.step(nl, cfg.mu, dt);
        out.steps += 1;
        if at_snap {
            st.t = t_snap;
        }
        zeta = rk4(nl, zeta, dt);
        out.fronts.push(FrontRecord { t: st.t, g: st.g, h: st.h, gprime: st.gp, hprime: st.hp });

        let max_u = st.u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(max_u <= blowup_cap) {
            return Err(Error::Blowup { t: st.t, max_u });
        }
        if st.hp < -tol.sign_tol || st.gp > tol.sign_tol {
            return Err(Error::Sign { t: st.t, gprime: st.gp, hprime: st.hp });
        }
        let c = &mut out.checks;
        let ex_center = (st.g + st.h).abs() - 2.0 * cfg.h0;
        let v1 = c.center_bound.record(ex_center, 0.0);
        let ex_mono = (st.g - g_prev).max(h_prev - st.h);
        let v2 = c.front_monotone.record(ex_mono, 0.0);
        if v1 {
            warn(&mut out, format!("center bound violated at t = {}: g + h = {}", st.t, st.g + st.h));
        }
        if v2 {
            warn(&mut out, format!("front moved backwards at t = {}", st.t));
        }
        if !at_snap {
            continue;
        }
        next_snap += 1;
        let snap = st.snapshot();
        snapshot_checks(&mut out, &snap, cfg, tol, zeta, kk, mass0, cap, &mut warn);
        out.snapshots.push(snap);
        let snap = out.snapshots.last().unwrap();
        if out.certificate.is_none() {
            if let Some(v) = certifier.as_ref().and_then(|c| c.certify(snap)) {
                out.certificate = Some(CertifiedAt { t: snap.t, verdict: v.clone() });
                if p.early_stop {
                    out.termination = termination_for(&v);
                    break;
                }
            }
        }
        if p.early_stop && max_u <= tol.vanish_tol {
            out.termination = RunTermination::VanishTol;
            break;
        }
        if st.t >= p.t_max - eps_t {
            break;
        }
    }
    Ok(out)
}

fn termination_for(v: &Verdict) -> RunTermination {
    if v.outcome == crate::classifier::Outcome::Spreading {
        RunTermination::SpreadCertified
    } else {
        RunTermination::VanishCertified
    }
}

#[allow(clippy::too_many_arguments)]
fn snapshot_checks(
    out: &mut Run,
    snap: &Snapshot,
    cfg: &SolverConfig,
    tol: &Tolerances,
    zeta: f64,
    kk: f64,
    mass0: f64,
    cap: f64,
    warn: &mut impl FnMut(&mut Run, String),
) {
    let t = snap.t;
    let max_u = snap.max_u();
    let scale = zeta.abs().max(1.0);
    let c = &mut out.checks;
    let v_zeta = c.zeta_bound.record((max_u - zeta) / scale, tol.check_tol);
    let mut v_heat = false;
    if kk > 0.0 && t > 0.0 {
        let bound = (kk * t).exp() / (2.0 * (std::f64::consts::PI * t).sqrt()) * mass0;
        v_heat = c.heat_bound.record((max_u - bound) / bound.max(1.0), tol.check_tol);
    }
    let range_ex = (max_u - cap).max(-snap.min_u());
    let v_range = c.range.record(range_ex, tol.overshoot_tol);
    let n = snap.u.len();
    let xs = snap.xs();
    let mut outer = f64::NEG_INFINITY;
    for j in 0..n - 1 {
        if xs[j + 1] <= -cfg.h0 {
            outer = outer.max(snap.u[j] - snap.u[j + 1]);
        }
        if xs[j] >= cfg.h0 {
            outer = outer.max(snap.u[j + 1] - snap.u[j]);
        }
    }
    let v_outer = outer > f64::NEG_INFINITY && c.outer_monotone.record(outer, tol.check_tol);
    if v_zeta {
        warn(out, format!("max u = {max_u} exceeds reaction bound {zeta} at t = {t}"));
    }
    if v_heat {
        warn(out, format!("max u = {max_u} exceeds heat-kernel bound at t = {t}"));
    }
    if v_range {
        warn(out, format!("u outside [0, {cap}] at t = {t}: [{}, {max_u}]", snap.min_u()));
    }
    if v_outer {
        warn(out, format!("u not monotone outside the initial support at t = {t}"));
    }
}
