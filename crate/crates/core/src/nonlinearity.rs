//! Reaction terms `f(u)`: validation of the monostable, bistable and
//! combustion sign structures, plus the derived constants the rest of the
//! crate needs (f'(0), f'(1), the linear bound K, sup f, the energy level
//! omega0 and the balance point theta_bar).

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

pub const DEFAULT_U_CAP: f64 = 3.0;
pub const DEFAULT_GRID_N: usize = 2001;
pub const QUAD_TOL: f64 = 1e-10;
const ZERO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Monostable,
    Bistable,
    Combustion,
    Custom,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Kind::Monostable => "monostable",
            Kind::Bistable => "bistable",
            Kind::Combustion => "combustion",
            Kind::Custom => "custom",
        };
        f.write_str(s)
    }
}

/// Catalog entry selectable by name from a job config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum NonlinearitySpec {
    /// `u(1-u)`
    Logistic {},
    /// `u(u-theta)(1-u)`
    CubicBistable { theta: f64 },
    /// `0` on `[0, theta]`, `(u-theta)(1-u)` above.
    Combustion { theta: f64 },
    /// Polynomial `sum c_k u^k`, coefficients in increasing degree.
    Custom {
        coefficients: Vec<f64>,
        #[serde(default = "custom_kind")]
        kind: Kind,
        #[serde(default)]
        theta: Option<f64>,
    },
}

fn custom_kind() -> Kind {
    Kind::Custom
}

impl NonlinearitySpec {
    pub fn build(&self) -> Result<Nonlinearity> {
        match *self {
            NonlinearitySpec::Logistic {} => Nonlinearity::logistic(),
            NonlinearitySpec::CubicBistable { theta } => Nonlinearity::cubic_bistable(theta),
            NonlinearitySpec::Combustion { theta } => Nonlinearity::combustion(theta),
            NonlinearitySpec::Custom { ref coefficients, kind, theta } => {
                Nonlinearity::polynomial(coefficients, kind, theta)
            }
        }
    }
}

/// A validated reaction term. Immutable once built.
#[derive(Clone)]
pub struct Nonlinearity {
    kind: Kind,
    f: ScalarFn,
    df: ScalarFn,
    theta: Option<f64>,
    delta0: Option<f64>,
    fp0: f64,
    fp1: f64,
    sup_slope: f64,
    sup_val: f64,
    omega0: f64,
    theta_bar: Option<f64>,
    u_cap: f64,
    /// Points where `f` may fail to be smooth; quadrature splits there.
    breaks: Vec<f64>,
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Nonlinearity")
            .field("kind", &self.kind)
            .field("theta", &self.theta)
            .field("fp0", &self.fp0)
            .field("fp1", &self.fp1)
            .field("sup_slope", &self.sup_slope)
            .field("sup_val", &self.sup_val)
            .field("omega0", &self.omega0)
            .field("theta_bar", &self.theta_bar)
            .finish()
    }
}

/// Inputs to [`Nonlinearity::build`].
pub struct Builder {
    pub kind: Kind,
    pub f: ScalarFn,
    pub df: ScalarFn,
    pub theta: Option<f64>,
    pub delta0: Option<f64>,
    pub u_cap: f64,
    pub grid_n: usize,
    pub breaks: Vec<f64>,
}

impl Builder {
    pub fn new(kind: Kind, f: ScalarFn, df: ScalarFn) -> Self {
        Builder {
            kind,
            f,
            df,
            theta: None,
            delta0: None,
            u_cap: DEFAULT_U_CAP,
            grid_n: DEFAULT_GRID_N,
            breaks: Vec::new(),
        }
    }

    pub fn theta(mut self, theta: f64) -> Self {
        self.theta = Some(theta);
        self
    }

    pub fn delta0(mut self, d: f64) -> Self {
        self.delta0 = Some(d);
        self
    }

    pub fn breaks(mut self, b: Vec<f64>) -> Self {
        self.breaks = b;
        self
    }

    pub fn grid_n(mut self, n: usize) -> Self {
        self.grid_n = n;
        self
    }

    pub fn build(self) -> Result<Nonlinearity> {
        Nonlinearity::build(self)
    }
}

fn fail(condition: impl Into<String>, at: f64) -> Error {
    Error::Validation { condition: condition.into(), at }
}

impl Nonlinearity {
    pub fn logistic() -> Result<Self> {
        Builder::new(
            Kind::Monostable,
            Arc::new(|u| u * (1.0 - u)),
            Arc::new(|u| 1.0 - 2.0 * u),
        )
        .build()
    }

    pub fn cubic_bistable(theta: f64) -> Result<Self> {
        Builder::new(
            Kind::Bistable,
            Arc::new(move |u| u * (u - theta) * (1.0 - u)),
            Arc::new(move |u| -3.0 * u * u + 2.0 * (1.0 + theta) * u - theta),
        )
        .theta(theta)
        .build()
    }

    pub fn combustion(theta: f64) -> Result<Self> {
        Builder::new(
            Kind::Combustion,
            Arc::new(move |u| if u <= theta { 0.0 } else { (u - theta) * (1.0 - u) }),
            Arc::new(move |u| if u <= theta { 0.0 } else { 1.0 + theta - 2.0 * u }),
        )
        .theta(theta)
        .delta0(0.25 * (1.0 - theta))
        .breaks(vec![theta])
        .build()
    }

    /// Polynomial reaction term with coefficients in increasing degree.
    pub fn polynomial(coeffs: &[f64], kind: Kind, theta: Option<f64>) -> Result<Self> {
        let c: Arc<[f64]> = coeffs.to_vec().into();
        let dc: Arc<[f64]> = coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &a)| k as f64 * a)
            .collect::<Vec<_>>()
            .into();
        let horner = |c: &[f64], u: f64| c.iter().rev().fold(0.0, |acc, &a| acc * u + a);
        let mut b = Builder::new(
            kind,
            Arc::new(move |u| horner(&c, u)),
            Arc::new(move |u| horner(&dc, u)),
        );
        b.theta = theta;
        if kind == Kind::Combustion {
            return Err(Error::Domain(
                "polynomial reaction terms cannot vanish on [0, theta]; use the combustion catalog entry".into(),
            ));
        }
        b.build()
    }

    /// Zero reaction term (pure Stefan problem).
    pub fn zero() -> Result<Self> {
        Builder::new(Kind::Custom, Arc::new(|_| 0.0), Arc::new(|_| 0.0)).build()
    }

    pub fn build(b: Builder) -> Result<Self> {
        if b.grid_n < 64 {
            return Err(Error::Domain(format!("grid_n = {} < 64", b.grid_n)));
        }
        if !(b.u_cap > 1.0) {
            return Err(Error::Domain(format!("u_cap = {} must exceed 1", b.u_cap)));
        }
        let needs_theta = matches!(b.kind, Kind::Bistable | Kind::Combustion);
        if let Some(t) = b.theta {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::Domain(format!("theta = {t} not in (0, 1)")));
            }
        } else if needs_theta {
            return Err(Error::Domain(format!("{} requires theta", b.kind)));
        }
        let f = &b.f;
        let f0 = f(0.0);
        if f0.abs() > ZERO_TOL {
            return Err(fail("f(0) = 0", 0.0));
        }
        let fp0 = (b.df)(0.0);
        let fp1 = (b.df)(1.0);

        let mut grid: Vec<f64> = (0..b.grid_n)
            .map(|i| b.u_cap * i as f64 / (b.grid_n - 1) as f64)
            .collect();
        grid.push(1.0);
        if let Some(t) = b.theta {
            grid.push(t);
        }
        grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
        grid.dedup();

        let mut nl = Nonlinearity {
            kind: b.kind,
            f: b.f.clone(),
            df: b.df.clone(),
            theta: if b.kind == Kind::Monostable { None } else { b.theta },
            delta0: b.delta0,
            fp0,
            fp1,
            sup_slope: 0.0,
            sup_val: 0.0,
            omega0: 0.0,
            theta_bar: None,
            u_cap: b.u_cap,
            breaks: b.breaks.clone(),
        };
        nl.check_sign_structure(&grid)?;

        // K = sup f(u)/u over (0, u_cap], including the limit f'(0) at 0+.
        let ratio = |u: f64| if u <= 0.0 { fp0 } else { (nl.f)(u) / u };
        let (_, k) = numerics::scan_max(&ratio, 0.0, b.u_cap, b.grid_n);
        nl.sup_slope = k.max(fp0).max(0.0);
        let (_, fmax) = numerics::scan_max(&|u| (nl.f)(u), 0.0, b.u_cap, b.grid_n);
        nl.sup_val = fmax.max(0.0);
        for &u in &grid {
            if u > 0.0 && (nl.f)(u) > nl.sup_slope * u * (1.0 + 1e-12) + 1e-14 {
                return Err(fail("f(u) <= K u", u));
            }
        }

        if b.kind != Kind::Custom {
            let mass = nl.primitive(0.0, 1.0)?;
            if b.kind == Kind::Bistable && !(mass > 0.0) {
                return Err(fail("integral of f over [0, 1] > 0", 1.0));
            }
            if !(mass > 0.0) {
                return Err(fail("omega0 > 0", 1.0));
            }
            nl.omega0 = (2.0 * mass).sqrt();
            if b.kind == Kind::Bistable {
                nl.theta_bar = Some(nl.solve_theta_bar()?);
            }
        } else {
            let mass = nl.primitive(0.0, 1.0)?;
            nl.omega0 = if mass > 0.0 { (2.0 * mass).sqrt() } else { 0.0 };
        }
        Ok(nl)
    }

    fn check_sign_structure(&self, grid: &[f64]) -> Result<()> {
        let f = |u: f64| (self.f)(u);
        let near = |a: f64, b: f64| (a - b).abs() <= 1e-12;
        match self.kind {
            Kind::Custom => Ok(()),
            Kind::Monostable => {
                if f(1.0).abs() > ZERO_TOL {
                    return Err(fail("f(1) = 0", 1.0));
                }
                if !(self.fp0 > 0.0) {
                    return Err(fail("f'(0) > 0", 0.0));
                }
                if !(self.fp1 < 0.0) {
                    return Err(fail("f'(1) < 0", 1.0));
                }
                for &u in grid {
                    if u > 0.0 && !near(u, 1.0) && !((1.0 - u) * f(u) > 0.0) {
                        return Err(fail("(1-u) f(u) > 0", u));
                    }
                }
                Ok(())
            }
            Kind::Bistable => {
                let theta = self.theta.unwrap();
                if f(theta).abs() > ZERO_TOL {
                    return Err(fail("f(theta) = 0", theta));
                }
                if f(1.0).abs() > ZERO_TOL {
                    return Err(fail("f(1) = 0", 1.0));
                }
                for &u in grid {
                    if u == 0.0 || near(u, theta) || near(u, 1.0) {
                        continue;
                    }
                    let v = f(u);
                    if u < theta && !(v < 0.0) {
                        return Err(fail("f < 0 on (0, theta)", u));
                    }
                    if u > theta && u < 1.0 && !(v > 0.0) {
                        return Err(fail("f > 0 on (theta, 1)", u));
                    }
                    if u > 1.0 && !(v < 0.0) {
                        return Err(fail("f < 0 on (1, u_cap]", u));
                    }
                }
                if !(self.fp0 < 0.0) {
                    return Err(fail("f'(0) < 0", 0.0));
                }
                if !(self.fp1 < 0.0) {
                    return Err(fail("f'(1) < 0", 1.0));
                }
                Ok(())
            }
            Kind::Combustion => {
                let theta = self.theta.unwrap();
                if f(1.0).abs() > ZERO_TOL {
                    return Err(fail("f(1) = 0", 1.0));
                }
                for &u in grid {
                    let v = f(u);
                    if u <= theta && v.abs() > ZERO_TOL {
                        return Err(fail("f = 0 on [0, theta]", u));
                    }
                    if u > theta && u < 1.0 && !near(u, 1.0) && !(v > 0.0) {
                        return Err(fail("f > 0 on (theta, 1)", u));
                    }
                    if u > 1.0 && !near(u, 1.0) && !(v < 0.0) {
                        return Err(fail("f < 0 on (1, u_cap]", u));
                    }
                }
                if !(self.fp1 < 0.0) {
                    return Err(fail("f'(1) < 0", 1.0));
                }
                let d0 = self.delta0.unwrap_or(0.0);
                if !(d0 > 0.0) {
                    return Err(Error::Domain("combustion requires delta0 > 0".into()));
                }
                let mut prev = f(theta);
                for &u in grid.iter().filter(|&&u| u > theta && u < theta + d0) {
                    let v = f(u);
                    if v < prev - ZERO_TOL {
                        return Err(fail("f nondecreasing on (theta, theta + delta0)", u));
                    }
                    prev = v;
                }
                Ok(())
            }
        }
    }

    fn solve_theta_bar(&self) -> Result<f64> {
        let theta = self.theta.unwrap();
        numerics::bisect(
            |x| self.primitive(0.0, x).unwrap_or(f64::NAN),
            theta,
            1.0,
            1e-12,
        )
    }

    #[inline]
    pub fn f(&self, u: f64) -> f64 {
        (self.f)(u)
    }

    #[inline]
    pub fn df(&self, u: f64) -> f64 {
        (self.df)(u)
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn theta(&self) -> Option<f64> {
        self.theta
    }

    pub fn delta0(&self) -> Option<f64> {
        self.delta0
    }

    pub fn fp0(&self) -> f64 {
        self.fp0
    }

    pub fn fp1(&self) -> f64 {
        self.fp1
    }

    /// K with `f(u) <= K u` for `u >= 0`.
    pub fn sup_slope(&self) -> f64 {
        self.sup_slope
    }

    /// sup of `f` over `[0, u_cap]`.
    pub fn sup_val(&self) -> f64 {
        self.sup_val
    }

    /// `sqrt(2 * int_0^1 f)`.
    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn u_cap(&self) -> f64 {
        self.u_cap
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    /// The zero of `x -> int_0^x f` in `(theta, 1)`; bistable only.
    pub fn theta_bar(&self) -> Result<f64> {
        self.theta_bar.ok_or_else(|| Error::Kind {
            expected: "bistable",
            got: self.kind.to_string(),
        })
    }

    /// Lower end of the admissible peak range for stationary profiles:
    /// 0, theta_bar or theta.
    pub fn peak_floor(&self) -> f64 {
        match self.kind {
            Kind::Bistable => self.theta_bar.unwrap(),
            Kind::Combustion => self.theta.unwrap(),
            _ => 0.0,
        }
    }

    /// `int_{top-len}^{top} f(s) ds`, integrated in the offset `t = top - s`
    /// so that short intervals keep full relative accuracy.
    pub fn primitive_below(&self, top: f64, len: f64) -> Result<f64> {
        let breaks: Vec<f64> = self.breaks.iter().map(|&b| top - b).collect();
        numerics::simpson_split(&|t| (self.f)(top - t), 0.0, len, &breaks, QUAD_TOL)
    }

    /// `int_a^b f(s) ds` by adaptive Simpson.
    pub fn primitive(&self, a: f64, b: f64) -> Result<f64> {
        numerics::simpson_split(&|u| (self.f)(u), a, b, &self.breaks, QUAD_TOL)
    }

    /// Evaluate every validation predicate on a fresh point set. Used by the
    /// property tests to re-check a built value.
    pub fn revalidate(&self, points: &[f64]) -> Result<()> {
        let mut pts: Vec<f64> = points.iter().copied().filter(|&u| u >= 0.0 && u <= self.u_cap).collect();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        self.check_sign_structure(&pts)?;
        for &u in &pts {
            if u > 0.0 && self.f(u) > self.sup_slope * u * (1.0 + 1e-9) + 1e-12 {
                return Err(fail("f(u) <= K u", u));
            }
        }
        Ok(())
    }

    pub fn require(&self, kinds: &[Kind], expected: &'static str) -> Result<()> {
        if kinds.contains(&self.kind) {
            Ok(())
        } else {
            Err(Error::Kind { expected, got: self.kind.to_string() })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logistic_constants() {
        let nl = Nonlinearity::logistic().unwrap();
        assert_eq!(nl.fp0(), 1.0);
        assert_eq!(nl.fp1(), -1.0);
        assert!((nl.sup_slope() - 1.0).abs() < 1e-12);
        assert!((nl.sup_val() - 0.25).abs() < 1e-12);
        assert!((nl.primitive(0.0, 1.0).unwrap() - 1.0 / 6.0).abs() < 1e-12);
        assert_eq!(nl.primitive(0.3, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn bistable_balance_and_theta_bar() {
        let theta = 0.25;
        let nl = Nonlinearity::cubic_bistable(theta).unwrap();
        // closed form int_0^1 u(u-theta)(1-u) = 1/12 - theta/6
        let exact = 1.0 / 12.0 - theta / 6.0;
        assert!((nl.primitive(0.0, 1.0).unwrap() - exact).abs() < 1e-12);
        assert!((exact - 1.0 / 24.0).abs() < 1e-15);
        // theta_bar solves (1+theta) x/3 - x^2/4 - theta/2 = 0
        let (a, b, c) = (-0.25, (1.0 + theta) / 3.0, -theta / 2.0);
        let root = (-b + (b * b - 4.0 * a * c).sqrt()) / (2.0 * a);
        let tb = nl.theta_bar().unwrap();
        assert!((tb - root).abs() < 1e-10, "{tb} vs {root}");
        assert!((tb - 0.392375).abs() < 1e-6);
        assert!(tb > theta && tb < 1.0);
        assert!((nl.omega0() - (1.0f64 / 12.0).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn unbalanced_bistable_is_rejected() {
        match Nonlinearity::cubic_bistable(0.6) {
            Err(Error::Validation { condition, .. }) => assert!(condition.contains("integral")),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn theta_outside_unit_interval_is_domain_error() {
        assert!(matches!(Nonlinearity::cubic_bistable(1.5), Err(Error::Domain(_))));
        assert!(matches!(Nonlinearity::combustion(0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn combustion_constants() {
        let theta = 0.25;
        let nl = Nonlinearity::combustion(theta).unwrap();
        let exact = (1.0f64 - theta).powi(3) / 6.0;
        assert!((exact - 0.0703125).abs() < 1e-15);
        assert!((nl.primitive(0.0, 1.0).unwrap() - exact).abs() < 1e-10);
        assert!((nl.omega0() - 0.375).abs() < 1e-9);
        assert!(nl.theta_bar().is_err());
        // K = sup (u-theta)(1-u)/u, attained at u = sqrt(theta)
        let k = (1.0 - theta.sqrt()).powi(2);
        assert!((nl.sup_slope() - k).abs() < 1e-10);
    }

    #[test]
    fn theta_bar_decreases_with_theta() {
        let tb: Vec<f64> = [0.1, 0.2, 0.3]
            .iter()
            .map(|&t| Nonlinearity::cubic_bistable(t).unwrap().theta_bar().unwrap())
            .collect();
        assert!(tb[0] < tb[1] && tb[1] < tb[2]);
    }

    #[test]
    fn wrong_sign_structure_names_condition() {
        // u(1-u) declared bistable fails on (0, theta)
        let r = Builder::new(Kind::Bistable, Arc::new(|u| u * (1.0 - u)), Arc::new(|u| 1.0 - 2.0 * u))
            .theta(0.3)
            .build();
        match r {
            Err(Error::Validation { condition, at }) => {
                assert!(condition.contains("f(theta)"), "{condition} at {at}");
            }
            other => panic!("{other:?}"),
        }
        let r = Nonlinearity::polynomial(&[0.1, 1.0], Kind::Custom, None);
        assert!(matches!(r, Err(Error::Validation { .. })));
    }

    #[test]
    fn custom_polynomial_matches_logistic() {
        let nl = Nonlinearity::polynomial(&[0.0, 1.0, -1.0], Kind::Monostable, None).unwrap();
        assert!((nl.sup_slope() - 1.0).abs() < 1e-12);
        assert!((nl.df(0.25) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn spec_parses_from_tagged_json() {
        let s: NonlinearitySpec = serde_json::from_str(r#"{"name":"cubic_bistable","theta":0.25}"#).unwrap();
        assert_eq!(s, NonlinearitySpec::CubicBistable { theta: 0.25 });
        assert!(serde_json::from_str::<NonlinearitySpec>(r#"{"name":"logistic","x":1}"#).is_err());
    }
}
