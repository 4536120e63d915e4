//! Scalar numerical kernels shared by the phase-plane and solver modules:
//! adaptive Simpson quadrature, bracketing bisection, golden-section search,
//! least squares lines and the Thomas tridiagonal solve.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 50;

/// Adaptive Simpson quadrature of `f` over `[a, b]` with absolute tolerance `tol`.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // Require a few levels of refinement so that a lucky coarse estimate on
    // a kinked integrand is not accepted.
    if depth + 4 <= MAX_DEPTH && delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if (b - a) <= 1e-13 * (a.abs() + b.abs()) && delta.is_finite() {
        // Interval at the resolution limit; refinement only sees rounding noise.
        return Ok(left + right);
    }
    if depth == 0 || !delta.is_finite() {
        return Err(Error::Quad { a, b });
    }
    let l = simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let r = simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    Ok(l + r)
}

/// Adaptive Simpson over `[a, b]`, split at every breakpoint strictly inside.
pub fn simpson_split<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: f64,
) -> Result<f64> {
    let (lo, hi, sign) = if a <= b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut edges = vec![lo];
    edges.extend(breaks.iter().copied().filter(|&x| x > lo && x < hi));
    edges.push(hi);
    let pieces = (edges.len() - 1) as f64;
    let mut total = 0.0;
    for w in edges.windows(2) {
        total += simpson(f, w[0], w[1], tol / pieces)?;
    }
    Ok(sign * total)
}

/// Bisection for a sign change of `f` on `[lo, hi]`. `f(lo)` and `f(hi)`
/// must have opposite signs (zero counts as either).
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoSolution(format!(
            "no sign change on [{lo}, {hi}]: {flo}, {fhi}"
        )));
    }
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Bisection on a boolean predicate that is true at `lo` and false at `hi`.
/// Returns the final bracket.
pub fn bisect_predicate<P: FnMut(f64) -> bool>(
    mut pred: P,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> (f64, f64) {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section minimisation of a unimodal `f` on `[a, b]`; returns `(x, f(x))`.
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Maximum of `f` on `[a, b]`: uniform scan of `n` points followed by a
/// golden-section refinement around the best one.
pub fn scan_max<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize) -> (f64, f64) {
    let n = n.max(3);
    let h = (b - a) / (n - 1) as f64;
    let (mut best_i, mut best) = (0, f64::NEG_INFINITY);
    for i in 0..n {
        let v = f(a + i as f64 * h);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let lo = a + best_i.saturating_sub(1) as f64 * h;
    let hi = (a + (best_i + 1) as f64 * h).min(b);
    let (x, neg) = golden_min(|x| -f(x), lo, hi, 1e-12 * (1.0 + b.abs()));
    if -neg > best {
        (x, -neg)
    } else {
        (a + best_i as f64 * h, best)
    }
}

/// Least-squares line through `(x, y)`; returns `(slope, intercept, rms residual)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let icpt = my - slope * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(&a, &b)| (b - slope * a - icpt).powi(2))
        .sum();
    (slope, icpt, (rss / n).sqrt())
}

/// Thomas algorithm for a tridiagonal system. `lower[0]` and `upper[n-1]`
/// are ignored. Overwrites `rhs` with the solution.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64], scratch: &mut Vec<f64>) {
    let n = diag.len();
    scratch.clear();
    scratch.resize(n, 0.0);
    let mut beta = diag[0];
    rhs[0] /= beta;
    for i in 1..n {
        scratch[i] = upper[i - 1] / beta;
        beta = diag[i] - lower[i] * scratch[i];
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i + 1] * rhs[i + 1];
    }
}

/// Solve `(1 + 2r) x_i - r (x_{i-1} + x_{i+1}) = rhs_i` with `x_{-1} = x_n = 0`,
/// overwriting `rhs`. The elimination coefficients reach a fixed point after
/// a few dozen rows; from then on they are reused instead of recomputed.
pub fn solve_toeplitz_tridiagonal(r: f64, rhs: &mut [f64], scratch: &mut Vec<f64>) {
    let n = rhs.len();
    if scratch.len() < n {
        scratch.resize(n, 0.0);
    }
    let b = 1.0 + 2.0 * r;
    let mut m = 1.0 / b;
    let mut cp = -r * m;
    scratch[0] = cp;
    rhs[0] *= m;
    // -cp = r m, so each row is (rhs_i + r x_{i-1}) m.
    let mut k = 1;
    while k < n {
        let m_new = 1.0 / (b + r * cp);
        let cp_new = -r * m_new;
        let frozen = cp_new == cp;
        m = m_new;
        cp = cp_new;
        scratch[k] = cp;
        rhs[k] = rhs[k] * m - cp * rhs[k - 1];
        k += 1;
        if frozen {
            break;
        }
    }
    // rows k - 1.. share the coefficients (cp, m)
    let mut prev = rhs[k - 1];
    for v in &mut rhs[k..] {
        prev = *v * m - cp * prev;
        *v = prev;
    }
    let mut next = rhs[n - 1];
    for v in rhs[k - 1..n - 1].iter_mut().rev() {
        next = *v - cp * next;
        *v = next;
    }
    for (v, &c) in rhs[..k - 1].iter_mut().zip(&scratch[..k - 1]).rev() {
        next = *v - c * next;
        *v = next;
    }
}

/// Linear interpolation on a strictly increasing abscissa; clamps outside.
pub fn interp_linear(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let i = xs.partition_point(|&v| v <= x) - 1;
    let w = (x - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] + w * (ys[i + 1] - ys[i])
}

/// Trapezoid rule on sampled data.
pub fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_polynomial_is_exact() {
        let v = simpson(&|x: f64| x * (1.0 - x), 0.0, 1.0, 1e-12).unwrap();
        assert!((v - 1.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn simpson_split_handles_kink() {
        let f = |x: f64| if x < 0.3 { 0.0 } else { x - 0.3 };
        let v = simpson_split(&f, 0.0, 1.0, &[0.3], 1e-12).unwrap();
        assert!((v - 0.245).abs() < 1e-12);
        let w = simpson_split(&f, 1.0, 0.0, &[0.3], 1e-12).unwrap();
        assert!((w + 0.245).abs() < 1e-12);
    }

    #[test]
    fn golden_finds_parabola_vertex() {
        let (x, v) = golden_min(|x| (x - 0.3).powi(2) + 1.0, 0.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn thomas_matches_dense_solution() {
        // [2 -1 0; -1 2 -1; 0 -1 2] x = [1 0 1] -> x = [1 1 1]
        let mut rhs = vec![1.0, 0.0, 1.0];
        let mut scratch = Vec::new();
        solve_tridiagonal(&[0.0, -1.0, -1.0], &[2.0, 2.0, 2.0], &[-1.0, -1.0, 0.0], &mut rhs, &mut scratch);
        for v in rhs {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn toeplitz_solve_agrees_with_thomas() {
        for &(r, n) in &[(0.4, 399), (25.0, 50), (1e-3, 7)] {
            let b: Vec<f64> = (0..n).map(|i| ((i * 7) % 11) as f64 - 5.0).collect();
            let (lo, up) = (vec![-r; n], vec![-r; n]);
            let d = vec![1.0 + 2.0 * r; n];
            let mut x1 = b.clone();
            let mut x2 = b.clone();
            let mut s = Vec::new();
            solve_tridiagonal(&lo, &d, &up, &mut x1, &mut s);
            solve_toeplitz_tridiagonal(r, &mut x2, &mut s);
            for (a, c) in x1.iter().zip(&x2) {
                assert!((a - c).abs() < 1e-12 * (1.0 + a.abs()), "{r} {a} {c}");
            }
        }
    }

    #[test]
    fn bisect_rejects_missing_bracket() {
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-10).is_err());
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-12).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-11);
    }
}
