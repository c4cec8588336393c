//! Scalar root finding: sign-change scans and safeguarded Newton.

/// Newton step kept inside [a, b], falling back to bisection. `fd` returns
/// (value, derivative). Requires a sign change between a and b.
pub fn bracketed_newton(fd: impl Fn(f64) -> (f64, f64), a: f64, b: f64) -> Option<f64> {
    let (fa, _) = fd(a);
    let (fb, _) = fd(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return None;
    }
    // orient so that g(lo) < 0
    let (mut lo, mut hi) = if fa < 0.0 { (a, b) } else { (b, a) };
    let mut x = 0.5 * (a + b);
    let mut dx_old = (b - a).abs();
    let mut dx = dx_old;
    let (mut g, mut dg) = fd(x);
    for _ in 0..200 {
        if g == 0.0 {
            return Some(x);
        }
        let newton_bad = ((x - hi) * dg - g) * ((x - lo) * dg - g) > 0.0
            || (2.0 * g).abs() > (dx_old * dg).abs();
        dx_old = dx;
        if newton_bad || dg == 0.0 {
            dx = 0.5 * (hi - lo);
            x = lo + dx;
        } else {
            dx = g / dg;
            x -= dx;
        }
        if dx.abs() <= 2e-16 * x.abs().max(1e-300) + 1e-300 {
            return Some(x);
        }
        let r = fd(x);
        g = r.0;
        dg = r.1;
        if g < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if (hi - lo).abs() <= 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
            return Some(x);
        }
    }
    Some(x)
}

/// Bisection on the sign of `g` alone.
pub fn bisect(g: impl Fn(f64) -> f64, a: f64, b: f64) -> Option<f64> {
    let (mut lo, mut hi) = (a, b);
    let mut glo = g(lo);
    let ghi = g(hi);
    if glo == 0.0 {
        return Some(lo);
    }
    if ghi == 0.0 {
        return Some(hi);
    }
    if glo.signum() == ghi.signum() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let gm = g(mid);
        if gm == 0.0 {
            return Some(mid);
        }
        if gm.signum() == glo.signum() {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Plain Newton from `x0`; `None` if the iteration wanders off or stalls.
pub fn newton(fd: impl Fn(f64) -> (f64, f64), x0: f64, tol: f64, max_iter: usize) -> Option<f64> {
    let mut x = x0;
    for _ in 0..max_iter {
        let (g, dg) = fd(x);
        if !g.is_finite() || !dg.is_finite() || dg == 0.0 {
            return None;
        }
        let dx = g / dg;
        x -= dx;
        if dx.abs() <= tol {
            return Some(x);
        }
    }
    None
}

/// Zeros of g on [lo, hi]: simple roots via a sign-change scan at the given
/// resolution, plus tangential roots at scanned extrema where |g| < 1e-12.
pub fn find_roots(fd: impl Fn(f64) -> (f64, f64), lo: f64, hi: f64, resolution: f64) -> Vec<f64> {
    let n = (1.0 / resolution).ceil() as usize;
    let xs: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
    let vals: Vec<(f64, f64)> = xs.iter().map(|&x| fd(x)).collect();
    let mut out = Vec::new();
    for k in 0..=n {
        if vals[k].0 == 0.0 {
            out.push(xs[k]);
        }
    }
    for k in 0..n {
        let (g0, d0) = vals[k];
        let (g1, d1) = vals[k + 1];
        if g0 * g1 < 0.0 {
            if let Some(r) = bracketed_newton(&fd, xs[k], xs[k + 1]) {
                out.push(r);
            }
        } else if g0 * g1 > 0.0 && d0 * d1 < 0.0 {
            if let Some(e) = bisect(|x| fd(x).1, xs[k], xs[k + 1]) {
                if fd(e).0.abs() < 1e-12 {
                    out.push(e);
                }
            }
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-10 * (hi - lo));
    out
}
