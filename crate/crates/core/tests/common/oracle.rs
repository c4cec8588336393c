//! Logistic-family oracles for the universal constants, independent of the
//! renormalisation code.

pub const A_INF: f64 = 3.5699456718695445;

// f_a^n(1/2) − 1/2 and its a-derivative.
pub fn return_defect(a: f64, n: usize) -> (f64, f64) {
    let (mut x, mut dx) = (0.5, 0.0);
    for _ in 0..n {
        dx = x * (1.0 - x) + a * (1.0 - 2.0 * x) * dx;
        x = a * x * (1.0 - x);
    }
    (x - 0.5, dx)
}

pub fn orbit_point(a: f64, k: usize) -> f64 {
    (0..k).fold(0.5, |x, _| a * x * (1.0 - x))
}

/// Superstable parameters of the logistic period-doubling cascade, period 2^k.
pub fn doubling_cascade(kmax: usize) -> Vec<f64> {
    let mut a = vec![2.0, 1.0 + 5f64.sqrt()];
    for k in 2..=kmax {
        let n = a.len();
        let ratio = if n > 2 { (a[n - 2] - a[n - 3]) / (a[n - 1] - a[n - 2]) } else { 4.7 };
        let mut x = a[n - 1] + (a[n - 1] - a[n - 2]) / ratio;
        for _ in 0..100 {
            let (g, dg) = return_defect(x, 1 << k);
            let dx = g / dg;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        a.push(x);
    }
    a
}

/// Feigenbaum's δ and σ = 1/α from the cascade.
pub fn feigenbaum_oracle() -> (f64, f64) {
    let a = doubling_cascade(11);
    let n = a.len();
    let delta = (a[n - 2] - a[n - 3]) / (a[n - 1] - a[n - 2]);
    let d = |k: usize| orbit_point(a[k], 1 << (k - 1)) - 0.5;
    let sigma = (d(n - 1) / d(n - 2)).abs();
    (delta, sigma)
}

pub fn bisect_root(lo: f64, hi: f64, n: usize) -> f64 {
    let (mut lo, mut hi) = (lo, hi);
    let glo = return_defect(lo, n).0;
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        if (return_defect(m, n).0 > 0.0) == (glo > 0.0) {
            lo = m;
        } else {
            hi = m;
        }
    }
    0.5 * (lo + hi)
}

// first superstable parameter of period n strictly above `from`
pub fn next_superstable(from: f64, to: f64, n: usize) -> f64 {
    let steps = 400_000;
    let start = from + 1e-11;
    let mut prev = return_defect(start, n).0;
    for k in 1..=steps {
        let a = start + (to - start) * k as f64 / steps as f64;
        let g = return_defect(a, n).0;
        if prev * g < 0.0 {
            return bisect_root(a - (to - start) / steps as f64, a, n);
        }
        prev = g;
    }
    panic!("no root of period {n}");
}

/// Scaling ratio of the tripling cascade inside the period-3 window.
pub fn tripling_sigma() -> f64 {
    let mut b = vec![next_superstable(3.8284, 3.8568, 3)];
    b.push(next_superstable(b[0], 3.8568, 9));
    for k in 3..=4 {
        let n = b.len();
        let span = 3.0 * (b[n - 1] - b[n - 2]) / 55.0;
        b.push(next_superstable(b[n - 1], b[n - 1] + span, 3usize.pow(k)));
    }
    let d = |k: usize| orbit_point(b[k], 3usize.pow(k as u32)) - 0.5;
    (d(3) / d(2)).abs()
}
