//! Small quadrature helpers: adaptive Simpson integration and a running
//! trapezoid accumulator.

/// Adaptive Simpson quadrature of `f` over `[a, b]` with relative tolerance
/// `rel_tol` (floored at an absolute scale once the integral is near zero).
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }

    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }

    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(fa, fm, fb, b - a);
    let tol = rel_tol * whole.abs().max(1e-12);
    recurse(&f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Running trapezoid accumulator for integrals sampled at successive times.
#[derive(Debug, Clone, Copy, Default)]
pub struct Trapezoid {
    total: f64,
    last: Option<(f64, f64)>,
}

impl Trapezoid {
    pub fn new() -> Self {
        Self::default()
    }

    /// Feed the next `(t, f(t))` sample; `t` must be nondecreasing.
    pub fn push(&mut self, t: f64, value: f64) {
        if let Some((t0, v0)) = self.last {
            self.total += 0.5 * (t - t0) * (v0 + value);
        }
        self.last = Some((t, value));
    }

    pub fn total(&self) -> f64 {
        self.total
    }
}
