//! Globally adaptive Gauss–Kronrod (7/15) quadrature.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-12, rel_tol: 1e-10, max_intervals: 4000 }
    }
}

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// `∫_a^b f` with global bisection of the interval of largest error.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult { value: 0.0, error: 0.0, intervals: 0 });
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Quadrature("infinite limits".into()));
    }
    let (v, e) = gk15(&f, a, b);
    let mut panels = vec![(a, b, v, e)];
    let mut total = v;
    let mut err = e;
    while err > opts.abs_tol.max(opts.rel_tol * total.abs()) {
        if !total.is_finite() {
            return Err(Error::Quadrature("non-finite integrand".into()));
        }
        if panels.len() >= opts.max_intervals {
            return Err(Error::Quadrature(format!("{} intervals, error {err:e}", panels.len())));
        }
        let (i, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (pa, pb, pv, pe) = panels.swap_remove(i);
        let m = 0.5 * (pa + pb);
        let (v1, e1) = gk15(&f, pa, m);
        let (v2, e2) = gk15(&f, m, pb);
        total += v1 + v2 - pv;
        err += e1 + e2 - pe;
        panels.push((pa, m, v1, e1));
        panels.push((m, pb, v2, e2));
        if m <= pa || m >= pb {
            return Err(Error::Quadrature("interval underflow".into()));
        }
    }
    // Re-sum to shed the drift of incremental updates.
    let value = panels.iter().map(|p| p.2).sum();
    let error = panels.iter().map(|p| p.3).sum();
    Ok(QuadResult { value, error, intervals: panels.len() })
}

/// `∫_a^∞ f` for a decaying integrand: doubles the upper cut until the
/// last added slab contributes below `tail_tol`, then integrates
/// `[a, cut]` in one adaptive pass.
pub fn integrate_to_infinity(f: impl Fn(f64) -> f64, a: f64, initial_width: f64, tail_tol: f64, opts: QuadOptions) -> Result<QuadResult> {
    let mut cut = a + initial_width;
    for _ in 0..60 {
        let slab = integrate(&f, cut, 2.0 * cut - a, opts)?;
        if slab.value.abs() < tail_tol {
            return integrate(&f, a, cut, opts);
        }
        cut = 2.0 * cut - a;
    }
    Err(Error::Quadrature("tail does not decay".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_exact() {
        let r = integrate(|x: f64| x.powi(5) - 3.0 * x * x, -1.0, 2.0, QuadOptions::default()).unwrap();
        assert!((r.value - (64.0 / 6.0 - 1.0 / 6.0 - 9.0)).abs() < 1e-13);
    }

    #[test]
    fn smooth_and_endpoint_singular() {
        let r = integrate(|x: f64| x.sin(), 0.0, std::f64::consts::PI, QuadOptions::default()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
        let r = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, QuadOptions::default()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn semi_infinite() {
        let r = integrate_to_infinity(|x: f64| (-x).exp() * x * x, 0.0, 4.0, 1e-14, QuadOptions::default()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-10);
    }
}
