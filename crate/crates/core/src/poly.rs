//! Sparse real polynomials in the Bloch coordinates `(x, y, z)` and
//! polynomial vector fields built from them.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the total degree of a vector field.
pub const DEFAULT_DEGREE_CAP: usize = 8;

/// Exponents of `x`, `y`, `z`.
pub type Exponent = [u8; 3];

/// Real polynomial in `(x, y, z)`, stored as exponent → coefficient in
/// lexicographic exponent order. Zero coefficients are never stored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<(Exponent, f64)>", into = "Vec<(Exponent, f64)>")]
pub struct Polynomial {
    terms: BTreeMap<Exponent, f64>,
}

impl From<Vec<(Exponent, f64)>> for Polynomial {
    fn from(v: Vec<(Exponent, f64)>) -> Self {
        let mut p = Polynomial::zero();
        for (e, c) in v {
            p.add_term(e, c);
        }
        p
    }
}

impl From<Polynomial> for Vec<(Exponent, f64)> {
    fn from(p: Polynomial) -> Self {
        p.terms.into_iter().collect()
    }
}

impl Polynomial {
    pub fn zero() -> Self {
        Self { terms: BTreeMap::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::monomial([0, 0, 0], c)
    }

    /// The coordinate `x` (0), `y` (1) or `z` (2).
    pub fn var(i: usize) -> Self {
        let mut e = [0u8; 3];
        e[i] = 1;
        Self::monomial(e, 1.0)
    }

    pub fn monomial(e: Exponent, c: f64) -> Self {
        let mut p = Self::zero();
        p.add_term(e, c);
        p
    }

    /// Affine polynomial `c0 + a·(x, y, z)`.
    pub fn affine(c0: f64, a: [f64; 3]) -> Self {
        let mut p = Self::constant(c0);
        for (i, &ai) in a.iter().enumerate() {
            p += &(&Self::var(i) * ai);
        }
        p
    }

    pub fn add_term(&mut self, e: Exponent, c: f64) {
        if c == 0.0 {
            return;
        }
        let slot = self.terms.entry(e).or_insert(0.0);
        *slot += c;
        if *slot == 0.0 {
            self.terms.remove(&e);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &f64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, e: Exponent) -> f64 {
        self.terms.get(&e).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; 0 for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(|e| e.iter().map(|&k| k as usize).sum()).max().unwrap_or(0)
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.terms.values().all(|c| c.is_finite())
    }

    /// Drops coefficients with `|c| < tol`.
    pub fn cleanup(&mut self, tol: f64) {
        self.terms.retain(|_, c| c.abs() >= tol);
    }

    pub fn cleaned(mut self, tol: f64) -> Self {
        self.cleanup(tol);
        self
    }

    pub fn scale(&self, s: f64) -> Self {
        if s == 0.0 {
            return Self::zero();
        }
        Self { terms: self.terms.iter().map(|(e, c)| (*e, c * s)).collect() }
    }

    /// Partial derivative along coordinate `i`.
    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut d = *e;
                d[i] -= 1;
                out.add_term(d, c * e[i] as f64);
            }
        }
        out
    }

    pub fn gradient(&self) -> [Polynomial; 3] {
        [self.derivative(0), self.derivative(1), self.derivative(2)]
    }

    pub fn eval(&self, v: [f64; 3]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * v[0].powi(e[0] as i32) * v[1].powi(e[1] as i32) * v[2].powi(e[2] as i32))
            .sum()
    }

    /// Largest coefficient difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self - other).max_abs_coefficient()
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " {} ", if *c < 0.0 { '-' } else { '+' })?;
                write!(f, "{}", c.abs())?;
            } else {
                write!(f, "{c}")?;
            }
            for (name, &p) in ["x", "y", "z"].iter().zip(e.iter()) {
                match p {
                    0 => {}
                    1 => write!(f, "·{name}")?,
                    _ => write!(f, "·{name}^{p}")?,
                }
            }
        }
        Ok(())
    }
}

impl Add<&Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for Polynomial {
    type Output = Polynomial;
    fn add(mut self, rhs: Polynomial) -> Polynomial {
        self += &rhs;
        self
    }
}

impl AddAssign<&Polynomial> for Polynomial {
    fn add_assign(&mut self, rhs: &Polynomial) {
        for (e, c) in &rhs.terms {
            self.add_term(*e, *c);
        }
    }
}

impl Sub<&Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, -c);
        }
        out
    }
}

impl Sub for Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: Polynomial) -> Polynomial {
        &self - &rhs
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

impl Mul<&Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                out.add_term([ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]], ca * cb);
            }
        }
        out
    }
}

impl Mul for Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: Polynomial) -> Polynomial {
        &self * &rhs
    }
}

impl Mul<f64> for &Polynomial {
    type Output = Polynomial;
    fn mul(self, s: f64) -> Polynomial {
        self.scale(s)
    }
}

/// Vector field on ℝ³ with polynomial components.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PolyVectorField {
    pub components: [Polynomial; 3],
}

impl PolyVectorField {
    pub fn new(components: [Polynomial; 3]) -> Self {
        Self { components }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// Constant field.
    pub fn constant(c: [f64; 3]) -> Self {
        Self::new(c.map(Polynomial::constant))
    }

    pub fn degree(&self) -> usize {
        self.components.iter().map(Polynomial::degree).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Polynomial::is_zero)
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(Polynomial::is_finite)
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.components.iter().map(Polynomial::max_abs_coefficient).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (0..3).map(|i| self.components[i].max_abs_diff(&other.components[i])).fold(0.0, f64::max)
    }

    pub fn eval(&self, v: [f64; 3]) -> [f64; 3] {
        [self.components[0].eval(v), self.components[1].eval(v), self.components[2].eval(v)]
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new([self.components[0].scale(s), self.components[1].scale(s), self.components[2].scale(s)])
    }

    /// Multiplies every component by the scalar polynomial `p`.
    pub fn scale_by(&self, p: &Polynomial) -> Self {
        Self::new([&self.components[0] * p, &self.components[1] * p, &self.components[2] * p])
    }

    pub fn cleanup(&mut self, tol: f64) {
        for c in &mut self.components {
            c.cleanup(tol);
        }
    }

    pub fn cleaned(mut self, tol: f64) -> Self {
        self.cleanup(tol);
        self
    }

    /// `(DW)·V`: derivative of `self` along `v`.
    pub fn derivative_along(&self, v: &PolyVectorField) -> PolyVectorField {
        let comp = |w: &Polynomial| {
            let mut acc = Polynomial::zero();
            for (i, vi) in v.components.iter().enumerate() {
                if !vi.is_zero() {
                    acc += &(&w.derivative(i) * vi);
                }
            }
            acc
        };
        Self::new([comp(&self.components[0]), comp(&self.components[1]), comp(&self.components[2])])
    }

    /// Directional derivative `V·∇p` of a scalar polynomial.
    pub fn apply(&self, p: &Polynomial) -> Polynomial {
        let mut acc = Polynomial::zero();
        for (i, vi) in self.components.iter().enumerate() {
            acc += &(&p.derivative(i) * vi);
        }
        acc
    }

    /// Jacobian at a point; row `r` holds the gradient of component `r`.
    pub fn jacobian_at(&self, v: [f64; 3]) -> [[f64; 3]; 3] {
        let mut j = [[0.0; 3]; 3];
        for (r, c) in self.components.iter().enumerate() {
            for (k, slot) in j[r].iter_mut().enumerate() {
                *slot = c.derivative(k).eval(v);
            }
        }
        j
    }
}

impl Add<&PolyVectorField> for &PolyVectorField {
    type Output = PolyVectorField;
    fn add(self, rhs: &PolyVectorField) -> PolyVectorField {
        PolyVectorField::new([
            &self.components[0] + &rhs.components[0],
            &self.components[1] + &rhs.components[1],
            &self.components[2] + &rhs.components[2],
        ])
    }
}

impl Add for PolyVectorField {
    type Output = PolyVectorField;
    fn add(self, rhs: PolyVectorField) -> PolyVectorField {
        &self + &rhs
    }
}

impl AddAssign<&PolyVectorField> for PolyVectorField {
    fn add_assign(&mut self, rhs: &PolyVectorField) {
        for (a, b) in self.components.iter_mut().zip(rhs.components.iter()) {
            *a += b;
        }
    }
}

impl Sub<&PolyVectorField> for &PolyVectorField {
    type Output = PolyVectorField;
    fn sub(self, rhs: &PolyVectorField) -> PolyVectorField {
        PolyVectorField::new([
            &self.components[0] - &rhs.components[0],
            &self.components[1] - &rhs.components[1],
            &self.components[2] - &rhs.components[2],
        ])
    }
}

impl Sub for PolyVectorField {
    type Output = PolyVectorField;
    fn sub(self, rhs: PolyVectorField) -> PolyVectorField {
        &self - &rhs
    }
}

impl Neg for &PolyVectorField {
    type Output = PolyVectorField;
    fn neg(self) -> PolyVectorField {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &PolyVectorField {
    type Output = PolyVectorField;
    fn mul(self, s: f64) -> PolyVectorField {
        self.scale(s)
    }
}

impl fmt::Display for PolyVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.components[0], self.components[1], self.components[2])
    }
}

/// `[V, W] = (DW)·V − (DV)·W`, with coefficients below `tol` dropped.
///
/// Fails when the result would exceed `degree_cap`; `what` names the
/// bracket in the error.
pub fn lie_bracket_capped(
    v: &PolyVectorField,
    w: &PolyVectorField,
    degree_cap: usize,
    tol: f64,
    what: &str,
) -> Result<PolyVectorField> {
    let out = (&w.derivative_along(v) - &v.derivative_along(w)).cleaned(tol);
    if out.degree() > degree_cap {
        return Err(Error::DegreeCap { cap: degree_cap, what: what.to_string() });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn x() -> Polynomial {
        Polynomial::var(0)
    }
    fn y() -> Polynomial {
        Polynomial::var(1)
    }
    fn z() -> Polynomial {
        Polynomial::var(2)
    }

    fn bracket(v: &PolyVectorField, w: &PolyVectorField) -> PolyVectorField {
        lie_bracket_capped(v, w, 32, 0.0, "test").unwrap()
    }

    #[test]
    fn arithmetic_and_evaluation() {
        let p = &(&x() * &y()) + &Polynomial::constant(2.0);
        let q = &z() - &x();
        let pq = &p * &q;
        let v = [0.3, -0.7, 1.1];
        assert!((pq.eval(v) - p.eval(v) * q.eval(v)).abs() < 1e-15);
        assert_eq!(pq.degree(), 3);
        assert!((&p - &p).is_zero());
    }

    #[test]
    fn derivative_of_monomial() {
        let p = Polynomial::monomial([2, 1, 3], 5.0);
        assert_eq!(p.derivative(0), Polynomial::monomial([1, 1, 3], 10.0));
        assert_eq!(p.derivative(2), Polynomial::monomial([2, 1, 2], 15.0));
        assert!(Polynomial::constant(4.0).derivative(1).is_zero());
    }

    #[test]
    fn rotation_generators_close() {
        // Rotations about x and y bracket to a rotation about z.
        let rx = PolyVectorField::new([Polynomial::zero(), -&z(), y()]);
        let ry = PolyVectorField::new([z(), Polynomial::zero(), -&x()]);
        let rz = PolyVectorField::new([-&y(), x(), Polynomial::zero()]);
        let b = bracket(&rx, &ry);
        assert_eq!(b, rz.scale(-1.0));
        assert_eq!(bracket(&rx, &rx), PolyVectorField::zero());
    }

    #[test]
    fn degree_cap_is_enforced() {
        let v = PolyVectorField::new([Polynomial::monomial([5, 0, 0], 1.0), Polynomial::zero(), Polynomial::zero()]);
        let w = PolyVectorField::new([Polynomial::zero(), Polynomial::monomial([4, 0, 0], 1.0), Polynomial::zero()]);
        let err = lie_bracket_capped(&v, &w, 6, 0.0, "[V,W]").unwrap_err();
        assert!(matches!(err, Error::DegreeCap { cap: 6, .. }));
    }

    #[test]
    fn serde_round_trip() {
        let f = PolyVectorField::new([&x() * &y(), Polynomial::constant(1.5), z()]);
        let s = serde_json::to_string(&f).unwrap();
        let back: PolyVectorField = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
    }

    fn arb_poly() -> impl Strategy<Value = Polynomial> {
        prop::collection::vec(((0u8..3, 0u8..3, 0u8..3), -2.0f64..2.0), 0..6)
            .prop_map(|ts| Polynomial::from(ts.into_iter().map(|((a, b, c), k)| ([a, b, c], k)).collect::<Vec<_>>()))
    }

    fn arb_field() -> impl Strategy<Value = PolyVectorField> {
        (arb_poly(), arb_poly(), arb_poly()).prop_map(|(a, b, c)| PolyVectorField::new([a, b, c]))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn bracket_is_antisymmetric(v in arb_field(), w in arb_field()) {
            let s = &bracket(&v, &w) + &bracket(&w, &v);
            prop_assert!(s.max_abs_coefficient() < 1e-10);
        }

        #[test]
        fn jacobi_identity(u in arb_field(), v in arb_field(), w in arb_field()) {
            let a = bracket(&u, &bracket(&v, &w));
            let b = bracket(&v, &bracket(&w, &u));
            let c = bracket(&w, &bracket(&u, &v));
            let scale = 1.0 + a.max_abs_coefficient() + b.max_abs_coefficient() + c.max_abs_coefficient();
            prop_assert!((&(&a + &b) + &c).max_abs_coefficient() < 1e-10 * scale);
        }

        #[test]
        fn bracket_matches_pointwise_jacobians(v in arb_field(), w in arb_field(), p in prop::array::uniform3(-1.0f64..1.0)) {
            let b = bracket(&v, &w).eval(p);
            let (jv, jw) = (v.jacobian_at(p), w.jacobian_at(p));
            let (vp, wp) = (v.eval(p), w.eval(p));
            for i in 0..3 {
                let expect: f64 = (0..3).map(|k| jw[i][k] * vp[k] - jv[i][k] * wp[k]).sum();
                prop_assert!((b[i] - expect).abs() < 1e-10 * (1.0 + expect.abs()));
            }
        }
    }
}
