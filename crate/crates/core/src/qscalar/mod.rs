//! Exact arithmetic in `Q(s)`, the field of rational functions in `s = q^{1/2}`.
//!
//! A [`QScalar`] is stored as `s^shift * num(s) / den(s)` with `num` and `den`
//! coprime, neither divisible by `s`, and `den` monic. That representation is
//! unique, so structural equality is field equality.

mod poly;

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub(crate) use poly::rational_to_f64;
use poly::Poly;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("pole of order {order} at s = {at}")]
    Pole { at: String, order: u32 },
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QScalar {
    shift: i32,
    num: Poly,
    den: Poly,
}

impl QScalar {
    pub fn zero() -> Self {
        QScalar { shift: 0, num: Poly::zero(), den: Poly::one() }
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_rational(c: BigRational) -> Self {
        QScalar { shift: 0, num: Poly::constant(c), den: Poly::one() }
    }

    /// `n / d` as a constant; panics if `d == 0`.
    pub fn ratio(n: i64, d: i64) -> Self {
        Self::from_rational(BigRational::new(n.into(), d.into()))
    }

    /// `s^k` for any integer `k`.
    pub fn s_pow(k: i32) -> Self {
        QScalar { shift: k, num: Poly::one(), den: Poly::one() }
    }

    /// `q^k = s^{2k}`.
    pub fn q_pow(k: i32) -> Self {
        Self::s_pow(2 * k)
    }

    pub fn q() -> Self {
        Self::q_pow(1)
    }

    pub fn s() -> Self {
        Self::s_pow(1)
    }

    /// Builds `s^shift * num / den` from Laurent-free coefficient lists
    /// (lowest degree first) and canonicalizes.
    pub fn from_parts(shift: i32, num: Vec<BigRational>, den: Vec<BigRational>) -> Result<Self, ScalarError> {
        let den = Poly::from_coeffs(den);
        if den.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(Self::canonical(shift, Poly::from_coeffs(num), den))
    }

    fn canonical(mut shift: i32, num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        let nv = num.s_valuation();
        let dv = den.s_valuation();
        shift += nv as i32 - dv as i32;
        let mut num = num.shift_down(nv);
        let mut den = den.shift_down(dv);
        if den.degree() > 0 && num.degree() > 0 {
            let g = den.gcd(&num);
            if !g.is_one() {
                num = num.exact_div(&g);
                den = den.exact_div(&g);
            }
        }
        let lead = den.lead().expect("nonzero denominator").clone();
        if !lead.is_one() {
            let inv = lead.recip();
            num = num.scale(&inv);
            den = den.scale(&inv);
        }
        QScalar { shift, num, den }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.shift == 0 && self.num.is_one() && self.den.is_one()
    }

    /// The value as a rational constant, if it is one.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.is_zero() {
            return Some(BigRational::zero());
        }
        (self.shift == 0 && self.num.degree() == 0 && self.den.is_one()).then(|| self.num.coeffs()[0].clone())
    }

    pub fn as_integer(&self) -> Option<i64> {
        self.as_rational().filter(|r| r.is_integer()).and_then(|r| r.to_integer().to_i64())
    }

    /// True when the denominator is 1, i.e. the value is a Laurent polynomial.
    pub fn is_laurent(&self) -> bool {
        self.den.is_one()
    }

    /// Laurent numerator terms `(exponent of s, coefficient)` in increasing exponent.
    pub fn numerator_terms(&self) -> Vec<(i32, BigRational)> {
        laurent_terms(self.shift, &self.num)
    }

    /// Denominator terms `(exponent of s, coefficient)`; `[(0, 1)]` for Laurent values.
    pub fn denominator_terms(&self) -> Vec<(i32, BigRational)> {
        laurent_terms(0, &self.den)
    }

    pub fn inv(&self) -> Result<Self, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(Self::canonical(-self.shift, self.den.clone(), self.num.clone()))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, ScalarError> {
        Ok(self * &other.inv()?)
    }

    /// Integer power; negative exponents require a nonzero base.
    pub fn pow(&self, k: i32) -> Result<Self, ScalarError> {
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let mut acc = Self::one();
        for _ in 0..k.unsigned_abs() {
            acc = &acc * &base;
        }
        Ok(acc)
    }

    /// Evaluates at a complex point `s0`.
    pub fn eval(&self, s0: Complex64) -> Result<Complex64, ScalarError> {
        let scale = self.den.coeffs().iter().map(|c| rational_to_f64(c).abs()).fold(0.0, f64::max)
            * (1.0 + s0.norm()).powi(self.den.degree() as i32);
        let d = self.den.eval_complex(s0);
        if d.norm() <= 1e-14 * scale {
            let order = root_multiplicity_complex(&self.den, s0, scale);
            return Err(ScalarError::Pole { at: format!("{s0}"), order });
        }
        if s0.norm() == 0.0 && self.shift < 0 && !self.is_zero() {
            return Err(ScalarError::Pole { at: format!("{s0}"), order: self.shift.unsigned_abs() });
        }
        let n = self.num.eval_complex(s0);
        Ok(s0.powi(self.shift) * n / d)
    }

    pub fn eval_real(&self, s0: f64) -> Result<f64, ScalarError> {
        self.eval(Complex64::new(s0, 0.0)).map(|z| z.re)
    }

    /// Exact value at the classical point `s = 1` (so `q = 1`).
    pub fn classical(&self) -> Result<BigRational, ScalarError> {
        let one = BigRational::one();
        let d = self.den.eval_rational(&one);
        if d.is_zero() {
            let linear = Poly::from_coeffs(vec![-BigRational::one(), BigRational::one()]);
            let mut order = 0;
            let mut rest = self.den.clone();
            loop {
                let (quot, rem) = rest.div_rem(&linear);
                if !rem.is_zero() {
                    break;
                }
                order += 1;
                rest = quot;
            }
            return Err(ScalarError::Pole { at: "1".into(), order });
        }
        Ok(self.num.eval_rational(&one) / d)
    }

    /// Square root inside `Q(s)` when one exists.
    pub fn sqrt_exact(&self) -> Option<Self> {
        if self.is_zero() {
            return Some(Self::zero());
        }
        if self.shift % 2 != 0 {
            return None;
        }
        let n = self.num.sqrt_exact()?;
        let d = self.den.sqrt_exact()?;
        Some(Self::canonical(self.shift / 2, n, d))
    }

    fn add_impl(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let shift = self.shift.min(other.shift);
        let a = self.num.shift_up((self.shift - shift) as usize);
        let b = other.num.shift_up((other.shift - shift) as usize);
        if self.den == other.den {
            let num = a.add(&b);
            if self.den.is_one() {
                if num.is_zero() {
                    return Self::zero();
                }
                let v = num.s_valuation();
                return QScalar { shift: shift + v as i32, num: num.shift_down(v), den: Poly::one() };
            }
            return Self::canonical(shift, num, self.den.clone());
        }
        let num = a.mul(&other.den).add(&b.mul(&self.den));
        Self::canonical(shift, num, self.den.mul(&other.den))
    }

    fn mul_impl(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let shift = self.shift + other.shift;
        if self.den.is_one() && other.den.is_one() {
            return QScalar { shift, num: self.num.mul(&other.num), den: Poly::one() };
        }
        // cross-cancel before multiplying
        let g1 = self.num.gcd(&other.den);
        let g2 = other.num.gcd(&self.den);
        let (n1, d2) = (self.num.exact_div(&g1), other.den.exact_div(&g1));
        let (n2, d1) = (other.num.exact_div(&g2), self.den.exact_div(&g2));
        let num = n1.mul(&n2);
        let den = d1.mul(&d2);
        let lead = den.lead().expect("nonzero denominator").clone();
        if lead.is_one() {
            QScalar { shift, num, den }
        } else {
            let inv = lead.recip();
            QScalar { shift, num: num.scale(&inv), den: den.scale(&inv) }
        }
    }
}

fn laurent_terms(shift: i32, p: &Poly) -> Vec<(i32, BigRational)> {
    p.coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| (shift + i as i32, c.clone()))
        .collect()
}

fn root_multiplicity_complex(p: &Poly, x: Complex64, scale: f64) -> u32 {
    let mut order = 0;
    let mut d = p.clone();
    while !d.is_zero() && d.eval_complex(x).norm() <= 1e-14 * scale.max(1.0) {
        order += 1;
        d = d.derivative();
    }
    order
}

impl Default for QScalar {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<i64> for QScalar {
    fn from(n: i64) -> Self {
        Self::from_int(n)
    }
}

impl From<BigRational> for QScalar {
    fn from(c: BigRational) -> Self {
        Self::from_rational(c)
    }
}

impl Add<&QScalar> for &QScalar {
    type Output = QScalar;
    fn add(self, rhs: &QScalar) -> QScalar {
        self.add_impl(rhs)
    }
}

impl Add for QScalar {
    type Output = QScalar;
    fn add(self, rhs: QScalar) -> QScalar {
        self.add_impl(&rhs)
    }
}

impl AddAssign<&QScalar> for QScalar {
    fn add_assign(&mut self, rhs: &QScalar) {
        *self = self.add_impl(rhs);
    }
}

impl Neg for &QScalar {
    type Output = QScalar;
    fn neg(self) -> QScalar {
        QScalar { shift: self.shift, num: self.num.neg(), den: self.den.clone() }
    }
}

impl Neg for QScalar {
    type Output = QScalar;
    fn neg(self) -> QScalar {
        -&self
    }
}

impl Sub<&QScalar> for &QScalar {
    type Output = QScalar;
    fn sub(self, rhs: &QScalar) -> QScalar {
        self.add_impl(&-rhs)
    }
}

impl Sub for QScalar {
    type Output = QScalar;
    fn sub(self, rhs: QScalar) -> QScalar {
        &self - &rhs
    }
}

impl SubAssign<&QScalar> for QScalar {
    fn sub_assign(&mut self, rhs: &QScalar) {
        *self = &*self - rhs;
    }
}

impl Mul<&QScalar> for &QScalar {
    type Output = QScalar;
    fn mul(self, rhs: &QScalar) -> QScalar {
        self.mul_impl(rhs)
    }
}

impl Mul for QScalar {
    type Output = QScalar;
    fn mul(self, rhs: QScalar) -> QScalar {
        self.mul_impl(&rhs)
    }
}

impl MulAssign<&QScalar> for QScalar {
    fn mul_assign(&mut self, rhs: &QScalar) {
        *self = self.mul_impl(rhs);
    }
}

impl PartialOrd for QScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// An arbitrary but fixed total order, used only for deterministic sorting.
impl Ord for QScalar {
    fn cmp(&self, other: &Self) -> Ordering {
        self.to_string().cmp(&other.to_string())
    }
}

fn fmt_rational(c: &BigRational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

/// Writes a Laurent polynomial given as `(exponent of s, coefficient)` pairs.
fn fmt_laurent(terms: &[(i32, BigRational)], in_q: bool) -> String {
    if terms.is_empty() {
        return "0".into();
    }
    let (var, step) = if in_q { ("q", 2) } else { ("s", 1) };
    let mut out = String::new();
    for (i, (e, c)) in terms.iter().enumerate() {
        let e = e / step;
        let negative = c.is_negative();
        let mag = c.abs();
        if i == 0 {
            if negative {
                out.push('-');
            }
        } else {
            out.push_str(if negative { "-" } else { "+" });
        }
        let power = match e {
            0 => String::new(),
            1 => var.to_string(),
            _ => format!("{var}^{e}"),
        };
        match (mag.is_one(), power.is_empty()) {
            (true, true) => out.push('1'),
            (true, false) => out.push_str(&power),
            (false, true) => out.push_str(&fmt_rational(&mag)),
            (false, false) => {
                out.push_str(&fmt_rational(&mag));
                out.push('*');
                out.push_str(&power);
            }
        }
    }
    out
}

impl fmt::Display for QScalar {
    /// Text form re-readable by the expression parser: powers of `q` when every
    /// exponent of `s` is even, otherwise powers of `s`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let num = self.numerator_terms();
        let den = self.denominator_terms();
        let in_q = num.iter().chain(den.iter()).all(|(e, _)| e % 2 == 0);
        let n = fmt_laurent(&num, in_q);
        if self.den.is_one() {
            if num.len() > 1 {
                write!(f, "({n})")
            } else {
                write!(f, "{n}")
            }
        } else {
            write!(f, "({n})/({})", fmt_laurent(&den, in_q))
        }
    }
}

impl fmt::Debug for QScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QScalar({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> QScalar {
        QScalar::q()
    }
    fn one() -> QScalar {
        QScalar::one()
    }

    #[test]
    fn additive_inverse() {
        let a = &(&one() + &q()) * &QScalar::ratio(3, 7);
        assert!((&a + &-&a).is_zero());
    }

    #[test]
    fn product_of_one_plus_q_and_one_plus_inverse() {
        let a = &one() + &q();
        let b = &one() + &QScalar::q_pow(-1);
        let prod = &a * &b;
        // (s^2 + 1)^2 / s^2
        let expected = &(&a * &a) * &QScalar::q_pow(-1);
        assert_eq!(prod, expected);
        assert_eq!(prod.to_string(), "(q^-1+2+q)");
    }

    #[test]
    fn cancellation_to_one() {
        let a = &one() - &QScalar::q_pow(-1);
        let b = q().checked_div(&(&q() - &one())).unwrap();
        assert!((&a * &b).is_one());
    }

    #[test]
    fn inverse_of_zero_errors() {
        assert_eq!(QScalar::zero().inv(), Err(ScalarError::DivisionByZero));
    }

    #[test]
    fn eval_q_at_sqrt_half() {
        let v = q().eval_real(0.5f64.sqrt()).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn eval_after_cancellation() {
        let a = (&one() - &QScalar::q_pow(2)).checked_div(&(&one() - &q())).unwrap();
        assert!((a.eval_real(1.0).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn eval_at_pole_errors() {
        let a = one().checked_div(&(&one() - &q())).unwrap();
        match a.eval_real(1.0) {
            Err(ScalarError::Pole { order, .. }) => assert_eq!(order, 1),
            other => panic!("expected pole, got {other:?}"),
        }
    }

    #[test]
    fn classical_values() {
        assert!((&one() - &QScalar::q_pow(-1)).classical().unwrap().is_zero());
        let tau = QScalar::s().checked_div(&(&one() - &q())).unwrap();
        assert_eq!(tau.classical(), Err(ScalarError::Pole { at: "1".into(), order: 1 }));
        let r2 = (&one() + &QScalar::q_pow(3)).checked_div(&(&one() + &q())).unwrap();
        assert!(r2.classical().unwrap().is_one());
    }

    #[test]
    fn double_pole_order() {
        let d = &(&one() - &q()) * &(&one() - &q());
        let a = one().checked_div(&d).unwrap();
        assert_eq!(a.classical(), Err(ScalarError::Pole { at: "1".into(), order: 2 }));
    }

    #[test]
    fn canonical_form_is_unique() {
        let a = (&q() - &one()).checked_div(&(&QScalar::q_pow(2) - &one())).unwrap();
        let b = one().checked_div(&(&q() + &one())).unwrap();
        assert_eq!(a, b);
        let c = QScalar::s_pow(3).checked_div(&QScalar::s_pow(5)).unwrap();
        assert_eq!(c, QScalar::q_pow(-1));
    }

    #[test]
    fn exact_square_roots() {
        let a = &(&one() + &q()) * &(&one() + &q());
        assert_eq!(a.sqrt_exact(), Some(&one() + &q()));
        assert_eq!(QScalar::q_pow(3).sqrt_exact(), Some(QScalar::s_pow(3)));
        assert_eq!((&one() + &q()).sqrt_exact(), None);
        assert_eq!(QScalar::ratio(9, 4).sqrt_exact(), Some(QScalar::ratio(3, 2)));
    }

    #[test]
    fn display_forms() {
        assert_eq!(QScalar::s_pow(-3).to_string(), "s^-3");
        assert_eq!((&one() - &q()).to_string(), "(1-q)");
        assert_eq!(QScalar::ratio(-1, 2).to_string(), "-1/2");
        let x = (&one() + &q()).checked_div(&(&one() - &QScalar::q_pow(-1))).unwrap();
        assert_eq!(x.to_string(), "(q+q^2)/(-1+q)");
    }
}
