use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::field::{rational_to_f64, NumberField};
use super::poly::RatPoly;
use super::ExactError;

/// Exact real number: a rational, or an element of a [`NumberField`] written as
/// a polynomial in θ reduced modulo the defining polynomial.
///
/// Field elements whose reduced representation is constant are stored as
/// plain rationals, so rational values never carry a field reference.
#[derive(Clone, Debug)]
pub struct Scalar(Repr);

#[derive(Clone, Debug)]
enum Repr {
    Rat(BigRational),
    Alg {
        field: Arc<NumberField>,
        // degree >= 1 after reduction, below the field degree
        coeffs: Vec<BigRational>,
    },
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar(Repr::Rat(BigRational::zero()))
    }

    pub fn one() -> Self {
        Scalar(Repr::Rat(BigRational::one()))
    }

    pub fn from_int(n: i64) -> Self {
        Scalar(Repr::Rat(BigRational::from_integer(n.into())))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Scalar(Repr::Rat(BigRational::from_integer(n)))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Scalar(Repr::Rat(BigRational::new(n.into(), d.into())))
    }

    pub fn rational(r: BigRational) -> Self {
        Scalar(Repr::Rat(r))
    }

    /// θ itself.
    pub fn theta(field: &Arc<NumberField>) -> Self {
        Self::from_field_coeffs(field, vec![BigRational::zero(), BigRational::one()])
    }

    /// `Σ coeffs[i] θ^i`, reduced.
    pub fn from_field_coeffs(field: &Arc<NumberField>, coeffs: Vec<BigRational>) -> Self {
        Self::from_poly(field, RatPoly::new(coeffs))
    }

    fn from_poly(field: &Arc<NumberField>, p: RatPoly) -> Self {
        let p = if p.degree().unwrap_or(0) >= field.degree() {
            p.rem(field.minpoly_rat())
        } else {
            p
        };
        match p.degree() {
            None => Self::zero(),
            Some(0) => Scalar(Repr::Rat(p.into_coeffs().pop().unwrap())),
            Some(_) => Scalar(Repr::Alg {
                field: field.clone(),
                coeffs: p.into_coeffs(),
            }),
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match &self.0 {
            Repr::Rat(r) => Some(r),
            Repr::Alg { .. } => None,
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self.0, Repr::Rat(_))
    }

    pub fn field(&self) -> Option<&Arc<NumberField>> {
        match &self.0 {
            Repr::Rat(_) => None,
            Repr::Alg { field, .. } => Some(field),
        }
    }

    /// Coefficients of the reduced representation, low-to-high in θ.
    pub fn coefficients(&self) -> Vec<BigRational> {
        match &self.0 {
            Repr::Rat(r) if r.is_zero() => Vec::new(),
            Repr::Rat(r) => vec![r.clone()],
            Repr::Alg { coeffs, .. } => coeffs.clone(),
        }
    }

    fn poly(&self) -> RatPoly {
        RatPoly::new(self.coefficients())
    }

    fn joint_field(&self, other: &Self) -> Result<Option<Arc<NumberField>>, ExactError> {
        match (self.field(), other.field()) {
            (None, None) => Ok(None),
            (Some(f), None) | (None, Some(f)) => Ok(Some(f.clone())),
            (Some(f), Some(g)) => {
                if f.same_as(g) {
                    Ok(Some(f.clone()))
                } else {
                    Err(ExactError::FieldMismatch)
                }
            }
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, ExactError> {
        if let (Repr::Rat(a), Repr::Rat(b)) = (&self.0, &other.0) {
            return Ok(Scalar(Repr::Rat(a + b)));
        }
        let f = self.joint_field(other)?.unwrap();
        Ok(Self::from_poly(&f, self.poly().add(&other.poly())))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, ExactError> {
        if let (Repr::Rat(a), Repr::Rat(b)) = (&self.0, &other.0) {
            return Ok(Scalar(Repr::Rat(a - b)));
        }
        let f = self.joint_field(other)?.unwrap();
        Ok(Self::from_poly(&f, self.poly().sub(&other.poly())))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, ExactError> {
        match (&self.0, &other.0) {
            (Repr::Rat(a), Repr::Rat(b)) => Ok(Scalar(Repr::Rat(a * b))),
            (Repr::Rat(a), Repr::Alg { field, coeffs }) | (Repr::Alg { field, coeffs }, Repr::Rat(a)) => {
                if a.is_zero() {
                    return Ok(Self::zero());
                }
                Ok(Scalar(Repr::Alg {
                    field: field.clone(),
                    coeffs: coeffs.iter().map(|c| c * a).collect(),
                }))
            }
            _ => {
                let f = self.joint_field(other)?.unwrap();
                Ok(Self::from_poly(&f, self.poly().mul(&other.poly())))
            }
        }
    }

    pub fn inv(&self) -> Result<Self, ExactError> {
        match &self.0 {
            Repr::Rat(r) => {
                if r.is_zero() {
                    Err(ExactError::DivisionByZero)
                } else {
                    Ok(Scalar(Repr::Rat(r.recip())))
                }
            }
            Repr::Alg { field, .. } => {
                if self.is_zero() {
                    return Err(ExactError::DivisionByZero);
                }
                let m = field.minpoly_rat();
                let a = self.poly();
                let (g, s) = a.gcd_cofactor(m);
                if g.degree() == Some(0) {
                    return Ok(Self::from_poly(field, s));
                }
                // reducible defining polynomial: θ is a root of m/g, where a is invertible
                let (m2, _) = m.div_rem(&g);
                let (g2, s2) = a.gcd_cofactor(&m2);
                debug_assert_eq!(g2.degree(), Some(0));
                Ok(Self::from_poly(field, s2))
            }
        }
    }

    pub fn try_div(&self, other: &Self) -> Result<Self, ExactError> {
        self.try_mul(&other.inv()?)
    }

    /// Exact sign in {-1, 0, 1}.
    pub fn sign(&self) -> i8 {
        match &self.0 {
            Repr::Rat(r) => sign_of(r),
            Repr::Alg { field, coeffs } => alg_sign(field, coeffs),
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.0 {
            Repr::Rat(r) => r.is_zero(),
            Repr::Alg { field, coeffs } => {
                let g = RatPoly::new(coeffs.clone()).gcd(field.minpoly_rat());
                field.theta_is_root_of(&g)
            }
        }
    }

    pub fn is_positive(&self) -> bool {
        self.sign() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.sign() < 0
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    /// Rational enclosure no wider than `width`.
    pub fn enclose(&self, width: &BigRational) -> (BigRational, BigRational) {
        match &self.0 {
            Repr::Rat(r) => (r.clone(), r.clone()),
            Repr::Alg { field, coeffs } => {
                let p = RatPoly::new(coeffs.clone());
                let (lo, hi) = field.interval();
                let (mut lo, mut hi) = (lo.clone(), hi.clone());
                loop {
                    let (a, b) = eval_interval(&p, &lo, &hi);
                    if &(&b - &a) <= width {
                        return (a, b);
                    }
                    (lo, hi) = field.bisect(&lo, &hi);
                }
            }
        }
    }

    /// Display-only approximation.
    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Rat(r) => rational_to_f64(r),
            Repr::Alg { field, coeffs } => {
                let t = field.theta_approx();
                coeffs
                    .iter()
                    .rev()
                    .fold(0.0, |acc, c| acc * t + rational_to_f64(c))
            }
        }
    }

    pub fn cmp_exact(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Rat(a), Repr::Rat(b)) => a.cmp(b),
            _ => match (self - other).sign() {
                -1 => Ordering::Less,
                0 => Ordering::Equal,
                _ => Ordering::Greater,
            },
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Structural representation key: equal values in the same field share it
    /// whenever the defining polynomial is irreducible.
    pub(crate) fn repr_eq(&self, other: &Self) -> bool {
        match (&self.0, &other.0) {
            (Repr::Rat(a), Repr::Rat(b)) => a == b,
            (Repr::Alg { field: f, coeffs: a }, Repr::Alg { field: g, coeffs: b }) => {
                f.same_as(g) && a == b
            }
            _ => false,
        }
    }
}

fn sign_of(r: &BigRational) -> i8 {
    if r.is_positive() {
        1
    } else if r.is_negative() {
        -1
    } else {
        0
    }
}

fn mul_interval(a: (&BigRational, &BigRational), b: (&BigRational, &BigRational)) -> (BigRational, BigRational) {
    let products = [a.0 * b.0, a.0 * b.1, a.1 * b.0, a.1 * b.1];
    let mut lo = products[0].clone();
    let mut hi = products[0].clone();
    for p in &products[1..] {
        if p < &lo {
            lo = p.clone();
        }
        if p > &hi {
            hi = p.clone();
        }
    }
    (lo, hi)
}

/// Horner evaluation in rational interval arithmetic.
fn eval_interval(p: &RatPoly, lo: &BigRational, hi: &BigRational) -> (BigRational, BigRational) {
    let mut acc = (BigRational::zero(), BigRational::zero());
    for c in p.coeffs().iter().rev() {
        let (a, b) = mul_interval((&acc.0, &acc.1), (lo, hi));
        acc = (a + c, b + c);
    }
    acc
}

fn alg_sign(field: &NumberField, coeffs: &[BigRational]) -> i8 {
    let p = RatPoly::new(coeffs.to_vec());
    let g = p.gcd(field.minpoly_rat());
    if field.theta_is_root_of(&g) {
        return 0;
    }
    let (lo, hi) = field.interval();
    let (mut lo, mut hi) = (lo.clone(), hi.clone());
    loop {
        let (a, b) = eval_interval(&p, &lo, &hi);
        if a.is_positive() {
            return 1;
        }
        if b.is_negative() {
            return -1;
        }
        if lo == hi {
            // θ rational (degree-one field); exact evaluation
            return sign_of(&p.eval(&lo));
        }
        (lo, hi) = field.bisect(&lo, &hi);
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        if self.repr_eq(other) {
            return true;
        }
        match (&self.0, &other.0) {
            (Repr::Rat(_), Repr::Rat(_)) => false,
            _ => self.cmp_exact(other) == Ordering::Equal,
        }
    }
}

impl Eq for Scalar {}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scalar {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.repr_eq(other) {
            return Ordering::Equal;
        }
        self.cmp_exact(other)
    }
}

impl Default for Scalar {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Self::from_int(n)
    }
}

impl From<BigRational> for Scalar {
    fn from(r: BigRational) -> Self {
        Self::rational(r)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                self.$checked(rhs).unwrap_or_else(|e| panic!("scalar arithmetic: {e}"))
            }
        }
        impl $trait<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                (&self).$method(rhs)
            }
        }
        impl $trait<Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                self.$method(&rhs)
            }
        }
    };
}

binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);
binop!(Div, div, try_div);

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match &self.0 {
            Repr::Rat(r) => Scalar(Repr::Rat(-r)),
            Repr::Alg { field, coeffs } => Scalar(Repr::Alg {
                field: field.clone(),
                coeffs: coeffs.iter().map(|c| -c).collect(),
            }),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl std::iter::Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Self {
        iter.fold(Scalar::zero(), |a, b| a + b)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Rat(r) => write!(f, "{r}"),
            Repr::Alg { field, coeffs } => {
                let den = coeffs
                    .iter()
                    .fold(BigInt::one(), |l, c| num_integer::Integer::lcm(&l, c.denom()));
                let terms: Vec<String> = coeffs
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(i, c)| {
                        let n = (c * BigRational::from_integer(den.clone())).to_integer();
                        match i {
                            0 => format!("{n}"),
                            1 => format!("{n}*t"),
                            _ => format!("{n}*t^{i}"),
                        }
                    })
                    .collect();
                write!(f, "({})/{} @ {}", terms.join(" + "), den, field)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sqrt2() -> Arc<NumberField> {
        Arc::new(NumberField::quadratic(2).unwrap())
    }

    #[test]
    fn theta_minus_three_halves_is_negative() {
        let f = sqrt2();
        let s = Scalar::theta(&f) - Scalar::ratio(3, 2);
        assert_eq!(s.sign(), -1);
    }

    #[test]
    fn defining_relation_is_zero() {
        let f = sqrt2();
        let t = Scalar::theta(&f);
        let s = &t * &t - Scalar::from_int(2);
        assert_eq!(s.sign(), 0);
        assert!(s.is_rational());
        assert_eq!(&t * &t, Scalar::from_int(2));
    }

    #[test]
    fn rational_sign() {
        assert_eq!(Scalar::ratio(5, 3).sign(), 1);
        assert_eq!(Scalar::ratio(2, 3) + Scalar::ratio(1, 6), Scalar::ratio(5, 6));
    }

    #[test]
    fn inverse_of_one_plus_theta() {
        let f = sqrt2();
        let t = Scalar::theta(&f);
        let inv = (Scalar::one() + &t).inv().unwrap();
        assert!(inv.repr_eq(&(&t - Scalar::one())));
    }

    #[test]
    fn division_by_zero_and_mixed_fields() {
        assert_eq!(Scalar::zero().inv(), Err(ExactError::DivisionByZero));
        let a = Scalar::theta(&sqrt2());
        let b = Scalar::theta(&Arc::new(NumberField::quadratic(3).unwrap()));
        assert_eq!(a.try_add(&b), Err(ExactError::FieldMismatch));
        // structurally equal fields combine
        let c = Scalar::theta(&sqrt2());
        assert_eq!(a.try_sub(&c).unwrap(), Scalar::zero());
    }

    #[test]
    fn reducible_defining_polynomial_still_signs_correctly() {
        // (x^2 - 2)(x - 5), root pinned near sqrt 2
        let p = crate::exact::IntPolynomial::from_i64s(&[10, -2, -5, 1]);
        let f = Arc::new(
            NumberField::new(p, BigRational::from_integer(1.into()), BigRational::from_integer(2.into())).unwrap(),
        );
        let t = Scalar::theta(&f);
        let z = &t * &t - Scalar::from_int(2);
        assert!(!z.is_rational());
        assert_eq!(z.sign(), 0);
        assert!(z.is_zero());
        assert_eq!(z, Scalar::zero());
        let inv = (Scalar::one() + &t).inv().unwrap();
        assert_eq!((Scalar::one() + &t) * inv, Scalar::one());
    }

    #[test]
    fn enclosure_brackets_value() {
        let t = Scalar::theta(&sqrt2());
        let w = BigRational::new(1.into(), 1_000_000.into());
        let (lo, hi) = t.enclose(&w);
        assert!(&hi - &lo <= w);
        assert!(&lo * &lo <= BigRational::from_integer(2.into()));
        assert!(&hi * &hi >= BigRational::from_integer(2.into()));
    }

    #[test]
    fn display_format() {
        let t = Scalar::theta(&sqrt2());
        let s = (Scalar::ratio(1, 2) + &t) / Scalar::from_int(3);
        assert_eq!(s.to_string(), "(1 + 2*t)/6 @ field:-2,0,1:1,2");
        assert_eq!(Scalar::ratio(-4, 6).to_string(), "-2/3");
    }
}
