use std::fmt;

use num_bigint::BigInt;
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::poly::{IntPolynomial, RatPoly};
use super::sturm::{bisect_root, count_real_roots};
use super::ExactError;

/// A real number field `Q(θ)`: a squarefree defining polynomial together with
/// a rational interval pinning one of its real roots.
///
/// Irreducibility of the polynomial is the caller's responsibility; the zero
/// test in [`Scalar::sign`](super::Scalar::sign) stays correct without it.
#[derive(Clone, Debug)]
pub struct NumberField {
    minpoly: IntPolynomial,
    minpoly_rat: RatPoly,
    lo: BigRational,
    hi: BigRational,
}

impl NumberField {
    pub fn new(minpoly: IntPolynomial, lo: BigRational, hi: BigRational) -> Result<Self, ExactError> {
        let deg = minpoly.degree().ok_or(ExactError::ZeroPolynomial)?;
        if deg == 0 {
            return Err(ExactError::InvalidField("constant defining polynomial".into()));
        }
        if !minpoly.is_squarefree() {
            return Err(ExactError::InvalidField(format!("{minpoly} is not squarefree")));
        }
        if lo >= hi {
            return Err(ExactError::InvalidField("empty isolating interval".into()));
        }
        if minpoly.eval(&lo).is_zero() || minpoly.eval(&hi).is_zero() {
            return Err(ExactError::InvalidField(
                "isolating interval endpoint is a root".into(),
            ));
        }
        let n = count_real_roots(&minpoly, &lo, &hi)?;
        if n != 1 {
            return Err(ExactError::InvalidField(format!(
                "isolating interval [{lo}, {hi}] holds {n} roots of {minpoly}"
            )));
        }
        let minpoly_rat = minpoly.to_rat();
        Ok(Self {
            minpoly,
            minpoly_rat,
            lo,
            hi,
        })
    }

    /// `Q(√n)` with `θ` the positive square root.
    pub fn quadratic(n: u64) -> Result<Self, ExactError> {
        let root = n.sqrt();
        if root * root == n {
            return Err(ExactError::InvalidField(format!("{n} is a perfect square")));
        }
        let p = IntPolynomial::new(vec![-BigInt::from(n), BigInt::zero(), BigInt::one()]);
        Self::new(
            p,
            BigRational::from_integer(root.into()),
            BigRational::from_integer((root + 1).into()),
        )
    }

    pub fn minpoly(&self) -> &IntPolynomial {
        &self.minpoly
    }

    pub(crate) fn minpoly_rat(&self) -> &RatPoly {
        &self.minpoly_rat
    }

    pub fn degree(&self) -> usize {
        self.minpoly.degree().unwrap()
    }

    pub fn interval(&self) -> (&BigRational, &BigRational) {
        (&self.lo, &self.hi)
    }

    /// Structural identity: same polynomial and same isolating interval.
    pub fn same_as(&self, other: &Self) -> bool {
        std::ptr::eq(self, other)
            || (self.minpoly == other.minpoly && self.lo == other.lo && self.hi == other.hi)
    }

    /// An interval around θ no wider than `width`.
    pub fn refine_to(&self, width: &BigRational) -> (BigRational, BigRational) {
        let (mut lo, mut hi) = (self.lo.clone(), self.hi.clone());
        while &(&hi - &lo) > width {
            (lo, hi) = bisect_root(&self.minpoly_rat, &lo, &hi);
        }
        (lo, hi)
    }

    pub(crate) fn bisect(&self, lo: &BigRational, hi: &BigRational) -> (BigRational, BigRational) {
        bisect_root(&self.minpoly_rat, lo, hi)
    }

    /// Whether θ is a root of `g` (whose roots are a subset of the defining polynomial's).
    pub(crate) fn theta_is_root_of(&self, g: &RatPoly) -> bool {
        if g.degree().unwrap_or(0) == 0 {
            return false;
        }
        let gi = g.to_int_scaled();
        count_real_roots(&gi, &self.lo, &self.hi).unwrap_or(0) > 0
    }

    pub(crate) fn theta_approx(&self) -> f64 {
        let w = BigRational::new(BigInt::one(), BigInt::from(1u64) << 60u32);
        let (lo, hi) = self.refine_to(&w);
        rational_to_f64(&((lo + hi) / BigRational::from_integer(2.into())))
    }
}

impl fmt::Display for NumberField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let coeffs: Vec<String> = self.minpoly.coeffs().iter().map(|c| c.to_string()).collect();
        write!(f, "field:{}:{},{}", coeffs.join(","), self.lo, self.hi)
    }
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    if let Some(v) = r.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // very large numerator/denominator: shift both down
    let n = r.numer();
    let d = r.denom();
    let shift = n.bits().max(d.bits()).saturating_sub(1000);
    let v = (n >> shift).to_f64().unwrap_or(0.0) / (d >> shift).to_f64().unwrap_or(1.0);
    if r.is_negative() && v > 0.0 {
        -v
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn quadratic_field_pins_positive_root() {
        let f = NumberField::quadratic(2).unwrap();
        assert_eq!(f.interval(), (&r(1, 1), &r(2, 1)));
        assert!((f.theta_approx() - std::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_intervals() {
        let p = IntPolynomial::from_i64s(&[-2, 0, 1]);
        assert!(NumberField::new(p.clone(), r(-2, 1), r(2, 1)).is_err());
        assert!(NumberField::new(p.clone(), r(2, 1), r(1, 1)).is_err());
        assert!(NumberField::new(IntPolynomial::from_i64s(&[1, -2, 1]), r(0, 1), r(2, 1)).is_err());
        assert!(NumberField::quadratic(9).is_err());
    }

    #[test]
    fn refinement_brackets_root() {
        let f = NumberField::quadratic(2).unwrap();
        let (lo, hi) = f.refine_to(&r(1, 10000));
        assert!(&hi - &lo <= r(1, 10000));
        assert!(&lo * &lo < r(2, 1) && &hi * &hi > r(2, 1));
    }
}
