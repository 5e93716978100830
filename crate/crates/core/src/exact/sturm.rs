//! Sturm chains and real root isolation over the rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::poly::{IntPolynomial, RatPoly};
use super::ExactError;

/// Standard Sturm chain `p, p', -rem(p, p'), ...`. Remainders are scaled by
/// positive factors to keep integer coefficients, which preserves every sign.
pub fn sturm_sequence(p: &IntPolynomial) -> Result<Vec<IntPolynomial>, ExactError> {
    if p.is_zero() {
        return Err(ExactError::ZeroPolynomial);
    }
    let mut chain = vec![p.clone()];
    let d = p.derivative();
    if d.is_zero() {
        return Ok(chain);
    }
    chain.push(d);
    loop {
        let n = chain.len();
        let r = chain[n - 2].to_rat().rem(&chain[n - 1].to_rat());
        if r.is_zero() {
            break;
        }
        chain.push(r.neg().to_int_scaled());
    }
    Ok(chain)
}

fn sign_variations(chain: &[IntPolynomial], x: &BigRational) -> usize {
    let mut last = 0i8;
    let mut count = 0;
    for q in chain {
        let v = q.eval(x);
        let s = if v.is_positive() {
            1
        } else if v.is_negative() {
            -1
        } else {
            0
        };
        if s != 0 {
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
    }
    count
}

/// Number of distinct real roots of the chain's head polynomial in `(lo, hi]`.
pub fn count_roots_in(chain: &[IntPolynomial], lo: &BigRational, hi: &BigRational) -> usize {
    sign_variations(chain, lo).saturating_sub(sign_variations(chain, hi))
}

/// Convenience wrapper building the chain on the fly.
pub fn count_real_roots(
    p: &IntPolynomial,
    lo: &BigRational,
    hi: &BigRational,
) -> Result<usize, ExactError> {
    let chain = sturm_sequence(p)?;
    Ok(count_roots_in(&chain, lo, hi))
}

/// Power of two strictly above every root modulus (Cauchy bound).
fn root_bound(p: &IntPolynomial) -> BigRational {
    let lead = p.leading().unwrap().abs();
    let max = p.coeffs()[..p.coeffs().len() - 1]
        .iter()
        .map(|c| BigRational::new(c.abs(), lead.clone()))
        .fold(BigRational::zero(), |m, c| if c > m { c } else { m });
    let bound = max + BigRational::one();
    let mut b = BigRational::one();
    while b <= bound {
        b *= BigRational::from_integer(BigInt::from(2));
    }
    b
}

/// Disjoint closed rational intervals each containing exactly one real root of
/// the squarefree part of `p`, sorted ascending. Endpoints are never roots and
/// every interval has width at most one; splits are dyadic, so integers are
/// preferred as endpoints.
pub fn isolate_roots(p: &IntPolynomial) -> Vec<(BigRational, BigRational)> {
    if p.degree().unwrap_or(0) == 0 {
        return Vec::new();
    }
    let sq = p.squarefree_part();
    let chain = sturm_sequence(&sq).expect("nonzero");
    let bound = root_bound(&sq);
    let mut out = Vec::new();
    let mut stack = vec![(-bound.clone(), bound)];
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    while let Some((lo, hi)) = stack.pop() {
        let n = count_roots_in(&chain, &lo, &hi);
        if n == 0 {
            continue;
        }
        if n == 1 && &hi - &lo <= BigRational::one() {
            out.push((lo, hi));
            continue;
        }
        let mut mid = (&lo + &hi) * &half;
        // nudge the split point off a root
        let mut step = (&hi - &lo) * &half * &half;
        while sq.eval(&mid).is_zero() {
            mid = &lo + &step;
            step *= &half;
        }
        stack.push((mid.clone(), hi));
        stack.push((lo, mid));
    }
    out.sort();
    out
}

/// Halve `[lo, hi]` around the unique simple root of `p` inside it.
pub(crate) fn bisect_root(p: &RatPoly, lo: &BigRational, hi: &BigRational) -> (BigRational, BigRational) {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mid = (lo + hi) * &half;
    let fm = p.eval(&mid);
    if fm.is_zero() {
        // the root is rational; collapse onto it
        return (mid.clone(), mid);
    }
    let flo = p.eval(lo);
    if flo.is_positive() == fm.is_positive() {
        (mid, hi.clone())
    } else {
        (lo.clone(), mid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn chain_for_x2_minus_2() {
        let p = IntPolynomial::from_i64s(&[-2, 0, 1]);
        let chain = sturm_sequence(&p).unwrap();
        assert_eq!(
            chain,
            vec![
                IntPolynomial::from_i64s(&[-2, 0, 1]),
                IntPolynomial::from_i64s(&[0, 2]),
                IntPolynomial::from_i64s(&[2]),
            ]
        );
        // variations: at -2 the signs are (+,-,+) = 2; at 2 they are (+,+,+) = 0
        assert_eq!(count_roots_in(&chain, &r(-2), &r(2)), 2);
    }

    #[test]
    fn linear_chain() {
        let p = IntPolynomial::from_i64s(&[-1, 1]);
        let chain = sturm_sequence(&p).unwrap();
        assert_eq!(chain.len(), 2);
        assert_eq!(count_roots_in(&chain, &r(0), &r(2)), 1);
    }

    #[test]
    fn no_real_roots() {
        let p = IntPolynomial::from_i64s(&[1, 0, 1]);
        assert_eq!(count_real_roots(&p, &r(-10), &r(10)).unwrap(), 0);
        assert!(isolate_roots(&p).is_empty());
    }

    #[test]
    fn zero_rejected() {
        assert_eq!(sturm_sequence(&IntPolynomial::zero()), Err(ExactError::ZeroPolynomial));
    }

    #[test]
    fn isolates_sqrt2_into_unit_intervals() {
        let iv = isolate_roots(&IntPolynomial::from_i64s(&[-2, 0, 1]));
        assert_eq!(iv, vec![(r(-2), r(-1)), (r(1), r(2))]);
    }

    #[test]
    fn double_root_collapses() {
        let iv = isolate_roots(&IntPolynomial::from_i64s(&[1, -2, 1]));
        assert_eq!(iv.len(), 1);
        let (lo, hi) = &iv[0];
        assert!(lo < &r(1) && &r(1) < hi);
    }

    #[test]
    fn rational_root_isolated() {
        let iv = isolate_roots(&IntPolynomial::from_i64s(&[-3, 2]));
        assert_eq!(iv.len(), 1);
        let x = BigRational::new(3.into(), 2.into());
        assert!(iv[0].0 < x && x < iv[0].1);
    }
}
