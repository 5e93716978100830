//! Text form of scalars.
//!
//! Rationals print as `p` or `p/q`. Field elements print as
//! `(c0 + c1*t + ...)/d @ field:<m0>,<m1>,...:<lo>,<hi>` where the `m_i` are the
//! integer coefficients of the defining polynomial, low degree first.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::{ExactError, IntPolynomial, NumberField, Scalar};

fn perr(msg: impl Into<String>) -> ExactError {
    ExactError::Parse(msg.into())
}

pub fn parse_rational(s: &str) -> Result<BigRational, ExactError> {
    let s = s.trim();
    let r = match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| perr(format!("bad numerator in {s:?}")))?;
            let d: BigInt = d.trim().parse().map_err(|_| perr(format!("bad denominator in {s:?}")))?;
            if d == BigInt::from(0) {
                return Err(perr(format!("zero denominator in {s:?}")));
            }
            BigRational::new(n, d)
        }
        None => BigRational::from_integer(s.parse().map_err(|_| perr(format!("bad integer {s:?}")))?),
    };
    Ok(r)
}

/// Parse `field:<coeffs>:<lo>,<hi>`.
pub fn parse_field(s: &str) -> Result<NumberField, ExactError> {
    let mut parts = s.trim().split(':');
    if parts.next().map(str::trim) != Some("field") {
        return Err(perr(format!("expected field descriptor, got {s:?}")));
    }
    let coeffs = parts.next().ok_or_else(|| perr("missing coefficients"))?;
    let interval = parts.next().ok_or_else(|| perr("missing interval"))?;
    if parts.next().is_some() {
        return Err(perr("trailing data after field descriptor"));
    }
    let coeffs: Vec<BigInt> = coeffs
        .split(',')
        .map(|c| c.trim().parse().map_err(|_| perr(format!("bad coefficient {c:?}"))))
        .collect::<Result<_, _>>()?;
    let (lo, hi) = interval
        .split_once(',')
        .ok_or_else(|| perr("interval needs two endpoints"))?;
    NumberField::new(IntPolynomial::new(coeffs), parse_rational(lo)?, parse_rational(hi)?)
}

/// Parser that interns fields, so every scalar read from one document shares
/// the same field allocation.
#[derive(Default)]
pub struct ScalarParser {
    fields: Vec<Arc<NumberField>>,
}

impl ScalarParser {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_field(field: Arc<NumberField>) -> Self {
        Self { fields: vec![field] }
    }

    pub fn fields(&self) -> &[Arc<NumberField>] {
        &self.fields
    }

    fn intern(&mut self, f: NumberField) -> Arc<NumberField> {
        if let Some(known) = self.fields.iter().find(|g| g.same_as(&f)) {
            return known.clone();
        }
        let f = Arc::new(f);
        self.fields.push(f.clone());
        f
    }

    pub fn parse(&mut self, s: &str) -> Result<Scalar, ExactError> {
        let s = s.trim();
        let Some((body, field)) = s.split_once('@') else {
            return parse_rational(s).map(Scalar::rational);
        };
        let field = self.intern(parse_field(field)?);
        let body = body.trim();
        let (num, den) = match body.rsplit_once(")/") {
            Some((n, d)) => (n.strip_prefix('(').ok_or_else(|| perr("expected '('"))?, d),
            None => (
                body.strip_prefix('(')
                    .and_then(|b| b.strip_suffix(')'))
                    .ok_or_else(|| perr(format!("bad field element {body:?}")))?,
                "1",
            ),
        };
        let den: BigInt = den.trim().parse().map_err(|_| perr(format!("bad denominator {den:?}")))?;
        if den == BigInt::from(0) {
            return Err(perr("zero denominator"));
        }
        let mut coeffs: Vec<BigRational> = Vec::new();
        for term in num.split(" + ") {
            let term = term.trim();
            if term.is_empty() {
                continue;
            }
            let (c, power) = match term.split_once('*') {
                None => (term, 0usize),
                Some((c, t)) => {
                    let t = t.trim();
                    let power = if t == "t" {
                        1
                    } else {
                        t.strip_prefix("t^")
                            .and_then(|e| e.parse().ok())
                            .ok_or_else(|| perr(format!("bad monomial {t:?}")))?
                    };
                    (c, power)
                }
            };
            let c: BigInt = c.trim().parse().map_err(|_| perr(format!("bad coefficient {c:?}")))?;
            if coeffs.len() <= power {
                coeffs.resize(power + 1, BigRational::from_integer(0.into()));
            }
            coeffs[power] += BigRational::new(c, den.clone());
        }
        Ok(Scalar::from_field_coeffs(&field, coeffs))
    }
}

/// One-shot parse; the field is not shared with anything else.
pub fn parse_scalar(s: &str) -> Result<Scalar, ExactError> {
    ScalarParser::new().parse(s)
}
