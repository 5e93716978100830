//! Hausdorff distance to the unit ball, ball-approximating polytopes, and
//! experiments on subpolytopes of k-stacked polytopes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exact::Scalar;
use crate::hull::{kstacked_generator, GlueStep, StackedRecipe};
use crate::hull::{approx_point, hull_of, hyperplane_section, FilteredHalfspace, Halfspace, Polytope};
use crate::linalg;
use crate::projgeom::Flat;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ShephardError {
    #[error("the origin is not an interior point; translate first")]
    OriginNotInterior,
    #[error("only dimension 3 is supported, got {0}")]
    Unsupported(usize),
    #[error("epsilon = {eps} is below the supported scale 1/1000; about {vertices:.3e} vertices would be needed")]
    Infeasible { eps: String, vertices: f64 },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("no approximation reached epsilon after {0} refinements")]
    NoConvergence(usize),
}

/// Rigorous rational bounds on d_H(P, B_1(0)).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceEnclosure {
    pub lower: BigRational,
    pub upper: BigRational,
}

impl DistanceEnclosure {
    pub fn width(&self) -> BigRational {
        &self.upper - &self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        let lo = self.lower.to_f64().unwrap_or(f64::NEG_INFINITY);
        let hi = self.upper.to_f64().unwrap_or(f64::INFINITY);
        lo - 1e-12 <= x && x <= hi + 1e-12
    }
}

impl fmt::Display for DistanceEnclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{:.10}, {:.10}]",
            self.lower.to_f64().unwrap_or(f64::NAN),
            self.upper.to_f64().unwrap_or(f64::NAN)
        )
    }
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn pow2(k: u32) -> BigRational {
    BigRational::from_integer(BigInt::one() << k)
}

/// Default enclosure width, 2^-40.
pub fn default_width() -> BigRational {
    pow2(40).recip()
}

/// `(lo, hi)` with `lo² ≤ q ≤ hi²` and `hi − lo ≤ width`; exact for perfect squares.
pub fn sqrt_enclose(q: &BigRational, width: &BigRational) -> (BigRational, BigRational) {
    assert!(!q.is_negative(), "square root of a negative number");
    let (n, d) = (q.numer(), q.denom());
    let (rn, rd) = (n.sqrt(), d.sqrt());
    if &(&rn * &rn) == n && &(&rd * &rd) == d {
        let r = BigRational::new(rn, rd);
        return (r.clone(), r);
    }
    let mut k = 0u32;
    while pow2(k).recip() > *width {
        k += 1;
    }
    let scaled = q * pow2(2 * k);
    let s = scaled.floor().to_integer().sqrt();
    let unit = pow2(k).recip();
    let lo = BigRational::from_integer(s) * &unit;
    let hi = &lo + &unit;
    (lo, hi)
}

fn enclose_sqrt(x: &Scalar, width: &BigRational) -> (BigRational, BigRational) {
    let (a, b) = x.enclose(&(width * width));
    let a = if a.is_negative() { BigRational::zero() } else { a };
    let (lo, _) = sqrt_enclose(&a, width);
    let (_, hi) = sqrt_enclose(&b, width);
    (lo, hi)
}

fn max_rat(a: BigRational, b: BigRational) -> BigRational {
    if a > b {
        a
    } else {
        b
    }
}

/// Squared circumradius and squared inradius about the origin, exactly.
fn radii_squared(p: &Polytope) -> Result<(Scalar, Scalar), ShephardError> {
    if p.dim() != p.ambient() as isize || p.facets().is_empty() {
        return Err(ShephardError::OriginNotInterior);
    }
    let mut outer = Scalar::zero();
    for (_, x) in p.vertices() {
        let n = linalg::dot(x, x);
        if n > outer {
            outer = n;
        }
    }
    let mut inner: Option<Scalar> = None;
    for f in p.facets() {
        let h = &f.halfspace;
        if !h.offset.is_positive() {
            return Err(ShephardError::OriginNotInterior);
        }
        let d2 = &h.offset * &h.offset / linalg::dot(&h.normal, &h.normal);
        if inner.as_ref().is_none_or(|m| d2 < *m) {
            inner = Some(d2);
        }
    }
    Ok((outer, inner.unwrap()))
}

fn enclosure_from_radii(outer2: &Scalar, inner2: &Scalar, width: &BigRational) -> DistanceEnclosure {
    let (r_lo, r_hi) = enclose_sqrt(outer2, width);
    let (i_lo, i_hi) = enclose_sqrt(inner2, width);
    let one = BigRational::one();
    DistanceEnclosure {
        lower: max_rat(&r_lo - &one, &one - &i_hi),
        upper: max_rat(&r_hi - &one, &one - &i_lo),
    }
}

/// d_H(P, B_1(0)) = max(max‖v‖ − 1, 1 − min dist(0, aff F)), enclosed with
/// square roots resolved to `width`.
pub fn hausdorff_to_ball(p: &Polytope, width: &BigRational) -> Result<DistanceEnclosure, ShephardError> {
    let (outer, inner) = radii_squared(p)?;
    Ok(enclosure_from_radii(&outer, &inner, width))
}

/// ‖v‖ ≤ (1+ε)(1−ε)/(1−ε−2√ε) for a vertex of a superpolytope; rounded up.
pub fn vertex_norm_bound(eps: &BigRational) -> Result<BigRational, ShephardError> {
    let one = BigRational::one();
    let gap = &one - eps;
    if eps.is_negative() || !gap.is_positive() || rat(4, 1) * eps >= &gap * &gap {
        return Err(ShephardError::Precondition(format!("2·sqrt({eps}) < 1 − {eps} fails")));
    }
    let (_, s_hi) = sqrt_enclose(eps, &pow2(64).recip());
    let den = &gap - rat(2, 1) * s_hi;
    if !den.is_positive() {
        return Err(ShephardError::Precondition("enclosure too coarse".into()));
    }
    Ok((&one + eps) * &gap / den)
}

/// 1 + 6√ε, rounded up, when √ε ≤ 1/6.
pub fn simplified_norm_bound(eps: &BigRational) -> Option<BigRational> {
    if eps.is_negative() || *eps > rat(1, 36) {
        return None;
    }
    let (_, s_hi) = sqrt_enclose(eps, &pow2(64).recip());
    Some(BigRational::one() + rat(6, 1) * s_hi)
}

/// 2^{−4k−10}/9.
pub fn shephard_bound(k: usize) -> Result<BigRational, ShephardError> {
    if k < 4 {
        return Err(ShephardError::Precondition(format!("k = {k} < 4")));
    }
    Ok(pow2(4 * k as u32 + 10).recip() / rat(9, 1))
}

/// 2^{−2k−4}.
pub fn kstacked_bound(k: usize) -> BigRational {
    pow2(2 * k as u32 + 4).recip()
}

/// Rational point on the unit sphere near the unit vector `u`, through the
/// stereographic chart away from `u`.
pub fn rational_sphere_point(u: [f64; 3], bits: u32) -> Vec<Scalar> {
    let scale = (1u64 << bits) as f64;
    let round = |t: f64| BigRational::new(BigInt::from((t * scale).round() as i64), BigInt::one() << bits);
    let flip = u[2] > 0.0;
    let z = if flip { -u[2] } else { u[2] };
    let a = round(u[0] / (1.0 - z));
    let b = round(u[1] / (1.0 - z));
    let one = BigRational::one();
    let s = &a * &a + &b * &b;
    let den = &s + &one;
    let two = rat(2, 1);
    let mut zc = (&s - &one) / &den;
    if flip {
        zc = -zc;
    }
    vec![
        Scalar::rational(&two * a / &den),
        Scalar::rational(two * b / &den),
        Scalar::rational(zc),
    ]
}

fn fibonacci_net(n: usize, phase: f64) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let r = (1.0 - z * z).sqrt();
            let t = phase + golden * i as f64;
            [r * t.cos(), r * t.sin(), z]
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct BallApprox {
    pub polytope: Polytope,
    pub enclosure: DistanceEnclosure,
    pub net_size: usize,
    pub seed: u64,
}

/// Rough vertex count needed for a net with d_H ≤ ε.
pub fn estimated_vertices(eps: f64) -> f64 {
    2.5 / eps
}

/// Polytope with rational vertices on the unit sphere (or the cube, when
/// that is good enough) with d_H(P, B_1(0)) ≤ ε, verified exactly.
pub fn ball_approx(d: usize, eps: &BigRational, seed: u64) -> Result<BallApprox, ShephardError> {
    if d != 3 {
        return Err(ShephardError::Unsupported(d));
    }
    if *eps < rat(1, 1000) {
        return Err(ShephardError::Infeasible {
            eps: eps.to_string(),
            vertices: estimated_vertices(eps.to_f64().unwrap_or(0.0)),
        });
    }
    let width = default_width();
    let cube = crate::config::qd(3)
        .iter()
        .filter(|(_, x)| x.iter().all(|c| !c.is_zero()))
        .map(|(l, x)| (l.to_string(), x.to_vec()))
        .collect();
    let cube = hull_of(3, cube);
    let enc = hausdorff_to_ball(&cube, &width)?;
    if enc.upper <= *eps {
        return Ok(BallApprox {
            polytope: cube,
            enclosure: enc,
            net_size: 8,
            seed,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
    let e = eps.to_f64().unwrap();
    let mut n = (estimated_vertices(e) as usize).max(12);
    for round in 0..8 {
        let pts = fibonacci_net(n, phase)
            .into_iter()
            .enumerate()
            .map(|(i, u)| (format!("s{i}"), rational_sphere_point(u, 20)))
            .collect();
        let p = hull_of(3, pts);
        if let Ok(enc) = hausdorff_to_ball(&p, &width) {
            if enc.upper <= *eps {
                return Ok(BallApprox {
                    polytope: p,
                    enclosure: enc,
                    net_size: n,
                    seed,
                });
            }
        }
        let _ = round;
        n = n * 3 / 2;
    }
    Err(ShephardError::NoConvergence(8))
}

#[derive(Debug, Clone)]
pub struct SubpolytopeTrial {
    pub extra_norm_upper: BigRational,
    /// Upper bound on d_H(P′, B_1(0)).
    pub distance_upper: BigRational,
    /// The extra point fell inside P, so P′ = P.
    pub inside: bool,
}

#[derive(Debug, Clone)]
pub struct SubpolytopeReport {
    pub seed: u64,
    pub eps: BigRational,
    /// Lower enclosure of 6√ε.
    pub bound: BigRational,
    pub trials: Vec<SubpolytopeTrial>,
    /// Candidates discarded for swallowing a vertex of P or being degenerate.
    pub rejected: usize,
    pub worst_ratio: f64,
    pub pass: bool,
}

impl fmt::Display for SubpolytopeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "experiment: superpolytope distance")?;
        writeln!(f, "seed: {}", self.seed)?;
        writeln!(f, "eps: {} (~{:.6})", self.eps, self.eps.to_f64().unwrap_or(f64::NAN))?;
        writeln!(f, "bound 6*sqrt(eps) >= {:.6}", self.bound.to_f64().unwrap_or(f64::NAN))?;
        for (i, t) in self.trials.iter().enumerate() {
            writeln!(
                f,
                "trial {i}: |v| <= {:.6}, d_H <= {:.6}{}",
                t.extra_norm_upper.to_f64().unwrap_or(f64::NAN),
                t.distance_upper.to_f64().unwrap_or(f64::NAN),
                if t.inside { " (inside)" } else { "" }
            )?;
        }
        writeln!(f, "rejected: {}", self.rejected)?;
        writeln!(f, "worst ratio: {:.6}", self.worst_ratio)?;
        write!(f, "result: {}", if self.pass { "pass" } else { "FAIL" })
    }
}

fn random_direction(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v = [
            rng.gen_range(-1.0..1.0f64),
            rng.gen_range(-1.0..1.0f64),
            rng.gen_range(-1.0..1.0f64),
        ];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 0.1 && n <= 1.0 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

/// Does conv(P ∪ {v}) keep every vertex of P? `None` when v is coplanar
/// with a facet (not decided here).
fn keeps_vertices(p: &Polytope, facets: &[FilteredHalfspace], v: &[Scalar]) -> Option<bool> {
    let vf = approx_point(v);
    let sides: Vec<i8> = facets.iter().map(|f| f.side(v, vf.as_deref())).collect();
    if sides.contains(&0) {
        return None;
    }
    let mut below: BTreeSet<&str> = BTreeSet::new();
    for (f, &s) in p.facets().iter().zip(&sides) {
        if s < 0 {
            below.extend(f.vertices.iter().map(String::as_str));
        }
    }
    Some(p.labels().all(|l| below.contains(l)))
}

/// Superpolytopes P′ = conv(P ∪ {v}) with F_0(P) ⊂ F_0(P′) stay within 6√ε
/// of the ball when d_H(P, B_1(0)) ≤ ε ≤ 1/36. Candidates v are sampled with
/// norm up to 1 + 12√ε and kept only when no vertex of P is swallowed.
pub fn check_subpolytope_lemma(p: &Polytope, trials: usize, seed: u64) -> Result<SubpolytopeReport, ShephardError> {
    let width = default_width();
    let (outer, inner) = radii_squared(p)?;
    let enc = enclosure_from_radii(&outer, &inner, &width);
    let eps = enc.upper.clone();
    if eps > rat(1, 36) {
        return Err(ShephardError::Precondition(format!("d_H(P, B) ≤ {eps} exceeds 1/36")));
    }
    let (s_lo, _) = sqrt_enclose(&eps, &width);
    let bound = rat(6, 1) * &s_lo;
    let reach = 1.0 + 12.0 * eps.to_f64().unwrap().sqrt();
    let (r_lo, _) = enclose_sqrt(&inner, &width);
    let (out_lo, out_hi) = enclose_sqrt(&outer, &width);
    let _ = out_lo;
    let one = BigRational::one();
    let base_upper = max_rat(&out_hi - &one, &one - &r_lo);
    let facets: Vec<FilteredHalfspace> = p.facets().iter().map(|f| FilteredHalfspace::new(f.halfspace.clone())).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut rejected = 0;
    let mut worst = 0.0f64;
    let mut pass = true;
    let mut attempts = 0;
    while out.len() < trials && attempts < trials * 200 {
        attempts += 1;
        let u = random_direction(&mut rng);
        // favour radii near the sphere, where few vertices are swallowed
        let rho = 1.0 + (reach - 1.0) * rng.gen_range(0.0..1.0f64).powi(3);
        let dir = rational_sphere_point(u, 24);
        let rho = BigRational::new(BigInt::from((rho * 1048576.0).round() as i64), BigInt::from(1048576));
        let v: Vec<Scalar> = dir.iter().map(|c| c * Scalar::rational(rho.clone())).collect();
        let vf = approx_point(&v);
        let inside = facets.iter().all(|f| f.side(&v, vf.as_deref()) <= 0);
        if !inside {
            match keeps_vertices(p, &facets, &v) {
                Some(true) => {}
                _ => {
                    rejected += 1;
                    continue;
                }
            }
        }
        // the inradius can only grow, so the bound on P covers the inner term
        let norm_hi = rho.clone();
        let distance_upper = if inside {
            base_upper.clone()
        } else {
            max_rat(&norm_hi - &one, base_upper.clone())
        };
        if distance_upper > bound {
            pass = false;
        }
        let ratio = distance_upper.to_f64().unwrap() / bound.to_f64().unwrap();
        worst = worst.max(ratio);
        out.push(SubpolytopeTrial {
            extra_norm_upper: norm_hi,
            distance_upper,
            inside,
        });
    }
    if out.len() < trials {
        pass = false;
    }
    Ok(SubpolytopeReport {
        seed,
        eps,
        bound,
        trials: out,
        rejected,
        worst_ratio: worst,
        pass,
    })
}

#[derive(Debug, Clone)]
pub struct ContrapositiveReport {
    pub delta: BigRational,
    pub threshold: BigRational,
    pub lowers: Vec<BigRational>,
    pub pass: bool,
}

/// If d_H(Q′, B) > δ then every subpolytope Q has d_H(Q, B) > δ²/36.
/// Subpolytopes keep a random subset of the vertices that still contains
/// the origin in its interior.
pub fn check_contrapositive(q: &Polytope, samples: usize, seed: u64) -> Result<ContrapositiveReport, ShephardError> {
    let width = default_width();
    let enc = hausdorff_to_ball(q, &width)?;
    let delta = enc.lower.clone();
    if !delta.is_positive() || delta >= BigRational::one() {
        return Err(ShephardError::Precondition(format!("need 0 < delta < 1, got {delta}")));
    }
    let threshold = &delta * &delta / rat(36, 1);
    let labels: Vec<String> = q.labels().map(str::to_string).collect();
    let d = q.ambient();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lowers = Vec::new();
    let mut attempts = 0;
    while lowers.len() < samples && attempts < samples * 100 {
        attempts += 1;
        let keep: Vec<(String, Vec<Scalar>)> = labels
            .iter()
            .filter(|_| rng.gen_bool(0.75))
            .map(|l| (l.clone(), q.vertex(l).unwrap().to_vec()))
            .collect();
        if keep.len() <= d {
            continue;
        }
        let sub = hull_of(d, keep);
        if let Ok(e) = hausdorff_to_ball(&sub, &width) {
            lowers.push(e.lower);
        }
    }
    let pass = lowers.len() == samples && lowers.iter().all(|l| *l > threshold);
    Ok(ContrapositiveReport {
        delta,
        threshold,
        lowers,
        pass,
    })
}

#[derive(Debug, Clone)]
pub struct KStackedSample {
    pub summands: usize,
    pub vertices: usize,
    pub center: Vec<BigRational>,
    pub scale: BigRational,
    pub enclosure: DistanceEnclosure,
    /// Every summand has at most C(k, ⌊k/2⌋) edges.
    pub sperner_ok: bool,
}

#[derive(Debug, Clone)]
pub struct KStackedReport {
    pub seed: u64,
    pub d: usize,
    pub k: usize,
    pub bound: BigRational,
    pub samples: Vec<KStackedSample>,
    pub pass: bool,
}

impl fmt::Display for KStackedReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "experiment: k-stacked lower bound")?;
        writeln!(f, "seed: {}", self.seed)?;
        writeln!(f, "d: {}, k: {}", self.d, self.k)?;
        writeln!(f, "bound: 2^-{} = {:.3e}", 2 * self.k + 4, self.bound.to_f64().unwrap_or(f64::NAN))?;
        writeln!(f, "normalization: coarse center search, scale 2/(R + r)")?;
        for (i, s) in self.samples.iter().enumerate() {
            writeln!(
                f,
                "sample {i}: {} summands, {} vertices, d_H in {}{}",
                s.summands,
                s.vertices,
                s.enclosure,
                if s.sperner_ok { "" } else { " (edge count above Sperner bound)" }
            )?;
        }
        let worst = self
            .samples
            .iter()
            .map(|s| s.enclosure.lower.to_f64().unwrap_or(f64::NAN))
            .fold(f64::INFINITY, f64::min);
        writeln!(f, "worst lower bound: {worst:.6}")?;
        write!(f, "result: {}", if self.pass { "pass" } else { "FAIL" })
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// (R − r)/(R + r) about `c`, in floating point: the distance after the best scaling.
fn normalized_gap(pts: &[Vec<f64>], facets: &[(Vec<f64>, f64)], c: &[f64]) -> Option<f64> {
    let r_out = pts
        .iter()
        .map(|x| x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let mut r_in = f64::INFINITY;
    for (n, off) in facets {
        let nn = n.iter().map(|a| a * a).sum::<f64>().sqrt();
        let dist = (off - n.iter().zip(c).map(|(a, b)| a * b).sum::<f64>()) / nn;
        if dist <= 0.0 {
            return None;
        }
        r_in = r_in.min(dist);
    }
    Some((r_out - r_in) / (r_out + r_in))
}

fn to_rat(x: f64) -> BigRational {
    let scale = 1i64 << 30;
    BigRational::new(BigInt::from((x * scale as f64).round() as i64), BigInt::from(scale))
}

/// Translate and scale `p` towards the best ball position: pattern search on
/// the center, then scale 2/(R + r).
pub fn normalize_to_ball(p: &Polytope) -> (Polytope, Vec<BigRational>, BigRational) {
    let pts: Vec<Vec<f64>> = p.vertices().map(|(_, x)| x.iter().map(Scalar::to_f64).collect()).collect();
    let facets: Vec<(Vec<f64>, f64)> = p
        .facets()
        .iter()
        .map(|f| (f.halfspace.normal.iter().map(Scalar::to_f64).collect(), f.halfspace.offset.to_f64()))
        .collect();
    let d = p.ambient();
    let mut c: Vec<f64> = (0..d).map(|i| pts.iter().map(|x| x[i]).sum::<f64>() / pts.len() as f64).collect();
    let mut best = normalized_gap(&pts, &facets, &c).unwrap_or(f64::INFINITY);
    let diam = pts
        .iter()
        .flat_map(|x| pts.iter().map(move |y| x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)))
        .fold(0.0, f64::max);
    let mut step = diam / 4.0;
    for _ in 0..40 {
        let mut improved = false;
        for i in 0..d {
            for s in [-1.0, 1.0] {
                let mut t = c.clone();
                t[i] += s * step;
                if let Some(g) = normalized_gap(&pts, &facets, &t) {
                    if g < best {
                        best = g;
                        c = t;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    let center: Vec<BigRational> = c.iter().map(|&x| to_rat(x)).collect();
    let cs: Vec<Scalar> = center.iter().cloned().map(Scalar::rational).collect();
    let r_out = pts
        .iter()
        .map(|x| x.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let r_in = r_out * (1.0 - best) / (1.0 + best);
    let scale = to_rat(2.0 / (r_out + r_in));
    let s = Scalar::rational(scale.clone());
    let moved = p
        .vertices()
        .map(|(l, x)| (l.to_string(), linalg::scale(&linalg::sub(x, &cs), &s)))
        .collect();
    (hull_of(d, moved), center, scale)
}

/// Generate k-stacked polytopes, normalize each, and check the lower bound
/// 2^{−2k−4} on the distance to the ball.
pub fn check_kstacked_lower_bound(d: usize, k: usize, samples: usize, seed: u64) -> Result<KStackedReport, ShephardError> {
    if d < 3 {
        return Err(ShephardError::Precondition(format!("d = {d} < 3")));
    }
    let bound = kstacked_bound(k);
    let width = default_width();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let sperner = binomial(k, k / 2);
    let mut pass = true;
    for _ in 0..samples {
        let parts = rng.gen_range(1..=5);
        let sub_seed: u64 = rng.gen();
        let (s, recipe) =
            kstacked_generator(d, k, parts, sub_seed).map_err(|e| ShephardError::Precondition(e.to_string()))?;
        let (norm, center, scale) = normalize_to_ball(&s);
        let enclosure = hausdorff_to_ball(&norm, &width)?;
        let sperner_ok = recipe.pieces.iter().all(|p| (p.edges().len() as u128) <= sperner);
        if enclosure.lower < bound || !sperner_ok {
            pass = false;
        }
        out.push(KStackedSample {
            summands: recipe.pieces.len(),
            vertices: s.vertex_count(),
            center,
            scale,
            enclosure,
            sperner_ok,
        });
    }
    Ok(KStackedReport {
        seed,
        d,
        k,
        bound,
        samples: out,
        pass,
    })
}

/// Section of a connected-sum recipe by a hyperplane: the pieces H ∩ S_i,
/// with empty or lower-dimensional sections dropped and gluing facets cut
/// the same way.
pub fn section_recipe(r: &StackedRecipe, h: &Flat) -> Result<StackedRecipe, ShephardError> {
    let hs = Halfspace::from_flat(h).map_err(|e| ShephardError::Precondition(e.to_string()))?;
    let target = r.dim as isize - 1;
    let coords: BTreeMap<&str, &[Scalar]> = r.pieces.iter().flat_map(|p| p.vertices()).collect();
    let mut index: BTreeMap<usize, usize> = BTreeMap::new();
    let mut pieces = Vec::new();
    for (i, p) in r.pieces.iter().enumerate() {
        let s = hyperplane_section(p, &hs);
        if s.dim() == target {
            index.insert(i, pieces.len());
            pieces.push(s);
        }
    }
    let mut steps = Vec::new();
    for st in &r.steps {
        let Some(&j) = index.get(&st.piece) else {
            continue;
        };
        if j == 0 {
            continue;
        }
        let facet = hull_of(
            r.dim,
            st.onto.iter().map(|l| (l.clone(), coords[l.as_str()].to_vec())).collect(),
        );
        let cut = hyperplane_section(&facet, &hs);
        steps.push(GlueStep {
            piece: j,
            onto: cut.labels().map(str::to_string).collect(),
        });
    }
    Ok(StackedRecipe {
        dim: r.dim - 1,
        k: r.k,
        pieces,
        steps,
    })
}

#[derive(Debug, Clone)]
pub struct SectionTrial {
    pub stackings: usize,
    pub normal: Vec<i64>,
    pub facet_counts: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct SectionReport {
    pub seed: u64,
    pub k: usize,
    pub trials: Vec<SectionTrial>,
    pub pass: bool,
}

impl fmt::Display for SectionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "experiment: sections of stacked polytopes")?;
        writeln!(f, "seed: {}", self.seed)?;
        writeln!(f, "k: {}", self.k)?;
        for (i, t) in self.trials.iter().enumerate() {
            writeln!(
                f,
                "trial {i}: {} stackings, normal {:?}, summand facet counts {:?}",
                t.stackings, t.normal, t.facet_counts
            )?;
        }
        let worst = self.trials.iter().flat_map(|t| t.facet_counts.iter().copied()).max().unwrap_or(0);
        writeln!(f, "largest summand: {worst} facets")?;
        write!(f, "result: {}", if self.pass { "pass" } else { "FAIL" })
    }
}

/// Section random stacked 3-polytopes by random planes through their
/// centroid and check that no summand of the section has more than k facets.
pub fn check_sections(trials: usize, seed: u64) -> Result<SectionReport, ShephardError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut pass = true;
    let k = 4;
    for _ in 0..trials {
        let stackings = rng.gen_range(1..=6);
        let (p, recipe) = crate::hull::stacked_generator(3, stackings, rng.gen());
        let normal: Vec<i64> = loop {
            let n: Vec<i64> = (0..3).map(|_| rng.gen_range(-5..=5)).collect();
            if n.iter().any(|&c| c != 0) {
                break n;
            }
        };
        let ns: Vec<Scalar> = normal.iter().map(|&c| Scalar::from_int(c)).collect();
        let offset = linalg::dot(&ns, &p.centroid());
        let h = Halfspace { normal: ns, offset };
        let s = section_recipe(&recipe, &h.to_flat())?;
        let facet_counts = s.summand_facet_counts();
        if s.pieces.is_empty() || !s.respects_k() || s.k != k {
            pass = false;
        }
        out.push(SectionTrial {
            stackings,
            normal,
            facet_counts,
        });
    }
    Ok(SectionReport {
        seed,
        k,
        trials: out,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hull::stacked_generator;

    fn cube() -> Polytope {
        let pts = crate::config::qd(3)
            .iter()
            .filter(|(_, x)| x.iter().all(|c| !c.is_zero()))
            .map(|(l, x)| (l.to_string(), x.to_vec()))
            .collect();
        hull_of(3, pts)
    }

    #[test]
    fn cube_distance() {
        let e = hausdorff_to_ball(&cube(), &default_width()).unwrap();
        assert!(e.contains(3f64.sqrt() - 1.0));
        assert!(e.width() <= pow2(38).recip());
    }

    #[test]
    fn octahedron_distance() {
        let mut pts = Vec::new();
        for i in 0..3 {
            for s in [-1, 1] {
                let mut x = vec![Scalar::zero(); 3];
                x[i] = Scalar::from_int(s);
                pts.push((format!("o{i}{s}"), x));
            }
        }
        let e = hausdorff_to_ball(&hull_of(3, pts), &default_width()).unwrap();
        assert!(e.contains(1.0 - 1.0 / 3f64.sqrt()));
    }

    #[test]
    fn off_center_is_rejected() {
        let c = cube();
        let moved = c
            .vertices()
            .map(|(l, x)| (l.to_string(), x.iter().map(|v| v + Scalar::from_int(2)).collect()))
            .collect();
        assert_eq!(hausdorff_to_ball(&hull_of(3, moved), &default_width()), Err(ShephardError::OriginNotInterior));
    }

    #[test]
    fn sqrt_bounds() {
        let (lo, hi) = sqrt_enclose(&rat(2, 1), &rat(1, 1000));
        assert!(&lo * &lo <= rat(2, 1) && &hi * &hi >= rat(2, 1));
        assert!(&hi - &lo <= rat(1, 1000));
        assert_eq!(sqrt_enclose(&rat(9, 4), &rat(1, 10)), (rat(3, 2), rat(3, 2)));
    }

    #[test]
    fn norm_bounds() {
        assert_eq!(vertex_norm_bound(&rat(1, 36)).unwrap(), rat(1295, 828));
        assert_eq!(simplified_norm_bound(&rat(1, 36)).unwrap(), rat(2, 1));
        assert!(vertex_norm_bound(&rat(1, 4)).is_err());
        let tiny = vertex_norm_bound(&rat(1, 100_000_000)).unwrap();
        assert!(tiny > BigRational::one() && tiny < rat(1001, 1000));
    }

    #[test]
    fn bounds_table() {
        assert_eq!(shephard_bound(6).unwrap(), pow2(34).recip() / rat(9, 1));
        assert_eq!(shephard_bound(4).unwrap(), pow2(26).recip() / rat(9, 1));
        assert!(shephard_bound(5).unwrap() < shephard_bound(4).unwrap());
        assert!(shephard_bound(3).is_err());
        assert_eq!(kstacked_bound(6), pow2(16).recip());
    }

    #[test]
    fn sphere_points_are_on_the_sphere() {
        for u in fibonacci_net(20, 0.3) {
            let x = rational_sphere_point(u, 16);
            assert_eq!(linalg::dot(&x, &x), Scalar::one());
            let xf: Vec<f64> = x.iter().map(Scalar::to_f64).collect();
            assert!((xf[0] - u[0]).abs() < 1e-3 && (xf[2] - u[2]).abs() < 1e-3);
        }
    }

    #[test]
    fn coarse_ball() {
        let b = ball_approx(3, &rat(1, 5), 1).unwrap();
        assert!(b.enclosure.upper <= rat(1, 5));
        assert!(matches!(ball_approx(3, &rat(1, 10_000), 1), Err(ShephardError::Infeasible { .. })));
        assert_eq!(ball_approx(3, &rat(3, 4), 1).unwrap().polytope.vertex_count(), 8);
    }

    #[test]
    fn contrapositive_on_cube() {
        let r = check_contrapositive(&cube(), 10, 3).unwrap();
        assert!(r.pass);
    }

    #[test]
    fn section_experiment() {
        let r = check_sections(5, 2).unwrap();
        assert!(r.pass, "{r}");
        assert_eq!(r.to_string(), check_sections(5, 2).unwrap().to_string());
    }

    #[test]
    fn simplex_section() {
        let (_, recipe) = stacked_generator(3, 0, 1);
        let mid = Halfspace {
            normal: vec![Scalar::one(), Scalar::zero(), Scalar::zero()],
            offset: Scalar::ratio(1, 3),
        };
        let s = section_recipe(&recipe, &mid.to_flat()).unwrap();
        assert_eq!(s.dim, 2);
        assert_eq!(s.pieces.len(), 1);
        assert!(s.pieces[0].facet_count() <= 4);
    }

    #[test]
    fn stacked_section_respects_k() {
        let (_, recipe) = stacked_generator(3, 4, 7);
        let h = Halfspace {
            normal: vec![Scalar::one(), Scalar::one(), Scalar::zero()],
            offset: Scalar::ratio(1, 4),
        };
        let s = section_recipe(&recipe, &h.to_flat()).unwrap();
        assert!(s.respects_k());
        assert!(!s.pieces.is_empty());
        let far = Halfspace {
            normal: vec![Scalar::one(), Scalar::zero(), Scalar::zero()],
            offset: Scalar::from_int(100),
        };
        assert!(section_recipe(&recipe, &far.to_flat()).unwrap().pieces.is_empty());
    }
}
