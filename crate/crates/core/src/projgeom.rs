//! Projective points and flats, join/meet, projective maps.
//!
//! Homogeneous coordinates put the affine part first and the weight last, so
//! the affine point `x ∈ R^d` is `(x, 1)` and directions are `(v, 0)`.

use std::fmt;

use crate::exact::Scalar;
use crate::linalg::{self, Matrix};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProjError {
    #[error("the zero vector is not a projective point")]
    ZeroVector,
    #[error("ambient dimensions differ ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("matrix is singular")]
    Singular,
    #[error("point lists differ in length or are too short")]
    LengthMismatch,
    #[error("source points do not pin down a unique map")]
    Ambiguous,
}

/// Point of projective d-space as a nonzero vector of length d+1, normalized so
/// the first nonzero coordinate is 1.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct HPoint {
    coords: Vec<Scalar>,
}

impl HPoint {
    pub fn new(coords: Vec<Scalar>) -> Result<Self, ProjError> {
        let Some(lead) = coords.iter().find(|c| !c.is_zero()) else {
            return Err(ProjError::ZeroVector);
        };
        let inv = lead.inv().expect("nonzero");
        let coords = coords.iter().map(|c| c * &inv).collect();
        Ok(Self { coords })
    }

    pub fn from_affine(x: &[Scalar]) -> Self {
        let mut coords = x.to_vec();
        coords.push(Scalar::one());
        Self::new(coords).expect("weight is one")
    }

    pub fn from_ints(x: &[i64]) -> Self {
        Self::from_affine(&x.iter().map(|&v| Scalar::from_int(v)).collect::<Vec<_>>())
    }

    /// Point at infinity in direction `v`.
    pub fn direction(v: &[Scalar]) -> Result<Self, ProjError> {
        let mut coords = v.to_vec();
        coords.push(Scalar::zero());
        Self::new(coords)
    }

    pub fn coords(&self) -> &[Scalar] {
        &self.coords
    }

    /// Ambient projective dimension d.
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn is_finite(&self) -> bool {
        !self.coords.last().unwrap().is_zero()
    }

    pub fn to_affine(&self) -> Option<Vec<Scalar>> {
        let w = self.coords.last().unwrap();
        let inv = w.inv().ok()?;
        Some(self.coords[..self.dim()].iter().map(|c| c * &inv).collect())
    }
}

impl fmt::Display for HPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        write!(f, "[{}]", parts.join(" : "))
    }
}

/// Projective subspace, stored as the row-reduced basis of its linear lift.
/// The empty flat has no basis vectors and dimension -1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Flat {
    ambient: usize,
    basis: Matrix,
}

impl Flat {
    pub fn empty(ambient: usize) -> Self {
        Self { ambient, basis: Vec::new() }
    }

    pub fn whole(ambient: usize) -> Self {
        let basis = (0..=ambient)
            .map(|i| (0..=ambient).map(|j| Scalar::from_int((i == j) as i64)).collect())
            .collect();
        Self { ambient, basis }
    }

    pub fn point(p: &HPoint) -> Self {
        Self {
            ambient: p.dim(),
            basis: vec![p.coords.clone()],
        }
    }

    fn from_rows(ambient: usize, mut rows: Matrix) -> Self {
        linalg::rref(&mut rows);
        Self { ambient, basis: rows }
    }

    pub fn through(points: &[&HPoint]) -> Result<Self, ProjError> {
        let ambient = points.first().map(|p| p.dim()).ok_or(ProjError::LengthMismatch)?;
        check_dims(points.iter().map(|p| p.dim()), ambient)?;
        Ok(Self::from_rows(ambient, points.iter().map(|p| p.coords.clone()).collect()))
    }

    /// Hyperplane `{x : Σ a_i x_i = 0}` given by homogeneous coefficients.
    pub fn from_equations(ambient: usize, eqs: &[Vec<Scalar>]) -> Self {
        Self::from_rows(ambient, linalg::kernel(eqs, ambient + 1))
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> isize {
        self.basis.len() as isize - 1
    }

    pub fn basis(&self) -> &[Vec<Scalar>] {
        &self.basis
    }

    /// Linear equations cutting out the flat.
    pub fn equations(&self) -> Matrix {
        linalg::kernel(&self.basis, self.ambient + 1)
    }

    pub fn contains(&self, p: &HPoint) -> bool {
        let mut rows = self.basis.clone();
        rows.push(p.coords.clone());
        linalg::rank(&rows) == self.basis.len()
    }

    pub fn contains_flat(&self, other: &Flat) -> bool {
        let mut rows = self.basis.clone();
        rows.extend(other.basis.iter().cloned());
        linalg::rank(&rows) == self.basis.len()
    }

    pub fn as_point(&self) -> Option<HPoint> {
        (self.basis.len() == 1).then(|| HPoint::new(self.basis[0].clone()).unwrap())
    }
}

fn check_dims(dims: impl Iterator<Item = usize>, ambient: usize) -> Result<(), ProjError> {
    for d in dims {
        if d != ambient {
            return Err(ProjError::DimensionMismatch(ambient, d));
        }
    }
    Ok(())
}

/// Smallest flat containing all arguments.
pub fn join(flats: &[&Flat]) -> Result<Flat, ProjError> {
    let ambient = flats.first().map(|f| f.ambient).ok_or(ProjError::LengthMismatch)?;
    check_dims(flats.iter().map(|f| f.ambient), ambient)?;
    Ok(Flat::from_rows(
        ambient,
        flats.iter().flat_map(|f| f.basis.iter().cloned()).collect(),
    ))
}

pub fn join_points(points: &[&HPoint]) -> Result<Flat, ProjError> {
    Flat::through(points)
}

/// Intersection, computed from stacked equations.
pub fn meet(a: &Flat, b: &Flat) -> Result<Flat, ProjError> {
    meet_all(&[a, b])
}

pub fn meet_all(flats: &[&Flat]) -> Result<Flat, ProjError> {
    let ambient = flats.first().map(|f| f.ambient).ok_or(ProjError::LengthMismatch)?;
    check_dims(flats.iter().map(|f| f.ambient), ambient)?;
    let eqs: Matrix = flats.iter().flat_map(|f| f.equations()).collect();
    Ok(Flat::from_equations(ambient, &eqs))
}

/// Invertible (d+1)×(d+1) matrix acting on column vectors.
#[derive(Clone, Debug)]
pub struct ProjectiveMap {
    matrix: Matrix,
}

impl ProjectiveMap {
    pub fn new(matrix: Matrix) -> Result<Self, ProjError> {
        let n = matrix.len();
        if n == 0 || matrix.iter().any(|r| r.len() != n) {
            return Err(ProjError::LengthMismatch);
        }
        if linalg::det(&matrix).is_zero() {
            return Err(ProjError::Singular);
        }
        Ok(Self { matrix })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            matrix: Flat::whole(d).basis,
        }
    }

    /// Affine map `x ↦ A x + b`.
    pub fn affine(a: &[Vec<Scalar>], b: &[Scalar]) -> Result<Self, ProjError> {
        let d = b.len();
        let mut m: Matrix = a
            .iter()
            .zip(b)
            .map(|(row, bi)| {
                let mut r = row.clone();
                r.push(bi.clone());
                r
            })
            .collect();
        let mut last = vec![Scalar::zero(); d];
        last.push(Scalar::one());
        m.push(last);
        Self::new(m)
    }

    pub fn matrix(&self) -> &[Vec<Scalar>] {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.len() - 1
    }

    pub fn det(&self) -> Scalar {
        linalg::det(&self.matrix)
    }

    pub fn apply(&self, p: &HPoint) -> HPoint {
        HPoint::new(linalg::mat_vec(&self.matrix, &p.coords)).expect("invertible")
    }

    pub fn apply_affine(&self, x: &[Scalar]) -> Option<Vec<Scalar>> {
        self.apply(&HPoint::from_affine(x)).to_affine()
    }

    pub fn apply_flat(&self, f: &Flat) -> Flat {
        Flat::from_rows(
            f.ambient,
            f.basis.iter().map(|v| linalg::mat_vec(&self.matrix, v)).collect(),
        )
    }

    pub fn inverse(&self) -> Self {
        Self {
            matrix: linalg::inverse(&self.matrix).expect("invertible"),
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            matrix: linalg::mat_mul(&self.matrix, &other.matrix),
        }
    }

    /// Scaled so the first nonzero entry (row-major) is 1.
    pub fn normalized(&self) -> Self {
        let lead = self
            .matrix
            .iter()
            .flatten()
            .find(|c| !c.is_zero())
            .unwrap()
            .inv()
            .unwrap();
        Self {
            matrix: self
                .matrix
                .iter()
                .map(|r| r.iter().map(|c| c * &lead).collect())
                .collect(),
        }
    }

    /// Finite points stay finite.
    pub fn keeps_finite(&self, pts: &[HPoint]) -> bool {
        pts.iter().all(|p| !p.is_finite() || self.apply(p).is_finite())
    }
}

impl PartialEq for ProjectiveMap {
    fn eq(&self, other: &Self) -> bool {
        self.normalized().matrix == other.normalized().matrix
    }
}

/// Solve `M src_i = λ_i dst_i` for the matrix entries and the scales.
///
/// Returns `Ok(None)` when no invertible map exists and `Err(Ambiguous)` when
/// the solution space has more than one projective degree of freedom.
pub fn find_projective_map(src: &[HPoint], dst: &[HPoint]) -> Result<Option<ProjectiveMap>, ProjError> {
    let Some(first) = src.first() else {
        return Err(ProjError::LengthMismatch);
    };
    let d = first.dim();
    let m = d + 1;
    if src.len() != dst.len() || src.len() < d + 2 {
        return Err(ProjError::LengthMismatch);
    }
    check_dims(src.iter().chain(dst).map(|p| p.dim()), d)?;
    let n = src.len();
    let unknowns = m * m + n;
    let mut rows: Matrix = Vec::with_capacity(n * m);
    for (i, (s, t)) in src.iter().zip(dst).enumerate() {
        for r in 0..m {
            let mut row = vec![Scalar::zero(); unknowns];
            for c in 0..m {
                row[r * m + c] = s.coords[c].clone();
            }
            row[m * m + i] = -&t.coords[r];
            rows.push(row);
        }
    }
    let ker = linalg::kernel(&rows, unknowns);
    match ker.len() {
        0 => Ok(None),
        1 => {
            let v = &ker[0];
            if v[m * m..].iter().any(Scalar::is_zero) {
                return Ok(None);
            }
            let matrix: Matrix = (0..m).map(|r| v[r * m..(r + 1) * m].to_vec()).collect();
            match ProjectiveMap::new(matrix) {
                Ok(map) => Ok(Some(map)),
                Err(_) => Ok(None),
            }
        }
        _ => Err(ProjError::Ambiguous),
    }
}

/// `d+2` points, every `d+1` of them linearly independent.
pub fn is_projective_basis(pts: &[HPoint]) -> bool {
    let Some(first) = pts.first() else {
        return false;
    };
    let d = first.dim();
    if pts.len() != d + 2 || pts.iter().any(|p| p.dim() != d) {
        return false;
    }
    (0..pts.len()).all(|skip| {
        let rows: Matrix = pts
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != skip)
            .map(|(_, p)| p.coords.clone())
            .collect();
        linalg::rank(&rows) == d + 1
    })
}

/// Standard projective basis `e_1, …, e_{d+1}, (1,…,1)`.
pub fn standard_basis(d: usize) -> Vec<HPoint> {
    let mut pts: Vec<HPoint> = Flat::whole(d)
        .basis
        .into_iter()
        .map(|r| HPoint::new(r).unwrap())
        .collect();
    pts.push(HPoint::new(vec![Scalar::one(); d + 1]).unwrap());
    pts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: &[i64]) -> HPoint {
        HPoint::from_ints(x)
    }

    #[test]
    fn line_through_two_points() {
        let a = p(&[1, 0, 0]);
        let b = p(&[-1, 0, 0]);
        let l = join_points(&[&a, &b]).unwrap();
        assert_eq!(l.dim(), 1);
        assert!(l.contains(&p(&[0, 0, 0])));
        assert!(!l.contains(&p(&[0, 1, 0])));
    }

    #[test]
    fn cube_facet_diagonals_meet_at_center() {
        let d1 = join_points(&[&p(&[1, 1, 1]), &p(&[1, -1, -1])]).unwrap();
        let d2 = join_points(&[&p(&[1, 1, -1]), &p(&[1, -1, 1])]).unwrap();
        let x = meet(&d1, &d2).unwrap().as_point().unwrap();
        assert_eq!(x, p(&[1, 0, 0]));
    }

    #[test]
    fn parallel_lines_meet_at_infinity() {
        let l0 = join_points(&[&p(&[0, 0]), &p(&[0, 1])]).unwrap();
        let l1 = join_points(&[&p(&[1, 0]), &p(&[1, 1])]).unwrap();
        let x = meet(&l0, &l1).unwrap().as_point().unwrap();
        assert_eq!(x.coords(), &[Scalar::zero(), Scalar::one(), Scalar::zero()]);
        assert!(!x.is_finite());
    }

    #[test]
    fn generic_planes_meet_in_line() {
        let a = join_points(&[&p(&[0, 0, 0]), &p(&[1, 0, 0]), &p(&[0, 1, 0])]).unwrap();
        let b = join_points(&[&p(&[0, 0, 0]), &p(&[1, 0, 0]), &p(&[0, 0, 1])]).unwrap();
        assert_eq!(meet(&a, &b).unwrap().dim(), 1);
    }

    #[test]
    fn identity_from_standard_basis() {
        let b = standard_basis(3);
        let t = find_projective_map(&b, &b).unwrap().unwrap();
        assert_eq!(t, ProjectiveMap::identity(3));
    }

    #[test]
    fn skew_recovered() {
        let m: Matrix = [[2, 1, 0], [0, 1, 1], [1, 0, 3]]
            .iter()
            .map(|r| r.iter().map(|&x| Scalar::from_int(x)).collect())
            .collect();
        let t = ProjectiveMap::new(m).unwrap();
        let src = vec![p(&[0, 0]), p(&[1, 0]), p(&[1, 1]), p(&[0, 1]), HPoint::from_affine(&[Scalar::ratio(1, 2), Scalar::ratio(1, 2)])];
        let dst: Vec<HPoint> = src.iter().map(|x| t.apply(x)).collect();
        let found = find_projective_map(&src, &dst).unwrap().unwrap();
        assert_eq!(found, t);
        let mut bad = dst.clone();
        bad[4] = p(&[7, 3]);
        assert!(find_projective_map(&src, &bad).unwrap().is_none());
    }

    #[test]
    fn degenerate_source_is_ambiguous() {
        let src = vec![p(&[0, 0]), p(&[1, 0]), p(&[2, 0]), p(&[3, 0])];
        assert_eq!(find_projective_map(&src, &src).unwrap_err(), ProjError::Ambiguous);
    }

    #[test]
    fn projective_bases() {
        let w = vec![p(&[1, 1, 1]), p(&[1, -1, -1]), p(&[-1, 1, -1]), p(&[-1, -1, 1]), p(&[0, 0, 0])];
        assert!(is_projective_basis(&w));
        let flat = vec![p(&[0, 0, 0]), p(&[1, 0, 0]), p(&[0, 1, 0]), p(&[1, 1, 0]), p(&[0, 0, 1])];
        assert!(!is_projective_basis(&flat));
        let simplex = vec![
            p(&[0, 0, 0]),
            p(&[1, 0, 0]),
            p(&[0, 1, 0]),
            p(&[0, 0, 1]),
            HPoint::from_affine(&[Scalar::ratio(1, 4), Scalar::ratio(1, 4), Scalar::ratio(1, 4)]),
        ];
        assert!(is_projective_basis(&simplex));
    }
}
