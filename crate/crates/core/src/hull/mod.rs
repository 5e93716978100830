//! Exact convex hulls and polytope combinatorics.

use std::collections::{BTreeMap, BTreeSet};

use crate::config::PointConfiguration;
use crate::exact::Scalar;
use crate::linalg::{self, Matrix};
use crate::projgeom::Flat;

pub mod shapes;
mod sum;

pub use sum::{
    connected_sum, kstacked_generator, stacked_generator, GlueStep, StackedRecipe, SumError,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HullError {
    #[error("apex lies in the affine span of the base")]
    ApexInSpan,
    #[error("unknown vertex label {0:?}")]
    UnknownLabel(String),
    #[error("flat is not a hyperplane")]
    NotHyperplane,
    #[error("dimension mismatch")]
    Dimension,
}

/// Affine halfspace `normal · x ≤ offset`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Halfspace {
    pub normal: Vec<Scalar>,
    pub offset: Scalar,
}

impl Halfspace {
    /// `normal · x − offset`: negative inside, zero on the boundary.
    pub fn eval(&self, x: &[Scalar]) -> Scalar {
        linalg::dot(&self.normal, x) - &self.offset
    }

    pub fn side(&self, x: &[Scalar]) -> i8 {
        self.eval(x).sign()
    }

    /// Affine hyperplane of a projective flat of codimension one.
    pub fn from_flat(h: &Flat) -> Result<Self, HullError> {
        let eqs = h.equations();
        if eqs.len() != 1 {
            return Err(HullError::NotHyperplane);
        }
        let e = &eqs[0];
        let d = h.ambient();
        let normal = e[..d].to_vec();
        if normal.iter().all(Scalar::is_zero) {
            // hyperplane at infinity
            return Err(HullError::NotHyperplane);
        }
        Ok(Self {
            normal,
            offset: -&e[d],
        })
    }

    pub fn to_flat(&self) -> Flat {
        let mut e = self.normal.clone();
        e.push(-&self.offset);
        Flat::from_equations(self.normal.len(), &[e])
    }

    fn normalized(mut self) -> Self {
        let lead = self.normal.iter().find(|c| !c.is_zero()).unwrap().abs();
        let inv = lead.inv().unwrap();
        self.normal = linalg::scale(&self.normal, &inv);
        self.offset = &self.offset * &inv;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Facet {
    pub halfspace: Halfspace,
    pub vertices: BTreeSet<String>,
}

/// Convex polytope in V- and H-representation with labeled vertices.
///
/// Lower-dimensional polytopes carry the equations of their affine hull;
/// their facets are the relative facets, with some lifted normal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polytope {
    ambient: usize,
    dim: isize,
    vertices: BTreeMap<String, Vec<Scalar>>,
    facets: Vec<Facet>,
    equations: Vec<Halfspace>,
    enumerated: bool,
}

struct RawFacet {
    hs: Halfspace,
    inc: Vec<usize>,
    approx: Option<(Vec<f64>, f64)>,
}

impl RawFacet {
    fn new(hs: Halfspace, inc: Vec<usize>) -> Self {
        let approx = approx_vec(&hs.normal).zip(approx_scalar(&hs.offset));
        Self { hs, inc, approx }
    }

    fn side(&self, x: &[Scalar], xf: Option<&[f64]>) -> i8 {
        filtered_side(&self.hs, self.approx.as_ref(), x, xf)
    }
}

/// Exact side of `x`, decided in floating point when the error bound allows.
fn filtered_side(hs: &Halfspace, approx: Option<&(Vec<f64>, f64)>, x: &[Scalar], xf: Option<&[f64]>) -> i8 {
    if let (Some((n, c)), Some(xf)) = (approx, xf) {
        let mut v = -c;
        let mut mag = c.abs();
        for (a, b) in n.iter().zip(xf) {
            v += a * b;
            mag += (a * b).abs();
        }
        if v.abs() > 1e-9 * mag && v.is_finite() {
            return if v > 0.0 { 1 } else { -1 };
        }
    }
    hs.side(x)
}

/// A halfspace with a cached floating-point copy for fast exact side tests.
#[derive(Debug, Clone)]
pub struct FilteredHalfspace {
    pub halfspace: Halfspace,
    approx: Option<(Vec<f64>, f64)>,
}

impl FilteredHalfspace {
    pub fn new(halfspace: Halfspace) -> Self {
        let approx = approx_vec(&halfspace.normal).zip(approx_scalar(&halfspace.offset));
        Self { halfspace, approx }
    }

    /// Same result as `Halfspace::side`; `xf` should come from `approx_point(x)`.
    pub fn side(&self, x: &[Scalar], xf: Option<&[f64]>) -> i8 {
        filtered_side(&self.halfspace, self.approx.as_ref(), x, xf)
    }
}

/// Floating-point copy of a rational point, if every coordinate is rational.
pub fn approx_point(x: &[Scalar]) -> Option<Vec<f64>> {
    approx_vec(x)
}

fn approx_scalar(s: &Scalar) -> Option<f64> {
    use num_traits::ToPrimitive;
    s.as_rational().and_then(|r| r.to_f64()).filter(|v| v.is_finite())
}

fn approx_vec(x: &[Scalar]) -> Option<Vec<f64>> {
    x.iter().map(approx_scalar).collect()
}

fn sorted_intersection(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Greedy maximal affinely independent subset of `idx`.
fn independent_subset(pts: &[Vec<Scalar>], idx: &[usize], want: usize) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    let mut rows: Matrix = Vec::new();
    for &i in idx {
        if chosen.is_empty() {
            chosen.push(i);
        } else {
            let mut trial = rows.clone();
            trial.push(linalg::sub(&pts[i], &pts[chosen[0]]));
            if linalg::rank(&trial) == trial.len() {
                rows = trial;
                chosen.push(i);
            }
        }
        if chosen.len() == want {
            break;
        }
    }
    chosen
}

/// Hyperplane through `k` affinely independent points in R^k, oriented to
/// keep `interior` strictly inside.
fn hyperplane_through(pts: &[&[Scalar]], interior: &[Scalar]) -> Halfspace {
    let k = interior.len();
    let diffs: Matrix = pts[1..].iter().map(|p| linalg::sub(p, pts[0])).collect();
    let ker = linalg::kernel(&diffs, k);
    debug_assert_eq!(ker.len(), 1);
    let mut normal = ker.into_iter().next().unwrap();
    let mut offset = linalg::dot(&normal, pts[0]);
    if linalg::dot(&normal, interior) > offset {
        normal = normal.iter().map(|c| -c).collect();
        offset = -offset;
    }
    Halfspace { normal, offset }.normalized()
}

/// Beneath-beyond hull of full-dimensional points in R^k, k ≥ 1.
/// Returns vertex indices and facets (incidences restricted to vertices).
fn hull_full(pts: &[Vec<Scalar>]) -> (Vec<usize>, Vec<RawFacet>) {
    let k = pts[0].len();
    let n = pts.len();
    if k == 1 {
        let (mut lo, mut hi) = (0, 0);
        for i in 1..n {
            if pts[i][0] < pts[lo][0] {
                lo = i;
            }
            if pts[i][0] > pts[hi][0] {
                hi = i;
            }
        }
        let f = |sign: i64, i: usize| {
            RawFacet::new(
                Halfspace {
                    normal: vec![Scalar::from_int(sign)],
                    offset: &pts[i][0] * Scalar::from_int(sign),
                },
                vec![i],
            )
        };
        let mut v = vec![lo, hi];
        v.sort();
        return (v, vec![f(-1, lo), f(1, hi)]);
    }
    let all: Vec<usize> = (0..n).collect();
    let simplex = independent_subset(pts, &all, k + 1);
    assert_eq!(simplex.len(), k + 1, "points must be full-dimensional");
    let srefs: Vec<&[Scalar]> = simplex.iter().map(|&i| pts[i].as_slice()).collect();
    let interior = linalg::centroid(&srefs);
    let mut facets: Vec<RawFacet> = (0..=k)
        .map(|skip| {
            let mut inc: Vec<usize> = simplex
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != skip)
                .map(|(_, &i)| i)
                .collect();
            let refs: Vec<&[Scalar]> = inc.iter().map(|&i| pts[i].as_slice()).collect();
            let hs = hyperplane_through(&refs, &interior);
            inc.sort();
            RawFacet::new(hs, inc)
        })
        .collect();
    let approx: Vec<Option<Vec<f64>>> = pts.iter().map(|p| approx_vec(p)).collect();
    let in_simplex: BTreeSet<usize> = simplex.iter().copied().collect();
    for p in 0..n {
        if in_simplex.contains(&p) {
            continue;
        }
        let x = &pts[p];
        let sides: Vec<i8> = facets.iter().map(|f| f.side(x, approx[p].as_deref())).collect();
        if sides.iter().all(|&s| s <= 0) {
            for (f, &s) in facets.iter_mut().zip(&sides) {
                if s == 0 {
                    f.inc.push(p);
                    f.inc.sort();
                }
            }
            continue;
        }
        let mut fresh: BTreeMap<(Vec<Scalar>, Scalar), BTreeSet<usize>> = BTreeMap::new();
        for (fi, f) in facets.iter().enumerate() {
            if sides[fi] <= 0 {
                continue;
            }
            for (gi, g) in facets.iter().enumerate() {
                if sides[gi] > 0 {
                    continue;
                }
                let shared = sorted_intersection(&f.inc, &g.inc);
                if shared.len() + 1 < k {
                    continue;
                }
                let basis = independent_subset(pts, &shared, k - 1);
                if basis.len() != k - 1 {
                    continue;
                }
                if sides[gi] == 0 {
                    // g absorbs p below
                    continue;
                }
                let mut refs: Vec<&[Scalar]> = basis.iter().map(|&i| pts[i].as_slice()).collect();
                refs.push(x);
                let hs = hyperplane_through(&refs, &interior);
                let e = fresh.entry((hs.normal, hs.offset)).or_default();
                e.extend(shared);
                e.insert(p);
            }
        }
        for (gi, f) in facets.iter_mut().enumerate() {
            if sides[gi] == 0 {
                f.inc.push(p);
                f.inc.sort();
            }
        }
        facets = facets
            .into_iter()
            .zip(&sides)
            .filter(|(_, &s)| s <= 0)
            .map(|(f, _)| f)
            .collect();
        for ((normal, offset), inc) in fresh {
            facets.push(RawFacet::new(Halfspace { normal, offset }, inc.into_iter().collect()));
        }
    }
    // vertices: points whose incident facet normals span R^k
    let mut incident: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (fi, f) in facets.iter().enumerate() {
        for &i in &f.inc {
            incident.entry(i).or_default().push(fi);
        }
    }
    let vertices: Vec<usize> = incident
        .iter()
        .filter(|(_, fs)| {
            fs.len() >= k && {
                let normals: Matrix = fs.iter().map(|&fi| facets[fi].hs.normal.clone()).collect();
                linalg::rank(&normals) == k
            }
        })
        .map(|(&i, _)| i)
        .collect();
    let vset: BTreeSet<usize> = vertices.iter().copied().collect();
    for f in &mut facets {
        f.inc.retain(|i| vset.contains(i));
    }
    (vertices, facets)
}

/// Convex hull of a labeled point set.
pub fn convex_hull(c: &PointConfiguration) -> Polytope {
    hull_of(c.dim(), c.iter().map(|(l, x)| (l.to_string(), x.to_vec())).collect())
}

/// Convex hull of labeled points (duplicates keep the first label).
pub fn hull_of(ambient: usize, points: Vec<(String, Vec<Scalar>)>) -> Polytope {
    let mut seen: BTreeSet<Vec<Scalar>> = BTreeSet::new();
    let mut labels = Vec::new();
    let mut pts: Vec<Vec<Scalar>> = Vec::new();
    let mut sorted = points;
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    for (l, x) in sorted {
        if seen.insert(x.clone()) {
            labels.push(l);
            pts.push(x);
        }
    }
    if pts.is_empty() {
        return Polytope::empty(ambient);
    }
    // affine hull and a coordinate projection injective on it
    let diffs: Matrix = pts[1..].iter().map(|p| linalg::sub(p, &pts[0])).collect();
    let mut red = diffs.clone();
    let pivots = linalg::rref(&mut red);
    let k = pivots.len();
    let equations: Vec<Halfspace> = linalg::kernel(&diffs, ambient)
        .into_iter()
        .map(|e| {
            let offset = linalg::dot(&e, &pts[0]);
            Halfspace { normal: e, offset }.normalized()
        })
        .collect();
    if k == 0 {
        return Polytope {
            ambient,
            dim: 0,
            vertices: [(labels[0].clone(), pts[0].clone())].into_iter().collect(),
            facets: Vec::new(),
            equations,
            enumerated: true,
        };
    }
    let proj: Vec<Vec<Scalar>> = pts
        .iter()
        .map(|p| pivots.iter().map(|&c| p[c].clone()).collect())
        .collect();
    let (vidx, raw) = hull_full(&proj);
    let lift = |hs: &Halfspace| {
        let mut normal = vec![Scalar::zero(); ambient];
        for (j, &c) in pivots.iter().enumerate() {
            normal[c] = hs.normal[j].clone();
        }
        Halfspace {
            normal,
            offset: hs.offset.clone(),
        }
    };
    let mut facets: Vec<Facet> = raw
        .iter()
        .map(|f| Facet {
            halfspace: lift(&f.hs),
            vertices: f.inc.iter().map(|&i| labels[i].clone()).collect(),
        })
        .collect();
    facets.sort_by(|a, b| a.vertices.cmp(&b.vertices));
    Polytope {
        ambient,
        dim: k as isize,
        vertices: vidx.iter().map(|&i| (labels[i].clone(), pts[i].clone())).collect(),
        facets,
        equations,
        enumerated: true,
    }
}

impl Polytope {
    pub fn empty(ambient: usize) -> Self {
        Self {
            ambient,
            dim: -1,
            vertices: BTreeMap::new(),
            facets: Vec::new(),
            equations: Vec::new(),
            enumerated: true,
        }
    }

    /// Vertex coordinates without facet enumeration. The caller vouches that
    /// every point is a vertex and that `dim` is the dimension.
    pub fn coordinates_only(ambient: usize, dim: isize, vertices: BTreeMap<String, Vec<Scalar>>) -> Self {
        Self {
            ambient,
            dim,
            vertices,
            facets: Vec::new(),
            equations: Vec::new(),
            enumerated: false,
        }
    }

    /// False for [`Polytope::coordinates_only`] results, whose facet list is empty.
    pub fn is_enumerated(&self) -> bool {
        self.enumerated
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> isize {
        self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn facet_count(&self) -> usize {
        self.facets.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = (&str, &[Scalar])> {
        self.vertices.iter().map(|(l, x)| (l.as_str(), x.as_slice()))
    }

    pub fn vertex_map(&self) -> &BTreeMap<String, Vec<Scalar>> {
        &self.vertices
    }

    pub fn vertex(&self, label: &str) -> Option<&[Scalar]> {
        self.vertices.get(label).map(Vec::as_slice)
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.vertices.keys().map(String::as_str)
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn equations(&self) -> &[Halfspace] {
        &self.equations
    }

    pub fn to_config(&self) -> PointConfiguration {
        let mut c = PointConfiguration::new(self.ambient);
        for (l, x) in self.vertices() {
            c.insert(l, x.to_vec()).unwrap();
        }
        c
    }

    /// Closed membership test.
    pub fn contains(&self, x: &[Scalar]) -> bool {
        if self.is_empty() {
            return false;
        }
        if self.dim == 0 {
            return self.vertices.values().next().unwrap() == x;
        }
        self.equations.iter().all(|e| e.side(x) == 0) && self.facets.iter().all(|f| f.halfspace.side(x) <= 0)
    }

    /// Strict interior relative to the affine hull.
    pub fn contains_relative_interior(&self, x: &[Scalar]) -> bool {
        self.dim > 0
            && self.equations.iter().all(|e| e.side(x) == 0)
            && self.facets.iter().all(|f| f.halfspace.side(x) < 0)
    }

    pub fn centroid(&self) -> Vec<Scalar> {
        let refs: Vec<&[Scalar]> = self.vertices.values().map(Vec::as_slice).collect();
        linalg::centroid(&refs)
    }

    /// Facet whose vertex set is exactly `labels`.
    pub fn facet_with(&self, labels: &BTreeSet<String>) -> Option<usize> {
        self.facets.iter().position(|f| &f.vertices == labels)
    }

    /// Vertex pairs spanning edges.
    pub fn edges(&self) -> Vec<(String, String)> {
        if self.dim < 1 {
            return Vec::new();
        }
        if self.dim == 1 {
            let v: Vec<&String> = self.vertices.keys().collect();
            return vec![(v[0].clone(), v[1].clone())];
        }
        let labels: Vec<&String> = self.vertices.keys().collect();
        let mut incid: BTreeMap<&str, BTreeSet<usize>> = BTreeMap::new();
        for (fi, f) in self.facets.iter().enumerate() {
            for l in &f.vertices {
                incid.entry(l.as_str()).or_default().insert(fi);
            }
        }
        let need = self.dim as usize - 1;
        let mut out = Vec::new();
        for i in 0..labels.len() {
            for j in i + 1..labels.len() {
                let common: Vec<usize> = incid[labels[i].as_str()]
                    .intersection(&incid[labels[j].as_str()])
                    .copied()
                    .collect();
                if common.len() < need {
                    continue;
                }
                // the common facets cut out a face; it is an edge iff it holds no third vertex
                let mut face: Option<BTreeSet<&String>> = None;
                for &fi in &common {
                    let s: BTreeSet<&String> = self.facets[fi].vertices.iter().collect();
                    face = Some(match face {
                        None => s,
                        Some(f) => f.intersection(&s).copied().collect(),
                    });
                }
                if face.map_or(0, |f| f.len()) == 2 {
                    out.push((labels[i].clone(), labels[j].clone()));
                }
            }
        }
        out
    }

    /// `(f_0, f_1, …, f_{dim−1})`.
    pub fn f_vector(&self) -> Vec<usize> {
        face_lattice(self).f_vector()
    }

    /// Copy in R^{ambient+extra}, new coordinates zero.
    pub fn lifted(&self, extra: usize) -> Polytope {
        let pts = self
            .vertices
            .iter()
            .map(|(l, x)| {
                let mut y = x.clone();
                y.extend(std::iter::repeat_n(Scalar::zero(), extra));
                (l.clone(), y)
            })
            .collect();
        hull_of(self.ambient + extra, pts)
    }

    /// Relabel vertices.
    pub fn relabeled(&self, f: impl Fn(&str) -> String) -> Polytope {
        let map = |s: &BTreeSet<String>| s.iter().map(|l| f(l)).collect();
        Polytope {
            ambient: self.ambient,
            dim: self.dim,
            vertices: self.vertices.iter().map(|(l, x)| (f(l), x.clone())).collect(),
            facets: self
                .facets
                .iter()
                .map(|fc| Facet {
                    halfspace: fc.halfspace.clone(),
                    vertices: map(&fc.vertices),
                })
                .collect(),
            equations: self.equations.clone(),
            enumerated: self.enumerated,
        }
    }

    /// Whether `labels` is the vertex set of a face, witnessed by `h`: every
    /// listed vertex on `h`, every other vertex strictly on one common side.
    pub fn is_face_with(&self, labels: &BTreeSet<String>, h: &Halfspace) -> bool {
        verify_face_points(self.vertices(), labels, h)
    }
}

/// Face check on bare labeled points.
pub fn verify_face_points<'a>(
    points: impl Iterator<Item = (&'a str, &'a [Scalar])>,
    labels: &BTreeSet<String>,
    h: &Halfspace,
) -> bool {
    let mut side = 0i8;
    let mut seen = 0;
    for (l, x) in points {
        let s = h.side(x);
        if labels.contains(l) {
            if s != 0 {
                return false;
            }
            seen += 1;
        } else {
            if s == 0 || (side != 0 && s != side) {
                return false;
            }
            side = s;
        }
    }
    seen == labels.len()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Face {
    pub vertices: BTreeSet<String>,
    pub dim: isize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaceLattice {
    pub faces: Vec<Face>,
    pub polytope_dim: isize,
}

impl FaceLattice {
    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn f_vector(&self) -> Vec<usize> {
        let top = self.polytope_dim.max(0) as usize;
        let mut f = vec![0; top];
        for face in &self.faces {
            if face.dim >= 0 && face.dim < self.polytope_dim {
                f[face.dim as usize] += 1;
            }
        }
        f
    }
}

/// All faces as vertex sets, from the facets by closing under intersection.
pub fn face_lattice(p: &Polytope) -> FaceLattice {
    let mut set: BTreeSet<BTreeSet<String>> = BTreeSet::new();
    let all: BTreeSet<String> = p.vertices.keys().cloned().collect();
    set.insert(all.clone());
    if p.dim >= 0 {
        set.insert(BTreeSet::new());
    }
    let facets: Vec<&BTreeSet<String>> = p.facets.iter().map(|f| &f.vertices).collect();
    let mut queue: Vec<BTreeSet<String>> = Vec::new();
    for f in &facets {
        if set.insert((*f).clone()) {
            queue.push((*f).clone());
        }
    }
    while let Some(face) = queue.pop() {
        for f in &facets {
            let g: BTreeSet<String> = face.intersection(f).cloned().collect();
            if set.insert(g.clone()) {
                queue.push(g);
            }
        }
    }
    let faces = set
        .into_iter()
        .map(|vs| {
            let pts: Vec<&[Scalar]> = vs.iter().map(|l| p.vertices[l].as_slice()).collect();
            let dim = linalg::affine_rank(&pts);
            Face { vertices: vs, dim }
        })
        .collect();
    FaceLattice {
        faces,
        polytope_dim: p.dim,
    }
}

/// Vertex bijection preserving the vertex-facet incidences, if any.
pub fn combinatorially_equivalent(a: &Polytope, b: &Polytope) -> Option<BTreeMap<String, String>> {
    if a.dim != b.dim || a.vertex_count() != b.vertex_count() || a.facet_count() != b.facet_count() {
        return None;
    }
    let la: Vec<&String> = a.vertices.keys().collect();
    let lb: Vec<&String> = b.vertices.keys().collect();
    let inc = |p: &Polytope, labels: &[&String]| -> Vec<BTreeSet<usize>> {
        labels
            .iter()
            .map(|l| {
                p.facets
                    .iter()
                    .enumerate()
                    .filter(|(_, f)| f.vertices.contains(*l))
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect()
    };
    let ia = inc(a, &la);
    let ib = inc(b, &lb);
    let n = la.len();
    let common = |inc: &[BTreeSet<usize>], i: usize, j: usize| inc[i].intersection(&inc[j]).count();
    let fa: BTreeSet<BTreeSet<usize>> = a
        .facets
        .iter()
        .map(|f| f.vertices.iter().map(|l| la.iter().position(|m| *m == l).unwrap()).collect())
        .collect();
    let fb: BTreeSet<BTreeSet<usize>> = b
        .facets
        .iter()
        .map(|f| f.vertices.iter().map(|l| lb.iter().position(|m| *m == l).unwrap()).collect())
        .collect();

    fn search(
        i: usize,
        n: usize,
        assign: &mut Vec<usize>,
        used: &mut Vec<bool>,
        ok: &dyn Fn(&[usize], usize, usize) -> bool,
        done: &dyn Fn(&[usize]) -> bool,
    ) -> bool {
        if i == n {
            return done(assign);
        }
        for j in 0..n {
            if used[j] || !ok(assign, i, j) {
                continue;
            }
            used[j] = true;
            assign.push(j);
            if search(i + 1, n, assign, used, ok, done) {
                return true;
            }
            assign.pop();
            used[j] = false;
        }
        false
    }
    let ok = |assign: &[usize], i: usize, j: usize| {
        ia[i].len() == ib[j].len()
            && (0..assign.len()).all(|w| common(&ia, i, w) == common(&ib, j, assign[w]))
    };
    let done = |assign: &[usize]| {
        let mapped: BTreeSet<BTreeSet<usize>> = fa
            .iter()
            .map(|f| f.iter().map(|&i| assign[i]).collect())
            .collect();
        mapped == fb
    };
    let mut assign = Vec::new();
    let mut used = vec![false; n];
    if search(0, n, &mut assign, &mut used, &ok, &done) {
        Some(
            assign
                .iter()
                .enumerate()
                .map(|(i, &j)| (la[i].clone(), lb[j].clone()))
                .collect(),
        )
    } else {
        None
    }
}

/// conv(P ∪ {apex}).
pub fn pyramid(p: &Polytope, apex_label: &str, apex: &[Scalar]) -> Result<Polytope, HullError> {
    if apex.len() != p.ambient {
        return Err(HullError::Dimension);
    }
    if p.equations.iter().all(|e| e.side(apex) == 0) {
        return Err(HullError::ApexInSpan);
    }
    let mut pts: Vec<(String, Vec<Scalar>)> = p.vertices.iter().map(|(l, x)| (l.clone(), x.clone())).collect();
    pts.push((apex_label.to_string(), apex.to_vec()));
    Ok(hull_of(p.ambient, pts))
}

pub fn subpolytope<'a>(p: &Polytope, keep: impl IntoIterator<Item = &'a str>) -> Result<Polytope, HullError> {
    let pts = keep
        .into_iter()
        .map(|l| {
            p.vertex(l)
                .map(|x| (l.to_string(), x.to_vec()))
                .ok_or_else(|| HullError::UnknownLabel(l.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(hull_of(p.ambient, pts))
}

/// `P ∩ H` for an affine hyperplane. Vertices are the vertices of P on H and
/// the crossing points of vertex pairs on opposite sides (non-edges give
/// interior points that the hull discards).
pub fn hyperplane_section(p: &Polytope, h: &Halfspace) -> Polytope {
    let vs: Vec<(&String, &Vec<Scalar>, Scalar)> = p
        .vertices
        .iter()
        .map(|(l, x)| (l, x, h.eval(x)))
        .collect();
    let mut pts = Vec::new();
    for (l, x, v) in &vs {
        if v.is_zero() {
            pts.push(((*l).clone(), (*x).clone()));
        }
    }
    let edges: BTreeSet<(String, String)> = p.edges().into_iter().collect();
    for (i, (la, xa, va)) in vs.iter().enumerate() {
        for (lb, xb, vb) in &vs[i + 1..] {
            if va.sign() * vb.sign() >= 0 {
                continue;
            }
            if p.dim >= 2 && !edges.contains(&((*la).clone(), (*lb).clone())) {
                continue;
            }
            // x = xa + t (xb − xa), t = va / (va − vb)
            let t = va / &(va - vb);
            let x = linalg::add(xa, &linalg::scale(&linalg::sub(xb, xa), &t));
            pts.push((format!("cut:{la}|{lb}"), x));
        }
    }
    hull_of(p.ambient, pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::qd;

    fn pts(v: &[&[i64]]) -> Vec<(String, Vec<Scalar>)> {
        v.iter()
            .enumerate()
            .map(|(i, x)| (format!("p{i}"), x.iter().map(|&c| Scalar::from_int(c)).collect()))
            .collect()
    }

    pub(crate) fn cube() -> Polytope {
        let c = qd(3);
        let corners: Vec<(String, Vec<Scalar>)> = c
            .iter()
            .filter(|(_, x)| x.iter().all(|v| !v.is_zero()))
            .map(|(l, x)| (l.to_string(), x.to_vec()))
            .collect();
        hull_of(3, corners)
    }

    #[test]
    fn cube_f_vector() {
        let p = cube();
        assert_eq!(p.f_vector(), vec![8, 12, 6]);
        assert_eq!(face_lattice(&p).len(), 28);
    }

    #[test]
    fn lattice_points_reduce_to_cube() {
        let p = convex_hull(&qd(3));
        assert_eq!(p.vertex_count(), 8);
        assert_eq!(p.facet_count(), 6);
        assert!(p.facets().iter().all(|f| f.vertices.len() == 4));
    }

    #[test]
    fn planar_square_in_space() {
        let p = hull_of(3, pts(&[&[0, 0, 1], &[1, 0, 1], &[1, 1, 1], &[0, 1, 1]]));
        assert_eq!(p.dim(), 2);
        assert_eq!(p.facet_count(), 4);
        assert!(p.contains(&[Scalar::ratio(1, 2), Scalar::ratio(1, 3), Scalar::one()]));
        assert!(!p.contains(&[Scalar::ratio(1, 2), Scalar::ratio(1, 3), Scalar::zero()]));
    }

    #[test]
    fn simplex_lattice_is_boolean() {
        let p = hull_of(3, pts(&[&[0, 0, 0], &[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]));
        assert_eq!(face_lattice(&p).len(), 16);
    }

    #[test]
    fn square_pyramid_has_twenty_faces() {
        let p = hull_of(3, pts(&[&[0, 0, 0], &[2, 0, 0], &[2, 2, 0], &[0, 2, 0], &[1, 1, 1]]));
        assert_eq!(p.f_vector(), vec![5, 8, 5]);
        // 5 + 8 + 5 proper faces, plus the empty face and P itself
        assert_eq!(face_lattice(&p).len(), 20);
    }

    #[test]
    fn equivalences() {
        let c = cube();
        let skew = hull_of(
            3,
            c.vertices()
                .map(|(l, x)| {
                    let y = vec![&x[0] + &x[1] * Scalar::ratio(1, 2), x[1].clone(), &x[2] + &x[0]];
                    (l.to_string(), y)
                })
                .collect(),
        );
        assert!(combinatorially_equivalent(&c, &skew).is_some());
        let oct = hull_of(3, pts(&[&[1, 0, 0], &[-1, 0, 0], &[0, 1, 0], &[0, -1, 0], &[0, 0, 1], &[0, 0, -1]]));
        assert!(combinatorially_equivalent(&c, &oct).is_none());
        let tet = hull_of(3, pts(&[&[0, 0, 0], &[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]));
        let sq = hull_of(3, pts(&[&[0, 0, 0], &[2, 0, 0], &[2, 2, 0], &[0, 2, 0], &[1, 1, 1]]));
        assert!(combinatorially_equivalent(&tet, &sq).is_none());
    }

    #[test]
    fn pyramids() {
        let sq = hull_of(3, pts(&[&[0, 0, 0], &[2, 0, 0], &[2, 2, 0], &[0, 2, 0]]));
        let apex = [Scalar::one(), Scalar::one(), Scalar::one()];
        let p = pyramid(&sq, "apex", &apex).unwrap();
        assert_eq!(p.facet_count(), 5);
        let base: BTreeSet<String> = sq.labels().map(str::to_string).collect();
        assert!(p.facet_with(&base).is_some());
        assert_eq!(pyramid(&sq, "x", &[Scalar::one(), Scalar::one(), Scalar::zero()]), Err(HullError::ApexInSpan));
    }

    #[test]
    fn cube_minus_vertex() {
        let c = cube();
        let keep: Vec<&str> = c.labels().filter(|l| *l != "qd:(1,1,1)").collect();
        let p = subpolytope(&c, keep).unwrap();
        assert_eq!(p.vertex_count(), 7);
        assert_eq!(p.facet_count(), 7);
    }

    #[test]
    fn sections() {
        let c = cube();
        let h = Halfspace {
            normal: vec![Scalar::zero(), Scalar::zero(), Scalar::one()],
            offset: Scalar::zero(),
        };
        let s = hyperplane_section(&c, &h);
        assert_eq!((s.dim(), s.vertex_count()), (2, 4));
        let tet = hull_of(3, pts(&[&[0, 0, 0], &[1, 0, 0], &[0, 1, 1], &[0, 0, 1]]));
        let mid = Halfspace {
            normal: vec![Scalar::zero(), Scalar::zero(), Scalar::one()],
            offset: Scalar::ratio(1, 2),
        };
        let q = hyperplane_section(&tet, &mid);
        assert_eq!(q.vertex_count(), 4);
        let far = Halfspace {
            normal: vec![Scalar::zero(), Scalar::zero(), Scalar::one()],
            offset: Scalar::from_int(5),
        };
        assert!(hyperplane_section(&tet, &far).is_empty());
    }
}
