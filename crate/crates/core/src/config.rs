//! Labeled point configurations.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::exact::Scalar;
use crate::linalg;
use crate::projgeom::HPoint;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("label {0:?} is used for two different points")]
    LabelClash(String),
    #[error("glued labels {0:?} and {1:?} name different points")]
    GlueMismatch(String, String),
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("coordinate {0} must be positive")]
    NonPositive(usize),
    #[error("{0}")]
    Invalid(String),
}

/// Display role of a point, used for rendering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Input,
    Grid,
    Aux,
    Output,
    Vertex,
    Free,
}

/// Finite set of distinct labeled points in R^d.
///
/// Points added under a new label at coordinates already present are recorded
/// as aliases of the existing label, so the point set stays duplicate free.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointConfiguration {
    dim: usize,
    points: BTreeMap<String, Vec<Scalar>>,
    aliases: BTreeMap<String, String>,
    index: BTreeMap<Vec<Scalar>, String>,
    roles: BTreeMap<String, Role>,
}

pub fn coord_label(prefix: &str, v: &[i64]) -> String {
    let parts: Vec<String> = v.iter().map(i64::to_string).collect();
    format!("{prefix}:({})", parts.join(","))
}

fn ints(v: &[i64]) -> Vec<Scalar> {
    v.iter().map(|&x| Scalar::from_int(x)).collect()
}

/// All vectors in `{lo..=hi}^d`, lexicographic.
pub(crate) fn lattice(d: usize, lo: i64, hi: i64) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|v| {
                (lo..=hi).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

impl PointConfiguration {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            points: BTreeMap::new(),
            aliases: BTreeMap::new(),
            index: BTreeMap::new(),
            roles: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Insert a point. Returns the label the point ends up under (an existing
    /// label when the coordinates were already present).
    pub fn insert(&mut self, label: impl Into<String>, x: Vec<Scalar>) -> Result<String, ConfigError> {
        let label = label.into();
        if x.len() != self.dim {
            return Err(ConfigError::Dimension {
                expected: self.dim,
                got: x.len(),
            });
        }
        if let Some(existing) = self.get(&label) {
            return if existing == &x[..] {
                Ok(self.resolve(&label).unwrap().to_string())
            } else {
                Err(ConfigError::LabelClash(label))
            };
        }
        if let Some(owner) = self.index.get(&x) {
            let owner = owner.clone();
            self.aliases.insert(label, owner.clone());
            return Ok(owner);
        }
        self.index.insert(x.clone(), label.clone());
        self.points.insert(label.clone(), x);
        Ok(label)
    }

    pub fn insert_with_role(
        &mut self,
        label: impl Into<String>,
        x: Vec<Scalar>,
        role: Role,
    ) -> Result<String, ConfigError> {
        let label = label.into();
        let l = self.insert(label.clone(), x)?;
        self.roles.entry(label).or_insert(role);
        Ok(l)
    }

    /// Roles belong to labels, so an alias may carry a role of its own.
    pub fn set_role(&mut self, label: &str, role: Role) {
        if self.contains_label(label) {
            self.roles.insert(label.to_string(), role);
        }
    }

    pub fn role(&self, label: &str) -> Option<Role> {
        self.roles
            .get(label)
            .or_else(|| self.resolve(label).and_then(|l| self.roles.get(l)))
            .copied()
    }

    pub fn roles(&self) -> &BTreeMap<String, Role> {
        &self.roles
    }

    /// Canonical label for `label` (itself or the label it aliases).
    pub fn resolve<'a>(&'a self, label: &'a str) -> Option<&'a str> {
        if let Some((k, _)) = self.points.get_key_value(label) {
            return Some(k.as_str());
        }
        self.aliases.get(label).map(String::as_str)
    }

    pub fn get(&self, label: &str) -> Option<&[Scalar]> {
        self.resolve(label)
            .and_then(|l| self.points.get(l))
            .map(Vec::as_slice)
    }

    pub fn contains_label(&self, label: &str) -> bool {
        self.resolve(label).is_some()
    }

    pub fn label_of(&self, x: &[Scalar]) -> Option<&str> {
        self.index.get(x).map(String::as_str)
    }

    pub fn contains_point(&self, x: &[Scalar]) -> bool {
        self.index.contains_key(x)
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.points.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[Scalar])> {
        self.points.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn aliases(&self) -> &BTreeMap<String, String> {
        &self.aliases
    }

    pub fn hpoint(&self, label: &str) -> Option<HPoint> {
        self.get(label).map(HPoint::from_affine)
    }

    /// Image under an arbitrary coordinate map; labels and aliases kept.
    pub fn map_points(&self, dim: usize, f: impl Fn(&[Scalar]) -> Vec<Scalar>) -> Result<Self, ConfigError> {
        let mut out = Self::new(dim);
        for (l, x) in self.iter() {
            out.insert(l, f(x))?;
        }
        for (a, l) in &self.aliases {
            let owner = out.resolve(l).unwrap().to_string();
            out.aliases.insert(a.clone(), owner);
        }
        out.roles = self.roles.clone();
        Ok(out)
    }

    pub fn translate(&self, v: &[Scalar]) -> Self {
        self.map_points(self.dim, |x| linalg::add(x, v)).expect("translation is injective")
    }

    /// Coordinatewise scaling `x ↦ D x`.
    pub fn scale_diag(&self, diag: &[Scalar]) -> Result<Self, ConfigError> {
        self.map_points(self.dim, |x| x.iter().zip(diag).map(|(a, b)| a * b).collect())
    }

    /// Every label (and alias) gets `prefix` prepended.
    pub fn prefixed(&self, prefix: &str) -> Self {
        let mut out = Self::new(self.dim);
        for (l, x) in self.iter() {
            out.insert(format!("{prefix}{l}"), x.to_vec()).unwrap();
        }
        for (a, l) in &self.aliases {
            out.aliases.insert(format!("{prefix}{a}"), format!("{prefix}{l}"));
        }
        for (l, r) in &self.roles {
            out.roles.insert(format!("{prefix}{l}"), *r);
        }
        out
    }

    /// Restriction to the given labels.
    pub fn subset<'a>(&self, labels: impl IntoIterator<Item = &'a str>) -> Result<Self, ConfigError> {
        let mut out = Self::new(self.dim);
        for l in labels {
            let x = self.get(l).ok_or_else(|| ConfigError::UnknownLabel(l.to_string()))?;
            out.insert(l, x.to_vec())?;
            if let Some(r) = self.role(l) {
                out.roles.insert(l.to_string(), r);
            }
        }
        Ok(out)
    }

    pub fn remove(&mut self, label: &str) -> Option<Vec<Scalar>> {
        let canon = self.resolve(label)?.to_string();
        let x = self.points.remove(&canon)?;
        self.index.remove(&x);
        self.roles.remove(&canon);
        let gone: Vec<String> = self
            .aliases
            .iter()
            .filter(|(_, v)| **v == canon)
            .map(|(k, _)| k.clone())
            .collect();
        for a in gone {
            self.roles.remove(&a);
            self.aliases.remove(&a);
        }
        self.aliases.remove(label);
        self.roles.remove(label);
        Some(x)
    }
}

/// Q^d: all points of {-1,0,1}^d, labeled `qd:(a,b,...)`.
pub fn qd(d: usize) -> PointConfiguration {
    let mut c = PointConfiguration::new(d);
    for v in lattice(d, -1, 1) {
        c.insert(coord_label("qd", &v), ints(&v)).unwrap();
    }
    c
}

/// The grid Q²+1 = {0,1,2}², labeled `grid:(i,j)`, role grid.
pub fn grid() -> PointConfiguration {
    let mut c = PointConfiguration::new(2);
    for v in lattice(2, 0, 2) {
        c.insert_with_role(coord_label("grid", &v), ints(&v), Role::Grid).unwrap();
    }
    c
}

/// Labels of the grid points.
pub fn grid_labels() -> Vec<String> {
    lattice(2, 0, 2).iter().map(|v| coord_label("grid", v)).collect()
}

/// The cube vertices and the origin, labeled as in [`qd`] for d = 3.
pub fn w_config() -> PointConfiguration {
    let mut c = PointConfiguration::new(3);
    for v in lattice(3, -1, 1) {
        if v.iter().all(|&x| x != 0) || v.iter().all(|&x| x == 0) {
            c.insert(coord_label("qd", &v), ints(&v)).unwrap();
        }
    }
    c
}

/// `(D/2)(Q^d + 1)` for `D = diag(p)`, labeled `proj:(a,b,...)` with entries in {0,1,2}.
pub fn proj_box(p: &[Scalar]) -> Result<PointConfiguration, ConfigError> {
    if let Some(i) = p.iter().position(|x| !x.is_positive()) {
        return Err(ConfigError::NonPositive(i));
    }
    let d = p.len();
    let half = Scalar::ratio(1, 2);
    let mut c = PointConfiguration::new(d);
    for v in lattice(d, 0, 2) {
        let x = v
            .iter()
            .zip(p)
            .map(|(&a, pi)| Scalar::from_int(a) * pi * &half)
            .collect();
        c.insert(coord_label("proj", &v), x)?;
    }
    Ok(c)
}

/// Labels of the frame set L(p) inside [`proj_box`]: the origin, `p_i e_i`, `p_i e_i / 2`.
pub fn proj_frame_labels(d: usize) -> Vec<String> {
    let mut out = vec![coord_label("proj", &vec![0; d])];
    for k in [2, 1] {
        for i in 0..d {
            let mut v = vec![0; d];
            v[i] = k;
            out.push(coord_label("proj", &v));
        }
    }
    out
}

/// Union of two configurations. Each `(a_label, b_label)` pair in `glue` must
/// name the same point. Points of `b` at coordinates already in `a` become aliases.
pub fn union_labeled(
    a: &PointConfiguration,
    b: &PointConfiguration,
    glue: &[(String, String)],
) -> Result<PointConfiguration, ConfigError> {
    if a.dim != b.dim {
        return Err(ConfigError::Dimension {
            expected: a.dim,
            got: b.dim,
        });
    }
    for (la, lb) in glue {
        let xa = a.get(la).ok_or_else(|| ConfigError::UnknownLabel(la.clone()))?;
        let xb = b.get(lb).ok_or_else(|| ConfigError::UnknownLabel(lb.clone()))?;
        if xa != xb {
            return Err(ConfigError::GlueMismatch(la.clone(), lb.clone()));
        }
    }
    let mut out = a.clone();
    for (l, x) in b.iter() {
        out.insert(l, x.to_vec())?;
    }
    for (al, l) in &b.aliases {
        if out.contains_label(al) {
            continue;
        }
        let owner = out.resolve(l).unwrap().to_string();
        out.aliases.insert(al.clone(), owner);
    }
    for (l, r) in &b.roles {
        out.roles.entry(l.clone()).or_insert(*r);
    }
    Ok(out)
}

/// `(x, y) ↦ x e_i + y e_{i+1}` into R^d, with `i` 1-based and cyclic.
pub fn embed_plane(c: &PointConfiguration, i: usize, d: usize) -> Result<PointConfiguration, ConfigError> {
    if c.dim != 2 {
        return Err(ConfigError::Dimension {
            expected: 2,
            got: c.dim,
        });
    }
    if i == 0 || i > d {
        return Err(ConfigError::Invalid(format!("axis {i} out of range 1..={d}")));
    }
    let (a, b) = (i - 1, i % d);
    c.map_points(d, |x| {
        let mut y = vec![Scalar::zero(); d];
        y[a] = x[0].clone();
        y[b] = x[1].clone();
        y
    })
}

/// Orientation signs of all increasing (d+1)-tuples of a label order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chirotope {
    labels: Vec<String>,
    signs: BTreeMap<Vec<usize>, i8>,
}

pub(crate) fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn orientation(points: &[&[Scalar]]) -> i8 {
    let rows: Vec<Vec<Scalar>> = points
        .iter()
        .map(|p| {
            let mut r = p.to_vec();
            r.push(Scalar::one());
            r
        })
        .collect();
    linalg::det(&rows).sign()
}

impl Chirotope {
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Sign of an arbitrary ordered tuple of labels.
    pub fn sign(&self, tuple: &[&str]) -> Option<i8> {
        let mut idx: Vec<usize> = tuple
            .iter()
            .map(|l| self.labels.iter().position(|m| m == l))
            .collect::<Option<_>>()?;
        let mut parity = 1i8;
        for i in 0..idx.len() {
            for j in 0..idx.len() - 1 - i {
                if idx[j] > idx[j + 1] {
                    idx.swap(j, j + 1);
                    parity = -parity;
                }
            }
        }
        if idx.windows(2).any(|w| w[0] == w[1]) {
            return Some(0);
        }
        self.signs.get(&idx).map(|s| s * parity)
    }

    pub fn signs(&self) -> &BTreeMap<Vec<usize>, i8> {
        &self.signs
    }

    /// Equality up to a global sign flip.
    pub fn equivalent(&self, other: &Self) -> bool {
        if self.signs.len() != other.signs.len() {
            return false;
        }
        [1i8, -1].iter().any(|s| {
            self.signs
                .iter()
                .all(|(k, v)| other.signs.get(k) == Some(&(v * s)))
        })
    }
}

pub fn chirotope(c: &PointConfiguration) -> Chirotope {
    chirotope_ordered(c, c.labels().map(str::to_string).collect())
}

/// Chirotope with respect to an explicit label order.
pub fn chirotope_ordered(c: &PointConfiguration, labels: Vec<String>) -> Chirotope {
    let pts: Vec<&[Scalar]> = labels.iter().map(|l| c.get(l).expect("label")).collect();
    let signs = subsets(labels.len(), c.dim + 1)
        .into_iter()
        .map(|s| {
            let tuple: Vec<&[Scalar]> = s.iter().map(|&i| pts[i]).collect();
            let o = orientation(&tuple);
            (s, o)
        })
        .collect();
    Chirotope { labels, signs }
}

/// Polytope vertices together with free points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PPConfiguration {
    pub vertices: PointConfiguration,
    pub free: PointConfiguration,
}

impl PPConfiguration {
    pub fn new(vertices: PointConfiguration, free: PointConfiguration) -> Result<Self, ConfigError> {
        if vertices.dim() != free.dim() {
            return Err(ConfigError::Dimension {
                expected: vertices.dim(),
                got: free.dim(),
            });
        }
        for (l, x) in free.iter() {
            if vertices.contains_label(l) {
                return Err(ConfigError::LabelClash(l.to_string()));
            }
            if vertices.contains_point(x) {
                return Err(ConfigError::Invalid(format!("free point {l} is a polytope vertex")));
            }
        }
        let hull = crate::hull::convex_hull(&vertices);
        if hull.vertex_count() != vertices.len() {
            return Err(ConfigError::Invalid("labeled vertices are not all extreme".into()));
        }
        if let Some((l, _)) = free.iter().find(|(_, x)| hull.contains(x)) {
            return Err(ConfigError::Invalid(format!("free point {l} lies in the polytope")));
        }
        Ok(Self { vertices, free })
    }

    pub fn dim(&self) -> usize {
        self.vertices.dim()
    }

    /// All points, vertices first.
    pub fn all_points(&self) -> Vec<(String, Vec<Scalar>)> {
        self.vertices
            .iter()
            .chain(self.free.iter())
            .map(|(l, x)| (l.to_string(), x.to_vec()))
            .collect()
    }
}

/// Sign vectors (keyed by label) of the hyperplanes spanned by `d` of the
/// points that keep all polytope vertices in one closed halfspace, oriented
/// so the vertices are on the nonnegative side.
fn admissible_sign_vectors(pp: &PPConfiguration) -> BTreeSet<BTreeMap<String, i8>> {
    let d = pp.dim();
    let pts = pp.all_points();
    let nvert = pp.vertices.len();
    let mut out = BTreeSet::new();
    for s in subsets(pts.len(), d) {
        let base: Vec<&[Scalar]> = s.iter().map(|&i| pts[i].1.as_slice()).collect();
        if linalg::affine_rank(&base) != d as isize - 1 {
            continue;
        }
        let signs: Vec<i8> = pts
            .iter()
            .map(|(_, x)| {
                let mut t = base.clone();
                t.push(x);
                orientation(&t)
            })
            .collect();
        let vs = &signs[..nvert];
        for flip in [1i8, -1] {
            if vs.iter().all(|&v| v * flip >= 0) {
                out.insert(
                    pts.iter()
                        .zip(&signs)
                        .map(|((l, _), &v)| (l.clone(), v * flip))
                        .collect(),
                );
            }
        }
    }
    out
}

/// Conservative Lawrence-equivalence test via spanned hyperplanes.
///
/// Compares the sets of sign vectors of hyperplanes spanned by `d` points,
/// restricted to those with the polytope in a closed halfspace. This is exact
/// when every admissible partition is realized by a spanned hyperplane; in
/// degenerate inputs non-spanned hyperplanes may separate what this misses.
pub fn lawrence_equivalent(a: &PPConfiguration, b: &PPConfiguration, phi: &BTreeMap<String, String>) -> bool {
    if a.dim() != b.dim() || a.vertices.len() != b.vertices.len() || a.free.len() != b.free.len() {
        return false;
    }
    for l in a.vertices.labels() {
        match phi.get(l) {
            Some(m) if b.vertices.contains_label(m) => {}
            _ => return false,
        }
    }
    for l in a.free.labels() {
        match phi.get(l) {
            Some(m) if b.free.contains_label(m) => {}
            _ => return false,
        }
    }
    let sa: BTreeSet<BTreeMap<String, i8>> = admissible_sign_vectors(a)
        .into_iter()
        .map(|v| v.into_iter().map(|(l, s)| (phi[&l].clone(), s)).collect())
        .collect();
    sa == admissible_sign_vectors(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qd_counts() {
        assert_eq!(qd(1).len(), 3);
        assert_eq!(qd(3).len(), 27);
        assert!(qd(3).contains_label("qd:(1,0,-1)"));
    }

    #[test]
    fn grid_is_translated_q2() {
        let g = qd(2).translate(&[Scalar::one(), Scalar::one()]);
        let h = grid();
        for (_, x) in g.iter() {
            assert!(h.contains_point(x));
        }
    }

    #[test]
    fn w_is_nine_points_of_q3() {
        let w = w_config();
        assert_eq!(w.len(), 9);
        let q = qd(3);
        assert!(w.iter().all(|(l, x)| q.get(l) == Some(x)));
    }

    #[test]
    fn proj_box_frame() {
        let two = Scalar::from_int(2);
        let c = proj_box(&[two.clone(), two.clone(), two]).unwrap();
        assert_eq!(c.len(), 27);
        assert_eq!(c.get("proj:(2,2,2)").unwrap(), &ints(&[2, 2, 2])[..]);
        assert_eq!(c.get("proj:(1,1,1)").unwrap(), &ints(&[1, 1, 1])[..]);
        assert_eq!(c.get("proj:(1,0,0)").unwrap(), &ints(&[1, 0, 0])[..]);
        assert_eq!(proj_frame_labels(3).len(), 7);
        assert!(proj_box(&[Scalar::one(), Scalar::zero(), Scalar::one()]).is_err());
    }

    #[test]
    fn union_merges_and_checks_glue() {
        let a = qd(2);
        let u = union_labeled(&a, &a, &[]).unwrap();
        assert_eq!(u, a);
        let b = a.prefixed("b.");
        let glue = vec![("qd:(0,0)".to_string(), "b.qd:(0,0)".to_string())];
        let u = union_labeled(&a, &b, &glue).unwrap();
        assert_eq!(u.len(), 9);
        assert_eq!(u.resolve("b.qd:(1,1)"), Some("qd:(1,1)"));
        let bad = vec![("qd:(0,0)".to_string(), "b.qd:(1,1)".to_string())];
        assert!(union_labeled(&a, &b, &bad).is_err());
    }

    #[test]
    fn embedding_is_cyclic() {
        let mut c = PointConfiguration::new(2);
        c.insert("z", vec![Scalar::from_int(5), Scalar::from_int(7)]).unwrap();
        let e = embed_plane(&c, 3, 3).unwrap();
        assert_eq!(e.get("z").unwrap(), &ints(&[7, 0, 5])[..]);
    }

    #[test]
    fn chirotope_basics() {
        let mut c = PointConfiguration::new(2);
        c.insert("a", ints(&[0, 0])).unwrap();
        c.insert("b", ints(&[1, 0])).unwrap();
        c.insert("c", ints(&[0, 1])).unwrap();
        c.insert("d", ints(&[2, 0])).unwrap();
        let ch = chirotope(&c);
        assert_eq!(ch.sign(&["a", "b", "c"]), Some(1));
        assert_eq!(ch.sign(&["b", "a", "c"]), Some(-1));
        assert_eq!(ch.sign(&["a", "b", "d"]), Some(0));
    }
}
