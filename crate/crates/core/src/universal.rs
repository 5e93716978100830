//! Universal polytopes: a projectively unique polytope with a face
//! projectively equivalent to a given polytope.
//!
//! Pipeline: normalize P into the open cube (0,2)^d, build the frame
//! configurations K[v] of its vertices, cone over P from a point above the
//! base space with a hyperplane through the wedge x_1 = 0, then apply the
//! Lawrence extension to the cone and the carried points.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::config::{coord_label, union_labeled, ConfigError, PPConfiguration, PointConfiguration};
use crate::derive::DerivationCertificate;
use crate::exact::Scalar;
use crate::hull::{hull_of, pyramid, Halfspace, HullError, Polytope};
use crate::linalg;
use crate::projgeom::{find_projective_map, Flat, HPoint, ProjectiveMap};
use crate::vonstaudt::{coor_point, VonStaudtError};

/// Above this ambient dimension results are kept as coordinates only.
pub const MAX_ENUMERATED_DIM: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum UniversalError {
    #[error("the polytope is empty")]
    Empty,
    #[error("coordinates lie in different number fields")]
    FieldMismatch,
    #[error("the cut hyperplane does not separate the apex from the polytope")]
    Separation,
    #[error("the cut hyperplane does not restrict to the wedge hyperplane")]
    NotThroughWedge,
    #[error("the apex lies in the base space")]
    ApexInBase,
    #[error(transparent)]
    Hull(#[from] HullError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    VonStaudt(#[from] VonStaudtError),
}

/// One entry of the construction log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Event {
    pub stage: String,
    pub detail: String,
}

fn event(log: &mut Vec<Event>, stage: &str, detail: String) {
    log.push(Event {
        stage: stage.to_string(),
        detail,
    });
}

#[derive(Debug, Clone)]
pub struct WeakProjectiveTriple {
    /// P, full dimensional in R^d and inside the open cube (0,2)^d.
    pub polytope: Polytope,
    /// Vertex labels of P.
    pub q: Vec<String>,
    /// Frame points, disjoint from P.
    pub r: PointConfiguration,
    /// Q ∪ R with every alias, the space the certificate lives in.
    pub frame_config: PointConfiguration,
    /// Derives Q ∪ R from a small frame.
    pub certificate: DerivationCertificate,
    /// The hyperplane x_1 = 0, spanned by `wedge_labels`.
    pub wedge: Flat,
    pub wedge_labels: Vec<String>,
    pub log: Vec<Event>,
}

fn check_field(p: &Polytope) -> Result<(), UniversalError> {
    let mut field = None;
    for (_, x) in p.vertices() {
        for c in x {
            if let Some(f) = c.field() {
                match &field {
                    None => field = Some(f.clone()),
                    Some(g) if !g.same_as(f) => return Err(UniversalError::FieldMismatch),
                    _ => {}
                }
            }
        }
    }
    Ok(())
}

/// Project onto pivot coordinates of the affine hull, then cone until the
/// dimension is at least 3.
fn full_dimensional(p: &Polytope, log: &mut Vec<Event>) -> Result<Polytope, UniversalError> {
    let pts: Vec<(String, Vec<Scalar>)> = p.vertices().map(|(l, x)| (l.to_string(), x.to_vec())).collect();
    let base = &pts[0].1;
    let mut diffs: Vec<Vec<Scalar>> = pts[1..].iter().map(|(_, x)| linalg::sub(x, base)).collect();
    let pivots = linalg::rref(&mut diffs);
    let mut q = p.clone();
    if pivots.len() < p.ambient() {
        let proj = pts
            .into_iter()
            .map(|(l, x)| (l, pivots.iter().map(|&c| x[c].clone()).collect()))
            .collect();
        q = hull_of(pivots.len(), proj);
        event(log, "project", format!("onto coordinates {pivots:?}"));
    }
    let mut k = 0;
    while q.dim() < 3 {
        k += 1;
        let mut apex = q.centroid();
        apex.push(Scalar::one());
        q = pyramid(&q.lifted(1), &format!("lift{k}"), &apex)?;
        event(log, "pyramid", format!("dimension raised to {}", q.dim()));
    }
    Ok(q)
}

/// Similarity taking P into [1/2, 3/2]^d.
fn into_cube(p: &Polytope) -> Polytope {
    let d = p.ambient();
    let width = BigRational::new(BigInt::one(), BigInt::from(64));
    let mut lo: Vec<Option<BigRational>> = vec![None; d];
    let mut hi: Vec<Option<BigRational>> = vec![None; d];
    for (_, x) in p.vertices() {
        for i in 0..d {
            let (a, b) = x[i].enclose(&width);
            if lo[i].as_ref().is_none_or(|m| a < *m) {
                lo[i] = Some(a);
            }
            if hi[i].as_ref().is_none_or(|m| b > *m) {
                hi[i] = Some(b);
            }
        }
    }
    let span = (0..d)
        .map(|i| hi[i].clone().unwrap() - lo[i].clone().unwrap())
        .fold(BigRational::zero(), |m, s| if s > m { s } else { m });
    let scale = Scalar::rational(span.recip());
    let half = Scalar::ratio(1, 2);
    let pts = p
        .vertices()
        .map(|(l, x)| {
            let y = (0..d)
                .map(|i| (&x[i] - Scalar::rational(lo[i].clone().unwrap())) * &scale + &half)
                .collect();
            (l.to_string(), y)
        })
        .collect();
    hull_of(d, pts)
}

pub fn build_triple(p: &Polytope) -> Result<WeakProjectiveTriple, UniversalError> {
    if p.is_empty() {
        return Err(UniversalError::Empty);
    }
    check_field(p)?;
    let mut log = Vec::new();
    let p = into_cube(&full_dimensional(p, &mut log)?);
    let d = p.ambient();
    event(&mut log, "normalize", format!("{} vertices in the open cube (0,2)^{d}", p.vertex_count()));
    let q: Vec<String> = p.labels().map(str::to_string).collect();
    let mut frame_config = p.to_config();
    let mut parts = Vec::new();
    for (i, (label, x)) in p.vertices().enumerate() {
        let k = coor_point(x)?;
        let prefix = format!("c{i}:");
        frame_config = union_labeled(&frame_config, &k.config.prefixed(&prefix), &[])?;
        event(&mut log, "frame", format!("K[{label}] with {} points", k.config.len()));
        parts.push((prefix, k.certificate));
    }
    let mut certificate = DerivationCertificate::default();
    for (prefix, cert) in &parts {
        certificate.append(&cert.relabeled(|l| frame_config.resolve(&format!("{prefix}{l}")).unwrap().to_string()));
    }
    let qset: BTreeSet<&str> = q.iter().map(String::as_str).collect();
    let r = frame_config.subset(frame_config.labels().filter(|l| !qset.contains(l)))?;
    // x_1 = 0 through the cube corners 0 and 2e_j, j ≥ 2
    let mut wedge_labels = vec![coord_label("grid", &vec![0; d])];
    for j in 1..d {
        let mut v = vec![0; d];
        v[j] = 2;
        wedge_labels.push(coord_label("grid", &v));
    }
    let wedge_labels: Vec<String> = wedge_labels
        .iter()
        .map(|l| frame_config.resolve(&format!("c0:{l}")).unwrap().to_string())
        .collect();
    let hp: Vec<HPoint> = wedge_labels.iter().map(|l| frame_config.hpoint(l).unwrap()).collect();
    let wedge = Flat::through(&hp.iter().collect::<Vec<_>>()).expect("nonzero points");
    event(
        &mut log,
        "triple",
        format!("#Q = {}, #R = {}, certificate frame {}", q.len(), r.len(), certificate.frame.len()),
    );
    Ok(WeakProjectiveTriple {
        polytope: p,
        q,
        r,
        frame_config,
        certificate,
        wedge,
        wedge_labels,
        log,
    })
}

impl WeakProjectiveTriple {
    /// The wedge hyperplane misses P.
    pub fn wedge_misses_polytope(&self) -> bool {
        let h = Halfspace::from_flat(&self.wedge).expect("affine hyperplane");
        let mut sides = self.polytope.vertices().map(|(_, x)| h.side(x));
        let first = sides.next().unwrap_or(0);
        first != 0 && sides.all(|s| s == first)
    }
}

/// Cone over P from `apex`, cut by a hyperplane through the wedge.
#[derive(Debug, Clone)]
pub struct SubdirectCone {
    pub apex: Vec<Scalar>,
    /// Ĥ as `normal · x ≤ offset`, apex strictly inside.
    pub cut: Halfspace,
    /// conv(apex ∪ projections of the vertices of P onto Ĥ).
    pub pyramid: Polytope,
    pub apex_label: String,
    pub base_labels: Vec<String>,
    /// Q ∪ R in R^{d+1} at height zero; Q relabeled `q:<label>`.
    pub carried: PointConfiguration,
}

fn lift0(x: &[Scalar]) -> Vec<Scalar> {
    let mut y = x.to_vec();
    y.push(Scalar::zero());
    y
}

/// Point where the segment from `v` to `p` crosses `cut`.
fn cross(cut: &Halfspace, v: &[Scalar], p: &[Scalar]) -> Vec<Scalar> {
    let ev = cut.eval(v);
    let ep = cut.eval(p);
    let s = &ev / (&ev - &ep);
    linalg::add(v, &linalg::scale(&linalg::sub(p, v), &s))
}

pub fn subdirect_cone(
    t: &WeakProjectiveTriple,
    apex: &[Scalar],
    cut: &Halfspace,
) -> Result<SubdirectCone, UniversalError> {
    let d = t.polytope.ambient();
    if apex.len() != d + 1 || cut.normal.len() != d + 1 {
        return Err(HullError::Dimension.into());
    }
    if apex[d].is_zero() {
        return Err(UniversalError::ApexInBase);
    }
    let through_wedge = cut.normal[..d].iter().any(|c| !c.is_zero())
        && t
            .wedge_labels
            .iter()
            .all(|l| cut.side(&lift0(t.frame_config.get(l).unwrap())) == 0);
    if !through_wedge {
        return Err(UniversalError::NotThroughWedge);
    }
    let sa = cut.side(apex);
    if sa == 0 || t.polytope.vertices().any(|(_, x)| cut.side(&lift0(x)) != -sa) {
        return Err(UniversalError::Separation);
    }
    let cut = if sa > 0 {
        Halfspace {
            normal: cut.normal.iter().map(|c| -c).collect(),
            offset: -&cut.offset,
        }
    } else {
        cut.clone()
    };
    let apex_label = "apex".to_string();
    let mut pts: Vec<(String, Vec<Scalar>)> = t
        .polytope
        .vertices()
        .map(|(l, x)| (l.to_string(), cross(&cut, apex, &lift0(x))))
        .collect();
    let base_labels = pts.iter().map(|(l, _)| l.clone()).collect();
    pts.push((apex_label.clone(), apex.to_vec()));
    let pyramid = hull_of(d + 1, pts);
    let mut carried = PointConfiguration::new(d + 1);
    for l in &t.q {
        carried.insert(format!("q:{l}"), lift0(t.polytope.vertex(l).unwrap()))?;
    }
    for (l, x) in t.r.iter() {
        carried.insert(l, lift0(x))?;
    }
    Ok(SubdirectCone {
        apex: apex.to_vec(),
        cut,
        pyramid,
        apex_label,
        base_labels,
        carried,
    })
}

/// Apex over the vertex barycenter at height 1; Ĥ is x_1 = t·y with t
/// doubled from 1 until it separates.
pub fn default_cone(t: &WeakProjectiveTriple) -> Result<SubdirectCone, UniversalError> {
    let d = t.polytope.ambient();
    let verts: Vec<&[Scalar]> = t.polytope.vertices().map(|(_, x)| x).collect();
    let mut apex = linalg::centroid(&verts);
    apex.push(Scalar::one());
    let mut tilt = Scalar::one();
    for _ in 0..64 {
        let mut normal = vec![Scalar::zero(); d + 1];
        normal[0] = Scalar::one();
        normal[d] = -&tilt;
        let cut = Halfspace {
            normal,
            offset: Scalar::zero(),
        };
        match subdirect_cone(t, &apex, &cut) {
            Err(UniversalError::Separation) => tilt = &tilt * Scalar::from_int(2),
            other => return other,
        }
    }
    Err(UniversalError::Separation)
}

impl SubdirectCone {
    /// Base vertices with the last coordinate dropped; Ĥ is a graph over R^d,
    /// so this is an affine chart of Ĥ.
    pub fn base_in_chart(&self) -> Vec<(String, Vec<Scalar>)> {
        self.base_labels
            .iter()
            .map(|l| {
                let x = self.pyramid.vertex(l).unwrap();
                (l.clone(), x[..x.len() - 1].to_vec())
            })
            .collect()
    }

    /// Projective map taking P onto the base, recovered from the vertices
    /// and the image of the vertex barycenter.
    pub fn base_equivalence(&self, p: &Polytope) -> Option<ProjectiveMap> {
        let d = p.ambient();
        let chart = self.base_in_chart();
        let verts: Vec<&[Scalar]> = p.vertices().map(|(_, x)| x).collect();
        let c = linalg::centroid(&verts);
        let c_img = cross(&self.cut, &self.apex, &lift0(&c));
        let mut src: Vec<HPoint> = Vec::new();
        let mut dst: Vec<HPoint> = Vec::new();
        for (l, y) in &chart {
            src.push(HPoint::from_affine(p.vertex(l)?));
            dst.push(HPoint::from_affine(y));
        }
        src.push(HPoint::from_affine(&c));
        dst.push(HPoint::from_affine(&c_img[..d]));
        find_projective_map(&src, &dst).ok().flatten()
    }

    pub fn pp_configuration(&self) -> Result<PPConfiguration, ConfigError> {
        PPConfiguration::new(self.pyramid.to_config(), self.carried.clone())
    }
}

/// Lawrence extension of (P, R): P at height zero, and for the j-th free
/// point r the two points (r, e_j) and (r, 2e_j) on its own new axis.
/// Vertices of r are labeled `r@1`, `r@2`.
pub fn lawrence_extension(pp: &PPConfiguration) -> Polytope {
    let n = pp.dim();
    let m = pp.free.len();
    let mut pts: Vec<(String, Vec<Scalar>)> = Vec::with_capacity(pp.vertices.len() + 2 * m);
    for (l, x) in pp.vertices.iter() {
        let mut y = x.to_vec();
        y.resize(n + m, Scalar::zero());
        pts.push((l.to_string(), y));
    }
    for (j, (l, x)) in pp.free.iter().enumerate() {
        for h in 1..=2 {
            let mut y = x.to_vec();
            y.resize(n + m, Scalar::zero());
            y[n + j] = Scalar::from_int(h);
            pts.push((format!("{l}@{h}"), y));
        }
    }
    if n + m <= MAX_ENUMERATED_DIM {
        return hull_of(n + m, pts);
    }
    let refs: Vec<&[Scalar]> = pp.vertices.iter().map(|(_, x)| x).collect();
    let dim = linalg::affine_rank(&refs) + m as isize;
    Polytope::coordinates_only(n + m, dim, pts.into_iter().collect())
}

/// The face of the Lawrence extension spanned by the original vertices:
/// minus the sum of the new coordinates is at most zero.
pub fn lawrence_face(n: usize, m: usize) -> Halfspace {
    let mut normal = vec![Scalar::zero(); n + m];
    for c in &mut normal[n..] {
        *c = Scalar::from_int(-1);
    }
    Halfspace {
        normal,
        offset: Scalar::zero(),
    }
}

/// Every listed vertex on `h`, every other vertex strictly on one side.
pub fn verify_face(p: &Polytope, labels: &BTreeSet<String>, h: &Flat) -> bool {
    match Halfspace::from_flat(h) {
        Ok(hs) => p.is_face_with(labels, &hs),
        Err(_) => false,
    }
}

#[derive(Debug, Clone)]
pub struct UniversalResult {
    pub polytope: Polytope,
    /// Labels of the face projectively equivalent to the input.
    pub base_face_labels: Vec<String>,
    /// Supporting hyperplane of that face.
    pub base_face_witness: Halfspace,
    pub dimension: usize,
    pub vertex_count: usize,
    /// dim P, #Q and #R of the triple.
    pub input_dim: usize,
    pub q_count: usize,
    pub r_count: usize,
    pub triple: WeakProjectiveTriple,
    pub cone: SubdirectCone,
    pub log: Vec<Event>,
}

impl UniversalResult {
    pub fn formula_dimension(&self) -> usize {
        self.input_dim + self.q_count + self.r_count + 1
    }

    pub fn formula_vertex_count(&self) -> usize {
        self.triple.polytope.vertex_count() + 2 * (self.q_count + self.r_count) + 1
    }

    pub fn base_face_is_face(&self) -> bool {
        let labels: BTreeSet<String> = self.base_face_labels.iter().cloned().collect();
        self.polytope.is_face_with(&labels, &self.base_face_witness)
    }
}

pub fn universal_polytope(p: &Polytope) -> Result<UniversalResult, UniversalError> {
    let triple = build_triple(p)?;
    let cone = default_cone(&triple)?;
    let mut log = triple.log.clone();
    event(
        &mut log,
        "cone",
        format!("apex over the barycenter, cut {:?}", cone.cut.normal.iter().map(|c| c.to_string()).collect::<Vec<_>>()),
    );
    let pp = cone.pp_configuration()?;
    let n = pp.dim();
    let m = pp.free.len();
    let polytope = lawrence_extension(&pp);
    event(&mut log, "lawrence", format!("{m} free points, ambient dimension {}", n + m));
    // cut face of the pyramid, pushed off the free points by the Lawrence face
    let mut worst = BigRational::zero();
    let width = BigRational::new(BigInt::one(), BigInt::from(16));
    for (_, x) in pp.free.iter() {
        let (_, hi) = cone.cut.eval(x).enclose(&width);
        if hi > worst {
            worst = hi;
        }
    }
    let lambda = Scalar::rational(worst.abs() + BigRational::one());
    let law = lawrence_face(n, m);
    let mut normal = cone.cut.normal.clone();
    normal.resize(n + m, Scalar::zero());
    let witness = Halfspace {
        normal: linalg::add(&normal, &linalg::scale(&law.normal, &lambda)),
        offset: cone.cut.offset.clone(),
    };
    let base_face_labels = cone.base_labels.clone();
    event(&mut log, "face", format!("base face on {} vertices", base_face_labels.len()));
    let dimension = polytope.dim() as usize;
    let vertex_count = polytope.vertex_count();
    Ok(UniversalResult {
        polytope,
        base_face_labels,
        base_face_witness: witness,
        dimension,
        vertex_count,
        input_dim: triple.polytope.dim() as usize,
        q_count: triple.q.len(),
        r_count: triple.r.len(),
        triple,
        cone,
        log,
    })
}

/// Pyramid structure check: the apex is on every facet but one, and that
/// facet holds exactly the base.
pub fn is_pyramid_over(p: &Polytope, apex: &str, base: &[String]) -> bool {
    let base: BTreeSet<String> = base.iter().cloned().collect();
    let without_apex: Vec<_> = p.facets().iter().filter(|f| !f.vertices.contains(apex)).collect();
    without_apex.len() == 1 && without_apex[0].vertices == base && p.vertex_count() == base.len() + 1
}
