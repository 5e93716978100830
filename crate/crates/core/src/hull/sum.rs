//! Connected sums, stacked and k-stacked polytopes.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{combinatorially_equivalent, hull_of, subpolytope, Polytope};
use crate::exact::Scalar;
use crate::linalg::{self, Matrix};
use crate::projgeom::{find_projective_map, HPoint, ProjectiveMap};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SumError {
    #[error("polytopes must be full-dimensional in the same space")]
    Dimension,
    #[error("facets are not combinatorially equivalent")]
    FacetMismatch,
    #[error("facets are not projectively equivalent")]
    NotProjective,
    #[error("no admissible positioning found (tried collapse factors up to 2^{0})")]
    NoPositioning(u32),
    #[error("k = {k} is below d + 1 = {min}")]
    InfeasibleK { k: usize, min: usize },
}

/// One gluing: `piece` attached along the facet of the running sum with vertex set `onto`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlueStep {
    pub piece: usize,
    pub onto: BTreeSet<String>,
}

/// Construction tree of a connected sum. `pieces[0]` is the initial summand;
/// step `i` glues `pieces[steps[i].piece]`. Pieces are stored as positioned in
/// the final polytope, so their union is the sum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StackedRecipe {
    pub dim: usize,
    pub k: usize,
    pub pieces: Vec<Polytope>,
    pub steps: Vec<GlueStep>,
}

impl StackedRecipe {
    pub fn summand_facet_counts(&self) -> Vec<usize> {
        self.pieces.iter().map(Polytope::facet_count).collect()
    }

    pub fn respects_k(&self) -> bool {
        self.summand_facet_counts().iter().all(|&f| f <= self.k)
    }
}

fn independent_labels(p: &Polytope, labels: &BTreeSet<String>, want: usize) -> Vec<String> {
    let mut chosen: Vec<String> = Vec::new();
    let mut rows: Matrix = Vec::new();
    for l in labels {
        let x = p.vertex(l).unwrap();
        if chosen.is_empty() {
            chosen.push(l.clone());
        } else {
            let mut trial = rows.clone();
            trial.push(linalg::sub(x, p.vertex(&chosen[0]).unwrap()));
            if linalg::rank(&trial) == trial.len() {
                rows = trial;
                chosen.push(l.clone());
            }
        }
        if chosen.len() == want {
            break;
        }
    }
    chosen
}

/// Affine frame `y ↦ o + Σ y_i cols_i` as a projective map.
fn frame_map(o: &[Scalar], cols: &[Vec<Scalar>]) -> ProjectiveMap {
    let d = o.len();
    let a: Matrix = (0..d).map(|r| cols.iter().map(|c| c[r].clone()).collect()).collect();
    ProjectiveMap::affine(&a, o).expect("frame is a basis")
}

/// Connected sum of `a` and `b` along `facet_a` and `facet_b`.
///
/// `b` is moved by a projective map taking its facet onto `a`'s facet and its
/// other vertices beyond it; the map includes a collapse towards the facet
/// whose strength doubles until every convexity condition holds strictly.
/// Vertices of `b` off the facet are renamed with `prefix`. Returns the sum
/// and the positioned copy of `b`.
pub fn connected_sum(
    a: &Polytope,
    b: &Polytope,
    facet_a: usize,
    facet_b: usize,
    prefix: &str,
) -> Result<(Polytope, Polytope), SumError> {
    let d = a.ambient();
    if b.ambient() != d || a.dim() != d as isize || b.dim() != d as isize {
        return Err(SumError::Dimension);
    }
    let fa = &a.facets()[facet_a];
    let fb = &b.facets()[facet_b];
    let pa = subpolytope(a, fa.vertices.iter().map(String::as_str)).unwrap();
    let pb = subpolytope(b, fb.vertices.iter().map(String::as_str)).unwrap();
    // σ: labels of fb → labels of fa
    let sigma = combinatorially_equivalent(&pb, &pa).ok_or(SumError::FacetMismatch)?;
    let inv_sigma: BTreeMap<&String, &String> = sigma.iter().map(|(k, v)| (v, k)).collect();

    let u = independent_labels(a, &fa.vertices, d);
    let w: Vec<&String> = u.iter().map(|l| inv_sigma[l]).collect();
    let ua: Vec<&[Scalar]> = u.iter().map(|l| a.vertex(l).unwrap()).collect();
    let wb: Vec<&[Scalar]> = w.iter().map(|l| b.vertex(l).unwrap()).collect();
    let mut cols_a: Vec<Vec<Scalar>> = ua[1..].iter().map(|x| linalg::sub(x, ua[0])).collect();
    cols_a.push(fa.halfspace.normal.clone());
    let mut cols_b: Vec<Vec<Scalar>> = wb[1..].iter().map(|x| linalg::sub(x, wb[0])).collect();
    cols_b.push(fb.halfspace.normal.iter().map(|c| -c).collect());
    let alpha_inv = frame_map(ua[0], &cols_a);
    let beta = frame_map(wb[0], &cols_b).inverse();
    let alpha = alpha_inv.inverse();

    let y_of = |m: &ProjectiveMap, x: &[Scalar]| m.apply_affine(x).unwrap();
    // facet correspondence inside the hyperplane t = 0
    let g = if fb.vertices.len() == d {
        ProjectiveMap::identity(d)
    } else {
        let src: Vec<HPoint> = fb
            .vertices
            .iter()
            .map(|l| HPoint::from_affine(&y_of(&beta, b.vertex(l).unwrap())[..d - 1]))
            .collect();
        let dst: Vec<HPoint> = fb
            .vertices
            .iter()
            .map(|l| HPoint::from_affine(&y_of(&alpha, a.vertex(&sigma[l]).unwrap())[..d - 1]))
            .collect();
        let m = find_projective_map(&src, &dst)
            .map_err(|_| SumError::NotProjective)?
            .ok_or(SumError::NotProjective)?;
        let mut mm: Matrix = m.matrix().to_vec();
        // keep the weight positive on the facet
        let first = fb.vertices.iter().next().unwrap();
        let mut probe = y_of(&beta, b.vertex(first).unwrap())[..d - 1].to_vec();
        probe.push(Scalar::one());
        if linalg::dot(&mm[d - 1], &probe).is_negative() {
            mm = mm.iter().map(|r| r.iter().map(|c| -c).collect()).collect();
        }
        let mut full: Matrix = vec![vec![Scalar::zero(); d + 1]; d + 1];
        for (r, row) in mm.iter().enumerate() {
            let rr = if r == d - 1 { d } else { r };
            for (c, v) in row.iter().enumerate() {
                let cc = if c == d - 1 { d } else { c };
                full[rr][cc] = v.clone();
            }
        }
        full[d - 1][d - 1] = Scalar::one();
        ProjectiveMap::new(full).map_err(|_| SumError::NotProjective)?
    };

    let fb_y: Vec<Vec<Scalar>> = fb.vertices.iter().map(|l| y_of(&beta, b.vertex(l).unwrap())).collect();
    let fb_refs: Vec<&[Scalar]> = fb_y.iter().map(Vec::as_slice).collect();
    let c = linalg::centroid(&fb_refs);

    const MAX_DOUBLINGS: u32 = 40;
    let mut mu = Scalar::zero();
    for round in 0..=MAX_DOUBLINGS {
        let mut cm: Matrix = ProjectiveMap::identity(d).matrix().to_vec();
        for r in 0..d - 1 {
            cm[r][d - 1] = &mu * &c[r];
        }
        cm[d][d - 1] = mu.clone();
        let collapse = ProjectiveMap::new(cm).unwrap();
        let t = alpha_inv.compose(&g).compose(&collapse).compose(&beta);
        mu = if round == 0 { Scalar::one() } else { &mu * Scalar::from_int(2) };
        if let Some(out) = try_position(a, b, facet_a, facet_b, &sigma, &t, prefix) {
            return Ok(out);
        }
    }
    Err(SumError::NoPositioning(MAX_DOUBLINGS))
}

fn try_position(
    a: &Polytope,
    b: &Polytope,
    facet_a: usize,
    facet_b: usize,
    sigma: &BTreeMap<String, String>,
    t: &ProjectiveMap,
    prefix: &str,
) -> Option<(Polytope, Polytope)> {
    let fa = &a.facets()[facet_a];
    let fb = &b.facets()[facet_b];
    let mut placed: Vec<(String, Vec<Scalar>)> = Vec::new();
    for (l, x) in b.vertices() {
        let hp = t.apply(&HPoint::from_affine(x));
        let y = hp.to_affine()?;
        if let Some(target) = sigma.get(l) {
            if a.vertex(target).unwrap() != &y[..] {
                return None;
            }
            placed.push((target.clone(), y));
            continue;
        }
        if fa.halfspace.side(&y) <= 0 {
            return None;
        }
        for (i, f) in a.facets().iter().enumerate() {
            if i != facet_a && f.halfspace.side(&y) >= 0 {
                return None;
            }
        }
        placed.push((format!("{prefix}{l}"), y));
    }
    let positioned = hull_of(a.ambient(), placed.clone());
    if positioned.vertex_count() != b.vertex_count() {
        return None;
    }
    for f in positioned.facets() {
        if f.vertices == fa.vertices {
            continue;
        }
        for (l, x) in a.vertices() {
            if !fa.vertices.contains(l) && f.halfspace.side(x) >= 0 {
                return None;
            }
        }
    }
    let mut all: Vec<(String, Vec<Scalar>)> = a.vertices().map(|(l, x)| (l.to_string(), x.to_vec())).collect();
    all.extend(placed.into_iter().filter(|(l, _)| !fa.vertices.contains(l)));
    let sum = hull_of(a.ambient(), all);
    let expect_v = a.vertex_count() + b.vertex_count() - fb.vertices.len();
    let expect_f = a.facet_count() + b.facet_count() - 2;
    (sum.vertex_count() == expect_v && sum.facet_count() == expect_f).then_some((sum, positioned))
}

fn standard_simplex(d: usize) -> Polytope {
    let pts = (0..=d)
        .map(|i| {
            let mut x = vec![Scalar::zero(); d];
            if i > 0 {
                x[i - 1] = Scalar::one();
            }
            (format!("v{i}"), x)
        })
        .collect();
    hull_of(d, pts)
}

/// Point just beyond facet `fi` and beneath every other facet.
fn stack_point(p: &Polytope, fi: usize) -> Vec<Scalar> {
    let f = &p.facets()[fi];
    let refs: Vec<&[Scalar]> = f.vertices.iter().map(|l| p.vertex(l).unwrap()).collect();
    let g = linalg::centroid(&refs);
    let mut h = Scalar::one();
    loop {
        let x = linalg::add(&g, &linalg::scale(&f.halfspace.normal, &h));
        let ok = p
            .facets()
            .iter()
            .enumerate()
            .all(|(j, o)| j == fi || o.halfspace.side(&x) < 0);
        if ok {
            return x;
        }
        h = h * Scalar::ratio(1, 2);
    }
}

/// Stacked d-polytope: a simplex with `s` vertices stacked onto random facets.
pub fn stacked_generator(d: usize, s: usize, seed: u64) -> (Polytope, StackedRecipe) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = standard_simplex(d);
    let mut recipe = StackedRecipe {
        dim: d,
        k: d + 1,
        pieces: vec![p.clone()],
        steps: Vec::new(),
    };
    for j in 0..s {
        let fi = rng.gen_range(0..p.facet_count());
        let x = stack_point(&p, fi);
        let label = format!("v{}", d + 1 + j);
        let onto = p.facets()[fi].vertices.clone();
        let mut piece_pts: Vec<(String, Vec<Scalar>)> =
            onto.iter().map(|l| (l.clone(), p.vertex(l).unwrap().to_vec())).collect();
        piece_pts.push((label.clone(), x.clone()));
        let mut all: Vec<(String, Vec<Scalar>)> = p.vertices().map(|(l, y)| (l.to_string(), y.to_vec())).collect();
        all.push((label, x));
        p = hull_of(d, all);
        recipe.pieces.push(hull_of(d, piece_pts));
        recipe.steps.push(GlueStep {
            piece: j + 1,
            onto,
        });
    }
    (p, recipe)
}

fn from_ints(labels_coords: &[(&str, &[i64])]) -> Polytope {
    let d = labels_coords[0].1.len();
    hull_of(
        d,
        labels_coords
            .iter()
            .map(|(l, x)| (l.to_string(), x.iter().map(|&c| Scalar::from_int(c)).collect()))
            .collect(),
    )
}

/// Summand shapes with at most `k` facets.
fn catalog(d: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<Polytope> {
    let mut out = vec![standard_simplex(d)];
    if d == 3 {
        let prism = from_ints(&[
            ("a", &[0, 0, 0]),
            ("b", &[2, 0, 0]),
            ("c", &[0, 2, 0]),
            ("d", &[0, 0, 2]),
            ("e", &[2, 0, 2]),
            ("f", &[0, 2, 2]),
        ]);
        let square_pyramid = from_ints(&[
            ("a", &[0, 0, 0]),
            ("b", &[2, 0, 0]),
            ("c", &[2, 2, 0]),
            ("d", &[0, 2, 0]),
            ("e", &[1, 1, 2]),
        ]);
        let bipyramid = from_ints(&[
            ("a", &[2, 0, 0]),
            ("b", &[0, 2, 0]),
            ("c", &[0, 0, 0]),
            ("d", &[1, 1, 2]),
            ("e", &[1, 1, -2]),
        ]);
        let pentagonal_pyramid = from_ints(&[
            ("a", &[0, 0, 0]),
            ("b", &[4, 0, 0]),
            ("c", &[5, 3, 0]),
            ("d", &[2, 5, 0]),
            ("e", &[-1, 3, 0]),
            ("f", &[2, 2, 3]),
        ]);
        let cube = from_ints(&[
            ("a", &[0, 0, 0]),
            ("b", &[1, 0, 0]),
            ("c", &[0, 1, 0]),
            ("d", &[1, 1, 0]),
            ("e", &[0, 0, 1]),
            ("f", &[1, 0, 1]),
            ("g", &[0, 1, 1]),
            ("h", &[1, 1, 1]),
        ]);
        out.extend([prism, square_pyramid, bipyramid, pentagonal_pyramid, cube]);
    } else {
        // stacked simplices: d + 1 + j (d − 1) facets
        let mut j = 1;
        while d + 1 + j * (d - 1) <= k {
            out.push(stacked_generator(d, j, rng.gen()).0);
            j += 1;
        }
    }
    out.retain(|p| p.facet_count() <= k);
    out
}

/// Connected sum of `parts` summands, each with at most `k` facets. Gluing
/// uses triangle and quadrilateral facets in dimension 3 and simplex facets
/// otherwise.
pub fn kstacked_generator(d: usize, k: usize, parts: usize, seed: u64) -> Result<(Polytope, StackedRecipe), SumError> {
    if k < d + 1 {
        return Err(SumError::InfeasibleK { k, min: d + 1 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shapes = catalog(d, k, &mut rng);
    let glueable = |n: usize| n == d || (d == 3 && n == 4);
    let first = shapes.choose(&mut rng).unwrap().relabeled(|l| format!("s0:{l}"));
    let mut sum = first.clone();
    let mut recipe = StackedRecipe {
        dim: d,
        k,
        pieces: vec![first],
        steps: Vec::new(),
    };
    let mut attempts = 0;
    while recipe.pieces.len() < parts.max(1) {
        attempts += 1;
        if attempts > 50 * parts.max(1) {
            return Err(SumError::NoPositioning(0));
        }
        let shape = shapes.choose(&mut rng).unwrap();
        let shape_facets: Vec<usize> = (0..shape.facet_count())
            .filter(|&i| glueable(shape.facets()[i].vertices.len()))
            .collect();
        let Some(&fb) = shape_facets.choose(&mut rng) else {
            continue;
        };
        let size = shape.facets()[fb].vertices.len();
        let targets: Vec<usize> = (0..sum.facet_count())
            .filter(|&i| sum.facets()[i].vertices.len() == size)
            .collect();
        let Some(&fa) = targets.choose(&mut rng) else {
            continue;
        };
        let idx = recipe.pieces.len();
        let prefix = format!("s{idx}:");
        let Ok((next, piece)) = connected_sum(&sum, shape, fa, fb, &prefix) else {
            continue;
        };
        recipe.steps.push(GlueStep {
            piece: idx,
            onto: sum.facets()[fa].vertices.clone(),
        });
        recipe.pieces.push(piece);
        sum = next;
    }
    Ok((sum, recipe))
}
