//! Derivation certificates: points determined from a frame by meets of joins.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::config::{coord_label, lattice, PointConfiguration};
use crate::exact::Scalar;
use crate::linalg::{self, Matrix};
use crate::projgeom::{meet_all, Flat, HPoint};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DeriveError {
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("{0} is used before it is determined")]
    Undetermined(String),
    #[error("step {step} does not evaluate to a point (dimension {dim})")]
    NotAPoint { step: usize, dim: isize },
    #[error("malformed step {0:?}")]
    Parse(String),
    #[error("dimension {0} not supported here")]
    Dimension(usize),
}

/// Reference to a configuration label or a numbered intermediate point.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Ref {
    Label(String),
    Inter(usize),
}

impl Ref {
    pub fn label(s: impl Into<String>) -> Self {
        Ref::Label(s.into())
    }
}

impl fmt::Display for Ref {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ref::Label(s) => write!(f, "{s}"),
            Ref::Inter(k) => write!(f, "#{k}"),
        }
    }
}

impl FromStr for Ref {
    type Err = DeriveError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(DeriveError::Parse("empty reference".into()));
        }
        match s.strip_prefix('#') {
            Some(k) => k
                .parse()
                .map(Ref::Inter)
                .map_err(|_| DeriveError::Parse(s.to_string())),
            None => Ok(Ref::Label(s.to_string())),
        }
    }
}

/// `target <- meet(join(..), join(..), ...)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub target: Ref,
    pub joins: Vec<Vec<Ref>>,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let joins: Vec<String> = self
            .joins
            .iter()
            .map(|j| {
                let parts: Vec<String> = j.iter().map(Ref::to_string).collect();
                format!("join({})", parts.join(","))
            })
            .collect();
        write!(f, "{} <- meet({})", self.target, joins.join(", "))
    }
}

/// Split on top-level commas, respecting parentheses.
fn split_top(s: &str) -> Result<Vec<&str>, DeriveError> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(DeriveError::Parse(s.to_string()));
                }
            }
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(DeriveError::Parse(s.to_string()));
    }
    out.push(&s[start..]);
    Ok(out)
}

fn strip_call<'a>(s: &'a str, name: &str) -> Result<&'a str, DeriveError> {
    let s = s.trim();
    s.strip_prefix(name)
        .map(str::trim_start)
        .and_then(|r| r.strip_prefix('('))
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| DeriveError::Parse(s.to_string()))
}

impl FromStr for Step {
    type Err = DeriveError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (target, rhs) = s
            .split_once("<-")
            .ok_or_else(|| DeriveError::Parse(s.to_string()))?;
        let inner = strip_call(rhs, "meet")?;
        let joins = split_top(inner)?
            .into_iter()
            .map(|j| {
                let args = strip_call(j, "join")?;
                split_top(args)?.into_iter().map(str::parse).collect()
            })
            .collect::<Result<Vec<Vec<Ref>>, _>>()?;
        if joins.is_empty() || joins.iter().any(Vec::is_empty) {
            return Err(DeriveError::Parse(s.to_string()));
        }
        Ok(Step {
            target: target.parse()?,
            joins,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DerivationCertificate {
    pub frame: Vec<String>,
    pub steps: Vec<Step>,
}

impl DerivationCertificate {
    pub fn new(frame: Vec<String>) -> Self {
        Self {
            frame,
            steps: Vec::new(),
        }
    }

    /// Labels determined by steps.
    pub fn derived(&self) -> BTreeSet<String> {
        self.steps
            .iter()
            .filter_map(|s| match &s.target {
                Ref::Label(l) => Some(l.clone()),
                Ref::Inter(_) => None,
            })
            .collect()
    }

    pub fn next_inter(&self) -> usize {
        self.steps
            .iter()
            .flat_map(|s| std::iter::once(&s.target).chain(s.joins.iter().flatten()))
            .filter_map(|r| match r {
                Ref::Inter(k) => Some(k + 1),
                Ref::Label(_) => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// Append `other`'s steps with its intermediates renumbered after ours.
    /// Frame labels of `other` not already known are added to the frame.
    pub fn append(&mut self, other: &DerivationCertificate) {
        let known: BTreeSet<String> = self.frame.iter().cloned().chain(self.derived()).collect();
        for l in &other.frame {
            if !known.contains(l) && !self.frame.contains(l) {
                self.frame.push(l.clone());
            }
        }
        let shift = self.next_inter();
        let map = |r: &Ref| match r {
            Ref::Inter(k) => Ref::Inter(k + shift),
            Ref::Label(l) => Ref::Label(l.clone()),
        };
        for s in &other.steps {
            self.steps.push(Step {
                target: map(&s.target),
                joins: s.joins.iter().map(|j| j.iter().map(map).collect()).collect(),
            });
        }
    }

    /// Rename every label.
    pub fn relabeled(&self, f: impl Fn(&str) -> String) -> Self {
        let map = |r: &Ref| match r {
            Ref::Label(l) => Ref::Label(f(l)),
            Ref::Inter(k) => Ref::Inter(*k),
        };
        Self {
            frame: self.frame.iter().map(|l| f(l)).collect(),
            steps: self
                .steps
                .iter()
                .map(|s| Step {
                    target: map(&s.target),
                    joins: s.joins.iter().map(|j| j.iter().map(map).collect()).collect(),
                })
                .collect(),
        }
    }

    pub fn to_lines(&self) -> Vec<String> {
        self.steps.iter().map(Step::to_string).collect()
    }

    pub fn from_lines(frame: Vec<String>, lines: &[String]) -> Result<Self, DeriveError> {
        Ok(Self {
            frame,
            steps: lines.iter().map(|l| l.parse()).collect::<Result<_, _>>()?,
        })
    }
}

/// Replay the steps from known points. Returns every determined point
/// (labels and intermediates) in evaluation order.
pub fn evaluate(
    cert: &DerivationCertificate,
    known: &BTreeMap<String, HPoint>,
) -> Result<BTreeMap<Ref, HPoint>, DeriveError> {
    let mut env: BTreeMap<Ref, HPoint> = BTreeMap::new();
    for l in &cert.frame {
        let p = known.get(l).ok_or_else(|| DeriveError::UnknownLabel(l.clone()))?;
        env.insert(Ref::Label(l.clone()), p.clone());
    }
    for (i, s) in cert.steps.iter().enumerate() {
        let p = eval_step(i, s, &|r| env.get(r).cloned())?;
        env.insert(s.target.clone(), p);
    }
    Ok(env)
}

pub(crate) fn eval_step(i: usize, s: &Step, lookup: &dyn Fn(&Ref) -> Option<HPoint>) -> Result<HPoint, DeriveError> {
    let flats = s
        .joins
        .iter()
        .map(|j| {
            let pts = j
                .iter()
                .map(|r| lookup(r).ok_or_else(|| DeriveError::Undetermined(r.to_string())))
                .collect::<Result<Vec<_>, _>>()?;
            let refs: Vec<&HPoint> = pts.iter().collect();
            Flat::through(&refs).map_err(|_| DeriveError::Parse(s.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let refs: Vec<&Flat> = flats.iter().collect();
    let m = meet_all(&refs).map_err(|_| DeriveError::Parse(s.to_string()))?;
    m.as_point().ok_or(DeriveError::NotAPoint { step: i, dim: m.dim() })
}

/// Outcome of replaying a certificate against a configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Replay {
    pub ok: bool,
    pub derived: BTreeSet<String>,
    pub first_mismatch: Option<String>,
}

/// Replay `cert` on `c`: every label step must land exactly on the stored point.
pub fn replay(c: &PointConfiguration, cert: &DerivationCertificate) -> Result<Replay, DeriveError> {
    let canon = |r: &Ref| -> Result<Ref, DeriveError> {
        match r {
            Ref::Label(l) => c
                .resolve(l)
                .map(|m| Ref::Label(m.to_string()))
                .ok_or_else(|| DeriveError::UnknownLabel(l.clone())),
            Ref::Inter(k) => Ok(Ref::Inter(*k)),
        }
    };
    let mut env: BTreeMap<Ref, HPoint> = BTreeMap::new();
    for l in &cert.frame {
        let r = canon(&Ref::Label(l.clone()))?;
        env.insert(r, c.hpoint(l).unwrap());
    }
    let mut derived = BTreeSet::new();
    for (i, s) in cert.steps.iter().enumerate() {
        let p = eval_step(i, s, &|r| canon(r).ok().and_then(|r| env.get(&r).cloned()))?;
        let target = canon(&s.target)?;
        if let Ref::Label(l) = &target {
            if c.hpoint(l).unwrap() != p {
                return Ok(Replay {
                    ok: false,
                    derived,
                    first_mismatch: Some(s.target.to_string()),
                });
            }
            derived.insert(l.clone());
        }
        env.insert(target, p);
    }
    Ok(Replay {
        ok: true,
        derived,
        first_mismatch: None,
    })
}

pub fn check_certificate(c: &PointConfiguration, cert: &DerivationCertificate) -> Result<bool, DeriveError> {
    Ok(replay(c, cert)?.ok)
}

/// Small helper for writing certificates by hand.
#[derive(Debug, Default)]
pub struct CertBuilder {
    cert: DerivationCertificate,
    next: usize,
}

impl CertBuilder {
    pub fn new(frame: Vec<String>) -> Self {
        Self {
            cert: DerivationCertificate::new(frame),
            next: 0,
        }
    }

    pub fn step(&mut self, target: &str, joins: Vec<Vec<Ref>>) -> Ref {
        let t = Ref::label(target);
        self.cert.steps.push(Step {
            target: t.clone(),
            joins,
        });
        t
    }

    pub fn inter(&mut self, joins: Vec<Vec<Ref>>) -> Ref {
        let t = Ref::Inter(self.next);
        self.next += 1;
        self.cert.steps.push(Step {
            target: t.clone(),
            joins,
        });
        t
    }

    pub fn finish(self) -> DerivationCertificate {
        self.cert
    }
}

fn ql(v: &[i64]) -> String {
    coord_label("qd", v)
}

fn qr(v: &[i64]) -> Ref {
    Ref::Label(ql(v))
}

/// Frame certificate for Q^d. For d = 3 the frame is W (cube vertices and
/// origin); for d ≥ 4 it is the projective basis {v_0, …, v_d, o} with
/// v_0 = (1,…,1) and v_i = v_0 − 2e_i.
pub fn qd_frame_certificate(d: usize) -> Result<DerivationCertificate, DeriveError> {
    if d < 3 {
        return Err(DeriveError::Dimension(d));
    }
    if d == 3 {
        return Ok(w_certificate());
    }
    let ones = vec![1i64; d];
    let v = |i: usize| {
        let mut x = ones.clone();
        x[i] = -1;
        x
    };
    let neg = |x: &[i64]| x.iter().map(|c| -c).collect::<Vec<_>>();
    let o = vec![0i64; d];
    let mut frame = vec![ql(&ones)];
    frame.extend((0..d).map(|i| ql(&v(i))));
    frame.push(ql(&o));
    let mut b = CertBuilder::new(frame);
    let mut known: BTreeSet<Vec<i64>> = BTreeSet::new();
    known.insert(ones.clone());
    known.insert(o.clone());
    for i in 0..d {
        known.insert(v(i));
    }
    // −v_i on the line o v_i and the hyperplane x_i = 1
    for i in 0..d {
        let mut hyper = vec![qr(&ones)];
        hyper.extend((0..d).filter(|&j| j != i).map(|j| qr(&v(j))));
        b.step(&ql(&neg(&v(i))), vec![vec![qr(&o), qr(&v(i))], hyper]);
        known.insert(neg(&v(i)));
    }
    // −v_0 on the line o v_0 and the hyperplane x_1 = −1
    let mut hyper = vec![qr(&v(0))];
    hyper.extend((1..d).map(|j| qr(&neg(&v(j)))));
    b.step(&ql(&neg(&ones)), vec![vec![qr(&o), qr(&ones)], hyper]);
    known.insert(neg(&ones));
    // directions e_i from the parallel edges v_0 v_i and −v_0 −v_i
    let inf: Vec<Ref> = (0..d)
        .map(|i| {
            b.inter(vec![
                vec![qr(&ones), qr(&v(i))],
                vec![qr(&neg(&ones)), qr(&neg(&v(i)))],
            ])
        })
        .collect();
    // ±e_i as centers of the facets x_i = ±1
    for i in 0..d {
        let mut e = o.clone();
        e[i] = 1;
        b.step(&ql(&e), vec![vec![qr(&o), inf[i].clone()], vec![qr(&ones), qr(&neg(&v(i)))]]);
        known.insert(e.clone());
        let me = neg(&e);
        b.step(&ql(&me), vec![vec![qr(&o), inf[i].clone()], vec![qr(&neg(&ones)), qr(&v(i))]]);
        known.insert(me);
    }
    // everything else as an intersection of coordinate hyperplanes
    for x in lattice(d, -1, 1) {
        if known.contains(&x) {
            continue;
        }
        let joins = (0..d)
            .map(|j| {
                let mut c = o.clone();
                c[j] = x[j];
                let mut h = vec![qr(&c)];
                h.extend((0..d).filter(|&k| k != j).map(|k| inf[k].clone()));
                h
            })
            .collect();
        b.step(&ql(&x), joins);
    }
    Ok(b.finish())
}

/// The W-frame certificate for Q³: facet centers as meets of facet diagonals,
/// then edge midpoints as meets of edges with coordinate planes.
fn w_certificate() -> DerivationCertificate {
    let w = crate::config::w_config();
    let mut b = CertBuilder::new(w.labels().map(str::to_string).collect());
    let axis = |i: usize, s: i64| {
        let mut x = vec![0i64; 3];
        x[i] = s;
        x
    };
    for i in 0..3 {
        for s in [1i64, -1] {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            let corner = |a: i64, c: i64| {
                let mut x = vec![0i64; 3];
                x[i] = s;
                x[j] = a;
                x[k] = c;
                qr(&x)
            };
            b.step(
                &ql(&axis(i, s)),
                vec![vec![corner(1, 1), corner(-1, -1)], vec![corner(1, -1), corner(-1, 1)]],
            );
        }
    }
    for x in lattice(3, -1, 1) {
        let zeros: Vec<usize> = (0..3).filter(|&i| x[i] == 0).collect();
        if zeros.len() != 1 {
            continue;
        }
        let j = zeros[0];
        let (k, l) = ((j + 1) % 3, (j + 2) % 3);
        let mut a = x.clone();
        a[j] = 1;
        let mut c = x.clone();
        c[j] = -1;
        b.step(
            &ql(&x),
            vec![
                vec![qr(&a), qr(&c)],
                vec![qr(&[0, 0, 0]), qr(&axis(k, x[k])), qr(&axis(l, x[l]))],
            ],
        );
    }
    b.finish()
}

/// Last vertex (1,…,1) of the cube {−1,1}^d from the other 2^d − 1.
pub fn cube_last_vertex_certificate(d: usize) -> Result<DerivationCertificate, DeriveError> {
    if d < 3 {
        return Err(DeriveError::Dimension(d));
    }
    let ones = vec![1i64; d];
    let verts: Vec<Vec<i64>> = lattice(d, -1, 1)
        .into_iter()
        .filter(|v| v.iter().all(|&c| c != 0))
        .collect();
    let frame = verts.iter().filter(|v| **v != ones).map(|v| ql(v)).collect();
    let mut b = CertBuilder::new(frame);
    let joins = (0..d)
        .map(|i| {
            verts
                .iter()
                .filter(|v| v[i] == 1 && **v != ones)
                .map(|v| qr(v))
                .collect()
        })
        .collect();
    b.step(&ql(&ones), joins);
    Ok(b.finish())
}

struct Candidate {
    refs: Vec<Ref>,
    eqs: Matrix,
}

fn contains(eqs: &Matrix, p: &HPoint) -> bool {
    eqs.iter().all(|e| linalg::dot(e, p.coords()).is_zero())
}

/// Greedy closure: repeatedly derive configuration points that are the
/// unique common point of flats joined from determined points. Points at
/// infinity (directions of joined lines) are added as intermediates. Flats
/// are joins of at most `min(d, 3)` points; `budget` bounds the rounds.
pub fn propagate(c: &PointConfiguration, frame: &[String], budget: usize) -> DerivationCertificate {
    let d = c.dim();
    let mut b = CertBuilder::new(frame.to_vec());
    let mut pts: Vec<(Ref, HPoint)> = frame
        .iter()
        .filter_map(|l| c.hpoint(l).map(|p| (Ref::Label(l.clone()), p)))
        .collect();
    let mut known: BTreeSet<HPoint> = pts.iter().map(|(_, p)| p.clone()).collect();
    let max_join = d.clamp(2, 3);
    for _round in 0..budget {
        let mut progress = false;
        // candidate flats, deduplicated
        let mut flats: Vec<Candidate> = Vec::new();
        let mut seen: BTreeSet<Vec<Vec<Scalar>>> = BTreeSet::new();
        for size in 2..=max_join {
            for s in crate::config::subsets(pts.len(), size) {
                let hp: Vec<&HPoint> = s.iter().map(|&i| &pts[i].1).collect();
                let f = Flat::through(&hp).unwrap();
                if f.dim() != size as isize - 1 || !seen.insert(f.basis().to_vec()) {
                    continue;
                }
                flats.push(Candidate {
                    refs: s.iter().map(|&i| pts[i].0.clone()).collect(),
                    eqs: f.equations(),
                });
            }
        }
        for (label, x) in c.iter() {
            let p = HPoint::from_affine(x);
            if known.contains(&p) {
                continue;
            }
            let mut chosen: Vec<&Candidate> = Vec::new();
            let mut eqs: Matrix = Vec::new();
            let mut rank = 0;
            for f in flats.iter().filter(|f| contains(&f.eqs, &p)) {
                let mut trial = eqs.clone();
                trial.extend(f.eqs.iter().cloned());
                let r = linalg::rank(&trial);
                if r > rank {
                    rank = r;
                    eqs = trial;
                    chosen.push(f);
                }
                if rank == d {
                    break;
                }
            }
            if rank == d {
                let r = b.step(label, chosen.iter().map(|f| f.refs.clone()).collect());
                pts.push((r, p.clone()));
                known.insert(p);
                progress = true;
            }
        }
        // directions of lines through determined finite points
        let infinite: Vec<usize> = (0..pts.len()).filter(|&i| !pts[i].1.is_finite()).collect();
        let at_infinity = if infinite.len() >= d {
            let hp: Vec<&HPoint> = infinite.iter().map(|&i| &pts[i].1).collect();
            let f = Flat::through(&hp).unwrap();
            (f.dim() == d as isize - 1).then(|| {
                let basis = crate::config::subsets(infinite.len(), d)
                    .into_iter()
                    .find(|s| {
                        let hp: Vec<&HPoint> = s.iter().map(|&i| &pts[infinite[i]].1).collect();
                        Flat::through(&hp).unwrap().dim() == d as isize - 1
                    })
                    .unwrap();
                basis.iter().map(|&i| pts[infinite[i]].0.clone()).collect::<Vec<Ref>>()
            })
        } else {
            None
        };
        let finite: Vec<usize> = (0..pts.len()).filter(|&i| pts[i].1.is_finite()).collect();
        let mut by_dir: BTreeMap<HPoint, Vec<(usize, usize)>> = BTreeMap::new();
        for (ai, &i) in finite.iter().enumerate() {
            for &j in &finite[ai + 1..] {
                let dir = linalg::sub(&pts[j].1.to_affine().unwrap(), &pts[i].1.to_affine().unwrap());
                let h = HPoint::direction(&dir).unwrap();
                if !known.contains(&h) {
                    by_dir.entry(h).or_default().push((i, j));
                }
            }
        }
        for (h, lines) in by_dir {
            let (i, j) = lines[0];
            let line = vec![pts[i].0.clone(), pts[j].0.clone()];
            // a second, distinct parallel line
            let other = lines.iter().find(|&&(k, l)| {
                let f = Flat::through(&[&pts[i].1, &pts[j].1]).unwrap();
                !f.contains(&pts[k].1) || !f.contains(&pts[l].1)
            });
            let joins = match (other, &at_infinity) {
                (Some(&(k, l)), _) => vec![line, vec![pts[k].0.clone(), pts[l].0.clone()]],
                (None, Some(inf)) => vec![line, inf.clone()],
                (None, None) => continue,
            };
            let r = b.inter(joins);
            pts.push((r, h.clone()));
            known.insert(h);
            progress = true;
        }
        if !progress {
            break;
        }
    }
    prune_unused(b.finish())
}

/// Drop intermediate steps nothing depends on.
fn prune_unused(cert: DerivationCertificate) -> DerivationCertificate {
    let mut needed: BTreeSet<Ref> = BTreeSet::new();
    let mut keep = vec![false; cert.steps.len()];
    for (i, s) in cert.steps.iter().enumerate().rev() {
        if matches!(s.target, Ref::Label(_)) || needed.contains(&s.target) {
            keep[i] = true;
            needed.extend(s.joins.iter().flatten().cloned());
        }
    }
    DerivationCertificate {
        frame: cert.frame,
        steps: cert
            .steps
            .into_iter()
            .zip(keep)
            .filter(|(_, k)| *k)
            .map(|(s, _)| s)
            .collect(),
    }
}
