//! Functional arrangements: ruler constructions computing field operations on
//! the x-axis of the plane, compiled from integer polynomials.

mod expr;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{
    coord_label, embed_plane, grid, grid_labels, lattice, proj_box, union_labeled, ConfigError, PointConfiguration,
    Role,
};
use crate::derive::{eval_step, qd_frame_certificate, DerivationCertificate, DeriveError, Ref, Step};
use crate::exact::{isolate_roots, IntPolynomial, RatPoly, Scalar};
use crate::linalg;
use crate::projgeom::HPoint;

pub use expr::parse_polynomial;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VonStaudtError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("wiring makes the composition cyclic")]
    CyclicWiring,
    #[error("malformed template: {0}")]
    BadTemplate(String),
    #[error("expected {expected} inputs, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("the value is not a root of {0}")]
    NotARoot(String),
    #[error("no isolating interval of {0} contains the value")]
    NotIsolated(String),
    #[error("coordinate {0} must be positive")]
    NonPositive(usize),
    #[error("dimension must be at least 3, got {0}")]
    Dimension(usize),
    #[error("construction left the affine plane at {0}")]
    AtInfinity(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Derive(#[from] DeriveError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Add,
    Mlt,
    Sub,
    Div,
}

impl Op {
    pub fn apply(self, a: &Scalar, b: &Scalar) -> Result<Scalar, VonStaudtError> {
        Ok(match self {
            Op::Add => a + b,
            Op::Mlt => a * b,
            Op::Sub => a - b,
            Op::Div => {
                if b.is_zero() {
                    return Err(VonStaudtError::DivisionByZero);
                }
                a / b
            }
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Op::Add => "ADD",
            Op::Mlt => "MLT",
            Op::Sub => "SUB",
            Op::Div => "DIV",
        }
    }
}

/// Argument of a gadget node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Operand {
    Input(usize),
    Zero,
    One,
    Node(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Node {
    pub op: Op,
    pub a: Operand,
    pub b: Operand,
}

/// Acyclic wiring of gadgets: node `k` may only read inputs, the constants,
/// and nodes before `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrangementTemplate {
    inputs: usize,
    nodes: Vec<Node>,
    output: Operand,
}

/// How an inner template input is fed when composing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Binding {
    /// Identified with an input of the outer template.
    Shared(usize),
    /// A new variable; equal ids are the same variable.
    Fresh(usize),
}

/// Feed the inner output into outer input `slot`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wiring {
    pub slot: usize,
    pub inner_inputs: Vec<Binding>,
}

impl ArrangementTemplate {
    pub fn new(inputs: usize, nodes: Vec<Node>, output: Operand) -> Result<Self, VonStaudtError> {
        let ok = |o: &Operand, k: usize| match *o {
            Operand::Input(i) => i < inputs,
            Operand::Node(j) => j < k,
            Operand::Zero | Operand::One => true,
        };
        for (k, n) in nodes.iter().enumerate() {
            if !ok(&n.a, k) || !ok(&n.b, k) {
                return Err(VonStaudtError::BadTemplate(format!("node {k} reads an unavailable operand")));
            }
        }
        if !ok(&output, nodes.len()) {
            return Err(VonStaudtError::BadTemplate("output is not available".into()));
        }
        Ok(Self { inputs, nodes, output })
    }

    /// One gadget applied to two inputs.
    pub fn gadget(op: Op) -> Self {
        Self {
            inputs: 2,
            nodes: vec![Node {
                op,
                a: Operand::Input(0),
                b: Operand::Input(1),
            }],
            output: Operand::Node(0),
        }
    }

    pub fn identity() -> Self {
        Self {
            inputs: 1,
            nodes: Vec::new(),
            output: Operand::Input(0),
        }
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn output(&self) -> Operand {
        self.output
    }

    /// Direct arithmetic evaluation, without geometry.
    pub fn eval(&self, xs: &[Scalar]) -> Result<Scalar, VonStaudtError> {
        self.check_arity(xs)?;
        let mut vals: Vec<Scalar> = Vec::with_capacity(self.nodes.len());
        let get = |o: Operand, vals: &[Scalar]| match o {
            Operand::Input(i) => xs[i].clone(),
            Operand::Zero => Scalar::zero(),
            Operand::One => Scalar::one(),
            Operand::Node(k) => vals[k].clone(),
        };
        for n in &self.nodes {
            let v = n.op.apply(&get(n.a, &vals), &get(n.b, &vals))?;
            vals.push(v);
        }
        Ok(get(self.output, &vals))
    }

    fn check_arity(&self, xs: &[Scalar]) -> Result<(), VonStaudtError> {
        if xs.len() != self.inputs {
            return Err(VonStaudtError::Arity {
                expected: self.inputs,
                got: xs.len(),
            });
        }
        Ok(())
    }

    /// Build the arrangement for concrete inputs, deriving every auxiliary
    /// and output point by meets and joins from the inputs and the grid.
    pub fn evaluate(&self, xs: &[Scalar]) -> Result<FunctionalArrangement, VonStaudtError> {
        self.check_arity(xs)?;
        let mut config = PointConfiguration::new(2);
        let input_labels: Vec<String> = (0..xs.len()).map(|i| format!("in:{i}")).collect();
        for (l, x) in input_labels.iter().zip(xs) {
            config.insert_with_role(l, vec![x.clone(), Scalar::zero()], Role::Input)?;
        }
        config = union_labeled(&config, &grid(), &[])?;
        let grid_labels = grid_labels();
        let mut frame = input_labels.clone();
        frame.extend(grid_labels.iter().cloned());
        let mut b = GadgetBuilder::new(config, frame);
        let operand = |o: Operand| match o {
            Operand::Input(i) => Ref::Label(format!("in:{i}")),
            Operand::Zero => g(0, 0),
            Operand::One => g(1, 0),
            Operand::Node(k) => Ref::Label(format!("n{k}:out")),
        };
        let mut aux_labels = Vec::new();
        for (k, n) in self.nodes.iter().enumerate() {
            let (a, bb) = (operand(n.a), operand(n.b));
            let aux = format!("n{k}:aux0");
            let out = format!("n{k}:out");
            match n.op {
                Op::Add => {
                    let (h, v) = (b.h(), b.v());
                    let lift = b.point(&aux, Role::Aux, vec![vec![a, v.clone()], vec![g(0, 1), h.clone()]])?;
                    let dir = b.inter(vec![vec![g(0, 1), bb], vec![h, v]])?;
                    b.point(&out, Role::Output, vec![vec![lift, dir], x_axis()])?;
                }
                Op::Mlt => {
                    let ad = b.antidiagonal();
                    let proj = b.point(&aux, Role::Aux, vec![vec![bb, ad], y_axis()])?;
                    let (h, v) = (b.h(), b.v());
                    let dir = b.inter(vec![vec![g(0, 1), a], vec![h, v]])?;
                    b.point(&out, Role::Output, vec![vec![proj, dir], x_axis()])?;
                }
                Op::Sub => {
                    let (h, v) = (b.h(), b.v());
                    let lift = b.point(&aux, Role::Aux, vec![vec![bb, v.clone()], vec![g(0, 1), h.clone()]])?;
                    let dir = b.inter(vec![vec![lift, a], vec![h, v]])?;
                    b.point(&out, Role::Output, vec![vec![g(0, 1), dir], x_axis()])?;
                }
                Op::Div => {
                    if b.coords(&bb).is_some_and(|x| x[0].is_zero()) {
                        return Err(VonStaudtError::DivisionByZero);
                    }
                    let (h, v) = (b.h(), b.v());
                    let dir = b.inter(vec![vec![g(0, 1), bb], vec![h, v]])?;
                    let proj = b.point(&aux, Role::Aux, vec![vec![a, dir], y_axis()])?;
                    let ad = b.antidiagonal();
                    b.point(&out, Role::Output, vec![vec![proj, ad], x_axis()])?;
                }
            }
            aux_labels.push(aux);
        }
        let output_label = operand(self.output).to_string();
        let (config, certificate) = b.finish();
        Ok(FunctionalArrangement {
            config,
            input_labels,
            output_label,
            grid_labels,
            aux_labels,
            certificate,
        })
    }
}

fn g(i: i64, j: i64) -> Ref {
    Ref::Label(coord_label("grid", &[i, j]))
}

fn x_axis() -> Vec<Ref> {
    vec![g(0, 0), g(1, 0)]
}

fn y_axis() -> Vec<Ref> {
    vec![g(0, 0), g(0, 1)]
}

/// Incremental certificate writer that evaluates each step as it goes.
struct GadgetBuilder {
    config: PointConfiguration,
    cert: DerivationCertificate,
    env: BTreeMap<Ref, HPoint>,
    next: usize,
    h: Option<Ref>,
    v: Option<Ref>,
    ad: Option<Ref>,
}

impl GadgetBuilder {
    fn new(config: PointConfiguration, frame: Vec<String>) -> Self {
        let env = frame
            .iter()
            .map(|l| (Ref::Label(l.clone()), config.hpoint(l).unwrap()))
            .collect();
        Self {
            config,
            cert: DerivationCertificate::new(frame),
            env,
            next: 0,
            h: None,
            v: None,
            ad: None,
        }
    }

    fn coords(&self, r: &Ref) -> Option<Vec<Scalar>> {
        self.env.get(r).and_then(HPoint::to_affine)
    }

    fn eval(&mut self, target: Ref, joins: Vec<Vec<Ref>>) -> Result<HPoint, VonStaudtError> {
        let step = Step { target, joins };
        let p = eval_step(self.cert.steps.len(), &step, &|r| self.env.get(r).cloned())?;
        self.env.insert(step.target.clone(), p.clone());
        self.cert.steps.push(step);
        Ok(p)
    }

    fn inter(&mut self, joins: Vec<Vec<Ref>>) -> Result<Ref, VonStaudtError> {
        let r = Ref::Inter(self.next);
        self.next += 1;
        self.eval(r.clone(), joins)?;
        Ok(r)
    }

    fn point(&mut self, label: &str, role: Role, joins: Vec<Vec<Ref>>) -> Result<Ref, VonStaudtError> {
        let r = Ref::label(label);
        let p = self.eval(r.clone(), joins)?;
        let x = p.to_affine().ok_or_else(|| VonStaudtError::AtInfinity(label.to_string()))?;
        self.config.insert_with_role(label, x, role)?;
        Ok(r)
    }

    fn cached(&mut self, slot: fn(&mut Self) -> &mut Option<Ref>, joins: Vec<Vec<Ref>>) -> Ref {
        if let Some(r) = slot(self).clone() {
            return r;
        }
        let r = self.inter(joins).expect("grid directions are points");
        *slot(self) = Some(r.clone());
        r
    }

    /// Horizontal direction.
    fn h(&mut self) -> Ref {
        self.cached(|b| &mut b.h, vec![x_axis(), vec![g(0, 1), g(1, 1)]])
    }

    /// Vertical direction.
    fn v(&mut self) -> Ref {
        self.cached(|b| &mut b.v, vec![y_axis(), vec![g(1, 0), g(1, 1)]])
    }

    /// Direction (1, −1).
    fn antidiagonal(&mut self) -> Ref {
        self.cached(|b| &mut b.ad, vec![vec![g(1, 0), g(0, 1)], vec![g(2, 0), g(0, 2)]])
    }

    fn finish(self) -> (PointConfiguration, DerivationCertificate) {
        (self.config, self.cert)
    }
}

/// A planar configuration computing a function on the x-axis, with the
/// certificate deriving its auxiliary and output points from inputs and grid.
#[derive(Debug, Clone)]
pub struct FunctionalArrangement {
    pub config: PointConfiguration,
    pub input_labels: Vec<String>,
    pub output_label: String,
    pub grid_labels: Vec<String>,
    pub aux_labels: Vec<String>,
    pub certificate: DerivationCertificate,
}

impl FunctionalArrangement {
    pub fn output_point(&self) -> &[Scalar] {
        self.config.get(&self.output_label).expect("output is present")
    }

    /// x-coordinate of the output point.
    pub fn output_value(&self) -> Scalar {
        self.output_point()[0].clone()
    }

    pub fn check(&self) -> Result<bool, DeriveError> {
        crate::derive::check_certificate(&self.config, &self.certificate)
    }
}

pub fn add_gadget(a: &Scalar, b: &Scalar) -> FunctionalArrangement {
    ArrangementTemplate::gadget(Op::Add)
        .evaluate(&[a.clone(), b.clone()])
        .expect("addition is total")
}

pub fn mlt_gadget(a: &Scalar, b: &Scalar) -> FunctionalArrangement {
    ArrangementTemplate::gadget(Op::Mlt)
        .evaluate(&[a.clone(), b.clone()])
        .expect("multiplication is total")
}

pub fn sub_gadget(a: &Scalar, b: &Scalar) -> FunctionalArrangement {
    ArrangementTemplate::gadget(Op::Sub)
        .evaluate(&[a.clone(), b.clone()])
        .expect("subtraction is total")
}

pub fn div_gadget(a: &Scalar, b: &Scalar) -> Result<FunctionalArrangement, VonStaudtError> {
    ArrangementTemplate::gadget(Op::Div).evaluate(&[a.clone(), b.clone()])
}

/// Glue the output of `inner` into input `wiring.slot` of `outer`. Inputs of
/// the result: outer inputs before the slot, then the fresh inner variables
/// in order of first use, then the remaining outer inputs.
pub fn compose(
    outer: &ArrangementTemplate,
    inner: &ArrangementTemplate,
    wiring: &Wiring,
) -> Result<ArrangementTemplate, VonStaudtError> {
    let slot = wiring.slot;
    if slot >= outer.inputs {
        return Err(VonStaudtError::BadTemplate(format!("slot {slot} out of range")));
    }
    if wiring.inner_inputs.len() != inner.inputs {
        return Err(VonStaudtError::Arity {
            expected: inner.inputs,
            got: wiring.inner_inputs.len(),
        });
    }
    let mut fresh: Vec<usize> = Vec::new();
    for b in &wiring.inner_inputs {
        match *b {
            Binding::Shared(j) if j == slot => return Err(VonStaudtError::CyclicWiring),
            Binding::Shared(j) if j >= outer.inputs => {
                return Err(VonStaudtError::BadTemplate(format!("shared input {j} out of range")))
            }
            Binding::Fresh(id) if !fresh.contains(&id) => fresh.push(id),
            _ => {}
        }
    }
    let f = fresh.len();
    let outer_index = |j: usize| if j < slot { j } else { j - 1 + f };
    let map_inner = |o: Operand| match o {
        Operand::Input(i) => match wiring.inner_inputs[i] {
            Binding::Shared(j) => Operand::Input(outer_index(j)),
            Binding::Fresh(id) => Operand::Input(slot + fresh.iter().position(|&x| x == id).unwrap()),
        },
        other => other,
    };
    let shift = inner.nodes.len();
    let inner_out = map_inner(inner.output);
    let map_outer = |o: Operand| match o {
        Operand::Input(j) if j == slot => inner_out,
        Operand::Input(j) => Operand::Input(outer_index(j)),
        Operand::Node(k) => Operand::Node(k + shift),
        other => other,
    };
    let mut nodes: Vec<Node> = inner
        .nodes
        .iter()
        .map(|n| Node {
            op: n.op,
            a: map_inner(n.a),
            b: map_inner(n.b),
        })
        .collect();
    nodes.extend(outer.nodes.iter().map(|n| Node {
        op: n.op,
        a: map_outer(n.a),
        b: map_outer(n.b),
    }));
    ArrangementTemplate::new(outer.inputs - 1 + f, nodes, map_outer(outer.output))
}

struct Compiler {
    nodes: Vec<Node>,
    consts: HashMap<BigInt, Operand>,
}

impl Compiler {
    fn push(&mut self, op: Op, a: Operand, b: Operand) -> Operand {
        self.nodes.push(Node { op, a, b });
        Operand::Node(self.nodes.len() - 1)
    }

    /// Nonnegative integer constant, by a balanced addition tree over 1.
    fn constant(&mut self, n: &BigInt) -> Operand {
        if n.is_zero() {
            return Operand::Zero;
        }
        if n.is_one() {
            return Operand::One;
        }
        if let Some(&o) = self.consts.get(n) {
            return o;
        }
        let (lo, rem) = n.div_rem(&BigInt::from(2));
        let hi = &lo + rem;
        let a = self.constant(&hi);
        let b = self.constant(&lo);
        let o = self.push(Op::Add, a, b);
        self.consts.insert(n.clone(), o);
        o
    }
}

/// Horner scheme over ADD/MLT/SUB gadgets with one input `x`.
pub fn compile_polynomial(psi: &IntPolynomial) -> ArrangementTemplate {
    let mut c = Compiler {
        nodes: Vec::new(),
        consts: HashMap::new(),
    };
    let coeffs = psi.coeffs();
    let Some(lead) = coeffs.last() else {
        return ArrangementTemplate {
            inputs: 1,
            nodes: Vec::new(),
            output: Operand::Zero,
        };
    };
    let mut acc = c.constant(&lead.abs());
    if lead.is_negative() {
        acc = c.push(Op::Sub, Operand::Zero, acc);
    }
    let x = Operand::Input(0);
    for ci in coeffs[..coeffs.len() - 1].iter().rev() {
        acc = if acc == Operand::One {
            x
        } else {
            c.push(Op::Mlt, acc, x)
        };
        if !ci.is_zero() {
            let k = c.constant(&ci.abs());
            acc = c.push(if ci.is_negative() { Op::Sub } else { Op::Add }, acc, k);
        }
    }
    ArrangementTemplate {
        inputs: 1,
        nodes: c.nodes,
        output: acc,
    }
}

/// Template computing the rational constant `r` from the grid alone.
fn rational_template(r: &BigRational) -> ArrangementTemplate {
    let mut c = Compiler {
        nodes: Vec::new(),
        consts: HashMap::new(),
    };
    let mut num = c.constant(&r.numer().abs());
    if r.is_negative() {
        num = c.push(Op::Sub, Operand::Zero, num);
    }
    let out = if r.denom().is_one() {
        num
    } else {
        let den = c.constant(r.denom());
        c.push(Op::Div, num, den)
    };
    ArrangementTemplate {
        inputs: 0,
        nodes: c.nodes,
        output: out,
    }
}

/// `ψ(ζ)` by Horner's scheme in exact arithmetic.
pub fn eval_at(psi: &IntPolynomial, z: &Scalar) -> Scalar {
    psi.coeffs()
        .iter()
        .rev()
        .fold(Scalar::zero(), |acc, c| acc * z + Scalar::from_bigint(c.clone()))
}

/// A nonzero integer polynomial vanishing at `z`: the minimal polynomial
/// of `z` over Q inside its field.
pub fn annihilating_polynomial(z: &Scalar) -> IntPolynomial {
    if let Some(r) = z.as_rational() {
        return IntPolynomial::linear_for(r);
    }
    let n = z.field().expect("irrational scalars live in a field").degree();
    let to_col = |s: &Scalar| {
        let mut c = s.coefficients();
        c.resize(n, BigRational::zero());
        c
    };
    let mut cols = vec![to_col(&Scalar::one())];
    let mut pow = Scalar::one();
    for k in 1..=n {
        pow = &pow * z;
        cols.push(to_col(&pow));
        let m: Vec<Vec<Scalar>> = (0..n)
            .map(|row| cols.iter().map(|c| Scalar::rational(c[row].clone())).collect())
            .collect();
        let ker = linalg::kernel(&m, k + 1);
        if let Some(v) = ker.first() {
            let coeffs = v.iter().map(|s| s.as_rational().unwrap().clone()).collect();
            return RatPoly::new(coeffs).to_int_scaled().primitive();
        }
    }
    unreachable!("n + 1 vectors in dimension n are dependent")
}

/// The configuration K[ζ] in the plane: ζ e_1 together with the grid, pinned
/// down by a polynomial vanishing at ζ.
#[derive(Debug, Clone)]
pub struct CoorScalar {
    pub config: PointConfiguration,
    /// Label of ζ e_1.
    pub point_label: String,
    pub psi: IntPolynomial,
    /// Isolating interval of ψ around an irrational ζ.
    pub guards: Option<(BigRational, BigRational)>,
    pub certificate: DerivationCertificate,
}

impl CoorScalar {
    pub fn check(&self) -> Result<bool, DeriveError> {
        crate::derive::check_certificate(&self.config, &self.certificate)
    }
}

pub fn coor_scalar(z: &Scalar, psi: &IntPolynomial) -> Result<CoorScalar, VonStaudtError> {
    if psi.is_zero() || !eval_at(psi, z).is_zero() {
        return Err(VonStaudtError::NotARoot(psi.to_string()));
    }
    if let Some(r) = z.as_rational() {
        return coor_rational(r);
    }
    let (lo, hi) = isolate_roots(psi)
        .into_iter()
        .find(|(lo, hi)| {
            Scalar::rational(lo.clone()) < *z && *z < Scalar::rational(hi.clone())
        })
        .ok_or_else(|| VonStaudtError::NotIsolated(psi.to_string()))?;
    let f = compile_polynomial(psi).evaluate(std::slice::from_ref(z))?;
    let below = coor_rational(&lo)?;
    let above = coor_rational(&hi)?;
    let mut config = union_labeled(&f.config, &below.config.prefixed("lo:"), &[])?;
    config = union_labeled(&config, &above.config.prefixed("hi:"), &[])?;
    let mut certificate = f.certificate.clone();
    for (prefix, part) in [("lo:", &below), ("hi:", &above)] {
        let renamed = part.certificate.relabeled(|l| {
            config.resolve(&format!("{prefix}{l}")).unwrap().to_string()
        });
        certificate.append(&renamed);
    }
    Ok(CoorScalar {
        config,
        point_label: f.input_labels[0].clone(),
        psi: psi.clone(),
        guards: Some((lo, hi)),
        certificate,
    })
}

/// Rational ζ = p/q: ζ e_1 is built forward from the grid as p/q, then
/// checked against ψ = qx − p.
fn coor_rational(r: &BigRational) -> Result<CoorScalar, VonStaudtError> {
    let psi = IntPolynomial::linear_for(r);
    let two = BigRational::from_integer(BigInt::from(2));
    if r.is_integer() && !r.is_negative() && *r <= two {
        let k = i64::try_from(r.to_integer()).unwrap();
        return Ok(CoorScalar {
            config: grid(),
            point_label: coord_label("grid", &[k, 0]),
            psi,
            guards: None,
            certificate: DerivationCertificate::new(grid_labels()),
        });
    }
    let anchor = rational_template(r);
    let check = compose(
        &compile_polynomial(&psi),
        &anchor,
        &Wiring {
            slot: 0,
            inner_inputs: Vec::new(),
        },
    )?;
    let f = check.evaluate(&[])?;
    let point_label = match anchor.output {
        Operand::Node(k) => format!("n{k}:out"),
        _ => unreachable!("non-grid constants need a node"),
    };
    Ok(CoorScalar {
        config: f.config,
        point_label,
        psi,
        guards: None,
        certificate: f.certificate,
    })
}

/// K[ζ] in R^d: the shifted cube Q^d+1, the box (D/2)(Q^d+1) for D = diag(ζ),
/// and the scalar configurations of every ζ_i and ζ_i/2 in the e_i e_{i+1} plane.
#[derive(Debug, Clone)]
pub struct CoorPoint {
    pub config: PointConfiguration,
    /// Label of the point ζ itself.
    pub point_label: String,
    pub certificate: DerivationCertificate,
}

impl CoorPoint {
    pub fn check(&self) -> Result<bool, DeriveError> {
        crate::derive::check_certificate(&self.config, &self.certificate)
    }
}

fn cube_label(v: &[i64]) -> String {
    coord_label("grid", v)
}

pub fn coor_point(z: &[Scalar]) -> Result<CoorPoint, VonStaudtError> {
    let d = z.len();
    if d < 3 {
        return Err(VonStaudtError::Dimension(d));
    }
    if let Some(i) = z.iter().position(|x| !x.is_positive()) {
        return Err(VonStaudtError::NonPositive(i));
    }
    let mut config = PointConfiguration::new(d);
    for v in lattice(d, 0, 2) {
        config.insert_with_role(cube_label(&v), v.iter().map(|&c| Scalar::from_int(c)).collect(), Role::Grid)?;
    }
    config = union_labeled(&config, &proj_box(z)?, &[])?;
    let half = Scalar::ratio(1, 2);
    let mut parts: Vec<(String, CoorScalar)> = Vec::new();
    for (i, zi) in z.iter().enumerate() {
        let psi = annihilating_polynomial(zi);
        let zh = zi * &half;
        let psi_h = psi.compose_scale(&BigRational::from_integer(BigInt::from(2)));
        for (prefix, value, poly) in [(format!("k{}:", i + 1), zi, &psi), (format!("h{}:", i + 1), &zh, &psi_h)] {
            let k = coor_scalar(value, poly)?;
            let embedded = embed_plane(&k.config.prefixed(&prefix), i + 1, d)?;
            config = union_labeled(&config, &embedded, &[])?;
            parts.push((prefix, k));
        }
    }
    let canon = |l: &str| config.resolve(l).unwrap().to_string();
    let shifted = qd_frame_certificate(d)?.relabeled(|l| {
        let inner = l.trim_start_matches("qd:(").trim_end_matches(')');
        let v: Vec<i64> = inner.split(',').map(|c| c.parse::<i64>().unwrap() + 1).collect();
        canon(&cube_label(&v))
    });
    let mut certificate = shifted;
    for (prefix, k) in &parts {
        certificate.append(&k.certificate.relabeled(|l| canon(&format!("{prefix}{l}"))));
    }
    certificate.append(&proj_certificate(d, &canon));
    let point_label = canon(&coord_label("proj", &vec![2; d]));
    Ok(CoorPoint {
        config,
        point_label,
        certificate,
    })
}

/// Steps deriving every point of the box from its frame: the origin, the
/// corners p_i e_i and the midpoints p_i e_i / 2.
fn proj_certificate(d: usize, canon: &dyn Fn(&str) -> String) -> DerivationCertificate {
    let p = |v: &[i64]| Ref::Label(canon(&coord_label("proj", v)));
    let unit = |i: usize, k: i64| {
        let mut v = vec![0; d];
        v[i] = k;
        v
    };
    let o = p(&vec![0; d]);
    let mut steps = Vec::new();
    let mut next = 0;
    let mut inter = |steps: &mut Vec<Step>, joins: Vec<Vec<Ref>>| {
        let r = Ref::Inter(next);
        next += 1;
        steps.push(Step { target: r.clone(), joins });
        r
    };
    let mut inf = Vec::new();
    for i in 0..d {
        let j = (i + 1) % d;
        let (ai, aj) = (p(&unit(i, 2)), p(&unit(j, 2)));
        let (hi, hj) = (p(&unit(i, 1)), p(&unit(j, 1)));
        let centroid = inter(&mut steps, vec![vec![ai.clone(), hj.clone()], vec![aj.clone(), hi]]);
        let mid = inter(&mut steps, vec![vec![o.clone(), centroid], vec![ai.clone(), aj]]);
        inf.push(inter(&mut steps, vec![vec![hj, mid], vec![o.clone(), ai]]));
    }
    let frame: Vec<String> = crate::config::proj_frame_labels(d).iter().map(|l| canon(l)).collect();
    for v in lattice(d, 0, 2) {
        let label = canon(&coord_label("proj", &v));
        if frame.contains(&label) {
            continue;
        }
        let joins = (0..d)
            .map(|j| {
                let mut h = vec![p(&unit(j, v[j]))];
                h.extend((0..d).filter(|&k| k != j).map(|k| inf[k].clone()));
                h
            })
            .collect();
        steps.push(Step {
            target: Ref::Label(label),
            joins,
        });
    }
    DerivationCertificate { frame, steps }
}

/// One wrong gadget output.
#[derive(Debug, Clone)]
pub struct GadgetFailure {
    pub op: Op,
    pub a: Scalar,
    pub b: Scalar,
    pub got: Option<Scalar>,
}

#[derive(Debug, Clone)]
pub struct GadgetReport {
    pub seed: u64,
    pub trials: usize,
    pub failures: Vec<GadgetFailure>,
}

impl GadgetReport {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for GadgetReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "experiment: gadget soundness")?;
        writeln!(f, "seed: {}", self.seed)?;
        writeln!(f, "trials: {} pairs x 4 operations", self.trials)?;
        for x in &self.failures {
            let got = x.got.as_ref().map_or("error".to_string(), Scalar::to_string);
            writeln!(f, "violation: {}({}, {}) gave {got}", x.op.name(), x.a, x.b)?;
        }
        writeln!(f, "violations: {}", self.failures.len())?;
        write!(f, "result: {}", if self.pass() { "pass" } else { "FAIL" })
    }
}

fn random_rational(rng: &mut ChaCha8Rng) -> Scalar {
    Scalar::ratio(rng.gen_range(-99..=99), rng.gen_range(1..=20))
}

/// Feed random rational pairs through all four gadgets and compare the output
/// point with exact arithmetic. The divisor is resampled until nonzero.
pub fn check_gadgets(trials: usize, seed: u64) -> GadgetReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for _ in 0..trials {
        let a = random_rational(&mut rng);
        let b = loop {
            let b = random_rational(&mut rng);
            if !b.is_zero() {
                break b;
            }
        };
        for op in [Op::Add, Op::Mlt, Op::Sub, Op::Div] {
            let want = op.apply(&a, &b).ok();
            let got = match op {
                Op::Add => Some(add_gadget(&a, &b)),
                Op::Mlt => Some(mlt_gadget(&a, &b)),
                Op::Sub => Some(sub_gadget(&a, &b)),
                Op::Div => div_gadget(&a, &b).ok(),
            }
            .map(|fa| fa.output_value());
            if got.is_none() || got != want {
                failures.push(GadgetFailure {
                    op,
                    a: a.clone(),
                    b: b.clone(),
                    got,
                });
            }
        }
    }
    GadgetReport { seed, trials, failures }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_gadget_check() {
        let r = check_gadgets(25, 7);
        assert!(r.pass(), "{r}");
        assert!(r.to_string().ends_with("result: pass"));
    }
    use crate::exact::NumberField;
    use std::sync::Arc;

    fn s(n: i64) -> Scalar {
        Scalar::from_int(n)
    }

    fn sqrt2() -> Scalar {
        Scalar::theta(&Arc::new(NumberField::quadratic(2).unwrap()))
    }

    #[test]
    fn gadget_outputs() {
        assert_eq!(add_gadget(&s(2), &s(3)).output_value(), s(5));
        assert_eq!(mlt_gadget(&s(2), &s(3)).output_value(), s(6));
        assert_eq!(sub_gadget(&s(5), &s(3)).output_value(), s(2));
        assert_eq!(div_gadget(&s(6), &s(3)).unwrap().output_value(), s(2));
        assert_eq!(sub_gadget(&s(4), &s(4)).output_value(), s(0));
        assert!(matches!(div_gadget(&s(1), &s(0)), Err(VonStaudtError::DivisionByZero)));
        let r = sqrt2();
        assert_eq!(add_gadget(&r, &r).output_value(), &r + &r);
        assert_eq!(mlt_gadget(&r, &r).output_value(), s(2));
    }

    #[test]
    fn gadget_certificates_replay() {
        for f in [add_gadget(&s(2), &s(3)), mlt_gadget(&sqrt2(), &s(3)), sub_gadget(&s(0), &s(7))] {
            assert!(f.check().unwrap());
            assert_eq!(f.certificate.frame.len(), 11);
        }
    }

    #[test]
    fn add_roles() {
        let f = add_gadget(&s(2), &s(3));
        let count = |r| f.config.roles().values().filter(|&&x| x == r).count();
        assert_eq!(count(Role::Grid), 9);
        assert_eq!(count(Role::Input), 2);
        assert_eq!(count(Role::Output), 1);
        assert_eq!(count(Role::Aux), 1);
    }

    #[test]
    fn x_squared_minus_two() {
        let t = compile_polynomial(&IntPolynomial::from_i64s(&[-2, 0, 1]));
        assert_eq!(t.nodes().len(), 3);
        assert_eq!(t.evaluate(&[s(3)]).unwrap().output_value(), s(7));
        let f = t.evaluate(&[sqrt2()]).unwrap();
        assert_eq!(f.output_point(), &[s(0), s(0)]);
        assert!(f.check().unwrap());
    }

    #[test]
    fn zero_polynomial() {
        let t = compile_polynomial(&IntPolynomial::zero());
        assert_eq!(t.evaluate(&[s(5)]).unwrap().output_value(), s(0));
    }

    #[test]
    fn composition_by_hand() {
        let sub = ArrangementTemplate::gadget(Op::Sub);
        let sq = compose(
            &sub,
            &ArrangementTemplate::gadget(Op::Mlt),
            &Wiring {
                slot: 0,
                inner_inputs: vec![Binding::Fresh(0), Binding::Fresh(0)],
            },
        )
        .unwrap();
        let two = ArrangementTemplate::new(
            0,
            vec![Node {
                op: Op::Add,
                a: Operand::One,
                b: Operand::One,
            }],
            Operand::Node(0),
        )
        .unwrap();
        let t = compose(&sq, &two, &Wiring { slot: 1, inner_inputs: vec![] }).unwrap();
        assert_eq!(t.nodes().len(), 3);
        assert_eq!(t.inputs(), 1);
        assert_eq!(t.evaluate(&[s(3)]).unwrap().output_value(), s(7));
    }

    #[test]
    fn identity_wiring_is_neutral() {
        let add = ArrangementTemplate::gadget(Op::Add);
        let w = Wiring {
            slot: 0,
            inner_inputs: vec![Binding::Fresh(0)],
        };
        assert_eq!(compose(&add, &ArrangementTemplate::identity(), &w).unwrap(), add);
        let cyc = Wiring {
            slot: 0,
            inner_inputs: vec![Binding::Shared(0), Binding::Fresh(0)],
        };
        assert_eq!(compose(&add, &add, &cyc), Err(VonStaudtError::CyclicWiring));
    }

    #[test]
    fn rational_coor() {
        let k = coor_scalar(&Scalar::ratio(3, 2), &IntPolynomial::from_i64s(&[-3, 2])).unwrap();
        assert_eq!(k.psi, IntPolynomial::from_i64s(&[-3, 2]));
        assert_eq!(k.config.get(&k.point_label).unwrap(), &[Scalar::ratio(3, 2), s(0)]);
        assert!(k.check().unwrap());
        assert!(k.certificate.derived().contains(&k.point_label));
        let one = coor_scalar(&s(1), &IntPolynomial::from_i64s(&[-1, 1])).unwrap();
        assert!(one.certificate.steps.is_empty());
        assert_eq!(one.point_label, "grid:(1,0)");
    }

    #[test]
    fn irrational_coor() {
        let k = coor_scalar(&sqrt2(), &IntPolynomial::from_i64s(&[-2, 0, 1])).unwrap();
        let (lo, hi) = k.guards.clone().unwrap();
        assert_eq!((lo, hi), (BigRational::one(), BigRational::from_integer(2.into())));
        assert!(k.config.contains_point(&[sqrt2(), s(0)]));
        assert!(k.check().unwrap());
        assert!(coor_scalar(&sqrt2(), &IntPolynomial::from_i64s(&[-3, 0, 1])).is_err());
    }

    #[test]
    fn minimal_polynomials() {
        let r = sqrt2();
        assert_eq!(annihilating_polynomial(&(&r + &s(1))), IntPolynomial::from_i64s(&[-1, -2, 1]));
        assert_eq!(annihilating_polynomial(&Scalar::ratio(3, 4)), IntPolynomial::from_i64s(&[-3, 4]));
    }

    #[test]
    fn coor_point_unit() {
        let k = coor_point(&[s(1), s(1), s(1)]).unwrap();
        for v in lattice(3, 0, 2) {
            let x: Vec<Scalar> = v.iter().map(|&c| s(c)).collect();
            let h: Vec<Scalar> = v.iter().map(|&c| Scalar::ratio(c, 2)).collect();
            assert!(k.config.contains_point(&x) && k.config.contains_point(&h));
        }
        assert!(k.check().unwrap());
    }

    #[test]
    fn coor_point_sqrt2() {
        let z = [sqrt2(), s(1), s(1)];
        let k = coor_point(&z).unwrap();
        assert!(k.config.contains_point(&z));
        assert_eq!(k.config.get(&k.point_label).unwrap(), &z);
        assert!(k.check().unwrap());
        for l in crate::config::proj_frame_labels(3) {
            assert!(k.config.contains_label(&l));
        }
        assert!(coor_point(&[s(1), s(0), s(1)]).is_err());
    }
}
