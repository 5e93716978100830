use std::collections::BTreeSet;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::Serialize;
use unipoly::config::{proj_box, qd, w_config, PPConfiguration, PointConfiguration};
use unipoly::derive::qd_frame_certificate;
use unipoly::exact::parse_rational;
use unipoly::shephard::{ball_approx, ShephardError};
use unipoly::universal::{build_triple, default_cone, lawrence_extension, lawrence_face, universal_polytope, verify_face, Event};
use unipoly::vonstaudt::{
    annihilating_polynomial, compile_polynomial, coor_point, coor_scalar, parse_polynomial, ArrangementTemplate, Op,
};
use unipoly::{IntPolynomial, Role, Scalar};

use super::{load_polytope, parse_field_spec, parse_point, parse_points, usage, CliError, CliResult, Output};
use crate::format::{CertificateDoc, ConfigDoc, PolytopeDoc, ProvenanceDoc};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BuildTarget {
    Qd,
    W,
    ProjBox,
    Coor,
    Universal,
    Lawrence,
    Subdirect,
    Ball,
    Arrangement,
}

#[derive(Debug, Clone, Args)]
pub struct BuildArgs {
    #[arg(value_enum)]
    pub target: BuildTarget,
    /// Dimension of Q^d, or of a named shape.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Comma separated coordinates, e.g. "sqrt2,1,1".
    #[arg(long)]
    pub point: Option<String>,
    /// Number field, e.g. "x^2-2:[1,2]".
    #[arg(long)]
    pub field: Option<String>,
    /// Polytope or configuration document.
    #[arg(long)]
    pub polytope: Option<PathBuf>,
    /// Named shape instead of a file: simplex, tetrahedron, cube, cross, octahedron, square-pyramid.
    #[arg(long)]
    pub shape: Option<String>,
    /// Free points for a Lawrence extension, "x,y,z;x,y,z".
    #[arg(long)]
    pub free: Option<String>,
    /// Gadget for `arrangement`: add, mlt, sub or div.
    #[arg(long)]
    pub op: Option<String>,
    /// Integer polynomial for `arrangement`, e.g. "x^2-2".
    #[arg(long)]
    pub poly: Option<String>,
    /// Target distance for `ball`.
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

fn ev(stage: &str, detail: impl Into<String>) -> Event {
    Event {
        stage: stage.to_string(),
        detail: detail.into(),
    }
}

/// Run a build and return the paths written.
pub fn build(a: &BuildArgs) -> CliResult<Vec<PathBuf>> {
    let stem = match a.target {
        BuildTarget::Qd => format!("qd{}", a.dim.unwrap_or(3)),
        t => t.to_possible_value().unwrap().get_name().to_string(),
    };
    let mut out = Output::new(&a.out, "build", &stem)?;
    out.manifest.param("target", &stem);
    let mut written = Vec::new();
    let mut log = Vec::new();
    match a.target {
        BuildTarget::Qd => {
            let d = a.dim.ok_or_else(|| usage("build qd needs --dim"))?;
            if !(1..=6).contains(&d) {
                return Err(usage("--dim must be between 1 and 6"));
            }
            out.manifest.param("dim", d);
            let c = qd(d);
            log.push(ev("cube", format!("Q^{d}: {} points", c.len())));
            written.push(out.doc("config.json", &ConfigDoc::from_config(&c))?);
            if d >= 3 {
                let cert = qd_frame_certificate(d).map_err(|e| usage(e.to_string()))?;
                log.push(ev(
                    "frame",
                    format!("{} frame points derive {} more", cert.frame.len(), cert.derived().len()),
                ));
                written.push(out.doc("cert.json", &CertificateDoc::from_certificate(&cert))?);
            }
        }
        BuildTarget::W => {
            let c = w_config();
            log.push(ev("frame", format!("W: {} points of Q^3", c.len())));
            written.push(out.doc("config.json", &ConfigDoc::from_config(&c))?);
        }
        BuildTarget::ProjBox => {
            let p = point_arg(a, &mut out)?;
            let c = proj_box(&p).map_err(|e| usage(e.to_string()))?;
            log.push(ev("box", format!("{} points", c.len())));
            written.push(out.doc("config.json", &ConfigDoc::from_config(&c))?);
        }
        BuildTarget::Coor => {
            let p = point_arg(a, &mut out)?;
            let (c, cert, label) = if p.len() == 1 {
                let psi = match p[0].as_rational() {
                    Some(r) => IntPolynomial::linear_for(r),
                    None => annihilating_polynomial(&p[0]),
                };
                let s = coor_scalar(&p[0], &psi).map_err(|e| usage(e.to_string()))?;
                if let Some((lo, hi)) = &s.guards {
                    log.push(ev("isolate", format!("{} has exactly one root in [{lo}, {hi}]", s.psi)));
                }
                (s.config, s.certificate, s.point_label)
            } else {
                let s = coor_point(&p).map_err(|e| usage(e.to_string()))?;
                (s.config, s.certificate, s.point_label)
            };
            log.push(ev("coor", format!("{} points, target {label}", c.len())));
            written.push(out.doc("config.json", &ConfigDoc::from_config(&c))?);
            written.push(out.doc("cert.json", &CertificateDoc::from_certificate(&cert))?);
        }
        BuildTarget::Universal => {
            let p = polytope_arg(a, &mut out)?;
            let u = universal_polytope(&p).map_err(|e| usage(e.to_string()))?;
            log = u.log.clone();
            let labels: BTreeSet<String> = u.base_face_labels.iter().cloned().collect();
            let summary = UniversalSummary {
                format_version: crate::format::FORMAT_VERSION,
                kind: "universal-summary".into(),
                input_dim: u.input_dim,
                q_count: u.q_count,
                r_count: u.r_count,
                dimension: u.dimension,
                vertex_count: u.vertex_count,
                formula_dimension: u.formula_dimension(),
                formula_vertex_count: u.formula_vertex_count(),
                enumerated: u.polytope.is_enumerated(),
                base_face_labels: u.base_face_labels.clone(),
                base_face_normal: u.base_face_witness.normal.iter().map(Scalar::to_string).collect(),
                base_face_offset: u.base_face_witness.offset.to_string(),
                base_face_verified: verify_face(&u.polytope, &labels, &u.base_face_witness.to_flat()),
                base_projectively_equivalent: u.cone.base_equivalence(&u.triple.polytope).is_some(),
            };
            written.push(out.doc("poly.json", &PolytopeDoc::from_polytope(&u.polytope))?);
            written.push(out.doc("cert.json", &CertificateDoc::from_certificate(&u.triple.certificate))?);
            written.push(out.doc("summary.json", &summary)?);
        }
        BuildTarget::Lawrence => {
            let p = polytope_arg(a, &mut out)?;
            let free = a.free.as_deref().ok_or_else(|| usage("build lawrence needs --free"))?;
            out.manifest.param("free", free);
            let mut fc = PointConfiguration::new(p.ambient());
            for (i, x) in parse_points(free, None)?.into_iter().enumerate() {
                fc.insert_with_role(format!("r{i}"), x, Role::Free).map_err(|e| usage(e.to_string()))?;
            }
            let m = fc.len();
            let pp = PPConfiguration::new(p.to_config(), fc).map_err(|e| usage(e.to_string()))?;
            let l = lawrence_extension(&pp);
            let labels: BTreeSet<String> = p.labels().map(str::to_string).collect();
            let face = verify_face(&l, &labels, &lawrence_face(p.ambient(), m).to_flat());
            log.push(ev(
                "lawrence",
                format!("{m} free points: dimension {}, {} vertices, input is a face: {face}", l.dim(), l.vertex_count()),
            ));
            written.push(out.doc("poly.json", &PolytopeDoc::from_polytope(&l))?);
        }
        BuildTarget::Subdirect => {
            let p = polytope_arg(a, &mut out)?;
            let t = build_triple(&p).map_err(|e| usage(e.to_string()))?;
            let cone = default_cone(&t).map_err(|e| usage(e.to_string()))?;
            log = t.log.clone();
            let eq = cone.base_equivalence(&t.polytope).is_some();
            log.push(ev("cone", format!("base projectively equivalent to the input: {eq}")));
            written.push(out.doc("poly.json", &PolytopeDoc::from_polytope(&cone.pyramid))?);
        }
        BuildTarget::Arrangement => {
            let xs = point_arg(a, &mut out)?;
            let template = match (a.op.as_deref(), a.poly.as_deref()) {
                (Some(op), None) => {
                    out.manifest.param("op", op);
                    ArrangementTemplate::gadget(match op {
                        "add" => Op::Add,
                        "mlt" => Op::Mlt,
                        "sub" => Op::Sub,
                        "div" => Op::Div,
                        _ => return Err(usage(format!("unknown gadget {op:?}"))),
                    })
                }
                (None, Some(poly)) => {
                    out.manifest.param("poly", poly);
                    compile_polynomial(&parse_polynomial(poly).map_err(|e| usage(e.to_string()))?)
                }
                _ => return Err(usage("build arrangement needs exactly one of --op and --poly")),
            };
            let f = template.evaluate(&xs).map_err(|e| usage(e.to_string()))?;
            log.push(ev(
                "arrangement",
                format!("{} nodes, output {} at {}", template.nodes().len(), f.output_label, f.output_value()),
            ));
            written.push(out.doc("config.json", &ConfigDoc::from_config(&f.config))?);
            written.push(out.doc("cert.json", &CertificateDoc::from_certificate(&f.certificate))?);
        }
        BuildTarget::Ball => {
            let eps = a.eps.as_deref().ok_or_else(|| usage("build ball needs --eps"))?;
            out.manifest.param("eps", eps);
            out.manifest.seed = Some(a.seed);
            let eps = parse_rational(eps).map_err(|e| usage(e.to_string()))?;
            let b = ball_approx(a.dim.unwrap_or(3), &eps, a.seed).map_err(|e| match e {
                ShephardError::Infeasible { .. } => CliError::Infeasible(e.to_string()),
                e => usage(e.to_string()),
            })?;
            log.push(ev(
                "ball",
                format!(
                    "{} vertices, distance to the unit ball in [{}, {}]",
                    b.polytope.vertex_count(),
                    b.enclosure.lower,
                    b.enclosure.upper
                ),
            ));
            written.push(out.doc("poly.json", &PolytopeDoc::from_polytope(&b.polytope))?);
        }
    }
    written.push(out.doc("provenance.json", &ProvenanceDoc::new(&log))?);
    written.push(out.finish()?);
    Ok(written)
}

fn point_arg(a: &BuildArgs, out: &mut Output) -> CliResult<Vec<Scalar>> {
    let text = a.point.as_deref().ok_or_else(|| usage("--point is required"))?;
    let field = a.field.as_deref().map(parse_field_spec).transpose()?;
    out.manifest.param("point", text);
    out.manifest.field = field.as_ref().map(|f| f.to_string());
    parse_point(text, field.as_ref())
}

fn polytope_arg(a: &BuildArgs, out: &mut Output) -> CliResult<unipoly::Polytope> {
    if let Some(p) = &a.polytope {
        out.input(p);
    }
    if let Some(s) = &a.shape {
        out.manifest.param("shape", s);
    }
    if let Some(d) = a.dim {
        out.manifest.param("dim", d);
    }
    load_polytope(a.polytope.as_deref(), a.shape.as_deref(), a.dim)
}

#[derive(Debug, Serialize)]
pub struct UniversalSummary {
    pub format_version: u32,
    pub kind: String,
    pub input_dim: usize,
    pub q_count: usize,
    pub r_count: usize,
    pub dimension: usize,
    pub vertex_count: usize,
    pub formula_dimension: usize,
    pub formula_vertex_count: usize,
    pub enumerated: bool,
    pub base_face_labels: Vec<String>,
    pub base_face_normal: Vec<String>,
    pub base_face_offset: String,
    pub base_face_verified: bool,
    pub base_projectively_equivalent: bool,
}
