//! JSON documents. Every scalar is stored as exact text, so reading a file
//! back gives bit-identical values.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use unipoly::config::PointConfiguration;
use unipoly::derive::DerivationCertificate;
use unipoly::exact::ScalarParser;
use unipoly::hull::{hull_of, Polytope};
use unipoly::universal::Event;
use unipoly::{Role, Scalar};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format_version {0}")]
    Version(u32),
    #[error("expected a {expected} document, found {found}")]
    Kind { expected: &'static str, found: String },
    #[error("{0}")]
    Invalid(String),
}

pub fn role_name(r: Role) -> &'static str {
    match r {
        Role::Input => "input",
        Role::Grid => "grid",
        Role::Aux => "aux",
        Role::Output => "output",
        Role::Vertex => "vertex",
        Role::Free => "free",
    }
}

pub fn parse_role(s: &str) -> Result<Role, FormatError> {
    Ok(match s {
        "input" => Role::Input,
        "grid" => Role::Grid,
        "aux" => Role::Aux,
        "output" => Role::Output,
        "vertex" => Role::Vertex,
        "free" => Role::Free,
        _ => return Err(FormatError::Invalid(format!("unknown role {s:?}"))),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub label: String,
    pub coords: Vec<String>,
}

fn record(label: &str, x: &[Scalar]) -> PointRecord {
    PointRecord {
        label: label.to_string(),
        coords: x.iter().map(Scalar::to_string).collect(),
    }
}

fn read_point(p: &PointRecord, parser: &mut ScalarParser) -> Result<Vec<Scalar>, FormatError> {
    p.coords
        .iter()
        .map(|c| parser.parse(c).map_err(|e| FormatError::Invalid(format!("{}: {e}", p.label))))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigDoc {
    pub format_version: u32,
    pub kind: String,
    pub dim: usize,
    pub points: Vec<PointRecord>,
    #[serde(default)]
    pub aliases: BTreeMap<String, String>,
    #[serde(default)]
    pub roles: BTreeMap<String, String>,
}

impl ConfigDoc {
    pub fn from_config(c: &PointConfiguration) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            kind: "configuration".into(),
            dim: c.dim(),
            points: c.iter().map(|(l, x)| record(l, x)).collect(),
            aliases: c.aliases().clone(),
            roles: c.roles().iter().map(|(l, r)| (l.clone(), role_name(*r).to_string())).collect(),
        }
    }

    pub fn to_config(&self) -> Result<PointConfiguration, FormatError> {
        check_header(self.format_version, &self.kind, "configuration")?;
        let mut parser = ScalarParser::new();
        let mut c = PointConfiguration::new(self.dim);
        for p in &self.points {
            let x = read_point(p, &mut parser)?;
            let got = c.insert(p.label.clone(), x).map_err(|e| FormatError::Invalid(e.to_string()))?;
            if got != p.label {
                return Err(FormatError::Invalid(format!("duplicate point {}", p.label)));
            }
        }
        for (alias, owner) in &self.aliases {
            let x = c
                .get(owner)
                .ok_or_else(|| FormatError::Invalid(format!("alias {alias} of unknown {owner}")))?
                .to_vec();
            c.insert(alias.clone(), x).map_err(|e| FormatError::Invalid(e.to_string()))?;
        }
        for (l, r) in &self.roles {
            if !c.contains_label(l) {
                return Err(FormatError::Invalid(format!("role for unknown label {l}")));
            }
            c.set_role(l, parse_role(r)?);
        }
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacetRecord {
    pub normal: Vec<String>,
    pub offset: String,
    pub vertices: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolytopeDoc {
    pub format_version: u32,
    pub kind: String,
    pub ambient: usize,
    pub dim: isize,
    /// False when only coordinates were computed.
    pub enumerated: bool,
    pub vertices: Vec<PointRecord>,
    #[serde(default)]
    pub facets: Vec<FacetRecord>,
}

impl PolytopeDoc {
    pub fn from_polytope(p: &Polytope) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            kind: "polytope".into(),
            ambient: p.ambient(),
            dim: p.dim(),
            enumerated: p.is_enumerated(),
            vertices: p.vertices().map(|(l, x)| record(l, x)).collect(),
            facets: p
                .facets()
                .iter()
                .map(|f| FacetRecord {
                    normal: f.halfspace.normal.iter().map(Scalar::to_string).collect(),
                    offset: f.halfspace.offset.to_string(),
                    vertices: f.vertices.iter().cloned().collect(),
                })
                .collect(),
        }
    }

    /// Rebuilds the polytope; facets are recomputed and must match the file.
    pub fn to_polytope(&self) -> Result<Polytope, FormatError> {
        check_header(self.format_version, &self.kind, "polytope")?;
        let mut parser = ScalarParser::new();
        let mut pts = Vec::new();
        for v in &self.vertices {
            pts.push((v.label.clone(), read_point(v, &mut parser)?));
        }
        if !self.enumerated {
            return Ok(Polytope::coordinates_only(self.ambient, self.dim, pts.into_iter().collect()));
        }
        let n = pts.len();
        let p = hull_of(self.ambient, pts);
        if p.vertex_count() != n {
            return Err(FormatError::Invalid("listed points are not all vertices".into()));
        }
        if !self.facets.is_empty() {
            let listed: BTreeSet<Vec<String>> = self.facets.iter().map(|f| sorted(&f.vertices)).collect();
            let found: BTreeSet<Vec<String>> =
                p.facets().iter().map(|f| f.vertices.iter().cloned().collect()).collect();
            if listed != found {
                return Err(FormatError::Invalid("facets do not match the vertices".into()));
            }
        }
        Ok(p)
    }
}

fn sorted(v: &[String]) -> Vec<String> {
    let mut v = v.to_vec();
    v.sort();
    v
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateDoc {
    pub format_version: u32,
    pub kind: String,
    pub frame: Vec<String>,
    pub steps: Vec<String>,
}

impl CertificateDoc {
    pub fn from_certificate(c: &DerivationCertificate) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            kind: "certificate".into(),
            frame: c.frame.clone(),
            steps: c.to_lines(),
        }
    }

    pub fn to_certificate(&self) -> Result<DerivationCertificate, FormatError> {
        check_header(self.format_version, &self.kind, "certificate")?;
        DerivationCertificate::from_lines(self.frame.clone(), &self.steps).map_err(|e| FormatError::Invalid(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub stage: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProvenanceDoc {
    pub format_version: u32,
    pub kind: String,
    pub events: Vec<EventRecord>,
}

impl ProvenanceDoc {
    pub fn new(events: &[Event]) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            kind: "provenance".into(),
            events: events
                .iter()
                .map(|e| EventRecord {
                    stage: e.stage.clone(),
                    detail: e.detail.clone(),
                })
                .collect(),
        }
    }
}

/// Enough to rerun a command. Paths are file names inside the output
/// directory and timing is left empty, so reruns produce identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format_version: u32,
    pub kind: String,
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub field: Option<String>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub timing: Option<f64>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            kind: "manifest".into(),
            command: command.to_string(),
            parameters: BTreeMap::new(),
            seed: None,
            field: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
            timing: None,
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }
}

fn check_header(version: u32, kind: &str, expected: &'static str) -> Result<(), FormatError> {
    if version != FORMAT_VERSION {
        return Err(FormatError::Version(version));
    }
    if kind != expected {
        return Err(FormatError::Kind {
            expected,
            found: kind.to_string(),
        });
    }
    Ok(())
}

pub fn to_json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents serialize");
    s.push('\n');
    s
}

pub fn write_doc<T: Serialize>(path: &Path, doc: &T) -> Result<(), FormatError> {
    std::fs::write(path, to_json(doc)).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_text(path: &Path) -> Result<String, FormatError> {
    std::fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// The `kind` field of a document.
pub fn kind_of(text: &str) -> Result<String, FormatError> {
    #[derive(Deserialize)]
    struct Header {
        kind: String,
    }
    Ok(serde_json::from_str::<Header>(text)?.kind)
}

pub fn read_config(path: &Path) -> Result<PointConfiguration, FormatError> {
    serde_json::from_str::<ConfigDoc>(&read_text(path)?)?.to_config()
}

pub fn read_polytope(path: &Path) -> Result<Polytope, FormatError> {
    serde_json::from_str::<PolytopeDoc>(&read_text(path)?)?.to_polytope()
}

pub fn read_certificate(path: &Path) -> Result<DerivationCertificate, FormatError> {
    serde_json::from_str::<CertificateDoc>(&read_text(path)?)?.to_certificate()
}

#[cfg(test)]
mod tests {
    use super::*;
    use unipoly::config::qd;
    use unipoly::derive::qd_frame_certificate;
    use unipoly::hull::shapes;
    use unipoly::vonstaudt::coor_point;

    #[test]
    fn config_round_trip() {
        let c = qd(3);
        let doc = ConfigDoc::from_config(&c);
        let text = to_json(&doc);
        let back: ConfigDoc = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_config().unwrap(), c);
    }

    #[test]
    fn algebraic_config_round_trip() {
        let f = std::sync::Arc::new(unipoly::NumberField::quadratic(2).unwrap());
        let z = vec![Scalar::theta(&f), Scalar::one(), Scalar::one()];
        let c = coor_point(&z).unwrap().config;
        let text = to_json(&ConfigDoc::from_config(&c));
        let back = serde_json::from_str::<ConfigDoc>(&text).unwrap().to_config().unwrap();
        assert_eq!(back, c);
        assert_eq!(to_json(&ConfigDoc::from_config(&back)), text);
    }

    #[test]
    fn polytope_round_trip() {
        for p in [shapes::cube(3), shapes::random_polytope(3, 9, 2)] {
            let text = to_json(&PolytopeDoc::from_polytope(&p));
            let back = serde_json::from_str::<PolytopeDoc>(&text).unwrap().to_polytope().unwrap();
            assert_eq!(back, p);
        }
    }

    #[test]
    fn certificate_round_trip() {
        let c = qd_frame_certificate(3).unwrap();
        let text = to_json(&CertificateDoc::from_certificate(&c));
        let back = serde_json::from_str::<CertificateDoc>(&text).unwrap().to_certificate().unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn wrong_kind_is_rejected() {
        let text = to_json(&CertificateDoc::from_certificate(&qd_frame_certificate(3).unwrap()));
        assert!(serde_json::from_str::<ConfigDoc>(&text).is_err());
        let mut doc = ConfigDoc::from_config(&qd(2));
        doc.kind = "polytope".into();
        assert!(matches!(doc.to_config(), Err(FormatError::Kind { .. })));
        doc.kind = "configuration".into();
        doc.format_version = 9;
        assert!(matches!(doc.to_config(), Err(FormatError::Version(9))));
    }
}
