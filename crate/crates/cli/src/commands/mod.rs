//! The `build`, `check`, `render` and `report` verbs.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use unipoly::exact::{parse_rational, parse_scalar};
use unipoly::hull::{convex_hull, shapes, Polytope};
use unipoly::vonstaudt::parse_polynomial;
use unipoly::{NumberField, Scalar};

use crate::format::{self, FormatError, RunManifest};

pub mod build;
pub mod check;
pub mod report;

pub use build::{build, BuildArgs, BuildTarget};
pub use check::{check, CheckArgs, CheckTarget};
pub use report::{render, report, RenderArgs, ReportArgs};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Format(#[from] FormatError),
    /// A check ran and did not pass; the message carries the witness.
    #[error("check failed: {0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed(_) => 1,
            _ => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Field from `x^2-2:[1,2]` or the stored form `field:-2,0,1:1,2`.
pub fn parse_field_spec(s: &str) -> CliResult<Arc<NumberField>> {
    let s = s.trim();
    if s.starts_with("field:") {
        return unipoly::exact::parse_field(s).map(Arc::new).map_err(|e| usage(e.to_string()));
    }
    let (poly, interval) = s
        .rsplit_once(':')
        .ok_or_else(|| usage(format!("field {s:?} should look like x^2-2:[1,2]")))?;
    let interval = interval
        .trim()
        .strip_prefix('[')
        .and_then(|i| i.strip_suffix(']'))
        .ok_or_else(|| usage(format!("interval in {s:?} should look like [lo,hi]")))?;
    let (lo, hi) = interval
        .split_once(',')
        .ok_or_else(|| usage("interval needs two endpoints"))?;
    let psi = parse_polynomial(poly).map_err(|e| usage(e.to_string()))?;
    let lo = parse_rational(lo).map_err(|e| usage(e.to_string()))?;
    let hi = parse_rational(hi).map_err(|e| usage(e.to_string()))?;
    NumberField::new(psi, lo, hi)
        .map(Arc::new)
        .map_err(|e| usage(e.to_string()))
}

/// One coordinate: a rational, `t` for the field generator, `sqrtN` when the
/// field is generated by the positive root of x^2 - N, or stored scalar text.
pub fn parse_coordinate(s: &str, field: Option<&Arc<NumberField>>) -> CliResult<Scalar> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix('-') {
        if !rest.starts_with(|c: char| c.is_ascii_digit()) {
            return parse_coordinate(rest, field).map(|x| -x);
        }
    }
    let generator = |what: &str| {
        field
            .map(Scalar::theta)
            .ok_or_else(|| usage(format!("{what} needs --field")))
    };
    if s == "t" || s == "theta" {
        return generator(s);
    }
    if let Some(n) = s.strip_prefix("sqrt") {
        let n: i64 = n.parse().map_err(|_| usage(format!("bad square root {s:?}")))?;
        let t = generator(s)?;
        if &t * &t != Scalar::from_int(n) || !t.is_positive() {
            return Err(usage(format!("{s} is not the generator of the given field")));
        }
        return Ok(t);
    }
    if s.contains('@') {
        return parse_scalar(s).map_err(|e| usage(e.to_string()));
    }
    parse_rational(s).map(Scalar::rational).map_err(|e| usage(e.to_string()))
}

pub fn parse_point(s: &str, field: Option<&Arc<NumberField>>) -> CliResult<Vec<Scalar>> {
    s.split(',').map(|c| parse_coordinate(c, field)).collect()
}

/// `a,b,c;d,e,f`.
pub fn parse_points(s: &str, field: Option<&Arc<NumberField>>) -> CliResult<Vec<Vec<Scalar>>> {
    s.split(';').filter(|p| !p.trim().is_empty()).map(|p| parse_point(p, field)).collect()
}

/// A polytope from a file (polytope or configuration document) or a named shape.
pub fn load_polytope(path: Option<&Path>, shape: Option<&str>, dim: Option<usize>) -> CliResult<Polytope> {
    match (path, shape) {
        (Some(p), None) => {
            let text = format::read_text(p)?;
            match format::kind_of(&text)?.as_str() {
                "polytope" => Ok(serde_json::from_str::<format::PolytopeDoc>(&text)
                    .map_err(FormatError::from)?
                    .to_polytope()?),
                "configuration" => Ok(convex_hull(
                    &serde_json::from_str::<format::ConfigDoc>(&text)
                        .map_err(FormatError::from)?
                        .to_config()?,
                )),
                k => Err(usage(format!("{} holds a {k}, not a polytope", p.display()))),
            }
        }
        (None, Some(name)) => {
            shapes::named(name, dim.unwrap_or(3)).ok_or_else(|| usage(format!("unknown shape {name:?}")))
        }
        _ => Err(usage("give exactly one of --polytope and --shape")),
    }
}

/// Writes documents into one directory and records them in the manifest.
pub struct Output {
    dir: PathBuf,
    pub manifest: RunManifest,
    stem: String,
}

impl Output {
    pub fn new(dir: &Path, command: &str, stem: &str) -> CliResult<Self> {
        std::fs::create_dir_all(dir).map_err(|source| FormatError::Io {
            path: dir.display().to_string(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest: RunManifest::new(command),
            stem: stem.to_string(),
        })
    }

    pub fn path(&self, suffix: &str) -> PathBuf {
        self.dir.join(format!("{}.{suffix}", self.stem))
    }

    pub fn doc<T: serde::Serialize>(&mut self, suffix: &str, doc: &T) -> CliResult<PathBuf> {
        let path = self.path(suffix);
        format::write_doc(&path, doc)?;
        self.manifest.outputs.push(format!("{}.{suffix}", self.stem));
        Ok(path)
    }

    pub fn text(&mut self, suffix: &str, text: &str) -> CliResult<PathBuf> {
        let path = self.path(suffix);
        std::fs::write(&path, text).map_err(|source| FormatError::Io {
            path: path.display().to_string(),
            source,
        })?;
        self.manifest.outputs.push(format!("{}.{suffix}", self.stem));
        Ok(path)
    }

    pub fn input(&mut self, path: &Path) {
        let name = path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
        self.manifest.inputs.push(name);
    }

    pub fn finish(self) -> CliResult<PathBuf> {
        let path = self.path("manifest.json");
        format::write_doc(&path, &self.manifest)?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_specs() {
        let f = parse_field_spec("x^2-2:[1,2]").unwrap();
        let g = parse_field_spec(&f.to_string()).unwrap();
        assert!(f.same_as(&g));
        assert!(parse_field_spec("x^2-2:[3,4]").is_err());
        assert!(parse_field_spec("x^2-2").is_err());
    }

    #[test]
    fn coordinates() {
        let f = parse_field_spec("x^2-2:[1,2]").unwrap();
        let p = parse_point("sqrt2,1,-3/4", Some(&f)).unwrap();
        assert_eq!(&p[0] * &p[0], Scalar::from_int(2));
        assert_eq!(p[2], Scalar::ratio(-3, 4));
        assert_eq!(parse_coordinate("-sqrt2", Some(&f)).unwrap(), -Scalar::theta(&f));
        assert!(parse_coordinate("sqrt3", Some(&f)).is_err());
        assert!(parse_coordinate("sqrt2", None).is_err());
        assert_eq!(parse_points("1,2;3,4", None).unwrap().len(), 2);
    }
}
