use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::PathBuf;

use clap::Args;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use unipoly::hull::face_lattice;
use unipoly::shephard::{ball_approx, hausdorff_to_ball, shephard_bound, ShephardError};

use super::{usage, CliError, CliResult};
use crate::format::{self, role_name, ConfigDoc, PolytopeDoc};
use crate::render::{render_svg, RenderOptions};

#[derive(Debug, Clone, Args)]
pub struct RenderArgs {
    /// Configuration document.
    pub file: PathBuf,
    /// Certificate whose lines are drawn.
    #[arg(long)]
    pub cert: Option<PathBuf>,
    /// Coordinate plane for configurations outside R^2, e.g. "0,1".
    #[arg(long)]
    pub plane: Option<String>,
    /// Decimals in SVG coordinates.
    #[arg(long, default_value_t = 2)]
    pub precision: usize,
    #[arg(long)]
    pub no_labels: bool,
    /// SVG path; standard output otherwise.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn render(a: &RenderArgs) -> CliResult<String> {
    let c = format::read_config(&a.file)?;
    let cert = a.cert.as_deref().map(format::read_certificate).transpose()?;
    let plane = a
        .plane
        .as_deref()
        .map(|p| {
            let (i, j) = p.split_once(',').ok_or_else(|| usage("--plane wants i,j"))?;
            let parse = |s: &str| s.trim().parse::<usize>().map_err(|_| usage(format!("bad coordinate index {s:?}")));
            Ok::<_, CliError>((parse(i)?, parse(j)?))
        })
        .transpose()?;
    let opts = RenderOptions {
        plane,
        labels: !a.no_labels,
        precision: a.precision,
    };
    let svg = render_svg(&c, cert.as_ref(), &opts).map_err(|e| usage(e.to_string()))?;
    if let Some(path) = &a.out {
        std::fs::write(path, &svg).map_err(|source| format::FormatError::Io {
            path: path.display().to_string(),
            source,
        })?;
    }
    Ok(svg)
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    /// A document to summarize, or `shephard` for the scale statement.
    pub target: String,
    /// Number of facets per summand for `shephard`.
    #[arg(long, default_value_t = 6)]
    pub k: usize,
    /// Bits of precision for distance enclosures.
    #[arg(long, default_value_t = 40)]
    pub precision: u32,
}

pub fn report(a: &ReportArgs) -> CliResult<String> {
    if a.target == "shephard" {
        return shephard_report(a.k);
    }
    let path = PathBuf::from(&a.target);
    let text = format::read_text(&path)?;
    let mut s = String::new();
    match format::kind_of(&text)?.as_str() {
        "configuration" => {
            let doc: ConfigDoc = serde_json::from_str(&text).map_err(format::FormatError::from)?;
            let c = doc.to_config()?;
            writeln!(s, "configuration in R^{}", c.dim()).unwrap();
            writeln!(s, "points: {}", c.len()).unwrap();
            writeln!(s, "aliases: {}", c.aliases().len()).unwrap();
            let mut roles: BTreeMap<&str, usize> = BTreeMap::new();
            for r in c.roles().values() {
                *roles.entry(role_name(*r)).or_default() += 1;
            }
            for (r, n) in roles {
                writeln!(s, "role {r}: {n}").unwrap();
            }
            let fields: std::collections::BTreeSet<String> = c
                .iter()
                .flat_map(|(_, x)| x.iter().filter_map(|v| v.field().map(|f| f.to_string())))
                .collect();
            for f in fields {
                writeln!(s, "field: {f}").unwrap();
            }
        }
        "polytope" => {
            let doc: PolytopeDoc = serde_json::from_str(&text).map_err(format::FormatError::from)?;
            let p = doc.to_polytope()?;
            writeln!(s, "polytope of dimension {} in R^{}", p.dim(), p.ambient()).unwrap();
            writeln!(s, "vertices: {}", p.vertex_count()).unwrap();
            if p.is_enumerated() {
                writeln!(s, "facets: {}", p.facet_count()).unwrap();
                if p.ambient() <= 4 {
                    writeln!(s, "f-vector: {:?}", face_lattice(&p).f_vector()).unwrap();
                }
                let width = BigRational::new(BigInt::from(1), BigInt::from(1) << a.precision);
                match hausdorff_to_ball(&p, &width) {
                    Ok(e) => writeln!(s, "distance to the unit ball: {e}").unwrap(),
                    Err(e) => writeln!(s, "distance to the unit ball: {e}").unwrap(),
                }
            } else {
                writeln!(s, "facets: not enumerated").unwrap();
            }
        }
        "certificate" => {
            let doc: format::CertificateDoc = serde_json::from_str(&text).map_err(format::FormatError::from)?;
            let c = doc.to_certificate()?;
            writeln!(s, "certificate").unwrap();
            writeln!(s, "frame: {}", c.frame.len()).unwrap();
            writeln!(s, "steps: {}", c.steps.len()).unwrap();
            writeln!(s, "derives: {}", c.derived().len()).unwrap();
        }
        k => {
            let v: serde_json::Value = serde_json::from_str(&text).map_err(format::FormatError::from)?;
            writeln!(s, "{k}").unwrap();
            s.push_str(&serde_json::to_string_pretty(&v).unwrap());
            s.push('\n');
        }
    }
    Ok(s.trim_end().to_string())
}

/// The bound of the corollary and why no polytope that fine is built here.
fn shephard_report(k: usize) -> CliResult<String> {
    let bound = shephard_bound(k).map_err(|e| usage(e.to_string()))?;
    let mut s = String::new();
    writeln!(s, "k: {k}").unwrap();
    writeln!(s, "bound: 2^-{}/9 = {}", 4 * k + 10, bound).unwrap();
    writeln!(s, "bound ~ {:.6e}", bound.to_f64().unwrap_or(f64::NAN)).unwrap();
    match ball_approx(3, &bound, 0) {
        Err(ShephardError::Infeasible { vertices, .. }) => {
            writeln!(s, "ball approximation at this distance: infeasible at desk scale").unwrap();
            write!(s, "estimated vertices: {vertices:.3e}").unwrap();
        }
        Ok(b) => {
            return Err(CliError::Failed(format!(
                "expected infeasibility, built {} vertices",
                b.polytope.vertex_count()
            )))
        }
        Err(e) => return Err(usage(e.to_string())),
    }
    Ok(s)
}
