//! SVG drawings of planar configurations.

use std::collections::BTreeMap;
use std::fmt::Write;

use unipoly::config::PointConfiguration;
use unipoly::derive::{evaluate, DerivationCertificate, Ref};
use unipoly::{HPoint, Role};

use crate::format::role_name;

const SIZE: f64 = 480.0;
const MARGIN: f64 = 40.0;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RenderError {
    #[error("configuration lives in R^{0}; choose a coordinate plane with --plane i,j")]
    NotPlanar(usize),
    #[error("plane ({0}, {1}) is not a pair of distinct coordinates below {2}")]
    BadPlane(usize, usize, usize),
}

#[derive(Debug, Clone)]
pub struct RenderOptions {
    pub plane: Option<(usize, usize)>,
    pub labels: bool,
    /// Decimals in emitted coordinates.
    pub precision: usize,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            plane: None,
            labels: true,
            precision: 2,
        }
    }
}

fn color(role: Option<Role>) -> &'static str {
    match role {
        Some(Role::Input) => "#1f5fbf",
        Some(Role::Grid) => "#c62828",
        Some(Role::Aux) => "#e6b800",
        Some(Role::Output) => "#2e7d32",
        Some(Role::Vertex) => "#222222",
        Some(Role::Free) => "#8e44ad",
        None => "#9e9e9e",
    }
}

fn radius(role: Option<Role>) -> f64 {
    match role {
        Some(Role::Input) | Some(Role::Output) => 7.0,
        Some(Role::Aux) => 5.0,
        _ => 4.0,
    }
}

struct View {
    lo: [f64; 2],
    scale: f64,
    precision: usize,
}

impl View {
    fn fit(pts: &[[f64; 2]], precision: usize) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in pts {
            for i in 0..2 {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
        if pts.is_empty() {
            lo = [0.0; 2];
            hi = [1.0; 2];
        }
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-9);
        Self {
            lo,
            scale: (SIZE - 2.0 * MARGIN) / span,
            precision,
        }
    }

    fn map(&self, p: [f64; 2]) -> (String, String) {
        let x = MARGIN + (p[0] - self.lo[0]) * self.scale;
        let y = SIZE - MARGIN - (p[1] - self.lo[1]) * self.scale;
        (format!("{x:.*}", self.precision), format!("{y:.*}", self.precision))
    }

    fn bounds(&self) -> ([f64; 2], [f64; 2]) {
        let pad = MARGIN / self.scale;
        let w = SIZE / self.scale;
        ([self.lo[0] - pad, self.lo[1] - pad], [self.lo[0] - pad + w, self.lo[1] - pad + w])
    }
}

fn project(h: &HPoint, plane: (usize, usize)) -> Option<[f64; 2]> {
    let x = h.to_affine()?;
    Some([x[plane.0].to_f64(), x[plane.1].to_f64()])
}

/// Clip the line through `p` with direction `d` to the box.
fn clip(p: [f64; 2], d: [f64; 2], lo: [f64; 2], hi: [f64; 2]) -> Option<([f64; 2], [f64; 2])> {
    let (mut t0, mut t1) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in 0..2 {
        if d[i].abs() < 1e-12 {
            if p[i] < lo[i] || p[i] > hi[i] {
                return None;
            }
            continue;
        }
        let a = (lo[i] - p[i]) / d[i];
        let b = (hi[i] - p[i]) / d[i];
        t0 = t0.max(a.min(b));
        t1 = t1.min(a.max(b));
    }
    (t0 < t1).then(|| ([p[0] + t0 * d[0], p[1] + t0 * d[1]], [p[0] + t1 * d[0], p[1] + t1 * d[1]]))
}

/// Lines spanned by two-point joins of the certificate, as (point, direction).
fn certificate_lines(c: &PointConfiguration, cert: &DerivationCertificate, plane: (usize, usize)) -> Vec<([f64; 2], [f64; 2])> {
    let known: BTreeMap<String, HPoint> = cert
        .frame
        .iter()
        .filter_map(|l| c.hpoint(l).map(|h| (l.clone(), h)))
        .collect();
    let Ok(env) = evaluate(cert, &known) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for s in &cert.steps {
        for j in &s.joins {
            if j.len() != 2 {
                continue;
            }
            let (Some(a), Some(b)) = (lookup(&env, c, &j[0]), lookup(&env, c, &j[1])) else {
                continue;
            };
            let line = match (project(&a, plane), project(&b, plane)) {
                (Some(p), Some(q)) => (p, [q[0] - p[0], q[1] - p[1]]),
                (Some(p), None) => (p, direction(&b, plane)),
                (None, Some(q)) => (q, direction(&a, plane)),
                (None, None) => continue,
            };
            let key = format!("{:.6},{:.6},{:.6},{:.6}", line.0[0], line.0[1], line.1[0], line.1[1]);
            if seen.insert(key) {
                out.push(line);
            }
        }
    }
    out
}

fn lookup(env: &BTreeMap<Ref, HPoint>, c: &PointConfiguration, r: &Ref) -> Option<HPoint> {
    env.get(r).cloned().or_else(|| match r {
        Ref::Label(l) => c.hpoint(l),
        Ref::Inter(_) => None,
    })
}

fn direction(h: &HPoint, plane: (usize, usize)) -> [f64; 2] {
    let x = h.coords();
    [x[plane.0].to_f64(), x[plane.1].to_f64()]
}

/// Draw the configuration: one marker per labeled role (inputs blue, grid
/// red, auxiliaries yellow, outputs green), plus the certificate's lines.
pub fn render_svg(
    c: &PointConfiguration,
    cert: Option<&DerivationCertificate>,
    opts: &RenderOptions,
) -> Result<String, RenderError> {
    let plane = match (c.dim(), opts.plane) {
        (_, Some((i, j))) if i == j || i >= c.dim() || j >= c.dim() => return Err(RenderError::BadPlane(i, j, c.dim())),
        (_, Some(p)) => p,
        (2, None) => (0, 1),
        (d, None) if c.is_empty() => (0, d.min(1)),
        (d, None) => return Err(RenderError::NotPlanar(d)),
    };
    let mut markers: Vec<(String, [f64; 2], Option<Role>)> = Vec::new();
    for (l, x) in c.iter() {
        let p = [x[plane.0].to_f64(), x[plane.1].to_f64()];
        let mut any = false;
        for (lab, r) in c.roles() {
            if c.resolve(lab) == Some(l) {
                markers.push((lab.clone(), p, Some(*r)));
                any = true;
            }
        }
        if !any {
            markers.push((l.to_string(), p, None));
        }
    }
    // big markers first so coincident small ones stay visible
    markers.sort_by(|a, b| radius(b.2).total_cmp(&radius(a.2)).then_with(|| a.0.cmp(&b.0)));
    let pts: Vec<[f64; 2]> = markers.iter().map(|m| m.1).collect();
    let view = View::fit(&pts, opts.precision);
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    )
    .unwrap();
    writeln!(s, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##).unwrap();
    if let Some(cert) = cert {
        let (lo, hi) = view.bounds();
        writeln!(s, r##"<g stroke="#b0b0b0" stroke-width="1">"##).unwrap();
        for (p, d) in certificate_lines(c, cert, plane) {
            if let Some((a, b)) = clip(p, d, lo, hi) {
                let (x1, y1) = view.map(a);
                let (x2, y2) = view.map(b);
                writeln!(s, r#"<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}"/>"#).unwrap();
            }
        }
        writeln!(s, "</g>").unwrap();
    }
    for (label, p, role) in &markers {
        let (x, y) = view.map(*p);
        let class = role.map_or("point", role_name);
        writeln!(
            s,
            r##"<circle class="{class}" cx="{x}" cy="{y}" r="{}" fill="{}" stroke="#000000" stroke-width="0.5"><title>{}</title></circle>"##,
            radius(*role),
            color(*role),
            escape(label)
        )
        .unwrap();
    }
    if opts.labels {
        for (label, p, role) in &markers {
            if role.is_some_and(|r| r == Role::Grid) {
                continue;
            }
            let (x, y) = view.map([p[0], p[1]]);
            writeln!(
                s,
                r##"<text x="{x}" y="{y}" dx="8" dy="-8" font-family="sans-serif" font-size="10" fill="#333333">{}</text>"##,
                escape(label)
            )
            .unwrap();
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use unipoly::vonstaudt::add_gadget;
    use unipoly::Scalar;

    fn count(svg: &str, class: &str) -> usize {
        svg.matches(&format!(r#"class="{class}""#)).count()
    }

    #[test]
    fn add_gadget_colors() {
        let f = add_gadget(&Scalar::from_int(2), &Scalar::from_int(3));
        let svg = render_svg(&f.config, Some(&f.certificate), &RenderOptions::default()).unwrap();
        assert_eq!(count(&svg, "grid"), 9);
        assert_eq!(count(&svg, "input"), 2);
        assert_eq!(count(&svg, "output"), 1);
        assert!(svg.contains("<line"));
    }

    #[test]
    fn empty_is_valid() {
        let svg = render_svg(&PointConfiguration::new(2), None, &RenderOptions::default()).unwrap();
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(!svg.contains("<circle"));
    }

    #[test]
    fn space_needs_a_plane() {
        let c = unipoly::config::qd(3);
        assert_eq!(render_svg(&c, None, &RenderOptions::default()), Err(RenderError::NotPlanar(3)));
        let opts = RenderOptions {
            plane: Some((0, 2)),
            ..Default::default()
        };
        assert_eq!(count(&render_svg(&c, None, &opts).unwrap(), "point"), 27);
        let bad = RenderOptions {
            plane: Some((1, 1)),
            ..Default::default()
        };
        assert!(render_svg(&c, None, &bad).is_err());
    }

    #[test]
    fn clipping() {
        let (a, b) = clip([0.0, 0.0], [1.0, 1.0], [-1.0, -1.0], [1.0, 1.0]).unwrap();
        assert_eq!((a, b), ([-1.0, -1.0], [1.0, 1.0]));
        assert!(clip([5.0, 5.0], [1.0, 0.0], [-1.0, -1.0], [1.0, 1.0]).is_none());
    }
}
