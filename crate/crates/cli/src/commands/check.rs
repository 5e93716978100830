use std::fmt::Write;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use unipoly::derive::replay;
use unipoly::exact::parse_rational;
use unipoly::shephard::{ball_approx, check_kstacked_lower_bound, check_sections, check_subpolytope_lemma};
use unipoly::vonstaudt::check_gadgets;

use super::{load_polytope, usage, CliError, CliResult, Output};
use crate::format;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckTarget {
    Certificate,
    LemmaDist,
    LemmaDist2,
    Ratsub,
    Gadgets,
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    #[arg(value_enum)]
    pub target: CheckTarget,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub cert: Option<PathBuf>,
    /// Polytope for lemma-dist; a ball approximation is generated otherwise.
    #[arg(long)]
    pub polytope: Option<PathBuf>,
    /// Distance of the generated polytope for lemma-dist.
    #[arg(long, default_value = "1/100")]
    pub eps: String,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for the report and manifest; nothing is written without it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Outcome of a check: the report text and whether it passed.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub report: String,
    pub pass: bool,
}

impl CheckOutcome {
    pub fn into_result(self) -> CliResult<String> {
        if self.pass {
            Ok(self.report)
        } else {
            Err(CliError::Failed(self.report))
        }
    }
}

pub fn check(a: &CheckArgs) -> CliResult<CheckOutcome> {
    let name = a.target.to_possible_value().unwrap().get_name().to_string();
    let mut out = a.out.as_deref().map(|d| Output::new(d, "check", &name)).transpose()?;
    let mut param = |k: &str, v: String| {
        if let Some(o) = out.as_mut() {
            o.manifest.param(k, v);
        }
    };
    param("target", name.clone());
    let outcome = match a.target {
        CheckTarget::Certificate => {
            let cp = a.config.as_ref().ok_or_else(|| usage("check certificate needs --config"))?;
            let kp = a.cert.as_ref().ok_or_else(|| usage("check certificate needs --cert"))?;
            let c = format::read_config(cp)?;
            let cert = format::read_certificate(kp)?;
            let r = replay(&c, &cert).map_err(|e| CliError::Failed(e.to_string()))?;
            let mut s = String::new();
            writeln!(s, "check: certificate").unwrap();
            writeln!(s, "points: {}", c.len()).unwrap();
            writeln!(s, "frame: {}", cert.frame.len()).unwrap();
            writeln!(s, "steps: {}", cert.steps.len()).unwrap();
            writeln!(s, "derived: {}", r.derived.len()).unwrap();
            let underived = c.labels().filter(|l| !cert.frame.iter().any(|f| c.resolve(f) == Some(*l)) && !r.derived.contains(*l)).count();
            writeln!(s, "not derived: {underived}").unwrap();
            if let Some(m) = &r.first_mismatch {
                writeln!(s, "first mismatch: {m}").unwrap();
            }
            write!(s, "result: {}", if r.ok { "pass" } else { "FAIL" }).unwrap();
            if let Some(o) = out.as_mut() {
                o.input(cp);
                o.input(kp);
            }
            CheckOutcome { report: s, pass: r.ok }
        }
        CheckTarget::Gadgets => {
            param("trials", a.trials.to_string());
            let r = check_gadgets(a.trials, a.seed);
            CheckOutcome {
                pass: r.pass(),
                report: r.to_string(),
            }
        }
        CheckTarget::LemmaDist => {
            param("trials", a.trials.to_string());
            let p = match &a.polytope {
                Some(path) => {
                    if let Some(o) = out.as_mut() {
                        o.input(path);
                    }
                    load_polytope(Some(path), None, None)?
                }
                None => {
                    param("eps", a.eps.clone());
                    let eps = parse_rational(&a.eps).map_err(|e| usage(e.to_string()))?;
                    ball_approx(3, &eps, a.seed).map_err(|e| CliError::Infeasible(e.to_string()))?.polytope
                }
            };
            let r = check_subpolytope_lemma(&p, a.trials, a.seed).map_err(|e| usage(e.to_string()))?;
            CheckOutcome {
                pass: r.pass,
                report: r.to_string(),
            }
        }
        CheckTarget::LemmaDist2 => {
            param("k", a.k.to_string());
            param("samples", a.samples.to_string());
            param("dim", a.dim.to_string());
            let r = check_kstacked_lower_bound(a.dim, a.k, a.samples, a.seed).map_err(|e| usage(e.to_string()))?;
            CheckOutcome {
                pass: r.pass,
                report: r.to_string(),
            }
        }
        CheckTarget::Ratsub => {
            param("trials", a.trials.to_string());
            let r = check_sections(a.trials, a.seed).map_err(|e| usage(e.to_string()))?;
            CheckOutcome {
                pass: r.pass,
                report: r.to_string(),
            }
        }
    };
    if let Some(mut o) = out {
        if a.target != CheckTarget::Certificate {
            o.manifest.seed = Some(a.seed);
        }
        let mut text = outcome.report.clone();
        text.push('\n');
        o.text("report.txt", &text)?;
        o.finish()?;
    }
    Ok(outcome)
}
