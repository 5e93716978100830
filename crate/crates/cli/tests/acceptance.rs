//! Acceptance run: one line per criterion, nonzero exit if any fails.

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use unipoly::config::{qd, PPConfiguration, PointConfiguration};
use unipoly::derive::{qd_frame_certificate, replay};
use unipoly::exact::{count_roots_in, isolate_roots, sturm_sequence};
use unipoly::hull::{combinatorially_equivalent, hull_of, shapes, subpolytope};
use unipoly::shephard::{
    ball_approx, check_kstacked_lower_bound, check_sections, check_subpolytope_lemma, shephard_bound, ShephardError,
};
use unipoly::universal::{build_triple, default_cone, lawrence_extension, lawrence_face, verify_face};
use unipoly::vonstaudt::{check_gadgets, coor_scalar, parse_polynomial, compile_polynomial};
use unipoly::{HPoint, NumberField, Role, Scalar};
use unipoly_cli::format::{self, ConfigDoc};

const C1_LIMIT: Duration = Duration::from_secs(1);
const C2_LIMIT: Duration = Duration::from_secs(10);
const C3_LIMIT: Duration = Duration::from_secs(5);
const C4_LIMIT: Duration = Duration::from_secs(1);
const C5_LIMIT: Duration = Duration::from_secs(2);
const C6_LIMIT: Duration = Duration::from_secs(30);
const C7_LIMIT: Duration = Duration::from_secs(30);
const C8_LIMIT: Duration = Duration::from_secs(300);
const C9_LIMIT: Duration = Duration::from_secs(120);
const C10_LIMIT: Duration = Duration::from_secs(300);
const C12_LIMIT: Duration = Duration::from_secs(60);

const GADGET_PAIRS: usize = 200;
const PP_TRIALS: usize = 20;
const CONE_TRIALS: usize = 10;
const DIST_TRIALS: usize = 100;
const DIST2_SAMPLES: usize = 50;
const SECTION_TRIALS: usize = 20;

type Outcome = Result<String, String>;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_unipoly"))
}

fn run(args: &[&str]) -> Result<(i32, String), String> {
    let out = bin().args(args).output().map_err(|e| e.to_string())?;
    Ok((out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned()))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn field_line(report: &str, key: &str) -> Option<usize> {
    report
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .and_then(|v| v.trim().parse().ok())
}

fn cube_framing(dir: &Path) -> Outcome {
    let d = dir.to_str().unwrap();
    let (code, _) = run(&["build", "qd", "--dim", "3", "--out", d])?;
    ensure(code == 0, || format!("build exited {code}"))?;
    let config = dir.join("qd3.config.json");
    let cert = dir.join("qd3.cert.json");
    let (code, report) = run(&["check", "certificate", "--config", config.to_str().unwrap(), "--cert", cert.to_str().unwrap()])?;
    ensure(code == 0, || format!("check exited {code}: {report}"))?;
    let (points, frame, derived) = (field_line(&report, "points"), field_line(&report, "frame"), field_line(&report, "derived"));
    ensure(points == Some(27) && frame == Some(9) && derived == Some(18), || {
        format!("points {points:?}, frame {frame:?}, derived {derived:?}")
    })?;
    Ok("27 points, frame of 9, 18 derived exactly".into())
}

fn q4_certificate() -> Outcome {
    let c = qd(4);
    let cert = qd_frame_certificate(4).map_err(|e| e.to_string())?;
    let r = replay(&c, &cert).map_err(|e| e.to_string())?;
    let covered = cert.frame.len() + r.derived.len();
    ensure(r.ok && cert.frame.len() == 6 && covered == 81 && c.len() == 81, || {
        format!("ok {}, frame {}, covered {covered}", r.ok, cert.frame.len())
    })?;
    Ok(format!("frame of 6 derives the other {} of 81 points", r.derived.len()))
}

fn gadget_soundness() -> Outcome {
    let r = check_gadgets(GADGET_PAIRS, 7);
    ensure(r.pass() && r.trials == GADGET_PAIRS, || r.to_string())?;
    Ok(format!("{GADGET_PAIRS} pairs through ADD/MLT/SUB/DIV, 0 inexact outputs"))
}

fn polynomial_compiler() -> Outcome {
    let psi = parse_polynomial("x^2-2").map_err(|e| e.to_string())?;
    let t = compile_polynomial(&psi);
    let at3 = t.evaluate(&[Scalar::from_int(3)]).map_err(|e| e.to_string())?;
    ensure(at3.output_point() == [Scalar::from_int(7), Scalar::zero()], || format!("F(3) at {:?}", at3.output_point()))?;
    let f = Arc::new(NumberField::quadratic(2).map_err(|e| e.to_string())?);
    let at_root = t.evaluate(&[Scalar::theta(&f)]).map_err(|e| e.to_string())?;
    ensure(at_root.output_point() == [Scalar::zero(), Scalar::zero()], || {
        format!("F(sqrt2) at {:?}", at_root.output_point())
    })?;
    ensure(at3.check().unwrap_or(false) && at_root.check().unwrap_or(false), || "certificate replay failed".into())?;
    Ok("F[x^2-2](3) = (7,0) and F[x^2-2](sqrt2) = (0,0) exactly".into())
}

fn coor_sqrt2() -> Outcome {
    let psi = parse_polynomial("x^2-2").map_err(|e| e.to_string())?;
    let chain = sturm_sequence(&psi).map_err(|e| e.to_string())?;
    let one = BigRational::from_integer(BigInt::from(1));
    let two = BigRational::from_integer(BigInt::from(2));
    ensure(count_roots_in(&chain, &one, &two) == 1, || "Sturm count on [1,2] is not 1".into())?;
    ensure(isolate_roots(&psi).contains(&(one, two)), || format!("isolation gave {:?}", isolate_roots(&psi)))?;
    let f = Arc::new(NumberField::quadratic(2).map_err(|e| e.to_string())?);
    let z = Scalar::theta(&f);
    let s = coor_scalar(&z, &psi).map_err(|e| e.to_string())?;
    let target = [z.clone(), Scalar::zero()];
    ensure(s.config.get(&s.point_label) == Some(&target[..]), || "sqrt2 e1 missing".into())?;
    let grid_in_frame = unipoly::config::grid_labels().iter().all(|g| s.certificate.frame.contains(g));
    ensure(grid_in_frame, || "frame does not contain the grid".into())?;
    ensure(s.check().map_err(|e| e.to_string())?, || "certificate does not replay".into())?;
    Ok(format!("one root in [1,2]; {} points, certificate of {} steps replays", s.config.len(), s.certificate.steps.len()))
}

fn random_pp(seed: u64) -> (PPConfiguration, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rng.gen_range(2..=3);
    let p = shapes::random_polytope(d, d + 3, seed);
    let m = rng.gen_range(1..=3);
    let mut free = PointConfiguration::new(d);
    while free.len() < m {
        let x: Vec<Scalar> = (0..d).map(|_| Scalar::ratio(rng.gen_range(-40..=40), rng.gen_range(1..=4))).collect();
        if !p.contains(&x) && !p.to_config().contains_point(&x) {
            let _ = free.insert_with_role(format!("r{}", free.len()), x, Role::Free);
        }
    }
    (PPConfiguration::new(p.to_config(), free).unwrap(), d)
}

fn lawrence_counts() -> Outcome {
    let t = shapes::simplex(3);
    let mut free = PointConfiguration::new(3);
    free.insert("r", vec![Scalar::from_int(1); 3]).unwrap();
    let l = lawrence_extension(&PPConfiguration::new(t.to_config(), free).unwrap());
    let labels: BTreeSet<String> = t.labels().map(str::to_string).collect();
    ensure(l.dim() == 4 && l.vertex_count() == 6, || format!("tetrahedron + 1: dim {}, {} vertices", l.dim(), l.vertex_count()))?;
    ensure(verify_face(&l, &labels, &lawrence_face(3, 1).to_flat()), || "tetrahedron is not a face".into())?;
    for seed in 0..PP_TRIALS as u64 {
        let (pp, d) = random_pp(seed);
        let m = pp.free.len();
        let l = lawrence_extension(&pp);
        let f0 = pp.vertices.len();
        ensure(l.dim() == (d + m) as isize && l.vertex_count() == f0 + 2 * m, || {
            format!("seed {seed}: dim {} vs {}, vertices {} vs {}", l.dim(), d + m, l.vertex_count(), f0 + 2 * m)
        })?;
        let labels: BTreeSet<String> = pp.vertices.labels().map(str::to_string).collect();
        ensure(verify_face(&l, &labels, &lawrence_face(d, m).to_flat()), || format!("seed {seed}: face check"))?;
    }
    Ok(format!("tetrahedron + 1 point: dim 4, 6 vertices; {PP_TRIALS} random configurations match both formulas"))
}

fn subdirect_cones() -> Outcome {
    for seed in 0..CONE_TRIALS as u64 {
        let p = shapes::random_polytope(3, 8, 100 + seed);
        let t = build_triple(&p).map_err(|e| format!("seed {seed}: {e}"))?;
        let cone = default_cone(&t).map_err(|e| format!("seed {seed}: {e}"))?;
        let map = cone.base_equivalence(&t.polytope).ok_or_else(|| format!("seed {seed}: no projective map"))?;
        for (l, y) in cone.base_in_chart() {
            let img = map.apply(&HPoint::from_affine(t.polytope.vertex(&l).unwrap()));
            ensure(img == HPoint::from_affine(&y), || format!("seed {seed}: {l} not mapped onto the base"))?;
        }
        let base = subpolytope(&cone.pyramid, cone.base_labels.iter().map(String::as_str)).map_err(|e| e.to_string())?;
        let base = hull_of(3, base.vertices().map(|(l, x)| (l.to_string(), x[..3].to_vec())).collect());
        ensure(combinatorially_equivalent(&base, &p).is_some(), || format!("seed {seed}: base not combinatorially P"))?;
    }
    Ok(format!("{CONE_TRIALS} random rational 3-polytopes: exact projective map onto each base"))
}

fn universal_pipeline(dir: &Path) -> Outcome {
    let d = dir.to_str().unwrap();
    let (code, _) = run(&["build", "universal", "--shape", "tetrahedron", "--out", d])?;
    ensure(code == 0, || format!("build exited {code}"))?;
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("universal.summary.json")).unwrap()).unwrap();
    let prov: format::ProvenanceDoc =
        serde_json::from_str(&std::fs::read_to_string(dir.join("universal.provenance.json")).unwrap()).unwrap();
    let r_count = prov
        .events
        .iter()
        .filter(|e| e.stage == "triple")
        .find_map(|e| e.detail.split("#R = ").nth(1)?.split(',').next()?.trim().parse::<usize>().ok())
        .ok_or("no #R in the provenance")?;
    let q_count = 4;
    let get = |k: &str| summary[k].as_u64().unwrap_or(u64::MAX) as usize;
    let (dim, verts) = (get("dimension"), get("vertex_count"));
    ensure(dim == 3 + q_count + r_count + 1, || format!("dimension {dim} with #R = {r_count}"))?;
    ensure(verts == 4 + 2 * (q_count + r_count) + 1, || format!("{verts} vertices with #R = {r_count}"))?;
    ensure(summary["base_face_verified"] == true && summary["base_projectively_equivalent"] == true, || {
        "base face not verified".into()
    })?;
    let poly = format::read_polytope(&dir.join("universal.poly.json")).map_err(|e| e.to_string())?;
    ensure(!poly.is_enumerated(), || "face lattice was enumerated".into())?;
    Ok(format!("#R = {r_count}: dimension {dim}, {verts} vertices, base face verified, lattice not enumerated"))
}

fn lemma_dist() -> Outcome {
    let eps = BigRational::new(BigInt::from(1), BigInt::from(100));
    let b = ball_approx(3, &eps, 17).map_err(|e| e.to_string())?;
    ensure(b.enclosure.upper <= eps, || format!("generated polytope at {}", b.enclosure))?;
    let r = check_subpolytope_lemma(&b.polytope, DIST_TRIALS, 5).map_err(|e| e.to_string())?;
    let bound = BigRational::new(BigInt::from(6), BigInt::from(10));
    let violations = r.trials.iter().filter(|t| t.distance_upper > bound).count();
    ensure(r.pass && r.trials.len() == DIST_TRIALS && violations == 0, || r.to_string())?;
    Ok(format!("d_H(P) <= {:.6}; {DIST_TRIALS} supersets within 0.6, worst ratio {:.4}", b.enclosure.upper_f64(), r.worst_ratio))
}

fn lemma_dist2() -> Outcome {
    let mut worst = f64::INFINITY;
    for (k, seed) in [(4, 11), (5, 12), (6, 13)] {
        let r = check_kstacked_lower_bound(3, k, DIST2_SAMPLES, seed).map_err(|e| e.to_string())?;
        let bad = r.samples.iter().filter(|s| s.enclosure.lower < r.bound).count();
        ensure(r.pass && r.samples.len() == DIST2_SAMPLES && bad == 0, || r.to_string())?;
        for s in &r.samples {
            worst = worst.min(s.enclosure.lower_f64());
        }
    }
    Ok(format!("{} k-stacked polytopes for k = 4, 5, 6 above 2^(-2k-4); smallest lower bound {worst:.4}", 3 * DIST2_SAMPLES))
}

fn shephard_scale() -> Outcome {
    let b = shephard_bound(6).map_err(|e| e.to_string())?;
    let expect = BigRational::new(BigInt::from(1), (BigInt::from(1) << 34) * 9);
    ensure(b == expect, || format!("bound {b}"))?;
    match ball_approx(3, &b, 0) {
        Err(ShephardError::Infeasible { vertices, .. }) => Ok(format!("bound = 2^-34/9 exactly; ball approximation infeasible, ~{vertices:.2e} vertices")),
        other => Err(format!("expected infeasibility, got {:?}", other.map(|b| b.net_size))),
    }
}

fn sections() -> Outcome {
    let r = check_sections(SECTION_TRIALS, 21).map_err(|e| e.to_string())?;
    ensure(r.pass && r.trials.len() == SECTION_TRIALS, || r.to_string())?;
    let worst = r.trials.iter().flat_map(|t| t.facet_counts.iter().copied()).max().unwrap_or(0);
    Ok(format!("{SECTION_TRIALS} sections, largest summand {worst} facets <= k = {}", r.k))
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn determinism(root: &Path) -> Outcome {
    let commands: [&[&str]; 6] = [
        &["check", "gadgets", "--trials", "40", "--seed", "7"],
        &["check", "lemma-dist", "--eps", "1/50", "--trials", "20", "--seed", "4"],
        &["check", "lemma-dist2", "--k", "5", "--samples", "10", "--seed", "11"],
        &["check", "ratsub", "--trials", "8", "--seed", "3"],
        &["build", "ball", "--eps", "1/20", "--seed", "3"],
        &["build", "coor", "--point", "sqrt2,1,1", "--field", "x^2-2:[1,2]"],
    ];
    let mut snaps = Vec::new();
    for run_id in ["a", "b"] {
        let dir = root.join(run_id);
        for c in commands {
            let mut args: Vec<&str> = c.to_vec();
            let d = dir.to_string_lossy().into_owned();
            args.extend(["--out", &d]);
            let (code, _) = run(&args)?;
            ensure(code == 0, || format!("{c:?} exited {code}"))?;
        }
        snaps.push(snapshot(&dir));
    }
    ensure(snaps[0] == snaps[1], || {
        let diff: Vec<&String> = snaps[0].iter().zip(&snaps[1]).filter(|(a, b)| a != b).map(|(a, _)| &a.0).collect();
        format!("differing files: {diff:?}")
    })?;
    let doc: ConfigDoc = serde_json::from_slice(&snaps[0].iter().find(|f| f.0 == "coor.config.json").unwrap().1).unwrap();
    let back = format::to_json(&ConfigDoc::from_config(&doc.to_config().map_err(|e| e.to_string())?));
    ensure(back.as_bytes() == &snaps[0].iter().find(|f| f.0 == "coor.config.json").unwrap().1[..], || {
        "configuration does not round-trip".into()
    })?;
    Ok(format!("{} seeded commands, {} files byte-identical across two runs", commands.len(), snaps[0].len()))
}

trait UpperF64 {
    fn upper_f64(&self) -> f64;
    fn lower_f64(&self) -> f64;
}

impl UpperF64 for unipoly::shephard::DistanceEnclosure {
    fn upper_f64(&self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self.upper).unwrap_or(f64::NAN)
    }
    fn lower_f64(&self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self.lower).unwrap_or(f64::NAN)
    }
}

fn main() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = |n: &str| {
        let p = tmp.path().join(n);
        std::fs::create_dir_all(&p).unwrap();
        p
    };
    let (d1, d8, d13) = (dir("c1"), dir("c8"), dir("c13"));
    let criteria: Vec<(&str, Option<Duration>, Box<dyn Fn() -> Outcome>)> = vec![
        ("cube framing", Some(C1_LIMIT), Box::new(move || cube_framing(&d1))),
        ("Q^4 certificate", Some(C2_LIMIT), Box::new(q4_certificate)),
        ("gadget soundness", Some(C3_LIMIT), Box::new(gadget_soundness)),
        ("polynomial compiler", Some(C4_LIMIT), Box::new(polynomial_compiler)),
        ("COOR[sqrt2]", Some(C5_LIMIT), Box::new(coor_sqrt2)),
        ("Lawrence counts", Some(C6_LIMIT), Box::new(lawrence_counts)),
        ("subdirect cone", Some(C7_LIMIT), Box::new(subdirect_cones)),
        ("universal pipeline", Some(C8_LIMIT), Box::new(move || universal_pipeline(&d8))),
        ("superpolytope distance", Some(C9_LIMIT), Box::new(lemma_dist)),
        ("k-stacked lower bound", Some(C10_LIMIT), Box::new(lemma_dist2)),
        ("scale statement", None, Box::new(shephard_scale)),
        ("sections keep k", Some(C12_LIMIT), Box::new(sections)),
        ("determinism", None, Box::new(move || determinism(&d13))),
    ];
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let took = start.elapsed();
        let outcome = match (outcome, limit) {
            (Ok(msg), Some(l)) if took > *l => Err(format!("{msg}; took {took:.2?}, limit {l:?}")),
            (o, _) => o,
        };
        let budget = limit.map_or(String::new(), |l| format!(" (limit {l:?})"));
        match outcome {
            Ok(msg) => println!("PASS {:>2} {name}: {msg} [{took:.2?}{budget}]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {msg} [{took:.2?}{budget}]", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
