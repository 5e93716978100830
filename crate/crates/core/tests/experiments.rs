use num_rational::BigRational;
use num_traits::ToPrimitive;
use unipoly::hull::{stacked_generator, Halfspace};
use unipoly::shephard::*;
use unipoly::Scalar;

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

#[test]
fn ball_approx_meets_target() {
    for (eps, seed) in [(r(1, 20), 1), (r(1, 10), 2), (r(1, 100), 3)] {
        let b = ball_approx(3, &eps, seed).unwrap();
        assert!(b.enclosure.upper <= eps, "{} > {}", b.enclosure.upper, eps);
        assert!(b.enclosure.lower <= b.enclosure.upper);
    }
}

#[test]
fn ball_approx_at_paper_scale_is_infeasible() {
    let eps = shephard_bound(6).unwrap();
    match ball_approx(3, &eps, 0) {
        Err(ShephardError::Infeasible { vertices, .. }) => assert!(vertices > 1e10),
        other => panic!("expected infeasibility, got {other:?}"),
    }
    assert!(matches!(ball_approx(4, &r(1, 10), 0), Err(ShephardError::Unsupported(4))));
}

#[test]
fn enclosure_shrinks_with_precision() {
    let b = ball_approx(3, &r(1, 10), 4).unwrap();
    let mut last = None;
    for bits in [4u32, 10, 20, 40] {
        let w = BigRational::new(1.into(), num_bigint::BigInt::from(1) << bits);
        let e = hausdorff_to_ball(&b.polytope, &w).unwrap();
        let reference = b.enclosure.upper.to_f64().unwrap();
        assert!(e.lower.to_f64().unwrap() <= reference + 1e-12);
        if let Some(prev) = last {
            assert!(e.width() <= prev);
        }
        last = Some(e.width());
    }
}

#[test]
fn superpolytopes_at_one_percent() {
    let b = ball_approx(3, &r(1, 100), 17).unwrap();
    let rep = check_subpolytope_lemma(&b.polytope, 100, 5).unwrap();
    assert_eq!(rep.trials.len(), 100);
    assert!(rep.pass, "{rep}");
    assert!(rep.worst_ratio <= 1.0);
}

#[test]
fn superpolytopes_at_one_permille() {
    let b = ball_approx(3, &r(1, 1000), 17).unwrap();
    let rep = check_subpolytope_lemma(&b.polytope, 100, 6).unwrap();
    assert!(rep.pass, "{rep}");
}

#[test]
fn lemma_needs_a_round_polytope() {
    let b = ball_approx(3, &r(1, 5), 1).unwrap();
    assert!(matches!(check_subpolytope_lemma(&b.polytope, 1, 1), Err(ShephardError::Precondition(_))));
}

#[test]
fn contrapositive_on_coarse_ball() {
    let b = ball_approx(3, &r(1, 10), 8).unwrap();
    let rep = check_contrapositive(&b.polytope, 20, 2).unwrap();
    assert!(rep.pass);
}

#[test]
fn kstacked_lower_bounds() {
    for (k, seed) in [(4, 11), (5, 12), (6, 13)] {
        let rep = check_kstacked_lower_bound(3, k, 50, seed).unwrap();
        assert_eq!(rep.samples.len(), 50);
        assert!(rep.pass, "{rep}");
    }
}

#[test]
fn kstacked_report_is_deterministic() {
    let a = check_kstacked_lower_bound(3, 5, 5, 99).unwrap().to_string();
    let b = check_kstacked_lower_bound(3, 5, 5, 99).unwrap().to_string();
    assert_eq!(a, b);
}

#[test]
fn sections_keep_k() {
    for seed in 0..20u64 {
        let (_, recipe) = stacked_generator(3, 3 + seed as usize % 4, seed);
        for (a, b, c) in [(1, 1, 1), (1, -2, 3), (0, 1, 2)] {
            let h = Halfspace {
                normal: vec![Scalar::from_int(a), Scalar::from_int(b), Scalar::from_int(c)],
                offset: Scalar::ratio(1, 3),
            };
            let s = section_recipe(&recipe, &h.to_flat()).unwrap();
            assert!(s.respects_k(), "seed {seed}");
            assert!(s.pieces.iter().all(|p| p.facet_count() <= recipe.k));
        }
    }
}
