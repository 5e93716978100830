//! Named polytopes and random rational polytopes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{hull_of, Polytope};
use crate::exact::Scalar;

fn ints(x: &[i64]) -> Vec<Scalar> {
    x.iter().map(|&c| Scalar::from_int(c)).collect()
}

/// conv(0, e_1, …, e_d), vertices `v0..vd`.
pub fn simplex(d: usize) -> Polytope {
    let pts = (0..=d)
        .map(|i| {
            let mut x = vec![0; d];
            if i > 0 {
                x[i - 1] = 1;
            }
            (format!("v{i}"), ints(&x))
        })
        .collect();
    hull_of(d, pts)
}

/// [-1, 1]^d; vertex labels spell the sign pattern, e.g. `c+-+`.
pub fn cube(d: usize) -> Polytope {
    let pts = (0..1usize << d)
        .map(|m| {
            let x: Vec<i64> = (0..d).map(|i| if m >> i & 1 == 1 { 1 } else { -1 }).collect();
            let name: String = x.iter().map(|&c| if c > 0 { '+' } else { '-' }).collect();
            (format!("c{name}"), ints(&x))
        })
        .collect();
    hull_of(d, pts)
}

/// conv(±e_i).
pub fn cross_polytope(d: usize) -> Polytope {
    let mut pts = Vec::new();
    for i in 0..d {
        for s in [1, -1] {
            let mut x = vec![0; d];
            x[i] = s;
            pts.push((format!("{}{i}", if s > 0 { 'p' } else { 'm' }), ints(&x)));
        }
    }
    hull_of(d, pts)
}

/// Pyramid over the unit square with apex above its center.
pub fn square_pyramid() -> Polytope {
    let pts = [("a", [0, 0, 0]), ("b", [2, 0, 0]), ("c", [2, 2, 0]), ("d", [0, 2, 0]), ("apex", [1, 1, 2])]
        .iter()
        .map(|(l, x)| (l.to_string(), ints(x)))
        .collect();
    hull_of(3, pts)
}

/// Hull of `n` random rational points with denominators up to 8, resampled
/// until full dimensional.
pub fn random_polytope(d: usize, n: usize, seed: u64) -> Polytope {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let pts = (0..n.max(d + 1))
            .map(|i| {
                let x = (0..d)
                    .map(|_| Scalar::ratio(rng.gen_range(-16..=16), rng.gen_range(1..=8)))
                    .collect();
                (format!("p{i}"), x)
            })
            .collect();
        let p = hull_of(d, pts);
        if p.dim() == d as isize {
            return p;
        }
    }
}

/// Look up `simplex`, `tetrahedron`, `cube`, `cross`, `octahedron` or `square-pyramid`.
pub fn named(name: &str, d: usize) -> Option<Polytope> {
    match name {
        "simplex" => Some(simplex(d)),
        "tetrahedron" => Some(simplex(3)),
        "cube" => Some(cube(d)),
        "cross" => Some(cross_polytope(d)),
        "octahedron" => Some(cross_polytope(3)),
        "square-pyramid" => Some(square_pyramid()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(simplex(4).f_vector(), vec![5, 10, 10, 5]);
        assert_eq!(cube(3).f_vector(), vec![8, 12, 6]);
        assert_eq!(cross_polytope(3).f_vector(), vec![6, 12, 8]);
        assert_eq!(square_pyramid().f_vector(), vec![5, 8, 5]);
    }

    #[test]
    fn random_is_full_dimensional_and_seeded() {
        let a = random_polytope(3, 8, 4);
        assert_eq!(a.dim(), 3);
        assert_eq!(a, random_polytope(3, 8, 4));
    }
}
