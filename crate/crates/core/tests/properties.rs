use std::sync::Arc;

use admesh::geometry::{BBox, Shape, StarDomain};
use admesh::io::{domain_from_json, domain_to_json, mesh_from_json, mesh_to_json, poly_from_json, poly_to_json, DomainFile};
use admesh::meshgen_c11::{phi, potential_f};
use admesh::meshgen_star::star_mesh;
use admesh::polyspace::{chebyshev_points_scaled, Poly, PolySpace};
use admesh::quadrature::integrate;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn chebyshev_points_are_symmetric(n in 1usize..40, r in 0.1f64..10.0) {
        let p = chebyshev_points_scaled(n, r);
        prop_assert_eq!(p.len(), 2 * n + 1);
        for j in 0..=2 * n {
            prop_assert!((p[j] + p[2 * n - j] - r).abs() <= 4.0 * f64::EPSILON * r);
        }
    }

    #[test]
    fn potential_increases_with_depth(n in 1usize..20, delta in 0.05f64..2.0, a in 0.0f64..4.0, b in 0.0f64..4.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(potential_f(n, delta, lo) <= potential_f(n, delta, hi));
    }

    #[test]
    fn potential_beyond_delta_is_the_integral_of_phi(n in 1usize..10, delta in 0.1f64..1.0, t in 1.0f64..3.0) {
        let d = delta * t;
        let tail = integrate(|s| phi(n, delta, s), delta, d, 1e-13);
        prop_assert!((potential_f(n, delta, delta) + tail - potential_f(n, delta, d)).abs() < 1e-9);
    }

    #[test]
    fn star_mesh_lies_in_the_disk(n in 1usize..12, radius in 0.2f64..5.0, cx in -3.0f64..3.0) {
        let d = StarDomain::new(Shape::disk([cx, 0.0], radius).unwrap(), None, 0.0, radius).unwrap();
        let m = star_mesh(&d, n).unwrap();
        let ring = (2.0 * std::f64::consts::PI * n as f64 * (1.0 - 1e-12)).ceil() as usize;
        prop_assert_eq!(m.cardinality(), 2 * n * ring + 1);
        for p in &m.points {
            prop_assert!((p[0] - cx).hypot(p[1]) <= radius * (1.0 + 1e-12));
        }
    }

    #[test]
    fn meshes_and_polynomials_round_trip(n in 1usize..8, seed in any::<u64>()) {
        let d = StarDomain::new(Shape::disk([0.0, 0.0], 1.0).unwrap(), None, 0.0, 1.0).unwrap();
        let m = star_mesh(&d, n).unwrap();
        prop_assert_eq!(&mesh_from_json(&mesh_to_json(&m).unwrap()).unwrap(), &m);
        let space = Arc::new(PolySpace::new(n, BBox::new(vec![-1.0, -1.0], vec![1.0, 1.0])).unwrap());
        let p = Poly::random(space, &mut ChaCha8Rng::seed_from_u64(seed));
        let q = poly_from_json(&poly_to_json(&p).unwrap()).unwrap();
        prop_assert_eq!(p.coeffs(), q.coeffs());
    }

    #[test]
    fn domain_files_round_trip(a in 0.5f64..3.0, b in 0.5f64..3.0) {
        let f = DomainFile::ellipse([0.1, -0.2], a, b);
        let back = domain_from_json(&domain_to_json(&f).unwrap()).unwrap();
        prop_assert_eq!(back.smooth().unwrap().reach(), f.smooth().unwrap().reach());
    }
}
