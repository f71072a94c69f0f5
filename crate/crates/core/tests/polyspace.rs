use std::sync::Arc;

use admesh::geometry::BBox;
use admesh::polyspace::{
    afp_extract, bernstein_bound, chebyshev_points_scaled, chebyshev_t, dls_fit, numerical_rank, space_dimension,
    sup_norm_on, Mesh, Poly, PolySpace, Provenance,
};
use admesh::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn square() -> BBox {
    BBox::new(vec![-1.0, -1.0], vec![1.0, 1.0])
}

fn external(degree: usize, points: Vec<Vec<f64>>) -> Mesh {
    Mesh { degree, constant: 0.0, provenance: Provenance::External, points, layers: None }
}

#[test]
fn dimensions() {
    assert_eq!(space_dimension(0, 2).unwrap(), 1);
    assert_eq!(space_dimension(2, 2).unwrap(), 6);
    // direct count of multi-indices with |alpha| <= 10 in three variables
    let brute = (0..=10usize).flat_map(|a| (0..=10 - a).map(move |b| 10 - a - b + 1)).sum::<usize>();
    assert_eq!(space_dimension(10, 3).unwrap(), brute);
    assert_eq!(brute, 286);
    assert_eq!(PolySpace::new(4, square()).unwrap().len(), 15);
}

#[test]
fn scaled_chebyshev_points() {
    let p = chebyshev_points_scaled(1, 2.0);
    assert_eq!(p, vec![0.0, 1.0, 2.0]);
    let q = chebyshev_points_scaled(2, 1.0);
    let oracle: Vec<f64> = (0..=4).map(|j| (1.0 + (std::f64::consts::PI * (4 - j) as f64 / 4.0).cos()) / 2.0).collect();
    for (a, b) in q.iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-15);
    }
    for n in 1..20 {
        let p = chebyshev_points_scaled(n, 3.0);
        assert_eq!((p[0], p[2 * n]), (0.0, 3.0));
        assert!(p.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn vandermonde_rank() {
    let space = PolySpace::new(0, square()).unwrap();
    let v = space.vandermonde(&[vec![0.3, 0.2]]);
    assert_eq!((v.nrows(), v.ncols()), (1, 1));
    assert!((v[(0, 0)] - 1.0).abs() < 1e-15);

    let space = PolySpace::new(3, square()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pts: Vec<Vec<f64>> = (0..10).map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect();
    assert_eq!(numerical_rank(&space.vandermonde(&pts)), 10);
    let mut dup = pts.clone();
    dup[9] = dup[0].clone();
    assert!(numerical_rank(&space.vandermonde(&dup)) < 10);
}

#[test]
fn sup_norms_on_finite_sets() {
    let line = BBox::new(vec![-2.0], vec![2.0]);
    let space = Arc::new(PolySpace::new(1, line).unwrap());
    let one = Poly::constant(space.clone(), 1.0);
    let pts = vec![vec![0.0], vec![0.5], vec![-2.0]];
    assert_eq!(sup_norm_on(&pts, &one).unwrap(), 1.0);
    let x = space.fit(&[vec![-2.0], vec![2.0]], &[-2.0, 2.0]).unwrap();
    assert!((sup_norm_on(&pts, &x).unwrap() - 2.0).abs() < 1e-12);

    let unit = BBox::new(vec![-1.0], vec![1.0]);
    let space = Arc::new(PolySpace::new(7, unit).unwrap());
    let extrema: Vec<Vec<f64>> = (0..=7).map(|k| vec![(std::f64::consts::PI * k as f64 / 7.0).cos()]).collect();
    let t7: Vec<f64> = extrema.iter().map(|x| chebyshev_t(7, x[0])).collect();
    let p = space.fit(&extrema, &t7).unwrap();
    assert!((sup_norm_on(&extrema, &p).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn least_squares_fixes_polynomials() {
    let space = Arc::new(PolySpace::new(5, square()).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let pts: Vec<Vec<f64>> = (0..200).map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect();
    let mesh = external(5, pts.clone());
    let p = Poly::random(space.clone(), &mut rng);
    let samples: Vec<f64> = pts.iter().map(|x| p.eval(x)).collect();
    let q = dls_fit(&space, &mesh, &samples).unwrap();
    for x in &pts {
        assert!((p.eval(x) - q.eval(x)).abs() < 1e-10);
    }
    let c = dls_fit(&space, &mesh, &vec![2.5; pts.len()]).unwrap();
    assert!(pts.iter().all(|x| (c.eval(x) - 2.5).abs() < 1e-12));
}

#[test]
fn approximate_fekete_points() {
    let line = BBox::new(vec![-1.0], vec![1.0]);
    let space = PolySpace::new(5, line).unwrap();
    let equi: Vec<Vec<f64>> = (0..200).map(|i| vec![-1.0 + 2.0 * i as f64 / 199.0]).collect();
    let picked = afp_extract(&space, &equi).unwrap();
    assert_eq!(picked.len(), 6);
    let mut xs: Vec<f64> = picked.iter().map(|&i| equi[i][0]).collect();
    xs.sort_by(f64::total_cmp);
    // Fekete points of the interval include the endpoints and crowd toward them
    assert_eq!((xs[0], xs[5]), (-1.0, 1.0));
    assert!(xs[1] - xs[0] < xs[3] - xs[2]);

    let exact: Vec<Vec<f64>> = vec![vec![-1.0], vec![-0.6], vec![-0.1], vec![0.2], vec![0.7], vec![1.0]];
    let mut all = afp_extract(&space, &exact).unwrap();
    all.sort();
    assert_eq!(all, (0..6).collect::<Vec<_>>());

    let plane = PolySpace::new(2, square()).unwrap();
    let collinear: Vec<Vec<f64>> = (0..50).map(|i| vec![i as f64 / 49.0, 0.5]).collect();
    assert!(matches!(afp_extract(&plane, &collinear), Err(Error::RankDeficient { .. })));
}

#[test]
fn bernstein_bounds() {
    assert_eq!(bernstein_bound(3, -1.0, 1.0, 0.0).unwrap(), 3.0);
    assert_eq!(bernstein_bound(1, 0.0, 4.0, 2.0).unwrap(), 0.5);
    let near: Vec<f64> = [1e-1, 1e-3, 1e-6].iter().map(|e| bernstein_bound(2, 0.0, 1.0, *e).unwrap()).collect();
    assert!(near.windows(2).all(|w| w[1] > w[0]));
    assert!(bernstein_bound(2, 0.0, 1.0, 0.0).is_err());
}
