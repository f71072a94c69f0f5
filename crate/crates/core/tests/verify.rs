use std::f64::consts::SQRT_2;
use std::sync::Arc;

use admesh::geometry::{BBox, Domain, Shape, SmoothDomain, StarDomain};
use admesh::meshgen_c11::{kdelta_markov_check, C11Params};
use admesh::meshgen_star::star_mesh;
use admesh::polyspace::{interval_mesh, Mesh, Poly, PolySpace, Provenance};
use admesh::verify::{
    cardinality_slope, dls_convergence_study, norming_constant_lp, norming_ratio_estimate, norming_ratio_with,
    piecewise_estimate_check, tangential_markov_test, verify_mesh, ControlGrid, SupEstimator, Target, VerifyOptions,
};
use admesh::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn disk_star() -> StarDomain {
    StarDomain::new(Shape::disk([0.0, 0.0], 1.0).unwrap(), None, 0.0, 1.0).unwrap()
}

#[test]
fn a_mesh_containing_the_grid_has_ratio_one() {
    let grid = ControlGrid::interval(0.0, 1.0, 400);
    let est = SupEstimator::grid_only(grid.clone(), BBox::new(vec![0.0], vec![1.0]));
    let mesh = Mesh { degree: 6, constant: 0.0, provenance: Provenance::External, points: grid.points.clone(), layers: None };
    let e = norming_ratio_with(&mesh, &est, 200, 1).unwrap();
    assert!((e.ratio - 1.0).abs() < 1e-12);
    let space = PolySpace::new(6, BBox::new(vec![0.0], vec![1.0])).unwrap();
    let lp = norming_constant_lp(&space, &grid.points, &grid.points).unwrap();
    assert!((lp.value - 1.0).abs() < 1e-9);
}

#[test]
fn interval_mesh_constant() {
    let mesh = interval_mesh(3, 1.0);
    let est = SupEstimator::interval(0.0, 1.0, 10_000);
    let sampled = norming_ratio_with(&mesh, &est, 1000, 7).unwrap().ratio;
    let space = PolySpace::new(3, BBox::new(vec![0.0], vec![1.0])).unwrap();
    let lp = norming_constant_lp(&space, &mesh.points, &ControlGrid::interval(0.0, 1.0, 1000).points).unwrap().value;
    assert!(lp > 1.0 && lp <= SQRT_2 * (1.0 + 1e-9), "{lp}");
    assert!(sampled <= lp * (1.0 + 1e-6), "{sampled} > {lp}");
}

#[test]
fn too_few_points_are_unbounded() {
    let bbox = BBox::new(vec![-1.0, -1.0], vec![1.0, 1.0]);
    let space = PolySpace::new(2, bbox).unwrap();
    let five = vec![vec![0.0, 0.0], vec![0.5, 0.0], vec![0.0, 0.5], vec![-0.5, 0.2], vec![0.3, -0.6]];
    let control = ControlGrid::polar(&disk_star(), 400);
    assert!(matches!(norming_constant_lp(&space, &five, &control.points), Err(Error::Unbounded)));
}

#[test]
fn star_mesh_on_the_disk_verifies() {
    let d = disk_star();
    let mesh = star_mesh(&d, 8).unwrap();
    assert!(norming_ratio_estimate(&mesh, &d, 500, 2).unwrap().ratio <= 4.8284);
    let opts = VerifyOptions { trials: 300, lp: true, ..Default::default() };
    let report = verify_mesh(&star_mesh(&d, 3).unwrap(), &d, &opts).unwrap();
    assert!(report.passed(), "{:?}", report.violations);
    let lp = report.lp.unwrap().value;
    assert!(report.lp_grid_ratio.unwrap() <= lp * (1.0 + 1e-9));
}

#[test]
fn verification_flags_a_mesh_without_its_outer_layers() {
    let d = disk_star();
    let mut mesh = star_mesh(&d, 6).unwrap();
    mesh.points.retain(|p| p[0].hypot(p[1]) <= 0.5);
    mesh.layers = None;
    let report = verify_mesh(&mesh, &d, &VerifyOptions { trials: 300, ..Default::default() }).unwrap();
    assert!(!report.passed());
}

#[test]
fn slopes() {
    let exact: Vec<(usize, usize)> = [4usize, 8, 16, 32].iter().map(|&n| (n, 3 * n * n)).collect();
    assert!((cardinality_slope(&exact).unwrap().slope - 2.0).abs() < 1e-12);
    assert!(cardinality_slope(&[(4, 10)]).is_err());
}

#[test]
fn tangential_markov_on_balls() {
    let r = tangential_markov_test(0.5, 6, 1000, 3).unwrap();
    assert_eq!(r.violations, 0);
    assert!(r.max_ratio <= 1.0 + 1e-6);
    // p = x is extremal at (0, +-1) in the tangent direction
    let lin = tangential_markov_test(1.0, 1, 200, 3).unwrap();
    assert!(lin.max_ratio > 0.99 && lin.max_ratio <= 1.0 + 1e-9, "{}", lin.max_ratio);
}

#[test]
fn inequality_suites_hold_on_the_disk() {
    let disk = SmoothDomain::new(Shape::disk([0.0, 0.0], 1.0).unwrap(), 1.0).unwrap();
    assert!(kdelta_markov_check(&disk, 1, 0.5, 300, 5).unwrap().max_ratio <= 1.0 + 1e-6);
    let params = C11Params::new(0.5, 2.0, 4.0).unwrap();
    assert!(piecewise_estimate_check(&disk, 4, &params, 200, 5).unwrap().holds());
}

#[test]
fn least_squares_study() {
    let d = disk_star();
    let degrees = [2usize, 4, 6, 8];
    let rows = dls_convergence_study(&d, |n| star_mesh(&d, n), &Target::Exp, &degrees, 100, 9).unwrap();
    assert!(rows.windows(2).all(|w| w[1].error < w[0].error));
    assert!(rows.iter().all(|r| r.within_bound()));
    let abs = dls_convergence_study(&d, |n| star_mesh(&d, n), &Target::Abs, &[2, 8], 100, 9).unwrap();
    assert!(abs[1].error < abs[0].error);
    assert!(Target::parse("sinc").is_err());

    let space = Arc::new(PolySpace::new(5, d.bbox()).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let target = Target::Poly(Poly::random(space, &mut rng));
    let rows = dls_convergence_study(&d, |n| star_mesh(&d, n), &target, &[5, 7], 100, 9).unwrap();
    assert!(rows.iter().all(|r| r.error <= 1e-9), "{rows:?}");
}
