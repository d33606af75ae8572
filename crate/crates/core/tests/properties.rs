use std::f64::consts::{PI, TAU};

use diastatic::catalog::{entropy_symmetric, parse_domain};
use diastatic::entropy_numeric::estimate_entropy;
use diastatic::exact::to_f64;
use diastatic::geometry::{DomainModel, ModelKind};
use diastatic::hilbert::{build_space, check_balanced, BalanceVerdict, Gauge, QuadratureSpec, DEFAULT_REL_TOL};
use diastatic::point::{Point, C64};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn models() -> Vec<DomainModel> {
    vec![
        DomainModel::disk(1.0).unwrap(),
        DomainModel::ball(3, 1.5).unwrap(),
        DomainModel::polydisk(2, 1.0).unwrap(),
        DomainModel::type_one(2, 2, 1.0).unwrap(),
        DomainModel::type_one(2, 3, 0.5).unwrap(),
    ]
}

/// A point with Minkowski radius `r` in a direction drawn from `raw`.
fn point_in(model: &DomainModel, raw: &[(f64, f64)], r: f64) -> Point {
    let v: Vec<C64> = raw.iter().take(model.dim()).map(|&(a, b)| C64::new(a, b)).collect();
    let p = Point(v);
    let n = model.gauge_norm(&p).max(1e-9);
    p.scaled(r / n)
}

fn raw_point() -> impl Strategy<Value = (Vec<(f64, f64)>, f64)> {
    (proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 6), 0.0..0.95f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn diastasis_is_symmetric_and_vanishes(a in raw_point(), b in raw_point()) {
        for m in models() {
            let w = point_in(&m, &a.0, a.1);
            let z = point_in(&m, &b.0, b.1);
            let d1 = m.diastasis(&w, &z).unwrap();
            let d2 = m.diastasis(&z, &w).unwrap();
            prop_assert!((d1 - d2).abs() <= 1e-12 * d1.abs().max(1.0));
            prop_assert!(m.diastasis(&z, &z).unwrap().abs() <= 1e-12);
            prop_assert!(d1 >= -1e-12);
        }
    }

    #[test]
    fn scale_linearity(a in raw_point(), b in raw_point(), mu in 0.1..5.0f64) {
        for m in models() {
            let scaled = DomainModel::new(m.kind, mu).unwrap();
            let k = mu / m.scale;
            let w = point_in(&m, &a.0, a.1);
            let z = point_in(&m, &b.0, b.1);
            let (p1, p2) = (m.potential(&z).unwrap(), scaled.potential(&z).unwrap());
            prop_assert!((p2 - k * p1).abs() <= 1e-12 * p2.abs().max(1.0));
            let (d1, d2) = (m.diastasis(&w, &z).unwrap(), scaled.diastasis(&w, &z).unwrap());
            prop_assert!((d2 - k * d1).abs() <= 1e-12 * d2.abs().max(1.0));
            let (v1, v2) = (m.volume_density(&z).unwrap(), scaled.volume_density(&z).unwrap());
            let ratio = k.powi(m.dim() as i32);
            prop_assert!((v2 / (ratio * v1) - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn one_dimensional_models_agree(x in -0.95..0.95f64, y in -0.95..0.95f64, u in -0.95..0.95f64, v in -0.95..0.95f64) {
        let (z, w) = (C64::new(x, y), C64::new(u, v));
        prop_assume!(z.norm() < 0.97 && w.norm() < 0.97);
        let kinds = [ModelKind::Disk, ModelKind::Ball(1), ModelKind::TypeI { p: 1, q: 1 }, ModelKind::Polydisk(1)];
        let ms: Vec<DomainModel> = kinds.iter().map(|&k| DomainModel::new(k, 1.3).unwrap()).collect();
        let (zp, wp) = (Point::from(z), Point::from(w));
        let base = &ms[0];
        for m in &ms[1..] {
            prop_assert!((m.potential(&zp).unwrap() - base.potential(&zp).unwrap()).abs() <= 1e-12);
            prop_assert!((m.diastasis(&wp, &zp).unwrap() - base.diastasis(&wp, &zp).unwrap()).abs() <= 1e-12);
            let (a, b) = (m.volume_density(&zp).unwrap(), base.volume_density(&zp).unwrap());
            prop_assert!((a - b).abs() <= 1e-12 * b);
            if m.kind != (ModelKind::TypeI { p: 1, q: 1 }) {
                let (ka, kb) = (m.closed_form_kernel(2.0, &zp, &wp).unwrap(), base.closed_form_kernel(2.0, &zp, &wp).unwrap());
                prop_assert!((ka - kb).norm() <= 1e-12 * kb.norm());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_form_kernel_is_positive(pts in proptest::collection::vec(raw_point(), 2..10), lambda in 2.05..6.0f64) {
        for m in [DomainModel::disk(1.0).unwrap(), DomainModel::ball(2, 1.0).unwrap(), DomainModel::polydisk(2, 1.0).unwrap()] {
            let zs: Vec<Point> = pts.iter().map(|(raw, r)| point_in(&m, raw, *r)).collect();
            let n = zs.len();
            let g = DMatrix::from_fn(n, n, |i, j| m.closed_form_kernel(lambda, &zs[i], &zs[j]).unwrap());
            for i in 0..n {
                for j in 0..n {
                    prop_assert!((g[(i, j)] - g[(j, i)].conj()).norm() <= 1e-12 * g[(i, j)].norm().max(1.0));
                }
            }
            let h = (&g + g.adjoint()).unscale(2.0);
            let scale = h.diagonal().iter().map(|d| d.re).fold(0.0, f64::max);
            let min = h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
            prop_assert!(min >= -1e-10 * scale, "min eigenvalue {min}");
        }
    }

    #[test]
    fn truncated_kernel_grows_with_degree(x in -0.9..0.9f64, y in -0.9..0.9f64, lambda in 1.3..5.0f64) {
        let z = Point::from(C64::new(x, y));
        prop_assume!(z.norm() < 0.95);
        let m = DomainModel::disk(1.0).unwrap();
        let ka = build_space(&m, lambda, 40, QuadratureSpec::auto(&m, 40, &Gauge::none())).unwrap();
        let mut prev = 0.0;
        for k in 0..=40 {
            let v = ka.truncated_diagonal(&z, k).unwrap();
            prop_assert!(v >= prev);
            prev = v;
        }
        let k = ka.reproducing_kernel(&z, &z).unwrap();
        prop_assert!(k.im == 0.0 && k.re >= 0.0);
    }
}

#[test]
fn ball_gram_is_orthogonal() {
    let m = DomainModel::ball(2, 1.0).unwrap();
    let ka = build_space(&m, 3.0, 16, QuadratureSpec::auto(&m, 16, &Gauge::none())).unwrap();
    let g = ka.gram();
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            if i != j {
                assert!(g[(i, j)].norm() <= 1e-10 * (g[(i, i)].re * g[(j, j)].re).sqrt());
            }
        }
    }
}

#[test]
fn ball_gram_from_cone_agrees_with_radial() {
    // the cone path integrates the same monomial norms
    let m = DomainModel::ball(2, 1.0).unwrap();
    let radial = build_space(&m, 3.5, 4, QuadratureSpec::auto(&m, 4, &Gauge::none())).unwrap();
    let cone = build_space(&m, 3.5, 4, QuadratureSpec::Cone { radial_nodes: 24, angular_nodes: 12, polar_nodes: 12 }).unwrap();
    let diff = (radial.gram() - cone.gram()).iter().map(|x| x.norm()).fold(0.0, f64::max);
    assert!(diff < 1e-12, "{diff}");
}

#[test]
fn balanced_spaces_have_entropy_below_lambda() {
    let cases = [
        (DomainModel::disk(1.0).unwrap(), vec![1.3, 2.0, 3.0]),
        (DomainModel::disk(2.0).unwrap(), vec![0.8, 1.5]),
        (DomainModel::ball(2, 1.0).unwrap(), vec![2.5, 3.0]),
    ];
    let tol = 0.05;
    for (m, lambdas) in cases {
        let est = estimate_entropy(&m, &Point::origin(m.dim()), tol).unwrap();
        for lambda in lambdas {
            let rep = check_balanced(&m, lambda, None, None, DEFAULT_REL_TOL).unwrap();
            assert_eq!(rep.verdict, BalanceVerdict::Balanced, "{} λ={lambda}", m.kind);
            assert!(est.lower < lambda, "{} λ={lambda}: bracket ({}, {})", m.kind, est.lower, est.upper);
        }
    }
}

#[test]
fn balanced_iff_entropy_below_lambda_on_a_grid() {
    let m = DomainModel::disk(1.0).unwrap();
    let est = estimate_entropy(&m, &Point::origin(1), 0.05).unwrap();
    for lambda in [0.5, 0.8, 0.9, 1.2, 1.5, 2.0, 3.0] {
        let rep = check_balanced(&m, lambda, None, None, DEFAULT_REL_TOL).unwrap();
        let balanced = rep.verdict == BalanceVerdict::Balanced;
        assert_eq!(balanced, est.upper < lambda, "λ={lambda}: {:?}", rep.verdict);
        assert_eq!(balanced, lambda > m.entropy_closed_form());
    }
}

#[test]
fn bergman_estimates_match_catalog() {
    for label in ["I:1,1", "I:1,2", "I:1,3", "I:2,2"] {
        let d = parse_domain(label).unwrap();
        let kind = ModelKind::from_descriptor(&d).unwrap();
        let m = DomainModel::bergman(kind).unwrap();
        let tol = 0.05;
        let est = estimate_entropy(&m, &Point::origin(m.dim()), tol).unwrap();
        let exact = to_f64(&entropy_symmetric(&d));
        assert!(est.contains(exact), "{label}: ({}, {}) vs {exact}", est.lower, est.upper);
    }
}

#[test]
fn entropy_is_independent_of_base_point() {
    let tol = 0.05;
    for (m, z0) in [
        (DomainModel::disk(1.0).unwrap(), Point::from(C64::from_polar(0.4, 1.1))),
        (DomainModel::ball(2, 1.0).unwrap(), Point(vec![C64::new(0.2, 0.1), C64::new(0.0, -0.3)])),
    ] {
        let a = estimate_entropy(&m, &Point::origin(m.dim()), tol).unwrap();
        let b = estimate_entropy(&m, &z0, tol).unwrap();
        assert!((a.midpoint() - b.midpoint()).abs() <= 2.0 * tol, "{}: {} vs {}", m.kind, a.midpoint(), b.midpoint());
    }
}

#[test]
fn epsilon_is_constant_on_circles() {
    let m = DomainModel::disk(1.0).unwrap();
    let ka = build_space(&m, 2.5, 64, QuadratureSpec::auto(&m, 64, &Gauge::none())).unwrap();
    let e0 = ka.epsilon_function(&Point::origin(1)).unwrap();
    assert!((e0 - 1.5 / PI).abs() < 1e-12);
    for k in 0..12 {
        let z = Point::from(C64::from_polar(0.5, TAU * k as f64 / 12.0));
        assert!((ka.epsilon_function(&z).unwrap() / e0 - 1.0).abs() < 1e-10);
    }
}
