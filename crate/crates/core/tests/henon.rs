use proptest::prelude::*;

use renorm_core::analytic::{fd_jacobian, Fn1, Interval, V2};
use renorm_core::fixedpoint::solve_fixed_point;
use renorm_core::henon::{
    extract_parametrisation, find_central_box, horizontal, horizontal_bar, horizontal_inverse, pre_renormalise,
    renormalise_henon, variational_check, HenonLikeMap, Orientation, Thickening,
};
use renorm_core::unimodal::{detect_renormalisable, renormalise_unimodal, UnimodalMap, UnimodalPermutation};
use renorm_core::{Config, Error};

fn f_star(cfg: &Config) -> UnimodalMap {
    let v = UnimodalPermutation::doubling();
    solve_fixed_point(&v, &UnimodalMap::logistic(3.57).unwrap(), 1e-9, cfg).unwrap().f_star
}

fn thickened(f: &UnimodalMap, e: impl Fn(f64, f64) -> f64, o: Orientation, cfg: &Config) -> HenonLikeMap {
    HenonLikeMap::new(f.clone(), Thickening::from_fn(e, cfg).unwrap(), o).unwrap()
}

fn grid(n: usize, b: Interval) -> Vec<V2> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let s = (i as f64 + 0.5) / n as f64;
            let t = (j as f64 + 0.5) / n as f64;
            out.push(V2::new(b.from_unit(s), b.from_unit(t)));
        }
    }
    out
}

#[test]
fn degenerate_map_ignores_y() {
    let cfg = Config::default();
    let f = UnimodalMap::logistic(3.5).unwrap();
    let map = HenonLikeMap::degenerate(f.clone(), &cfg);
    for z in grid(5, Interval::UNIT) {
        let w = map.step(z);
        assert_eq!(w.y, z.x);
        assert!((w.x - f.eval(z.x)).abs() < 1e-14);
        let two = map.apply(z, 2).unwrap();
        let again = map.apply(map.apply(z, 1).unwrap(), 1).unwrap();
        assert!((two - again).norm() < 1e-15);
    }
    let phi2 = map.phi_iterate(2, &cfg);
    assert!((phi2.eval(0.3, 0.9) - f.iterate(0.3, 2)).abs() < 1e-10);
}

#[test]
fn domain_escape_reports_step() {
    let cfg = Config::default();
    let f = UnimodalMap::logistic(3.5).unwrap();
    let map = thickened(&f, |_, y| 0.01 * y, Orientation::Preserving, &cfg);
    // φ(0, 1) = −0.01
    match map.apply(V2::new(0.0, 1.0), 3) {
        Err(e) => {
            assert_eq!(e.kind(), "domain-escape");
            assert!(matches!(e, Error::Stage { stage: 1, .. }), "{e}");
        }
        Ok(z) => panic!("no escape: {z:?}"),
    }
}

#[test]
fn jacobian_matches_fd_determinant() {
    let cfg = Config::default();
    let f = UnimodalMap::logistic(3.5).unwrap();
    for o in [Orientation::Preserving, Orientation::Reversing] {
        let map = thickened(&f, |x, y| 1e-3 * y * (1.0 + x * x) + 2e-4 * y * y, o, &cfg);
        for z in grid(5, Interval { lo: 0.1, hi: 0.9 }).into_iter().take(20) {
            let j = fd_jacobian(|w| map.step(w), z, 1e-6);
            let det = j[(0, 0)] * j[(1, 1)] - j[(0, 1)] * j[(1, 0)];
            let exact = map.jacobian_det(z.x, z.y);
            assert!((det - exact).abs() < 1e-8, "{det} vs {exact}");
            // reversing maps have det < 0 where ε_y > 0
            assert_eq!(exact > 0.0, o == Orientation::Preserving);
        }
    }
}

#[test]
fn horizontal_inverse_reduces_to_branch_inverse() {
    let cfg = Config::default();
    let f = f_star(&cfg);
    let v = UnimodalPermutation::doubling();
    let map = HenonLikeMap::degenerate(f.clone(), &cfg);
    let pr = find_central_box(&map, &v, &cfg).unwrap();
    let j0 = Interval::hull(pr.alpha, pr.beta);
    let right = pr.branch.lo > 0.0;
    for z in grid(5, j0) {
        let u = horizontal_inverse(&map, 2, z.x, z.y, pr.branch).unwrap();
        let b = f.branch_preimage(z.x, right).unwrap();
        assert!((u - b).abs() < 1e-12, "{u} vs {b}");
    }
}

#[test]
fn horizontal_maps_are_inverse() {
    let cfg = Config::default();
    let f = f_star(&cfg);
    let v = UnimodalPermutation::doubling();
    let map = thickened(&f, |x, y| 1e-3 * x * y, Orientation::Preserving, &cfg);
    let pr = find_central_box(&map, &v, &cfg).unwrap();
    let j0 = Interval::hull(pr.alpha, pr.beta);
    let pts = grid(8, j0);
    assert!(pts.len() >= 50);
    for &z in pts.iter().take(50) {
        let back = horizontal(&map, 2, horizontal_bar(&map, &pr, z).unwrap());
        assert!((back - z).norm() < 1e-11, "{:?} vs {z:?}", back);
        // implicit function derivative
        let u = horizontal_inverse(&map, 2, z.x, z.y, pr.branch).unwrap();
        let h = 1e-6;
        let up = horizontal_inverse(&map, 2, z.x + h, z.y, pr.branch).unwrap();
        let dn = horizontal_inverse(&map, 2, z.x - h, z.y, pr.branch).unwrap();
        let fd = (up - dn) / (2.0 * h);
        let exact = 1.0 / map.phi_k_d(u, z.y, 1).1;
        assert!((fd - exact).abs() < 1e-6 * exact.abs(), "{fd} vs {exact}");
    }
}

#[test]
fn central_box_degenerate_and_thickened() {
    let cfg = Config::default();
    let v = UnimodalPermutation::doubling();
    let f = UnimodalMap::logistic(3.5).unwrap();
    let cycle = detect_renormalisable(&f, &v, &cfg).unwrap().unwrap();
    let map0 = HenonLikeMap::degenerate(f.clone(), &cfg);
    let pr0 = find_central_box(&map0, &v, &cfg).unwrap();
    let j0 = Interval::hull(pr0.alpha, pr0.beta);
    assert!(j0.hausdorff(&cycle.central) < 1e-10, "{j0:?} vs {:?}", cycle.central);

    let map = thickened(&f, |_, y| 1e-3 * y, Orientation::Preserving, &cfg);
    let pr = find_central_box(&map, &v, &cfg).unwrap();
    let a = V2::new(pr.alpha, pr.alpha);
    assert!((pre_renormalise(&map, &pr, a).unwrap() - a).norm() < 1e-10);
    let d = Interval::hull(pr.alpha, pr.beta).hausdorff(&j0);
    assert!(d > 0.0 && d < 1e-2, "J0 moved by {d}");
    assert!(pr.critical_distance > 0.5 * cfg.gamma * pr.sigma_f);
}

#[test]
fn pre_renormalisation_identities() {
    let cfg = Config::default();
    let v = UnimodalPermutation::doubling();
    let f = f_star(&cfg);

    let map0 = HenonLikeMap::degenerate(f.clone(), &cfg);
    let pr0 = find_central_box(&map0, &v, &cfg).unwrap();
    for z in grid(5, Interval::hull(pr0.alpha, pr0.beta)) {
        let g = pre_renormalise(&map0, &pr0, z).unwrap();
        assert!((g.x - f.iterate(z.x, 2)).abs() < 1e-12);
    }

    let map = thickened(&f, |x, y| 1e-3 * y * (0.5 + x), Orientation::Reversing, &cfg);
    let pr = find_central_box(&map, &v, &cfg).unwrap();
    let j0 = Interval::hull(pr.alpha, pr.beta);
    for z in grid(10, j0) {
        let g = pre_renormalise(&map, &pr, z).unwrap();
        assert!((g.y - z.x).abs() < 1e-12);
    }
    // H∘F^p = G∘H on B^0 = H̄(B^0_diag)
    for w in grid(8, j0).into_iter().take(50) {
        let z = horizontal_bar(&map, &pr, w).unwrap();
        let lhs = horizontal(&map, 2, map.apply(z, 2).unwrap());
        let rhs = pre_renormalise(&map, &pr, horizontal(&map, 2, z)).unwrap();
        assert!((lhs - rhs).norm() < 1e-10, "{lhs:?} vs {rhs:?}");
    }
}

#[test]
fn degenerate_renormalisation_commutes() {
    let cfg = Config::default();
    let v = UnimodalPermutation::doubling();
    for f in [UnimodalMap::logistic(3.5).unwrap(), f_star(&cfg)] {
        let cycle = detect_renormalisable(&f, &v, &cfg).unwrap().unwrap();
        let rf = renormalise_unimodal(&f, &cycle, &cfg).unwrap();
        let rmap = renormalise_henon(&HenonLikeMap::degenerate(f, &cfg), &v, &cfg).unwrap().map;
        assert!(rmap.is_degenerate());
        let d = rmap.distance(&HenonLikeMap::degenerate(rf, &cfg));
        assert!(d < 1e-9, "{d}");
    }
}

#[test]
fn thickening_shrinks_to_second_order() {
    let cfg = Config::default();
    let v = UnimodalPermutation::doubling();
    let f = f_star(&cfg);
    let map = thickened(&f, |x, y| 1e-4 * y * x, Orientation::Preserving, &cfg);
    let r = renormalise_henon(&map, &v, &cfg).unwrap();
    let e1 = r.map.thickening().sup();
    assert!(e1 > 0.0 && e1 <= 1e-6, "{e1}");
    assert!(r.eps_constant.is_finite());

    // super-exponential decay over three steps
    let mut sups = vec![map.thickening().sup()];
    let mut g = map;
    for _ in 0..3 {
        g = renormalise_henon(&g, &v, &cfg).unwrap().map;
        sups.push(g.thickening().sup());
    }
    let logs: Vec<f64> = sups.iter().map(|s| s.ln()).collect();
    let slopes: Vec<f64> = logs.windows(2).map(|w| w[1] - w[0]).collect();
    assert!(slopes.iter().all(|&s| s < 0.0), "{sups:?}");
    assert!(slopes.windows(2).all(|w| w[1] < w[0]), "not convex: {sups:?}");
}

#[test]
fn renormalisation_is_lipschitz_in_eps() {
    let cfg = Config::default();
    let v = UnimodalPermutation::doubling();
    let f = f_star(&cfg);
    let a = thickened(&f, |x, y| 1e-3 * y * x, Orientation::Preserving, &cfg);
    let b = thickened(&f, |x, y| 1.1e-3 * y * x, Orientation::Preserving, &cfg);
    let ra = renormalise_henon(&a, &v, &cfg).unwrap().map;
    let rb = renormalise_henon(&b, &v, &cfg).unwrap().map;
    let c = ra.distance(&rb) / a.distance(&b);
    assert!(c.is_finite() && c < 1e3, "C = {c}");
}

#[test]
fn parametrisation_extraction() {
    let cfg = Config::default();
    let f = UnimodalMap::logistic(3.7).unwrap();
    let (g, eps, o) = extract_parametrisation(|x, y| f.eval(x) - 0.01 * y, |x, _| x, &cfg).unwrap();
    assert_eq!(o, Orientation::Preserving);
    assert!(g.sup_distance(f.f(), 101) < 1e-12);
    assert!((eps.eval(0.3, 0.7) - 0.007).abs() < 1e-14);

    let (_, eps0, _) = extract_parametrisation(|x, _| f.eval(x), |x, _| x, &cfg).unwrap();
    assert!(eps0.sup() == 0.0);

    // round trip
    let map = thickened(&f, |x, y| 2e-3 * y * (1.0 + x), Orientation::Reversing, &cfg);
    let (g, eps, o) = extract_parametrisation(|x, y| map.phi(x, y), |x, _| x, &cfg).unwrap();
    assert_eq!(o, Orientation::Reversing);
    let diff = eps.eps().coeffs().iter().zip(map.thickening().eps().coeffs()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(diff < 1e-12, "{diff}");
    assert!(g.sup_distance(f.f(), 101) < 1e-12);

    assert!(extract_parametrisation(|x, y| f.eval(x) + y, |x, y| x + 1e-6 * y, &cfg).is_err());
    assert!(extract_parametrisation(|x, _| f.eval(x), |x, _| x, &cfg).is_ok());
    // eps(x, 0) must vanish once φ(·, 0) is taken as f
    let e = Fn1::linear(Interval::UNIT, 0.0, 1.0);
    assert!(Thickening::product(1e-3, &e, &cfg).is_ok());
}

#[test]
fn variational_formula_is_second_order() {
    let cfg = Config::default();
    let f = f_star(&cfg);
    let zero = HenonLikeMap::degenerate(f.clone(), &cfg);
    assert_eq!(variational_check(&zero, 2).residual, 0.0);
    for o in [Orientation::Preserving, Orientation::Reversing] {
        let big = thickened(&f, |x, y| 1e-3 * y * (0.5 + x), o, &cfg);
        let small = thickened(&f, |x, y| 5e-4 * y * (0.5 + x), o, &cfg);
        assert!(variational_check(&big, 1).residual < 1e-15);
        for w in [2, 3] {
            let (rb, rs) = (variational_check(&big, w), variational_check(&small, w));
            let ratio = rb.residual / rs.residual;
            assert!((ratio - 4.0).abs() < 0.5, "w={w} ratio {ratio}");
            assert!(rb.constant.is_finite());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jacobian_sign_follows_orientation(x in 0.0f64..1.0, y in 0.01f64..1.0, c in 1e-5f64..1e-2) {
        let cfg = Config::default();
        let f = UnimodalMap::logistic(3.6).unwrap();
        for o in [Orientation::Preserving, Orientation::Reversing] {
            let map = HenonLikeMap::new(f.clone(), Thickening::linear(c, &cfg).unwrap(), o).unwrap();
            let j = map.jacobian_det(x, y);
            prop_assert!((j - o.sign() * c).abs() < 1e-12 * c.max(1.0));
            let z = map.step(V2::new(x, y));
            prop_assert_eq!(z.y, x);
        }
    }
}
