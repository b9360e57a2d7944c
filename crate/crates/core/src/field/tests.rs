use std::f64::consts::{PI, TAU};

use proptest::prelude::*;

use super::*;
use crate::lattice::lambda1;

fn square_field(n: usize, family: &AnalyticFamily) -> ScalarField {
    from_analytic(&Lattice2D::square(), n, n, family).unwrap()
}

fn metric(field: ScalarField) -> ConformalMetric {
    ConformalMetric::new(field).unwrap()
}

#[test]
fn constant_family() {
    let f = square_field(32, &AnalyticFamily::constant(1.0));
    assert!(f.values().iter().all(|&x| x == 1.0));
}

#[test]
fn trig_family_direct_formula() {
    let f = square_field(32, &AnalyticFamily::trig(0.1, 1, 0));
    for i in 0..32 {
        for j in 0..32 {
            let expect = 1.0 + 0.1 * (TAU * i as f64 / 32.0).cos();
            assert!((f.at(i, j) - expect).abs() < 1e-15);
        }
    }
}

#[test]
fn non_positive_factor_is_rejected() {
    let err = from_analytic(&Lattice2D::square(), 16, 16, &AnalyticFamily::trig(1.5, 1, 0))
        .unwrap_err();
    assert!(matches!(err, Error::InvalidFactor(_)));
    let err = from_analytic(&Lattice2D::square(), 16, 16, &AnalyticFamily::constant(0.0))
        .unwrap_err();
    assert!(matches!(err, Error::InvalidFactor(_)));
    let f = ScalarField::from_fn(Lattice2D::square(), 8, 8, |u, _| u - 0.5).unwrap();
    assert!(matches!(ConformalMetric::new(f), Err(Error::InvalidFactor(_))));
}

#[test]
fn small_or_non_unit_grids_are_rejected() {
    assert!(matches!(
        ScalarField::from_fn(Lattice2D::square(), 4, 16, |_, _| 1.0),
        Err(Error::InvalidGrid(_))
    ));
    let big = Lattice2D::from_arrays([2.0, 0.0], [0.0, 1.0]).unwrap();
    let f = ScalarField::from_fn(big, 8, 8, |_, _| 1.0).unwrap();
    assert!(matches!(ConformalMetric::new(f), Err(Error::InvalidLattice(_))));
}

/// Independent construction of the riemann-bump: the compactly supported
/// bump is summed over every translate in a 7×7 block of the lattice.
fn riemann_bump_oracle(lattice: &Lattice2D, alpha: f64, center: Vec2, x: Vec2) -> f64 {
    let l1 = lambda1(lattice);
    let (inner, outer) = (0.25 * l1, 0.45 * l1);
    let h0 = |r: f64| -(1.0 + alpha / 4.0 * r * r).ln();
    let psi = |s: f64| if s > 0.0 { (-1.0 / s).exp() } else { 0.0 };
    let chi = |r: f64| {
        let s = (outer - r) / (outer - inner);
        psi(s) / (psi(s) + psi(1.0 - s))
    };
    let mut bump = 0.0;
    for p in -3..=3 {
        for q in -3..=3 {
            let r = (x - center - lattice.point(p as f64, q as f64)).norm();
            if r < outer {
                bump += if r <= inner { h0(r) - h0(outer) } else { chi(r) * (h0(r) - h0(outer)) };
            }
        }
    }
    (h0(outer) + bump).exp()
}

#[test]
fn riemann_bump_matches_summation_oracle() {
    for lattice in [Lattice2D::square(), Lattice2D::eisenstein(), Lattice2D::from_tau(0.2, 1.4).unwrap()] {
        let f = from_analytic(&lattice, 32, 32, &AnalyticFamily::riemann_bump(4.0, [0.5, 0.5])).unwrap();
        let center = lattice.point(0.5, 0.5);
        let mut max_err: f64 = 0.0;
        for i in 0..32 {
            for j in 0..32 {
                let x = f.node(i, j);
                max_err = max_err.max((f.at(i as usize, j as usize) - riemann_bump_oracle(&lattice, 4.0, center, x)).abs());
            }
        }
        assert!(max_err < 1e-14, "max deviation {max_err}");
    }
    let f = square_field(32, &AnalyticFamily::riemann_bump(4.0, [0.5, 0.5]));
    assert_eq!(f.at(16, 16), 1.0);
    assert_eq!(f.max(), 1.0);
    // inside the inner disk the samples are exactly 1/(1 + r²)
    let r2 = (2.0f64 / 32.0).powi(2) + (3.0f64 / 32.0).powi(2);
    assert!((f.at(18, 19) - 1.0 / (1.0 + r2)).abs() < 1e-15);
}

#[test]
fn riemann_bump_domain_checks() {
    let l = Lattice2D::square();
    let bad = AnalyticFamily::RiemannBump { alpha: 4.0, center: [0.5, 0.5], inner: Some(0.3), outer: Some(0.6) };
    assert!(from_analytic(&l, 16, 16, &bad).is_err());
    let hyper = AnalyticFamily::RiemannBump { alpha: -20.0, center: [0.5, 0.5], inner: Some(0.2), outer: Some(0.45) };
    assert!(matches!(from_analytic(&l, 16, 16, &hyper), Err(Error::InvalidDomain(_))));
}

#[test]
fn gaussian_bump_periodization() {
    // Narrow bump: far from the centre only nearby translates matter and the
    // field is periodic in the Cartesian sense.
    let l = Lattice2D::from_tau(0.3, 1.2).unwrap();
    let fam = AnalyticFamily::GaussianBump { amplitude: 0.5, center: [0.25, 0.5], width: 0.3 };
    let f = from_analytic(&l, 16, 16, &fam).unwrap();
    let oracle = |x: Vec2| {
        let c = l.point(0.25, 0.5);
        let mut acc = 0.0;
        for p in -8..=8 {
            for q in -8..=8 {
                acc += (-(x - c - l.point(p as f64, q as f64)).norm_sq() / 0.09).exp();
            }
        }
        1.0 + 0.5 * acc
    };
    for i in 0..16 {
        for j in 0..16 {
            assert!((f.at(i as usize, j as usize) - oracle(f.node(i, j))).abs() < 1e-13);
        }
    }
}

#[test]
fn mean_examples() {
    let m = metric(square_field(32, &AnalyticFamily::constant(2.5)));
    assert_eq!(m.mean(), 2.5);
    let m = metric(square_field(32, &AnalyticFamily::trig(0.1, 1, 0)));
    assert!((m.mean() - 1.0).abs() < 1e-15);
}

/// Refined-grid oracle: the rectangle rule converges rapidly for smooth
/// periodic integrands, so the 4×-refined value is the reference.
#[test]
fn riemann_bump_mean_refined_oracle() {
    let fam = AnalyticFamily::riemann_bump(4.0, [0.5, 0.5]);
    let mean_at = |n| metric(square_field(n, &fam)).mean();
    let reference = mean_at(512);
    let e64 = (mean_at(64) - reference).abs();
    let e128 = (mean_at(128) - reference).abs();
    assert!(e128 < 1e-8, "128-grid mean off by {e128}");
    assert!(e128 <= e64);
    // the bump lowers the mean below the far-field constant
    let far = 1.0 / (1.0 + 0.45f64 * 0.45);
    assert!(reference > far && reference < 1.0);
}

#[test]
fn area_examples() {
    let m = metric(square_field(32, &AnalyticFamily::constant(3.0)));
    assert_eq!(m.area(), 9.0);
    let m = metric(square_field(64, &AnalyticFamily::trig(0.1, 1, 0)));
    assert!((m.area() - 1.005).abs() < 1e-14);
    let e = from_analytic(&Lattice2D::eisenstein(), 32, 32, &AnalyticFamily::constant(2.0)).unwrap();
    assert!((metric(e).area() - 4.0).abs() < 1e-14);
}

#[test]
fn variance_examples() {
    let m = metric(square_field(32, &AnalyticFamily::constant(0.1)));
    assert_eq!(m.variance().unwrap(), 0.0);
    let m = metric(square_field(64, &AnalyticFamily::trig(0.1, 1, 0)));
    assert!((m.variance().unwrap() - 0.005).abs() < 1e-15);
    let two = AnalyticFamily::Trig {
        modes: vec![TrigMode { amp: 0.1, k: 1, l: 0 }, TrigMode { amp: 0.2, k: 0, l: 1 }],
    };
    let m = metric(square_field(64, &two));
    assert!((m.variance().unwrap() - 0.025).abs() < 1e-15);
    let fine = metric(square_field(256, &two)).variance().unwrap();
    assert!((fine - 0.025).abs() < 1e-15);
}

#[test]
fn laplacian_of_constant_is_zero() {
    let f = ScalarField::from_fn(Lattice2D::from_tau(0.4, 1.1).unwrap(), 16, 24, |_, _| 3.7).unwrap();
    assert!(flat_laplacian(&f).values().iter().all(|&x| x.abs() < 1e-10));
}

fn max_abs_diff(a: &ScalarField, b: impl Fn(usize, usize) -> f64) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..a.nu() {
        for j in 0..a.nv() {
            m = m.max((a.at(i, j) - b(i, j)).abs());
        }
    }
    m
}

#[test]
fn laplacian_cosine_eigenfunction() {
    let err = |n: usize| {
        let f = ScalarField::from_fn(Lattice2D::square(), n, n, |u, _| (TAU * u).cos()).unwrap();
        let lap = flat_laplacian(&f);
        max_abs_diff(&lap, |i, _| -4.0 * PI * PI * (TAU * i as f64 / n as f64).cos())
    };
    let (e1, e2) = (err(64), err(128));
    assert!(e2 < 1e-2);
    let ratio = e1 / e2;
    assert!((3.9..4.1).contains(&ratio), "ratio {ratio}");
}

/// Chain-rule oracle on the sheared lattice {(1,0),(1/2,1)}:
/// u = x − y/2, so Δ cos(2πu) = −4π²|∇u|² cos(2πu) with |∇u|² = 5/4.
#[test]
fn laplacian_on_sheared_lattice() {
    let l = Lattice2D::from_arrays([1.0, 0.0], [0.5, 1.0]).unwrap();
    let err = |n: usize| {
        let f = ScalarField::from_fn(l, n, n, |u, _| (TAU * u).cos()).unwrap();
        let lap = flat_laplacian(&f);
        max_abs_diff(&lap, |i, j| {
            let x = f.node(i as i64, j as i64);
            let u = x.x - x.y / 2.0;
            -4.0 * PI * PI * 1.25 * (TAU * u).cos()
        })
    };
    let (e1, e2) = (err(64), err(128));
    assert!(e2 < 5e-2, "err {e2}");
    assert!((3.9..4.1).contains(&(e1 / e2)));

    // a field with genuine mixed dependence exercises the g^uv term
    let err = |n: usize| {
        let f = ScalarField::from_fn(l, n, n, |u, v| (TAU * (u + v)).sin()).unwrap();
        let lap = flat_laplacian(&f);
        // u + v = x + y/2, |∇(u+v)|² = 5/4
        max_abs_diff(&lap, |i, j| {
            let x = f.node(i as i64, j as i64);
            -4.0 * PI * PI * 1.25 * (TAU * (x.x + x.y / 2.0)).sin()
        })
    };
    assert!((3.9..4.1).contains(&(err(64) / err(128))));
}

#[test]
fn flat_metric_has_zero_curvature() {
    let m = metric(square_field(32, &AnalyticFamily::constant(1.7)));
    assert!(m.gaussian_curvature().values().iter().all(|&k| k == 0.0));
    assert!(m.gaussian_curvature_expanded().values().iter().all(|&k| k == 0.0));
}

#[test]
fn exp_cos_curvature_symbolic_oracle() {
    let fam = AnalyticFamily::ExpTrig { modes: vec![ExpTrigMode { k: 1, l: 0, a: 1.0, b: 0.0 }] };
    let err = |n: usize| {
        let m = metric(square_field(n, &fam));
        let k = m.gaussian_curvature();
        max_abs_diff(&k, |i, _| {
            let c = (TAU * i as f64 / n as f64).cos();
            4.0 * PI * PI * c * (-2.0 * c).exp()
        })
    };
    let (e1, e2) = (err(64), err(128));
    assert!(e2 < 0.5, "err {e2}");
    assert!((3.8..4.2).contains(&(e1 / e2)), "ratio {}", e1 / e2);
}

#[test]
fn riemann_bump_curvature_near_four() {
    let m = metric(square_field(128, &AnalyticFamily::riemann_bump(4.0, [0.5, 0.5])));
    let k = m.gaussian_curvature();
    let c = m.factor().node(64, 64);
    let mut worst: f64 = 0.0;
    for i in 0..128 {
        for j in 0..128 {
            if (m.factor().node(i, j) - c).norm() <= 0.2 {
                worst = worst.max((k.at(i as usize, j as usize) - 4.0).abs());
            }
        }
    }
    assert!(worst < 1e-2, "worst {worst}");
}

#[test]
fn curvature_paths_agree_to_second_order() {
    for (lattice, fam) in [
        (Lattice2D::square(), AnalyticFamily::trig(0.1, 1, 0)),
        (Lattice2D::eisenstein(), AnalyticFamily::trig(0.05, 1, 1)),
        (Lattice2D::from_tau(0.25, 1.5).unwrap(), AnalyticFamily::GaussianBump { amplitude: 0.3, center: [0.5, 0.5], width: 0.35 }),
    ] {
        let m = metric(from_analytic(&lattice, 128, 128, &fam).unwrap());
        let h = m.factor().spacing();
        let a = m.gaussian_curvature();
        let b = m.gaussian_curvature_expanded();
        let gap = max_abs_diff(&a, |i, j| b.at(i, j));
        assert!(gap <= 10.0 * h * h, "{}: gap {gap} > {}", fam.name(), 10.0 * h * h);
    }
}

#[test]
fn gauss_bonnet_total_curvature_vanishes() {
    for fam in [
        AnalyticFamily::trig(0.3, 2, 1),
        AnalyticFamily::riemann_bump(4.0, [0.3, 0.6]),
        AnalyticFamily::GaussianBump { amplitude: 1.0, center: [0.1, 0.2], width: 0.2 },
    ] {
        let m = metric(from_analytic(&Lattice2D::from_tau(0.1, 1.3).unwrap(), 64, 64, &fam).unwrap());
        assert!(m.total_curvature().abs() < 1e-6, "{}: {}", fam.name(), m.total_curvature());
    }
}

#[test]
fn bicubic_sampling_reproduces_nodes_and_smooth_fields() {
    let l = Lattice2D::from_tau(0.2, 1.1).unwrap();
    let f = ScalarField::from_fn(l, 64, 64, |u, v| (TAU * u).cos() + (TAU * v).sin()).unwrap();
    assert!((f.sample_at(f.node(5, 7)) - f.at(5, 7)).abs() < 1e-14);
    let p = l.point(0.123, 0.456);
    let exact = (TAU * 0.123f64).cos() + (TAU * 0.456f64).sin();
    assert!((f.sample_at(p) - exact).abs() < 1e-4);
    // periodic wrap-around
    let q = p + l.b1() - l.b2();
    assert!((f.sample_at(q) - f.sample_at(p)).abs() < 1e-12);
}

fn arb_exp_trig() -> impl Strategy<Value = AnalyticFamily> {
    prop::collection::vec((-2i64..=2, -2i64..=2, -0.4f64..0.4, -0.4f64..0.4), 1..5).prop_map(|ms| {
        AnalyticFamily::ExpTrig {
            modes: ms.into_iter().map(|(k, l, a, b)| ExpTrigMode { k, l, a, b }).collect(),
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn variance_formulas_agree(fam in arb_exp_trig(), re in -0.5f64..0.5, im in 0.9f64..2.0) {
        let l = Lattice2D::from_tau(re, im).unwrap();
        let m = metric(from_analytic(&l, 16, 16, &fam).unwrap());
        let mo = m.moments();
        prop_assert!((mo.variance_moment - mo.variance_centered).abs() <= VARIANCE_AGREEMENT * mo.second);
        prop_assert!(m.variance().unwrap() >= 0.0);
    }

    #[test]
    fn curvature_scaling_law(fam in arb_exp_trig(), c in 0.2f64..5.0) {
        let l = Lattice2D::from_tau(0.1, 1.2).unwrap();
        let m = metric(from_analytic(&l, 16, 16, &fam).unwrap());
        let k = m.gaussian_curvature();
        let kc = m.scaled(c).unwrap().gaussian_curvature();
        for (a, b) in k.values().iter().zip(kc.values()) {
            prop_assert!((a / (c * c) - b).abs() <= 1e-9 * (1.0 + a.abs()));
        }
    }
}
