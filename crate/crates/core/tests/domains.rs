use mzl_core::domains::*;
use mzl_core::special::modular::klein_j;
use mzl_core::special::weierstrass::{wp_eval, wp_invariants};
use mzl_core::BivariatePolynomial;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn y_minus(v: Complex64) -> BivariatePolynomial {
    BivariatePolynomial::from_terms(&[(0, 1, c(1.0, 0.0)), (0, 0, -v)])
}

fn x_minus(z0: Complex64) -> BivariatePolynomial {
    BivariatePolynomial::from_terms(&[(1, 0, c(1.0, 0.0)), (0, 0, -z0)])
}

fn center(z: &ZeroReport) -> Complex64 {
    c(z.center[0].parse().unwrap(), z.center[1].parse().unwrap())
}

#[test]
fn j_is_real_on_the_arc_and_sides() {
    let contour = build_j_contour(&JDomainSpec { y: 2.5, inset: 0.0 }).unwrap();
    // the top line is the one piece where j is not real
    let pieces: Vec<_> = contour
        .segments()
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != 2)
        .map(|(_, s)| s)
        .collect();
    for z in pieces
        .iter()
        .flat_map(|s| (0..=50).map(move |k| s.point(k as f64 / 50.0)))
    {
        let v = klein_j(z).unwrap();
        assert!(v.im.abs() < 1e-8 * v.norm().max(1.0), "{z}: {v}");
    }
}

#[test]
fn wp_is_real_on_the_cell_sides() {
    let spec = WpDomainSpec::new(1.0);
    let p = wp_invariants(1.0).unwrap();
    let contour = build_wp_contour(&spec).unwrap();
    for seg in contour.segments() {
        if let mzl_core::contour::PathSegment::Line { .. } = seg {
            for k in 0..=20 {
                let z = seg.point(k as f64 / 20.0);
                let v = wp_eval(z, &p).unwrap();
                assert!(v.im.abs() < 1e-8 * v.norm().max(1.0), "{z}: {v}");
            }
        }
    }
}

#[test]
fn j_examples() {
    let opts = CountOptions::default();
    let spec = JDomainSpec::default();
    let r = count_zeros_j(&y_minus(c(0.0, 2000.0)), &spec, &opts).unwrap();
    assert_eq!((r.count, r.localized_total), (1, 1));
    let r = count_zeros_j(&y_minus(c(1728.0, 0.0)), &spec, &opts).unwrap();
    assert_eq!(r.count, 2);
    assert!(r
        .localized
        .iter()
        .all(|z| (center(z) - c(0.0, 1.0)).norm() < 1e-5));
    assert!(r.pass);
    let r = count_zeros_j(&x_minus(c(0.1, 1.5)), &spec, &opts).unwrap();
    assert_eq!(r.count, 1);
    assert!((center(&r.localized[0]) - c(0.1, 1.5)).norm() < 1e-7);
    assert!(r.top_line.unwrap().holds);
}

#[test]
fn wp_examples() {
    let opts = CountOptions::default();
    let spec = WpDomainSpec::new(1.0);
    let r = count_zeros_wp(&y_minus(c(3.0, 5.0)), &spec, &opts).unwrap();
    assert_eq!((r.count, r.localized_total), (2, 2));
    let e1 = wp_invariants(1.0).unwrap().half_period_values[0];
    let r = count_zeros_wp(&y_minus(c(e1, 0.0)), &spec, &opts).unwrap();
    assert_eq!((r.count, r.localized_total), (2, 2));
    assert!(r.boundary_zero);
    let r = count_zeros_wp(&x_minus(c(0.3, 0.6)), &spec, &opts).unwrap();
    assert_eq!(r.count, 1);
    assert_eq!(r.bound, "27");
    assert_eq!(r.proof_bound.as_deref(), Some("29"));
}

#[test]
fn wp_pole_orders_enter_the_count() {
    // X·Y² + Y − 1 has poles of order 3 at 0 and 4 at the other corners
    let p = BivariatePolynomial::from_terms(&[
        (1, 2, c(1.0, 0.0)),
        (0, 1, c(1.0, 0.0)),
        (0, 0, c(-1.0, 0.0)),
    ]);
    assert_eq!(pole_order(&p, c(0.0, 0.0)), 3);
    assert_eq!(pole_order(&p, c(1.0, 1.0)), 4);
    let r = count_zeros_wp(&p, &WpDomainSpec::new(1.0), &CountOptions::default()).unwrap();
    assert_eq!((r.count, r.localized_total), (4, 4));
}

#[test]
fn counts_are_stable_under_delta_and_y() {
    let opts = CountOptions::default();
    let p = BivariatePolynomial::from_terms(&[
        (0, 2, c(1.0, 0.2)),
        (1, 1, c(-0.7, 0.4)),
        (0, 0, c(0.9, -1.1)),
    ]);
    let a = count_zeros_wp(
        &p,
        &WpDomainSpec {
            delta: 0.04,
            ..WpDomainSpec::new(1.0)
        },
        &opts,
    )
    .unwrap();
    let b = count_zeros_wp(
        &p,
        &WpDomainSpec {
            delta: 0.02,
            ..WpDomainSpec::new(1.0)
        },
        &opts,
    )
    .unwrap();
    assert_eq!(a.count, b.count);
    let q = BivariatePolynomial::from_terms(&[
        (0, 1, c(1.0, 0.0)),
        (1, 0, c(300.0, 20.0)),
        (0, 0, c(-50.0, 7.0)),
    ]);
    let a = count_zeros_j(
        &q,
        &JDomainSpec {
            y: 2.0,
            ..Default::default()
        },
        &opts,
    )
    .unwrap();
    let y: f64 = a.parameters["Y"].parse().unwrap();
    let b = count_zeros_j(
        &q,
        &JDomainSpec {
            y: y + 1.0,
            ..Default::default()
        },
        &opts,
    )
    .unwrap();
    assert_eq!(a.count, b.count);
}

#[test]
fn real_line_counts() {
    let p = wp_invariants(1.0).unwrap();
    let e1 = p.half_period_values[0];
    // ℘ decreases on (0, ½] to e₁ and is symmetric about ½
    let above = line_im_zero_count(
        &y_minus(c(e1 + 5.0, 0.0)),
        1.0,
        Line::Horizontal,
        Component::Re,
    )
    .unwrap();
    let below = line_im_zero_count(
        &y_minus(c(e1 - 5.0, 0.0)),
        1.0,
        Line::Horizontal,
        Component::Re,
    )
    .unwrap();
    assert_eq!((above, below), (2, 0));
    let constant = BivariatePolynomial::from_terms(&[(0, 0, c(0.0, 1.0))]);
    assert_eq!(
        line_im_zero_count(&constant, 1.0, Line::Horizontal, Component::Im).unwrap(),
        0
    );
}

#[test]
fn random_real_polynomials_on_lines() {
    use mzl_core::poly::PerturbedComposite;
    use mzl_core::special::weierstrass::Weierstrass;
    use mzl_core::Analytic;
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut found = 0;
    for k in 0..10 {
        let d = 1 + k % 3;
        let p = random_wide_polynomial(&mut rng, d);
        let f = PerturbedComposite::unperturbed(p.clone(), Weierstrass::new(1.5).unwrap());
        // sign changes on a fine grid
        let brute = |dir: Complex64, len: f64, re: bool| {
            let vals: Vec<f64> = (0..=20000)
                .map(|i| {
                    let v = f
                        .eval(dir * (1e-4 + (len - 2e-4) * i as f64 / 20000.0))
                        .unwrap();
                    if re {
                        v.re
                    } else {
                        v.im
                    }
                })
                .collect();
            vals.windows(2).filter(|w| w[0] * w[1] < 0.0).count()
        };
        let h = line_im_zero_count(&p, 1.5, Line::Horizontal, Component::Re).unwrap();
        let v = line_im_zero_count(&p, 1.5, Line::Vertical, Component::Re).unwrap();
        assert_eq!(h, brute(c(1.0, 0.0), 1.0, true));
        assert_eq!(v, brute(c(0.0, 1.0), 1.5, true));
        assert!(num_bigint::BigUint::from(h.max(v)) <= proposition_bound(d as u64));
        found += h + v;
    }
    assert!(found > 0);
}

#[test]
fn quarter_circles_approach_a_quarter_of_the_order() {
    let p = BivariatePolynomial::from_terms(&[
        (0, 3, c(1.0, 0.5)),
        (2, 1, c(0.3, 0.0)),
        (0, 0, c(1.0, 0.0)),
    ]);
    let mut last = f64::INFINITY;
    for delta in [0.1, 0.01, 0.001] {
        let e = quarter_circle_estimate(&p, 1.0, c(1.0, 0.0), 0.0, delta).unwrap();
        assert!(e.normalized_bound >= e.normalized_direct);
        assert!(e.normalized_bound <= last);
        last = e.normalized_bound;
    }
    assert!(last <= 6.0 / 4.0 + 0.1);
}

#[test]
fn suite_report_is_deterministic() {
    let cfg = SuiteConfig {
        j_trials: 3,
        wp_trials: 3,
        seed: 42,
        ..Default::default()
    };
    let opts = CountOptions::default();
    let a = serde_json::to_string(&verify_bounds_report(&cfg, &opts).unwrap()).unwrap();
    let b = serde_json::to_string(&verify_bounds_report(&cfg, &opts).unwrap()).unwrap();
    assert_eq!(a, b);
    assert!(a.contains("\"schema\":\"mzl/1\""));
}
