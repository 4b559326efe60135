//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::f64::consts::TAU;
use std::time::{Duration, Instant};

use mzl_core::analytic::FnPair;
use mzl_core::contour::{crossing_bound_check, dominant_term_bound, Contour};
use mzl_core::domains::*;
use mzl_core::pfaffian::{
    build_hypergeometric_chain, build_ratio_chain, chain_residual, khovanskii_zero_bound,
    ratio_function,
};
use mzl_core::special::hyp::gauss_relation_residuals;
use mzl_core::special::modular::{j_inverse, klein_j, ramanujan_inversion_residual, rho};
use mzl_core::special::weierstrass::{wp_invariants, wp_ode_residual};
use mzl_core::{BivariatePolynomial, Result};
use num_bigint::BigUint;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        pass,
        detail: detail.into(),
    })
}

fn identity_suite() -> Result<Outcome> {
    let start = Instant::now();
    let mut gauss: f64 = 0.0;
    for k in 0..100 {
        let z = 0.01 + 0.94 * k as f64 / 99.0;
        let (r1, r2) =
            gauss_relation_residuals(1.0 / 6.0, 5.0 / 6.0, 1.0 + 0.5 * (k % 3) as f64, z)?;
        gauss = gauss.max(r1).max(r2);
    }
    let lattice = wp_invariants(1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut ode: f64 = 0.0;
    let mut points = 0;
    while points < 1000 {
        let z = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if (z - lattice.nearest_lattice_point(z)).norm() < 1e-3 {
            continue;
        }
        ode = ode.max(wp_ode_residual(z, &lattice)?);
        points += 1;
    }
    let mut ramanujan: f64 = 0.0;
    for k in 1..=20 {
        ramanujan = ramanujan.max(ramanujan_inversion_residual(k as f64 / 21.0)?);
    }
    let elapsed = start.elapsed();
    outcome(
        gauss < 1e-9 && ode < 1e-8 && ramanujan < 1e-8 && elapsed < Duration::from_secs(30),
        format!("gauss {gauss:.2e}, ode {ode:.2e}, ramanujan {ramanujan:.2e}, {elapsed:.2?}"),
    )
}

fn special_values() -> Result<Outcome> {
    let ji = (klein_j(c(0.0, 1.0))? - 1728.0).norm();
    let j2i = (klein_j(c(0.0, 2.0))? - 287496.0).norm();
    let jrho = klein_j(rho())?.norm();
    let inv = j_inverse(1728.0)?.value;
    let mut trip: f64 = 0.0;
    for x in [2000.0, 1e4, 1e5] {
        let t = j_inverse(x)?.value;
        trip = trip.max((klein_j(c(0.0, t))? - x).norm() / x);
    }
    outcome(
        ji < 1e-6 && j2i < 1e-3 && jrho < 1e-6 && inv == 1.0 && trip < 1e-7,
        format!("|j(i)-1728| {ji:.1e}, |j(2i)-287496| {j2i:.1e}, |j(rho)| {jrho:.1e}, J^-1(1728) {inv}, round trip {trip:.1e}"),
    )
}

fn chain_suite() -> Result<Outcome> {
    let hyp = build_hypergeometric_chain(1.0 / 6.0, 5.0 / 6.0, 1.0)?;
    let ratio = build_ratio_chain()?;
    let rh = chain_residual(&hyp, 200)?.max_residual;
    let rr = chain_residual(&ratio, 200)?.max_residual;
    let f = ratio_function()?;
    let mut agree: f64 = 0.0;
    for y in [0.2, 0.5, 0.8] {
        agree = agree.max((f.eval(y)? - j_inverse(1728.0 / (1.0 - y * y))?.value).abs());
    }
    let corrupted = chain_residual(&hyp.corrupted(3, 0.5), 50)?.max_residual;
    outcome(
        rh < 1e-7 && rr < 1e-7 && agree < 1e-8 && corrupted > 1e-7,
        format!(
            "six-member {rh:.1e}, ratio {rr:.1e}, vs J^-1 {agree:.1e}, corrupted {corrupted:.1e}"
        ),
    )
}

fn bound_arithmetic() -> Result<Outcome> {
    let khov = (1..=100).all(ledger_khovanskii);
    let total = (1..=100).all(ledger_total);
    let d1 = khovanskii_zero_bound(9, 3, 4) <= BigUint::from(1u32) << 64u32;
    let t2 = wp_count_bound(2) == BigUint::from(65u32);
    let prop = proposition_bound(3) == BigUint::from(55u32);
    outcome(
        khov && total && d1 && t2 && prop,
        format!("khovanskii ledger {khov}, total ledger {total}, t2(2)=65 {t2}, prop(3)=55 {prop}"),
    )
}

fn generic_values(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| {
            Complex64::from_polar(
                10f64.powf(rng.gen_range(0.0..4.0)),
                rng.gen_range(0.3..TAU - 0.3),
            )
        })
        .collect()
}

fn y_minus(v: Complex64) -> BivariatePolynomial {
    BivariatePolynomial::from_terms(&[(0, 1, c(1.0, 0.0)), (0, 0, -v)])
}

fn zero_count_suite() -> Result<Outcome> {
    let start = Instant::now();
    let opts = CountOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut ok_j = 0;
    for v in generic_values(&mut rng, 10) {
        let r = count_zeros_j(&y_minus(v), &JDomainSpec::default(), &opts)?;
        ok_j += (r.count == 1 && r.cross_validated) as usize;
    }
    let r = count_zeros_j(&y_minus(c(1728.0, 0.0)), &JDomainSpec::default(), &opts)?;
    let at_i = r.count == 2
        && r.cross_validated
        && r.localized.iter().all(|z| {
            let p = c(z.center[0].parse().unwrap(), z.center[1].parse().unwrap());
            (p - c(0.0, 1.0)).norm() < 1e-5
        });
    let mut ok_wp = 0;
    for v in generic_values(&mut rng, 10) {
        let r = count_zeros_wp(&y_minus(v), &WpDomainSpec::new(1.0), &opts)?;
        ok_wp += (r.count == 2 && r.cross_validated) as usize;
    }
    let cfg = SuiteConfig {
        j_trials: 50,
        wp_trials: 50,
        j_max_degree: 2,
        wp_max_degree: 3,
        ..SuiteConfig::default()
    };
    let report = verify_bounds_report(&cfg, &opts)?;
    let elapsed = start.elapsed();
    outcome(
        ok_j == 10 && at_i && ok_wp == 10 && report.pass && elapsed < Duration::from_secs(300),
        format!(
            "j: {ok_j}/10 single, double at i {at_i}; wp: {ok_wp}/10 double; random trials {} failing; {elapsed:.2?}",
            report.failures.len()
        ),
    )
}

fn random_poly_fn(
    rng: &mut ChaCha8Rng,
    degree: usize,
    scale: f64,
) -> (impl mzl_core::Analytic, Vec<Complex64>) {
    let coeffs: Vec<Complex64> = (0..=degree)
        .map(|_| Complex64::from_polar(scale * rng.gen_range(0.5..1.5), rng.gen_range(0.0..TAU)))
        .collect();
    let (a, b) = (coeffs.clone(), coeffs.clone());
    let f = FnPair::new(
        move |z: Complex64| a.iter().rev().fold(c(0.0, 0.0), |s, &k| s * z + k),
        move |z: Complex64| {
            b.iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(c(0.0, 0.0), |s, (k, &v)| s * z + v * k as f64)
        },
    );
    (f, coeffs)
}

fn phase_suite() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut top = 0;
    for _ in 0..50 {
        let contour = Contour::circle(
            c(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3)),
            rng.gen_range(0.5..1.5),
        )?;
        let k = rng.gen_range(0..4);
        let z0 = c(rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2));
        let f = FnPair::new(
            move |z: Complex64| (z - z0).powi(k) * (2.0 * z).exp(),
            move |z: Complex64| {
                (k as f64 * (z - z0).powi(k - 1) + 2.0 * (z - z0).powi(k)) * (2.0 * z).exp()
            },
        );
        let pts = contour.sample_points(512);
        let fmin = pts
            .iter()
            .map(|&z| ((z - z0).powi(k) * (2.0 * z).exp()).norm())
            .fold(f64::INFINITY, f64::min);
        let (g, coeffs) = random_poly_fn(&mut rng, 3, 1.0);
        let gmax = pts
            .iter()
            .map(|&z| {
                coeffs
                    .iter()
                    .rev()
                    .fold(c(0.0, 0.0), |s, &a| s * z + a)
                    .norm()
            })
            .fold(0.0, f64::max);
        let eta = rng.gen_range(0.05..0.45) * fmin / gmax;
        let g = mzl_core::analytic::Sum(
            FnPair::new(|_| c(0.0, 0.0), |_| c(0.0, 0.0)),
            Scaled(g, eta),
        );
        let b = dominant_term_bound(&f, &g, &contour, 2.0)?;
        top += b.holds as usize;
    }
    let mut line_phase = 0;
    for _ in 0..50 {
        let h = c(rng.gen_range(0.6..1.6), rng.gen_range(0.6..1.6));
        let contour = if rng.gen_bool(0.5) {
            Contour::rectangle(-h, h)?
        } else {
            Contour::circle(c(0.0, 0.0), h.re)?
        };
        let d = rng.gen_range(1..6);
        let (f, _) = random_poly_fn(&mut rng, d, 1.0);
        line_phase += crossing_bound_check(&f, &contour)?.lemma2_holds as usize;
    }
    let mut quarter = true;
    let mut worst_excess = f64::NEG_INFINITY;
    for _ in 0..10 {
        let d = rng.gen_range(1..4);
        let p = random_polynomial(&mut rng, d, false);
        for w in [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0), c(0.0, 1.0)] {
            let e = quarter_circle_estimate(&p, 1.0, w, 0.0, 1e-3)?;
            let excess = e.normalized_bound - e.limit;
            worst_excess = worst_excess.max(excess);
            quarter &=
                e.normalized_bound <= d as f64 / 2.0 + 0.1 && e.normalized_bound <= e.limit + 0.1;
        }
    }
    outcome(
        top == 50 && line_phase == 50 && quarter,
        format!("top-line dominance {top}/50, line phase {line_phase}/50, quarter circles within |k|/4 + {worst_excess:.1e}"),
    )
}

/// `η·g`.
struct Scaled<G>(G, f64);

impl<G: mzl_core::Analytic> mzl_core::Analytic for Scaled<G> {
    fn eval(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.0.eval(z)? * self.1)
    }
    fn deriv(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.0.deriv(z)? * self.1)
    }
}

fn proposition_suite() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = (0usize, 0u64);
    let mut ok = 0;
    let mut total = 0;
    for k in 0..50 {
        let d = rng.gen_range(1..=3);
        let tau = if k % 2 == 0 { 1.0 } else { 1.5 };
        let p = random_wide_polynomial(&mut rng, d);
        let bound = proposition_bound(d as u64);
        // Im P vanishes identically on the real segment when P is real
        let mut counts = Vec::new();
        for (line, component) in [
            (Line::Horizontal, Component::Re),
            (Line::Vertical, Component::Im),
            (Line::Vertical, Component::Re),
        ] {
            counts.push(line_im_zero_count(&p, tau, line, component)?);
        }
        total += counts.iter().sum::<usize>();
        let max = *counts.iter().max().unwrap();
        if max > worst.0 {
            worst = (max, d as u64);
        }
        ok += (BigUint::from(max) <= bound) as usize;
    }
    outcome(
        ok == 50,
        format!(
            "{ok}/50 within 4d^2+6d+1; {total} zeros in all, largest count {} at d = {}",
            worst.0, worst.1
        ),
    )
}

fn robustness() -> Result<Outcome> {
    let opts = CountOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut delta_ok = 0;
    for _ in 0..5 {
        let d = rng.gen_range(1..=3);
        let p = random_polynomial(&mut rng, d, false);
        let a = count_zeros_wp(
            &p,
            &WpDomainSpec {
                delta: 0.04,
                ..WpDomainSpec::new(1.0)
            },
            &opts,
        )?;
        let b = count_zeros_wp(
            &p,
            &WpDomainSpec {
                delta: 0.02,
                ..WpDomainSpec::new(1.0)
            },
            &opts,
        )?;
        delta_ok += (a.count == b.count) as usize;
    }
    let mut y_ok = 0;
    for _ in 0..5 {
        let d = rng.gen_range(1..=2);
        let p = random_polynomial(&mut rng, d, false);
        let a = count_zeros_j(&p, &JDomainSpec::default(), &opts)?;
        let y: f64 = a.parameters["Y"].parse().unwrap();
        let b = count_zeros_j(
            &p,
            &JDomainSpec {
                y: y + 1.0,
                ..Default::default()
            },
            &opts,
        )?;
        y_ok += (a.count == b.count) as usize;
    }
    let cfg = SuiteConfig {
        j_trials: 4,
        wp_trials: 4,
        seed: 99,
        ..SuiteConfig::default()
    };
    let first = serde_json::to_string(&verify_bounds_report(&cfg, &opts)?).unwrap();
    let second = serde_json::to_string(&verify_bounds_report(&cfg, &opts)?).unwrap();
    let deterministic = first == second;
    outcome(
        delta_ok == 5 && y_ok == 5 && deterministic,
        format!("delta halving {delta_ok}/5, Y+1 {y_ok}/5, identical reports {deterministic}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Result<Outcome>); 8] = [
        ("identity suite", identity_suite),
        ("special values", special_values),
        ("chain suite", chain_suite),
        ("bound arithmetic", bound_arithmetic),
        ("zero counts", zero_count_suite),
        ("phase suite", phase_suite),
        ("proposition suite", proposition_suite),
        ("robustness", robustness),
    ];
    let mut failed = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += !pass as usize;
        println!(
            "criterion {} {name}: {} ({detail})",
            n + 1,
            if pass { "PASS" } else { "FAIL" }
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
