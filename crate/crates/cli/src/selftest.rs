//! Identity and invariant checks behind `mzl selftest`.

use mzl_core::config::RunConfig;
use mzl_core::domains::{dec, ledger_khovanskii, ledger_total, SCHEMA};
use mzl_core::pfaffian::{
    build_hypergeometric_chain, build_ratio_chain, chain_residual, ratio_function,
};
use mzl_core::special::hyp::gauss_relation_residuals;
use mzl_core::special::modular::{j_inverse, klein_j, ramanujan_inversion_residual, rho};
use mzl_core::special::weierstrass::{wp_invariants, wp_ode_residual};
use mzl_core::Result;
use num_complex::Complex64;
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub value: String,
    pub tolerance: String,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct SelftestReport {
    pub schema: &'static str,
    pub checks: Vec<Check>,
    pub pass: bool,
}

fn below(name: &'static str, value: f64, tolerance: f64) -> Check {
    Check {
        name,
        value: dec(value),
        tolerance: dec(tolerance),
        pass: value < tolerance,
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn run(cfg: &RunConfig) -> Result<SelftestReport> {
    let mut checks = Vec::new();

    let mut gauss: f64 = 0.0;
    for k in 0..100 {
        let z = 0.01 + 0.94 * k as f64 / 99.0;
        let (r1, r2) = gauss_relation_residuals(1.0 / 6.0, 5.0 / 6.0, 1.0, z)?;
        gauss = gauss.max(r1).max(r2);
    }
    checks.push(below("gauss contiguous relations", gauss, 1e-9));

    let lattice = wp_invariants(1.0)?;
    let mut ode: f64 = 0.0;
    for i in 0..40 {
        for k in 0..25 {
            let z = c(0.013 + i as f64 / 40.0, 0.017 + k as f64 / 25.0);
            ode = ode.max(wp_ode_residual(z, &lattice)?);
        }
    }
    checks.push(below("wp differential equation", ode, 1e-8));

    let mut ramanujan: f64 = 0.0;
    for k in 1..=20 {
        ramanujan = ramanujan.max(ramanujan_inversion_residual(k as f64 / 21.0)?);
    }
    checks.push(below("ramanujan inversion", ramanujan, 1e-8));

    checks.push(below(
        "j(i) - 1728",
        (klein_j(c(0.0, 1.0))? - 1728.0).norm(),
        1e-6,
    ));
    checks.push(below(
        "j(2i) - 287496",
        (klein_j(c(0.0, 2.0))? - 287496.0).norm(),
        1e-3,
    ));
    checks.push(below("j(rho)", klein_j(rho())?.norm(), 1e-6));
    checks.push(below(
        "j_inverse(1728) - 1",
        (j_inverse(1728.0)?.value - 1.0).abs(),
        f64::MIN_POSITIVE,
    ));
    let mut trip: f64 = 0.0;
    for x in [2000.0, 1e4, 1e5] {
        trip = trip.max((klein_j(c(0.0, j_inverse(x)?.value))? - x).norm() / x);
    }
    checks.push(below("j_inverse round trip", trip, 1e-7));

    let hyp = build_hypergeometric_chain(1.0 / 6.0, 5.0 / 6.0, 1.0)?;
    checks.push(below(
        "hypergeometric chain",
        chain_residual(&hyp, 100)?.max_residual,
        cfg.residual_tol,
    ));
    checks.push(below(
        "ratio chain",
        chain_residual(&build_ratio_chain()?, 100)?.max_residual,
        cfg.residual_tol,
    ));
    let f = ratio_function()?;
    let mut agree: f64 = 0.0;
    for y in [0.2, 0.5, 0.8] {
        agree = agree.max((f.eval(y)? - j_inverse(1728.0 / (1.0 - y * y))?.value).abs());
    }
    checks.push(below("ratio chain vs j_inverse", agree, 1e-8));
    let corrupted = chain_residual(&hyp.corrupted(3, 0.5), 50)?.max_residual;
    checks.push(Check {
        name: "corrupted chain rejected",
        value: dec(corrupted),
        tolerance: dec(cfg.residual_tol),
        pass: corrupted > cfg.residual_tol,
    });

    let ledger = (1..=100).all(|d| ledger_khovanskii(d) && ledger_total(d));
    checks.push(Check {
        name: "bound ledger d = 1..100",
        value: ledger.to_string(),
        tolerance: "true".into(),
        pass: ledger,
    });

    let pass = checks.iter().all(|c| c.pass);
    Ok(SelftestReport {
        schema: SCHEMA,
        checks,
        pass,
    })
}
