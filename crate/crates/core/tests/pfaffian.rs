use mzl_core::pfaffian::{
    build_hypergeometric_chain, build_ratio_chain, chain_residual, khovanskii_zero_bound,
    ratio_function, real_zero_count, MultiPoly, PfaffianChain, PfaffianFunction, RealZeroOptions,
};
use mzl_core::special::modular::j_inverse;
use num_bigint::BigUint;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

#[test]
fn khovanskii_examples() {
    assert_eq!(khovanskii_zero_bound(1, 1, 1), BigUint::from(2u32));
    let d1 = khovanskii_zero_bound(9, 3, 4);
    assert_eq!(
        d1,
        (BigUint::from(1u32) << 36u32) * BigUint::from(4u32) * BigUint::from(7u32).pow(9)
    );
    assert!(d1 <= BigUint::from(1u32) << 64u32);
}

#[test]
fn hypergeometric_chain_sweep() {
    for &(a, b, c) in &[
        (1.0 / 6.0, 5.0 / 6.0, 1.0),
        (0.5, 0.5, 1.0),
        (0.25, 0.75, 1.5),
    ] {
        let chain = build_hypergeometric_chain(a, b, c).unwrap();
        let r = chain_residual(&chain, 100).unwrap();
        assert!(r.max_residual < 1e-7, "({a}, {b}, {c}): {r:?}");
    }
}

#[test]
fn ratio_chain_is_inverse_of_j() {
    let f = ratio_function().unwrap();
    for y in [0.2, 0.5, 0.8] {
        let direct = j_inverse(1728.0 / (1.0 - y * y)).unwrap().value;
        assert!((f.eval(y).unwrap() - direct).abs() < 1e-8, "y = {y}");
    }
    assert!(
        chain_residual(&build_ratio_chain().unwrap(), 100)
            .unwrap()
            .max_residual
            < 1e-7
    );
}

#[test]
fn corrupted_chains_fail() {
    let chain = build_ratio_chain().unwrap();
    for i in 0..chain.order() {
        let bad = chain.corrupted(i, 0.5);
        assert!(
            chain_residual(&bad, 40).unwrap().max_residual > 1e-3,
            "member {i}"
        );
    }
}

/// `exp` and `exp(exp)`-style chain: f₁ = eˣ, f₂ = e^{eˣ}.
fn double_exponential() -> PfaffianChain {
    PfaffianChain::new(
        "exp-exp",
        (-1.0, 1.0),
        vec![
            MultiPoly::new(3).term(1.0, &[(1, 1)]),
            MultiPoly::new(3).term(1.0, &[(1, 1), (2, 1)]),
        ],
        vec![
            Arc::new(|x: f64| Ok(x.exp())),
            Arc::new(|x: f64| Ok(x.exp().exp())),
        ],
    )
    .unwrap()
}

#[test]
fn random_outer_polynomials_respect_bound() {
    let chain = double_exponential();
    assert!(chain_residual(&chain, 50).unwrap().max_residual < 1e-7);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..30 {
        let mut outer = MultiPoly::new(3);
        for _ in 0..4 {
            let powers = [
                (0, rng.gen_range(0..3)),
                (1, rng.gen_range(0..2)),
                (2, rng.gen_range(0..2)),
            ];
            outer = outer.term(rng.gen_range(-1.0..1.0), &powers);
        }
        let pf = PfaffianFunction {
            chain: chain.clone(),
            outer,
        };
        let bound = pf.khovanskii_bound();
        let Ok(count) = real_zero_count(|x| pf.eval(x), (-1.0, 1.0), &RealZeroOptions::default())
        else {
            continue;
        };
        assert!(BigUint::from(count.count) <= bound);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn polynomial_root_counts(roots in prop::collection::vec(-0.95f64..0.95, 1..6)) {
        let mut sorted = roots.clone();
        sorted.sort_by(f64::total_cmp);
        prop_assume!(sorted.windows(2).all(|w| w[1] - w[0] > 1e-3));
        let f = |x: f64| Ok(roots.iter().map(|r| x - r).product::<f64>());
        let r = real_zero_count(f, (-1.0, 1.0), &RealZeroOptions::default()).unwrap();
        prop_assert_eq!(r.count, roots.len());
    }
}
