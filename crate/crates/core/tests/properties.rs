mod common;

use common::*;
use jmarkov::algebra::{leq, spectral_decompose, triple_product};
use jmarkov::condexp::{conditional_expectation, ConditionalExpectation};
use jmarkov::dynamics::{classify, commutator_derivation, exponentiate, generator_from_kernel, polarized_defect, schrodinger_flow, Classification};
use jmarkov::maps::{check_schwarz, is_multiplicative, is_positive_unital, v_r_mu, Observable};
use jmarkov::markov::{check_chapman_kolmogorov, check_distribution_transfer, check_markov_property, check_stationarity, extract_kernels};
use jmarkov::states::trace_state;
use jmarkov::{processes, random, Config, Element, JordanAlgebra, Sampling, Tolerances, C64};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn stochastic<R: Rng>(r: &mut R, n: usize) -> DMatrix<f64> {
    let mut p = DMatrix::from_fn(n, n, |_, _| r.gen_range(0.05..1.0));
    for mut row in p.row_iter_mut() {
        let s = row.sum();
        row /= s;
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn jordan_identity_and_norm_laws(seed in any::<u64>(), n in 2usize..5, kind in 0usize..5) {
        let t = tol();
        let mut r = rng(seed);
        let a = random_subalgebra(&mut r, n, kind, &t);
        let x = a.random_element(&mut r);
        let y = a.random_element(&mut r);
        let x2 = x.square();
        let lhs = x.jordan(&y.jordan(&x2));
        let rhs = x.jordan(&y).jordan(&x2);
        prop_assert!(lhs.distance(&rhs) <= t.eq);
        prop_assert!((x2.operator_norm() - x.operator_norm().powi(2)).abs() <= t.eq);
        prop_assert!(x2.operator_norm() <= (&x2 + &y.square()).operator_norm() + t.eq);
        prop_assert!(a.contains(&x.jordan(&y), &t).unwrap());
    }

    #[test]
    fn triple_product_matches_matrix_form(seed in any::<u64>(), n in 1usize..5) {
        let mut r = rng(seed);
        let (x, y, z) = (random::hermitian(&mut r, n), random::hermitian(&mut r, n), random::hermitian(&mut r, n));
        let got = triple_product(&x, &y, &z).unwrap();
        let m = (x.matrix() * y.matrix() * z.matrix() + z.matrix() * y.matrix() * x.matrix()) * C64::new(0.5, 0.0);
        prop_assert!((got.matrix() - m).norm() <= 1e-9);
    }

    #[test]
    fn spectral_decomposition_invariants(seed in any::<u64>(), n in 1usize..6) {
        let t = tol();
        let mut r = rng(seed);
        // repeated eigenvalues on purpose
        let vals: Vec<f64> = (0..n).map(|_| r.gen_range(0..3) as f64).collect();
        let u = random::unitary(&mut r, n);
        let x = Element::diag(&vals).conjugate_by(&u);
        let spec = spectral_decompose(&x, t.group);
        prop_assert!(spec.reconstruct().distance(&x) <= t.eq);
        let total = spec.projections.iter().fold(Element::zero(n), |acc, p| &acc + p);
        prop_assert!(total.distance(&Element::identity(n)) <= t.eq);
        for (i, p) in spec.projections.iter().enumerate() {
            for (j, q) in spec.projections.iter().enumerate() {
                let expected = if i == j { p.clone() } else { Element::zero(n) };
                prop_assert!(p.jordan(q).distance(&expected) <= t.eq);
            }
        }
        let mut distinct = vals.clone();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        prop_assert_eq!(spec.eigenvalues.len(), distinct.len());
    }

    #[test]
    fn generated_subalgebra_is_idempotent(seed in any::<u64>(), n in 2usize..5, k in 1usize..3) {
        let t = tol();
        let mut r = rng(seed);
        let gens: Vec<Element> = (0..k).map(|_| random::real_symmetric(&mut r, n)).collect();
        let a = JordanAlgebra::generated_by(n, &gens, &t).unwrap();
        let b = JordanAlgebra::generated_by(n, a.basis(), &t).unwrap();
        prop_assert!(a.same_span(&b, &t));
        for g in &gens {
            prop_assert!(a.contains(g, &t).unwrap());
        }
    }

    #[test]
    fn event_order_is_absorption(seed in any::<u64>(), n in 2usize..5) {
        let t = tol();
        let mut r = rng(seed);
        let parts = random::partition(&mut r, &vec![1; n]);
        let mask_e: usize = r.gen_range(0..(1 << n));
        let mask_f: usize = if r.gen_bool(0.5) { mask_e | r.gen_range(0..(1 << n)) } else { r.gen_range(0..(1 << n)) };
        let e = herm(subset(&parts, mask_e), &t);
        let f = herm(subset(&parts, mask_f), &t);
        let below = leq(&e, &f, &t).unwrap();
        let absorbs = e.jordan(&f).distance(&e) <= t.eq;
        prop_assert_eq!(below, absorbs);
    }

    #[test]
    fn conditional_expectation_range_affine_and_unique(seed in any::<u64>(), n in 2usize..6) {
        let cfg = Config::default();
        let mut r = rng(seed);
        let k = r.gen_range(2..=n);
        let (parts, a0) = partition_algebra(&mut r, n, k, &cfg.tol);
        let mu = faithful(&mut r, n);
        let x1 = squash(&block_diagonal(&parts, &random::hermitian(&mut r, n)));
        let x2 = squash(&block_diagonal(&parts, &random::hermitian(&mut r, n)));
        let alpha: f64 = r.gen_range(0.0..=1.0);
        let y1 = conditional_expectation(&mu, &x1, &a0, &cfg).unwrap();
        let y2 = conditional_expectation(&mu, &x2, &a0, &cfg).unwrap();
        prop_assert!(y1.unique);
        prop_assert!(y1.value.in_unit_interval(&cfg.tol));
        let mix = &x1.scale(alpha) + &x2.scale(1.0 - alpha);
        let ym = conditional_expectation(&mu, &mix, &a0, &cfg).unwrap();
        let expected = &y1.value.scale(alpha) + &y2.value.scale(1.0 - alpha);
        prop_assert!(ym.value.distance(&expected) <= cfg.tol.eq);
        // uniqueness: plain least squares agrees with the sanitized path
        let op = ConditionalExpectation::new(&mu, &a0, &cfg).unwrap();
        prop_assert!(op.solve_linear(&x1).unwrap().distance(&y1.value) <= cfg.tol.eq);
    }

    #[test]
    fn incompatibility_means_no_expectation(seed in any::<u64>(), n in 2usize..5) {
        let cfg = Config::default();
        let mut r = rng(seed);
        let (parts, a0) = partition_algebra(&mut r, n, n, &cfg.tol);
        let mu = faithful(&mut r, n);
        let x = squash(&random::hermitian(&mut r, n));
        let report = jmarkov::condexp::is_compatible_subalgebra(&mu, &a0, &x, &cfg).unwrap();
        let ce = conditional_expectation(&mu, &x, &a0, &cfg);
        if report.verdict.is_fail() {
            let w = report.witness.unwrap();
            prop_assert!(w.gap() > cfg.tol.eq);
            prop_assert!(ce.is_err());
        } else {
            prop_assert!(ce.unwrap().residual <= cfg.tol.solve);
        }
        let _ = parts;
    }

    #[test]
    fn schwarz_for_kernels_and_conjugations(seed in any::<u64>(), n in 2usize..5) {
        let t = tol();
        let mut r = rng(seed);
        let full = JordanAlgebra::full(n);
        let u = random::unitary(&mut r, n);
        let conj = Observable::conjugation(&full, &u, &t).unwrap();
        // bijective, positive, positive inverse: multiplicative
        let inv = conj.map().inverse(&t).unwrap();
        prop_assert!(is_positive_unital(conj.map(), Sampling::new(16, seed), &t).holds());
        prop_assert!(is_positive_unital(&inv, Sampling::new(16, seed), &t).holds());
        prop_assert!(is_multiplicative(conj.map(), &t));
        let x = random::hermitian(&mut r, n);
        prop_assert!(check_schwarz(conj.map(), &x, &t).unwrap().min_eigenvalue.abs() <= 1e-9);
    }

    #[test]
    fn v_r_mu_is_unital_and_positive(seed in any::<u64>()) {
        let cfg = Config::default();
        let mut r = rng(seed);
        let p = stochastic(&mut r, 2);
        let chain = processes::homogeneous_chain(&random::distribution(&mut r, 2), &p, 1, &cfg.tol).unwrap();
        let r0 = chain.observable(0).unwrap();
        let mu = chain.state();
        let one = v_r_mu(r0, mu, &Element::identity(4), &cfg).unwrap();
        prop_assert!(one.distance(&Element::identity(2)) <= cfg.tol.eq);
        let d: Vec<f64> = (0..4).map(|_| r.gen_range(0.0..=1.0)).collect();
        let w = v_r_mu(r0, mu, &Element::diag(&d), &cfg).unwrap();
        prop_assert!(w.min_eigenvalue() >= -cfg.tol.psd);
    }

    #[test]
    fn classical_embedding_fidelity(seed in any::<u64>(), n in 2usize..4) {
        let cfg = Config::default();
        let mut r = rng(seed);
        let p = stochastic(&mut r, n);
        let init = random::distribution(&mut r, n);
        let chain = processes::homogeneous_chain(&init, &p, 2, &cfg.tol).unwrap();
        prop_assert!(check_markov_property(&chain, &cfg).unwrap().passes);
        let k = extract_kernels(&chain, &cfg).unwrap();
        prop_assert!((k.kernel(0, 1).unwrap().matrix() - &p).amax() <= 1e-9);
        prop_assert!(check_chapman_kolmogorov(&k, &cfg.tol).unwrap() <= cfg.tol.solve);
        prop_assert!(check_distribution_transfer(&chain, &k, &cfg.tol).unwrap() <= 1e-9);
        for (_, v) in k.iter() {
            prop_assert!(v.unit_deviation() <= cfg.tol.eq);
        }
    }

    #[test]
    fn generator_of_stationary_chain_is_dissipative(seed in any::<u64>()) {
        let cfg = Config::default();
        let mut r = rng(seed);
        // diagonally dominant so the principal logarithm exists
        let a: f64 = r.gen_range(0.6..0.95);
        let b: f64 = r.gen_range(0.6..0.95);
        let p = nalgebra::dmatrix![a, 1.0 - a; 1.0 - b, b];
        let chain = processes::homogeneous_chain(&[0.5, 0.5], &p, 2, &cfg.tol).unwrap();
        let k = extract_kernels(&chain, &cfg).unwrap();
        let st = check_stationarity(&chain, &k, &cfg.tol).unwrap();
        prop_assert!(st.stationary);
        let l = generator_from_kernel(&st.family[1].1, 1.0, &cfg.tol).unwrap();
        let c = classify(&l, Sampling::new(64, seed), &cfg.tol).unwrap();
        prop_assert!(c.classification != Classification::Neither);
        for tt in [1.0, 2.0, 4.0] {
            let v = exponentiate(&l, tt);
            let y = l.algebra().random_element(&mut r);
            prop_assert!(check_schwarz(&v, &y, &cfg.tol).unwrap().holds);
        }
    }

    #[test]
    fn schrodinger_flow_matches_exponentiated_derivation(seed in any::<u64>(), n in 2usize..4) {
        let t = tol();
        let mut r = rng(seed);
        let full = JordanAlgebra::full(n);
        let h = random::hermitian(&mut r, n);
        let x = random::hermitian(&mut r, n);
        let time: f64 = r.gen_range(-2.0..2.0);
        let l = commutator_derivation(&h, &full, &t).unwrap();
        let via_exp = exponentiate(&l, time).apply(&x, &t).unwrap();
        let via_flow = schrodinger_flow(&h, time, &x).unwrap();
        prop_assert!(via_exp.distance(&via_flow) <= t.solve);
        let y = full.random_element(&mut r);
        prop_assert!(polarized_defect(&l, &y, &y, &t).unwrap().norm() <= 10.0 * t.eq);
    }

    #[test]
    fn reversible_unitary_process_has_derivation_generator(seed in any::<u64>()) {
        let cfg = Config::default();
        let mut r = rng(seed);
        let h = random::hermitian(&mut r, 2).scale(0.5);
        let grid = jmarkov::TimeGrid::uniform(0.1, 3).unwrap();
        let p = processes::unitary_process(&h, grid, trace_state(2), &cfg.tol).unwrap();
        let k = extract_kernels(&p, &cfg).unwrap();
        let st = check_stationarity(&p, &k, &cfg.tol).unwrap();
        prop_assert!(st.stationary);
        let l = generator_from_kernel(&st.family[1].1, 0.1, &cfg.tol).unwrap();
        prop_assert_eq!(classify(&l, cfg.sampling, &cfg.tol).unwrap().classification, Classification::Derivation);
    }
}
