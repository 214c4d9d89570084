//! Randomized invariants, run with a fixed proptest seed.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use proptest::prelude::*;
use proptest::test_runner::{Config as ProptestConfig, RngSeed};

use slocc_lab::avgfree::{construct_avgfree, family_base, family_size, verify_avgfree};
use slocc_lab::cwprotocol::{hash_tuple, BalancedTuple, HashParams};
use slocc_lab::degeneration::{
    border_rank_bounds, dicke_from_ghz, dicke_lambda_from_ghz, ghz_level, verify_degeneration, w_from_ghz,
};
use slocc_lab::format::{tensor_from_json, tensor_to_json};
use slocc_lab::scalars::cyclotomic_polynomial;
use slocc_lab::slocc::{check_restriction, complement, cut_classes, is_globally_entangled, reduce_party, schmidt_profile};
use slocc_lab::states::{make_dicke, make_dicke_lambda, make_ghz, make_w, Partition};
use slocc_lab::support::{
    binary_entropy, entropy_htheta, functionals_fixed_basis, max_entropy_over_support, maximal_points,
    SupportDistribution, Theta, DEFAULT_TOL,
};
use slocc_lab::{
    Cyclotomic, CyclotomicField, Field, LocalMapSet, Matrix, Rational, Ring, SparseTensor, TensorShape,
};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, rng_seed: RngSeed::Fixed(0x51_0cc1ab), failure_persistence: None, ..ProptestConfig::default() }
}

fn rational() -> impl Strategy<Value = Rational> {
    (-12i64..=12, 1i64..=7).prop_map(|(n, d)| Rational::new(n, d).unwrap())
}

fn nonzero_rational() -> impl Strategy<Value = Rational> {
    rational().prop_filter("nonzero", |r| !Ring::is_zero(r))
}

fn cyclotomic(order: u32) -> impl Strategy<Value = Cyclotomic> {
    let field = CyclotomicField::new(order).unwrap();
    prop::collection::vec(rational(), field.degree()).prop_map(move |c| field.from_coeffs(c))
}

/// Small tensor with 2 or 3 parties, local dimension 1..=3 and entries in −2..=2.
fn small_tensor(max_parties: usize) -> impl Strategy<Value = SparseTensor<Rational>> {
    prop::collection::vec(1usize..=3, 2..=max_parties).prop_flat_map(|dims| {
        let volume: usize = dims.iter().product();
        prop::collection::vec(-2i64..=2, volume).prop_map(move |vals| {
            let shape = TensorShape::new(dims.clone()).unwrap();
            let entries = vals.iter().enumerate().filter(|(_, &v)| v != 0).map(|(flat, &v)| {
                let mut idx = vec![0; dims.len()];
                let mut rest = flat;
                for (s, &d) in dims.iter().enumerate().rev() {
                    idx[s] = rest % d;
                    rest /= d;
                }
                (idx, Rational::from(v))
            });
            SparseTensor::from_entries(shape, (), entries).unwrap()
        })
    })
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix<Rational>> {
    prop::collection::vec(prop::collection::vec(-3i64..=3, cols), rows)
        .prop_map(|r| Matrix::from_rows((), r.into_iter().map(|row| row.into_iter().map(Rational::from).collect()).collect()).unwrap())
}

/// L·U with unit lower L and upper U with nonzero diagonal: always invertible.
fn invertible(n: usize) -> impl Strategy<Value = Matrix<Rational>> {
    (matrix(n, n), matrix(n, n), prop::collection::vec(nonzero_rational(), n)).prop_map(move |(a, b, diag)| {
        let mut l = Matrix::identity(n, ());
        let mut u = Matrix::zeros(n, n, ());
        for i in 0..n {
            for j in 0..n {
                if j < i {
                    l.set(i, j, a.get(i, j).clone());
                } else if j > i {
                    u.set(i, j, b.get(i, j).clone());
                }
            }
            u.set(i, i, diag[i].clone());
        }
        l.matmul(&u).unwrap()
    })
}

fn maps_for(dims: &[usize], out: usize) -> impl Strategy<Value = LocalMapSet<Rational>> {
    dims.iter().map(|&d| matrix(out, d)).collect::<Vec<_>>().prop_map(|m| LocalMapSet::new(m).unwrap())
}

// scalars

proptest! {
    #![proptest_config(config(96))]

    #[test]
    fn cyclotomic_field_axioms(
        (a, b, c) in prop::sample::select(vec![3u32, 5, 8, 12]).prop_flat_map(|n| (cyclotomic(n), cyclotomic(n), cyclotomic(n)))
    ) {
        prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert!(a.sub(&a).is_zero());
        if !b.is_zero() {
            prop_assert!(b.mul(&b.inv().unwrap()).is_one());
            prop_assert_eq!(a.mul(&b).div(&b).unwrap(), a.clone());
        }
    }

    #[test]
    fn rational_sum_matches_bigint_fractions(a in -1000i64..1000, b in 1i64..1000, c in -1000i64..1000, d in 1i64..1000) {
        let sum = Rational::new(a, b).unwrap() + Rational::new(c, d).unwrap();
        let (num, den) = (BigInt::from(a * d + c * b), BigInt::from(b * d));
        let g = num.gcd(&den);
        prop_assert_eq!(sum.numer(), &(num / &g));
        prop_assert_eq!(sum.denom(), &(den / &g));
        prop_assert!(sum.denom() > &BigInt::from(0));
    }
}

#[test]
fn cyclotomic_polynomials_multiply_to_x_n_minus_one() {
    fn mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
        let mut out = vec![BigInt::from(0); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    }
    for n in 1..50u32 {
        let prod = (1..=n)
            .filter(|d| n % d == 0)
            .fold(vec![BigInt::from(1)], |acc, d| mul(&acc, &cyclotomic_polynomial(d).unwrap()));
        let mut expect = vec![BigInt::from(0); n as usize + 1];
        expect[0] = BigInt::from(-1);
        expect[n as usize] = BigInt::from(1);
        assert_eq!(prod, expect, "N = {n}");
    }
}

// tensors

fn shared_cut(k: usize, mask: u8) -> Vec<usize> {
    (0..k).filter(|s| mask >> s & 1 == 1).collect()
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn product_support_is_cartesian(
        (f, g) in (2usize..=3).prop_flat_map(|k| (small_tensor(k).prop_filter("k parties", move |t| t.parties() == k), small_tensor(k).prop_filter("k parties", move |t| t.parties() == k)))
    ) {
        let fg = f.tensor_product(&g).unwrap();
        let gdims = g.dims().to_vec();
        let mut expected = BTreeSet::new();
        for x in f.support() {
            for y in g.support() {
                expected.insert(x.iter().zip(&y).enumerate().map(|(s, (a, b))| a * gdims[s] + b).collect::<Vec<_>>());
            }
        }
        let got: BTreeSet<Vec<usize>> = fg.support().into_iter().collect();
        prop_assert_eq!(got, expected);
    }

    #[test]
    fn flattening_rank_is_multiplicative(
        (f, g, mask) in (2usize..=3).prop_flat_map(|k| (
            small_tensor(k).prop_filter("k parties", move |t| t.parties() == k),
            small_tensor(k).prop_filter("k parties", move |t| t.parties() == k),
            1u8..(1 << k) - 1,
        ))
    ) {
        let cut = shared_cut(f.parties(), mask);
        let fg = f.tensor_product(&g).unwrap();
        prop_assert_eq!(
            fg.flattening_rank(&cut).unwrap(),
            f.flattening_rank(&cut).unwrap() * g.flattening_rank(&cut).unwrap()
        );
    }

    #[test]
    fn rank_invariant_under_invertible_maps(
        (t, maps, mask) in small_tensor(3).prop_flat_map(|t| {
            let dims = t.dims().to_vec();
            let k = dims.len();
            let maps = dims.iter().map(|&d| invertible(d)).collect::<Vec<_>>();
            (Just(t), maps, 1u8..(1 << k) - 1)
        })
    ) {
        let maps = LocalMapSet::new(maps).unwrap();
        let image = t.apply_local_maps(&maps).unwrap();
        let cut = shared_cut(t.parties(), mask);
        prop_assert_eq!(image.flattening_rank(&cut).unwrap(), t.flattening_rank(&cut).unwrap());
    }

    #[test]
    fn local_maps_compose(
        (t, first, second) in small_tensor(3).prop_flat_map(|t| {
            let dims = t.dims().to_vec();
            (Just(t), maps_for(&dims, 2), maps_for(&vec![2; dims.len()], 3))
        })
    ) {
        let composed = t.apply_local_maps(&second.after(&first).unwrap()).unwrap();
        let stepwise = t.apply_local_maps(&first).unwrap().apply_local_maps(&second).unwrap();
        prop_assert_eq!(composed, stepwise);
    }

    #[test]
    fn tensor_files_round_trip(t in small_tensor(3)) {
        prop_assert_eq!(tensor_from_json::<Rational>(&tensor_to_json(&t)).unwrap(), t.clone());
        let field = CyclotomicField::new(5).unwrap();
        let c = t.map_scalars(field.clone(), |r| field.constant(r.clone()).mul(&field.zeta_pow(2)));
        prop_assert_eq!(tensor_from_json::<Cyclotomic>(&tensor_to_json(&c)).unwrap(), c);
    }
}

// states

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

#[test]
fn constructor_support_sizes() {
    for k in 2..=6 {
        for a in 1..=4 {
            assert_eq!(make_ghz(a, k).unwrap().support_size(), a);
        }
        assert_eq!(make_w(k).unwrap().support_size(), k);
    }
    for m in 0..=4 {
        for n in 0..=4 {
            if m + n >= 2 {
                assert_eq!(make_dicke(m, n).unwrap().support_size(), factorial(m + n) / (factorial(m) * factorial(n)));
            }
        }
    }
    for parts in [vec![1, 1], vec![2, 1], vec![2, 2], vec![3, 1, 1]] {
        let lam = Partition::new(parts.clone()).unwrap();
        for k in lam.weight()..=lam.weight() + 2 {
            let expected = factorial(k) / (parts.iter().map(|&p| factorial(p)).product::<usize>() * factorial(k - lam.weight()));
            assert_eq!(make_dicke_lambda(&lam, k).unwrap().support_size(), expected, "{parts:?}, k={k}");
        }
    }
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn named_states_are_symmetric(perm in Just((0..5).collect::<Vec<usize>>()).prop_shuffle()) {
        let states = [
            make_ghz(3, 5).unwrap(),
            make_w(5).unwrap(),
            make_dicke(2, 3).unwrap(),
            make_dicke_lambda(&Partition::new(vec![2, 1]).unwrap(), 5).unwrap(),
        ];
        for s in &states {
            prop_assert_eq!(&s.permute_parties(&perm).unwrap(), s);
        }
    }
}

// slocc

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn schmidt_profile_complement_symmetry(t in small_tensor(4)) {
        let p = schmidt_profile(&t).unwrap();
        for cut in cut_classes(t.parties()).unwrap() {
            let other = complement(&cut, t.parties());
            prop_assert_eq!(t.flattening_rank(&cut).unwrap(), t.flattening_rank(&other).unwrap());
            prop_assert_eq!(p.rank_of(&cut), p.rank_of(&other));
        }
    }

    #[test]
    fn restriction_never_raises_ranks(
        (t, maps) in small_tensor(3).prop_flat_map(|t| {
            let dims = t.dims().to_vec();
            (Just(t), maps_for(&dims, 2))
        })
    ) {
        let image = t.apply_local_maps(&maps).unwrap();
        // check_restriction asserts cut-wise monotonicity on success.
        prop_assert!(check_restriction(&t, &image, &maps).unwrap());
        for cut in cut_classes(t.parties()).unwrap() {
            prop_assert!(image.flattening_rank(&cut).unwrap() <= t.flattening_rank(&cut).unwrap());
        }
    }

    #[test]
    fn reduction_keeps_global_entanglement(t in small_tensor(4), c in 0usize..4, seed in 0u64..1000) {
        prop_assume!(t.parties() >= 3 && c < t.parties());
        prop_assume!(is_globally_entangled(&t).unwrap());
        match reduce_party(&t, c, seed) {
            Ok(r) => prop_assert!(is_globally_entangled(&r.reduced).unwrap()),
            Err(slocc_lab::Error::SearchExhausted(_)) => {}
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }
}

#[test]
fn reduction_on_named_states() {
    for k in 3..=5 {
        for (name, psi) in [("W", make_w(k).unwrap()), ("GHZ", make_ghz(2, k).unwrap())] {
            for c in 0..k {
                let r = reduce_party(&psi, c, 7).unwrap_or_else(|e| panic!("{name}_{k}, site {c}: {e}"));
                assert!(is_globally_entangled(&r.reduced).unwrap());
            }
        }
    }
}

// degeneration

proptest! {
    #![proptest_config(config(8))]

    #[test]
    fn specialization_matches_expansion(eps0 in nonzero_rational()) {
        let certs = vec![
            w_from_ghz(3).unwrap(),
            w_from_ghz(4).unwrap(),
            dicke_lambda_from_ghz(&Partition::new(vec![1, 1]).unwrap(), 3).unwrap(),
        ];
        for cert in certs {
            let image = cert.source().apply_local_maps(&cert.maps().specialize(&eps0)).unwrap();
            let mut expected = cert.target().scale(&eps0.pow(cert.d() as u64));
            for (i, err) in cert.errors().iter().enumerate() {
                expected = expected.add(&err.scale(&eps0.pow((cert.d() + i + 1) as u64))).unwrap();
            }
            prop_assert_eq!(image, expected);
        }
    }
}

#[test]
fn shipped_certificates_are_consistent() {
    let mut rational = Vec::new();
    for k in 2..=6 {
        rational.push(w_from_ghz(k).unwrap());
    }
    for parts in [vec![1, 1], vec![2, 1]] {
        for k in 3..=4 {
            rational.push(dicke_lambda_from_ghz(&Partition::new(parts.clone()).unwrap(), k).unwrap());
        }
    }
    for cert in &rational {
        let r = verify_degeneration(cert).unwrap();
        assert!(r.valid, "{:?}", r.issues);
        assert!(r.measured_e.unwrap() <= cert.e());
        let level = ghz_level(cert.source()).unwrap();
        for cut in cut_classes(cert.target().parties()).unwrap() {
            assert!(cert.target().flattening_rank(&cut).unwrap() <= level);
        }
        let b = border_rank_bounds(cert.target(), Some(cert)).unwrap();
        assert!(b.lower <= b.upper.unwrap());
    }
    for (m, n) in [(1, 2), (2, 2), (2, 3)] {
        let cert = dicke_from_ghz(m, n).unwrap();
        let r = verify_degeneration(&cert).unwrap();
        assert!(r.valid && r.measured_e.unwrap() <= cert.e());
        let b = border_rank_bounds(cert.target(), Some(&cert)).unwrap();
        assert!(b.lower <= b.upper.unwrap());
    }
}

// support

fn distribution_pair(len: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>, f64)> {
    (prop::collection::vec(0.01f64..1.0, len), prop::collection::vec(0.01f64..1.0, len), 0.01f64..0.99)
}

fn normalize(v: &[f64]) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    v.iter().map(|x| x / s).collect()
}

fn theta3() -> impl Strategy<Value = Theta> {
    (0i64..=6, 0i64..=6, 0i64..=6)
        .prop_filter("nonzero", |(a, b, c)| a + b + c > 0)
        .prop_map(|(a, b, c)| {
            let s = a + b + c;
            Theta::new(vec![Rational::new(a, s).unwrap(), Rational::new(b, s).unwrap(), Rational::new(c, s).unwrap()]).unwrap()
        })
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn htheta_is_concave((p, q, t) in distribution_pair(6), theta in theta3()) {
        let support = make_dicke(1, 2).unwrap().support().into_iter()
            .chain(make_dicke(2, 1).unwrap().support())
            .collect::<Vec<_>>();
        let p = SupportDistribution::new(support.clone(), normalize(&p)).unwrap();
        let q = SupportDistribution::new(support, normalize(&q)).unwrap();
        let mix = p.mix(&q, t).unwrap();
        let lhs = entropy_htheta(&mix, &theta).unwrap();
        let rhs = t * entropy_htheta(&p, &theta).unwrap() + (1.0 - t) * entropy_htheta(&q, &theta).unwrap();
        prop_assert!(lhs >= rhs - 1e-12, "{lhs} < {rhs}");
    }

    #[test]
    fn estimates_are_ordered_and_bounded(t in small_tensor(3), theta in theta3()) {
        prop_assume!(t.parties() == 3 && !t.is_zero());
        let f = functionals_fixed_basis(&t, &theta).unwrap();
        prop_assert!(f.rho_lower_est <= f.rho_upper_est + 1e-9);
        if f.oblique {
            prop_assert!((f.rho_lower_est - f.rho_upper_est).abs() <= 1e-9);
        }
        let cap: f64 = theta.to_f64().iter().zip(t.dims()).map(|(w, &d)| w * (d as f64).log2()).sum();
        prop_assert!(f.rho_lower_est >= -1e-12 && f.rho_upper_est <= cap + 1e-9);
    }

    #[test]
    fn product_supports(
        (f, g) in (
            small_tensor(2).prop_filter("2 parties", |t| t.parties() == 2 && !t.is_zero()),
            small_tensor(2).prop_filter("2 parties", |t| t.parties() == 2 && !t.is_zero()),
        ),
        w in 0i64..=4,
    ) {
        let theta = Theta::new(vec![Rational::new(w, 4).unwrap(), Rational::new(4 - w, 4).unwrap()]).unwrap();
        let fg = f.tensor_product(&g).unwrap();
        let h = |s: &[Vec<usize>]| max_entropy_over_support(s, &theta, DEFAULT_TOL).unwrap().value;
        prop_assert!((h(&fg.support()) - h(&f.support()) - h(&g.support())).abs() < 1e-6);

        // Pairs (x, y) ordered coordinate-wise in both factors.
        let pairs: Vec<Vec<usize>> = f.support().iter()
            .flat_map(|x| g.support().into_iter().map(move |y| x.iter().chain(&y).copied().collect()))
            .collect();
        let expected: BTreeSet<Vec<usize>> = maximal_points(&f.support()).iter()
            .flat_map(|x| maximal_points(&g.support()).into_iter().map(move |y| x.iter().chain(&y).copied().collect()))
            .collect();
        prop_assert_eq!(maximal_points(&pairs).into_iter().collect::<BTreeSet<_>>(), expected);
    }
}

#[test]
fn optimizer_matches_symmetric_closed_forms() {
    let h = |p: f64| binary_entropy(p);
    let mut cases: Vec<(SparseTensor<Rational>, f64)> = Vec::new();
    for k in 2..=6 {
        cases.push((make_w(k).unwrap(), h(1.0 / k as f64)));
    }
    for r in 2..=5 {
        cases.push((make_ghz(r, 3).unwrap(), (r as f64).log2()));
    }
    for (m, n) in [(1, 2), (2, 2), (2, 3), (3, 4)] {
        cases.push((make_dicke(m, n).unwrap(), h(n as f64 / (m + n) as f64)));
    }
    let lam = Partition::new(vec![2, 1]).unwrap();
    let probs: [f64; 3] = [2.0 / 5.0, 1.0 / 5.0, 2.0 / 5.0];
    cases.push((make_dicke_lambda(&lam, 5).unwrap(), -probs.iter().map(|p| p * p.log2()).sum::<f64>()));
    for (t, expect) in cases {
        let theta = Theta::uniform(t.parties()).unwrap();
        let got = max_entropy_over_support(&t.support(), &theta, DEFAULT_TOL).unwrap();
        assert!(got.converged);
        assert!((got.value - expect).abs() <= 1e-9, "{:?}: {} vs {expect}", t.dims(), got.value);
    }
}

// avgfree

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn constructed_sets_verify(m in 2usize..=4, d in 2usize..=4, reps in 1usize..=2) {
        let n = d * reps;
        prop_assume!(family_size(d, n) <= 2000u32.into());
        let s = construct_avgfree(m, d, n).unwrap();
        prop_assert_eq!(num_bigint::BigUint::from(s.len()), family_size(d, n));
        prop_assert!(*s.max().unwrap() < num_bigint::BigUint::from(family_base(m, d)).pow(n as u32));
        prop_assert!(verify_avgfree(&s).unwrap());
    }
}

// cwprotocol

fn tuple_and_hash() -> impl Strategy<Value = (usize, Vec<usize>, HashParams)> {
    (3usize..=5, 1usize..=3, 1u64..200).prop_flat_map(|(k, n, q)| {
        let modulus = (k as u64 - 1) * q + 1;
        let content: Vec<usize> = (0..k).flat_map(|i| std::iter::repeat(i).take(n)).collect();
        (
            Just(k),
            Just(content).prop_shuffle(),
            prop::collection::vec(0..modulus, k * n),
            prop::collection::vec(0..modulus, k - 1),
            Just(modulus),
        )
            .prop_map(|(k, z, v, u, m)| (k, z, HashParams::new(m, v, u, k).unwrap()))
    })
}

proptest! {
    #![proptest_config(config(1000))]

    #[test]
    fn hash_congruence((k, z, h) in tuple_and_hash()) {
        let t = BalancedTuple::from_parties(&z, k).unwrap();
        let b = hash_tuple(&h, &t);
        let m = h.modulus as u128;
        let lhs: u128 = b[..k - 1].iter().map(|&x| x as u128).sum::<u128>() % m;
        let rhs = (k as u128 - 1) * b[k - 1] as u128 % m;
        prop_assert_eq!(lhs, rhs);
        prop_assert!(b.iter().all(|&x| x < h.modulus));
    }
}

proptest! {
    #![proptest_config(config(32))]

    /// On an oblique support ρ_θ = max_P H_θ(P) is a maximum of functions
    /// linear in θ, hence convex in θ.
    #[test]
    fn oblique_value_is_convex_in_theta(a in theta3(), b in theta3(), t in 1i64..=9, which in 0usize..3) {
        let support = match which {
            0 => make_w(3).unwrap().support(),
            1 => make_dicke(1, 2).unwrap().support(),
            _ => make_dicke_lambda(&Partition::new(vec![1, 1]).unwrap(), 3).unwrap().support(),
        };
        let t = Rational::new(t, 10).unwrap();
        let mixed = Theta::new(
            a.weights().iter().zip(b.weights()).map(|(x, y)| &t * x + (Rational::one() - &t) * y).collect(),
        ).unwrap();
        let h = |th: &Theta| max_entropy_over_support(&support, th, DEFAULT_TOL).unwrap().value;
        let tf = t.to_f64();
        prop_assert!(h(&mixed) <= tf * h(&a) + (1.0 - tf) * h(&b) + 1e-7);
    }
}
