use std::collections::BTreeMap;

use polyhyp::chainseq::{minimal_parameters, worpitzky_cf, ChainSequenceProbe, ParameterOutcome};
use polyhyp::families::{CoefficientSequence, PollaczekParams};
use polyhyp::hypergroup::{HSequence, LinearizationTable};
use polyhyp::scalar::{NumCtx, Scalar};
use polyhyp::spectrum::{eval_values, fourier, q_measure};
use polyhyp::verify::{run_suite, Report, RunOptions};
use proptest::prelude::*;

fn ratio() -> impl Strategy<Value = (i64, i64)> {
    (1i64..40, 2i64..41).prop_filter("proper fraction", |(p, q)| p < q)
}

fn qleg(q: (i64, i64)) -> LinearizationTable {
    LinearizationTable::from_sequence(CoefficientSequence::little_q_legendre(Scalar::ratio(q.0, q.1)).unwrap())
}

/// Pollaczek parameters on a small rational lattice inside the admissible region.
fn pollaczek() -> impl Strategy<Value = PollaczekParams> {
    (-4i64..=20, 0i64..=20, 0i64..=10).prop_filter_map("admissible", |(a, l, n)| {
        let alpha = Scalar::ratio(a, 10);
        let lambda = Scalar::ratio(l, 10);
        if alpha <= Scalar::ratio(-1, 2) || lambda >= &alpha + Scalar::ratio(1, 2) {
            return None;
        }
        PollaczekParams::new(alpha, lambda, Scalar::ratio(n, 4)).ok()
    })
}

fn small_seq() -> impl Strategy<Value = Vec<(usize, i64)>> {
    prop::collection::vec((0usize..5, -6i64..7), 1..4)
}

fn hseq(pairs: &[(usize, i64)]) -> HSequence {
    let mut f = HSequence::zero();
    for &(k, v) in pairs {
        f.set(k, f.get(k) + Scalar::int(v));
    }
    f
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn linearization_is_a_probability_vector(q in ratio(), m in 0usize..7, n in 0usize..7) {
        let g = qleg(q).linearize(m, n);
        prop_assert_eq!(g.sum(), Scalar::one());
        prop_assert_eq!(g.lo, m.abs_diff(n));
        prop_assert!(g.values.iter().all(|v| !v.is_negative()));
        prop_assert!(!g.get(m + n).is_zero());
    }

    #[test]
    fn linearization_is_symmetric(p in pollaczek(), m in 0usize..6, n in 0usize..6) {
        let t = LinearizationTable::from_sequence(CoefficientSequence::pollaczek(p).unwrap());
        prop_assert_eq!(t.linearize(m, n), t.linearize(n, m));
    }

    #[test]
    fn product_formula_at_random_points(q in ratio(), m in 0usize..5, n in 0usize..5, x in (-9i64..10, 1i64..10)) {
        let t = qleg(q);
        let x = Scalar::ratio(x.0, x.1);
        let p = eval_values(t.coefficients(), m + n, &x);
        let rhs: Scalar = t.linearize(m, n).iter().map(|(k, g)| g * &p[k]).sum();
        prop_assert_eq!(&p[m] * &p[n], rhs);
    }

    #[test]
    fn haar_weight_is_inverse_of_g_nn0(p in pollaczek(), n in 0usize..8) {
        let t = LinearizationTable::from_sequence(CoefficientSequence::pollaczek(p).unwrap());
        let (h, inv_g) = t.haar_with_check(n);
        prop_assert_eq!(h, inv_g);
    }

    #[test]
    fn convolution_routes_agree(q in ratio(), f in small_seq(), g in small_seq()) {
        let t = qleg(q);
        let (f, g) = (hseq(&f), hseq(&g));
        prop_assert_eq!(t.convolve(&f, &g), t.convolve_by_expansion(&f, &g));
    }

    #[test]
    fn fourier_is_multiplicative(q in ratio(), f in small_seq(), g in small_seq(), x in (0i64..12, 1i64..12)) {
        let t = qleg(q);
        let (f, g) = (hseq(&f), hseq(&g));
        let x = Scalar::ratio(x.0.min(x.1), x.1);
        let fg = t.convolve(&f, &g);
        prop_assert_eq!(fourier(&t, &fg, &x), fourier(&t, &f, &x) * fourier(&t, &g, &x));
    }

    #[test]
    fn l1_norm_is_submultiplicative(q in ratio(), f in small_seq(), g in small_seq()) {
        let t = qleg(q);
        let (f, g) = (hseq(&f), hseq(&g));
        let lhs = t.norms(&t.convolve(&f, &g)).l1;
        prop_assert!(lhs <= t.norms(&f).l1 * t.norms(&g).l1);
    }

    #[test]
    fn characters_bounded_on_support(q in ratio(), m in 0i64..12) {
        let q = Scalar::ratio(q.0, q.1);
        let cs = CoefficientSequence::little_q_legendre(q.clone()).unwrap();
        let x = Scalar::one() - q.powi(m);
        for v in eval_values(&cs, 25, &x) {
            prop_assert!(v.abs() <= Scalar::one());
        }
    }

    #[test]
    fn plancherel_on_truncated_measure(f in small_seq()) {
        // q = 1/2: atoms 1 - 2^-m; the missing mass near 1 is at most 2^-(K+1)
        let t = qleg((1, 2));
        let f = hseq(&f);
        let mu = q_measure(&Scalar::ratio(1, 2), 60).unwrap();
        let lhs = mu.integrate(|x| fourier(&t, &f, x).square());
        let n = t.norms(&f);
        let err = (lhs - &n.l2sq).abs();
        prop_assert!(err <= &mu.tail_bound * n.l1.square());
    }

    #[test]
    fn worpitzky_contains_value(a in 1i64..25, depth in 1usize..60) {
        let a = Scalar::ratio(a, 100);
        let cf = worpitzky_cf(|_| a.clone(), depth);
        prop_assert_eq!(cf.contained, Some(true));
        prop_assert!(cf.breakdown.is_none());
        // 1/(1 - a/(1 - ...)) converges to 2/(1 + sqrt(1-4a)) in [1, 2]
        prop_assert!(cf.value >= Scalar::one() && cf.value <= Scalar::int(2));
    }

    #[test]
    fn constant_quarter_sequences_are_chains(c in 1i64..=25, n in 1usize..30) {
        let p = ChainSequenceProbe::constant(Scalar::ratio(c, 100));
        match minimal_parameters(&p, n) {
            ParameterOutcome::Sequence { values } => {
                prop_assert!(values.windows(2).all(|w| w[0] < w[1]));
                prop_assert!(values.iter().all(|v| *v < Scalar::one()));
            }
            ParameterOutcome::NotChain { .. } => prop_assert!(false, "c <= 1/4 is a chain sequence"),
        }
    }

    #[test]
    fn minimal_parameters_reproduce_lambda(vals in prop::collection::vec(1i64..25, 1..12)) {
        let lam: Vec<Scalar> = vals.iter().map(|&v| Scalar::ratio(v, 100)).collect();
        let p = ChainSequenceProbe::from_values(lam.clone());
        let out = minimal_parameters(&p, lam.len());
        let m = out.values().expect("entries below 1/4 form a chain sequence");
        for (k, l) in lam.iter().enumerate() {
            prop_assert_eq!(&(Scalar::one() - &m[k]) * &m[k + 1], l.clone());
        }
    }

    #[test]
    fn decode_inverts_encode(p in -1000i64..1000, q in 1i64..1000, prec in 64usize..300) {
        let x = Scalar::ratio(p, q);
        prop_assert_eq!(Scalar::decode(&x.encode()).unwrap(), x.clone());
        let f = x.to_float(prec);
        prop_assert_eq!(Scalar::decode(&f.encode()).unwrap(), f);
    }

    #[test]
    fn rational_parse_round_trip(p in -1000i64..1000, q in 1i64..1000) {
        let x = Scalar::ratio(p, q);
        prop_assert_eq!(NumCtx::default().parse(&x.to_string()).unwrap(), x);
    }
}

#[test]
fn report_json_round_trip() {
    let mut params = BTreeMap::new();
    params.insert("q".to_string(), "1/4,1/2".to_string());
    let r = run_suite("qleg-lemma35", &params, &BTreeMap::new(), &RunOptions::default()).unwrap();
    let back = Report::from_json(&r.to_json()).unwrap();
    assert_eq!(back, r);
}
