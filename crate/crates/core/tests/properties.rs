use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use volterra_core::hill::{self, fundamental_solutions};
use volterra_core::lattice::integrate_direct;
use volterra_core::reconstruct::reconstruct_general;
use volterra_core::symm_poly::{complete_homogeneous, lagrange_closed_form, lagrange_power_sum, NodeSet};
use volterra_core::{ChainState, HillCoefficients};

fn chain() -> impl Strategy<Value = ChainState> {
    prop::collection::vec(0.5..2.0_f64, 2..=6).prop_map(|u| ChainState::new(u, 0.0).unwrap())
}

fn rational_nodes() -> impl Strategy<Value = NodeSet<BigRational>> {
    prop::collection::btree_set(-40_i64..40, 2..=6).prop_filter_map("zero node", |set| {
        if set.contains(&0) {
            return None;
        }
        let x = set
            .into_iter()
            .map(|v| BigRational::new(BigInt::from(v), BigInt::from(7)))
            .collect();
        NodeSet::new(x).ok()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lemma_exact_on_rationals(x in rational_nodes(), s in -6_i64..12) {
        prop_assert_eq!(lagrange_power_sum(s, &x).unwrap(), lagrange_closed_form(s, &x).unwrap());
    }

    #[test]
    fn complete_homogeneous_is_symmetric(x in prop::collection::vec(-3_i64..3, 1..5), l in 0_usize..6) {
        let fwd: Vec<BigRational> = x.iter().map(|v| BigRational::from_integer(BigInt::from(*v))).collect();
        let mut rev = fwd.clone();
        rev.reverse();
        prop_assert_eq!(complete_homogeneous(l, &fwd), complete_homogeneous(l, &rev));
    }

    #[test]
    fn wronskian_is_one(c in chain(), t in 0.0..1.0_f64, shift in 0_i64..6) {
        let coeffs = HillCoefficients::from_chain(&c);
        let s = hill::periodic_spectrum(&coeffs);
        let (lo, hi) = (s.lambda[0] - 1.0, s.lambda[s.lambda.len() - 1] + 1.0);
        let p = fundamental_solutions(&coeffs, lo + t * (hi - lo), shift);
        prop_assert!(p.wronskian_residual() <= 1e-10, "{}", p.wronskian_residual());
    }

    #[test]
    fn dirichlet_eigenvalues_sit_in_gaps(c in chain()) {
        let coeffs = HillCoefficients::from_chain(&c);
        let s = hill::periodic_spectrum(&coeffs);
        let tol = 1e-12 * coeffs.scale();
        for aux in hill::all_aux_spectra(&coeffs).unwrap() {
            for (m, g) in aux.mu.iter().zip(&s.gaps) {
                prop_assert!(g.contains(*m, tol), "mu {} outside [{}, {}]", m, g.lo, g.hi);
            }
            prop_assert!(aux.trace().abs() <= 1e-12 * coeffs.scale());
        }
    }

    #[test]
    fn spectrum_is_symmetric(c in chain()) {
        let s = hill::periodic_spectrum(&HillCoefficients::from_chain(&c));
        let l = &s.lambda;
        for (a, b) in l.iter().zip(l.iter().rev()) {
            prop_assert!((a + b).abs() <= 1e-10);
        }
    }

    #[test]
    fn trace_formula_round_trip(c in chain()) {
        let coeffs = HillCoefficients::from_chain(&c);
        let s = hill::periodic_spectrum(&coeffs);
        let aux = hill::all_aux_spectra(&coeffs).unwrap();
        let r = reconstruct_general(&s, &aux, 0.0).unwrap();
        for (got, want) in r.u.iter().zip(c.u()) {
            prop_assert!(((got - want) / want).abs() <= 1e-7, "{} vs {}", got, want);
        }
    }

    #[test]
    fn direct_flow_conserves_sum_and_product(c in chain()) {
        let traj = integrate_direct(&c, 0.5, 1e-3, 50).unwrap();
        let drift = traj.max_invariant_drift();
        prop_assert!(drift.sum <= 1e-10 && drift.product <= 1e-9, "{:?}", drift);
    }
}
