mod common;

use common::*;
use num_rational::BigRational;
use proptest::prelude::*;
use tentlim_core::arcs::{arc_a, arc_at_depth, Arc};
use tentlim_core::chains::{link_sequence, natural_chain};
use tentlim_core::folding::{crossing_flags, k_pattern, shift_pattern, FoldTable};
use tentlim_core::frechet::{frechet_1d, frechet_le};
use tentlim_core::invariants::{count_levels, distinguish};
use tentlim_core::numerics::Interval;
use tentlim_core::symmetry::is_eps_symmetric;
use tentlim_core::{ExactScalar, PLFunction, RationalMap, Scalar, TentMap, Window};

fn rational() -> impl Strategy<Value = BigRational> {
    (-1000i64..1000, 1i64..200).prop_map(|(n, d)| q(n, d))
}

/// Admitted rational slopes in `(1.415, 2]`.
fn slope() -> impl Strategy<Value = RationalMap> {
    (1u32..=585).prop_map(|k| TentMap::new(q(1415 + k as i64, 1000)).unwrap())
}

/// A window inside the core, by fractions of its length.
fn core_window(m: &RationalMap, a: u32, b: u32) -> Window<BigRational> {
    let core = m.core();
    let (a, b) = (a.min(b), a.max(b) + 1);
    let at = |t: u32| core.lo.clone() + core.length() * q(t as i64, 1001);
    Window::new(at(a), at(b)).unwrap()
}

fn pl_from(values: &[i64]) -> PLFunction<BigRational> {
    let n = values.len() as i64 - 1;
    PLFunction::new((0..=n).map(|k| q(k, n)).collect(), values.iter().map(|&v| q(v, 8)).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rational_arithmetic_is_exact(a in rational(), b in rational()) {
        let x = ExactScalar::from(a.clone());
        let y = ExactScalar::from(b.clone());
        prop_assert_eq!((x.clone() + y.clone()) - y.clone(), x.clone());
        prop_assert_eq!(x.clone() * y.clone(), y * x);
    }

    #[test]
    fn interval_arithmetic_is_conservative(a in rational(), b in rational(), w in 1i64..50, bits in 8u32..64) {
        let enclose = |v: &BigRational| {
            ExactScalar::Interval(Interval::new(v - q(w, 1000), v + q(w, 997), bits).unwrap())
        };
        let (x, y) = (enclose(&a), enclose(&b));
        prop_assert!((x.clone() + y.clone()).contains(&(a.clone() + b.clone())));
        prop_assert!((x.clone() - y.clone()).contains(&(a.clone() - b.clone())));
        prop_assert!((x.clone() * y.clone()).contains(&(a.clone() * b.clone())));
        if let Ok(z) = x.try_div(&y) {
            prop_assert!(z.contains(&(a / b)));
        }
    }

    #[test]
    fn orbit_stays_in_core_and_kappa_is_odd(m in slope()) {
        let orbit = m.critical_orbit(300).unwrap();
        for ci in &orbit.points {
            prop_assert!(m.c2() <= ci && ci <= m.c1());
        }
        prop_assert_eq!((orbit.kappa - 3) % 2, 0);
    }

    #[test]
    fn recurrence_gap_never_grows(m in slope(), n in 3usize..40) {
        // Short orbits may not reach kappa yet.
        let (Ok(a), Ok(b)) = (m.critical_orbit(n), m.critical_orbit(n + 1)) else {
            return Err(TestCaseError::reject("kappa beyond depth"));
        };
        let (a, b) = (a.recurrence_gap, b.recurrence_gap);
        prop_assert!(b <= a);
    }

    #[test]
    fn shift_matches_direct_pattern(m in slope(), a in 0u32..1000, b in 0u32..1000, i in 0usize..12) {
        let w = core_window(&m, a, b);
        let next = k_pattern(&m, i + 1, &w).unwrap();
        let shifted = shift_pattern(&k_pattern(&m, i, &w).unwrap(), &crossing_flags(&m, i, &w).unwrap()).unwrap();
        prop_assert_eq!(next, shifted);
    }

    #[test]
    fn transport_round_trip(m in slope(), a in 0u32..1000, b in 0u32..1000, i in 0usize..6, extra in 0usize..10) {
        let core = m.core();
        let r = m.fixed_point().clone();
        // Stretch the window so it contains the anchor.
        let w = core_window(&m, a, b);
        let w = Window::new(w.lo.min_of(&r), w.hi.max_of(&r)).unwrap();
        prop_assume!(core.contains_window(&w).unwrap());
        let arc = Arc::new(i, w.clone(), r).unwrap();
        let deeper = arc_at_depth(&m, &arc, i + extra).unwrap();
        let table = FoldTable::build(&m, extra, &deeper.window).unwrap();
        let lo = table.values.iter().min().unwrap();
        let hi = table.values.iter().max().unwrap();
        prop_assert_eq!(lo, &w.lo);
        prop_assert_eq!(hi, &w.hi);
    }

    #[test]
    fn frechet_is_a_pseudometric(
        f in prop::collection::vec(0i64..=8, 2..6),
        g in prop::collection::vec(0i64..=8, 2..6),
        h in prop::collection::vec(0i64..=8, 2..6),
    ) {
        let (f, g, h) = (pl_from(&f), pl_from(&g), pl_from(&h));
        let fg = frechet_1d(&f, &g).unwrap();
        prop_assert_eq!(&fg, &frechet_1d(&g, &f).unwrap());
        prop_assert!(fg <= frechet_1d(&f, &h).unwrap() + frechet_1d(&h, &g).unwrap());
        prop_assert_eq!(frechet_1d(&f, &f).unwrap(), q(0, 1));
    }

    #[test]
    fn closeness_is_monotone_in_eps(
        f in prop::collection::vec(0i64..=8, 2..6),
        g in prop::collection::vec(0i64..=8, 2..6),
        e in 0i64..16,
        more in 1i64..16,
    ) {
        let (f, g) = (pl_from(&f), pl_from(&g));
        if frechet_le(&f, &g, &q(e, 16)).unwrap() {
            prop_assert!(frechet_le(&f, &g, &q(e + more, 16)).unwrap());
        }
    }

    #[test]
    fn symmetric_windows_are_eps_symmetric_about_c(m in slope(), r in 1i64..500, n in 1usize..9, e in 1i64..1000) {
        let c = m.c();
        let half = (m.c1().clone() - c.clone()) * q(r, 501);
        let w = Window::new(c.clone() - half.clone(), c.clone() + half).unwrap();
        let f = FoldTable::build(&m, n, &w).unwrap().pl();
        let eps = q(e, 1_000_000_000);
        prop_assert!(is_eps_symmetric(&f, &eps, Some(&c)).unwrap().close);
    }

    #[test]
    fn level_count_shift_law(m in slope(), k in 1usize..10, n in 1usize..10) {
        prop_assert_eq!(count_levels(&m, k, n).unwrap(), count_levels(&m, k + 1, n + 1).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn chains_refine(m in slope(), k in 1usize..7) {
        let a = natural_chain(&m, k).unwrap();
        let b = natural_chain(&m, k + 1).unwrap();
        prop_assert!(a.boundaries.iter().all(|x| b.boundaries.contains(x)));
    }

    #[test]
    fn link_sequences_of_arcs_are_odd(m in slope(), k in 1usize..5, i in 1usize..6) {
        let chain = natural_chain(&m, k).unwrap();
        let seq = link_sequence(&chain, &m, &arc_a(&m, i).unwrap()).unwrap();
        prop_assert_eq!(seq.len() % 2, 1);
    }

    #[test]
    fn distinguish_is_symmetric(a in slope(), b in slope()) {
        prop_assert_eq!(distinguish(&a, &b, 30).unwrap(), distinguish(&b, &a, 30).unwrap());
        prop_assert_eq!(distinguish(&a, &a, 30).unwrap(), None);
    }
}
