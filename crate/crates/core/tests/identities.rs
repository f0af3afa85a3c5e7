//! Algebraic identities checked on random inputs.

mod common;

use std::sync::Arc;

use common::*;
use dashu_ratio::RBig;
use dyadrep_core::bcr::{bcr_report, main_term};
use dyadrep_core::grid::{cube, sample_theta};
use dyadrep_core::rep::{draw_theta, geometric_horizon, split, Gamma};
use dyadrep_core::simplefn::{d_gen, e_op, f_op};
use dyadrep_core::{Rect, ShiftSequence, WeakForm};
use proptest::prelude::*;

fn theta(seed: u64, d: usize) -> Arc<ShiftSequence> {
    Arc::new(sample_theta(seed, d, (-16, 14)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn expectation_preserves_integral_and_nests(f in simple(2, -8..8, 3, 3), seed in any::<u64>(), i in -3i32..4, j in 0i32..3) {
        let th = theta(seed, 2);
        let ei = e_op(&f, i, &th);
        prop_assert_eq!(ei.integral(), f.integral());
        prop_assert!(e_op(&e_op(&f, i + j, &th), i, &th).equals(&ei));
        prop_assert!(e_op(&ei, i + j, &th).equals(&ei));
        prop_assert!(f_op(&f, i, &th).add(&ei).equals(&f));
    }

    #[test]
    fn martingale_differences_telescope(f in simple(1, -16..16, 4, 4), seed in any::<u64>(), a in -6i32..0, b in 0i32..6) {
        let th = theta(seed, 1);
        let mut sum = SimpleFunction::zero(1);
        for i in a..b {
            sum = sum.add(&d_gen(&f, i, &th));
        }
        prop_assert!(sum.equals(&e_op(&f, b, &th).sub(&e_op(&f, a, &th))));
    }

    #[test]
    fn tau_is_bilinear_and_antisymmetric(f in simple(1, -16..16, 3, 4), g in simple(1, -16..16, 3, 4)) {
        let t = WeakForm::hilbert();
        let v = t.tau(&f, &g).unwrap();
        prop_assert!((t.tau(&f.split_terms(), &g).unwrap() - v).abs() <= 1e-12 * (1.0 + v.abs()));
        prop_assert!((t.tau(&f.normalize(), &g.normalize()).unwrap() - v).abs() <= 1e-12 * (1.0 + v.abs()));
        prop_assert!((t.tau(&g, &f).unwrap() + v).abs() <= 1e-9);
        let two = RBig::from(2);
        prop_assert!((t.tau(&f.scale(&two), &g).unwrap() - 2.0 * v).abs() <= 1e-12 * (1.0 + v.abs()));
    }

    #[test]
    fn bcr_identity_hilbert(f in simple(1, -24..24, 3, 3), g in simple(1, -24..24, 3, 3), seed in any::<u64>(), a in -6i32..3, len in 1i32..8) {
        let t = WeakForm::hilbert();
        let b = (a + len).min(10);
        let r = bcr_report(&t, &f, &g, a, b, &theta(seed, 1)).unwrap();
        prop_assert!(r.defect <= 1e-12, "{:?}", r);
        prop_assert!(r.path_gap <= 1e-12, "{:?}", r);
    }

    #[test]
    fn split_reproduces_main_term(f in simple(1, -24..24, 3, 3), g in simple(1, -24..24, 3, 3), seed in any::<u64>(), a in -4i32..2, len in 1i32..5) {
        let t = WeakForm::hilbert();
        let b = a + len;
        let th = draw_theta(seed, 0, 1, (-30, 14));
        let ks = geometric_horizon(&f, &g, b);
        let r = split(&t, &f, &g, a, b, &th, ks).unwrap();
        let m = main_term(&t, &f, &g, a, b, &th).unwrap();
        prop_assert!((r.total - m).abs() <= 1e-12 * (1.0 + m.abs()), "{} vs {}", r.total, m);
        prop_assert_eq!(r.tails[0], 0.0);
    }
}

use dyadrep_core::SimpleFunction;

#[test]
fn weak_continuity_of_the_hilbert_completion() {
    let t = WeakForm::hilbert();
    let q = Rect::from_ints(&[(0, 1)]);
    for j in 0..100i64 {
        let z = dy(j * 37 - 1800, 5);
        let qz = Rect::from_intervals(&[(&q.lo()[0] + &z, &q.hi()[0] + &z)]);
        assert_eq!(t.kernel().pairing(&qz, &qz).unwrap(), 0.0);
    }
}

#[test]
fn split_with_generic_t1() {
    // paraproduct terms cancel against the remainders whatever τ(D_P f, 1) evaluates to
    let t = WeakForm::hilbert();
    let th = draw_theta(11, 0, 1, (-30, 14));
    let f = ind(0, 1);
    let g = ind(0, 3);
    let ks = geometric_horizon(&f, &g, 2);
    let r = split(&t, &f, &g, -3, 2, &th, ks).unwrap();
    let m = main_term(&t, &f, &g, -3, 2, &th).unwrap();
    assert!((r.total - m).abs() < 1e-12);
    let _ = cube(&th, 0, vec![0]).unwrap();
    let _ = Gamma::ALL;
}
