//! Reference values computed independently (high-precision quadrature or closed forms).

mod common;

use std::sync::Arc;

use common::*;
use dyadrep_core::bcr::{bcr_report, decay_scan, error_term_direct};
use dyadrep_core::grid::{cube, ShiftSequence};
use dyadrep_core::kernel::{dini_norm, Kernel, Modulus};
use dyadrep_core::rep::{draw_theta, k_tail_dini};
use dyadrep_core::simplefn::d_op;
use dyadrep_core::{Error, Rect, SimpleFunction, WeakForm};

fn sq(x0: (i64, i64), x1: (i64, i64), e: i32) -> Rect {
    Rect::from_intervals(&[(dy(x0.0, e), dy(x0.1, e)), (dy(x1.0, e), dy(x1.1, e))])
}

#[test]
#[allow(clippy::excessive_precision)]
fn power_kernel_pairings() {
    let k = Kernel::power(2, 0.5).unwrap();
    let unit = sq((0, 1), (0, 1), 0);
    let cases = [
        (sq((2, 3), (0, 1), 0), 0.287682072451780927439),
        (sq((1, 5), (3, 4), 1), 0.374652544292309995713),
        (sq((-12, -4), (5, 9), 2), -0.387356508697094958883),
    ];
    for (s, want) in cases {
        let got = k.pairing(&unit, &s).unwrap();
        assert!((got - want).abs() < 1e-11, "{s:?}: {got} vs {want}");
    }
    assert_eq!(k.pairing(&unit, &sq((0, 1), (0, 1), 1)), Err(Error::OverlapRuleUnavailable));
}

#[test]
fn t1_is_independent_of_the_cube() {
    let t = WeakForm::hilbert();
    let hs = [
        ind(0, 1).sub(&ind(1, 2)),
        SimpleFunction::from_terms(1, vec![(Rect::from_intervals(&[(dy(1, 2), dy(3, 2))]), 2.into()), (Rect::from_intervals(&[(dy(3, 2), dy(7, 2))]), (-1).into())]),
    ];
    for h in &hs {
        let vals: Vec<f64> = [(0, 2), (-2, 2), (-6, 10), (-30, 34)].iter().map(|&c| t.tau_one(h, &Rect::from_ints(&[c])).unwrap()).collect();
        for v in &vals {
            assert!(v.abs() < 1e-6, "{vals:?}");
            assert!((v - vals[0]).abs() < 1e-6);
        }
        let l = t.tau_one_left(h, &Rect::from_ints(&[(-2, 2)])).unwrap();
        assert!(l.abs() < 1e-6);
    }
}

#[test]
fn t1_needs_the_overlap_rule() {
    let t = WeakForm::new(Kernel::power(1, 1.0).unwrap());
    let h = ind(0, 1).sub(&ind(1, 2));
    assert_eq!(t.tau_one(&h, &Rect::from_ints(&[(0, 2)])), Err(Error::OverlapRuleUnavailable));
}

#[test]
fn tau_d1_sums_to_left_t1() {
    let t = WeakForm::hilbert();
    let th = draw_theta(5, 0, 1, (-10, 10));
    let f = SimpleFunction::indicator(Rect::from_intervals(&[(dy(-3, 3), dy(13, 3))]));
    for m in -1..3 {
        let p = cube(&th, 0, vec![m]).unwrap();
        let a = t.tau_d1(&f, &p).unwrap();
        let b = t.tau_one_left(&d_op(&f, &p), &p.rect()).unwrap();
        assert!((a - b).abs() < 1e-6, "{a} {b}");
        let (abs_sum, l1) = t.tau_d1_abs(&f, &p, 64).unwrap();
        if l1 > 0.0 {
            println!("absolute-sum constant {:.4}", abs_sum / l1);
        }
    }
}

#[test]
fn bcr_identity_power_kernel_disjoint() {
    let t = WeakForm::new(Kernel::power(2, 0.5).unwrap());
    let th = draw_theta(17, 0, 2, (-4, 10));
    let f = SimpleFunction::indicator(sq((0, 4), (1, 3), 2));
    let g = SimpleFunction::indicator(sq((12, 16), (0, 4), 2)).sub(&SimpleFunction::indicator(sq((13, 14), (1, 2), 2)));
    let r = bcr_report(&t, &f, &g, 0, 3, &th).unwrap();
    assert!(r.defect < 1e-8, "{r:?}");
    assert!(r.path_gap < 1e-8, "{r:?}");
}

/// θ whose generation-0 boundary falls between the standard intervals at every coarse scale.
fn separating(fine_seed: u64) -> ShiftSequence {
    let fine = dyadrep_core::grid::sample_theta(fine_seed, 1, (1, 40));
    let mut set: Vec<(i32, u32)> = (1..=40).map(|j| (j, fine.bits_at(j))).collect();
    set.push((0, 1));
    ShiftSequence::with_bits(1, -12, 40, &set).unwrap()
}

#[test]
fn coarse_error_is_exact_for_a_separating_system() {
    let t = WeakForm::hilbert();
    let th = separating(3);
    for a in -8..=-2 {
        let e = error_term_direct(&t, &ind(0, 1), &ind(2, 3), a, 4, &th).unwrap();
        let want = 2.0 * std::f64::consts::LN_2 * (a as f64).exp2();
        assert!((e.coarse - want).abs() < 1e-14, "a={a}: {} vs {want}", e.coarse);
    }
}

#[test]
fn decay_scan_slopes() {
    let t = WeakForm::hilbert();
    let th = separating(3);
    let tab = decay_scan(&t, &ind(0, 1), &ind(2, 3), &[-8, -7, -6, -5, -4, -3], &[3, 4, 5, 6, 7, 8], &th).unwrap();
    assert!((tab.slope_a.unwrap() - 1.0).abs() < 1e-9);
    let sb = tab.slope_b.unwrap();
    // separated supports: the fine terms are dipole interactions
    assert!((sb + 2.0).abs() < 0.3, "{sb}");
    let zero = decay_scan(&t, &SimpleFunction::zero(1), &SimpleFunction::zero(1), &[-2], &[2], &th).unwrap();
    assert!(zero.rows.iter().all(|r| r.parts.total() == 0.0));
}

#[test]
fn dini_norms() {
    let w = Modulus::power(1.0);
    assert!((dini_norm(&w, 0.0).unwrap() - 0.5).abs() < 1e-10);
    assert!((dini_norm(&w, 1.0).unwrap() - (0.5 + 0.5 * std::f64::consts::LN_2)).abs() < 1e-10);
    let tail = k_tail_dini(WeakForm::hilbert().kernel().modulus(), 10, 0.5);
    let direct: f64 = (11..200).map(|k| 4.0 * (-k as f64).exp2() * (k as f64).sqrt()).sum();
    assert!((tail - direct).abs() < 1e-15);
}

#[test]
fn zero_shift_in_window() {
    let th = Arc::new(ShiftSequence::zero(1, -3, 3));
    assert!(cube(&th, -5, vec![0]).is_err());
}
