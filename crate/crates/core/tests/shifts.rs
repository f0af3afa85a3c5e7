//! Structure of the goodness-filtered shifts and the averaging identity.

mod common;

use std::sync::Arc;

use common::*;
use dashu_ratio::RBig;
use dyadrep_core::grid::{cube, sample_theta_stream, DyadicCube};
use dyadrep_core::rep::{averaging_check, draw_theta, shift_form, shift_sum, Gamma, Normalization};
use dyadrep_core::simplefn::{d_block, d_block_range, e_block};
use dyadrep_core::{Rect, ShiftSequence, SimpleFunction, WeakForm};
use proptest::prelude::*;

type Terms = Vec<(i64, i64, RBig)>;

fn terms() -> impl Strategy<Value = Terms> {
    proptest::collection::vec((0i64..64, 1i64..64, coef()), 1..4)
}

/// Terms on a grid of `2^(k+1)` cells of `s`.
fn within(s: &DyadicCube, k: i32, ts: &Terms) -> SimpleFunction {
    let corner = &s.corner()[0];
    let cells = 1i64 << (k + 1);
    let e = s.gen() + k + 1;
    let mut f = SimpleFunction::zero(1);
    for (lo, len, c) in ts {
        let lo = lo % cells;
        let hi = (lo + len).min(cells);
        f.push(Rect::from_intervals(&[(corner + &dy(lo, e), corner + &dy(hi, e))]), c.clone());
    }
    f
}

fn system(seed: u64) -> Arc<ShiftSequence> {
    Arc::new(sample_theta_stream(seed, 0, 1, (-10, 12)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn cancellation_conditions(seed in any::<u64>(), k in 2i32..5, ft in terms(), gt in terms()) {
        let th = system(seed);
        let s = cube(&th, 0, vec![0]).unwrap();
        let f = within(&s, k, &ft);
        let g = within(&s, k, &gt);
        let t = WeakForm::hilbert();
        let n = Normalization::Averaged;
        let base11 = shift_form(&t, &f, &g, &s, Gamma::G11, k, n).unwrap();
        let canc11 = shift_form(&t, &d_block(&f, &s, k), &d_block(&g, &s, k), &s, Gamma::G11, k, n).unwrap();
        prop_assert!((base11 - canc11).abs() <= 1e-12 * (1.0 + base11.abs()), "{} {}", base11, canc11);
        let base10 = shift_form(&t, &f, &g, &s, Gamma::G10, k, n).unwrap();
        let canc10 = shift_form(&t, &d_block(&f, &s, k), &d_block_range(&g, &s, k), &s, Gamma::G10, k, n).unwrap();
        prop_assert!((base10 - canc10).abs() <= 1e-12 * (1.0 + base10.abs()), "{} {}", base10, canc10);
        let base01 = shift_form(&t, &f, &g, &s, Gamma::G01, k, n).unwrap();
        let canc01 = shift_form(&t, &d_block_range(&f, &s, k), &d_block(&g, &s, k), &s, Gamma::G01, k, n).unwrap();
        prop_assert!((base01 - canc01).abs() <= 1e-12 * (1.0 + base01.abs()), "{} {}", base01, canc01);
        let _ = e_block(&f, &s, k);
    }
}

#[test]
fn shift_sum_is_the_sum_of_shift_forms() {
    let t = WeakForm::hilbert();
    let th = draw_theta(4, 0, 1, (-12, 12));
    let f = ind(0, 1);
    let g = ind(2, 3);
    for gamma in Gamma::ALL {
        for k in 2..5 {
            let total = shift_sum(&t, &f, &g, -1, 3, &th, gamma, k, Normalization::Averaged).unwrap();
            let mut parts = 0.0;
            for i in -1..3 {
                let gen = i - k;
                let lo = th.index_of(&dy(-64, 0), gen, 0);
                let hi = th.index_of(&dy(64, 0), gen, 0);
                for m in lo..=hi {
                    let s = cube(&th, gen, vec![m]).unwrap();
                    parts += shift_form(&t, &f, &g, &s, gamma, k, Normalization::Averaged).unwrap();
                }
            }
            assert!((total - parts).abs() < 1e-12 * (1.0 + total.abs()), "{gamma:?} {k}: {total} vs {parts}");
        }
    }
}

#[test]
fn no_good_cube_gives_zero() {
    let t = WeakForm::hilbert();
    let th = Arc::new(ShiftSequence::zero(1, -10, 10));
    // [0, 1/4) at generation 2 sits in the corner of its ancestor of generation 0
    let s = cube(&th, 0, vec![0]).unwrap();
    let f = SimpleFunction::indicator(Rect::from_intervals(&[(dy(0, 3), dy(1, 3))]));
    let g = SimpleFunction::indicator(Rect::from_intervals(&[(dy(0, 2), dy(2, 2))]));
    assert_eq!(shift_form(&t, &f, &g, &s, Gamma::G11, 2, Normalization::Averaged).unwrap(), 0.0);
}

#[test]
fn size_condition_constant_is_finite() {
    let t = WeakForm::hilbert();
    let mut ratios = Vec::new();
    for seed in 0..40u64 {
        let th = system(seed);
        let s = cube(&th, 0, vec![0]).unwrap();
        let c = s.corner()[0].clone();
        let f = SimpleFunction::from_terms(1, vec![(Rect::from_intervals(&[(&c + &dy(1 + (seed % 5) as i64, 4), &c + &dy(9, 4))]), RBig::from(1))]);
        let g = SimpleFunction::from_terms(1, vec![(Rect::from_intervals(&[(&c + &dy(7, 4), &c + &dy(12 + (seed % 3) as i64, 4))]), RBig::from(-2))]);
        let a = shift_form(&t, &f, &g, &s, Gamma::G11, 3, Normalization::Averaged).unwrap();
        let denom = dyadrep_core::simplefn::rational_to_f64(&e_block(&f.abs(), &s, 0).pairing(&g.abs()).unwrap());
        ratios.push(a.abs() / denom);
    }
    assert!(ratios.iter().all(|r| r.is_finite()));
}

#[test]
fn averaging_identity_small_sample() {
    let t = WeakForm::hilbert().with_fast_t1(true);
    for gamma in Gamma::ALL {
        let r = averaging_check(&t, &ind(0, 1), &ind(2, 3), -2, 4, gamma, 3, 21, 600, Normalization::Averaged).unwrap();
        assert!(r.pass, "{r:?}");
    }
}

#[test]
fn beyond_horizon_both_sides_vanish() {
    let t = WeakForm::hilbert().with_fast_t1(true);
    let r = averaging_check(&t, &ind(0, 1), &ind(2, 3), 0, 3, Gamma::G11, 9, 2, 20, Normalization::Averaged).unwrap();
    assert_eq!((r.lhs.mean, r.rhs.mean), (0.0, 0.0));
}

#[test]
fn goodness_frequency() {
    for d in [1usize, 2] {
        for k in [2, 3, 5] {
            let n = 20_000;
            let mut hits = 0;
            for j in 0..n {
                let th = Arc::new(sample_theta_stream(99, j, d, (-8, 4)));
                if cube(&th, 0, vec![0; d]).unwrap().is_good(k).unwrap() {
                    hits += 1;
                }
            }
            let p = 1.0 / (1u32 << d) as f64;
            let freq = hits as f64 / n as f64;
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            assert!((freq - p).abs() <= 3.0 * sigma, "d={d} k={k}: {freq}");
        }
    }
}
