#![allow(dead_code)]

use dashu_ratio::RBig;
use dyadrep_core::{DyadicRational, Rect, SimpleFunction};
use proptest::prelude::*;

pub fn ind(a: i64, b: i64) -> SimpleFunction {
    SimpleFunction::indicator(Rect::from_ints(&[(a, b)]))
}

pub fn dy(m: i64, e: i32) -> DyadicRational {
    DyadicRational::from_int_pow2(m, -e)
}

/// Interval `[lo, lo + len) / 2^e` with `len ≥ 1`.
pub fn interval(lo_range: core::ops::Range<i64>, e: i32) -> impl Strategy<Value = (DyadicRational, DyadicRational)> {
    (lo_range, 1i64..24).prop_map(move |(lo, len)| (dy(lo, e), dy(lo + len, e)))
}

pub fn rect(d: usize, lo_range: core::ops::Range<i64>, e: i32) -> impl Strategy<Value = Rect> {
    proptest::collection::vec(interval(lo_range, e), d).prop_map(|iv| Rect::from_intervals(&iv))
}

pub fn coef() -> impl Strategy<Value = RBig> {
    (-6i64..=6, 0u32..3).prop_filter("nonzero", |(n, _)| *n != 0).prop_map(|(n, s)| RBig::from_parts(n.into(), (1u64 << s).into()))
}

/// Random element of the test class with `1..=max_terms` terms.
pub fn simple(d: usize, lo_range: core::ops::Range<i64>, e: i32, max_terms: usize) -> impl Strategy<Value = SimpleFunction> {
    proptest::collection::vec((rect(d, lo_range, e), coef()), 1..=max_terms).prop_map(move |t| SimpleFunction::from_terms(d, t))
}
