//! Named inputs.

use dyadrep_core::{DyadicRational, Rect, SimpleFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Which argument of the form a preset is resolved for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    F,
    G,
}

pub const NAMES: [&str; 4] = ["hilbert-standard", "hilbert-meanzero", "d2-power", "zero"];

fn interval(a: i64, b: i64) -> SimpleFunction {
    SimpleFunction::indicator(Rect::from_ints(&[(a, b)]))
}

/// `hilbert-standard`: `1_[0,1)` and `1_[2,3)`; `hilbert-meanzero`: `1_[0,1) − 1_[1,2)` in both slots;
/// `d2-power`: the unit square and its translate by `(2, 0)`.
pub fn preset(name: &str, slot: Slot) -> Option<SimpleFunction> {
    match (name, slot) {
        ("hilbert-standard", Slot::F) => Some(interval(0, 1)),
        ("hilbert-standard", Slot::G) => Some(interval(2, 3)),
        ("hilbert-meanzero", _) => Some(interval(0, 1).sub(&interval(1, 2))),
        ("d2-power", Slot::F) => Some(SimpleFunction::indicator(Rect::from_ints(&[(0, 1), (0, 1)]))),
        ("d2-power", Slot::G) => Some(SimpleFunction::indicator(Rect::from_ints(&[(2, 3), (0, 1)]))),
        _ => None,
    }
}

/// Random input with dyadic endpoints; for `d ≥ 2` the two slots live in disjoint boxes.
pub fn random_function(seed: u64, instance: u64, slot: Slot, d: usize) -> SimpleFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((1u64 << 44) + 2 * instance + (slot == Slot::G) as u64);
    let mut next = |m: u32| rng.gen_range(0..m);
    let n_terms = 1 + next(3) as usize;
    let mut f = SimpleFunction::zero(d);
    for _ in 0..n_terms {
        let e = next(4) as i32;
        let scale = 1i64 << e;
        let mut iv = Vec::with_capacity(d);
        for axis in 0..d {
            let (lo, hi) = if d == 1 {
                let lo = next(8 * scale as u32) as i64 - 4 * scale;
                (lo, lo + 1 + next(4 * scale as u32) as i64)
            } else {
                let base = if axis == 0 && slot == Slot::G { 3 * scale } else { 0 };
                let lo = next(scale as u32) as i64;
                (base + lo, base + lo + 1 + next((scale - lo) as u32) as i64)
            };
            iv.push((DyadicRational::from_int_pow2(lo, -e), DyadicRational::from_int_pow2(hi, -e)));
        }
        let c = next(11) as i64 - 5;
        f.push(Rect::from_intervals(&iv), if c == 0 { 1.into() } else { c.into() });
    }
    f
}
