//! Shifted dyadic systems: cubes, parents, children, goodness and sampling of the shift.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::dyadic::DyadicRational;
use crate::error::{Error, Result};
use crate::rect::Rect;

/// Shift bits `θ_j ∈ {0,1}^d` on a finite scale window `[j_lo, j_hi]`; zero outside.
///
/// Bit `t` of `bits[j - j_lo]` is the `t`-th coordinate of `θ_j`.
#[derive(Clone, PartialEq, Eq)]
pub struct ShiftSequence {
    d: usize,
    j_lo: i32,
    j_hi: i32,
    bits: Vec<u32>,
    // offsets[g - (j_lo - 1)] = Σ_{g < j <= j_hi} 2^-j θ_j
    offsets: Vec<Vec<DyadicRational>>,
}

/// First 32-bit word used for scale index `j` in a sampling stream.
const WORD_BIAS: i64 = 1 << 32;

impl ShiftSequence {
    pub fn from_bits(d: usize, j_lo: i32, bits: Vec<u32>) -> Result<ShiftSequence> {
        if d == 0 || d > 32 {
            return Err(Error::InvalidArgument(alloc::format!("dimension {d} not in 1..=32")));
        }
        if bits.is_empty() {
            return Err(Error::InvalidArgument("empty shift window".into()));
        }
        let mask = if d == 32 { u32::MAX } else { (1u32 << d) - 1 };
        if bits.iter().any(|b| b & !mask != 0) {
            return Err(Error::InvalidArgument("shift bit vector outside {0,1}^d".into()));
        }
        let j_hi = j_lo + bits.len() as i32 - 1;
        let n = bits.len() + 1;
        let mut offsets = alloc::vec![alloc::vec![DyadicRational::ZERO; d]; n];
        // walk from the finest generation upwards
        for idx in (0..n - 1).rev() {
            let j = j_lo + idx as i32;
            let step = DyadicRational::pow2(-j);
            let mut o = offsets[idx + 1].clone();
            for (t, ot) in o.iter_mut().enumerate() {
                if bits[idx] >> t & 1 == 1 {
                    *ot = &*ot + &step;
                }
            }
            offsets[idx] = o;
        }
        Ok(ShiftSequence { d, j_lo, j_hi, bits, offsets })
    }

    /// θ ≡ 0 on `[j_lo, j_hi]`.
    pub fn zero(d: usize, j_lo: i32, j_hi: i32) -> ShiftSequence {
        assert!(j_lo <= j_hi);
        ShiftSequence::from_bits(d, j_lo, alloc::vec![0; (j_hi - j_lo + 1) as usize]).expect("valid zero shift")
    }

    /// Set individual bits, `(j, θ_j)` pairs, everything else zero.
    pub fn with_bits(d: usize, j_lo: i32, j_hi: i32, set: &[(i32, u32)]) -> Result<ShiftSequence> {
        let mut bits = alloc::vec![0u32; (j_hi - j_lo + 1) as usize];
        for &(j, b) in set {
            if j < j_lo || j > j_hi {
                return Err(Error::InvalidArgument(alloc::format!("scale {j} outside window")));
            }
            bits[(j - j_lo) as usize] = b;
        }
        ShiftSequence::from_bits(d, j_lo, bits)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn window(&self) -> (i32, i32) {
        (self.j_lo, self.j_hi)
    }

    /// `θ_j` as a bit mask, zero outside the window.
    pub fn bits_at(&self, j: i32) -> u32 {
        if j < self.j_lo || j > self.j_hi {
            0
        } else {
            self.bits[(j - self.j_lo) as usize]
        }
    }

    pub fn bit(&self, j: i32, axis: usize) -> i64 {
        (self.bits_at(j) >> axis & 1) as i64
    }

    /// `Σ_{j > gen} 2^-j θ_j` on one axis.
    pub fn offset_axis(&self, gen: i32, axis: usize) -> DyadicRational {
        if gen >= self.j_hi {
            return DyadicRational::ZERO;
        }
        let g = gen.max(self.j_lo - 1);
        self.offsets[(g - (self.j_lo - 1)) as usize][axis].clone()
    }

    pub(crate) fn offset_ref(&self, gen: i32) -> Option<&[DyadicRational]> {
        if gen >= self.j_hi {
            return None;
        }
        let g = gen.max(self.j_lo - 1);
        Some(&self.offsets[(g - (self.j_lo - 1)) as usize])
    }

    pub fn check_gen(&self, gen: i32) -> Result<()> {
        if gen < self.j_lo - 1 {
            Err(Error::WindowExhausted { gen, lo: self.j_lo })
        } else {
            Ok(())
        }
    }

    /// Index along `axis` of the generation-`gen` cube containing `x`.
    pub fn index_of(&self, x: &DyadicRational, gen: i32, axis: usize) -> i64 {
        match self.offset_ref(gen) {
            None => x.floor_scaled_i64(gen),
            Some(o) => (x - &o[axis]).floor_scaled_i64(gen),
        }
    }

    /// Lower corner along `axis` of the cube with integer coordinate `m`.
    pub fn corner_axis(&self, gen: i32, m: i64, axis: usize) -> DyadicRational {
        let c = DyadicRational::from_int_pow2(m, -gen);
        match self.offset_ref(gen) {
            None => c,
            Some(o) => &c + &o[axis],
        }
    }

    /// Inclusive index range of generation-`gen` cubes meeting `[lo, hi)` in positive length.
    pub fn index_range(&self, lo: &DyadicRational, hi: &DyadicRational, gen: i32, axis: usize) -> (i64, i64) {
        let m_lo = self.index_of(lo, gen, axis);
        let hi_shift = match self.offset_ref(gen) {
            None => hi.clone(),
            Some(o) => hi - &o[axis],
        };
        let m_hi = -(-hi_shift).floor_scaled_i64(gen) - 1;
        (m_lo, m_hi)
    }
}

impl fmt::Debug for ShiftSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "θ[d={}, {}..={}]:", self.d, self.j_lo, self.j_hi)?;
        for (i, b) in self.bits.iter().enumerate() {
            if *b != 0 {
                write!(f, " {}:{:b}", self.j_lo + i as i32, b)?;
            }
        }
        Ok(())
    }
}

/// Offset point `Σ_{j > gen, j <= j_hi} 2^-j θ_j`.
pub fn shift_offset(theta: &ShiftSequence, gen: i32) -> Vec<DyadicRational> {
    (0..theta.dim()).map(|t| theta.offset_axis(gen, t)).collect()
}

/// Draw θ with independent uniform bits from `seed`.
pub fn sample_theta(seed: u64, d: usize, window: (i32, i32)) -> ShiftSequence {
    sample_theta_stream(seed, 0, d, window)
}

/// Counter-based draw: `θ_j` depends only on `(seed, stream, j)`, never on the window.
pub fn sample_theta_stream(seed: u64, stream: u64, d: usize, window: (i32, i32)) -> ShiftSequence {
    let (j_lo, j_hi) = window;
    assert!(j_lo <= j_hi, "empty window");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mask = if d >= 32 { u32::MAX } else { (1u32 << d) - 1 };
    let bits = (j_lo..=j_hi)
        .map(|j| {
            rng.set_word_pos((j as i64 + WORD_BIAS) as u128);
            rng.next_u32() & mask
        })
        .collect();
    ShiftSequence::from_bits(d, j_lo, bits).expect("sampled bits are valid")
}

/// A cube `2^-gen (m + [0,1)^d) + offset(gen)` of a shifted system.
#[derive(Clone)]
pub struct DyadicCube {
    theta: Arc<ShiftSequence>,
    gen: i32,
    index: Vec<i64>,
    corner: Vec<DyadicRational>,
}

impl PartialEq for DyadicCube {
    fn eq(&self, other: &Self) -> bool {
        self.gen == other.gen && self.index == other.index && same_system(&self.theta, &other.theta)
    }
}

impl Eq for DyadicCube {}

pub fn same_system(a: &Arc<ShiftSequence>, b: &Arc<ShiftSequence>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl fmt::Debug for DyadicCube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q(gen {}, m {:?}, {:?})", self.gen, self.index, self.rect())
    }
}

impl DyadicCube {
    pub fn new(theta: &Arc<ShiftSequence>, gen: i32, index: Vec<i64>) -> Result<DyadicCube> {
        if index.len() != theta.dim() {
            return Err(Error::DimensionMismatch(index.len(), theta.dim()));
        }
        theta.check_gen(gen)?;
        Ok(Self::raw(theta, gen, index))
    }

    pub(crate) fn raw(theta: &Arc<ShiftSequence>, gen: i32, index: Vec<i64>) -> DyadicCube {
        let corner = index.iter().enumerate().map(|(t, &m)| theta.corner_axis(gen, m, t)).collect();
        DyadicCube { theta: theta.clone(), gen, index, corner }
    }

    pub fn theta(&self) -> &Arc<ShiftSequence> {
        &self.theta
    }

    pub fn dim(&self) -> usize {
        self.index.len()
    }

    pub fn gen(&self) -> i32 {
        self.gen
    }

    pub fn index(&self) -> &[i64] {
        &self.index
    }

    pub fn corner(&self) -> &[DyadicRational] {
        &self.corner
    }

    pub fn side(&self) -> DyadicRational {
        DyadicRational::pow2(-self.gen)
    }

    pub fn measure(&self) -> DyadicRational {
        DyadicRational::pow2(-self.gen * self.dim() as i32)
    }

    pub fn center(&self) -> Vec<DyadicRational> {
        let h = DyadicRational::pow2(-self.gen - 1);
        self.corner.iter().map(|c| c + &h).collect()
    }

    pub fn rect(&self) -> Rect {
        let s = self.side();
        Rect::new(self.corner.clone(), self.corner.iter().map(|c| c + &s).collect())
    }

    /// The `2^d` children, index order with axis 0 varying slowest.
    pub fn children(&self) -> Vec<DyadicCube> {
        let d = self.dim();
        let base: Vec<i64> = (0..d).map(|t| 2 * self.index[t] + self.theta.bit(self.gen + 1, t)).collect();
        (0..1u32 << d)
            .map(|e| {
                let idx = (0..d).map(|t| base[t] + (e >> (d - 1 - t) & 1) as i64).collect();
                DyadicCube::raw(&self.theta, self.gen + 1, idx)
            })
            .collect()
    }

    pub fn parent(&self) -> Result<DyadicCube> {
        self.ancestor(1)
    }

    pub fn ancestor(&self, k: i32) -> Result<DyadicCube> {
        if k < 0 {
            return Err(Error::InvalidArgument(alloc::format!("negative ancestor depth {k}")));
        }
        self.theta.check_gen(self.gen - k)?;
        let mut idx = self.index.clone();
        for g in ((self.gen - k + 1)..=self.gen).rev() {
            for (t, m) in idx.iter_mut().enumerate() {
                *m = (*m - self.theta.bit(g, t)).div_euclid(2);
            }
        }
        Ok(DyadicCube::raw(&self.theta, self.gen - k, idx))
    }

    /// Position of `self` inside its `k`-th ancestor, in units of `ℓ(self)`, per axis.
    pub fn position_in_ancestor(&self, k: i32) -> Result<Vec<i64>> {
        self.theta.check_gen(self.gen - k)?;
        let mut idx = self.index.clone();
        let mut pos = alloc::vec![0i64; self.dim()];
        for (level, g) in ((self.gen - k + 1)..=self.gen).rev().enumerate() {
            for t in 0..self.dim() {
                let v = idx[t] - self.theta.bit(g, t);
                let p = v.div_euclid(2);
                pos[t] += (v - 2 * p) << level;
                idx[t] = p;
            }
        }
        Ok(pos)
    }

    /// `self ⊂ ½ Q^(k)`.
    pub fn is_good(&self, k: i32) -> Result<bool> {
        if k < 2 {
            return Err(Error::InvalidGoodnessDepth(k));
        }
        let pos = self.position_in_ancestor(k)?;
        let quarter = 1i64 << (k - 2);
        Ok(pos.iter().all(|&t| t >= quarter && t < 3 * quarter))
    }

    pub fn contains(&self, other: &DyadicCube) -> bool {
        other.gen >= self.gen && self.rect().contains_rect(&other.rect())
    }
}

pub fn cube(theta: &Arc<ShiftSequence>, gen: i32, index: Vec<i64>) -> Result<DyadicCube> {
    DyadicCube::new(theta, gen, index)
}

/// Generation-`gen` cubes meeting `rect` in positive measure, lexicographic by index.
pub fn cubes_meeting(rect: &Rect, gen: i32, theta: &Arc<ShiftSequence>) -> Vec<DyadicCube> {
    if rect.is_empty() {
        return Vec::new();
    }
    let d = rect.dim();
    let ranges: Vec<(i64, i64)> = (0..d).map(|t| theta.index_range(&rect.lo()[t], &rect.hi()[t], gen, t)).collect();
    let mut out = Vec::new();
    let mut idx: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    loop {
        out.push(DyadicCube::raw(theta, gen, idx.clone()));
        let mut t = d;
        loop {
            if t == 0 {
                return out;
            }
            t -= 1;
            if idx[t] < ranges[t].1 {
                idx[t] += 1;
                break;
            }
            idx[t] = ranges[t].0;
        }
    }
}
