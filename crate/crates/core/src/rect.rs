use alloc::vec::Vec;
use core::fmt;

use crate::dyadic::DyadicRational;

/// Axis-parallel half-open box `Π [lo_j, hi_j)`.
///
/// Any box with `lo_j >= hi_j` on some axis is stored in the canonical empty
/// form (all endpoints zero).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Rect {
    lo: Vec<DyadicRational>,
    hi: Vec<DyadicRational>,
}

impl Rect {
    pub fn new(lo: Vec<DyadicRational>, hi: Vec<DyadicRational>) -> Rect {
        assert_eq!(lo.len(), hi.len(), "rect endpoints differ in dimension");
        if lo.iter().zip(&hi).any(|(l, h)| l >= h) {
            return Rect::empty(lo.len());
        }
        Rect { lo, hi }
    }

    pub fn from_intervals(iv: &[(DyadicRational, DyadicRational)]) -> Rect {
        Rect::new(iv.iter().map(|p| p.0.clone()).collect(), iv.iter().map(|p| p.1.clone()).collect())
    }

    /// Integer box, convenient in tests.
    pub fn from_ints(iv: &[(i64, i64)]) -> Rect {
        Rect::new(
            iv.iter().map(|p| DyadicRational::from_int(p.0)).collect(),
            iv.iter().map(|p| DyadicRational::from_int(p.1)).collect(),
        )
    }

    pub fn empty(d: usize) -> Rect {
        Rect { lo: alloc::vec![DyadicRational::ZERO; d], hi: alloc::vec![DyadicRational::ZERO; d] }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[DyadicRational] {
        &self.lo
    }

    pub fn hi(&self) -> &[DyadicRational] {
        &self.hi
    }

    pub fn is_empty(&self) -> bool {
        self.lo.iter().zip(&self.hi).any(|(l, h)| l >= h)
    }

    pub fn side(&self, j: usize) -> DyadicRational {
        &self.hi[j] - &self.lo[j]
    }

    pub fn measure(&self) -> DyadicRational {
        if self.is_empty() {
            return DyadicRational::ZERO;
        }
        let mut m = DyadicRational::from_int(1);
        for j in 0..self.dim() {
            m = &m * &self.side(j);
        }
        m
    }

    pub fn intersect(&self, other: &Rect) -> Option<Rect> {
        debug_assert_eq!(self.dim(), other.dim());
        let mut lo = Vec::with_capacity(self.dim());
        let mut hi = Vec::with_capacity(self.dim());
        for j in 0..self.dim() {
            let l = self.lo[j].max_ref(&other.lo[j]);
            let h = self.hi[j].min_ref(&other.hi[j]);
            if l >= h {
                return None;
            }
            lo.push(l.clone());
            hi.push(h.clone());
        }
        Some(Rect { lo, hi })
    }

    /// `|self ∩ other|`, exact.
    pub fn overlap_measure(&self, other: &Rect) -> DyadicRational {
        let mut m = DyadicRational::from_int(1);
        for j in 0..self.dim() {
            let l = self.lo[j].max_ref(&other.lo[j]);
            let h = self.hi[j].min_ref(&other.hi[j]);
            if l >= h {
                return DyadicRational::ZERO;
            }
            m = &m * &(h - l);
        }
        m
    }

    pub fn overlaps(&self, other: &Rect) -> bool {
        (0..self.dim()).all(|j| self.lo[j].max_ref(&other.lo[j]) < self.hi[j].min_ref(&other.hi[j]))
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        (0..self.dim()).all(|j| self.lo[j] <= other.lo[j] && other.hi[j] <= self.hi[j])
    }

    /// Smallest box containing both.
    pub fn hull(&self, other: &Rect) -> Rect {
        if self.is_empty() {
            return other.clone();
        }
        if other.is_empty() {
            return self.clone();
        }
        Rect {
            lo: self.lo.iter().zip(&other.lo).map(|(a, b)| a.min(b).clone()).collect(),
            hi: self.hi.iter().zip(&other.hi).map(|(a, b)| a.max(b).clone()).collect(),
        }
    }

    /// Split along `axis` at `x`; parts that would be empty are dropped.
    pub fn split(&self, axis: usize, x: &DyadicRational) -> (Option<Rect>, Option<Rect>) {
        if x <= &self.lo[axis] {
            return (None, Some(self.clone()));
        }
        if x >= &self.hi[axis] {
            return (Some(self.clone()), None);
        }
        let mut left = self.clone();
        let mut right = self.clone();
        left.hi[axis] = x.clone();
        right.lo[axis] = x.clone();
        (Some(left), Some(right))
    }

    /// Cube `center + [−half, half)^d`.
    pub fn cube_around(center: &[DyadicRational], half: &DyadicRational) -> Rect {
        Rect::new(center.iter().map(|c| c - half).collect(), center.iter().map(|c| c + half).collect())
    }

    /// `cube_around(center, outer) \ cube_around(center, inner)` as at most `2d` disjoint slabs.
    pub fn annulus(center: &[DyadicRational], inner: &DyadicRational, outer: &DyadicRational) -> Vec<Rect> {
        let d = center.len();
        if inner.signum() <= 0 {
            let c = Rect::cube_around(center, outer);
            return if c.is_empty() { Vec::new() } else { alloc::vec![c] };
        }
        if inner >= outer {
            return Vec::new();
        }
        let mut out = Vec::with_capacity(2 * d);
        for t in 0..d {
            for side in [false, true] {
                let mut lo = Vec::with_capacity(d);
                let mut hi = Vec::with_capacity(d);
                for s in 0..d {
                    let c = &center[s];
                    if s < t {
                        lo.push(c - inner);
                        hi.push(c + inner);
                    } else if s == t {
                        if side {
                            lo.push(c + inner);
                            hi.push(c + outer);
                        } else {
                            lo.push(c - outer);
                            hi.push(c - inner);
                        }
                    } else {
                        lo.push(c - outer);
                        hi.push(c + outer);
                    }
                }
                out.push(Rect::new(lo, hi));
            }
        }
        out
    }

    pub fn to_f64(&self) -> (Vec<f64>, Vec<f64>) {
        (self.lo.iter().map(|x| x.to_f64()).collect(), self.hi.iter().map(|x| x.to_f64()).collect())
    }
}

impl fmt::Debug for Rect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "∅");
        }
        for j in 0..self.dim() {
            if j > 0 {
                write!(f, "×")?;
            }
            write!(f, "[{}, {})", self.lo[j], self.hi[j])?;
        }
        Ok(())
    }
}
