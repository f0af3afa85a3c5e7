//! The bilinear form τ on simple functions, its `T(1)` functionals and boundedness probes.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::dyadic::DyadicRational;
use crate::error::{Error, Result};
use crate::grid::{DyadicCube, ShiftSequence};
use crate::kernel::{Kernel, KernelKind};
use crate::rect::Rect;
use crate::simplefn::{d_op, rational_to_f64, SimpleFunction};
use crate::sum::Compensated;

/// Stop the far-field shells once the certified remainder is below this.
pub const FAR_FIELD_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct WeakForm {
    kernel: Kernel,
    /// Answer `τ(1, h) = τ(h, 1) = 0` directly for the Hilbert completion.
    fast_t1: bool,
}

/// Far-field bookkeeping of a `T(1)` evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FarField {
    pub value: f64,
    pub shells: usize,
    pub remainder_bound: f64,
}

impl WeakForm {
    pub fn new(kernel: Kernel) -> WeakForm {
        WeakForm { kernel, fast_t1: false }
    }

    /// Enable the `T(1) = 0` shortcut; only honoured for the Hilbert kernel.
    pub fn with_fast_t1(mut self, on: bool) -> WeakForm {
        self.fast_t1 = on && self.kernel.kind() == KernelKind::Hilbert;
        self
    }

    pub fn hilbert() -> WeakForm {
        WeakForm::new(Kernel::hilbert())
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn dim(&self) -> usize {
        self.kernel.dim()
    }

    pub fn fast_t1(&self) -> bool {
        self.fast_t1
    }

    fn check(&self, f: &SimpleFunction) -> Result<()> {
        if f.dim() != self.dim() {
            Err(Error::DimensionMismatch(f.dim(), self.dim()))
        } else {
            Ok(())
        }
    }

    /// `τ(f, g) = Σ c_i d_j τ(1_{R_i}, 1_{S_j})`.
    pub fn tau(&self, f: &SimpleFunction, g: &SimpleFunction) -> Result<f64> {
        self.check(f)?;
        self.check(g)?;
        let mut acc = Compensated::new();
        let gc: Vec<f64> = g.terms().iter().map(|(_, c)| rational_to_f64(c)).collect();
        for (r, c) in f.terms() {
            let cf = rational_to_f64(c);
            for ((s, _), dc) in g.terms().iter().zip(&gc) {
                let p = self.kernel.pairing(r, s)?;
                acc.add(cf * dc * p);
            }
        }
        Ok(acc.value())
    }

    /// `τ(1_R, g)`.
    pub fn tau_rect_left(&self, r: &Rect, g: &SimpleFunction) -> Result<f64> {
        let mut acc = Compensated::new();
        for (s, c) in g.terms() {
            acc.add(rational_to_f64(c) * self.kernel.pairing(r, s)?);
        }
        Ok(acc.value())
    }

    /// `τ(f, 1_S)`.
    pub fn tau_rect_right(&self, f: &SimpleFunction, s: &Rect) -> Result<f64> {
        let mut acc = Compensated::new();
        for (r, c) in f.terms() {
            acc.add(rational_to_f64(c) * self.kernel.pairing(r, s)?);
        }
        Ok(acc.value())
    }

    fn t1_checks(&self, h: &SimpleFunction, q: &Rect) -> Result<(Vec<DyadicRational>, DyadicRational)> {
        self.check(h)?;
        if q.dim() != self.dim() {
            return Err(Error::DimensionMismatch(q.dim(), self.dim()));
        }
        if !h.integral().is_zero() {
            return Err(Error::NonZeroMean);
        }
        let side = q.side(0);
        if (1..q.dim()).any(|j| q.side(j) != side) {
            return Err(Error::InvalidArgument("T(1) needs a cube".into()));
        }
        if !h.is_trivially_zero() && !q.contains_rect(&h.bbox()) {
            return Err(Error::InvalidArgument("cube does not contain the support".into()));
        }
        let half = side.scale_pow2(-1);
        let center = q.lo().iter().map(|l| l + &half).collect();
        Ok((center, side))
    }

    /// Far part `Σ_m τ(1_{B_{m+1} \ B_m}, h)` (or the adjoint) with `B_m` of side `3·2^m ℓ` around the centre.
    fn far_field(&self, h: &SimpleFunction, center: &[DyadicRational], side: &DyadicRational, left: bool) -> Result<FarField> {
        let d = self.dim();
        let l1 = rational_to_f64(&h.l1_norm());
        let ell = side.to_f64();
        let omega = self.kernel.modulus();
        let mut acc = Compensated::new();
        let three_half = &DyadicRational::from_int(3) * &side.scale_pow2(-1);
        let mut shells = 0usize;
        let mut m = 0i32;
        loop {
            let r_in = three_half.scale_pow2(m);
            let u = 0.5 * ell / r_in.to_f64();
            let bound = l1 * (d as f64) * libm::ldexp(1.0, d as i32) * omega.log_integral(u);
            if bound < FAR_FIELD_TOL || l1 == 0.0 {
                return Ok(FarField { value: acc.value(), shells, remainder_bound: bound });
            }
            if m > 200 {
                return Err(Error::QuadratureFailed { partial: acc.value() });
            }
            let r_out = r_in.scale_pow2(1);
            for slab in Rect::annulus(center, &r_in, &r_out) {
                let v = if left { self.tau_rect_right(h, &slab)? } else { self.tau_rect_left(&slab, h)? };
                acc.add(v);
            }
            shells += 1;
            m += 1;
        }
    }

    /// `τ(1, h)` for mean-zero `h` supported in the cube `q`.
    pub fn tau_one(&self, h: &SimpleFunction, q: &Rect) -> Result<f64> {
        Ok(self.tau_one_detail(h, q)?.0)
    }

    /// `τ(1, h)` with its far-field bookkeeping.
    pub fn tau_one_detail(&self, h: &SimpleFunction, q: &Rect) -> Result<(f64, FarField)> {
        let (center, side) = self.t1_checks(h, q)?;
        if self.fast_t1 {
            return Ok((0.0, FarField { value: 0.0, shells: 0, remainder_bound: 0.0 }));
        }
        let three_q = Rect::cube_around(&center, &(&DyadicRational::from_int(3) * &side.scale_pow2(-1)));
        let near = self.tau_rect_left(&three_q, h)?;
        let far = self.far_field(h, &center, &side, false)?;
        Ok((near + far.value, far))
    }

    /// `τ(h, 1)` for mean-zero `h` supported in the cube `q`.
    pub fn tau_one_left(&self, h: &SimpleFunction, q: &Rect) -> Result<f64> {
        let (center, side) = self.t1_checks(h, q)?;
        if self.fast_t1 {
            return Ok(0.0);
        }
        let three_q = Rect::cube_around(&center, &(&DyadicRational::from_int(3) * &side.scale_pow2(-1)));
        let near = self.tau_rect_right(h, &three_q)?;
        let far = self.far_field(h, &center, &side, true)?;
        Ok(near + far.value)
    }

    /// `Σ_{Q ∈ D_i} τ(D_P f, 1_Q)` accumulated over growing annuli of cubes around `P`.
    pub fn tau_d1(&self, f: &SimpleFunction, p: &DyadicCube) -> Result<f64> {
        let dp = d_op(f, p);
        if dp.is_trivially_zero() {
            return Ok(0.0);
        }
        let center = p.center();
        let side = p.side();
        let half = side.scale_pow2(-1);
        let mut acc = Compensated::new();
        acc.add(self.tau_rect_right(&dp, &p.rect())?);
        let l1 = rational_to_f64(&dp.l1_norm());
        let d = self.dim();
        let ell = side.to_f64();
        // annuli n in (2^{m-1}, 2^m]
        let mut n_prev: i64 = 0;
        let mut m = 0;
        loop {
            let n = 1i64 << m;
            let inner = &DyadicRational::from_int(2 * n_prev + 1) * &half;
            let outer = &DyadicRational::from_int(2 * n + 1) * &half;
            for slab in Rect::annulus(&center, &inner, &outer) {
                acc.add(self.tau_rect_right(&dp, &slab)?);
            }
            n_prev = n;
            m += 1;
            let r = (n as f64 + 0.5) * ell;
            let bound = l1 * d as f64 * libm::ldexp(1.0, d as i32) * self.kernel.modulus().log_integral(0.5 * ell / r);
            if bound < FAR_FIELD_TOL {
                return Ok(acc.value());
            }
            if m > 62 {
                return Err(Error::QuadratureFailed { partial: acc.value() });
            }
        }
    }

    /// `Σ_{|m_Q − m_P| ≤ radius} |τ(D_P f, 1_Q)|` cube by cube, with `‖D_P f‖_1`.
    pub fn tau_d1_abs(&self, f: &SimpleFunction, p: &DyadicCube, radius: i64) -> Result<(f64, f64)> {
        let dp = d_op(f, p);
        let l1 = rational_to_f64(&dp.l1_norm());
        if dp.is_trivially_zero() {
            return Ok((0.0, 0.0));
        }
        let d = self.dim();
        let theta: &Arc<ShiftSequence> = p.theta();
        let mut acc = Compensated::new();
        let mut off = alloc::vec![-radius; d];
        loop {
            let idx: Vec<i64> = p.index().iter().zip(&off).map(|(a, b)| a + b).collect();
            let q = DyadicCube::new(theta, p.gen(), idx)?;
            acc.add(libm::fabs(self.tau_rect_right(&dp, &q.rect())?));
            let mut t = d;
            loop {
                if t == 0 {
                    return Ok((acc.value(), l1));
                }
                t -= 1;
                if off[t] < radius {
                    off[t] += 1;
                    break;
                }
                off[t] = -radius;
            }
        }
    }

    /// `sup |τ(1_Q, 1_Q)| / |Q|`.
    pub fn wbp_probe(&self, cubes: &[Rect]) -> Result<f64> {
        let mut best = 0.0f64;
        for q in cubes {
            let v = self.kernel.pairing(q, q)?;
            best = best.max(libm::fabs(v) / q.measure().to_f64());
        }
        Ok(best)
    }

    /// `sup |τ(1_R, 1_S)| / |Q|` over `(R, S, Q)` with `R, S ⊆ Q`.
    pub fn swbp_probe(&self, samples: &[(Rect, Rect, Rect)]) -> Result<f64> {
        let mut best = 0.0f64;
        for (r, s, q) in samples {
            if !q.contains_rect(r) || !q.contains_rect(s) {
                return Err(Error::InvalidArgument("swbp sample rectangles must lie in the cube".into()));
            }
            let v = self.kernel.pairing(r, s)?;
            best = best.max(libm::fabs(v) / q.measure().to_f64());
        }
        Ok(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::cube;

    fn ind(a: i64, b: i64) -> SimpleFunction {
        SimpleFunction::indicator(Rect::from_ints(&[(a, b)]))
    }

    #[test]
    fn tau_examples() {
        let t = WeakForm::hilbert();
        let v = t.tau(&ind(0, 1), &ind(2, 3)).unwrap();
        assert!((v - (3.0 * libm::log(3.0) - 4.0 * core::f64::consts::LN_2)).abs() < 1e-15);
        assert_eq!(t.tau(&SimpleFunction::zero(1), &ind(2, 3)).unwrap(), 0.0);
        let split = ind(0, 1).split_terms();
        assert!((t.tau(&split, &ind(2, 3)).unwrap() - v).abs() < 1e-12);
    }

    #[test]
    fn hilbert_t1_vanishes_and_is_cube_independent() {
        let t = WeakForm::hilbert();
        let h = ind(0, 1).sub(&ind(1, 2));
        let a = t.tau_one(&h, &Rect::from_ints(&[(0, 2)])).unwrap();
        let b = t.tau_one(&h, &Rect::from_ints(&[(-2, 2)])).unwrap();
        let c = t.tau_one(&h, &Rect::from_ints(&[(-6, 10)])).unwrap();
        assert!(a.abs() < 1e-6 && b.abs() < 1e-6 && c.abs() < 1e-6, "{a} {b} {c}");
        let l = t.tau_one_left(&h, &Rect::from_ints(&[(0, 2)])).unwrap();
        assert!(l.abs() < 1e-6);
        assert_eq!(t.tau_one(&SimpleFunction::zero(1), &Rect::from_ints(&[(0, 2)])).unwrap(), 0.0);
        assert_eq!(t.tau_one(&ind(0, 1), &Rect::from_ints(&[(0, 2)])), Err(Error::NonZeroMean));
    }

    #[test]
    fn tau_d1_matches_left_t1() {
        let t = WeakForm::hilbert();
        let th = Arc::new(ShiftSequence::zero(1, -8, 8));
        let f = SimpleFunction::indicator(Rect::from_intervals(&[("1/4".parse().unwrap(), "5/8".parse().unwrap())]));
        let p = cube(&th, 0, alloc::vec![0]).unwrap();
        let a = t.tau_d1(&f, &p).unwrap();
        let b = t.tau_one_left(&d_op(&f, &p), &p.rect()).unwrap();
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }

    #[test]
    fn probes() {
        let t = WeakForm::hilbert();
        assert_eq!(t.wbp_probe(&[Rect::from_ints(&[(0, 1)]), Rect::from_ints(&[(-3, 5)])]).unwrap(), 0.0);
        let s = t.swbp_probe(&[(Rect::from_ints(&[(0, 1)]), Rect::from_ints(&[(1, 2)]), Rect::from_ints(&[(0, 2)]))]).unwrap();
        assert!((s - core::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(t.wbp_probe(&[]).unwrap(), 0.0);
    }
}
