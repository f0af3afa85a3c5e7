//! Finite rational combinations of rectangle indicators, and the martingale
//! operators `E`, `D`, `F` acting on them exactly.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use dashu_int::IBig;
use dashu_ratio::RBig;

use crate::dyadic::DyadicRational;
use crate::error::{Error, Result};
use crate::grid::{same_system, DyadicCube, ShiftSequence};
pub use crate::rect::Rect;

pub fn dyadic_to_rational(x: &DyadicRational) -> RBig {
    x.to_rational()
}

pub fn rational_to_f64(x: &RBig) -> f64 {
    x.to_f64().value()
}

fn rat(n: i64) -> RBig {
    RBig::from(IBig::from(n))
}

/// `f = Σ c_i 1_{R_i}`.
#[derive(Clone)]
pub struct SimpleFunction {
    d: usize,
    terms: Vec<(Rect, RBig)>,
}

impl fmt::Debug for SimpleFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (r, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({})·1{:?}", c, r)?;
        }
        Ok(())
    }
}

/// Pieces of `E_gen 1_[lo,hi)` along one axis: `(interval, weight)`.
fn axis_pieces(
    theta: &ShiftSequence,
    lo: &DyadicRational,
    hi: &DyadicRational,
    gen: i32,
    axis: usize,
) -> Vec<(DyadicRational, DyadicRational, DyadicRational)> {
    let (m_lo, m_hi) = theta.index_range(lo, hi, gen, axis);
    let side = DyadicRational::pow2(-gen);
    let c_lo = theta.corner_axis(gen, m_lo, axis);
    if m_lo == m_hi {
        let w = (hi - lo).scale_pow2(gen);
        return alloc::vec![(c_lo.clone(), &c_lo + &side, w)];
    }
    let c_hi = theta.corner_axis(gen, m_hi, axis);
    let one = DyadicRational::from_int(1);
    let first_end = &c_lo + &side;
    let w_first = (&first_end - lo).scale_pow2(gen);
    let last_end = &c_hi + &side;
    let w_last = (hi - &c_hi).scale_pow2(gen);
    let mut out = Vec::with_capacity(3);
    let mut mid_lo = first_end.clone();
    if w_first == one {
        mid_lo = c_lo.clone();
    } else {
        out.push((c_lo, first_end, w_first));
    }
    let mid_hi = if w_last == one { last_end.clone() } else { c_hi.clone() };
    if mid_lo < mid_hi {
        out.push((mid_lo, mid_hi, one));
    }
    if w_last != DyadicRational::from_int(1) {
        out.push((c_hi, last_end, w_last));
    }
    out
}

impl SimpleFunction {
    pub fn zero(d: usize) -> SimpleFunction {
        SimpleFunction { d, terms: Vec::new() }
    }

    pub fn indicator(r: Rect) -> SimpleFunction {
        let d = r.dim();
        SimpleFunction::from_terms(d, alloc::vec![(r, rat(1))])
    }

    /// Drops empty rectangles and zero coefficients.
    pub fn from_terms(d: usize, terms: Vec<(Rect, RBig)>) -> SimpleFunction {
        let terms = terms.into_iter().filter(|(r, c)| !r.is_empty() && !c.is_zero()).collect::<Vec<_>>();
        for (r, _) in &terms {
            assert_eq!(r.dim(), d, "term dimension differs from function dimension");
        }
        SimpleFunction { d, terms }
    }

    pub fn try_from_terms(d: usize, terms: Vec<(Rect, RBig)>) -> Result<SimpleFunction> {
        if let Some((r, _)) = terms.iter().find(|(r, _)| r.dim() != d) {
            return Err(Error::DimensionMismatch(r.dim(), d));
        }
        Ok(Self::from_terms(d, terms))
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn terms(&self) -> &[(Rect, RBig)] {
        &self.terms
    }

    pub fn is_trivially_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn check_dim(&self, other: &SimpleFunction) -> Result<()> {
        if self.d != other.d {
            Err(Error::DimensionMismatch(self.d, other.d))
        } else {
            Ok(())
        }
    }

    pub fn scale(&self, c: &RBig) -> SimpleFunction {
        if c.is_zero() {
            return SimpleFunction::zero(self.d);
        }
        SimpleFunction { d: self.d, terms: self.terms.iter().map(|(r, x)| (r.clone(), x * c)).collect() }
    }

    pub fn neg(&self) -> SimpleFunction {
        SimpleFunction { d: self.d, terms: self.terms.iter().map(|(r, x)| (r.clone(), -x)).collect() }
    }

    pub fn add(&self, other: &SimpleFunction) -> SimpleFunction {
        assert_eq!(self.d, other.d, "dimension mismatch");
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        SimpleFunction { d: self.d, terms }
    }

    pub fn sub(&self, other: &SimpleFunction) -> SimpleFunction {
        assert_eq!(self.d, other.d, "dimension mismatch");
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().map(|(r, c)| (r.clone(), -c)));
        SimpleFunction { d: self.d, terms }
    }

    pub fn push(&mut self, r: Rect, c: RBig) {
        if !r.is_empty() && !c.is_zero() {
            self.terms.push((r, c));
        }
    }

    /// Smallest box containing every term; empty for the zero function.
    pub fn bbox(&self) -> Rect {
        self.terms.iter().fold(Rect::empty(self.d), |b, (r, _)| b.hull(r))
    }

    pub fn integral(&self) -> RBig {
        self.terms.iter().fold(rat(0), |s, (r, c)| s + c * r.measure().to_rational())
    }

    /// `∫ f g`, by inclusion over term pairs.
    pub fn pairing(&self, other: &SimpleFunction) -> Result<RBig> {
        self.check_dim(other)?;
        let mut s = rat(0);
        for (r, c) in &self.terms {
            for (q, e) in &other.terms {
                let m = r.overlap_measure(q);
                if !m.is_zero() {
                    s += c * e * m.to_rational();
                }
            }
        }
        Ok(s)
    }

    /// `∫_R f`.
    pub fn integral_over(&self, rect: &Rect) -> RBig {
        let mut s = rat(0);
        for (r, c) in &self.terms {
            let m = r.overlap_measure(rect);
            if !m.is_zero() {
                s += c * m.to_rational();
            }
        }
        s
    }

    /// `f · 1_R`.
    pub fn restrict(&self, rect: &Rect) -> SimpleFunction {
        let terms = self.terms.iter().filter_map(|(r, c)| r.intersect(rect).map(|x| (x, c.clone()))).collect();
        SimpleFunction { d: self.d, terms }
    }

    /// `f · Σ_t 1_{R_t}` for pairwise disjoint `R_t`.
    pub fn restrict_many(&self, rects: &[Rect]) -> SimpleFunction {
        let mut terms = Vec::new();
        for rect in rects {
            for (r, c) in &self.terms {
                if let Some(x) = r.intersect(rect) {
                    terms.push((x, c.clone()));
                }
            }
        }
        SimpleFunction { d: self.d, terms }
    }

    /// Values on the cells of the common refinement grid; only nonzero cells are kept.
    pub fn normalize(&self) -> SimpleFunction {
        let d = self.d;
        if self.terms.is_empty() {
            return self.clone();
        }
        let mut cuts: Vec<Vec<DyadicRational>> = alloc::vec![Vec::new(); d];
        for (r, _) in &self.terms {
            for (t, cut) in cuts.iter_mut().enumerate() {
                cut.push(r.lo()[t].clone());
                cut.push(r.hi()[t].clone());
            }
        }
        for c in cuts.iter_mut() {
            c.sort();
            c.dedup();
        }
        let dims: Vec<usize> = cuts.iter().map(|c| c.len() - 1).collect();
        let total: usize = dims.iter().product();
        let mut vals: Vec<RBig> = alloc::vec![rat(0); total];
        for (r, c) in &self.terms {
            let ranges: Vec<(usize, usize)> = (0..d)
                .map(|t| {
                    let a = cuts[t].binary_search(&r.lo()[t]).expect("cut present");
                    let b = cuts[t].binary_search(&r.hi()[t]).expect("cut present");
                    (a, b)
                })
                .collect();
            let mut idx: Vec<usize> = ranges.iter().map(|x| x.0).collect();
            'cells: loop {
                let mut flat = 0;
                for t in 0..d {
                    flat = flat * dims[t] + idx[t];
                }
                vals[flat] += c;
                let mut t = d;
                loop {
                    if t == 0 {
                        break 'cells;
                    }
                    t -= 1;
                    idx[t] += 1;
                    if idx[t] < ranges[t].1 {
                        break;
                    }
                    idx[t] = ranges[t].0;
                }
            }
        }
        let mut terms = Vec::new();
        for (flat, v) in vals.into_iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            let mut rem = flat;
            let mut cell = alloc::vec![0usize; d];
            for t in (0..d).rev() {
                cell[t] = rem % dims[t];
                rem /= dims[t];
            }
            let lo = (0..d).map(|t| cuts[t][cell[t]].clone()).collect();
            let hi = (0..d).map(|t| cuts[t][cell[t] + 1].clone()).collect();
            terms.push((Rect::new(lo, hi), v));
        }
        SimpleFunction { d, terms }
    }

    /// Equality as functions (almost everywhere).
    pub fn equals(&self, other: &SimpleFunction) -> bool {
        self.d == other.d && self.sub(other).normalize().terms.is_empty()
    }

    pub fn is_zero_fn(&self) -> bool {
        self.normalize().terms.is_empty()
    }

    pub fn abs(&self) -> SimpleFunction {
        let n = self.normalize();
        SimpleFunction { d: n.d, terms: n.terms.into_iter().map(|(r, c)| (r, if c < rat(0) { -c } else { c })).collect() }
    }

    pub fn l1_norm(&self) -> RBig {
        self.normalize().terms.iter().fold(rat(0), |s, (r, c)| {
            let a = if c < &rat(0) { -c } else { c.clone() };
            s + a * r.measure().to_rational()
        })
    }

    pub fn l2_norm_f64(&self) -> f64 {
        let n = self.normalize();
        let s = n.terms.iter().fold(rat(0), |s, (r, c)| s + c * c * r.measure().to_rational());
        libm::sqrt(rational_to_f64(&s))
    }

    /// Terms as floating point `(lo, hi, coeff)`.
    pub fn terms_f64(&self) -> Vec<(Vec<f64>, Vec<f64>, f64)> {
        self.terms
            .iter()
            .map(|(r, c)| {
                let (lo, hi) = r.to_f64();
                (lo, hi, rational_to_f64(c))
            })
            .collect()
    }

    /// Split every term in two halves along axis 0; same function, new representation.
    pub fn split_terms(&self) -> SimpleFunction {
        let mut terms = Vec::new();
        for (r, c) in &self.terms {
            let mid = (&r.lo()[0] + &r.hi()[0]).scale_pow2(-1);
            let (a, b) = r.split(0, &mid);
            for p in [a, b].into_iter().flatten() {
                terms.push((p, c.clone()));
            }
        }
        SimpleFunction { d: self.d, terms }
    }
}

/// `⟨f⟩_Q`.
pub fn average(f: &SimpleFunction, q: &DyadicCube) -> RBig {
    average_rect(f, &q.rect(), q.gen())
}

fn average_rect(f: &SimpleFunction, rect: &Rect, gen: i32) -> RBig {
    let s = f.integral_over(rect);
    if s.is_zero() {
        return s;
    }
    s * DyadicRational::pow2(gen * f.dim() as i32).to_rational()
}

/// `E_gen f = Σ_{Q ∈ D_gen} ⟨f⟩_Q 1_Q`, built per term as a tensor product of axis pieces.
pub fn e_op(f: &SimpleFunction, gen: i32, theta: &ShiftSequence) -> SimpleFunction {
    let d = f.dim();
    let mut out = SimpleFunction::zero(d);
    for (r, c) in f.terms() {
        let pieces: Vec<_> = (0..d).map(|t| axis_pieces(theta, &r.lo()[t], &r.hi()[t], gen, t)).collect();
        let mut idx = alloc::vec![0usize; d];
        'tensor: loop {
            let mut w = DyadicRational::from_int(1);
            let mut lo = Vec::with_capacity(d);
            let mut hi = Vec::with_capacity(d);
            for t in 0..d {
                let p = &pieces[t][idx[t]];
                lo.push(p.0.clone());
                hi.push(p.1.clone());
                w = &w * &p.2;
            }
            out.push(Rect::new(lo, hi), c * w.to_rational());
            let mut t = d;
            loop {
                if t == 0 {
                    break 'tensor;
                }
                t -= 1;
                idx[t] += 1;
                if idx[t] < pieces[t].len() {
                    break;
                }
                idx[t] = 0;
            }
        }
    }
    out
}

/// `F_gen f = f − E_gen f`.
pub fn f_op(f: &SimpleFunction, gen: i32, theta: &ShiftSequence) -> SimpleFunction {
    f.sub(&e_op(f, gen, theta))
}

/// `D_gen f = E_{gen+1} f − E_gen f`.
pub fn d_gen(f: &SimpleFunction, gen: i32, theta: &ShiftSequence) -> SimpleFunction {
    e_op(f, gen + 1, theta).sub(&e_op(f, gen, theta))
}

/// `D_P f = Σ_{P' child} ⟨f⟩_{P'} 1_{P'} − ⟨f⟩_P 1_P`.
pub fn d_op(f: &SimpleFunction, p: &DyadicCube) -> SimpleFunction {
    let mut out = SimpleFunction::zero(f.dim());
    let local = f.restrict(&p.rect());
    if local.terms().is_empty() {
        return out;
    }
    let parent = average(&local, p);
    for c in p.children() {
        let a = average(&local, &c);
        let diff = a - &parent;
        out.push(c.rect(), diff);
    }
    out
}

/// `D_{P,Q} f = (⟨f⟩_P − ⟨f⟩_Q) 1_P`.
pub fn d_pq(f: &SimpleFunction, p: &DyadicCube, q: &DyadicCube) -> Result<SimpleFunction> {
    if p.gen() != q.gen() {
        return Err(Error::GenerationMismatch(p.gen(), q.gen()));
    }
    if !same_system(p.theta(), q.theta()) {
        return Err(Error::SystemMismatch);
    }
    let mut out = SimpleFunction::zero(f.dim());
    out.push(p.rect(), average(f, p) - average(f, q));
    Ok(out)
}

/// `E_S^(k) f = Σ_{P^(k) = S} E_P f`.
pub fn e_block(f: &SimpleFunction, s: &DyadicCube, k: i32) -> SimpleFunction {
    e_op(&f.restrict(&s.rect()), s.gen() + k, s.theta())
}

/// `D_S^(k) f = Σ_{P^(k) = S} D_P f`.
pub fn d_block(f: &SimpleFunction, s: &DyadicCube, k: i32) -> SimpleFunction {
    d_gen(&f.restrict(&s.rect()), s.gen() + k, s.theta())
}

/// `D_S^[0,k) f = E_S^(k) f − E_S f`.
pub fn d_block_range(f: &SimpleFunction, s: &DyadicCube, k: i32) -> SimpleFunction {
    let local = f.restrict(&s.rect());
    if k == 0 {
        return SimpleFunction::zero(f.dim());
    }
    e_op(&local, s.gen() + k, s.theta()).sub(&e_op(&local, s.gen(), s.theta()))
}

/// Cubes of generation `gen` where `D_Q f` can be nonzero.
///
/// A cube contained in a term's rectangle, or disjoint from it, sees that term
/// as a constant; only cubes cut by some face remain.
pub fn active_cubes(f: &SimpleFunction, gen: i32, theta: &Arc<ShiftSequence>) -> Vec<DyadicCube> {
    let d = f.dim();
    let mut idx: Vec<Vec<i64>> = Vec::new();
    for (r, _) in f.terms() {
        let ranges: Vec<(i64, i64)> = (0..d).map(|t| theta.index_range(&r.lo()[t], &r.hi()[t], gen, t)).collect();
        for t in 0..d {
            let (a, b) = ranges[t];
            let mut cut = Vec::with_capacity(2);
            if theta.corner_axis(gen, a, t) < r.lo()[t] {
                cut.push(a);
            }
            if theta.corner_axis(gen, b + 1, t) > r.hi()[t] && (cut.is_empty() || b != a) {
                cut.push(b);
            }
            for &m in &cut {
                let mut cur: Vec<i64> = ranges.iter().map(|x| x.0).collect();
                cur[t] = m;
                'layer: loop {
                    idx.push(cur.clone());
                    let mut s = d;
                    loop {
                        if s == 0 {
                            break 'layer;
                        }
                        s -= 1;
                        if s == t {
                            continue;
                        }
                        if cur[s] < ranges[s].1 {
                            cur[s] += 1;
                            break;
                        }
                        cur[s] = ranges[s].0;
                    }
                }
            }
        }
    }
    idx.sort();
    idx.dedup();
    idx.into_iter().map(|m| DyadicCube::raw(theta, gen, m)).collect()
}
