//! Calderón–Zygmund kernels, moduli of continuity, Dini norms and rectangle pairings.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::quad::{graded_breaks, integrate, Tolerance};
use crate::rect::Rect;

/// Modulus of continuity `ω : [0, 1/2] → [0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Modulus {
    Zero,
    /// `c · t^δ`
    Power { c: f64, delta: f64 },
    /// `c · (log 1/t)^-α`
    Log { c: f64, alpha: f64 },
}

impl Modulus {
    pub fn power(delta: f64) -> Modulus {
        Modulus::Power { c: 1.0, delta }
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match *self {
            Modulus::Zero => 0.0,
            Modulus::Power { c, delta } => c * libm::pow(t, delta),
            Modulus::Log { c, alpha } => {
                let l = -libm::log(t);
                if l <= 0.0 {
                    f64::INFINITY
                } else {
                    c * libm::pow(l, -alpha)
                }
            }
        }
    }

    /// `∫_0^u ω(v) dv / v`, closed form.
    pub fn log_integral(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        match *self {
            Modulus::Zero => 0.0,
            Modulus::Power { c, delta } => c * libm::pow(u, delta) / delta,
            Modulus::Log { c, alpha } => {
                if alpha <= 1.0 {
                    f64::INFINITY
                } else {
                    c * libm::pow(-libm::log(u), 1.0 - alpha) / (alpha - 1.0)
                }
            }
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            Modulus::Zero => "zero".into(),
            Modulus::Power { c, delta } => alloc::format!("power:{delta}:{c}"),
            Modulus::Log { c, alpha } => alloc::format!("log:{alpha}:{c}"),
        }
    }

    /// Parses `zero`, `power:δ[:c]`, `log:α[:c]`.
    pub fn parse(s: &str) -> Result<Modulus> {
        let bad = || Error::Parse(alloc::format!("bad modulus {s:?}"));
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |i: usize, default: f64| -> Result<f64> {
            match parts.get(i) {
                None => Ok(default),
                Some(x) => x.trim().parse::<f64>().map_err(|_| bad()),
            }
        };
        let m = match parts[0] {
            "zero" if parts.len() == 1 => Modulus::Zero,
            "power" if (2..=3).contains(&parts.len()) => Modulus::Power { c: num(2, 1.0)?, delta: num(1, 0.0)? },
            "log" if (2..=3).contains(&parts.len()) => Modulus::Log { c: num(2, 1.0)?, alpha: num(1, 0.0)? },
            _ => return Err(bad()),
        };
        match m {
            Modulus::Power { c, delta } if !(c >= 0.0 && delta > 0.0) => Err(bad()),
            Modulus::Log { c, alpha } if !(c >= 0.0 && alpha > 0.0) => Err(bad()),
            _ => Ok(m),
        }
    }
}

/// `‖ω‖_{Dini^s} = ∫_0^{1/2} ω(u) (log 1/u)^s du/u`.
///
/// Substituting `u = e^-t` and `t = ln 2 + x/(1-x)` maps the integral to `[0, 1)`.
pub fn dini_norm(modulus: &Modulus, s: f64) -> Result<f64> {
    if let Modulus::Zero = modulus {
        return Ok(0.0);
    }
    let ln2 = core::f64::consts::LN_2;
    let integrand = |x: f64| {
        let one_minus = 1.0 - x;
        let t = ln2 + x / one_minus;
        let v = modulus.eval(libm::exp(-t)) * libm::pow(t, s) / (one_minus * one_minus);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let tol = Tolerance { abs: 1e-12, rel: 1e-13, max_panels: 20000 };
    let r = integrate(integrand, 0.0, 1.0, &graded_breaks(0.0, 1.0, 1.0, 40), tol);
    if r.converged && r.error <= 1e-10 {
        Ok(r.value)
    } else {
        Err(Error::QuadratureFailed { partial: r.value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    /// `1/(x − y)` on the line.
    Hilbert,
    /// `k(x − y)` with `k(u) = u_1 / |u|_∞^{d+1}`.
    Power,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    kind: KernelKind,
    d: usize,
    c_k: f64,
    modulus: Modulus,
    overlap_rule: bool,
}

/// `log1p(w) − w` without cancellation for small `w`.
fn log1p_minus(w: f64) -> f64 {
    if libm::fabs(w) < 0.125 {
        let mut term = -w * w / 2.0;
        let mut s = term;
        let mut n = 2.0;
        loop {
            term *= -w * n / (n + 1.0);
            n += 1.0;
            s += term;
            if libm::fabs(term) <= 1e-18 * libm::fabs(s) {
                return s;
            }
        }
    }
    libm::log1p(w) - w
}

/// `G(u) = u ln|u| − u`, `G(0) = 0`.
pub fn hilbert_g(u: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        u * libm::log(libm::fabs(u)) - u
    }
}

/// `∫_S ∫_R dy dx / (x − y)` for `S` to the right of `R` at gap `gap`, lengths `a`, `b`.
pub fn hilbert_separated(gap: f64, a: f64, b: f64) -> f64 {
    let (s, l) = if a <= b { (a, b) } else { (b, a) };
    if gap == 0.0 {
        return s * libm::log1p(l / s) + l * libm::log1p(s / l);
    }
    if gap >= s {
        let x = l / gap;
        let y = s / gap;
        let t = (1.0 + x) * log1p_minus(y / (1.0 + x)) + y * libm::log1p(x + y) - (1.0 + y) * log1p_minus(y) - y * y;
        return gap * t;
    }
    s * libm::log1p(l / gap) + (gap + s + l) * libm::log1p(s / (gap + l)) - (gap + s) * libm::log1p(s / gap)
}

/// Second antiderivative of `k(u_o, ·)` along the inner axis, `d = 2`.
///
/// `outer = 0`: inner variable is `u_2`, `k = u_1/max(|u_1|,|u_2|)^3`.
/// `outer = 1`: inner variable is `u_1`.
fn power2_inner(outer: usize, uo: f64, c: f64) -> f64 {
    if outer == 0 {
        let r = libm::fabs(c) / libm::fabs(uo);
        let h = if r <= 1.0 { 0.5 * r * r } else { 1.5 * r + 0.5 / r - 1.5 };
        if uo > 0.0 {
            h
        } else {
            -h
        }
    } else {
        if c == 0.0 {
            return 0.0;
        }
        let rho = libm::fabs(c) / libm::fabs(uo);
        let p = if rho <= 1.0 { rho * rho * rho / 6.0 } else { -libm::log(rho) + 1.5 * rho - 4.0 / 3.0 };
        if c > 0.0 {
            p
        } else {
            -p
        }
    }
}

/// `|[s0,s1) ∩ [r0+u, r1+u)|`.
fn overlap_len(s0: f64, s1: f64, r0: f64, r1: f64, u: f64) -> f64 {
    let v = s1.min(r1 + u) - s0.max(r0 + u);
    if v > 0.0 {
        v
    } else {
        0.0
    }
}

/// Exact per-axis differences `(s1−r0, s1−r1, s0−r0, s0−r1)` converted to floating point.
fn axis_diffs(r: &Rect, s: &Rect, j: usize) -> [f64; 4] {
    [
        (&s.hi()[j] - &r.lo()[j]).to_f64(),
        (&s.hi()[j] - &r.hi()[j]).to_f64(),
        (&s.lo()[j] - &r.lo()[j]).to_f64(),
        (&s.lo()[j] - &r.hi()[j]).to_f64(),
    ]
}

const SIGNS: [f64; 4] = [1.0, -1.0, -1.0, 1.0];

/// Relative error a quadrature pairing must certify.
pub const CERTIFIED_REL: f64 = 1e-9;

pub fn rects_disjoint(r: &Rect, s: &Rect) -> bool {
    !r.overlaps(s)
}

impl Kernel {
    /// Hilbert kernel with the principal-value completion on overlapping intervals.
    pub fn hilbert() -> Kernel {
        Kernel { kind: KernelKind::Hilbert, d: 1, c_k: 1.0, modulus: Modulus::Power { c: 4.0, delta: 1.0 }, overlap_rule: true }
    }

    /// `k(u) = u_1/|u|^{d+1}` with declared modulus `C t^δ`.
    pub fn power(d: usize, delta: f64) -> Result<Kernel> {
        if d == 0 || !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::InvalidArgument(alloc::format!("power kernel needs d >= 1 and 0 < delta <= 1, got d={d}, delta={delta}")));
        }
        let lip = 2.0 * (1.0 + 3.0 * (d as f64 + 1.0) * libm::ldexp(1.0, d as i32 + 1));
        let c = lip * libm::pow(2.0, delta - 1.0);
        Ok(Kernel { kind: KernelKind::Power, d, c_k: 1.0, modulus: Modulus::Power { c, delta }, overlap_rule: false })
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn c_k(&self) -> f64 {
        self.c_k
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn has_overlap_rule(&self) -> bool {
        self.overlap_rule
    }

    pub fn name(&self) -> String {
        match self.kind {
            KernelKind::Hilbert => "hilbert".into(),
            KernelKind::Power => alloc::format!("power(d={}, {})", self.d, self.modulus.describe()),
        }
    }

    /// `K(x, y)` for `x ≠ y`.
    pub fn value(&self, x: &[f64], y: &[f64]) -> f64 {
        let u: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        self.profile(&u)
    }

    fn profile(&self, u: &[f64]) -> f64 {
        match self.kind {
            KernelKind::Hilbert => 1.0 / u[0],
            KernelKind::Power => {
                let n = u.iter().fold(0.0f64, |m, v| m.max(libm::fabs(*v)));
                u[0] / libm::pow(n, (self.d + 1) as f64)
            }
        }
    }

    fn check(&self, r: &Rect, s: &Rect) -> Result<()> {
        if r.dim() != self.d {
            return Err(Error::DimensionMismatch(r.dim(), self.d));
        }
        if s.dim() != self.d {
            return Err(Error::DimensionMismatch(s.dim(), self.d));
        }
        Ok(())
    }

    /// `τ(1_R, 1_S) = ∫_S ∫_R K(x, y) dy dx` for disjoint `R`, `S`.
    pub fn pairing_disjoint(&self, r: &Rect, s: &Rect) -> Result<f64> {
        self.check(r, s)?;
        if r.is_empty() || s.is_empty() {
            return Ok(0.0);
        }
        if !rects_disjoint(r, s) {
            return Err(Error::NotDisjoint);
        }
        match self.kind {
            KernelKind::Hilbert => Ok(self.hilbert_disjoint(r, s)),
            KernelKind::Power if self.d == 2 => self.power2_pairing(r, s),
            KernelKind::Power => self.pairing_quadrature(r, s),
        }
    }

    fn hilbert_disjoint(&self, r: &Rect, s: &Rect) -> f64 {
        let a = r.side(0).to_f64();
        let b = s.side(0).to_f64();
        if s.lo()[0] >= r.hi()[0] {
            hilbert_separated((&s.lo()[0] - &r.hi()[0]).to_f64(), a, b)
        } else {
            -hilbert_separated((&r.lo()[0] - &s.hi()[0]).to_f64(), a, b)
        }
    }

    /// Pairing including overlapping rectangles, where the kernel declares a rule.
    pub fn pairing_full(&self, r: &Rect, s: &Rect) -> Result<f64> {
        self.check(r, s)?;
        if r.is_empty() || s.is_empty() {
            return Ok(0.0);
        }
        if rects_disjoint(r, s) {
            return self.pairing_disjoint(r, s);
        }
        if !self.overlap_rule {
            return Err(Error::OverlapRuleUnavailable);
        }
        Ok(self.hilbert_overlap(r, s))
    }

    /// The `G` formula evaluated as `τ(R∖S, S) + τ(R∩S, S∖R)`, both disjoint, since `τ(I, I) = 0`.
    /// Long intervals would otherwise cancel large `G` values.
    fn hilbert_overlap(&self, r: &Rect, s: &Rect) -> f64 {
        let Some(common) = r.intersect(s) else {
            return self.hilbert_disjoint(r, s);
        };
        let outside = |x: &Rect| [x.split(0, &common.lo()[0]).0, x.split(0, &common.hi()[0]).1];
        let mut acc = 0.0;
        for piece in outside(r).into_iter().flatten() {
            acc += self.hilbert_disjoint(&piece, s);
        }
        for piece in outside(s).into_iter().flatten() {
            acc += self.hilbert_disjoint(&common, &piece);
        }
        acc
    }

    pub fn pairing(&self, r: &Rect, s: &Rect) -> Result<f64> {
        self.pairing_full(r, s)
    }

    fn tolerance(&self, r: &Rect, s: &Rect) -> Tolerance {
        let scale = libm::sqrt(r.measure().to_f64() * s.measure().to_f64());
        Tolerance { abs: 1e-15 * scale, rel: 1e-13, max_panels: 4000 }
    }

    /// Semi-analytic `d = 2` pairing: closed form along one axis, Gauss–Kronrod along an axis of separation.
    fn power2_pairing(&self, r: &Rect, s: &Rect) -> Result<f64> {
        let gap = |j: usize| {
            let g1 = (&s.lo()[j] - &r.hi()[j]).to_f64();
            let g2 = (&r.lo()[j] - &s.hi()[j]).to_f64();
            g1.max(g2)
        };
        let outer = if gap(0) >= gap(1) { 0 } else { 1 };
        let inner = 1 - outer;
        let co = axis_diffs(r, s, outer);
        let ci = axis_diffs(r, s, inner);
        let (s0, s1) = (s.lo()[outer].to_f64(), s.hi()[outer].to_f64());
        let (r0, r1) = (r.lo()[outer].to_f64(), r.hi()[outer].to_f64());
        let a = co[3];
        let b = co[0];
        let mut breaks: Vec<f64> = co.to_vec();
        breaks.push(0.0);
        for c in ci {
            breaks.push(libm::fabs(c));
            breaks.push(-libm::fabs(c));
        }
        if a == 0.0 || b == 0.0 {
            breaks.extend(graded_breaks(a, b, 0.0, 30));
        }
        let f = |uo: f64| {
            if uo == 0.0 {
                return 0.0;
            }
            let lam = (s1.min(r1 + uo) - s0.max(r0 + uo)).max(0.0);
            if lam == 0.0 {
                return 0.0;
            }
            let mut i = 0.0;
            for k in 0..4 {
                i += SIGNS[k] * power2_inner(outer, uo, ci[k]);
            }
            lam * i
        };
        let res = integrate(f, a, b, &breaks, self.tolerance(r, s));
        // rounding in the inner differences can stall the tight target; the certified one is relative 1e-9
        if res.converged || res.error <= CERTIFIED_REL * libm::fabs(res.value) {
            Ok(res.value)
        } else {
            Err(Error::QuadratureFailed { partial: res.value })
        }
    }

    /// Generic nested quadrature of `∫ k(u) Π_j λ_j(u_j) du` over the difference box.
    pub fn pairing_quadrature(&self, r: &Rect, s: &Rect) -> Result<f64> {
        self.check(r, s)?;
        if !rects_disjoint(r, s) {
            return Err(Error::NotDisjoint);
        }
        let d = self.d;
        let axes: Vec<[f64; 6]> = (0..d)
            .map(|j| {
                let c = axis_diffs(r, s, j);
                [s.lo()[j].to_f64(), s.hi()[j].to_f64(), r.lo()[j].to_f64(), r.hi()[j].to_f64(), c[3], c[0]]
            })
            .collect();
        let tol = self.tolerance(r, s);
        let mut failed = false;
        let mut u = alloc::vec![0.0; d];
        let v = self.nested(&axes, 0, &mut u, tol, &mut failed);
        if failed {
            Err(Error::QuadratureFailed { partial: v })
        } else {
            Ok(v)
        }
    }

    fn nested(&self, axes: &[[f64; 6]], level: usize, u: &mut [f64], tol: Tolerance, failed: &mut bool) -> f64 {
        let d = axes.len();
        let [s0, s1, r0, r1, a, b] = axes[level];
        let mut breaks = alloc::vec![s0 - r1, s0 - r0, s1 - r1, s1 - r0, 0.0];
        let others = (0..level).fold(0.0f64, |m, j| m.max(libm::fabs(u[j])));
        if level > 0 {
            breaks.push(others);
            breaks.push(-others);
        }
        if a == 0.0 || b == 0.0 {
            breaks.extend(graded_breaks(a, b, 0.0, 30));
        }
        let inner_tol = Tolerance { abs: tol.abs * 1e-2, rel: tol.rel * 1e-1, max_panels: tol.max_panels };
        let mut u_local = u.to_vec();
        let res = integrate(
            |x| {
                let lam = overlap_len(s0, s1, r0, r1, x);
                if lam == 0.0 {
                    return 0.0;
                }
                u_local[level] = x;
                if level + 1 == d {
                    let n = u_local.iter().fold(0.0f64, |m, v| m.max(libm::fabs(*v)));
                    if n == 0.0 {
                        return 0.0;
                    }
                    lam * self.profile(&u_local)
                } else {
                    let mut uu = u_local.clone();
                    lam * self.nested(axes, level + 1, &mut uu, inner_tol, failed)
                }
            },
            a,
            b,
            &breaks,
            tol,
        );
        if !res.converged {
            *failed = true;
        }
        res.value
    }

    /// Largest `|K(x,y)| |x−y|^d / c_K` over the given sample pairs.
    pub fn size_ratio(&self, pairs: &[(Vec<f64>, Vec<f64>)]) -> f64 {
        pairs
            .iter()
            .map(|(x, y)| {
                let n = x.iter().zip(y).fold(0.0f64, |m, (a, b)| m.max(libm::fabs(a - b)));
                libm::fabs(self.value(x, y)) * libm::pow(n, self.d as f64) / self.c_k
            })
            .fold(0.0, f64::max)
    }

    /// Largest ratio of the two-sided smoothness difference to `ω(t)|x−y|^-d` over samples
    /// `(x, x', y)` with `|x − x'| < |x − y|/2`.
    pub fn smoothness_ratio(&self, triples: &[(Vec<f64>, Vec<f64>, Vec<f64>)]) -> f64 {
        let norm = |a: &[f64], b: &[f64]| a.iter().zip(b).fold(0.0f64, |m, (p, q)| m.max(libm::fabs(p - q)));
        triples
            .iter()
            .filter_map(|(x, xp, y)| {
                let dxy = norm(x, y);
                let t = norm(x, xp) / dxy;
                if !(t < 0.5) || t == 0.0 {
                    return None;
                }
                let lhs = libm::fabs(self.value(x, y) - self.value(xp, y)) + libm::fabs(self.value(y, x) - self.value(y, xp));
                Some(lhs * libm::pow(dxy, self.d as f64) / self.modulus.eval(t))
            })
            .fold(0.0, f64::max)
    }
}
