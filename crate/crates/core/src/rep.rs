//! Diagonal/off-diagonal split of the main term, dyadic shifts, model operators and
//! Monte-Carlo averaging over random systems.
//!
//! Off-diagonal sums over pairs `(P, Q)` are evaluated by anchoring at the cube
//! whose martingale difference appears: the sum over `Q` in a distance band is a
//! single pairing against the data restricted to the band, which is a union of
//! at most `2d` slabs.

use alloc::sync::Arc;
use alloc::vec::Vec;

use dashu_ratio::RBig;

use crate::bcr::error_term_telescoped;
use crate::dyadic::DyadicRational;
use crate::error::{Error, Result};
use crate::form::WeakForm;
use crate::kernel::Modulus;
use crate::grid::{cubes_meeting, sample_theta_stream, DyadicCube, ShiftSequence};
use crate::rect::Rect;
use crate::simplefn::{active_cubes, average, d_gen, d_op, e_block, e_op, rational_to_f64, SimpleFunction};
use crate::sum::Compensated;

/// Which martingale differences the shift couples: `(1,1)`, `(1,0)` or `(0,1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gamma {
    G11,
    G10,
    G01,
}

impl Gamma {
    pub const ALL: [Gamma; 3] = [Gamma::G11, Gamma::G10, Gamma::G01];

    pub fn label(&self) -> &'static str {
        match self {
            Gamma::G11 => "11",
            Gamma::G10 => "10",
            Gamma::G01 => "01",
        }
    }

    pub fn parse(s: &str) -> Result<Gamma> {
        match s.trim().trim_matches(|c| c == '(' || c == ')').replace(',', "").as_str() {
            "11" => Ok(Gamma::G11),
            "10" => Ok(Gamma::G10),
            "01" => Ok(Gamma::G01),
            _ => Err(Error::Parse(alloc::format!("gamma must be 11, 10 or 01, got {s:?}"))),
        }
    }

    /// Log exponent of the `L^p` norm growth of shifts of this type.
    pub fn norm_exponent(&self, p: f64) -> f64 {
        let q = p / (p - 1.0);
        match self {
            Gamma::G11 => 0.5,
            Gamma::G10 => 0.5f64.max(1.0 / p),
            Gamma::G01 => 0.5f64.max(1.0 / q),
        }
    }
}

/// Normalization of the shift coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// `N_k = 2^d / ω(2^-k)`, so that `E τ^(γ,k) = ω(2^-k) E a^(γ,k)`.
    #[default]
    Averaged,
    /// `N_k = 1 / ω(2^-k)`.
    Plain,
}

pub fn shift_normalizer(form: &WeakForm, k: i32, norm: Normalization) -> Result<f64> {
    let w = form.kernel().modulus().eval(libm::ldexp(1.0, -k));
    if !(w > 0.0) || !w.is_finite() {
        return Err(Error::DegenerateModulus(k));
    }
    let d = form.dim() as i32;
    Ok(match norm {
        Normalization::Averaged => libm::ldexp(1.0, d) / w,
        Normalization::Plain => 1.0 / w,
    })
}

/// `[n_lo, n_hi]`: the ℓ^∞ index distances of the band `2^{k−3} < |z_P − z_Q|/ℓ ≤ 2^{k−2}`.
pub fn band_range(k: i32) -> (i64, i64) {
    let hi = 1i64 << (k - 2);
    let lo = if k >= 3 { (1i64 << (k - 3)) + 1 } else { 1 };
    (lo, hi)
}

/// Union of the same-generation cubes with index distance at most `n` from `p`.
pub fn index_box(p: &DyadicCube, n: i64) -> Rect {
    let half = &DyadicRational::from_int(2 * n + 1) * &p.side().scale_pow2(-1);
    Rect::cube_around(&p.center(), &half)
}

/// Union of the cubes in band `k` around `p`, as disjoint slabs.
pub fn band_slabs(p: &DyadicCube, k: i32) -> Vec<Rect> {
    let (lo, hi) = band_range(k);
    let h = p.side().scale_pow2(-1);
    let inner = &DyadicRational::from_int(2 * lo - 1) * &h;
    let outer = &DyadicRational::from_int(2 * hi + 1) * &h;
    Rect::annulus(&p.center(), &inner, &outer)
}

/// Region covered by the `k`-good cubes of generation `gen(s) + k` inside `s`.
pub fn good_region(s: &DyadicCube) -> Rect {
    let q = s.side().scale_pow2(-2);
    let three_q = &DyadicRational::from_int(3) * &q;
    Rect::new(s.corner().iter().map(|c| c + &q).collect(), s.corner().iter().map(|c| c + &three_q).collect())
}

/// Smallest `k` beyond which every band at generations `< b` misses the supports.
pub fn geometric_horizon(f: &SimpleFunction, g: &SimpleFunction, b: i32) -> i32 {
    let hull = f.bbox().hull(&g.bbox());
    if hull.is_empty() {
        return 2;
    }
    let diam = (0..hull.dim()).map(|j| hull.side(j).to_f64()).fold(0.0, f64::max);
    let ratio = diam * libm::ldexp(1.0, b - 1);
    let lg = libm::ceil(libm::log2(ratio)) as i32;
    (3 + lg).max(2)
}

struct Anchor {
    cube: DyadicCube,
    /// `D_P f` for `f`-anchors, `D_Q g` for `g`-anchors.
    diff: SimpleFunction,
    /// `⟨g⟩_P` for `f`-anchors, `⟨f⟩_Q` for `g`-anchors.
    other_avg: RBig,
    /// `⟨f⟩_P` for `f`-anchors, `⟨g⟩_Q` for `g`-anchors.
    own_avg: RBig,
}

/// Everything the split needs at one generation `i`.
pub struct Level {
    gen: i32,
    theta: Arc<ShiftSequence>,
    ef: SimpleFunction,
    eg: SimpleFunction,
    dgen_g: SimpleFunction,
    f_anchors: Vec<Anchor>,
    g_anchors: Vec<Anchor>,
}

fn anchors(h: &SimpleFunction, other: &SimpleFunction, gen: i32, theta: &Arc<ShiftSequence>) -> Vec<Anchor> {
    active_cubes(h, gen, theta)
        .into_iter()
        .filter_map(|cube| {
            let diff = d_op(h, &cube);
            if diff.is_zero_fn() {
                return None;
            }
            let other_avg = average(other, &cube);
            let own_avg = average(h, &cube);
            Some(Anchor { cube, diff, other_avg, own_avg })
        })
        .collect()
}

fn minus_const(h: &SimpleFunction, c: &RBig, slabs: &[Rect]) -> SimpleFunction {
    let mut out = h.restrict_many(slabs);
    for s in slabs {
        out.push(s.clone(), -c);
    }
    out
}

/// Optional restriction of a block to pairs sharing a fixed `k`-th ancestor.
#[derive(Clone, Copy)]
enum Filter<'a> {
    All,
    Good,
    Under(&'a DyadicCube),
}

impl Level {
    pub fn new(f: &SimpleFunction, g: &SimpleFunction, gen: i32, theta: &Arc<ShiftSequence>) -> Result<Level> {
        theta.check_gen(gen)?;
        theta.check_gen(gen + 1)?;
        Ok(Level {
            gen,
            theta: theta.clone(),
            ef: e_op(f, gen, theta),
            eg: e_op(g, gen, theta),
            dgen_g: d_gen(g, gen, theta),
            f_anchors: anchors(f, g, gen, theta),
            g_anchors: anchors(g, f, gen, theta),
        })
    }

    pub fn gen(&self) -> i32 {
        self.gen
    }

    /// `Σ_P τ(D_P f, D_P g)`.
    pub fn haar(&self, form: &WeakForm) -> Result<f64> {
        let mut acc = Compensated::new();
        for a in &self.f_anchors {
            if let Some(b) = self.g_anchors.iter().find(|b| b.cube == a.cube) {
                acc.add(form.tau(&a.diff, &b.diff)?);
            }
        }
        Ok(acc.value())
    }

    /// `Σ_P ⟨f⟩_P τ(1, D_P g)`.
    pub fn paraproduct(&self, form: &WeakForm) -> Result<f64> {
        let mut acc = Compensated::new();
        for b in &self.g_anchors {
            if !b.other_avg.is_zero() {
                acc.add(rational_to_f64(&b.other_avg) * form.tau_one(&b.diff, &b.cube.rect())?);
            }
        }
        Ok(acc.value())
    }

    /// `Σ_P τ(D_P f, 1) ⟨g⟩_P`.
    pub fn paraproduct_adj(&self, form: &WeakForm) -> Result<f64> {
        let mut acc = Compensated::new();
        for a in &self.f_anchors {
            if !a.other_avg.is_zero() {
                acc.add(rational_to_f64(&a.other_avg) * form.tau_one_left(&a.diff, &a.cube.rect())?);
            }
        }
        Ok(acc.value())
    }

    fn f_side(&self, form: &WeakForm, gamma: Gamma, a: &Anchor, slabs: &[Rect]) -> Result<f64> {
        match gamma {
            Gamma::G11 => form.tau(&a.diff, &self.dgen_g.restrict_many(slabs)),
            Gamma::G10 => form.tau(&a.diff, &minus_const(&self.eg, &a.other_avg, slabs)),
            Gamma::G01 => unreachable!("(0,1) blocks are anchored at g"),
        }
    }

    fn block(&self, form: &WeakForm, gamma: Gamma, k: i32, filter: Filter<'_>) -> Result<f64> {
        if k < 2 {
            return Err(Error::InvalidGoodnessDepth(k));
        }
        let mut acc = Compensated::new();
        match gamma {
            Gamma::G11 | Gamma::G10 => {
                for a in &self.f_anchors {
                    match filter {
                        Filter::All => {}
                        Filter::Good => {
                            if !a.cube.is_good(k)? {
                                continue;
                            }
                        }
                        Filter::Under(s) => {
                            if !a.cube.is_good(k)? || a.cube.ancestor(k)? != *s {
                                continue;
                            }
                        }
                    }
                    if !matches!(filter, Filter::All) {
                        let s = a.cube.ancestor(k)?;
                        assert!(s.rect().contains_rect(&index_box(&a.cube, band_range(k).1)), "band of a good cube leaves its ancestor");
                    }
                    acc.add(self.f_side(form, gamma, a, &band_slabs(&a.cube, k))?);
                }
            }
            Gamma::G01 => {
                for b in &self.g_anchors {
                    let band = band_slabs(&b.cube, k);
                    let slabs: Vec<Rect> = match filter {
                        Filter::All => band,
                        Filter::Good | Filter::Under(_) => {
                            let reach = index_box(&b.cube, band_range(k).1);
                            let parents: Vec<DyadicCube> = match filter {
                                Filter::Under(s) => alloc::vec![s.clone()],
                                _ => cubes_meeting(&reach, self.gen - k, &self.theta),
                            };
                            let mut out = Vec::new();
                            for s in parents {
                                let mid = good_region(&s);
                                let before = out.len();
                                out.extend(band.iter().filter_map(|r| r.intersect(&mid)));
                                if out.len() > before {
                                    assert!(b.cube.ancestor(k)? == s, "paired cubes have different ancestors");
                                }
                            }
                            out
                        }
                    };
                    if slabs.is_empty() {
                        continue;
                    }
                    let h = minus_const(&self.ef, &b.other_avg, &slabs);
                    acc.add(form.tau(&h, &b.diff)?);
                }
            }
        }
        Ok(acc.value())
    }

    /// Off-diagonal pairs at index distance beyond band `k_last`, including the `T(1)` remainder.
    pub fn tail(&self, form: &WeakForm, gamma: Gamma, k_last: i32) -> Result<f64> {
        let n = band_range(k_last).1;
        let mut acc = Compensated::new();
        match gamma {
            Gamma::G11 | Gamma::G10 => {
                for a in &self.f_anchors {
                    let bx = index_box(&a.cube, n);
                    let near = match gamma {
                        Gamma::G11 => self.dgen_g.restrict(&bx),
                        _ => self.eg.restrict(&bx),
                    };
                    let whole = if gamma == Gamma::G11 { &self.dgen_g } else { &self.eg };
                    acc.add(form.tau(&a.diff, whole)?);
                    acc.add(-form.tau(&a.diff, &near)?);
                    if gamma == Gamma::G10 && !a.other_avg.is_zero() {
                        let c = rational_to_f64(&a.other_avg);
                        let t1 = form.tau_one_left(&a.diff, &a.cube.rect())?;
                        let inside = form.tau_rect_right(&a.diff, &bx)?;
                        acc.add(-c * (t1 - inside));
                    }
                }
            }
            Gamma::G01 => {
                for b in &self.g_anchors {
                    let bx = index_box(&b.cube, n);
                    acc.add(form.tau(&self.ef, &b.diff)?);
                    acc.add(-form.tau(&self.ef.restrict(&bx), &b.diff)?);
                    if !b.other_avg.is_zero() {
                        let c = rational_to_f64(&b.other_avg);
                        let t1 = form.tau_one(&b.diff, &b.cube.rect())?;
                        let inside = form.tau_rect_left(&bx, &b.diff)?;
                        acc.add(-c * (t1 - inside));
                    }
                }
            }
        }
        Ok(acc.value())
    }

    /// Number of anchors, for diagnostics.
    pub fn anchor_counts(&self) -> (usize, usize) {
        (self.f_anchors.len(), self.g_anchors.len())
    }

    /// `⟨f⟩` and `⟨g⟩` on the `f`-anchors, for tests.
    pub fn f_anchor_averages(&self) -> Vec<(DyadicCube, RBig, RBig)> {
        self.f_anchors.iter().map(|a| (a.cube.clone(), a.own_avg.clone(), a.other_avg.clone())).collect()
    }
}

fn levels(f: &SimpleFunction, g: &SimpleFunction, a: i32, b: i32, theta: &Arc<ShiftSequence>) -> Result<Vec<Level>> {
    if a > b {
        return Err(Error::InvalidArgument(alloc::format!("need a <= b, got a = {a}, b = {b}")));
    }
    (a..b).map(|i| Level::new(f, g, i, theta)).collect()
}

fn sum_levels(ls: &[Level], mut op: impl FnMut(&Level) -> Result<f64>) -> Result<f64> {
    let mut acc = Compensated::new();
    for l in ls {
        acc.add(op(l)?);
    }
    Ok(acc.value())
}

/// `Σ_P τ(D_P f, D_P g)` over generations `[a, b)`.
pub fn haar_multiplier(form: &WeakForm, f: &SimpleFunction, g: &SimpleFunction, a: i32, b: i32, theta: &Arc<ShiftSequence>) -> Result<f64> {
    sum_levels(&levels(f, g, a, b, theta)?, |l| l.haar(form))
}

/// `Σ_P ⟨f⟩_P τ(1, D_P g)`.
pub fn paraproduct(form: &WeakForm, f: &SimpleFunction, g: &SimpleFunction, a: i32, b: i32, theta: &Arc<ShiftSequence>) -> Result<f64> {
    sum_levels(&levels(f, g, a, b, theta)?, |l| l.paraproduct(form))
}

/// `Σ_P τ(D_P f, 1) ⟨g⟩_P`.
pub fn paraproduct_adj(form: &WeakForm, f: &SimpleFunction, g: &SimpleFunction, a: i32, b: i32, theta: &Arc<ShiftSequence>) -> Result<f64> {
    sum_levels(&levels(f, g, a, b, theta)?, |l| l.paraproduct_adj(form))
}

/// Haar multiplier plus both paraproducts.
pub fn diag_term(form: &WeakForm, f: &SimpleFunction, g: &SimpleFunction, a: i32, b: i32, theta: &Arc<ShiftSequence>) -> Result<f64> {
    sum_levels(&levels(f, g, a, b, theta)?, |l| Ok(l.haar(form)? + l.paraproduct(form)? + l.paraproduct_adj(form)?))
}

/// `Σ_{(P,Q) in band k} τ(D^γ₁_{P,Q} f, D^γ₂_{Q,P} g)` over generations `[a, b)`.
pub fn offdiag_block(form: &WeakForm, f: &SimpleFunction, g: &SimpleFunction, a: i32, b: i32, theta: &Arc<ShiftSequence>, gamma: Gamma, k: i32) -> Result<f64> {
    sum_levels(&levels(f, g, a, b, theta)?, |l| l.block(form, gamma, k, Filter::All))
}

/// Off-diagonal remainder beyond band `k_last`; zero for `(1,1)` past the horizon.
pub fn offdiag_tail(form: &WeakForm, f: &SimpleFunction, g: &SimpleFunction, a: i32, b: i32, theta: &Arc<ShiftSequence>, gamma: Gamma, k_last: i32) -> Result<f64> {
    sum_levels(&levels(f, g, a, b, theta)?, |l| l.tail(form, gamma, k_last))
}

/// Pieces of the split of the main term.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitReport {
    pub diag: f64,
    /// `blocks[γ][k − 2]` for `k = 2..=k_last`.
    pub blocks: [Vec<f64>; 3],
    pub tails: [f64; 3],
    pub k_last: i32,
    pub total: f64,
}

/// Diagonal part, every block up to `k_last` and the remainders, from one set of levels.
pub fn split(form: &WeakForm, f: &SimpleFunction, g: &SimpleFunction, a: i32, b: i32, theta: &Arc<ShiftSequence>, k_last: i32) -> Result<SplitReport> {
    let ls = levels(f, g, a, b, theta)?;
    let diag = sum_levels(&ls, |l| Ok(l.haar(form)? + l.paraproduct(form)? + l.paraproduct_adj(form)?))?;
    let mut blocks: [Vec<f64>; 3] = Default::default();
    let mut tails = [0.0; 3];
    let mut total = Compensated::new();
    total.add(diag);
    for (gi, gamma) in Gamma::ALL.iter().enumerate() {
        for k in 2..=k_last {
            let v = sum_levels(&ls, |l| l.block(form, *gamma, k, Filter::All))?;
            total.add(v);
            blocks[gi].push(v);
        }
        tails[gi] = sum_levels(&ls, |l| l.tail(form, *gamma, k_last))?;
        total.add(tails[gi]);
    }
    Ok(SplitReport { diag, blocks, tails, k_last, total: total.value() })
}

/// `a_S^(γ,k)`: normalized sum over band pairs with `k`-good `P` and `P^(k) = Q^(k) = S`.
pub fn shift_form(form: &WeakForm, f: &SimpleFunction, g: &SimpleFunction, s: &DyadicCube, gamma: Gamma, k: i32, norm: Normalization) -> Result<f64> {
    let n = shift_normalizer(form, k, norm)?;
    let r = s.rect();
    let level = Level::new(&f.restrict(&r), &g.restrict(&r), s.gen() + k, s.theta())?;
    Ok(n * level.block(form, gamma, k, Filter::Under(s))?)
}

/// `Σ_S a_S^(γ,k)` over `S` of generations `[a − k, b − k)`.
pub fn shift_sum(form: &WeakForm, f: &SimpleFunction, g: &SimpleFunction, a: i32, b: i32, theta: &Arc<ShiftSequence>, gamma: Gamma, k: i32, norm: Normalization) -> Result<f64> {
    let n = shift_normalizer(form, k, norm)?;
    Ok(n * sum_levels(&levels(f, g, a, b, theta)?, |l| l.block(form, gamma, k, Filter::Good))?)
}

/// Monte-Carlo mean over independent draws of θ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
}

impl McEstimate {
    /// Mean and standard error of already computed per-sample values, in index order.
    pub fn from_values(values: &[f64], seed: u64) -> McEstimate {
        let n = values.len();
        if n == 0 {
            return McEstimate { mean: 0.0, stderr: 0.0, samples: 0, seed };
        }
        let mean = crate::sum::sum(values.iter().copied()) / n as f64;
        let stderr = if n < 2 {
            0.0
        } else {
            let ss = crate::sum::sum(values.iter().map(|v| (v - mean) * (v - mean)));
            libm::sqrt(ss / (n - 1) as f64 / n as f64)
        };
        McEstimate { mean, stderr, samples: n, seed }
    }
}

/// Draw `θ` number `index` for a run keyed by `seed`.
pub fn draw_theta(seed: u64, index: u64, d: usize, window: (i32, i32)) -> Arc<ShiftSequence> {
    Arc::new(sample_theta_stream(seed, index, d, window))
}

/// Stream offset separating the two sides of an averaging check.
pub const SECOND_SIDE_STREAM: u64 = 1 << 40;

/// Sequential expectation; sample `j` sees `θ` from stream `j`.
pub fn mc_expect<F>(mut functional: F, seed: u64, samples: usize, d: usize, window: (i32, i32)) -> Result<McEstimate>
where
    F: FnMut(&Arc<ShiftSequence>) -> Result<f64>,
{
    let mut values = Vec::with_capacity(samples);
    for j in 0..samples {
        values.push(functional(&draw_theta(seed, j as u64, d, window))?);
    }
    Ok(McEstimate::from_values(&values, seed))
}

/// θ window covering generations `[a − k_max − 1, b + extra]`.
pub fn window_for(a: i32, b: i32, k_max: i32, extra: i32) -> (i32, i32) {
    (a - k_max.max(2) - 1, b + extra)
}

/// Default number of random scales kept below the finest generation.
pub const FINE_SCALES: i32 = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AveragingReport {
    pub gamma: Gamma,
    pub k: i32,
    /// Estimate of `E τ^(γ,k)`.
    pub lhs: McEstimate,
    /// Estimate of `ω(2^-k) E a^(γ,k)`.
    pub rhs: McEstimate,
    pub combined_stderr: f64,
    pub pass: bool,
}

/// `τ^(γ,k)` for one θ.
pub fn averaging_lhs(form: &WeakForm, f: &SimpleFunction, g: &SimpleFunction, a: i32, b: i32, theta: &Arc<ShiftSequence>, gamma: Gamma, k: i32) -> Result<f64> {
    offdiag_block(form, f, g, a, b, theta, gamma, k)
}

/// `ω(2^-k) Σ_S a_S^(γ,k)` for one θ.
pub fn averaging_rhs(form: &WeakForm, f: &SimpleFunction, g: &SimpleFunction, a: i32, b: i32, theta: &Arc<ShiftSequence>, gamma: Gamma, k: i32, norm: Normalization) -> Result<f64> {
    let w = form.kernel().modulus().eval(libm::ldexp(1.0, -k));
    Ok(w * shift_sum(form, f, g, a, b, theta, gamma, k, norm)?)
}

/// Both sides from independent draws; the verdict is `|lhs − rhs| ≤ 3 σ`.
pub fn averaging_verdict(gamma: Gamma, k: i32, lhs: McEstimate, rhs: McEstimate) -> AveragingReport {
    let combined = libm::sqrt(lhs.stderr * lhs.stderr + rhs.stderr * rhs.stderr);
    let diff = libm::fabs(lhs.mean - rhs.mean);
    let pass = diff <= 3.0 * combined || diff <= 1e-12 * (1.0 + libm::fabs(lhs.mean));
    AveragingReport { gamma, k, lhs, rhs, combined_stderr: combined, pass }
}

#[allow(clippy::too_many_arguments)]
pub fn averaging_check(form: &WeakForm, f: &SimpleFunction, g: &SimpleFunction, a: i32, b: i32, gamma: Gamma, k: i32, seed: u64, samples: usize, norm: Normalization) -> Result<AveragingReport> {
    let d = form.dim();
    let window = window_for(a, b, k, FINE_SCALES);
    let lhs = mc_expect(|th| averaging_lhs(form, f, g, a, b, th, gamma, k), seed, samples, d, window)?;
    let mut values = Vec::with_capacity(samples);
    for j in 0..samples {
        let th = draw_theta(seed, SECOND_SIDE_STREAM + j as u64, d, window);
        values.push(averaging_rhs(form, f, g, a, b, &th, gamma, k, norm)?);
    }
    Ok(averaging_verdict(gamma, k, lhs, McEstimate::from_values(&values, seed)))
}

/// `Σ_{k > k_max} ω(2^-k) (1 + ln k)` summed until the terms stop mattering.
pub fn k_tail_weight(m: &Modulus, k_max: i32) -> f64 {
    let mut acc = Compensated::new();
    let mut k = k_max.max(1) + 1;
    loop {
        let t = m.eval(libm::ldexp(1.0, -k)) * (1.0 + libm::log(k as f64));
        acc.add(t);
        if t < 1e-18 || k > 4000 {
            return acc.value();
        }
        k += 1;
    }
}

/// `Σ_{k > k_max} ω(2^-k) k^s`.
pub fn k_tail_dini(m: &Modulus, k_max: i32, s: f64) -> f64 {
    let mut acc = Compensated::new();
    let mut k = k_max.max(1) + 1;
    loop {
        let t = m.eval(libm::ldexp(1.0, -k)) * libm::pow(k as f64, s);
        acc.add(t);
        if t < 1e-18 || k > 4000 {
            return acc.value();
        }
        k += 1;
    }
}

/// Per-θ value of the model sum and the error term of the truncated decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepresentationSample {
    pub model: f64,
    pub error_term: f64,
}

/// `h + π + π* + Σ_{γ, 2 ≤ k ≤ k_max} ω(2^-k) a^(γ,k)` for one θ.
pub fn representation_sample(form: &WeakForm, f: &SimpleFunction, g: &SimpleFunction, a: i32, b: i32, k_max: i32, theta: &Arc<ShiftSequence>, norm: Normalization) -> Result<RepresentationSample> {
    let ls = levels(f, g, a, b, theta)?;
    let mut acc = Compensated::new();
    for l in &ls {
        acc.add(l.haar(form)?);
        acc.add(l.paraproduct(form)?);
        acc.add(l.paraproduct_adj(form)?);
    }
    for k in 2..=k_max {
        let w = form.kernel().modulus().eval(libm::ldexp(1.0, -k));
        let n = shift_normalizer(form, k, norm)?;
        for gamma in Gamma::ALL {
            let s = sum_levels(&ls, |l| l.block(form, gamma, k, Filter::Good))?;
            acc.add(w * n * s);
        }
    }
    let error_term = error_term_telescoped(form, f, g, a, b, theta)?;
    Ok(RepresentationSample { model: acc.value(), error_term })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepresentationReport {
    pub reference: f64,
    pub estimate: McEstimate,
    /// Mean of `|E_{a,b}|` over the draws.
    pub error_term: f64,
    pub k_tail: f64,
    /// `error_term + k_tail · ‖f‖₂ ‖g‖₂`.
    pub budget: f64,
    pub pass: bool,
}

/// Verdict: within `max(5% relative, 3 σ + budget)` of the reference.
pub fn representation_verdict(form: &WeakForm, f: &SimpleFunction, g: &SimpleFunction, k_max: i32, reference: f64, samples: &[RepresentationSample], seed: u64) -> RepresentationReport {
    let model: Vec<f64> = samples.iter().map(|s| s.model).collect();
    let estimate = McEstimate::from_values(&model, seed);
    let error_term = if samples.is_empty() { 0.0 } else { crate::sum::sum(samples.iter().map(|s| libm::fabs(s.error_term))) / samples.len() as f64 };
    let k_tail = k_tail_weight(form.kernel().modulus(), k_max);
    let budget = error_term + k_tail * f.l2_norm_f64() * g.l2_norm_f64();
    let diff = libm::fabs(estimate.mean - reference);
    let pass = diff <= (0.05 * libm::fabs(reference)).max(3.0 * estimate.stderr + budget);
    RepresentationReport { reference, estimate, error_term, k_tail, budget, pass }
}

#[allow(clippy::too_many_arguments)]
pub fn representation_check(form: &WeakForm, f: &SimpleFunction, g: &SimpleFunction, a: i32, b: i32, k_max: i32, samples: usize, seed: u64, norm: Normalization) -> Result<RepresentationReport> {
    let reference = form.tau(f, g)?;
    let window = window_for(a, b, k_max, FINE_SCALES);
    let mut out = Vec::with_capacity(samples);
    for j in 0..samples {
        let th = draw_theta(seed, j as u64, form.dim(), window);
        out.push(representation_sample(form, f, g, a, b, k_max, &th, norm)?);
    }
    Ok(representation_verdict(form, f, g, k_max, reference, &out, seed))
}

/// `(Σ |c|^p |R|)^{1/p}` for functions with pairwise disjoint terms.
pub fn lp_norm_disjoint(f: &SimpleFunction, p: f64) -> f64 {
    let s = crate::sum::sum(f.terms().iter().map(|(r, c)| libm::pow(libm::fabs(rational_to_f64(c)), p) * r.measure().to_f64()));
    libm::pow(s, 1.0 / p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftNormRow {
    pub k: i32,
    /// Largest `|Σ_S a_S(f, g)| / (‖f‖_p ‖g‖_p')` seen.
    pub lower_estimate: f64,
    /// `lower_estimate` relative to the first `k`.
    pub normalized: f64,
    /// `(1 + ln₊ k)^Δ` relative to the first `k`.
    pub envelope: f64,
    pub ratio: f64,
}

/// Mean-zero function on the children of `p` with coefficients drawn from `coef`.
pub fn random_difference(p: &DyadicCube, coef: &mut impl FnMut() -> i64) -> SimpleFunction {
    let kids = p.children();
    let vals: Vec<i64> = kids.iter().map(|_| coef()).collect();
    let mean_num: i64 = vals.iter().sum();
    let n = kids.len() as i64;
    let mut out = SimpleFunction::zero(p.dim());
    for (c, v) in kids.iter().zip(vals) {
        out.push(c.rect(), RBig::from_parts((v * n - mean_num).into(), (n as u64).into()));
    }
    out
}

/// Empirical lower estimates of shift norms at generation 0, against the `(1 + ln₊ k)^Δ` envelope.
///
/// Each trial draws θ, `m` cubes `P` and partners `Q` in band `k`, and random
/// mean-zero data on them.
#[allow(clippy::too_many_arguments)]
pub fn shift_norm_probe(form: &WeakForm, gamma: Gamma, k_list: &[i32], p: f64, trials: usize, m: usize, seed: u64, norm: Normalization) -> Result<Vec<ShiftNormRow>> {
    use rand_chacha::ChaCha8Rng;
    use rand_core::{RngCore, SeedableRng};
    let d = form.dim();
    let q = p / (p - 1.0);
    let delta = gamma.norm_exponent(p);
    let mut rows: Vec<ShiftNormRow> = Vec::new();
    for &k in k_list {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let mut coef_rng = ChaCha8Rng::seed_from_u64(seed);
        coef_rng.set_stream((1 << 32) | k as u64);
        let window = (-k - 2, FINE_SCALES);
        let span = 1i64 << k;
        let mut best = 0.0f64;
        for t in 0..trials {
            let th = draw_theta(seed ^ 0x5eed, ((k as u64) << 32) | t as u64, d, window);
            let mut coef = || (coef_rng.next_u32() % 9) as i64 - 4;
            let mut f = SimpleFunction::zero(d);
            let mut g = SimpleFunction::zero(d);
            let mut used: Vec<Vec<i64>> = Vec::new();
            for _ in 0..m {
                let pi: Vec<i64> = (0..d).map(|_| (rng.next_u64() % span as u64) as i64).collect();
                let (lo, hi) = band_range(k);
                let qi: Vec<i64> = pi
                    .iter()
                    .enumerate()
                    .map(|(ax, &x)| {
                        let mag = if ax == 0 { lo + (rng.next_u64() % (hi - lo + 1) as u64) as i64 } else { (rng.next_u64() % (hi as u64 + 1)) as i64 };
                        if rng.next_u32() & 1 == 0 { x + mag } else { x - mag }
                    })
                    .collect();
                if used.contains(&pi) || used.contains(&qi) {
                    continue;
                }
                used.push(pi.clone());
                used.push(qi.clone());
                let pc = DyadicCube::new(&th, 0, pi)?;
                let qc = DyadicCube::new(&th, 0, qi)?;
                let (fp, gq) = match gamma {
                    Gamma::G11 => (random_difference(&pc, &mut coef), random_difference(&qc, &mut coef)),
                    Gamma::G10 => {
                        let mut gq = SimpleFunction::zero(d);
                        gq.push(qc.rect(), RBig::from(coef()));
                        (random_difference(&pc, &mut coef), gq)
                    }
                    Gamma::G01 => {
                        let mut fp = SimpleFunction::zero(d);
                        fp.push(pc.rect(), RBig::from(coef()));
                        (fp, random_difference(&qc, &mut coef))
                    }
                };
                f = f.add(&fp);
                g = g.add(&gq);
            }
            let denom = lp_norm_disjoint(&f, p) * lp_norm_disjoint(&g, q);
            if denom == 0.0 {
                continue;
            }
            let v = shift_sum(form, &f, &g, 0, 1, &th, gamma, k, norm)?;
            best = best.max(libm::fabs(v) / denom);
        }
        rows.push(ShiftNormRow { k, lower_estimate: best, normalized: 0.0, envelope: 0.0, ratio: 0.0 });
    }
    if let Some(first) = rows.first().cloned() {
        let env = |k: i32| libm::pow(1.0 + libm::log(k as f64).max(0.0), delta);
        for r in rows.iter_mut() {
            r.normalized = if first.lower_estimate > 0.0 { r.lower_estimate / first.lower_estimate } else { 0.0 };
            r.envelope = env(r.k) / env(first.k);
            r.ratio = r.normalized / r.envelope;
        }
    }
    Ok(rows)
}

/// `|a_S^(1,1)(f, g)| / ⟨E_S|f|, |g|⟩`, or `None` when the denominator vanishes.
pub fn size_ratio(form: &WeakForm, f: &SimpleFunction, g: &SimpleFunction, s: &DyadicCube, k: i32, norm: Normalization) -> Result<Option<f64>> {
    let denom = rational_to_f64(&e_block(&f.abs(), s, 0).pairing(&g.abs())?);
    if denom == 0.0 {
        return Ok(None);
    }
    Ok(Some(libm::fabs(shift_form(form, f, g, s, Gamma::G11, k, norm)?) / denom))
}

/// `P(θ: Q is k-good)` for the cube of index `index` at generation `gen`, one draw.
pub fn goodness_indicator(theta: &Arc<ShiftSequence>, gen: i32, index: Vec<i64>, k: i32) -> Result<bool> {
    DyadicCube::new(theta, gen, index)?.is_good(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bcr::main_term;

    fn ind(a: i64, b: i64) -> SimpleFunction {
        SimpleFunction::indicator(Rect::from_ints(&[(a, b)]))
    }

    #[test]
    fn bands() {
        assert_eq!(band_range(2), (1, 1));
        assert_eq!(band_range(3), (2, 2));
        assert_eq!(band_range(4), (3, 4));
        assert_eq!(band_range(5), (5, 8));
    }

    #[test]
    fn split_reproduces_main_term() {
        let t = WeakForm::hilbert();
        let th = draw_theta(7, 0, 1, (-12, 12));
        let (f, g) = (ind(0, 1), ind(2, 3));
        let (a, b) = (-3, 3);
        let ks = geometric_horizon(&f, &g, b);
        let r = split(&t, &f, &g, a, b, &th, ks).unwrap();
        let m = main_term(&t, &f, &g, a, b, &th).unwrap();
        assert!((r.total - m).abs() < 1e-12, "{} vs {m}: {r:?}", r.total);
        assert_eq!(r.tails[0], 0.0);
        assert_eq!(offdiag_block(&t, &f, &g, a, b, &th, Gamma::G11, ks + 1).unwrap(), 0.0);
    }

    #[test]
    fn hilbert_paraproducts_vanish() {
        let t = WeakForm::hilbert().with_fast_t1(true);
        let th = draw_theta(3, 0, 1, (-12, 12));
        assert_eq!(paraproduct(&t, &ind(0, 1), &ind(2, 3), -3, 3, &th).unwrap(), 0.0);
        assert_eq!(paraproduct_adj(&t, &ind(0, 1), &ind(2, 3), -3, 3, &th).unwrap(), 0.0);
    }

    #[test]
    fn mc_constant() {
        let e = mc_expect(|_| Ok(2.5), 1, 10, 1, (-2, 2)).unwrap();
        assert_eq!(e.mean, 2.5);
        assert_eq!(e.stderr, 0.0);
    }
}
