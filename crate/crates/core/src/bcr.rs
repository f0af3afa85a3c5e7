//! Multiscale decomposition `τ(f, g) = τ_{a,b}(f, g) + E_{a,b}(f, g)` and its error decay.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::form::WeakForm;
use crate::grid::ShiftSequence;
use crate::simplefn::{d_gen, e_op, f_op, SimpleFunction};
use crate::sum::Compensated;

fn check_range(theta: &ShiftSequence, a: i32, b: i32) -> Result<()> {
    if a > b {
        return Err(Error::InvalidArgument(alloc::format!("need a <= b, got a = {a}, b = {b}")));
    }
    theta.check_gen(a)?;
    theta.check_gen(b)
}

/// `Σ_{i=a}^{b−1} τ(D_i f, D_i g) + τ(D_i f, E_i g) + τ(E_i f, D_i g)`.
pub fn main_term(form: &WeakForm, f: &SimpleFunction, g: &SimpleFunction, a: i32, b: i32, theta: &ShiftSequence) -> Result<f64> {
    check_range(theta, a, b)?;
    let mut acc = Compensated::new();
    for i in a..b {
        acc.add(main_term_gen(form, f, g, i, theta)?);
    }
    Ok(acc.value())
}

/// One generation of the main term.
pub fn main_term_gen(form: &WeakForm, f: &SimpleFunction, g: &SimpleFunction, i: i32, theta: &ShiftSequence) -> Result<f64> {
    let df = d_gen(f, i, theta);
    let dg = d_gen(g, i, theta);
    let mut acc = Compensated::new();
    if !df.is_trivially_zero() {
        let eg = e_op(g, i, theta);
        acc.add(form.tau(&df, &dg)?);
        acc.add(form.tau(&df, &eg)?);
    }
    if !dg.is_trivially_zero() {
        let ef = e_op(f, i, theta);
        acc.add(form.tau(&ef, &dg)?);
    }
    Ok(acc.value())
}

/// The three pieces of the error term: `τ(E_a f, E_a g)`, `τ(F_b f, g)`, `τ(E_b f, F_b g)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorParts {
    pub coarse: f64,
    pub fine1: f64,
    pub fine2: f64,
}

impl ErrorParts {
    pub fn total(&self) -> f64 {
        self.coarse + self.fine1 + self.fine2
    }

    pub fn fine(&self) -> f64 {
        self.fine1 + self.fine2
    }
}

/// Error term from its three-term definition.
pub fn error_term_direct(form: &WeakForm, f: &SimpleFunction, g: &SimpleFunction, a: i32, b: i32, theta: &ShiftSequence) -> Result<ErrorParts> {
    check_range(theta, a, b)?;
    let coarse = form.tau(&e_op(f, a, theta), &e_op(g, a, theta))?;
    let fbf = f_op(f, b, theta);
    let fine1 = form.tau(&fbf, g)?;
    let fine2 = form.tau(&e_op(f, b, theta), &f_op(g, b, theta))?;
    Ok(ErrorParts { coarse, fine1, fine2 })
}

/// Error term as `τ(E_a f, E_a g) + τ(f, g) − τ(E_b f, E_b g)`.
pub fn error_term_telescoped(form: &WeakForm, f: &SimpleFunction, g: &SimpleFunction, a: i32, b: i32, theta: &ShiftSequence) -> Result<f64> {
    check_range(theta, a, b)?;
    let mut acc = Compensated::new();
    acc.add(form.tau(&e_op(f, a, theta), &e_op(g, a, theta))?);
    acc.add(form.tau(f, g)?);
    acc.add(-form.tau(&e_op(f, b, theta), &e_op(g, b, theta))?);
    Ok(acc.value())
}

/// Both evaluations of the error term; the telescoped one is the default.
pub fn error_term(form: &WeakForm, f: &SimpleFunction, g: &SimpleFunction, a: i32, b: i32, theta: &ShiftSequence) -> Result<(f64, ErrorParts)> {
    Ok((error_term_telescoped(form, f, g, a, b, theta)?, error_term_direct(form, f, g, a, b, theta)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BcrReport {
    pub a: i32,
    pub b: i32,
    pub main: f64,
    /// Telescoped error term.
    pub error: f64,
    /// Three-term error term.
    pub parts: ErrorParts,
    pub reconstruction: f64,
    pub reference: f64,
    /// `max` of the reconstruction defects of both error paths.
    pub defect: f64,
    /// `|telescoped − three-term|`.
    pub path_gap: f64,
}

pub fn bcr_report(form: &WeakForm, f: &SimpleFunction, g: &SimpleFunction, a: i32, b: i32, theta: &ShiftSequence) -> Result<BcrReport> {
    let reference = form.tau(f, g)?;
    let main = main_term(form, f, g, a, b, theta)?;
    let (error, parts) = error_term(form, f, g, a, b, theta)?;
    let reconstruction = main + error;
    let d1 = libm::fabs(reconstruction - reference);
    let d2 = libm::fabs(main + parts.total() - reference);
    Ok(BcrReport {
        a,
        b,
        main,
        error,
        parts,
        reconstruction,
        reference,
        defect: d1.max(d2),
        path_gap: libm::fabs(error - parts.total()),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayRow {
    pub a: i32,
    pub b: i32,
    pub parts: ErrorParts,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayTable {
    pub rows: Vec<DecayRow>,
    /// Slope of `log2 |coarse|` against `a` at the largest `b`.
    pub slope_a: Option<f64>,
    /// Slope of `log2 |fine1 + fine2|` against `b` at the smallest `a`.
    pub slope_b: Option<f64>,
}

/// Least-squares slope of `log2 |y|` against `x`, skipping zeros.
pub fn log2_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|p| p.1 != 0.0 && p.1.is_finite()).map(|&(x, y)| (x, libm::log2(libm::fabs(y)))).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// `|E_{a,b}|` and its parts over the grid `a_list × b_list` (pairs with `a > b` skipped).
pub fn decay_scan(form: &WeakForm, f: &SimpleFunction, g: &SimpleFunction, a_list: &[i32], b_list: &[i32], theta: &ShiftSequence) -> Result<DecayTable> {
    let mut rows = Vec::new();
    for &a in a_list {
        for &b in b_list {
            if a > b {
                continue;
            }
            rows.push(DecayRow { a, b, parts: error_term_direct(form, f, g, a, b, theta)? });
        }
    }
    let a_min = a_list.iter().min().copied();
    let b_max = b_list.iter().max().copied();
    let slope_a = b_max.and_then(|bm| {
        let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.b == bm).map(|r| (r.a as f64, r.parts.coarse)).collect();
        log2_slope(&pts)
    });
    let slope_b = a_min.and_then(|am| {
        let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.a == am).map(|r| (r.b as f64, r.parts.fine())).collect();
        log2_slope(&pts)
    });
    Ok(DecayTable { rows, slope_a, slope_b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rect::Rect;

    fn ind(a: i64, b: i64) -> SimpleFunction {
        SimpleFunction::indicator(Rect::from_ints(&[(a, b)]))
    }

    #[test]
    fn identity_on_standard_pair() {
        let t = WeakForm::hilbert();
        let th = ShiftSequence::zero(1, -10, 12);
        let r = bcr_report(&t, &ind(0, 1), &ind(2, 3), -2, 3, &th).unwrap();
        assert!(r.defect < 1e-12, "{r:?}");
        assert!(r.path_gap < 1e-12);
        assert_eq!(main_term(&t, &ind(0, 1), &ind(2, 3), 2, 2, &th).unwrap(), 0.0);
    }

    #[test]
    fn slope_fit() {
        let pts: Vec<(f64, f64)> = (0..6).map(|i| (i as f64, libm::ldexp(3.0, -2 * i))).collect();
        assert!((log2_slope(&pts).unwrap() + 2.0).abs() < 1e-12);
        assert_eq!(log2_slope(&[(0.0, 0.0), (1.0, 0.0)]), None);
    }
}
