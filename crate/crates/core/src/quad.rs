#![allow(clippy::excessive_precision)]

//! Adaptive Gauss–Kronrod (7/15) quadrature.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One 15-point Kronrod panel: `(kronrod, |kronrod − gauss|)`.
pub fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, libm::fabs((k - g) * h))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_panels: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs: 1e-13, rel: 1e-12, max_panels: 4000 }
    }
}

/// Global adaptive bisection over `[a, b]` split first at `breaks`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, breaks: &[f64], tol: Tolerance) -> QuadResult {
    if !(b > a) {
        return QuadResult { value: 0.0, error: 0.0, converged: true };
    }
    let mut pts: Vec<f64> = Vec::with_capacity(breaks.len() + 2);
    pts.push(a);
    pts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    pts.push(b);
    pts.sort_by(|x, y| x.total_cmp(y));
    pts.dedup();
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut err = 0.0;
    for w in pts.windows(2) {
        let (v, e) = gk15(&mut f, w[0], w[1]);
        total += v;
        err += e;
        heap.push(Panel { a: w[0], b: w[1], value: v, error: e });
    }
    loop {
        let target = tol.abs.max(tol.rel * libm::fabs(total));
        if err <= target {
            return QuadResult { value: total, error: err, converged: true };
        }
        if heap.len() >= tol.max_panels {
            return QuadResult { value: total, error: err, converged: false };
        }
        let p = heap.pop().expect("nonempty panel heap");
        let m = 0.5 * (p.a + p.b);
        if !(m > p.a && m < p.b) {
            // cannot split further in floating point
            return QuadResult { value: total, error: err, converged: false };
        }
        let (v1, e1) = gk15(&mut f, p.a, m);
        let (v2, e2) = gk15(&mut f, m, p.b);
        total += v1 + v2 - p.value;
        err += e1 + e2 - p.error;
        heap.push(Panel { a: p.a, b: m, value: v1, error: e1 });
        heap.push(Panel { a: m, b: p.b, value: v2, error: e2 });
    }
}

/// Breakpoints clustering geometrically toward `x0` from the side of `[a, b]` it lies on.
pub fn graded_breaks(a: f64, b: f64, x0: f64, levels: usize) -> Vec<f64> {
    let mut out = Vec::new();
    if x0 <= a {
        let len = b - a;
        for j in 1..=levels {
            out.push(a + len * libm::ldexp(1.0, -(j as i32)));
        }
    } else if x0 >= b {
        let len = b - a;
        for j in 1..=levels {
            out.push(b - len * libm::ldexp(1.0, -(j as i32)));
        }
    } else {
        for j in 1..=levels {
            let s = libm::ldexp(1.0, -(j as i32));
            out.push(x0 - (x0 - a) * s);
            out.push(x0 + (b - x0) * s);
        }
        out.push(x0);
    }
    out
}
