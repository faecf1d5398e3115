//! Adaptive Gauss-Legendre quadrature on intervals and rectangles.
//!
//! Panels are refined dyadically, worst estimated error first, until the
//! requested relative tolerance is met or a refinement cap is hit. Nodes and
//! weights are computed once per rule order and cached.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Low/high rule orders used for per-panel error estimation.
const N_LO: usize = 8;
const N_HI: usize = 16;

#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn legendre_rule(n: usize) -> GaussRule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Newton iteration on P_n with the classical Chebyshev-like seed.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    GaussRule { nodes, weights }
}

pub fn rule_lo() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| legendre_rule(N_LO))
}

pub fn rule_hi() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| legendre_rule(N_HI))
}

/// Fixed-order Gauss-Legendre on [a, b].
pub fn fixed_gauss<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rule: &GaussRule) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        acc += w * f(c + h * x);
    }
    acc * h
}

#[derive(Debug, Clone, Copy)]
struct Panel1 {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    depth: u32,
    seq: u64,
}

impl PartialEq for Panel1 {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err && self.seq == other.seq
    }
}
impl Eq for Panel1 {}
impl PartialOrd for Panel1 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel1 {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err
            .total_cmp(&other.err)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

fn eval_panel_1d<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, depth: u32, seq: u64) -> Panel1 {
    let lo = fixed_gauss(f, a, b, rule_lo());
    let hi = fixed_gauss(f, a, b, rule_hi());
    Panel1 {
        a,
        b,
        value: hi,
        err: (hi - lo).abs(),
        depth,
        seq,
    }
}

/// Adaptive 1D quadrature of `f` over [a, b].
///
/// Returns (value, error estimate). Fails with the achieved estimate if the
/// tolerance is not met within `max_depth` dyadic refinements.
pub fn adaptive_1d<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_depth: u32,
) -> Result<(f64, f64)> {
    if a == b {
        return Ok((0.0, 0.0));
    }
    let mut seq = 0u64;
    let mut heap = BinaryHeap::new();
    let first = eval_panel_1d(&f, a, b, 0, seq);
    let mut total = first.value;
    let mut total_err = first.err;
    heap.push(first);
    let max_panels = 1usize << max_depth.min(16);
    loop {
        let target = abs_tol.max(rel_tol * total.abs());
        if total_err <= target {
            return Ok((total, total_err));
        }
        let worst = heap.pop().expect("non-empty heap");
        if worst.depth >= max_depth || heap.len() + 2 > max_panels {
            return Err(Error::QuadratureNotConverged {
                achieved: total_err,
                requested: target,
            });
        }
        total -= worst.value;
        total_err -= worst.err;
        let mid = 0.5 * (worst.a + worst.b);
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            seq += 1;
            let child = eval_panel_1d(&f, lo, hi, worst.depth + 1, seq);
            total += child.value;
            total_err += child.err;
            heap.push(child);
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel2<const N: usize> {
    rect: [f64; 4], // r_lo, r_hi, z_lo, z_hi
    value: [f64; N],
    err: f64,
    depth: u32,
    seq: u64,
}

impl<const N: usize> PartialEq for Panel2<N> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err && self.seq == other.seq
    }
}
impl<const N: usize> Eq for Panel2<N> {}
impl<const N: usize> PartialOrd for Panel2<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Panel2<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err
            .total_cmp(&other.err)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

fn tensor_gauss<const N: usize, F: Fn(f64, f64) -> [f64; N]>(
    f: &F,
    rect: [f64; 4],
    rule: &GaussRule,
) -> [f64; N] {
    let [a, b, c, d] = rect;
    let cx = 0.5 * (a + b);
    let hx = 0.5 * (b - a);
    let cy = 0.5 * (c + d);
    let hy = 0.5 * (d - c);
    let mut acc = [0.0; N];
    for (xi, wi) in rule.nodes.iter().zip(&rule.weights) {
        let x = cx + hx * xi;
        for (yj, wj) in rule.nodes.iter().zip(&rule.weights) {
            let v = f(x, cy + hy * yj);
            let w = wi * wj;
            for k in 0..N {
                acc[k] += w * v[k];
            }
        }
    }
    for a in &mut acc {
        *a *= hx * hy;
    }
    acc
}

fn eval_panel_2d<const N: usize, F: Fn(f64, f64) -> [f64; N]>(
    f: &F,
    rect: [f64; 4],
    depth: u32,
    seq: u64,
) -> Panel2<N> {
    let lo = tensor_gauss(f, rect, rule_lo());
    let hi = tensor_gauss(f, rect, rule_hi());
    let mut err = 0.0;
    for k in 0..N {
        err += (hi[k] - lo[k]).abs();
    }
    Panel2 {
        rect,
        value: hi,
        err,
        depth,
        seq,
    }
}

/// Adaptive tensor-product quadrature of a vector-valued integrand over a
/// rectangle, with dyadic quad-tree panel refinement.
pub fn adaptive_2d<const N: usize, F: Fn(f64, f64) -> [f64; N]>(
    f: F,
    rect: [f64; 4],
    rel_tol: f64,
    abs_tol: f64,
    max_depth: u32,
    max_panels: usize,
) -> Result<([f64; N], f64)> {
    let mut seq = 0u64;
    let mut heap = BinaryHeap::new();
    let first = eval_panel_2d(&f, rect, 0, seq);
    let mut total = first.value;
    let mut total_err = first.err;
    heap.push(first);
    loop {
        let mut scale = 0.0f64;
        for k in 0..N {
            scale += total[k].abs();
        }
        let target = abs_tol.max(rel_tol * scale);
        if total_err <= target {
            return Ok((total, total_err));
        }
        let worst = heap.pop().expect("non-empty heap");
        if worst.depth >= max_depth || heap.len() + 4 > max_panels {
            return Err(Error::QuadratureNotConverged {
                achieved: total_err,
                requested: target,
            });
        }
        for k in 0..N {
            total[k] -= worst.value[k];
        }
        total_err -= worst.err;
        let [a, b, c, d] = worst.rect;
        let mx = 0.5 * (a + b);
        let my = 0.5 * (c + d);
        for child_rect in [
            [a, mx, c, my],
            [mx, b, c, my],
            [a, mx, my, d],
            [mx, b, my, d],
        ] {
            seq += 1;
            let child = eval_panel_2d(&f, child_rect, worst.depth + 1, seq);
            for k in 0..N {
                total[k] += child.value[k];
            }
            total_err += child.err;
            heap.push(child);
        }
    }
}

/// Integral of a smooth 2pi-periodic integrand over one period, by midpoint
/// rule with doubling. Spectrally accurate for analytic integrands and exact
/// on the pure cos(theta) mode, which carries the leading cancellation in the
/// axisymmetric kernels.
pub fn periodic_integral<const N: usize, F: Fn(f64) -> [f64; N]>(
    f: F,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<([f64; N], f64)> {
    let two_pi = 2.0 * std::f64::consts::PI;
    let eval_n = |n: usize| -> [f64; N] {
        let h = two_pi / n as f64;
        let mut acc = [0.0; N];
        for i in 0..n {
            let v = f(h * (i as f64 + 0.5));
            for k in 0..N {
                acc[k] += v[k];
            }
        }
        for a in &mut acc {
            *a *= h;
        }
        acc
    };
    let mut n = 16;
    let mut prev = eval_n(n);
    loop {
        n *= 2;
        let cur = eval_n(n);
        let mut err = 0.0f64;
        let mut scale = 0.0f64;
        for k in 0..N {
            err += (cur[k] - prev[k]).abs();
            scale += cur[k].abs();
        }
        if err <= abs_tol.max(rel_tol * scale) {
            return Ok((cur, err));
        }
        if n >= 1 << 16 {
            return Err(Error::QuadratureNotConverged {
                achieved: err,
                requested: abs_tol.max(rel_tol * scale),
            });
        }
        prev = cur;
    }
}
