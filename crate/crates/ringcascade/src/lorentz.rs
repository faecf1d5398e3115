//! Lorentz L^{p,q} quasi-norms of sampled axisymmetric fields.
//!
//! A field is a bag of cells (value, 3D volume). The decreasing rearrangement
//! is a step function of cumulative volume, on which the quasi-norm
//! ( int_0^inf (t^{1/p} f*(t))^q dt/t )^{1/q}
//! has a closed form per step. No extra normalization constant is applied,
//! so L^{p,p} coincides with the plain L^p norm.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::profile::ProfileSpec;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Cell {
    pub value: f64,
    pub volume: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SampledField {
    pub cells: Vec<Cell>,
    /// Grid description, carried into reports.
    pub meta: String,
}

impl SampledField {
    pub fn new(cells: Vec<Cell>) -> Self {
        SampledField {
            cells,
            meta: String::new(),
        }
    }

    pub fn with_meta(cells: Vec<Cell>, meta: impl Into<String>) -> Self {
        SampledField {
            cells,
            meta: meta.into(),
        }
    }

    pub fn total_volume(&self) -> f64 {
        self.cells.iter().map(|c| c.volume).sum()
    }

    /// Merge another field (disjoint-support union).
    pub fn extend(&mut self, other: &SampledField) {
        self.cells.extend_from_slice(&other.cells);
    }

    /// CSV dump: value, volume.
    pub fn to_csv(&self) -> String {
        use crate::format::fmt_float;
        let mut out = String::from("# ringcascade-csv v1\nvalue,volume\n");
        for c in &self.cells {
            out.push_str(&format!("{},{}\n", fmt_float(c.value), fmt_float(c.volume)));
        }
        out
    }
}

/// L^{p,q} quasi-norm of the sampled field, p > 1, q in [1, inf).
/// Exact on the step-function rearrangement; empty fields have norm 0.
pub fn lorentz_quasinorm(field: &SampledField, p: f64, q: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::invalid("p", "need p > 1"));
    }
    if !(q >= 1.0) && q.is_finite() {
        return Err(Error::invalid("q", "need q >= 1"));
    }
    if !q.is_finite() {
        return Err(Error::invalid("q", "q = infinity is not supported"));
    }
    let mut cells: Vec<&Cell> = field.cells.iter().filter(|c| c.value > 0.0).collect();
    if cells.is_empty() {
        return Ok(0.0);
    }
    cells.sort_by(|a, b| b.value.total_cmp(&a.value));
    let qp = q / p;
    let mut t_prev_pow = 0.0; // t_{i-1}^{q/p}
    let mut t_cum = 0.0;
    let mut acc = 0.0;
    for c in cells {
        t_cum += c.volume;
        let t_pow = t_cum.powf(qp);
        acc += c.value.powf(q) * (t_pow - t_prev_pow);
        t_prev_pow = t_pow;
    }
    // int_{t0}^{t1} t^{q/p - 1} dt = (p/q) (t1^{q/p} - t0^{q/p})
    Ok(((p / q) * acc).powf(1.0 / q))
}

/// Per-ring adapted midpoint sampling of |omega_{0,k} / r| over the upper
/// half-plane support, with volumes doubled for the mirror half.
fn single_ring_field(
    profile: &ProfileSpec,
    amplitude: f64,
    scale: f64,
    n: usize,
) -> SampledField {
    let [rl, rh, zl, zh] = profile.support_box();
    let (rl, rh, zl, zh) = (rl * scale, rh * scale, zl * scale, zh * scale);
    let dr = (rh - rl) / n as f64;
    let dz = (zh - zl) / n as f64;
    let mut cells = Vec::with_capacity(n * n);
    for i in 0..n {
        let r = rl + (i as f64 + 0.5) * dr;
        for j in 0..n {
            let z = zl + (j as f64 + 0.5) * dz;
            let value = amplitude * profile.density(r / scale, z / scale) / r;
            if value > 0.0 {
                cells.push(Cell {
                    value,
                    volume: 2.0 * std::f64::consts::TAU * r * dr * dz,
                });
            }
        }
    }
    SampledField::new(cells)
}

/// Cell in log coordinates. Ring scales d^k leave f64 range near k ~ 150,
/// so deep multi-ring fields carry log(value) and log(volume) instead.
#[derive(Debug, Clone, Copy)]
struct LogCell {
    log_value: f64,
    log_volume: f64,
}

/// log(e^a + e^b) without overflow.
fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Quasi-norm of log-cells. Each rearrangement step contributes
/// v_i^q (t_i^{q/p} - t_{i-1}^{q/p}) = exp(q lv_i + (q/p) lt_i) (1 - r^{q/p})
/// with r = t_{i-1}/t_i <= 1, which stays in f64 range because the cascade
/// scaling keeps q lv + (q/p) lt bounded even when lv, lt individually are not.
fn quasinorm_from_log_cells(cells: &mut [LogCell], p: f64, q: f64) -> f64 {
    if cells.is_empty() {
        return 0.0;
    }
    cells.sort_by(|a, b| b.log_value.total_cmp(&a.log_value));
    let qp = q / p;
    let mut log_t = f64::NEG_INFINITY;
    let mut acc = 0.0;
    for c in cells.iter() {
        let log_t_next = log_add_exp(log_t, c.log_volume);
        let ratio_pow = if log_t == f64::NEG_INFINITY {
            0.0
        } else {
            (qp * (log_t - log_t_next)).exp()
        };
        acc += (q * c.log_value + qp * log_t_next).exp() * (1.0 - ratio_pow);
        log_t = log_t_next;
    }
    ((p / q) * acc).powf(1.0 / q)
}

/// Log-cell sampling of one ring of |omega_0/r|, parameterized by
/// log(amplitude) and log(scale) so arbitrarily deep rings stay exact.
fn single_ring_log_cells(
    profile: &ProfileSpec,
    log_amplitude: f64,
    log_scale: f64,
    n: usize,
    out: &mut Vec<LogCell>,
) {
    let [rl, rh, zl, zh] = profile.support_box();
    let dr = (rh - rl) / n as f64;
    let dz = (zh - zl) / n as f64;
    for i in 0..n {
        let r = rl + (i as f64 + 0.5) * dr;
        for j in 0..n {
            let z = zl + (j as f64 + 0.5) * dz;
            let density = profile.density(r, z);
            if density > 0.0 {
                // value = amp * density(r', z') / (scale r'); volume scales as scale^3
                out.push(LogCell {
                    log_value: log_amplitude - log_scale + (density / r).ln(),
                    log_volume: 3.0 * log_scale + (2.0 * std::f64::consts::TAU * r * dr * dz).ln(),
                });
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MultiRingConfig {
    pub eps: f64,
    pub alpha: f64,
    pub m: usize,
    pub profile: ProfileSpec,
    /// Cells per dimension of each ring's adapted grid.
    pub cells_per_dim: usize,
}

impl MultiRingConfig {
    pub fn new(eps: f64, alpha: f64, m: usize, profile: ProfileSpec) -> Self {
        MultiRingConfig {
            eps,
            alpha,
            m,
            profile,
            cells_per_dim: 24,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MultiRingNorm {
    /// L^{3,q} quasi-norm of omega_0^{(m)} / r.
    pub total: f64,
    /// Single-ring norms, k = 1..m.
    pub per_ring: Vec<f64>,
    /// total / (ell^q of the ring amplitudes * single-ring profile norm).
    pub ellq_ratio: f64,
    pub q: f64,
}

const RING_SCALE_BASE: f64 = 1e-2;
const GRID_SELF_CONVERGENCE_TOL: f64 = 1e-3;

/// Sample omega_0^{(m)} / r on per-ring adapted grids and return its L^{3,q}
/// quasi-norm, the per-ring norms, and the ell^q equivalence ratio. Fails if
/// doubling the grid moves the total by more than 1e-3 relative.
pub fn multiring_relative_vorticity_norm(cfg: &MultiRingConfig, q: f64) -> Result<MultiRingNorm> {
    let p = 3.0;
    let log_d = RING_SCALE_BASE.ln();
    let compute = |n: usize| -> (f64, Vec<f64>) {
        let mut union: Vec<LogCell> = Vec::with_capacity(cfg.m * n * n);
        let mut per_ring = Vec::with_capacity(cfg.m);
        for k in 1..=cfg.m {
            let log_amp = cfg.eps.ln() - cfg.alpha * (k as f64).ln();
            let log_scale = k as f64 * log_d;
            // omega_{0,k}(r,z) = eps k^-alpha phi(r/d^k, z/d^k)
            let start = union.len();
            single_ring_log_cells(&cfg.profile, log_amp, log_scale, n, &mut union);
            let mut own: Vec<LogCell> = union[start..].to_vec();
            per_ring.push(quasinorm_from_log_cells(&mut own, p, q));
        }
        (quasinorm_from_log_cells(&mut union, p, q), per_ring)
    };
    let (coarse, _) = compute(cfg.cells_per_dim);
    let (total, per_ring) = compute(2 * cfg.cells_per_dim);
    let rel_change = (total - coarse).abs() / total.max(1e-300);
    if rel_change > GRID_SELF_CONVERGENCE_TOL {
        return Err(Error::GridResolution {
            rel_change,
            tol: GRID_SELF_CONVERGENCE_TOL,
        });
    }
    // ell^q of the amplitudes times the profile norm (k = 1 ring rescaled)
    let profile_norm = per_ring[0] / cfg.eps;
    let ellq: f64 = (1..=cfg.m)
        .map(|k| (k as f64).powf(-cfg.alpha * q))
        .sum::<f64>()
        .powf(1.0 / q)
        * cfg.eps;
    Ok(MultiRingNorm {
        total,
        per_ring,
        ellq_ratio: total / (ellq * profile_norm),
        q,
    })
}

/// The sampled union field |omega_0^{(m)}/r| in plain (value, volume) cells,
/// for dumps and direct quasi-norm calls. Deep hierarchies leave f64 range,
/// so m is capped at 40.
pub fn multiring_field(cfg: &MultiRingConfig) -> Result<SampledField> {
    if cfg.m > 40 {
        return Err(Error::invalid(
            "m",
            "plain-cell fields are limited to m <= 40 (scales below 1e-80); use the norm routines for deeper hierarchies",
        ));
    }
    let mut union = SampledField::default();
    for k in 1..=cfg.m {
        let amp = cfg.eps / (k as f64).powf(cfg.alpha);
        let scale = RING_SCALE_BASE.powi(k as i32);
        union.extend(&single_ring_field(
            &cfg.profile,
            amp,
            scale,
            cfg.cells_per_dim,
        ));
    }
    union.meta = format!(
        "{m} rings, per-ring {n}x{n} midpoint grid, upper half-plane doubled",
        m = cfg.m,
        n = cfg.cells_per_dim
    );
    Ok(union)
}

/// Choose eps so that the computed L^{3,q} norm of omega_0/r (m = 2^10
/// truncation plus the analytic ell^q tail bound) plus the L^inf-cap-L^1 norm
/// of omega_0 stays within `target`. Capped at eps = 1. Requires alpha q > 1.
pub fn smallness_budget(
    target: f64,
    q: f64,
    alpha: f64,
    profile: &ProfileSpec,
) -> Result<f64> {
    if !(target > 0.0) {
        return Err(Error::invalid("target", "must be positive"));
    }
    if !(alpha * q > 1.0) {
        return Err(Error::invalid(
            "alpha",
            format!("need alpha q > 1 for a finite budget, got alpha q = {}", alpha * q),
        ));
    }
    let m = 1 << 10;
    let cfg = MultiRingConfig {
        eps: 1.0,
        alpha,
        m,
        profile: *profile,
        cells_per_dim: 12,
    };
    let norm = multiring_relative_vorticity_norm(&cfg, q)?;
    // analytic tail of the ell^q sum beyond m, relative to the head
    let head: f64 = (1..=m).map(|k| (k as f64).powf(-alpha * q)).sum();
    let tail = (m as f64).powf(1.0 - alpha * q) / (alpha * q - 1.0);
    let lorentz_part = norm.total * (1.0 + tail / head).powf(1.0 / q);
    // L^inf: largest ring amplitude; L^1: geometric sum of ring masses
    let linf = profile.amplitude;
    let l1_profile = profile.l1_norm_3d()?;
    let l1: f64 = (1..=200)
        .map(|k| (RING_SCALE_BASE.powi(3 * k)) / (k as f64).powf(alpha))
        .sum::<f64>()
        * l1_profile;
    let per_eps = lorentz_part + linf.max(l1);
    Ok((target / per_eps).min(1.0))
}
