//! Frozen Biot-Savart coefficients of the ring profile.
//!
//! Lambda(Gamma) is the kernel moment integral r^2 z / (r^2 + Gamma^2 z^2)^{5/2}
//! against -phi over the meridional plane (the z-odd symmetry doubles the
//! upper-half-plane integral). Its logarithmic derivative produces the
//! depletion correction Q(Gamma) and the depletion exponent
//! kappa(Gamma) = 5 - Q(Gamma).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::profile::ProfileSpec;
use crate::quad;

/// Relative quadrature tolerance for coefficient evaluation.
pub const QUAD_REL_TOL: f64 = 1e-8;
const QUAD_MAX_DEPTH: u32 = 14;
const QUAD_MAX_PANELS: usize = 1 << 14;

fn kernel_moment(p: &ProfileSpec, gamma: f64, rel_tol: f64) -> Result<f64> {
    let (v, _) = quad::adaptive_2d(
        |r, z| {
            let d = r * r + gamma * gamma * z * z;
            [r * r * z * d.powf(-2.5) * p.density(r, z)]
        },
        p.support_box(),
        rel_tol,
        0.0,
        QUAD_MAX_DEPTH,
        QUAD_MAX_PANELS,
    )?;
    Ok(2.0 * v[0])
}

fn kernel_moment_prime(p: &ProfileSpec, gamma: f64, rel_tol: f64) -> Result<f64> {
    let (v, _) = quad::adaptive_2d(
        |r, z| {
            let d = r * r + gamma * gamma * z * z;
            [r * r * z * z * z * d.powf(-3.5) * p.density(r, z)]
        },
        p.support_box(),
        rel_tol,
        0.0,
        QUAD_MAX_DEPTH,
        QUAD_MAX_PANELS,
    )?;
    Ok(-5.0 * gamma * 2.0 * v[0])
}

/// Frozen coefficient Lambda(Gamma), Gamma in (0, 1].
pub fn lambda_frozen(p: &ProfileSpec, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::invalid("gamma", format!("must lie in (0,1], got {gamma}")));
    }
    kernel_moment(p, gamma, QUAD_REL_TOL)
}

/// Gamma -> 0 limit of the frozen coefficient: the moment of z / r^3.
pub fn lambda_frozen_zero_limit(p: &ProfileSpec) -> Result<f64> {
    kernel_moment(p, 0.0, QUAD_REL_TOL)
}

/// Derivative Lambda'(Gamma) <= 0, differentiated under the integral sign.
pub fn lambda_frozen_prime(p: &ProfileSpec, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::invalid("gamma", format!("must lie in (0,1], got {gamma}")));
    }
    kernel_moment_prime(p, gamma, QUAD_REL_TOL)
}

/// Localized coefficient: the kernel frozen at the support center (r0, z0),
/// (z0 / r0^3) (1 + L^2 Gamma^2)^{-5/2}. Closed form, no quadrature.
pub fn lambda_localized(gamma: f64, cone_slope: f64, r0: f64) -> f64 {
    let z0 = cone_slope * r0;
    z0 / (r0 * r0 * r0) * (1.0 + cone_slope * cone_slope * gamma * gamma).powf(-2.5)
}

/// Depletion correction Q(Gamma) = 3 Gamma |Lambda'| / Lambda >= 0.
pub fn q_correction(p: &ProfileSpec, gamma: f64) -> Result<f64> {
    let lam = lambda_frozen(p, gamma)?;
    let lam_p = lambda_frozen_prime(p, gamma)?;
    Ok(3.0 * gamma * lam_p.abs() / lam)
}

/// Depletion exponent kappa(Gamma) = 5 + 3 Gamma Lambda'/Lambda = 5 - Q(Gamma).
pub fn kappa(p: &ProfileSpec, gamma: f64) -> Result<f64> {
    Ok(5.0 - q_correction(p, gamma)?)
}

/// Supremum of Q over Gamma in (0, 1], by grid scan plus golden-section
/// refinement around the argmax (bracket width 1e-4).
pub fn q_star(p: &ProfileSpec) -> Result<f64> {
    q_star_with_grid(p, 512)
}

pub fn q_star_with_grid(p: &ProfileSpec, n: usize) -> Result<f64> {
    let grid = log_uniform_grid(GAMMA_MIN, 1.0, n);
    let mut best = (0usize, f64::NEG_INFINITY);
    for (i, &g) in grid.iter().enumerate() {
        let q = q_correction(p, g)?;
        if q > best.1 {
            best = (i, q);
        }
    }
    let lo = grid[best.0.saturating_sub(1)];
    let hi = grid[(best.0 + 1).min(n - 1)];
    golden_max(|g| q_correction(p, g), lo, hi, 1e-4, best.1)
}

fn golden_max(
    f: impl Fn(f64) -> Result<f64>,
    mut a: f64,
    mut b: f64,
    width: f64,
    floor: f64,
) -> Result<f64> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    let mut best = floor.max(f1).max(f2);
    while b - a > width {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1)?;
        }
        best = best.max(f1).max(f2);
    }
    Ok(best)
}

/// Smallest tabulated Gamma; queries below fall back to the analytic limit.
pub const GAMMA_MIN: f64 = 1e-6;

pub fn log_uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (ll, lh) = (lo.ln(), hi.ln());
    let mut grid: Vec<f64> = (0..n)
        .map(|i| (ll + (lh - ll) * i as f64 / (n - 1) as f64).exp())
        .collect();
    // pin the endpoints exactly
    grid[0] = lo;
    grid[n - 1] = hi;
    grid
}

/// Monotone (Fritsch-Carlson) cubic interpolant.
#[derive(Debug, Clone, Serialize)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        assert!(n >= 2, "need at least two points");
        let h: Vec<f64> = (0..n - 1).map(|i| x[i + 1] - x[i]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] <= 0.0 {
                d[i] = 0.0;
            } else {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        d[0] = edge_slope(h[0], h.get(1).copied().unwrap_or(h[0]), delta[0], *delta.get(1).unwrap_or(&delta[0]));
        d[n - 1] = edge_slope(
            h[n - 2],
            if n >= 3 { h[n - 3] } else { h[n - 2] },
            delta[n - 2],
            if n >= 3 { delta[n - 3] } else { delta[n - 2] },
        );
        MonotoneCubic { x, y, d }
    }

    pub fn eval(&self, xq: f64) -> f64 {
        let n = self.x.len();
        let xq = xq.clamp(self.x[0], self.x[n - 1]);
        let i = match self.x.binary_search_by(|v| v.total_cmp(&xq)) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        };
        let h = self.x[i + 1] - self.x[i];
        let t = (xq - self.x[i]) / h;
        let (h00, h10, h01, h11) = hermite_basis(t);
        h00 * self.y[i] + h10 * h * self.d[i] + h01 * self.y[i + 1] + h11 * h * self.d[i + 1]
    }
}

fn edge_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if s * d0 <= 0.0 {
        0.0
    } else if d0 * d1 < 0.0 && s.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        s
    }
}

fn hermite_basis(t: f64) -> (f64, f64, f64, f64) {
    let t2 = t * t;
    let t3 = t2 * t;
    (
        2.0 * t3 - 3.0 * t2 + 1.0,
        t3 - 2.0 * t2 + t,
        -2.0 * t3 + 3.0 * t2,
        t3 - t2,
    )
}

/// Tabulated frozen coefficients on a log-uniform Gamma grid with monotone
/// cubic interpolation in log Gamma.
///
/// Immutable after construction and safe to share read-only across runs.
#[derive(Debug, Clone)]
pub struct CoefficientTable {
    pub profile: ProfileSpec,
    pub gamma_grid: Vec<f64>,
    pub lambda: Vec<f64>,
    pub lambda_prime: Vec<f64>,
    pub q_corr: Vec<f64>,
    pub kappa: Vec<f64>,
    lambda_zero: f64,
    log_lambda_spline: MonotoneCubic,
    q_spline: MonotoneCubic,
}

impl CoefficientTable {
    pub fn build(profile: &ProfileSpec) -> Result<Self> {
        Self::build_with_grid(profile, 512)
    }

    pub fn build_with_grid(profile: &ProfileSpec, n: usize) -> Result<Self> {
        if n < 8 {
            return Err(Error::invalid("n", "coefficient grid needs >= 8 points"));
        }
        let gamma_grid = log_uniform_grid(GAMMA_MIN, 1.0, n);
        let mut lambda = Vec::with_capacity(n);
        let mut lambda_prime = Vec::with_capacity(n);
        let mut q_corr = Vec::with_capacity(n);
        let mut kap = Vec::with_capacity(n);
        for &g in &gamma_grid {
            let lam = lambda_frozen(profile, g)?;
            let lam_p = lambda_frozen_prime(profile, g)?;
            let q = 3.0 * g * lam_p.abs() / lam;
            lambda.push(lam);
            lambda_prime.push(lam_p);
            q_corr.push(q);
            kap.push(5.0 - q);
        }
        // Monotonicity of Lambda holds analytically; a violation here means
        // the quadrature tolerance was not actually met.
        for i in 1..n {
            if lambda[i] > lambda[i - 1] * (1.0 + 1e-6) {
                return Err(Error::invalid(
                    "coefficient_table",
                    format!("Lambda not nonincreasing at grid index {i}"),
                ));
            }
        }
        let lambda_zero = lambda_frozen_zero_limit(profile)?;
        let logx: Vec<f64> = gamma_grid.iter().map(|g| g.ln()).collect();
        let log_lambda: Vec<f64> = lambda.iter().map(|l| l.ln()).collect();
        let log_lambda_spline = MonotoneCubic::new(logx.clone(), log_lambda);
        let q_spline = MonotoneCubic::new(logx, q_corr.clone());
        Ok(CoefficientTable {
            profile: *profile,
            gamma_grid,
            lambda,
            lambda_prime,
            q_corr,
            kappa: kap,
            lambda_zero,
            log_lambda_spline,
            q_spline,
        })
    }

    pub fn lambda_at(&self, gamma: f64) -> f64 {
        if gamma < GAMMA_MIN {
            return self.lambda_zero;
        }
        let g = gamma.min(1.0);
        self.log_lambda_spline.eval(g.ln()).exp()
    }

    pub fn q_at(&self, gamma: f64) -> f64 {
        if gamma < GAMMA_MIN {
            return 0.0;
        }
        self.q_spline.eval(gamma.min(1.0).ln())
    }

    pub fn kappa_at(&self, gamma: f64) -> f64 {
        5.0 - self.q_at(gamma)
    }

    pub fn lambda_zero_limit(&self) -> f64 {
        self.lambda_zero
    }

    pub fn cone_slope(&self) -> f64 {
        self.profile.cone_slope
    }

    /// CSV rows: gamma, lambda, lambda_prime, q, kappa.
    pub fn to_csv(&self) -> String {
        use crate::format::fmt_float;
        let mut out = String::from("# ringcascade-csv v1\ngamma,lambda,lambda_prime,q,kappa\n");
        for i in 0..self.gamma_grid.len() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt_float(self.gamma_grid[i]),
                fmt_float(self.lambda[i]),
                fmt_float(self.lambda_prime[i]),
                fmt_float(self.q_corr[i]),
                fmt_float(self.kappa[i]),
            ));
        }
        out
    }
}

/// Sandwich bounds on Q(Gamma) induced by the support cone slopes
/// L_- = (1-eta)/(1+eta) L and L_+ = (1+eta)/(1-eta) L:
/// 15 a^2/(1+a^2) at a = Gamma L_-/+.
pub fn q_sandwich_bounds(p: &ProfileSpec, gamma: f64) -> (f64, f64) {
    let l_minus = (1.0 - p.eta) / (1.0 + p.eta) * p.cone_slope;
    let l_plus = (1.0 + p.eta) / (1.0 - p.eta) * p.cone_slope;
    let side = |a: f64| 15.0 * a * a / (1.0 + a * a);
    (side(gamma * l_minus), side(gamma * l_plus))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{make_profile, psi, psi_log_derivative};

    fn default_profile() -> ProfileSpec {
        make_profile(50.0, 0.25, 1.0, 1.0).unwrap()
    }

    /// Independent oracle: same integrals with the quadrature pushed two
    /// orders tighter, so agreement at 1e-8 is meaningful.
    fn lambda_oracle(p: &ProfileSpec, gamma: f64) -> f64 {
        2.0 * quad::adaptive_2d(
            |r, z| {
                let d = r * r + gamma * gamma * z * z;
                [r * r * z * d.powf(-2.5) * p.density(r, z)]
            },
            p.support_box(),
            1e-11,
            0.0,
            16,
            1 << 16,
        )
        .unwrap()
        .0[0]
    }

    #[test]
    fn lambda_positive_and_matches_doubled_resolution() {
        let p = default_profile();
        let v = lambda_frozen(&p, 1.0).unwrap();
        assert!(v > 0.0);
        let oracle = lambda_oracle(&p, 1.0);
        assert!((v - oracle).abs() / oracle < 1e-8);
    }

    #[test]
    fn lambda_monotone_in_gamma() {
        let p = default_profile();
        let a = lambda_frozen(&p, 0.5).unwrap();
        let b = lambda_frozen(&p, 1.0).unwrap();
        assert!(a >= b);
    }

    #[test]
    fn lambda_zero_limit_is_z_over_r_cubed_moment() {
        let p = default_profile();
        let direct = 2.0
            * quad::adaptive_2d(
                |r, z| [z / (r * r * r) * p.density(r, z)],
                p.support_box(),
                1e-10,
                0.0,
                14,
                1 << 14,
            )
            .unwrap()
            .0[0];
        let limit = lambda_frozen_zero_limit(&p).unwrap();
        assert!((limit - direct).abs() / direct < 1e-8);
    }

    #[test]
    fn lambda_prime_matches_finite_difference() {
        let p = default_profile();
        let g = 0.5;
        let h = 1e-4;
        let fd = (lambda_frozen(&p, g + h).unwrap() - lambda_frozen(&p, g - h).unwrap()) / (2.0 * h);
        let lp = lambda_frozen_prime(&p, g).unwrap();
        assert!(lp <= 0.0);
        assert!((lp - fd).abs() / fd.abs() < 1e-5, "lp={lp} fd={fd}");
    }

    #[test]
    fn lambda_prime_vanishes_as_gamma_to_zero() {
        // The explicit Gamma prefactor makes Lambda' linear near zero.
        let p = default_profile();
        let lp1 = lambda_frozen_prime(&p, 1e-6).unwrap();
        let lp2 = lambda_frozen_prime(&p, 2e-6).unwrap();
        assert!((lp1 / lp2 - 0.5).abs() < 1e-4);
        assert!(q_correction(&p, 1e-6).unwrap() < 1e-6);
    }

    #[test]
    fn localized_closed_form_values() {
        assert!((lambda_localized(0.0, 50.0, 1.0) - 50.0).abs() < 1e-12);
        let l = 50.0;
        let expected = l * 2.0f64.powf(-2.5);
        assert!((lambda_localized(1.0 / l, l, 1.0) - expected).abs() / expected < 1e-12);
        let expected = 50.0 * 2501.0f64.powf(-2.5);
        assert!((lambda_localized(1.0, 50.0, 1.0) - expected).abs() / expected < 1e-12);
    }

    #[test]
    fn localized_consistency_with_psi_form() {
        // x Gamma^2 Lambda_loc(Gamma) = x(0) L^{-2/3} Psi(L Gamma) for r0 = 1,
        // using x = x(0) Gamma^{-1/3}.
        let (l, x0) = (50.0f64, 0.3f64);
        for gamma in [1.0f64, 0.3, 0.01, 1e-4] {
            let x = x0 * gamma.powf(-1.0 / 3.0);
            let lhs = x * gamma * gamma * lambda_localized(gamma, l, 1.0);
            let rhs = x0 * l.powf(-2.0 / 3.0) * psi(l * gamma);
            assert!((lhs - rhs).abs() / rhs < 1e-12, "gamma={gamma}");
        }
    }

    #[test]
    fn q_and_kappa_are_exact_complements() {
        let p = default_profile();
        let g = 0.02;
        let q = q_correction(&p, g).unwrap();
        let k = kappa(&p, g).unwrap();
        assert_eq!(k, 5.0 - q);
    }

    #[test]
    fn q_sandwich_at_small_gamma() {
        // eta = 1/4, L = 50: L_- = 30, L_+ = 250/3.
        let p = default_profile();
        let g = 0.02;
        let (lo, hi) = q_sandwich_bounds(&p, g);
        let expect_lo = 15.0 * (0.6f64).powi(2) / (1.0 + 0.36);
        let l_plus = 1.25 / 0.75 * 50.0;
        let expect_hi = 15.0 * (g * l_plus).powi(2) / (1.0 + (g * l_plus).powi(2));
        assert!((lo - expect_lo).abs() < 1e-12);
        assert!((hi - expect_hi).abs() < 1e-12);
        let q = q_correction(&p, g).unwrap();
        assert!(lo <= q && q <= hi, "q={q} not in [{lo},{hi}]");
    }

    #[test]
    fn kappa_bounded_by_psi_log_derivative_at_l_minus() {
        // Comparison to Psi: kappa(Gamma) <= 3 zeta Psi'(zeta)/Psi(zeta) at
        // zeta = Gamma L_-.
        let p = default_profile();
        let l_minus = (1.0 - p.eta) / (1.0 + p.eta) * p.cone_slope;
        for g in [0.05, 0.1, 0.5, 1.0] {
            let k = kappa(&p, g).unwrap();
            let bound = psi_log_derivative(g * l_minus);
            assert!(k <= bound + 1e-9, "gamma={g}: kappa={k} bound={bound}");
        }
    }

    #[test]
    fn q_star_bounds_and_grid_stability() {
        // Small-slope profile: Q_* <= 15 L_+^2/(1+L_+^2) with L_+ = 1/6.
        let p = make_profile(0.1, 0.25, 1.0, 1.0).unwrap();
        let qs = q_star_with_grid(&p, 128).unwrap();
        let l_plus: f64 = 1.25 / 0.75 * 0.1;
        let bound = 15.0 * l_plus.powi(2) / (1.0 + l_plus.powi(2));
        assert!(qs >= 0.0);
        assert!(qs <= bound);
        assert!((bound - 0.405).abs() < 5e-3);
        let qs_fine = q_star_with_grid(&p, 256).unwrap();
        assert!((qs - qs_fine).abs() <= 1e-3 * qs_fine.max(1.0));
    }

    #[test]
    fn table_interpolation_accuracy_and_limits() {
        let p = default_profile();
        let table = CoefficientTable::build_with_grid(&p, 128).unwrap();
        for g in [2e-6, 1e-4, 3e-3, 0.07, 0.4, 0.93] {
            let exact = lambda_frozen(&p, g).unwrap();
            let interp = table.lambda_at(g);
            assert!(
                (interp - exact).abs() / exact < 1e-4,
                "gamma={g}: interp={interp} exact={exact}"
            );
        }
        assert_eq!(table.lambda_at(1e-9), table.lambda_zero_limit());
        assert_eq!(table.kappa_at(1e-9), 5.0);
        // grid endpoints reproduce exactly
        assert!((table.lambda_at(1.0) - table.lambda[127]).abs() / table.lambda[127] < 1e-14);
    }

    #[test]
    fn monotone_cubic_preserves_monotonicity() {
        let x: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 1.0 / (1.0 + v)).collect();
        let spline = MonotoneCubic::new(x, y);
        let mut prev = f64::INFINITY;
        for i in 0..400 {
            let v = spline.eval(19.0 * i as f64 / 399.0);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }
}
