//! Closed-form threshold helpers, exponent fits, and the experiment drivers
//! that reproduce the inflation/decay dichotomies and scaling laws.

use serde::Serialize;

use crate::cascade::{
    diagnostics, run_until_inflation, zeta_eta, CascadeRun, CascadeTrajectory,
};
use crate::error::{Error, Result};

/// Front threshold at the reference localization width eta = 1/4.
pub fn zeta_eta_default() -> f64 {
    zeta_eta(0.25)
}

/// Tail exponent of the flattened model at time t > 0:
/// x_k(t) ~ k^{(2/5)(1-alpha) - alpha}. Zero at alpha = 2/7.
pub fn flattened_exponent(alpha: f64) -> f64 {
    0.4 * (1.0 - alpha) - alpha
}

/// Decay threshold of the frozen model, 2 / (7 - Q_*). Requires Q_* < 5.
pub fn frozen_decay_threshold(q_star: f64) -> Result<f64> {
    if !(0.0..5.0).contains(&q_star) {
        return Err(Error::invalid(
            "q_star",
            format!("decay threshold needs 0 <= Q_* < 5, got {q_star}"),
        ));
    }
    Ok(2.0 / (7.0 - q_star))
}

/// Admissible decay-exponent window (1/q, log(L/zeta_eta)/(3 theta + log(L/zeta_eta))).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AlphaRange {
    pub lo: f64,
    pub hi: f64,
}

impl AlphaRange {
    pub fn is_empty(&self) -> bool {
        self.lo >= self.hi
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, alpha: f64) -> bool {
        alpha > self.lo && alpha < self.hi
    }
}

pub fn admissible_alpha_range(cone_slope: f64, theta: f64, q: f64) -> Result<AlphaRange> {
    let ze = zeta_eta_default();
    if !(cone_slope > ze) {
        return Err(Error::invalid(
            "cone_slope",
            format!("must exceed zeta_eta = {ze:.6}, got {cone_slope}"),
        ));
    }
    if !(theta >= 1.0) {
        return Err(Error::invalid("theta", "must be >= 1"));
    }
    if !(q > 1.0) {
        return Err(Error::invalid("q", "must exceed 1"));
    }
    let lg = (cone_slope / ze).ln();
    Ok(AlphaRange {
        lo: 1.0 / q,
        hi: lg / (3.0 * theta + lg),
    })
}

/// Cone slope L = zeta_eta * exp((1 + margin) * 3 theta / (q - 1)), strictly
/// inside the nonempty-range condition for the given margin > 0.
pub fn choose_cone_slope(q: f64, theta: f64, margin: f64) -> Result<f64> {
    if !(q > 1.0) {
        return Err(Error::invalid("q", "must exceed 1"));
    }
    if !(theta >= 1.0) {
        return Err(Error::invalid("theta", "must be >= 1"));
    }
    if !(margin > 0.0) {
        return Err(Error::invalid("margin", "must be strictly positive"));
    }
    Ok(zeta_eta_default() * ((1.0 + margin) * 3.0 * theta / (q - 1.0)).exp())
}

/// gamma = 3 theta / log(L/zeta_eta) and beta = 1/(1+gamma) - alpha.
/// The inflation-time slope bound is -(1+gamma) beta = alpha - 1 + gamma alpha.
pub fn beta_exponent(cone_slope: f64, alpha: f64, theta: f64) -> Result<(f64, f64)> {
    let ze = zeta_eta_default();
    if !(cone_slope > ze) {
        return Err(Error::invalid(
            "cone_slope",
            format!("must exceed zeta_eta = {ze:.6}"),
        ));
    }
    let gamma = 3.0 * theta / (cone_slope / ze).ln();
    Ok((gamma, 1.0 / (1.0 + gamma) - alpha))
}

/// Lorentz integrability threshold of the borderline cascade configuration:
/// p_* = 3 log(1/d) / (log A + log(1/d)) < 3.
pub fn cmz_threshold(a: f64, d: f64) -> Result<f64> {
    if !(a > 1.0) {
        return Err(Error::invalid("a", "must exceed 1"));
    }
    if !(d > 0.0 && d < 1.0) {
        return Err(Error::invalid("d", "must lie in (0,1)"));
    }
    let ld = (1.0 / d).ln();
    Ok(3.0 * ld / (a.ln() + ld))
}

/// Riccati comparison oracles for the stretching rate S_k:
/// lower(t) = 1 / ((rate/2) t + 1/S0),
/// upper(t) = lam_star / (1 - (1 - lam_star/S0) exp(-(rate/2) lam_star t)).
/// The flattened model uses rate = 5, lam_star = 1; the frozen decay bound
/// uses rate = 5 - Q_* and lam_star = eps Lambda(1).
pub fn riccati_oracles(s0: f64, t: f64, rate: f64, lam_star: f64) -> (f64, f64) {
    let half = 0.5 * rate;
    let lower = 1.0 / (half * t + 1.0 / s0);
    let upper = lam_star / (1.0 - (1.0 - lam_star / s0) * (-half * lam_star * t).exp());
    (lower, upper)
}

/// Ordinary least squares y = a + b x; returns (slope, intercept).
pub fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdReport {
    pub alpha: f64,
    pub model: String,
    pub fitted_exponent: f64,
    /// The flattened-model tail exponent (2/5)(1-alpha) - alpha; a reference
    /// line for every model (other models shift it by the depletion
    /// correction).
    pub predicted_exponent: f64,
    pub fit_k_min: usize,
    pub fit_k_max: usize,
    pub residual: f64,
}

/// Least-squares fit of log x_k(t) against log k over the dyadic k in
/// [k_min, k_max]. The range must span at least three octaves.
pub fn fit_tail_exponent(
    traj: &CascadeTrajectory,
    t: f64,
    k_min: usize,
    k_max: usize,
) -> Result<ThresholdReport> {
    if k_min < 2 || k_max > traj.run.m || k_max < 8 * k_min {
        return Err(Error::InsufficientFitRange {
            reason: format!(
                "need 2 <= k_min, k_max <= m, and k_max >= 8 k_min; got [{k_min}, {k_max}] with m = {}",
                traj.run.m
            ),
        });
    }
    let state = traj.sample_at_time(t)?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut k = k_min;
    while k <= k_max {
        xs.push((k as f64).ln());
        ys.push(state.logx[k - 1]);
        k *= 2;
    }
    let (slope, intercept) = ols(&xs, &ys);
    let residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (intercept + slope * x)).abs())
        .fold(0.0f64, f64::max);
    Ok(ThresholdReport {
        alpha: traj.run.alpha,
        model: traj.run.model.name().to_string(),
        fitted_exponent: slope,
        predicted_exponent: flattened_exponent(traj.run.alpha),
        fit_k_min: k_min,
        fit_k_max: k_max,
        residual,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingReport {
    pub m_values: Vec<usize>,
    pub t_n_values: Vec<f64>,
    pub fitted_slope: f64,
    pub fitted_intercept: f64,
    /// beta from beta_exponent at theta = 1, when the model has a cone slope.
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    /// -(1+gamma) beta = alpha - 1 + gamma alpha.
    pub beta_bound_slope: Option<f64>,
    pub monotone_decreasing: bool,
    /// t_N(m) <= t_N(m_0) (m/m_0)^{-beta} for all larger m.
    pub bound_satisfied: Option<bool>,
}

/// Run the inflation experiment over a list of ring counts and fit the decay
/// of t_N with m. The template's `m` field is replaced per run.
pub fn tn_scaling_experiment(template: &CascadeRun, m_list: &[usize]) -> Result<ScalingReport> {
    if m_list.len() < 2 {
        return Err(Error::invalid("m_list", "need at least two ring counts"));
    }
    let mut t_n_values = Vec::with_capacity(m_list.len());
    for (i, &m) in m_list.iter().enumerate() {
        let mut run = template.clone();
        run.m = m;
        let traj = run_until_inflation(&run)?;
        match traj.events.t_inflation {
            Some(t) => t_n_values.push(t),
            None => {
                return Err(Error::NoInflation {
                    index: i,
                    m,
                    t_max: run.t_max,
                })
            }
        }
    }
    let xs: Vec<f64> = m_list.iter().map(|m| (*m as f64).ln()).collect();
    let ys: Vec<f64> = t_n_values.iter().map(|t| t.ln()).collect();
    let (fitted_slope, fitted_intercept) = ols(&xs, &ys);
    let monotone_decreasing = t_n_values.windows(2).all(|w| w[1] < w[0]);
    let (beta, gamma, beta_bound_slope, bound_satisfied) = match template.model.cone_slope() {
        Some(l) => {
            let (g, b) = beta_exponent(l, template.alpha, 1.0)?;
            let (m0, t0) = (m_list[0] as f64, t_n_values[0]);
            let ok = m_list
                .iter()
                .zip(&t_n_values)
                .skip(1)
                .all(|(m, t)| *t <= t0 * (*m as f64 / m0).powf(-b));
            (Some(b), Some(g), Some(-(1.0 + g) * b), Some(ok))
        }
        None => (None, None, None, None),
    };
    Ok(ScalingReport {
        m_values: m_list.to_vec(),
        t_n_values,
        fitted_slope,
        fitted_intercept,
        beta,
        gamma,
        beta_bound_slope,
        monotone_decreasing,
        bound_satisfied,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FrontMargin {
    pub t: f64,
    pub s_m_minus_1: f64,
    /// S_{m-1}(t) * 3 theta t / log(L / zeta_eta); the front-migration bound
    /// asserts margin >= 1 at every admissible sample.
    pub margin: f64,
}

/// Evaluate the front-induced 1/t bound on every retained sample with
/// zeta_m(t) < zeta_eta. Samples before the front hit are skipped.
pub fn front_bound_check(traj: &CascadeTrajectory, theta: f64) -> Result<Vec<FrontMargin>> {
    let l = traj.run.model.cone_slope().ok_or_else(|| {
        Error::invalid("model", "front bound needs a localized or frozen trajectory")
    })?;
    let thr = traj
        .run
        .model
        .front_threshold()
        .expect("cone slope implies threshold");
    let log_ratio = (l / thr).ln();
    let m = traj.run.m;
    let mut out = Vec::new();
    for s in &traj.samples {
        let d = diagnostics(s, &traj.run);
        let zeta_m = d.zeta.as_ref().expect("cone slope implies zeta")[m - 1];
        if zeta_m >= thr || s.t <= 0.0 {
            continue;
        }
        let s_m1 = d.s[m - 2];
        out.push(FrontMargin {
            t: s.t,
            s_m_minus_1: s_m1,
            margin: s_m1 * 3.0 * theta * s.t / log_ratio,
        });
    }
    Ok(out)
}

/// Check the Riccati sandwich on every retained sample of a flattened
/// trajectory: lower <= S_k(t) <= upper for all k, with rate 5 and
/// Lambda_* = 1 (valid for eps <= 1). Returns the worst signed slack
/// (negative means a violation of that size).
pub fn riccati_sandwich_slack(traj: &CascadeTrajectory) -> f64 {
    let m = traj.run.m;
    // S_k(0) through the model's own coefficient path
    let state0 = crate::cascade::CascadeState {
        t: 0.0,
        logx: (1..=m).map(|k| traj.run.log_x0(k)).collect(),
        big_b: vec![0.0; m],
    };
    let s0: Vec<f64> = {
        let mut acc = 0.0;
        (1..=m)
            .map(|k| {
                acc += traj.run.b_coefficient(k, &state0);
                acc
            })
            .collect()
    };
    let mut slack = f64::INFINITY;
    for sample in &traj.samples {
        let d = diagnostics(sample, &traj.run);
        for k in 0..m {
            let (lower, upper) = riccati_oracles(s0[k], sample.t, 5.0, 1.0);
            slack = slack.min(d.s[k] - lower);
            slack = slack.min(upper - d.s[k]);
        }
    }
    slack
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::{integrate, CascadeModel, SamplePlan};

    #[test]
    fn flattened_exponent_values() {
        assert!(flattened_exponent(2.0 / 7.0).abs() < 1e-15);
        assert!((flattened_exponent(0.2) - 0.12).abs() < 1e-15);
        assert!((flattened_exponent(0.4) + 0.16).abs() < 1e-15);
        for alpha in [0.05, 0.2, 0.3, 0.5, 0.9] {
            let sign = flattened_exponent(alpha).signum();
            let expect = (2.0 / 7.0 - alpha).signum();
            assert_eq!(sign, expect);
        }
    }

    #[test]
    fn frozen_threshold_values() {
        assert!((frozen_decay_threshold(0.0).unwrap() - 2.0 / 7.0).abs() < 1e-15);
        assert!((frozen_decay_threshold(2.0).unwrap() - 0.4).abs() < 1e-15);
        assert!((frozen_decay_threshold(4.9).unwrap() - 2.0 / 2.1).abs() < 1e-12);
        assert!(frozen_decay_threshold(5.0).is_err());
        assert!(frozen_decay_threshold(-0.1).is_err());
    }

    #[test]
    fn alpha_range_examples() {
        let ze = zeta_eta_default();
        let r = admissible_alpha_range(ze * 3.0f64.exp(), 1.0, 2.0).unwrap();
        assert!((r.hi - 0.5).abs() < 1e-12);
        assert!(r.is_empty());
        let r = admissible_alpha_range(ze * 6.0f64.exp(), 1.0, 2.0).unwrap();
        assert!((r.hi - 6.0 / 9.0).abs() < 1e-12);
        assert!(!r.is_empty());
    }

    #[test]
    fn cone_slope_selection() {
        let l = choose_cone_slope(2.0, 1.0, 0.1).unwrap();
        assert!((l - zeta_eta_default() * 3.3f64.exp()).abs() < 1e-9);
        assert!((l - 31.96).abs() < 0.01);
        // q -> infinity pushes L down to zeta_eta
        let l_big_q = choose_cone_slope(1e9, 1.0, 0.1).unwrap();
        assert!((l_big_q - zeta_eta_default()).abs() / zeta_eta_default() < 1e-6);
        assert!(choose_cone_slope(2.0, 1.0, 0.0).is_err());
        // minimal L for a nonempty range at theta = Theta_mu, q = 2
        let theta = crate::cascade::theta_mu(0.05);
        let l_min = zeta_eta_default() * (3.0 * theta / 1.0f64).exp();
        assert!((l_min - 940.0).abs() / 940.0 < 0.01);
        let l = choose_cone_slope(2.0, theta, 0.05).unwrap();
        assert!(l > l_min);
        let range = admissible_alpha_range(l, theta, 2.0).unwrap();
        assert!(!range.is_empty());
    }

    #[test]
    fn beta_exponent_identities() {
        let ze = zeta_eta_default();
        let (g, b) = beta_exponent(ze * 3.0f64.exp(), 0.3, 1.0).unwrap();
        assert!((g - 1.0).abs() < 1e-12);
        assert!((b - 0.2).abs() < 1e-12);
        // slope identity -(1+gamma) beta = alpha - 1 + gamma alpha
        for (l_fac, alpha, theta) in [(3.0, 0.3, 1.0), (5.0, 0.45, 1.3), (7.0, 0.6, 2.227)] {
            let (g, b) = beta_exponent(ze * f64::exp(l_fac), alpha, theta).unwrap();
            let lhs = -(1.0 + g) * b;
            let rhs = alpha - 1.0 + g * alpha;
            assert!((lhs - rhs).abs() < 1e-12);
        }
        // beta > 0 iff alpha strictly inside the admissible range
        let l = ze * 4.0f64.exp();
        let range = admissible_alpha_range(l, 1.0, 2.0).unwrap();
        for alpha in [range.hi - 0.05, range.hi, (range.hi + 0.05).min(0.99)] {
            let (_, b) = beta_exponent(l, alpha, 1.0).unwrap();
            assert_eq!(b > 0.0, alpha < range.hi);
        }
    }

    #[test]
    fn cmz_threshold_values() {
        let p = cmz_threshold(2.0, 0.125).unwrap();
        assert!((p - 2.25).abs() < 1e-12);
        // A -> 1+ pushes p_* to 3-
        let p = cmz_threshold(1.0 + 1e-9, 0.5).unwrap();
        assert!(p < 3.0 && p > 3.0 - 1e-6);
        for (a, d) in [(1.5, 0.3), (10.0, 0.01), (2.0, 0.9)] {
            assert!(cmz_threshold(a, d).unwrap() < 3.0);
        }
        assert!(cmz_threshold(0.9, 0.5).is_err());
        assert!(cmz_threshold(2.0, 1.5).is_err());
    }

    #[test]
    fn riccati_oracle_limits() {
        let s0 = 0.7;
        let (lo, hi) = riccati_oracles(s0, 0.0, 5.0, 1.0);
        assert!((lo - s0).abs() < 1e-14);
        assert!((hi - s0).abs() < 1e-14);
        // fixed point of the logistic
        let (_, hi) = riccati_oracles(1.0, 3.7, 5.0, 1.0);
        assert!((hi - 1.0).abs() < 1e-14);
        // long-time limits
        let (lo, hi) = riccati_oracles(0.7, 1e9, 5.0, 1.0);
        assert!(lo < 1e-8);
        assert!((hi - 1.0).abs() < 1e-8);
    }

    #[test]
    fn ols_recovers_affine_data() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x - 1.0).collect();
        let (slope, intercept) = ols(&xs, &ys);
        assert!((slope - 2.5).abs() < 1e-12);
        assert!((intercept + 1.0).abs() < 1e-12);
    }

    #[test]
    fn tail_fit_requires_three_octaves() {
        let run = CascadeRun::new(CascadeModel::Flattened, 1.0, 0.2, 64)
            .with_t_max(0.1)
            .with_samples(SamplePlan::Times(vec![0.1]));
        let traj = integrate(&run).unwrap();
        assert!(fit_tail_exponent(&traj, 0.1, 8, 32).is_err());
        assert!(fit_tail_exponent(&traj, 0.1, 8, 64).is_ok());
    }

    #[test]
    fn tail_fit_at_time_zero_recovers_initial_slope() {
        // x_k(0) = eps k^{-alpha}: the fitted exponent is exactly -alpha.
        let run = CascadeRun::new(CascadeModel::Flattened, 1.0, 0.35, 64)
            .with_t_max(0.1)
            .with_samples(SamplePlan::Times(vec![0.0, 0.1]));
        let traj = integrate(&run).unwrap();
        let rep = fit_tail_exponent(&traj, 0.0, 4, 64).unwrap();
        assert!((rep.fitted_exponent + 0.35).abs() < 1e-10);
        assert!(rep.residual < 1e-10);
    }
}
