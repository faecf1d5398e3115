//! Dyadic cascade ODE models for ring amplitudes.
//!
//! State is (log x_k, B_k) for rings k = 1..m, with B_k = int_0^t b_k
//! co-integrated so the cascade identity
//! Gamma_{j+1} = Gamma_j exp(-3 B_j) holds to integrator accuracy.
//! The first ring is never stretched: d/dt log x_1 = 0.
//!
//! Per-ring contributions b_j by model:
//!   strong     b_j = x_j
//!   flattened  b_j = x_j Gamma_j^2
//!   frozen     b_j = x_j Gamma_j^2 Lambda(Gamma_j)   (tabulated coefficient)
//!   localized  b_j = x_j(0) L^{-2/3} Psi(L Gamma_j)
//! with Gamma_j = (x_j(0)/x_j)^3.

use std::sync::Arc;

use serde::Serialize;

use crate::coeffs::{lambda_localized, CoefficientTable};
use crate::error::{Error, Result};
use crate::format::fmt_float;
use crate::ode::{bisect_event, Dopri5, OdeOptions, OdeStats};
use crate::profile::{psi, ZETA_STAR};

/// Productive-window threshold zeta_eta = (1+eta)/(1-eta) * zeta_*.
pub fn zeta_eta(eta: f64) -> f64 {
    (1.0 + eta) / (1.0 - eta) * ZETA_STAR
}

/// Lower freezing-comparison constant c_mu = (1-mu)^3 / (1+mu)^5.
pub fn c_mu_lower(mu: f64) -> f64 {
    (1.0 - mu).powi(3) / (1.0 + mu).powi(5)
}

/// Upper freezing-comparison constant C_mu = (1+mu)^3 / (1-mu)^5.
pub fn c_mu_upper(mu: f64) -> f64 {
    (1.0 + mu).powi(3) / (1.0 - mu).powi(5)
}

/// Comparison ratio Theta_mu = C_mu / c_mu = ((1+mu)/(1-mu))^8.
pub fn theta_mu(mu: f64) -> f64 {
    ((1.0 + mu) / (1.0 - mu)).powi(8)
}

/// Which right-hand side drives the cascade.
#[derive(Clone)]
pub enum CascadeModel {
    Strong,
    Flattened,
    Frozen(Arc<CoefficientTable>),
    Localized { cone_slope: f64, r0: f64 },
}

impl std::fmt::Debug for CascadeModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CascadeModel::Strong => write!(f, "Strong"),
            CascadeModel::Flattened => write!(f, "Flattened"),
            CascadeModel::Frozen(t) => write!(
                f,
                "Frozen(L={}, eta={})",
                t.profile.cone_slope, t.profile.eta
            ),
            CascadeModel::Localized { cone_slope, r0 } => {
                write!(f, "Localized(L={cone_slope}, r0={r0})")
            }
        }
    }
}

impl CascadeModel {
    pub fn name(&self) -> &'static str {
        match self {
            CascadeModel::Strong => "strong",
            CascadeModel::Flattened => "flattened",
            CascadeModel::Frozen(_) => "frozen",
            CascadeModel::Localized { .. } => "localized",
        }
    }

    pub fn cone_slope(&self) -> Option<f64> {
        match self {
            CascadeModel::Frozen(t) => Some(t.profile.cone_slope),
            CascadeModel::Localized { cone_slope, .. } => Some(*cone_slope),
            _ => None,
        }
    }

    /// Front threshold zeta_eta for models with a cone slope. The localized
    /// model carries no profile, so it uses the reference width eta = 1/4.
    pub fn front_threshold(&self) -> Option<f64> {
        match self {
            CascadeModel::Frozen(t) => Some(zeta_eta(t.profile.eta)),
            CascadeModel::Localized { .. } => Some(zeta_eta(0.25)),
            _ => None,
        }
    }
}

/// Constant per-ring multiplicative factors on b_j, standing in for the
/// bounded measurable perturbations of the comparison harness.
#[derive(Debug, Clone, Serialize)]
pub struct Perturbation {
    pub factors: Vec<f64>,
}

impl Perturbation {
    pub fn uniform(m: usize, factor: f64) -> Self {
        Perturbation {
            factors: vec![factor; m],
        }
    }

    /// Worst-case constants in [c_mu, C_mu]: alternate the band endpoints so
    /// adjacent rings see maximally different weights.
    pub fn worst_case_alternating(m: usize, mu: f64) -> Self {
        let (lo, hi) = (c_mu_lower(mu), c_mu_upper(mu));
        Perturbation {
            factors: (0..m).map(|j| if j % 2 == 0 { hi } else { lo }).collect(),
        }
    }
}

/// What the trajectory keeps.
#[derive(Debug, Clone, Serialize)]
pub enum SamplePlan {
    /// Dense-output samples at the given (strictly increasing) times.
    Times(Vec<f64>),
    /// Accepted integrator steps, decimated to at most `max_samples`.
    Adaptive { max_samples: usize },
}

impl Default for SamplePlan {
    fn default() -> Self {
        SamplePlan::Adaptive { max_samples: 512 }
    }
}

#[derive(Clone, Debug)]
pub struct CascadeRun {
    pub model: CascadeModel,
    pub eps: f64,
    pub alpha: f64,
    pub m: usize,
    /// Target amplitude A; the inflation event fires at A/(1-mu).
    pub target_a: f64,
    pub mu: f64,
    pub t_max: f64,
    pub integrator: OdeOptions,
    pub samples: SamplePlan,
    pub perturbation: Option<Perturbation>,
}

impl CascadeRun {
    pub fn new(model: CascadeModel, eps: f64, alpha: f64, m: usize) -> Self {
        CascadeRun {
            model,
            eps,
            alpha,
            m,
            target_a: f64::INFINITY,
            mu: 0.05,
            t_max: f64::INFINITY,
            integrator: OdeOptions::default(),
            samples: SamplePlan::default(),
            perturbation: None,
        }
    }

    pub fn with_target(mut self, a: f64) -> Self {
        self.target_a = a;
        self
    }

    pub fn with_t_max(mut self, t: f64) -> Self {
        self.t_max = t;
        self
    }

    pub fn with_samples(mut self, plan: SamplePlan) -> Self {
        self.samples = plan;
        self
    }

    pub fn with_perturbation(mut self, p: Perturbation) -> Self {
        self.perturbation = Some(p);
        self
    }

    pub fn with_tolerances(mut self, rel: f64, abs: f64) -> Self {
        self.integrator.rel_tol = rel;
        self.integrator.abs_tol = abs;
        self
    }

    /// Renormalized inflation target A / (1 - mu).
    pub fn a_bar(&self) -> f64 {
        self.target_a / (1.0 - self.mu)
    }

    pub fn log_x0(&self, k: usize) -> f64 {
        debug_assert!(k >= 1 && k <= self.m);
        self.eps.ln() - self.alpha * (k as f64).ln()
    }

    pub fn x0(&self, k: usize) -> f64 {
        self.eps / (k as f64).powf(self.alpha)
    }

    fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::invalid("m", format!("need m >= 2, got {}", self.m)));
        }
        if !(self.eps > 0.0) {
            return Err(Error::invalid("eps", format!("must be positive, got {}", self.eps)));
        }
        if !(self.alpha >= 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(
                "alpha",
                format!("must lie in [0,1), got {}", self.alpha),
            ));
        }
        if !(self.mu > 0.0 && self.mu < 1.0) {
            return Err(Error::invalid("mu", format!("must lie in (0,1), got {}", self.mu)));
        }
        if !(self.t_max > 0.0) {
            return Err(Error::invalid("t_max", "must be positive"));
        }
        if self.t_max.is_infinite() && !self.target_a.is_finite() {
            return Err(Error::invalid(
                "t_max",
                "either t_max or target_a must be finite",
            ));
        }
        if let Some(p) = &self.perturbation {
            if p.factors.len() != self.m {
                return Err(Error::invalid(
                    "perturbation",
                    format!("expected {} factors, got {}", self.m, p.factors.len()),
                ));
            }
            if p.factors.iter().any(|f| !(*f > 0.0)) {
                return Err(Error::invalid("perturbation", "factors must be positive"));
            }
        }
        if let SamplePlan::Times(ts) = &self.samples {
            if ts.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::invalid("samples", "times must be strictly increasing"));
            }
            if ts.first().is_some_and(|t| *t < 0.0) {
                return Err(Error::invalid("samples", "times must be nonnegative"));
            }
        }
        Ok(())
    }

    fn fill_b(&self, logx: &[f64], b: &mut [f64]) {
        let m = self.m;
        match &self.model {
            CascadeModel::Strong => {
                for j in 0..m {
                    b[j] = logx[j].exp();
                }
            }
            CascadeModel::Flattened => {
                for j in 0..m {
                    let delta = logx[j] - self.log_x0(j + 1);
                    b[j] = (logx[j] - 6.0 * delta).exp(); // x_j Gamma_j^2 = x0 e^{-5 delta}
                }
            }
            CascadeModel::Frozen(table) => {
                for j in 0..m {
                    let delta = logx[j] - self.log_x0(j + 1);
                    let gamma = (-3.0 * delta).exp().min(1.0);
                    b[j] = (logx[j] - 6.0 * delta).exp() * table.lambda_at(gamma);
                }
            }
            CascadeModel::Localized { cone_slope, .. } => {
                let scale = cone_slope.powf(-2.0 / 3.0);
                for j in 0..m {
                    let delta = logx[j] - self.log_x0(j + 1);
                    let zeta = cone_slope * (-3.0 * delta).exp().min(1.0);
                    b[j] = self.x0(j + 1) * scale * psi(zeta);
                }
            }
        }
        if let Some(p) = &self.perturbation {
            for j in 0..m {
                b[j] *= p.factors[j];
            }
        }
    }

    /// Per-ring contribution b_k (1-based k) at a state, including any
    /// configured perturbation factor.
    pub fn b_coefficient(&self, k: usize, state: &CascadeState) -> f64 {
        assert!(k >= 1 && k <= self.m, "ring index out of range");
        let delta = state.logx[k - 1] - self.log_x0(k);
        let gamma = (-3.0 * delta).exp().min(1.0);
        let raw = match &self.model {
            CascadeModel::Strong => state.logx[k - 1].exp(),
            CascadeModel::Flattened => (state.logx[k - 1] - 6.0 * delta).exp(),
            CascadeModel::Frozen(table) => {
                (state.logx[k - 1] - 6.0 * delta).exp() * table.lambda_at(gamma)
            }
            CascadeModel::Localized { cone_slope, r0 } => {
                let psi_form =
                    self.x0(k) * cone_slope.powf(-2.0 / 3.0) * psi(cone_slope * gamma);
                // Same quantity through the localized coefficient, up to the
                // declared 1/r0^2 normalization.
                let x = state.logx[k - 1].exp();
                let lambda_form =
                    x * gamma * gamma * lambda_localized(gamma, *cone_slope, *r0) * r0 * r0;
                debug_assert!(
                    psi_form == 0.0 || ((psi_form - lambda_form) / psi_form).abs() < 1e-10,
                    "psi/lambda forms disagree: {psi_form} vs {lambda_form}"
                );
                psi_form
            }
        };
        match &self.perturbation {
            Some(p) => raw * p.factors[k - 1],
            None => raw,
        }
    }

    /// Time derivative of (log x, B) at a state: prefix sums of b in O(m).
    pub fn rhs(&self, state: &CascadeState) -> (Vec<f64>, Vec<f64>) {
        let m = self.m;
        let mut b = vec![0.0; m];
        self.fill_b(&state.logx, &mut b);
        let mut dlogx = vec![0.0; m];
        let mut s = 0.0;
        for k in 1..m {
            s += b[k - 1];
            dlogx[k] = s;
        }
        (dlogx, b)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CascadeState {
    pub t: f64,
    pub logx: Vec<f64>,
    /// Co-integrated B_k = int_0^t b_k ds.
    pub big_b: Vec<f64>,
}

impl CascadeState {
    fn from_vec(t: f64, y: &[f64], m: usize) -> Self {
        CascadeState {
            t,
            logx: y[..m].to_vec(),
            big_b: y[m..].to_vec(),
        }
    }

    /// Amplitude x_k, 1-based ring index.
    pub fn x(&self, k: usize) -> f64 {
        self.logx[k - 1].exp()
    }

    pub fn max_x(&self) -> f64 {
        self.logx.iter().cloned().fold(f64::NEG_INFINITY, f64::max).exp()
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct CascadeEvents {
    /// First time max_k x_k reaches A/(1-mu).
    pub t_inflation: Option<f64>,
    /// First time zeta_m drops below the front threshold.
    pub t_front_hit: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RunStatus {
    Inflated,
    ReachedTMax,
}

#[derive(Debug, Clone)]
pub struct CascadeTrajectory {
    pub run: CascadeRun,
    pub samples: Vec<CascadeState>,
    pub events: CascadeEvents,
    pub stats: OdeStats,
    pub status: RunStatus,
}

/// Per-state derived quantities.
#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub gamma: Vec<f64>,
    pub zeta: Option<Vec<f64>>,
    pub b: Vec<f64>,
    /// `s[i] = S_{i+1} = b_1 + ... + b_{i+1}`.
    pub s: Vec<f64>,
    /// Largest ring index j <= m-1 with zeta_j >= zeta_eta (1-based).
    pub front_index: Option<usize>,
    /// residual[j-1] = log Gamma_{j+1} - log Gamma_j + 3 B_j, j = 1..m-1.
    pub cascade_residual: Vec<f64>,
}

pub fn diagnostics(state: &CascadeState, run: &CascadeRun) -> Diagnostics {
    let m = run.m;
    let mut gamma = vec![0.0; m];
    let mut delta = vec![0.0; m];
    for j in 0..m {
        delta[j] = state.logx[j] - run.log_x0(j + 1);
        gamma[j] = (-3.0 * delta[j]).exp();
    }
    let mut b = vec![0.0; m];
    run.fill_b(&state.logx, &mut b);
    let mut s = vec![0.0; m];
    let mut acc = 0.0;
    for j in 0..m {
        acc += b[j];
        s[j] = acc;
    }
    let zeta = run
        .model
        .cone_slope()
        .map(|l| gamma.iter().map(|g| l * g).collect::<Vec<_>>());
    let front_index = match (&zeta, run.model.front_threshold()) {
        (Some(z), Some(thr)) => {
            let mut idx = None;
            for j in (1..m).rev() {
                if z[j - 1] >= thr {
                    idx = Some(j);
                    break;
                }
            }
            idx
        }
        _ => None,
    };
    let cascade_residual = (0..m - 1)
        .map(|j| -3.0 * delta[j + 1] + 3.0 * delta[j] + 3.0 * state.big_b[j])
        .collect();
    Diagnostics {
        gamma,
        zeta,
        b,
        s,
        front_index,
        cascade_residual,
    }
}

impl CascadeTrajectory {
    pub fn diagnostics(&self, sample_index: usize) -> Diagnostics {
        diagnostics(&self.samples[sample_index], &self.run)
    }

    pub fn sample_at_time(&self, t: f64) -> Result<&CascadeState> {
        self.samples
            .iter()
            .find(|s| (s.t - t).abs() <= 1e-9 * t.abs().max(1.0))
            .ok_or(Error::NoSampleAtTime { t })
    }

    /// Max over samples and rings of the cascade-identity residual.
    pub fn max_cascade_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for s in &self.samples {
            let d = diagnostics(s, &self.run);
            for r in d.cascade_residual {
                worst = worst.max(r.abs());
            }
        }
        worst
    }

    /// Trajectory CSV: t, k, x, gamma, zeta, b, S_k, B. The zeta column is
    /// empty for models without a cone slope.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("# ringcascade-csv v1\nt,k,x,gamma,zeta,b,S_k,B\n");
        for s in &self.samples {
            let d = diagnostics(s, &self.run);
            for k in 1..=self.run.m {
                let zeta = match &d.zeta {
                    Some(z) => fmt_float(z[k - 1]),
                    None => String::new(),
                };
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    fmt_float(s.t),
                    k,
                    fmt_float(s.x(k)),
                    fmt_float(d.gamma[k - 1]),
                    zeta,
                    fmt_float(d.b[k - 1]),
                    fmt_float(d.s[k - 1]),
                    fmt_float(s.big_b[k - 1]),
                ));
            }
        }
        out
    }
}

/// Integrate a cascade run to t_max, stopping early at the inflation event.
pub fn integrate(run: &CascadeRun) -> Result<CascadeTrajectory> {
    run.validate()?;
    let m = run.m;
    let mut y0 = vec![0.0; 2 * m];
    for k in 1..=m {
        y0[k - 1] = run.log_x0(k);
    }
    let log_a_bar = if run.target_a.is_finite() {
        if run.a_bar() <= run.eps {
            return Err(Error::invalid(
                "target_a",
                format!(
                    "renormalized target {} must exceed eps {}",
                    run.a_bar(),
                    run.eps
                ),
            ));
        }
        Some(run.a_bar().ln())
    } else {
        None
    };
    // front event: delta_m crossing log(L / zeta_eta) / 3
    let front_delta = match (run.model.cone_slope(), run.model.front_threshold()) {
        (Some(l), Some(thr)) if l > thr => Some((l / thr).ln() / 3.0),
        _ => None,
    };
    let logx0_m = run.log_x0(m);

    let run_for_rhs = run.clone();
    let mut b_buf = vec![0.0; m];
    let rhs = move |_t: f64, y: &[f64], dy: &mut [f64]| {
        run_for_rhs.fill_b(&y[..m], &mut b_buf);
        dy[0] = 0.0;
        let mut s = 0.0;
        for k in 1..m {
            s += b_buf[k - 1];
            dy[k] = s;
        }
        dy[m..2 * m].copy_from_slice(&b_buf);
    };

    let mut solver = Dopri5::new(rhs, 0.0, y0.clone(), run.integrator);

    let mut samples: Vec<CascadeState> = Vec::new();
    let mut pending_times: std::collections::VecDeque<f64> = match &run.samples {
        SamplePlan::Times(ts) => ts.iter().cloned().collect(),
        SamplePlan::Adaptive { .. } => Default::default(),
    };
    let adaptive_cap = match &run.samples {
        SamplePlan::Adaptive { max_samples } => Some((*max_samples).max(4)),
        _ => None,
    };
    // t = 0 sample
    if let Some(&t0) = pending_times.front() {
        if t0 == 0.0 {
            samples.push(CascadeState::from_vec(0.0, &y0, m));
            pending_times.pop_front();
        }
    } else if adaptive_cap.is_some() {
        samples.push(CascadeState::from_vec(0.0, &y0, m));
    }

    let mut events = CascadeEvents::default();
    let mut status = RunStatus::ReachedTMax;
    let mut stride = 1usize;
    let mut step_counter = 0usize;

    'outer: while let Some(seg) = solver.step(run.t_max)? {
        // requested sample times inside this segment
        while let Some(&t_want) = pending_times.front() {
            if t_want > seg.t_end() {
                break;
            }
            if t_want >= seg.t0 {
                let y = seg.eval(t_want);
                samples.push(CascadeState::from_vec(t_want, &y, m));
            }
            pending_times.pop_front();
        }
        // front-hit event (recorded, does not stop the run)
        if events.t_front_hit.is_none() {
            if let Some(fd) = front_delta {
                if solver.y[m - 1] - logx0_m >= fd {
                    events.t_front_hit =
                        bisect_event(&seg, |y| (y[m - 1] - logx0_m) - fd, 1e-12);
                }
            }
        }
        // inflation event (stops the run)
        if let Some(la) = log_a_bar {
            let max_logx = solver.y[..m].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if max_logx >= la {
                let t_n = bisect_event(
                    &seg,
                    |y| y[..m].iter().cloned().fold(f64::NEG_INFINITY, f64::max) - la,
                    1e-12,
                )
                .expect("sign change bracketed");
                events.t_inflation = Some(t_n);
                status = RunStatus::Inflated;
                // drop adaptive samples past the event, then finish below
                samples.retain(|s| s.t <= t_n);
                let y = seg.eval(t_n);
                samples.push(CascadeState::from_vec(t_n, &y, m));
                break 'outer;
            }
        }
        // adaptive per-step retention
        if let Some(cap) = adaptive_cap {
            step_counter += 1;
            if step_counter.is_multiple_of(stride) {
                samples.push(CascadeState::from_vec(solver.t, &solver.y, m));
                if samples.len() >= cap {
                    let mut i = 0usize;
                    samples.retain(|_| {
                        let keep = i.is_multiple_of(2);
                        i += 1;
                        keep
                    });
                    stride *= 2;
                }
            }
        }
    }

    if status == RunStatus::ReachedTMax {
        let last_t = samples.last().map(|s| s.t);
        if last_t != Some(solver.t) {
            samples.push(CascadeState::from_vec(solver.t, &solver.y, m));
        }
    }

    Ok(CascadeTrajectory {
        run: run.clone(),
        samples,
        events,
        stats: solver.stats,
        status,
    })
}

/// Integrate until the inflation event. Requires target_a > eps. Reaching
/// t_max without inflating is a status on the trajectory, not an error.
pub fn run_until_inflation(run: &CascadeRun) -> Result<CascadeTrajectory> {
    if !(run.target_a > run.eps) {
        return Err(Error::invalid(
            "target_a",
            format!("must exceed eps for an inflation event, got {}", run.target_a),
        ));
    }
    integrate(run)
}
