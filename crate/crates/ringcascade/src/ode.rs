//! Embedded Dormand-Prince 5(4) integrator with dense output.
//!
//! Deterministic: fixed evaluation order, no parallelism. The dense output is
//! the standard fourth-order continuous extension, which is what event
//! bisection and sample interpolation run on.

use crate::error::{Error, Result};

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize, PartialEq)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_step: f64::INFINITY,
            max_steps: 10_000_000,
        }
    }
}

#[derive(Debug, Default, Clone, Copy, serde::Serialize)]
pub struct OdeStats {
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    pub rhs_evals: usize,
}

/// Continuous extension over one accepted step [t0, t0 + h].
#[derive(Debug, Clone)]
pub struct DenseSegment {
    pub t0: f64,
    pub h: f64,
    r1: Vec<f64>,
    r2: Vec<f64>,
    r3: Vec<f64>,
    r4: Vec<f64>,
    r5: Vec<f64>,
}

impl DenseSegment {
    pub fn t_end(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        let theta = ((t - self.t0) / self.h).clamp(0.0, 1.0);
        let om = 1.0 - theta;
        for i in 0..out.len() {
            out[i] = self.r1[i]
                + theta * (self.r2[i] + om * (self.r3[i] + theta * (self.r4[i] + om * self.r5[i])));
        }
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.r1.len()];
        self.eval_into(t, &mut out);
        out
    }
}

pub struct Dopri5<F> {
    rhs: F,
    pub t: f64,
    pub y: Vec<f64>,
    opts: OdeOptions,
    pub stats: OdeStats,
    h: f64,
    k: [Vec<f64>; 7],
    y_stage: Vec<f64>,
    first: bool,
}

impl<F: FnMut(f64, &[f64], &mut [f64])> Dopri5<F> {
    pub fn new(rhs: F, t0: f64, y0: Vec<f64>, opts: OdeOptions) -> Self {
        let n = y0.len();
        Dopri5 {
            rhs,
            t: t0,
            y: y0,
            opts,
            stats: OdeStats::default(),
            h: 0.0,
            k: std::array::from_fn(|_| vec![0.0; n]),
            y_stage: vec![0.0; n],
            first: true,
        }
    }

    fn scaled_rms(&self, v: &[f64], y0: &[f64], y1: &[f64]) -> f64 {
        let n = v.len();
        let mut acc = 0.0;
        for i in 0..n {
            let sc = self.opts.abs_tol + self.opts.rel_tol * y0[i].abs().max(y1[i].abs());
            let r = v[i] / sc;
            acc += r * r;
        }
        (acc / n as f64).sqrt()
    }

    fn initial_step(&mut self, t_end: f64) -> f64 {
        let n = self.y.len();
        let dir = (t_end - self.t).signum();
        let mut f0 = vec![0.0; n];
        (self.rhs)(self.t, &self.y, &mut f0);
        self.stats.rhs_evals += 1;
        let mut d0: f64 = 0.0;
        let mut d1: f64 = 0.0;
        for i in 0..n {
            let sc = self.opts.abs_tol + self.opts.rel_tol * self.y[i].abs();
            d0 += (self.y[i] / sc).powi(2);
            d1 += (f0[i] / sc).powi(2);
        }
        d0 = (d0 / n as f64).sqrt();
        d1 = (d1 / n as f64).sqrt();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        let h0 = h0.min((t_end - self.t).abs());
        let mut y1 = vec![0.0; n];
        for i in 0..n {
            y1[i] = self.y[i] + dir * h0 * f0[i];
        }
        let mut f1 = vec![0.0; n];
        (self.rhs)(self.t + dir * h0, &y1, &mut f1);
        self.stats.rhs_evals += 1;
        let mut d2: f64 = 0.0;
        for i in 0..n {
            let sc = self.opts.abs_tol + self.opts.rel_tol * self.y[i].abs();
            d2 += ((f1[i] - f0[i]) / sc).powi(2);
        }
        d2 = (d2 / n as f64).sqrt() / h0;
        let d_max = d1.max(d2);
        let h1 = if d_max <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d_max).powf(0.2)
        };
        dir * (100.0 * h0)
            .min(h1)
            .min(self.opts.max_step)
            .min((t_end - self.t).abs())
    }

    /// Advance one accepted step, not crossing `t_limit`. Returns the dense
    /// segment covering the accepted interval, or None if already at the limit.
    pub fn step(&mut self, t_limit: f64) -> Result<Option<DenseSegment>> {
        if (t_limit - self.t).abs() <= f64::EPSILON * self.t.abs().max(1.0) {
            return Ok(None);
        }
        let n = self.y.len();
        if self.first {
            self.h = self.initial_step(t_limit);
            // k1 for FSAL priming
            let mut k1 = std::mem::take(&mut self.k[0]);
            (self.rhs)(self.t, &self.y, &mut k1);
            self.stats.rhs_evals += 1;
            self.k[0] = k1;
            self.first = false;
        }
        let dir = (t_limit - self.t).signum();
        loop {
            if self.stats.steps_accepted + self.stats.steps_rejected >= self.opts.max_steps {
                return Err(Error::TooManySteps {
                    t: self.t,
                    max_steps: self.opts.max_steps,
                });
            }
            let mut h = self.h.abs().min(self.opts.max_step) * dir;
            if (self.t + h - t_limit) * dir > 0.0 {
                h = t_limit - self.t;
            }
            if h.abs() <= self.t.abs().max(1.0) * 1e-16 {
                return Err(Error::StepSizeUnderflow { t: self.t, h });
            }

            // stages 2..7 (k1 is FSAL from the previous step)
            macro_rules! stage {
                ($ki:expr, $c:expr, $($aj:expr => $kj:expr),+) => {{
                    for i in 0..n {
                        let mut acc = 0.0;
                        $( acc += $aj * self.k[$kj][i]; )+
                        self.y_stage[i] = self.y[i] + h * acc;
                    }
                    let mut knew = std::mem::take(&mut self.k[$ki]);
                    (self.rhs)(self.t + $c * h, &self.y_stage, &mut knew);
                    self.stats.rhs_evals += 1;
                    self.k[$ki] = knew;
                }};
            }
            stage!(1, C2, A21 => 0);
            stage!(2, C3, A31 => 0, A32 => 1);
            stage!(3, C4, A41 => 0, A42 => 1, A43 => 2);
            stage!(4, C5, A51 => 0, A52 => 1, A53 => 2, A54 => 3);
            stage!(5, 1.0, A61 => 0, A62 => 1, A63 => 2, A64 => 3, A65 => 4);
            // 5th-order solution into y_stage
            for i in 0..n {
                self.y_stage[i] = self.y[i]
                    + h * (A71 * self.k[0][i]
                        + A73 * self.k[2][i]
                        + A74 * self.k[3][i]
                        + A75 * self.k[4][i]
                        + A76 * self.k[5][i]);
            }
            let mut k7 = std::mem::take(&mut self.k[6]);
            (self.rhs)(self.t + h, &self.y_stage, &mut k7);
            self.stats.rhs_evals += 1;
            self.k[6] = k7;

            // embedded error estimate
            let mut err_vec = vec![0.0; n];
            for i in 0..n {
                err_vec[i] = h
                    * (E1 * self.k[0][i]
                        + E3 * self.k[2][i]
                        + E4 * self.k[3][i]
                        + E5 * self.k[4][i]
                        + E6 * self.k[5][i]
                        + E7 * self.k[6][i]);
            }
            let err = self.scaled_rms(&err_vec, &self.y, &self.y_stage);
            if !err.is_finite() {
                return Err(Error::NonFiniteState { t: self.t });
            }

            if err <= 1.0 {
                // accept: build dense segment
                let mut seg = DenseSegment {
                    t0: self.t,
                    h,
                    r1: self.y.clone(),
                    r2: vec![0.0; n],
                    r3: vec![0.0; n],
                    r4: vec![0.0; n],
                    r5: vec![0.0; n],
                };
                for i in 0..n {
                    let ydiff = self.y_stage[i] - self.y[i];
                    let bspl = h * self.k[0][i] - ydiff;
                    seg.r2[i] = ydiff;
                    seg.r3[i] = bspl;
                    seg.r4[i] = ydiff - h * self.k[6][i] - bspl;
                    seg.r5[i] = h
                        * (D1 * self.k[0][i]
                            + D3 * self.k[2][i]
                            + D4 * self.k[3][i]
                            + D5 * self.k[4][i]
                            + D6 * self.k[5][i]
                            + D7 * self.k[6][i]);
                }
                self.t += h;
                std::mem::swap(&mut self.y, &mut self.y_stage);
                self.k.swap(0, 6); // FSAL
                self.stats.steps_accepted += 1;
                let fac = (0.9 * err.max(1e-30).powf(-0.2)).clamp(0.2, 5.0);
                self.h = (h * fac).abs() * dir.signum();
                return Ok(Some(seg));
            }
            self.stats.steps_rejected += 1;
            let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            self.h = (h * fac).abs() * dir.signum();
        }
    }
}

/// Bisect a scalar function of the dense output to locate a sign change to
/// the requested relative precision in t.
pub fn bisect_event(
    seg: &DenseSegment,
    mut g: impl FnMut(&[f64]) -> f64,
    rel_tol_t: f64,
) -> Option<f64> {
    let mut a = seg.t0;
    let mut b = seg.t_end();
    let mut buf = seg.eval(a);
    let ga = g(&buf);
    seg.eval_into(b, &mut buf);
    let gb = g(&buf);
    if ga > 0.0 {
        return Some(a);
    }
    if gb < 0.0 {
        return None;
    }
    while (b - a).abs() > rel_tol_t * b.abs().max(1.0) {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break; // float resolution exhausted
        }
        seg.eval_into(mid, &mut buf);
        if g(&buf) < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    Some(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn drive<F: FnMut(f64, &[f64], &mut [f64])>(
        rhs: F,
        y0: Vec<f64>,
        t_end: f64,
        opts: OdeOptions,
    ) -> (Vec<f64>, OdeStats) {
        let mut solver = Dopri5::new(rhs, 0.0, y0, opts);
        while solver.step(t_end).unwrap().is_some() {}
        (solver.y.clone(), solver.stats)
    }

    #[test]
    fn exponential_growth_matches() {
        let (y, _) = drive(
            |_, y, dy| dy[0] = y[0],
            vec![1.0],
            2.0,
            OdeOptions::default(),
        );
        assert!((y[0] - 2.0f64.exp()).abs() / 2.0f64.exp() < 1e-9);
    }

    #[test]
    fn oscillator_and_dense_output() {
        let opts = OdeOptions::default();
        let mut solver = Dopri5::new(
            |_, y: &[f64], dy: &mut [f64]| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            0.0,
            vec![1.0, 0.0],
            opts,
        );
        let t_end = 3.0;
        while let Some(seg) = solver.step(t_end).unwrap() {
            // dense output accuracy inside the step
            let tm = seg.t0 + 0.37 * seg.h;
            let ym = seg.eval(tm);
            assert!((ym[0] - tm.cos()).abs() < 1e-7);
        }
        assert!((solver.y[0] - t_end.cos()).abs() < 1e-8);
        assert!((solver.y[1] + t_end.sin()).abs() < 1e-8);
    }

    #[test]
    fn event_bisection_finds_crossing() {
        let mut solver = Dopri5::new(
            |_, y: &[f64], dy: &mut [f64]| dy[0] = y[0],
            0.0,
            vec![0.5],
            OdeOptions::default(),
        );
        // find t with y = 1: t = ln 2
        let target = 1.0f64;
        let mut hit = None;
        while let Some(seg) = solver.step(5.0).unwrap() {
            let end = seg.eval(seg.t_end());
            if end[0] >= target {
                hit = bisect_event(&seg, |y| y[0] - target, 1e-12);
                break;
            }
        }
        let t = hit.expect("crossing not found");
        assert!((t - std::f64::consts::LN_2).abs() < 1e-9);
    }

    #[test]
    fn step_limit_is_enforced() {
        let opts = OdeOptions {
            max_steps: 10,
            ..OdeOptions::default()
        };
        let mut solver = Dopri5::new(
            |t: f64, _y: &[f64], dy: &mut [f64]| dy[0] = (20.0 * t).sin() * 40.0,
            0.0,
            vec![0.0],
            opts,
        );
        let mut res = Ok(None);
        for _ in 0..1000 {
            res = solver.step(1e6);
            if res.is_err() {
                break;
            }
        }
        assert!(matches!(res, Err(Error::TooManySteps { .. })));
    }
}
