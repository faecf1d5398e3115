//! Command implementations behind the `ringcascade` binary.
//!
//! Commands: run, sweep, verify, coeffs, bs-check, lorentz. Every run is
//! driven by a manifest (file plus flag overrides) and writes deterministic
//! artifacts: two invocations of the same manifest produce byte-identical
//! CSV/JSON.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;

use crate::analysis::{
    fit_tail_exponent, flattened_exponent, tn_scaling_experiment, ScalingReport,
};
use crate::biotsavart::{
    annular_kernel_mass_exact, annular_kernel_mass_quadrature, origin_stretching_rate,
    prop21_residuals, velocity, Ring, RingSnapshot, RING_SCALE_BASE,
};
use crate::cascade::{
    integrate, CascadeModel, CascadeRun, CascadeTrajectory, Perturbation, RunStatus, SamplePlan,
};
use crate::coeffs::CoefficientTable;
use crate::error::{Error, Result};
use crate::format::fmt_float;
use crate::lorentz::{
    lorentz_quasinorm, multiring_field, multiring_relative_vorticity_norm, MultiRingConfig,
};
use crate::manifest::Manifest;
use crate::ode::OdeOptions;
use crate::profile::ProfileSpec;

pub const OUT_DIR_ENV: &str = "RINGCASCADE_OUT";

fn resolve_out_dir(cli_out: Option<&str>, manifest: &Manifest) -> PathBuf {
    if let Some(o) = cli_out {
        return PathBuf::from(o);
    }
    if let Some(o) = manifest.get("", "out_dir") {
        return PathBuf::from(o);
    }
    match std::env::var(OUT_DIR_ENV) {
        Ok(o) if !o.is_empty() => PathBuf::from(o),
        _ => PathBuf::from("runs"),
    }
}

fn profile_from_manifest(m: &Manifest) -> Result<ProfileSpec> {
    ProfileSpec::with_bump_order(
        m.f64_or("profile", "L", 50.0)?,
        m.f64_or("profile", "eta", 0.25)?,
        m.f64_or("profile", "r0", 1.0)?,
        m.f64_or("profile", "amplitude", 1.0)?,
        m.usize_or("profile", "bump_order", 1)? as u32,
    )
}

/// Coefficient tables are expensive; sweep cells sharing a profile reuse one.
fn cached_table(profile: &ProfileSpec, points: usize) -> Result<Arc<CoefficientTable>> {
    type Key = (ProfileSpec, usize);
    static CACHE: std::sync::OnceLock<std::sync::Mutex<Vec<(Key, Arc<CoefficientTable>)>>> =
        std::sync::OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    {
        let guard = cache.lock().expect("table cache poisoned");
        if let Some((_, table)) = guard.iter().find(|(k, _)| k == &(*profile, points)) {
            return Ok(table.clone());
        }
    }
    let table = Arc::new(CoefficientTable::build_with_grid(profile, points)?);
    cache
        .lock()
        .expect("table cache poisoned")
        .push(((*profile, points), table.clone()));
    Ok(table)
}

fn model_from_manifest(m: &Manifest) -> Result<CascadeModel> {
    let name = m.get("cascade", "model").unwrap_or("flattened");
    match name {
        "strong" => Ok(CascadeModel::Strong),
        "flattened" => Ok(CascadeModel::Flattened),
        "frozen" => {
            let profile = profile_from_manifest(m)?;
            let points = m.usize_or("profile", "table_points", 512)?;
            Ok(CascadeModel::Frozen(cached_table(&profile, points)?))
        }
        "localized" => Ok(CascadeModel::Localized {
            cone_slope: m.f64_or("profile", "L", 50.0)?,
            r0: m.f64_or("profile", "r0", 1.0)?,
        }),
        other => Err(Error::Config {
            location: "cascade.model".into(),
            reason: format!("unknown model `{other}` (strong|flattened|frozen|localized)"),
        }),
    }
}

pub fn run_from_manifest(m: &Manifest) -> Result<CascadeRun> {
    let model = model_from_manifest(m)?;
    let eps = m.f64_or("cascade", "eps", 1.0)?;
    let alpha = m.f64_or("cascade", "alpha", 0.2)?;
    let rings = m.usize_or("cascade", "m", 16)?;
    let mut run = CascadeRun::new(model, eps, alpha, rings);
    run.target_a = m.f64_or("cascade", "A", f64::INFINITY)?;
    run.mu = m.f64_or("cascade", "mu", 0.05)?;
    run.t_max = m.f64_or("cascade", "t_max", f64::INFINITY)?;
    run.integrator = OdeOptions {
        rel_tol: m.f64_or("integrator", "rel_tol", 1e-9)?,
        abs_tol: m.f64_or("integrator", "abs_tol", 1e-12)?,
        max_step: m.f64_or("integrator", "max_step", f64::INFINITY)?,
        max_steps: m.usize_or("integrator", "max_steps", 10_000_000)?,
    };
    if let Some(times) = m.get_list_f64("cascade", "sample_times")? {
        run.samples = SamplePlan::Times(times);
    } else if let Some(n) = m.get_usize("cascade", "samples")? {
        if !run.t_max.is_finite() {
            return Err(Error::Config {
                location: "cascade.samples".into(),
                reason: "uniform sampling needs a finite t_max".into(),
            });
        }
        let times = (0..=n)
            .map(|i| run.t_max * i as f64 / n as f64)
            .collect::<Vec<_>>();
        run.samples = SamplePlan::Times(times);
    }
    match m.get("cascade", "perturb") {
        None | Some("none") => {}
        Some("worst-case") => {
            run.perturbation = Some(Perturbation::worst_case_alternating(rings, run.mu));
        }
        Some(other) => {
            return Err(Error::Config {
                location: "cascade.perturb".into(),
                reason: format!("unknown perturbation `{other}` (none|worst-case)"),
            })
        }
    }
    Ok(run)
}

#[derive(Serialize)]
struct RunSummaryJson {
    model: String,
    eps: f64,
    alpha: f64,
    m: usize,
    target_a: Option<f64>,
    mu: f64,
    t_max: Option<f64>,
    cone_slope: Option<f64>,
    perturbation: Option<Vec<f64>>,
}

#[derive(Serialize)]
struct EventsJson {
    schema: &'static str,
    t_inflation: Option<f64>,
    t_front_hit: Option<f64>,
    status: RunStatus,
    max_cascade_residual: f64,
    run: RunSummaryJson,
    integrator: OdeOptions,
    stats: crate::ode::OdeStats,
}

pub fn events_json(traj: &CascadeTrajectory) -> Result<String> {
    let run = &traj.run;
    let doc = EventsJson {
        schema: "ringcascade-events v1",
        t_inflation: traj.events.t_inflation,
        t_front_hit: traj.events.t_front_hit,
        status: traj.status,
        max_cascade_residual: traj.max_cascade_residual(),
        run: RunSummaryJson {
            model: run.model.name().to_string(),
            eps: run.eps,
            alpha: run.alpha,
            m: run.m,
            target_a: run.target_a.is_finite().then_some(run.target_a),
            mu: run.mu,
            t_max: run.t_max.is_finite().then_some(run.t_max),
            cone_slope: run.model.cone_slope(),
            perturbation: run.perturbation.as_ref().map(|p| p.factors.clone()),
        },
        integrator: run.integrator,
        stats: traj.stats,
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

pub struct RunArtifacts {
    pub trajectory_csv: PathBuf,
    pub events_json: PathBuf,
    pub manifest_resolved: PathBuf,
    pub t_inflation: Option<f64>,
}

/// `run`: integrate one cascade and write trajectory.csv, events.json, and
/// the resolved manifest.
pub fn cmd_run(manifest: &Manifest, out_dir: &Path) -> Result<RunArtifacts> {
    let run = run_from_manifest(manifest)?;
    let traj = integrate(&run)?;
    std::fs::create_dir_all(out_dir)?;
    let trajectory_csv = out_dir.join("trajectory.csv");
    std::fs::write(&trajectory_csv, traj.to_csv())?;
    let events_path = out_dir.join("events.json");
    std::fs::write(&events_path, events_json(&traj)?)?;
    let resolved = out_dir.join("manifest.resolved");
    std::fs::write(&resolved, manifest.to_resolved_text())?;
    Ok(RunArtifacts {
        trajectory_csv,
        events_json: events_path,
        manifest_resolved: resolved,
        t_inflation: traj.events.t_inflation,
    })
}

/// `verify cascade-identity`: recompute the cascade residual from a
/// trajectory CSV. Returns the max |log Gamma_{j+1} - log Gamma_j + 3 B_j|.
pub fn cmd_verify_cascade_identity(csv_path: &Path) -> Result<f64> {
    let text = std::fs::read_to_string(csv_path)?;
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| Error::Config {
        location: csv_path.display().to_string(),
        reason: "empty csv".into(),
    })?;
    let cols: Vec<&str> = header.split(',').collect();
    let col = |name: &str| -> Result<usize> {
        cols.iter().position(|c| *c == name).ok_or_else(|| Error::Config {
            location: csv_path.display().to_string(),
            reason: format!("missing column `{name}` in `{header}`"),
        })
    };
    let (c_t, c_gamma, c_b) = (col("t")?, col("gamma")?, col("B")?);
    let mut worst = 0.0f64;
    let mut cur_t: Option<String> = None;
    let mut gammas: Vec<f64> = Vec::new();
    let mut bigb: Vec<f64> = Vec::new();
    let flush = |gammas: &mut Vec<f64>, bigb: &mut Vec<f64>, worst: &mut f64| {
        for j in 0..gammas.len().saturating_sub(1) {
            let r = gammas[j + 1].ln() - gammas[j].ln() + 3.0 * bigb[j];
            *worst = worst.max(r.abs());
        }
        gammas.clear();
        bigb.clear();
    };
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let parse = |i: usize| -> Result<f64> {
            fields
                .get(i)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| Error::Config {
                    location: csv_path.display().to_string(),
                    reason: format!("bad row `{line}`"),
                })
        };
        let t_str = fields.get(c_t).unwrap_or(&"").to_string();
        if cur_t.as_deref() != Some(t_str.as_str()) {
            flush(&mut gammas, &mut bigb, &mut worst);
            cur_t = Some(t_str);
        }
        gammas.push(parse(c_gamma)?);
        bigb.push(parse(c_b)?);
    }
    flush(&mut gammas, &mut bigb, &mut worst);
    Ok(worst)
}

/// `coeffs`: tabulate the frozen coefficients and write the table CSV.
pub fn cmd_coeffs(manifest: &Manifest, out_dir: &Path) -> Result<PathBuf> {
    let profile = profile_from_manifest(manifest)?;
    let points = manifest.usize_or("profile", "table_points", 512)?;
    let table = CoefficientTable::build_with_grid(&profile, points)?;
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join("coefficients.csv");
    std::fs::write(&path, table.to_csv())?;
    Ok(path)
}

#[derive(Serialize)]
struct BsCheckJson {
    schema: &'static str,
    rings: usize,
    moment_identity_rel_err: f64,
    annular_rel_err: f64,
    scan_points: usize,
}

/// `bs-check`: moment-identity and annular checks on a t = 0 snapshot, plus
/// a velocity/residual scan along a fixed cone line.
pub fn cmd_bs_check(manifest: &Manifest, out_dir: &Path) -> Result<PathBuf> {
    let profile = profile_from_manifest(manifest)?;
    let n_rings = manifest.usize_or("bs-check", "rings", 3)?;
    let eps = manifest.f64_or("bs-check", "eps", 1.0)?;
    let alpha = manifest.f64_or("bs-check", "alpha", 0.3)?;
    let tol = manifest.f64_or("bs-check", "tol", 1e-7)?;
    let rings: Vec<Ring> = (1..=n_rings)
        .map(|k| Ring {
            amplitude: eps / (k as f64).powf(alpha),
            r_scale: RING_SCALE_BASE.powi(k as i32),
            h_scale: RING_SCALE_BASE.powi(k as i32),
        })
        .collect();
    let snap = RingSnapshot::new(profile, rings)?;

    // moment identity against the velocity finite difference
    let rate = origin_stretching_rate(&snap, 1e-9)?;
    let r_min = snap.rings.last().unwrap().r_scale;
    let h = 1e-3 * r_min;
    let v0 = velocity(&snap, h, 0.0, tol)?;
    let moment_rel = (v0.u_r / h - rate).abs() / rate.abs();

    // annular enlargement bound between the two outermost ring scales
    let rho = snap.rings[1].r_scale;
    let xn = snap.rings[0].r_scale;
    let annular_rel = (annular_kernel_mass_quadrature(rho, xn, 1e-9)?
        - annular_kernel_mass_exact(rho, xn))
    .abs()
        / annular_kernel_mass_exact(rho, xn);

    // scan along z = c r with c = L/3, one point per ring band
    let cone = manifest.f64_or("bs-check", "cone", profile.cone_slope / 3.0)?;
    let mut csv = String::from("# ringcascade-csv v1\nr_x,z_x,u_r,u_z,E_r,E_z\n");
    let mut scan_points = 0;
    for ring in &snap.rings {
        let r_x = profile.r0 * ring.r_scale;
        let z_x = cone * r_x;
        let v = velocity(&snap, r_x, z_x, tol)?;
        let (e_r, e_z) = prop21_residuals(&snap, r_x, z_x, tol)?;
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_float(r_x),
            fmt_float(z_x),
            fmt_float(v.u_r),
            fmt_float(v.u_z),
            fmt_float(e_r),
            fmt_float(e_z),
        ));
        scan_points += 1;
    }
    std::fs::create_dir_all(out_dir)?;
    let scan_path = out_dir.join("velocity_scan.csv");
    std::fs::write(&scan_path, csv)?;
    let doc = BsCheckJson {
        schema: "ringcascade-bscheck v1",
        rings: n_rings,
        moment_identity_rel_err: moment_rel,
        annular_rel_err: annular_rel,
        scan_points,
    };
    std::fs::write(
        out_dir.join("bs_check.json"),
        serde_json::to_string_pretty(&doc)?,
    )?;
    Ok(scan_path)
}

#[derive(Serialize)]
struct LorentzJson {
    schema: &'static str,
    q: f64,
    m: usize,
    eps: f64,
    alpha: f64,
    total: f64,
    per_ring: Vec<f64>,
    ellq_ratio: f64,
}

/// `lorentz`: multi-ring L^{3,q} norm report (JSON), optionally with a field
/// dump (CSV of value, volume).
pub fn cmd_lorentz(manifest: &Manifest, out_dir: &Path) -> Result<PathBuf> {
    let profile = profile_from_manifest(manifest)?;
    let q = manifest.f64_or("lorentz", "q", 2.0)?;
    let cfg = MultiRingConfig {
        eps: manifest.f64_or("lorentz", "eps", 1.0)?,
        alpha: manifest.f64_or("lorentz", "alpha", 0.6)?,
        m: manifest.usize_or("lorentz", "m", 16)?,
        profile,
        cells_per_dim: manifest.usize_or("lorentz", "cells", 24)?,
    };
    let norm = multiring_relative_vorticity_norm(&cfg, q)?;
    std::fs::create_dir_all(out_dir)?;
    if manifest.get("lorentz", "dump_field") == Some("true") {
        let field = multiring_field(&cfg)?;
        // consistency: the dumped field reproduces the reported norm
        let check = lorentz_quasinorm(&field, 3.0, q)?;
        debug_assert!((check - norm.total).abs() / norm.total < 0.05);
        std::fs::write(out_dir.join("field.csv"), field.to_csv())?;
    }
    let doc = LorentzJson {
        schema: "ringcascade-lorentz v1",
        q,
        m: cfg.m,
        eps: cfg.eps,
        alpha: cfg.alpha,
        total: norm.total,
        per_ring: norm.per_ring.clone(),
        ellq_ratio: norm.ellq_ratio,
    };
    let path = out_dir.join("lorentz.json");
    std::fs::write(&path, serde_json::to_string_pretty(&doc)?)?;
    Ok(path)
}

#[derive(Serialize)]
struct DichotomyRow {
    alpha: f64,
    fitted_exponent: Option<f64>,
    predicted_exponent: f64,
    residual: Option<f64>,
    status: String,
}

#[derive(Serialize)]
struct DichotomyJson {
    schema: &'static str,
    model: String,
    m: usize,
    t: f64,
    fit_k_min: usize,
    fit_k_max: usize,
    rows: Vec<DichotomyRow>,
}

fn parallel_map<T: Send, F>(n: usize, workers: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T + Sync,
{
    let workers = workers.clamp(1, n.max(1));
    let mut indexed: Vec<(usize, T)> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let f = &f;
                scope.spawn(move || {
                    (w..n)
                        .step_by(workers)
                        .map(|i| (i, f(i)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    indexed.sort_by_key(|(i, _)| *i);
    indexed.into_iter().map(|(_, t)| t).collect()
}

pub struct SweepArtifacts {
    pub json: PathBuf,
    pub text: PathBuf,
}

/// `sweep`: fan out runs over a parameter grid. Kinds: `dichotomy` (alpha
/// grid, tail-exponent fits) and `tn-scaling` (ring-count grid, inflation
/// times). Partial failures are recorded per cell; output order is
/// deterministic regardless of completion order.
pub fn cmd_sweep(manifest: &Manifest, out_dir: &Path) -> Result<SweepArtifacts> {
    let kind = manifest.require("sweep", "kind")?;
    let workers = manifest.usize_or("sweep", "workers", 2)?;
    std::fs::create_dir_all(out_dir)?;
    match kind {
        "dichotomy" => {
            let alphas = manifest
                .get_list_f64("sweep", "alpha_list")?
                .ok_or_else(|| Error::Config {
                    location: "sweep.alpha_list".into(),
                    reason: "dichotomy sweep needs alpha_list".into(),
                })?;
            if alphas.is_empty() {
                return Err(Error::Config {
                    location: "sweep.alpha_list".into(),
                    reason: "empty grid".into(),
                });
            }
            let m = manifest.usize_or("sweep", "m", 1024)?;
            let t = manifest.f64_or("sweep", "t", 1.0)?;
            let k_min = manifest.usize_or("sweep", "fit_k_min", m / 8)?;
            let k_max = manifest.usize_or("sweep", "fit_k_max", m)?;
            let base = {
                let mut mm = manifest.clone();
                mm.set("cascade", "m", m.to_string());
                mm.set("cascade", "t_max", t.to_string());
                mm.set("cascade", "sample_times", format!("0.0,{t}"));
                mm
            };
            let rows = parallel_map(alphas.len(), workers, |i| {
                let alpha = alphas[i];
                let mut mm = base.clone();
                mm.set("cascade", "alpha", fmt_float(alpha));
                let out = run_from_manifest(&mm)
                    .and_then(|run| integrate(&run))
                    .and_then(|traj| fit_tail_exponent(&traj, t, k_min, k_max));
                match out {
                    Ok(rep) => DichotomyRow {
                        alpha,
                        fitted_exponent: Some(rep.fitted_exponent),
                        predicted_exponent: rep.predicted_exponent,
                        residual: Some(rep.residual),
                        status: "ok".into(),
                    },
                    Err(e) => DichotomyRow {
                        alpha,
                        fitted_exponent: None,
                        predicted_exponent: flattened_exponent(alpha),
                        residual: None,
                        status: e.to_string(),
                    },
                }
            });
            let doc = DichotomyJson {
                schema: "ringcascade-dichotomy v1",
                model: manifest.get("cascade", "model").unwrap_or("flattened").into(),
                m,
                t,
                fit_k_min: k_min,
                fit_k_max: k_max,
                rows,
            };
            let json = out_dir.join("dichotomy.json");
            std::fs::write(&json, serde_json::to_string_pretty(&doc)?)?;
            let mut txt = String::from(
                "alpha       fitted        predicted     residual      status\n",
            );
            for r in &doc.rows {
                txt.push_str(&format!(
                    "{:<11.6} {:<13} {:<13.6} {:<13} {}\n",
                    r.alpha,
                    r.fitted_exponent
                        .map(|v| format!("{v:<13.6}"))
                        .unwrap_or_else(|| "-".into()),
                    r.predicted_exponent,
                    r.residual
                        .map(|v| format!("{v:<13.6}"))
                        .unwrap_or_else(|| "-".into()),
                    r.status,
                ));
            }
            let text = out_dir.join("dichotomy.txt");
            std::fs::write(&text, txt)?;
            Ok(SweepArtifacts { json, text })
        }
        "tn-scaling" => {
            let m_list = manifest
                .get_list_usize("sweep", "m_list")?
                .ok_or_else(|| Error::Config {
                    location: "sweep.m_list".into(),
                    reason: "tn-scaling sweep needs m_list".into(),
                })?;
            if m_list.is_empty() {
                return Err(Error::Config {
                    location: "sweep.m_list".into(),
                    reason: "empty grid".into(),
                });
            }
            let template = run_from_manifest(manifest)?;
            let report: ScalingReport = tn_scaling_experiment(&template, &m_list)?;
            let json = out_dir.join("tn_scaling.json");
            std::fs::write(&json, serde_json::to_string_pretty(&report)?)?;
            let mut txt = String::from("m         t_N\n");
            for (m, t) in report.m_values.iter().zip(&report.t_n_values) {
                txt.push_str(&format!("{m:<9} {}\n", fmt_float(*t)));
            }
            txt.push_str(&format!(
                "fitted slope {:.6}; bound slope {}\n",
                report.fitted_slope,
                report
                    .beta_bound_slope
                    .map(|v| format!("{v:.6}"))
                    .unwrap_or_else(|| "-".into())
            ));
            let text = out_dir.join("tn_scaling.txt");
            std::fs::write(&text, txt)?;
            Ok(SweepArtifacts { json, text })
        }
        other => Err(Error::Config {
            location: "sweep.kind".into(),
            reason: format!("unknown sweep kind `{other}` (dichotomy|tn-scaling)"),
        }),
    }
}

fn flag_overrides(manifest: &mut Manifest, args: &[String]) -> Result<Option<String>> {
    let mut out: Option<String> = None;
    let mut i = 0;
    while i < args.len() {
        let flag = &args[i];
        let key = flag.strip_prefix("--").ok_or_else(|| Error::Config {
            location: "cli".into(),
            reason: format!("unexpected argument `{flag}`"),
        })?;
        let value = args.get(i + 1).ok_or_else(|| Error::Config {
            location: "cli".into(),
            reason: format!("flag --{key} needs a value"),
        })?;
        match key {
            "out" => out = Some(value.clone()),
            "manifest" => {} // handled by the caller
            "model" => manifest.set("cascade", "model", value),
            "eps" => manifest.set("cascade", "eps", value),
            "alpha" => manifest.set("cascade", "alpha", value),
            "m" => manifest.set("cascade", "m", value),
            "A" => manifest.set("cascade", "A", value),
            "mu" => manifest.set("cascade", "mu", value),
            "t" => manifest.set("cascade", "t_max", value),
            "samples" => manifest.set("cascade", "samples", value),
            "sample-times" => manifest.set("cascade", "sample_times", value),
            "perturb" => manifest.set("cascade", "perturb", value),
            "rel-tol" => manifest.set("integrator", "rel_tol", value),
            "abs-tol" => manifest.set("integrator", "abs_tol", value),
            "L" => manifest.set("profile", "L", value),
            "eta" => manifest.set("profile", "eta", value),
            "r0" => manifest.set("profile", "r0", value),
            "amplitude" => manifest.set("profile", "amplitude", value),
            "bump-order" => manifest.set("profile", "bump_order", value),
            "table-points" => manifest.set("profile", "table_points", value),
            "points" => manifest.set("profile", "table_points", value),
            "q" => manifest.set("lorentz", "q", value),
            "lorentz-m" => manifest.set("lorentz", "m", value),
            "lorentz-eps" => manifest.set("lorentz", "eps", value),
            "lorentz-alpha" => manifest.set("lorentz", "alpha", value),
            "cells" => manifest.set("lorentz", "cells", value),
            "dump-field" => manifest.set("lorentz", "dump_field", value),
            "rings" => manifest.set("bs-check", "rings", value),
            "bs-eps" => manifest.set("bs-check", "eps", value),
            "bs-alpha" => manifest.set("bs-check", "alpha", value),
            "tol" => manifest.set("bs-check", "tol", value),
            "cone" => manifest.set("bs-check", "cone", value),
            "workers" => manifest.set("sweep", "workers", value),
            other => {
                return Err(Error::Config {
                    location: "cli".into(),
                    reason: format!("unknown flag --{other}"),
                })
            }
        }
        i += 2;
    }
    Ok(out)
}

fn load_manifest(args: &[String]) -> Result<Manifest> {
    let mut i = 0;
    while i + 1 < args.len() {
        if args[i] == "--manifest" {
            return Manifest::from_file(Path::new(&args[i + 1]));
        }
        i += 1;
    }
    Ok(Manifest::default())
}

const USAGE: &str = "usage: ringcascade <command> [flags]

commands:
  run       integrate one cascade; writes trajectory.csv + events.json
            flags: --model strong|flattened|frozen|localized --eps --alpha --m
                   --A --mu --t --samples --sample-times --perturb worst-case
                   --L --eta --r0 --rel-tol --abs-tol --manifest FILE --out DIR
  sweep     parameter sweep from a manifest ([sweep] kind = dichotomy|tn-scaling)
            flags: --manifest FILE --workers N --out DIR
  verify    verify cascade-identity <trajectory.csv> [--threshold 1e-7]
  coeffs    tabulate frozen coefficients: --L --eta [--r0 --amplitude --points]
  bs-check  Biot-Savart moment/annular checks and a velocity scan
            flags: --rings --bs-eps --bs-alpha --tol --cone --L --eta
  lorentz   multi-ring Lorentz norm report: --q --lorentz-m --lorentz-eps
            --lorentz-alpha --cells [--dump-field true]

the default output directory is $RINGCASCADE_OUT, then ./runs";

/// Full CLI dispatch; returns the process exit code.
pub fn run_cli(args: &[String]) -> i32 {
    match dispatch(args) {
        Ok(code) => code,
        Err(e) => {
            let msg = serde_json::json!({ "error": e.to_string() });
            eprintln!("{msg}");
            1
        }
    }
}

fn dispatch(args: &[String]) -> Result<i32> {
    let Some(cmd) = args.first() else {
        println!("{USAGE}");
        return Ok(1);
    };
    match cmd.as_str() {
        "run" => {
            let mut manifest = load_manifest(&args[1..])?;
            let rest = strip_manifest_flag(&args[1..]);
            let out = flag_overrides(&mut manifest, &rest)?;
            let out_dir = resolve_out_dir(out.as_deref(), &manifest);
            let artifacts = cmd_run(&manifest, &out_dir)?;
            println!("trajectory: {}", artifacts.trajectory_csv.display());
            println!("events: {}", artifacts.events_json.display());
            if let Some(t) = artifacts.t_inflation {
                println!("t_inflation: {}", fmt_float(t));
            }
            Ok(0)
        }
        "sweep" => {
            let mut manifest = load_manifest(&args[1..])?;
            let rest = strip_manifest_flag(&args[1..]);
            let out = flag_overrides(&mut manifest, &rest)?;
            let out_dir = resolve_out_dir(out.as_deref(), &manifest);
            let artifacts = cmd_sweep(&manifest, &out_dir)?;
            println!("report: {}", artifacts.json.display());
            Ok(0)
        }
        "verify" => {
            if args.get(1).map(String::as_str) != Some("cascade-identity") {
                return Err(Error::Config {
                    location: "cli".into(),
                    reason: "verify supports: cascade-identity <trajectory.csv>".into(),
                });
            }
            let path = args.get(2).ok_or_else(|| Error::Config {
                location: "cli".into(),
                reason: "verify cascade-identity needs a csv path".into(),
            })?;
            let mut threshold = 1e-7;
            if let Some(pos) = args.iter().position(|a| a == "--threshold") {
                threshold = args
                    .get(pos + 1)
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| Error::Config {
                        location: "cli".into(),
                        reason: "--threshold needs a number".into(),
                    })?;
            }
            let worst = cmd_verify_cascade_identity(Path::new(path))?;
            println!("max cascade residual: {}", fmt_float(worst));
            Ok(if worst <= threshold { 0 } else { 2 })
        }
        "coeffs" => {
            let mut manifest = load_manifest(&args[1..])?;
            let rest = strip_manifest_flag(&args[1..]);
            let out = flag_overrides(&mut manifest, &rest)?;
            let out_dir = resolve_out_dir(out.as_deref(), &manifest);
            let path = cmd_coeffs(&manifest, &out_dir)?;
            println!("coefficients: {}", path.display());
            Ok(0)
        }
        "bs-check" => {
            let mut manifest = load_manifest(&args[1..])?;
            let rest = strip_manifest_flag(&args[1..]);
            let out = flag_overrides(&mut manifest, &rest)?;
            let out_dir = resolve_out_dir(out.as_deref(), &manifest);
            let path = cmd_bs_check(&manifest, &out_dir)?;
            println!("scan: {}", path.display());
            Ok(0)
        }
        "lorentz" => {
            let mut manifest = load_manifest(&args[1..])?;
            let rest = strip_manifest_flag(&args[1..]);
            let out = flag_overrides(&mut manifest, &rest)?;
            let out_dir = resolve_out_dir(out.as_deref(), &manifest);
            let path = cmd_lorentz(&manifest, &out_dir)?;
            println!("report: {}", path.display());
            Ok(0)
        }
        "help" | "--help" | "-h" => {
            println!("{USAGE}");
            Ok(0)
        }
        other => Err(Error::Config {
            location: "cli".into(),
            reason: format!("unknown command `{other}`; try `ringcascade help`"),
        }),
    }
}

fn strip_manifest_flag(args: &[String]) -> Vec<String> {
    let mut out = Vec::with_capacity(args.len());
    let mut i = 0;
    while i < args.len() {
        if args[i] == "--manifest" {
            i += 2;
            continue;
        }
        out.push(args[i].clone());
        i += 1;
    }
    out
}
