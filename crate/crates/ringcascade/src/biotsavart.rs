//! Axisymmetric Biot-Savart evaluation for frozen-profile multi-ring
//! vorticity snapshots.
//!
//! Velocity components follow the sign convention curl u = omega e_theta:
//!   u^r(x) =  (1/4 pi) int (z_x - z_y) cos(theta_x - theta_y) / |x-y|^3 omega(y) dy
//!   u^z(x) = -(1/4 pi) int (r_x cos(theta_x - theta_y) - r_y) / |x-y|^3 omega(y) dy
//! The z-odd symmetry of omega folds the integrals onto the upper half-plane;
//! the angular integral reduces to theta = theta_y - theta_x and is handled by
//! a spectrally accurate periodic rule, refined when the evaluation point
//! approaches the support torus.

use serde::{Deserialize, Serialize};

use crate::cascade::{CascadeRun, CascadeState};
use crate::coeffs::lambda_frozen;
use crate::error::{Error, Result};
use crate::profile::ProfileSpec;
use crate::quad;

/// Dyadic base scale of the ring hierarchy.
pub const RING_SCALE_BASE: f64 = 1e-2;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Ring {
    /// Amplitude x_k.
    #[serde(rename = "x")]
    pub amplitude: f64,
    /// Radial scale R_k.
    #[serde(rename = "R")]
    pub r_scale: f64,
    /// Vertical scale H_k.
    #[serde(rename = "H")]
    pub h_scale: f64,
}

impl Ring {
    /// Aspect ratio Gamma_k = H_k / R_k.
    pub fn aspect(&self) -> f64 {
        self.h_scale / self.r_scale
    }

    /// Upper-half-plane support box [r_lo, r_hi, z_lo, z_hi].
    fn support_box(&self, p: &ProfileSpec) -> [f64; 4] {
        let [rl, rh, zl, zh] = p.support_box();
        [
            rl * self.r_scale,
            rh * self.r_scale,
            zl * self.h_scale,
            zh * self.h_scale,
        ]
    }
}

/// A frozen-profile multi-ring vorticity field
/// omega(r, z) = sum_k x_k phi(r / R_k, z / H_k).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RingSnapshot {
    pub profile: ProfileSpec,
    pub rings: Vec<Ring>,
}

impl RingSnapshot {
    /// Build a snapshot, enforcing pairwise-disjoint ring supports:
    /// (1+eta) r0 R_{k+1} < (1-eta) r0 R_k.
    pub fn new(profile: ProfileSpec, rings: Vec<Ring>) -> Result<Self> {
        for (i, ring) in rings.iter().enumerate() {
            if !(ring.r_scale > 0.0 && ring.h_scale > 0.0 && ring.amplitude > 0.0) {
                return Err(Error::invalid(
                    "rings",
                    format!(
                        "ring {} has non-positive scale or amplitude (scales below \
                         f64 range underflow near depth 150)",
                        i + 1
                    ),
                ));
            }
        }
        let eta = profile.eta;
        for i in 0..rings.len().saturating_sub(1) {
            if (1.0 + eta) * rings[i + 1].r_scale >= (1.0 - eta) * rings[i].r_scale {
                return Err(Error::SeparationViolated {
                    first: i + 1,
                    second: i + 2,
                });
            }
        }
        Ok(RingSnapshot { profile, rings })
    }

    /// Snapshot of a cascade state: R_k = d^k (x_k(t)/x_k(0)),
    /// H_k = d^k (x_k(0)/x_k(t))^2, with d = 10^-2.
    pub fn from_state(state: &CascadeState, run: &CascadeRun, profile: &ProfileSpec) -> Result<Self> {
        let rings = (1..=run.m)
            .map(|k| {
                let ratio = (state.logx[k - 1] - run.log_x0(k)).exp();
                let dk = RING_SCALE_BASE.powi(k as i32);
                Ring {
                    amplitude: state.x(k),
                    r_scale: dk * ratio,
                    h_scale: dk / (ratio * ratio),
                }
            })
            .collect();
        RingSnapshot::new(*profile, rings)
    }

    /// omega(r, z).
    pub fn vorticity(&self, r: f64, z: f64) -> f64 {
        self.rings
            .iter()
            .map(|ring| ring.amplitude * self.profile.eval(r / ring.r_scale, z / ring.h_scale))
            .sum()
    }

    /// sup |omega| = max_k x_k * amplitude, exact for disjoint supports.
    pub fn sup_norm(&self) -> f64 {
        self.rings
            .iter()
            .map(|r| r.amplitude)
            .fold(0.0f64, f64::max)
            * self.profile.amplitude
    }

    /// Index (1-based) of the ring whose support contains (r, |z|), if any.
    pub fn ring_containing(&self, r: f64, z: f64) -> Option<usize> {
        for (i, ring) in self.rings.iter().enumerate() {
            let [rl, rh, zl, zh] = ring.support_box(&self.profile);
            if r >= rl && r <= rh && z.abs() >= zl && z.abs() <= zh {
                return Some(i + 1);
            }
        }
        None
    }

    /// When the outer region Q(rho) = {r_y >= 2 rho} splits the rings exactly,
    /// returns how many leading rings it contains; None if some ring support
    /// is cut by the boundary r = 2 rho.
    pub fn outer_ring_count_exact(&self, rho: f64) -> Option<usize> {
        let cut = 2.0 * rho;
        let mut count = 0;
        for ring in &self.rings {
            let [rl, rh, _, _] = ring.support_box(&self.profile);
            if rl >= cut {
                count += 1;
            } else if rh > cut {
                return None; // boundary cuts this ring
            }
        }
        Some(count)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let snap: RingSnapshot = serde_json::from_str(s)?;
        RingSnapshot::new(snap.profile, snap.rings)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct VelocitySample {
    pub r: f64,
    pub z: f64,
    pub u_r: f64,
    pub u_z: f64,
    pub quad_error: f64,
}

/// Angular kernels at one meridional source point (r_y, z_y > 0), folded over
/// both z signs of the odd vorticity:
///   K_r = int cos(t) [ (z_x + z)/D_-^3 - (z_x - z)/D_+^3 ] dt
///   K_z = int (r_x cos(t) - r_y) [ 1/D_-^3 - 1/D_+^3 ] dt
/// with D_{+/-}^2 = r_x^2 + r_y^2 - 2 r_x r_y cos(t) + (z_x -/+ z)^2.
fn angular_kernels(r_x: f64, z_x: f64, r_y: f64, z_y: f64, rel_tol: f64) -> Result<[f64; 2]> {
    let zm = z_x - z_y;
    let zp = z_x + z_y;
    let base = r_x * r_x + r_y * r_y;
    let cross = 2.0 * r_x * r_y;
    // magnitude scale for the absolute floor, from the nearest approach
    let dz2 = (zm * zm).min(zp * zp);
    let d2_min = ((r_x - r_y) * (r_x - r_y) + dz2).max(1e-300);
    let mag = (zm.abs() + zp.abs() + r_x + r_y) / (d2_min * d2_min.sqrt()) + 1.0 / d2_min;
    let abs_floor = 1e-13 * mag;
    let (vals, _err) = quad::periodic_integral(
        |theta: f64| {
            let c = theta.cos();
            let dp2 = base - cross * c + zm * zm;
            let dm2 = base - cross * c + zp * zp;
            let dp3 = dp2 * dp2.sqrt();
            let dm3 = dm2 * dm2.sqrt();
            [
                c * (zp / dm3 - zm / dp3),
                (r_x * c - r_y) * (1.0 / dm3 - 1.0 / dp3),
            ]
        },
        rel_tol,
        abs_floor,
    )?;
    Ok(vals)
}

/// Velocity induced by the snapshot at a meridional point. The point must not
/// lie inside a ring support. `tol` is the relative quadrature target per
/// ring; `quad_error` reports the summed error estimates.
pub fn velocity(snap: &RingSnapshot, r_x: f64, z_x: f64, tol: f64) -> Result<VelocitySample> {
    if let Some(ring) = snap.ring_containing(r_x, z_x) {
        return Err(Error::PointOnSupport {
            r: r_x,
            z: z_x,
            ring,
        });
    }
    let inner_tol = 0.05 * tol;
    let mut u_r = 0.0;
    let mut u_z = 0.0;
    let mut quad_error = 0.0;
    for ring in &snap.rings {
        let rect = ring.support_box(&snap.profile);
        let (rs, hs, amp) = (ring.r_scale, ring.h_scale, ring.amplitude);
        let f = |r: f64, z: f64| -> [f64; 2] {
            let w = amp * snap.profile.density(r / rs, z / hs);
            if w == 0.0 {
                return [0.0, 0.0];
            }
            let k = angular_kernels(r_x, z_x, r, z, inner_tol)
                .expect("angular quadrature converges for off-support points");
            [w * r * k[0], w * r * k[1]]
        };
        // absolute floor at the kernel scale, so components that vanish by
        // symmetry (exact cancellation) terminate refinement
        let [bl, bh, zl, zh] = rect;
        let (rc, zc) = (0.5 * (bl + bh), 0.5 * (zl + zh));
        let dz2 = ((z_x - zc) * (z_x - zc)).min((z_x + zc) * (z_x + zc));
        let d2c = ((r_x - rc) * (r_x - rc) + dz2).max(1e-300);
        let mag = (z_x.abs() + zc + r_x + rc) / (d2c * d2c.sqrt()) + 1.0 / d2c;
        let floor = 1e-13 * amp * snap.profile.amplitude * bh * (bh - bl) * (zh - zl) * mag;
        let (vals, err) = quad::adaptive_2d(f, rect, tol, floor, 12, 4096)?;
        let c = 1.0 / (4.0 * std::f64::consts::PI);
        u_r += c * vals[0];
        u_z += -c * vals[1];
        quad_error += c * err;
    }
    Ok(VelocitySample {
        r: r_x,
        z: z_x,
        u_r,
        u_z,
        quad_error,
    })
}

/// Meridional kernel moment of one ring over its support clipped to
/// r >= r_clip, doubled over z-parity:
/// 2 int int r^2 z / (r^2 + z^2)^{5/2} (-omega_k) dr dz.
fn ring_moment_clipped(snap: &RingSnapshot, ring: &Ring, r_clip: f64, tol: f64) -> Result<f64> {
    let [rl, rh, zl, zh] = ring.support_box(&snap.profile);
    let lo = rl.max(r_clip);
    if lo >= rh {
        return Ok(0.0);
    }
    let (rs, hs, amp) = (ring.r_scale, ring.h_scale, ring.amplitude);
    // floor against vanishing clipped slivers at the support edge
    let k_max = rh * rh * zh / (lo * lo + zl * zl).powf(2.5);
    let floor = 1e-13 * amp * snap.profile.amplitude * k_max * (rh - lo) * (zh - zl);
    let (v, _) = quad::adaptive_2d(
        |r, z| {
            let w = amp * snap.profile.density(r / rs, z / hs);
            let d = r * r + z * z;
            [r * r * z * d.powf(-2.5) * w]
        },
        [lo, rh, zl, zh],
        tol,
        floor,
        14,
        1 << 14,
    )?;
    Ok(2.0 * v[0])
}

/// Origin stretching rate d_r u^r(0, 0) as the outer moment
/// (3/8 pi) int_{R^3} r_y z_y / |y|^5 (-omega) dy, reduced to the meridional
/// plane. The 3D and meridional constant reductions are cross-checked.
pub fn origin_stretching_rate(snap: &RingSnapshot, tol: f64) -> Result<f64> {
    if snap.ring_containing(0.0, 0.0).is_some() {
        return Err(Error::PointOnSupport {
            r: 0.0,
            z: 0.0,
            ring: snap.ring_containing(0.0, 0.0).unwrap(),
        });
    }
    let mut meridional = 0.0;
    for ring in &snap.rings {
        meridional += ring_moment_clipped(snap, ring, 0.0, tol)?;
    }
    // (3 / 8 pi) * 2 pi versus 3/4: identical by construction, kept as the
    // declared consistency identity.
    let rate_3d = 3.0 / (8.0 * std::f64::consts::PI) * (2.0 * std::f64::consts::PI) * meridional;
    let rate_2d = 0.75 * meridional;
    debug_assert!((rate_3d - rate_2d).abs() <= 1e-14 * rate_2d.abs().max(1e-300));
    Ok(rate_2d)
}

/// Rescaled per-ring form of the origin moment:
/// (3/4) sum_k x_k Gamma_k^2 Lambda(Gamma_k). Equal to
/// `origin_stretching_rate` up to quadrature tolerance.
pub fn origin_stretching_rate_rescaled(snap: &RingSnapshot) -> Result<f64> {
    let mut acc = 0.0;
    for ring in &snap.rings {
        let gamma = ring.aspect().min(1.0);
        acc += ring.amplitude * gamma * gamma * lambda_frozen(&snap.profile, gamma)?;
    }
    Ok(0.75 * acc)
}

/// Outer moment M(rho) = (3/8 pi) int_{Q(rho)} r_y z_y / |y|^5 (-omega) dy
/// with Q(rho) = {r_y >= 2 rho}. Rings wholly inside or outside Q(rho) use
/// their exact support membership; a ring cut by the boundary falls back to
/// clipped quadrature.
pub fn outer_moment(snap: &RingSnapshot, rho: f64, tol: f64) -> Result<f64> {
    let cut = 2.0 * rho;
    let mut meridional = 0.0;
    for ring in &snap.rings {
        let [rl, rh, _, _] = ring.support_box(&snap.profile);
        if rh <= cut {
            continue; // wholly outside Q(rho)
        }
        let clip = if rl >= cut { 0.0 } else { cut };
        meridional += ring_moment_clipped(snap, ring, clip, tol)?;
    }
    Ok(0.75 * meridional)
}

/// Outer-region dominance residuals at a point:
/// E_r = u^r / r_x - M(r_x),  E_z = u^z / z_x + 2 M(r_x).
pub fn prop21_residuals(snap: &RingSnapshot, r_x: f64, z_x: f64, tol: f64) -> Result<(f64, f64)> {
    if !(r_x > 0.0) {
        return Err(Error::invalid("r_x", "radial residual needs r_x > 0"));
    }
    if z_x == 0.0 {
        return Err(Error::invalid("z_x", "vertical residual needs z_x != 0"));
    }
    let v = velocity(snap, r_x, z_x, tol)?;
    let m = outer_moment(snap, r_x, tol)?;
    Ok((v.u_r / r_x - m, v.u_z / z_x + 2.0 * m))
}

/// Annular kernel mass int_{Q(rho) \ Q(xnorm)} |r_y z_y| / |y|^5 dy computed
/// by quadrature (z mapped to [0,1) by z = s t/(1-t)). Closed form:
/// (4 pi / 3) log(xnorm / rho).
pub fn annular_kernel_mass_quadrature(rho: f64, x_norm: f64, tol: f64) -> Result<f64> {
    if !(0.0 < rho && rho <= x_norm) {
        return Err(Error::invalid("rho", "need 0 < rho <= |x|"));
    }
    let (v, _) = quad::adaptive_2d(
        |s, t| {
            let omt = 1.0 - t;
            if omt <= 0.0 {
                return [0.0];
            }
            let z = s * t / omt;
            let jac = s / (omt * omt);
            let d = s * s + z * z;
            [s * s * z * d.powf(-2.5) * jac]
        },
        [2.0 * rho, 2.0 * x_norm, 0.0, 1.0],
        tol,
        0.0,
        14,
        1 << 14,
    )?;
    // 2 pi from the angle, 2 from the |z| fold
    Ok(4.0 * std::f64::consts::PI * v[0])
}

/// Closed form of the annular kernel mass.
pub fn annular_kernel_mass_exact(rho: f64, x_norm: f64) -> f64 {
    4.0 * std::f64::consts::PI / 3.0 * (x_norm / rho).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::{integrate, CascadeModel, CascadeRun, SamplePlan};
    use crate::profile::make_profile;

    fn test_profile() -> ProfileSpec {
        make_profile(50.0, 0.25, 1.0, 1.0).unwrap()
    }

    fn initial_snapshot(m: usize, eps: f64, alpha: f64) -> RingSnapshot {
        let profile = test_profile();
        let rings = (1..=m)
            .map(|k| Ring {
                amplitude: eps / (k as f64).powf(alpha),
                r_scale: RING_SCALE_BASE.powi(k as i32),
                h_scale: RING_SCALE_BASE.powi(k as i32),
            })
            .collect();
        RingSnapshot::new(profile, rings).unwrap()
    }

    #[test]
    fn snapshot_from_state_geometry() {
        let run = CascadeRun::new(CascadeModel::Flattened, 1.0, 0.3, 4)
            .with_t_max(0.4)
            .with_samples(SamplePlan::Times(vec![0.0, 0.4]));
        let traj = integrate(&run).unwrap();
        let profile = test_profile();
        // t = 0: R_k = H_k = d^k
        let snap0 = RingSnapshot::from_state(&traj.samples[0], &run, &profile).unwrap();
        for (k, ring) in snap0.rings.iter().enumerate() {
            let dk = RING_SCALE_BASE.powi(k as i32 + 1);
            assert!((ring.r_scale - dk).abs() < 1e-18 * dk.max(1.0));
            assert!((ring.h_scale - dk).abs() < 1e-18);
        }
        // any t: R_k^2 H_k = d^{3k} and H/R = Gamma
        let s = traj.samples.last().unwrap();
        let snap = RingSnapshot::from_state(s, &run, &profile).unwrap();
        let d = traj.diagnostics(traj.samples.len() - 1);
        for (k, ring) in snap.rings.iter().enumerate() {
            let d3k = RING_SCALE_BASE.powi(3 * (k as i32 + 1));
            let prod = ring.r_scale * ring.r_scale * ring.h_scale;
            assert!((prod - d3k).abs() / d3k < 1e-12);
            assert!((ring.aspect() - d.gamma[k]).abs() / d.gamma[k] < 1e-12);
        }
    }

    #[test]
    fn separation_violation_is_reported() {
        let profile = test_profile();
        let rings = vec![
            Ring {
                amplitude: 1.0,
                r_scale: 1.0,
                h_scale: 1.0,
            },
            Ring {
                amplitude: 1.0,
                r_scale: 0.9,
                h_scale: 0.9,
            },
        ];
        match RingSnapshot::new(profile, rings) {
            Err(Error::SeparationViolated { first: 1, second: 2 }) => {}
            other => panic!("expected separation violation, got {other:?}"),
        }
    }

    #[test]
    fn on_axis_velocity_is_axial() {
        let snap = initial_snapshot(2, 1.0, 0.0);
        let v = velocity(&snap, 0.0, 0.0, 1e-7).unwrap();
        assert!(v.u_r.abs() < 1e-12);
        assert!(v.u_z.is_finite());
    }

    #[test]
    fn velocity_symmetry_under_z_reflection() {
        let snap = initial_snapshot(2, 1.0, 0.0);
        let (r_x, z_x) = (3e-3, 2e-3);
        let a = velocity(&snap, r_x, z_x, 1e-8).unwrap();
        let b = velocity(&snap, r_x, -z_x, 1e-8).unwrap();
        let scale = a.u_r.abs().max(a.u_z.abs());
        assert!((a.u_r - b.u_r).abs() / scale < 1e-6, "u_r not even in z");
        assert!((a.u_z + b.u_z).abs() / scale < 1e-6, "u_z not odd in z");
    }

    #[test]
    fn velocity_is_additive_over_rings() {
        let profile = test_profile();
        let r1 = Ring {
            amplitude: 0.8,
            r_scale: 1e-2,
            h_scale: 1e-2,
        };
        let r2 = Ring {
            amplitude: 0.5,
            r_scale: 1e-4,
            h_scale: 2e-4,
        };
        let both = RingSnapshot::new(profile, vec![r1, r2]).unwrap();
        let only1 = RingSnapshot::new(profile, vec![r1]).unwrap();
        let only2 = RingSnapshot::new(profile, vec![r2]).unwrap();
        let p = (2.4e-3, 1.1e-3);
        let v = velocity(&both, p.0, p.1, 1e-8).unwrap();
        let v1 = velocity(&only1, p.0, p.1, 1e-8).unwrap();
        let v2 = velocity(&only2, p.0, p.1, 1e-8).unwrap();
        assert_eq!(v.u_r, v1.u_r + v2.u_r);
        assert_eq!(v.u_z, v1.u_z + v2.u_z);
    }

    #[test]
    fn velocity_self_converges_under_tightened_tolerance() {
        let snap = initial_snapshot(2, 1.0, 0.3);
        let (r_x, z_x) = (1.5e-3, 5e-3);
        let tol = 1e-6;
        let coarse = velocity(&snap, r_x, z_x, tol).unwrap();
        let fine = velocity(&snap, r_x, z_x, 1e-9).unwrap();
        let scale = fine.u_r.abs().max(fine.u_z.abs());
        assert!((coarse.u_r - fine.u_r).abs() <= tol * scale);
        assert!((coarse.u_z - fine.u_z).abs() <= tol * scale);
        assert!(coarse.quad_error <= tol * scale * 10.0);
    }

    #[test]
    fn rejects_points_on_support() {
        let snap = initial_snapshot(1, 1.0, 0.0);
        // (r0 d, z0 d) is the first ring's support center
        let res = velocity(&snap, 1e-2, 0.5, 1e-6);
        assert!(matches!(res, Err(Error::PointOnSupport { ring: 1, .. })));
    }

    #[test]
    fn origin_rate_positive_and_matches_rescaled_form() {
        let snap = initial_snapshot(3, 1.0, 0.3);
        let direct = origin_stretching_rate(&snap, 1e-9).unwrap();
        let rescaled = origin_stretching_rate_rescaled(&snap).unwrap();
        assert!(direct > 0.0);
        assert!(
            (direct - rescaled).abs() / rescaled < 1e-6,
            "direct={direct} rescaled={rescaled}"
        );
    }

    #[test]
    fn origin_rate_matches_velocity_finite_difference() {
        let snap = initial_snapshot(2, 1.0, 0.0);
        let rate = origin_stretching_rate(&snap, 1e-9).unwrap();
        let r_min = snap.rings.last().unwrap().r_scale;
        let h = 1e-3 * r_min;
        let v = velocity(&snap, h, 0.0, 1e-8).unwrap();
        let fd = v.u_r / h;
        assert!(
            (fd - rate).abs() / rate < 1e-2,
            "fd={fd} rate={rate} rel={}",
            (fd - rate).abs() / rate
        );
    }

    #[test]
    fn outer_moment_counts_exactly_the_outer_rings() {
        let snap = initial_snapshot(3, 1.0, 0.3);
        // Q(rho) at rho = R_2 contains ring 1 only
        let rho = snap.rings[1].r_scale;
        let m = outer_moment(&snap, rho, 1e-9).unwrap();
        let only_first =
            RingSnapshot::new(snap.profile, vec![snap.rings[0]]).unwrap();
        let rate1 = origin_stretching_rate(&only_first, 1e-9).unwrap();
        assert!((m - rate1).abs() / rate1 < 1e-8, "m={m} rate1={rate1}");
        // rho -> 0 recovers the full origin moment
        let full = outer_moment(&snap, 0.0, 1e-9).unwrap();
        let rate_all = origin_stretching_rate(&snap, 1e-9).unwrap();
        assert!((full - rate_all).abs() / rate_all < 1e-8);
        // a cut beyond every ring leaves nothing
        assert_eq!(outer_moment(&snap, 1.0, 1e-9).unwrap(), 0.0);
    }

    #[test]
    fn outer_region_membership_is_exact_between_rings() {
        let snap = initial_snapshot(4, 1.0, 0.0);
        // point at ring 2's radial band
        let r_x = snap.rings[1].r_scale;
        assert_eq!(snap.outer_ring_count_exact(r_x), Some(1));
        let r_x = snap.rings[2].r_scale;
        assert_eq!(snap.outer_ring_count_exact(r_x), Some(2));
        // a cut through ring 1's support is not exact
        assert_eq!(snap.outer_ring_count_exact(0.5 * snap.rings[0].r_scale), None);
    }

    #[test]
    fn annular_mass_matches_closed_form() {
        for (rho, xn) in [(0.5, 1.0), (1e-3, 1.0), (2.0, 64.0)] {
            let q = annular_kernel_mass_quadrature(rho, xn, 1e-9).unwrap();
            let e = annular_kernel_mass_exact(rho, xn);
            assert!((q - e).abs() / e < 1e-6, "rho={rho}: q={q} exact={e}");
        }
    }

    #[test]
    fn snapshot_json_roundtrip() {
        let snap = initial_snapshot(3, 1.0, 0.5);
        let json = snap.to_json().unwrap();
        assert!(json.contains("\"R\""));
        let back = RingSnapshot::from_json(&json).unwrap();
        assert_eq!(back.rings.len(), 3);
        assert_eq!(back.rings[1].r_scale, snap.rings[1].r_scale);
    }
}
