//! The cone-localized ring profile and the Biot-Savart shape function Psi.
//!
//! The profile is a smooth bump supported, in the upper half-plane, on the box
//! [(1-eta) r0, (1+eta) r0] x [(1-eta) z0, (1+eta) z0] with z0 = L r0. It is
//! odd in z, nonpositive for z > 0, and peaks at -amplitude at (r0, z0).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;

/// Smooth cone-localized ring profile.
///
/// Immutable after construction; cheap to copy and safe to share across
/// concurrent runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileSpec {
    /// Reference radius r0 of the support center.
    pub r0: f64,
    /// Cone slope L; the support center sits at (r0, L*r0).
    pub cone_slope: f64,
    /// Localization half-width eta in (0, 1).
    pub eta: f64,
    /// Peak magnitude of the profile, >= 1.
    pub amplitude: f64,
    /// Steepness order of the bump factory: the factor exp(n(1 - 1/(1-s^2))).
    #[serde(default = "default_bump_order")]
    pub bump_order: u32,
}

fn default_bump_order() -> u32 {
    1
}

/// C-infinity bump family on (-1, 1), normalized so g_n(0) = 1. Higher n
/// concentrates the mass toward the center without changing the support.
fn bump(s: f64, order: u32) -> f64 {
    if s.abs() < 1.0 {
        (order as f64 * (1.0 - 1.0 / (1.0 - s * s))).exp()
    } else {
        0.0
    }
}

impl ProfileSpec {
    pub fn new(cone_slope: f64, eta: f64, r0: f64, amplitude: f64) -> Result<Self> {
        Self::with_bump_order(cone_slope, eta, r0, amplitude, 1)
    }

    pub fn with_bump_order(
        cone_slope: f64,
        eta: f64,
        r0: f64,
        amplitude: f64,
        bump_order: u32,
    ) -> Result<Self> {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::invalid("eta", format!("must lie in (0,1), got {eta}")));
        }
        if !(cone_slope > 0.0) {
            return Err(Error::invalid("cone_slope", format!("must be positive, got {cone_slope}")));
        }
        if !(r0 > 0.0) {
            return Err(Error::invalid("r0", format!("must be positive, got {r0}")));
        }
        if !(amplitude >= 1.0) {
            return Err(Error::invalid(
                "amplitude",
                format!("must be >= 1, got {amplitude}"),
            ));
        }
        if bump_order == 0 {
            return Err(Error::invalid("bump_order", "must be a positive integer"));
        }
        Ok(ProfileSpec {
            r0,
            cone_slope,
            eta,
            amplitude,
            bump_order,
        })
    }

    /// Vertical support center z0 = L * r0.
    pub fn z0(&self) -> f64 {
        self.cone_slope * self.r0
    }

    /// Upper-half-plane support box [r_lo, r_hi, z_lo, z_hi].
    pub fn support_box(&self) -> [f64; 4] {
        let z0 = self.z0();
        [
            (1.0 - self.eta) * self.r0,
            (1.0 + self.eta) * self.r0,
            (1.0 - self.eta) * z0,
            (1.0 + self.eta) * z0,
        ]
    }

    /// Evaluate the profile at (r, z). Zero outside the support, odd in z,
    /// nonpositive on {z > 0}.
    pub fn eval(&self, r: f64, z: f64) -> f64 {
        if z == 0.0 {
            return 0.0;
        }
        let z0 = self.z0();
        let sr = (r - self.r0) / (self.eta * self.r0);
        let sz = (z.abs() - z0) / (self.eta * z0);
        -z.signum() * self.amplitude * bump(sr, self.bump_order) * bump(sz, self.bump_order)
    }

    /// -phi(r, z) for z > 0; the nonnegative density all kernel integrals use.
    pub fn density(&self, r: f64, z: f64) -> f64 {
        debug_assert!(z >= 0.0);
        let z0 = self.z0();
        let sr = (r - self.r0) / (self.eta * self.r0);
        let sz = (z - z0) / (self.eta * z0);
        self.amplitude * bump(sr, self.bump_order) * bump(sz, self.bump_order)
    }

    /// Meridional L1 mass of |phi| over both half-planes,
    /// integral |phi| dr dz = 2 * integral_{z>0} (-phi) dr dz.
    pub fn l1_weight(&self) -> Result<f64> {
        let (v, _) = quad::adaptive_2d(
            |r, z| [self.density(r, z)],
            self.support_box(),
            1e-10,
            0.0,
            14,
            1 << 14,
        )?;
        Ok(2.0 * v[0])
    }

    /// L1 norm of the axisymmetric lift of phi over R^3:
    /// 2 pi * integral |phi| r dr dz.
    pub fn l1_norm_3d(&self) -> Result<f64> {
        let (v, _) = quad::adaptive_2d(
            |r, z| [r * self.density(r, z)],
            self.support_box(),
            1e-10,
            0.0,
            14,
            1 << 14,
        )?;
        Ok(2.0 * std::f64::consts::TAU * v[0])
    }
}

/// Construct a profile; rejects out-of-range parameters.
pub fn make_profile(cone_slope: f64, eta: f64, r0: f64, amplitude: f64) -> Result<ProfileSpec> {
    ProfileSpec::new(cone_slope, eta, r0, amplitude)
}

/// The Biot-Savart shape function Psi(zeta) = zeta^{5/3} (1 + zeta^2)^{-5/2}.
///
/// Strictly decreasing on [1/sqrt(2), infinity); its logarithmic derivative
/// satisfies 3 zeta Psi'/Psi = 5 - 15 zeta^2 / (1 + zeta^2).
pub fn psi(zeta: f64) -> f64 {
    if zeta <= 0.0 {
        return 0.0;
    }
    zeta.powf(5.0 / 3.0) * (1.0 + zeta * zeta).powf(-2.5)
}

/// 3 zeta Psi'(zeta) / Psi(zeta), in closed form.
pub fn psi_log_derivative(zeta: f64) -> f64 {
    5.0 - 15.0 * zeta * zeta / (1.0 + zeta * zeta)
}

/// The critical point zeta_* = 1/sqrt(2) past which Psi decreases.
pub const ZETA_STAR: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn default_profile() -> ProfileSpec {
        make_profile(50.0, 0.25, 1.0, 1.0).unwrap()
    }

    #[test]
    fn support_box_matches_parameters() {
        let p = default_profile();
        let [rl, rh, zl, zh] = p.support_box();
        assert_eq!([rl, rh], [0.75, 1.25]);
        assert_eq!([zl, zh], [37.5, 62.5]);
    }

    #[test]
    fn peak_value_and_sign() {
        let p = default_profile();
        assert_eq!(p.eval(1.0, 50.0), -1.0);
        assert_eq!(p.eval(1.0, -50.0), 1.0);
    }

    #[test]
    fn zero_outside_support_and_on_axis_plane() {
        let p = default_profile();
        assert_eq!(p.eval(2.0, 50.0), 0.0);
        assert_eq!(p.eval(1.0, 37.5), 0.0); // support boundary
        for r in [0.0, 0.5, 1.0, 1.7, 100.0] {
            assert_eq!(p.eval(r, 0.0), 0.0);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(make_profile(50.0, 1.0, 1.0, 1.0).is_err());
        assert!(make_profile(50.0, 0.0, 1.0, 1.0).is_err());
        assert!(make_profile(-1.0, 0.25, 1.0, 1.0).is_err());
        assert!(make_profile(50.0, 0.25, 0.0, 1.0).is_err());
        assert!(make_profile(50.0, 0.25, 1.0, 0.5).is_err());
        assert!(ProfileSpec::with_bump_order(50.0, 0.25, 1.0, 1.0, 0).is_err());
    }

    #[test]
    fn higher_bump_order_sharpens_without_moving_peak_or_support() {
        let sharp = ProfileSpec::with_bump_order(50.0, 0.25, 1.0, 1.0, 4).unwrap();
        let smooth = default_profile();
        assert_eq!(sharp.eval(1.0, 50.0), -1.0);
        assert_eq!(sharp.eval(1.0, 37.5), 0.0);
        // strictly more concentrated off-center
        let off = (1.1, 55.0);
        assert!(sharp.eval(off.0, off.1).abs() < smooth.eval(off.0, off.1).abs());
        assert!(sharp.l1_weight().unwrap() < smooth.l1_weight().unwrap());
    }

    #[test]
    fn psi_critical_point_and_limits() {
        assert_eq!(psi(0.0), 0.0);
        // Psi(1/sqrt 2) = 2^{-5/6} (3/2)^{-5/2}
        let expected = 2.0f64.powf(-5.0 / 6.0) * 1.5f64.powf(-2.5);
        assert!((psi(ZETA_STAR) - expected).abs() < 1e-15);
        assert!((expected - 0.2036).abs() < 1e-4);
        // finite-difference check of the closed-form log-derivative at zeta_*
        let h = 1e-6;
        let fd = (psi(ZETA_STAR + h) - psi(ZETA_STAR - h)) / (2.0 * h);
        assert!(
            (3.0 * ZETA_STAR * fd / psi(ZETA_STAR) - psi_log_derivative(ZETA_STAR)).abs() < 1e-6
        );
        assert!(psi_log_derivative(ZETA_STAR).abs() < 1e-14);
        assert!(psi(1e4) < 1e-6);
    }

    #[test]
    fn psi_strictly_decreasing_past_critical_point() {
        let mut prev = psi(ZETA_STAR);
        let mut z = ZETA_STAR;
        while z < 100.0 {
            z *= 1.02;
            let cur = psi(z);
            assert!(cur < prev, "Psi not decreasing at zeta={z}");
            prev = cur;
        }
    }

    proptest! {
        #[test]
        fn oddness_in_z(r in 0.0f64..3.0, z in -80.0f64..80.0) {
            let p = default_profile();
            prop_assert!((p.eval(r, z) + p.eval(r, -z)).abs() <= f64::EPSILON);
        }

        #[test]
        fn nonpositive_upper_half(r in 0.0f64..3.0, z in 0.0f64..80.0) {
            let p = default_profile();
            prop_assert!(p.eval(r, z) <= 0.0);
        }
    }

    #[test]
    fn support_confinement_random_samples() {
        // 10^4 deterministic pseudo-random samples outside the support box.
        use rand::prelude::*;
        let p = default_profile();
        let [rl, rh, zl, zh] = p.support_box();
        let mut rng = rand::rngs::StdRng::seed_from_u64(0x5eed);
        let mut checked = 0usize;
        while checked < 10_000 {
            let r: f64 = rng.random_range(0.0..4.0);
            let z: f64 = rng.random_range(-100.0..100.0);
            let inside = r >= rl && r <= rh && z.abs() >= zl && z.abs() <= zh;
            if inside {
                continue;
            }
            assert_eq!(p.eval(r, z), 0.0, "nonzero outside support at ({r},{z})");
            checked += 1;
        }
    }
}
