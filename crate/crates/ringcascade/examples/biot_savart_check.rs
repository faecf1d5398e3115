//! Evaluate the axisymmetric Biot-Savart velocity of a multi-ring snapshot,
//! verify the origin moment identity against a finite difference, and check
//! the outer-region decomposition and annular bound.
//!
//!     cargo run --release --example biot_savart_check

use ringcascade::biotsavart::{
    annular_kernel_mass_exact, annular_kernel_mass_quadrature, origin_stretching_rate,
    origin_stretching_rate_rescaled, prop21_residuals, velocity, Ring, RingSnapshot,
    RING_SCALE_BASE,
};
use ringcascade::profile::make_profile;

fn main() -> ringcascade::Result<()> {
    let profile = make_profile(50.0, 0.25, 1.0, 1.0)?;
    let rings: Vec<Ring> = (1..=3)
        .map(|k| Ring {
            amplitude: 1.0 / (k as f64).powf(0.3),
            r_scale: RING_SCALE_BASE.powi(k),
            h_scale: RING_SCALE_BASE.powi(k),
        })
        .collect();
    let snap = RingSnapshot::new(profile, rings)?;
    println!("snapshot: 3 rings at scales 1e-2, 1e-4, 1e-6; |omega|_inf = {}", snap.sup_norm());

    let rate = origin_stretching_rate(&snap, 1e-9)?;
    let rescaled = origin_stretching_rate_rescaled(&snap)?;
    let h = 1e-3 * snap.rings.last().unwrap().r_scale;
    let v = velocity(&snap, h, 0.0, 1e-8)?;
    println!("\norigin stretching rate d_r u^r(0,0):");
    println!("  moment integral      = {rate:.8e}");
    println!("  per-ring rescaled    = {rescaled:.8e}");
    println!("  u^r(h,0)/h at h={h:.1e} = {:.8e}", v.u_r / h);
    println!("  finite-difference mismatch = {:.2e}", (v.u_r / h - rate).abs() / rate);

    println!("\nvelocity and outer-region residuals along z = (L/3) r:");
    println!("  r_x        u_r           u_z           E_r           E_z");
    for ring in &snap.rings {
        let r_x = ring.r_scale;
        let z_x = profile.cone_slope / 3.0 * r_x;
        let v = velocity(&snap, r_x, z_x, 1e-7)?;
        let (e_r, e_z) = prop21_residuals(&snap, r_x, z_x, 1e-7)?;
        println!(
            "  {r_x:<10.1e} {:<13.5e} {:<13.5e} {e_r:<13.5e} {e_z:<13.5e}",
            v.u_r, v.u_z
        );
    }

    let (rho, xn) = (1e-4, 1e-2);
    let q = annular_kernel_mass_quadrature(rho, xn, 1e-9)?;
    let e = annular_kernel_mass_exact(rho, xn);
    println!("\nannular kernel mass over rho = {rho:.0e} .. |x| = {xn:.0e}:");
    println!("  quadrature {q:.10e} vs closed form {e:.10e} (rel err {:.1e})", (q - e).abs() / e);

    let json = snap.to_json()?;
    let path = std::env::temp_dir().join("ringcascade_snapshot.json");
    std::fs::write(&path, json)?;
    println!("\nsnapshot written to {}", path.display());
    Ok(())
}
