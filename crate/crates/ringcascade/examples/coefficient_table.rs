//! Tabulate the frozen Biot-Savart coefficients of a cone-localized profile
//! and check them against the localized closed form and the slope sandwich.
//!
//!     cargo run --release --example coefficient_table

use ringcascade::coeffs::{
    lambda_localized, q_sandwich_bounds, q_star, CoefficientTable,
};
use ringcascade::profile::make_profile;

fn main() -> ringcascade::Result<()> {
    let profile = make_profile(50.0, 0.25, 1.0, 1.0)?;
    println!(
        "profile: L = {}, eta = {}, support box {:?}",
        profile.cone_slope,
        profile.eta,
        profile.support_box()
    );

    let table = CoefficientTable::build_with_grid(&profile, 128)?;
    let weight = profile.l1_weight()?;
    println!("\n  gamma        Lambda       Q(gamma)   kappa      loc. surrogate");
    for &gamma in &[1e-6, 1e-4, 1e-2, 0.05, 0.2, 1.0] {
        let lam = table.lambda_at(gamma);
        let q = table.q_at(gamma);
        let loc = weight * lambda_localized(gamma, profile.cone_slope, profile.r0);
        println!(
            "  {gamma:<12.3e} {lam:<12.5e} {q:<10.5} {:<10.5} {loc:<12.5e}",
            5.0 - q
        );
    }

    println!("\nslope sandwich 15(gL-)^2/(1+(gL-)^2) <= Q <= 15(gL+)^2/(1+(gL+)^2):");
    for &gamma in &[0.002, 0.02, 0.2] {
        let (lo, hi) = q_sandwich_bounds(&profile, gamma);
        let q = table.q_at(gamma);
        println!("  gamma = {gamma:<6}: {lo:.5} <= {q:.5} <= {hi:.5}");
    }

    let qs = q_star(&profile)?;
    println!("\nQ_* (sup of Q over (0,1]) = {qs:.4}");

    // a shallow-slope profile keeps Q_* small, hence a decay threshold
    let shallow = make_profile(0.1, 0.25, 1.0, 1.0)?;
    let qs_shallow = q_star(&shallow)?;
    println!(
        "shallow profile (L = 0.1): Q_* = {qs_shallow:.4}, decay threshold 2/(7 - Q_*) = {:.4}",
        2.0 / (7.0 - qs_shallow)
    );

    let out = std::env::temp_dir().join("ringcascade_coefficients.csv");
    std::fs::write(&out, table.to_csv())?;
    println!("\nfull table written to {}", out.display());
    Ok(())
}
