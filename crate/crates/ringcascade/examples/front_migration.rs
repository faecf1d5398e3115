//! Watch the productive front migrate left through the ring hierarchy and
//! verify the front-induced 1/t lower bound on the stretching rate, with and
//! without worst-case multiplicative perturbations of the contributions.
//!
//!     cargo run --release --example front_migration

use ringcascade::analysis::front_bound_check;
use ringcascade::cascade::{
    run_until_inflation, theta_mu, CascadeModel, CascadeRun, Perturbation,
};

fn main() -> ringcascade::Result<()> {
    let run = CascadeRun::new(
        CascadeModel::Localized {
            cone_slope: 50.0,
            r0: 1.0,
        },
        1.0,
        0.5,
        256,
    )
    .with_target(10.0);
    let traj = run_until_inflation(&run)?;
    println!(
        "localized cascade, m = 256: front hit at t = {:.4e}, inflation at t = {:.4e}",
        traj.events.t_front_hit.unwrap(),
        traj.events.t_inflation.unwrap()
    );

    println!("\nfront index along the run:");
    println!("  t            front index  zeta_m");
    for i in (0..traj.samples.len()).step_by(traj.samples.len() / 12) {
        let d = traj.diagnostics(i);
        let zeta_m = d.zeta.as_ref().unwrap()[run.m - 1];
        println!(
            "  {:<12.5e} {:<12} {zeta_m:<12.5e}",
            traj.samples[i].t,
            d.front_index.map(|j| j.to_string()).unwrap_or_else(|| "-".into()),
        );
    }

    let margins = front_bound_check(&traj, 1.0)?;
    let min = margins.iter().map(|m| m.margin).fold(f64::INFINITY, f64::min);
    println!(
        "\nfront bound S_(m-1)(t) * 3t / log(L/zeta_eta) >= 1 after the hit:"
    );
    println!("  {} admissible samples, min margin = {min:.2}", margins.len());

    // worst-case constant perturbations in [c_mu, C_mu]; the bound holds with
    // the ratio Theta_mu in the constant
    let theta = theta_mu(0.05);
    let run_p = run
        .clone()
        .with_perturbation(Perturbation::worst_case_alternating(256, 0.05));
    let traj_p = run_until_inflation(&run_p)?;
    let margins_p = front_bound_check(&traj_p, theta)?;
    let min_p = margins_p
        .iter()
        .map(|m| m.margin)
        .fold(f64::INFINITY, f64::min);
    println!(
        "perturbed run, Theta_mu = {theta:.4}: {} samples, min margin = {min_p:.2}",
        margins_p.len()
    );
    Ok(())
}
