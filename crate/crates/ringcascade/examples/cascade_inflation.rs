//! Integrate a frozen-profile cascade until the largest ring amplitude hits
//! the renormalized target, then print the event times and diagnostics.
//!
//!     cargo run --release --example cascade_inflation

use std::sync::Arc;

use ringcascade::cascade::{
    run_until_inflation, CascadeModel, CascadeRun,
};
use ringcascade::coeffs::CoefficientTable;
use ringcascade::profile::make_profile;

fn main() -> ringcascade::Result<()> {
    let profile = make_profile(50.0, 0.25, 1.0, 1.0)?;
    let table = Arc::new(CoefficientTable::build(&profile)?);
    let run = CascadeRun::new(CascadeModel::Frozen(table), 1.0, 0.3, 128).with_target(10.0);
    println!(
        "frozen cascade: m = {}, eps = {}, alpha = {}, target A = {} (A-bar = {:.4})",
        run.m,
        run.eps,
        run.alpha,
        run.target_a,
        run.a_bar()
    );

    let traj = run_until_inflation(&run)?;
    println!("t_inflation  = {:?}", traj.events.t_inflation);
    println!("t_front_hit  = {:?}", traj.events.t_front_hit);
    println!(
        "steps: {} accepted, {} rejected, {} rhs evals",
        traj.stats.steps_accepted, traj.stats.steps_rejected, traj.stats.rhs_evals
    );
    println!("max cascade residual = {:.3e}", traj.max_cascade_residual());

    let last = traj.samples.len() - 1;
    let d = traj.diagnostics(last);
    let s = &traj.samples[last];
    println!("\nstate at t = {:.4}:", s.t);
    println!("  k     x_k          Gamma_k      zeta_k       b_k          S_k");
    let zeta = d.zeta.as_ref().unwrap();
    for k in [1usize, 2, 4, 8, 16, 32, 64, 128] {
        println!(
            "  {k:<5} {:<12.5e} {:<12.5e} {:<12.5e} {:<12.5e} {:<12.5e}",
            s.x(k),
            d.gamma[k - 1],
            zeta[k - 1],
            d.b[k - 1],
            d.s[k - 1]
        );
    }
    println!("front index at the end: {:?}", d.front_index);
    Ok(())
}
