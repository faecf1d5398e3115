//! Measure how the inflation time decays with the ring count and compare the
//! fit against the m^-beta envelope from the front-migration analysis.
//!
//!     cargo run --release --example tn_scaling

use std::sync::Arc;

use ringcascade::analysis::{
    admissible_alpha_range, beta_exponent, choose_cone_slope, tn_scaling_experiment,
};
use ringcascade::cascade::{CascadeModel, CascadeRun};
use ringcascade::coeffs::CoefficientTable;
use ringcascade::profile::make_profile;

fn main() -> ringcascade::Result<()> {
    let l = choose_cone_slope(2.0, 1.0, 0.5)?;
    let range = admissible_alpha_range(l, 1.0, 2.0)?;
    let alpha = range.midpoint();
    let (gamma, beta) = beta_exponent(l, alpha, 1.0)?;
    println!("cone slope L = {l:.4}, admissible alpha in ({:.3}, {:.3})", range.lo, range.hi);
    println!("alpha = {alpha}, gamma = {gamma:.4}, beta = {beta:.4}");
    println!("bound slope -(1+gamma) beta = {:.4}\n", -(1.0 + gamma) * beta);

    let profile = make_profile(l, 0.25, 1.0, 1.0)?;
    let table = Arc::new(CoefficientTable::build(&profile)?);
    let template = CascadeRun::new(CascadeModel::Frozen(table), 1.0, alpha, 2).with_target(10.0);
    let m_list = [64, 128, 256, 512, 1024, 2048];
    let report = tn_scaling_experiment(&template, &m_list)?;

    println!("  m        t_N           envelope t_N(64) (m/64)^-beta");
    let t0 = report.t_n_values[0];
    for (m, t) in report.m_values.iter().zip(&report.t_n_values) {
        let envelope = t0 * (*m as f64 / 64.0).powf(-report.beta.unwrap());
        println!("  {m:<8} {t:<13.6e} {envelope:<13.6e}");
    }
    println!(
        "\nfitted slope of log t_N vs log m: {:.4} (envelope requires <= {:.4})",
        report.fitted_slope,
        -report.beta.unwrap()
    );
    println!(
        "strictly decreasing: {}; envelope satisfied: {}",
        report.monotone_decreasing,
        report.bound_satisfied.unwrap()
    );
    Ok(())
}
