//! Lorentz L^{3,q} quasi-norms of the multi-ring initial data: per-ring scale
//! invariance, the ell^q amplitude equivalence, the divergence trend when
//! alpha q <= 1, and the smallness budget.
//!
//!     cargo run --release --example lorentz_norms

use ringcascade::lorentz::{
    multiring_relative_vorticity_norm, smallness_budget, MultiRingConfig,
};
use ringcascade::profile::make_profile;

fn main() -> ringcascade::Result<()> {
    let profile = make_profile(50.0, 0.25, 1.0, 1.0)?;
    let q = 2.0;

    let cfg = MultiRingConfig::new(1.0, 0.6, 8, profile);
    let norm = multiring_relative_vorticity_norm(&cfg, q)?;
    println!("single-ring L^(3,{q}) norms (alpha = 0.6, eps = 1):");
    println!("  k    norm          norm * k^alpha (scale-invariant)");
    for (k, n) in norm.per_ring.iter().enumerate() {
        let k1 = k + 1;
        println!("  {k1:<4} {n:<13.6e} {:<13.6e}", n * (k1 as f64).powf(0.6));
    }
    println!(
        "m-ring norm = {:.6e}; ell^q equivalence ratio = {:.6}",
        norm.total, norm.ellq_ratio
    );

    println!("\nalpha q <= 1 (alpha = 0.4, q = 2): the norm diverges with m:");
    for m in [16usize, 64, 256, 1024] {
        let cfg = MultiRingConfig {
            cells_per_dim: 8,
            ..MultiRingConfig::new(1.0, 0.4, m, profile)
        };
        let n = multiring_relative_vorticity_norm(&cfg, q)?;
        println!("  m = {m:<5} norm = {:.6e}", n.total);
    }

    let target = 0.1;
    let eps = smallness_budget(target, q, 0.6, &profile)?;
    println!(
        "\nsmallness budget: eps = {eps:.6e} keeps the Lorentz + sup/L1 norms within {target}"
    );
    Ok(())
}
