//! Energy bound, multiplier inclusion and operator checks on the F1 and F2 runs.

use hemi_ns::evolve::solve;
use hemi_ns::fixtures::{f1_config, f2_config};
use hemi_ns::verify::{energy_report, kappa_inclusion_check, lemma1_bound_check, skew_symmetry_check};

fn main() -> hemi_ns::Result<()> {
    for (name, cfg) in [("F1", f1_config(0.05)?), ("F2", f2_config(0.05)?)] {
        let (traj, field) = solve(&cfg)?;
        let mut rep = energy_report(&traj, &cfg)?;
        rep.extend(kappa_inclusion_check(&field, &cfg.law, 1e-6)?);
        rep.extend(lemma1_bound_check(&field, &cfg)?);
        rep.extend(skew_symmetry_check(&cfg.system, 100, 1)?);
        println!("== {name}: {}", if rep.passed() { "pass" } else { "FAIL" });
        for r in &rep.records {
            println!("  {:<22} measured {:>12.5e}  bound {:>12.5e}  {}", r.name, r.measured, r.bound, r.pass);
        }
    }
    Ok(())
}
