//! Single-mode free decay against `e^{-2π² t}` for two step sizes.

use hemi_ns::evolve::solve;
use hemi_ns::fixtures::{f3_config, f3_exact};

fn main() -> hemi_ns::Result<()> {
    let mut errors = Vec::new();
    for dt in [1e-2, 1e-3] {
        let cfg = f3_config(dt)?;
        let (traj, _) = solve(&cfg)?;
        let err = traj
            .times
            .iter()
            .zip(&traj.coeffs)
            .map(|(t, c)| (c[0] - f3_exact(*t)).abs())
            .fold(0.0, f64::max);
        println!("dt = {dt:e}: max error {err:.4e} = {:.3} dt", err / dt);
        errors.push(err);
    }
    println!("error ratio {:.3}", errors[0] / errors[1]);
    Ok(())
}
