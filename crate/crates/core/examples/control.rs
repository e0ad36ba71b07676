//! Pattern search on the F4 control problems and a forcing-stability sweep.

use hemi_ns::control::{minimize, objective_j, solution_map, stability_experiment};
use hemi_ns::fixtures::{f4_problem, f4_w_star, smooth_forcing};

fn main() -> hemi_ns::Result<()> {
    let tracking = f4_problem(false)?;
    let rep = minimize(&tracking, 200)?;
    println!("tracking: best J = {:e}, |w| = {:e}", rep.best_j, rep.best_w.iter().map(|v| v * v).sum::<f64>().sqrt());

    let inversion = f4_problem(true)?;
    let zero = vec![0.0; inversion.dim()];
    let j0 = objective_j(&inversion, &zero, &solution_map(&inversion, &zero)?.0)?;
    let rep = minimize(&inversion, 500)?;
    println!("plant inversion: J(0) = {j0:e}, best J = {:e} after {} evaluations", rep.best_j, rep.evaluations);
    println!("  w*   = {:?}", f4_w_star());
    println!("  best = {:?}", rep.best_w);

    let g = smooth_forcing().scaled(0.1);
    let deltas: Vec<_> = (0..7).map(|j| g.scaled(0.5f64.powi(j))).collect();
    let st = stability_experiment(&tracking, &deltas)?;
    for r in &st.rows {
        println!("  |delta| = {:.4e}  L2(V) = {:.4e}  Linf(H) = {:.4e}", r.delta_norm, r.l2_v, r.linf_h);
    }
    println!("strictly decreasing: {}", st.pass);
    Ok(())
}
