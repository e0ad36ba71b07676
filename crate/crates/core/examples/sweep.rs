//! (m, ε) sweep on the sign-law run: Cauchy distances and equi-integrability.

use hemi_ns::evolve::sweep;
use hemi_ns::fixtures::f1_spec;
use hemi_ns::verify::uniform_integrability_report;

fn main() -> hemi_ns::Result<()> {
    let spec = f1_spec()?;
    let report = sweep(&spec, &[1, 4, 9], &[0.1, 0.05, 0.025])?;
    for e in &report.entries {
        let l1 = e.result.as_ref().map(|(_, f)| f.l1_norm()).unwrap_or(f64::NAN);
        println!("m = {}, eps = {}: |kappa|_L1 = {l1:.6}", e.m, e.epsilon);
    }
    println!("successive trajectory distances {:?}", report.table.successive_trajectory());
    println!("successive multiplier distances {:?}", report.table.successive_multiplier());

    let fields: Vec<_> = report
        .entries
        .iter()
        .filter_map(|e| e.result.as_ref().ok().map(|(_, f)| f.clone()))
        .collect();
    let ui = uniform_integrability_report(&fields, 3)?;
    print!("{ui}");
    Ok(())
}
