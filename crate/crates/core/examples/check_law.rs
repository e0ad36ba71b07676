//! Classify the catalog laws: Rauch verdict, ρ constants and envelopes at a kink.

use hemi_ns::boundary_law::{eval_envelope, fixture, fixture_names, mollify_eval, rauch_check, Mollifier};

fn main() -> hemi_ns::Result<()> {
    for name in fixture_names() {
        let law = fixture(name)?;
        println!("{name:<18} rauch: {}", rauch_check(&law));
        if let Ok((r1, r2)) = law.rho_constants() {
            println!("{:<18} rho1 = {r1}, rho2 = {r2}", "");
        }
    }

    let law = fixture("sign")?;
    let moll = Mollifier::with_default_order(0.1)?;
    for eps in [0.1, 0.01, 0.0] {
        let iv = eval_envelope(&law, eps)?.at(0.0)?;
        println!("sign envelope at 0, eps = {eps}: [{}, {}]", iv.lo, iv.hi);
    }
    for t in [-0.2, -0.05, 0.0, 0.05, 0.2] {
        println!("mollified sign({t:+}) = {:.6}", mollify_eval(&law, &moll, t)?);
    }
    Ok(())
}
