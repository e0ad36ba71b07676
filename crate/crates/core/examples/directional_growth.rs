//! Growth conditions for x-dependent superpotentials and a driven run with `a(x)|ξ|`.

use hemi_ns::boundary_law::fixture;
use hemi_ns::directional_growth::{
    check_conditions, clarke_dd, lemma_estj_check, sample_grid, solve_with_superpotential, superpotential_inclusion_check,
    ArcFunction, BoundReading, Condition, GrowthData, GrowthFunction, ScalarPotential, SuperPotential,
};
use hemi_ns::evolve::solve;
use hemi_ns::fixtures::{f1_config, f5_config, f5_growth, f5_superpotential};

fn main() -> hemi_ns::Result<()> {
    let zero_k = GrowthData {
        alpha: GrowthFunction::constant(1.0),
        k: ArcFunction::constant(0.0),
    };
    let samples = sample_grid(&[0.0, 1.0, 2.5], &[0.5, 1.0, 2.0], 3.0, 13);
    for (label, scale, g) in [
        ("|xi|", 1.0, ScalarPotential::Abs),
        ("xi^2", 1.0, ScalarPotential::Quadratic),
        ("-xi^2", -1.0, ScalarPotential::Quadratic),
    ] {
        let sp = SuperPotential::new(vec![(ArcFunction::constant(scale), g)], GrowthFunction::constant(10.0), 10.0, 1e-3)?;
        println!("{label:<6} j0(0; 1) = {:+.3}  G2: {}", clarke_dd(&sp, 0.0, 0.0, 1.0)?, check_conditions(&sp, &zero_k, Condition::G2, &samples));
    }

    let sp = f5_superpotential()?;
    let growth = f5_growth();
    println!("a(x)|xi|: H(j0) {}", check_conditions(&sp, &growth, Condition::Hj0(BoundReading::Xi), &samples));
    println!("a(x)|xi|: mollified estimate {}", lemma_estj_check(&sp, &growth, 0.05, &samples));
    let cfg = f5_config(0.05)?;
    let (_, field) = solve_with_superpotential(&sp, &cfg)?;
    print!("{}", superpotential_inclusion_check(&field, &sp, 1e-6)?);

    // an x-independent j with j' = sign reproduces the law pipeline
    let law = fixture("sign")?;
    let cfg = f1_config(0.05)?;
    let lifted = SuperPotential::from_law(&law, GrowthFunction::constant(0.0));
    let same = solve(&cfg)?.0 == solve_with_superpotential(&lifted, &cfg)?.0;
    println!("reduction to the law pipeline is bit-identical: {same}");
    Ok(())
}
