use std::sync::OnceLock;

use proptest::prelude::*;

use hemi_ns::boundary_law::{eval_envelope, fixture, mollify_eval, BoundaryLaw, Mollifier};
use hemi_ns::control::{Admissible, CostH};
use hemi_ns::directional_growth::{clarke_dd, clarke_dd_grid, ArcFunction, GrowthFunction, ScalarPotential, SuperPotential};
use hemi_ns::galerkin::{assemble, build_basis, default_quad_order, AssembledSystem};
use hemi_ns::io::{format_sci, Plot, Series};

fn system() -> &'static AssembledSystem {
    static SYS: OnceLock<AssembledSystem> = OnceLock::new();
    SYS.get_or_init(|| assemble(&build_basis(3).unwrap(), 0.5, default_quad_order(3)).unwrap())
}

fn law(name: &str) -> BoundaryLaw {
    fixture(name).unwrap()
}

fn laws() -> impl Strategy<Value = &'static str> {
    prop::sample::select(vec!["sign", "step", "remark-floor-cube", "remark-sqrt", "linear"])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn convection_is_energy_neutral(u in prop::collection::vec(-3.0..3.0f64, 9), v in prop::collection::vec(-3.0..3.0f64, 9)) {
        let sys = system();
        let nu: f64 = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nv: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!(sys.trilinear_form(&u, &v, &v).abs() <= 1e-10 * (1.0 + nu * nv * nv));
        let c = sys.convection(&v);
        prop_assert!(c.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>().abs() <= 1e-10 * (1.0 + nv.powi(3)));
    }

    #[test]
    fn envelopes_nest_and_contain_values(name in laws(), t in -3.0..3.0f64, e1 in 0.0..0.2f64, de in 0.0..0.2f64) {
        let l = law(name);
        let inner = eval_envelope(&l, e1).unwrap().at(t).unwrap();
        let outer = eval_envelope(&l, e1 + de).unwrap().at(t).unwrap();
        prop_assert!(outer.lo <= inner.lo + 1e-12 && inner.hi <= outer.hi + 1e-12);
        let v = l.value(t).unwrap();
        let hat = eval_envelope(&l, 0.0).unwrap().at(t).unwrap();
        prop_assert!(hat.contains(v, 1e-12));
    }

    #[test]
    fn mollified_law_stays_in_local_range(name in laws(), t in -3.0..3.0f64, eps in 0.01..0.5f64) {
        let l = law(name);
        let m = Mollifier::with_default_order(eps).unwrap();
        let v = mollify_eval(&l, &m, t).unwrap();
        let iv = l.ess_range(t - eps, t + eps).unwrap();
        prop_assert!(iv.contains(v, 1e-9 * (1.0 + iv.lo.abs().max(iv.hi.abs()))));
    }

    #[test]
    fn mollified_sign_is_odd_and_monotone(t in 0.0..0.3f64, dt in 0.0..0.1f64) {
        let l = law("sign");
        let m = Mollifier::with_default_order(0.1).unwrap();
        let a = mollify_eval(&l, &m, t).unwrap();
        prop_assert!((a + mollify_eval(&l, &m, -t).unwrap()).abs() < 1e-12);
        prop_assert!(mollify_eval(&l, &m, t + dt).unwrap() >= a - 1e-12);
    }

    #[test]
    fn chang_potential_is_lipschitz(name in laws(), a in -2.5..2.5f64, b in -2.5..2.5f64) {
        let l = law(name);
        let iv = l.ess_range(a.min(b), a.max(b)).unwrap();
        let bound = iv.lo.abs().max(iv.hi.abs()) * (b - a).abs();
        let diff = (l.chang_potential(b).unwrap() - l.chang_potential(a).unwrap()).abs();
        prop_assert!(diff <= bound + 1e-9);
    }

    #[test]
    fn projection_is_idempotent(w in prop::collection::vec(-10.0..10.0f64, 1..6), radius in 0.1..5.0f64) {
        for set in [Admissible::Box { lo: -1.0, hi: 2.0 }, Admissible::Ball { radius }] {
            let p = set.project(&w);
            prop_assert!(set.contains(&p, 1e-12));
            let again = set.project(&p);
            prop_assert!(again.iter().zip(&p).all(|(a, b)| (a - b).abs() <= 1e-14 * (1.0 + b.abs())));
            if set.contains(&w, 0.0) {
                prop_assert_eq!(p, w.clone());
            }
        }
    }

    #[test]
    fn control_cost_is_convex(a in prop::collection::vec(-5.0..5.0f64, 3), b in prop::collection::vec(-5.0..5.0f64, 3), s in 0.0..1.0f64) {
        for h in [CostH::quadratic(0.3), CostH::affine_quadratic(2.0, 1.0)] {
            let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| s * x + (1.0 - s) * y).collect();
            prop_assert!(h.eval(&mix) <= s * h.eval(&a) + (1.0 - s) * h.eval(&b) + 1e-9);
        }
    }

    #[test]
    fn sci_format_round_trips(x in prop::num::f64::NORMAL) {
        let back: f64 = format_sci(x).parse().unwrap();
        prop_assert!((back - x).abs() <= 1e-12 * x.abs());
    }

    #[test]
    fn clarke_derivative_is_sublinear(xi in -3.0..3.0f64, v in -2.0..2.0f64, w in -2.0..2.0f64, lam in 0.1..3.0f64) {
        let sp = SuperPotential::new(
            vec![
                (ArcFunction::constant(1.0), ScalarPotential::Primitive { law: "remark-floor-cube".into() }),
                (ArcFunction::constant(-0.5), ScalarPotential::Abs),
            ],
            GrowthFunction::constant(50.0),
            10.0,
            1e-3,
        ).unwrap();
        let d = |dir: f64| clarke_dd(&sp, 0.0, xi, dir).unwrap();
        prop_assert!((d(lam * v) - lam * d(v)).abs() < 1e-9 * (1.0 + d(v).abs()));
        prop_assert!(d(v + w) <= d(v) + d(w) + 1e-9);
        prop_assert!(d(v) + d(-v) >= -1e-12);
        let grid = clarke_dd_grid(&sp, 0.0, xi, v, 1e-6).unwrap();
        // difference quotients never exceed the exact value by more than the grid reach
        prop_assert!(grid.value <= d(v) + 1e-3);
    }

    #[test]
    fn plots_are_deterministic(ys in prop::collection::vec(-1e3..1e3f64, 1..40)) {
        let pts: Vec<(f64, f64)> = ys.iter().enumerate().map(|(i, &y)| (i as f64, y)).collect();
        let plot = Plot::new("p", "i", "y").with_series(Series::new("s", pts.clone()));
        prop_assert_eq!(plot.render().unwrap(), plot.render().unwrap());
        let frame = plot.frame().unwrap();
        let (px, _) = frame.to_pixel(pts[0].0, pts[0].1);
        prop_assert!((0.0..=hemi_ns::io::WIDTH).contains(&px));
    }
}

#[test]
fn decay_plot_is_monotone_at_its_endpoints() {
    let pts: Vec<(f64, f64)> = (0..=50).map(|i| (i as f64 / 50.0, (-3.0 * i as f64 / 50.0).exp())).collect();
    let plot = Plot::new("decay", "t", "c").with_series(Series::new("c", pts.clone()));
    let svg = plot.render().unwrap();
    let line = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
    let coords: Vec<(f64, f64)> = line
        .split('"')
        .nth(1)
        .unwrap()
        .split(' ')
        .map(|p| {
            let (x, y) = p.split_once(',').unwrap();
            (x.parse().unwrap(), y.parse().unwrap())
        })
        .collect();
    assert!(coords.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 >= w[0].1));
    let frame = plot.frame().unwrap();
    for (&(x, y), &(px, py)) in [pts[0], pts[50]].iter().zip([coords[0], coords[50]].iter()) {
        let (ex, ey) = frame.to_pixel(x, y);
        assert!((ex - px).abs() <= 0.005 && (ey - py).abs() <= 0.005);
    }
}
