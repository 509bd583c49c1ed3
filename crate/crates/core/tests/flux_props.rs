use std::sync::Arc;

use proptest::prelude::*;
use upwind_core::flux::{eo_antisymmetry_check, eo_flux, Component, CustomFlux, FluxSpec, FluxTable, Shape};

fn builtins() -> Vec<FluxSpec> {
    vec![
        FluxSpec::burgers((-1.5, 2.0)).unwrap(),
        FluxSpec::advection(-0.7, (-1.0, 1.0)).unwrap(),
        FluxSpec::lwr((0.0, 1.0)).unwrap(),
    ]
}

fn tabulated() -> Vec<FluxSpec> {
    let cubic = CustomFlux::new("cubic", |u| u * u * u / 3.0 - u, |u| u * u - 1.0);
    let table = FluxTable::new(&[(-1.0, 0.3), (-0.2, -0.4), (0.5, 0.1), (1.0, -0.2)]).unwrap();
    vec![
        // oblique directions mix two shapes, which has no closed split
        FluxSpec::new(vec![Component::new(0.8, Shape::Burgers), Component::new(-1.3, Shape::Lwr)], (-0.5, 1.5), None).unwrap(),
        FluxSpec::new(vec![Component::new(1.0, Shape::Custom(Arc::new(cubic)))], (-2.0, 2.0), None).unwrap(),
        FluxSpec::new(vec![Component::new(1.0, Shape::Table(Arc::new(table)))], (-1.0, 1.0), None).unwrap(),
    ]
}

fn direction(flux: &FluxSpec, theta: f64) -> Vec<f64> {
    if flux.dim() == 1 {
        vec![if theta.sin() >= 0.0 { 1.0 } else { -1.0 }]
    } else {
        vec![theta.cos(), theta.sin()]
    }
}

fn normal_flux(flux: &FluxSpec, n: &[f64], u: f64) -> f64 {
    let f = flux.eval(u);
    n.iter().zip(f).map(|(a, b)| a * b).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn split_sums_to_flux(s in 0.0f64..1.0, theta in 0.0f64..std::f64::consts::TAU) {
        for flux in builtins() {
            let (lo, hi) = flux.state_range();
            let u = lo + s * (hi - lo);
            let n = direction(&flux, theta);
            let sp = flux.directional_split(&n).unwrap();
            prop_assert!((sp.g_plus(u) + sp.g_minus(u) - normal_flux(&flux, &n, u)).abs() <= 1e-10);
        }
        for flux in tabulated() {
            let (lo, hi) = flux.state_range();
            let u = lo + s * (hi - lo);
            let n = direction(&flux, theta);
            let sp = flux.directional_split(&n).unwrap();
            prop_assert!((sp.g_plus(u) + sp.g_minus(u) - normal_flux(&flux, &n, u)).abs() <= 1e-6);
        }
    }

    #[test]
    fn eo_is_consistent_and_antisymmetric(s in 0.0f64..1.0, t in 0.0f64..1.0, theta in 0.0f64..std::f64::consts::TAU) {
        for flux in builtins().into_iter().chain(tabulated()) {
            let (lo, hi) = flux.state_range();
            let (a, b) = (lo + s * (hi - lo), lo + t * (hi - lo));
            let n = direction(&flux, theta);
            let neg: Vec<f64> = n.iter().map(|x| -x).collect();
            let sp = flux.directional_split(&n).unwrap();
            let sm = flux.directional_split(&neg).unwrap();
            prop_assert!((eo_flux(&sp, a, a).unwrap() - sp.total(a)).abs() <= 1e-14 * (1.0 + sp.total(a).abs()));
            prop_assert!(eo_antisymmetry_check(&sp, &sm, a, b));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn split_parts_are_monotone(theta in 0.0f64..std::f64::consts::TAU) {
        for flux in builtins().into_iter().chain(tabulated()) {
            let (lo, hi) = flux.state_range();
            let sp = flux.directional_split(&direction(&flux, theta)).unwrap();
            let mut prev = (f64::NEG_INFINITY, f64::INFINITY);
            for i in 0..=500 {
                let u = lo + (hi - lo) * i as f64 / 500.0;
                let cur = (sp.g_plus(u), sp.g_minus(u));
                prop_assert!(cur.0 >= prev.0 - 1e-14 && cur.1 <= prev.1 + 1e-14);
                prev = cur;
            }
        }
    }
}

#[test]
fn out_of_range_states_are_rejected() {
    let f = FluxSpec::burgers((0.0, 1.0)).unwrap();
    let sp = f.directional_split(&[1.0]).unwrap();
    assert!(eo_flux(&sp, 1.5, 0.0).is_err());
}
