use proptest::prelude::*;
use upwind_core::filter::{builtin_filter, moment_distance, rescale, Filter, BUILTIN_FILTERS, TAIL_TOL};

fn filter(kind: usize, alpha: f64) -> Filter {
    rescale(&builtin_filter(BUILTIN_FILTERS[kind % 3]).unwrap(), alpha).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn rescale_is_a_semigroup(kind in 0usize..3, a in 0.05f64..4.0, b in 0.05f64..4.0, s in 0.0f64..1.0) {
        let base = builtin_filter(BUILTIN_FILTERS[kind]).unwrap();
        let two = rescale(&rescale(&base, a).unwrap(), b).unwrap();
        let one = rescale(&base, a * b).unwrap();
        prop_assert_eq!(two.alpha(), one.alpha());
        let r = s * 2.0 * one.support_radius().min(40.0 * a * b);
        prop_assert_eq!(two.value(r), one.value(r));
        prop_assert_eq!(two.atoms(), one.atoms());
    }

    #[test]
    fn moment_distance_is_a_metric(k in prop::array::uniform3(0usize..3), a in prop::array::uniform3(0.05f64..1.0)) {
        let [p, q, x] = [filter(k[0], a[0]), filter(k[1], a[1]), filter(k[2], a[2])];
        let pq = moment_distance(&p, &q);
        prop_assert_eq!(pq, moment_distance(&q, &p));
        prop_assert!(pq >= 0.0);
        prop_assert!(moment_distance(&p, &p) == 0.0);
        prop_assert!(pq <= moment_distance(&p, &x) + moment_distance(&x, &q) + 1e-9);
    }

    #[test]
    fn moment_distance_scale_bound(kind in 0usize..3, a in 0.05f64..1.0, b in 0.05f64..1.0) {
        let base = builtin_filter(BUILTIN_FILTERS[kind]).unwrap();
        let d = moment_distance(&rescale(&base, a).unwrap(), &rescale(&base, b).unwrap());
        prop_assert!(d <= (a + b) * base.first_moment() * (1.0 + 1e-9));
    }
}

#[test]
fn cell_weights_sum_to_minus_phi_zero() {
    for name in BUILTIN_FILTERS {
        let phi = rescale(&builtin_filter(name).unwrap(), 0.1).unwrap();
        for h in [0.1, 0.05, 0.025, 0.0125, 0.1 / 3.0] {
            let cells = (phi.support_radius() / h).ceil() as usize + 1;
            let w = phi.derivative_cell_weights(h, cells).unwrap();
            let sum: f64 = w.iter().sum();
            assert!((sum + phi.phi_at_zero()).abs() <= TAIL_TOL * phi.phi_at_zero().max(1.0) * 10.0, "{name} {h}: {sum}");
            assert!(w.iter().all(|&x| x <= 0.0));
        }
    }
}

#[test]
fn filters_have_unit_mass() {
    for name in BUILTIN_FILTERS {
        let phi = rescale(&builtin_filter(name).unwrap(), 0.3).unwrap();
        assert!((phi.mass() - 1.0).abs() < 1e-10, "{name}");
    }
}
