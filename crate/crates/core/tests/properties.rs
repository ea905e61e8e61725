//! Invariants of the public API checked on random inputs.

use proptest::prelude::*;
use pulseforge_core::dynamics::{
    evolve_trace, fidelity, plus_y_plus_y, propagate, pulse_fidelity, ControlProblem,
};
use pulseforge_core::model::{ParamId, SystemParams};
use pulseforge_core::pulse::{apply_filter, clamp_check, flat_top_gaussian, FilterSpec, Pulse};
use pulseforge_core::scp::{
    sample_grid, scp_optimize, worst_case, OptConfig, SampleGrid, SampleSet, Sequential, Uncertainty, UncertaintySpec,
};
use pulseforge_core::C64;

fn two_level() -> ControlProblem {
    ControlProblem::two_level(&SystemParams::default(), 0.3).unwrap()
}

fn amps(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-0.3f64..0.3, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fidelity_is_bounded_and_phase_blind(a in amps(8), t in 10.0f64..300.0, phi in -3.2f64..3.2) {
        let cp = two_level();
        let p = Pulse::new(t, 1, a).unwrap();
        let u = propagate(&cp, &p).unwrap().total;
        let f = fidelity(&cp, &u);
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!(u.unitarity_defect() < 1e-10);
        let g = fidelity(&cp, &u.scale(C64::from_polar(1.0, phi)));
        prop_assert!((f - g).abs() < 1e-14);
        prop_assert!((pulse_fidelity(&cp, &p).unwrap() - f).abs() < 1e-12);
    }

    #[test]
    fn two_level_evolution_never_leaks(a in amps(6), t in 10.0f64..200.0) {
        let cp = two_level();
        let tr = evolve_trace(&cp, &Pulse::new(t, 1, a).unwrap(), &plus_y_plus_y()).unwrap();
        prop_assert_eq!(tr.len(), 7);
        for k in 0..tr.len() {
            prop_assert!(tr.leakage[k].abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&tr.entanglement[k]));
            prop_assert!((0.0..=1.0 + 1e-12).contains(&tr.bell_fidelity[k]));
        }
        prop_assert!(tr.entanglement[0] < 1e-12);
    }

    #[test]
    fn filter_shape(a in amps(10), sigma in 0.0f64..20.0, m in 1usize..6, t in 20.0f64..400.0) {
        let p = Pulse::new(t, 2, a).unwrap();
        let f = apply_filter(&p, &FilterSpec { sigma, oversample: m }).unwrap();
        prop_assert_eq!(f.n_pixels(), 5 * m);
        prop_assert_eq!(f.quadratures(), 2);
        prop_assert_eq!(f.total_time, t);
        prop_assert!(f.max_abs() <= p.max_abs() + 1e-12);
    }

    #[test]
    fn flat_top_is_symmetric_with_exact_plateau(n in 1usize..120, r in 0usize..60, peak in 0.0f64..0.3) {
        prop_assume!(2 * r <= n);
        let p = flat_top_gaussian(n, 200.0, peak, r).unwrap();
        for k in 0..n {
            prop_assert_eq!(p.amp(0, k), p.amp(0, n - 1 - k));
        }
        for k in r..n - r {
            prop_assert_eq!(p.amp(0, k), peak);
        }
        prop_assert!(clamp_check(&p, 0.3).within_bounds);
    }

    #[test]
    fn grid_is_full_product_with_nominal(n1 in 0usize..4, n2 in 0usize..4, w in 0.0f64..0.1) {
        let (n1, n2) = (2 * n1 + 1, 2 * n2 + 1);
        let base = SystemParams::default();
        let spec = UncertaintySpec::new(vec![
            Uncertainty { param: ParamId::NuA2, center: base.nu_a2, half_width: w, n_samples: n1 },
            Uncertainty { param: ParamId::NuA1, center: base.nu_a1, half_width: w / 10.0, n_samples: n2 },
        ]);
        let g = sample_grid(&spec, &base).unwrap();
        prop_assert_eq!(g.len(), n1 * n2);
        prop_assert_eq!(g.points[g.nominal], base);
    }
}

#[test]
fn worst_case_bounds_and_duplicates() {
    let base = SystemParams::default();
    let spec = UncertaintySpec::new(vec![Uncertainty { param: ParamId::NuA2, center: 4.85, half_width: 0.05, n_samples: 5 }]);
    let g = sample_grid(&spec, &base).unwrap();
    let set = SampleSet::build(&g, |p| ControlProblem::two_level(p, 0.3)).unwrap();
    let p = flat_top_gaussian(16, 200.0, 0.25, 7).unwrap();
    let (wc, fs) = worst_case(&set, &p, &Sequential).unwrap();
    assert!(wc <= fs[g.nominal]);
    assert_eq!(wc, fs.iter().copied().fold(f64::INFINITY, f64::min));

    let mut dup = g.clone();
    dup.points.push(g.points[0]);
    dup.coords.push(g.coords[0].clone());
    let set2 = SampleSet::build(&dup, |p| ControlProblem::two_level(p, 0.3)).unwrap();
    assert_eq!(worst_case(&set2, &p, &Sequential).unwrap().0, wc);

    let single = SampleSet::build(&SampleGrid::single(base), |p| ControlProblem::two_level(p, 0.3)).unwrap();
    assert_eq!(worst_case(&single, &p, &Sequential).unwrap().0, fs[g.nominal]);
}

#[test]
fn two_level_nominal_optimization_end_to_end() {
    let set = SampleSet::build(&SampleGrid::single(SystemParams::default()), |p| ControlProblem::two_level(p, 0.3))
        .unwrap();
    let seed = flat_top_gaussian(16, 200.0, 0.25, 7).unwrap();
    let cfg = OptConfig { max_iterations: 500, ..OptConfig::default() };
    let r = scp_optimize(&set, &seed, &cfg, &Sequential).unwrap();
    assert!(r.worst_case >= 0.99, "{}", r.worst_case);
    assert!(r.is_monotone());
    assert!(r.pulse.max_abs() <= 0.3);
    let again = scp_optimize(&set, &seed, &cfg, &Sequential).unwrap();
    assert_eq!(again, r);
}
