use std::f64::consts::FRAC_2_PI;

use fieldctl_core::analysis::{
    fock_statistics, named_target, wigner_with_dim, wigner_working_dim, QubitTarget,
};
use fieldctl_core::control::{fock_parity, Restriction, ScenarioSolver, SolveOptions};
use fieldctl_core::fock::{
    coherent_leakage, coherent_state, fock_state, Atom, AtomicSystem, FieldSpace,
};
use fieldctl_core::linalg::{hermiticity_defect, linspace, unitarity_defect};
use fieldctl_core::model::{build_hamiltonian, preset, Preset, PresetParams, ScenarioSpec};
use fieldctl_core::propagator::eigendecompose;
use fieldctl_core::{StateVector, C64};
use proptest::prelude::*;

fn state_from(parts: &[(f64, f64)]) -> StateVector {
    let amps = parts.iter().map(|&(re, im)| C64::new(re, im)).collect();
    StateVector::new(amps)
        .normalized()
        .unwrap_or_else(|_| StateVector::basis(parts.len(), 0))
}

fn atom_strategy() -> impl Strategy<Value = Atom> {
    (2usize..=3).prop_flat_map(|levels| {
        (
            prop::collection::vec(0.0..2.0f64, levels),
            prop::collection::vec(-0.6..0.6f64, levels * levels),
        )
            .prop_map(move |(mut energies, raw)| {
                energies[0] = 0.0;
                let mut c = vec![vec![0.0; levels]; levels];
                for k in 0..levels {
                    for l in k + 1..levels {
                        c[k][l] = raw[k * levels + l];
                        c[l][k] = raw[k * levels + l];
                    }
                }
                Atom::new(energies, c).unwrap()
            })
    })
}

fn spec_strategy() -> impl Strategy<Value = ScenarioSpec> {
    (
        prop::collection::vec(atom_strategy(), 1..=2),
        1usize..=4,
        0usize..=4,
        0.0..8.0f64,
        prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 9),
        prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 9),
    )
        .prop_map(|(atoms, n_max, extra, t, target, initial)| {
            let atoms = AtomicSystem::new(atoms).unwrap();
            let d = atoms.dim();
            let field = FieldSpace::new(n_max, n_max + extra).unwrap();
            let mut spec = ScenarioSpec::new(atoms, field, t, state_from(&target[..d])).unwrap();
            spec.initial_atomic = state_from(&initial[..d]);
            spec
        })
}

fn with_phases(spec: &ScenarioSpec, a: f64, b: f64) -> ScenarioSpec {
    let mut out = spec.clone();
    out.initial_atomic = out.initial_atomic.scaled(C64::from_polar(1.0, a));
    out.target_atomic = out.target_atomic.scaled(C64::from_polar(1.0, b));
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hamiltonian_is_hermitian(spec in spec_strategy()) {
        let h = build_hamiltonian(&spec).unwrap();
        prop_assert!(hermiticity_defect(h.as_ref()) < 1e-12);
    }

    #[test]
    fn propagator_is_unitary(spec in spec_strategy(), t in -20.0..20.0f64) {
        let decomp = eigendecompose(build_hamiltonian(&spec).unwrap().as_ref()).unwrap();
        prop_assert!(unitarity_defect(decomp.evolve_unitary(t).as_ref()) < 1e-9);
    }

    #[test]
    fn energy_is_conserved(
        spec in spec_strategy(),
        t in 0.0..30.0f64,
        raw in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 90),
    ) {
        let h = build_hamiltonian(&spec).unwrap();
        let decomp = eigendecompose(h.as_ref()).unwrap();
        let psi0 = state_from(&raw[..decomp.dim()]);
        let e0 = psi0.expectation(h.as_ref()).unwrap().re;
        let psi = decomp.evolve_state(&psi0, t).unwrap();
        let e1 = psi.expectation(h.as_ref()).unwrap().re;
        prop_assert!((e1 - e0).abs() <= 1e-9 * e0.abs().max(1.0));
    }

    #[test]
    fn fidelity_ignores_global_phases(spec in spec_strategy(), a in 0.0..6.3f64, b in 0.0..6.3f64) {
        let f0 = ScenarioSolver::new(spec.clone()).unwrap().solve(&SolveOptions::default()).unwrap().fidelity();
        let f1 = ScenarioSolver::new(with_phases(&spec, a, b)).unwrap().solve(&SolveOptions::default()).unwrap().fidelity();
        prop_assert!((f0 - f1).abs() < 1e-12);
    }

    #[test]
    fn spectrum_is_a_set_of_probabilities(spec in spec_strategy()) {
        for restriction in [Restriction::Projected, Restriction::Full] {
            let options = SolveOptions { count: 3, restriction, ..Default::default() };
            let sol = ScenarioSolver::new(spec.clone()).unwrap().solve(&options).unwrap();
            for w in sol.spectrum.windows(2) {
                prop_assert!(w[0] >= w[1]);
            }
            for &l in &sol.spectrum {
                prop_assert!((-1e-12..=1.0 + 1e-9).contains(&l));
            }
            for (i, a) in sol.states.iter().enumerate() {
                for (j, b) in sol.states.iter().enumerate() {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((a.inner(b).norm() - expect).abs() < 1e-9);
                }
                if restriction == Restriction::Projected {
                    prop_assert!(a.as_slice()[spec.field.n_max() + 1..].iter().all(|z| z.norm() == 0.0));
                }
            }
        }
    }

    #[test]
    fn forward_propagation_reproduces_fidelity(spec in spec_strategy()) {
        let solver = ScenarioSolver::new(spec.clone()).unwrap();
        let sol = solver.solve(&SolveOptions::default()).unwrap();
        let forward = solver.forward_fidelity(sol.optimal_state(), spec.control_time).unwrap();
        prop_assert!((forward - sol.fidelity()).abs() < 1e-8);
    }

    #[test]
    fn enlarging_the_cap_never_lowers_fidelity(spec in spec_strategy()) {
        let n_trunc = spec.field.n_trunc();
        let mut last = 0.0;
        for n_max in 0..=n_trunc {
            let mut s = spec.clone();
            s.field = FieldSpace::new(n_max, n_trunc).unwrap();
            let f = ScenarioSolver::new(s).unwrap().solve(&SolveOptions::default()).unwrap().fidelity();
            prop_assert!(f >= last - 1e-12);
            last = f;
        }
    }

    #[test]
    fn rescaling_energies_and_time_preserves_fidelity(spec in spec_strategy(), s in 0.3..3.0f64) {
        let mut scaled = spec.clone();
        scaled.omega_c *= s;
        scaled.control_time /= s;
        let atoms: Vec<Atom> = spec.atoms.atoms().iter().map(|atom| {
            let n = atom.levels();
            let energies = atom.energies().iter().map(|e| e * s).collect();
            let c = (0..n).map(|k| (0..n).map(|l| atom.coupling(k, l) * s).collect()).collect();
            Atom::new(energies, c).unwrap()
        }).collect();
        scaled.atoms = AtomicSystem::new(atoms).unwrap();
        let f0 = ScenarioSolver::new(spec).unwrap().solve(&SolveOptions::default()).unwrap().fidelity();
        let f1 = ScenarioSolver::new(scaled).unwrap().solve(&SolveOptions::default()).unwrap().fidelity();
        prop_assert!((f0 - f1).abs() < 1e-9);
    }

    #[test]
    fn flat_index_round_trips(spec in spec_strategy(), seed in 0usize..10_000) {
        let space = spec.composite_space();
        let i = seed % space.dim();
        let (n, m) = space.unflatten(i);
        prop_assert_eq!(space.flatten(n, m), i);
        prop_assert!(n <= spec.field.n_trunc() && m < space.atom_dim());
    }

    #[test]
    fn displaced_vacuum_is_a_gaussian(bx in -2.0..2.0f64, bp in -2.0..2.0f64) {
        let axis = linspace(-3.0, 3.0, 7);
        let dim = wigner_working_dim(&coherent_state(60, C64::new(bx, bp)), 3.0 * 2f64.sqrt());
        let shifted = coherent_state(dim, C64::new(bx, bp));
        prop_assume!(coherent_leakage(dim, C64::new(bx, bp)) < 1e-8);
        let w = wigner_with_dim(&shifted, &axis, &axis, dim).unwrap();
        for (ix, &x) in axis.iter().enumerate() {
            for (ip, &p) in axis.iter().enumerate() {
                let exact = FRAC_2_PI * (-2.0 * ((x - bx).powi(2) + (p - bp).powi(2))).exp();
                prop_assert!((w.value(ix, ip) - exact).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn fock_and_coherent_statistics(n in 0usize..30, re in -3.0..3.0f64, im in -3.0..3.0f64) {
        let r = fock_statistics(&fock_state(40, n).unwrap());
        if n == 0 {
            prop_assert!(r.mandel_q.is_nan());
        } else {
            prop_assert_eq!(r.mandel_q, -1.0);
        }
        prop_assert_eq!(r.n_av, n as f64);
        let alpha = C64::new(re, im);
        prop_assume!(alpha.norm() > 0.1);
        let c = fock_statistics(&coherent_state(80, alpha));
        prop_assert!(coherent_leakage(80, alpha) < 1e-8);
        prop_assert!(c.mandel_q.abs() < 1e-6);
    }

    #[test]
    fn named_targets_are_normalised_and_symmetric(n in 2usize..=6, swap in 0usize..15) {
        for which in QubitTarget::ALL {
            let s = named_target(which, n).unwrap();
            prop_assert!((s.norm() - 1.0).abs() < 1e-12);
            if matches!(which, QubitTarget::Ghz | QubitTarget::W) {
                let (a, b) = (swap % n, (swap / n + 1 + swap % n) % n);
                for idx in 0..s.dim() {
                    let (ba, bb) = ((idx >> a) & 1, (idx >> b) & 1);
                    let swapped = idx & !(1 << a) & !(1 << b) | (bb << a) | (ba << b);
                    prop_assert_eq!(s[idx], s[swapped]);
                }
            }
        }
    }

    #[test]
    fn pole_targets_give_eigenstates_of_definite_parity(
        g in 0.001..0.3f64,
        t in 1.0..30.0f64,
        excited in any::<bool>(),
    ) {
        let theta = if excited { std::f64::consts::PI } else { 0.0 };
        let params = PresetParams {
            g: Some(g),
            control_time: Some(t),
            theta: Some(theta),
            n_max: 12,
            ..Default::default()
        };
        let solver = ScenarioSolver::new(preset(Preset::RabiResonant, &params).unwrap()).unwrap();
        let sol = solver.solve(&SolveOptions { count: 13, ..Default::default() }).unwrap();
        for (k, state) in sol.states.iter().enumerate() {
            let isolated = sol.spectrum.iter().enumerate().all(|(j, &l)| j == k || (l - sol.spectrum[k]).abs() > 1e-6);
            if isolated {
                prop_assert!((fock_parity(state).abs() - 1.0).abs() < 1e-6);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn wigner_function_integrates_to_one(raw in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 13)) {
        let state = state_from(&raw);
        prop_assume!(fock_statistics(&state).n_av <= 10.0);
        let axis = linspace(-6.0, 6.0, 241);
        let dim = wigner_working_dim(&state, 6.0 * 2f64.sqrt());
        let w = wigner_with_dim(&state, &axis, &axis, dim).unwrap();
        prop_assert!((w.integral() - 1.0).abs() < 1e-3, "integral {}", w.integral());
    }
}
