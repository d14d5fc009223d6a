mod common;

use std::f64::consts::PI;

use common::*;
use proptest::prelude::*;
use qmetro::channels::{ancilla_extend, scenario_model, NoiseSpec, Scenario};
use qmetro::linalg::{c, max_abs, CMatrix};
use qmetro::liouville::DensityMatrix;
use qmetro::metrology::{
    default_derivative_step, default_fidelity_step, drho_domega_with, qfi_eigen, qfi_fidelity,
    qfi_of_schedule, SPECTRAL_CUTOFF,
};
use qmetro::propagation::{ControlSchedule, Propagator};
use qmetro::schemes::Probe;

const OMEGA0: f64 = 2.0 * PI;

fn zero_schedule(model: &qmetro::channels::EncodingModel, t: f64) -> ControlSchedule {
    ControlSchedule::zeros(1, model.n_controls(), t).unwrap()
}

fn evolve_free(scenario: Scenario, noise: NoiseSpec, rho0: &DensityMatrix, t: f64) -> CMatrix {
    let model = scenario_model(scenario, &noise, OMEGA0).unwrap();
    Propagator::new(&model)
        .unwrap()
        .evolve(&zero_schedule(&model, t), rho0)
        .unwrap()
        .into_matrix()
}

fn basis(d: usize, k: usize) -> DensityMatrix {
    let mut m = CMatrix::zeros(d, d);
    m[(k, k)] = c(1.0);
    DensityMatrix::new(m).unwrap()
}

#[test]
fn parallel_dephasing_closed_form() {
    let gamma = 10.0;
    let plus = Probe::Plus.state(1, 0).unwrap();
    for t in [0.1 / gamma, 1.0 / gamma, 3.0 / gamma] {
        let rho = evolve_free(
            Scenario::ParallelDephasing1q,
            NoiseSpec::ParallelDephasing { gamma },
            &plus,
            t,
        );
        let expected =
            c(0.5 * (-gamma * t).exp()) * num_complex::Complex64::from_polar(1.0, -OMEGA0 * t);
        assert!((rho[(0, 1)] - expected).norm() < 1e-12, "t = {t}");
        assert!((rho[(0, 0)].re - 0.5).abs() < 1e-12);
    }
}

#[test]
fn amplitude_damping_closed_form() {
    let (gm, gp) = (0.2, 0.05);
    let total = gm + gp;
    let excited = basis(2, 1);
    let plus = Probe::Plus.state(1, 0).unwrap();
    let noise = NoiseSpec::AmplitudeDamping {
        gamma_minus: gm,
        gamma_plus: gp,
    };
    for t in [0.1 / total, 1.0 / total, 3.0 / total] {
        let rho = evolve_free(Scenario::AmplitudeDamping, noise, &excited, t);
        let p_inf = gp / total;
        let expected = p_inf + (1.0 - p_inf) * (-total * t).exp();
        assert!((rho[(1, 1)].re - expected).abs() < 1e-12, "t = {t}");
        let rho = evolve_free(Scenario::AmplitudeDamping, noise, &plus, t);
        assert!((rho[(0, 1)].norm() - 0.5 * (-total * t / 2.0).exp()).abs() < 1e-12);
    }
}

#[test]
fn transverse_dephasing_relaxes_population() {
    // σx noise drives ⟨σz⟩ to zero at rate γ when the drift is switched off
    let gamma = 0.1;
    let model = scenario_model(
        Scenario::TransverseDephasing,
        &NoiseSpec::TransverseDephasing { gamma },
        0.0,
    )
    .unwrap();
    let p = Propagator::new(&model).unwrap();
    for t in [0.1 / gamma, 1.0 / gamma, 3.0 / gamma] {
        let rho = p.evolve(&zero_schedule(&model, t), &basis(2, 0)).unwrap();
        let expected = 0.5 * (1.0 + (-gamma * t).exp());
        assert!(
            (rho.matrix()[(0, 0)].re - expected).abs() < 1e-12,
            "t = {t}"
        );
    }
}

#[test]
fn two_qubit_ghz_coherence() {
    let (g1, g2) = (10.0, 4.0);
    let ghz = Probe::Ghz.state(2, 0).unwrap();
    for t in [0.1 / g1, 1.0 / g1, 3.0 / g1] {
        let rho = evolve_free(
            Scenario::ParallelDephasing2q,
            NoiseSpec::UncorrelatedDephasing {
                gamma1: g1,
                gamma2: g2,
            },
            &ghz,
            t,
        );
        let expected = 0.5 * (-(g1 + g2) * t).exp();
        assert!((rho[(0, 3)].norm() - expected).abs() < 1e-12);
        assert!(
            (rho[(0, 3)].arg() + 2.0 * OMEGA0 * t)
                .rem_euclid(2.0 * PI)
                .min((-(rho[(0, 3)].arg() + 2.0 * OMEGA0 * t)).rem_euclid(2.0 * PI))
                < 1e-9
        );
    }
}

/// |∂r|² + (r·∂r)²/(1 − |r|²) for a qubit.
fn bloch_qfi(rho: &DensityMatrix, drho: &CMatrix) -> f64 {
    let r = rho.bloch_vector().unwrap();
    let dr = [
        2.0 * drho[(0, 1)].re,
        -2.0 * drho[(0, 1)].im,
        (drho[(0, 0)] - drho[(1, 1)]).re,
    ];
    let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let rr = dot(r, r);
    dot(dr, dr)
        + if rr < 1.0 - 1e-12 {
            dot(r, dr).powi(2) / (1.0 - rr)
        } else {
            0.0
        }
}

#[test]
fn standard_scheme_analytic_qfis() {
    type Case = (Scenario, NoiseSpec, f64, fn(f64) -> f64);
    let cases: [Case; 3] = [
        (
            Scenario::ParallelDephasing1q,
            NoiseSpec::ParallelDephasing { gamma: 10.0 },
            0.1,
            |t| t * t * (-20.0 * t).exp(),
        ),
        (
            Scenario::AmplitudeDamping,
            NoiseSpec::AmplitudeDamping {
                gamma_minus: 0.2,
                gamma_plus: 0.0,
            },
            5.0,
            |t| t * t * (-0.2 * t).exp(),
        ),
        (
            Scenario::ParallelDephasing2q,
            NoiseSpec::UncorrelatedDephasing {
                gamma1: 10.0,
                gamma2: 10.0,
            },
            0.1,
            |t| 4.0 * t * t * (-40.0 * t).exp(),
        ),
    ];
    for (scenario, noise, scale, oracle) in cases {
        let model = scenario_model(scenario, &noise, OMEGA0).unwrap();
        let p = Propagator::new(&model).unwrap();
        let probe = if scenario.n_qubits() == 2 {
            Probe::Ghz
        } else {
            Probe::Plus
        };
        let rho0 = probe.state(scenario.n_qubits(), 0).unwrap();
        let delta = default_derivative_step(OMEGA0);
        for t in [0.1 * scale, scale, 3.0 * scale] {
            let q = qfi_of_schedule(&p, &zero_schedule(&model, t), &rho0, delta)
                .unwrap()
                .value;
            // central-difference truncation is (δT)²/3 relative here
            let tol = 1e-6f64.max((delta * t).powi(2));
            assert!(
                rel_err(q, oracle(t)) < tol,
                "{scenario} T = {t}: {q} vs {}",
                oracle(t)
            );
        }
    }
}

#[test]
fn central_difference_is_second_order() {
    let gamma = 10.0;
    let t = 0.3;
    let model = scenario_model(
        Scenario::ParallelDephasing1q,
        &NoiseSpec::ParallelDephasing { gamma },
        OMEGA0,
    )
    .unwrap();
    let p = Propagator::new(&model).unwrap();
    let rho0 = Probe::Plus.state(1, 0).unwrap();
    let exact = t * t * (-2.0 * gamma * t).exp();
    let errs: Vec<f64> = [0.4, 0.2, 0.1, 0.05]
        .iter()
        .map(|&d| {
            (qfi_of_schedule(&p, &zero_schedule(&model, t), &rho0, d)
                .unwrap()
                .value
                - exact)
                .abs()
        })
        .collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 1.8, "observed order {order} from {errs:?}");
    }
}

#[test]
fn ancilla_reduced_dynamics_match_single_qubit() {
    let mut r = rng(17);
    for scenario in [
        Scenario::ParallelDephasing1q,
        Scenario::TransverseDephasing,
        Scenario::AmplitudeDamping,
    ] {
        let base = scenario_model(scenario, &scenario.default_noise(), OMEGA0).unwrap();
        let ext = ancilla_extend(&base).unwrap();
        let schedule = random_schedule(&base, 4, 20.0, 0.8, &mut r);
        for rho0 in [
            Probe::BellWithAncilla.state(2, 0).unwrap(),
            random_density(4, &mut r),
        ] {
            let joint = Propagator::new(&ext)
                .unwrap()
                .evolve(&schedule, &rho0)
                .unwrap();
            let reduced_in = rho0.partial_trace_second(2).unwrap();
            let single = Propagator::new(&base)
                .unwrap()
                .evolve(&schedule, &reduced_in)
                .unwrap();
            let reduced_out = joint.partial_trace_second(2).unwrap();
            assert!(
                max_abs(&(reduced_out.matrix() - single.matrix())) < 1e-10,
                "{scenario}"
            );
        }
    }
}

#[test]
fn estimators_agree_on_every_scenario() {
    for scenario in Scenario::ALL {
        let noise = scenario.default_noise();
        let gamma = noise.reference_rate();
        let model = scenario_model(scenario, &noise, OMEGA0).unwrap();
        let p = Propagator::new(&model).unwrap();
        let probe = if scenario.n_qubits() == 2 {
            Probe::Ghz
        } else {
            Probe::Plus
        };
        let rho0 = probe.state(scenario.n_qubits(), 0).unwrap();
        let mut r = rng(5);
        for i in 0..10 {
            let t = (0.1 + 0.3 * i as f64) / gamma;
            let schedule = random_schedule(&model, 3, 2.0 * OMEGA0, t, &mut r);
            let eigen =
                qfi_of_schedule(&p, &schedule, &rho0, default_derivative_step(OMEGA0)).unwrap();
            let delta = default_fidelity_step(OMEGA0, t);
            let exact = p.evolve(&schedule, &rho0).unwrap();
            let shifted = p.evolve_at(OMEGA0 + delta, &schedule, &rho0).unwrap();
            let fid = qfi_fidelity(&exact, &shifted, delta).unwrap();
            assert!(
                rel_err(fid.value, eigen.value) < 0.02,
                "{scenario} T = {t}: eigen {} fidelity {}",
                eigen.value,
                fid.value
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn qubit_qfi_matches_bloch_formula(
        x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0, len in 0.0f64..0.999, seed: u64
    ) {
        let norm = (x * x + y * y + z * z).sqrt();
        prop_assume!(norm > 1e-3);
        let s = len / norm;
        let (x, y, z) = (x * s, y * s, z * s);
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = c(0.5 * (1.0 + z));
        m[(1, 1)] = c(0.5 * (1.0 - z));
        m[(0, 1)] = num_complex::Complex64::new(0.5 * x, -0.5 * y);
        m[(1, 0)] = num_complex::Complex64::new(0.5 * x, 0.5 * y);
        let rho = DensityMatrix::new(m).unwrap();
        let mut r = rng(seed);
        let mut d = random_hermitian(2, &mut r);
        let tr = d.trace() / c(2.0);
        d[(0, 0)] -= tr;
        d[(1, 1)] -= tr;
        let q = qfi_eigen(&rho, &d, SPECTRAL_CUTOFF).value;
        let oracle = bloch_qfi(&rho, &d);
        prop_assert!((q - oracle).abs() <= 1e-8 * oracle.max(1.0), "{q} vs {oracle}");
    }

    #[test]
    fn qfi_is_unitarily_invariant(seed: u64, d in 2usize..5) {
        let mut r = rng(seed);
        let rho = random_density(d, &mut r);
        let drho = random_hermitian(d, &mut r);
        let h = random_hermitian(d, &mut r);
        let u = qmetro::expm::expm(&(h * qmetro::linalg::I));
        let rho_u = DensityMatrix::new(&u * rho.matrix() * u.adjoint()).unwrap();
        let drho_u = &u * &drho * u.adjoint();
        let a = qfi_eigen(&rho, &drho, SPECTRAL_CUTOFF).value;
        let b = qfi_eigen(&rho_u, &drho_u, SPECTRAL_CUTOFF).value;
        prop_assert!((a - b).abs() <= 1e-8 * a.max(1.0));
    }

    #[test]
    fn derivative_is_traceless_and_hermitian(seed: u64) {
        let mut r = rng(seed);
        let model = random_model(&mut r);
        let schedule = random_schedule(&model, 3, 20.0, 0.5, &mut r);
        let rho0 = random_pure(model.dim(), &mut r);
        let d = drho_domega_with(&Propagator::new(&model).unwrap(), &schedule, &rho0, 1e-3).unwrap();
        prop_assert!(d.trace().norm() < 1e-9);
        prop_assert!(qmetro::linalg::hermiticity_error(&d) < 1e-9);
    }
}
