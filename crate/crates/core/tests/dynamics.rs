mod common;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use qmetro::expm::expm;
use qmetro::linalg::{c, identity, max_abs, CMatrix};
use qmetro::liouville::{
    hamiltonian_superop, lindblad_rhs, lindbladian, sandwich_superop, unvectorize,
    unvectorize_matrix, vectorize, vectorize_matrix, NoiseChannel,
};
use qmetro::propagation::Propagator;
use rand::Rng as _;

fn taylor_exp(a: &CMatrix) -> CMatrix {
    let d = a.nrows();
    let mut term = identity(d);
    let mut sum = identity(d);
    for k in 1..80 {
        term = &term * a / c(k as f64);
        sum += &term;
    }
    sum
}

fn random_channel(d: usize, count: usize, rng: &mut impl rand::Rng) -> NoiseChannel {
    let ops = (0..count).map(|_| random_matrix(d, rng)).collect();
    let rates = (0..count).map(|_| rng.random_range(0.0..3.0)).collect();
    NoiseChannel::new(ops, rates).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn vectorization_round_trips(seed: u64, d in 1usize..6) {
        let rho = random_density(d, &mut rng(seed));
        let v = vectorize(&rho);
        prop_assert_eq!(v.len(), d * d);
        prop_assert_eq!(unvectorize(&v).unwrap(), rho.clone());
        // column stacking: ρ_ij sits at j·d + i
        for i in 0..d {
            for j in 0..d {
                prop_assert_eq!(v.0[j * d + i], rho.matrix()[(i, j)]);
            }
        }
    }

    #[test]
    fn lindbladian_matches_direct_equation(seed: u64, d in 2usize..5, count in 0usize..4) {
        let mut r = rng(seed);
        let h = random_hermitian(d, &mut r);
        let channel = random_channel(d, count, &mut r);
        let rho = random_density(d, &mut r);
        let via_superop = lindbladian(&h, &channel).unwrap().apply_matrix(rho.matrix());
        let direct = lindblad_rhs(&h, &channel, rho.matrix());
        prop_assert!(max_abs(&(via_superop - direct)) <= 1e-12);
    }

    #[test]
    fn sandwich_matches_products(seed: u64, d in 1usize..5) {
        let mut r = rng(seed);
        let (u, v, x) = (random_matrix(d, &mut r), random_matrix(d, &mut r), random_matrix(d, &mut r));
        let s = sandwich_superop(&u, &v).unwrap();
        let lhs = unvectorize_matrix(&(&s.matrix * vectorize_matrix(&x)));
        prop_assert!(max_abs(&(lhs - &u * &x * &v)) <= 1e-12);
    }

    #[test]
    fn generator_preserves_hermiticity_and_trace(seed: u64, d in 2usize..5, count in 0usize..4) {
        let mut r = rng(seed);
        let h = random_hermitian(d, &mut r);
        let channel = random_channel(d, count, &mut r);
        let x = random_hermitian(d, &mut r);
        let l = lindbladian(&h, &channel).unwrap();
        let out = l.apply_matrix(&x);
        prop_assert!(qmetro::linalg::hermiticity_error(&out) <= 1e-12);
        prop_assert!(out.trace().norm() <= 1e-12);
        prop_assert!(l.trace_leak() <= 1e-12);
        prop_assert!(hamiltonian_superop(&h).unwrap().trace_leak() <= 1e-12);
    }

    #[test]
    fn expm_matches_taylor(seed: u64, d in 1usize..7, scale in 0.01f64..1.5) {
        let a = random_matrix(d, &mut rng(seed)) * c(scale);
        let diff = max_abs(&(expm(&a) - taylor_exp(&a)));
        prop_assert!(diff <= 1e-9 * max_abs(&taylor_exp(&a)).max(1.0), "diff {diff:e}");
    }

    #[test]
    fn expm_of_generator_is_a_channel_for_any_step(seed: u64, dt in 1e-4f64..5.0) {
        let mut r = rng(seed);
        let model = random_model(&mut r);
        let schedule = random_schedule(&model, 1, 50.0, dt, &mut r);
        let rho0 = random_density(model.dim(), &mut r);
        let rho = Propagator::new(&model).unwrap().evolve(&schedule, &rho0).unwrap();
        prop_assert!(rho.trace_error() <= 1e-10);
        prop_assert!(rho.hermiticity_error() <= 1e-10);
        prop_assert!(rho.min_eigenvalue() >= -1e-10);
    }

    #[test]
    fn split_schedules_compose(seed: u64, slices in 2usize..8, t in 0.01f64..3.0) {
        let mut r = rng(seed);
        let model = random_model(&mut r);
        let schedule = random_schedule(&model, slices, 30.0, t, &mut r);
        let k = r.random_range(1..slices);
        let (first, second) = schedule.split_at(k).unwrap();
        let rho0 = random_density(model.dim(), &mut r);
        let p = Propagator::new(&model).unwrap();
        let whole = p.evolve(&schedule, &rho0).unwrap();
        let halves = p.evolve(&second, &p.evolve(&first, &rho0).unwrap()).unwrap();
        prop_assert!(max_abs(&(whole.matrix() - halves.matrix())) <= 1e-9);
    }

    #[test]
    fn slice_propagators_multiply_to_the_evolution(seed: u64, slices in 1usize..6) {
        let mut r = rng(seed);
        let model = random_model(&mut r);
        let schedule = random_schedule(&model, slices, 30.0, 0.7, &mut r);
        let p = Propagator::new(&model).unwrap();
        let d = model.dim();
        let mut total = identity(d * d);
        for k in 0..slices {
            total = &p.slice_propagator_at(model.omega0(), &schedule, k).unwrap().matrix * total;
        }
        let rho0 = random_density(d, &mut r);
        let via_product = unvectorize_matrix(&(&total * vectorize(&rho0).0));
        let evolved = p.evolve(&schedule, &rho0).unwrap();
        prop_assert!(max_abs(&(via_product - evolved.matrix())) <= 1e-10);
    }
}

#[test]
fn constant_schedule_equals_single_exponential() {
    let mut r = rng(3);
    let model = random_model(&mut r);
    let p = Propagator::new(&model).unwrap();
    let amps: Vec<f64> = (0..model.n_controls())
        .map(|_| r.random_range(-5.0..5.0))
        .collect();
    let t = 1.3;
    let many = qmetro::propagation::ControlSchedule::constant(7, &amps, t).unwrap();
    let one = qmetro::propagation::ControlSchedule::constant(1, &amps, t).unwrap();
    let rho0 = random_density(model.dim(), &mut r);
    let a = p.evolve(&many, &rho0).unwrap();
    let b = p.evolve(&one, &rho0).unwrap();
    assert!(max_abs(&(a.matrix() - b.matrix())) < 1e-12);
    let l = lindbladian(&model.hamiltonian(&amps), model.channel()).unwrap();
    let direct =
        unvectorize_matrix(&(expm(&(l.matrix * Complex64::new(t, 0.0))) * vectorize(&rho0).0));
    assert!(max_abs(&(direct - b.matrix())) < 1e-12);
}
