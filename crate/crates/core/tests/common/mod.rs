#![allow(dead_code)]

use num_complex::Complex64;
use qmetro::channels::{scenario_model, EncodingModel, NoiseSpec, Scenario};
use qmetro::linalg::{CMatrix, CVector};
use qmetro::liouville::DensityMatrix;
use qmetro::propagation::ControlSchedule;
use qmetro::schemes::haar_random_state;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

pub fn random_matrix(d: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(d, d, |_, _| gaussian(rng))
}

pub fn random_hermitian(d: usize, rng: &mut impl Rng) -> CMatrix {
    let a = random_matrix(d, rng);
    (&a + a.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Random state of random rank.
pub fn random_density(d: usize, rng: &mut impl Rng) -> DensityMatrix {
    let rank = rng.random_range(1..=d);
    let a = CMatrix::from_fn(d, rank, |_, _| gaussian(rng));
    let m = &a * a.adjoint();
    let tr = m.trace();
    DensityMatrix::new(m / tr).expect("AA†/Tr is a state")
}

pub fn random_pure(d: usize, rng: &mut impl Rng) -> DensityMatrix {
    let psi: CVector = haar_random_state(d, rng.random());
    DensityMatrix::pure(&psi).unwrap()
}

/// A scenario with rates drawn from [0, 10] s⁻¹.
pub fn random_model(rng: &mut impl Rng) -> EncodingModel {
    let scenario = Scenario::ALL[rng.random_range(0..Scenario::ALL.len())];
    let mut rate = || rng.random_range(0.0..10.0);
    let noise = match scenario.default_noise() {
        NoiseSpec::ParallelDephasing { .. } => NoiseSpec::ParallelDephasing { gamma: rate() },
        NoiseSpec::TransverseDephasing { .. } => NoiseSpec::TransverseDephasing { gamma: rate() },
        NoiseSpec::UncorrelatedDephasing { .. } => NoiseSpec::UncorrelatedDephasing {
            gamma1: rate(),
            gamma2: rate(),
        },
        NoiseSpec::AmplitudeDamping { .. } => NoiseSpec::AmplitudeDamping {
            gamma_minus: rate(),
            gamma_plus: rate(),
        },
    };
    let omega0 = rng.random_range(-20.0..20.0);
    scenario_model(scenario, &noise, omega0).unwrap()
}

pub fn random_schedule(
    model: &EncodingModel,
    slices: usize,
    u_max: f64,
    total_time: f64,
    rng: &mut impl Rng,
) -> ControlSchedule {
    let n = slices * model.n_controls();
    let amps = (0..n).map(|_| rng.random_range(-u_max..=u_max)).collect();
    ControlSchedule::new(slices, model.n_controls(), amps, total_time).unwrap()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
