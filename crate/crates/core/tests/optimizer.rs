use std::cell::Cell;

use proptest::prelude::*;
use qmetro::optimizer::{
    multi_start, nelder_mead, nelder_mead_traced, Bounds, OptimizerOptions, Step,
};

fn quadratic(p: &[f64]) -> f64 {
    (p[0] - 1.0).powi(2) + 3.0 * (p[1] + 0.5).powi(2) + 0.5 * p[0] * p[1]
}

fn parse_step(s: &str) -> Step {
    match s {
        "reflect" => Step::Reflect,
        "expand" => Step::Expand,
        "contract_outside" => Step::ContractOutside,
        "contract_inside" => Step::ContractInside,
        "shrink" => Step::Shrink,
        other => panic!("unknown step {other}"),
    }
}

#[test]
fn golden_trace_first_three_iterations() {
    let fixture = include_str!("fixtures/nelder_mead_trace.txt");
    let opts = OptimizerOptions {
        initial_step: 1.0,
        max_evals: Some(1000),
        ..Default::default()
    };
    let (_, trace) = nelder_mead_traced(quadratic, &[0.0, 0.0], &opts).unwrap();
    let expected: Vec<&str> = fixture.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(expected.len(), 3);
    for (line, record) in expected.iter().zip(&trace) {
        let fields: Vec<&str> = line.split_whitespace().collect();
        assert_eq!(record.iteration, fields[0].parse::<usize>().unwrap());
        assert_eq!(record.step, parse_step(fields[1]));
        let nums: Vec<f64> = fields[2..].iter().map(|s| s.parse().unwrap()).collect();
        for (v, chunk) in nums.chunks(3).enumerate() {
            assert_eq!(
                record.vertices[v],
                chunk[..2],
                "iteration {}",
                record.iteration
            );
            assert_eq!(record.values[v], chunk[2]);
        }
    }
}

#[test]
fn multimodal_multi_start_matches_brute_force() {
    let f = |x: &[f64]| (5.0 * x[0]).sin() + 0.1 * x[0] * x[0];
    let (mut grid_x, mut grid_f) = (0.0, f64::INFINITY);
    for i in 0..=200_000 {
        let x = -10.0 + 1e-4 * i as f64;
        let v = f(&[x]);
        if v < grid_f {
            grid_x = x;
            grid_f = v;
        }
    }
    let bounds = Bounds::symmetric(1, 10.0);
    let opts = OptimizerOptions {
        restarts: 20,
        seed: 11,
        ..OptimizerOptions::for_amplitude_bound(10.0)
    };
    let found = multi_start(f, &bounds, &opts).unwrap();
    assert!(
        (found.best.x[0] - grid_x).abs() < 1e-3,
        "{} vs {grid_x}",
        found.best.x[0]
    );
    assert!(found.best.f <= grid_f + 1e-9);
    assert_eq!(found.runs.len(), 20);
    assert_eq!(
        found.total_evals,
        found.runs.iter().map(|r| r.evals).sum::<usize>()
    );
}

#[test]
fn multi_start_is_bitwise_deterministic() {
    let f =
        |x: &[f64]| (3.0 * x[0]).cos() * (2.0 * x[1]).sin() + 0.05 * (x[0] * x[0] + x[1] * x[1]);
    let bounds = Bounds::symmetric(2, 5.0);
    let opts = OptimizerOptions {
        restarts: 6,
        seed: 1234,
        ..Default::default()
    };
    let a = multi_start(f, &bounds, &opts).unwrap();
    let b = multi_start(f, &bounds, &opts).unwrap();
    assert_eq!(a, b);
    let c = multi_start(f, &bounds, &OptimizerOptions { seed: 1235, ..opts }).unwrap();
    assert_ne!(a.runs[1].x, c.runs[1].x);
}

#[test]
fn zero_start_outside_box_is_replaced() {
    let bounds = Bounds::new(vec![1.0, 1.0], vec![2.0, 3.0]).unwrap();
    let opts = OptimizerOptions {
        restarts: 3,
        ..Default::default()
    };
    let found = multi_start(|x| x[0] + x[1], &bounds, &opts).unwrap();
    assert!(found.runs.iter().all(|r| bounds.contains(&r.x)));
    assert!((found.best.f - 2.0).abs() < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn best_value_never_increases(
        a in 0.1f64..5.0, b in -3.0f64..3.0, x0 in prop::collection::vec(-4.0f64..4.0, 3)
    ) {
        let f = |p: &[f64]| a * (p[0] - b).powi(2) + (p[1] + p[0]).powi(2) + (p[2] * b).abs();
        let (min, trace) = nelder_mead_traced(f, &x0, &OptimizerOptions::default()).unwrap();
        let bests: Vec<f64> = trace.iter().map(|r| r.values[0]).collect();
        prop_assert!(bests.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(min.f <= f(&x0));
        prop_assert_eq!(min.iterations, trace.len());
    }

    #[test]
    fn evals_equal_objective_calls(x0 in prop::collection::vec(-2.0f64..2.0, 1..6), budget in 1usize..400) {
        let calls = Cell::new(0usize);
        let opts = OptimizerOptions { max_evals: Some(budget), ..Default::default() };
        let min = nelder_mead(
            |p| {
                calls.set(calls.get() + 1);
                p.iter().enumerate().map(|(i, v)| (i + 1) as f64 * v * v).sum()
            },
            &x0,
            &opts,
        )
        .unwrap();
        prop_assert_eq!(min.evals, calls.get());
        if !min.converged {
            prop_assert!(min.evals >= budget);
        }
    }

    #[test]
    fn bounded_runs_stay_in_box(
        center in prop::collection::vec(-20.0f64..20.0, 2),
        half in 0.5f64..5.0,
    ) {
        let bounds = Bounds::symmetric(2, half);
        let f = |p: &[f64]| (p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2);
        let opts = OptimizerOptions { restarts: 3, ..OptimizerOptions::for_amplitude_bound(half) };
        let found = multi_start(f, &bounds, &opts).unwrap();
        prop_assert!(found.runs.iter().all(|r| bounds.contains(&r.x)));
        prop_assert!(found.best.f <= f(&[0.0, 0.0]));
        if bounds.contains(&center) {
            for (x, c) in found.best.x.iter().zip(&center) {
                prop_assert!((x - c).abs() < 1e-4);
            }
        }
    }
}
