mod common;

use ecmfit::dataset::DischargeSegment;
use ecmfit::ecm::{canonicalize, simulate_terminal_voltage, EcmParams, OcvCurve};
use ecmfit::optimize::*;
use ecmfit::synthetic::{constant_current_segment, reference_ocv, reference_params};
use ecmfit::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn small_config() -> OptimizerConfig {
    let mut c = OptimizerConfig::default();
    c.pso.max_iterations = 15;
    c.pso.swarm_size = 8;
    c.sa.iterations = 200;
    c.ga.population = 8;
    c.ga.generations = 15;
    c.ls.max_iterations = 10;
    c
}

fn theta_star() -> Vec<f64> {
    reference_params().to_array().to_vec()
}

/// Flat segment: zero current, constant measured voltage.
fn flat_problem() -> FitProblem {
    let n = 50;
    let seg = DischargeSegment::new(
        "flat",
        1,
        (0..n).map(|k| k as f64).collect(),
        vec![0.0; n],
        vec![3.7; n],
        1.0,
        2.0,
    )
    .unwrap();
    FitProblem::fixed_ocv(seg, OcvCurve::constant(3.7).unwrap()).unwrap()
}

#[test]
fn objective_vanishes_at_generator() {
    let p = common::synthetic_problem();
    assert!(objective_mse(&theta_star(), &p).unwrap() <= 1e-20);
}

#[test]
fn objective_of_constant_offset() {
    let p = common::synthetic_problem();
    let mut theta = theta_star();
    // one extra milliohm at 1 A shifts every sample by 1 mV
    theta[0] += 0.001;
    let mse = objective_mse(&theta, &p).unwrap();
    assert!((mse - 1e-6).abs() <= 1e-15, "{mse}");
}

#[test]
fn objective_matches_simulate_then_average() {
    let p = common::synthetic_problem();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let u: Vec<f64> = (0..5).map(|_| rng.random::<f64>()).collect();
        let theta = p.space().from_unit(&u);
        let params = EcmParams::from_slice(&theta).unwrap();
        let seg = p.segment();
        let sim =
            simulate_terminal_voltage(&params, p.ocv().unwrap(), p.cell(), &seg.time, &seg.current)
                .unwrap();
        let mut acc = 0.0;
        for (pred, meas) in sim.voltage.iter().zip(&seg.voltage) {
            acc += (pred - meas).powi(2);
        }
        let oracle = acc / seg.len() as f64;
        let got = objective_mse(&theta, &p).unwrap();
        assert!((got - oracle).abs() <= 1e-15, "{got} vs {oracle}");
        assert_eq!(got.to_bits(), objective_mse(&theta, &p).unwrap().to_bits());
        let swapped = canonicalize(&[theta[0], theta[3], theta[4], theta[1], theta[2]]);
        assert_eq!(
            got.to_bits(),
            objective_mse(&swapped, &p).unwrap().to_bits()
        );
    }
}

#[test]
fn objective_rejects_wrong_dimension() {
    let p = common::synthetic_problem();
    assert!(matches!(
        objective_mse(&[0.1; 4], &p),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn canonicalize_examples() {
    let a = [0.1, 0.01, 100.0, 0.02, 5000.0];
    assert_eq!(canonicalize(&a), a.to_vec());
    assert_eq!(canonicalize(&[0.1, 0.02, 5000.0, 0.01, 100.0]), a.to_vec());
    let tie = [0.1, 0.02, 50.0, 0.01, 100.0];
    assert_eq!(canonicalize(&tie), tie.to_vec());
}

#[test]
fn ls_from_generator_stops_immediately() {
    let p = common::synthetic_problem();
    let cfg = LmConfig {
        initial: Some(theta_star()),
        ..LmConfig::default()
    };
    let r = fit_least_squares(&p, &cfg, 0, 1).unwrap();
    assert!(r.iterations <= 2, "{}", r.iterations);
    assert!(r.mse < 1e-18);
    assert!(r.converged);
}

#[test]
fn ls_recovers_from_perturbed_start() {
    let p = common::synthetic_problem();
    let truth = theta_star();
    for signs in [[1.0, -1.0, 1.0, -1.0, 1.0], [-1.0, 1.0, -1.0, 1.0, -1.0]] {
        let start: Vec<f64> = truth
            .iter()
            .zip(signs)
            .map(|(t, s)| t * (1.0 + 0.1 * s))
            .collect();
        let cfg = LmConfig {
            initial: Some(start),
            ..LmConfig::default()
        };
        let r = fit_least_squares(&p, &cfg, 0, 1).unwrap();
        let err = common::max_relative_error(&r.theta, &truth);
        assert!(err < 1e-4, "relative error {err}");
    }
}

#[test]
fn ls_flags_flat_objective() {
    let p = flat_problem();
    let initial = objective_mse(&p.space().center(), &p).unwrap();
    let r = fit_least_squares(&p, &LmConfig::default(), 0, 1).unwrap();
    assert!(!r.converged);
    assert_eq!(r.mse, initial);
}

#[test]
fn stochastic_methods_survive_flat_objective() {
    let p = flat_problem();
    for m in [Method::Pso, Method::Sa, Method::Ga] {
        let r = fit(m, &p, &small_config(), 3, 1).unwrap();
        assert!(r.mse.is_finite(), "{m}");
    }
}

#[test]
fn pso_degenerate_swarm_cannot_move() {
    let p = common::synthetic_problem();
    let cfg = PsoConfig {
        swarm_size: 1,
        inertia: 0.0,
        cognitive: 0.0,
        social: 0.0,
        max_iterations: 20,
        ..PsoConfig::default()
    };
    let r = fit_pso(&p, &cfg, 5, 1).unwrap();
    assert!(r.trace.iter().all(|&t| t == r.trace[0]));
    assert_eq!(r.mse, r.trace[0]);
    assert_eq!(r.trace.len(), 21);
}

#[test]
fn pso_is_reproducible() {
    let p = common::synthetic_problem();
    let a = fit_pso(&p, &PsoConfig::default(), 42, 1).unwrap();
    let b = fit_pso(&p, &PsoConfig::default(), 42, 1).unwrap();
    assert!(a.same_result(&b));
}

#[test]
fn sa_greedy_and_frozen() {
    let p = common::synthetic_problem();
    let greedy = SaConfig {
        t0: 0.0,
        iterations: 500,
        ..SaConfig::default()
    };
    let r = fit_simulated_annealing(&p, &greedy, 1, 1).unwrap();
    assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(r.evaluations, 501);

    let frozen = SaConfig {
        step: 0.0,
        iterations: 200,
        ..SaConfig::default()
    };
    let r = fit_simulated_annealing(&p, &frozen, 1, 1).unwrap();
    assert!(r.trace.iter().all(|&t| t == r.trace[0]));
}

#[test]
fn sa_improves_a_hundredfold() {
    let p = common::synthetic_problem();
    let r = fit_simulated_annealing(&p, &SaConfig::default(), 42, 1).unwrap();
    assert!(r.trace[0] / r.mse >= 100.0, "{} -> {}", r.trace[0], r.mse);
}

#[test]
fn ga_fixed_point() {
    let p = common::synthetic_problem();
    let cfg = GaConfig {
        population: 6,
        generations: 25,
        mutation_rate: 0.0,
        ..GaConfig::default()
    };
    let individual = vec![0.3, 0.6, 0.2, 0.7, 0.4];
    let r = evolve(&p, &cfg, 9, 1, Some(vec![individual.clone(); 6])).unwrap();
    assert!(r.trace.iter().all(|&t| t == r.trace[0]));
    let expected = canonicalize(&p.space().from_unit(&individual));
    assert_eq!(r.theta, expected);
}

#[test]
fn ga_recovers_generator() {
    let p = common::synthetic_problem();
    let r = fit_genetic(&p, &GaConfig::default(), 42, 1).unwrap();
    let err = common::max_relative_error(&r.theta, &theta_star());
    assert!(err < 0.1, "relative error {err}");
}

#[test]
fn grid_is_exhaustive() {
    let p = common::synthetic_problem();
    let g = grid_oracle(&p, 2).unwrap();
    assert_eq!(g.evaluations, 32);
    let s = p.space();
    let mut best = f64::INFINITY;
    for mask in 0..32u32 {
        let theta: Vec<f64> = (0..5)
            .map(|j| {
                if mask >> (4 - j) & 1 == 1 {
                    s.upper()[j]
                } else {
                    s.lower()[j]
                }
            })
            .collect();
        best = best.min(objective_mse(&theta, &p).unwrap());
    }
    assert_eq!(g.mse, best);
}

#[test]
fn grid_finds_exact_generator() {
    let truth = theta_star();
    let upper: Vec<f64> = truth.iter().map(|t| t * 10.0).collect();
    let space = SearchSpace::new(truth.clone(), upper).unwrap();
    let p = common::synthetic_problem().with_space(space).unwrap();
    let g = grid_oracle(&p, 2).unwrap();
    assert_eq!(g.mse, 0.0);
    assert_eq!(g.theta, truth);
}

#[test]
fn grid_refuses_joint_mode() {
    let seg = common::synthetic_problem().segment().clone();
    let p = FitProblem::joint_ocv(seg, 5).unwrap();
    assert!(matches!(grid_oracle(&p, 3), Err(Error::Unsupported(_))));
    assert!(grid_oracle(&common::synthetic_problem(), 1).is_err());
}

#[test]
fn worker_count_does_not_change_results() {
    let p = common::synthetic_problem();
    let cfg = small_config();
    for m in Method::ALL {
        let a = fit(m, &p, &cfg, 17, 1).unwrap();
        let b = fit(m, &p, &cfg, 17, 4).unwrap();
        assert!(a.same_result(&b), "{m}");
    }
}

#[test]
fn joint_mode_reports_ocv_coefficients() {
    let seg = common::synthetic_problem().segment().clone();
    let p = FitProblem::joint_ocv(seg, 2).unwrap();
    let r = fit(Method::Pso, &p, &small_config(), 1, 1).unwrap();
    assert_eq!(r.ocv_coefficients.as_ref().map(Vec::len), Some(3));
    assert_eq!(r.theta.len(), 8);
    assert!(p.space().contains_up_to_swap(&r.theta));
}

#[test]
fn gradient_matches_central_differences() {
    let p = common::synthetic_problem();
    let cfg = LmConfig::default();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let u: Vec<f64> = (0..5).map(|_| rng.random_range(0.1..0.9)).collect();
        let theta = p.space().from_unit(&u);
        let g = mse_gradient(&p, &theta, &cfg).unwrap();
        let fd: Vec<f64> = (0..5)
            .map(|j| {
                let h = 1e-6 * theta[j];
                let mut a = theta.clone();
                let mut b = theta.clone();
                a[j] += h;
                b[j] -= h;
                (objective_mse(&a, &p).unwrap() - objective_mse(&b, &p).unwrap()) / (2.0 * h)
            })
            .collect();
        let norm = fd.iter().map(|x| x * x).sum::<f64>().sqrt();
        let diff = g
            .iter()
            .zip(&fd)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(diff <= 1e-4 * norm, "{g:?} vs {fd:?}");
    }
}

#[test]
fn config_file_overrides() {
    let kv = ecmfit::kv::parse_kv("pso.swarm_size=12\nsa.t0=0.5\nga.population=10\n").unwrap();
    let c = OptimizerConfig::from_kv(&kv).unwrap();
    assert_eq!(c.pso.swarm_size, 12);
    assert_eq!(c.sa.t0, 0.5);
    assert_eq!(c.ga.population, 10);
    assert_eq!(c.pso.inertia, PsoConfig::default().inertia);
    let bad = ecmfit::kv::parse_kv("pso.swarmsize=12\n").unwrap();
    assert!(OptimizerConfig::from_kv(&bad).is_err());
    let tiny = ecmfit::kv::parse_kv("ga.population=2\n").unwrap();
    assert!(OptimizerConfig::from_kv(&tiny).is_err());
}

fn check_report(r: &FitReport, p: &FitProblem) -> Result<(), TestCaseError> {
    prop_assert!(r.mse >= 0.0);
    prop_assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
    prop_assert_eq!(*r.trace.last().unwrap(), r.mse);
    prop_assert!(r.best_params.is_canonical());
    prop_assert!(p.space().contains_up_to_swap(&r.theta));
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn reports_are_monotone_feasible_and_canonical(seed in any::<u64>(), current in 0.2f64..3.0) {
        let seg = constant_current_segment(
            &reference_params(), &reference_ocv(), &common::cell(), current, 120.0, 1.0,
        ).unwrap();
        let p = FitProblem::fixed_ocv(seg, reference_ocv()).unwrap();
        for m in Method::ALL {
            let r = fit(m, &p, &small_config(), seed, 1).unwrap();
            check_report(&r, &p)?;
        }
    }

    #[test]
    fn seeds_determine_reports(seed in any::<u64>()) {
        let p = common::synthetic_problem();
        for m in [Method::Pso, Method::Sa, Method::Ga] {
            let a = fit(m, &p, &small_config(), seed, 1).unwrap();
            let b = fit(m, &p, &small_config(), seed, 2).unwrap();
            prop_assert!(a.same_result(&b));
        }
    }
}
