mod common;

use ecmfit::ecm::{
    branch_decay_factor, simulate_terminal_voltage, step_branch, CellSpec, EcmParams, OcvCurve,
};
use ecmfit::synthetic::{reference_ocv, reference_params};
use proptest::prelude::*;

#[test]
fn matches_independent_recurrence() {
    let cols = common::read_columns("sim_theta_star_600.csv");
    let (time, current, expected) = (&cols[0], &cols[1], &cols[2]);
    assert_eq!(time.len(), 600);
    let sim = simulate_terminal_voltage(
        &reference_params(),
        &reference_ocv(),
        &common::cell(),
        time,
        current,
    )
    .unwrap();
    for (k, (v, e)) in sim.voltage.iter().zip(expected).enumerate() {
        assert!((v - e).abs() <= 1e-12, "sample {k}: {v} vs {e}");
    }
}

#[test]
fn rejects_invalid_parameters() {
    let mut p = reference_params();
    p.c2 = -1.0;
    let t = [0.0, 1.0];
    let i = [1.0, 1.0];
    assert!(simulate_terminal_voltage(&p, &reference_ocv(), &common::cell(), &t, &i).is_err());
}

fn positive() -> impl Strategy<Value = f64> {
    (-4.0f64..4.0).prop_map(|e| 10f64.powf(e))
}

fn params() -> impl Strategy<Value = EcmParams> {
    (
        (-3.0f64..0.0).prop_map(|e| 10f64.powf(e)),
        (-3.0f64..0.0).prop_map(|e| 10f64.powf(e)),
        (0.0f64..5.0).prop_map(|e| 10f64.powf(e)),
        (-3.0f64..0.0).prop_map(|e| 10f64.powf(e)),
        (0.0f64..5.0).prop_map(|e| 10f64.powf(e)),
    )
        .prop_map(|(r0, r1, c1, r2, c2)| EcmParams::new(r0, r1, c1, r2, c2).unwrap())
}

/// Strictly increasing timestamps from positive steps, plus a current series.
fn profile(max_current: f64) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    prop::collection::vec((0.01f64..20.0, -max_current..=max_current), 2..200).prop_map(|steps| {
        let mut t = 0.0;
        let mut time = Vec::with_capacity(steps.len());
        let mut current = Vec::with_capacity(steps.len());
        for (k, (dt, i)) in steps.into_iter().enumerate() {
            if k > 0 {
                t += dt;
            }
            time.push(t);
            current.push(i);
        }
        (time, current)
    })
}

proptest! {
    #[test]
    fn decay_factor_in_unit_interval(r in positive(), c in positive(), dt in 0.0f64..1e4) {
        let a = branch_decay_factor(r, c, dt).unwrap();
        prop_assert!(a > 0.0 || dt / (r * c) > 700.0);
        prop_assert!(a <= 1.0);
    }

    #[test]
    fn branch_stays_bounded(
        r in positive(),
        c in positive(),
        steps in prop::collection::vec((0.0f64..50.0, -3.0f64..3.0), 1..300),
    ) {
        let i_max = steps.iter().map(|s| s.1.abs()).fold(0.0, f64::max);
        let mut v = 0.0;
        for (dt, i) in steps {
            v = step_branch(v, i, r, c, dt).unwrap();
            prop_assert!(v.abs() <= r * i_max * (1.0 + 1e-12));
        }
    }

    #[test]
    fn zero_current_is_a_fixed_point(p in params(), soc in 0.0f64..=1.0, n in 2usize..100) {
        let ocv = reference_ocv();
        let cell = CellSpec::new(2.5, soc).unwrap();
        let time: Vec<f64> = (0..n).map(|k| k as f64 * 1.5).collect();
        let sim = simulate_terminal_voltage(&p, &ocv, &cell, &time, &vec![0.0; n]).unwrap();
        let expected = ocv.eval(soc);
        prop_assert!(sim.voltage.iter().all(|&v| v == expected));
    }

    #[test]
    fn charge_is_conserved(p in params(), (time, current) in profile(2.0)) {
        // 2 A for at most ~4000 s from a 100 Ah cell at half charge never clamps
        let cell = CellSpec::new(100.0, 0.5).unwrap();
        let sim = simulate_terminal_voltage(&p, &reference_ocv(), &cell, &time, &current).unwrap();
        let charge: f64 = (1..time.len()).map(|k| current[k] * (time[k] - time[k - 1])).sum();
        let expected = 0.5 - charge / (3600.0 * 100.0);
        let last = sim.states.last().unwrap().soc;
        prop_assert!((last - expected).abs() <= 1e-12, "{} vs {}", last, expected);
    }

    #[test]
    fn branch_swap_is_bit_exact(p in params(), (time, current) in profile(3.0)) {
        let ocv = reference_ocv();
        let cell = common::cell();
        let a = simulate_terminal_voltage(&p, &ocv, &cell, &time, &current).unwrap();
        let b = simulate_terminal_voltage(&p.swapped(), &ocv, &cell, &time, &current).unwrap();
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(&a.voltage), bits(&b.voltage));
    }

    #[test]
    fn simulation_is_deterministic(p in params(), (time, current) in profile(3.0)) {
        let ocv = OcvCurve::with_coefficients(vec![3.4, 0.7]).unwrap();
        let cell = common::cell();
        let a = simulate_terminal_voltage(&p, &ocv, &cell, &time, &current).unwrap();
        let b = simulate_terminal_voltage(&p, &ocv, &cell, &time, &current).unwrap();
        prop_assert_eq!(a, b);
    }
}
