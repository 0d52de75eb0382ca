//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//!
//! Thresholds and tolerances are pinned in the assertions; the studies run
//! at desk scale with fixed seeds.

use pidenet::builder::{chain_steps, realization_within_jump_cap, Builder, Schedule};
use pidenet::model::{builtin_model, finite_activity_general, ModelParams};
use pidenet::pricing::{
    black_scholes_call, mc_price, payoff_network, schedule_from_epsilon, select_realization_set,
    CalibrationConstants, ErrorMeasure, McConfig, PayoffKind, ReferenceConfig,
};
use pidenet::relu_net::{
    affine_combine, compose, identity_net, lift_to_depth, parallelize, Layer, ReluNetwork,
};
use pidenet::rng::{domain, stream};
use pidenet::simulate::{euler_path, sample_realization, PathParams, Variant};
use rand::Rng;
use ratelab::config::{StudyConfig, StudyKind};
use ratelab::study::{run_basket_demo, run_study, BasketDemoConfig};

fn base_study_config(kind: StudyKind, seed: u64) -> StudyConfig {
    StudyConfig {
        study: kind,
        seed,
        model: None,
        model_path: None,
        n_paths: 10_000,
        x0: None,
        t_horizon: 1.0,
        k_ladder: vec![],
        ref_k: None,
        delta_ladder: vec![],
        ref_delta: None,
        trunc_n_steps: None,
        m_ladder: vec![],
        mc_n_steps: None,
        mc_delta: None,
        eps_ladder: vec![],
        d_ladder: vec![],
        c_cal: None,
        out: None,
    }
}

/// Criterion 1: the compiled whole-path network reproduces the simulated
/// terminal state to 1e-9 relative, for every shipped model in its regime.
#[test]
fn criterion_1_compilation_exactness() {
    let mut worst_overall: f64 = 0.0;
    for d in [1usize, 3] {
        // multiplicative regime
        for name in ["pure_drift", "heat", "black_scholes", "merton"] {
            let (spec, nets) = builtin_model(name, d, &ModelParams::default()).unwrap();
            let builder = Builder::new(&spec, &nets).unwrap();
            let params = PathParams::new(1.0, 16);
            let r = sample_realization(&spec, &params, 101, 0).unwrap();
            let phis: Vec<ReluNetwork> = (0..16)
                .map(|n| {
                    builder
                        .build_step_net(&r, n, r.times[r.euler_nodes[n + 1]])
                        .unwrap()
                })
                .collect();
            let refs: Vec<&ReluNetwork> = phis.iter().collect();
            let psi = chain_steps(d, &refs).unwrap();
            let mut rng = stream(101, domain::PROBE, 7);
            let mut worst: f64 = 0.0;
            for _ in 0..200 {
                let x: Vec<f64> = (0..d).map(|_| rng.gen_range(0.1..3.0)).collect();
                let got = psi.eval(&x).unwrap();
                let path = euler_path(&spec, Some(&nets), &x, &r, Variant::NetCoeff, 1).unwrap();
                for (a, b) in got.iter().zip(path.terminal()) {
                    worst = worst.max((a - b).abs() / (1.0 + b.abs()));
                }
            }
            assert!(worst <= 1e-9, "{name} d={d}: compilation error {worst}");
            worst_overall = worst_overall.max(worst);
        }
        // compound-Poisson Monte Carlo regime
        let (spec, nets) = builtin_model("stable_like", d, &ModelParams::default()).unwrap();
        let builder = Builder::new(&spec, &nets).unwrap();
        let params = PathParams::new(1.0, 16).with_delta(0.2).with_m_comp(8);
        let r = sample_realization(&spec, &params, 103, 0).unwrap();
        let phis: Vec<ReluNetwork> = (0..16)
            .map(|n| {
                builder
                    .build_step_net(&r, n, r.times[r.euler_nodes[n + 1]])
                    .unwrap()
            })
            .collect();
        let refs: Vec<&ReluNetwork> = phis.iter().collect();
        let psi = chain_steps(d, &refs).unwrap();
        let mut rng = stream(103, domain::PROBE, 7);
        let mut worst: f64 = 0.0;
        for _ in 0..200 {
            let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let got = psi.eval(&x).unwrap();
            let path = euler_path(
                &spec,
                Some(&nets),
                &x,
                &r,
                Variant::NetCoeffMc { m_used: 8 },
                1,
            )
            .unwrap();
            for (a, b) in got.iter().zip(path.terminal()) {
                worst = worst.max((a - b).abs() / (1.0 + b.abs()));
            }
        }
        assert!(
            worst <= 1e-9,
            "stable_like d={d}: compilation error {worst}"
        );
        worst_overall = worst_overall.max(worst);
    }
    println!(
        "criterion 1 (compilation exactness): PASS, max relative difference {worst_overall:.2e}"
    );
}

/// Criterion 2: Euler strong rate on merton, squared sup error slope in h.
#[test]
fn criterion_2_euler_strong_rate() {
    let mut cfg = base_study_config(StudyKind::EulerRate, 211);
    cfg.k_ladder = (4..=9).collect();
    cfg.ref_k = Some(12);
    cfg.n_paths = 10_000;
    let result = run_study(&cfg).unwrap();
    let fit = result.fit("squared-error-vs-h").unwrap();
    assert!(
        (fit.slope - 1.0).abs() <= 0.2,
        "euler rate slope {} outside 1.0 ± 0.2",
        fit.slope
    );
    println!(
        "criterion 2 (euler strong rate): PASS, slope {:.3} ± {:.3}",
        fit.slope,
        fit.band()
    );
}

/// Criterion 3: small-jump truncation rate on the stable-like model.
#[test]
fn criterion_3_truncation_rate() {
    let mut cfg = base_study_config(StudyKind::TruncRate, 307);
    cfg.delta_ladder = vec![0.4, 0.2, 0.1, 0.05];
    cfg.n_paths = 2_000;
    let result = run_study(&cfg).unwrap();
    let fit = result.fit("squared-error-vs-delta").unwrap();
    assert!(
        (fit.slope - 0.5).abs() <= 0.15,
        "truncation rate slope {} outside 0.5 ± 0.15",
        fit.slope
    );
    println!(
        "criterion 3 (truncation rate): PASS, slope {:.3} ± {:.3}",
        fit.slope,
        fit.band()
    );
}

/// Criterion 4: compensator Monte Carlo rate on a finite-activity model.
#[test]
fn criterion_4_compensator_mc_rate() {
    let mut cfg = base_study_config(StudyKind::CompMcRate, 401);
    cfg.m_ladder = vec![4, 16, 64, 256];
    cfg.n_paths = 4_000;
    let result = run_study(&cfg).unwrap();
    let fit = result.fit("squared-error-vs-m").unwrap();
    assert!(
        (fit.slope + 1.0).abs() <= 0.25,
        "compensator MC slope {} outside -1.0 ± 0.25",
        fit.slope
    );
    println!(
        "criterion 4 (compensator MC rate): PASS, slope {:.3} ± {:.3}",
        fit.slope,
        fit.band()
    );
}

/// Criterion 5: every assembled network stays within its recorded bounds
/// across randomized builds in both regimes.
#[test]
fn criterion_5_size_bound_ledger() {
    let mut rng = stream(503, domain::PROBE, 0);
    let mut entries_checked = 0usize;
    for build in 0..50 {
        let multiplicative = build % 2 == 0;
        let d = rng.gen_range(1..=4usize);
        let n_steps = rng.gen_range(2..=6usize);
        let reps = rng.gen_range(1..=3usize);
        let (spec, nets, delta, m_comp) = if multiplicative {
            let name = ["pure_drift", "heat", "black_scholes", "merton"][rng.gen_range(0..4usize)];
            let (s, n) = builtin_model(name, d, &ModelParams::default()).unwrap();
            (s, n, 0.0, 0)
        } else if rng.gen_bool(0.5) {
            let (s, n) = builtin_model("stable_like", d, &ModelParams::default()).unwrap();
            (s, n, rng.gen_range(0.15..0.4), rng.gen_range(2..=6usize))
        } else {
            let atoms = vec![
                (0.5, vec![0.8; d]),
                (0.3, {
                    let mut z = vec![0.0; d];
                    z[0] = -0.5;
                    z
                }),
            ];
            let (s, n) = finite_activity_general(d, &atoms, &ModelParams::default()).unwrap();
            (s, n, 0.1, rng.gen_range(2..=6usize))
        };
        let builder = Builder::new(&spec, &nets).unwrap();
        let monitors = rng.gen_range(1..=3usize);
        let payoff = match rng.gen_range(0..3) {
            0 => payoff_network(
                PayoffKind::ParametricBasketCall {
                    weights: vec![1.0 / d as f64; d],
                },
                d,
            )
            .unwrap(),
            1 => payoff_network(
                PayoffKind::BasketCall {
                    weights: vec![1.0; d],
                    strike: 0.9,
                },
                d,
            )
            .unwrap(),
            _ => payoff_network(
                PayoffKind::DiscreteAsianCall {
                    weights: vec![1.0; d],
                    monitors,
                    strike: 0.5,
                },
                d,
            )
            .unwrap(),
        };
        let schedule = Schedule {
            epsilon: 0.5,
            eps_bar: 0.5,
            t_horizon: 1.0,
            h: 1.0 / n_steps as f64,
            n_steps,
            delta,
            m_comp,
            n_realizations: reps,
            dim_exponent_r: 1.0,
        };
        let hook = payoff.hook(1.0);
        // draw realization tuples until the jump-count cap holds, as the
        // selection step would
        let mut attempt = 0u64;
        let approx = loop {
            let rs = pidenet::builder::sample_schedule_realizations(
                &spec,
                &hook,
                &schedule,
                600 + build as u64,
                attempt,
            )
            .unwrap();
            if rs.iter().all(|r| realization_within_jump_cap(&spec, r)) {
                break builder
                    .assemble_from_realizations(&hook, &schedule, &rs)
                    .unwrap();
            }
            attempt += 1;
            assert!(attempt < 60, "jump cap kept failing in build {build}");
        };
        let violations = approx.ledger.violations();
        assert!(
            violations.is_empty(),
            "build {build}: {} ledger violations, first: {:?}",
            violations.len(),
            violations.first()
        );
        entries_checked += approx.ledger.entries.len();
    }
    println!("criterion 5 (size-bound ledger): PASS, {entries_checked} entries, zero violations");
}

/// Criterion 6: polynomial size scaling of the assembled approximator.
#[test]
fn criterion_6_size_scaling() {
    let mut cfg = base_study_config(StudyKind::SizeScaling, 601);
    cfg.eps_ladder = vec![1.0, 0.5, 0.25, 0.125];
    cfg.d_ladder = vec![1, 2, 4, 8];
    cfg.c_cal = Some(0.1);
    let result = run_study(&cfg).unwrap();
    let q_pred = result
        .meta
        .iter()
        .find(|(k, _)| k == "predicted_q_frak")
        .map(|(_, v)| *v)
        .unwrap();
    let p_pred = result
        .meta
        .iter()
        .find(|(k, _)| k == "predicted_p_frak")
        .map(|(_, v)| *v)
        .unwrap();
    for d in &cfg.d_ladder {
        let fit = result
            .fit(&format!("size-vs-inv-eps[d={d}]"))
            .unwrap_or_else(|| panic!("missing fit for d={d}"));
        assert!(fit.slope.is_finite() && fit.slope > 0.0);
        assert!(
            fit.slope <= q_pred + 0.25,
            "d={d}: accuracy exponent {} above the predicted {q_pred}",
            fit.slope
        );
        assert!(
            fit.r_squared >= 0.95,
            "d={d}: log-size vs log accuracy R^2 {} below 0.95",
            fit.r_squared
        );
    }
    for eps in &cfg.eps_ladder {
        let fit = result
            .fit(&format!("size-vs-d[eps={eps}]"))
            .unwrap_or_else(|| panic!("missing fit for eps={eps}"));
        assert!(fit.slope.is_finite());
        assert!(
            fit.slope <= p_pred + 0.25,
            "eps={eps}: dimension exponent {} above the predicted {p_pred}",
            fit.slope
        );
    }
    println!(
        "criterion 6 (size scaling): PASS, accuracy exponents within {q_pred}, dimension exponents within {p_pred}"
    );
}

/// Criterion 7: the Monte Carlo pricer against the closed form, and the
/// basket demo against its accuracy target.
#[test]
fn criterion_7_pricing_oracle() {
    let (spec, _) = builtin_model(
        "black_scholes",
        1,
        &ModelParams {
            vol: Some(0.2),
            ..Default::default()
        },
    )
    .unwrap();
    let payoff = payoff_network(
        PayoffKind::BasketCall {
            weights: vec![1.0],
            strike: 1.0,
        },
        1,
    )
    .unwrap();
    let cfg = McConfig {
        t_horizon: 1.0,
        n_steps: 512,
        delta: 0.0,
        n_paths: 1_000_000,
    };
    let (price, se) = mc_price(&spec, &payoff, &[1.0], &[], &cfg, 701).unwrap();
    let oracle = black_scholes_call(1.0, 1.0, 0.2, 1.0);
    assert!((oracle - 0.0796557).abs() < 5e-7);
    assert!(
        (price - oracle).abs() <= 3.0 * se,
        "mc price {price} vs closed form {oracle} (3 se = {})",
        3.0 * se
    );

    let demo = run_basket_demo(&BasketDemoConfig {
        model: pidenet::model::ModelFile {
            family: "black_scholes".into(),
            d: 1,
            params: ModelParams {
                vol: Some(0.2),
                ..Default::default()
            },
            declared_constants: None,
        },
        x0: vec![1.0],
        weights: vec![1.0],
        strikes: vec![0.8, 1.0, 1.2],
        epsilon: 0.25,
        t_horizon: 1.0,
        seed: 703,
        c_cal: 0.1,
        max_attempts: 10,
        ref_paths: 100_000,
    })
    .unwrap();
    assert!(
        demo.rms_error < demo.epsilon,
        "basket demo rms {} not below epsilon {}",
        demo.rms_error,
        demo.epsilon
    );
    println!(
        "criterion 7 (pricing oracle): PASS, mc {price:.6} vs closed form {oracle:.6} (se {se:.1e}); basket rms {:.4} < {}",
        demo.rms_error, demo.epsilon
    );
}

/// Criterion 8: the realization selection accepts quickly under a generous
/// schedule.
#[test]
fn criterion_8_omega_selection() {
    let (spec, nets) = builtin_model("merton", 1, &ModelParams::default()).unwrap();
    let payoff =
        payoff_network(PayoffKind::ParametricBasketCall { weights: vec![1.0] }, 1).unwrap();
    let schedule = schedule_from_epsilon(
        0.5,
        1,
        1.0,
        &spec.constants,
        &CalibrationConstants {
            c_cal: 0.1,
            r: 1.0,
            q_tilde: None,
        },
        pidenet::builder::BuildMode::Multiplicative,
    )
    .unwrap();
    let measure = ErrorMeasure::PointMass {
        x0: vec![1.0],
        strikes: vec![1.0],
    };
    let reference = ReferenceConfig {
        n_paths: 2_000,
        step_factor: 8,
    };
    let mut accepted_fast = 0usize;
    let trials = 100usize;
    for trial in 0..trials {
        let result = select_realization_set(
            &spec,
            &nets,
            &payoff,
            &schedule,
            &measure,
            10,
            16,
            &reference,
            800 + trial as u64,
        );
        if let Ok(r) = result {
            if r.diagnostics.attempts <= 3 {
                accepted_fast += 1;
            }
        }
    }
    assert!(
        accepted_fast >= 95,
        "only {accepted_fast}/{trials} trials accepted within 3 attempts"
    );
    println!(
        "criterion 8 (omega selection): PASS, {accepted_fast}/{trials} trials accepted within 3 attempts"
    );
}

/// Criterion 9: randomized oracle equivalence and size inequalities for the
/// whole network calculus.
#[test]
fn criterion_9_network_calculus_suite() {
    let mut rng = stream(901, domain::PROBE, 0);

    fn random_net(rng: &mut impl Rng, d_in: usize, d_out: usize, maps: usize) -> ReluNetwork {
        let mut widths = vec![d_in];
        for _ in 0..maps - 1 {
            widths.push(rng.gen_range(1..=4));
        }
        widths.push(d_out);
        let layers = (0..maps)
            .map(|i| {
                let (ind, outd) = (widths[i], widths[i + 1]);
                let mut entries = Vec::new();
                for r in 0..outd {
                    for c in 0..ind {
                        if rng.gen_bool(0.6) {
                            entries.push((r as u32, c as u32, rng.gen_range(-2.0..2.0)));
                        }
                    }
                }
                let bias = (0..outd)
                    .map(|_| {
                        if rng.gen_bool(0.5) {
                            rng.gen_range(-1.0..1.0)
                        } else {
                            0.0
                        }
                    })
                    .collect();
                Layer::from_entries(outd, ind, entries, bias).unwrap()
            })
            .collect();
        ReluNetwork::new(d_in, layers).unwrap()
    }

    let close = |a: &[f64], b: &[f64]| -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs() / (1.0 + y.abs()))
            .fold(0.0, f64::max)
    };

    let mut worst: f64 = 0.0;
    for case in 0..1000 {
        let d = rng.gen_range(1..=4usize);
        match case % 4 {
            0 => {
                // compose: oracle equivalence, refined size bound, depth sum
                let mid = rng.gen_range(1..=3usize);
                let (m1, m2) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
                let out_dim = rng.gen_range(1..=3);
                let inner = random_net(&mut rng, d, mid, m1);
                let outer = random_net(&mut rng, mid, out_dim, m2);
                let comp = compose(&outer, &inner).unwrap();
                assert!(comp.size() <= 2 * outer.size() + inner.size_out() + inner.size());
                assert_eq!(comp.depth(), outer.depth() + inner.depth() - 1);
                for _ in 0..3 {
                    let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect();
                    let want = outer.eval(&inner.eval(&x).unwrap()).unwrap();
                    worst = worst.max(close(&comp.eval(&x).unwrap(), &want));
                }
            }
            1 => {
                // parallelize: additive size, concatenated output
                let maps = rng.gen_range(1..=3usize);
                let count = rng.gen_range(2..=4usize);
                let dims: Vec<(usize, usize)> = (0..count)
                    .map(|_| (rng.gen_range(1..=3), rng.gen_range(1..=3)))
                    .collect();
                let nets: Vec<ReluNetwork> = dims
                    .iter()
                    .map(|&(i, o)| random_net(&mut rng, i, o, maps))
                    .collect();
                let refs: Vec<&ReluNetwork> = nets.iter().collect();
                let par = parallelize(&refs, true).unwrap();
                assert_eq!(par.size(), nets.iter().map(|n| n.size()).sum::<usize>());
                let x: Vec<f64> = (0..par.input_dim())
                    .map(|_| rng.gen_range(-2.0..2.0))
                    .collect();
                let mut want = Vec::new();
                let mut off = 0;
                for n in &nets {
                    want.extend(n.eval(&x[off..off + n.input_dim()]).unwrap());
                    off += n.input_dim();
                }
                worst = worst.max(close(&par.eval(&x).unwrap(), &want));
            }
            2 => {
                // affine combination: oracle equivalence and size bound
                let maps = rng.gen_range(1..=3usize);
                let count = rng.gen_range(1..=3usize);
                let out = rng.gen_range(1..=3usize);
                let nets: Vec<ReluNetwork> = (0..count)
                    .map(|_| random_net(&mut rng, d, out, maps))
                    .collect();
                let refs: Vec<&ReluNetwork> = nets.iter().collect();
                let weights: Vec<f64> = (0..count).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let bias: Vec<f64> = (0..out).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let comb = affine_combine(&refs, &weights, &bias).unwrap();
                let bias_nnz = bias.iter().filter(|&&b| b != 0.0).count();
                assert!(comb.size() <= nets.iter().map(|n| n.size()).sum::<usize>() + bias_nnz);
                for _ in 0..3 {
                    let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
                    let mut want = bias.clone();
                    for (n, &w) in nets.iter().zip(&weights) {
                        for (acc, v) in want.iter_mut().zip(n.eval(&x).unwrap()) {
                            *acc += w * v;
                        }
                    }
                    worst = worst.max(close(&comb.eval(&x).unwrap(), &want));
                }
            }
            _ => {
                // identity size bound and depth lifts
                let ell = rng.gen_range(2..=5usize);
                let ident = identity_net(d, ell).unwrap();
                assert!(ident.size() <= 2 * d * ell);
                let (w, m) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
                let net = random_net(&mut rng, d, w, m);
                let target = net.depth() + rng.gen_range(0..=3usize);
                let lifted = lift_to_depth(&net, target).unwrap();
                assert_eq!(lifted.depth(), target);
                for _ in 0..3 {
                    let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
                    worst = worst.max(close(&lifted.eval(&x).unwrap(), &net.eval(&x).unwrap()));
                }
            }
        }
    }
    assert!(worst <= 1e-12, "calculus oracle deviation {worst}");
    println!("criterion 9 (network calculus): PASS, 1000 cases, max oracle deviation {worst:.2e}");
}
