//! Acceptance gate. Prints one PASS/FAIL line per criterion (and per
//! property of the invariant suite) and exits nonzero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestError, TestRng, TestRunner};

use neuroadc::config::{self, half_threshold_gain, ExperimentConfig, RAMP_TARGET_RATE};
use neuroadc::engine::{calibrate_charge_gain, run, Engine, MismatchSpec, SimConfig};
use neuroadc::inhibition::{Fanout, InhibitionGenerator, InhibitionPolicy};
use neuroadc::neuron::{NeuronParams, NeuronState};
use neuroadc::recon::{
    apply_compensation, decoherence_metrics, fit_compensation, monte_carlo, ramp_round_trip,
    reconstruct, CountSeries,
};
use neuroadc::scan::{ScanConfig, ScanCursor};
use neuroadc::stimulus::Waveform;

const CASES: u32 = 1000;

struct Gate {
    failures: usize,
}

impl Gate {
    fn record(&mut self, id: &str, pass: bool, detail: String) {
        if !pass {
            self.failures += 1;
        }
        println!("{} {id}: {detail}", if pass { "PASS" } else { "FAIL" });
    }

    fn error(&mut self, id: &str, err: impl std::fmt::Display) {
        self.record(id, false, format!("error: {err}"));
    }
}

fn within(limit: Duration, elapsed: Duration) -> (bool, String) {
    (
        elapsed < limit,
        format!(
            "{:.3} s (limit {} s)",
            elapsed.as_secs_f64(),
            limit.as_secs_f64()
        ),
    )
}

fn runner() -> TestRunner {
    TestRunner::new_with_rng(
        Config {
            cases: CASES,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    )
}

fn property<S: Strategy>(
    gate: &mut Gate,
    id: &str,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) where
    S::Value: std::fmt::Debug,
{
    let mut r = runner();
    match r.run(&strategy, test) {
        Ok(()) => gate.record(id, true, format!("{CASES} cases")),
        Err(TestError::Fail(why, input)) => {
            gate.record(id, false, format!("{why}; minimal input {input:?}"))
        }
        Err(e) => gate.record(id, false, e.to_string()),
    }
}

/// Ten neurons in one row, no mismatch, no leak, 50 nA. The gain makes a
/// base-width inhibition pulse discharge half a threshold.
fn decoherence_config(enabled: bool, seed: u64) -> SimConfig {
    let mut c = ExperimentConfig::default().sim;
    c.scan = ScanConfig {
        rows: 1,
        cols: 10,
        scan_step_seconds: 30e-9,
        gen_ticks_per_step: 10,
    };
    c.sync_tick();
    c.neuron.i_exc_max = 800e-9;
    c.neuron.i_inh = 4e-6;
    c.neuron.leak_tau = f64::INFINITY;
    c.neuron.charge_gain = half_threshold_gain(
        c.neuron.i_inh,
        c.policy.base_width_ticks,
        c.neuron.tick_seconds,
    );
    c.policy = InhibitionPolicy {
        enabled,
        ..InhibitionPolicy::default()
    };
    c.waveform = Waveform::Constant { amps: 50e-9 };
    c.mismatch = MismatchSpec::none();
    c.duration_steps = 1000 * 10;
    c.seed = seed;
    c
}

fn criterion_1(gate: &mut Gate) {
    let mut detail = Vec::new();
    let mut pass = true;
    let mut slowest = Duration::ZERO;
    for seed in 0..3 {
        let start = Instant::now();
        let metrics = |enabled| {
            let c = decoherence_config(enabled, seed);
            run(&c).and_then(|t| decoherence_metrics(&t, c.scan.scan_step_seconds))
        };
        match (metrics(false), metrics(true)) {
            (Ok(off), Ok(on)) => {
                let ok = off.burst_fraction >= 0.8
                    && on.burst_fraction <= 0.2
                    && on.isi_cv <= 0.5 * off.isi_cv;
                pass &= ok;
                detail.push(format!(
                    "seed {seed}: off burst {:.3} cv {:.3}, on burst {:.3} cv {:.3}",
                    off.burst_fraction, off.isi_cv, on.burst_fraction, on.isi_cv
                ));
            }
            (Err(e), _) | (_, Err(e)) => return gate.error("1 decoherence A/B", e),
        }
        slowest = slowest.max(start.elapsed());
    }
    let (fast, t) = within(Duration::from_secs(1), slowest);
    gate.record(
        "1 decoherence A/B",
        pass && fast,
        format!("{}; slowest A/B pair {t}", detail.join("; ")),
    );
}

fn criterion_2(gate: &mut Gate) {
    let start = Instant::now();
    let mut c = decoherence_config(true, 0);
    c.scan.cols = 1;
    c.neuron.charge_gain = 1e13;
    c.neuron.i_exc_max = f64::INFINITY;
    let dt = c.scan.scan_step_seconds;
    let mut worst: f64 = 0.0;
    let mut firings = usize::MAX;
    for amps in [25e-9, 50e-9, 100e-9] {
        let expected = 1.0 / (c.neuron.charge_gain * amps);
        c.waveform = Waveform::Constant { amps };
        c.duration_steps = 105 * ((expected / dt).ceil() as u64 + 1);
        let t = match run(&c) {
            Ok(t) => t,
            Err(e) => return gate.error("2 integrate-and-fire period oracle", e),
        };
        firings = firings.min(t.spikes.len().saturating_sub(1));
        for w in t.spikes.windows(2) {
            let period = (w[1].step - w[0].step) as f64 * dt;
            worst = worst.max((period - expected).abs() / dt);
        }
    }
    let (fast, t) = within(Duration::from_secs(1), start.elapsed());
    gate.record(
        "2 integrate-and-fire period oracle",
        worst <= 1.0 && firings >= 100 && fast,
        format!("worst deviation {worst:.3} steps over >= {firings} periods per current; {t}"),
    );
}

fn criterion_3(gate: &mut Gate, ramp: &ExperimentConfig) {
    let mut base = ramp.sim.clone();
    base.neuron.charge_gain = RAMP_TARGET_RATE / (base.n_neurons() as f64 * 50e-9);
    let start = Instant::now();
    let k = match calibrate_charge_gain(RAMP_TARGET_RATE, &base) {
        Ok(k) => k,
        Err(e) => return gate.error("3 rate calibration", e),
    };
    let elapsed = start.elapsed();
    let mut verify = base.clone();
    verify.neuron.charge_gain = k;
    let rate = match run(&verify) {
        Ok(t) => t.mean_rate(),
        Err(e) => return gate.error("3 rate calibration", e),
    };
    let rel = (rate - RAMP_TARGET_RATE) / RAMP_TARGET_RATE;
    let (fast, t) = within(Duration::from_secs(30), elapsed);
    gate.record(
        "3 rate calibration",
        rel.abs() <= 0.05 && fast,
        format!(
            "charge_gain {k:.4e}; verification over {} steps: {:.3} spikes/us ({:+.2}%); calibration {t}",
            verify.duration_steps,
            rate * 1e-6,
            100.0 * rel
        ),
    );
}

fn criterion_4(gate: &mut Gate, sine: &ExperimentConfig) {
    let start = Instant::now();
    let mut c = sine.sim.clone();
    c.mismatch = MismatchSpec::none();
    let r = match run(&c).and_then(|t| reconstruct(&t, &sine.recon)) {
        Ok(r) => r,
        Err(e) => return gate.error("4 sine reconstruction", e),
    };
    let (fast, t) = within(Duration::from_secs(30), start.elapsed());
    gate.record(
        "4 sine reconstruction",
        r.rms_pct <= 10.0 && fast,
        format!("held-out RMS error {:.3}% (limit 10%); {t}", r.rms_pct),
    );
}

fn criterion_5(gate: &mut Gate, sine: &ExperimentConfig) {
    let start = Instant::now();
    let r = match monte_carlo(&sine.sim, &sine.recon, 30) {
        Ok(r) => r,
        Err(e) => return gate.error("5 Monte Carlo robustness", e),
    };
    let worst = r.per_trial_rms_pct.iter().cloned().fold(0.0, f64::max);
    let (fast, t) = within(Duration::from_secs(300), start.elapsed());
    gate.record(
        "5 Monte Carlo robustness",
        (4.0..=12.0).contains(&r.mean_pct) && r.std_pct <= 4.0 && worst <= 20.0 && fast,
        format!(
            "30 trials, sigma {:.2}/{:.2}: mean {:.3}%, std {:.3}%, worst {:.3}%; {t}",
            sine.sim.mismatch.sigma_exc, sine.sim.mismatch.sigma_inh, r.mean_pct, r.std_pct, worst
        ),
    );
}

fn criterion_6(gate: &mut Gate, ramp: &ExperimentConfig) {
    // Synthetic linear encoder: counts proportional to the reference.
    let counts = CountSeries {
        window_steps: 1,
        values: (0..=200).collect(),
        start_time_seconds: 0.0,
    };
    let reference: Vec<f64> = counts.values.iter().map(|&c| c as f64 * 0.5e-9).collect();
    let identity_err = match fit_compensation(&counts, &reference, 1.0) {
        Ok(table) => {
            let grid: Vec<f64> = (0..=1000).map(|i| i as f64 / 1000.0).collect();
            apply_compensation(&grid, &table)
                .iter()
                .zip(&grid)
                .map(|(y, x)| (y - x).abs())
                .fold(0.0, f64::max)
        }
        Err(e) => return gate.error("6 compensation round trip", e),
    };

    let rt = match run(&ramp.sim).and_then(|t| ramp_round_trip(&t, &ramp.recon)) {
        Ok(rt) => rt,
        Err(e) => return gate.error("6 compensation round trip", e),
    };
    gate.record(
        "6 compensation round trip",
        rt.monotone && rt.max_abs_error <= 0.10 && identity_err <= 1e-6,
        format!(
            "ramp preset: fresh-period estimate monotone = {}, max abs error {:.3} of full scale (limit 0.10); \
             synthetic identity error {identity_err:.1e} (limit 1e-6)",
            rt.monotone, rt.max_abs_error
        ),
    );
}

fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

/// Small random arrays exercising every knob.
fn arb_sim() -> impl Strategy<Value = SimConfig> {
    let scan = (1usize..=3, 1usize..=8, 1u32..=12);
    let neuron = (
        log_uniform(1e11, 1e14),
        prop_oneof![Just(f64::INFINITY), log_uniform(1e-7, 1e-6)],
        log_uniform(1e-7, 1e-4),
        prop_oneof![Just(f64::INFINITY), log_uniform(1e-6, 1e-3)],
        1.0f64..3.0,
    );
    let policy = (
        0u32..=12,
        0u32..3,
        0u32..=12,
        0u32..3,
        prop::option::of(0usize..6),
        any::<bool>(),
    );
    let input = prop_oneof![
        (0.0f64..300e-9).prop_map(|amps| Waveform::Constant { amps }),
        (0.0f64..300e-9, 1e-6f64..1e-4).prop_map(|(max_amps, period_seconds)| Waveform::Sawtooth {
            min_amps: 0.0,
            max_amps,
            period_seconds
        }),
    ];
    (
        scan,
        neuron,
        policy,
        input,
        any::<bool>(),
        20u64..400,
        any::<u64>(),
    )
        .prop_map(
            |(
                (rows, cols, ticks),
                (k, clamp, i_inh, leak, v_max),
                (base, dec, min, jitter, fanout, enabled),
                waveform,
                mismatch,
                steps,
                seed,
            )| {
                let base = base.min(ticks);
                let mut c = SimConfig {
                    scan: ScanConfig {
                        rows,
                        cols,
                        scan_step_seconds: 30e-9,
                        gen_ticks_per_step: ticks,
                    },
                    neuron: NeuronParams {
                        charge_gain: k,
                        i_exc_max: clamp,
                        i_inh,
                        leak_tau: leak,
                        v_max,
                        ..NeuronParams::default()
                    },
                    policy: InhibitionPolicy {
                        base_width_ticks: base,
                        decrement_ticks: dec,
                        min_width_ticks: min.min(base),
                        jitter_ticks: jitter,
                        fanout: fanout.map_or(Fanout::All, Fanout::Limited),
                        enabled,
                    },
                    waveform,
                    mismatch: if mismatch {
                        MismatchSpec::default()
                    } else {
                        MismatchSpec::none()
                    },
                    duration_steps: steps,
                    seed,
                    record_membrane: false,
                };
                c.sync_tick();
                c
            },
        )
}

fn criterion_7(gate: &mut Gate) {
    property(
        gate,
        "7a single spike per step, from the selected neuron",
        arb_sim(),
        |c| {
            let mut e = Engine::new(c.clone()).map_err(|e| TestCaseError::fail(e.to_string()))?;
            for step in 0..c.duration_steps {
                let selected = e.cursor().linear_id(&c.scan);
                if let Some(s) = e.step().map_err(|e| TestCaseError::fail(e.to_string()))? {
                    prop_assert_eq!(s.step, step);
                    prop_assert_eq!(s.id, selected);
                    prop_assert_eq!(s.id, s.row * c.scan.cols + s.col);
                }
            }
            Ok(())
        },
    );

    property(
        gate,
        "7b ground and saturation clamps",
        (
            arb_sim(),
            -1.0f64..4.0,
            0.0f64..1e-6,
            0u32..=12,
            any::<bool>(),
        ),
        |(c, v0, i_in, width, reset)| {
            let p = c.neuron;
            let n = NeuronState {
                v: v0.clamp(0.0, p.v_max),
                ..NeuronState::new(1.3, 0.7)
            };
            let up = n.integrate(&p, i_in, c.scan.scan_step_seconds).unwrap();
            prop_assert!((0.0..=p.v_max).contains(&up.v));
            let down = up.apply_pulse(&p, width, reset);
            prop_assert!((0.0..=p.v_max).contains(&down.v));
            let mut e = Engine::new(c.clone()).unwrap();
            for _ in 0..c.duration_steps {
                e.step().unwrap();
                for s in e.neurons() {
                    prop_assert!((0.0..=p.v_max).contains(&s.v), "v = {}", s.v);
                }
            }
            Ok(())
        },
    );

    property(
        gate,
        "7c firer is reset and its inhibited flag cleared",
        arb_sim(),
        |c| {
            let mut e = Engine::new(c.clone()).unwrap();
            for _ in 0..c.duration_steps {
                if let Some(s) = e.step().unwrap() {
                    let n = e.neurons()[s.id];
                    prop_assert_eq!(n.v, 0.0);
                    prop_assert!(!n.inhibited);
                }
            }
            Ok(())
        },
    );

    property(
        gate,
        "7d schedule widths bounded, deliveries consecutive",
        (
            arb_sim(),
            1usize..64,
            any::<prop::sample::Index>(),
            0u64..1_000_000,
            any::<u64>(),
        ),
        |(c, n, firer, step, seed)| {
            use rand::SeedableRng;
            let g = InhibitionGenerator::new(c.policy, c.scan.gen_ticks_per_step).unwrap();
            let firer = firer.index(n);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let ev = g.build_schedule(firer, step, n, &mut rng);
            prop_assert!(
                ev[0].is_self_reset && ev[0].target_id == firer && ev[0].delivery_step == step
            );
            prop_assert_eq!(ev[0].width_ticks, c.scan.gen_ticks_per_step);
            for (k, e) in ev.iter().enumerate().skip(1) {
                prop_assert_eq!(e.delivery_step, step + k as u64);
                prop_assert_eq!(e.target_id, (firer + k) % n);
                prop_assert!(e.width_ticks <= c.scan.gen_ticks_per_step);
                let ramp = (i64::from(c.policy.base_width_ticks)
                    - (k as i64 - 1) * i64::from(c.policy.decrement_ticks))
                .max(i64::from(c.policy.min_width_ticks));
                prop_assert!(
                    (i64::from(e.width_ticks) - ramp).abs() <= i64::from(c.policy.jitter_ticks)
                );
            }
            Ok(())
        },
    );

    property(
        gate,
        "7e scan order is a bijection per sweep",
        (1usize..40, 1usize..40, 0u64..10_000),
        |(rows, cols, sweep)| {
            let cfg = ScanConfig {
                rows,
                cols,
                ..ScanConfig::default()
            };
            let n = rows * cols;
            let mut cur = cfg.cursor_at(sweep * n as u64);
            prop_assert_eq!(cur, ScanCursor::default());
            let mut seen = vec![false; n];
            for k in 0..n {
                let id = cur.linear_id(&cfg);
                prop_assert_eq!(id, k);
                prop_assert!(!seen[id]);
                seen[id] = true;
                cur = cur.advance(&cfg);
            }
            prop_assert_eq!(cur, ScanCursor::default());
            Ok(())
        },
    );

    property(
        gate,
        "7f input clamp equivalence at 800 nA",
        (
            0.0f64..1.5,
            0.1f64..2.0,
            800e-9f64..1e-3,
            log_uniform(1e11, 1e14),
        ),
        |(v, g, i_in, k)| {
            let p = NeuronParams {
                charge_gain: k,
                i_exc_max: 800e-9,
                ..NeuronParams::default()
            };
            let n = NeuronState {
                v,
                ..NeuronState::new(g, 1.0)
            };
            let above = i_in.max(p.i_exc_max / g);
            let a = n.integrate(&p, above, 30e-9).unwrap();
            let b = n.integrate(&p, p.i_exc_max / g, 30e-9).unwrap();
            prop_assert_eq!(a.v.to_bits(), b.v.to_bits());
            Ok(())
        },
    );

    let counts = |c: &SimConfig, amps: f64| {
        let mut c = c.clone();
        c.waveform = Waveform::Constant { amps };
        run(&c)
            .map(|t| t.spikes.len())
            .map_err(|e| TestCaseError::fail(e.to_string()))
    };
    property(
        gate,
        "7g spike count monotone in input current",
        (arb_sim(), 0.0f64..300e-9, 0.0f64..300e-9),
        |(c, a, b)| {
            let (lo, hi) = (a.min(b), a.max(b));
            let (n_lo, n_hi) = (counts(&c, lo)?, counts(&c, hi)?);
            prop_assert!(
                n_lo <= n_hi,
                "{} spikes at {:.4e} A but {} at {:.4e} A",
                n_lo,
                lo,
                n_hi,
                hi
            );
            Ok(())
        },
    );
    property(
        gate,
        "7g' spike count monotone in input current, inhibition disabled",
        (arb_sim(), 0.0f64..300e-9, 0.0f64..300e-9),
        |(mut c, a, b)| {
            c.policy.enabled = false;
            let (lo, hi) = (a.min(b), a.max(b));
            let (n_lo, n_hi) = (counts(&c, lo)?, counts(&c, hi)?);
            prop_assert!(
                n_lo <= n_hi,
                "{} spikes at {:.4e} A but {} at {:.4e} A",
                n_lo,
                lo,
                n_hi,
                hi
            );
            Ok(())
        },
    );

    property(gate, "7h seed determinism", arb_sim(), |mut c| {
        c.record_membrane = true;
        let a = run(&c).unwrap();
        let b = run(&c).unwrap();
        prop_assert_eq!(&a.spikes, &b.spikes);
        let bits = |t: &neuroadc::engine::SimTrace| -> Vec<u64> {
            t.membrane
                .as_ref()
                .unwrap()
                .iter()
                .chain(&t.g_exc)
                .chain(&t.g_inh)
                .map(|v| v.to_bits())
                .collect()
        };
        prop_assert_eq!(bits(&a), bits(&b));
        Ok(())
    });
}

fn criterion_8(gate: &mut Gate) {
    let mut c = ExperimentConfig::default().sim;
    c.duration_steps = 100_000;
    let (rows, cols) = (c.scan.rows, c.scan.cols);
    let v_max = c.neuron.v_max;
    let start = Instant::now();
    let mut e = match Engine::new(c.clone()) {
        Ok(e) => e,
        Err(err) => return gate.error("8 7x30 smoke run", err),
    };
    let mut spikes = 0u64;
    let mut violations = 0u64;
    for step in 0..c.duration_steps {
        let selected = e.cursor().linear_id(&c.scan);
        match e.step() {
            Ok(Some(s)) => {
                spikes += 1;
                let n = e.neurons()[s.id];
                if s.step != step || s.id != selected || n.v != 0.0 || n.inhibited {
                    violations += 1;
                }
            }
            Ok(None) => {}
            Err(err) => return gate.error("8 7x30 smoke run", err),
        }
        if e.neurons().iter().any(|n| !(0.0..=v_max).contains(&n.v)) {
            violations += 1;
        }
    }
    let (fast, t) = within(Duration::from_secs(10), start.elapsed());
    gate.record(
        "8 7x30 smoke run",
        violations == 0 && spikes > 0 && fast,
        format!(
            "{rows}x{cols}, {} steps, {spikes} spikes, {violations} violations; {t}",
            c.duration_steps
        ),
    );
}

fn main() -> ExitCode {
    let mut gate = Gate { failures: 0 };
    let ramp = match config::preset("paper-ramp-10") {
        Ok(c) => c,
        Err(e) => {
            println!("FAIL preset paper-ramp-10: {e}");
            return ExitCode::FAILURE;
        }
    };
    let sine = config::sine_50();

    criterion_1(&mut gate);
    criterion_2(&mut gate);
    criterion_3(&mut gate, &ramp);
    criterion_4(&mut gate, &sine);
    criterion_5(&mut gate, &sine);
    criterion_6(&mut gate, &ramp);
    criterion_7(&mut gate);
    criterion_8(&mut gate);

    println!("acceptance: {} failing", gate.failures);
    if gate.failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
