use proptest::prelude::*;

use neuroadc::config::{self, RAMP_TARGET_RATE};
use neuroadc::engine::{calibrate_charge_gain, run, MismatchSpec, SimConfig};
use neuroadc::inhibition::InhibitionPolicy;
use neuroadc::neuron::NeuronParams;
use neuroadc::scan::ScanConfig;
use neuroadc::stimulus::Waveform;

fn row(cols: usize) -> SimConfig {
    let mut c = SimConfig {
        scan: ScanConfig {
            rows: 1,
            cols,
            ..ScanConfig::default()
        },
        neuron: NeuronParams {
            charge_gain: 1e13,
            i_exc_max: f64::INFINITY,
            ..NeuronParams::default()
        },
        policy: InhibitionPolicy {
            enabled: false,
            ..InhibitionPolicy::default()
        },
        waveform: Waveform::Constant { amps: 50e-9 },
        mismatch: MismatchSpec::none(),
        duration_steps: 10_000,
        seed: 0,
        record_membrane: false,
    };
    c.sync_tick();
    c
}

#[test]
fn period_rounds_up_to_whole_sweeps() {
    for cols in [3usize, 7, 10] {
        let c = row(cols);
        let t = run(&c).unwrap();
        let sweep = cols as u64;
        let charge_per_sweep = c.neuron.charge_gain * 50e-9 * c.scan.sweep_seconds();
        let sweeps = (1.0 / charge_per_sweep - 1e-9).ceil() as u64;
        for id in 0..cols {
            let steps: Vec<u64> = t
                .spikes
                .iter()
                .filter(|s| s.id == id)
                .map(|s| s.step)
                .collect();
            assert!(steps.len() > 5);
            for w in steps.windows(2) {
                assert_eq!(w[1] - w[0], sweeps * sweep, "cols {cols} neuron {id}");
            }
        }
    }
}

#[test]
fn ramp_preset_spikes_densest_at_peak() {
    let c = config::preset("paper-ramp-10").unwrap();
    let t = run(&c.sim).unwrap();
    assert!(!t.spikes.is_empty());
    // Fold both periods onto one and bin at 5 us.
    let mut bins = [0usize; 10];
    for s in &t.spikes {
        let phase = s.time_seconds % 50e-6;
        bins[((phase / 5e-6) as usize).min(9)] += 1;
    }
    let peak = (0..10).max_by_key(|&i| bins[i]).unwrap();
    assert!(peak == 4 || peak == 5, "bins {bins:?}");
}

#[test]
fn calibrated_preset_rate_and_probe() {
    let c = config::preset("paper-ramp-10").unwrap();
    let mut one_period = c.sim.clone();
    one_period.duration_steps = (50e-6 / c.sim.scan.scan_step_seconds).ceil() as u64;
    let rate = |k: f64| {
        let mut cfg = one_period.clone();
        cfg.neuron.charge_gain = k;
        run(&cfg).unwrap().mean_rate()
    };
    let k = c.sim.neuron.charge_gain;
    let r = rate(k);
    assert!(
        (r - RAMP_TARGET_RATE).abs() <= 0.01 * RAMP_TARGET_RATE,
        "{r}"
    );
    assert!(rate(k) <= rate(2.0 * k));
}

#[test]
fn calibration_without_inhibition_is_tight() {
    let mut c = row(10);
    c.waveform = Waveform::ramp_sawtooth();
    c.duration_steps = 1667;
    let k = calibrate_charge_gain(RAMP_TARGET_RATE, &c).unwrap();
    c.neuron.charge_gain = k;
    let r = run(&c).unwrap().mean_rate();
    assert!((r - RAMP_TARGET_RATE).abs() <= 0.01 * RAMP_TARGET_RATE);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    /// Leak off, no clamps, inhibition off: each spike consumes one threshold.
    #[test]
    fn spikes_bounded_by_injected_charge(
        cols in 1usize..12,
        k in 1e12f64..1e14,
        amps in 0.0f64..300e-9,
        steps in 1u64..600,
        seed in any::<u64>(),
    ) {
        let mut c = row(cols);
        c.neuron.charge_gain = k;
        c.neuron.v_max = 1e12;
        c.mismatch = MismatchSpec::default();
        c.waveform = Waveform::Constant { amps };
        c.duration_steps = steps;
        c.seed = seed;
        let t = run(&c).unwrap();
        let charge: f64 = t.g_exc.iter().map(|g| k * g * amps * c.scan.scan_step_seconds * steps as f64).sum();
        prop_assert!(t.spikes.len() as f64 <= charge + cols as f64 + 1e-9);
    }

    #[test]
    fn spike_events_consistent(cols in 1usize..12, rows in 1usize..4, seed in any::<u64>()) {
        let mut c = row(cols);
        c.scan.rows = rows;
        c.policy.enabled = true;
        c.mismatch = MismatchSpec::default();
        c.seed = seed;
        c.duration_steps = 500;
        let t = run(&c).unwrap();
        for w in t.spikes.windows(2) {
            prop_assert!(w[1].step > w[0].step);
        }
        for s in &t.spikes {
            prop_assert_eq!(s.time_seconds, s.step as f64 * c.scan.scan_step_seconds);
            prop_assert_eq!(s.id, s.row * cols + s.col);
        }
    }
}
