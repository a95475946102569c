//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::ThreadPoolBuilder;

use urdd_core::dd_model::{
    analytic_error_cpmg, analytic_error_ur, run_fidelity, CycleModel, CycleParams, SequenceRun,
};
use urdd_core::ensemble::{
    storage_curves, write_storage_csv, DdProtocol, EnsembleSpec, PulseModel,
};
use urdd_core::pulse::{pulse_propagator, rect_oracle, DriveConfig, IntegratorConfig, PulseShape};
use urdd_core::sequences::{
    baseline, sequence_by_name, symmetric_ur, ur_phases, Baseline, PhaseSequence, PiFraction, Sign,
};
use urdd_core::su2::{angle_diff, extract_params};
use urdd_core::sweeps::{
    comparison_table, fidelity_map, scaling_fit, write_map_csv, MapProtocol, StaticPoint, SweepGrid,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn frac(num: i64, den: i64) -> PiFraction {
    PiFraction::new(num, den).unwrap()
}

/// `(n, numerators, common denominator, Φ as (num, den))`, as printed.
type Row = (usize, &'static [i64], i64, (i64, i64));

const TABLE: [Row; 7] = [
    (4, &[0, 1, 1, 0], 1, (1, 1)),
    (6, &[0, 2, 0, 0, 2, 0], 3, (2, 3)),
    (8, &[0, 1, 3, 2, 2, 3, 1, 0], 2, (1, 2)),
    (10, &[0, 4, 2, 4, 0, 0, 4, 2, 4, 0], 5, (4, 5)),
    (12, &[0, 1, 3, 0, 4, 3, 3, 4, 0, 3, 1, 0], 3, (1, 3)),
    (14, &[0, 6, 4, 8, 4, 6, 0, 0, 6, 4, 8, 4, 6, 0], 7, (6, 7)),
    (
        16,
        &[0, 1, 3, 6, 2, 7, 5, 4, 4, 5, 7, 2, 6, 3, 1, 0],
        4,
        (1, 4),
    ),
];

fn c1_table() -> Outcome {
    let mut bad = Vec::new();
    for (n, nums, den, (pn, pd)) in TABLE {
        for (sign, s) in [(Sign::Plus, 1), (Sign::Minus, -1)] {
            let seq = symmetric_ur(n, sign).unwrap();
            let want: Vec<PiFraction> = nums.iter().map(|&k| frac(s * k, den)).collect();
            if seq.phases != want || seq.big_phi != Some(frac(s * pn, pd)) {
                bad.push(format!("UR{n}{}", if s < 0 { "-" } else { "" }));
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!("7 rows x 2 branches, mismatches: {bad:?}"),
    )
}

fn random_static(rng: &mut ChaCha8Rng) -> (f64, f64, f64, f64) {
    (
        rng.random_range(0.0..=1.0),
        rng.random_range(-PI..PI),
        rng.random_range(-PI..PI),
        rng.random_range(-PI..PI),
    )
}

fn composed_error(seq: PhaseSequence, p: f64, alpha: f64, beta: f64, delta: f64) -> f64 {
    let c = CycleParams::new(p, alpha, beta, delta).unwrap();
    run_fidelity(&SequenceRun::new(seq, 1, CycleModel::Static(c)))
        .unwrap()
        .error
}

fn c2_ur_formula() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let n = 2 * rng.random_range(2..=12);
        let phi2 = frac(rng.random_range(0..120), 60);
        let sign = if rng.random_bool(0.5) {
            Sign::Plus
        } else {
            Sign::Minus
        };
        let (p, alpha, beta, delta) = random_static(&mut rng);
        let seq = ur_phases(n, phi2, sign).unwrap();
        let composed = composed_error(seq, p, alpha, beta, delta);
        let analytic = analytic_error_ur(n, p, alpha, delta, phi2.radians());
        worst = worst.max((composed - analytic).abs());
    }
    outcome(
        worst < 1e-11,
        format!("10^4 tuples, n in 4..=24, max |diff| = {worst:.2e}"),
    )
}

fn c3_cpmg_formula() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let phi2 = frac(rng.random_range(0..120), 60);
        let (p, alpha, beta, delta) = random_static(&mut rng);
        let seq = PhaseSequence {
            name: "CPMG".into(),
            phases: vec![PiFraction::ZERO, phi2],
            phi2: Some(phi2),
            big_phi: None,
        };
        let composed = composed_error(seq, p, alpha, beta, delta);
        let analytic = analytic_error_cpmg(p, alpha, delta, phi2.radians());
        worst = worst.max((composed - analytic).abs());
    }
    outcome(
        worst < 1e-12,
        format!("10^4 tuples, max |diff| = {worst:.2e}"),
    )
}

fn c4_scaling() -> Outcome {
    let ns = [2, 4, 8, 12, 16, 20];
    let rows = scaling_fit(&ns, (0.95, 0.99), 10, &StaticPoint::default()).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for r in &rows {
        let want = r.n as f64 / 2.0;
        let ok = r.slope.is_some_and(|s| (s - want).abs() <= 0.02);
        pass &= ok;
        parts.push(match r.slope {
            Some(s) => format!("n={} {s:.4}", r.n),
            None => format!("n={} none", r.n),
        });
    }
    outcome(pass, parts.join(", "))
}

fn fig2_grid() -> SweepGrid {
    SweepGrid::default()
}

fn map_csv(name: &str) -> Vec<u8> {
    let map = fidelity_map(
        &sequence_by_name(name).unwrap(),
        120,
        &fig2_grid(),
        &MapProtocol::default(),
    )
    .unwrap();
    let mut buf = Vec::new();
    write_map_csv(&mut buf, &map).unwrap();
    buf
}

fn c5_benchmark_point() -> Outcome {
    let seqs: Vec<_> = ["UR20", "KDD_XY4", "CPMG"]
        .iter()
        .map(|n| sequence_by_name(n).unwrap())
        .collect();
    let rows = comparison_table(&seqs, 120, (0.3, 0.3), &MapProtocol::default()).unwrap();
    let err = |name: &str| rows.iter().find(|r| r.0 == name).unwrap().1;
    let (ur20, kdd, cpmg) = (err("UR20"), err("KDD_XY4"), err("CPMG"));
    let start = Instant::now();
    let map = fidelity_map(&seqs[0], 120, &fig2_grid(), &MapProtocol::default()).unwrap();
    let elapsed = start.elapsed();
    let in_range = map.values.iter().all(|v| (0.0..=1.0).contains(v));
    outcome(
        ur20 < 1e-4 && kdd > ur20 && cpmg > 1e-2 && elapsed < Duration::from_secs(60) && in_range,
        format!(
            "1-F at (0.3, 0.3): UR20 {ur20:.3e}, KDD_XY4 {kdd:.3e}, CPMG {cpmg:.3e}; 101x101 map {:.2} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn c6_xy4() -> Outcome {
    let ur = ur_phases(4, frac(1, 2), Sign::Plus).unwrap();
    let xy4 = baseline(Baseline::Xy4);
    let show = |s: &PhaseSequence| {
        s.phases
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    outcome(
        ur.phases == xy4.phases,
        format!("({}) vs ({}) in units of pi", show(&ur), show(&xy4)),
    )
}

fn c7_integrator() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let rabi = rng.random_range(0.2..3.0);
        let duration = rng.random_range(0.2..4.0);
        let det = rng.random_range(-2.0..2.0);
        let amp = rng.random_range(-0.5..0.5);
        let phase = rng.random_range(-PI..PI);
        let cfg = DriveConfig::new(PulseShape::rectangular(duration, rabi))
            .with_errors(det, amp)
            .with_phase(phase);
        let u = pulse_propagator(&cfg, &IntegratorConfig::default()).unwrap();
        worst = worst.max(u.max_abs_diff(&rect_oracle(rabi * (1.0 + amp), det, duration, phase)));
    }

    // Rectangular pulses are exact per step, so order is measured on shaped pulses.
    let shapes = [
        PulseShape::gaussian(PI, 1.0).with_area(PI),
        PulseShape::ChirpedRectangular {
            duration: PI,
            peak_rabi: 1.0,
            chirp_rate: 0.4,
        },
    ];
    let mut orders = Vec::new();
    for shape in shapes {
        let cfg = DriveConfig::new(shape)
            .with_errors(0.3, 0.1)
            .with_phase(0.4);
        let reference = pulse_propagator(&cfg, &IntegratorConfig::with_steps(1 << 16)).unwrap();
        let errs: Vec<f64> = (0..5)
            .map(|k| {
                let u = pulse_propagator(&cfg, &IntegratorConfig::with_steps(32 << k)).unwrap();
                u.max_abs_diff(&reference)
            })
            .collect();
        orders.extend(errs.windows(2).map(|w| (w[0] / w[1]).log2()));
    }
    let second_order = orders.iter().all(|o| (o - 2.0).abs() < 0.1);
    outcome(
        worst < 1e-9 && second_order,
        format!(
            "max oracle deviation {worst:.2e}; observed orders over 4 doublings [{}]",
            orders
                .iter()
                .map(|o| format!("{o:.3}"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    )
}

fn c8_phase_imprint() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for k in 0..100 {
        let shape = match k % 3 {
            0 => PulseShape::rectangular(PI, 1.0),
            1 => PulseShape::gaussian(PI, 1.0).with_area(PI),
            _ => PulseShape::ChirpedRectangular {
                duration: PI,
                peak_rabi: 1.0,
                chirp_rate: rng.random_range(-0.5..0.5),
            },
        };
        let det = rng.random_range(0.05..0.5) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let amp = rng.random_range(-0.3..0.3);
        let phi = rng.random_range(-PI..PI);
        let base = DriveConfig::new(shape).with_errors(det, amp);
        let icfg = IntegratorConfig::default();
        let a = extract_params(&pulse_propagator(&base, &icfg).unwrap()).unwrap();
        let b = extract_params(&pulse_propagator(&base.with_phase(phi), &icfg).unwrap()).unwrap();
        let d = [
            (a.params.p - b.params.p).abs(),
            angle_diff(a.params.alpha, b.params.alpha).abs(),
            angle_diff(a.params.beta + phi, b.params.beta).abs(),
        ];
        worst = d.into_iter().fold(worst, f64::max);
    }
    outcome(
        worst < 1e-10,
        format!("100 configurations, max deviation {worst:.2e}"),
    )
}

fn pr_yso(n_qubits: usize) -> EnsembleSpec {
    EnsembleSpec {
        n_qubits,
        detuning_sigma: EnsembleSpec::sigma_from_dephasing_time(13e-6),
        rabi_spread: 0.1,
        rabi_offset: 0.0,
        drive_detuning: 0.0,
        t2: 500e-6,
        seed: 2718,
        initial_phase: Default::default(),
    }
}

fn pr_yso_protocol(tau: f64) -> DdProtocol {
    let t = 10e-6;
    DdProtocol::new(PulseShape::rectangular(t, PI / t), tau)
}

fn names(list: &[&str]) -> Vec<PhaseSequence> {
    list.iter().map(|n| sequence_by_name(n).unwrap()).collect()
}

fn ensemble_csv() -> Vec<u8> {
    let res = storage_curves(
        &pr_yso(2000),
        &pr_yso_protocol(40e-6),
        &names(&["CPMG", "UR10", "UR16", "KDD_XY4"]),
        &[1.2e-3, 6e-3],
    )
    .unwrap();
    let mut buf = Vec::new();
    write_storage_csv(&mut buf, &res).unwrap();
    buf
}

fn c9_ensemble() -> Outcome {
    let start = Instant::now();
    let spec = pr_yso(2000);
    // 120 pulses of 10 µs spaced by 40 µs.
    let long = storage_curves(
        &spec,
        &pr_yso_protocol(40e-6),
        &names(&["CPMG", "UR10"]),
        &[6e-3],
    )
    .unwrap()
    .remove(0);
    let (cpmg, ur10) = (long.proxy("CPMG").unwrap(), long.proxy("UR10").unwrap());

    // 240 pulses at τ = 5 µs, a whole number of both sequences.
    let short = storage_curves(
        &spec,
        &pr_yso_protocol(5e-6),
        &names(&["UR16", "KDD_XY4"]),
        &[3.6e-3],
    )
    .unwrap()
    .remove(0);
    let (ur16, kdd) = (
        short.proxy("UR16").unwrap(),
        short.proxy("KDD_XY4").unwrap(),
    );

    let ideal = DdProtocol {
        pulse_model: PulseModel::Ideal,
        ..pr_yso_protocol(40e-6)
    };
    let t = 1.2e-3;
    let decay = (-2.0 * t / spec.t2).exp();
    let ideal_res = storage_curves(&spec, &ideal, &names(&["CPMG", "UR10", "KDD_XY4"]), &[t])
        .unwrap()
        .remove(0);
    let ideal_dev = ideal_res
        .per_sequence
        .iter()
        .map(|(_, v)| (v / decay - 1.0).abs())
        .fold(0.0, f64::max);
    let elapsed = start.elapsed();
    let pass = ur10 > cpmg && ur16 > kdd && ideal_dev < 0.02 && elapsed < Duration::from_secs(300);
    outcome(
        pass,
        format!(
            "UR10 {ur10:.3e} vs CPMG {cpmg:.3e}; UR16 {ur16:.3e} vs KDD_XY4 {kdd:.3e}; \
             ideal-pulse relative deviation {ideal_dev:.1e}; {:.2} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn c10_determinism() -> Outcome {
    let in_pool = |threads: usize, f: fn() -> Vec<u8>| {
        ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(f)
    };
    let mut pass = true;
    let mut parts = Vec::new();
    let map: fn() -> Vec<u8> = || map_csv("UR20");
    for (label, f) in [("map", map), ("ensemble", ensemble_csv as fn() -> Vec<u8>)] {
        let a = f();
        let b = f();
        let one = in_pool(1, f);
        let many = in_pool(4, f);
        let same = a == b && a == one && a == many;
        pass &= same;
        parts.push(format!(
            "{label} {} bytes {}",
            a.len(),
            if same { "identical" } else { "differ" }
        ));
    }
    outcome(pass, parts.join("; ") + " across 2 runs and 1/4 threads")
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        ("symmetric UR phase table", c1_table),
        ("UR closed-form error", c2_ur_formula),
        ("CPMG closed-form error", c3_cpmg_formula),
        ("scaling exponents", c4_scaling),
        ("benchmark point and map runtime", c5_benchmark_point),
        ("XY4 identity", c6_xy4),
        ("integrator oracle and convergence", c7_integrator),
        ("phase-shift imprint", c8_phase_imprint),
        ("ensemble orderings", c9_ensemble),
        ("determinism", c10_determinism),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        failed += usize::from(!o.pass);
        println!(
            "{} criterion {:>2} {name}: {} [{:.2} s]",
            if o.pass { "PASS" } else { "FAIL" },
            k + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
