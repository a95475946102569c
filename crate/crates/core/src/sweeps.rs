//! Parameter-space studies: fidelity maps over detuning and amplitude error,
//! log-log scaling fits, and fixed-point comparison tables.
//!
//! Maps work in units of the nominal Rabi frequency (`Ω0 = 1`), so the
//! rectangular π pulse lasts `T = π` and the detuning axis is `Δ/Ω0`.

use std::f64::consts::PI;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dd_model::{
    compose_phased, ideal_propagator, nominal_pulse_beta, run_fidelity, CycleModel, CycleParams,
    IntegratedCycle, SequenceRun,
};
use crate::error::{Error, Result};
use crate::pulse::{DriveConfig, IntegratorConfig, PulseShape};
use crate::sequences::{baseline, symmetric_ur, Baseline, PhaseSequence, Sign};
use crate::su2::{fidelity_unchecked, Unitary2};

/// Rectangular grid over `(Δ/Ω0, ε_a)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase", deny_unknown_fields)]
pub struct SweepGrid {
    pub detuning_range: (f64, f64),
    pub amplitude_range: (f64, f64),
    pub resolution: (usize, usize),
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid {
            detuning_range: (-0.5, 0.5),
            amplitude_range: (-0.5, 0.5),
            resolution: (101, 101),
        }
    }
}

fn axis(range: (f64, f64), n: usize) -> Vec<f64> {
    let (lo, hi) = range;
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

impl SweepGrid {
    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [
            ("detuningRange", self.detuning_range),
            ("amplitudeRange", self.amplitude_range),
        ] {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(Error::InvalidConfig(format!(
                    "{name} needs lo < hi, got ({lo}, {hi})"
                )));
            }
        }
        if self.resolution.0 < 2 || self.resolution.1 < 2 {
            return Err(Error::InvalidConfig(
                "resolution must be at least 2 per axis".into(),
            ));
        }
        if self.amplitude_range.0 < -1.0 {
            return Err(Error::InvalidConfig(
                "amplitude error below -1 flips the Rabi frequency".into(),
            ));
        }
        Ok(())
    }

    pub fn detunings(&self) -> Vec<f64> {
        axis(self.detuning_range, self.resolution.0)
    }

    pub fn amplitudes(&self) -> Vec<f64> {
        axis(self.amplitude_range, self.resolution.1)
    }
}

/// Pulse envelope used in maps, always normalised to area π at `Ω0 = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum MapPulse {
    #[default]
    Rectangular,
    /// Gaussian with the same duration `T = π`.
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapProtocol {
    /// Pulse separation in units of the pulse duration.
    pub tau_over_t: f64,
    pub pulse: MapPulse,
    pub integrator: IntegratorConfig,
}

impl Default for MapProtocol {
    fn default() -> Self {
        MapProtocol {
            tau_over_t: 4.0,
            pulse: MapPulse::Rectangular,
            integrator: IntegratorConfig::default(),
        }
    }
}

impl MapProtocol {
    fn shape(&self) -> PulseShape {
        match self.pulse {
            MapPulse::Rectangular => PulseShape::rectangular(PI, 1.0),
            MapPulse::Gaussian => PulseShape::gaussian(PI, 1.0).with_area(PI),
        }
    }

    fn validate(&self) -> Result<()> {
        self.integrator.validate()?;
        if !(self.tau_over_t >= 0.0 && self.tau_over_t.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "tauOverT must be non-negative, got {}",
                self.tau_over_t
            )));
        }
        Ok(())
    }
}

/// A fidelity map. `values[i * ny + j]` belongs to detuning `i`, amplitude `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct MapResult {
    pub grid: SweepGrid,
    pub sequence_name: String,
    pub total_pulses: usize,
    pub values: Vec<f64>,
    /// `1 - F` at each point, resolved below machine epsilon.
    pub errors: Vec<f64>,
}

impl MapResult {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.resolution.1 + j]
    }

    pub fn error(&self, i: usize, j: usize) -> f64 {
        self.errors[i * self.grid.resolution.1 + j]
    }
}

fn repetitions(seq: &PhaseSequence, total_pulses: usize) -> Result<usize> {
    let n = seq.n();
    if n == 0 || total_pulses == 0 || !total_pulses.is_multiple_of(n) {
        return Err(Error::NotDivisible {
            total: total_pulses,
            n,
        });
    }
    Ok(total_pulses / n)
}

/// Evaluates one sequence at arbitrary error points with a shared target.
struct PointEvaluator {
    phases: Vec<f64>,
    reps: usize,
    target: Unitary2,
    shape: PulseShape,
    tau: f64,
    integrator: IntegratorConfig,
}

impl PointEvaluator {
    fn new(seq: &PhaseSequence, total_pulses: usize, protocol: &MapProtocol) -> Result<Self> {
        protocol.validate()?;
        let reps = repetitions(seq, total_pulses)?;
        let shape = protocol.shape();
        let phases = seq.phases_radians();
        let beta = nominal_pulse_beta(&DriveConfig::new(shape), &protocol.integrator)?;
        Ok(PointEvaluator {
            target: ideal_propagator(&phases, beta).pow(reps),
            phases,
            reps,
            shape,
            tau: protocol.tau_over_t * shape.duration(),
            integrator: protocol.integrator,
        })
    }

    fn eval(&self, det_over_rabi: f64, amp_error: f64) -> Result<(f64, f64)> {
        let drive = DriveConfig::new(self.shape).with_errors(det_over_rabi, amp_error);
        let base = IntegratedCycle::new(drive, self.tau)
            .with_integrator(self.integrator)
            .base_propagator()?;
        let u = compose_phased(&base, &self.phases).pow(self.reps);
        let f = fidelity_unchecked(&u, &self.target);
        Ok((f.fidelity, f.error))
    }
}

/// Fidelity of `totalPulses / n` repetitions of `seq` over the grid.
/// Grid points are evaluated in parallel and stored by index.
pub fn fidelity_map(
    seq: &PhaseSequence,
    total_pulses: usize,
    grid: &SweepGrid,
    protocol: &MapProtocol,
) -> Result<MapResult> {
    grid.validate()?;
    let eval = PointEvaluator::new(seq, total_pulses, protocol)?;
    let dets = grid.detunings();
    let amps = grid.amplitudes();
    let ny = amps.len();
    let points: Vec<(f64, f64)> = (0..dets.len() * ny)
        .into_par_iter()
        .map(|k| eval.eval(dets[k / ny], amps[k % ny]))
        .collect::<Result<_>>()?;
    let (values, errors) = points.into_iter().unzip();
    Ok(MapResult {
        grid: *grid,
        sequence_name: seq.name.clone(),
        total_pulses,
        values,
        errors,
    })
}

/// `1 - F` of each sequence at one error point, sorted from best to worst
/// (ties keep input order).
pub fn comparison_table(
    sequences: &[PhaseSequence],
    total_pulses: usize,
    error_point: (f64, f64),
    protocol: &MapProtocol,
) -> Result<Vec<(String, f64)>> {
    let mut rows = sequences
        .iter()
        .map(|s| {
            let e = PointEvaluator::new(s, total_pulses, protocol)?;
            Ok((s.name.clone(), e.eval(error_point.0, error_point.1)?.1))
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok(rows)
}

/// Composed errors below this are treated as unresolved zeros in a fit.
pub const RESOLVABLE_ERROR: f64 = 1e-24;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRow {
    pub n: usize,
    /// `None` when fewer than two points were resolvable.
    pub slope: Option<f64>,
    pub points_used: usize,
}

/// Static phase point at which scaling is measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaticPoint {
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
}

impl Default for StaticPoint {
    fn default() -> Self {
        StaticPoint {
            alpha: 0.1,
            beta: 0.0,
            delta: 0.1,
        }
    }
}

/// `n = 2` is CPMG, larger even `n` the symmetric UR sequence.
pub fn family_member(n: usize) -> Result<PhaseSequence> {
    if n == 2 {
        Ok(baseline(Baseline::Cpmg))
    } else {
        symmetric_ur(n, Sign::Plus)
    }
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Log-spaced `1 - p` values covering `p ∈ [p_min, p_max]`.
pub fn infidelity_points(p_min: f64, p_max: f64, points: usize) -> Vec<f64> {
    let (lo, hi) = ((1.0 - p_max).ln(), (1.0 - p_min).ln());
    (0..points)
        .map(|i| (lo + (hi - lo) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

/// Slope of `log ε` against `log(1-p)` from composed static propagators.
pub fn scaling_fit(
    n_list: &[usize],
    p_range: (f64, f64),
    points: usize,
    at: &StaticPoint,
) -> Result<Vec<ScalingRow>> {
    let (p_min, p_max) = p_range;
    if !(0.0 < p_min && p_min < p_max && p_max < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "p range must satisfy 0 < pMin < pMax < 1, got ({p_min}, {p_max})"
        )));
    }
    if points < 2 {
        return Err(Error::InvalidConfig("need at least two points".into()));
    }
    let qs = infidelity_points(p_min, p_max, points);
    n_list
        .iter()
        .map(|&n| {
            let seq = family_member(n)?;
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for &q in &qs {
                let c = CycleParams::new(1.0 - q, at.alpha, at.beta, at.delta)?;
                let eps =
                    run_fidelity(&SequenceRun::new(seq.clone(), 1, CycleModel::Static(c)))?.error;
                if eps >= RESOLVABLE_ERROR {
                    xs.push(q.ln());
                    ys.push(eps.ln());
                }
            }
            let slope = (xs.len() >= 2).then(|| least_squares_slope(&xs, &ys));
            Ok(ScalingRow {
                n,
                slope,
                points_used: xs.len(),
            })
        })
        .collect()
}

pub const MAP_CSV_HEADER: &str = "det_over_rabi,amp_error,fidelity";

/// CSV rows ordered by detuning, then amplitude.
pub fn write_map_csv<W: Write>(out: &mut W, map: &MapResult) -> io::Result<()> {
    writeln!(out, "{MAP_CSV_HEADER}")?;
    let dets = map.grid.detunings();
    let amps = map.grid.amplitudes();
    for (i, d) in dets.iter().enumerate() {
        for (j, a) in amps.iter().enumerate() {
            writeln!(
                out,
                "{},{},{}",
                crate::format_float(*d),
                crate::format_float(*a),
                crate::format_float(map.value(i, j))
            )?;
        }
    }
    Ok(())
}

/// 16-bit plain PGM of `-log10(1 - F)` clamped to [0, 12]. Detuning runs
/// left to right, amplitude error bottom to top.
pub fn write_map_pgm<W: Write>(out: &mut W, map: &MapResult) -> io::Result<()> {
    let (nx, ny) = map.grid.resolution;
    writeln!(out, "P2")?;
    writeln!(out, "# -log10(1-F), 0..12 -> 0..65535")?;
    writeln!(out, "{nx} {ny}")?;
    writeln!(out, "65535")?;
    for j in (0..ny).rev() {
        let row: Vec<String> = (0..nx)
            .map(|i| {
                let e = map.error(i, j);
                let level = if e > 0.0 {
                    (-e.log10()).clamp(0.0, 12.0)
                } else {
                    12.0
                };
                ((level / 12.0 * 65535.0).round() as u32).to_string()
            })
            .collect();
        writeln!(out, "{}", row.join(" "))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::sequence_by_name;

    fn small_grid(n: usize) -> SweepGrid {
        SweepGrid {
            resolution: (n, n),
            ..Default::default()
        }
    }

    fn fast() -> MapProtocol {
        MapProtocol {
            integrator: IntegratorConfig::with_steps(64),
            ..Default::default()
        }
    }

    #[test]
    fn grid_validation() {
        assert!(SweepGrid::default().validate().is_ok());
        let g = SweepGrid {
            detuning_range: (0.5, 0.5),
            ..Default::default()
        };
        assert!(g.validate().is_err());
        assert!(small_grid(1).validate().is_err());
        let axis = small_grid(5).detunings();
        assert_eq!(axis, vec![-0.5, -0.25, 0.0, 0.25, 0.5]);
    }

    #[test]
    fn center_is_perfect() {
        for name in ["UR4", "UR10", "UR20", "CPMG", "KDD_XY4"] {
            let seq = sequence_by_name(name).unwrap();
            let map = fidelity_map(&seq, 120, &small_grid(3), &fast()).unwrap();
            assert!((map.value(1, 1) - 1.0).abs() < 1e-10, "{name}");
            assert!(map.values.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn indivisible_total_rejected() {
        let seq = sequence_by_name("UR16").unwrap();
        assert!(matches!(
            fidelity_map(&seq, 120, &small_grid(2), &fast()),
            Err(Error::NotDivisible { total: 120, n: 16 })
        ));
    }

    #[test]
    fn detuning_sign_symmetry() {
        let grid = SweepGrid {
            resolution: (9, 7),
            ..Default::default()
        };
        for name in ["UR4", "UR6", "UR8", "UR12", "UR20"] {
            let map = fidelity_map(&sequence_by_name(name).unwrap(), 120, &grid, &fast()).unwrap();
            for i in 0..9 {
                for j in 0..7 {
                    assert!((map.value(i, j) - map.value(8 - i, j)).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn evaluation_order_is_irrelevant() {
        let seq = sequence_by_name("UR8").unwrap();
        let grid = small_grid(6);
        let map = fidelity_map(&seq, 120, &grid, &fast()).unwrap();
        let eval = PointEvaluator::new(&seq, 120, &fast()).unwrap();
        let (dets, amps) = (grid.detunings(), grid.amplitudes());
        for k in (0..36).rev() {
            let (i, j) = (k / 6, k % 6);
            assert_eq!(eval.eval(dets[i], amps[j]).unwrap().0, map.value(i, j));
        }
    }

    #[test]
    fn zero_error_comparison() {
        let seqs: Vec<_> = ["CPMG", "XY4", "UR4", "UR8", "UR10", "UR20", "KDD_XY4"]
            .iter()
            .map(|n| sequence_by_name(n).unwrap())
            .collect();
        let rows = comparison_table(&seqs, 40 * 3, (0.0, 0.0), &fast()).unwrap();
        assert_eq!(rows.len(), seqs.len());
        assert!(rows.iter().all(|(_, e)| *e < 1e-10));
    }

    #[test]
    fn scaling_rejects_bad_ranges() {
        let at = StaticPoint::default();
        assert!(scaling_fit(&[4], (0.99, 0.95), 10, &at).is_err());
        assert!(scaling_fit(&[4], (0.0, 0.95), 10, &at).is_err());
        assert!(scaling_fit(&[4], (0.9, 0.95), 1, &at).is_err());
        assert!(scaling_fit(&[5], (0.9, 0.95), 4, &at).is_err());
    }

    #[test]
    fn node_is_flagged() {
        // UR4 (symmetric) vanishes identically when α + δ = 0.
        let at = StaticPoint {
            alpha: 0.0,
            beta: 0.3,
            delta: 0.0,
        };
        let rows = scaling_fit(&[4], (0.95, 0.99), 8, &at).unwrap();
        assert_eq!(rows[0].slope, None);
        assert_eq!(rows[0].points_used, 0);
    }

    #[test]
    fn csv_and_pgm_layout() {
        let seq = sequence_by_name("UR4").unwrap();
        let map = fidelity_map(&seq, 8, &small_grid(2), &fast()).unwrap();
        let mut csv = Vec::new();
        write_map_csv(&mut csv, &map).unwrap();
        let text = String::from_utf8(csv).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], MAP_CSV_HEADER);
        assert!(lines[1].starts_with("-5.0000000000000000e-1,-5.0000000000000000e-1,"));
        assert!(lines[2].starts_with("-5.0000000000000000e-1,5.0000000000000000e-1,"));

        let mut pgm = Vec::new();
        write_map_pgm(&mut pgm, &map).unwrap();
        let text = String::from_utf8(pgm).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "P2");
        assert_eq!(lines[2], "2 2");
        assert_eq!(lines[3], "65535");
        assert_eq!(lines.len(), 6);
    }
}
