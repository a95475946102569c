//! Phase sequences for dynamical decoupling.
//!
//! Universally robust (UR) sequences of even length `n ≥ 4` use
//!
//! ```text
//!   phi_k = (k-1)(k-2)/2 · Φ(n) + (k-1) · phi2,    k = 1..n
//!   Φ(4m) = ±π/m,    Φ(4m+2) = ±2mπ/(2m+1)
//! ```
//!
//! Phases are held as exact rational multiples of π and only converted to
//! radians when a propagator is built.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use crate::error::{Error, Result};

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// A phase `num/den · π`, reduced modulo 2π so that `0 ≤ num < 2·den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PiFraction {
    num: i64,
    den: i64,
}

impl PiFraction {
    pub const ZERO: PiFraction = PiFraction { num: 0, den: 1 };

    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidRational(format!("{num}/{den}")));
        }
        let (num, den) = if den < 0 { (-num, -den) } else { (num, den) };
        let g = gcd(num, den).max(1);
        let (num, den) = (num / g, den / g);
        Ok(PiFraction {
            num: num.rem_euclid(2 * den),
            den,
        })
    }

    pub fn num(&self) -> i64 {
        self.num
    }

    pub fn den(&self) -> i64 {
        self.den
    }

    pub fn radians(&self) -> f64 {
        self.num as f64 / self.den as f64 * PI
    }

    /// Value in units of π, in [0, 2).
    pub fn over_pi(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn times(self, k: i64) -> PiFraction {
        // Reduce the multiplier first so the product stays small.
        let k = k.rem_euclid(2 * self.den);
        PiFraction::new(self.num * k, self.den).expect("nonzero denominator")
    }
}

impl Add for PiFraction {
    type Output = PiFraction;

    fn add(self, other: PiFraction) -> PiFraction {
        let g = gcd(self.den, other.den);
        let den = self.den / g * other.den;
        let num = self.num * (den / self.den) + other.num * (den / other.den);
        PiFraction::new(num, den).expect("nonzero denominator")
    }
}

impl Neg for PiFraction {
    type Output = PiFraction;

    fn neg(self) -> PiFraction {
        PiFraction::new(-self.num, self.den).expect("nonzero denominator")
    }
}

impl Sub for PiFraction {
    type Output = PiFraction;

    fn sub(self, other: PiFraction) -> PiFraction {
        self + -other
    }
}

impl fmt::Display for PiFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for PiFraction {
    type Err = Error;

    /// Accepts `"num/den"` or a bare integer, both in units of π.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidRational(s.to_string());
        let t = s.trim();
        match t.split_once('/') {
            Some((n, d)) => {
                let n: i64 = n.trim().parse().map_err(|_| bad())?;
                let d: i64 = d.trim().parse().map_err(|_| bad())?;
                PiFraction::new(n, d).map_err(|_| bad())
            }
            None => {
                let n: i64 = t.parse().map_err(|_| bad())?;
                PiFraction::new(n, 1)
            }
        }
    }
}

/// Branch of Φ(n).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sign {
    #[default]
    Plus,
    Minus,
}

impl Sign {
    fn factor(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

impl FromStr for Sign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "+" | "plus" | "+1" | "1" => Ok(Sign::Plus),
            "-" | "minus" | "-1" => Ok(Sign::Minus),
            _ => Err(Error::InvalidConfig(format!(
                "sign must be + or -, got `{s}`"
            ))),
        }
    }
}

/// An ordered list of pulse phases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseSequence {
    pub name: String,
    pub phases: Vec<PiFraction>,
    /// Second-pulse phase parameter, where the family defines one.
    pub phi2: Option<PiFraction>,
    /// Φ(n) for UR sequences.
    pub big_phi: Option<PiFraction>,
}

impl PhaseSequence {
    pub fn n(&self) -> usize {
        self.phases.len()
    }

    pub fn phases_radians(&self) -> Vec<f64> {
        self.phases.iter().map(PiFraction::radians).collect()
    }

    /// Same sequence with `offset` added to every phase.
    pub fn with_offset(&self, offset: PiFraction) -> PhaseSequence {
        PhaseSequence {
            name: self.name.clone(),
            phases: self.phases.iter().map(|&p| p + offset).collect(),
            phi2: self.phi2.map(|p| p + offset),
            big_phi: self.big_phi,
        }
    }

    pub fn is_palindrome(&self) -> bool {
        let n = self.n();
        (0..n).all(|k| self.phases[k] == self.phases[n - 1 - k])
    }
}

fn check_ur_order(n: usize) -> Result<()> {
    if n < 4 {
        return Err(Error::InvalidOrder {
            n,
            reason: "UR sequences need at least four pulses",
        });
    }
    if !n.is_multiple_of(2) {
        return Err(Error::InvalidOrder {
            n,
            reason: "UR sequences need an even number of pulses",
        });
    }
    Ok(())
}

/// Φ(n) for a UR sequence of even order `n ≥ 4`.
pub fn big_phi(n: usize, sign: Sign) -> Result<PiFraction> {
    check_ur_order(n)?;
    let m = (n / 4) as i64;
    let s = sign.factor();
    if n.is_multiple_of(4) {
        PiFraction::new(s, m)
    } else {
        PiFraction::new(s * 2 * m, 2 * m + 1)
    }
}

/// UR phases for an arbitrary second-pulse phase `phi2`.
pub fn ur_phases(n: usize, phi2: PiFraction, sign: Sign) -> Result<PhaseSequence> {
    let phi = big_phi(n, sign)?;
    let phases = (1..=n as i64)
        .map(|k| phi.times((k - 1) * (k - 2) / 2) + phi2.times(k - 1))
        .collect();
    Ok(PhaseSequence {
        name: format!("UR{n}"),
        phases,
        phi2: Some(phi2),
        big_phi: Some(phi),
    })
}

/// The symmetric (palindromic) UR sequence, `phi2 = Φ(n)`.
pub fn symmetric_ur(n: usize, sign: Sign) -> Result<PhaseSequence> {
    let phi = big_phi(n, sign)?;
    let mut seq = ur_phases(n, phi, sign)?;
    if sign == Sign::Minus {
        seq.name = format!("UR{n}-");
    }
    Ok(seq)
}

/// Literature comparison sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    Cpmg,
    Xy4,
    Xy8,
    Kdd,
    KddXy4,
}

impl Baseline {
    pub const ALL: [Baseline; 5] = [
        Baseline::Cpmg,
        Baseline::Xy4,
        Baseline::Xy8,
        Baseline::Kdd,
        Baseline::KddXy4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Baseline::Cpmg => "CPMG",
            Baseline::Xy4 => "XY4",
            Baseline::Xy8 => "XY8",
            Baseline::Kdd => "KDD",
            Baseline::KddXy4 => "KDD_XY4",
        }
    }
}

impl FromStr for Baseline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_uppercase().replace('-', "_");
        Baseline::ALL
            .into_iter()
            .find(|b| b.name() == key)
            .ok_or_else(|| Error::UnknownSequence(s.to_string()))
    }
}

fn frac(num: i64, den: i64) -> PiFraction {
    PiFraction::new(num, den).expect("nonzero denominator")
}

const KDD_BLOCK: [(i64, i64); 5] = [(1, 6), (0, 1), (1, 2), (0, 1), (1, 6)];

/// Phase list of a baseline sequence.
pub fn baseline(which: Baseline) -> PhaseSequence {
    let quarter = frac(1, 2);
    let (phases, phi2): (Vec<PiFraction>, Option<PiFraction>) = match which {
        Baseline::Cpmg => (vec![PiFraction::ZERO; 2], Some(PiFraction::ZERO)),
        Baseline::Xy4 => (
            [0, 1, 0, 1].iter().map(|&k| quarter.times(k)).collect(),
            Some(quarter),
        ),
        Baseline::Xy8 => (
            [0, 1, 0, 1, 1, 0, 1, 0]
                .iter()
                .map(|&k| quarter.times(k))
                .collect(),
            Some(quarter),
        ),
        Baseline::Kdd => (KDD_BLOCK.iter().map(|&(a, b)| frac(a, b)).collect(), None),
        Baseline::KddXy4 => {
            let phases = [0, 1, 0, 1]
                .iter()
                .flat_map(|&k| {
                    let offset = quarter.times(k);
                    KDD_BLOCK.iter().map(move |&(a, b)| frac(a, b) + offset)
                })
                .collect();
            (phases, None)
        }
    };
    PhaseSequence {
        name: which.name().to_string(),
        phases,
        phi2,
        big_phi: None,
    }
}

/// Look up a sequence by label: `CPMG`, `XY4`, `XY8`, `KDD`, `KDD_XY4`, or
/// `URn` / `URn-` for the symmetric UR sequence with the `+` / `-` branch.
pub fn sequence_by_name(name: &str) -> Result<PhaseSequence> {
    let t = name.trim();
    if let Ok(b) = t.parse::<Baseline>() {
        return Ok(baseline(b));
    }
    let upper = t.to_ascii_uppercase();
    if let Some(rest) = upper.strip_prefix("UR") {
        let (digits, sign) = match rest.strip_suffix('-') {
            Some(d) => (d, Sign::Minus),
            None => (rest.strip_suffix('+').unwrap_or(rest), Sign::Plus),
        };
        if let Ok(n) = digits.parse::<usize>() {
            return symmetric_ur(n, sign);
        }
    }
    Err(Error::UnknownSequence(name.to_string()))
}

/// Rotation angle χ of the phase gate obtained from a UR sequence whose
/// second phase is `phi2`, measured against the reference `phi_tilde`:
/// `χ = n (phi2 - phi_tilde) / 2`.
///
/// With ideal pulses the sequence propagator equals
/// `exp(i χ σ_z) · U0` where `U0` is the target for `phi2 = phi_tilde`.
pub fn phase_gate_angle(n: usize, phi2: f64, phi_tilde: f64) -> f64 {
    n as f64 * (phi2 - phi_tilde) / 2.0
}
