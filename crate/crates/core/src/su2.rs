//! Exact algebra of 2×2 unitary propagators.
//!
//! A single imperfect inversion pulse is described by three numbers: the
//! transition probability `p` and two phases `alpha`, `beta`. The matching
//! special-unitary matrix is
//!
//! ```text
//!   [  sqrt(1-p) e^{ i alpha}   sqrt(p) e^{ i beta}  ]
//!   [ -sqrt(p)   e^{-i beta}    sqrt(1-p) e^{-i alpha} ]
//! ```
//!
//! A phase shift of the drive by `phi` maps `beta -> beta + phi` and leaves
//! `p` and `alpha` untouched.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Maximum entrywise deviation of `U U†` from the identity accepted as unitary.
pub const UNITARITY_TOL: f64 = 1e-10;

/// Amplitudes below this are treated as exactly zero when reading phases off a matrix.
const DEGENERATE_AMPLITUDE: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Reduce an angle to the half-open interval (-π, π].
pub fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

/// Smallest signed difference `a - b` modulo 2π.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    wrap_angle(a - b)
}

/// `e^{i x}`
#[inline]
pub fn expi(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, x)
}

/// A 2×2 complex matrix, used for unitary propagators.
#[derive(Clone, Copy, PartialEq)]
pub struct Unitary2 {
    pub m: [[Complex64; 2]; 2],
}

impl fmt::Debug for Unitary2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            self.m[0][0], self.m[0][1], self.m[1][0], self.m[1][1]
        )
    }
}

impl Unitary2 {
    pub const IDENTITY: Unitary2 = Unitary2 {
        m: [[ONE, ZERO], [ZERO, ONE]],
    };

    pub fn new(u11: Complex64, u12: Complex64, u21: Complex64, u22: Complex64) -> Self {
        Unitary2 {
            m: [[u11, u12], [u21, u22]],
        }
    }

    pub fn diag(d1: Complex64, d2: Complex64) -> Self {
        Unitary2::new(d1, ZERO, ZERO, d2)
    }

    /// `exp(-i angle σ_z / 2)`
    pub fn rz(angle: f64) -> Self {
        Unitary2::diag(expi(-angle / 2.0), expi(angle / 2.0))
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        Unitary2::new(
            m[0][0].conj(),
            m[1][0].conj(),
            m[0][1].conj(),
            m[1][1].conj(),
        )
    }

    pub fn trace(&self) -> Complex64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn det(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let m = &self.m;
        Unitary2::new(m[0][0] * c, m[0][1] * c, m[1][0] * c, m[1][1] * c)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Unitary2) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                d = d.max((self.m[i][j] - other.m[i][j]).norm());
            }
        }
        d
    }

    /// Largest entrywise deviation of `U U†` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        (*self * self.adjoint()).max_abs_diff(&Unitary2::IDENTITY)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }

    /// `self` raised to a non-negative integer power by repeated squaring.
    pub fn pow(&self, mut k: usize) -> Self {
        let mut result = Unitary2::IDENTITY;
        let mut base = *self;
        while k > 0 {
            if k & 1 == 1 {
                result = base * result;
            }
            base = base * base;
            k >>= 1;
        }
        result
    }

    /// Apply to a state vector `(c0, c1)`.
    pub fn apply(&self, psi: [Complex64; 2]) -> [Complex64; 2] {
        let m = &self.m;
        [
            m[0][0] * psi[0] + m[0][1] * psi[1],
            m[1][0] * psi[0] + m[1][1] * psi[1],
        ]
    }

    /// Agreement up to a global phase: `min_θ max|self - e^{iθ} other|`, with θ
    /// taken from the phase of `Tr(other† self)`.
    pub fn phase_insensitive_diff(&self, other: &Unitary2) -> f64 {
        let t = (other.adjoint() * *self).trace();
        let phase = if t.norm() > 0.0 { t / t.norm() } else { ONE };
        self.max_abs_diff(&other.scale(phase))
    }
}

impl Mul for Unitary2 {
    type Output = Unitary2;

    #[inline]
    fn mul(self, rhs: Unitary2) -> Unitary2 {
        let a = &self.m;
        let b = &rhs.m;
        Unitary2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

/// The `(p, alpha, beta)` description of one imperfect pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseParams {
    /// Transition probability in [0, 1].
    pub p: f64,
    /// Diagonal phase, in (-π, π].
    pub alpha: f64,
    /// Off-diagonal phase, in (-π, π].
    pub beta: f64,
}

impl PulseParams {
    pub fn new(p: f64, alpha: f64, beta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidProbability(p));
        }
        Ok(PulseParams {
            p,
            alpha: wrap_angle(alpha),
            beta: wrap_angle(beta),
        })
    }
}

/// Propagator of a pulse with the given parameters. Its determinant is 1.
pub fn make_propagator(params: &PulseParams) -> Result<Unitary2> {
    let PulseParams { p, alpha, beta } = *params;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    let c = (1.0 - p).sqrt();
    let s = p.sqrt();
    let ea = expi(alpha);
    let eb = expi(beta);
    Ok(Unitary2::new(c * ea, s * eb, -s * eb.conj(), c * ea.conj()))
}

/// Shift the drive phase of a pulse: `beta -> beta + phi`.
pub fn apply_phase_shift(params: &PulseParams, phi: f64) -> PulseParams {
    PulseParams {
        beta: wrap_angle(params.beta + phi),
        ..*params
    }
}

/// Which phase could not be read off during extraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degeneracy {
    /// `p = 0`: `beta` is undefined and reported as 0.
    NoTransition,
    /// `p = 1`: `alpha` is undefined and reported as 0.
    FullTransition,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extraction {
    pub params: PulseParams,
    /// Global phase `g` with `U = e^{ig} make_propagator(params)`, `g ∈ (-π/2, π/2]`.
    pub global_phase: f64,
    pub degeneracy: Option<Degeneracy>,
}

/// Inverse of [`make_propagator`] for an arbitrary 2×2 unitary.
///
/// The global phase is fixed by `det(e^{-ig} U) = 1` with `g ∈ (-π/2, π/2]`.
pub fn extract_params(u: &Unitary2) -> Result<Extraction> {
    let dev = u.unitarity_deviation();
    if dev > UNITARITY_TOL {
        return Err(Error::NotUnitary(dev));
    }
    let mut g = u.det().arg() / 2.0;
    if g <= -FRAC_PI_2 {
        g += PI;
    }
    let v = u.scale(expi(-g));
    let a = v.m[0][0];
    let b = v.m[0][1];

    let mut degeneracy = None;
    let (p, alpha, beta);
    if b.norm() <= DEGENERATE_AMPLITUDE {
        p = 0.0;
        alpha = a.arg();
        beta = 0.0;
        degeneracy = Some(Degeneracy::NoTransition);
    } else if a.norm() <= DEGENERATE_AMPLITUDE {
        p = 1.0;
        alpha = 0.0;
        beta = b.arg();
        degeneracy = Some(Degeneracy::FullTransition);
    } else {
        // |a|² + |b|² = 1 up to rounding; normalise so p stays in [0, 1].
        let na = a.norm_sqr();
        let nb = b.norm_sqr();
        p = nb / (na + nb);
        alpha = a.arg();
        beta = b.arg();
    }
    Ok(Extraction {
        params: PulseParams {
            p,
            alpha: wrap_angle(alpha),
            beta: wrap_angle(beta),
        },
        global_phase: g,
        degeneracy,
    })
}

/// Product of propagators with the first element acting first:
/// `compose([U1, U2, ..., Un]) = Un ... U2 U1`.
pub fn compose(us: &[Unitary2]) -> Result<Unitary2> {
    let (first, rest) = us.split_first().ok_or(Error::EmptyComposition)?;
    Ok(rest.iter().fold(*first, |acc, u| *u * acc))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fidelity {
    /// `|Tr(U0† U)| / 2`, in [0, 1].
    pub fidelity: f64,
    /// `1 - fidelity`, computed without cancellation.
    pub error: f64,
}

/// Gate fidelity of `u` against the target `u0`.
///
/// With `W = U0† U`, the error is evaluated as
/// `(|W11 - W22|²/4 + (|W12|² + |W21|²)/2) / (1 + F)`, which equals `1 - F`
/// for unitary `W` but keeps full relative precision when the error is far
/// below machine epsilon.
pub fn fidelity(u: &Unitary2, u0: &Unitary2) -> Result<Fidelity> {
    for m in [u, u0] {
        let dev = m.unitarity_deviation();
        if dev > UNITARITY_TOL {
            return Err(Error::NotUnitary(dev));
        }
    }
    Ok(fidelity_unchecked(u, u0))
}

pub(crate) fn fidelity_unchecked(u: &Unitary2, u0: &Unitary2) -> Fidelity {
    let w = u0.adjoint() * *u;
    let f = (w.trace().norm() / 2.0).min(1.0);
    let off = (w.m[0][1].norm_sqr() + w.m[1][0].norm_sqr()) / 2.0;
    let diag = (w.m[0][0] - w.m[1][1]).norm_sqr() / 4.0;
    let error = ((diag + off) / (1.0 + f)).clamp(0.0, 1.0);
    Fidelity { fidelity: f, error }
}
