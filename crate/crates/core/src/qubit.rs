//! Two-level numeric kernel: pure states on `{|0_Z>, |1_Z>}`, Bloch vectors,
//! 2x2 Hermitian eigenvalues and the binary entropy.

use num_complex::Complex64;

use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-12;

/// A normalized pure qubit state `a0 |0_Z> + a1 |1_Z>` with `a0` real and non-negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureQubitState {
    amplitude0: f64,
    amplitude1: Complex64,
}

impl PureQubitState {
    pub const ZERO: PureQubitState = PureQubitState {
        amplitude0: 1.0,
        amplitude1: Complex64::new(0.0, 0.0),
    };
    pub const ONE: PureQubitState = PureQubitState {
        amplitude0: 0.0,
        amplitude1: Complex64::new(1.0, 0.0),
    };

    /// Normalizes an arbitrary non-zero amplitude pair and removes the global
    /// phase so that the `|0_Z>` amplitude is real and non-negative.
    pub fn from_amplitudes(a0: Complex64, a1: Complex64) -> Result<Self> {
        let norm = (a0.norm_sqr() + a1.norm_sqr()).sqrt();
        if !norm.is_finite() || norm < f64::MIN_POSITIVE.sqrt() {
            return Err(Error::Domain("cannot normalize a zero vector".into()));
        }
        let (a0, a1) = (a0 / norm, a1 / norm);
        let r0 = a0.norm();
        let a1 = if r0 > NORM_TOL { a1 * (a0.conj() / r0) } else { a1 };
        Ok(PureQubitState {
            amplitude0: r0,
            amplitude1: a1,
        })
    }

    pub fn amplitude0(&self) -> f64 {
        self.amplitude0
    }

    pub fn amplitude1(&self) -> Complex64 {
        self.amplitude1
    }

    pub fn amplitudes(&self) -> [Complex64; 2] {
        [Complex64::new(self.amplitude0, 0.0), self.amplitude1]
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureQubitState) -> Complex64 {
        self.amplitude0 * other.amplitude0 + self.amplitude1.conj() * other.amplitude1
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitude0 * self.amplitude0 + self.amplitude1.norm_sqr()
    }
}

/// `cos(amp_angle)|0_Z> + sin(amp_angle) e^{i phase}|1_Z>`.
pub fn state_from_angles(amp_angle: f64, phase: f64) -> PureQubitState {
    let a0 = amp_angle.cos();
    let a1 = Complex64::from_polar(amp_angle.sin(), phase);
    // A negative cos only needs a sign flip; the vector is already unit length.
    if a0 < 0.0 {
        PureQubitState {
            amplitude0: -a0,
            amplitude1: -a1,
        }
    } else {
        PureQubitState {
            amplitude0: a0,
            amplitude1: a1,
        }
    }
}

/// Coefficients of `(I, X, Y, Z)` in `rho = (pI I + pX X + pY Y + pZ Z) / 2`.
///
/// Also used for measurement directions, where `pI` is the identity weight
/// of a projector `(I + n.sigma)/2` scaled by two.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    pub p_i: f64,
    pub p_x: f64,
    pub p_y: f64,
    pub p_z: f64,
}

impl BlochVector {
    pub const fn new(p_i: f64, p_x: f64, p_y: f64, p_z: f64) -> Self {
        BlochVector { p_i, p_x, p_y, p_z }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.p_i, self.p_x, self.p_y, self.p_z]
    }

    /// Squared length of the Pauli part.
    pub fn purity_radius_sqr(&self) -> f64 {
        self.p_x * self.p_x + self.p_y * self.p_y + self.p_z * self.p_z
    }

    pub fn dot(&self, other: &[f64; 4]) -> f64 {
        self.p_i * other[0] + self.p_x * other[1] + self.p_y * other[2] + self.p_z * other[3]
    }
}

pub fn bloch_of(state: &PureQubitState) -> BlochVector {
    let a0 = state.amplitude0;
    let a1 = state.amplitude1;
    BlochVector {
        p_i: 1.0,
        p_x: 2.0 * a0 * a1.re,
        p_y: 2.0 * a0 * a1.im,
        p_z: a0 * a0 - a1.norm_sqr(),
    }
}

/// A 2x2 Hermitian matrix `[[a11, a12], [conj(a12), a22]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Herm2 {
    pub a11: f64,
    pub a22: f64,
    pub a12: Complex64,
}

impl Herm2 {
    pub fn new(a11: f64, a22: f64, a12: Complex64) -> Self {
        Herm2 { a11, a22, a12 }
    }

    pub fn real(a11: f64, a22: f64, a12: f64) -> Self {
        Herm2::new(a11, a22, Complex64::new(a12, 0.0))
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12.norm_sqr()
    }
}

/// Eigenvalues `(lambda_min, lambda_max)`.
///
/// Uses the discriminant `(a11 - a22)^2 + 4|a12|^2`, which equals
/// `tr^2 - 4 det` but never goes negative through cancellation.
pub fn eig2(m: &Herm2) -> (f64, f64) {
    let half_tr = 0.5 * m.trace();
    let half_gap = 0.5 * (m.a11 - m.a22).hypot(2.0 * m.a12.norm());
    (half_tr - half_gap, half_tr + half_gap)
}

/// `h(x) = -x log2 x - (1-x) log2 (1-x)` with `0 log 0 = 0`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("binary entropy argument {x} outside [0, 1]")));
    }
    let term = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
    Ok(term(x) + term(1.0 - x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

    fn assert_state(s: &PureQubitState, a0: f64, re: f64, im: f64) {
        assert!((s.amplitude0() - a0).abs() < 1e-12, "{s:?}");
        assert!((s.amplitude1().re - re).abs() < 1e-12, "{s:?}");
        assert!((s.amplitude1().im - im).abs() < 1e-12, "{s:?}");
    }

    #[test]
    fn state_from_angles_examples() {
        assert_state(&state_from_angles(0.0, 0.0), 1.0, 0.0, 0.0);
        assert_state(&state_from_angles(FRAC_PI_2, 0.0), 0.0, 1.0, 0.0);
        assert_state(&state_from_angles(FRAC_PI_4, FRAC_PI_2), FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2);
    }

    #[test]
    fn negative_cosine_flips_global_sign() {
        let s = state_from_angles(2.0, 0.3);
        assert!(s.amplitude0() >= 0.0);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        let b = bloch_of(&s);
        // Bloch vector is blind to the global phase.
        let a = 2.0_f64;
        assert!((b.p_z - (2.0 * a).cos()).abs() < 1e-12);
    }

    #[test]
    fn bloch_examples() {
        let b = bloch_of(&PureQubitState::ZERO);
        assert_eq!(b.as_array(), [1.0, 0.0, 0.0, 1.0]);
        let plus = state_from_angles(FRAC_PI_4, 0.0);
        let b = bloch_of(&plus);
        for (got, want) in b.as_array().iter().zip([1.0, 1.0, 0.0, 0.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn from_amplitudes_fixes_phase() {
        let s = PureQubitState::from_amplitudes(Complex64::new(0.0, 2.0), Complex64::new(0.0, 2.0)).unwrap();
        assert_state(&s, FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0);
        assert!(PureQubitState::from_amplitudes(Complex64::default(), Complex64::default()).is_err());
    }

    #[test]
    fn eig2_examples() {
        assert_eq!(eig2(&Herm2::real(1.0, 1.0, 0.0)), (1.0, 1.0));
        let (lo, hi) = eig2(&Herm2::real(2.0, 0.0, 1.0));
        // Roots of x^2 - 2x - 1 = 0.
        assert!((lo - (1.0 - 2f64.sqrt())).abs() < 1e-12);
        assert!((hi - (1.0 + 2f64.sqrt())).abs() < 1e-12);
        assert!((lo + 0.41421356237309503).abs() < 1e-12);
        assert_eq!(eig2(&Herm2::real(0.0, 0.0, 0.0)), (0.0, 0.0));
    }

    #[test]
    fn eig2_matches_characteristic_polynomial_bisection() {
        // Independent root finder on det(M - x I) = x^2 - tr x + det.
        let m = Herm2::new(0.3, -1.7, Complex64::new(0.4, -0.9));
        let p = |x: f64| x * x - m.trace() * x + m.det();
        let bisect = |mut a: f64, mut b: f64| {
            for _ in 0..200 {
                let c = 0.5 * (a + b);
                if p(a).signum() == p(c).signum() { a = c } else { b = c }
            }
            0.5 * (a + b)
        };
        let mid = 0.5 * m.trace();
        let (lo, hi) = eig2(&m);
        assert!((lo - bisect(-100.0, mid)).abs() < 1e-10);
        assert!((hi - bisect(mid, 100.0)).abs() < 1e-10);
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        // -0.11 log2 0.11 - 0.89 log2 0.89
        assert!((binary_entropy(0.11).unwrap() - 0.499_915_958_164_528_4).abs() < 1e-12);
        assert!(binary_entropy(-0.01).is_err());
        assert!(binary_entropy(1.5).is_err());
        assert!(binary_entropy(f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn pure_states_have_unit_bloch_radius(a in -10.0f64..10.0, phi in -10.0f64..10.0) {
            let b = bloch_of(&state_from_angles(a, phi));
            prop_assert!((b.purity_radius_sqr() - 1.0).abs() < 1e-10);
            prop_assert_eq!(b.p_i, 1.0);
        }

        #[test]
        fn eig2_trace_det_identities(a in -5.0f64..5.0, d in -5.0f64..5.0, re in -5.0f64..5.0, im in -5.0f64..5.0) {
            let m = Herm2::new(a, d, Complex64::new(re, im));
            let (lo, hi) = eig2(&m);
            prop_assert!(lo <= hi);
            prop_assert!((lo + hi - m.trace()).abs() < 1e-10);
            prop_assert!((lo * hi - m.det()).abs() < 1e-10 * (1.0 + m.det().abs()) * 10.0);
        }

        #[test]
        fn entropy_symmetric(x in 0.0f64..=1.0) {
            let h = binary_entropy(x).unwrap();
            prop_assert!((h - binary_entropy(1.0 - x).unwrap()).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&h));
        }
    }
}
