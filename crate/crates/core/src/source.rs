//! Alice's imperfect source.
//!
//! The four emitted states carry three kinds of imperfection:
//! deterministic encoding-angle errors in the intensity modulator, beam
//! splitter and phase modulator; a weight `sin(theta)` in optical modes outside
//! the encoding qubit; and back-reflected Trojan light of mean photon number
//! `gamma`. Only the qubit component is ever materialized. The other modes enter
//! through norms and the orthogonality relations that the bounds rely on:
//!
//! * the off-mode component of each state is the same qubit state carried by an
//!   orthogonal mode,
//! * the Trojan vacuum `|v>` and every tagged state `|e_ja>` are mutually
//!   orthogonal (worst case).

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::polytope::Interval;
use crate::qubit::{bloch_of, eig2, state_from_angles, BlochVector, Herm2, PureQubitState};

/// Measurement / preparation basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Basis {
    Z,
    X,
    Y,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::Z, Basis::X, Basis::Y];
    /// The two bases whose correlations enter the coherence parameter.
    pub const PHASE: [Basis; 2] = [Basis::X, Basis::Y];

    pub fn index(self) -> usize {
        match self {
            Basis::Z => 0,
            Basis::X => 1,
            Basis::Y => 2,
        }
    }
}

/// One of the four states Alice prepares, `|phi_{j alpha}>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StateLabel {
    Z0,
    Z1,
    X0,
    Y0,
}

impl StateLabel {
    pub const ALL: [StateLabel; 4] = [StateLabel::Z0, StateLabel::Z1, StateLabel::X0, StateLabel::Y0];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn basis(self) -> Basis {
        match self {
            StateLabel::Z0 | StateLabel::Z1 => Basis::Z,
            StateLabel::X0 => Basis::X,
            StateLabel::Y0 => Basis::Y,
        }
    }

    pub fn bit(self) -> usize {
        match self {
            StateLabel::Z1 => 1,
            _ => 0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StateLabel::Z0 => "0Z",
            StateLabel::Z1 => "1Z",
            StateLabel::X0 => "0X",
            StateLabel::Y0 => "0Y",
        }
    }
}

/// How the off-mode angle depends on the prepared state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThetaMode {
    /// Same angle for every state.
    Independent(f64),
    /// Angle proportional to the modulator setting used for each state.
    Dependent(f64),
}

/// Device imperfections of Alice's source. Angles in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceSpec {
    pub delta_im1: f64,
    pub delta_im2: f64,
    pub delta_bs1: f64,
    pub delta_bs2: f64,
    pub delta_pm1: f64,
    pub delta_pm2: f64,
    pub theta_mode: ThetaMode,
    /// Mean photon number of the back-reflected Trojan light.
    pub gamma: f64,
}

impl Default for SourceSpec {
    fn default() -> Self {
        SourceSpec {
            delta_im1: 0.0,
            delta_im2: 0.0,
            delta_bs1: 0.0,
            delta_bs2: 0.0,
            delta_pm1: 0.0,
            delta_pm2: 0.0,
            theta_mode: ThetaMode::Independent(0.0),
            gamma: 0.0,
        }
    }
}

impl SourceSpec {
    pub fn validate(&self) -> Result<()> {
        let theta = match self.theta_mode {
            ThetaMode::Independent(t) | ThetaMode::Dependent(t) => t,
        };
        let angles = [
            self.delta_im1,
            self.delta_im2,
            self.delta_bs1,
            self.delta_bs2,
            self.delta_pm1,
            self.delta_pm2,
            theta,
        ];
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::Domain("source angles must be finite".into()));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::Domain(format!("gamma must be finite and >= 0, got {}", self.gamma)));
        }
        Ok(())
    }
}

/// The four flawed qubit states in `StateLabel::ALL` order.
pub fn build_flawed_states(spec: &SourceSpec) -> [PureQubitState; 4] {
    [
        state_from_angles(0.5 * spec.delta_im1, 0.0),
        state_from_angles(FRAC_PI_2 - 0.5 * spec.delta_im2, 0.0),
        state_from_angles(FRAC_PI_4 - 0.5 * spec.delta_bs1, spec.delta_pm1),
        state_from_angles(FRAC_PI_4 - 0.5 * spec.delta_bs2, FRAC_PI_2 + spec.delta_pm2),
    ]
}

/// Amplitudes of the Trojan state on the untagged vacuum and on the
/// state-dependent component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrojanAmplitudes {
    pub t_i: f64,
    pub t_d: f64,
}

pub fn trojan_amplitudes(gamma: f64) -> Result<TrojanAmplitudes> {
    if !(gamma >= 0.0) {
        return Err(Error::Domain(format!("Trojan intensity must be >= 0, got {gamma}")));
    }
    Ok(TrojanAmplitudes {
        t_i: (-0.5 * gamma).exp(),
        // expm1 keeps precision at gamma ~ 1e-10
        t_d: (-(-gamma).exp_m1()).sqrt(),
    })
}

/// Off-mode angle per state, in `StateLabel::ALL` order.
pub fn theta_assignment(spec: &SourceSpec) -> [f64; 4] {
    match spec.theta_mode {
        ThetaMode::Independent(t) => [t; 4],
        ThetaMode::Dependent(t) => [
            (0.5 * spec.delta_im1 + PI) * t,
            (0.5 * spec.delta_im2 + PI) * t,
            spec.delta_pm1 * t,
            (spec.delta_pm2 + FRAC_PI_2) * t,
        ],
    }
}

/// Qubit-space component of an emitted single-photon state and its off-mode angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmittedState {
    pub label: StateLabel,
    pub qubit: PureQubitState,
    pub bloch: BlochVector,
    pub theta: f64,
}

pub fn emitted_states(spec: &SourceSpec) -> [EmittedState; 4] {
    let states = build_flawed_states(spec);
    let thetas = theta_assignment(spec);
    StateLabel::ALL.map(|label| {
        let qubit = states[label.index()];
        EmittedState {
            label,
            qubit,
            bloch: bloch_of(&qubit),
            theta: thetas[label.index()],
        }
    })
}

/// For `|psi> = |a> + |r>` with `<a|r> = 0`, `R = ||r||^2`, `0 <= D <= I` and
/// `u = <a|D|a>`, the remainder `<psi|D|psi> - u` lies in `slack`, and the
/// triangle inequality for `D^(1/2)` gives `|sqrt(<psi|D|psi>) - sqrt(u)| <= sqrt(R)`.
/// Both hold, so each direction intersects the two.
fn qubit_term_from_yield(y: Interval, remainder: f64, slack: (f64, f64)) -> Interval {
    let r = remainder.sqrt();
    Interval::new(
        (y.lo - slack.1).max((y.lo.max(0.0).sqrt() - r).max(0.0).powi(2)),
        (y.hi - slack.0).min((y.hi.max(0.0).sqrt() + r).powi(2)),
    )
}

fn yield_from_qubit_term(u: Interval, remainder: f64, slack: (f64, f64)) -> Interval {
    let r = remainder.sqrt();
    Interval::new(
        (u.lo + slack.0).max((u.lo.max(0.0).sqrt() - r).max(0.0).powi(2)),
        (u.hi + slack.1).min((u.hi.max(0.0).sqrt() + r).powi(2)),
    )
}

/// Coefficients bounding the yield of one prepared state.
///
/// The state splits as `sqrt(qubit_weight) |a> + |r>` with `|a>` the
/// Trojan-free qubit component and `|r>` the off-mode plus tagged remainder.
/// For any `0 <= D <= I` the yield is `qubit_weight * (V . q) + Tr(D K)` with
/// `K = [[R, G], [G, 0]]` on `span{r, a}`, `R = ||r||^2`, `G = sqrt(qubit_weight R)`,
/// so the remainder lies between the eigenvalues of `K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PracticalCoefficients {
    /// Weight of the Trojan-free qubit component, `cos^2 theta T_I^2`.
    pub qubit_weight: f64,
    /// Off-mode weight, `sin^2 theta (T_I^2 + T_D^2)`.
    pub off_mode_weight: f64,
    /// Tagged Trojan weight, `cos^2 theta T_D^2`.
    pub tagged_weight: f64,
    /// `R = off_mode_weight + tagged_weight`
    pub remainder_weight: f64,
    /// `G = sqrt(qubit_weight R)`
    pub coherence: f64,
    /// `(lambda_min, lambda_max)` of `K`.
    pub slack: (f64, f64),
}

impl PracticalCoefficients {
    /// Range of the qubit term `qubit_weight * (V . q)` consistent with a yield in `y`.
    pub fn qubit_term_bounds(&self, y: Interval) -> Interval {
        qubit_term_from_yield(y, self.remainder_weight, self.slack)
    }
}

pub fn practical_coefficients(state: &EmittedState, trojan: &TrojanAmplitudes) -> PracticalCoefficients {
    let (s, c) = state.theta.sin_cos();
    let ti2 = trojan.t_i * trojan.t_i;
    let td2 = trojan.t_d * trojan.t_d;
    let qubit_weight = c * c * ti2;
    let off_mode_weight = s * s * (ti2 + td2);
    let tagged_weight = c * c * td2;
    let remainder_weight = off_mode_weight + tagged_weight;
    let coherence = (qubit_weight * remainder_weight).sqrt();
    PracticalCoefficients {
        qubit_weight,
        off_mode_weight,
        tagged_weight,
        remainder_weight,
        coherence,
        slack: eig2(&Herm2::real(remainder_weight, 0.0, coherence)),
    }
}

/// Coefficients of one branch of the virtual entanglement-based protocol:
/// Alice measures her half of the Z-basis entangled state in `alice_basis`
/// and obtains `bit`.
///
/// `2 |psi_vir> = sqrt(qubit_weight) |gamma> + sqrt(off_weight) |gamma_perp>`
/// where `|gamma>` is the normalized qubit part. The weights are Gram norms of
/// the unnormalized sums, so `probability = (qubit_weight + off_weight) / 4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VirtualCoefficients {
    pub alice_basis: Basis,
    pub bit: usize,
    /// `F_j = || Gamma_0Z + w Gamma_1Z ||^2`
    pub qubit_weight: f64,
    /// `H_j = || Gamma_0Z^perp + w Gamma_1Z^perp ||^2`
    pub off_weight: f64,
    /// `G_j = sqrt(F_j H_j)`
    pub coherence: f64,
    pub slack: (f64, f64),
    /// Probability that Alice's virtual measurement returns `bit`.
    pub probability: f64,
    /// Bloch vector of the normalized qubit part `|gamma>`.
    pub bloch: BlochVector,
}

impl VirtualCoefficients {
    /// Objective whose dot product with `(q_I, q_X, q_Y, q_Z)` gives the linear
    /// part of the unnormalized virtual yield.
    pub fn objective(&self) -> [f64; 4] {
        self.bloch.as_array().map(|v| self.qubit_weight * v)
    }

    /// Range of `|| |Gamma_0Z> + w |Gamma_1Z> ||_D^2` given the range of `objective . q`.
    pub fn yield_bounds(&self, linear: Interval) -> Interval {
        yield_from_qubit_term(linear, self.off_weight, self.slack)
    }
}

/// Relative phase `(-1)^bit e^{i phi}` between the Z-basis branches selected by
/// Alice's virtual outcome; `phi = 0` for X and `pi/2` for Y.
fn branch_phase(alice_basis: Basis, bit: usize) -> Result<Complex64> {
    let sign = if bit == 0 { 1.0 } else { -1.0 };
    match alice_basis {
        Basis::X => Ok(Complex64::new(sign, 0.0)),
        Basis::Y => Ok(Complex64::new(0.0, sign)),
        Basis::Z => Err(Error::Domain("virtual branches exist only for X and Y".into())),
    }
}

pub fn virtual_coefficients(
    spec: &SourceSpec,
    trojan: &TrojanAmplitudes,
    alice_basis: Basis,
    bit: usize,
) -> Result<VirtualCoefficients> {
    if bit > 1 {
        return Err(Error::Domain(format!("bit must be 0 or 1, got {bit}")));
    }
    let w = branch_phase(alice_basis, bit)?;
    let states = build_flawed_states(spec);
    let thetas = theta_assignment(spec);
    let (phi0, phi1) = (states[0], states[1]);
    let (s0, c0) = thetas[0].sin_cos();
    let (s1, c1) = thetas[1].sin_cos();
    let ti2 = trojan.t_i * trojan.t_i;
    let td2 = trojan.t_d * trojan.t_d;

    let cross = (w * phi0.inner(&phi1)).re;
    let qubit_weight = (ti2 * (c0 * c0 + c1 * c1 + 2.0 * cross * c0 * c1)).max(0.0);
    let off_weight = (ti2 * (s0 * s0 + s1 * s1 + 2.0 * cross * s0 * s1) + 2.0 * td2).max(0.0);
    let coherence = (qubit_weight * off_weight).sqrt();
    let probability = 0.5 * (1.0 + ti2 * (thetas[0] - thetas[1]).cos() * cross);

    if qubit_weight == 0.0 && off_weight == 0.0 && probability > 1e-12 {
        return Err(Error::Consistency(format!(
            "virtual branch {alice_basis:?}{bit} has zero weight but probability {probability}"
        )));
    }

    let [a0, a1] = phi0.amplitudes().map(|a| a * c0);
    let [b0, b1] = phi1.amplitudes().map(|a| a * c1 * w);
    let bloch = match PureQubitState::from_amplitudes(a0 + b0, a1 + b1) {
        Ok(g) => bloch_of(&g),
        // No qubit component: the linear term carries zero weight anyway.
        Err(_) => BlochVector::new(1.0, 0.0, 0.0, 0.0),
    };

    Ok(VirtualCoefficients {
        alice_basis,
        bit,
        qubit_weight,
        off_weight,
        coherence,
        slack: eig2(&Herm2::real(off_weight, 0.0, coherence)),
        probability,
        bloch,
    })
}

/// Everything the bound engine needs from the source.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    pub spec: SourceSpec,
    pub trojan: TrojanAmplitudes,
    pub states: [EmittedState; 4],
    pub practical: [PracticalCoefficients; 4],
    /// Indexed `[alice basis (X, Y)][bit]`.
    pub virtual_branches: [[VirtualCoefficients; 2]; 2],
}

impl CoefficientSet {
    pub fn build(spec: &SourceSpec) -> Result<Self> {
        spec.validate()?;
        let trojan = trojan_amplitudes(spec.gamma)?;
        let states = emitted_states(spec);
        let practical = states.map(|s| practical_coefficients(&s, &trojan));
        let mut branches = Vec::with_capacity(4);
        for basis in Basis::PHASE {
            for bit in 0..2 {
                branches.push(virtual_coefficients(spec, &trojan, basis, bit)?);
            }
        }
        Ok(CoefficientSet {
            spec: *spec,
            trojan,
            states,
            practical,
            virtual_branches: [[branches[0], branches[1]], [branches[2], branches[3]]],
        })
    }

    pub fn virtual_branch(&self, alice_basis: Basis, bit: usize) -> &VirtualCoefficients {
        let row = match alice_basis {
            Basis::Y => 1,
            _ => 0,
        };
        &self.virtual_branches[row][bit]
    }
}
