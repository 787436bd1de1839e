//! Deterministic analytic channel and detection model.
//!
//! Fiber with loss `alpha` dB/km, two threshold detectors of efficiency
//! `eta_det` and dark-count probability `p_dark` per gate, and a reference
//! frame rotated by `omega` around Z. A double click is assigned to either
//! outcome with probability 1/2, handled in expectation. Only the qubit
//! component of each emitted state reaches the detectors.
//!
//! With `a_s` the probability that detector `s` stays silent and `a_none` the
//! probability that both stay silent, outcome `s` is recorded with probability
//! `(1 - a_s) - (1 - a_0 - a_1 + a_none) / 2`.

use crate::error::{Error, Result};
use crate::qubit::BlochVector;
use crate::source::{Basis, EmittedState, StateLabel};

/// Bob's basis-choice probabilities `(Z, X, Y)`.
pub const BOB_BASIS_PROBABILITIES: [f64; 3] = [0.5, 0.25, 0.25];
/// Probability of each of Alice's four states.
pub const ALICE_STATE_PROBABILITY: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub distance_km: f64,
    pub alpha_db_per_km: f64,
    pub eta_det: f64,
    pub p_dark: f64,
    /// Reference-frame rotation of Bob's X/Y axes, radians.
    pub omega: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        ChannelParams {
            distance_km: 0.0,
            alpha_db_per_km: 0.21,
            eta_det: 0.2,
            p_dark: 1e-6,
            omega: std::f64::consts::FRAC_PI_8,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.distance_km >= 0.0 && self.distance_km.is_finite()) {
            return Err(Error::Parameter(format!("distance must be >= 0, got {}", self.distance_km)));
        }
        if !(self.alpha_db_per_km >= 0.0 && self.alpha_db_per_km.is_finite()) {
            return Err(Error::Parameter(format!("fiber loss must be >= 0, got {}", self.alpha_db_per_km)));
        }
        if !(0.0..=1.0).contains(&self.eta_det) {
            return Err(Error::Parameter(format!("detector efficiency {} outside [0, 1]", self.eta_det)));
        }
        if !(0.0..=1.0).contains(&self.p_dark) {
            return Err(Error::Parameter(format!("dark-count probability {} outside [0, 1]", self.p_dark)));
        }
        if !self.omega.is_finite() {
            return Err(Error::Parameter("omega must be finite".into()));
        }
        Ok(())
    }

    pub fn at_distance(&self, distance_km: f64) -> Self {
        ChannelParams { distance_km, ..*self }
    }
}

/// Overall single-photon detection probability, fiber and detector.
pub fn transmittance(ch: &ChannelParams) -> f64 {
    ch.eta_det * 10f64.powf(-ch.alpha_db_per_km * ch.distance_km / 10.0)
}

/// Bloch form `(1, +-n)` of Bob's projector `(I + (-1)^s n.sigma)/2`,
/// expressed in Alice's frame.
pub fn bob_measurement_bloch(basis: Basis, outcome: usize, omega: f64) -> BlochVector {
    let (s, c) = omega.sin_cos();
    let n = match basis {
        Basis::Z => [0.0, 0.0, 1.0],
        Basis::X => [c, s, 0.0],
        Basis::Y => [-s, c, 0.0],
    };
    let sign = if outcome == 0 { 1.0 } else { -1.0 };
    BlochVector::new(1.0, sign * n[0], sign * n[1], sign * n[2])
}

/// `Tr(rho Pi)` for a state and a projector, both in Bloch form.
fn projection(state: &BlochVector, projector: &BlochVector) -> f64 {
    0.5 * (state.p_i * projector.p_i
        + state.p_x * projector.p_x
        + state.p_y * projector.p_y
        + state.p_z * projector.p_z)
}

fn assign_outcomes(silent0: f64, silent1: f64, silent_both: f64) -> [f64; 2] {
    let double = (1.0 - silent0 - silent1 + silent_both).max(0.0);
    [
        (1.0 - silent0 - 0.5 * double).clamp(0.0, 1.0),
        (1.0 - silent1 - 0.5 * double).clamp(0.0, 1.0),
    ]
}

/// Conditional click probabilities indexed `[state][bob basis][outcome]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct YieldTable([[[f64; 2]; 3]; 4]);

impl YieldTable {
    pub fn get(&self, state: StateLabel, basis: Basis, outcome: usize) -> f64 {
        self.0[state.index()][basis.index()][outcome]
    }

    pub fn set(&mut self, state: StateLabel, basis: Basis, outcome: usize, value: f64) {
        self.0[state.index()][basis.index()][outcome] = value;
    }

    pub fn from_fn(mut f: impl FnMut(StateLabel, Basis, usize) -> f64) -> Self {
        let mut t = YieldTable::default();
        for state in StateLabel::ALL {
            for basis in Basis::ALL {
                for s in 0..2 {
                    t.set(state, basis, s, f(state, basis, s));
                }
            }
        }
        t
    }

    pub fn iter(&self) -> impl Iterator<Item = (StateLabel, Basis, usize, f64)> + '_ {
        StateLabel::ALL.into_iter().flat_map(move |state| {
            Basis::ALL
                .into_iter()
                .flat_map(move |basis| (0..2).map(move |s| (state, basis, s, self.get(state, basis, s))))
        })
    }

    /// Click probability in `bob_basis` averaged over Alice's states in `alice_basis`.
    pub fn gain(&self, alice_basis: Basis, bob_basis: Basis) -> f64 {
        let states = states_in(alice_basis);
        let total: f64 = states
            .iter()
            .map(|&st| self.get(st, bob_basis, 0) + self.get(st, bob_basis, 1))
            .sum();
        total / states.len() as f64
    }

    /// Averaged probability of a click that disagrees with Alice's bit.
    pub fn error_gain(&self, alice_basis: Basis, bob_basis: Basis) -> f64 {
        let states = states_in(alice_basis);
        let total: f64 = states.iter().map(|&st| self.get(st, bob_basis, 1 - st.bit())).sum();
        total / states.len() as f64
    }

    pub fn error_rate(&self, alice_basis: Basis, bob_basis: Basis) -> f64 {
        let gain = self.gain(alice_basis, bob_basis);
        if gain > 0.0 {
            self.error_gain(alice_basis, bob_basis) / gain
        } else {
            0.0
        }
    }
}

fn states_in(basis: Basis) -> Vec<StateLabel> {
    StateLabel::ALL.into_iter().filter(|s| s.basis() == basis).collect()
}

/// Click probabilities for exactly one photon in each emitted state.
pub fn single_photon_yields(states: &[EmittedState; 4], ch: &ChannelParams) -> YieldTable {
    photon_number_yields(states, ch, 1)
}

/// Click probabilities for an `n`-photon Fock input. The `n` photons reach the
/// detectors independently, so both stay silent with probability `(1 - eta)^n`.
pub fn photon_number_yields(states: &[EmittedState; 4], ch: &ChannelParams, n: u32) -> YieldTable {
    let eta = transmittance(ch);
    let dark_silent = 1.0 - ch.p_dark;
    let n = n as i32;
    YieldTable::from_fn(|state, basis, s| {
        let rho = &states[state.index()].bloch;
        let p0 = projection(rho, &bob_measurement_bloch(basis, 0, ch.omega));
        let p1 = 1.0 - p0;
        let silent0 = dark_silent * (1.0 - eta * p0).powi(n);
        let silent1 = dark_silent * (1.0 - eta * p1).powi(n);
        let silent_both = dark_silent * dark_silent * (1.0 - eta).powi(n);
        assign_outcomes(silent0, silent1, silent_both)[s]
    })
}

/// Click probabilities for a phase-randomized coherent pulse of mean photon
/// number `intensity`. Poisson splitting makes the two detectors independent.
pub fn coherent_yields(states: &[EmittedState; 4], ch: &ChannelParams, intensity: f64) -> YieldTable {
    let eta = transmittance(ch);
    let dark_silent = 1.0 - ch.p_dark;
    YieldTable::from_fn(|state, basis, s| {
        let rho = &states[state.index()].bloch;
        let p0 = projection(rho, &bob_measurement_bloch(basis, 0, ch.omega));
        let p1 = 1.0 - p0;
        let silent0 = dark_silent * (-intensity * eta * p0).exp();
        let silent1 = dark_silent * (-intensity * eta * p1).exp();
        assign_outcomes(silent0, silent1, silent0 * silent1)[s]
    })
}

/// Pulse intensities of the vacuum + weak decoy scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intensities {
    pub signal: f64,
    pub decoy: f64,
}

impl Intensities {
    pub fn validate(&self) -> Result<()> {
        if !(self.signal > self.decoy && self.decoy >= 0.0 && self.signal.is_finite()) {
            return Err(Error::Parameter(format!(
                "intensities require signal > decoy >= 0, got signal {} decoy {}",
                self.signal, self.decoy
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IntensityLevel {
    Signal,
    Decoy,
    Vacuum,
}

/// Observed (expected) statistics of one channel configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsTable {
    pub intensities: Intensities,
    /// Model truth for single-photon pulses; never visible to the estimator
    /// in the decoy path, kept for exact-yield runs and soundness checks.
    pub single_photon: YieldTable,
    pub signal: YieldTable,
    pub decoy: YieldTable,
    pub vacuum: YieldTable,
}

impl StatsTable {
    pub fn level(&self, level: IntensityLevel) -> &YieldTable {
        match level {
            IntensityLevel::Signal => &self.signal,
            IntensityLevel::Decoy => &self.decoy,
            IntensityLevel::Vacuum => &self.vacuum,
        }
    }

    pub fn intensity(&self, level: IntensityLevel) -> f64 {
        match level {
            IntensityLevel::Signal => self.intensities.signal,
            IntensityLevel::Decoy => self.intensities.decoy,
            IntensityLevel::Vacuum => 0.0,
        }
    }

    pub fn gain(&self, alice_basis: Basis, bob_basis: Basis, level: IntensityLevel) -> f64 {
        self.level(level).gain(alice_basis, bob_basis)
    }

    pub fn error_rate(&self, alice_basis: Basis, bob_basis: Basis, level: IntensityLevel) -> f64 {
        self.level(level).error_rate(alice_basis, bob_basis)
    }
}

pub fn wcs_statistics(states: &[EmittedState; 4], ch: &ChannelParams, intensities: Intensities) -> Result<StatsTable> {
    ch.validate()?;
    intensities.validate()?;
    Ok(StatsTable {
        intensities,
        single_photon: single_photon_yields(states, ch),
        signal: coherent_yields(states, ch, intensities.signal),
        decoy: coherent_yields(states, ch, intensities.decoy),
        vacuum: coherent_yields(states, ch, 0.0),
    })
}
