//! Decoy-state estimation, finite-size corrections and the secret key rate.
//!
//! Single-photon quantities come from the vacuum + weak decoy bounds
//!
//! ```text
//! Y1 >= mu / (mu nu - nu^2) * (Q_nu e^nu - Q_mu e^mu nu^2/mu^2 - (mu^2 - nu^2)/mu^2 Y0)
//! Y1 <= (Q_nu e^nu - Y0) / nu
//! e1 <= (E_nu Q_nu e^nu - e0 Y0) / (nu Y1_lower)
//! ```
//!
//! applied per `(state, bob basis, outcome)` for the transmission-rate
//! constraints and to the aggregated Z-basis counts for the key term. In
//! finite mode the observed gains are replaced by worst-case values within a
//! Hoeffding deviation `sqrt(ln(1/eps) / (2 n))`, see [`finite_key_adjust`].

use rayon::prelude::*;

use crate::channel::{
    wcs_statistics, ChannelParams, IntensityLevel, Intensities, StatsTable, YieldTable, ALICE_STATE_PROBABILITY,
    BOB_BASIS_PROBABILITIES,
};
use crate::error::{Error, Result};
use crate::qubit::binary_entropy;
use crate::security::{analyze, SecuritySummary, YieldBounds};
use crate::source::{Basis, CoefficientSet, SourceSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KeyMode {
    Asymptotic,
    Finite,
}

/// Where the bound engine gets its single-photon yields from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum YieldSource {
    /// Vacuum + weak decoy estimates from the observed gains.
    Decoy,
    /// Model single-photon yields (infinite-decoy limit); asymptotic only.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolParams {
    pub mu: f64,
    pub nu: f64,
    /// Total number of pulses sent.
    pub n_pulses: f64,
    pub epsilon: f64,
    pub f_ec: f64,
    /// Probabilities of sending the signal, decoy and vacuum intensity.
    pub intensity_probabilities: [f64; 3],
    pub mode: KeyMode,
    pub yield_source: YieldSource,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        ProtocolParams {
            mu: 0.5,
            nu: 0.05,
            n_pulses: 1e10,
            epsilon: 1e-10,
            f_ec: 1.22,
            intensity_probabilities: [0.8, 0.1, 0.1],
            mode: KeyMode::Asymptotic,
            yield_source: YieldSource::Decoy,
        }
    }
}

impl ProtocolParams {
    pub fn validate(&self) -> Result<()> {
        Intensities { signal: self.mu, decoy: self.nu }.validate()?;
        if !(self.n_pulses > 0.0) {
            return Err(Error::Parameter(format!("pulse count must be > 0, got {}", self.n_pulses)));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Parameter(format!("epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        if !(self.f_ec >= 1.0 && self.f_ec.is_finite()) {
            return Err(Error::Parameter(format!("error-correction efficiency must be >= 1, got {}", self.f_ec)));
        }
        let p = self.intensity_probabilities;
        if p.iter().any(|x| !(*x > 0.0)) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Parameter(format!("intensity probabilities {p:?} must be positive and sum to 1")));
        }
        if self.mode == KeyMode::Finite && self.yield_source == YieldSource::Exact {
            return Err(Error::Parameter("exact single-photon yields are only available asymptotically".into()));
        }
        Ok(())
    }

    pub fn with_mu(&self, mu: f64) -> Self {
        ProtocolParams { mu, ..*self }
    }

    fn level_probability(&self, level: IntensityLevel) -> f64 {
        match level {
            IntensityLevel::Signal => self.intensity_probabilities[0],
            IntensityLevel::Decoy => self.intensity_probabilities[1],
            IntensityLevel::Vacuum => self.intensity_probabilities[2],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Upper,
    Lower,
}

/// Hoeffding-shifted probability, clamped to `[0, 1]`.
pub fn finite_key_adjust(value: f64, n_samples: f64, epsilon: f64, direction: Direction) -> f64 {
    let dev = if n_samples.is_infinite() { 0.0 } else { ((1.0 / epsilon).ln() / (2.0 * n_samples)).sqrt() };
    match direction {
        Direction::Upper => (value + dev).clamp(0.0, 1.0),
        Direction::Lower => (value - dev).clamp(0.0, 1.0),
    }
}

/// Single-photon estimates handed to the bound engine and the key-rate formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoyEstimate {
    pub yields: YieldBounds,
    pub y1_zz_lower: f64,
    pub q1_zz_lower: f64,
    pub e1_zz_upper: f64,
}

struct Estimator<'a> {
    params: &'a ProtocolParams,
}

const LEVELS: [IntensityLevel; 3] = [IntensityLevel::Signal, IntensityLevel::Decoy, IntensityLevel::Vacuum];

impl Estimator<'_> {
    /// Gain bounds `[lo, hi]` per intensity for a category whose gains are
    /// `g(level)`; `share` is the probability that a pulse of a given intensity
    /// falls into the category.
    ///
    /// In finite mode the intensity label of each detection is treated as a
    /// draw over all detections `D` of the category: the fraction `D_k / D`
    /// is shifted by the Hoeffding deviation for `D` samples and mapped back
    /// to a gain.
    fn gains(&self, g: impl Fn(IntensityLevel) -> f64, share: f64) -> [[f64; 2]; 3] {
        let exact = LEVELS.map(|l| [g(l), g(l)]);
        if self.params.mode == KeyMode::Asymptotic {
            return exact;
        }
        let sent = LEVELS.map(|l| self.params.n_pulses * self.params.level_probability(l) * share);
        let detected: [f64; 3] = std::array::from_fn(|k| sent[k] * g(LEVELS[k]));
        let total: f64 = detected.iter().sum();
        if !(total > 0.0) {
            return exact;
        }
        std::array::from_fn(|k| {
            let frac = detected[k] / total;
            let shift = |dir| finite_key_adjust(frac, total, self.params.epsilon, dir) * total / sent[k];
            [shift(Direction::Lower), shift(Direction::Upper)]
        })
    }

    /// `(Y1 lower, Y1 upper)` for a category.
    fn single_photon(&self, g: impl Fn(IntensityLevel) -> f64, share: f64) -> (f64, f64) {
        let (mu, nu) = (self.params.mu, self.params.nu);
        let [q_mu, q_nu, y0] = self.gains(g, share);
        let lower = mu / (mu * nu - nu * nu)
            * (q_nu[0] * nu.exp() - q_mu[1] * mu.exp() * nu * nu / (mu * mu) - (mu * mu - nu * nu) / (mu * mu) * y0[1]);
        let upper = ((q_nu[1] * nu.exp() - y0[0]) / nu).clamp(0.0, 1.0);
        (lower.clamp(0.0, upper), upper)
    }
}

pub fn decoy_single_photon_bounds(stats: &StatsTable, params: &ProtocolParams) -> Result<DecoyEstimate> {
    let (mu, nu) = (params.mu, params.nu);
    if !(mu * nu - nu * nu > 0.0) {
        return Err(Error::Parameter(format!("decoy bounds need mu > nu > 0, got mu {mu} nu {nu}")));
    }
    if params.yield_source == YieldSource::Exact {
        let y1 = stats.single_photon.gain(Basis::Z, Basis::Z);
        return Ok(DecoyEstimate {
            yields: YieldBounds::exact(&stats.single_photon),
            y1_zz_lower: y1,
            q1_zz_lower: y1 * mu * (-mu).exp(),
            e1_zz_upper: stats.single_photon.error_rate(Basis::Z, Basis::Z),
        });
    }

    let est = Estimator { params };
    let mut lo = YieldTable::default();
    let mut hi = YieldTable::default();
    for (state, basis, s, _) in stats.single_photon.iter() {
        let share = ALICE_STATE_PROBABILITY * BOB_BASIS_PROBABILITIES[basis.index()];
        let (l, h) = est.single_photon(|lvl| stats.level(lvl).get(state, basis, s), share);
        lo.set(state, basis, s, l);
        hi.set(state, basis, s, h);
    }

    // Aggregated Z-basis counts: Alice sends a Z state (1/2) and Bob measures Z.
    let zz_share = 2.0 * ALICE_STATE_PROBABILITY * BOB_BASIS_PROBABILITIES[Basis::Z.index()];
    let (y1_zz_lower, _) = est.single_photon(|lvl| stats.gain(Basis::Z, Basis::Z, lvl), zz_share);
    let [_, err_nu, err_vac] =
        est.gains(|lvl| stats.level(lvl).error_gain(Basis::Z, Basis::Z), zz_share);
    let (err_nu_hi, err_vac_lo) = (err_nu[1], err_vac[0]);
    let e1_zz_upper = if y1_zz_lower > 0.0 {
        ((err_nu_hi * nu.exp() - err_vac_lo) / (nu * y1_zz_lower)).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(DecoyEstimate {
        yields: YieldBounds { lo, hi },
        y1_zz_lower,
        q1_zz_lower: y1_zz_lower * mu * (-mu).exp(),
        e1_zz_upper,
    })
}

/// Secret bits per signal pulse sent in the Z basis, clamped at zero.
pub fn secret_key_rate(
    stats: &StatsTable,
    decoy: &DecoyEstimate,
    summary: &SecuritySummary,
    params: &ProtocolParams,
) -> Result<f64> {
    let Some(eve) = summary.eve else {
        return Ok(0.0);
    };
    let gain = stats.gain(Basis::Z, Basis::Z, IntensityLevel::Signal);
    let qber = stats.error_rate(Basis::Z, Basis::Z, IntensityLevel::Signal);
    let rate = decoy.q1_zz_lower * (1.0 - eve.i_eve_upper) - gain * params.f_ec * binary_entropy(qber)?;
    Ok(rate.max(0.0))
}

/// Outcome of one key-rate evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointStatus {
    /// Positive key.
    Ok,
    /// Bounds valid but the key rate is clamped at zero.
    NoKey,
    /// Z-basis single-photon error bound at or above the abort threshold.
    ZAbort,
    /// Decoy bounds cannot certify any single-photon detection.
    NoSinglePhoton,
    /// Transmission-rate region is empty.
    Infeasible,
    /// Phase-error ratio undefined.
    Undefined,
}

impl PointStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            PointStatus::Ok => "none",
            PointStatus::NoKey => "no_key",
            PointStatus::ZAbort => "ezz",
            PointStatus::NoSinglePhoton => "no_single_photon",
            PointStatus::Infeasible => "infeasible",
            PointStatus::Undefined => "undefined",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KeyRatePoint {
    pub distance_km: f64,
    pub rate: f64,
    /// Signal intensity used; `0.0` when no intensity gives a positive rate.
    pub mu_opt: f64,
    pub summary: Option<SecuritySummary>,
    pub status: PointStatus,
}

/// Sentinel reported as `mu_opt` when no intensity yields key.
pub const NO_KEY_MU: f64 = 0.0;

/// Full pipeline at a fixed signal intensity.
pub fn evaluate_point(coeffs: &CoefficientSet, ch: &ChannelParams, params: &ProtocolParams) -> Result<KeyRatePoint> {
    params.validate()?;
    let stats = wcs_statistics(&coeffs.states, ch, Intensities { signal: params.mu, decoy: params.nu })?;
    let decoy = decoy_single_photon_bounds(&stats, params)?;
    let mut point = KeyRatePoint {
        distance_km: ch.distance_km,
        rate: 0.0,
        mu_opt: params.mu,
        summary: None,
        status: PointStatus::NoKey,
    };
    if !(decoy.y1_zz_lower > 0.0) {
        point.status = PointStatus::NoSinglePhoton;
        return Ok(point);
    }
    let summary = match analyze(coeffs, &decoy.yields, decoy.e1_zz_upper) {
        Ok(s) => s,
        Err(Error::Infeasible(_)) => {
            point.status = PointStatus::Infeasible;
            return Ok(point);
        }
        Err(Error::Undefined(_)) => {
            point.status = PointStatus::Undefined;
            return Ok(point);
        }
        Err(e) => return Err(e),
    };
    point.rate = secret_key_rate(&stats, &decoy, &summary, params)?;
    point.status = if summary.aborted() {
        PointStatus::ZAbort
    } else if point.rate > 0.0 {
        PointStatus::Ok
    } else {
        PointStatus::NoKey
    };
    point.summary = Some(summary);
    Ok(point)
}

/// Coarse grid plus one refinement pass over `(lo, hi]`. Ties go to the
/// smaller argument. Returns `None` when nothing is positive.
pub fn maximize_on_grid(
    mut f: impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    points: usize,
    refine_points: usize,
) -> Option<(f64, f64)> {
    let step = (hi - lo) / points as f64;
    let mut scan = |xs: &mut dyn Iterator<Item = f64>| {
        let mut best: Option<(f64, f64)> = None;
        for x in xs {
            let v = f(x);
            if v > 0.0 && best.map_or(true, |(_, bv)| v > bv) {
                best = Some((x, v));
            }
        }
        best
    };
    let (x0, v0) = scan(&mut (1..=points).map(|k| lo + step * k as f64))?;
    let a = (x0 - step).max(lo + step * 1e-6);
    let b = (x0 + step).min(hi);
    let h = (b - a) / refine_points as f64;
    match scan(&mut (0..=refine_points).map(|k| a + h * k as f64)) {
        Some((x1, v1)) if v1 > v0 => Some((x1, v1)),
        _ => Some((x0, v0)),
    }
}

pub const MU_GRID_POINTS: usize = 200;
pub const MU_REFINE_POINTS: usize = 40;

/// Maximizes the key rate over the signal intensity in `(0, 1]`.
pub fn optimize_intensity(coeffs: &CoefficientSet, ch: &ChannelParams, params: &ProtocolParams) -> Result<KeyRatePoint> {
    let probe = params.with_mu(1.0);
    probe.validate()?;
    let eval = |mu: f64| -> Result<KeyRatePoint> {
        if mu <= params.nu {
            return Ok(KeyRatePoint { distance_km: ch.distance_km, rate: 0.0, mu_opt: mu, summary: None, status: PointStatus::NoKey });
        }
        evaluate_point(coeffs, ch, &params.with_mu(mu))
    };
    let mut first_error = None;
    let mut saw_infeasible = false;
    let best = maximize_on_grid(
        |mu| match eval(mu) {
            Ok(p) => {
                saw_infeasible |= p.status == PointStatus::Infeasible;
                p.rate
            }
            Err(e) => {
                first_error.get_or_insert(e);
                0.0
            }
        },
        0.0,
        1.0,
        MU_GRID_POINTS,
        MU_REFINE_POINTS,
    );
    if let Some(e) = first_error {
        return Err(e);
    }
    match best {
        Some((mu, _)) => eval(mu),
        None => {
            // Report the diagnostics at the smallest admissible grid intensity.
            let mu = (1..=MU_GRID_POINTS)
                .map(|k| k as f64 / MU_GRID_POINTS as f64)
                .find(|&m| m > params.nu)
                .unwrap_or(1.0);
            let mut p = eval(mu)?;
            p.rate = 0.0;
            p.mu_opt = NO_KEY_MU;
            if saw_infeasible {
                p.status = PointStatus::Infeasible;
            }
            Ok(p)
        }
    }
}

/// One key-rate curve: source, channel (distance ignored), protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveConfig {
    pub source: SourceSpec,
    pub channel: ChannelParams,
    pub protocol: ProtocolParams,
    pub optimize_mu: bool,
}

/// `start, start + step, ...` up to and including `stop` (within rounding).
pub fn distance_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(Error::Parameter(format!("invalid sweep start {start} stop {stop} step {step}")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|k| start + step * k as f64).collect())
}

/// Evaluates the pipeline at each distance; points are independent and run in parallel.
pub fn sweep_distance(cfg: &CurveConfig, distances: &[f64]) -> Result<Vec<KeyRatePoint>> {
    cfg.channel.validate()?;
    cfg.protocol.validate()?;
    let coeffs = CoefficientSet::build(&cfg.source)?;
    distances
        .par_iter()
        .map(|&d| {
            let ch = cfg.channel.at_distance(d);
            if cfg.optimize_mu {
                optimize_intensity(&coeffs, &ch, &cfg.protocol)
            } else {
                evaluate_point(&coeffs, &ch, &cfg.protocol)
            }
        })
        .collect()
}
