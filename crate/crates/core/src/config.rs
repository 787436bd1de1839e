//! Run configuration: TOML documents with `[source]`, `[channel]`,
//! `[protocol]` and `[sweep]` sections plus optional `[[variant]]` overrides.
//! Every field is optional and falls back to the defaults of the library types.
//! The schema is documented in `docs/config.md`.

use std::f64::consts::FRAC_PI_8;
use std::path::Path;

use serde::Deserialize;

use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::rate::{distance_grid, CurveConfig, KeyMode, ProtocolParams, YieldSource};
use crate::source::{SourceSpec, ThetaMode};

pub const PRESET_IDS: [&str; 6] = ["a", "b", "c", "d", "e", "f"];

pub fn preset_text(id: &str) -> Option<&'static str> {
    Some(match id {
        "a" => include_str!("../presets/a.toml"),
        "b" => include_str!("../presets/b.toml"),
        "c" => include_str!("../presets/c.toml"),
        "d" => include_str!("../presets/d.toml"),
        "e" => include_str!("../presets/e.toml"),
        "f" => include_str!("../presets/f.toml"),
        _ => return None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for SweepRange {
    fn default() -> Self {
        SweepRange { start: 0.0, stop: 150.0, step: 5.0 }
    }
}

impl SweepRange {
    pub fn distances(&self) -> Result<Vec<f64>> {
        distance_grid(self.start, self.stop, self.step)
    }
}

/// One labelled curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Variant {
    pub label: String,
    pub curve: CurveConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub preset: Option<String>,
    pub sweep: SweepRange,
    pub variants: Vec<Variant>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSource {
    delta_im: Option<f64>,
    delta_pm: Option<f64>,
    delta_im1: Option<f64>,
    delta_im2: Option<f64>,
    delta_bs1: Option<f64>,
    delta_bs2: Option<f64>,
    delta_pm1: Option<f64>,
    delta_pm2: Option<f64>,
    theta: Option<f64>,
    theta_mode: Option<RawThetaMode>,
    gamma: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RawThetaMode {
    Independent,
    Dependent,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChannel {
    alpha_db_per_km: Option<f64>,
    eta_det: Option<f64>,
    p_dark: Option<f64>,
    omega: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RawMode {
    Asymptotic,
    Finite,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RawYieldSource {
    Decoy,
    Exact,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProtocol {
    mode: Option<RawMode>,
    mu: Option<f64>,
    optimize_mu: Option<bool>,
    nu: Option<f64>,
    n_pulses: Option<f64>,
    epsilon: Option<f64>,
    f_ec: Option<f64>,
    intensity_probabilities: Option<[f64; 3]>,
    yield_source: Option<RawYieldSource>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    start: Option<f64>,
    stop: Option<f64>,
    step: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSections {
    #[serde(default)]
    source: RawSource,
    #[serde(default)]
    channel: RawChannel,
    #[serde(default)]
    protocol: RawProtocol,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVariant {
    label: String,
    #[serde(flatten)]
    sections: RawSections,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    preset: Option<String>,
    #[serde(flatten)]
    sections: RawSections,
    #[serde(default)]
    sweep: RawSweep,
    #[serde(default)]
    variant: Vec<RawVariant>,
}

macro_rules! overlay {
    ($dst:expr, $src:expr; $($field:ident),*) => {
        $( if $src.$field.is_some() { $dst.$field = $src.$field; } )*
    };
}

impl RawSections {
    fn overlay(&mut self, o: &RawSections) {
        overlay!(self.source, o.source; delta_im, delta_pm, delta_im1, delta_im2, delta_bs1, delta_bs2, delta_pm1, delta_pm2, theta, theta_mode, gamma);
        overlay!(self.channel, o.channel; alpha_db_per_km, eta_det, p_dark, omega);
        overlay!(self.protocol, o.protocol; mode, mu, optimize_mu, nu, n_pulses, epsilon, f_ec, intensity_probabilities, yield_source);
    }

    fn resolve(&self) -> Result<CurveConfig> {
        let s = &self.source;
        let base = SourceSpec::default();
        // The shared modulator error also applies to both beam splitters.
        let im = s.delta_im.unwrap_or(0.0);
        let pm = s.delta_pm.unwrap_or(0.0);
        let theta = s.theta.unwrap_or(0.0);
        let source = SourceSpec {
            delta_im1: s.delta_im1.unwrap_or(im),
            delta_im2: s.delta_im2.unwrap_or(im),
            delta_bs1: s.delta_bs1.unwrap_or(im),
            delta_bs2: s.delta_bs2.unwrap_or(im),
            delta_pm1: s.delta_pm1.unwrap_or(pm),
            delta_pm2: s.delta_pm2.unwrap_or(pm),
            theta_mode: match s.theta_mode {
                None | Some(RawThetaMode::Independent) => ThetaMode::Independent(theta),
                Some(RawThetaMode::Dependent) => ThetaMode::Dependent(theta),
            },
            gamma: s.gamma.unwrap_or(base.gamma),
        };
        source.validate()?;

        let c = &self.channel;
        let dc = ChannelParams::default();
        let channel = ChannelParams {
            distance_km: 0.0,
            alpha_db_per_km: c.alpha_db_per_km.unwrap_or(dc.alpha_db_per_km),
            eta_det: c.eta_det.unwrap_or(dc.eta_det),
            p_dark: c.p_dark.unwrap_or(dc.p_dark),
            omega: c.omega.unwrap_or(FRAC_PI_8),
        };
        channel.validate()?;

        let p = &self.protocol;
        let dp = ProtocolParams::default();
        let protocol = ProtocolParams {
            mu: p.mu.unwrap_or(dp.mu),
            nu: p.nu.unwrap_or(dp.nu),
            n_pulses: p.n_pulses.unwrap_or(dp.n_pulses),
            epsilon: p.epsilon.unwrap_or(dp.epsilon),
            f_ec: p.f_ec.unwrap_or(dp.f_ec),
            intensity_probabilities: p.intensity_probabilities.unwrap_or(dp.intensity_probabilities),
            mode: match p.mode {
                None => dp.mode,
                Some(RawMode::Asymptotic) => KeyMode::Asymptotic,
                Some(RawMode::Finite) => KeyMode::Finite,
            },
            yield_source: match p.yield_source {
                None => dp.yield_source,
                Some(RawYieldSource::Decoy) => YieldSource::Decoy,
                Some(RawYieldSource::Exact) => YieldSource::Exact,
            },
        };
        protocol.validate()?;
        Ok(CurveConfig { source, channel, protocol, optimize_mu: p.optimize_mu.unwrap_or(true) })
    }
}

fn parse_raw(text: &str, origin: &str) -> Result<RawConfig> {
    toml::from_str(text).map_err(|e| Error::Config(format!("{origin}: {e}")))
}

/// Parses a configuration document. A `preset` key pulls in the preset's
/// base values and variants; fields in `text` override them.
pub fn parse_config_str(text: &str, mode_override: Option<KeyMode>) -> Result<RunConfig> {
    let raw = parse_raw(text, "config")?;
    let (mut base, mut sweep, mut variants) = match &raw.preset {
        Some(id) => {
            let preset_src = preset_text(id).ok_or_else(|| Error::Config(format!("unknown preset {id:?}")))?;
            let p = parse_raw(preset_src, &format!("preset {id}"))?;
            (p.sections, p.sweep, p.variant)
        }
        None => Default::default(),
    };
    base.overlay(&raw.sections);
    overlay!(sweep, raw.sweep; start, stop, step);
    if !raw.variant.is_empty() {
        variants = raw.variant;
    }
    if let Some(mode) = mode_override {
        base.protocol.mode = Some(match mode {
            KeyMode::Asymptotic => RawMode::Asymptotic,
            KeyMode::Finite => RawMode::Finite,
        });
    }

    let d = SweepRange::default();
    let sweep = SweepRange {
        start: sweep.start.unwrap_or(d.start),
        stop: sweep.stop.unwrap_or(d.stop),
        step: sweep.step.unwrap_or(d.step),
    };
    sweep.distances()?;
    if sweep.start < 0.0 {
        return Err(Error::Parameter(format!("sweep start must be >= 0, got {}", sweep.start)));
    }

    let variants = if variants.is_empty() {
        vec![Variant { label: "base".into(), curve: base.resolve()? }]
    } else {
        variants
            .iter()
            .map(|v| {
                let mut merged = base.clone();
                merged.overlay(&v.sections);
                let curve = merged.resolve().map_err(|e| Error::Config(format!("variant {:?}: {e}", v.label)))?;
                Ok(Variant { label: v.label.clone(), curve })
            })
            .collect::<Result<_>>()?
    };
    Ok(RunConfig { preset: raw.preset, sweep, variants })
}

pub fn parse_config(path: &Path, mode_override: Option<KeyMode>) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config_str(&text, mode_override).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn preset_config(id: &str, mode_override: Option<KeyMode>) -> Result<RunConfig> {
    if preset_text(id).is_none() {
        return Err(Error::Config(format!("unknown preset {id:?}; expected one of a-f")));
    }
    parse_config_str(&format!("preset = {id:?}\n"), mode_override)
}
