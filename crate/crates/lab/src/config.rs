//! Configuration ingestion: JSON schema (unknown keys rejected), shipped
//! presets, dotted-path overrides, and a stable hash of the resolved
//! configuration for reproducibility.

use beamslider_core::contact::{BranchSelect, SimMode};
use beamslider_core::rom::{BeamParameters, SliderParameters};
use beamslider_core::ssim::ExcitationParameters;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamConfig {
    pub length_m: f64,
    pub thickness_m: f64,
    pub density_kg_m3: f64,
    pub youngs_modulus_pa: f64,
    pub cross_section_area_m2: f64,
    /// Defaults to the rectangular-section value `A h^2 / 12`.
    #[serde(default)]
    pub area_moment_m4: Option<f64>,
    pub axial_clamping_stiffness_n_per_m: f64,
    pub damping_ratio: f64,
    /// Identified fundamental frequency [Hz]; absent means analytic.
    #[serde(default)]
    pub modal_frequency_hz: Option<f64>,
}

impl BeamConfig {
    pub fn to_core(&self) -> BeamParameters {
        BeamParameters {
            length: self.length_m,
            thickness: self.thickness_m,
            density: self.density_kg_m3,
            youngs_modulus: self.youngs_modulus_pa,
            cross_section_area: self.cross_section_area_m2,
            area_moment: self
                .area_moment_m4
                .unwrap_or(self.cross_section_area_m2 * self.thickness_m * self.thickness_m / 12.0),
            axial_clamping_stiffness: self.axial_clamping_stiffness_n_per_m,
            damping_ratio: self.damping_ratio,
            modal_frequency_override: self
                .modal_frequency_hz
                .map(|f| 2.0 * std::f64::consts::PI * f),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliderConfig {
    pub mass_kg: f64,
    pub rotary_inertia_kg_m2: f64,
    pub contact_spacing_m: f64,
    pub gap_m: f64,
    pub com_offset_m: f64,
    pub friction_coefficient: f64,
    pub restitution: f64,
}

impl SliderConfig {
    pub fn to_core(&self) -> SliderParameters {
        SliderParameters {
            mass: self.mass_kg,
            rotary_inertia: self.rotary_inertia_kg_m2,
            contact_spacing: self.contact_spacing_m,
            gap: self.gap_m,
            com_offset: self.com_offset_m,
            friction_coefficient: self.friction_coefficient,
            restitution: self.restitution,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExcitationConfig {
    pub amplitude_m: f64,
    pub frequency_hz: f64,
}

impl ExcitationConfig {
    /// Dimensionless excitation relative to the beam's fundamental mode.
    pub fn to_dimensionless(&self, beam: &BeamParameters) -> Result<ExcitationParameters> {
        let lambda = beamslider_core::rom::solve_frequency_equation(1)?;
        let omega = beam.fundamental_frequency(lambda);
        Ok(ExcitationParameters {
            base_amplitude: self.amplitude_m / beam.length,
            frequency_ratio: 2.0 * std::f64::consts::PI * self.frequency_hz / omega,
        })
    }

    pub fn omega(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.frequency_hz
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeConfig {
    Pcs,
    Fs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialConfig {
    Rest,
    LowBranch,
    HighBranch,
}

/// Warm-up segment executed (and discarded) before the main run, carrying
/// its terminal state over; a sequence of segments reaches an attractor by
/// stepwise continuation of the prescribed position.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WarmupConfig {
    pub s_prescribed: f64,
    pub duration_s: f64,
}

fn default_stride() -> usize {
    8
}

fn default_station() -> f64 {
    4.0 / 7.0
}

fn default_initial() -> InitialConfig {
    InitialConfig::Rest
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    /// Integrator step [s]; defaults to one two-thousandth of the
    /// excitation period.
    #[serde(default)]
    pub dt_s: Option<f64>,
    pub duration_s: f64,
    pub n_modes: usize,
    pub mode: ModeConfig,
    /// Prescribed slider position (PCS) or initial position (FS).
    pub s_position: f64,
    #[serde(default = "default_initial")]
    pub initial: InitialConfig,
    #[serde(default = "default_stride")]
    pub stride: usize,
    #[serde(default = "default_station")]
    pub station: f64,
    /// Skipped leading transient in the analysis pass [s]; defaults to 30 %
    /// of the duration.
    #[serde(default)]
    pub analysis_skip_s: Option<f64>,
    #[serde(default)]
    pub warmup: Vec<WarmupConfig>,
}

impl SimConfig {
    pub fn mode(&self) -> SimMode {
        match self.mode {
            ModeConfig::Pcs => SimMode::Pcs {
                s_prescribed: self.s_position,
            },
            ModeConfig::Fs => SimMode::FreeSlider,
        }
    }

    pub fn branch(&self) -> Option<BranchSelect> {
        match self.initial {
            InitialConfig::Rest => None,
            InitialConfig::LowBranch => Some(BranchSelect::Low),
            InitialConfig::HighBranch => Some(BranchSelect::High),
        }
    }
}

fn default_ssim_points() -> usize {
    481
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SsimConfig {
    pub s_start: f64,
    pub s_stop: f64,
    #[serde(default = "default_ssim_points")]
    pub points: usize,
    #[serde(default = "default_station")]
    pub station: f64,
}

impl Default for SsimConfig {
    fn default() -> Self {
        SsimConfig {
            s_start: 0.02,
            s_stop: 0.98,
            points: default_ssim_points(),
            station: default_station(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepDirection {
    Forward,
    Backward,
    Both,
}

fn default_sweep_cap() -> f64 {
    10.0
}

fn default_sweep_window() -> f64 {
    1.0
}

fn default_steady_tol() -> f64 {
    0.01
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub s_start: f64,
    pub s_stop: f64,
    pub points: usize,
    pub direction: SweepDirection,
    pub n_modes: usize,
    /// Hard cap of simulated seconds per grid point.
    #[serde(default = "default_sweep_cap")]
    pub max_seconds_per_point: f64,
    /// Envelope window for the amplitude measure [s].
    #[serde(default = "default_sweep_window")]
    pub window_s: f64,
    /// Steady state: consecutive window means within this relative tolerance.
    #[serde(default = "default_steady_tol")]
    pub steady_rel_tol: f64,
    #[serde(default = "default_station")]
    pub station: f64,
}

fn default_budget() -> f64 {
    40.0
}

fn default_stop_windows() -> usize {
    3
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignatureConfig {
    pub s0: f64,
    pub n_modes: usize,
    /// Wall budget in simulated seconds; exceeded means a flagged partial run.
    #[serde(default = "default_budget")]
    pub budget_s: f64,
    /// Consecutive one-second windows with negligible drift that count as
    /// stopped.
    #[serde(default = "default_stop_windows")]
    pub stop_windows: usize,
}

/// Full run configuration (the workflow sections are optional; each command
/// requires its own).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub beam: BeamConfig,
    pub slider: SliderConfig,
    pub excitation: ExcitationConfig,
    #[serde(default)]
    pub sim: Option<SimConfig>,
    #[serde(default)]
    pub ssim: Option<SsimConfig>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub signature: Option<SignatureConfig>,
}

impl RunConfig {
    /// Parse a JSON configuration, rejecting unknown keys.
    pub fn from_json(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parse with dotted-path overrides (`sim.duration_s=2.5`) applied on
    /// the raw JSON tree before typed deserialization.
    pub fn from_json_with_overrides(text: &str, overrides: &[String]) -> Result<RunConfig> {
        let mut tree: serde_json::Value =
            serde_json::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        for item in overrides {
            let (path, value) = item.split_once('=').ok_or_else(|| {
                LabError::Config(format!("override `{item}` is not of the form key=value"))
            })?;
            let parsed: serde_json::Value = serde_json::from_str(value)
                .unwrap_or_else(|_| serde_json::Value::String(value.to_string()));
            let parts: Vec<&str> = path.split('.').collect();
            let mut node = &mut tree;
            for part in &parts[..parts.len() - 1] {
                let map = node.as_object_mut().ok_or_else(|| {
                    LabError::Config(format!("override path `{path}` does not address an object"))
                })?;
                node = map
                    .entry((*part).to_string())
                    .or_insert_with(|| serde_json::Value::Object(Default::default()));
            }
            let map = node.as_object_mut().ok_or_else(|| {
                LabError::Config(format!("override path `{path}` does not address an object"))
            })?;
            map.insert(parts[parts.len() - 1].to_string(), parsed);
        }
        let cfg: RunConfig =
            serde_json::from_value(tree).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let beam = self.beam.to_core();
        beam.validate().map_err(LabError::from)?;
        self.slider
            .to_core()
            .validate(&beam)
            .map_err(LabError::from)?;
        if !(self.excitation.amplitude_m >= 0.0) || !(self.excitation.frequency_hz > 0.0) {
            return Err(LabError::Config(
                "excitation amplitude must be >= 0 and frequency > 0".into(),
            ));
        }
        if let Some(sim) = &self.sim {
            if !(sim.duration_s > 0.0) {
                return Err(LabError::Config("sim.duration_s must be > 0".into()));
            }
            if sim.n_modes == 0 || sim.n_modes > beamslider_core::rom::MAX_MODES {
                return Err(LabError::Config(format!(
                    "sim.n_modes must be in 1..={}",
                    beamslider_core::rom::MAX_MODES
                )));
            }
        }
        Ok(())
    }

    /// Default integrator step: one two-thousandth of the excitation period.
    pub fn default_dt(&self) -> f64 {
        1.0 / (self.excitation.frequency_hz * 2000.0)
    }

    /// SHA-256 of the canonical serialized configuration.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        let digest = hasher.finalize();
        let mut out = String::with_capacity(64);
        for b in digest {
            use std::fmt::Write;
            let _ = write!(out, "{b:02x}");
        }
        out
    }
}

/// Shipped presets, by name.
pub fn preset(name: &str) -> Result<&'static str> {
    match name {
        "table-default" => Ok(include_str!("../presets/table-default.json")),
        "case1" => Ok(include_str!("../presets/case1.json")),
        "case2" => Ok(include_str!("../presets/case2.json")),
        "case3" => Ok(include_str!("../presets/case3.json")),
        other => Err(LabError::Config(format!(
            "unknown preset `{other}` (available: table-default, case1, case2, case3)"
        ))),
    }
}

pub fn load_preset(name: &str) -> Result<RunConfig> {
    RunConfig::from_json(preset(name)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse_and_validate() {
        for name in ["table-default", "case1", "case2", "case3"] {
            let cfg = load_preset(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(
                cfg.sim.is_some() || cfg.ssim.is_some(),
                "{name} has no workflow"
            );
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = preset("table-default").unwrap();
        let mut tree: serde_json::Value = serde_json::from_str(text).unwrap();
        tree.as_object_mut()
            .unwrap()
            .insert("typo_section".into(), serde_json::json!(1));
        let err = RunConfig::from_json(&tree.to_string()).unwrap_err();
        assert!(matches!(err, LabError::Config(_)), "{err}");
        // Also inside a section.
        let mut tree: serde_json::Value = serde_json::from_str(text).unwrap();
        tree["beam"]
            .as_object_mut()
            .unwrap()
            .insert("lenght_m".into(), serde_json::json!(0.1));
        assert!(RunConfig::from_json(&tree.to_string()).is_err());
    }

    #[test]
    fn overrides_apply_and_are_validated() {
        let text = preset("case1").unwrap();
        let cfg = RunConfig::from_json_with_overrides(
            text,
            &[
                "sim.duration_s=0.5".into(),
                "excitation.amplitude_m=0.0".into(),
            ],
        )
        .unwrap();
        assert_eq!(cfg.sim.as_ref().unwrap().duration_s, 0.5);
        assert_eq!(cfg.excitation.amplitude_m, 0.0);
        // A bad override path must be a config error.
        assert!(RunConfig::from_json_with_overrides(text, &["sim.no_such=1".into()]).is_err());
        assert!(RunConfig::from_json_with_overrides(text, &["garbage".into()]).is_err());
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = load_preset("case1").unwrap();
        let b = load_preset("case1").unwrap();
        assert_eq!(a.hash(), b.hash());
        let c = RunConfig::from_json_with_overrides(
            preset("case1").unwrap(),
            &["sim.duration_s=9.0".into()],
        )
        .unwrap();
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn table_default_matches_reference_quantities() {
        let cfg = load_preset("table-default").unwrap();
        let beam = cfg.beam.to_core();
        assert!((beam.mass() - 15.1e-3).abs() < 1e-8);
        let exc = cfg.excitation.to_dimensionless(&beam).unwrap();
        assert!((exc.base_amplitude - 1.65e-4).abs() < 1e-9);
        assert!((exc.frequency_ratio - 0.477).abs() < 1e-6);
    }
}
