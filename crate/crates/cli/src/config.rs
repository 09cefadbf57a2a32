//! TOML run configuration and named scalar parameters for sweeps.

use std::f64::consts::FRAC_PI_4;
use std::path::Path;

use anyhow::{bail, Context, Result};
use jcl_core::currents::{CurrentOptions, CutoffPolicy};
use jcl_core::model::{Beta, DotParams, LeadParams, ModelConfig, PhotonParams, Side, ThermalState};
use jcl_core::quadrature::QuadOptions;
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    leads: LeadsSection,
    #[serde(default)]
    dot: DotSection,
    photon: PhotonSection,
    thermal: ThermalSection,
    #[serde(default)]
    numerics: Numerics,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LeadsSection {
    #[serde(default)]
    g_el: f64,
    left: LeadSection,
    right: LeadSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LeadSection {
    bias: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct DotSection {
    level_base: f64,
    spacing: f64,
    contact_angle: f64,
    contact_phase: f64,
}

impl Default for DotSection {
    fn default() -> Self {
        Self {
            level_base: 0.0,
            spacing: 1.0,
            contact_angle: FRAC_PI_4,
            contact_phase: 0.0,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PhotonSection {
    omega: f64,
    #[serde(default = "default_cutoff")]
    cutoff: usize,
    #[serde(default)]
    g_ph: f64,
}

fn default_cutoff() -> usize {
    4
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ThermalSection {
    beta: Beta,
    mu_left: f64,
    mu_right: f64,
}

/// Numerical settings; every field is optional in the file.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Numerics {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
    pub cutoff_rel_tol: f64,
    pub cutoff_abs_floor: f64,
    pub max_cutoff: usize,
    pub charge: f64,
    /// Energy grid for the `smatrix` table; defaults cover every retained band.
    pub energy_min: Option<f64>,
    pub energy_max: Option<f64>,
    pub energy_steps: usize,
}

impl Default for Numerics {
    fn default() -> Self {
        let quad = QuadOptions::default();
        let cur = CurrentOptions::default();
        Self {
            rel_tol: quad.rel_tol,
            abs_tol: quad.abs_tol,
            max_panels: quad.max_panels,
            cutoff_rel_tol: cur.cutoff_rel_tol,
            cutoff_abs_floor: cur.cutoff_abs_floor,
            max_cutoff: cur.max_cutoff,
            charge: cur.charge,
            energy_min: None,
            energy_max: None,
            energy_steps: 200,
        }
    }
}

/// Everything a command needs: physics, reservoirs and numerics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunInputs {
    pub model: ModelConfig,
    pub thermal: ThermalState,
    pub numerics: Numerics,
    /// Starting photon cutoff for the convergence policy, from `--nph`.
    pub nph: Option<usize>,
}

impl RunInputs {
    pub fn current_options(&self) -> CurrentOptions {
        CurrentOptions {
            quad: QuadOptions {
                rel_tol: self.numerics.rel_tol,
                abs_tol: self.numerics.abs_tol,
                max_panels: self.numerics.max_panels,
            },
            cutoff: self.nph.map_or(CutoffPolicy::Auto, CutoffPolicy::Start),
            cutoff_rel_tol: self.numerics.cutoff_rel_tol,
            cutoff_abs_floor: self.numerics.cutoff_abs_floor,
            max_cutoff: self.numerics.max_cutoff,
            charge: self.numerics.charge,
        }
    }
}

pub fn parse(text: &str) -> Result<RunInputs> {
    let file: FileConfig = toml::from_str(text)?;
    let model = ModelConfig {
        left: LeadParams::new(Side::Left, file.leads.left.bias),
        right: LeadParams::new(Side::Right, file.leads.right.bias),
        dot: DotParams {
            level_base: file.dot.level_base,
            spacing: file.dot.spacing,
            contact_angle: file.dot.contact_angle,
            contact_phase: file.dot.contact_phase,
        },
        photon: PhotonParams {
            omega: file.photon.omega,
            cutoff: file.photon.cutoff,
        },
        g_el: file.leads.g_el,
        g_ph: file.photon.g_ph,
    };
    let thermal = ThermalState::new(file.thermal.beta, file.thermal.mu_left, file.thermal.mu_right);
    Ok(RunInputs {
        model,
        thermal,
        numerics: file.numerics,
        nph: None,
    })
}

pub fn load(path: &Path) -> Result<RunInputs> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Real scalar fields that a sweep may vary.
pub const SWEEP_KEYS: [&str; 13] = [
    "left.bias",
    "right.bias",
    "g_el",
    "level_base",
    "spacing",
    "contact_angle",
    "contact_phase",
    "omega",
    "g_ph",
    "beta",
    "mu_left",
    "mu_right",
    "charge",
];

fn bare_key(key: &str) -> &str {
    let key = key.trim();
    ["leads.", "dot.", "photon.", "thermal.", "numerics."]
        .iter()
        .find_map(|p| key.strip_prefix(p))
        .unwrap_or(key)
}

/// Sets a real scalar by name. Section prefixes (`thermal.mu_left`,
/// `leads.left.bias`) are accepted.
pub fn set_scalar(inputs: &mut RunInputs, key: &str, value: f64) -> Result<()> {
    let bare = bare_key(key);
    let m = &mut inputs.model;
    match bare {
        "left.bias" => m.left.bias = value,
        "right.bias" => m.right.bias = value,
        "g_el" => m.g_el = value,
        "level_base" => m.dot.level_base = value,
        "spacing" => m.dot.spacing = value,
        "contact_angle" => m.dot.contact_angle = value,
        "contact_phase" => m.dot.contact_phase = value,
        "omega" => m.photon.omega = value,
        "g_ph" => m.g_ph = value,
        "beta" => inputs.thermal.beta = Beta::try_from(value)?,
        "mu_left" => inputs.thermal.mu_left = value,
        "mu_right" => inputs.thermal.mu_right = value,
        "charge" => inputs.numerics.charge = value,
        _ => bail!("`{key}` is not a real scalar parameter; expected one of {}", SWEEP_KEYS.join(", ")),
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub key: String,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl SweepAxis {
    pub fn parse(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.rsplitn(4, ':').collect();
        if parts.len() != 4 {
            bail!("sweep must look like KEY:START:STOP:STEPS, got `{spec}`");
        }
        let steps: usize = parts[0].parse().context("sweep STEPS")?;
        if steps == 0 {
            bail!("sweep needs at least one step");
        }
        let axis = Self {
            key: parts[3].to_string(),
            start: parts[2].parse().context("sweep START")?,
            stop: parts[1].parse().context("sweep STOP")?,
            steps,
        };
        if !axis.start.is_finite() || !axis.stop.is_finite() {
            bail!("sweep bounds must be finite");
        }
        if !SWEEP_KEYS.contains(&bare_key(&axis.key)) {
            bail!("`{}` is not a real scalar parameter; expected one of {}", axis.key, SWEEP_KEYS.join(", "));
        }
        Ok(axis)
    }

    /// Evenly spaced values including both ends (one value if `steps == 1`).
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let h = (self.stop - self.start) / (self.steps - 1) as f64;
        (0..self.steps).map(|i| self.start + h * i as f64).collect()
    }
}
