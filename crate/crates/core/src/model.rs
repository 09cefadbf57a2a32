//! Physical parameters of the dot-leads-resonator model and their validation.
//!
//! Energies are measured in units of the lead hopping, so every lead band has
//! width exactly 4. The dot is described in its eigenbasis `e⁰, e¹`; the
//! contact basis `δ⁰, δ¹` (the dot states the left and right leads tunnel
//! into) is a rotation of it by one angle and one phase.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{JclError, Result};

/// Width of every lead band, `σ(−Δ^D) = [0, 4]`.
pub const BAND_WIDTH: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Left, Side::Right];

    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    /// Position of the side in `[left, right]` ordered tables.
    pub fn index(self) -> usize {
        match self {
            Side::Left => 0,
            Side::Right => 1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Side::Left => "l",
            Side::Right => "r",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One semi-infinite lead: discrete Dirichlet Laplacian shifted by a constant bias.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeadParams {
    pub bias: f64,
    pub side: Side,
}

impl LeadParams {
    pub fn new(side: Side, bias: f64) -> Self {
        Self { bias, side }
    }

    /// Closed electron band `[v, v + 4]`.
    pub fn band(&self) -> (f64, f64) {
        (self.bias, self.bias + BAND_WIDTH)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DotParams {
    /// Lower dot eigenvalue λ₀.
    pub level_base: f64,
    /// Level spacing ε; the upper eigenvalue is λ₀ + ε.
    pub spacing: f64,
    /// Rotation angle θ ∈ [0, π) between eigen- and contact basis.
    pub contact_angle: f64,
    /// Relative phase φ ∈ [0, 2π) of the rotation.
    pub contact_phase: f64,
}

impl DotParams {
    pub fn levels(&self) -> [f64; 2] {
        [self.level_base, self.level_base + self.spacing]
    }
}

impl Default for DotParams {
    fn default() -> Self {
        Self {
            level_base: 0.0,
            spacing: 1.0,
            contact_angle: PI / 4.0,
            contact_phase: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonParams {
    pub omega: f64,
    /// Number of retained Fock states, `n = 0..cutoff`.
    pub cutoff: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub left: LeadParams,
    pub right: LeadParams,
    pub dot: DotParams,
    pub photon: PhotonParams,
    pub g_el: f64,
    pub g_ph: f64,
}

impl ModelConfig {
    pub fn lead(&self, side: Side) -> &LeadParams {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    pub fn lead_mut(&mut self, side: Side) -> &mut LeadParams {
        match side {
            Side::Left => &mut self.left,
            Side::Right => &mut self.right,
        }
    }

    pub fn with_cutoff(mut self, cutoff: usize) -> Self {
        self.photon.cutoff = cutoff;
        self
    }

    pub fn validate(self) -> Result<ValidatedConfig> {
        validate(self)
    }
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            left: LeadParams::new(Side::Left, 0.0),
            right: LeadParams::new(Side::Right, 0.0),
            dot: DotParams::default(),
            photon: PhotonParams {
                omega: 1.0,
                cutoff: 4,
            },
            g_el: 0.0,
            g_ph: 0.0,
        }
    }
}

/// Inverse temperature; `Infinite` is zero temperature and is kept exact.
///
/// Serialized as a number, or as the string `"inf"` when infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Beta {
    Finite(f64),
    Infinite,
}

impl Beta {
    pub fn is_infinite(self) -> bool {
        matches!(self, Beta::Infinite)
    }
}

impl From<Beta> for f64 {
    fn from(beta: Beta) -> f64 {
        match beta {
            Beta::Finite(b) => b,
            Beta::Infinite => f64::INFINITY,
        }
    }
}

impl Serialize for Beta {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Beta::Finite(b) => serializer.serialize_f64(*b),
            Beta::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Beta {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        let value = match Raw::deserialize(deserializer)? {
            Raw::Number(x) => x,
            Raw::Text(t) => match t.trim().to_ascii_lowercase().as_str() {
                "inf" | "infinity" | "+inf" => f64::INFINITY,
                other => other.parse::<f64>().map_err(serde::de::Error::custom)?,
            },
        };
        Beta::try_from(value).map_err(serde::de::Error::custom)
    }
}

impl TryFrom<f64> for Beta {
    type Error = JclError;

    fn try_from(value: f64) -> Result<Beta> {
        if value == f64::INFINITY {
            Ok(Beta::Infinite)
        } else if value.is_finite() && value > 0.0 {
            Ok(Beta::Finite(value))
        } else {
            Err(JclError::OutOfRange {
                field: "beta",
                value,
                range: "(0, inf]",
            })
        }
    }
}

/// Reservoir state: Fermi-Dirac leads and a Gibbs photon field at common β.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalState {
    pub beta: Beta,
    pub mu_left: f64,
    pub mu_right: f64,
}

impl ThermalState {
    pub fn new(beta: Beta, mu_left: f64, mu_right: f64) -> Self {
        Self {
            beta,
            mu_left,
            mu_right,
        }
    }

    pub fn mu(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.mu_left,
            Side::Right => self.mu_right,
        }
    }

    /// Gibbs weight `ρ^ph(n) = (1 − e^{−βω}) e^{−nβω}`; `δ_{0n}` at β = ∞.
    pub fn photon_weight(&self, omega: f64, n: usize) -> f64 {
        match self.beta {
            Beta::Infinite => {
                if n == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            Beta::Finite(beta) => {
                let x = beta * omega;
                -(-x).exp_m1() * (-(n as f64) * x).exp()
            }
        }
    }

    pub fn photon_weights(&self, omega: f64, cutoff: usize) -> Vec<f64> {
        (0..cutoff).map(|n| self.photon_weight(omega, n)).collect()
    }

    /// Fermi-Dirac function `1/(1 + e^{βx})`, the step `χ_{x<0}` at β = ∞.
    pub fn fermi_dirac(&self, x: f64) -> f64 {
        fermi_dirac(self.beta, x)
    }

    pub fn validate(&self) -> Result<()> {
        for (field, value) in [("mu_left", self.mu_left), ("mu_right", self.mu_right)] {
            if !value.is_finite() {
                return Err(JclError::NonFinite { field, value });
            }
        }
        if let Beta::Finite(b) = self.beta {
            Beta::try_from(b)?;
        }
        Ok(())
    }
}

pub fn fermi_dirac(beta: Beta, x: f64) -> f64 {
    match beta {
        Beta::Infinite => {
            if x < 0.0 {
                1.0
            } else {
                0.0
            }
        }
        Beta::Finite(b) => {
            let y = b * x;
            if y > 0.0 {
                let e = (-y).exp();
                e / (1.0 + e)
            } else {
                1.0 / (1.0 + y.exp())
            }
        }
    }
}

/// Contact basis `(δ⁰, δ¹)` in eigenbasis coordinates.
///
/// Rows of `[[cos θ, e^{iφ} sin θ], [−e^{−iφ} sin θ, cos θ]]`.
pub fn contact_basis(dot: &DotParams) -> [[Complex64; 2]; 2] {
    let (s, c) = dot.contact_angle.sin_cos();
    let phase = Complex64::from_polar(1.0, dot.contact_phase);
    [
        [Complex64::new(c, 0.0), phase * s],
        [-phase.conj() * s, Complex64::new(c, 0.0)],
    ]
}

/// A configuration that passed validation, with derived quantities cached.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedConfig {
    config: ModelConfig,
    contact: [[Complex64; 2]; 2],
}

impl ValidatedConfig {
    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    /// Contact vector of the given lead: `δ⁰` for left, `δ¹` for right.
    pub fn contact_vector(&self, side: Side) -> [Complex64; 2] {
        self.contact[side.index()]
    }

    pub fn contact_basis(&self) -> [[Complex64; 2]; 2] {
        self.contact
    }

    pub fn omega(&self) -> f64 {
        self.config.photon.omega
    }

    pub fn cutoff(&self) -> usize {
        self.config.photon.cutoff
    }

    /// Open band `(v_α + nω, v_α + 4 + nω)` of channel `(side, n)`.
    pub fn channel_band(&self, side: Side, n: usize) -> (f64, f64) {
        let shift = n as f64 * self.omega();
        let (lo, hi) = self.config.lead(side).band();
        (lo + shift, hi + shift)
    }

    /// All band edges of all retained channels, sorted and deduplicated.
    pub fn band_edges(&self) -> Vec<f64> {
        let mut edges: Vec<f64> = (0..self.cutoff())
            .flat_map(|n| {
                Side::BOTH.into_iter().flat_map(move |side| {
                    let (lo, hi) = self.channel_band(side, n);
                    [lo, hi]
                })
            })
            .collect();
        edges.sort_by(f64::total_cmp);
        edges.dedup();
        edges
    }

    /// Same physics at a different photon cutoff.
    pub fn with_cutoff(&self, cutoff: usize) -> Result<ValidatedConfig> {
        validate(self.config.with_cutoff(cutoff))
    }
}

impl std::ops::Deref for ValidatedConfig {
    type Target = ModelConfig;

    fn deref(&self) -> &ModelConfig {
        &self.config
    }
}

pub fn validate(config: ModelConfig) -> Result<ValidatedConfig> {
    let finite = [
        ("left.bias", config.left.bias),
        ("right.bias", config.right.bias),
        ("level_base", config.dot.level_base),
        ("spacing", config.dot.spacing),
        ("contact_angle", config.dot.contact_angle),
        ("contact_phase", config.dot.contact_phase),
        ("omega", config.photon.omega),
        ("g_el", config.g_el),
        ("g_ph", config.g_ph),
    ];
    for (field, value) in finite {
        if !value.is_finite() {
            return Err(JclError::NonFinite { field, value });
        }
    }
    if config.photon.omega <= 0.0 {
        return Err(JclError::NonPositiveOmega {
            field: "omega",
            value: config.photon.omega,
        });
    }
    if config.dot.spacing <= 0.0 {
        return Err(JclError::NonPositiveSpacing {
            field: "spacing",
            value: config.dot.spacing,
        });
    }
    if config.photon.cutoff == 0 {
        return Err(JclError::ZeroCutoff { field: "cutoff" });
    }
    if !(0.0..PI).contains(&config.dot.contact_angle) {
        return Err(JclError::OutOfRange {
            field: "contact_angle",
            value: config.dot.contact_angle,
            range: "[0, pi)",
        });
    }
    if !(0.0..2.0 * PI).contains(&config.dot.contact_phase) {
        return Err(JclError::OutOfRange {
            field: "contact_phase",
            value: config.dot.contact_phase,
            range: "[0, 2pi)",
        });
    }
    if config.left.side != Side::Left || config.right.side != Side::Right {
        return Err(JclError::OutOfRange {
            field: "side",
            value: f64::NAN,
            range: "left lead must be Left, right lead must be Right",
        });
    }
    Ok(ValidatedConfig {
        contact: contact_basis(&config.dot),
        config,
    })
}
