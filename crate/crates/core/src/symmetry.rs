//! Structural symmetry predicates and the l↔r relabeling of cross-section tables.
//!
//! Every predicate compares configured values exactly. No tolerance is
//! applied: the cases are properties of the parameters, not of numerics.

use std::f64::consts::FRAC_PI_4;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::model::{ModelConfig, Side, ThermalState, BAND_WIDTH};
use crate::scattering::{ChannelSet, CrossSectionTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SymmetryFlags {
    pub time_reversible: bool,
    pub mirror_symmetric: bool,
    /// Equal chemical potentials.
    #[serde(rename = "case_E")]
    pub case_e: bool,
    /// Lead bands disjoint (touching counts).
    #[serde(rename = "case_S")]
    pub case_s: bool,
    /// Contact basis equal to the eigenbasis.
    #[serde(rename = "case_C")]
    pub case_c: bool,
}

impl SymmetryFlags {
    /// True when the contact scattering commutes with the photon coupling,
    /// so the photon-induced current has a direct spectral formula.
    pub fn commuting_case(&self) -> bool {
        self.case_e || self.case_s || self.case_c
    }
}

/// Real contact vectors: `φ = 0`, or `θ = 0` where the phase drops out.
/// Couplings are real by construction.
pub fn is_time_reversible(config: &ModelConfig) -> bool {
    config.dot.contact_phase == 0.0 || config.dot.contact_angle == 0.0
}

/// Equal biases and the symmetric contact basis `θ = π/4`, `φ = 0`.
/// Other mirror unitaries are not searched for.
pub fn is_mirror_symmetric(config: &ModelConfig) -> bool {
    config.left.bias == config.right.bias
        && config.dot.contact_angle == FRAC_PI_4
        && config.dot.contact_phase == 0.0
}

pub fn bands_disjoint(config: &ModelConfig) -> bool {
    let (vl, vr) = (config.left.bias, config.right.bias);
    vl >= vr + BAND_WIDTH || vr >= vl + BAND_WIDTH
}

pub fn classify(config: &ModelConfig, thermal: &ThermalState) -> SymmetryFlags {
    SymmetryFlags {
        time_reversible: is_time_reversible(config),
        mirror_symmetric: is_mirror_symmetric(config),
        case_e: thermal.mu_left == thermal.mu_right,
        case_s: bands_disjoint(config),
        case_c: config.dot.contact_angle == 0.0,
    }
}

/// Relabels `l ↔ r` in both indices: the result satisfies
/// `σ'(m_α, n_κ) = σ(m_α', n_κ')`.
pub fn mirror_swap(table: &CrossSectionTable) -> CrossSectionTable {
    let channels = ChannelSet::new(table.lambda, table.channels.iter().map(|c| c.mirrored()).collect());
    let mut values = DMatrix::zeros(channels.len(), channels.len());
    for (i, out) in table.channels.iter().enumerate() {
        for (j, inc) in table.channels.iter().enumerate() {
            let a = channels.position(out.mirrored()).expect("mirrored set");
            let b = channels.position(inc.mirrored()).expect("mirrored set");
            values[(a, b)] = table.values[(i, j)];
        }
    }
    CrossSectionTable {
        lambda: table.lambda,
        channels,
        values,
    }
}

/// Largest entrywise difference, treating channels missing from one table as closed.
pub fn table_difference(a: &CrossSectionTable, b: &CrossSectionTable) -> f64 {
    let mut worst: f64 = 0.0;
    for set in [&a.channels, &b.channels] {
        for out in set.iter() {
            for inc in set.iter() {
                worst = worst.max((a.sigma(out, inc) - b.sigma(out, inc)).abs());
            }
        }
    }
    worst
}

/// Lead relabeling of a whole configuration and thermal state.
pub fn mirror_config(config: &ModelConfig, thermal: &ThermalState) -> (ModelConfig, ThermalState) {
    let mut c = *config;
    c.left.bias = config.right.bias;
    c.right.bias = config.left.bias;
    c.left.side = Side::Left;
    c.right.side = Side::Right;
    let t = ThermalState::new(thermal.beta, thermal.mu_right, thermal.mu_left);
    (c, t)
}
