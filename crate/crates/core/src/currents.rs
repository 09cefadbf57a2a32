//! Landauer–Büttiker current integrals.
//!
//! Conventions: `e = 1` unless [`CurrentOptions::charge`] says otherwise, and
//! an electron current `J_α` is the rate of change of the charge in reservoir
//! `α`, so `J_α < 0` means electrons leave `α`. The photon current counts
//! photons produced per unit time; positive means light emission.
//!
//! All integrals run over the total energy λ. The domain starts at the lowest
//! band bottom and is clipped above where every channel occupancy
//! `ρ^ph(n) f(λ − μ_α − nω)` has dropped below [`OCCUPANCY_FLOOR`]. It is
//! split at every channel band edge and at every `μ_α + nω`, so square-root
//! band edges and zero-temperature steps sit on panel boundaries.
//!
//! The photon cutoff is chosen by iteration: start from
//! `max(4, ⌈(μ_max − λ_min)/ω⌉ + 3)` and add two Fock states until no
//! reported current moves by more than `max(rel · Σ|J|, floor)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{JclError, Result};
use crate::model::{fermi_dirac, Beta, Side, ThermalState, ValidatedConfig, BAND_WIDTH};
use crate::quadrature::{integrate, QuadOptions};
use crate::scattering::{contact_config, Channel, Scatterer};
use crate::symmetry::{classify, SymmetryFlags};

/// Occupancies below this are treated as zero when clipping the energy domain.
pub const OCCUPANCY_FLOOR: f64 = 1e-16;

/// Electron distribution of one lead as a function of `λ − μ`.
#[derive(Clone)]
pub enum DistributionKind {
    FermiDirac,
    /// Any bounded nonnegative function; the domain is not clipped for it.
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for DistributionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistributionKind::FermiDirac => f.write_str("FermiDirac"),
            DistributionKind::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DistributionSpec {
    pub kind: DistributionKind,
    /// Inverse temperature of the Fermi-Dirac leads and the Gibbs photon state.
    pub beta: Beta,
    pub mu_left: f64,
    pub mu_right: f64,
}

impl DistributionSpec {
    pub fn mu(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.mu_left,
            Side::Right => self.mu_right,
        }
    }

    fn thermal(&self) -> ThermalState {
        ThermalState::new(self.beta, self.mu_left, self.mu_right)
    }
}

impl From<&ThermalState> for DistributionSpec {
    fn from(t: &ThermalState) -> Self {
        Self {
            kind: DistributionKind::FermiDirac,
            beta: t.beta,
            mu_left: t.mu_left,
            mu_right: t.mu_right,
        }
    }
}

/// `f(λ − μ_lead − nω)`.
pub fn fermi(spec: &DistributionSpec, lead: Side, lambda: f64, n: usize, omega: f64) -> f64 {
    let x = lambda - spec.mu(lead) - n as f64 * omega;
    match &spec.kind {
        DistributionKind::FermiDirac => fermi_dirac(spec.beta, x),
        DistributionKind::Custom(f) => f(x),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutoffPolicy {
    /// Start at the default cutoff and iterate.
    Auto,
    /// Start at the given cutoff and iterate.
    Start(usize),
    /// Evaluate at exactly this cutoff; no convergence check.
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurrentOptions {
    pub quad: QuadOptions,
    pub cutoff: CutoffPolicy,
    pub cutoff_rel_tol: f64,
    pub cutoff_abs_floor: f64,
    pub max_cutoff: usize,
    /// Multiplies every electron current.
    pub charge: f64,
}

impl Default for CurrentOptions {
    fn default() -> Self {
        Self {
            quad: QuadOptions::default(),
            cutoff: CutoffPolicy::Auto,
            cutoff_rel_tol: 1e-8,
            cutoff_abs_floor: 1e-12,
            max_cutoff: 80,
            charge: 1.0,
        }
    }
}

impl CurrentOptions {
    pub fn with_quad_tol(rel_tol: f64) -> Self {
        Self {
            quad: QuadOptions::with_rel_tol(rel_tol),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhotonMethod {
    Direct,
    Decomposition,
}

/// Quadrature error estimate of each reported current.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct QuadErrors {
    pub j_contact_left: f64,
    pub j_photon_left: f64,
    pub j_total_left: f64,
    pub j_total_right: f64,
    pub j_photon_number: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurrentReport {
    pub j_contact_left: f64,
    pub j_photon_left: f64,
    pub j_total_left: f64,
    pub j_total_right: f64,
    pub j_photon_number: f64,
    pub quad_error: QuadErrors,
    pub nph_used: usize,
    pub converged: bool,
    pub symmetry: SymmetryFlags,
    pub photon_method: PhotonMethod,
}

impl CurrentReport {
    fn scale(&self) -> f64 {
        self.j_contact_left.abs()
            + self.j_photon_left.abs()
            + self.j_total_left.abs()
            + self.j_total_right.abs()
            + self.j_photon_number.abs()
    }

    fn max_change(&self, other: &CurrentReport) -> f64 {
        [
            self.j_contact_left - other.j_contact_left,
            self.j_photon_left - other.j_photon_left,
            self.j_total_left - other.j_total_left,
            self.j_total_right - other.j_total_right,
            self.j_photon_number - other.j_photon_number,
        ]
        .iter()
        .fold(0.0, |a, d| a.max(d.abs()))
    }

    /// The reported currents in a fixed order, for tables.
    pub fn values(&self) -> [f64; 5] {
        [
            self.j_contact_left,
            self.j_photon_left,
            self.j_total_left,
            self.j_total_right,
            self.j_photon_number,
        ]
    }

    pub const VALUE_NAMES: [&'static str; 5] =
        ["j_contact_left", "j_photon_left", "j_total_left", "j_total_right", "j_photon_number"];
}

/// Per-lead currents and their error estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeadCurrents {
    pub values: [f64; 2],
    pub errors: [f64; 2],
}

impl LeadCurrents {
    pub fn get(&self, side: Side) -> f64 {
        self.values[side.index()]
    }
}

/// Every quantity computed from the full S-matrix at one cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullCurrents {
    pub nph: usize,
    pub total: LeadCurrents,
    /// Photon-induced current from the flux-balance form, meaningful in commuting cases.
    pub direct: LeadCurrents,
    pub photon: f64,
    pub photon_error: f64,
    /// Paired (n > m) form of the photon current; present when time-reversible.
    pub photon_paired: Option<f64>,
}

// component layout of the full integrand
const TOTAL_L: usize = 0;
const TOTAL_R: usize = 1;
const PHOTON: usize = 2;
const PHOTON_PAIRED: usize = 3;
const DIRECT_L: usize = 4;
const DIRECT_R: usize = 5;
const FULL_DIM: usize = 6;

/// Default starting cutoff `max(4, ⌈(μ_max − λ_min)/ω⌉ + 3)`.
pub fn default_cutoff(config: &ValidatedConfig, spec: &DistributionSpec) -> usize {
    let lambda_min = config.left.bias.min(config.right.bias);
    let mu_max = spec.mu_left.max(spec.mu_right);
    let reach = ((mu_max - lambda_min) / config.omega()).ceil() + 3.0;
    if reach > 4.0 {
        reach as usize
    } else {
        4
    }
}

/// Largest `x` with `f(x) ≥ level` for Fermi-Dirac `f`, `+∞` for custom distributions.
fn occupancy_edge(spec: &DistributionSpec, level: f64) -> f64 {
    match (&spec.kind, spec.beta) {
        (DistributionKind::Custom(_), _) => f64::INFINITY,
        (DistributionKind::FermiDirac, Beta::Infinite) => 0.0,
        (DistributionKind::FermiDirac, Beta::Finite(b)) => (1.0 / level - 1.0).ln() / b,
    }
}

/// Integration domain and breakpoints for the full problem at the given cutoff.
fn full_domain(config: &ValidatedConfig, spec: &DistributionSpec, weights: &[f64]) -> Vec<f64> {
    let omega = config.omega();
    let lower = config.left.bias.min(config.right.bias);
    let mut upper = f64::NEG_INFINITY;
    for (n, &w) in weights.iter().enumerate() {
        if w <= OCCUPANCY_FLOOR {
            continue;
        }
        let edge = occupancy_edge(spec, OCCUPANCY_FLOOR / w);
        for side in Side::BOTH {
            let (lo, hi) = config.channel_band(side, n);
            let top = hi.min(spec.mu(side) + n as f64 * omega + edge);
            if top > lo {
                upper = upper.max(top);
            }
        }
    }
    if !(upper > lower) {
        return Vec::new();
    }
    let mut points = vec![lower, upper];
    points.extend(config.band_edges());
    for n in 0..config.cutoff() {
        for side in Side::BOTH {
            points.push(spec.mu(side) + n as f64 * omega);
        }
    }
    clip_points(points, lower, upper)
}

fn clip_points(mut points: Vec<f64>, lower: f64, upper: f64) -> Vec<f64> {
    points.retain(|p| *p >= lower && *p <= upper);
    points.sort_by(f64::total_cmp);
    points.dedup();
    points
}

/// Integrand of all full-S currents at total energy λ.
fn full_integrand(
    scatterer: &Scatterer,
    spec: &DistributionSpec,
    weights: &[f64],
    paired: bool,
    lambda: f64,
) -> Result<Vec<f64>> {
    let config = scatterer.config();
    let mut out = vec![0.0; FULL_DIM];
    if config.g_el == 0.0 {
        return Ok(out);
    }
    let s = match scatterer.smatrix(lambda) {
        Ok(s) => s,
        Err(JclError::NoOpenChannels { .. }) => return Ok(out),
        Err(e) => return Err(e),
    };
    let table = s.cross_sections();
    let channels: Vec<Channel> = table.channels.iter().collect();
    let omega = config.omega();
    let occ: Vec<f64> = channels
        .iter()
        .map(|c| weights[c.n] * fermi(spec, c.lead, lambda, c.n, omega))
        .collect();
    let inv = 1.0 / (2.0 * PI);
    let k = channels.len();
    for (i, out_c) in channels.iter().enumerate() {
        let lead_total = if out_c.lead == Side::Left { TOTAL_L } else { TOTAL_R };
        let lead_direct = if out_c.lead == Side::Left { DIRECT_L } else { DIRECT_R };
        // outgoing flux of (α, n) summed over final channels, i.e. a column sum
        let mut column = 0.0;
        for (j, in_c) in channels.iter().enumerate() {
            let sigma = table.values[(i, j)];
            column += table.values[(j, i)];
            out[lead_total] -= inv * (occ[i] - occ[j]) * sigma;
            out[lead_direct] += inv * occ[j] * sigma;
            let dn = out_c.n as f64 - in_c.n as f64;
            out[PHOTON] += inv * dn * occ[j] * sigma;
            if paired && out_c.n > in_c.n {
                out[PHOTON_PAIRED] += inv * dn * (occ[j] - occ[i]) * sigma;
            }
        }
        out[lead_direct] -= inv * occ[i] * column;
    }
    debug_assert_eq!(k, occ.len());
    Ok(out)
}

/// All full-S currents at the cutoff stored in `config`.
pub fn full_currents_at_cutoff(
    config: &ValidatedConfig,
    spec: &DistributionSpec,
    opts: &CurrentOptions,
) -> Result<FullCurrents> {
    let thermal = spec.thermal();
    let weights = thermal.photon_weights(config.omega(), config.cutoff());
    let paired = classify(config, &thermal).time_reversible;
    let scatterer = Scatterer::new(config);
    let points = full_domain(config, spec, &weights);
    let r = integrate(
        |lambda| full_integrand(&scatterer, spec, &weights, paired, lambda),
        FULL_DIM,
        &points,
        &opts.quad,
    )?;
    let q = opts.charge;
    let lead = |a: usize, b: usize| LeadCurrents {
        values: [q * r.values[a], q * r.values[b]],
        errors: [q.abs() * r.errors[a], q.abs() * r.errors[b]],
    };
    Ok(FullCurrents {
        nph: config.cutoff(),
        total: lead(TOTAL_L, TOTAL_R),
        direct: lead(DIRECT_L, DIRECT_R),
        photon: r.values[PHOTON],
        photon_error: r.errors[PHOTON],
        photon_paired: paired.then_some(r.values[PHOTON_PAIRED]),
    })
}

/// Contact current of both leads; `J^c_r = −J^c_l` identically.
pub fn contact_currents(config: &ValidatedConfig, spec: &DistributionSpec, opts: &CurrentOptions) -> Result<LeadCurrents> {
    let zero = LeadCurrents {
        values: [0.0; 2],
        errors: [0.0; 2],
    };
    let (vl, vr) = (config.left.bias, config.right.bias);
    let lower = vl.max(vr);
    let mut upper = vl.min(vr) + BAND_WIDTH;
    let edge = occupancy_edge(spec, OCCUPANCY_FLOOR);
    upper = upper.min(spec.mu_left.max(spec.mu_right) + edge);
    if !(upper > lower) || config.g_el == 0.0 {
        return Ok(zero);
    }
    let contact = Scatterer::new(&contact_config(config)?);
    let l = Channel::new(Side::Left, 0);
    let r = Channel::new(Side::Right, 0);
    let inv = 1.0 / (2.0 * PI);
    let integrand = |lambda: f64| -> Result<Vec<f64>> {
        let dist = fermi(spec, Side::Left, lambda, 0, 0.0) - fermi(spec, Side::Right, lambda, 0, 0.0);
        if dist == 0.0 {
            return Ok(vec![0.0]);
        }
        let s = contact.smatrix(lambda)?;
        let sigma = s.get(r, l).map_or(0.0, |t| t.norm_sqr());
        Ok(vec![-inv * dist * sigma])
    };
    let points = clip_points(vec![lower, upper, spec.mu_left, spec.mu_right], lower, upper);
    let res = integrate(integrand, 1, &points, &opts.quad)?;
    let v = opts.charge * res.values[0];
    let e = opts.charge.abs() * res.errors[0];
    Ok(LeadCurrents {
        values: [v, -v],
        errors: [e, e],
    })
}

fn report_from(
    config: &ValidatedConfig,
    spec: &DistributionSpec,
    contact: &LeadCurrents,
    full: &FullCurrents,
    converged: bool,
) -> Result<CurrentReport> {
    let symmetry = classify(config, &spec.thermal());
    let (j_photon_left, photon_error, photon_method) = if symmetry.commuting_case() {
        (full.direct.values[0], full.direct.errors[0], PhotonMethod::Direct)
    } else {
        (
            full.total.values[0] - contact.values[0],
            full.total.errors[0] + contact.errors[0],
            PhotonMethod::Decomposition,
        )
    };
    if let Some(paired) = full.photon_paired {
        let scale = full.photon.abs().max(paired.abs());
        let allowed = 10.0 * full.photon_error + 1e-9 * scale + 1e-13;
        if (paired - full.photon).abs() > allowed {
            return Err(JclError::ScenarioAssertionFailed(format!(
                "paired photon current {paired:e} disagrees with {:e}",
                full.photon
            )));
        }
    }
    Ok(CurrentReport {
        j_contact_left: contact.values[0],
        j_photon_left,
        j_total_left: full.total.values[0],
        j_total_right: full.total.values[1],
        j_photon_number: full.photon,
        quad_error: QuadErrors {
            j_contact_left: contact.errors[0],
            j_photon_left: photon_error,
            j_total_left: full.total.errors[0],
            j_total_right: full.total.errors[1],
            j_photon_number: full.photon_error,
        },
        nph_used: full.nph,
        converged,
        symmetry,
        photon_method,
    })
}

/// All currents, with the photon cutoff chosen by the convergence policy.
///
/// Returns a report with `converged = false` when the cutoff cap is reached
/// (or when the cutoff is fixed and no check was made).
pub fn compute_currents_with(
    config: &ValidatedConfig,
    spec: &DistributionSpec,
    opts: &CurrentOptions,
) -> Result<CurrentReport> {
    spec.thermal().validate()?;
    let contact = contact_currents(config, spec, opts)?;
    let start = match opts.cutoff {
        CutoffPolicy::Fixed(n) => {
            let full = full_currents_at_cutoff(&config.with_cutoff(n)?, spec, opts)?;
            return report_from(config, spec, &contact, &full, false);
        }
        CutoffPolicy::Start(n) => n,
        CutoffPolicy::Auto => default_cutoff(config, spec),
    };
    let mut n = start.max(1);
    let mut prev = report_from(
        config,
        spec,
        &contact,
        &full_currents_at_cutoff(&config.with_cutoff(n)?, spec, opts)?,
        false,
    )?;
    loop {
        n += 2;
        let full = full_currents_at_cutoff(&config.with_cutoff(n)?, spec, opts)?;
        let mut cur = report_from(config, spec, &contact, &full, false)?;
        let target = (opts.cutoff_rel_tol * cur.scale()).max(opts.cutoff_abs_floor);
        if cur.max_change(&prev) <= target {
            cur.converged = true;
            return Ok(cur);
        }
        if n + 2 > opts.max_cutoff {
            return Ok(cur);
        }
        prev = cur;
    }
}

pub fn compute_currents(config: &ValidatedConfig, thermal: &ThermalState, opts: &CurrentOptions) -> Result<CurrentReport> {
    compute_currents_with(config, &DistributionSpec::from(thermal), opts)
}

fn require_converged(config: &ValidatedConfig, thermal: &ThermalState, opts: &CurrentOptions) -> Result<CurrentReport> {
    let report = compute_currents(config, thermal, opts)?;
    if !report.converged && !matches!(opts.cutoff, CutoffPolicy::Fixed(_)) {
        return Err(JclError::CutoffNotConverged {
            nph: report.nph_used,
            change: f64::NAN,
            target: opts.cutoff_rel_tol,
        });
    }
    Ok(report)
}

/// `J^c_α = −(1/2π) ∫ (f(λ − μ_α) − f(λ − μ_κ)) σ_c(λ) dλ`, per lead.
pub fn contact_electron_current(config: &ValidatedConfig, thermal: &ThermalState, opts: &CurrentOptions) -> Result<LeadCurrents> {
    contact_currents(config, &DistributionSpec::from(thermal), opts)
}

/// Total electron current per lead from the full S-matrix.
pub fn total_electron_current(config: &ValidatedConfig, thermal: &ThermalState, opts: &CurrentOptions) -> Result<[f64; 2]> {
    let r = require_converged(config, thermal, opts)?;
    Ok([r.j_total_left, r.j_total_right])
}

/// Photon-induced electron current per lead and the method used.
///
/// In the commuting cases it is the direct spectral integral; otherwise the
/// difference of total and contact currents.
pub fn photon_induced_electron_current(
    config: &ValidatedConfig,
    thermal: &ThermalState,
    opts: &CurrentOptions,
) -> Result<([f64; 2], PhotonMethod)> {
    let spec = DistributionSpec::from(thermal);
    let r = require_converged(config, thermal, opts)?;
    let full = full_currents_at_cutoff(&config.with_cutoff(r.nph_used)?, &spec, opts)?;
    let contact = contact_currents(config, &spec, opts)?;
    let values = match r.photon_method {
        PhotonMethod::Direct => full.direct.values,
        PhotonMethod::Decomposition => [
            full.total.values[0] - contact.values[0],
            full.total.values[1] - contact.values[1],
        ],
    };
    Ok((values, r.photon_method))
}

/// Photon production rate `J_ph`; positive means emission.
pub fn photon_current(config: &ValidatedConfig, thermal: &ThermalState, opts: &CurrentOptions) -> Result<f64> {
    Ok(require_converged(config, thermal, opts)?.j_photon_number)
}

/// The contact scattering conserves photon number, so its photon current vanishes.
pub fn contact_photon_current(_config: &ValidatedConfig, _thermal: &ThermalState) -> f64 {
    0.0
}

/// Evaluates the contact photon current as an integral over photon-number
/// changing contact cross-sections and checks that it is below `1e-12`.
pub fn contact_photon_current_debug(config: &ValidatedConfig, thermal: &ThermalState, opts: &CurrentOptions) -> Result<f64> {
    let mut decoupled = *config.config();
    decoupled.g_ph = 0.0;
    let decoupled = crate::model::validate(decoupled)?;
    let full = full_currents_at_cutoff(&decoupled, &DistributionSpec::from(thermal), opts)?;
    if full.photon.abs() > 1e-12 {
        return Err(JclError::ScenarioAssertionFailed(format!(
            "contact photon current {:e} is not zero",
            full.photon
        )));
    }
    Ok(full.photon)
}

/// Parameters of the light-absorbing configuration: `v_r = 0`, `v_l = ω`,
/// `μ_l = 0`, `μ_r = ω`, with `ω ≥ 4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LightAbsorbingScenario {
    pub omega: f64,
    pub beta: f64,
    pub g_el: f64,
    pub g_ph: f64,
    pub level_base: f64,
    pub spacing: f64,
}

impl LightAbsorbingScenario {
    pub fn new(omega: f64) -> Self {
        Self {
            omega,
            beta: 1.0,
            g_el: 0.2,
            g_ph: 0.2,
            level_base: omega + 1.0,
            spacing: 1.0,
        }
    }

    pub fn config(&self) -> Result<(ValidatedConfig, ThermalState)> {
        let config = crate::model::ModelConfig {
            left: crate::model::LeadParams::new(Side::Left, self.omega),
            right: crate::model::LeadParams::new(Side::Right, 0.0),
            dot: crate::model::DotParams {
                level_base: self.level_base,
                spacing: self.spacing,
                ..Default::default()
            },
            photon: crate::model::PhotonParams {
                omega: self.omega,
                cutoff: 4,
            },
            g_el: self.g_el,
            g_ph: self.g_ph,
        };
        let thermal = ThermalState::new(Beta::try_from(self.beta)?, 0.0, self.omega);
        Ok((crate::model::validate(config)?, thermal))
    }

    /// Computes the currents and checks `J_ph ≤ tol` and `J^ph_el,l ≤ tol`.
    ///
    /// The report is returned inside the error message when a sign check fails.
    pub fn run(&self, opts: &CurrentOptions, tol: f64) -> Result<CurrentReport> {
        if !(self.omega >= BAND_WIDTH) {
            return Err(JclError::OutOfRange {
                field: "omega",
                value: self.omega,
                range: "[4, inf)",
            });
        }
        let (config, thermal) = self.config()?;
        let report = compute_currents(&config, &thermal, opts)?;
        let mut failures = Vec::new();
        if report.j_photon_number > tol {
            failures.push(format!("J_ph = {:e} > {tol:e}", report.j_photon_number));
        }
        if report.j_photon_left > tol {
            failures.push(format!("J^ph_el,l = {:e} > {tol:e}", report.j_photon_left));
        }
        if failures.is_empty() {
            Ok(report)
        } else {
            Err(JclError::ScenarioAssertionFailed(failures.join("; ")))
        }
    }
}

pub fn light_absorbing_scenario(omega: f64) -> Result<CurrentReport> {
    LightAbsorbingScenario::new(omega).run(&CurrentOptions::default(), 1e-9)
}
