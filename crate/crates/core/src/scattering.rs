//! On-shell scattering matrix over the open `(lead, photon number)` channels.
//!
//! The leads enter through their surface Green functions as a self-energy on
//! the dot ⊗ photon space. With `G(λ) = (λ − H_D − Σ(λ))⁻¹` and level widths
//! `Γ_c`, the S-matrix over open channels is
//!
//! ```text
//! S_cc' = δ_cc' − i √(Γ_c Γ_c') ⟨d_c| G(λ) |d_c'⟩
//! ```
//!
//! where `d_(α,n) = δ^α ⊗ Υ_n` is the dot state lead `α` tunnels into. Rows are
//! outgoing channels, columns incoming. Closed channels stay in `Σ` through
//! the real part of their surface Green function.
//!
//! Only `|S_cc'|²` is convention independent; channel phases follow from the
//! formula above (`S = I` when the leads are decoupled).

use std::collections::HashMap;
use std::fmt;

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;

use crate::dot::{build_dot_hamiltonian, state_index, BasisTag};
use crate::error::{JclError, Result};
use crate::lead::{gamma, onsite, surface_gf_real};
use crate::model::{validate, ModelConfig, Side, ValidatedConfig};

/// Condition estimate above which the resolvent is treated as singular.
pub const MAX_CONDITION: f64 = 1e14;

/// Pivot-block condition estimate above which the block sweep hands over to dense LU.
const TRIDIAGONAL_CONDITION: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Channel {
    pub lead: Side,
    pub n: usize,
}

impl Channel {
    pub fn new(lead: Side, n: usize) -> Self {
        Self { lead, n }
    }

    /// Same photon number, opposite lead.
    pub fn mirrored(self) -> Self {
        Self::new(self.lead.other(), self.n)
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.n, self.lead)
    }
}

/// Channels open at one total energy, ordered by `n` then left before right.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub lambda: f64,
    pub channels: Vec<Channel>,
    index: HashMap<Channel, usize>,
}

impl ChannelSet {
    pub fn new(lambda: f64, mut channels: Vec<Channel>) -> Self {
        channels.sort_by_key(|c| (c.n, c.lead));
        let index = channels.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        Self {
            lambda,
            channels,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn position(&self, channel: Channel) -> Option<usize> {
        self.index.get(&channel).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = Channel> + '_ {
        self.channels.iter().copied()
    }
}

/// Channel `(α, n)` is open at λ iff `λ − nω ∈ (v_α, v_α + 4)`.
pub fn is_open(config: &ModelConfig, channel: Channel, lambda: f64) -> bool {
    let w = lambda - onsite(config.lead(channel.lead), channel.n, config.photon.omega);
    w.abs() < 2.0
}

pub fn open_channels(config: &ValidatedConfig, lambda: f64) -> ChannelSet {
    let channels = (0..config.cutoff())
        .flat_map(|n| Side::BOTH.into_iter().map(move |side| Channel::new(side, n)))
        .filter(|&c| is_open(config, c, lambda))
        .collect();
    ChannelSet::new(lambda, channels)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SMatrix {
    pub lambda: f64,
    pub channel_set: ChannelSet,
    pub entries: DMatrix<Complex64>,
}

impl SMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, out: Channel, inc: Channel) -> Option<Complex64> {
        let i = self.channel_set.position(out)?;
        let j = self.channel_set.position(inc)?;
        Some(self.entries[(i, j)])
    }

    /// `‖S†S − I‖_max`.
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.entries.adjoint() * &self.entries;
        max_deviation_from_identity(&d)
    }

    pub fn cross_sections(&self) -> CrossSectionTable {
        cross_sections(self)
    }
}

fn max_deviation_from_identity(m: &DMatrix<Complex64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let id = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((m[(i, j)] - id).norm());
        }
    }
    worst
}

/// `σ_cc' = |S_cc' − δ_cc'|²`, outgoing channel first.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossSectionTable {
    pub lambda: f64,
    pub channels: ChannelSet,
    pub values: DMatrix<f64>,
}

impl CrossSectionTable {
    /// `σ_{n_α m_κ}`: into `(α, n)` from `(κ, m)`; zero if either is closed.
    pub fn sigma(&self, out: Channel, inc: Channel) -> f64 {
        match (self.channels.position(out), self.channels.position(inc)) {
            (Some(i), Some(j)) => self.values[(i, j)],
            _ => 0.0,
        }
    }

    /// `max_k |Σ_j σ_jk − Σ_j σ_kj|`.
    pub fn sum_rule_defect(&self) -> f64 {
        let n = self.values.nrows();
        (0..n)
            .map(|k| {
                let col: f64 = (0..n).map(|j| self.values[(j, k)]).sum();
                let row: f64 = (0..n).map(|j| self.values[(k, j)]).sum();
                (col - row).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `max |σ_jk − σ_kj|`.
    pub fn reciprocity_defect(&self) -> f64 {
        let v = &self.values;
        (v - v.transpose()).iter().fold(0.0, |a, x| a.max(x.abs()))
    }
}

pub fn cross_sections(s: &SMatrix) -> CrossSectionTable {
    let n = s.dim();
    let values = DMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        (s.entries[(i, j)] - id).norm_sqr()
    });
    CrossSectionTable {
        lambda: s.lambda,
        channels: s.channel_set.clone(),
        values,
    }
}

/// Dot-side data reused across energies: `H_D` and the contact vectors, all in
/// the dot eigenbasis.
#[derive(Debug, Clone)]
pub struct Scatterer {
    config: ValidatedConfig,
    hamiltonian: DMatrix<Complex64>,
}

impl Scatterer {
    pub fn new(config: &ValidatedConfig) -> Self {
        Self {
            config: config.clone(),
            hamiltonian: build_dot_hamiltonian(config, BasisTag::Eigenbasis).matrix,
        }
    }

    pub fn config(&self) -> &ValidatedConfig {
        &self.config
    }

    /// `d_(α,n) = δ^α ⊗ Υ_n` in eigenbasis coordinates.
    pub fn contact_state(&self, channel: Channel) -> DVector<Complex64> {
        let dim = 2 * self.config.cutoff();
        let delta = self.config.contact_vector(channel.lead);
        let mut d = DVector::zeros(dim);
        for (i, &c) in delta.iter().enumerate() {
            d[state_index(i, channel.n)] = c;
        }
        d
    }

    fn surface(&self, channel: Channel, lambda: f64) -> Result<Complex64> {
        let lead = self.config.lead(channel.lead);
        let w = lambda - onsite(lead, channel.n, self.config.omega());
        surface_gf_real(w).ok_or(JclError::BandEdgeSingularity { lambda })
    }

    /// `Σ(λ) = Σ_(α,n) g_el² g^r_(α,n)(λ) |d_(α,n)⟩⟨d_(α,n)|` over all retained channels.
    pub fn self_energy(&self, lambda: f64) -> Result<DMatrix<Complex64>> {
        let dim = 2 * self.config.cutoff();
        let g2 = self.config.g_el * self.config.g_el;
        let mut sigma = DMatrix::zeros(dim, dim);
        if g2 == 0.0 {
            return Ok(sigma);
        }
        for n in 0..self.config.cutoff() {
            for side in Side::BOTH {
                let channel = Channel::new(side, n);
                let g = self.surface(channel, lambda)? * g2;
                let delta = self.config.contact_vector(side);
                for i in 0..2 {
                    for j in 0..2 {
                        sigma[(state_index(i, n), state_index(j, n))] += g * delta[i] * delta[j].conj();
                    }
                }
            }
        }
        Ok(sigma)
    }

    /// `Σ` restricted to photon block `n`.
    fn self_energy_block(&self, lambda: f64, n: usize) -> Result<Matrix2<Complex64>> {
        let g2 = self.config.g_el * self.config.g_el;
        let mut block = Matrix2::zeros();
        if g2 == 0.0 {
            return Ok(block);
        }
        for side in Side::BOTH {
            let g = self.surface(Channel::new(side, n), lambda)? * g2;
            let delta = self.config.contact_vector(side);
            for i in 0..2 {
                for j in 0..2 {
                    block[(i, j)] += g * delta[i] * delta[j].conj();
                }
            }
        }
        Ok(block)
    }

    fn hamiltonian_block(&self, n: usize, m: usize) -> Matrix2<Complex64> {
        self.hamiltonian.fixed_view::<2, 2>(2 * n, 2 * m).into_owned()
    }

    /// Columns of `G(λ)` belonging to photon block `m`, for every `m` in `blocks`.
    ///
    /// Leads conserve photon number and the Jaynes-Cummings coupling only links
    /// neighbouring photon numbers, so `λ − H_D − Σ` is block tridiagonal with
    /// 2×2 blocks and a block Thomas sweep solves it in linear time. Returns
    /// `None` if a pivot block is too ill-conditioned for the sweep.
    fn green_columns_tridiagonal(&self, lambda: f64, blocks: &[usize]) -> Result<Option<Vec<DMatrix<Complex64>>>> {
        let n_ph = self.config.cutoff();
        let id = Matrix2::<Complex64>::identity();
        // inverses of the pivot blocks and the elimination multipliers
        let mut pivot_inv: Vec<Matrix2<Complex64>> = Vec::with_capacity(n_ph);
        let mut multiplier: Vec<Matrix2<Complex64>> = Vec::with_capacity(n_ph);
        let (mut largest, mut smallest) = (0.0f64, f64::INFINITY);
        for n in 0..n_ph {
            let mut p = id * Complex64::new(lambda, 0.0) - self.hamiltonian_block(n, n) - self.self_energy_block(lambda, n)?;
            let mut mult = Matrix2::zeros();
            if n > 0 {
                let lower = -self.hamiltonian_block(n, n - 1);
                let upper = -self.hamiltonian_block(n - 1, n);
                mult = lower * pivot_inv[n - 1];
                p -= mult * upper;
            }
            let norm = p.norm();
            let det = p.determinant().norm();
            largest = largest.max(norm);
            smallest = smallest.min(if norm > 0.0 { det / norm } else { 0.0 });
            match p.try_inverse() {
                Some(inv) => pivot_inv.push(inv),
                None => return Ok(None),
            }
            multiplier.push(mult);
        }
        if !(largest / smallest <= TRIDIAGONAL_CONDITION) {
            return Ok(None);
        }

        let mut out = Vec::with_capacity(blocks.len());
        for &m in blocks {
            // forward sweep on the right-hand side e_m ⊗ I₂
            let mut y: Vec<Matrix2<Complex64>> = vec![Matrix2::zeros(); n_ph];
            y[m] = id;
            for n in (m + 1)..n_ph {
                y[n] = -multiplier[n] * y[n - 1];
            }
            let mut x: Vec<Matrix2<Complex64>> = vec![Matrix2::zeros(); n_ph];
            x[n_ph - 1] = pivot_inv[n_ph - 1] * y[n_ph - 1];
            for n in (0..n_ph - 1).rev() {
                let upper = -self.hamiltonian_block(n, n + 1);
                x[n] = pivot_inv[n] * (y[n] - upper * x[n + 1]);
            }
            let mut col = DMatrix::zeros(2 * n_ph, 2);
            for (n, block) in x.iter().enumerate() {
                col.fixed_view_mut::<2, 2>(2 * n, 0).copy_from(block);
            }
            out.push(col);
        }
        Ok(Some(out))
    }

    /// Dense LU fallback returning the same block columns as the tridiagonal sweep.
    fn green_columns_dense(&self, lambda: f64, blocks: &[usize]) -> Result<Vec<DMatrix<Complex64>>> {
        let dim = 2 * self.config.cutoff();
        let sigma = self.self_energy(lambda)?;
        let a = DMatrix::from_diagonal_element(dim, dim, Complex64::new(lambda, 0.0))
            - &self.hamiltonian
            - sigma;
        let lu = a.lu();
        let condition = pivot_condition(lu.u().diagonal().iter());
        if !(condition <= MAX_CONDITION) {
            return Err(JclError::SingularLinearSystem { lambda, condition });
        }
        blocks
            .iter()
            .map(|&m| {
                let mut rhs = DMatrix::zeros(dim, 2);
                rhs[(2 * m, 0)] = Complex64::new(1.0, 0.0);
                rhs[(2 * m + 1, 1)] = Complex64::new(1.0, 0.0);
                lu.solve(&rhs).ok_or(JclError::SingularLinearSystem {
                    lambda,
                    condition: f64::INFINITY,
                })
            })
            .collect()
    }

    pub fn smatrix(&self, lambda: f64) -> Result<SMatrix> {
        self.smatrix_with(lambda, false)
    }

    /// Same as [`Scatterer::smatrix`] but always through a dense LU factorization.
    pub fn smatrix_dense(&self, lambda: f64) -> Result<SMatrix> {
        self.smatrix_with(lambda, true)
    }

    fn smatrix_with(&self, lambda: f64, dense: bool) -> Result<SMatrix> {
        let channel_set = open_channels(&self.config, lambda);
        if channel_set.is_empty() {
            return Err(JclError::NoOpenChannels { lambda });
        }
        let mut blocks: Vec<usize> = channel_set.iter().map(|c| c.n).collect();
        blocks.dedup();
        let columns = if dense {
            self.green_columns_dense(lambda, &blocks)?
        } else {
            match self.green_columns_tridiagonal(lambda, &blocks)? {
                Some(cols) => cols,
                None => self.green_columns_dense(lambda, &blocks)?,
            }
        };
        let block_of = |n: usize| blocks.iter().position(|&b| b == n).expect("open block");

        let omega = self.config.omega();
        let g_el = self.config.g_el;
        let widths: Vec<f64> = channel_set
            .iter()
            .map(|c| gamma(self.config.lead(c.lead), c.n, omega, lambda, g_el).sqrt())
            .collect();
        let channels: Vec<Channel> = channel_set.iter().collect();
        let k = channels.len();
        let i_unit = Complex64::new(0.0, 1.0);
        let entries = DMatrix::from_fn(k, k, |r, c| {
            let (out, inc) = (channels[r], channels[c]);
            let col = &columns[block_of(inc.n)];
            let d_out = self.config.contact_vector(out.lead);
            let d_in = self.config.contact_vector(inc.lead);
            // ⟨d_out| G |d_in⟩
            let mut amp = Complex64::new(0.0, 0.0);
            for i in 0..2 {
                for j in 0..2 {
                    amp += d_out[i].conj() * col[(state_index(i, out.n), j)] * d_in[j];
                }
            }
            let id = if r == c { 1.0 } else { 0.0 };
            id - i_unit * widths[r] * widths[c] * amp
        });
        Ok(SMatrix {
            lambda,
            channel_set,
            entries,
        })
    }
}

/// Ratio of largest to smallest LU pivot magnitude, a cheap condition estimate.
fn pivot_condition<'a>(pivots: impl Iterator<Item = &'a Complex64>) -> f64 {
    let (lo, hi) = pivots.fold((f64::INFINITY, 0.0f64), |(lo, hi), p| {
        let m = p.norm();
        (lo.min(m), hi.max(m))
    });
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

pub fn self_energy(config: &ValidatedConfig, lambda: f64) -> Result<DMatrix<Complex64>> {
    Scatterer::new(config).self_energy(lambda)
}

pub fn smatrix(config: &ValidatedConfig, lambda: f64) -> Result<SMatrix> {
    Scatterer::new(config).smatrix(lambda)
}

/// Electron-only problem behind the contact scattering: no photons, one Fock state.
pub fn contact_config(config: &ModelConfig) -> Result<ValidatedConfig> {
    let mut c = *config;
    c.g_ph = 0.0;
    c.photon.cutoff = 1;
    validate(c)
}

/// Contact scattering matrix `s_c` at electron energy `λ_rel`.
pub fn contact_smatrix(config: &ModelConfig, lambda_rel: f64) -> Result<SMatrix> {
    smatrix(&contact_config(config)?, lambda_rel)
}

/// Left-to-right contact cross-section `σ_c(λ)`; zero unless both leads are open.
pub fn contact_cross_section(scatterer: &Scatterer, lambda: f64) -> Result<f64> {
    let s = scatterer.smatrix(lambda)?;
    let l = Channel::new(Side::Left, 0);
    let r = Channel::new(Side::Right, 0);
    Ok(s.get(r, l).map_or(0.0, |t| t.norm_sqr()))
}
