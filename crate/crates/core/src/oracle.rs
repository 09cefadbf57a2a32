//! Wave-function matching on the lattice, an independent route to the S-matrix.
//!
//! Each lead channel keeps `window` explicit sites. Beyond them the wave
//! function is fixed to its exact asymptotic form: incoming plus outgoing
//! plane waves (flux normalized by `1/√(2 sin k)`) in open channels, and a
//! decaying power `ζ^x` with `ζ + 1/ζ = a − λ`, `|ζ| < 1`, in closed ones.
//! The lattice Schrödinger equation is then solved exactly on the dot and on
//! every explicit site. No Green function or self-energy is used.
//!
//! The raw outgoing amplitudes are measured against the hard-wall reflection
//! (−1 for a decoupled lead); the returned matrix multiplies them by −1 so
//! that decoupled leads give `S = I`, the convention of [`crate::scattering`].
//!
//! Slow by design; intended for validation.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::dot::{build_dot_hamiltonian, state_index, BasisTag};
use crate::error::{JclError, Result};
use crate::lead::onsite;
use crate::model::{Side, ValidatedConfig};
use crate::scattering::{open_channels, Channel, SMatrix, MAX_CONDITION};

pub const DEFAULT_WINDOW: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchingProblem {
    pub window: usize,
    pub incoming: Channel,
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy)]
enum Asymptote {
    /// Open channel with momentum `k` and flux normalization `1/√(2 sin k)`.
    Open { k: f64, norm: f64 },
    /// Closed channel decaying as `ζ^x`.
    Closed { zeta: f64 },
}

impl Asymptote {
    fn new(onsite: f64, lambda: f64) -> Result<Self> {
        let half = 0.5 * (onsite - lambda);
        if half.abs() < 1.0 {
            let k = half.acos();
            Ok(Asymptote::Open {
                k,
                norm: (2.0 * k.sin()).sqrt().recip(),
            })
        } else if half.abs() > 1.0 {
            // ζ² − 2·half·ζ + 1 = 0, small root
            let big = half + half.signum() * (half * half - 1.0).sqrt();
            Ok(Asymptote::Closed { zeta: 1.0 / big })
        } else {
            Err(JclError::BandEdgeSingularity { lambda })
        }
    }

    /// Outgoing (or decaying) basis function at site `x`.
    fn outgoing(&self, x: usize) -> Complex64 {
        match *self {
            Asymptote::Open { k, norm } => Complex64::from_polar(norm, k * x as f64),
            Asymptote::Closed { zeta } => Complex64::new(zeta.powi(x as i32), 0.0),
        }
    }

    fn incoming(&self, x: usize) -> Complex64 {
        match *self {
            Asymptote::Open { k, norm } => Complex64::from_polar(norm, -k * x as f64),
            Asymptote::Closed { .. } => Complex64::new(0.0, 0.0),
        }
    }
}

/// S-matrix over the open channels at λ by explicit wave matching.
pub fn wavematch_smatrix(config: &ValidatedConfig, lambda: f64) -> Result<SMatrix> {
    wavematch_smatrix_with_window(config, lambda, DEFAULT_WINDOW)
}

pub fn wavematch_smatrix_with_window(config: &ValidatedConfig, lambda: f64, window: usize) -> Result<SMatrix> {
    assert!(window >= 1, "matching window needs at least one explicit site");
    let open = open_channels(config, lambda);
    if open.is_empty() {
        return Err(JclError::NoOpenChannels { lambda });
    }

    let n_ph = config.cutoff();
    let dot_dim = 2 * n_ph;
    let all: Vec<Channel> = (0..n_ph)
        .flat_map(|n| Side::BOTH.into_iter().map(move |s| Channel::new(s, n)))
        .collect();
    let asymptotes: Vec<Asymptote> = all
        .iter()
        .map(|c| Asymptote::new(onsite(config.lead(c.lead), c.n, config.omega()), lambda))
        .collect::<Result<_>>()?;

    // unknowns: dot amplitudes, then per channel `window` sites and one amplitude
    let block = window + 1;
    let site = |ci: usize, x: usize| dot_dim + ci * block + (x - 1);
    let amplitude = |ci: usize| dot_dim + ci * block + window;
    let dim = dot_dim + all.len() * block;

    let hd = build_dot_hamiltonian(config, BasisTag::Eigenbasis).matrix;
    let g = config.g_el;
    let mut a = DMatrix::<Complex64>::zeros(dim, dim);

    for i in 0..dot_dim {
        for j in 0..dot_dim {
            a[(i, j)] = hd[(i, j)];
        }
        a[(i, i)] -= lambda;
    }
    for (ci, ch) in all.iter().enumerate() {
        let delta = config.contact_vector(ch.lead);
        // dot rows pick up g ψ_c(1) d_c
        for (e, &coef) in delta.iter().enumerate() {
            a[(state_index(e, ch.n), site(ci, 1))] += coef * g;
        }
        let diag = onsite(config.lead(ch.lead), ch.n, config.omega()) - lambda;
        for x in 1..=window {
            let row = site(ci, x);
            a[(row, site(ci, x))] += diag;
            if x > 1 {
                a[(row, site(ci, x - 1))] -= 1.0;
            }
            if x < window {
                a[(row, site(ci, x + 1))] -= 1.0;
            } else {
                // ψ(L + 1) from the asymptotic form
                a[(row, amplitude(ci))] -= asymptotes[ci].outgoing(window + 1);
            }
            if x == 1 {
                for (e, &coef) in delta.iter().enumerate() {
                    a[(row, state_index(e, ch.n))] += coef.conj() * g;
                }
            }
        }
        // matching row: ψ(L) equals the asymptotic form at L
        let row = amplitude(ci);
        a[(row, site(ci, window))] += 1.0;
        a[(row, amplitude(ci))] -= asymptotes[ci].outgoing(window);
    }

    let k = open.len();
    let mut rhs = DMatrix::<Complex64>::zeros(dim, k);
    for (col, inc) in open.iter().enumerate() {
        let ci = all.iter().position(|c| *c == inc).expect("open channel is retained");
        let asym = asymptotes[ci];
        // incoming wave moved to the right-hand side
        rhs[(site(ci, window), col)] += asym.incoming(window + 1);
        rhs[(amplitude(ci), col)] += asym.incoming(window);
    }

    let lu = a.lu();
    let (lo, hi) = lu
        .u()
        .diagonal()
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), p| (lo.min(p.norm()), hi.max(p.norm())));
    let condition = if lo == 0.0 { f64::INFINITY } else { hi / lo };
    if !(condition <= MAX_CONDITION) {
        return Err(JclError::SingularLinearSystem { lambda, condition });
    }
    let sol = lu.solve(&rhs).ok_or(JclError::SingularLinearSystem {
        lambda,
        condition: f64::INFINITY,
    })?;

    let entries = DMatrix::from_fn(k, k, |r, c| {
        let out = open.channels[r];
        let ci = all.iter().position(|x| *x == out).expect("open channel is retained");
        -sol[(amplitude(ci), c)]
    });
    Ok(SMatrix {
        lambda,
        channel_set: open,
        entries,
    })
}

pub fn solve(config: &ValidatedConfig, problem: &MatchingProblem) -> Result<Vec<Complex64>> {
    let s = wavematch_smatrix_with_window(config, problem.lambda, problem.window)?;
    let col = s
        .channel_set
        .position(problem.incoming)
        .ok_or(JclError::NoOpenChannels { lambda: problem.lambda })?;
    Ok(s.entries.column(col).iter().copied().collect())
}
