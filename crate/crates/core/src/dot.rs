//! Truncated dot ⊗ photon Hamiltonian (the Jaynes-Cummings block).
//!
//! Basis ordering is electron-fastest: index `2n + j` is `e^j ⊗ Υ_n` in the
//! eigenbasis (or `δ^j ⊗ Υ_n` in the contact basis), `n = 0..N_ph`.
//! The photon operators are projected onto the retained Fock states, so the
//! matrix element `√N_ph` leaving the top level is dropped.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::model::ValidatedConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisTag {
    Eigenbasis,
    ContactBasis,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DotPhotonHamiltonian {
    pub matrix: DMatrix<Complex64>,
    pub basis: BasisTag,
}

#[inline]
pub fn state_index(electron: usize, photons: usize) -> usize {
    2 * photons + electron
}

impl DotPhotonHamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Real and imaginary parts of every entry, one row per entry.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row,col,re,im\n");
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let z = self.matrix[(i, j)];
                let _ = writeln!(out, "{i},{j},{:.16e},{:.16e}", z.re, z.im);
            }
        }
        out
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// Rotation `U = u ⊗ I` whose columns are the contact vectors in eigenbasis coordinates.
pub fn contact_rotation(config: &ValidatedConfig) -> DMatrix<Complex64> {
    let basis = config.contact_basis();
    let dim = 2 * config.cutoff();
    let mut u = DMatrix::zeros(dim, dim);
    for n in 0..config.cutoff() {
        for (j, delta) in basis.iter().enumerate() {
            for (i, &c) in delta.iter().enumerate() {
                u[(state_index(i, n), state_index(j, n))] = c;
            }
        }
    }
    u
}

/// `h_S ⊗ I + I ⊗ ω b*b + g_ph (σ⁺ ⊗ b + σ⁻ ⊗ b*)` on the truncated space.
pub fn build_dot_hamiltonian(config: &ValidatedConfig, basis: BasisTag) -> DotPhotonHamiltonian {
    let n_ph = config.cutoff();
    let omega = config.omega();
    let levels = config.dot.levels();
    let dim = 2 * n_ph;
    let mut h = DMatrix::<Complex64>::zeros(dim, dim);
    for n in 0..n_ph {
        for (j, level) in levels.iter().enumerate() {
            h[(state_index(j, n), state_index(j, n))] = Complex64::new(level + n as f64 * omega, 0.0);
        }
        if n >= 1 {
            // e⁰ ⊗ Υ_n  <->  e¹ ⊗ Υ_{n−1}
            let c = Complex64::new(config.g_ph * (n as f64).sqrt(), 0.0);
            let a = state_index(0, n);
            let b = state_index(1, n - 1);
            h[(a, b)] = c;
            h[(b, a)] = c;
        }
    }
    match basis {
        BasisTag::Eigenbasis => DotPhotonHamiltonian { matrix: h, basis },
        BasisTag::ContactBasis => {
            let u = contact_rotation(config);
            DotPhotonHamiltonian {
                matrix: u.adjoint() * h * u,
                basis,
            }
        }
    }
}

/// Closed-form spectrum `{λ₀} ∪ {λ₀ + nω + (ε−ω)/2 ± √((ε−ω)²/4 + g²n) : 1 ≤ n ≤ n_max}`, sorted.
pub fn jc_spectrum_closed_form(config: &ValidatedConfig, n_max: usize) -> Vec<f64> {
    let eps = config.dot.spacing;
    let omega = config.omega();
    let base = config.dot.level_base;
    let g = config.g_ph;
    let detuning = 0.5 * (eps - omega);
    let mut out = vec![base];
    for n in 1..=n_max {
        let centre = base + n as f64 * omega + detuning;
        let split = (detuning * detuning + g * g * n as f64).sqrt();
        out.push(centre - split);
        out.push(centre + split);
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Exact spectrum of the truncated matrix: every excitation block below the
/// cutoff plus the unpaired top state `e¹ ⊗ Υ_{N_ph−1}`.
pub fn truncated_spectrum_closed_form(config: &ValidatedConfig) -> Vec<f64> {
    let n_ph = config.cutoff();
    let mut out = jc_spectrum_closed_form(config, n_ph - 1);
    out.push(config.dot.levels()[1] + (n_ph - 1) as f64 * config.omega());
    out.sort_by(f64::total_cmp);
    out
}

/// Excitation number `σ⁺σ⁻ ⊗ I + I ⊗ b*b` (diagonal in the eigenbasis).
pub fn excitation_number(config: &ValidatedConfig) -> DMatrix<Complex64> {
    let dim = 2 * config.cutoff();
    DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            Complex64::new((i % 2 + i / 2) as f64, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate, DotParams, ModelConfig, PhotonParams};
    use proptest::prelude::*;

    fn config(eps: f64, omega: f64, g: f64, n_ph: usize, theta: f64, phi: f64) -> ValidatedConfig {
        validate(ModelConfig {
            dot: DotParams {
                level_base: 0.0,
                spacing: eps,
                contact_angle: theta,
                contact_phase: phi,
            },
            photon: PhotonParams { omega, cutoff: n_ph },
            g_ph: g,
            ..ModelConfig::default()
        })
        .unwrap()
    }

    fn max_abs(m: &DMatrix<Complex64>) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn decoupled_is_diagonal() {
        let c = config(1.3, 0.7, 0.0, 3, 0.4, 0.0);
        let h = build_dot_hamiltonian(&c, BasisTag::Eigenbasis).matrix;
        let expect = [0.0, 1.3, 0.7, 2.0, 1.4, 2.7];
        for i in 0..6 {
            for j in 0..6 {
                let want = if i == j { expect[i] } else { 0.0 };
                assert!((h[(i, j)] - want).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn one_photon_block() {
        let c = config(1.0, 1.0, 0.1, 2, 0.0, 0.0);
        let h = build_dot_hamiltonian(&c, BasisTag::Eigenbasis).matrix;
        // block {e¹⊗Υ₀, e⁰⊗Υ₁}
        assert_eq!(h[(1, 1)].re, 1.0);
        assert_eq!(h[(2, 2)].re, 1.0);
        assert!((h[(1, 2)].re - 0.1).abs() < 1e-16);
        assert!((h[(2, 1)].re - 0.1).abs() < 1e-16);
        let cf = jc_spectrum_closed_form(&c, 1);
        assert!((cf[1] - 0.9).abs() < 1e-15 && (cf[2] - 1.1).abs() < 1e-15);
    }

    #[test]
    fn closed_form_limits() {
        let c = config(2.0, 2.0, 0.3, 4, 0.0, 0.0);
        let cf = jc_spectrum_closed_form(&c, 3);
        let mut expect = vec![0.0];
        for n in 1..=3 {
            let s = 0.3 * (n as f64).sqrt();
            expect.push(2.0 * n as f64 - s);
            expect.push(2.0 * n as f64 + s);
        }
        expect.sort_by(f64::total_cmp);
        for (a, b) in cf.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-14);
        }
        let c = config(1.7, 0.6, 0.0, 4, 0.0, 0.0);
        let cf = jc_spectrum_closed_form(&c, 3);
        let mut expect = vec![0.0];
        for n in 1..=3 {
            expect.push(n as f64 * 0.6);
            expect.push((n - 1) as f64 * 0.6 + 1.7);
        }
        expect.sort_by(f64::total_cmp);
        for (a, b) in cf.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn contact_basis_is_a_change_of_basis() {
        let c = config(1.1, 0.9, 0.25, 5, 0.7, 1.9);
        let he = build_dot_hamiltonian(&c, BasisTag::Eigenbasis).matrix;
        let hc = build_dot_hamiltonian(&c, BasisTag::ContactBasis).matrix;
        let u = contact_rotation(&c);
        assert!(max_abs(&(u.adjoint() * &he * &u - &hc)) < 1e-15);
        assert!(max_abs(&(hc.adjoint() - &hc)) < 1e-14);
        let a = build_dot_hamiltonian(&c, BasisTag::Eigenbasis).eigenvalues();
        let b = build_dot_hamiltonian(&c, BasisTag::ContactBasis).eigenvalues();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn csv_dump_has_every_entry() {
        let c = config(1.0, 1.0, 0.1, 2, 0.0, 0.0);
        let csv = build_dot_hamiltonian(&c, BasisTag::Eigenbasis).to_csv();
        assert_eq!(csv.lines().count(), 1 + 16);
        assert!(csv.starts_with("row,col,re,im\n"));
    }

    proptest! {
        #[test]
        fn numeric_matches_closed_form(eps in 0.1..3.0f64, omega in 0.1..3.0f64, g in -1.0..1.0f64, n_ph in 1usize..10) {
            let c = config(eps, omega, g, n_ph, 0.3, 0.0);
            let numeric = build_dot_hamiltonian(&c, BasisTag::Eigenbasis).eigenvalues();
            let exact = truncated_spectrum_closed_form(&c);
            prop_assert_eq!(numeric.len(), exact.len());
            for (a, b) in numeric.iter().zip(&exact) {
                prop_assert!((a - b).abs() < 1e-12, "{} vs {}", a, b);
            }
        }

        #[test]
        fn conserves_excitation_number(eps in 0.1..3.0f64, omega in 0.1..3.0f64, g in -1.0..1.0f64, n_ph in 1usize..10) {
            let c = config(eps, omega, g, n_ph, 0.0, 0.0);
            let h = build_dot_hamiltonian(&c, BasisTag::Eigenbasis).matrix;
            let n = excitation_number(&c);
            prop_assert!(max_abs(&(&h * &n - &n * &h)) < 1e-13);
            prop_assert!(max_abs(&(h.adjoint() - &h)) < 1e-14);
        }
    }
}
