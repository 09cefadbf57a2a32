//! Exact analytics of one semi-infinite Dirichlet tight-binding lead.
//!
//! Channel `(α, n)` is the lead `α` dressed with `n` photons: a chain with
//! onsite energy `a = v_α + nω + 2` and hopping `−1`, whose band is
//! `(a − 2, a + 2)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{JclError, Result};
use crate::model::{LeadParams, BAND_WIDTH};

/// Chain onsite constant `a = v_α + nω + 2` of channel `(α, n)`.
pub fn onsite(lead: &LeadParams, n: usize, omega: f64) -> f64 {
    lead.bias + n as f64 * omega + 0.5 * BAND_WIDTH
}

/// Energy of a lead channel: electron energy `λ − nω` and the chain onsite constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeadChannelEnergy {
    pub lambda_rel: f64,
    pub onsite: f64,
    photon_shift: f64,
}

impl LeadChannelEnergy {
    pub fn new(lead: &LeadParams, n: usize, omega: f64, lambda: f64) -> Self {
        let photon_shift = n as f64 * omega;
        Self {
            lambda_rel: lambda - photon_shift,
            onsite: onsite(lead, n, omega),
            photon_shift,
        }
    }

    /// `λ − a`, the energy relative to the band centre.
    pub fn centered(&self) -> f64 {
        self.lambda_rel + self.photon_shift - self.onsite
    }

    pub fn is_open(&self) -> bool {
        self.centered().abs() < 0.5 * BAND_WIDTH
    }
}

/// Lattice momentum `k ∈ (0, π)` of channel `(α, n)` at total energy λ,
/// or `None` if the channel is closed (band edges count as closed).
pub fn momentum(lead: &LeadParams, n: usize, omega: f64, lambda: f64) -> Option<f64> {
    let c = (onsite(lead, n, omega) - lambda) / 2.0;
    if c.abs() < 1.0 {
        Some(c.acos())
    } else {
        None
    }
}

/// Energy-normalized generalized eigenfunction `g_α(x, λ)` of the lead.
///
/// `λ_rel` is the electron energy (photon energy already removed).
pub fn eigenfunction(lead: &LeadParams, lambda_rel: f64, x: usize) -> Result<f64> {
    let c = (-lambda_rel + 2.0 + lead.bias) / 2.0;
    if c.abs() >= 1.0 {
        let (lower, upper) = lead.band();
        return Err(JclError::OutOfBand {
            lambda_rel,
            lower,
            upper,
        });
    }
    let k = c.acos();
    let norm = PI.sqrt().recip() * (1.0 - c * c).powf(-0.25);
    Ok(norm * (k * x as f64).sin())
}

/// Retarded surface Green function at the contact site of channel `(α, n)`.
///
/// Root of `g² − (z − a) g + 1 = 0` with `Im g ≤ 0` in band and `|g| ≤ 1`
/// out of band. Complex `z` with `Im z > 0` picks the root with `|g| < 1`,
/// which continues to the retarded branch on the real axis.
pub fn surface_gf(lead: &LeadParams, n: usize, omega: f64, z: Complex64) -> Result<Complex64> {
    let a = onsite(lead, n, omega);
    let w = z - a;
    if z.im == 0.0 {
        return surface_gf_real(w.re).ok_or(JclError::BandEdgeSingularity { lambda: z.re });
    }
    let root = (w * w - 4.0).sqrt();
    let g1 = (w + root) / 2.0;
    let g2 = (w - root) / 2.0;
    Ok(if g1.norm() <= g2.norm() { g1 } else { g2 })
}

/// Surface Green function for real `w = λ − a`; `None` exactly at `|w| = 2`.
pub(crate) fn surface_gf_real(w: f64) -> Option<Complex64> {
    if w.abs() < 2.0 {
        Some(Complex64::new(w / 2.0, -(4.0 - w * w).sqrt() / 2.0))
    } else if w.abs() > 2.0 {
        // the small root, computed without cancellation
        let big = (w + w.signum() * (w * w - 4.0).sqrt()) / 2.0;
        Some(Complex64::new(1.0 / big, 0.0))
    } else {
        None
    }
}

/// Level-width function `Γ = −2 g_el² Im g^r`: `g_el² √(4 − (λ − a)²)` in band, 0 outside.
pub fn gamma(lead: &LeadParams, n: usize, omega: f64, lambda: f64, g_el: f64) -> f64 {
    let w = lambda - onsite(lead, n, omega);
    if w.abs() < 2.0 {
        g_el * g_el * (4.0 - w * w).sqrt()
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Side;
    use proptest::prelude::*;

    fn lead(v: f64) -> LeadParams {
        LeadParams::new(Side::Left, v)
    }

    #[test]
    fn momentum_examples() {
        assert!((momentum(&lead(0.0), 0, 1.0, 2.0).unwrap() - PI / 2.0).abs() < 1e-15);
        assert_eq!(momentum(&lead(0.0), 0, 1.0, 0.0), None);
        assert_eq!(momentum(&lead(0.0), 0, 1.0, 4.0), None);
        assert!((momentum(&lead(1.0), 1, 4.0, 7.0).unwrap() - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn eigenfunction_examples() {
        let l = lead(0.0);
        assert_eq!(eigenfunction(&l, 1.3, 0).unwrap(), 0.0);
        assert!((eigenfunction(&l, 2.0, 1).unwrap() - 1.0 / PI.sqrt()).abs() < 1e-15);
        assert!(eigenfunction(&l, 2.0, 2).unwrap().abs() < 1e-15);
        assert!(matches!(
            eigenfunction(&l, 4.5, 1),
            Err(JclError::OutOfBand { .. })
        ));
    }

    #[test]
    fn surface_gf_examples() {
        let l = lead(0.3);
        let a = onsite(&l, 2, 1.5);
        let at = |x: f64| surface_gf(&l, 2, 1.5, Complex64::new(x, 0.0)).unwrap();
        assert!((at(a) - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        let r = (3.0 - 5f64.sqrt()) / 2.0;
        assert!((at(a + 3.0) - r).norm() < 1e-15);
        assert!((at(a - 3.0) + r).norm() < 1e-15);
        assert!(matches!(
            surface_gf(&l, 2, 1.5, Complex64::new(a + 2.0, 0.0)),
            Err(JclError::BandEdgeSingularity { .. })
        ));
    }

    #[test]
    fn complex_energy_continues_to_retarded_branch() {
        let l = lead(0.0);
        for x in [-1.0, 0.7, 2.0, 3.9, 5.0, 7.5] {
            let on_axis = surface_gf(&l, 0, 1.0, Complex64::new(x, 0.0)).unwrap();
            let off = surface_gf(&l, 0, 1.0, Complex64::new(x, 1e-9)).unwrap();
            assert!((on_axis - off).norm() < 1e-6, "x = {x}");
        }
    }

    #[test]
    fn channel_energy_openness() {
        let l = lead(1.0);
        let e = LeadChannelEnergy::new(&l, 1, 4.0, 7.0);
        assert_eq!(e.lambda_rel, 3.0);
        assert_eq!(e.onsite, 7.0);
        assert_eq!(e.centered(), 0.0);
        assert!(e.is_open());
        assert!(!LeadChannelEnergy::new(&l, 1, 4.0, 5.0).is_open());
    }

    #[test]
    fn gamma_examples() {
        let l = lead(-1.0);
        let a = onsite(&l, 1, 2.0);
        assert!((gamma(&l, 1, 2.0, a, 0.5) - 2.0 * 0.25).abs() < 1e-15);
        assert_eq!(gamma(&l, 1, 2.0, a + 2.5, 0.5), 0.0);
        assert_eq!(gamma(&l, 1, 2.0, a + 0.3, 0.0), 0.0);
    }

    proptest! {
        #[test]
        fn eigenfunction_solves_recurrence(v in -3.0..3.0f64, t in 0.001..0.999f64) {
            let l = lead(v);
            let lambda_rel = v + 4.0 * t;
            for x in 1..=50usize {
                let g = |y: usize| eigenfunction(&l, lambda_rel, y).unwrap();
                let residual = -g(x + 1) + (2.0 + v) * g(x) - g(x - 1) - lambda_rel * g(x);
                prop_assert!(residual.abs() < 1e-12);
            }
        }

        #[test]
        fn surface_gf_solves_quadratic(v in -3.0..3.0f64, n in 0usize..5, omega in 0.2..3.0f64, w in -6.0..6.0f64) {
            prop_assume!((w.abs() - 2.0).abs() > 1e-9);
            let l = lead(v);
            let a = onsite(&l, n, omega);
            let z = a + w;
            let g = surface_gf(&l, n, omega, Complex64::new(z, 0.0)).unwrap();
            let residual = g * g - (z - a) * g + 1.0;
            prop_assert!(residual.norm() < 1e-13);
            if w.abs() < 2.0 {
                prop_assert!(g.im <= 0.0);
            } else {
                prop_assert!(g.im == 0.0 && g.norm() <= 1.0);
            }
        }

        #[test]
        fn gamma_matches_momentum(v in -3.0..3.0f64, n in 0usize..5, omega in 0.2..3.0f64, w in -1.999..1.999f64, g_el in -2.0..2.0f64) {
            let l = lead(v);
            let lambda = onsite(&l, n, omega) + w;
            let k = momentum(&l, n, omega, lambda).unwrap();
            let expect = g_el * g_el * 2.0 * k.sin();
            prop_assert!((gamma(&l, n, omega, lambda, g_el) - expect).abs() < 1e-13);
            let g = surface_gf(&l, n, omega, Complex64::new(lambda, 0.0)).unwrap();
            prop_assert!((gamma(&l, n, omega, lambda, g_el) + 2.0 * g_el * g_el * g.im).abs() < 1e-13);
        }
    }
}
