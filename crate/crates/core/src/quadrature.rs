//! Adaptive Gauss-Kronrod quadrature for vector-valued integrands.
//!
//! The domain is split at caller-supplied breakpoints (band edges, Fermi
//! steps). Each piece `[a, b]` is mapped by `λ = c − h cos(πt)`, `t ∈ [0, 1]`,
//! so square-root behaviour at `a` and `b` becomes analytic in `t`. Panels in
//! `t` are bisected adaptively with the 7/15-point Gauss-Kronrod pair.
//!
//! Panels are evaluated in parallel but stored and summed in a fixed order,
//! so results do not depend on the number of threads.

#![allow(clippy::excessive_precision)] // published node tables

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{JclError, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

/// Gauss weights for the odd-indexed Kronrod nodes (the last is the centre).
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-14,
            max_panels: 20_000,
        }
    }
}

impl QuadOptions {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadResult {
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub panels: usize,
}

#[derive(Debug, Clone)]
struct Panel {
    piece: usize,
    t0: f64,
    t1: f64,
    value: Vec<f64>,
    error: Vec<f64>,
}

/// One 15-point Kronrod evaluation of `g` on `[t0, t1]`, returning the
/// Kronrod estimate and `|K − G|` per component.
fn kronrod<G>(g: &G, dim: usize, t0: f64, t1: f64) -> Result<(Vec<f64>, Vec<f64>)>
where
    G: Fn(f64) -> Result<Vec<f64>>,
{
    let centre = 0.5 * (t0 + t1);
    let half = 0.5 * (t1 - t0);
    let mut kron = vec![0.0; dim];
    let mut gauss = vec![0.0; dim];

    let fc = g(centre)?;
    for k in 0..dim {
        kron[k] = WGK[7] * fc[k];
        gauss[k] = WG[3] * fc[k];
    }
    for (j, &x) in XGK.iter().take(7).enumerate() {
        let lo = g(centre - half * x)?;
        let hi = g(centre + half * x)?;
        for k in 0..dim {
            let s = lo[k] + hi[k];
            kron[k] += WGK[j] * s;
            if j % 2 == 1 {
                gauss[k] += WG[j / 2] * s;
            }
        }
    }
    let error = kron
        .iter()
        .zip(&gauss)
        .map(|(k, g)| (half * (k - g)).abs())
        .collect();
    let value = kron.iter().map(|k| half * k).collect();
    Ok((value, error))
}

/// Integrates a `dim`-component function over `[breakpoints[0], breakpoints[last]]`.
///
/// `breakpoints` must be sorted; duplicates are ignored. Convergence requires
/// every component's summed error to be below
/// `max(abs_tol, rel_tol · max_j |I_j|)`, i.e. all components share one scale.
pub fn integrate<F>(f: F, dim: usize, breakpoints: &[f64], opts: &QuadOptions) -> Result<QuadResult>
where
    F: Fn(f64) -> Result<Vec<f64>> + Sync,
{
    let mut pieces: Vec<(f64, f64)> = breakpoints
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| (w[0], w[1]))
        .collect();
    pieces.retain(|(a, b)| a.is_finite() && b.is_finite());
    if pieces.is_empty() || dim == 0 {
        return Ok(QuadResult {
            values: vec![0.0; dim],
            errors: vec![0.0; dim],
            panels: 0,
        });
    }

    let eval_panel = |piece: usize, t0: f64, t1: f64| -> Result<Panel> {
        let (a, b) = pieces[piece];
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mapped = |t: f64| -> Result<Vec<f64>> {
            let (s, cs) = (PI * t).sin_cos();
            let lambda = c - h * cs;
            if lambda <= a || lambda >= b {
                return Ok(vec![0.0; dim]);
            }
            let jac = h * PI * s;
            let mut v = f(lambda)?;
            debug_assert_eq!(v.len(), dim);
            v.iter_mut().for_each(|x| *x *= jac);
            Ok(v)
        };
        let (value, error) = kronrod(&mapped, dim, t0, t1)?;
        Ok(Panel {
            piece,
            t0,
            t1,
            value,
            error,
        })
    };

    let initial: Vec<(usize, f64, f64)> = (0..pieces.len()).map(|p| (p, 0.0, 1.0)).collect();
    let mut panels: Vec<Panel> = initial
        .par_iter()
        .map(|&(p, t0, t1)| eval_panel(p, t0, t1))
        .collect::<Result<_>>()?;

    loop {
        let values = sum_components(&panels, dim, |p| &p.value);
        let errors = sum_components(&panels, dim, |p| &p.error);
        let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let target = opts.abs_tol.max(opts.rel_tol * scale);
        let worst = errors.iter().fold(0.0f64, |m, e| m.max(*e));
        if worst <= target {
            return Ok(QuadResult {
                values,
                errors,
                panels: panels.len(),
            });
        }
        if panels.len() >= opts.max_panels {
            return Err(JclError::QuadratureNotConverged {
                achieved: worst,
                target,
                panels: panels.len(),
            });
        }

        // Bisect the worst panels until what is left unrefined carries at
        // most half of the admissible error.
        let badness: Vec<f64> = panels
            .iter()
            .map(|p| p.error.iter().fold(0.0f64, |m, e| m.max(*e)) / target)
            .collect();
        let mut order: Vec<usize> = (0..panels.len()).collect();
        order.sort_by(|&i, &j| badness[j].total_cmp(&badness[i]).then(i.cmp(&j)));
        let mut remaining: f64 = badness.iter().sum();
        let mut refine = vec![false; panels.len()];
        for &i in &order {
            if remaining <= 0.5 || panels.len() + refine.iter().filter(|r| **r).count() >= opts.max_panels {
                break;
            }
            refine[i] = true;
            remaining -= badness[i];
        }

        let jobs: Vec<(usize, f64, f64)> = panels
            .iter()
            .zip(&refine)
            .filter(|(_, r)| **r)
            .flat_map(|(p, _)| {
                let mid = 0.5 * (p.t0 + p.t1);
                [(p.piece, p.t0, mid), (p.piece, mid, p.t1)]
            })
            .collect();
        let mut fresh = jobs
            .par_iter()
            .map(|&(p, t0, t1)| eval_panel(p, t0, t1))
            .collect::<Result<Vec<_>>>()?
            .into_iter();

        let mut next = Vec::with_capacity(panels.len() + jobs.len() / 2);
        for (p, r) in panels.into_iter().zip(refine) {
            if r {
                next.push(fresh.next().expect("two children per refined panel"));
                next.push(fresh.next().expect("two children per refined panel"));
            } else {
                next.push(p);
            }
        }
        panels = next;
    }
}

fn sum_components<'a>(panels: &'a [Panel], dim: usize, pick: impl Fn(&'a Panel) -> &'a Vec<f64>) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    for p in panels {
        for (o, x) in out.iter_mut().zip(pick(p)) {
            *o += x;
        }
    }
    out
}

/// Scalar convenience wrapper around [`integrate`].
pub fn integrate_scalar<F>(f: F, breakpoints: &[f64], opts: &QuadOptions) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let r = integrate(|x| f(x).map(|v| vec![v]), 1, breakpoints, opts)?;
    Ok((r.values[0], r.errors[0]))
}
