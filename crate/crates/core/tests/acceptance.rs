//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::f64::consts::{FRAC_PI_4, PI};
use std::time::Instant;

use jcl_core::currents::{
    compute_currents, contact_electron_current, photon_induced_electron_current, CurrentOptions, CutoffPolicy,
    LightAbsorbingScenario,
};
use jcl_core::dot::{build_dot_hamiltonian, truncated_spectrum_closed_form, BasisTag};
use jcl_core::model::{validate, Beta, DotParams, LeadParams, ModelConfig, PhotonParams, Side, ThermalState, ValidatedConfig};
use jcl_core::oracle::wavematch_smatrix;
use jcl_core::scattering::Scatterer;
use jcl_core::JclError;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn thermal(beta: f64, mu_l: f64, mu_r: f64) -> ThermalState {
    ThermalState::new(Beta::try_from(beta).unwrap(), mu_l, mu_r)
}

#[allow(clippy::too_many_arguments)]
fn config(vl: f64, vr: f64, base: f64, eps: f64, theta: f64, phi: f64, omega: f64, cutoff: usize, g_el: f64, g_ph: f64) -> ValidatedConfig {
    validate(ModelConfig {
        left: LeadParams::new(Side::Left, vl),
        right: LeadParams::new(Side::Right, vr),
        dot: DotParams {
            level_base: base,
            spacing: eps,
            contact_angle: theta,
            contact_phase: phi,
        },
        photon: PhotonParams { omega, cutoff },
        g_el,
        g_ph,
    })
    .unwrap()
}

fn random_config(rng: &mut StdRng, max_cutoff: usize) -> ValidatedConfig {
    config(
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-0.5..4.0),
        rng.gen_range(0.2..2.0),
        rng.gen_range(0.0..PI),
        rng.gen_range(0.0..2.0 * PI),
        rng.gen_range(0.4..3.0),
        rng.gen_range(1..=max_cutoff),
        rng.gen_range(0.2..1.5),
        rng.gen_range(0.0..1.0),
    )
}

/// Energy inside some open channel band, away from every band edge.
fn in_band_energy(rng: &mut StdRng, c: &ValidatedConfig) -> f64 {
    let edges = c.band_edges();
    loop {
        let n = rng.gen_range(0..c.cutoff());
        let side = if rng.gen_bool(0.5) { Side::Left } else { Side::Right };
        let (lo, hi) = c.channel_band(side, n);
        let lambda = rng.gen_range(lo..hi);
        if edges.iter().all(|e| (lambda - e).abs() > 1e-9) {
            return lambda;
        }
    }
}

fn max_abs<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    it.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn criterion_1() -> Outcome {
    let t0 = Instant::now();
    let mut rng = StdRng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let c = config(
            0.0,
            0.0,
            rng.gen_range(-1.0..1.0),
            rng.gen_range(0.1..3.0),
            FRAC_PI_4,
            0.0,
            rng.gen_range(0.1..3.0),
            12,
            1.0,
            rng.gen_range(0.0..1.5),
        );
        let numeric = build_dot_hamiltonian(&c, BasisTag::Eigenbasis).eigenvalues();
        let exact = truncated_spectrum_closed_form(&c);
        assert_eq!(numeric.len(), exact.len());
        worst = worst.max(max_abs(numeric.iter().zip(&exact).map(|(a, b)| a - b)));
    }
    let secs = t0.elapsed().as_secs_f64();
    outcome(worst <= 1e-12 && secs < 1.0, format!("max |Δ| = {worst:.2e}, {secs:.2} s"))
}

fn criterion_2() -> Outcome {
    let t0 = Instant::now();
    let mut rng = StdRng::seed_from_u64(2);
    let (mut unit, mut sum, mut failures) = (0.0f64, 0.0f64, 0);
    for _ in 0..50 {
        let c = random_config(&mut rng, 8);
        let sc = Scatterer::new(&c);
        for _ in 0..200 {
            let lambda = in_band_energy(&mut rng, &c);
            match sc.smatrix(lambda) {
                Ok(s) => {
                    unit = unit.max(s.unitarity_defect());
                    sum = sum.max(s.cross_sections().sum_rule_defect());
                }
                Err(_) => failures += 1,
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    outcome(
        unit <= 1e-10 && sum <= 1e-10 && failures == 0 && secs < 30.0,
        format!("‖S†S − I‖ = {unit:.2e}, sum rule {sum:.2e}, solver errors {failures}, {secs:.2} s"),
    )
}

fn criterion_3() -> Outcome {
    let t0 = Instant::now();
    let mut rng = StdRng::seed_from_u64(3);
    let (mut sigma, mut entries, mut failures) = (0.0f64, 0.0f64, 0);
    for _ in 0..10 {
        let c = random_config(&mut rng, 4);
        let sc = Scatterer::new(&c);
        for _ in 0..20 {
            let lambda = in_band_energy(&mut rng, &c);
            let (a, b) = match (sc.smatrix(lambda), wavematch_smatrix(&c, lambda)) {
                (Ok(a), Ok(b)) => (a, b),
                _ => {
                    failures += 1;
                    continue;
                }
            };
            assert_eq!(a.channel_set, b.channel_set);
            let (ta, tb) = (a.cross_sections(), b.cross_sections());
            sigma = sigma.max(max_abs((&ta.values - &tb.values).iter().copied()));
            // both constructions fix S = I at decoupling, so no phase alignment is needed
            entries = entries.max((&a.entries - &b.entries).iter().fold(0.0, |m, z| m.max(z.norm())));
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    outcome(
        sigma <= 1e-10 && entries <= 1e-8 && failures == 0 && secs < 60.0,
        format!("σ diff {sigma:.2e}, entry diff {entries:.2e}, solver errors {failures}, {secs:.2} s"),
    )
}

fn criterion_4() -> Outcome {
    let opts = CurrentOptions::with_quad_tol(1e-10);
    let cases = [
        ("E", config(0.0, 0.6, 1.5, 0.8, 0.7, 0.4, 1.2, 1, 0.8, 0.3), thermal(1.5, 2.0, 2.0)),
        ("S", config(4.0, 0.0, 3.5, 0.8, 0.7, 0.4, 1.2, 1, 0.8, 0.3), thermal(1.5, 5.5, 2.0)),
        ("C", config(0.0, 0.6, 1.5, 0.8, 0.0, 0.4, 1.2, 1, 0.8, 0.3), thermal(1.5, 3.0, 1.0)),
    ];
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, c, t) in cases {
        let j = contact_electron_current(&c, &t, &opts).unwrap();
        let worst = max_abs(j.values);
        pass &= worst <= 1e-9;
        parts.push(format!("({name}) |J^c| = {worst:.2e}"));
    }
    // a generic configuration does carry contact current
    let j = contact_electron_current(&cases_generic(), &thermal(1.5, 3.0, 1.0), &opts).unwrap();
    parts.push(format!("generic J^c_l = {:.3e}", j.values[0]));
    outcome(pass && j.values[0] < 0.0, parts.join(", "))
}

fn cases_generic() -> ValidatedConfig {
    config(0.0, 0.6, 1.5, 0.8, 0.7, 0.4, 1.2, 1, 0.8, 0.3)
}

fn criterion_5() -> Outcome {
    let opts = CurrentOptions::default();
    let (mut worst_el, mut best_ph) = (0.0f64, f64::NEG_INFINITY);
    for beta in [1.0, 2.0] {
        for omega in [1.5, 3.0] {
            for g in [0.3, 0.6] {
                let c = config(0.0, 0.0, 1.0, 1.2, FRAC_PI_4, 0.0, omega, 4, 0.8, g);
                let t = thermal(beta, 2.0, 2.0);
                let (j, _) = photon_induced_electron_current(&c, &t, &opts).unwrap();
                let r = compute_currents(&c, &t, &opts).unwrap();
                assert!(r.symmetry.time_reversible && r.symmetry.mirror_symmetric && r.symmetry.case_e);
                worst_el = worst_el.max(max_abs(j));
                best_ph = best_ph.max(r.j_photon_number);
            }
        }
    }
    outcome(
        worst_el <= 1e-8 && best_ph > 1e-6,
        format!("max |J^ph_el| = {worst_el:.2e}, max J_ph = {best_ph:.3e}"),
    )
}

fn criterion_6() -> Outcome {
    let opts = CurrentOptions::default();
    let mut worst = f64::INFINITY;
    for i in 0..5 {
        let beta = 0.5 + 3.5 * i as f64 / 4.0;
        for k in 0..5 {
            let omega = 1.0 + 5.0 * k as f64 / 4.0;
            let c = config(0.0, 0.7, 1.0, 1.3, 0.5, 0.0, omega, 4, 0.8, 0.5);
            let r = compute_currents(&c, &thermal(beta, 2.0, 2.0), &opts).unwrap();
            assert!(r.symmetry.time_reversible && r.symmetry.case_e && r.converged);
            worst = worst.min(r.j_photon_number);
        }
    }
    outcome(worst >= -1e-9, format!("min J_ph = {worst:.3e}"))
}

fn criterion_7() -> Outcome {
    let opts = CurrentOptions::default();
    let mut worst: f64 = 0.0;
    for v in [0.0, 0.5, 1.5] {
        for (vl, vr) in [(v, v), (v, 0.0)] {
            for omega in [v + 4.0, v + 5.5] {
                let c = config(vl, vr, 1.0 + v, 1.1, 0.6, 0.0, omega, 4, 0.8, 0.5);
                let (j, _) = photon_induced_electron_current(&c, &thermal(1.0, 2.0, 2.0), &opts).unwrap();
                worst = worst.max(max_abs(j));
            }
        }
    }
    outcome(worst <= 1e-9, format!("max |J^ph_el| = {worst:.2e}"))
}

fn criterion_8() -> Outcome {
    let opts = CurrentOptions::default();
    let mut worst = f64::NEG_INFINITY;
    let mut parts = Vec::new();
    for beta in [0.5, 1.0, 2.0] {
        for mu in [1.0, 3.0, 5.0] {
            let c = config(2.0, 0.0, 3.0, 1.0, 0.6, 0.0, 4.0, 4, 0.8, 0.5);
            let (j, _) = photon_induced_electron_current(&c, &thermal(beta, mu, mu), &opts).unwrap();
            worst = worst.max(j[0]);
        }
    }
    parts.push(format!("max J^ph_el,l = {worst:.3e}"));
    outcome(worst <= 1e-9, parts.join(", "))
}

fn criterion_9() -> Outcome {
    let opts = CurrentOptions::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for beta in [0.5, 1.0, 2.0] {
        let scenario = LightAbsorbingScenario {
            beta,
            ..LightAbsorbingScenario::new(4.0)
        };
        let (c, t) = scenario.config().unwrap();
        let r = compute_currents(&c, &t, &opts).unwrap();
        let verdict = match scenario.run(&opts, 1e-9) {
            Ok(_) => "ok".to_string(),
            Err(JclError::ScenarioAssertionFailed(msg)) => {
                pass = false;
                format!("violated: {msg}")
            }
            Err(e) => {
                pass = false;
                format!("error: {e}")
            }
        };
        parts.push(format!(
            "β={beta}: J_ph = {:.3e}, J^ph_el,l = {:.3e} ({verdict})",
            r.j_photon_number, r.j_photon_left
        ));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_10() -> Outcome {
    let opts = CurrentOptions::default();
    let mut rng = StdRng::seed_from_u64(10);
    let (mut decomposition, mut conservation, mut direct, mut commuting) = (0.0f64, 0.0f64, 0.0f64, 0);
    let mut failures = 0;
    for i in 0..50 {
        let mut c = *random_config(&mut rng, 1).config();
        c.photon.omega = rng.gen_range(1.0..3.0);
        let beta = rng.gen_range(1.0..4.0);
        let mu_l = rng.gen_range(0.5..4.0);
        let mut mu_r = rng.gen_range(0.5..4.0);
        match i % 4 {
            0 => mu_r = mu_l,
            1 => c.right.bias = c.left.bias + 4.0 + rng.gen_range(0.0..0.5),
            2 => c.dot.contact_angle = 0.0,
            _ => {}
        }
        let c = validate(c).unwrap();
        let r = match compute_currents(&c, &thermal(beta, mu_l, mu_r), &opts) {
            Ok(r) if r.converged => r,
            _ => {
                failures += 1;
                continue;
            }
        };
        let difference = r.j_total_left - r.j_contact_left;
        decomposition = decomposition.max((r.j_total_left - (r.j_contact_left + r.j_photon_left)).abs());
        conservation = conservation.max((r.j_total_left + r.j_total_right).abs());
        if r.symmetry.commuting_case() {
            commuting += 1;
            direct = direct.max((r.j_photon_left - difference).abs());
        }
    }
    outcome(
        decomposition <= 1e-8 && conservation <= 1e-8 && direct <= 1e-8 && failures == 0,
        format!(
            "decomposition {decomposition:.2e}, conservation {conservation:.2e}, direct vs difference {direct:.2e} over {commuting} commuting configs, failures {failures}"
        ),
    )
}

fn criterion_11() -> Outcome {
    let opts = CurrentOptions::default();
    let mut rng = StdRng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    let mut nph = Vec::new();
    for i in 0..8 {
        let mut c = *random_config(&mut rng, 1).config();
        c.photon.omega = rng.gen_range(0.8..3.0);
        let beta = if i == 0 { 0.5 } else { rng.gen_range(0.5..4.0) };
        let t = thermal(beta, rng.gen_range(0.5..4.0), rng.gen_range(0.5..4.0));
        let c = validate(c).unwrap();
        let r = compute_currents(&c, &t, &opts).unwrap();
        let more = CurrentOptions {
            cutoff: CutoffPolicy::Fixed(r.nph_used + 2),
            ..opts
        };
        let s = compute_currents(&c, &t, &more).unwrap();
        let scale = r.values().iter().map(|x| x.abs()).sum::<f64>().max(1e-12);
        let change = max_abs(r.values().iter().zip(s.values()).map(|(a, b)| a - b)) / scale;
        worst = worst.max(change);
        nph.push(r.nph_used);
    }
    outcome(worst < 1e-8, format!("max relative change {worst:.2e}, cutoffs {nph:?}"))
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 11] = [
        ("JC spectrum", criterion_1),
        ("unitarity and sum rule", criterion_2),
        ("oracle equivalence", criterion_3),
        ("zero contact current in cases E, S, C", criterion_4),
        ("mirror-symmetric emission without electron current", criterion_5),
        ("nonnegative photon current", criterion_6),
        ("no photon-induced current for ω ≥ v + 4", criterion_7),
        ("photon-induced current sign for v = 2, ω = 4", criterion_8),
        ("light-absorbing scenario", criterion_9),
        ("decomposition and conservation", criterion_10),
        ("cutoff convergence", criterion_11),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let o = run();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} [{name}]: {verdict} ({}; {:.1} s)",
            i + 1,
            o.detail,
            t0.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
