//! The six subcommands. Each returns the text it would print.

use std::fmt::Write;
use std::path::Path;

use anyhow::anyhow;
use jcl_core::currents::{
    compute_currents, contact_photon_current_debug, CurrentOptions, CurrentReport, CutoffPolicy,
};
use jcl_core::dot::{build_dot_hamiltonian, truncated_spectrum_closed_form, BasisTag};
use jcl_core::model::{validate, ValidatedConfig};
use jcl_core::oracle::wavematch_smatrix;
use jcl_core::scattering::{smatrix, CrossSectionTable};
use jcl_core::symmetry::{classify, mirror_swap, table_difference};
use jcl_core::JclError;
use rayon::prelude::*;

use crate::config::{set_scalar, RunInputs, SweepAxis};
use crate::csv::{float, Cell, Csv};
use crate::exit::{Failure, Outcome};

/// What a command produced, and whether it should still end in failure.
pub struct Output {
    pub text: String,
    pub failure: Option<Failure>,
}

impl Output {
    fn ok(text: String) -> Self {
        Self { text, failure: None }
    }
}

/// Validates the physics, using `--nph` as the cutoff when given.
fn validated(inputs: &RunInputs) -> Outcome<ValidatedConfig> {
    let mut model = inputs.model;
    if let Some(n) = inputs.nph {
        model.photon.cutoff = n;
    }
    inputs.thermal.validate()?;
    Ok(validate(model)?)
}

/// The physics at the cutoff written in the file; `--nph` only seeds the policy.
fn validated_for_currents(inputs: &RunInputs) -> Outcome<ValidatedConfig> {
    inputs.thermal.validate()?;
    Ok(validate(inputs.model)?)
}

pub fn spectrum(inputs: &RunInputs) -> Outcome<Output> {
    let c = validated(inputs)?;
    let numeric = build_dot_hamiltonian(&c, BasisTag::Eigenbasis).eigenvalues();
    let closed = truncated_spectrum_closed_form(&c);
    let mut csv = Csv::new(&["index", "numeric", "closed_form", "difference"]);
    for (i, (a, b)) in numeric.iter().zip(&closed).enumerate() {
        csv.row(&[Cell::Int(i), Cell::Float(*a), Cell::Float(*b), Cell::Float(a - b)]);
    }
    Ok(Output::ok(csv.finish()))
}

/// Lowest band bottom to highest retained band top.
fn default_energy_range(c: &ValidatedConfig) -> (f64, f64) {
    let edges = c.band_edges();
    (edges[0], edges[edges.len() - 1])
}

/// Cell midpoints, so that grid ends never sit on a band edge.
fn midpoint_grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    let h = (hi - lo) / steps as f64;
    (0..steps).map(|i| lo + h * (i as f64 + 0.5)).collect()
}

/// Cross sections at `lambda`, or `None` where nothing is open or at an edge.
fn table_at(c: &ValidatedConfig, lambda: f64) -> Outcome<Option<CrossSectionTable>> {
    match smatrix(c, lambda) {
        Ok(s) => Ok(Some(s.cross_sections())),
        Err(JclError::NoOpenChannels { .. } | JclError::BandEdgeSingularity { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

pub fn smatrix_table(inputs: &RunInputs) -> Outcome<Output> {
    let c = validated(inputs)?;
    let (lo0, hi0) = default_energy_range(&c);
    let lo = inputs.numerics.energy_min.unwrap_or(lo0);
    let hi = inputs.numerics.energy_max.unwrap_or(hi0);
    if !(hi > lo) || inputs.numerics.energy_steps == 0 {
        return Err(Failure::config(anyhow!(
            "energy grid needs energy_max > energy_min and energy_steps > 0"
        )));
    }
    let grid = midpoint_grid(lo, hi, inputs.numerics.energy_steps);
    let tables: Vec<Option<CrossSectionTable>> = grid
        .par_iter()
        .map(|&l| table_at(&c, l))
        .collect::<Outcome<_>>()?;
    let mut csv = Csv::new(&["lambda", "out", "in", "sigma"]);
    for t in tables.iter().flatten() {
        for out in t.channels.iter() {
            for inc in t.channels.iter() {
                let (o, i) = (out.to_string(), inc.to_string());
                csv.row(&[
                    Cell::Float(t.lambda),
                    Cell::Text(&o),
                    Cell::Text(&i),
                    Cell::Float(t.sigma(out, inc)),
                ]);
            }
        }
    }
    Ok(Output::ok(csv.finish()))
}

fn not_converged(report: &CurrentReport) -> Failure {
    Failure::numerical(anyhow!(
        "photon cutoff did not converge (stopped at N_ph = {})",
        report.nph_used
    ))
}

pub fn currents(inputs: &RunInputs) -> Outcome<Output> {
    let c = validated_for_currents(inputs)?;
    let report = compute_currents(&c, &inputs.thermal, &inputs.current_options())?;
    let mut text = serde_json::to_string_pretty(&report).map_err(Failure::numerical)?;
    text.push('\n');
    let failure = (!report.converged).then(|| not_converged(&report));
    Ok(Output { text, failure })
}

fn report_header(first: &str) -> Vec<&str> {
    let mut h = vec![first];
    h.extend(CurrentReport::VALUE_NAMES);
    h
}

pub fn sweep(inputs: &RunInputs, axis: &SweepAxis) -> Outcome<Output> {
    let mut header = report_header(&axis.key);
    header.extend(["nph_used", "converged", "photon_method"]);
    let mut csv = Csv::new(&header);
    let mut failure = None;
    for x in axis.values() {
        let mut point = *inputs;
        set_scalar(&mut point, &axis.key, x).map_err(Failure::config)?;
        let c = validated_for_currents(&point)?;
        let report = compute_currents(&c, &point.thermal, &point.current_options())?;
        if !report.converged && failure.is_none() {
            failure = Some(not_converged(&report));
        }
        let method = match report.photon_method {
            jcl_core::currents::PhotonMethod::Direct => "direct",
            jcl_core::currents::PhotonMethod::Decomposition => "decomposition",
        };
        let mut row = vec![Cell::Float(x)];
        row.extend(report.values().map(Cell::Float));
        row.extend([Cell::Int(report.nph_used), Cell::Bool(report.converged), Cell::Text(method)]);
        csv.row(&row);
    }
    Ok(Output { text: csv.finish(), failure })
}

/// Currents at every fixed cutoff up to four beyond where the policy settles.
pub fn convergence(inputs: &RunInputs) -> Outcome<Output> {
    let c = validated_for_currents(inputs)?;
    let opts = inputs.current_options();
    let settled = compute_currents(&c, &inputs.thermal, &opts)?;
    let mut header = report_header("nph");
    header.push("max_change");
    let mut csv = Csv::new(&header);
    let mut prev: Option<[f64; 5]> = None;
    for n in 1..=settled.nph_used + 4 {
        let fixed = CurrentOptions {
            cutoff: CutoffPolicy::Fixed(n),
            ..opts
        };
        let values = compute_currents(&c, &inputs.thermal, &fixed)?.values();
        let change = prev.map(|p| p.iter().zip(&values).fold(0.0_f64, |a, (x, y)| a.max((x - y).abs())));
        let change_text = change.map(float).unwrap_or_default();
        let mut row = vec![Cell::Int(n)];
        row.extend(values.map(Cell::Float));
        row.push(Cell::Text(&change_text));
        csv.row(&row);
        prev = Some(values);
    }
    let failure = (!settled.converged).then(|| not_converged(&settled));
    Ok(Output { text: csv.finish(), failure })
}

/// Writes `H_D` in both bases beside the output.
pub fn dump_matrices(inputs: &RunInputs, dir: &Path) -> Outcome<()> {
    let c = validated(inputs)?;
    for (basis, name) in [(BasisTag::Eigenbasis, "hd_eigenbasis.csv"), (BasisTag::ContactBasis, "hd_contact_basis.csv")] {
        let path = dir.join(name);
        std::fs::write(&path, build_dot_hamiltonian(&c, basis).to_csv())
            .map_err(|e| Failure::numerical(anyhow!("writing {}: {e}", path.display())))?;
    }
    Ok(())
}

const MATRIX_TOL: f64 = 1e-10;
const CURRENT_TOL: f64 = 1e-8;
const ZERO_CONTACT_TOL: f64 = 1e-9;
const CHECK_ENERGIES: usize = 60;
const ORACLE_ENERGIES: usize = 12;
const ORACLE_MAX_CUTOFF: usize = 4;

struct Check {
    name: &'static str,
    detail: String,
    passed: bool,
}

fn bound(name: &'static str, value: f64, tol: f64) -> Check {
    Check {
        name,
        detail: format!("{value:.3e} <= {tol:.0e}"),
        passed: value <= tol,
    }
}

fn failed(name: &'static str, e: impl std::fmt::Display) -> Check {
    Check {
        name,
        detail: format!("error: {e}"),
        passed: false,
    }
}

fn tables(c: &ValidatedConfig, count: usize) -> Outcome<Vec<CrossSectionTable>> {
    let (lo, hi) = default_energy_range(c);
    let grid = midpoint_grid(lo, hi, count);
    let found: Vec<Option<CrossSectionTable>> = grid.par_iter().map(|&l| table_at(c, l)).collect::<Outcome<_>>()?;
    Ok(found.into_iter().flatten().collect())
}

fn matrix_checks(c: &ValidatedConfig, inputs: &RunInputs, out: &mut Vec<Check>) {
    let flags = classify(c, &inputs.thermal);
    let (lo, hi) = default_energy_range(c);
    let grid = midpoint_grid(lo, hi, CHECK_ENERGIES);
    let smats: Outcome<Vec<_>> = grid
        .par_iter()
        .map(|&l| match smatrix(c, l) {
            Ok(s) => Ok(Some(s)),
            Err(JclError::NoOpenChannels { .. } | JclError::BandEdgeSingularity { .. }) => Ok(None),
            Err(e) => Err(Failure::from(e)),
        })
        .collect();
    let smats: Vec<_> = match smats {
        Ok(v) => v.into_iter().flatten().collect(),
        Err(e) => {
            out.push(failed("unitarity", e));
            return;
        }
    };
    let worst = |f: &dyn Fn(&jcl_core::scattering::SMatrix) -> f64| smats.iter().map(f).fold(0.0, f64::max);
    out.push(bound("unitarity", worst(&|s| s.unitarity_defect()), MATRIX_TOL));
    out.push(bound("sum_rule", worst(&|s| s.cross_sections().sum_rule_defect()), MATRIX_TOL));
    if flags.time_reversible {
        out.push(bound("reciprocity", worst(&|s| s.cross_sections().reciprocity_defect()), MATRIX_TOL));
    }
    if flags.mirror_symmetric {
        let d = worst(&|s| {
            let t = s.cross_sections();
            table_difference(&mirror_swap(&t), &t)
        });
        out.push(bound("mirror_swap", d, MATRIX_TOL));
    }
}

fn spectrum_check(c: &ValidatedConfig) -> Check {
    let numeric = build_dot_hamiltonian(c, BasisTag::Eigenbasis).eigenvalues();
    let closed = truncated_spectrum_closed_form(c);
    let scale = closed.iter().fold(1.0_f64, |a, x| a.max(x.abs()));
    let d = numeric.iter().zip(&closed).fold(0.0_f64, |a, (x, y)| a.max((x - y).abs()));
    bound("spectrum", d / scale, MATRIX_TOL)
}

fn oracle_check(c: &ValidatedConfig) -> Check {
    let run = || -> Outcome<f64> {
        let small = c.with_cutoff(c.cutoff().min(ORACLE_MAX_CUTOFF))?;
        let mut worst: f64 = 0.0;
        for t in tables(&small, ORACLE_ENERGIES)? {
            let o = wavematch_smatrix(&small, t.lambda)?.cross_sections();
            worst = worst.max(table_difference(&t, &o));
        }
        Ok(worst)
    };
    match run() {
        Ok(d) => bound("oracle", d, MATRIX_TOL),
        Err(e) => failed("oracle", e),
    }
}

fn current_checks(c: &ValidatedConfig, inputs: &RunInputs, out: &mut Vec<Check>) {
    let opts = inputs.current_options();
    let report = match compute_currents(c, &inputs.thermal, &opts) {
        Ok(r) => r,
        Err(e) => {
            out.push(failed("currents", e));
            return;
        }
    };
    out.push(Check {
        name: "cutoff_converged",
        detail: format!("N_ph = {}", report.nph_used),
        passed: report.converged,
    });
    out.push(bound("conservation", (report.j_total_left + report.j_total_right).abs(), CURRENT_TOL));
    let split = report.j_total_left - report.j_contact_left - report.j_photon_left;
    out.push(bound("decomposition", split.abs(), CURRENT_TOL));
    if report.symmetry.commuting_case() {
        out.push(bound("zero_contact_current", report.j_contact_left.abs(), ZERO_CONTACT_TOL));
    }
    match contact_photon_current_debug(c, &inputs.thermal, &opts) {
        Ok(v) => out.push(bound("contact_photon_current", v.abs(), 1e-12)),
        Err(e) => out.push(failed("contact_photon_current", e)),
    }
}

/// Structural checks on each named configuration; fails with exit code 3.
pub fn validate_suite(suite: &[(String, RunInputs)]) -> Outcome<Output> {
    let mut text = String::new();
    let (mut passed, mut total) = (0usize, 0usize);
    for (name, inputs) in suite {
        let mut checks = Vec::new();
        match validated(inputs) {
            Ok(c) => {
                checks.push(spectrum_check(&c));
                matrix_checks(&c, inputs, &mut checks);
                checks.push(oracle_check(&c));
                current_checks(&c, inputs, &mut checks);
            }
            Err(e) => checks.push(failed("config", e)),
        }
        for ch in &checks {
            let verdict = if ch.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(text, "{name} {}: {verdict} ({})", ch.name, ch.detail);
        }
        total += checks.len();
        passed += checks.iter().filter(|c| c.passed).count();
    }
    let _ = writeln!(text, "validate: {passed} of {total} checks passed");
    let failure = (passed < total).then(|| Failure::assertion(anyhow!("{} validation checks failed", total - passed)));
    Ok(Output { text, failure })
}
