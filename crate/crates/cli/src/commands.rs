use anyhow::{bail, Result};
use euclid_core::cf::CostSpec;
use euclid_core::enumeration::{accumulate_costs, census_grid, PairKind, PairSet, Reference};
use euclid_core::operator::{
    assemble, entropy_constant, f0_constant, f0_discretized, lambda_derivatives, leading_spectrum, mean_constant,
    variance_birkhoff_estimate, variance_constant, BirkhoffEstimate, Derivative, DiscParams, Variant,
};
use euclid_core::stats::{growth_fit_from_census, report_from_census, GrowthFit, GrowthTarget, MomentReport};
use euclid_core::verify::{depth_identity, dp_identity, series_identity};
use euclid_core::Error;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::args::Identity;
use crate::config::{Command, RunConfig};
use crate::output::{num, Output};

const BIRKHOFF_ITERATIONS: u64 = 200;
const BIRKHOFF_SAMPLES: u64 = 100_000;

pub fn run(cfg: &RunConfig) -> Result<Output> {
    match &cfg.command {
        Command::Constants => constants(cfg),
        Command::Moments { grid, kind, p_max } => moments(cfg, grid, *kind, *p_max),
        Command::Verify {
            identity,
            s,
            omega,
            depth,
            digit_bound,
            n_enum,
            k_max,
            p,
        } => {
            let c = &cfg.cost;
            let mu = mean_constant(c);
            let report = match identity {
                Identity::Depth => depth_identity(*depth, *digit_bound, *s, *omega, c, mu, cfg.params.basis_order)?,
                Identity::Series => series_identity(*s, *omega, c, mu, *n_enum, *k_max, &cfg.params)?,
                Identity::Dp => dp_identity(*p, *s, c, mu, *n_enum, &cfg.params)?,
            };
            let mut out = Output::new(
                &report,
                &["identity", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "abs_gap", "bound", "relative_gap", "passed"],
            )?;
            out.rows.push(vec![
                report.config.identity.clone(),
                num(report.lhs.re),
                num(report.lhs.im),
                num(report.rhs.re),
                num(report.rhs.im),
                num(report.abs_gap),
                num(report.bound),
                num(report.relative_gap()),
                report.passed().to_string(),
            ]);
            out.ok = report.passed();
            out.summary = format!(
                "{} {} identity: lhs {} rhs {} gap {:e} bound {:e}",
                if out.ok { "PASS" } else { "FAIL" },
                report.config.identity,
                report.lhs,
                report.rhs,
                report.abs_gap,
                report.bound
            );
            Ok(out)
        }
        Command::Spectrum { s_re, s_im, omega } => spectrum(cfg, s_re, s_im, omega),
        Command::Census {
            grid,
            kind,
            p_max,
            reference,
        } => census(cfg, grid, *kind, *p_max, *reference),
    }
}

#[derive(Serialize)]
struct Constants {
    mu: f64,
    entropy: f64,
    lambda_s: Derivative,
    lambda_omega: Derivative,
    lambda1: Complex64,
    lambda1_residual: f64,
    lambda2_modulus: f64,
    lambda2_refinement_change: f64,
    sigma2: f64,
    sigma2_refinement_change: f64,
    lambda_omegaomega: Derivative,
    f0: f64,
    f0_discretized: f64,
    birkhoff: BirkhoffEstimate,
    birkhoff_iterations: u64,
    birkhoff_samples: u64,
    refined_params: DiscParams,
}

fn refined(p: &DiscParams) -> DiscParams {
    DiscParams {
        basis_order: p.basis_order + 8,
        digit_truncation: p.digit_truncation * 2,
        ..*p
    }
}

fn l10_spectrum(c: &CostSpec, mu: f64, p: &DiscParams) -> Result<euclid_core::operator::SpectralData> {
    let one = Complex64::new(1.0, 0.0);
    let l = assemble(one, Complex64::new(0.0, 0.0), c, mu, p, Variant::FullL)?;
    Ok(leading_spectrum(&l)?)
}

fn constants(cfg: &RunConfig) -> Result<Output> {
    let c = &cfg.cost;
    let p = &cfg.params;
    let fine = refined(p);
    let mu = mean_constant(c);
    let d = lambda_derivatives(c, mu, p)?;
    let spec = l10_spectrum(c, mu, p)?;
    let spec_fine = l10_spectrum(c, mu, &fine)?;
    let var = variance_constant(c, p)?;
    let var_fine = variance_constant(c, &fine)?;
    let k = Constants {
        mu,
        entropy: entropy_constant(),
        lambda_s: d.lambda_s,
        lambda_omega: d.lambda_omega,
        lambda1: spec.lambda1,
        lambda1_residual: spec.residual,
        lambda2_modulus: spec.lambda2_modulus,
        lambda2_refinement_change: (spec.lambda2_modulus - spec_fine.lambda2_modulus).abs(),
        sigma2: var.sigma2,
        sigma2_refinement_change: (var.sigma2 - var_fine.sigma2).abs(),
        lambda_omegaomega: var.lambda_omegaomega,
        f0: f0_constant(),
        f0_discretized: f0_discretized(p)?,
        birkhoff: variance_birkhoff_estimate(c, mu, BIRKHOFF_ITERATIONS, BIRKHOFF_SAMPLES, cfg.seed)?,
        birkhoff_iterations: BIRKHOFF_ITERATIONS,
        birkhoff_samples: BIRKHOFF_SAMPLES,
        refined_params: fine,
    };
    let mut out = Output::new(&k, &["quantity", "value", "error"])?;
    let mut row = |name: &str, value: f64, error: f64| out.rows.push(vec![name.into(), num(value), num(error)]);
    row("mu", k.mu, 0.0);
    row("entropy", k.entropy, 0.0);
    row("minus_lambda_s", -k.lambda_s.value, k.lambda_s.error);
    row("lambda_omega", k.lambda_omega.value, k.lambda_omega.error);
    row("lambda1", k.lambda1.re, k.lambda1_residual);
    row("lambda2_modulus", k.lambda2_modulus, k.lambda2_refinement_change);
    row("sigma2", k.sigma2, k.sigma2_refinement_change);
    row("f0", k.f0, 0.0);
    row("f0_discretized", k.f0_discretized, (k.f0_discretized - k.f0).abs());
    row("sigma2_birkhoff", k.birkhoff.estimate, k.birkhoff.stderr);
    out.summary = format!(
        "mu {:.10}  entropy {:.10}  sigma2 {:.8}  |lambda2| {:.10}",
        k.mu, k.entropy, k.sigma2, k.lambda2_modulus
    );
    Ok(out)
}

#[derive(Serialize)]
struct Moments {
    report: MomentReport,
    sigma2: f64,
    mean_fit: Option<GrowthFit>,
    variance_fit: Option<GrowthFit>,
}

fn moments(cfg: &RunConfig, grid: &[u64], kind: PairKind, p_max: u32) -> Result<Output> {
    if let Some(n) = grid.iter().find(|&&n| n <= 2) {
        bail!("grid point n = {n} too small to standardize by log n");
    }
    let c = &cfg.cost;
    let mu = mean_constant(c);
    let sigma2 = variance_constant(c, &cfg.params)?.sigma2;
    let census = census_grid(grid, kind, c, mu, p_max)?;
    let report = report_from_census(&census, mu, sigma2.sqrt(), p_max, kind);
    let fit = |t| growth_fit_from_census(&census, t).ok();
    let result = Moments {
        mean_fit: fit(GrowthTarget::MeanVsLogN),
        variance_fit: fit(GrowthTarget::VarVsLogN),
        report,
        sigma2,
    };
    let mut header: Vec<String> = ["n", "count", "mean", "variance", "ks_distance"].map(String::from).to_vec();
    header.extend((1..=p_max).map(|p| format!("m_{p}")));
    let mut out = Output::new(&result, &[])?;
    out.header = header;
    for r in &result.report.rows {
        let mut row = vec![r.n.to_string(), r.count.to_string(), num(r.mean), num(r.variance), num(r.ks_distance)];
        row.extend(r.moments.iter().skip(1).map(|&m| num(m)));
        out.rows.push(row);
    }
    out.summary = format!("{} grid points, sigma2 {:.8}", grid.len(), sigma2);
    Ok(out)
}

#[derive(Serialize)]
struct SpectrumRow {
    s: Complex64,
    omega: f64,
    lambda1: Option<Complex64>,
    lambda1_modulus: f64,
    lambda2_modulus: f64,
    residual: Option<f64>,
    basis_order: usize,
    digit_truncation: u64,
    status: String,
}

fn spectrum(cfg: &RunConfig, s_re: &[f64], s_im: &[f64], omegas: &[f64]) -> Result<Output> {
    let c = &cfg.cost;
    let mu = mean_constant(c);
    let p = &cfg.params;
    let points: Vec<(Complex64, f64)> = s_re
        .iter()
        .flat_map(|&re| s_im.iter().map(move |&im| Complex64::new(re, im)))
        .flat_map(|s| omegas.iter().map(move |&w| (s, w)))
        .collect();
    let rows: Vec<SpectrumRow> = points
        .par_iter()
        .map(|&(s, w)| {
            let mut row = SpectrumRow {
                s,
                omega: w,
                lambda1: None,
                lambda1_modulus: f64::NAN,
                lambda2_modulus: f64::NAN,
                residual: None,
                basis_order: p.basis_order,
                digit_truncation: p.digit_truncation,
                status: "ok".into(),
            };
            match assemble(s, Complex64::new(w, 0.0), c, mu, p, Variant::FullL).and_then(|l| leading_spectrum(&l)) {
                Ok(sd) => {
                    row.lambda1 = Some(sd.lambda1);
                    row.lambda1_modulus = sd.lambda1.norm();
                    row.lambda2_modulus = sd.lambda2_modulus;
                    row.residual = Some(sd.residual);
                }
                Err(Error::NoSpectralGap { lambda1, lambda2 }) => {
                    row.lambda1_modulus = lambda1;
                    row.lambda2_modulus = lambda2;
                    row.status = "no_gap".into();
                }
                Err(e) => row.status = format!("error: {e}"),
            }
            row
        })
        .collect();
    let mut out = Output::new(
        &rows,
        &[
            "s_re", "s_im", "omega", "lambda1_re", "lambda1_im", "lambda1_abs", "lambda2_abs", "residual", "M", "N_max",
            "status",
        ],
    )?;
    for r in &rows {
        let l1 = r.lambda1.unwrap_or(Complex64::new(f64::NAN, f64::NAN));
        out.rows.push(vec![
            num(r.s.re),
            num(r.s.im),
            num(r.omega),
            num(l1.re),
            num(l1.im),
            num(r.lambda1_modulus),
            num(r.lambda2_modulus),
            num(r.residual.unwrap_or(f64::NAN)),
            r.basis_order.to_string(),
            r.digit_truncation.to_string(),
            r.status.clone(),
        ]);
    }
    let flagged = rows.iter().filter(|r| r.status != "ok").count();
    out.summary = format!("{} points, {flagged} flagged", rows.len());
    Ok(out)
}

fn census(cfg: &RunConfig, grid: &[u64], kind: PairKind, p_max: u32, reference: Reference) -> Result<Output> {
    let c = &cfg.cost;
    let mu = mean_constant(c);
    let accs = grid
        .iter()
        .map(|&n| accumulate_costs(PairSet { n, kind }, c, mu, p_max, reference))
        .collect::<euclid_core::Result<Vec<_>>>()?;
    let mut header: Vec<String> = ["n", "kind", "reference", "count"].map(String::from).to_vec();
    header.extend((0..=p_max).map(|p| format!("S_{p}")));
    let mut out = Output::new(&accs, &[])?;
    out.header = header;
    for a in &accs {
        let mut row = vec![
            a.n.to_string(),
            serde_json::to_value(a.kind)?.as_str().unwrap_or_default().to_string(),
            serde_json::to_value(a.reference)?.as_str().unwrap_or_default().to_string(),
            a.count.to_string(),
        ];
        row.extend(a.power_sums.iter().map(|&s| num(s)));
        out.rows.push(row);
    }
    out.summary = format!("{} grid points", accs.len());
    Ok(out)
}
