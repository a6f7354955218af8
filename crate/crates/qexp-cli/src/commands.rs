// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fs;
use std::io::BufReader;
use std::path::Path;

use qexp_core::gauss::{contour_identity, gauss_sum};
use qexp_core::lattice::make_wavepacket;
use qexp_core::special::{conj_identity_residual, derivative_at_zero, derivative_relative_error, f_o};
use qexp_core::verify::{
    compare_with_direct_sum, exp_identity_control, exp_identity_residual, fit_gamma as fit, form_agreement, mu_grid,
    normality_defect, normality_probe, obeys_refinement_law, refinement_sweep, weak_limit_check, FitVerdict,
    NormalityProbeResult, SampleTable, SweepPoint, DEFAULT_PROBE_MODULI, FIT_THRESHOLD,
};
use qexp_core::weyl::overlap_identities_report;
use qexp_core::{fn_eval, GammaPoint, GroupParams, Lattice, LatticeSpec, ResidualReport, StateVector, Truncation, C64};
use rayon::prelude::*;

use crate::config::{Format, RunConfig};
use crate::{CliError, Status, VerifyTarget};

const EXP_TOL: f64 = 1e-3;
const REFINE_FACTOR: f64 = 2.0;
const REFINE_FLOOR: f64 = 1e-7;
const CONJ_TOL: f64 = 1e-7;
const DERIV_STEP: f64 = 1e-5;
const DERIV_TOL: f64 = 1e-4;
const WEAK_TOL: f64 = 1e-5;
const WEAK_STABILITY: f64 = 1e-6;
const S_FORM_TOL: f64 = 1e-3;
const CONSISTENT_TOL: f64 = 1e-6;
const OVERLAP_TOL: f64 = 1e-12;
const WEYL_TOL: f64 = 1e-14;
const CONTOUR_TOL: f64 = 1e-8;
const FIT_DX_TOL: f64 = 1e-6;
/// Relative commutator defect accepted at μ = 0, where Q = RS is normal.
const ZERO_MU_TOL: f64 = 0.1;

fn cplx(z: C64) -> String {
    format!("{:.12}{:+.12}i", z.re, z.im)
}

fn write_out(cfg: &RunConfig, body: &str) -> Result<(), CliError> {
    if let Some(path) = &cfg.out {
        fs::write(path, body).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        println!("report written to {}", path.display());
    }
    Ok(())
}

/// Print every residual, write the report if asked, and turn violations
/// into the exit status.
fn finish(cfg: &RunConfig, report: &ResidualReport) -> Result<Status, CliError> {
    for (k, v) in &report.residuals {
        match report.meta.tolerances.get(k) {
            Some(t) => println!("{k} = {v:.3e} (tol {t:.0e})"),
            None => println!("{k} = {v:.6e}"),
        }
    }
    let body = match cfg.format {
        Format::Json => report.to_json()?,
        Format::Csv => report.to_csv(),
    };
    write_out(cfg, &body)?;
    let bad = report.violations();
    Ok(if bad.is_empty() {
        Status::Ok
    } else {
        Status::Violation(bad)
    })
}

fn quad_note(cfg: &RunConfig) -> String {
    format!(
        "quadrature rel_tol={:.0e} abs_tol={:.0e} max_levels={}",
        cfg.quad.rel_tol, cfg.quad.abs_tol, cfg.quad.max_levels
    )
}

pub fn eval_fn(cfg: &RunConfig, k: Option<i64>, x: Option<f64>, zero: bool) -> Result<Status, CliError> {
    let p = cfg.params()?;
    let z = if zero {
        GammaPoint::Zero
    } else {
        match (k, x) {
            (Some(k), Some(x)) => p.point(k, x),
            _ => return Err(CliError::Arg("eval fn needs --k and --x, or --zero".into())),
        }
    };
    let v = fn_eval(z, &p, &cfg.quad)?;
    let label = match z {
        GammaPoint::Zero => "F_N(0)".to_string(),
        GammaPoint::Ray { k, x } => format!("F_N(q^{k} e^{x})"),
    };
    println!("{label} = {}", cplx(v));
    println!("N={} {}", cfg.n, quad_note(cfg));
    let mut r = ResidualReport::new("eval_fn");
    cfg.stamp(&mut r, None);
    r.insert("value.re", v.re);
    r.insert("value.im", v.im);
    finish_quiet(cfg, &r)
}

pub fn eval_fo(cfg: &RunConfig, re: f64, im: f64) -> Result<Status, CliError> {
    let p = cfg.params()?;
    let v = f_o(C64::new(re, im), &p, &cfg.quad)?;
    println!("f_o({}) = {}", cplx(C64::new(re, im)), cplx(v));
    println!("N={} {}", cfg.n, quad_note(cfg));
    let mut r = ResidualReport::new("eval_fo");
    cfg.stamp(&mut r, None);
    r.insert("value.re", v.re);
    r.insert("value.im", v.im);
    finish_quiet(cfg, &r)
}

pub fn eval_dfn0(cfg: &RunConfig, k: i64) -> Result<Status, CliError> {
    let p = cfg.params()?;
    let k = p.reduce(k);
    let v = derivative_at_zero(k, &p);
    let err = derivative_relative_error(k, DERIV_STEP, &p, &cfg.quad)?;
    println!("F_N'(0) along Γ_{k} = {}", cplx(v));
    println!(
        "N={} closed form; central difference at step {DERIV_STEP:.0e} agrees to {err:.2e}",
        cfg.n
    );
    let mut r = ResidualReport::new("eval_dfn0");
    cfg.stamp(&mut r, None);
    r.insert("value.re", v.re);
    r.insert("value.im", v.im);
    r.insert("finite_difference", err);
    r.tolerance("finite_difference", DERIV_TOL);
    finish_quiet(cfg, &r)
}

/// Like [`finish`] without echoing the residual lines.
fn finish_quiet(cfg: &RunConfig, report: &ResidualReport) -> Result<Status, CliError> {
    let body = match cfg.format {
        Format::Json => report.to_json()?,
        Format::Csv => report.to_csv(),
    };
    write_out(cfg, &body)?;
    let bad = report.violations();
    Ok(if bad.is_empty() {
        Status::Ok
    } else {
        Status::Violation(bad)
    })
}

/// `6` or `2..64` (inclusive); every entry must be even.
fn parse_n_list(s: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::Arg(format!("bad N '{s}': expected an even integer or a range a..b"));
    let list: Vec<usize> = match s.split_once("..") {
        Some((a, b)) => {
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim_start_matches('=').trim().parse().map_err(|_| bad())?;
            if a > b || a % 2 != 0 {
                return Err(bad());
            }
            (a..=b).step_by(2).collect()
        }
        None => vec![s.trim().parse().map_err(|_| bad())?],
    };
    for &n in &list {
        GroupParams::for_gauss(n)?;
    }
    Ok(list)
}

pub fn gauss(cfg: &RunConfig, n_spec: &str, contour_r: Option<f64>) -> Result<Status, CliError> {
    let ns = parse_n_list(n_spec)?;
    if let Some(r) = contour_r {
        if !(r > 0.0) {
            return Err(CliError::Arg("--contour-R must be positive".into()));
        }
    }
    let mut report = ResidualReport::new("gauss");
    cfg.stamp(&mut report, None);
    report.meta.n = *ns.last().unwrap_or(&0);
    let rows = ns
        .par_iter()
        .map(|&n| -> Result<_, CliError> {
            let g = gauss_sum(n)?;
            let c = contour_r.map(|r| contour_identity(n, r, &cfg.quad)).transpose()?;
            Ok((n, g, c))
        })
        .collect::<Result<Vec<_>, _>>()?;
    for (n, g, c) in rows {
        let tol = if n == 2 { 1e-15 } else { 1e-12 * (n as f64).sqrt() };
        println!(
            "N={n}: direct {} closed {} residual {:.2e}",
            cplx(g.direct),
            cplx(g.closed),
            g.residual
        );
        let key = format!("N{n:03}.residual");
        report.insert(&key, g.residual);
        report.tolerance(&key, tol);
        if let Some(c) = c {
            println!(
                "N={n}: contour R={}: residues {} sides {} residual {:.2e} (|I2|={:.2e}, |I4|={:.2e})",
                c.r,
                cplx(c.residue_total),
                cplx(c.vertical + c.i2 + c.i4),
                c.residual,
                c.i2.norm(),
                c.i4.norm()
            );
            let key = format!("N{n:03}.contour");
            report.insert(&key, c.residual);
            report.tolerance(&key, CONTOUR_TOL);
        }
    }
    finish_quiet(cfg, &report)
}

fn packet(cfg: &RunConfig, base: &LatticeSpec, phase: f64) -> impl Fn(&LatticeSpec) -> qexp_core::Result<StateVector> {
    let width = cfg.width * base.h;
    let center = cfg.center;
    let n = base.n();
    let w: Vec<C64> = (0..n)
        .map(|k| C64::from_polar(1.0 + 0.25 * k as f64, phase * k as f64))
        .collect();
    move |s: &LatticeSpec| make_wavepacket(s, &w, center, width)
}

fn record_sweep(report: &mut ResidualReport, name: &str, pts: &[SweepPoint], first_tol: Option<f64>) {
    for (i, pt) in pts.iter().enumerate() {
        let key = format!("{name}.h{i}");
        report.insert(&key, pt.residual);
        report.meta.state.insert(format!("{key}.h"), pt.h);
        report.meta.state.insert(format!("{key}.M"), pt.m as f64);
        if i == 0 {
            if let Some(t) = first_tol {
                report.tolerance(&key, t);
            }
        }
    }
    if pts.len() > 1 {
        let key = format!("{name}.refinement_law_failures");
        let failures = pts
            .windows(2)
            .filter(|w| !obeys_refinement_law(w, REFINE_FACTOR, REFINE_FLOOR))
            .count();
        report.insert(&key, failures as f64);
        report.tolerance(&key, 0.0);
    }
}

pub fn verify(cfg: &RunConfig, target: VerifyTarget, sweep_h: usize) -> Result<Status, CliError> {
    if sweep_h == 0 {
        return Err(CliError::Arg("--sweep-h must be at least 1".into()));
    }
    let quad = cfg.quad;
    let mut report;
    match target {
        VerifyTarget::ExpIdentity => {
            let base = cfg.grid()?;
            report = ResidualReport::new("exp_identity");
            cfg.stamp(&mut report, Some(&base));
            let pts = refinement_sweep(&base, sweep_h, packet(cfg, &base, 0.7), |lat, psi| {
                exp_identity_residual(lat, psi, &quad)
            })?;
            record_sweep(&mut report, "exp_identity", &pts, Some(EXP_TOL));
            let lat = Lattice::new(base);
            let psi = packet(cfg, &base, 0.7)(&base)?;
            report.insert("control.constant_rhs", exp_identity_control(&lat, &psi, &quad)?);
        }
        VerifyTarget::Conj => {
            let p = cfg.params()?;
            report = ResidualReport::new("conj");
            cfg.stamp(&mut report, None);
            let n = p.n();
            let grid: Vec<(usize, f64)> = (0..100)
                .map(|i| (i % n, 10f64.powf(-2.0 + 4.0 * i as f64 / 99.0)))
                .collect();
            let res = grid
                .par_iter()
                .map(|&(m, t)| conj_identity_residual(m, t, &p, &quad).map(|r| (m, r)))
                .collect::<qexp_core::Result<Vec<_>>>()?;
            let mut per_m = vec![0.0f64; n];
            for (m, r) in res {
                per_m[m] = per_m[m].max(r);
            }
            for (m, r) in per_m.iter().enumerate() {
                report.insert(&format!("conj.m{m:02}"), *r);
            }
            let worst = per_m.iter().copied().fold(0.0, f64::max);
            report.insert("conj.max", worst);
            report.tolerance("conj.max", CONJ_TOL);
            for k in 0..n {
                let key = format!("dfn0.k{k:02}");
                report.insert(&key, derivative_relative_error(k, DERIV_STEP, &p, &quad)?);
                report.tolerance(&key, DERIV_TOL);
            }
        }
        VerifyTarget::Commutation => {
            let spec = cfg.grid()?;
            report = qexp_core::lattice::pair_transform_check(&Lattice::new(spec))?;
            report.name = "commutation".into();
            cfg.stamp(&mut report, Some(&spec));
        }
        VerifyTarget::WeakLimit => {
            let base = cfg.grid()?;
            report = ResidualReport::new("weak_limit");
            cfg.stamp(&mut report, Some(&base));
            let mut extrapolated = Vec::new();
            for (label, spec) in [("base", base), ("doubled_box", base.doubled_box()?)] {
                let lat = Lattice::new(spec);
                let u = packet(cfg, &base, 0.7)(&spec)?;
                let v = packet(cfg, &base, -1.1)(&spec)?;
                let r = weak_limit_check(&lat, &u, &v, &quad)?;
                if label == "base" {
                    for (l, d) in r.lambdas.iter().zip(&r.distances) {
                        report.insert(&format!("bracket.lambda{:.0e}", l), *d);
                    }
                    report.insert("weak_limit.distance", r.distance);
                    report.tolerance("weak_limit.distance", WEAK_TOL);
                    report.insert("weak_limit.not_decreasing", if r.decreasing() { 0.0 } else { 1.0 });
                    report.tolerance("weak_limit.not_decreasing", 0.0);
                }
                extrapolated.push(r.extrapolated);
            }
            report.insert("weak_limit.box_doubling", (extrapolated[1] - extrapolated[0]).norm());
            report.tolerance("weak_limit.box_doubling", WEAK_STABILITY);
        }
        VerifyTarget::ClosureForms => {
            let base = cfg.grid()?;
            report = ResidualReport::new("closure_forms");
            cfg.stamp(&mut report, Some(&base));
            let pts = refinement_sweep(&base, sweep_h, packet(cfg, &base, 0.7), |lat, psi| {
                form_agreement(lat, psi, &quad)
            })?;
            record_sweep(&mut report, "form_agreement", &pts, None);
            let lat = Lattice::new(base);
            let psi = packet(cfg, &base, 0.7)(&base)?;
            let cmp = compare_with_direct_sum(&lat, &psi, Truncation::CentralHalf, &quad)?;
            report.insert("direct_sum.s_form", cmp.s_form);
            report.tolerance("direct_sum.s_form", S_FORM_TOL);
            for (v, d) in &cmp.r_forms {
                let key = format!("direct_sum.r_form.{}", v.name());
                report.insert(&key, *d);
                if *v == cmp.best_variant() {
                    report.tolerance(&key, CONSISTENT_TOL);
                }
            }
            println!("star convention closest to Rψ+Sψ: {}", cmp.best_variant().name());
        }
        VerifyTarget::Overlaps => {
            let p = GroupParams::root_of_unity(cfg.n)?;
            report = overlap_identities_report(&p)?;
            let keys: Vec<String> = report.residuals.keys().cloned().collect();
            for k in keys {
                report.tolerance(&k, if k == "weyl_relation" { WEYL_TOL } else { OVERLAP_TOL });
            }
            cfg.stamp(&mut report, None);
        }
    }
    finish(cfg, &report)
}

/// `a+bi`, `a-bi`, `a`, `bi`, `i`, `-i`.
pub fn parse_complex(s: &str) -> Result<C64, CliError> {
    let bad = || CliError::Arg(format!("malformed complex number '{s}'"));
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i') else {
        let re: f64 = t.parse().map_err(|_| bad())?;
        return if re.is_finite() {
            Ok(C64::new(re, 0.0))
        } else {
            Err(bad())
        };
    };
    // split at the last sign that is neither leading nor part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let im: f64 = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => x.parse().map_err(|_| bad())?,
    };
    let re: f64 = re.parse().map_err(|_| bad())?;
    if !re.is_finite() || !im.is_finite() {
        return Err(bad());
    }
    Ok(C64::new(re, im))
}

pub fn probe_normality(
    cfg: &RunConfig,
    grid_kind: &str,
    moduli: Option<Vec<f64>>,
    mu: Option<&str>,
) -> Result<Status, CliError> {
    if grid_kind != "rays+midsector" {
        return Err(CliError::Arg(format!(
            "unknown --mu-grid '{grid_kind}' (rays+midsector)"
        )));
    }
    let spec = cfg.grid()?;
    let lat = Lattice::new(spec);
    let mut report = ResidualReport::new("normality");
    cfg.stamp(&mut report, Some(&spec));
    if let Some(mu) = mu {
        let mu = parse_complex(mu)?;
        let r = normality_defect(mu, &lat)?;
        println!(
            "μ = {}: defect {:.4e}, relative {:.4e}, on Γ̄: {}",
            cplx(mu),
            r.defect,
            r.relative_defect,
            r.on_gamma
        );
        report.insert("defect", r.defect);
        report.insert("relative_defect", r.relative_defect);
        report.insert("on_gamma", if r.on_gamma { 1.0 } else { 0.0 });
        if mu.norm() == 0.0 {
            report.tolerance("relative_defect", ZERO_MU_TOL);
        }
        return finish_quiet(cfg, &report);
    }
    let moduli = moduli.unwrap_or_else(|| DEFAULT_PROBE_MODULI.to_vec());
    if moduli.is_empty() || moduli.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
        return Err(CliError::Arg("--moduli must be positive numbers".into()));
    }
    let probe = normality_probe(&lat, &mu_grid(&spec.params, &moduli))?;
    let mut rows: Vec<_> = probe.results.clone();
    rows.sort_by(|a, b| {
        a.mu.norm()
            .total_cmp(&b.mu.norm())
            .then(a.mu.arg().total_cmp(&b.mu.arg()))
    });
    let mut table = String::from("mu_re,mu_im,modulus,on_gamma,defect,relative_defect\n");
    for r in &rows {
        println!(
            "μ = {} ({}): defect {:.4e}, relative {:.4e}",
            cplx(r.mu),
            if r.on_gamma { "on Γ" } else { "mid-sector" },
            r.defect,
            r.relative_defect
        );
        table.push_str(&format!(
            "{:e},{:e},{:e},{},{:e},{:e}\n",
            r.mu.re,
            r.mu.im,
            r.mu.norm(),
            r.on_gamma,
            r.defect,
            r.relative_defect
        ));
    }
    let (on, off): (Vec<&NormalityProbeResult>, Vec<_>) = rows.iter().partition(|r| r.on_gamma);
    report.insert("on_gamma.max_defect", on.iter().map(|r| r.defect).fold(0.0, f64::max));
    report.insert(
        "mid_sector.min_defect",
        off.iter().map(|r| r.defect).fold(f64::INFINITY, f64::min),
    );
    report.insert("separation", probe.separation);
    println!(
        "separation {:.3} (need {}), ordering holds: {}",
        probe.separation,
        qexp_core::verify::SEPARATION_FACTOR,
        probe.ordering_holds
    );
    let body = match cfg.format {
        Format::Json => report.to_json()?,
        Format::Csv => table,
    };
    write_out(cfg, &body)?;
    Ok(if probe.ordering_holds {
        Status::Ok
    } else {
        Status::Violation(vec!["separation".into()])
    })
}

/// `gamma=k:2,x:0.3` or `gamma=0`.
fn parse_gamma(s: &str, p: &GroupParams) -> Result<GammaPoint, CliError> {
    let bad = || {
        CliError::Arg(format!(
            "malformed --self-test '{s}', expected gamma=k:<int>,x:<real> or gamma=0"
        ))
    };
    let body = s.trim().strip_prefix("gamma=").ok_or_else(bad)?;
    if body == "0" {
        return Ok(GammaPoint::Zero);
    }
    let (mut k, mut x) = (None, None);
    for part in body.split(',') {
        match part.split_once(':') {
            Some(("k", v)) => k = Some(v.trim().parse::<i64>().map_err(|_| bad())?),
            Some(("x", v)) => x = Some(v.trim().parse::<f64>().map_err(|_| bad())?),
            _ => return Err(bad()),
        }
    }
    match (k, x) {
        (Some(k), Some(x)) if x.is_finite() => Ok(p.point(k, x)),
        _ => Err(bad()),
    }
}

pub fn fit_gamma(cfg: &RunConfig, from: Option<&Path>, self_test: Option<&str>) -> Result<Status, CliError> {
    let p = cfg.params()?;
    let quad = cfg.quad;
    let mut report = ResidualReport::new("fit_gamma");
    cfg.stamp(&mut report, None);
    let (result, truth) = match (from, self_test) {
        (Some(path), None) => {
            let f = fs::File::open(path).map_err(|e| CliError::Arg(format!("{}: {e}", path.display())))?;
            let table = SampleTable::read_csv(BufReader::new(f), &p)?;
            (fit(&|z| table.lookup(z), &p, &quad)?, None)
        }
        (None, Some(spec)) => {
            let g0 = parse_gamma(spec, &p)?;
            (fit(&|z| fn_eval(p.gamma_mul(g0, z), &p, &quad), &p, &quad)?, Some(g0))
        }
        _ => {
            return Err(CliError::Arg(
                "fit gamma needs exactly one of --from-samples, --self-test".into(),
            ))
        }
    };
    match result.gamma {
        GammaPoint::Zero => println!("γ = 0"),
        GammaPoint::Ray { k, x } => println!("γ = q^{k} e^{x:.12}  (k = {k}, x = {x:.12})"),
    }
    println!("residual {:.3e}, verdict {:?}", result.residual, result.verdict);
    report.insert("fit.residual", result.residual);
    if let GammaPoint::Ray { k, x } = result.gamma {
        report.insert("fit.k", k as f64);
        report.insert("fit.x", x);
    }
    report.insert(
        "fit.member",
        if result.verdict == FitVerdict::NotInFamily {
            0.0
        } else {
            1.0
        },
    );
    report.meta.tolerances.insert("fit.threshold".into(), FIT_THRESHOLD);
    let mut bad = Vec::new();
    if result.verdict == FitVerdict::NotInFamily {
        bad.push("fit.member".to_string());
    }
    if let Some(g0) = truth {
        let k_ok = result.gamma.k() == g0.k();
        let dx = match (result.gamma.x(), g0.x()) {
            (Some(a), Some(b)) => (a - b).abs(),
            (None, None) => 0.0,
            _ => f64::INFINITY,
        };
        println!("self-test: k exact {k_ok}, |Δx| = {dx:.2e}");
        report.insert("self_test.dx", dx);
        report.tolerance("self_test.dx", FIT_DX_TOL);
        report.insert("self_test.k_mismatch", if k_ok { 0.0 } else { 1.0 });
        report.tolerance("self_test.k_mismatch", 0.0);
    }
    let status = finish_quiet(cfg, &report)?;
    Ok(match status {
        Status::Ok if bad.is_empty() => Status::Ok,
        Status::Ok => Status::Violation(bad),
        Status::Violation(mut v) => {
            v.extend(bad);
            Status::Violation(v)
        }
    })
}
