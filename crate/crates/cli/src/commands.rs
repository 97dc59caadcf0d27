//! One function per subcommand; each returns an `Outcome`.

use std::f64::consts::PI;

use rayon::prelude::*;
use rydqed::abraham::{
    abraham_force_amplitude, abraham_momentum, kappa1a_reference_fit, kappa1a, kappa1b, kappa2, kappa_all, loglog_slope,
    polarizability_closed, polarizability_sum, Channel, KappaResult,
};
use rydqed::ac_vacuum::{
    ac_amplitude, ac_momentum, ac_numeric_amplitude, delta_m_closed_form, relativistic_ratio, renorm_closed_form,
    renorm_combination, renorm_difference_extrapolated, stark_frequency,
};
use rydqed::units::{AtomSpec, CODATA};

use crate::config::{CacheAction, ChannelArg, IntegralCheck, RunConfig, LONG_THRESHOLD};
use crate::report::{Cell, CutoffRecord, Outcome, Table};
use crate::CliError;

/// Ratio threshold for the Zeeman/Stark dominance flag.
const ZEEMAN_MARGIN: f64 = 10.0;
/// Frequency used for the d|P_A|/dt diagnostic (Hz).
const DIAGNOSTIC_FREQUENCY: f64 = 1e4;
/// Headline relative correction quoted in the conclusion, in units of α².
const HEADLINE_RELATIVE: f64 = 0.028;
/// Force figure quoted for n = 50, E0 = 1 V/m (N).
const QUOTED_FORCE: f64 = 5e-29;

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    use crate::config::CommandKind::*;
    match cfg.command {
        Polarizability => polarizability(cfg),
        Abraham => abraham(cfg),
        Ac => ac(cfg),
        Integrals => integrals(cfg),
        Sweep => {
            let channel = cfg.channel.ok_or_else(|| CliError::Usage("sweep needs a channel".into()))?;
            emit_figure_data(channel, cfg)
        }
        Cache => cache(cfg),
    }
}

/// 4πε0 a0³ in C·m²/V, the SI unit of polarizability.
fn polarizability_unit() -> f64 {
    let c = &CODATA;
    c.e_charge * c.e_charge / (c.alpha * c.hbar * c.c0) * c.a0.powi(3)
}

pub fn polarizability(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome {
        table: Table::new(&["n", "closed_a0^3", "sum_a0^3", "deviation_pct", "closed_si", "sum_si", "cutoff", "converged"]),
        ..Default::default()
    };
    let ns = cfg.n_range.values();
    let results: Vec<_> = ns
        .par_iter()
        .map(|&n| {
            let start = n + cfg.cutoff.delta0.max(10);
            polarizability_sum(n, start).map(|r| (n, r))
        })
        .collect::<Result<_, _>>()?;
    let unit = polarizability_unit();
    for (n, (sum, conv)) in results {
        let closed = polarizability_closed(n, n as i32 - 1);
        let dev = 100.0 * (sum - closed) / closed;
        if !conv.converged {
            out.flags.push(format!("n={n}: polarizability sum not converged ({:.2e})", conv.achieved_rel));
        }
        out.table.push(vec![
            n.into(),
            closed.into(),
            sum.into(),
            dev.into(),
            (closed * unit).into(),
            (sum * unit).into(),
            conv.cutoff().into(),
            conv.converged.into(),
        ]);
        out.convergence.push(CutoffRecord::new(n, "polarizability_sum", &conv));
        eprintln!("n={n}: closed {closed:.6e} a0^3, sum {sum:.6e} a0^3, deviation {dev:+.3}%");
    }
    Ok(out)
}

fn require_long(cfg: &RunConfig, n: u32) -> Result<(), CliError> {
    if n > LONG_THRESHOLD && !cfg.long {
        return Err(CliError::Usage(format!("kappa1a at n={n} > {LONG_THRESHOLD} needs --long")));
    }
    Ok(())
}

pub fn abraham(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome {
        table: Table::new(&[
            "n",
            "pa_y_si",
            "pa_y_au",
            "kappa1a",
            "kappa1b",
            "kappa2",
            "kappa_total",
            "kappa1a_first",
            "kappa1a_e2",
            "kappa1a_e3",
            "kappa1a_e2_squared",
            "kappa_inverse_e",
            "relative_correction",
            "dpa_dt_n",
            "zeeman_margin",
            "cutoff",
            "converged",
        ]),
        ..Default::default()
    };
    let ns = cfg.n_range.values();
    for &n in &ns {
        if n < 2 {
            return Err(CliError::Usage("the kappa channels need n >= 2".into()));
        }
        require_long(cfg, n)?;
    }
    let sets: Vec<_> = ns
        .par_iter()
        .map(|&n| {
            let s = kappa_all(n, &cfg.cutoff);
            if cfg.long {
                eprintln!("n={n} done");
            }
            s
        })
        .collect::<Result<_, _>>()?;
    let a2 = CODATA.alpha * CODATA.alpha;
    let omega = 2.0 * PI * DIAGNOSTIC_FREQUENCY;
    for s in sets {
        let n = s.n;
        let pa = abraham_momentum(n, &cfg.fields, &CODATA);
        let inv = if cfg.fields.e0_au > 0.0 { s.terms.inverse_e_term(cfg.fields.e0_au) } else { f64::NAN };
        let margin = cfg.fields.zeeman_margin(n, &CODATA);
        if margin < ZEEMAN_MARGIN {
            out.warnings.push(format!("n={n}: Zeeman/Stark margin {margin:.2} below {ZEEMAN_MARGIN}"));
        }
        if !s.convergence.converged {
            out.flags.push(format!("n={n}: kappa not converged ({:.2e})", s.convergence.achieved_rel));
        }
        let rel = s.total();
        let dpa = abraham_force_amplitude(n, &cfg.fields, omega, &CODATA);
        eprintln!(
            "n={n}: |P_A| = {:.4e} kg m/s, kappa1a {:+.4e}, kappa1b {:+.4e}, kappa2 {:+.4e}, total {:+.4e} (headline {HEADLINE_RELATIVE}), 1/E0 term {:+.3e}",
            pa.vector_si.y, s.kappa1a, s.kappa1b, s.kappa2, rel, inv
        );
        out.table.push(vec![
            n.into(),
            pa.vector_si.y.into(),
            pa.vector_au.y.into(),
            s.kappa1a.into(),
            s.kappa1b.into(),
            s.kappa2.into(),
            rel.into(),
            s.terms.first.into(),
            s.terms.e2.into(),
            s.terms.e3.into(),
            s.terms.e2_squared.into(),
            inv.into(),
            (rel * a2).into(),
            dpa.into(),
            margin.into(),
            s.convergence.cutoff().into(),
            s.convergence.converged.into(),
        ]);
        out.convergence.push(CutoffRecord::new(n, "kappa_all", &s.convergence));
    }
    out.summary_value("headline_relative_alpha2", HEADLINE_RELATIVE);
    out.summary_value("diagnostic_frequency_hz", DIAGNOSTIC_FREQUENCY);
    Ok(out)
}

pub fn ac(cfg: &RunConfig) -> Result<Outcome, CliError> {
    if cfg.n_range.lo != cfg.n_range.hi {
        return Err(CliError::Usage("ac takes a single n".into()));
    }
    let n = cfg.n_range.lo;
    if n < 3 {
        return Err(CliError::Usage("the nR state needs n >= 3".into()));
    }
    let e0 = cfg.fields.e0_si;
    if !(e0 > 0.0) {
        return Err(CliError::Usage("ac needs E0 > 0".into()));
    }
    let atom: &AtomSpec = &cfg.atom;
    let mass = atom.total();
    let r = ac_amplitude(n, e0, mass, atom, cfg.ac.quarter, &CODATA)?;
    let numeric = ac_numeric_amplitude(n, e0, atom, cfg.ac.quarter, &CODATA)?;
    let omega = stark_frequency(n, e0, &CODATA);
    let t_max = cfg.ac.t_max.unwrap_or(2.0 * PI / omega);
    let steps = cfg.ac.steps.max(1);
    let mut out = Outcome {
        table: Table::new(&["t_s", "px_si", "py_si", "pz_si", "px_au", "py_au", "pz_au"]),
        ..Default::default()
    };
    let pu = CODATA.momentum_unit();
    let rows: Vec<_> = (0..=steps)
        .into_par_iter()
        .map(|i| {
            let t = t_max * i as f64 / steps as f64;
            ac_momentum(n, e0, t, atom, cfg.ac.quarter, &CODATA).map(|p| (t, p))
        })
        .collect::<Result<_, _>>()?;
    for (t, p) in rows {
        out.table.push(vec![t.into(), p.x.into(), p.y.into(), p.z.into(), (p.x / pu).into(), (p.y / pu).into(), (p.z / pu).into()]);
    }
    let force_ratio = r.force / QUOTED_FORCE;
    if !(1.0 / 30.0..=30.0).contains(&force_ratio) {
        out.warnings.push(format!("force {:.3e} N outside a factor 30 of the quoted {QUOTED_FORCE:e} N", r.force));
    }
    out.summary_value("n", n);
    out.summary_value("e0", e0);
    out.summary_value("omega_n", omega);
    out.summary_value("amplitude", r.p_long_amplitude);
    out.summary_value("amplitude_log_restored", r.p_long_amplitude_restored);
    out.summary_value("amplitude_numeric", numeric);
    out.summary_value("displacement", r.displacement);
    out.summary_value("displacement_momentum_route", r.displacement_momentum_route);
    out.summary_value("force", r.force);
    out.summary_value("force_quoted", QUOTED_FORCE);
    out.summary_value("quarter_applied", r.relativistic_quarter_applied);
    eprintln!(
        "n={n}, E0={e0} V/m: omega_n {omega:.4e} rad/s, amplitude {:.4e} (log restored {:.4e}, numeric {:.4e}) kg m/s, dx {:.4e} m, F {:.3e} N (quoted {QUOTED_FORCE:e} N)",
        r.p_long_amplitude, r.p_long_amplitude_restored, numeric, r.displacement, r.force
    );
    Ok(out)
}

fn status(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn integrals(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome {
        table: Table::new(&["check", "mass_ratio", "value", "reference", "rel_error", "status"]),
        ..Default::default()
    };
    let atom = &cfg.atom;
    let c = &CODATA;
    let want = |k: IntegralCheck| cfg.check == k || cfg.check == IntegralCheck::All;
    let push = |out: &mut Outcome, name: &str, ratio: f64, value: f64, reference: f64, tol: f64| {
        let err = if reference != 0.0 { (value - reference).abs() / reference.abs() } else { value.abs() };
        let ok = err <= tol;
        eprintln!("{name} m1/m2={ratio}: {value:.4} (reference {reference:.4}) {}", status(ok));
        if !ok {
            out.flags.push(format!("{name} at m1/m2={ratio}: relative error {err:.2e}"));
        }
        out.table.push(vec![name.into(), ratio.into(), value.into(), reference.into(), err.into(), status(ok).into()]);
    };
    if want(IntegralCheck::Quarter) {
        for ratio in [2.0, 10.0, 1e3, atom.mass_ratio()] {
            let r = relativistic_ratio(ratio, 1.0)?;
            push(&mut out, "quarter", ratio, r.ratio, 0.25, 1e-5 / 0.25);
        }
    }
    if want(IntegralCheck::Renorm) {
        let r = renorm_combination(atom.m1, atom.m2, c)?;
        push(&mut out, "renorm", atom.mass_ratio(), r.value, renorm_closed_form(atom.m1, atom.m2, c.alpha), 1e-6);
    }
    if want(IntegralCheck::DeltaM) {
        let r = renorm_difference_extrapolated(atom, c)?;
        push(&mut out, "delta_m_difference", atom.mass_ratio(), r.value, renorm_closed_form(atom.m1, atom.m2, c.alpha), 1e-6);
        let lambda = 1e3 * atom.m2 * c.c0 / c.hbar;
        let d = rydqed::ac_vacuum::delta_m(atom.m2, lambda, c)?;
        push(&mut out, "delta_m_electron", atom.mass_ratio(), d.value, delta_m_closed_form(atom.m2, lambda, c), 1e-9);
    }
    Ok(out)
}

fn kappa_point(channel: ChannelArg, n: u32, cfg: &RunConfig) -> Result<KappaResult, CliError> {
    Ok(match Channel::from(channel) {
        Channel::K2 => kappa2(n, &cfg.fields, &cfg.cutoff)?,
        Channel::K1b => kappa1b(n, &cfg.fields, &cfg.cutoff, &CODATA)?,
        Channel::K1a => kappa1a(n, &cfg.fields, &cfg.cutoff, false, &CODATA)?,
    })
}

/// Figure data for one channel: n, |κ|, κ, fit residual (and f(n) for κ₁ₐ).
pub fn emit_figure_data(channel: ChannelArg, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let is_1a = channel == ChannelArg::Kappa1a;
    let mut columns = vec!["n", "kappa_abs", "kappa_signed", "fit_residual"];
    if is_1a {
        columns.push("f_n");
    }
    columns.extend(["cutoff", "converged"]);
    let mut out = Outcome { table: Table::new(&columns), ..Default::default() };
    if cfg.n_range.is_empty() {
        out.warnings.push("empty n range; nothing computed".into());
        return Ok(out);
    }
    let ns: Vec<u32> = cfg.n_range.values();
    if ns[0] < 2 {
        return Err(CliError::Usage("the kappa channels need n >= 2".into()));
    }
    if is_1a {
        require_long(cfg, *ns.last().unwrap())?;
    }
    let total = ns.len();
    let done = std::sync::atomic::AtomicUsize::new(0);
    let results: Vec<KappaResult> = ns
        .par_iter()
        .map(|&n| {
            let r = kappa_point(channel, n, cfg);
            let k = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
            if cfg.long {
                eprintln!("[{k}/{total}] n={n} done");
            }
            r
        })
        .collect::<Result<_, _>>()?;
    let xs: Vec<f64> = results.iter().map(|r| r.n as f64).collect();
    let ys: Vec<f64> = results.iter().map(|r| r.value).collect();
    let slope = if xs.len() >= 2 { loglog_slope(&xs, &ys) } else { f64::NAN };
    // Power-law prefactor from the mean log offset.
    let prefactor = if slope.is_finite() {
        (xs.iter().zip(&ys).map(|(x, y)| y.abs().ln() - slope * x.ln()).sum::<f64>() / xs.len() as f64).exp()
    } else {
        f64::NAN
    };
    let mut worst_fit = 0.0f64;
    for r in &results {
        let n = r.n;
        let residual = if is_1a {
            r.value / kappa1a_reference_fit(n) - 1.0
        } else if slope.is_finite() {
            r.value.abs() / (prefactor * (n as f64).powf(slope)) - 1.0
        } else {
            0.0
        };
        worst_fit = worst_fit.max(residual.abs());
        let mut row: Vec<Cell> = vec![n.into(), r.value.abs().into(), r.value.into(), residual.into()];
        if is_1a {
            row.push(kappa1a_reference_fit(n).into());
        }
        row.push(r.convergence.cutoff().into());
        row.push(r.convergence.converged.into());
        out.table.push(row);
        for f in &r.flags {
            if f.starts_with("basis cutoff") {
                out.flags.push(format!("n={n}: {f}"));
            } else {
                out.warnings.push(format!("n={n}: {f}"));
            }
        }
        out.convergence.push(CutoffRecord::new(n, Channel::from(channel).name(), &r.convergence));
    }
    out.summary_value("channel", Channel::from(channel).name());
    out.summary_value("loglog_slope", slope);
    out.summary_value("power_law_prefactor", prefactor);
    out.summary_value("max_abs_fit_residual", worst_fit);
    eprintln!(
        "{}: log-log slope {slope:.4}, prefactor {prefactor:.4e}, max |fit residual| {worst_fit:.3e}",
        Channel::from(channel).name()
    );
    Ok(out)
}

pub fn cache(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome { table: Table::new(&["path", "entries", "status"]), ..Default::default() };
    let action = cfg.cache_action.unwrap_or(CacheAction::Stats);
    let dir = std::env::var_os(rydqed::cache::CACHE_DIR_ENV);
    let path = dir.map(|d| std::path::PathBuf::from(d).join(rydqed::cache::CACHE_FILE));
    let shown = path.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "(memory only)".into());
    match action {
        CacheAction::Stats => {
            let entries = rydqed::cache::global().stats().entries;
            out.table.push(vec![shown.into(), (entries as u32).into(), "ok".into()]);
        }
        CacheAction::Clear => {
            let status = match &path {
                Some(p) if p.exists() => {
                    std::fs::remove_file(p).map_err(|e| CliError::io(p, e))?;
                    "cleared"
                }
                Some(_) => "absent",
                None => {
                    out.warnings.push(format!("{} is not set; nothing to clear", rydqed::cache::CACHE_DIR_ENV));
                    "unset"
                }
            };
            out.table.push(vec![shown.into(), 0u32.into(), status.into()]);
        }
    }
    Ok(out)
}
