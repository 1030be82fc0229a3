use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use blowup_core::asymptotics::Regime;
use blowup_core::integrator::StoreMode;
use blowup_core::pde::solve_to_blowup;
use blowup_core::singularity::SingularityTrack;
use blowup_core::FourierField;
use serde_json::json;

use crate::config::{LabConfig, RunConfig};
use crate::experiments::{self, SNAPSHOT_FACTORS};
use crate::output::{fmt_f64, fmt_opt, RunManifest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Table1,
    Solve,
    Errors,
    Profile,
    Singularity,
    Continue,
    Snapshots,
    Flatness,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Table1 => "table1",
            Command::Solve => "solve",
            Command::Errors => "errors",
            Command::Profile => "profile",
            Command::Singularity => "singularity",
            Command::Continue => "continue",
            Command::Snapshots => "snapshots",
            Command::Flatness => "flatness",
        }
    }

    /// Default `(α, ε)` for the command's figure.
    pub fn defaults(self) -> (f64, f64) {
        match self {
            Command::Continue | Command::Snapshots => (0.25, 0.1),
            Command::Solve => (1.0, 0.01),
            _ => (1.0, 0.001),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// Some cells failed; their rows carry the error.
    Partial,
}

pub fn run(cmd: Command, cfg: &LabConfig, out: &Path) -> Result<Outcome> {
    let rc = cfg.resolve(cmd.defaults());
    let params = serde_json::to_value(&rc)?;
    let mut m = RunManifest::new(cmd.name(), params, rc.seed);
    let start = Instant::now();
    let outcome = match cmd {
        Command::Table1 => table1(&rc, out, &mut m)?,
        Command::Solve => solve(&rc, out, &mut m)?,
        Command::Errors => errors(&rc, out, &mut m)?,
        Command::Profile => profile(&rc, out, &mut m)?,
        Command::Singularity => singularity(&rc, out, &mut m)?,
        Command::Continue => continuation(&rc, out, &mut m)?,
        Command::Snapshots => snapshots(&rc, out, &mut m)?,
        Command::Flatness => flatness(&rc, out, &mut m)?,
    };
    m.time("total", start.elapsed().as_secs_f64());
    m.status = match outcome {
        Outcome::Success => "ok",
        Outcome::Partial => "partial",
    }
    .to_string();
    let path = m.write(out)?;
    eprintln!("wrote {}", path.display());
    Ok(outcome)
}

/// Checks the manifest of a previous run of `cmd` in `out`.
pub fn verify(cmd: Command, out: &Path) -> Result<()> {
    let path = RunManifest::manifest_path(out, cmd.name());
    let m = RunManifest::load(&path).with_context(|| format!("loading {}", path.display()))?;
    let bad = m.verify(out);
    if !bad.is_empty() {
        bail!("{} file(s) failed verification:\n  {}", bad.len(), bad.join("\n  "));
    }
    eprintln!("{}: {} file(s) verified", path.display(), m.files.len());
    Ok(())
}

fn table1(rc: &RunConfig, out: &Path, m: &mut RunManifest) -> Result<Outcome> {
    let rows = experiments::table1(&rc.model(), rc.jobs);
    println!("{:>6} {:>7} {:>10} {:>10} {:>10} {:>10}", "alpha", "eps", "t_c", "t_c'-t_c", "^t_c-t_c", "~t_c-t_c");
    for r in &rows {
        match &r.error {
            None => println!(
                "{:>6} {:>7} {:>10.6} {:>10.1e} {:>10.1e} {:>10.1e}",
                r.alpha,
                r.epsilon,
                r.t_c,
                r.d_prime.unwrap_or(f64::NAN),
                r.d_hat,
                r.d_tilde
            ),
            Some(e) => println!("{:>6} {:>7} failed: {e}", r.alpha, r.epsilon),
        }
    }
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    m.emit_csv(
        out,
        "table1.csv",
        json!({ "failed_cells": failed }),
        &["alpha", "epsilon", "t_c", "tcprime_minus_tc", "that_minus_tc", "ttilde_minus_tc", "error"],
        rows.iter().map(|r| {
            vec![
                fmt_f64(r.alpha),
                fmt_f64(r.epsilon),
                fmt_f64(r.t_c),
                fmt_opt(r.d_prime),
                fmt_f64(r.d_hat),
                fmt_f64(r.d_tilde),
                r.error.clone().unwrap_or_default().replace(',', ";"),
            ]
        }),
    )?;
    Ok(if failed == 0 { Outcome::Success } else { Outcome::Partial })
}

fn solve(rc: &RunConfig, out: &Path, m: &mut RunManifest) -> Result<Outcome> {
    let (tr, report) = solve_to_blowup(&rc.model().with_store(StoreMode::All))?;
    eprintln!("t_c = {:.9} after {} steps", report.t_c, report.steps);
    m.emit_csv(
        out,
        "trajectory.csv",
        json!({ "t_c": report.t_c }),
        &["t", "v_at_0", "v_at_pi", "max_abs_imag"],
        tr.times.iter().zip(&tr.states).map(|(t, s)| {
            let f = FourierField::new(rc.n_modes, s.clone()).expect("finite state");
            vec![fmt_f64(*t), fmt_f64(f.sum().re), fmt_f64(f.alternating_sum().re), fmt_f64(f.max_abs_imag())]
        }),
    )?;
    m.emit_json(out, "blowup.json", &report)?;
    Ok(Outcome::Success)
}

fn errors(rc: &RunConfig, out: &Path, m: &mut RunManifest) -> Result<Outcome> {
    let (report, rows) = experiments::error_curves(&rc.model())?;
    m.emit_csv(
        out,
        "error_curves.csv",
        json!({ "t_c": report.t_c }),
        &["k", "t", "err13", "err19"],
        rows.iter().map(|r| vec![r.k.to_string(), fmt_f64(r.t), fmt_f64(r.err_first_order), fmt_f64(r.err_second_scale)]),
    )?;
    Ok(Outcome::Success)
}

fn profile(rc: &RunConfig, out: &Path, m: &mut RunManifest) -> Result<Outcome> {
    let (report, rows, coeffs) = experiments::blowup_profile(&rc.model())?;
    let note = "solver values below x ~ 1e-5 are limited by roundoff in the series summation";
    m.emit_csv(
        out,
        "profile.csv",
        json!({ "t_c": report.t_c, "note": note }),
        &["x", "v", "eq20", "eq22"],
        rows.iter().map(|r| vec![fmt_f64(r.x), fmt_f64(r.v), fmt_opt(r.global), fmt_opt(r.local)]),
    )?;
    m.emit_csv(
        out,
        "coefficients.csv",
        json!({ "t_c": report.t_c, "slope_10_60": experiments::decay_slope(&coeffs, 10, 60) }),
        &["k", "abs_c", "eq21", "eq23"],
        coeffs.iter().map(|r| vec![r.k.to_string(), fmt_f64(r.abs_c), fmt_opt(r.law_global), fmt_opt(r.law_local)]),
    )?;
    Ok(Outcome::Success)
}

fn track_rows(track: &SingularityTrack) -> impl Iterator<Item = Vec<String>> + '_ {
    (0..track.len()).map(move |i| {
        vec![
            fmt_f64(track.times[i]),
            fmt_opt(track.y_fit[i]),
            fmt_opt(track.y_root[i]),
            fmt_opt(track.fit_quality[i]),
            fmt_opt(track.window_spread[i]),
            u8::from(track.usable(i)).to_string(),
        ]
    })
}

fn singularity(rc: &RunConfig, out: &Path, m: &mut RunManifest) -> Result<Outcome> {
    let rep = experiments::singularity(&rc.model())?;
    let cols = ["t", "y_fit", "y_root", "residual", "window_spread", "usable"];
    m.emit_csv(out, "track.csv", json!({ "t_c": rep.t_c, "frame": "real" }), &cols, track_rows(&rep.track))?;
    m.emit_csv(
        out,
        "track_shifted.csv",
        json!({ "t_c": rep.t_c, "frame": "shifted", "shift": rep.shift }),
        &cols,
        track_rows(&rep.shifted),
    )?;
    let mut cols: Vec<&str> = vec!["t", "y_fit", "y_root", "y_shifted"];
    cols.extend(Regime::ALL.iter().map(|r| r.name()));
    let (a, e, t_c) = (rc.alpha, rc.epsilon, rep.t_c);
    type Merged = (f64, Option<f64>, Option<f64>, Option<f64>);
    let mut merged: Vec<Merged> = (0..rep.track.len())
        .map(|i| (rep.track.times[i], rep.track.y_fit[i], rep.track.y_root[i], None))
        .chain((0..rep.shifted.len()).map(|i| (rep.shifted.times[i], None, None, rep.shifted.y_fit[i])))
        .collect();
    merged.sort_by(|x, y| x.0.total_cmp(&y.0));
    m.emit_csv(
        out,
        "track_overlay.csv",
        json!({ "t_c": t_c }),
        &cols,
        merged.into_iter().map(|(t, f, r, s)| {
            let mut row = vec![fmt_f64(t), fmt_opt(f), fmt_opt(r), fmt_opt(s)];
            row.extend(Regime::ALL.iter().map(|&g| fmt_opt(blowup_core::asymptotics::singularity_y(g, t, Some(t_c), a, e).ok())));
            row
        }),
    )?;
    Ok(Outcome::Success)
}

fn field_rows(v: &FourierField) -> Result<Vec<Vec<String>>> {
    let grid = v.synthesize(blowup_core::spectral::padded_grid_size(v.n_modes()))?;
    let u = experiments::u_samples(v)?;
    Ok(u.into_iter()
        .zip(grid.values())
        .map(|((x, ur, ui), vv)| vec![fmt_f64(x), fmt_f64(ur), fmt_f64(ui), fmt_f64(vv.re), fmt_f64(vv.im)])
        .collect())
}

fn continuation(rc: &RunConfig, out: &Path, m: &mut RunManifest) -> Result<Outcome> {
    let t_end = rc.t_end.unwrap_or(20.0);
    let rep = experiments::continuation(
        &rc.model(),
        t_end,
        rc.seed,
        blowup_core::pde::DEFAULT_NOISE_AMPLITUDE,
        &rc.times,
        rc.complex_path,
    )?;
    let t_c = rep.summary.t_c;
    let mut wanted: Vec<f64> = SNAPSHOT_FACTORS.iter().map(|f| f * t_c).collect();
    wanted.extend(rc.times.iter().copied().filter(|&t| t > 0.0 && t <= t_end));
    wanted.push(t_end);
    wanted.sort_by(f64::total_cmp);
    wanted.dedup();
    let cols = ["x", "u_re", "u_im", "v_re", "v_im"];
    for (i, &t) in wanted.iter().enumerate() {
        let Some(v) = rep.noise.snapshot_at(t) else { continue };
        let rows = match field_rows(v) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("t = {t}: {e}; snapshot skipped");
                continue;
            }
        };
        m.emit_csv(out, &format!("snapshot_{i:02}.csv"), json!({ "t": t, "t_over_tc": t / t_c }), &cols, rows)?;
    }
    if let Some(path) = &rep.path {
        if let Some((t, v)) = path.snapshots.last() {
            m.emit_csv(out, "path_end.csv", json!({ "t": t, "branch": "upper" }), &cols, field_rows(v)?)?;
        }
    }
    m.emit_json(out, "continuation.json", &rep.summary)?;
    println!("{}", serde_json::to_string_pretty(&rep.summary)?);
    Ok(Outcome::Success)
}

fn snapshots(rc: &RunConfig, out: &Path, m: &mut RunManifest) -> Result<Outcome> {
    let (t_c, rows) = experiments::fourier_snapshots(&rc.model(), rc.seed, 0.05)?;
    m.emit_csv(
        out,
        "fourier_snapshots.csv",
        json!({ "t_c": t_c }),
        &["t", "k", "abs_c", "eq23"],
        rows.iter().map(|r| vec![fmt_f64(r.t), r.k.to_string(), fmt_f64(r.abs_c), fmt_opt(r.law_local)]),
    )?;
    Ok(Outcome::Success)
}

fn flatness(rc: &RunConfig, out: &Path, m: &mut RunManifest) -> Result<Outcome> {
    let (report, rows) = experiments::flatness_series(&rc.model(), 5)?;
    m.emit_csv(
        out,
        "flatness.csv",
        json!({ "t_c": report.t_c }),
        &["t", "f", "f_approx", "rel_err"],
        rows.iter().map(|r| vec![fmt_f64(r.t), fmt_f64(r.f), fmt_opt(r.f_approx), fmt_opt(r.rel_err)]),
    )?;
    Ok(Outcome::Success)
}
