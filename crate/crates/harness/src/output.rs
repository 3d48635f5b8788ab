//! CSV files and the plotting script.
//!
//! The sweep CSV has one row per ε with columns
//! `epsilon, h, poisson_err_l2, poisson_err_h1, corrector_err_h1`, then
//! `gap_n`, `eig_err_l2_n` and `eig_err_h1_n` for `n = 0..n_pairs`, then
//! `status`. Failed rows keep `epsilon` and `h`, leave the metrics empty and
//! carry `error: <message>` in `status`.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::error::{HarnessError, Result};
use crate::sweep::{Check, ConvergenceRecord, Profile, SweepRow};

pub const SWEEP_CSV: &str = "sweep.csv";
pub const SUMMARY_CSV: &str = "summary.csv";
pub const PLOT_SCRIPT: &str = "plot_sweep.py";
pub const PROFILE_COLUMNS: [&str; 4] = ["x", "u_eps", "u_hom", "u_corrector"];

const STATUS_OK: &str = "ok";
const STATUS_ERROR: &str = "error: ";

/// 12 significant digits.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.11e}")
}

pub fn profile_file_name(epsilon: f64) -> String {
    format!("profile_eps_{epsilon}.csv")
}

pub fn sweep_header(n_pairs: usize) -> Vec<String> {
    let mut h: Vec<String> = [
        "epsilon",
        "h",
        "poisson_err_l2",
        "poisson_err_h1",
        "corrector_err_h1",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for prefix in ["gap", "eig_err_l2", "eig_err_h1"] {
        h.extend((0..n_pairs).map(|n| format!("{prefix}_{n}")));
    }
    h.push("status".into());
    h
}

fn record_fields(r: &ConvergenceRecord) -> Vec<String> {
    let mut f = vec![
        fmt_num(r.epsilon),
        fmt_num(r.h),
        fmt_num(r.poisson_err_l2),
        fmt_num(r.poisson_err_h1),
        fmt_num(r.corrector_err_h1),
    ];
    for col in [&r.eigen_gap, &r.eigen_err_l2, &r.eigen_err_h1] {
        f.extend(col.iter().map(|&v| fmt_num(v)));
    }
    f.push(STATUS_OK.into());
    f
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| HarnessError::io(path, e))
}

fn write_rows<I>(path: &Path, rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_writer(create(path)?);
    for row in rows {
        w.write_record(&row)
            .map_err(|e| HarnessError::csv(path, e))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

/// Writes the sweep CSV. Refuses an empty sweep without touching `path`.
pub fn emit_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(HarnessError::Invalid("no records to write".into()));
    }
    let n_pairs = rows
        .iter()
        .find_map(|r| r.record().map(ConvergenceRecord::n_pairs))
        .unwrap_or(0);
    let width = sweep_header(n_pairs).len();
    let body = rows.iter().map(|row| match row {
        SweepRow::Ok(r) => record_fields(r),
        SweepRow::Failed {
            epsilon,
            h,
            message,
        } => {
            let mut f = vec![fmt_num(*epsilon), fmt_num(*h)];
            f.resize(width - 1, String::new());
            f.push(format!("{STATUS_ERROR}{message}"));
            f
        }
    });
    write_rows(path, std::iter::once(sweep_header(n_pairs)).chain(body))
}

/// Parses a file written by [`emit_csv`].
pub fn read_csv(path: &Path) -> Result<Vec<SweepRow>> {
    let mut rd = csv::Reader::from_path(path).map_err(|e| HarnessError::csv(path, e))?;
    let header = rd
        .headers()
        .map_err(|e| HarnessError::csv(path, e))?
        .clone();
    let n_pairs = header
        .len()
        .checked_sub(6)
        .filter(|m| m % 3 == 0)
        .map(|m| m / 3)
        .ok_or_else(|| HarnessError::Record(format!("unexpected header width {}", header.len())))?;
    if header
        .iter()
        .ne(sweep_header(n_pairs).iter().map(String::as_str))
    {
        return Err(HarnessError::Record(
            "header does not match the sweep schema".into(),
        ));
    }
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| HarnessError::csv(path, e))?;
        let num = |i: usize| -> Result<f64> {
            rec[i]
                .parse()
                .map_err(|_| HarnessError::Record(format!("field {i}: '{}'", &rec[i])))
        };
        let status = &rec[header.len() - 1];
        if let Some(message) = status.strip_prefix(STATUS_ERROR) {
            rows.push(SweepRow::Failed {
                epsilon: num(0)?,
                h: num(1)?,
                message: message.to_string(),
            });
            continue;
        }
        if status != STATUS_OK {
            return Err(HarnessError::Record(format!("unknown status '{status}'")));
        }
        let block = |start: usize| {
            (start..start + n_pairs)
                .map(num)
                .collect::<Result<Vec<_>>>()
        };
        rows.push(SweepRow::Ok(ConvergenceRecord {
            epsilon: num(0)?,
            h: num(1)?,
            poisson_err_l2: num(2)?,
            poisson_err_h1: num(3)?,
            corrector_err_h1: num(4)?,
            eigen_gap: block(5)?,
            eigen_err_l2: block(5 + n_pairs)?,
            eigen_err_h1: block(5 + 2 * n_pairs)?,
        }));
    }
    Ok(rows)
}

/// Writes nodal profiles with columns `x, u_eps, u_hom, u_corrector`.
pub fn emit_profile(profile: &Profile, path: &Path) -> Result<()> {
    let header = PROFILE_COLUMNS.iter().map(|s| s.to_string()).collect();
    let body = (0..profile.x.len()).map(|i| {
        [
            profile.x[i],
            profile.u_eps[i],
            profile.u_hom[i],
            profile.u_corrector[i],
        ]
        .iter()
        .map(|&v| fmt_num(v))
        .collect()
    });
    write_rows(path, std::iter::once(header).chain(body))
}

/// One header row of check names and one row of verdicts.
pub fn emit_summary(checks: &[Check], path: &Path) -> Result<()> {
    let names = checks.iter().map(|c| c.name.clone()).collect();
    let verdicts = checks
        .iter()
        .map(|c| c.verdict.as_str().to_string())
        .collect();
    write_rows(path, [names, verdicts])
}

/// Writes a matplotlib script that reads `csv_name` and the per-ε profiles
/// from its own directory. A single ε gets only the overlay plot.
pub fn emit_plot_script(rows: &[SweepRow], path: &Path, csv_name: &str) -> Result<()> {
    if rows.is_empty() {
        return Err(HarnessError::Invalid("no records to plot".into()));
    }
    let profiles: Vec<String> = rows
        .iter()
        .filter(|r| r.record().is_some())
        .map(|r| format!("{:?}", profile_file_name(r.epsilon())))
        .collect();
    let n_pairs = rows
        .iter()
        .find_map(|r| r.record().map(ConvergenceRecord::n_pairs))
        .unwrap_or(0);

    let mut s = String::new();
    s.push_str(&format!(
        r#""""Plots for a langevin-homog sweep; paths are relative to this file."""
import csv
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))
SWEEP = {csv_name:?}
PROFILES = [{profiles}]
N_PAIRS = {n_pairs}


def read(name):
    with open(os.path.join(HERE, name), newline="") as fh:
        return list(csv.DictReader(fh))


def column(rows, key):
    return [float(r[key]) for r in rows]


rows = [r for r in read(SWEEP) if r["status"] == "ok"]
eps = column(rows, "epsilon")
"#,
        profiles = profiles.join(", "),
    ));

    if profiles.is_empty() {
        s.push_str("\n# no successful epsilon: nothing to plot\n");
    } else {
        s.push_str(
            r#"
# --- plot: solution overlay
fig, axes = plt.subplots(len(PROFILES), 1, figsize=(7, 2.5 * len(PROFILES)), squeeze=False)
for ax, name, e in zip(axes[:, 0], PROFILES, eps):
    prof = read(name)
    x = column(prof, "x")
    ax.plot(x, column(prof, "u_eps"), lw=0.8, label="u_eps")
    ax.plot(x, column(prof, "u_hom"), "--", label="u_hom")
    ax.plot(x, column(prof, "u_corrector"), ":", label="u_corrector")
    ax.set_title(f"eps = {e}")
    ax.legend()
fig.tight_layout()
fig.savefig(os.path.join(HERE, "overlay.png"), dpi=150)
"#,
        );
    }

    if profiles.len() < 2 {
        s.push_str("\n# decay plots skipped: a single epsilon has no trend to show\n");
    } else {
        s.push_str(
            r#"
# --- plot: poisson and corrector errors
fig, ax = plt.subplots()
for key in ("poisson_err_l2", "poisson_err_h1", "corrector_err_h1"):
    ax.loglog(eps, column(rows, key), "o-", label=key)
ax.set_xlabel("epsilon")
ax.set_ylabel("error")
ax.legend()
fig.savefig(os.path.join(HERE, "poisson_errors.png"), dpi=150)

# --- plot: eigenvalue gaps
fig, ax = plt.subplots()
for n in range(1, N_PAIRS):
    ax.loglog(eps, column(rows, f"gap_{n}"), "o-", label=f"n = {n}")
ax.set_xlabel("epsilon")
ax.set_ylabel("|lambda_eps - lambda_hom|")
ax.legend()
fig.savefig(os.path.join(HERE, "eigen_gaps.png"), dpi=150)
"#,
        );
    }

    let mut f = create(path)?;
    f.write_all(s.as_bytes())
        .map_err(|e| HarnessError::io(path, e))
}
