//! Per-cell and aggregate CSV tables for figure sweeps.

use std::io::Write;

use super::figures::LabeledSweep;
use super::SweepResult;
use crate::error::{Error, Result};

pub const CELL_COLUMNS: [&str; 17] = [
    "figure",
    "cell_id",
    "law",
    "link",
    "loss",
    "radius",
    "corr",
    "beta_star",
    "train_size",
    "replicate",
    "excess_01",
    "excess_phi",
    "sine_theta",
    "bound_sin",
    "bound_bartlett",
    "std_error_01",
    "error_code",
];

pub const AGGREGATE_COLUMNS: [&str; 22] = [
    "figure",
    "cell_id",
    "law",
    "link",
    "loss",
    "radius",
    "corr",
    "beta_star",
    "train_size",
    "n_ok",
    "n_failed",
    "mean_excess_01",
    "se_excess_01",
    "mean_excess_phi",
    "se_excess_phi",
    "mean_sine_theta",
    "se_sine_theta",
    "mean_bound_sin",
    "se_bound_sin",
    "mean_bound_bartlett",
    "se_bound_bartlett",
    "verdict",
];

fn num(x: f64) -> String {
    format!("{x}")
}

fn csv_err(e: impl std::fmt::Display) -> Error {
    Error::Domain(format!("csv write failed: {e}"))
}

/// `figure..beta_star`, shared by both tables.
fn identity_columns(figure: &str, cell_id: &str, s: &SweepResult) -> Vec<String> {
    let c = &s.config;
    let corr = if c.law.kind.is_correlated() {
        c.law.correlation
    } else {
        0.0
    };
    vec![
        figure.to_string(),
        cell_id.to_string(),
        c.law.kind.name().to_string(),
        c.link.name().to_string(),
        c.loss.name().to_string(),
        num(s.radius),
        num(corr),
        c.beta_star
            .as_slice()
            .iter()
            .map(|b| num(*b))
            .collect::<Vec<_>>()
            .join(";"),
    ]
}

pub fn write_cells_csv<W: Write>(out: W, sweeps: &[LabeledSweep]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CELL_COLUMNS).map_err(csv_err)?;
    for s in sweeps {
        let id = identity_columns(&s.figure, &s.cell_id, &s.result);
        for cell in &s.result.cells {
            let mut rec = id.clone();
            rec.push(cell.train_size.to_string());
            rec.push(cell.replicate.to_string());
            match &cell.outcome {
                Ok((_, r)) => {
                    rec.extend(
                        [
                            r.excess_01,
                            r.excess_phi,
                            r.sine_theta,
                            r.bound_sin,
                            r.bound_bartlett,
                            r.std_error_01,
                        ]
                        .map(num),
                    );
                    rec.push(String::new());
                }
                Err(code) => {
                    rec.extend(std::iter::repeat_n(String::new(), 6));
                    rec.push(code.clone());
                }
            }
            w.write_record(&rec).map_err(csv_err)?;
        }
    }
    w.flush().map_err(csv_err)?;
    Ok(())
}

pub fn write_aggregate_csv<W: Write>(out: W, sweeps: &[LabeledSweep]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(AGGREGATE_COLUMNS).map_err(csv_err)?;
    for s in sweeps {
        let id = identity_columns(&s.figure, &s.cell_id, &s.result);
        for a in &s.result.aggregates {
            let mut rec = id.clone();
            rec.push(a.train_size.to_string());
            rec.push(a.n_ok.to_string());
            rec.push(a.n_failed.to_string());
            for m in [
                a.excess_01,
                a.excess_phi,
                a.sine_theta,
                a.bound_sin,
                a.bound_bartlett,
            ] {
                rec.push(num(m.mean));
                rec.push(num(m.se));
            }
            rec.push(s.result.verdict.name().to_string());
            w.write_record(&rec).map_err(csv_err)?;
        }
    }
    w.flush().map_err(csv_err)?;
    Ok(())
}
