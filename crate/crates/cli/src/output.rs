use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use record_gof::estimate::{GridPoint, SurvivalStep};
use record_gof::dist::{Lifetime, WeibullParams};
use serde::Serialize;

/// Formats `x` with 10 significant digits.
pub fn sig10(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..10).contains(&exp) {
        format!("{:.*}", (9 - exp).max(0) as usize, x)
    } else {
        format!("{x:.9e}")
    }
}

/// Writes to `path`, or to standard output when `path` is `None`.
pub fn write_main(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

pub fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))
}

#[derive(Serialize)]
struct StepRow {
    i: usize,
    r: f64,
    k: u64,
    phi: f64,
    surv: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    model_surv: Option<f64>,
}

/// The survival step function, one row per ordered record, with the fitted
/// model's survival alongside when available.
pub fn write_steps(
    path: &Path,
    step: &SurvivalStep,
    counts: &[u64],
    model: Option<&WeibullParams>,
) -> Result<()> {
    let rows: Vec<StepRow> = (0..step.len())
        .map(|i| StepRow {
            i: i + 1,
            r: step.jumps[i],
            k: counts[i],
            phi: step.phi[i],
            surv: step.surv[i],
            model_surv: model.map(|p| p.survival(step.jumps[i])),
        })
        .collect();
    std::fs::write(path, csv_bytes(&rows)?).with_context(|| format!("writing {}", path.display()))
}

pub fn write_grid(path: &Path, grid: &[GridPoint]) -> Result<()> {
    std::fs::write(path, csv_bytes(grid)?).with_context(|| format!("writing {}", path.display()))
}
