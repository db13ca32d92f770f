//! `results.csv`, `summary.json` and `plotdata.tsv`.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ExperimentOutput;
use crate::error::Result;

/// One row of `results.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub scenario: String,
    pub t: f64,
    pub replica: usize,
    pub method: String,
    pub p: f64,
    pub value: f64,
}

fn predicted_line(out: &ExperimentOutput, t: f64) -> f64 {
    let first = &out.fit.points[0];
    let shape = |t: f64| {
        let base = t.powf(out.fit.predicted);
        if out.fit.log_regime {
            base * t.ln().sqrt()
        } else {
            base
        }
    };
    first.mean * shape(t) / shape(first.t)
}

/// Write the three output files into `dir`, creating it if needed.
pub fn write_outputs(out: &ExperimentOutput, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;

    let mut csv = csv::Writer::from_path(dir.join("results.csv"))?;
    for r in &out.records {
        csv.serialize(r)?;
    }
    if out.records.is_empty() {
        csv.write_record(["scenario", "t", "replica", "method", "p", "value"])?;
    }
    csv.flush()?;

    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(out)? + "\n")?;

    let mut tsv = fs::File::create(dir.join("plotdata.tsv"))?;
    writeln!(tsv, "t\tmean\tstderr\tpredicted")?;
    for p in &out.fit.points {
        writeln!(
            tsv,
            "{}\t{}\t{}\t{}",
            p.t,
            p.mean,
            p.std_error,
            predicted_line(out, p.t)
        )?;
    }
    Ok(())
}
