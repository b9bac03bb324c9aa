use std::io::Write;

use serde_json::json;

use super::{ExperimentConfig, ExperimentOutput, TrialRecord};
use crate::error::Result;

pub const CSV_HEADER: &str = "experiment,m,trial,out_dim,out_values,dE,df,dmu,diag,wall_ms";

/// 17 significant digits, so values round-trip exactly.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn optional(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

/// Writes records in the fixed CSV layout. Rows are written in the order given;
/// [`super::run_experiment`] has already sorted them.
pub fn write_records<W: Write>(mut out: W, records: &[TrialRecord]) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        let values: Vec<String> = r.output.iter().map(|&v| format_float(v)).collect();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.experiment,
            r.m,
            r.trial,
            r.output.len(),
            values.join(";"),
            optional(r.d_e),
            optional(r.d_f),
            optional(r.d_mu),
            r.diag,
            r.wall_ms.map(|t| format!("{t:.3}")).unwrap_or_default(),
        )?;
    }
    Ok(())
}

/// Writes the JSON summary: per-m aggregates, the config echo, the oracle and the code version.
pub fn write_summary<W: Write>(
    mut out: W,
    output: &ExperimentOutput,
    config: &ExperimentConfig,
) -> Result<()> {
    let doc = json!({
        "experiment": output.id,
        "kind": config.kind,
        "code_version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "oracle": output.oracle,
        "aggregates": output.aggregates,
    });
    serde_json::to_writer_pretty(&mut out, &doc)?;
    writeln!(out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let r = TrialRecord {
            experiment: "e".into(),
            m: 10,
            trial: 2,
            output: vec![0.25, 0.5],
            d_e: Some(0.0),
            d_f: None,
            d_mu: Some(0.125),
            diag: "k=3".into(),
            wall_ms: None,
        };
        let mut buf = Vec::new();
        write_records(&mut buf, &[r]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(
            lines.next(),
            Some("e,10,2,2,2.5000000000000000e-1;5.0000000000000000e-1,0.0000000000000000e0,,1.2500000000000000e-1,k=3,")
        );
    }

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, 1e-300, 12345.678901234567] {
            assert_eq!(format_float(v).parse::<f64>().unwrap(), v);
        }
    }
}
