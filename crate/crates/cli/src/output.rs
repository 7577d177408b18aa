//! CSV and JSON writers. Floats carry 17 significant digits and every file
//! embeds the resolved configuration, so identical configs give identical bytes.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

use qcmod::lab::{Value, Verdict};
use qcmod::numfmt::{format_f64, to_json_string};

use crate::config::{Format, RunConfig};
use crate::dispatch::Outcome;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize)]
struct Document<'a> {
    format_version: u32,
    experiment: &'a str,
    config: &'a RunConfig,
    columns: &'a [String],
    rows: &'a [Vec<Value>],
    verdicts: &'a [Verdict],
    notes: &'a [String],
    passed: bool,
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Int(i) => i.to_string(),
        Value::Real(x) => format_f64(*x),
        Value::Text(t) if t.contains([',', '"', '\n']) => format!("\"{}\"", t.replace('"', "\"\"")),
        Value::Text(t) => t.clone(),
    }
}

pub fn render_csv(outcome: &Outcome) -> io::Result<String> {
    let config = serde_json::to_string(&outcome.config)?;
    let mut out = format!(
        "# qcmod-format: {FORMAT_VERSION}\n# experiment: {}\n# config: {config}\n",
        outcome.config.experiment
    );
    out.push_str(&outcome.result.columns.join(","));
    out.push('\n');
    for row in &outcome.result.rows {
        let cells: Vec<String> = row.iter().map(csv_cell).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    Ok(out)
}

pub fn render_json(outcome: &Outcome) -> io::Result<String> {
    let r = &outcome.result;
    let doc = Document {
        format_version: FORMAT_VERSION,
        experiment: outcome.config.experiment.id(),
        config: &outcome.config,
        columns: &r.columns,
        rows: &r.rows,
        verdicts: &r.verdicts,
        notes: &r.notes,
        passed: r.passed(),
    };
    Ok(to_json_string(&doc)?)
}

/// Writes `<experiment>.csv` and/or `<experiment>.json` plus attachments; returns the paths.
pub fn write_outputs(outcome: &Outcome, dir: &Path, format: Format) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let stem = outcome.config.experiment.id();
    let mut written = Vec::new();
    let mut put = |name: String, text: String| -> io::Result<()> {
        let path = dir.join(name);
        fs::write(&path, text)?;
        written.push(path);
        Ok(())
    };
    if matches!(format, Format::Csv | Format::Both) {
        put(format!("{stem}.csv"), render_csv(outcome)?)?;
    }
    if matches!(format, Format::Json | Format::Both) {
        put(format!("{stem}.json"), render_json(outcome)?)?;
    }
    for (name, text) in &outcome.attachments {
        put(name.clone(), text.clone())?;
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;
    use crate::dispatch::dispatch;

    fn outcome() -> Outcome {
        let c = parse_config(
            r#"{"experiment": "k-upper", "gauge": {"family": "power", "s": 1.5}, "depth": 4}"#,
        )
        .unwrap();
        dispatch(&c).unwrap()
    }

    #[test]
    fn csv_layout() {
        let text = render_csv(&outcome()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# qcmod-format: 1");
        assert!(lines[2].starts_with("# config: {"));
        assert_eq!(lines[3], "L,cells,norm,supnorm_bound,lemma31_bound");
        assert_eq!(lines.len(), 4 + 3);
        assert!(lines[4].starts_with("1,4,"));
        assert!(!text.contains('\r'));
        let norm: f64 = lines[4].split(',').nth(2).unwrap().parse().unwrap();
        assert!(norm > 0.0);
    }

    #[test]
    fn json_layout() {
        let text = render_json(&outcome()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["format_version"], 1);
        assert_eq!(v["experiment"], "k-upper");
        assert_eq!(v["config"]["depth"], 4);
        assert_eq!(v["config"]["weights"]["start"], 1);
        let verdict = &v["verdicts"][0];
        for key in [
            "invariant",
            "tolerance",
            "measured",
            "slack",
            "pass",
            "fatal",
        ] {
            assert!(verdict.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn text_cells_quoted() {
        assert_eq!(csv_cell(&Value::Text("a,b".into())), "\"a,b\"");
        assert_eq!(csv_cell(&Value::Real(0.5)), "5.0000000000000000e-1");
        assert_eq!(csv_cell(&Value::Int(-3)), "-3");
    }
}
