//! Scan records and their CSV / JSON encodings.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::liouvillian::ModelParams;

use super::config::EngineKind;

/// One row of a scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub index: usize,
    pub engine: EngineKind,
    pub observable: Option<String>,
    pub params: ModelParams,
    pub n: Option<usize>,
    pub t: Option<f64>,
    /// Steady ⟨a†a⟩, or N of the decaying superposition.
    pub n_eff: f64,
    pub qfi: Option<f64>,
    pub delta_chi: f64,
    pub ref_super_heisenberg: Option<f64>,
    pub ref_standard: Option<f64>,
    pub oracle_deviation: Option<f64>,
    /// `t_op` or `quarter` on decay profiles.
    pub marker: Option<String>,
    /// `ok`, `oracle_mismatch` or `failed: <reason>`.
    pub status: String,
}

impl ScanRecord {
    pub fn new(index: usize, engine: EngineKind, params: ModelParams) -> Self {
        Self {
            index,
            engine,
            observable: None,
            params,
            n: None,
            t: None,
            n_eff: f64::NAN,
            qfi: None,
            delta_chi: f64::NAN,
            ref_super_heisenberg: None,
            ref_standard: None,
            oracle_deviation: None,
            marker: None,
            status: "ok".into(),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    pub fn inv_delta_chi(&self) -> f64 {
        1.0 / self.delta_chi
    }
}

pub const CSV_COLUMNS: &[&str] = &[
    "index",
    "engine",
    "observable",
    "chi",
    "kappa",
    "omega",
    "lambda",
    "gamma",
    "delta",
    "n",
    "t",
    "n_eff",
    "qfi",
    "delta_chi",
    "inv_delta_chi",
    "ref_super_heisenberg",
    "ref_standard",
    "oracle_deviation",
    "marker",
    "status",
];

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn write_csv<W: Write>(mut w: W, records: &[ScanRecord]) -> Result<()> {
    writeln!(w, "{}", CSV_COLUMNS.join(","))?;
    for r in records {
        let p = &r.params;
        let fields = [
            r.index.to_string(),
            r.engine.to_string(),
            r.observable.clone().unwrap_or_default(),
            fmt_f64(p.chi),
            fmt_f64(p.kappa),
            fmt_f64(p.omega_drive),
            fmt_f64(p.lambda_drive),
            fmt_f64(p.gamma),
            fmt_f64(p.delta),
            r.n.map(|n| n.to_string()).unwrap_or_default(),
            fmt_opt(r.t),
            fmt_f64(r.n_eff),
            fmt_opt(r.qfi),
            fmt_f64(r.delta_chi),
            fmt_f64(r.inv_delta_chi()),
            fmt_opt(r.ref_super_heisenberg),
            fmt_opt(r.ref_standard),
            fmt_opt(r.oracle_deviation),
            r.marker.clone().unwrap_or_default(),
            r.status.clone(),
        ];
        let line: Vec<String> = fields.iter().map(|f| quote(f)).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

/// JSON document `{"command": ..., "records": [...], "summary": ...}`.
pub fn write_json<W: Write, S: Serialize>(w: W, command: &str, records: &[ScanRecord], summary: Option<&S>) -> Result<()> {
    #[derive(Serialize)]
    struct Doc<'a, S: Serialize> {
        command: &'a str,
        records: Vec<JsonRecord<'a>>,
        #[serde(skip_serializing_if = "Option::is_none")]
        summary: Option<&'a S>,
    }
    #[derive(Serialize)]
    struct JsonRecord<'a> {
        #[serde(flatten)]
        record: &'a ScanRecord,
        inv_delta_chi: Option<f64>,
    }
    let finite = |x: f64| if x.is_finite() { Some(x) } else { None };
    let doc = Doc {
        command,
        records: records
            .iter()
            .map(|r| JsonRecord {
                record: r,
                inv_delta_chi: finite(r.inv_delta_chi()),
            })
            .collect(),
        summary,
    };
    serde_json::to_writer_pretty(w, &doc).map_err(|e| crate::error::Error::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_is_fixed_format() {
        let mut r = ScanRecord::new(0, EngineKind::HomodyneP, ModelParams::default().with_chi(0.1));
        r.delta_chi = 1.0 / 3.0;
        r.status = "failed: a, b".into();
        let mut buf = Vec::new();
        write_csv(&mut buf, &[r]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap().split(',').count(), CSV_COLUMNS.len());
        let row = lines.next().unwrap();
        assert!(row.contains("1.0000000000000001e-1"));
        assert!(row.contains("3.3333333333333331e-1"));
        assert!(row.ends_with("\"failed: a, b\""));
    }

    #[test]
    fn json_roundtrip_has_records() {
        let r = ScanRecord::new(3, EngineKind::Decay, ModelParams::default());
        let mut buf = Vec::new();
        write_json::<_, ()>(&mut buf, "decay-profile", &[r], None).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["records"][0]["index"], 3);
        assert_eq!(v["records"][0]["engine"], "decay");
    }
}
