//! CSV and JSON serialization with a metadata header.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use magnon_core::analytic::OptimalDelta;
use magnon_core::experiments::{Channel, GridMinimum, OptimalCurve, SweepGrid, ThermalSweep};

use crate::config::RunConfig;

pub const TOOL: &str = "magnon-sim";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Seconds since the Unix epoch, or `SOURCE_DATE_EPOCH` when set.
pub fn timestamp() -> u64 {
    if let Some(t) = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.parse().ok())
    {
        return t;
    }
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

/// Round-trip exact formatting of an optional double.
pub fn num(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| format!("{x:.16e}"))
}

pub fn sha256_hex(data: &str) -> String {
    let digest = Sha256::digest(data.as_bytes());
    digest.iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// A result document: header fields plus a payload.
pub struct Bundle {
    pub csv: Option<Table>,
    pub json: Value,
}

/// CSV body without the header comment lines.
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub notes: Vec<String>,
}

impl Table {
    fn body(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }

    pub fn hash(&self) -> String {
        sha256_hex(&self.body())
    }
}

fn config_echo(cfg: &RunConfig) -> String {
    serde_json::to_string(cfg).expect("config serializes")
}

/// CSV with `#` header lines. The timestamp is the only line that varies
/// between identical runs.
pub fn render_csv(cfg: &RunConfig, table: &Table, generated: u64) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# {TOOL} {VERSION} {}", cfg.subcommand.name());
    let _ = writeln!(s, "# generated_unix: {generated}");
    let _ = writeln!(s, "# config: {}", config_echo(cfg));
    let _ = writeln!(s, "# grid_sha256: {}", table.hash());
    for n in &table.notes {
        let _ = writeln!(s, "# {n}");
    }
    s.push_str(&table.body());
    s
}

pub fn render_json(cfg: &RunConfig, bundle: &Bundle, generated: u64) -> String {
    let hash = bundle
        .csv
        .as_ref()
        .map_or_else(|| sha256_hex(&bundle.json.to_string()), Table::hash);
    let doc = json!({
        "meta": {
            "tool": TOOL,
            "version": VERSION,
            "generated_unix": generated,
            "grid_sha256": hash,
            "config": cfg,
        },
        "result": bundle.json,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("document serializes");
    s.push('\n');
    s
}

fn minimum_note(m: &GridMinimum) -> String {
    let channel = match m.channel {
        Channel::Numeric => "numeric",
        Channel::Analytic => "analytic",
        Channel::Both => "both",
    };
    format!(
        "minimum_{channel}: axis1={},axis2={},g2={},cell={}:{}",
        num(Some(m.refined.0)),
        num(m.refined.1),
        num(Some(m.value)),
        m.index.0,
        m.index.1
    )
}

pub fn sweep_table(grid: &SweepGrid) -> Table {
    let (n1, n2) = grid.shape();
    let mut rows = Vec::with_capacity(n1 * n2);
    for i in 0..n1 {
        for j in 0..n2 {
            let c = grid.cell(i, j);
            let y = grid.axis2.as_ref().map(|a| a.values[j]);
            rows.push(vec![
                num(Some(grid.axis1.values[i])),
                num(y),
                num(c.numeric),
                num(c.analytic),
                c.flag.as_str().to_string(),
            ]);
        }
    }
    let mut notes = vec![format!(
        "axes: axis1={},axis2={}",
        grid.axis1.axis.name(),
        grid.axis2.as_ref().map_or("none", |a| a.axis.name())
    )];
    notes.extend(grid.minima.iter().map(minimum_note));
    Table {
        columns: vec!["axis1", "axis2", "g2_numeric", "g2_analytic", "flag"],
        rows,
        notes,
    }
}

pub fn curve_table(curve: &OptimalCurve) -> Table {
    let mut rows = Vec::new();
    for (d, row) in curve.detunings.iter().zip(&curve.rows) {
        for (r, o) in curve.ratios.iter().zip(row) {
            rows.push(vec![
                num(Some(*d)),
                num(Some(*r)),
                num(Some(o.delta1)),
                num(Some(o.residual)),
                o.at_boundary.to_string(),
            ]);
        }
    }
    Table {
        columns: vec!["delta_q", "g_ratio", "delta1_opt", "residual", "at_boundary"],
        rows,
        notes: Vec::new(),
    }
}

pub fn thermal_table(sweep: &ThermalSweep) -> Table {
    let mut rows = Vec::new();
    for c in &sweep.curves {
        for (k, t) in sweep.temperatures.iter().enumerate() {
            rows.push(vec![
                c.label.clone(),
                num(Some(*t)),
                num(Some(c.n_th1[k])),
                num(Some(c.n_th2[k])),
                num(Some(c.g2[k])),
            ]);
        }
    }
    let notes = sweep
        .curves
        .iter()
        .map(|c| format!("crossing_{}: {}", c.label, num(c.crossing)))
        .collect();
    Table {
        columns: vec!["label", "temperature_k", "n_th1", "n_th2", "g2_numeric"],
        rows,
        notes,
    }
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("result serializes")
}

pub fn optimal_delta_value(o: &OptimalDelta, search: (f64, f64)) -> Value {
    json!({ "optimum": o, "search": [search.0, search.1] })
}
