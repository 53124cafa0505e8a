//! Report rows and their CSV / JSON renderings.
//!
//! Numeric cells are exact rationals rendered as terminating decimals, or
//! `p/q` otherwise. A value that does not apply to a row is an empty cell,
//! never zero.

use num::BigRational;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational};

pub type Cell = Option<BigRational>;

fn ser_cell<S: Serializer>(v: &Cell, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(r) => s.serialize_str(&format_rational(r)),
        None => s.serialize_str(""),
    }
}

fn de_cell<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Cell, D::Error> {
    let raw = String::deserialize(d)?;
    if raw.is_empty() {
        return Ok(None);
    }
    parse_rational(&raw)
        .map(Some)
        .ok_or_else(|| serde::de::Error::custom(format!("not a rational: {raw}")))
}

macro_rules! report_row {
    ($($field:ident => $col:literal),* $(,)?) => {
        /// One line of an experiment report. `l` is the block size actually
        /// used by the simulated kernels.
        #[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
        pub struct ReportRow {
            pub app: String,
            pub variant: String,
            $(
                #[serde(rename = $col, serialize_with = "ser_cell", deserialize_with = "de_cell")]
                pub $field: Cell,
            )*
        }

        /// Column names, in output order.
        pub const COLUMNS: &[&str] = &["app", "variant", $($col),*];
    };
}

report_row! {
    n => "n",
    m => "m",
    l => "l",
    s => "s",
    u => "U",
    z => "Z",
    w_meas => "W_meas",
    w_pred => "W_pred",
    s_meas => "S_meas",
    s_pred => "S_pred",
    o_meas => "O_meas",
    o_pred => "O_pred",
    n_meas => "N_meas",
    n_pred => "N_pred",
    l_meas => "L_meas",
    l_pred => "L_pred",
    c_meas => "C_meas",
    c_pred => "C_pred",
    k => "K",
    t_bound => "T_bound",
    ratio => "ratio",
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

pub fn emit(rows: &[ReportRow], format: Format) -> Result<Vec<u8>> {
    emit_records(rows, COLUMNS, format)
}

/// Renders any serializable records, with an explicit header so that an
/// empty report still carries the schema.
pub fn emit_records<T: Serialize>(rows: &[T], columns: &[&str], format: Format) -> Result<Vec<u8>> {
    let io = |e: String| Error::InvalidInput(format!("cannot render report: {e}"));
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .has_headers(false)
                .from_writer(Vec::new());
            w.write_record(columns).map_err(|e| io(e.to_string()))?;
            for row in rows {
                w.serialize(row).map_err(|e| io(e.to_string()))?;
            }
            w.into_inner().map_err(|e| io(e.to_string()))
        }
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(rows).map_err(|e| io(e.to_string()))?;
            out.push(b'\n');
            Ok(out)
        }
    }
}

pub fn parse_csv(bytes: &[u8]) -> Result<Vec<ReportRow>> {
    let mut r = csv::Reader::from_reader(bytes);
    r.deserialize()
        .collect::<std::result::Result<Vec<ReportRow>, _>>()
        .map_err(|e| Error::InvalidInput(format!("bad report: {e}")))
}

pub fn parse_json(bytes: &[u8]) -> Result<Vec<ReportRow>> {
    serde_json::from_slice(bytes).map_err(|e| Error::InvalidInput(format!("bad report: {e}")))
}
