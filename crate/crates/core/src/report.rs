//! Report documents and their JSON / CSV encodings.

use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::abel::QuadSpec;
use crate::audit::{AuditRecord, Verdict};
use crate::scanner::ScanReport;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub parameters: BTreeMap<String, String>,
    pub quad: QuadSpec,
    pub format: String,
}

/// Top-level document emitted by every command. Field order is part of the format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool_version: String,
    pub command: String,
    pub config: ReportConfig,
    pub records: Vec<AuditRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanReport>,
    /// Scalar results of the evaluation commands.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<BTreeMap<String, f64>>,
    pub wall_time_s: f64,
}

impl Report {
    pub fn has_failure(&self) -> bool {
        self.records.iter().any(|r| r.verdict == Verdict::Fail)
    }
}

/// Pretty-printed JSON whose floats always carry 17 significant digits.
struct SeventeenDigits(PrettyFormatter<'static>);

impl Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{}", format_f64(value))
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// `d.dddddddddddddddde±x`; reparses to the identical `f64`.
pub fn format_f64(value: f64) -> String {
    format!("{value:.16e}")
}

pub fn to_json<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SeventeenDigits(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

pub fn from_json(text: &str) -> serde_json::Result<Report> {
    serde_json::from_str(text)
}

/// `x,phi,err` followed by one row per sample in ascending `x`.
pub fn scan_csv(scan: &ScanReport) -> String {
    let mut out = String::from("x,phi,err\n");
    for s in &scan.samples {
        out.push_str(&format!("{},{},{}\n", format_f64(s.x), format_f64(s.phi), format_f64(s.err)));
    }
    out
}

pub fn records_csv(records: &[AuditRecord]) -> String {
    let mut out = String::from("claim_id,lhs,rhs,residual,tolerance,err_estimate,verdict\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.claim_id,
            format_f64(r.lhs),
            format_f64(r.rhs),
            format_f64(r.residual),
            format_f64(r.tolerance),
            format_f64(r.err_estimate),
            r.verdict
        ));
    }
    out
}

/// `key,value` rows for the evaluation commands.
pub fn values_csv(values: &BTreeMap<String, f64>) -> String {
    let mut out = String::from("key,value\n");
    for (k, v) in values {
        out.push_str(&format!("{k},{}\n", format_f64(*v)));
    }
    out
}

/// gnuplot script plotting a scan CSV written to `csv_name`.
pub fn plot_script(csv_name: &str, tau: f64) -> String {
    format!(
        "set datafile separator ','\n\
         set key top right\n\
         set xlabel 'x'\n\
         set ylabel 'phi_tau(x)'\n\
         set title 'phi_tau(x) at tau = {tau}'\n\
         set grid\n\
         plot '{csv_name}' using 1:2 every ::1 with lines title 'phi', \\\n     \
         '{csv_name}' using 1:($2-$3):($2+$3) every ::1 with filledcurves title 'err band', \\\n     \
         0 with lines notitle\n"
    )
}
