//! CSV and JSON writers for exclusion curves and campaign records.
//!
//! Curve CSV:
//!
//! ```text
//! # experiment: luli
//! # kind: axion
//! # ...
//! mass_ev,bound,constrained
//! 1e-5,890857302541413.5,1
//! 2.8381e-3,,0
//! ```
//!
//! Campaign CSV columns are `pulse,field_on,lambda_expected,signal_counts,dark_counts`.
//! Metadata always comes first as `# key: value` lines; lines end in a single `\n`.
//! Floats use the shortest representation that round-trips.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::json;

use crate::campaign::CampaignRecord;
use crate::limits::{BandSummary, ExclusionCurve};

pub const CURVE_HEADER: &str = "mass_ev,bound,constrained";
pub const RECORD_HEADER: &str = "pulse,field_on,lambda_expected,signal_counts,dark_counts";

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Shortest round-trip decimal; scientific notation outside `[1e-4, 1e15)`.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Ordered `key: value` metadata.
pub type Metadata = Vec<(String, String)>;

fn push_meta(out: &mut String, meta: &Metadata) {
    for (k, v) in meta {
        // Values never span lines.
        let v = v.replace('\n', " ");
        let _ = writeln!(out, "# {k}: {v}");
    }
}

pub fn curve_metadata(curve: &ExclusionCurve, extra: &Metadata) -> Metadata {
    let m = &curve.metadata;
    let mut meta = vec![
        ("experiment".to_string(), m.experiment.clone()),
        ("kind".to_string(), m.kind.to_string()),
        ("bound_quantity".to_string(), m.kind.coupling_name().to_string()),
        (m.input_name.clone(), fmt_f64(m.input_value)),
    ];
    meta.extend(extra.iter().cloned());
    meta.extend(m.notes.iter().map(|n| ("convention".to_string(), n.clone())));
    meta.push(("tool_version".to_string(), TOOL_VERSION.to_string()));
    meta
}

pub fn curve_to_csv(curve: &ExclusionCurve, extra: &Metadata) -> String {
    let mut out = String::new();
    push_meta(&mut out, &curve_metadata(curve, extra));
    out.push_str(CURVE_HEADER);
    out.push('\n');
    for p in &curve.points {
        match p.bound {
            Some(b) => {
                let _ = writeln!(out, "{},{},1", fmt_f64(p.mass), fmt_f64(b));
            }
            None => {
                let _ = writeln!(out, "{},,0", fmt_f64(p.mass));
            }
        }
    }
    out
}

fn meta_json(meta: &Metadata) -> serde_json::Value {
    // Keys can repeat (several conventions), so keep a list of pairs.
    serde_json::Value::Array(meta.iter().map(|(k, v)| json!({ "key": k, "value": v })).collect())
}

pub fn curve_to_json(curve: &ExclusionCurve, extra: &Metadata) -> String {
    let points: Vec<_> = curve
        .points
        .iter()
        .map(|p| json!({ "mass_ev": p.mass, "bound": p.bound, "constrained": u8::from(p.constrained()) }))
        .collect();
    let doc = json!({
        "metadata": meta_json(&curve_metadata(curve, extra)),
        "points": points,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("curve serializes");
    s.push('\n');
    s
}

pub fn record_metadata(record: &CampaignRecord, extra: &Metadata) -> Metadata {
    let t = &record.totals;
    let mut meta = vec![("seed".to_string(), record.seed.to_string())];
    meta.extend(extra.iter().cloned());
    meta.extend([
        ("pulses".to_string(), t.pulses.to_string()),
        ("pulses_with_field".to_string(), t.pulses_with_field.to_string()),
        ("lambda_expected_total".to_string(), fmt_f64(t.lambda_expected)),
        ("expected_signal_counts".to_string(), fmt_f64(t.expected_signal)),
        ("expected_dark_counts".to_string(), fmt_f64(t.expected_dark)),
        ("signal_counts_total".to_string(), t.signal_counts.to_string()),
        ("dark_counts_total".to_string(), t.dark_counts.to_string()),
        ("tool_version".to_string(), TOOL_VERSION.to_string()),
    ]);
    meta
}

pub fn record_to_csv(record: &CampaignRecord, extra: &Metadata) -> String {
    let mut out = String::new();
    push_meta(&mut out, &record_metadata(record, extra));
    out.push_str(RECORD_HEADER);
    out.push('\n');
    for e in &record.entries {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            e.pulse,
            u8::from(e.field_on),
            fmt_f64(e.lambda_expected),
            e.signal_counts,
            e.dark_counts
        );
    }
    out
}

pub fn record_to_json(record: &CampaignRecord, extra: &Metadata) -> String {
    let entries: Vec<_> = record
        .entries
        .iter()
        .map(|e| {
            json!({
                "pulse": e.pulse,
                "field_on": u8::from(e.field_on),
                "lambda_expected": e.lambda_expected,
                "signal_counts": e.signal_counts,
                "dark_counts": e.dark_counts,
            })
        })
        .collect();
    let doc = json!({
        "metadata": meta_json(&record_metadata(record, extra)),
        "entries": entries,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("record serializes");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct BandJson<'a> {
    experiment: &'a str,
    kind: &'a str,
    band_min_ev: f64,
    band_max_ev: f64,
    convention: String,
    bound: f64,
    constrained_points: usize,
}

pub fn band_to_text(experiment: &str, band: &BandSummary, format: Format) -> String {
    match format {
        Format::Csv => format!(
            "experiment = {experiment}\nkind = {}\nband_ev = [{}, {}]\nconvention = {}\nbound = {}\nconstrained_points = {}\n",
            band.kind,
            fmt_f64(band.band_min),
            fmt_f64(band.band_max),
            band.convention,
            fmt_f64(band.bound),
            band.constrained_points
        ),
        Format::Json => {
            let doc = BandJson {
                experiment,
                kind: band.kind.as_str(),
                band_min_ev: band.band_min,
                band_max_ev: band.band_max,
                convention: band.convention.to_string(),
                bound: band.bound,
                constrained_points: band.constrained_points,
            };
            let mut s = serde_json::to_string_pretty(&doc).expect("band serializes");
            s.push('\n');
            s
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limits::{CurveKind, CurveMetadata, CurvePoint};
    use proptest::prelude::*;

    fn curve() -> ExclusionCurve {
        ExclusionCurve {
            metadata: CurveMetadata {
                experiment: "demo".into(),
                kind: CurveKind::Paraphoton,
                input_name: "probability".into(),
                input_value: 9.4e-24,
                notes: vec!["note one".into()],
            },
            points: vec![
                CurvePoint { mass: 1e-3, bound: Some(1.2e-6) },
                CurvePoint { mass: 2e-3, bound: None },
            ],
        }
    }

    #[test]
    fn curve_csv_layout() {
        let csv = curve_to_csv(&curve(), &vec![("tally".into(), "total".into())]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# experiment: demo");
        assert_eq!(lines[1], "# kind: paraphoton");
        assert!(lines.contains(&"# probability: 9.4e-24"));
        assert!(lines.contains(&"# tally: total"));
        assert!(lines.contains(&"# convention: note one"));
        let header = lines.iter().position(|l| *l == CURVE_HEADER).unwrap();
        assert!(lines[..header].iter().all(|l| l.starts_with("# ")));
        assert_eq!(lines[header + 1], "0.001,1.2e-6,1");
        assert_eq!(lines[header + 2], "0.002,,0");
        assert!(!csv.contains('\r'));
        assert!(csv.ends_with("0.002,,0\n"));
    }

    #[test]
    fn curve_json_mirrors_csv() {
        let v: serde_json::Value = serde_json::from_str(&curve_to_json(&curve(), &vec![])).unwrap();
        let pts = v["points"].as_array().unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[0]["bound"], 1.2e-6);
        assert_eq!(pts[1]["bound"], serde_json::Value::Null);
        assert_eq!(pts[1]["constrained"], 0);
    }

    #[test]
    fn float_formatting() {
        assert_eq!(fmt_f64(7.5), "7.5");
        assert_eq!(fmt_f64(3.3e-23), "3.3e-23");
        assert_eq!(fmt_f64(8.9e14), "890000000000000");
        assert_eq!(fmt_f64(8.9e15), "8.9e15");
        assert_eq!(fmt_f64(0.0), "0");
    }

    proptest! {
        #[test]
        fn floats_round_trip(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            prop_assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }
}
