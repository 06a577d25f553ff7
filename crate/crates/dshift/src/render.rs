//! Text, CSV and JSON renderings of library results.
//!
//! Machine formats carry 12 significant digits and human text 4. A measure
//! that is undefined for a pair is written as the string `undefined`, never as
//! a number.

use dshift_core::experiments::{ForkData, RegressionSummary};
use dshift_core::feasible::Collision;
use dshift_core::measures::Measure;
use dshift_core::{CorrelationTable, ExperimentConfig, MeasureReport, ShiftValue, Source, UniquenessReport};
use serde_json::{json, Map, Value};

pub const MACHINE_DIGITS: usize = 12;
pub const TEXT_DIGITS: usize = 4;
pub const UNDEFINED: &str = "undefined";

/// `x` rounded to `digits` significant decimal digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.max(1) - 1, x).parse().expect("formatted float parses")
}

/// Shortest plain rendering of `x` to `digits` significant digits, switching
/// to exponent notation for very large or small magnitudes.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        return format!("{}e{}", trim_zeros(mantissa), exp);
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn machine(x: f64) -> String {
    fmt_sig(x, MACHINE_DIGITS)
}

pub fn text(x: f64) -> String {
    fmt_sig(x, TEXT_DIGITS)
}

/// A JSON number rounded to machine precision.
pub fn json_number(x: f64) -> Value {
    serde_json::Number::from_f64(round_sig(x, MACHINE_DIGITS)).map_or(Value::Null, Value::Number)
}

fn json_optional(x: Option<f64>) -> Value {
    x.map_or_else(|| Value::String(UNDEFINED.into()), json_number)
}

fn machine_optional(x: Option<f64>) -> String {
    x.map_or_else(|| UNDEFINED.into(), machine)
}

fn text_optional(x: Option<f64>) -> String {
    x.map_or_else(|| UNDEFINED.into(), text)
}

pub fn counts_csv(counts: &[u64]) -> String {
    counts.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

// DS

pub fn shift_value_text(v: &ShiftValue) -> String {
    format!("ds {}  z {}  n {}  k {}", text(v.ds), text(v.z_used), v.n, v.k)
}

pub fn shift_value_json(v: &ShiftValue) -> Value {
    json!({ "ds": json_number(v.ds), "z_used": json_number(v.z_used), "n": v.n, "k": v.k })
}

pub const SHIFT_VALUE_CSV_HEADER: &str = "ds,z_used,n,k";

pub fn shift_value_csv(v: &ShiftValue) -> String {
    format!("{},{},{},{}", machine(v.ds), machine(v.z_used), v.n, v.k)
}

// Measure reports

/// Field names in report order.
pub const REPORT_FIELDS: [&str; 8] = ["rds", "abs_rds", "chi_square", "ks", "kl_sqrt", "non_intersection", "emd", "rps_sqrt"];

fn report_values(r: &MeasureReport) -> [Option<f64>; 8] {
    [
        Some(r.rds),
        Some(r.abs_rds),
        r.chi_square,
        Some(r.ks),
        r.kl_sqrt,
        Some(r.non_intersection),
        Some(r.emd),
        Some(r.rps_sqrt),
    ]
}

fn undefined_names(r: &MeasureReport) -> Vec<&'static str> {
    r.undefined_flags.iter().map(|m| m.name()).collect()
}

pub fn measure_report_json(r: &MeasureReport) -> Value {
    let mut map = Map::new();
    for (name, value) in REPORT_FIELDS.iter().zip(report_values(r)) {
        map.insert((*name).into(), json_optional(value));
    }
    map.insert("undefined_flags".into(), json!(undefined_names(r)));
    Value::Object(map)
}

pub fn measure_report_csv(r: &MeasureReport) -> String {
    let mut header = REPORT_FIELDS.join(",");
    header.push_str(",undefined_flags");
    let row: Vec<String> = report_values(r).into_iter().map(machine_optional).collect();
    format!("{header}\n{},{}\n", row.join(","), undefined_names(r).join(";"))
}

pub fn measure_report_text(r: &MeasureReport) -> String {
    let mut out = String::new();
    for (name, value) in REPORT_FIELDS.iter().zip(report_values(r)) {
        out.push_str(&format!("{name:<17} {}\n", text_optional(value)));
    }
    if !r.undefined_flags.is_empty() {
        out.push_str(&format!("{:<17} {}\n", "undefined", undefined_names(r).join(", ")));
    }
    out
}

// Uniqueness audits

fn collision_json(c: &Collision) -> Value {
    json!({
        "first": c.first.totals(),
        "second": c.second.totals(),
        "first_value": json_number(c.first_value),
        "second_value": json_number(c.second_value),
    })
}

pub fn uniqueness_json(r: &UniquenessReport) -> Value {
    json!({
        "n": r.n,
        "k": r.k,
        "z": json_number(r.z),
        "total": r.total.to_string(),
        "unique_values": r.unique_values,
        "collision_count": r.collision_count,
        "collisions": r.collisions.iter().map(collision_json).collect::<Vec<_>>(),
        "suspect_count": r.suspect_count,
        "suspects": r.suspects.iter().map(collision_json).collect::<Vec<_>>(),
        "exact_ties": r.exact_ties,
    })
}

pub const UNIQUENESS_CSV_HEADER: &str = "n,k,z,total,unique,collisions,suspects";

pub fn uniqueness_csv(r: &UniquenessReport) -> String {
    format!(
        "{},{},{},{},{},{},{}",
        r.n,
        r.k,
        machine(r.z),
        r.total,
        r.unique_values,
        r.collision_count,
        r.suspect_count
    )
}

pub fn uniqueness_text(r: &UniquenessReport) -> String {
    let mut out = format!("{} unique / {}\n", r.unique_values, r.total);
    let rule = if r.exact_ties { "exact" } else { "f64" };
    out.push_str(&format!(
        "n {}  k {}  z {}  collisions {}  suspects {}  ties {}\n",
        r.n,
        r.k,
        text(r.z),
        r.collision_count,
        r.suspect_count,
        rule
    ));
    for c in &r.collisions {
        out.push_str(&format!("collision {} {} = {}\n", c.first, c.second, machine(c.second_value)));
    }
    for c in &r.suspects {
        out.push_str(&format!(
            "suspect   {} {}: {} vs {}\n",
            c.first,
            c.second,
            machine(c.first_value),
            machine(c.second_value)
        ));
    }
    out
}

// Experiments

fn matrix_csv(table: &CorrelationTable, cell: impl Fn(&RegressionSummary) -> f64) -> String {
    let names: Vec<&str> = table.measure_names.iter().map(|m| m.name()).collect();
    let mut out = format!("measure,{}\n", names.join(","));
    for (i, name) in names.iter().enumerate() {
        let row: Vec<String> = table.fits[i].iter().map(|f| machine(cell(f))).collect();
        out.push_str(&format!("{name},{}\n", row.join(",")));
    }
    out
}

/// r² matrix with measure names as the header row and first column.
pub fn r_squared_csv(table: &CorrelationTable) -> String {
    matrix_csv(table, |f| f.r_squared)
}

/// Signed Pearson r matrix, laid out like [`r_squared_csv`].
pub fn correlation_csv(table: &CorrelationTable) -> String {
    matrix_csv(table, |f| f.r)
}

fn regression_json(x: Measure, y: Measure, f: &RegressionSummary) -> Value {
    json!({
        "x": x.name(),
        "y": y.name(),
        "slope": json_number(f.slope),
        "intercept": json_number(f.intercept),
        "r_squared": json_number(f.r_squared),
        "r": json_number(f.r),
        "sample_count": f.sample_count,
        "dropped_count": f.dropped_count,
        "degenerate": f.degenerate,
    })
}

pub fn config_json(config: &ExperimentConfig) -> Value {
    let (source, lambda) = match config.source {
        Source::FeasibleSet => ("feasible", Value::Null),
        Source::Poisson { lambda } => ("poisson", json_number(lambda)),
        Source::PoissonBinned { lambda } => ("poisson-binned", json_number(lambda)),
    };
    json!({
        "source": source,
        "lambda": lambda,
        "n": config.n,
        "k": config.k,
        "num_pairs": config.num_pairs,
        "seed": config.seed,
        "undefined_policy": format!("{:?}", config.undefined_policy).to_lowercase(),
    })
}

pub fn correlation_json(config: &ExperimentConfig, table: &CorrelationTable) -> Value {
    let names = &table.measure_names;
    let r2: Vec<Vec<Value>> =
        table.fits.iter().map(|row| row.iter().map(|f| json_number(f.r_squared)).collect()).collect();
    let regressions: Vec<Value> = names
        .iter()
        .enumerate()
        .flat_map(|(i, &x)| names.iter().enumerate().map(move |(j, &y)| (i, x, j, y)))
        .map(|(i, x, j, y)| regression_json(x, y, &table.fits[i][j]))
        .collect();
    json!({
        "config": config_json(config),
        "measure_names": names.iter().map(|m| m.name()).collect::<Vec<_>>(),
        "num_pairs": table.num_pairs,
        "r_squared": r2,
        "regressions": regressions,
        "signed_rds_series": table.signed_rds_series.iter().map(|&x| json_number(x)).collect::<Vec<_>>(),
    })
}

pub fn fork_csv(fork: &ForkData) -> String {
    let mut out = fork.header();
    out.push('\n');
    for &(value, rds) in &fork.rows {
        out.push_str(&format!("{},{}\n", machine_optional(value), machine(rds)));
    }
    out
}

/// Pretty JSON followed by a newline.
pub fn json_document(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values serialize");
    s.push('\n');
    s
}
