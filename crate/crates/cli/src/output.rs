//! Tables with a `#` metadata header, written as CSV or JSON.

use std::fmt::Write as _;

use rug::float::Round;
use rug::{Complex, Float};
use serde_json::{json, Map, Value};

/// Decimal exponents in this range are printed positionally.
const POSITIONAL: std::ops::RangeInclusive<i32> = -4..=21;

/// Rounds to `digits` significant digits, ties to even.
pub fn fmt_float(x: &Float, digits: usize) -> String {
    if x.is_zero() {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let (neg, mant, exp) = x.to_sign_string_exp_round(10, Some(digits.max(1)), Round::Nearest);
    // value = 0.mant × 10^exp
    let exp = exp.unwrap_or(0);
    let sign = if neg { "-" } else { "" };
    let point = exp - 1;
    let body = if POSITIONAL.contains(&point) {
        if exp <= 0 {
            format!("0.{}{}", "0".repeat((-exp) as usize), mant)
        } else if exp as usize >= mant.len() {
            format!("{}{}", mant, "0".repeat(exp as usize - mant.len()))
        } else {
            let (a, b) = mant.split_at(exp as usize);
            format!("{a}.{b}")
        }
    } else {
        let (a, b) = mant.split_at(1);
        if b.is_empty() {
            format!("{a}e{point}")
        } else {
            format!("{a}.{b}e{point}")
        }
    };
    format!("{sign}{body}")
}

/// Real and imaginary parts, with parts below `floor`·|z| printed as 0.
pub fn fmt_complex_parts(z: &Complex, digits: usize, floor: f64) -> (String, String) {
    let p = z.prec().0;
    let mag = Float::with_val(p, z.abs_ref());
    let cut = mag * floor;
    let part = |x: &Float| {
        if Float::with_val(p, x.abs_ref()) < cut {
            "0".to_string()
        } else {
            fmt_float(x, digits)
        }
    };
    (part(z.real()), part(z.imag()))
}

/// Short residual notation, e.g. `3.1e-45`.
pub fn fmt_residual(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else {
        format!("{x:.1e}")
    }
}

/// Header entries plus a rectangular table of printed cells.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Document {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Document {
    pub fn new(columns: &[&str]) -> Self {
        Document { meta: Vec::new(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn meta(&mut self, key: &str, value: impl Into<String>) {
        self.meta.push((key.into(), value.into()));
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row.into_iter().map(|c| c.replace([',', '\n'], ";")).collect());
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(s, "# {k}: {v}");
        }
        let _ = writeln!(s, "{}", self.columns.join(","));
        for r in &self.rows {
            let _ = writeln!(s, "{}", r.join(","));
        }
        s
    }

    pub fn parse_csv(text: &str) -> Result<Self, String> {
        let mut doc = Document::default();
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = loop {
            let line = lines.next().ok_or("missing column header")?;
            match line.strip_prefix('#') {
                Some(m) => {
                    let (k, v) = m.trim_start().split_once(": ").ok_or_else(|| format!("bad header line '{line}'"))?;
                    doc.meta.push((k.to_string(), v.to_string()));
                }
                None => break line,
            }
        };
        doc.columns = header.split(',').map(str::to_string).collect();
        for (i, line) in lines.enumerate() {
            let row: Vec<String> = line.split(',').map(str::to_string).collect();
            if row.len() != doc.columns.len() {
                return Err(format!("row {} has {} fields, expected {}", i + 1, row.len(), doc.columns.len()));
            }
            doc.rows.push(row);
        }
        Ok(doc)
    }

    /// Cells stay strings so that no digits are lost to f64.
    pub fn to_json(&self) -> Value {
        let meta: Map<String, Value> = self.meta.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
        let records: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let m: Map<String, Value> =
                    self.columns.iter().zip(r).map(|(c, v)| (c.clone(), Value::String(v.clone()))).collect();
                Value::Object(m)
            })
            .collect();
        json!({ "meta": meta, "columns": self.columns, "records": records })
    }
}
