//! Report serialization. Numbers are rounded to 12 significant digits so
//! reports are stable across platforms and readable.

use serde::Serialize;

/// Rounds to 12 significant digits.
pub fn sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

pub fn json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// CSV with a header row taken from the record's field names.
pub fn csv<T: Serialize>(rows: &[T]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).expect("report row serializes");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 output")
}
