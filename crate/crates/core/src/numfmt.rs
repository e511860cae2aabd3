//! Round-trip-exact decimal rendering of `f64` values.
//!
//! Every file the crate writes (CSV tables, JSON traces, SVG coordinates)
//! renders doubles with 17 significant digits so that parsing the text
//! recovers the exact bit pattern.

use std::io;

use serde::Serialize;

/// Renders `x` with 17 significant digits in scientific notation.
///
/// Non-finite values render as `inf`, `-inf` or `NaN`; callers writing JSON
/// go through [`Sig17Formatter`] which maps them to `null`.
pub fn sig17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// `serde_json` formatter that writes every float with 17 significant digits.
#[derive(Debug, Default, Clone, Copy)]
pub struct Sig17Formatter;

impl serde_json::ser::Formatter for Sig17Formatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            writer.write_all(sig17(value).as_bytes())
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Serializes `value` as compact JSON with 17-significant-digit floats.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17Formatter);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

/// Serializes `value` as JSON into `writer`.
pub fn to_json_writer<W: io::Write, T: Serialize + ?Sized>(writer: W, value: &T) -> serde_json::Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(writer, Sig17Formatter);
    value.serialize(&mut ser)
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
