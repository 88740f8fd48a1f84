//! Deterministic numeric formatting and atomic file output.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

/// Render a float at 12 significant digits, positional where readable,
/// scientific otherwise. The underlying conversion is correctly rounded
/// (ties to even), so identical inputs always produce identical bytes.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let formatted = format!("{:.11e}", x);
    let (mantissa, exp_str) = formatted
        .split_once('e')
        .expect("float e-format always carries an exponent");
    let exp: i32 = exp_str.parse().expect("exponent is an integer");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    debug_assert_eq!(digits.len(), 12);

    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if (0..15).contains(&exp) {
        let point = exp as usize + 1;
        if point >= digits.len() {
            out.push_str(&digits);
            out.push_str(&"0".repeat(point - digits.len()));
        } else {
            out.push_str(&digits[..point]);
            let frac = digits[point..].trim_end_matches('0');
            if !frac.is_empty() {
                out.push('.');
                out.push_str(frac);
            }
        }
    } else if (-5..0).contains(&exp) {
        out.push_str("0.");
        out.push_str(&"0".repeat((-exp - 1) as usize));
        out.push_str(digits.trim_end_matches('0'));
    } else {
        let trimmed = digits[1..].trim_end_matches('0');
        out.push_str(&digits[..1]);
        if !trimmed.is_empty() {
            out.push('.');
            out.push_str(trimmed);
        }
        out.push('e');
        out.push_str(&exp.to_string());
    }
    out
}

/// A float re-rounded to 12 significant digits for JSON reports.
pub fn json_num(x: f64) -> serde_json::Value {
    if !x.is_finite() {
        return serde_json::Value::Null;
    }
    let rounded: f64 = fmt_sig(x).parse().unwrap_or(x);
    serde_json::Number::from_f64(rounded)
        .map(serde_json::Value::Number)
        .unwrap_or(serde_json::Value::Null)
}

/// Write a file atomically: temp sibling first, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)
}
