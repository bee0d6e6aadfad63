//! Number rendering for the JSON and text outputs.

use serde::Serializer;
use serde_json::value::RawValue;

/// Formats `x` with 17 significant digits (C's `%.17g`), which round-trips
/// every finite `f64`. Non-finite values render as `null`.
pub fn g17(x: f64) -> String {
    if !x.is_finite() {
        return "null".to_owned();
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp) as usize;
        strip_zeros(format!("{:.*}", decimals, x))
    } else {
        let mantissa = strip_zeros(mantissa.to_owned());
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    }
}

fn strip_zeros(mut s: String) -> String {
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

/// `serialize_with` adapter emitting [`g17`] text as a raw JSON number.
pub fn serialize_g17<S: Serializer>(x: &f64, serializer: S) -> Result<S::Ok, S::Error> {
    let raw = RawValue::from_string(g17(*x)).map_err(serde::ser::Error::custom)?;
    serde::Serialize::serialize(&raw, serializer)
}

/// Rounds `x` to `places` decimals, ties to even, on the exact binary value.
pub fn round_half_even(x: f64, places: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    // 60 extra digits expose any deviation of a finite double from a decimal tie.
    let exact = format!("{:.*}", places + 60, x.abs());
    let (int_part, frac) = exact.split_once('.').expect("fixed notation");
    let mut digits: Vec<u8> = int_part
        .bytes()
        .chain(frac[..places].bytes())
        .map(|b| b - b'0')
        .collect();
    let rest = &frac[places..];
    let first = rest.as_bytes()[0] - b'0';
    let beyond_nonzero = rest[1..].bytes().any(|b| b != b'0');
    let last_odd = digits.last().is_some_and(|d| d % 2 == 1);
    let round_up = first > 5 || (first == 5 && (beyond_nonzero || last_odd));
    if round_up {
        let mut i = digits.len();
        loop {
            if i == 0 {
                digits.insert(0, 1);
                break;
            }
            i -= 1;
            if digits[i] == 9 {
                digits[i] = 0;
            } else {
                digits[i] += 1;
                break;
            }
        }
    }
    let int_len = digits.len() - places;
    let mut out = String::new();
    let is_zero = digits.iter().all(|&d| d == 0);
    if x.is_sign_negative() && !is_zero {
        out.push('-');
    }
    for d in &digits[..int_len] {
        out.push((b'0' + d) as char);
    }
    if places > 0 {
        out.push('.');
        for d in &digits[int_len..] {
            out.push((b'0' + d) as char);
        }
    }
    out
}
