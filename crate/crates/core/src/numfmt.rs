//! Fixed 17-significant-digit formatting of reals for every file this crate writes.

use serde::ser::{Error as _, Serializer};
use serde_json::value::RawValue;

/// Formats `x` in scientific notation with 17 significant digits.
///
/// The output is a valid JSON number for finite `x` and parses back to the
/// identical `f64`.
pub fn fmt17(x: f64) -> String {
    // normalize negative zero so that byte-identical outputs do not depend on it
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

/// serde helper: serialize an `f64` as a 17-digit JSON number.
pub fn ser_f64<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if !x.is_finite() {
        return Err(S::Error::custom(format!("non-finite real {x}")));
    }
    let raw = RawValue::from_string(fmt17(*x)).map_err(S::Error::custom)?;
    serde::Serialize::serialize(&*raw, s)
}

pub fn ser_opt_f64<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => ser_f64(v, s),
        None => s.serialize_none(),
    }
}

pub fn ser_vec_f64<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for x in xs {
        seq.serialize_element(&F17(*x))?;
    }
    seq.end()
}

/// Wrapper that serializes through [`ser_f64`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F17(pub f64);

impl serde::Serialize for F17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ser_f64(&self.0, s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for &x in &[0.1, -1.0 / 3.0, 1e-300, 12345.678, std::f64::consts::PI] {
            let s = fmt17(x);
            let mantissa = s.split('e').next().unwrap();
            let digits = mantissa.chars().filter(|c| c.is_ascii_digit()).count();
            assert_eq!(digits, 17, "{s}");
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt17(-0.0), fmt17(0.0));
    }

    #[test]
    fn json_numbers_are_raw() {
        #[derive(serde::Serialize)]
        struct T {
            #[serde(serialize_with = "ser_f64")]
            a: f64,
            #[serde(serialize_with = "ser_opt_f64")]
            b: Option<f64>,
            #[serde(serialize_with = "ser_vec_f64")]
            c: Vec<f64>,
        }
        let s = serde_json::to_string(&T {
            a: 0.5,
            b: None,
            c: vec![1.0],
        })
        .unwrap();
        assert_eq!(s, r#"{"a":5.0000000000000000e-1,"b":null,"c":[1.0000000000000000e0]}"#);
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["a"].as_f64(), Some(0.5));
    }
}
