//! Fixed-precision number formatting for persisted artifacts.
//!
//! Every float written to CSV or JSON uses 17 significant digits, which is
//! enough to round-trip any `f64` exactly.

use std::io;

/// Formats `x` with 17 significant digits.
///
/// Values with a decimal exponent in `-5..17` are written positionally
/// (`0.95257412682243336`, `2146.0000000000000`); everything else uses
/// scientific notation (`9.9999999999999995e-8`). Both forms are valid JSON
/// numbers and parse back to the identical `f64`.
pub fn fmt17(x: f64) -> String {
    if x.is_nan() {
        return "NaN".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => ("-", rest),
        None => ("", mantissa),
    };
    if !(-5..17).contains(&exp) {
        return sci;
    }
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    debug_assert_eq!(digits.len(), 17);
    if exp >= 0 {
        let split = exp as usize + 1;
        let (int_part, frac_part) = digits.split_at(split);
        if frac_part.is_empty() {
            format!("{sign}{int_part}")
        } else {
            format!("{sign}{int_part}.{frac_part}")
        }
    } else {
        let zeros = "0".repeat((-exp - 1) as usize);
        format!("{sign}0.{zeros}{digits}")
    }
}

/// `serde_json` formatter that writes every float through [`fmt17`].
#[derive(Debug, Default, Clone, Copy)]
pub struct Sig17Formatter;

impl serde_json::ser::Formatter for Sig17Formatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        writer.write_all(fmt17(value).as_bytes())
    }
}

/// Serializes `value` as compact JSON with 17-significant-digit floats.
pub fn to_json_sig17<T: serde::Serialize>(value: &T) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17Formatter);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json emits utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn positional_and_scientific() {
        assert_eq!(fmt17(0.95), "0.94999999999999996");
        assert_eq!(fmt17(3.0), "3.0000000000000000");
        assert_eq!(fmt17(-2146.0), "-2146.0000000000000");
        assert_eq!(fmt17(0.0), "0.0000000000000000");
        assert_eq!(fmt17(1e-7), "9.9999999999999995e-8");
        assert_eq!(fmt17(1.5e-7), "1.4999999999999999e-7");
        assert_eq!(fmt17(1e20), "1.0000000000000000e20");
        assert_eq!(fmt17(0.00012), "0.00012000000000000000");
    }

    #[test]
    fn json_uses_sig17() {
        let s = to_json_sig17(&vec![0.5, 1.0 / 3.0]).unwrap();
        assert_eq!(s, "[0.50000000000000000,0.33333333333333331]");
    }

    proptest! {
        #[test]
        fn round_trips_every_finite_f64(bits in any::<u64>()) {
            let x = f64::from_bits(bits);
            prop_assume!(x.is_finite());
            let back: f64 = fmt17(x).parse().unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }
    }
}
