//! Exact rational numbers and their textual forms.
//!
//! All engine arithmetic runs on [`Rational`]. Two textual forms exist:
//! the exact form (terminating decimal, else `p/q`) used on the wire, and the
//! two-decimal display form used for human-readable tables.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid number `{input}`: {reason}")]
pub struct ParseRationalError {
    pub input: String,
    pub reason: &'static str,
}

impl ParseRationalError {
    fn new(input: &str, reason: &'static str) -> Self {
        Self { input: input.to_string(), reason }
    }
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `-12`, `0.01`, `1.5e-3`, `.5` or `3/7` into an exact value.
pub fn parse_rational(input: &str) -> Result<Rational, ParseRationalError> {
    let s = input.trim();
    if s.is_empty() {
        return Err(ParseRationalError::new(input, "empty"));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = parse_integer(num.trim()).ok_or_else(|| ParseRationalError::new(input, "bad numerator"))?;
        let d: BigInt = parse_integer(den.trim()).ok_or_else(|| ParseRationalError::new(input, "bad denominator"))?;
        if d.is_zero() {
            return Err(ParseRationalError::new(input, "zero denominator"));
        }
        return Ok(Rational::new(n, d));
    }

    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp: i32 = s[pos + 1..]
                .parse()
                .map_err(|_| ParseRationalError::new(input, "bad exponent"))?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    let (negative, body) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(ParseRationalError::new(input, "no digits"));
    }
    if !whole.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(ParseRationalError::new(input, "unexpected character"));
    }
    let digits = format!("{whole}{frac}");
    let mut numer: BigInt = digits.parse().map_err(|_| ParseRationalError::new(input, "bad digits"))?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

fn parse_integer(s: &str) -> Option<BigInt> {
    if s.is_empty() {
        return None;
    }
    let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Exact text: a terminating decimal when one exists, otherwise `p/q`.
pub fn format_exact(v: &Rational) -> String {
    let denom = v.denom();
    let mut rest = denom.clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let mut twos = 0usize;
    let mut fives = 0usize;
    while rest.is_even() {
        rest /= &two;
        twos += 1;
    }
    while (&rest % &five).is_zero() {
        rest /= &five;
        fives += 1;
    }
    if !rest.is_one() {
        return format!("{}/{}", v.numer(), denom);
    }
    let places = twos.max(fives);
    if places == 0 {
        return v.numer().to_string();
    }
    let scaled = (v * Rational::from_integer(num_traits::pow(BigInt::from(10), places))).to_integer();
    let negative = scaled.is_negative();
    let digits = scaled.abs().to_string();
    let padded = format!("{digits:0>width$}", width = places + 1);
    let (int_part, frac_part) = padded.split_at(padded.len() - places);
    format!("{}{}.{}", if negative { "-" } else { "" }, int_part, frac_part)
}

/// Rounds half away from zero to `places` decimals. Negative zero prints as zero.
pub fn format_rounded(v: &Rational, places: usize) -> String {
    let scale = Rational::from_integer(num_traits::pow(BigInt::from(10), places));
    let scaled = v.abs() * scale;
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    let rounded = (scaled + half).floor().to_integer();
    let negative = v.is_negative() && !rounded.is_zero();
    let digits = format!("{:0>width$}", rounded.to_string(), width = places + 1);
    let sign = if negative { "-" } else { "" };
    if places == 0 {
        return format!("{sign}{digits}");
    }
    let (int_part, frac_part) = digits.split_at(digits.len() - places);
    format!("{sign}{int_part}.{frac_part}")
}

/// Two-decimal display value, as used by every table renderer.
pub fn display2(v: &Rational) -> String {
    format_rounded(v, 2)
}

/// Closest `f64`, for plotting and tolerance checks only.
pub fn to_f64(v: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    v.to_f64().unwrap_or(f64::NAN)
}

/// Wrapper printing the exact form.
pub struct Exact<'a>(pub &'a Rational);

impl fmt::Display for Exact<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_exact(self.0))
    }
}

/// Serde adapter: exact rationals travel as strings.
pub mod serde_exact {
    use serde::{de, Deserialize, Deserializer, Serializer};

    use super::{format_exact, parse_rational, Rational};

    pub fn serialize<S: Serializer>(v: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_exact(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let raw = NumberOrString::deserialize(d)?;
        parse_rational(&raw.as_str()).map_err(de::Error::custom)
    }

    /// Accepts JSON strings and plain JSON numbers; numbers go through their
    /// shortest decimal rendering before exact parsing.
    #[derive(Deserialize)]
    #[serde(untagged)]
    pub(crate) enum NumberOrString {
        Text(String),
        Number(serde_json::Number),
    }

    impl NumberOrString {
        pub(crate) fn as_str(&self) -> std::borrow::Cow<'_, str> {
            match self {
                NumberOrString::Text(s) => s.as_str().into(),
                NumberOrString::Number(n) => n.to_string().into(),
            }
        }
    }

    pub mod option {
        use serde::{Deserialize, Deserializer, Serializer};

        use super::super::Rational;

        pub fn serialize<S: Serializer>(v: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
            match v {
                Some(v) => super::serialize(v, s),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
            #[derive(Deserialize)]
            struct Wrap(#[serde(with = "super")] Rational);
            Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimal_forms_exactly() {
        assert_eq!(parse_rational("0.01").unwrap(), ratio(1, 100));
        assert_eq!(parse_rational("-12").unwrap(), int(-12));
        assert_eq!(parse_rational("1.5e-3").unwrap(), ratio(3, 2000));
        assert_eq!(parse_rational(".5").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("3/6").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("-2/-4").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("2E2").unwrap(), int(200));
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "bogus", "1/0", "1..2", "-", "1e", "0x10", "1/a"] {
            assert!(parse_rational(bad).is_err(), "{bad} should fail");
        }
    }

    #[test]
    fn exact_form_prefers_decimals() {
        assert_eq!(format_exact(&ratio(1, 100)), "0.01");
        assert_eq!(format_exact(&ratio(-7, 4)), "-1.75");
        assert_eq!(format_exact(&ratio(-1, 8)), "-0.125");
        assert_eq!(format_exact(&ratio(1, 3)), "1/3");
        assert_eq!(format_exact(&int(42)), "42");
        assert_eq!(format_exact(&ratio(26, 62)), "13/31");
    }

    #[test]
    fn display_rounds_half_away_from_zero() {
        assert_eq!(display2(&ratio(1, 200)), "0.01");
        assert_eq!(display2(&ratio(-1, 200)), "-0.01");
        assert_eq!(display2(&ratio(-1, 1000)), "0.00");
        assert_eq!(display2(&ratio(2, 3)), "0.67");
        assert_eq!(display2(&int(3)), "3.00");
        assert_eq!(format_rounded(&ratio(5, 2), 0), "3");
    }

    proptest::proptest! {
        #[test]
        fn exact_form_round_trips(n in -100_000i64..100_000, d in 1i64..5_000) {
            let v = ratio(n, d);
            proptest::prop_assert_eq!(parse_rational(&format_exact(&v)).unwrap(), v);
        }
    }
}
