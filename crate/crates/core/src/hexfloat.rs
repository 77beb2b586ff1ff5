//! Bit-exact text form of `f64` (`0x1.8p+1`, `-0x0p+0`, `inf`, `nan`), with
//! serde adapters for use as `#[serde(with = "crate::hexfloat")]`.

use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

pub fn format(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let exp_bits = ((bits >> 52) & 0x7ff) as i64;
    let mantissa = bits & ((1u64 << 52) - 1);
    if exp_bits == 0 && mantissa == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, exp) = if exp_bits == 0 { (0, -1022) } else { (1, exp_bits - 1023) };
    let mut digits = format!("{mantissa:013x}");
    while digits.ends_with('0') {
        digits.pop();
    }
    let frac = if digits.is_empty() { String::new() } else { format!(".{digits}") };
    let esign = if exp < 0 { '-' } else { '+' };
    format!("{sign}0x{lead}{frac}p{esign}{}", exp.abs())
}

pub fn parse(s: &str) -> Option<f64> {
    match s {
        "nan" => return Some(f64::NAN),
        "inf" => return Some(f64::INFINITY),
        "-inf" => return Some(f64::NEG_INFINITY),
        _ => {}
    }
    let (negative, rest) = match s.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, s),
    };
    let rest = rest.strip_prefix("0x")?;
    let (mant, exp) = rest.split_once('p')?;
    let exp: i64 = exp.parse().ok()?;
    let (lead, frac) = match mant.split_once('.') {
        Some((l, f)) => (l, f),
        None => (mant, ""),
    };
    if frac.len() > 13 || !matches!(lead, "0" | "1") {
        return None;
    }
    let lead = lead.parse::<u64>().ok()?;
    let frac_bits = if frac.is_empty() {
        0
    } else {
        u64::from_str_radix(frac, 16).ok()? << (4 * (13 - frac.len()))
    };
    let bits = if lead == 0 {
        if frac_bits != 0 && exp != -1022 {
            return None;
        }
        frac_bits
    } else {
        if !(-1022..=1023).contains(&exp) {
            return None;
        }
        (((exp + 1023) as u64) << 52) | frac_bits
    };
    let x = f64::from_bits(bits);
    Some(if negative { -x } else { x })
}

pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format(*x))
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    let s = String::deserialize(d)?;
    parse(&s).ok_or_else(|| D::Error::custom(format!("bad hex float {s:?}")))
}

pub mod option {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => s.serialize_some(&super::format(*v)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        let s = Option::<String>::deserialize(d)?;
        s.map(|s| parse(&s).ok_or_else(|| D::Error::custom(format!("bad hex float {s:?}"))))
            .transpose()
    }
}

pub mod vec {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(xs.len()))?;
        for x in xs {
            seq.serialize_element(&super::format(*x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| parse(s).ok_or_else(|| D::Error::custom(format!("bad hex float {s:?}"))))
            .collect()
    }
}

/// A complex number as `[re, im]`, each a hex float.
pub mod complex {
    use super::*;
    use num_complex::Complex64;
    use serde::Serialize;

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        [super::format(z.re), super::format(z.im)].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[String; 2]>::deserialize(d)?;
        let part = |s: &str| parse(s).ok_or_else(|| D::Error::custom(format!("bad hex float {s:?}")));
        Ok(Complex64::new(part(&re)?, part(&im)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn known_forms() {
        assert_eq!(format(1.0), "0x1p+0");
        assert_eq!(format(3.0), "0x1.8p+1");
        assert_eq!(format(-0.0), "-0x0p+0");
        assert_eq!(format(f64::MIN_POSITIVE / 4.0), "0x0.4p-1022");
        assert_eq!(parse("0x1.8p+1"), Some(3.0));
        assert_eq!(parse("0x1.8p"), None);
    }

    proptest! {
        #[test]
        fn round_trip(bits in any::<u64>()) {
            let x = f64::from_bits(bits);
            let back = parse(&format(x)).unwrap();
            if x.is_nan() {
                prop_assert!(back.is_nan());
            } else {
                prop_assert_eq!(back.to_bits(), bits);
            }
        }
    }
}
