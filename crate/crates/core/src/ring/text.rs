//! Text and JSON forms of [`QuadInt`].

use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{QuadInt, Ring};
use crate::error::{Error, Result};

impl Ring {
    /// Parses `"a+b*w"` and its obvious abbreviations (`"7"`, `"-w"`,
    /// `"3*w-2"`, `"5w"`). For `d = 1` the letter `i` is accepted for `w`.
    pub fn parse(self, text: &str) -> Result<QuadInt> {
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::usage("empty ring element"));
        }
        let bad = || Error::usage(format!("cannot parse {text:?} as an element a+b*w"));
        let mut terms = Vec::new();
        let mut start = 0;
        for (i, ch) in s.char_indices() {
            if i > 0 && (ch == '+' || ch == '-') {
                terms.push(&s[start..i]);
                start = i;
            }
        }
        terms.push(&s[start..]);
        let (mut a, mut b) = (BigInt::from(0), BigInt::from(0));
        for term in terms {
            let (neg, body) = match term.as_bytes().first() {
                Some(b'+') => (false, &term[1..]),
                Some(b'-') => (true, &term[1..]),
                _ => (false, term),
            };
            if body.is_empty() {
                return Err(bad());
            }
            let unit = |c: char| c == 'w' || (c == 'i' && self.d() == 1);
            let (coef, is_w) = match body.strip_suffix(unit) {
                Some(rest) => {
                    let rest = rest.strip_suffix('*').unwrap_or(rest);
                    let c = if rest.is_empty() {
                        BigInt::from(1)
                    } else {
                        BigInt::from_str(rest).map_err(|_| bad())?
                    };
                    (c, true)
                }
                None => (BigInt::from_str(body).map_err(|_| bad())?, false),
            };
            let coef = if neg { -coef } else { coef };
            if is_w {
                b += coef;
            } else {
                a += coef;
            }
        }
        Ok(self.elem(a, b))
    }
}

#[derive(Serialize, Deserialize)]
struct Wire {
    a: String,
    b: String,
    d: u32,
}

impl Serialize for QuadInt {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        Wire {
            a: self.a().to_string(),
            b: self.b().to_string(),
            d: self.ring().d(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for QuadInt {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let w = Wire::deserialize(de)?;
        let ring = Ring::new(w.d).map_err(D::Error::custom)?;
        let a = BigInt::from_str(&w.a).map_err(D::Error::custom)?;
        let b = BigInt::from_str(&w.b).map_err(D::Error::custom)?;
        Ok(ring.elem(a, b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_common_shapes() {
        let g = Ring::new(1).unwrap();
        assert_eq!(g.parse("3+5*w").unwrap(), g.elem(3, 5));
        assert_eq!(g.parse(" -3 - 5*w ").unwrap(), g.elem(-3, -5));
        assert_eq!(g.parse("w").unwrap(), g.omega());
        assert_eq!(g.parse("-w").unwrap(), g.elem(0, -1));
        assert_eq!(g.parse("11i").unwrap(), g.elem(0, 11));
        assert_eq!(g.parse("5*w+2").unwrap(), g.elem(2, 5));
        assert_eq!(g.parse("0+1*w").unwrap(), g.omega());
        assert_eq!(g.parse("123456789012345678901234567890").unwrap().a().to_string(),
            "123456789012345678901234567890");
        for bad in ["", "+", "3+", "x", "3**w", "--2", "1.5"] {
            assert!(g.parse(bad).is_err(), "{bad:?}");
        }
        assert!(Ring::new(2).unwrap().parse("i").is_err());
    }

    #[test]
    fn json_roundtrip() {
        let r = Ring::new(7).unwrap();
        let x = r.elem(-12, 34);
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(s, r#"{"a":"-12","b":"34","d":7}"#);
        let y: QuadInt = serde_json::from_str(&s).unwrap();
        assert_eq!(x, y);
        assert!(serde_json::from_str::<QuadInt>(r#"{"a":"1","b":"0","d":5}"#).is_err());
    }

    #[test]
    fn display_parses_back() {
        for d in [1, 3, 163] {
            let r = Ring::new(d).unwrap();
            for x in r.lattice_ball(50) {
                assert_eq!(r.parse(&x.to_string()).unwrap(), x);
            }
        }
    }
}
