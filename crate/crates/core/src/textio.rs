//! Text and JSON encodings for scalars and series.
//!
//! Series literals are whitespace-insensitive sums of terms
//! `c * x1^a1 * x2^a2` where `c` is `p/q` or a parenthesized complex
//! `(p/q+r/s i)`. The parser is a small expression grammar over `+ - * / ^`
//! and parentheses, so equivalent spellings such as `x1*(1+x2)^2` or
//! `3/4 i * x1` are accepted too. `t`, `x` and `y` work as aliases for `x1`
//! and `x2`. Emission always uses the canonical `x1`/`x2` names and
//! parenthesizes non-real coefficients, so every emitted literal re-parses
//! to an equal series.
//!
//! JSON carries every number as a string to avoid float round-trip loss:
//! exact scalars as their literal, balls as `{"mid","rad","prec"}`. A series
//! is `{"nvars","trunc","terms"}` with terms listed in exponent order.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::{self, Deserializer, MapAccess, Visitor};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{Ball, Scalar};
use crate::series::{Expo, Series};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(input: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let bytes: Vec<char> = input.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push(Tok::Plus);
                i += 1;
            }
            '-' | '\u{2212}' => {
                out.push(Tok::Minus);
                i += 1;
            }
            '*' => {
                out.push(Tok::Star);
                i += 1;
            }
            '/' => {
                out.push(Tok::Slash);
                i += 1;
            }
            '^' => {
                out.push(Tok::Caret);
                i += 1;
            }
            '(' => {
                out.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1;
            }
            '0'..='9' => {
                let mut j = i;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                let int_part: String = bytes[i..j].iter().collect();
                let mut val = BigRational::from_integer(
                    int_part.parse::<BigInt>().map_err(|e| Error::Parse(e.to_string()))?,
                );
                if j < bytes.len() && bytes[j] == '.' {
                    let mut k = j + 1;
                    while k < bytes.len() && bytes[k].is_ascii_digit() {
                        k += 1;
                    }
                    if k == j + 1 {
                        return Err(Error::Parse("digit expected after decimal point".into()));
                    }
                    let frac: String = bytes[j + 1..k].iter().collect();
                    let num = frac.parse::<BigInt>().map_err(|e| Error::Parse(e.to_string()))?;
                    let den = BigInt::from(10u32).pow((k - j - 1) as u32);
                    val += BigRational::new(num, den);
                    j = k;
                }
                out.push(Tok::Num(val));
                i = j;
            }
            c if c.is_ascii_alphabetic() => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == '_') {
                    j += 1;
                }
                out.push(Tok::Ident(bytes[i..j].iter().collect()));
                i = j;
            }
            other => {
                return Err(Error::Parse(format!("unexpected character '{}'", other)));
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [Tok],
    pos: usize,
    nvars: u8,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn bump(&mut self) -> Option<&Tok> {
        let t = self.toks.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Series> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Series> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc = acc.mul(&self.unary()?);
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let d = self.unary()?;
                    acc = divide_series(&acc, &d)?;
                }
                // Implicit product: "3 i", "2 x1", "(1+i) x2".
                Some(Tok::Num(_)) | Some(Tok::Ident(_)) | Some(Tok::LParen) => {
                    acc = acc.mul(&self.unary()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Series> {
        if let Some(Tok::Minus) = self.peek() {
            self.pos += 1;
            return Ok(self.unary()?.neg());
        }
        if let Some(Tok::Plus) = self.peek() {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Series> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.pos += 1;
            let e = match self.bump() {
                Some(Tok::Num(q)) if q.is_integer() && !q.is_negative() => q
                    .to_integer()
                    .try_into()
                    .map_err(|_| Error::Parse("exponent too large".into()))?,
                other => {
                    return Err(Error::Parse(format!(
                        "exponent must be a nonnegative integer, got {:?}",
                        other
                    )))
                }
            };
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Series> {
        match self.bump().cloned() {
            Some(Tok::Num(q)) => Ok(Series::constant(Scalar::from_rational(q), self.nvars)),
            Some(Tok::Ident(name)) => self.ident(&name),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                match self.bump() {
                    Some(Tok::RParen) => Ok(inner),
                    _ => Err(Error::Parse("missing closing parenthesis".into())),
                }
            }
            other => Err(Error::Parse(format!("unexpected token {:?}", other))),
        }
    }

    fn ident(&mut self, name: &str) -> Result<Series> {
        match name {
            "i" | "I" => Ok(Series::constant(Scalar::i(), self.nvars)),
            "x1" | "t" | "x" => Ok(Series::var(0, self.nvars)),
            "x2" | "y" => {
                if self.nvars < 2 {
                    return Err(Error::Parse(format!(
                        "variable '{}' not available in a {}-variable series",
                        name, self.nvars
                    )));
                }
                Ok(Series::var(1, self.nvars))
            }
            other => Err(Error::Parse(format!("unknown identifier '{}'", other))),
        }
    }
}

fn divide_series(a: &Series, b: &Series) -> Result<Series> {
    let c = b.value_at_zero();
    if b.num_terms() > 1 || (b.num_terms() == 1 && b.coeff(&[0, 0]).is_zero_exact()) {
        return Err(Error::Parse(
            "division is only supported by a constant".into(),
        ));
    }
    if c.is_zero_exact() {
        return Err(Error::Parse("division by zero".into()));
    }
    let inv = Scalar::one().div(&c)?;
    Ok(a.scale(&inv))
}

/// Parse a series literal in `nvars` variables, then truncate at `trunc`.
pub fn parse_series(input: &str, nvars: u8, trunc: Option<u32>) -> Result<Series> {
    assert!(nvars == 1 || nvars == 2);
    let toks = tokenize(input)?;
    if toks.is_empty() {
        return Err(Error::Parse("empty series literal".into()));
    }
    let mut p = Parser {
        toks: &toks,
        pos: 0,
        nvars,
    };
    let mut s = p.expr()?;
    if p.pos != toks.len() {
        return Err(Error::Parse(format!(
            "trailing input at token {} of {}",
            p.pos + 1,
            toks.len()
        )));
    }
    s.truncate(trunc);
    Ok(s)
}

/// Parse a scalar literal such as "3/4", "1/2+3/4 i", "-2 i".
pub fn parse_scalar(input: &str) -> Result<Scalar> {
    let s = parse_series(input, 1, None)?;
    for (e, _) in s.terms() {
        if *e != [0, 0] {
            return Err(Error::Parse(format!(
                "expected a constant scalar, found a variable in '{}'",
                input
            )));
        }
    }
    Ok(s.value_at_zero())
}

pub fn rat_to_string(q: &BigRational) -> String {
    if q.denom().is_one() {
        format!("{}", q.numer())
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn parse_rat(input: &str) -> Result<BigRational> {
    let s = parse_scalar(input)?;
    match s {
        Scalar::Exact(g) if g.im.is_zero() => Ok(g.re),
        _ => Err(Error::Parse(format!("expected a real rational: '{}'", input))),
    }
}

/// Canonical complex literal `p/q`, `r/s i` or `p/q+r/s i`.
pub fn complex_to_string(re: &BigRational, im: &BigRational) -> String {
    if im.is_zero() {
        rat_to_string(re)
    } else if re.is_zero() {
        format!("{} i", rat_to_string(im))
    } else if im.is_negative() {
        format!("{}-{} i", rat_to_string(re), rat_to_string(&im.abs()))
    } else {
        format!("{}+{} i", rat_to_string(re), rat_to_string(im))
    }
}

fn var_name(j: usize) -> &'static str {
    if j == 0 {
        "x1"
    } else {
        "x2"
    }
}

/// Canonical literal for a series. Real exact coefficients print bare,
/// complex ones in parentheses; ball coefficients use the bracketed scalar
/// display and are not re-parseable (structured JSON carries those).
pub fn series_to_string(s: &Series) -> String {
    if s.num_terms() == 0 {
        return "0".to_string();
    }
    let mut out = String::new();
    for (e, c) in s.terms() {
        let mut vars = String::new();
        for j in 0..s.nvars as usize {
            if e[j] == 0 {
                continue;
            }
            if !vars.is_empty() {
                vars.push('*');
            }
            vars.push_str(var_name(j));
            if e[j] > 1 {
                vars.push_str(&format!("^{}", e[j]));
            }
        }
        let (lead, body) = match c {
            Scalar::Exact(g) if g.im.is_zero() => {
                let neg = g.re.is_negative();
                let mag = g.re.abs();
                let cs = if mag.is_one() && !vars.is_empty() {
                    String::new()
                } else {
                    rat_to_string(&mag)
                };
                (neg, cs)
            }
            _ => (false, format!("({})", c)),
        };
        if out.is_empty() {
            if lead {
                out.push('-');
            }
        } else {
            out.push_str(if lead { " - " } else { " + " });
        }
        match (body.is_empty(), vars.is_empty()) {
            (true, true) => out.push('1'),
            (true, false) => out.push_str(&vars),
            (false, true) => out.push_str(&body),
            (false, false) => {
                out.push_str(&body);
                out.push('*');
                out.push_str(&vars);
            }
        }
    }
    out
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Scalar::Exact(g) => ser.serialize_str(&complex_to_string(&g.re, &g.im)),
            Scalar::Ball(b) => {
                let mut m = ser.serialize_map(Some(3))?;
                m.serialize_entry("mid", &complex_to_string(&b.re, &b.im))?;
                m.serialize_entry("rad", &rat_to_string(&b.rad))?;
                m.serialize_entry("prec", &b.prec)?;
                m.end()
            }
        }
    }
}

struct ScalarVisitor;

impl<'de> Visitor<'de> for ScalarVisitor {
    type Value = Scalar;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "a scalar string or a ball object {{mid, rad, prec}}")
    }

    fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Scalar, E> {
        parse_scalar(v).map_err(|e| E::custom(e.to_string()))
    }

    fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> std::result::Result<Scalar, A::Error> {
        let mut mid: Option<String> = None;
        let mut rad: Option<String> = None;
        let mut prec: Option<u32> = None;
        while let Some(key) = map.next_key::<String>()? {
            match key.as_str() {
                "mid" => mid = Some(map.next_value()?),
                "rad" => rad = Some(map.next_value()?),
                "prec" => prec = Some(map.next_value()?),
                other => return Err(de::Error::unknown_field(other, &["mid", "rad", "prec"])),
            }
        }
        let mid = mid.ok_or_else(|| de::Error::missing_field("mid"))?;
        let rad = rad.ok_or_else(|| de::Error::missing_field("rad"))?;
        let prec = prec.ok_or_else(|| de::Error::missing_field("prec"))?;
        let g = match parse_scalar(&mid).map_err(|e| de::Error::custom(e.to_string()))? {
            Scalar::Exact(g) => g,
            _ => return Err(de::Error::custom("ball midpoint must be exact")),
        };
        let r = parse_rat(&rad).map_err(|e| de::Error::custom(e.to_string()))?;
        if r.is_negative() {
            return Err(de::Error::custom("ball radius must be nonnegative"));
        }
        Ok(Scalar::Ball(Ball {
            re: g.re,
            im: g.im,
            rad: r,
            prec,
        }))
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Scalar, D::Error> {
        de.deserialize_any(ScalarVisitor)
    }
}

#[derive(Serialize, Deserialize)]
struct SeriesRepr {
    nvars: u8,
    trunc: Option<u32>,
    terms: Vec<(Expo, Scalar)>,
}

impl Serialize for Series {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = SeriesRepr {
            nvars: self.nvars,
            trunc: self.trunc,
            terms: self.terms().map(|(e, c)| (*e, c.clone())).collect(),
        };
        repr.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Series {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Series, D::Error> {
        let repr = SeriesRepr::deserialize(de)?;
        if repr.nvars != 1 && repr.nvars != 2 {
            return Err(de::Error::custom("nvars must be 1 or 2"));
        }
        let s = Series::from_coeffs(repr.nvars, repr.trunc, repr.terms);
        Ok(s)
    }
}

impl std::str::FromStr for Scalar {
    type Err = Error;
    fn from_str(s: &str) -> Result<Scalar> {
        parse_scalar(s)
    }
}
