//! Exact Gaussian rationals and certified complex balls.
//!
//! `Scalar` is the coefficient type used everywhere: either an exact complex
//! rational or a ball (dyadic midpoint, error radius, working precision in
//! bits). Ball operations round midpoints to the working precision and push
//! all rounding error into the radius, so a ball always contains the true
//! value it tracks. Mixing an exact scalar into a ball operation embeds it
//! as a zero-radius ball first.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Default working precision in bits for ball arithmetic.
pub const DEFAULT_PREC: u32 = 128;

/// Mantissa bits kept for radii. Radii only need an order of magnitude.
const RAD_BITS: i64 = 24;

pub fn big(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// 2^k as an exact rational, k may be negative.
pub fn pow2(k: i64) -> BigRational {
    if k >= 0 {
        BigRational::from_integer(BigInt::one() << k as usize)
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << (-k) as usize)
    }
}

/// floor(log2(|q|)) within +-1, as a cheap size estimate. q must be nonzero.
fn mag_exponent(q: &BigRational) -> i64 {
    q.numer().bits() as i64 - q.denom().bits() as i64
}

/// Round `q` to a dyadic rational carrying about `prec` significant bits.
/// Returns the rounded value and an upper bound for the absolute error.
pub fn dyadic_round(q: &BigRational, prec: u32) -> (BigRational, BigRational) {
    if q.is_zero() {
        return (BigRational::zero(), BigRational::zero());
    }
    // Already a small dyadic: keep exactly.
    let d = q.denom();
    if d.bits() <= prec as u64 + 2 && (d & (d - BigInt::one())).is_zero() {
        return (q.clone(), BigRational::zero());
    }
    let t = prec as i64 - mag_exponent(q);
    let scaled = q * pow2(t);
    let m = scaled.round().to_integer();
    let rounded = BigRational::from_integer(m) * pow2(-t);
    (rounded, pow2(-t - 1))
}

/// Round a radius up to a coarse dyadic so radii stay small to store.
fn round_rad_up(r: &BigRational) -> BigRational {
    if r.is_zero() {
        return BigRational::zero();
    }
    debug_assert!(r.is_positive());
    let t = RAD_BITS - mag_exponent(r);
    let scaled = r * pow2(t);
    let mut m = scaled.trunc().to_integer();
    if scaled.fract().is_zero() {
        return BigRational::from_integer(m) * pow2(-t);
    }
    m += BigInt::one();
    BigRational::from_integer(m) * pow2(-t)
}

/// Integer square root bracket: returns (s, exact) with s = floor(sqrt(n)).
fn isqrt(n: &BigInt) -> (BigInt, bool) {
    let s = n.sqrt();
    let exact = (&s * &s) == *n;
    (s, exact)
}

/// sqrt of an exact nonnegative rational if it is again rational.
pub fn rational_sqrt_exact(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let (sn, en) = isqrt(q.numer());
    let (sd, ed) = isqrt(q.denom());
    if en && ed {
        Some(BigRational::new(sn, sd))
    } else {
        None
    }
}

/// Certified bracket l <= sqrt(q) <= u for exact q >= 0, about `prec` bits.
pub fn rational_sqrt_bracket(q: &BigRational, prec: u32) -> (BigRational, BigRational) {
    if q.is_zero() {
        return (BigRational::zero(), BigRational::zero());
    }
    debug_assert!(q.is_positive());
    // sqrt(p/d) = sqrt(p*d)/d; scale by 4^t for precision.
    let t = prec as i64 + 4;
    let scaled = q.numer() * q.denom() * (BigInt::one() << (2 * t) as usize);
    let (s, exact) = isqrt(&scaled);
    let denom = BigRational::from_integer(q.denom().clone()) * pow2(t);
    let lo = BigRational::from_integer(s.clone()) / denom.clone();
    if exact {
        return (lo.clone(), lo);
    }
    let hi = BigRational::from_integer(s + BigInt::one()) / denom;
    (lo, hi)
}

/// Exact complex rational p/q + (r/s) i.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GaussRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRat { re, im }
    }

    pub fn zero() -> Self {
        GaussRat::new(BigRational::zero(), BigRational::zero())
    }

    pub fn one() -> Self {
        GaussRat::new(BigRational::one(), BigRational::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussRat::new(self.re.clone(), -self.im.clone())
    }

    /// |z|^2, exact.
    pub fn abs2(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn add(&self, o: &Self) -> Self {
        GaussRat::new(&self.re + &o.re, &self.im + &o.im)
    }

    pub fn sub(&self, o: &Self) -> Self {
        GaussRat::new(&self.re - &o.re, &self.im - &o.im)
    }

    pub fn neg(&self) -> Self {
        GaussRat::new(-self.re.clone(), -self.im.clone())
    }

    pub fn mul(&self, o: &Self) -> Self {
        GaussRat::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        let d = o.abs2();
        if d.is_zero() {
            return Err(Error::Input("division by zero".into()));
        }
        let n = self.mul(&o.conj());
        Ok(GaussRat::new(n.re / d.clone(), n.im / d))
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}

/// Complex ball: midpoint with dyadic-rounded components, radius, precision.
#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    pub re: BigRational,
    pub im: BigRational,
    pub rad: BigRational,
    pub prec: u32,
}

impl Ball {
    pub fn exact_mid(re: BigRational, im: BigRational, prec: u32) -> Self {
        let mut b = Ball {
            re,
            im,
            rad: BigRational::zero(),
            prec,
        };
        b.normalize();
        b
    }

    pub fn from_gauss(g: &GaussRat, prec: u32) -> Self {
        Ball::exact_mid(g.re.clone(), g.im.clone(), prec)
    }

    fn normalize(&mut self) {
        let (re, e1) = dyadic_round(&self.re, self.prec);
        let (im, e2) = dyadic_round(&self.im, self.prec);
        self.re = re;
        self.im = im;
        let rad = &self.rad + e1 + e2;
        self.rad = round_rad_up(&rad);
    }

    /// Upper bound for |midpoint| (l1 bound, within sqrt(2) of tight).
    pub fn mid_abs_upper(&self) -> BigRational {
        self.re.abs() + self.im.abs()
    }

    /// Lower bound for |midpoint| (linf bound).
    pub fn mid_abs_lower(&self) -> BigRational {
        if self.re.abs() >= self.im.abs() {
            self.re.abs()
        } else {
            self.im.abs()
        }
    }

    /// Upper bound for |z| over the ball.
    pub fn abs_upper(&self) -> BigRational {
        self.mid_abs_upper() + &self.rad
    }

    /// Lower bound for |z| over the ball (clamped at zero).
    pub fn abs_lower(&self) -> BigRational {
        let l = self.mid_abs_lower() - &self.rad;
        if l.is_negative() {
            BigRational::zero()
        } else {
            l
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut b = Ball {
            re: &self.re + &o.re,
            im: &self.im + &o.im,
            rad: &self.rad + &o.rad,
            prec: self.prec.min(o.prec),
        };
        b.normalize();
        b
    }

    pub fn neg(&self) -> Self {
        Ball {
            re: -self.re.clone(),
            im: -self.im.clone(),
            rad: self.rad.clone(),
            prec: self.prec,
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let re = &self.re * &o.re - &self.im * &o.im;
        let im = &self.re * &o.im + &self.im * &o.re;
        let rad = self.mid_abs_upper() * &o.rad
            + o.mid_abs_upper() * &self.rad
            + &self.rad * &o.rad;
        let mut b = Ball {
            re,
            im,
            rad,
            prec: self.prec.min(o.prec),
        };
        b.normalize();
        b
    }

    pub fn inv(&self) -> Result<Self> {
        let l = self.mid_abs_lower();
        if l <= self.rad {
            return Err(Error::PrecisionExhausted {
                decision: "inversion of a ball containing zero".into(),
                prec: self.prec,
                cap: self.prec,
            });
        }
        let a2 = &self.re * &self.re + &self.im * &self.im;
        let re = &self.re / &a2;
        let im = -&self.im / &a2;
        // |1/z - 1/m| <= rad / (|m| (|m| - rad)) for |z - m| <= rad.
        let rad = &self.rad / (&l * (&l - &self.rad));
        let mut b = Ball {
            re,
            im,
            rad,
            prec: self.prec,
        };
        b.normalize();
        Ok(b)
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        Ok(self.mul(&o.inv()?))
    }

    /// Principal square root of a ball certified to contain only values with
    /// re >= 0 after the usual branch; rigorous via real interval sqrts.
    pub fn sqrt(&self) -> Result<Self> {
        if self.im.is_zero() && !self.re.is_negative() {
            return self.sqrt_real_nonneg();
        }
        if self.im.is_zero() && self.re.is_negative() {
            let pos = Ball {
                re: -self.re.clone(),
                im: BigRational::zero(),
                rad: self.rad.clone(),
                prec: self.prec,
            };
            let s = pos.sqrt_real_nonneg()?;
            return Ok(Ball {
                re: BigRational::zero(),
                im: s.re,
                rad: s.rad,
                prec: s.prec,
            });
        }
        // General complex: sqrt(a+bi) = p + qi, p = sqrt((|z|+a)/2),
        // q = sign(b) sqrt((|z|-a)/2), all via real interval sqrt.
        let a2 = Ball {
            re: &self.re * &self.re + &self.im * &self.im,
            im: BigRational::zero(),
            // |z|^2 varies by at most (2|m| + rad) rad over the ball.
            rad: (self.mid_abs_upper() * big(2) + &self.rad) * &self.rad,
            prec: self.prec,
        };
        let absz = a2.sqrt_real_nonneg()?;
        let half = Ball::exact_mid(ratio(1, 2), BigRational::zero(), self.prec);
        let a_ball = Ball {
            re: self.re.clone(),
            im: BigRational::zero(),
            rad: self.rad.clone(),
            prec: self.prec,
        };
        let p2 = absz.add(&a_ball).mul(&half).clamp_nonneg();
        let q2 = absz.sub(&a_ball).mul(&half).clamp_nonneg();
        let p = p2.sqrt_real_nonneg()?;
        let q = q2.sqrt_real_nonneg()?;
        let q_signed = if self.im.is_negative() { q.neg() } else { q };
        let mut b = Ball {
            re: p.re,
            im: q_signed.re,
            rad: &p.rad + &q_signed.rad,
            prec: self.prec,
        };
        b.normalize();
        Ok(b)
    }

    fn clamp_nonneg(&self) -> Ball {
        if self.re.is_negative() {
            Ball {
                re: BigRational::zero(),
                im: BigRational::zero(),
                rad: &self.rad + self.re.abs(),
                prec: self.prec,
            }
        } else {
            self.clone()
        }
    }

    fn sqrt_real_nonneg(&self) -> Result<Self> {
        debug_assert!(self.im.is_zero());
        let lo = {
            let l = &self.re - &self.rad;
            if l.is_negative() {
                BigRational::zero()
            } else {
                l
            }
        };
        let hi = &self.re + &self.rad;
        if hi.is_negative() {
            return Err(Error::Input("sqrt of a certainly negative ball".into()));
        }
        let (slo, _) = rational_sqrt_bracket(&lo, self.prec);
        let (_, shi) = rational_sqrt_bracket(&hi, self.prec);
        let mid = (&slo + &shi) / big(2);
        let rad = (&shi - &slo) / big(2);
        let mut b = Ball {
            re: mid,
            im: BigRational::zero(),
            rad,
            prec: self.prec,
        };
        b.normalize();
        Ok(b)
    }

    pub fn contains_zero(&self) -> bool {
        self.mid_abs_lower() <= self.rad
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}

/// Coefficient scalar: exact Gaussian rational or certified complex ball.
#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Exact(GaussRat),
    Ball(Ball),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(GaussRat::zero())
    }

    pub fn one() -> Self {
        Scalar::Exact(GaussRat::one())
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::Exact(GaussRat::new(big(n), BigRational::zero()))
    }

    pub fn from_ratio(p: i64, q: i64) -> Self {
        Scalar::Exact(GaussRat::new(ratio(p, q), BigRational::zero()))
    }

    pub fn from_rational(q: BigRational) -> Self {
        Scalar::Exact(GaussRat::new(q, BigRational::zero()))
    }

    pub fn i() -> Self {
        Scalar::Exact(GaussRat::new(BigRational::zero(), BigRational::one()))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn precision(&self) -> u32 {
        match self {
            Scalar::Exact(_) => u32::MAX,
            Scalar::Ball(b) => b.prec,
        }
    }

    pub fn to_ball(&self, prec: u32) -> Ball {
        match self {
            Scalar::Exact(g) => Ball::from_gauss(g, prec),
            Scalar::Ball(b) => b.clone(),
        }
    }

    fn promote(a: &Scalar, b: &Scalar) -> Option<(Ball, Ball)> {
        match (a, b) {
            (Scalar::Exact(_), Scalar::Exact(_)) => None,
            _ => {
                let p = a.precision().min(b.precision());
                Some((a.to_ball(p), b.to_ball(p)))
            }
        }
    }

    pub fn add(&self, o: &Scalar) -> Scalar {
        match Scalar::promote(self, o) {
            None => match (self, o) {
                (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a.add(b)),
                _ => unreachable!(),
            },
            Some((a, b)) => Scalar::Ball(a.add(&b)),
        }
    }

    pub fn sub(&self, o: &Scalar) -> Scalar {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Exact(g) => Scalar::Exact(g.neg()),
            Scalar::Ball(b) => Scalar::Ball(b.neg()),
        }
    }

    pub fn mul(&self, o: &Scalar) -> Scalar {
        match Scalar::promote(self, o) {
            None => match (self, o) {
                (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a.mul(b)),
                _ => unreachable!(),
            },
            Some((a, b)) => Scalar::Ball(a.mul(&b)),
        }
    }

    pub fn div(&self, o: &Scalar) -> Result<Scalar> {
        match Scalar::promote(self, o) {
            None => match (self, o) {
                (Scalar::Exact(a), Scalar::Exact(b)) => Ok(Scalar::Exact(a.div(b)?)),
                _ => unreachable!(),
            },
            Some((a, b)) => Ok(Scalar::Ball(a.div(&b)?)),
        }
    }

    pub fn conj(&self) -> Scalar {
        match self {
            Scalar::Exact(g) => Scalar::Exact(g.conj()),
            Scalar::Ball(b) => Scalar::Ball(Ball {
                re: b.re.clone(),
                im: -b.im.clone(),
                rad: b.rad.clone(),
                prec: b.prec,
            }),
        }
    }

    pub fn pow(&self, mut k: u32) -> Scalar {
        let mut base = self.clone();
        let mut acc = Scalar::one();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Principal square root. Stays exact when the input is an exact
    /// nonnegative rational with a rational square root.
    pub fn sqrt(&self, prec: u32) -> Result<Scalar> {
        if let Scalar::Exact(g) = self {
            if g.is_real() && !g.re.is_negative() {
                if let Some(s) = rational_sqrt_exact(&g.re) {
                    return Ok(Scalar::from_rational(s));
                }
            }
        }
        Ok(Scalar::Ball(self.to_ball(prec).sqrt()?))
    }

    /// Some(true): certainly nonzero. Some(false): certainly zero.
    /// None: a ball straddling zero, undecidable at this precision.
    pub fn nonzero_certified(&self) -> Option<bool> {
        match self {
            Scalar::Exact(g) => Some(!g.is_zero()),
            Scalar::Ball(b) => {
                if b.mid_abs_lower() > b.rad {
                    Some(true)
                } else if b.rad.is_zero() {
                    Some(false)
                } else {
                    None
                }
            }
        }
    }

    pub fn is_zero_exact(&self) -> bool {
        self.nonzero_certified() == Some(false)
    }

    /// Sign of a structurally real scalar, when certifiable.
    pub fn sign_certified(&self) -> Option<Ordering> {
        match self {
            Scalar::Exact(g) => {
                if !g.is_real() {
                    return None;
                }
                Some(g.re.cmp(&BigRational::zero()))
            }
            Scalar::Ball(b) => {
                if !b.im.is_zero() {
                    return None;
                }
                if b.re.abs() > b.rad {
                    Some(b.re.cmp(&BigRational::zero()))
                } else if b.rad.is_zero() {
                    Some(Ordering::Equal)
                } else {
                    None
                }
            }
        }
    }

    /// Midpoint components, exact rationals.
    pub fn mid(&self) -> (BigRational, BigRational) {
        match self {
            Scalar::Exact(g) => (g.re.clone(), g.im.clone()),
            Scalar::Ball(b) => (b.re.clone(), b.im.clone()),
        }
    }

    pub fn rad(&self) -> BigRational {
        match self {
            Scalar::Exact(_) => BigRational::zero(),
            Scalar::Ball(b) => b.rad.clone(),
        }
    }

    pub fn abs_upper(&self) -> BigRational {
        match self {
            Scalar::Exact(g) => g.re.abs() + g.im.abs(),
            Scalar::Ball(b) => b.abs_upper(),
        }
    }

    pub fn abs_lower(&self) -> BigRational {
        match self {
            Scalar::Exact(g) => {
                if g.re.abs() >= g.im.abs() {
                    g.re.abs()
                } else {
                    g.im.abs()
                }
            }
            Scalar::Ball(b) => b.abs_lower(),
        }
    }

    /// Deterministic order by (re, im) of midpoints.
    pub fn cmp_mid_lex(&self, o: &Scalar) -> Ordering {
        let (ar, ai) = self.mid();
        let (br, bi) = o.mid();
        ar.cmp(&br).then_with(|| ai.cmp(&bi))
    }

    /// True if the other scalar's value set intersects this one's
    /// (treating exact values as points).
    pub fn overlaps(&self, o: &Scalar) -> bool {
        let d = self.sub(o);
        d.nonzero_certified() != Some(true)
    }

    pub fn to_c64(&self) -> Complex64 {
        match self {
            Scalar::Exact(g) => g.to_c64(),
            Scalar::Ball(b) => b.to_c64(),
        }
    }

    /// Round an f64 pair to an exact dyadic Gaussian rational.
    pub fn from_c64_dyadic(z: Complex64, frac_bits: u32) -> Scalar {
        let scale = (1u64 << frac_bits.min(52)) as f64;
        let re = (z.re * scale).round();
        let im = (z.im * scale).round();
        let den = BigInt::from(1u64 << frac_bits.min(52));
        Scalar::Exact(GaussRat::new(
            BigRational::new(BigInt::from(re as i128), den.clone()),
            BigRational::new(BigInt::from(im as i128), den),
        ))
    }
}

fn fmt_rat(q: &BigRational) -> String {
    if q.denom().is_one() {
        format!("{}", q.numer())
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(g) => {
                if g.im.is_zero() {
                    write!(f, "{}", fmt_rat(&g.re))
                } else if g.re.is_zero() {
                    write!(f, "{} i", fmt_rat(&g.im))
                } else if g.im.is_negative() {
                    write!(f, "{}-{} i", fmt_rat(&g.re), fmt_rat(&g.im.abs()))
                } else {
                    write!(f, "{}+{} i", fmt_rat(&g.re), fmt_rat(&g.im))
                }
            }
            Scalar::Ball(b) => {
                write!(
                    f,
                    "[{}{}{} i ± {} @{}]",
                    fmt_rat(&b.re),
                    if b.im.is_negative() { "-" } else { "+" },
                    fmt_rat(&b.im.abs()),
                    fmt_rat(&b.rad),
                    b.prec
                )
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_field_ops() {
        let a = Scalar::from_ratio(1, 2);
        let b = Scalar::from_ratio(1, 3);
        let s = a.add(&b);
        assert_eq!(s, Scalar::from_ratio(5, 6));
        let p = a.mul(&b);
        assert_eq!(p, Scalar::from_ratio(1, 6));
        let d = a.div(&b).unwrap();
        assert_eq!(d, Scalar::from_ratio(3, 2));
        let i2 = Scalar::i().mul(&Scalar::i());
        assert_eq!(i2, Scalar::from_int(-1));
    }

    #[test]
    fn ball_contains_exact_result() {
        let a = Scalar::from_ratio(1, 3).to_ball(64);
        let b = Scalar::from_ratio(2, 7).to_ball(64);
        let prod = a.mul(&b);
        let exact = ratio(2, 21);
        assert!((&prod.re - &exact).abs() <= prod.rad);
    }

    #[test]
    fn ball_inv_contains() {
        let a = Scalar::from_ratio(3, 1).to_ball(64);
        let inv = a.inv().unwrap();
        assert!((&inv.re - ratio(1, 3)).abs() <= inv.rad);
        assert!(inv.rad < pow2(-40));
    }

    #[test]
    fn sqrt_exact_when_perfect_square() {
        let s = Scalar::from_ratio(9, 4).sqrt(64).unwrap();
        assert_eq!(s, Scalar::from_ratio(3, 2));
        let t = Scalar::from_int(2).sqrt(96).unwrap();
        match t {
            Scalar::Ball(b) => {
                let two = big(2);
                let lo = &b.re - &b.rad;
                let hi = &b.re + &b.rad;
                assert!(&lo * &lo <= two && two <= &hi * &hi);
                assert!(b.rad < pow2(-64));
            }
            _ => panic!("expected a ball"),
        }
    }

    #[test]
    fn sqrt_negative_real_is_imaginary() {
        let s = Scalar::from_int(-4).sqrt(64).unwrap();
        let (re, im) = s.mid();
        assert!(re.is_zero());
        assert!((im - big(2)).abs() <= s.rad());
    }

    #[test]
    fn sqrt_complex_squares_back() {
        let z = Scalar::Exact(GaussRat::new(big(3), big(4))); // 3+4i = (2+i)^2
        let s = z.sqrt(96).unwrap();
        let sq = s.mul(&s);
        let diff = sq.sub(&z);
        assert_ne!(diff.nonzero_certified(), Some(true));
        let (re, im) = s.mid();
        assert!((re - big(2)).abs() < pow2(-20));
        assert!((im - big(1)).abs() < pow2(-20));
    }

    #[test]
    fn certification_verdicts() {
        assert_eq!(Scalar::from_int(5).nonzero_certified(), Some(true));
        assert_eq!(Scalar::zero().nonzero_certified(), Some(false));
        let wide = Scalar::Ball(Ball {
            re: ratio(1, 100),
            im: BigRational::zero(),
            rad: big(1),
            prec: 32,
        });
        assert_eq!(wide.nonzero_certified(), None);
    }

    #[test]
    fn lex_ordering_by_midpoint() {
        let a = Scalar::from_int(-1);
        let b = Scalar::from_int(1);
        assert_eq!(a.cmp_mid_lex(&b), Ordering::Less);
        let c = Scalar::Exact(GaussRat::new(big(0), big(-1)));
        let d = Scalar::Exact(GaussRat::new(big(0), big(1)));
        assert_eq!(c.cmp_mid_lex(&d), Ordering::Less);
    }

    #[test]
    fn rounding_keeps_error_in_radius() {
        // 1/3 has no dyadic representation; rounding error must land in rad.
        let b = Scalar::from_ratio(1, 3).to_ball(32);
        assert!((&b.re - ratio(1, 3)).abs() <= b.rad);
        assert!(!b.rad.is_zero());
        // Dyadic midpoints stay exact.
        let d = Scalar::from_ratio(3, 8).to_ball(32);
        assert_eq!(d.re, ratio(3, 8));
        assert!(d.rad.is_zero());
    }
}
