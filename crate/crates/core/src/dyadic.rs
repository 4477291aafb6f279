//! Exact dyadic rationals `m · 2^e` with arbitrary-precision mantissa.
//!
//! Every weight, bias and activation value inside a network is a [`Dyadic`].
//! The set is closed under `+`, `-`, `*`, scaling by powers of two, `floor`
//! and `max`, so a forward pass never rounds. General division is not
//! offered; rationals enter only through the directed-rounding constructors
//! ([`Dyadic::from_rational`], [`round_up_dyadic`]).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::real::RealValue;
use crate::NumericError;

/// Directed rounding mode used when a value has to be snapped to a grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rounding {
    Floor,
    Ceil,
    Nearest,
}

/// `mantissa · 2^exponent`, kept in canonical form (odd mantissa, or `0·2^0`).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mantissa: BigInt,
    exponent: i64,
}

impl Dyadic {
    pub fn new(mantissa: BigInt, exponent: i64) -> Self {
        if mantissa.is_zero() {
            return Self::zero();
        }
        let tz = mantissa.trailing_zeros().unwrap_or(0);
        Dyadic {
            mantissa: mantissa >> tz,
            exponent: exponent + tz as i64,
        }
    }

    pub fn zero() -> Self {
        Dyadic {
            mantissa: BigInt::zero(),
            exponent: 0,
        }
    }

    pub fn one() -> Self {
        Dyadic::from_int(1)
    }

    pub fn from_int<T: Into<BigInt>>(v: T) -> Self {
        Dyadic::new(v.into(), 0)
    }

    /// `2^k`
    pub fn pow2(k: i64) -> Self {
        Dyadic {
            mantissa: BigInt::one(),
            exponent: k,
        }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.exponent >= 0
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }

    /// Number of fractional bits needed to write the value (0 for integers).
    pub fn frac_bits(&self) -> u64 {
        if self.exponent >= 0 {
            0
        } else {
            (-self.exponent) as u64
        }
    }

    pub fn signum(&self) -> i32 {
        match self.mantissa.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn abs(&self) -> Self {
        Dyadic {
            mantissa: self.mantissa.abs(),
            exponent: self.exponent,
        }
    }

    /// Multiplies by `2^k`.
    pub fn shift(&self, k: i64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        Dyadic {
            mantissa: self.mantissa.clone(),
            exponent: self.exponent + k,
        }
    }

    /// Greatest integer not exceeding the value.
    pub fn floor(&self) -> Self {
        if self.exponent >= 0 {
            return self.clone();
        }
        // BigInt `>>` rounds toward negative infinity.
        Dyadic::new(&self.mantissa >> ((-self.exponent) as usize), 0)
    }

    pub fn ceil(&self) -> Self {
        -(-self).floor()
    }

    pub fn relu(&self) -> Self {
        if self.is_negative() {
            Self::zero()
        } else {
            self.clone()
        }
    }

    /// The integer value, if the number is an integer.
    pub fn to_integer(&self) -> Option<BigInt> {
        if self.exponent >= 0 {
            Some(&self.mantissa << (self.exponent as usize))
        } else {
            None
        }
    }

    pub fn to_rational(&self) -> BigRational {
        if self.exponent >= 0 {
            BigRational::from_integer(&self.mantissa << (self.exponent as usize))
        } else {
            BigRational::new(
                self.mantissa.clone(),
                BigInt::one() << ((-self.exponent) as usize),
            )
        }
    }

    /// Snaps the value onto the grid `2^{-frac_bits} ℤ`.
    pub fn round(&self, frac_bits: i64, mode: Rounding) -> Self {
        if self.exponent >= -frac_bits {
            return self.clone();
        }
        let scaled = self.shift(frac_bits);
        let snapped = match mode {
            Rounding::Floor => scaled.floor(),
            Rounding::Ceil => scaled.ceil(),
            Rounding::Nearest => (scaled + Dyadic::pow2(-1)).floor(),
        };
        snapped.shift(-frac_bits)
    }

    /// Rounds a rational onto the grid `2^{-frac_bits} ℤ`. Exact when the
    /// rational already lies on the grid.
    pub fn from_rational(q: &BigRational, frac_bits: i64, mode: Rounding) -> Self {
        let (num, den) = (q.numer(), q.denom());
        let scaled_num = if frac_bits >= 0 {
            num << (frac_bits as usize)
        } else {
            num.clone()
        };
        let scaled_den = if frac_bits >= 0 {
            den.clone()
        } else {
            den << ((-frac_bits) as usize)
        };
        let m = match mode {
            Rounding::Floor => scaled_num.div_floor(&scaled_den),
            Rounding::Ceil => {
                let (q, r) = scaled_num.div_mod_floor(&scaled_den);
                if r.is_zero() {
                    q
                } else {
                    q + 1
                }
            }
            Rounding::Nearest => {
                let twice = (scaled_num << 1usize) + &scaled_den;
                twice.div_floor(&(scaled_den << 1usize))
            }
        };
        Dyadic::new(m, -frac_bits)
    }

    /// Exact conversion from a finite binary64 value.
    pub fn from_f64(x: f64) -> Result<Self, NumericError> {
        if !x.is_finite() {
            return Err(NumericError::NonFinite(x));
        }
        if x == 0.0 {
            return Ok(Self::zero());
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 1 { -1i64 } else { 1 };
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), exp - 1075)
        };
        Ok(Dyadic::new(BigInt::from(m) * sign, e))
    }

    /// Nearest binary64 (ties to even up to a sticky bit).
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let neg = self.is_negative();
        let mag = self.mantissa.magnitude();
        let bits = mag.bits() as i64;
        let (top, exp) = if bits > 64 {
            let drop = (bits - 64) as usize;
            let mut top = (mag >> drop).to_u64().unwrap_or(u64::MAX);
            // sticky bit so the u64 -> f64 rounding sees discarded ones
            if (mag.trailing_zeros().unwrap_or(0) as usize) < drop {
                top |= 1;
            }
            (top, self.exponent + drop as i64)
        } else {
            (mag.to_u64().unwrap_or(0), self.exponent)
        };
        let v = ldexp(top as f64, exp);
        if neg {
            -v
        } else {
            v
        }
    }
}

fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
        if x.is_infinite() {
            return x;
        }
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
        if x == 0.0 {
            return x;
        }
    }
    x * 2f64.powi(e as i32)
}

impl Default for Dyadic {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<i64> for Dyadic {
    fn from(v: i64) -> Self {
        Dyadic::from_int(v)
    }
}

impl From<BigInt> for Dyadic {
    fn from(v: BigInt) -> Self {
        Dyadic::new(v, 0)
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (sa, sb) = (self.signum(), other.signum());
        if sa != sb {
            return sa.cmp(&sb);
        }
        if sa == 0 {
            return Ordering::Equal;
        }
        let e = self.exponent.min(other.exponent);
        let a = &self.mantissa << ((self.exponent - e) as usize);
        let b = &other.mantissa << ((other.exponent - e) as usize);
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<'a> Add<&'a Dyadic> for &'a Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let e = self.exponent.min(rhs.exponent);
        let a = &self.mantissa << ((self.exponent - e) as usize);
        let b = &rhs.mantissa << ((rhs.exponent - e) as usize);
        Dyadic::new(a + b, e)
    }
}

impl<'a> Sub<&'a Dyadic> for &'a Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a Dyadic> for &'a Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        if self.is_zero() || rhs.is_zero() {
            return Dyadic::zero();
        }
        // product of odd mantissas is odd, already canonical
        Dyadic {
            mantissa: &self.mantissa * &rhs.mantissa,
            exponent: self.exponent + rhs.exponent,
        }
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic {
            mantissa: -&self.mantissa,
            exponent: self.exponent,
        }
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        -&self
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Dyadic> for Dyadic {
            type Output = Dyadic;
            fn $m(self, rhs: Dyadic) -> Dyadic {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a Dyadic> for Dyadic {
            type Output = Dyadic;
            fn $m(self, rhs: &Dyadic) -> Dyadic {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<Dyadic> for &'a Dyadic {
            type Output = Dyadic;
            fn $m(self, rhs: Dyadic) -> Dyadic {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl std::iter::Sum for Dyadic {
    fn sum<I: Iterator<Item = Dyadic>>(iter: I) -> Self {
        iter.fold(Dyadic::zero(), |acc, x| acc + x)
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*2^{}", self.mantissa, self.exponent)
    }
}

/// Short values print as exact decimals, long ones as `m*2^e`.
impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent >= 0 {
            return write!(f, "{}", &self.mantissa << (self.exponent as usize));
        }
        let k = (-self.exponent) as usize;
        if k > 64 {
            return write!(f, "{}*2^{}", self.mantissa, self.exponent);
        }
        // m / 2^k = m * 5^k / 10^k
        let scaled = self.mantissa.abs() * num_traits::pow(BigInt::from(5), k);
        let digits = scaled.to_string();
        let digits = format!("{:0>width$}", digits, width = k + 1);
        let (int, frac) = digits.split_at(digits.len() - k);
        let frac = frac.trim_end_matches('0');
        let sign = if self.is_negative() { "-" } else { "" };
        if frac.is_empty() {
            write!(f, "{sign}{int}")
        } else {
            write!(f, "{sign}{int}.{frac}")
        }
    }
}

/// Accepts `p/2^q`, `p*2^e`, plain integers and finite decimals that are
/// exactly dyadic (`0.375`).
impl FromStr for Dyadic {
    type Err = NumericError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || NumericError::Parse(s.to_string());
        let int = |t: &str| -> Result<BigInt, NumericError> {
            let t = t.trim();
            if t.is_empty() || !t.trim_start_matches(['-', '+']).chars().all(|c| c.is_ascii_digit()) {
                return Err(bad());
            }
            t.parse::<BigInt>().map_err(|_| bad())
        };
        if let Some((p, q)) = s.split_once("/2^") {
            let q: i64 = q.trim().parse().map_err(|_| bad())?;
            return Ok(Dyadic::new(int(p)?, -q));
        }
        if let Some((m, e)) = s.split_once("*2^") {
            let e: i64 = e.trim().parse().map_err(|_| bad())?;
            return Ok(Dyadic::new(int(m)?, e));
        }
        if let Some((ip, fp)) = s.split_once('.') {
            if fp.is_empty() || !fp.chars().all(|c| c.is_ascii_digit()) {
                return Err(bad());
            }
            let neg = ip.trim_start().starts_with('-');
            let ip_val = if ip.is_empty() || ip == "-" || ip == "+" {
                BigInt::zero()
            } else {
                int(ip)?.abs()
            };
            let k = fp.len();
            let ten_k = num_traits::pow(BigInt::from(10), k);
            let num = ip_val * &ten_k + fp.parse::<BigInt>().map_err(|_| bad())?;
            let q = BigRational::new(if neg { -num } else { num }, ten_k);
            // a decimal with k digits is dyadic iff it fits in k fractional bits
            let d = Dyadic::from_rational(&q, k as i64 * 4, Rounding::Floor);
            if d.to_rational() != q {
                return Err(NumericError::NotDyadic(s.to_string()));
            }
            return Ok(d);
        }
        Ok(Dyadic::new(int(s)?, 0))
    }
}

#[derive(Serialize, Deserialize)]
struct DyadicRepr {
    m: String,
    e: i64,
}

impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        DyadicRepr {
            m: self.mantissa.to_string(),
            e: self.exponent,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Dyadic {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = DyadicRepr::deserialize(deserializer)?;
        let digits = repr.m.strip_prefix('-').unwrap_or(&repr.m);
        if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(serde::de::Error::custom(format!(
                "malformed mantissa {:?}: expected a signed decimal integer",
                repr.m
            )));
        }
        let m: BigInt = repr.m.parse().map_err(serde::de::Error::custom)?;
        Ok(Dyadic::new(m, repr.e))
    }
}

/// Finite binary expansion `bin 0.b₁b₂…b_ℓ`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn new(bits: Vec<bool>) -> Result<Self, NumericError> {
        if bits.is_empty() {
            return Err(NumericError::EmptyBitString);
        }
        Ok(BitString(bits))
    }

    pub fn zeros(len: usize) -> Result<Self, NumericError> {
        Self::new(vec![false; len])
    }

    /// Big-endian `len`-bit expansion of the integer `value`.
    pub fn from_integer(value: &BigInt, len: usize) -> Result<Self, NumericError> {
        if value.is_negative() || value.bits() as usize > len {
            return Err(NumericError::Parse(format!("{value} does not fit in {len} bits")));
        }
        let bits = (0..len)
            .map(|k| value.bit((len - 1 - k) as u64))
            .collect();
        Self::new(bits)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    /// 1-based bit access.
    pub fn bit(&self, k: usize) -> bool {
        self.0[k - 1]
    }

    /// `Σ b_k 2^{-k}`
    pub fn value(&self) -> Dyadic {
        let mut m = BigInt::zero();
        for &b in &self.0 {
            m <<= 1usize;
            if b {
                m += 1;
            }
        }
        Dyadic::new(m, -(self.0.len() as i64))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = NumericError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bits = s
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(NumericError::Parse(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()?;
        BitString::new(bits)
    }
}

/// Smallest dyadic with at most `frac_bits` fractional bits that is `>= x`.
///
/// Enclosures of `x` are refined until the ceiling is decided. If `x` sits
/// on the grid but its enclosure never collapses (transcendental route to a
/// dyadic value), the result is one grid step above `x`.
pub fn round_up_dyadic<V: RealValue + ?Sized>(x: &V, frac_bits: u32) -> Result<Dyadic, NumericError> {
    let fb = frac_bits as i64;
    let mut last = None;
    for extra in [16u32, 48, 128, 320] {
        let enc = x.enclose(frac_bits + extra)?;
        if enc.hi().is_negative() {
            return Err(NumericError::Negative(enc.hi().to_string()));
        }
        let lo = enc.lo().round(fb, Rounding::Ceil);
        let hi = enc.hi().round(fb, Rounding::Ceil);
        if lo == hi {
            return Ok(hi.max(Dyadic::zero()));
        }
        last = Some(hi);
    }
    Ok(last.expect("loop ran").max(Dyadic::zero()))
}
