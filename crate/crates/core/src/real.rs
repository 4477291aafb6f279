//! Certified enclosures of real numbers.
//!
//! Quantities like `√d`, `N^{-√L}` or `ln(1/r)` never enter a network, but
//! error bounds and normalization constants depend on them. They are
//! evaluated as [`Interval`]s with dyadic endpoints that are guaranteed to
//! contain the true value; every inexact step rounds outward.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::dyadic::{Dyadic, Rounding};
use crate::NumericError;

/// Anything that can produce a certified enclosure of itself at a requested
/// precision (in fractional bits). Enclosure width should shrink roughly
/// like `2^{-prec}`, though callers only rely on containment.
pub trait RealValue {
    fn enclose(&self, prec: u32) -> Result<Interval, NumericError>;
}

/// Closed interval `[lo, hi]` with dyadic endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    lo: Dyadic,
    hi: Dyadic,
}

impl Interval {
    pub fn new(lo: Dyadic, hi: Dyadic) -> Result<Self, NumericError> {
        if lo > hi {
            return Err(NumericError::Domain(format!("empty interval [{lo}, {hi}]")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn point(x: Dyadic) -> Self {
        Interval {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn zero() -> Self {
        Self::point(Dyadic::zero())
    }

    pub fn from_rational(q: &BigRational, prec: u32) -> Self {
        let p = prec as i64;
        Interval {
            lo: Dyadic::from_rational(q, p, Rounding::Floor),
            hi: Dyadic::from_rational(q, p, Rounding::Ceil),
        }
    }

    pub fn lo(&self) -> &Dyadic {
        &self.lo
    }

    pub fn hi(&self) -> &Dyadic {
        &self.hi
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> Dyadic {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Dyadic {
        (&self.lo + &self.hi).shift(-1)
    }

    pub fn contains(&self, x: &Dyadic) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    /// Outward rounding onto the `2^{-prec}` grid.
    pub fn round_out(&self, prec: u32) -> Self {
        let p = prec as i64;
        Interval {
            lo: self.lo.round(p, Rounding::Floor),
            hi: self.hi.round(p, Rounding::Ceil),
        }
    }

    pub fn add(&self, o: &Interval) -> Interval {
        Interval {
            lo: &self.lo + &o.lo,
            hi: &self.hi + &o.hi,
        }
    }

    pub fn sub(&self, o: &Interval) -> Interval {
        Interval {
            lo: &self.lo - &o.hi,
            hi: &self.hi - &o.lo,
        }
    }

    pub fn neg(&self) -> Interval {
        Interval {
            lo: -&self.hi,
            hi: -&self.lo,
        }
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        let c = [
            &self.lo * &o.lo,
            &self.lo * &o.hi,
            &self.hi * &o.lo,
            &self.hi * &o.hi,
        ];
        let lo = c.iter().min().cloned().unwrap_or_default();
        let hi = c.iter().max().cloned().unwrap_or_default();
        Interval { lo, hi }
    }

    pub fn scale(&self, k: &Dyadic) -> Interval {
        self.mul(&Interval::point(k.clone()))
    }

    pub fn shift(&self, k: i64) -> Interval {
        Interval {
            lo: self.lo.shift(k),
            hi: self.hi.shift(k),
        }
    }

    /// Intersection with `[lo, hi]`; errors when disjoint.
    pub fn clamp(&self, lo: &Dyadic, hi: &Dyadic) -> Result<Interval, NumericError> {
        Interval::new(self.lo.clone().max(lo.clone()), self.hi.clone().min(hi.clone()))
    }

    pub fn recip(&self, prec: u32) -> Result<Interval, NumericError> {
        if self.lo.signum() <= 0 && self.hi.signum() >= 0 {
            return Err(NumericError::Domain("reciprocal of an interval containing 0".into()));
        }
        let p = prec as i64;
        let inv = |x: &Dyadic, mode| {
            let q = BigRational::one() / x.to_rational();
            Dyadic::from_rational(&q, p, mode)
        };
        Ok(Interval {
            lo: inv(&self.hi, Rounding::Floor),
            hi: inv(&self.lo, Rounding::Ceil),
        })
    }

    pub fn div(&self, o: &Interval, prec: u32) -> Result<Interval, NumericError> {
        if o.is_point() && self.is_point() {
            let q = self.lo.to_rational() / o.lo.to_rational();
            return Ok(Interval::from_rational(&q, prec));
        }
        Ok(self.mul(&o.recip(prec + 8)?).round_out(prec))
    }

    pub fn powi(&self, k: u32) -> Interval {
        if k == 0 {
            return Interval::point(Dyadic::one());
        }
        let pw = |x: &Dyadic| (0..k).fold(Dyadic::one(), |acc, _| &acc * x);
        let (a, b) = (pw(&self.lo), pw(&self.hi));
        if k % 2 == 1 || self.lo.signum() >= 0 {
            Interval { lo: a, hi: b }
        } else if self.hi.signum() <= 0 {
            Interval { lo: b, hi: a }
        } else {
            Interval {
                lo: Dyadic::zero(),
                hi: a.max(b),
            }
        }
    }

    /// `x^{1/n}` for `x >= 0`.
    pub fn root(&self, n: u32, prec: u32) -> Result<Interval, NumericError> {
        if self.lo.is_negative() {
            return Err(NumericError::Domain(format!("root of negative value {}", self.lo)));
        }
        Ok(Interval {
            lo: root_rounded(&self.lo.to_rational(), n, prec, Rounding::Floor),
            hi: root_rounded(&self.hi.to_rational(), n, prec, Rounding::Ceil),
        })
    }

    pub fn sqrt(&self, prec: u32) -> Result<Interval, NumericError> {
        self.root(2, prec)
    }

    /// `x^{p/q}` for `x >= 0`, exact whenever the endpoints are perfect powers.
    pub fn pow_ratio(&self, p: u32, q: u32, prec: u32) -> Result<Interval, NumericError> {
        if q == 0 {
            return Err(NumericError::Domain("zero denominator in exponent".into()));
        }
        self.powi(p).root(q, prec)
    }

    pub fn ln(&self, prec: u32) -> Result<Interval, NumericError> {
        if self.lo.signum() <= 0 {
            return Err(NumericError::Domain(format!("ln of non-positive value {}", self.lo)));
        }
        let lo = ln_enclosure(&self.lo, prec)?.lo;
        let hi = ln_enclosure(&self.hi, prec)?.hi;
        Ok(Interval { lo, hi })
    }

    pub fn exp(&self, prec: u32) -> Interval {
        let lo = exp_enclosure(&self.lo, prec).lo;
        let hi = exp_enclosure(&self.hi, prec).hi;
        Interval { lo, hi }
    }

    pub fn max(&self, o: &Interval) -> Interval {
        Interval {
            lo: self.lo.clone().max(o.lo.clone()),
            hi: self.hi.clone().max(o.hi.clone()),
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.midpoint().to_f64()
    }
}

/// `x^{1/n}` snapped to the `2^{-prec}` grid with the given direction.
/// Floor and ceil are exact (integer root bracketing); nearest is not offered.
pub fn root_rounded(x: &BigRational, n: u32, prec: u32, mode: Rounding) -> Dyadic {
    assert!(n >= 1);
    assert!(!x.is_negative());
    if x.is_zero() {
        return Dyadic::zero();
    }
    // x · 2^{n·prec} as floor/ceil integer
    let scale = BigInt::one() << (n as usize * prec as usize);
    let scaled = x * BigRational::from_integer(scale);
    let t = match mode {
        Rounding::Floor => scaled.floor().to_integer(),
        _ => scaled.ceil().to_integer(),
    };
    let t = t.to_biguint().unwrap_or_else(BigUint::zero);
    let r = t.nth_root(n);
    let m = match mode {
        Rounding::Floor => r,
        _ => {
            if num_traits::pow(r.clone(), n as usize) == t {
                r
            } else {
                r + 1u32
            }
        }
    };
    Dyadic::new(BigInt::from(m), -(prec as i64))
}

/// `atanh(t) = Σ t^{2i+1}/(2i+1)` for rational `0 <= t <= 1/3`, summed in
/// fixed point. Every quantity is nonnegative and truncated downward, so the
/// running sum is a lower bound; the power error stays below `1/(1−t²) < 2`
/// ulps and each term adds under 3 ulps.
fn atanh_enclosure(t: &BigRational, prec: u32) -> Interval {
    let w = prec as usize + 16;
    let (a, b) = (t.numer().clone(), t.denom().clone());
    let (a2, b2) = (&a * &a, &b * &b);
    let mut power = (&a << w) / &b;
    let mut sum = BigInt::zero();
    let mut n: u64 = 0;
    while !power.is_zero() {
        sum += &power / BigInt::from(2 * n + 1);
        power = &power * &a2 / &b2;
        n += 1;
    }
    let slack = BigInt::from(3 * n + 4);
    let lo = Dyadic::new(sum.clone(), -(w as i64));
    let hi = Dyadic::new(sum + slack, -(w as i64));
    Interval { lo, hi }.round_out(prec + 2)
}

fn ln2_enclosure(prec: u32) -> Interval {
    atanh_enclosure(&BigRational::new(1.into(), 3.into()), prec + 2).shift(1)
}

/// Certified `ln y` for dyadic `y > 0`.
pub fn ln_enclosure(y: &Dyadic, prec: u32) -> Result<Interval, NumericError> {
    if y.signum() <= 0 {
        return Err(NumericError::Domain(format!("ln of non-positive value {y}")));
    }
    if *y == Dyadic::one() {
        return Ok(Interval::zero());
    }
    // y = z · 2^k with z in [1, 2)
    let k = y.mantissa().bits() as i64 - 1 + y.exponent();
    let z = y.shift(-k);
    let zr = z.to_rational();
    let t = (&zr - BigRational::one()) / (&zr + BigRational::one());
    let kbits = 64 - k.unsigned_abs().leading_zeros();
    let work = prec + kbits + 4;
    let lnz = atanh_enclosure(&t, work).shift(1);
    let ln2 = ln2_enclosure(work);
    let kk = Interval::point(Dyadic::from_int(k));
    Ok(kk.mul(&ln2).add(&lnz).round_out(prec))
}

/// Certified `exp y` for dyadic `y`: Taylor series in fixed point on
/// `|z| <= 1/2` followed by repeated squaring.
pub fn exp_enclosure(y: &Dyadic, prec: u32) -> Interval {
    if y.is_zero() {
        return Interval::point(Dyadic::one());
    }
    let mag_bits = y.mantissa().bits() as i64 + y.exponent();
    let s = (mag_bits + 1).max(0) as u32;
    let z = y.shift(-(s as i64));
    let growth = if y.is_negative() {
        0
    } else {
        (y.to_f64() * 1.5).ceil() as u32 + 2
    };
    let work = prec + 2 * s + growth + 16;
    let w = work as i64;
    // z·2^w truncated; two roundings per step and |z|/k <= 1/2 keep each
    // term within 4 ulps, and the tail after a zero term within 8.
    let zf = z.shift(w).floor().to_integer().unwrap_or_default();
    let scale = BigInt::one() << work as usize;
    let mut term = scale.clone();
    let mut sum = BigInt::zero();
    let mut k: u64 = 0;
    while !term.is_zero() {
        sum += &term;
        k += 1;
        term = ((&term * &zf) >> work as usize) / BigInt::from(k);
    }
    let slack = BigInt::from(4 * k + 16);
    let mut acc = Interval {
        lo: Dyadic::new(&sum - &slack, -w),
        hi: Dyadic::new(&sum + &slack, -w),
    };
    for _ in 0..s {
        acc = acc.mul(&acc).round_out(work);
    }
    acc.round_out(prec)
}

impl RealValue for Dyadic {
    fn enclose(&self, _prec: u32) -> Result<Interval, NumericError> {
        Ok(Interval::point(self.clone()))
    }
}

impl RealValue for BigRational {
    fn enclose(&self, prec: u32) -> Result<Interval, NumericError> {
        Ok(Interval::from_rational(self, prec))
    }
}

impl RealValue for Interval {
    fn enclose(&self, _prec: u32) -> Result<Interval, NumericError> {
        Ok(self.clone())
    }
}

/// `√q` for a nonnegative rational.
#[derive(Clone, Debug)]
pub struct Sqrt(pub BigRational);

impl RealValue for Sqrt {
    fn enclose(&self, prec: u32) -> Result<Interval, NumericError> {
        if self.0.is_negative() {
            return Err(NumericError::Domain("square root of a negative rational".into()));
        }
        Ok(Interval {
            lo: root_rounded(&self.0, 2, prec, Rounding::Floor),
            hi: root_rounded(&self.0, 2, prec, Rounding::Ceil),
        })
    }
}

/// Adapter turning a closure into a [`RealValue`].
pub struct FnReal<F>(pub F);

impl<F> RealValue for FnReal<F>
where
    F: Fn(u32) -> Result<Interval, NumericError>,
{
    fn enclose(&self, prec: u32) -> Result<Interval, NumericError> {
        (self.0)(prec)
    }
}

/// `n^{-x}` for an integer base `n >= 1` and an enclosure of `x >= 0`.
/// Exact when `x` is a point with integer value.
pub fn inverse_power(n: u64, x: &Interval, prec: u32) -> Result<Interval, NumericError> {
    if n == 0 {
        return Err(NumericError::Domain("base must be positive".into()));
    }
    if n == 1 {
        return Ok(Interval::point(Dyadic::one()));
    }
    if x.is_point() {
        if let Some(k) = x.lo().to_integer() {
            let k: u32 = k
                .try_into()
                .map_err(|_| NumericError::Domain("exponent too large".into()))?;
            let den = num_traits::pow(BigInt::from(n), k as usize);
            return Ok(Interval::from_rational(&BigRational::new(BigInt::one(), den), prec));
        }
    }
    let work = prec + 16;
    let ln_n = ln_enclosure(&Dyadic::from_int(n), work)?;
    Ok(x.mul(&ln_n).neg().round_out(work).exp(prec))
}
