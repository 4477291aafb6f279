//! Moduli of continuity `ω(r)`, evaluated as certified enclosures.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::dyadic::Dyadic;
use crate::real::{ln_enclosure, Interval};
use crate::{Error, NumericError, Result};

/// Nonnegative constant that is either rational or the square root of one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Coefficient {
    Rational(BigRational),
    SqrtOf(BigRational),
}

impl Coefficient {
    pub fn one() -> Self {
        Coefficient::Rational(BigRational::one())
    }

    pub fn enclose(&self, prec: u32) -> Result<Interval, NumericError> {
        match self {
            Coefficient::Rational(q) => Ok(Interval::from_rational(q, prec)),
            Coefficient::SqrtOf(q) => Interval::from_rational(q, prec + 2).sqrt(prec),
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.enclose(64).map(|i| i.to_f64()).unwrap_or(f64::NAN)
    }
}

fn parse_rational(s: &str) -> Result<BigRational, NumericError> {
    let s = s.trim();
    if let Ok(q) = BigRational::from_str(s) {
        return Ok(q);
    }
    let d: Dyadic = s.parse()?;
    Ok(d.to_rational())
}

impl FromStr for Coefficient {
    type Err = NumericError;

    fn from_str(s: &str) -> Result<Self, NumericError> {
        let s = s.trim();
        let c = match s.strip_prefix("sqrt(").and_then(|r| r.strip_suffix(')')) {
            Some(inner) => Coefficient::SqrtOf(parse_rational(inner)?),
            None => Coefficient::Rational(parse_rational(s)?),
        };
        let (Coefficient::Rational(q) | Coefficient::SqrtOf(q)) = &c;
        if q.is_negative() {
            return Err(NumericError::Negative(s.to_string()));
        }
        Ok(c)
    }
}

impl TryFrom<String> for Coefficient {
    type Error = NumericError;
    fn try_from(s: String) -> Result<Self, NumericError> {
        s.parse()
    }
}

impl From<Coefficient> for String {
    fn from(c: Coefficient) -> String {
        c.to_string()
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Rational(q) => write!(f, "{q}"),
            Coefficient::SqrtOf(q) => write!(f, "sqrt({q})"),
        }
    }
}

/// Exponent `p/q ∈ (0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Exponent {
    p: u32,
    q: u32,
}

impl Exponent {
    pub fn new(p: u32, q: u32) -> Result<Self, NumericError> {
        if p == 0 || q == 0 || p > q {
            return Err(NumericError::Domain(format!("exponent {p}/{q} must lie in (0, 1]")));
        }
        let g = num_integer::gcd(p, q);
        Ok(Exponent { p: p / g, q: q / g })
    }

    pub fn one() -> Self {
        Exponent { p: 1, q: 1 }
    }

    pub fn numer(&self) -> u32 {
        self.p
    }

    pub fn denom(&self) -> u32 {
        self.q
    }

    pub fn is_one(&self) -> bool {
        self.p == self.q
    }

    pub fn to_f64(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(BigInt::from(self.p), BigInt::from(self.q))
    }

    /// `x^{α/k}` for `x ≥ 0`.
    pub fn pow(&self, x: &Interval, k: u32, prec: u32) -> Result<Interval, NumericError> {
        if x.hi().is_zero() {
            return Ok(Interval::zero());
        }
        x.pow_ratio(self.p, self.q * k, prec)
    }
}

impl FromStr for Exponent {
    type Err = NumericError;

    fn from_str(s: &str) -> Result<Self, NumericError> {
        let q = parse_rational(s)?;
        let (n, d) = (q.numer(), q.denom());
        let p = u32::try_from(n).map_err(|_| NumericError::Domain(format!("exponent {s}")))?;
        let q = u32::try_from(d).map_err(|_| NumericError::Domain(format!("exponent {s}")))?;
        Exponent::new(p, q)
    }
}

impl TryFrom<String> for Exponent {
    type Error = NumericError;
    fn try_from(s: String) -> Result<Self, NumericError> {
        s.parse()
    }
}

impl From<Exponent> for String {
    fn from(e: Exponent) -> String {
        e.to_string()
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.q == 1 {
            write!(f, "{}", self.p)
        } else {
            write!(f, "{}/{}", self.p, self.q)
        }
    }
}

/// Breakpoint of the logarithmic moduli; beyond it they continue linearly
/// through the origin, which keeps them nondecreasing and finite for all `r`.
pub fn log_breakpoint() -> Dyadic {
    Dyadic::pow2(-4)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModulusSpec {
    /// `ω ≡ 0` (constant functions).
    Zero,
    /// `λ r`.
    Lipschitz { lambda: Coefficient },
    /// `λ r^α`.
    Holder { lambda: Coefficient, alpha: Exponent },
    /// `1 / ln(1/r)` for `r ≤ 1/16`.
    LogType,
    /// `(1 / ln(1/r))^{1/d}` for `r ≤ 1/16`.
    LogPowerType { d: u32 },
    /// `r^{α/d}`.
    HolderOverD { alpha: Exponent, d: u32 },
    /// Piecewise linear through `(0,0)` and the given `(r, ω)` breakpoints,
    /// constant after the last one.
    Table { points: Vec<(Dyadic, Dyadic)> },
    /// `ω_inner(factor · r)`.
    Scaled { inner: Box<ModulusSpec>, factor: Dyadic },
}

impl ModulusSpec {
    pub fn lipschitz(lambda: Coefficient) -> Self {
        ModulusSpec::Lipschitz { lambda }
    }

    pub fn holder(lambda: Coefficient, alpha: Exponent) -> Self {
        ModulusSpec::Holder { lambda, alpha }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModulusSpec::Zero => "zero",
            ModulusSpec::Lipschitz { .. } => "lipschitz",
            ModulusSpec::Holder { .. } => "holder",
            ModulusSpec::LogType => "log_type",
            ModulusSpec::LogPowerType { .. } => "log_power_type",
            ModulusSpec::HolderOverD { .. } => "holder_over_d",
            ModulusSpec::Table { .. } => "table",
            ModulusSpec::Scaled { .. } => "scaled",
        }
    }

    /// Structural checks plus sampled monotonicity.
    pub fn validate(&self) -> Result<()> {
        match self {
            ModulusSpec::LogPowerType { d } | ModulusSpec::HolderOverD { d, .. } if *d == 0 => {
                return Err(Error::Modulus("d must be positive".into()));
            }
            ModulusSpec::Table { points } => {
                let mut prev = (Dyadic::zero(), Dyadic::zero());
                for (r, w) in points {
                    if *r <= prev.0 || *w < prev.1 {
                        return Err(Error::Modulus(format!(
                            "table breakpoints must have increasing r > 0 and nondecreasing ω (at r = {r})"
                        )));
                    }
                    prev = (r.clone(), w.clone());
                }
            }
            ModulusSpec::Scaled { inner, factor } => {
                if factor.signum() <= 0 {
                    return Err(Error::Modulus("scale factor must be positive".into()));
                }
                inner.validate()?;
            }
            _ => {}
        }
        let zero = self.eval(&Dyadic::zero(), 32)?;
        if !zero.is_point() || !zero.lo().is_zero() {
            return Err(Error::Modulus("ω(0) must be 0".into()));
        }
        let mut prev = zero;
        for k in 1..=64i64 {
            let r = Dyadic::from_int(k).shift(-4);
            let cur = self.eval(&r, 32)?;
            if cur.lo().is_negative() || cur.hi() < prev.lo() {
                return Err(Error::Modulus(format!("ω is not nondecreasing near r = {r}")));
            }
            prev = cur;
        }
        Ok(())
    }

    /// Enclosure of `ω(r)` for a single `r ≥ 0`.
    pub fn eval(&self, r: &Dyadic, prec: u32) -> Result<Interval> {
        if r.is_negative() {
            return Err(Error::Modulus(format!("negative radius {r}")));
        }
        let work = prec + 8;
        let pt = Interval::point(r.clone());
        let out = match self {
            ModulusSpec::Zero => Interval::zero(),
            ModulusSpec::Lipschitz { lambda } => lambda.enclose(work)?.mul(&pt),
            ModulusSpec::Holder { lambda, alpha } => {
                lambda.enclose(work)?.mul(&alpha.pow(&pt, 1, work)?)
            }
            ModulusSpec::LogType => log_type(r, work)?,
            ModulusSpec::LogPowerType { d } => {
                let v = log_type(r, work)?;
                if v.hi().is_zero() {
                    v
                } else {
                    v.root(*d, work)?
                }
            }
            ModulusSpec::HolderOverD { alpha, d } => alpha.pow(&pt, *d, work)?,
            ModulusSpec::Table { points } => table(points, r, work),
            ModulusSpec::Scaled { inner, factor } => inner.eval(&(factor * r), work)?,
        };
        Ok(out.round_out(prec))
    }

    /// Enclosure of `ω` over an enclosure of its argument (monotonicity).
    pub fn eval_interval(&self, r: &Interval, prec: u32) -> Result<Interval> {
        let lo = self.eval(&r.lo().clone().max(Dyadic::zero()), prec)?;
        let hi = self.eval(r.hi(), prec)?;
        Ok(Interval::new(lo.lo().clone(), hi.hi().clone())?)
    }

    /// Certified dyadic upper bound of `ω` over `r`, with `frac_bits` bits.
    pub fn upper(&self, r: &Interval, frac_bits: u32) -> Result<Dyadic> {
        let v = self.eval_interval(r, frac_bits + 8)?;
        Ok(v.hi().round(frac_bits as i64, crate::Rounding::Ceil))
    }

    pub fn eval_f64(&self, r: f64) -> Result<f64> {
        let r = Dyadic::from_f64(r)?;
        Ok(self.eval(&r, 64)?.to_f64())
    }
}

fn log_type(r: &Dyadic, prec: u32) -> Result<Interval> {
    if r.is_zero() {
        return Ok(Interval::zero());
    }
    let r0 = log_breakpoint();
    let at = |x: &Dyadic| -> Result<Interval> {
        // 1/ln(1/x) = −1/ln x on (0, 1).
        let ln = ln_enclosure(x, prec + 8)?;
        Ok(ln.neg().recip(prec + 4)?)
    };
    if *r <= r0 {
        at(r)
    } else {
        Ok(at(&r0)?.scale(r).shift(4))
    }
}

fn table(points: &[(Dyadic, Dyadic)], r: &Dyadic, prec: u32) -> Interval {
    let mut prev = (Dyadic::zero(), Dyadic::zero());
    for (x, w) in points {
        if r <= x {
            let t = (r - &prev.0).to_rational() / (x - &prev.0).to_rational();
            let v = prev.1.to_rational() + t * (w - &prev.1).to_rational();
            return Interval::from_rational(&v, prec);
        }
        prev = (x.clone(), w.clone());
    }
    Interval::point(prev.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dy(m: i64, e: i64) -> Dyadic {
        Dyadic::new(BigInt::from(m), e)
    }

    #[test]
    fn coefficient_parsing() {
        let c: Coefficient = "3/4".parse().unwrap();
        assert_eq!(c.to_string(), "3/4");
        let s: Coefficient = "sqrt(1/2)".parse().unwrap();
        assert!((s.to_f64() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!("-1".parse::<Coefficient>().is_err());
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, "\"sqrt(1/2)\"");
        assert_eq!(serde_json::from_str::<Coefficient>(&json).unwrap(), s);
    }

    #[test]
    fn exponent_parsing() {
        let e: Exponent = "2/4".parse().unwrap();
        assert_eq!((e.numer(), e.denom()), (1, 2));
        assert!("3/2".parse::<Exponent>().is_err());
        assert!("0".parse::<Exponent>().is_err());
        assert!("1".parse::<Exponent>().unwrap().is_one());
    }

    #[test]
    fn lipschitz_and_holder_values() {
        let lip = ModulusSpec::lipschitz(Coefficient::one());
        assert_eq!(lip.eval(&dy(1, -2), 32).unwrap(), Interval::point(dy(1, -2)));
        let h = ModulusSpec::holder(Coefficient::one(), "1/2".parse().unwrap());
        assert_eq!(h.eval(&dy(1, -2), 32).unwrap(), Interval::point(dy(1, -1)));
        let v = h.eval(&Dyadic::from_int(2), 40).unwrap();
        assert!(v.width() <= dy(1, -39));
        assert!((v.to_f64() - 2f64.sqrt()).abs() < 1e-10);
        assert_eq!(ModulusSpec::Zero.eval(&Dyadic::from_int(5), 8).unwrap(), Interval::zero());
    }

    #[test]
    fn log_types() {
        let m = ModulusSpec::LogType;
        let r = 1e-3;
        assert!((m.eval_f64(r).unwrap() - 1.0 / (1.0f64 / r).ln()).abs() < 1e-12);
        let at0 = 1.0 / 16f64.ln();
        assert!((m.eval_f64(0.5).unwrap() - at0 * 8.0).abs() < 1e-12);
        let p1 = ModulusSpec::LogPowerType { d: 1 };
        assert!((p1.eval_f64(0.01).unwrap() - m.eval_f64(0.01).unwrap()).abs() < 1e-15);
        let p3 = ModulusSpec::LogPowerType { d: 3 };
        assert!((p3.eval_f64(0.01).unwrap() - m.eval_f64(0.01).unwrap().cbrt()).abs() < 1e-12);
        for spec in [m, p1, p3, ModulusSpec::HolderOverD { alpha: Exponent::one(), d: 2 }] {
            spec.validate().unwrap();
        }
    }

    #[test]
    fn table_and_scaled() {
        let t = ModulusSpec::Table {
            points: vec![(dy(1, -1), dy(1, -1)), (Dyadic::one(), dy(3, -2))],
        };
        t.validate().unwrap();
        assert_eq!(t.eval(&dy(1, -2), 16).unwrap(), Interval::point(dy(1, -2)));
        assert_eq!(t.eval(&dy(3, -2), 16).unwrap(), Interval::point(dy(5, -3)));
        assert_eq!(t.eval(&Dyadic::from_int(7), 16).unwrap(), Interval::point(dy(3, -2)));
        let bad = ModulusSpec::Table {
            points: vec![(dy(1, -1), dy(1, -1)), (Dyadic::one(), dy(1, -2))],
        };
        assert!(bad.validate().is_err());
        let s = ModulusSpec::Scaled {
            inner: Box::new(ModulusSpec::lipschitz(Coefficient::one())),
            factor: Dyadic::from_int(4),
        };
        assert_eq!(s.eval(&dy(1, -3), 16).unwrap(), Interval::point(dy(1, -1)));
    }

    #[test]
    fn json_shape() {
        let m = ModulusSpec::holder("2".parse().unwrap(), "1/2".parse().unwrap());
        let j = serde_json::to_value(&m).unwrap();
        assert_eq!(j, serde_json::json!({"kind": "holder", "lambda": "2", "alpha": "1/2"}));
        assert_eq!(serde_json::from_value::<ModulusSpec>(j).unwrap(), m);
    }

    proptest! {
        #[test]
        fn enclosures_are_monotone(a in 0i64..2000, b in 0i64..2000) {
            let (lo, hi) = (a.min(b), a.max(b));
            let specs = [
                ModulusSpec::lipschitz("sqrt(2)".parse().unwrap()),
                ModulusSpec::holder(Coefficient::one(), "2/3".parse().unwrap()),
                ModulusSpec::LogType,
                ModulusSpec::LogPowerType { d: 2 },
            ];
            for s in &specs {
                let x = s.eval(&dy(lo, -10), 40).unwrap();
                let y = s.eval(&dy(hi, -10), 40).unwrap();
                prop_assert!(x.lo() <= y.hi());
                prop_assert!(!x.lo().is_negative());
            }
        }
    }
}
