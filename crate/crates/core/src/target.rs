//! Target functions and the builtin registry.
//!
//! Targets are queried at exact rational points and answer with certified
//! enclosures, so corner values `β/K` are handled exactly even when `K` is not
//! a power of two.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::dyadic::Dyadic;
use crate::modulus::{Coefficient, Exponent, ModulusSpec};
use crate::real::Interval;
use crate::{Error, Result};

pub trait TargetFunction: Send + Sync {
    /// Identifier recorded in certificates, e.g. `mean` or `spike:alpha=1/2`.
    fn id(&self) -> String;
    fn dim(&self) -> usize;
    /// Declared modulus of continuity on the target's domain (trusted).
    fn modulus(&self) -> &ModulusSpec;
    /// Enclosure of `f(x)` with width about `2^{-prec}`.
    fn enclose(&self, x: &[BigRational], prec: u32) -> Result<Interval>;

    fn enclose_dyadic(&self, x: &[Dyadic], prec: u32) -> Result<Interval> {
        let q: Vec<BigRational> = x.iter().map(Dyadic::to_rational).collect();
        self.enclose(&q, prec)
    }

    fn eval_f64(&self, x: &[f64]) -> Result<f64> {
        let q = x
            .iter()
            .map(|v| Dyadic::from_f64(*v).map(|d| d.to_rational()))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(self.enclose(&q, 64)?.to_f64())
    }
}

impl<T: TargetFunction + ?Sized> TargetFunction for Arc<T> {
    fn id(&self) -> String {
        (**self).id()
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn modulus(&self) -> &ModulusSpec {
        (**self).modulus()
    }
    fn enclose(&self, x: &[BigRational], prec: u32) -> Result<Interval> {
        (**self).enclose(x, prec)
    }
}

fn check_dim(x: &[BigRational], d: usize) -> Result<()> {
    if x.len() != d {
        return Err(Error::Dimension(format!("target expects {d} coordinates, got {}", x.len())));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BuiltinKind {
    /// `Σ x_j / d`.
    Mean,
    /// `∏ x_j`.
    Product,
    /// `min_j x_j`.
    Min,
    /// `‖x − c‖₂^α`.
    Spike { center: Vec<BigRational>, alpha: Exponent },
    /// Constant value.
    Const { value: BigRational },
}

#[derive(Clone, Debug)]
pub struct Builtin {
    kind: BuiltinKind,
    d: usize,
    modulus: ModulusSpec,
}

impl Builtin {
    pub fn kind(&self) -> &BuiltinKind {
        &self.kind
    }
}

impl TargetFunction for Builtin {
    fn id(&self) -> String {
        match &self.kind {
            BuiltinKind::Mean => "mean".into(),
            BuiltinKind::Product => "product".into(),
            BuiltinKind::Min => "min".into(),
            BuiltinKind::Spike { center, alpha } => {
                let c: Vec<String> = center.iter().map(|c| c.to_string()).collect();
                format!("spike:alpha={alpha},c={}", c.join(";"))
            }
            BuiltinKind::Const { value } => format!("const:value={value}"),
        }
    }

    fn dim(&self) -> usize {
        self.d
    }

    fn modulus(&self) -> &ModulusSpec {
        &self.modulus
    }

    fn enclose(&self, x: &[BigRational], prec: u32) -> Result<Interval> {
        check_dim(x, self.d)?;
        let exact = match &self.kind {
            BuiltinKind::Mean => x.iter().sum::<BigRational>() / BigInt::from(self.d),
            BuiltinKind::Product => x.iter().product(),
            BuiltinKind::Min => x.iter().min().cloned().unwrap_or_else(BigRational::zero),
            BuiltinKind::Const { value } => value.clone(),
            BuiltinKind::Spike { center, alpha } => {
                let sq: BigRational = x
                    .iter()
                    .zip(center)
                    .map(|(a, c)| (a - c) * (a - c))
                    .sum();
                let work = prec + 8;
                let base = Interval::from_rational(&sq, 2 * work + 16);
                return Ok(alpha.pow(&base, 2, work)?.round_out(prec));
            }
        };
        Ok(Interval::from_rational(&exact, prec))
    }
}

/// Closure-backed target for callers with their own functions.
pub struct FnTarget<F> {
    id: String,
    d: usize,
    modulus: ModulusSpec,
    f: F,
}

impl<F> FnTarget<F>
where
    F: Fn(&[BigRational], u32) -> Result<Interval> + Send + Sync,
{
    pub fn new(id: impl Into<String>, d: usize, modulus: ModulusSpec, f: F) -> Self {
        FnTarget {
            id: id.into(),
            d,
            modulus,
            f,
        }
    }
}

impl<F> TargetFunction for FnTarget<F>
where
    F: Fn(&[BigRational], u32) -> Result<Interval> + Send + Sync,
{
    fn id(&self) -> String {
        self.id.clone()
    }
    fn dim(&self) -> usize {
        self.d
    }
    fn modulus(&self) -> &ModulusSpec {
        &self.modulus
    }
    fn enclose(&self, x: &[BigRational], prec: u32) -> Result<Interval> {
        check_dim(x, self.d)?;
        (self.f)(x, prec)
    }
}

impl<F> fmt::Debug for FnTarget<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnTarget").field("id", &self.id).field("d", &self.d).finish()
    }
}

/// `x ↦ f(2M(x − 1/2))`: a target on `[−M, M]^d` pulled back to the unit cube.
/// The modulus scales as `ω(2M r)`.
pub struct DomainAdapter<T> {
    inner: T,
    half_width: Dyadic,
    modulus: ModulusSpec,
}

impl<T: TargetFunction> DomainAdapter<T> {
    pub fn new(inner: T, half_width: Dyadic) -> Result<Self> {
        if half_width.signum() <= 0 {
            return Err(Error::InvalidArgument(format!("half-width {half_width} must be positive")));
        }
        let modulus = ModulusSpec::Scaled {
            inner: Box::new(inner.modulus().clone()),
            factor: half_width.shift(1),
        };
        Ok(DomainAdapter {
            inner,
            half_width,
            modulus,
        })
    }

    pub fn half_width(&self) -> &Dyadic {
        &self.half_width
    }
}

impl<T: TargetFunction> TargetFunction for DomainAdapter<T> {
    fn id(&self) -> String {
        self.inner.id()
    }
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn modulus(&self) -> &ModulusSpec {
        &self.modulus
    }
    fn enclose(&self, x: &[BigRational], prec: u32) -> Result<Interval> {
        let two_m = self.half_width.shift(1).to_rational();
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let y: Vec<BigRational> = x.iter().map(|v| &two_m * (v - &half)).collect();
        self.inner.enclose(&y, prec)
    }
}

/// Registry entry describing a builtin target.
#[derive(Clone, Debug, Serialize)]
pub struct TargetSpec {
    pub name: &'static str,
    pub parameters: &'static str,
    pub formula: &'static str,
    pub modulus: &'static str,
}

pub fn registry() -> Vec<TargetSpec> {
    vec![
        TargetSpec {
            name: "mean",
            parameters: "",
            formula: "sum_j x_j / d",
            modulus: "lipschitz, lambda = 1/sqrt(d)",
        },
        TargetSpec {
            name: "product",
            parameters: "",
            formula: "prod_j x_j",
            modulus: "lipschitz, lambda = sqrt(d) * max(1, M)^(d-1) on [-M, M]^d",
        },
        TargetSpec {
            name: "min",
            parameters: "",
            formula: "min_j x_j",
            modulus: "lipschitz, lambda = 1",
        },
        TargetSpec {
            name: "spike",
            parameters: "alpha (default 1/2), c (default 1/2, or c1;c2;...)",
            formula: "||x - c||_2^alpha",
            modulus: "holder, lambda = 1",
        },
        TargetSpec {
            name: "const",
            parameters: "value (default 0)",
            formula: "value",
            modulus: "zero",
        },
    ]
}

fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    s.parse::<BigRational>()
        .ok()
        .or_else(|| s.parse::<Dyadic>().ok().map(|d| d.to_rational()))
        .ok_or_else(|| Error::InvalidArgument(format!("cannot parse {s:?} as a rational")))
}

/// Resolves `name` or `name:key=value,...` for dimension `d`. `half_width`
/// is the `M` of the intended domain `[−M, M]^d` (default: the unit cube),
/// which only affects the product's Lipschitz constant.
pub fn lookup(spec: &str, d: usize, half_width: Option<&Dyadic>) -> Result<Builtin> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let (name, params) = match spec.split_once(':') {
        Some((n, p)) => (n.trim(), p),
        None => (spec.trim(), ""),
    };
    let mut kv = Vec::new();
    for item in params.split(',').filter(|s| !s.trim().is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::InvalidArgument(format!("expected key=value, got {item:?}")))?;
        kv.push((k.trim().to_string(), v.trim().to_string()));
    }
    let get = |key: &str| kv.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
    let allow = |keys: &[&str]| -> Result<()> {
        match kv.iter().find(|(k, _)| !keys.contains(&k.as_str())) {
            Some((k, _)) => Err(Error::InvalidArgument(format!("unknown parameter {k:?} for {name}"))),
            None => Ok(()),
        }
    };
    let dd = BigInt::from(d);
    let (kind, modulus) = match name {
        "mean" => {
            allow(&[])?;
            let lambda = Coefficient::SqrtOf(BigRational::new(BigInt::one(), dd));
            (BuiltinKind::Mean, ModulusSpec::lipschitz(lambda))
        }
        "product" => {
            allow(&[])?;
            let m = half_width
                .map(|m| m.to_rational())
                .filter(|m| *m > BigRational::one())
                .unwrap_or_else(BigRational::one);
            let m2 = num_traits::pow(m.clone() * m, d - 1);
            let lambda = Coefficient::SqrtOf(BigRational::from(dd) * m2);
            (BuiltinKind::Product, ModulusSpec::lipschitz(lambda))
        }
        "min" => {
            allow(&[])?;
            (BuiltinKind::Min, ModulusSpec::lipschitz(Coefficient::one()))
        }
        "spike" => {
            allow(&["alpha", "c"])?;
            let alpha: Exponent = get("alpha")
                .unwrap_or("1/2")
                .parse()
                .map_err(|e| Error::InvalidArgument(format!("alpha: {e}")))?;
            let center = match get("c") {
                None => vec![BigRational::new(BigInt::one(), BigInt::from(2)); d],
                Some(c) => {
                    let parts = c.split(';').map(parse_rational).collect::<Result<Vec<_>>>()?;
                    match parts.len() {
                        1 => vec![parts[0].clone(); d],
                        n if n == d => parts,
                        n => {
                            return Err(Error::Dimension(format!(
                                "center has {n} coordinates, dimension is {d}"
                            )))
                        }
                    }
                }
            };
            (
                BuiltinKind::Spike { center, alpha },
                ModulusSpec::holder(Coefficient::one(), alpha),
            )
        }
        "const" => {
            allow(&["value"])?;
            let value = match get("value") {
                Some(v) => parse_rational(v)?,
                None => BigRational::zero(),
            };
            (BuiltinKind::Const { value }, ModulusSpec::Zero)
        }
        other => return Err(Error::UnknownTarget(other.to_string())),
    };
    Ok(Builtin { kind, d, modulus })
}
