//! Closed-form error bounds.
//!
//! Every calculator returns a dyadic upper bound with `guard_bits` fractional
//! bits. Irrational ingredients (`√d`, `N^{−√L}`, `d^{α/2}`) are enclosed and
//! the final sum is rounded up, so a reported bound never understates the
//! formula it certifies.

use serde::Serialize;

use crate::dyadic::{Dyadic, Rounding};
use crate::modulus::{Coefficient, Exponent, ModulusSpec};
use crate::real::{inverse_power, Interval};
use crate::{Error, Result};

pub const DEFAULT_GUARD_BITS: u32 = 64;

fn work(guard_bits: u32) -> u32 {
    guard_bits + 16
}

fn check_positive(name: &str, v: u64) -> Result<()> {
    if v == 0 {
        return Err(Error::InvalidArgument(format!("{name} must be positive")));
    }
    Ok(())
}

fn round_up(x: &Interval, guard_bits: u32) -> Dyadic {
    x.hi().round(guard_bits as i64, Rounding::Ceil)
}

pub fn sqrt_enclosure(v: u64, prec: u32) -> Result<Interval> {
    Ok(Interval::point(Dyadic::from_int(v)).sqrt(prec)?)
}

/// Enclosure of `N^{−√L}`; exact when `√L` is an integer.
pub fn inverse_root_power(n: u64, l: u64, prec: u32) -> Result<Interval> {
    check_positive("N", n)?;
    check_positive("L", l)?;
    let root_l = sqrt_enclosure(l, prec + 8)?;
    Ok(inverse_power(n, &root_l, prec)?)
}

/// Dyadic upper bound of `N^{−√L}` with `guard_bits` fractional bits.
pub fn inverse_root_power_upper(n: u64, l: u64, guard_bits: u32) -> Result<Dyadic> {
    Ok(round_up(&inverse_root_power(n, l, work(guard_bits))?, guard_bits))
}

/// `Ω`: dyadic upper bound of `ω(√d)`.
pub fn omega_upper(modulus: &ModulusSpec, d: usize, guard_bits: u32) -> Result<Dyadic> {
    check_positive("d", d as u64)?;
    let r = sqrt_enclosure(d as u64, work(guard_bits))?;
    modulus.upper(&r, guard_bits)
}

/// `ω(√d·u) + 2Ω·v + ε`, rounded up.
fn assemble(
    modulus: &ModulusSpec,
    d: usize,
    u: &Interval,
    omega: &Dyadic,
    v: &Interval,
    eps: &Dyadic,
    guard_bits: u32,
) -> Result<Dyadic> {
    let w = work(guard_bits);
    let r = sqrt_enclosure(d as u64, w)?.mul(u);
    let first = modulus.eval_interval(&r, w)?;
    let second = v.scale(&omega.shift(1));
    Ok(round_up(&first.add(&second).add(&Interval::point(eps.clone())), guard_bits))
}

/// Bound `ω(√d·N^{−L}) + 2Ω·2^{−NL} + ε` for a given `Ω` and `ε`.
pub fn bound_theorem2_with(
    modulus: &ModulusSpec,
    d: usize,
    n: u64,
    l: u64,
    omega: &Dyadic,
    eps: &Dyadic,
    guard_bits: u32,
) -> Result<Dyadic> {
    check_positive("d", d as u64)?;
    check_positive("N", n)?;
    check_positive("L", l)?;
    let w = work(guard_bits);
    let u = inverse_power(n, &Interval::point(Dyadic::from_int(l)), w)?;
    let nl = n
        .checked_mul(l)
        .ok_or_else(|| Error::Unsupported("N·L overflows".into()))?;
    let v = Interval::point(Dyadic::pow2(-(nl as i64)));
    assemble(modulus, d, &u, omega, &v, eps, guard_bits)
}

pub fn bound_theorem2(modulus: &ModulusSpec, d: usize, n: u64, l: u64, guard_bits: u32) -> Result<Dyadic> {
    let omega = omega_upper(modulus, d, guard_bits)?;
    bound_theorem2_with(modulus, d, n, l, &omega, &Dyadic::zero(), guard_bits)
}

/// Bound `ω(√d·u) + 2Ω·u + ε` with `u` a dyadic upper bound of `N^{−√L}`.
pub fn bound_theorem1_with(
    modulus: &ModulusSpec,
    d: usize,
    n: u64,
    l: u64,
    omega: &Dyadic,
    eps: &Dyadic,
    guard_bits: u32,
) -> Result<Dyadic> {
    check_positive("d", d as u64)?;
    let u = Interval::point(inverse_root_power_upper(n, l, guard_bits)?);
    assemble(modulus, d, &u, omega, &u, eps, guard_bits)
}

pub fn bound_theorem1(modulus: &ModulusSpec, d: usize, n: u64, l: u64, guard_bits: u32) -> Result<Dyadic> {
    let omega = omega_upper(modulus, d, guard_bits)?;
    bound_theorem1_with(modulus, d, n, l, &omega, &Dyadic::zero(), guard_bits)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RawSizeBound {
    pub n: u64,
    pub l: u64,
    pub bound: Dyadic,
}

/// Raw width `N̄` and depth `L̄`: `N = ⌊(N̄−13)/5⌋`, `L = ⌊(L̄−3)/(64d)⌋`.
pub fn bound_corollary1(
    modulus: &ModulusSpec,
    d: usize,
    n_bar: u64,
    l_bar: u64,
    guard_bits: u32,
) -> Result<RawSizeBound> {
    check_positive("d", d as u64)?;
    let d64 = d as u64;
    if n_bar < d64.max(18) || l_bar < 64 * d64 + 3 {
        return Err(Error::InvalidArgument(format!(
            "need N̄ ≥ max(d, 18) and L̄ ≥ 64d + 3, got N̄ = {n_bar}, L̄ = {l_bar}, d = {d}"
        )));
    }
    let n = (n_bar - 13) / 5;
    let l = (l_bar - 3) / (64 * d64);
    Ok(RawSizeBound {
        n,
        l,
        bound: bound_theorem1(modulus, d, n, l, guard_bits)?,
    })
}

/// `3λ d^{α/2} N^{−α√L}`.
pub fn bound_holder(
    lambda: &Coefficient,
    alpha: &Exponent,
    d: usize,
    n: u64,
    l: u64,
    guard_bits: u32,
) -> Result<Dyadic> {
    check_positive("d", d as u64)?;
    check_positive("N", n)?;
    check_positive("L", l)?;
    let w = work(guard_bits);
    let lam = lambda.enclose(w)?;
    let d_pow = alpha.pow(&Interval::point(Dyadic::from_int(d as u64)), 2, w)?;
    let exponent = sqrt_enclosure(l, w + 8)?.mul(&Interval::from_rational(&alpha.to_rational(), w + 8));
    let decay = inverse_power(n, &exponent, w)?;
    let total = lam.mul(&d_pow).mul(&decay).scale(&Dyadic::from_int(3));
    Ok(round_up(&total, guard_bits))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BudgetBound {
    pub bound: Dyadic,
    pub width: u64,
    pub depth: u64,
}

/// `N = 2`, `L = W`: width `max{d, 23}`, depth `64dW + 3`, `O(W)` parameters.
pub fn bound_parameter_budget(modulus: &ModulusSpec, d: usize, w: u64, guard_bits: u32) -> Result<BudgetBound> {
    check_positive("W", w)?;
    check_positive("d", d as u64)?;
    Ok(BudgetBound {
        bound: bound_theorem1(modulus, d, 2, w, guard_bits)?,
        width: (d as u64).max(23),
        depth: 64 * d as u64 * w + 3,
    })
}

/// [`bound_theorem1`] for a target on `[−M, M]^d` given its modulus there:
/// radii are scaled by `2M`.
pub fn bound_domain(
    modulus: &ModulusSpec,
    d: usize,
    half_width: &Dyadic,
    n: u64,
    l: u64,
    guard_bits: u32,
) -> Result<Dyadic> {
    if half_width.signum() <= 0 {
        return Err(Error::InvalidArgument("M must be positive".into()));
    }
    let scaled = ModulusSpec::Scaled {
        inner: Box::new(modulus.clone()),
        factor: half_width.shift(1),
    };
    bound_theorem1(&scaled, d, n, l, guard_bits)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExampleKind {
    LogType,
    LogPowerType,
    HolderOverD,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateExample {
    pub kind: ExampleKind,
    pub value: f64,
    /// The rate is stated for large `N`, `L`; no threshold is certified.
    pub asymptotic: bool,
}

/// Diagnostic binary64 evaluation of the large-`N, L` rates:
/// `3(√L ln N − ½ ln d)^{−1}`, its `1/d` power, and `3 d^{α/(2d)} N^{−(α/d)√L}`.
pub fn modulus_examples(kind: ExampleKind, d: usize, n: f64, l: f64, alpha: f64) -> Result<RateExample> {
    if d == 0 || n.is_nan() || n <= 0.0 || l.is_nan() || l <= 0.0 {
        return Err(Error::InvalidArgument("d, N and L must be positive".into()));
    }
    let df = d as f64;
    let log_term = || -> Result<f64> {
        let inner = l.sqrt() * n.ln() - 0.5 * df.ln();
        if inner <= 0.0 {
            return Err(Error::Numeric(crate::NumericError::Domain(format!(
                "√L ln N − ½ ln d = {inner} is not positive"
            ))));
        }
        Ok(inner)
    };
    let value = match kind {
        ExampleKind::LogType => 3.0 / log_term()?,
        ExampleKind::LogPowerType => 3.0 * log_term()?.powf(-1.0 / df),
        ExampleKind::HolderOverD => {
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(Error::InvalidArgument(format!("alpha = {alpha} outside (0, 1]")));
            }
            3.0 * df.powf(alpha / (2.0 * df)) * n.powf(-(alpha / df) * l.sqrt())
        }
    };
    Ok(RateExample {
        kind,
        value,
        asymptotic: true,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundRow {
    pub n: u64,
    pub l: u64,
    pub theorem1: Dyadic,
    pub theorem2: Dyadic,
    pub width1: u64,
    pub depth1: u64,
}

/// [`bound_theorem1`] and [`bound_theorem2`] over a grid of `(N, L)`.
pub fn bound_table(
    modulus: &ModulusSpec,
    d: usize,
    ns: &[u64],
    ls: &[u64],
    guard_bits: u32,
) -> Result<Vec<BoundRow>> {
    let mut rows = Vec::with_capacity(ns.len() * ls.len());
    for &n in ns {
        for &l in ls {
            rows.push(BoundRow {
                n,
                l,
                theorem1: bound_theorem1(modulus, d, n, l, guard_bits)?,
                theorem2: bound_theorem2(modulus, d, n, l, guard_bits)?,
                width1: (d as u64).max(5 * n + 13),
                depth1: 64 * d as u64 * l + 3,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn lip1() -> ModulusSpec {
        ModulusSpec::lipschitz(Coefficient::one())
    }

    fn dy(m: i64, e: i64) -> Dyadic {
        Dyadic::new(BigInt::from(m), e)
    }

    #[test]
    fn theorem1_examples() {
        assert_eq!(bound_theorem1(&lip1(), 1, 2, 4, 64).unwrap(), dy(3, -2));
        assert_eq!(bound_theorem1(&ModulusSpec::Zero, 3, 5, 7, 64).unwrap(), Dyadic::zero());
        let h = ModulusSpec::holder(Coefficient::one(), "1/2".parse().unwrap());
        let b = bound_theorem1(&h, 4, 2, 1, 64).unwrap();
        // ω(1) + 2·ω(2)·½ = 1 + √2
        assert!(b <= Dyadic::from_int(3));
        assert!((b.to_f64() - (1.0 + 2f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn theorem2_examples() {
        assert_eq!(bound_theorem2(&lip1(), 1, 2, 2, 64).unwrap(), dy(3, -3));
        let b = bound_theorem2(&lip1(), 1, 3, 1, 64).unwrap();
        let exact = 1.0 / 3.0 + 0.25;
        assert!(b.to_f64() >= exact);
        assert!(b.to_f64() - exact < 1e-15);
        let tail: Vec<f64> = (1..=12).map(|l| bound_theorem2(&lip1(), 1, 2, l, 64).unwrap().to_f64()).collect();
        assert!(tail.windows(2).all(|w| w[1] < w[0]));
        assert!(tail[11] < 1e-3);
    }

    #[test]
    fn corollary1_examples() {
        let r = bound_corollary1(&lip1(), 1, 18, 67, 64).unwrap();
        assert_eq!((r.n, r.l), (1, 1));
        assert_eq!(r.bound, bound_theorem1(&lip1(), 1, 1, 1, 64).unwrap());
        assert_eq!(bound_corollary1(&lip1(), 1, 23, 67, 64).unwrap().n, 2);
        assert!(bound_corollary1(&lip1(), 1, 17, 67, 64).is_err());
        assert!(bound_corollary1(&lip1(), 2, 18, 130, 64).is_err());
        let scan: Vec<Dyadic> = (18..=48)
            .map(|nb| bound_corollary1(&lip1(), 1, nb, 131, 64).unwrap().bound)
            .collect();
        assert!(scan.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn holder_examples() {
        let one = Coefficient::one();
        assert_eq!(bound_holder(&one, &Exponent::one(), 1, 2, 4, 64).unwrap(), dy(3, -2));
        assert_eq!(bound_holder(&one, &Exponent::one(), 4, 2, 1, 64).unwrap(), Dyadic::from_int(3));
        let a: Exponent = "1/3".parse().unwrap();
        let no_decay = bound_holder(&one, &a, 8, 1, 9, 64).unwrap();
        // 3·8^{1/6} = 3√2
        assert!((no_decay.to_f64() - 3.0 * 2f64.sqrt()).abs() < 1e-15);
        assert!(bound_holder(&one, &a, 0, 2, 1, 64).is_err());
    }

    #[test]
    fn budget_examples() {
        let b = bound_parameter_budget(&lip1(), 1, 4, 64).unwrap();
        assert_eq!(b.bound, dy(3, -2));
        assert_eq!(bound_parameter_budget(&lip1(), 30, 1, 64).unwrap().width, 30);
        assert_eq!(bound_parameter_budget(&lip1(), 1, 1, 64).unwrap().depth, 67);
    }

    #[test]
    fn domain_scaling() {
        let h = ModulusSpec::holder(Coefficient::one(), "1/2".parse().unwrap());
        let half = dy(1, -1);
        assert_eq!(
            bound_domain(&h, 2, &half, 3, 5, 64).unwrap(),
            bound_theorem1(&h, 2, 3, 5, 64).unwrap()
        );
        // 3λ(2M√d·N^{−√L})^α with M = 2, d = 1, N = 2, L = 16, α = 1
        let b = bound_domain(&lip1(), 1, &Dyadic::from_int(2), 2, 16, 64).unwrap();
        assert_eq!(b, dy(3, -2));
    }

    #[test]
    fn rate_examples() {
        let e = std::f64::consts::E;
        let r = modulus_examples(ExampleKind::LogType, 1, e, 4.0, 1.0).unwrap();
        assert!((r.value - 1.5).abs() < 1e-12);
        assert!(r.asymptotic);
        let p = modulus_examples(ExampleKind::LogPowerType, 1, 3.0, 5.0, 1.0).unwrap();
        let t = modulus_examples(ExampleKind::LogType, 1, 3.0, 5.0, 1.0).unwrap();
        assert!((p.value - t.value).abs() < 1e-15);
        let h = modulus_examples(ExampleKind::HolderOverD, 1, 2.0, 4.0, 1.0).unwrap();
        assert!((h.value - 0.75).abs() < 1e-15);
        assert!(modulus_examples(ExampleKind::LogType, 9, 1.1, 1.0, 1.0).is_err());
    }

    #[test]
    fn table_rows() {
        let rows = bound_table(&lip1(), 1, &[2, 3], &[1, 4], 32).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[1].theorem1, dy(3, -2));
    }

    proptest! {
        #[test]
        fn theorem1_nonincreasing_in_l(n in 2u64..9, l in 1u64..40, d in 1usize..5) {
            for m in [lip1(), ModulusSpec::holder(Coefficient::one(), "1/2".parse().unwrap())] {
                let a = bound_theorem1(&m, d, n, l, 48).unwrap();
                let b = bound_theorem1(&m, d, n, l + 1, 48).unwrap();
                prop_assert!(b <= a);
            }
        }

        #[test]
        fn guard_refinement_is_stable(n in 2u64..9, l in 1u64..20, g in 16u32..60) {
            let m = ModulusSpec::holder("sqrt(3)".parse().unwrap(), "2/3".parse().unwrap());
            let coarse = bound_theorem1(&m, 2, n, l, g).unwrap();
            let fine = bound_theorem1(&m, 2, n, l, g + 8).unwrap();
            prop_assert!(fine <= &coarse + &Dyadic::pow2(-(g as i64)));
        }

        #[test]
        fn holder_formula_agrees(n in 2u64..9, l in 1u64..30, d in 1usize..6, p in 1u32..4, q in 1u32..4) {
            let g = 60;
            let lam: Coefficient = "3/2".parse().unwrap();
            let alpha = Exponent::new(p.min(q), q).unwrap();
            let t1 = bound_theorem1(&ModulusSpec::holder(lam.clone(), alpha), d, n, l, g).unwrap();
            let h = bound_holder(&lam, &alpha, d, n, l, g).unwrap();
            let tol = Dyadic::pow2(-40);
            if alpha.is_one() {
                prop_assert!((&t1 - &h).abs() <= tol);
            } else {
                prop_assert!(t1 <= &h + &tol);
            }
        }
    }
}
