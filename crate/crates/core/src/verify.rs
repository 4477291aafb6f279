//! Measurement harnesses and independent oracles.
//!
//! The constructed approximants are constant on each grid cell, so sampling
//! every cell corner and center measures the network side exactly; what is
//! left is the variation of `f` inside a cell, reported as `cell_residual`.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::{build_point_fitter, checked_pow, oracle_extract, BitLocator, BlockExtractor, PointFitter};
use crate::bounds::sqrt_enclosure;
use crate::construct::Certificate;
use crate::dyadic::{BitString, Dyadic, Rounding};
use crate::network::Network;
use crate::real::Interval;
use crate::target::TargetFunction;
use crate::{Error, Result};

/// Fractional bits used for sample coordinates and reported errors.
pub const REPORT_BITS: u32 = 64;
/// Default number of seeded random points in [`check_certificate`].
pub const DEFAULT_RANDOM_POINTS: usize = 1000;
/// Absolute gap above which the binary64 and exact backends disagree.
pub const FLOAT_TOLERANCE_BITS: i64 = 40;

/// Where to evaluate. Coordinates refer to the unit cube; for
/// domain-wrapped certificates they are mapped onto `[−M, M]^d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sampling {
    /// `m` evenly spaced points per axis, endpoints included.
    Grid { per_axis: u32 },
    /// `count` points from a ChaCha8 stream seeded with `seed`.
    Random { count: usize, seed: u64 },
    /// Corner `β/K` (rounded up) and center of every cell of the `K`-grid.
    Cells { k: u64 },
    Points { points: Vec<Vec<Dyadic>> },
    Union { parts: Vec<Sampling> },
}

impl Sampling {
    pub fn seed(&self) -> Option<u64> {
        match self {
            Sampling::Random { seed, .. } => Some(*seed),
            Sampling::Union { parts } => parts.iter().find_map(Sampling::seed),
            _ => None,
        }
    }

    pub fn points(&self, d: usize) -> Result<Vec<Vec<Dyadic>>> {
        let bits = REPORT_BITS as i64;
        match self {
            Sampling::Grid { per_axis } => {
                if *per_axis == 0 {
                    return Err(Error::InvalidArgument("grid needs at least one point per axis".into()));
                }
                let m = *per_axis as u64;
                let axis: Vec<Dyadic> = (0..m)
                    .map(|j| {
                        if m == 1 {
                            Dyadic::zero()
                        } else {
                            Dyadic::from_rational(&ratio(j, m - 1), bits, Rounding::Nearest)
                        }
                    })
                    .collect();
                product(&axis, d)
            }
            Sampling::Random { count, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Ok((0..*count)
                    .map(|_| {
                        (0..d)
                            .map(|_| Dyadic::new(BigInt::from(rng.gen_range(0..=1u64 << 53)), -53))
                            .collect()
                    })
                    .collect())
            }
            Sampling::Cells { k } => {
                if *k == 0 {
                    return Err(Error::InvalidArgument("K must be positive".into()));
                }
                let axis: Vec<Dyadic> = (0..*k)
                    .flat_map(|b| {
                        [
                            Dyadic::from_rational(&ratio(b, *k), bits, Rounding::Ceil),
                            Dyadic::from_rational(&ratio(2 * b + 1, 2 * k), bits, Rounding::Nearest),
                        ]
                    })
                    .collect();
                product(&axis, d)
            }
            Sampling::Points { points } => {
                if let Some(p) = points.iter().find(|p| p.len() != d) {
                    return Err(Error::Dimension(format!("sample point has {} coordinates, expected {d}", p.len())));
                }
                Ok(points.clone())
            }
            Sampling::Union { parts } => {
                let mut all = Vec::new();
                for p in parts {
                    all.extend(p.points(d)?);
                }
                Ok(all)
            }
        }
    }
}

fn ratio(a: u64, b: u64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

fn product(axis: &[Dyadic], d: usize) -> Result<Vec<Vec<Dyadic>>> {
    let total = (axis.len() as u64)
        .checked_pow(d as u32)
        .filter(|t| *t <= 1 << 24)
        .ok_or_else(|| Error::Unsupported(format!("{}^{d} sample points is too many", axis.len())))?;
    Ok((0..total)
        .map(|mut i| {
            (0..d)
                .map(|_| {
                    let c = axis[(i % axis.len() as u64) as usize].clone();
                    i /= axis.len() as u64;
                    c
                })
                .collect()
        })
        .collect())
}

/// One evaluated sample, in the coordinates the network consumes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleRow {
    pub x: Vec<Dyadic>,
    /// Enclosure midpoint of `f(x)`.
    pub f: Dyadic,
    pub phi: Dyadic,
    /// Upper bound of `|φ(x) − f(x)|`.
    pub abs_err: Dyadic,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub sample_count: usize,
    pub max_abs_error: Dyadic,
    pub argmax: Vec<Dyadic>,
    pub bound: Dyadic,
    pub pass: bool,
    pub seed: Option<u64>,
    /// Upper bound of `ω(√d/K)`: the most `f` can move inside one cell.
    pub cell_residual: Option<Dyadic>,
}

impl ErrorReport {
    fn from_rows(rows: &[SampleRow], bound: &Dyadic, seed: Option<u64>) -> Self {
        // first index wins ties so that parallel runs agree
        let best = rows
            .iter()
            .enumerate()
            .fold(None::<(usize, &Dyadic)>, |acc, (i, r)| match acc {
                Some((_, e)) if *e >= r.abs_err => acc,
                _ => Some((i, &r.abs_err)),
            });
        let (max_abs_error, argmax) = match best {
            Some((i, e)) => (e.clone(), rows[i].x.clone()),
            None => (Dyadic::zero(), Vec::new()),
        };
        ErrorReport {
            sample_count: rows.len(),
            pass: max_abs_error <= *bound,
            max_abs_error,
            argmax,
            bound: bound.clone(),
            seed,
            cell_residual: None,
        }
    }

    /// Report over the union of both sample sets.
    pub fn merge(&self, other: &ErrorReport) -> ErrorReport {
        let (max_abs_error, argmax) = if other.max_abs_error > self.max_abs_error {
            (other.max_abs_error.clone(), other.argmax.clone())
        } else {
            (self.max_abs_error.clone(), self.argmax.clone())
        };
        let bound = Ord::min(self.bound.clone(), other.bound.clone());
        ErrorReport {
            sample_count: self.sample_count + other.sample_count,
            pass: max_abs_error <= bound,
            max_abs_error,
            argmax,
            bound,
            seed: self.seed.or(other.seed),
            cell_residual: self.cell_residual.clone().or_else(|| other.cell_residual.clone()),
        }
    }
}

/// Maps unit-cube coordinates to `[−M, M]^d` when `half_width` is set.
fn to_domain(x: &[Dyadic], half_width: Option<&Dyadic>) -> Vec<Dyadic> {
    match half_width {
        None => x.to_vec(),
        Some(m) => x.iter().map(|xi| (xi - &Dyadic::pow2(-1)) * m.shift(1)).collect(),
    }
}

/// Evaluates `net` and `f` on every sample. `f` is queried at twice the
/// reporting precision; a wider enclosure is a precision shortfall.
pub fn sample_rows(
    net: &Network,
    f: &dyn TargetFunction,
    sampling: &Sampling,
    half_width: Option<&Dyadic>,
) -> Result<Vec<SampleRow>> {
    let d = f.dim();
    if net.input_dim() != d || net.output_dim() != 1 {
        return Err(Error::Dimension(format!(
            "network maps {} → {}, target has dimension {d}",
            net.input_dim(),
            net.output_dim()
        )));
    }
    let tol = Dyadic::pow2(-(REPORT_BITS as i64));
    sampling
        .points(d)?
        .into_par_iter()
        .map(|u| {
            let x = to_domain(&u, half_width);
            let phi = net.eval_exact(&x)?.swap_remove(0);
            let enc = f.enclose_dyadic(&x, 2 * REPORT_BITS)?;
            if enc.width() > tol {
                return Err(Error::Precision(format!("f enclosure at {x:?} has width {}", enc.width())));
            }
            let abs_err = Ord::max(enc.hi() - &phi, &phi - enc.lo());
            Ok(SampleRow {
                f: enc.midpoint(),
                x,
                phi,
                abs_err,
            })
        })
        .collect()
}

pub fn measure_sup_error(net: &Network, f: &dyn TargetFunction, sampling: &Sampling, bound: &Dyadic) -> Result<ErrorReport> {
    let rows = sample_rows(net, f, sampling, None)?;
    Ok(ErrorReport::from_rows(&rows, bound, sampling.seed()))
}

/// Sampling used by [`check_certificate`]: all cell corners and centers,
/// `samples` seeded points, and an optional grid.
pub fn certificate_sampling(cert: &Certificate, grid: Option<u32>, samples: usize, seed: u64) -> Sampling {
    let mut parts = vec![Sampling::Cells { k: cert.k }, Sampling::Random { count: samples, seed }];
    if let Some(m) = grid {
        parts.push(Sampling::Grid { per_axis: m });
    }
    Sampling::Union { parts }
}

/// Measures `net` against `f` on [`certificate_sampling`] and compares with
/// the certified bound. `f` is the original target; for domain-wrapped
/// certificates samples are taken on `[−M, M]^d`.
pub fn check_certificate(
    net: &Network,
    f: &dyn TargetFunction,
    cert: &Certificate,
    grid: Option<u32>,
    seed: u64,
) -> Result<(ErrorReport, Vec<SampleRow>)> {
    check_certificate_with(net, f, cert, grid, DEFAULT_RANDOM_POINTS, seed)
}

/// [`check_certificate`] with a custom number of random points.
pub fn check_certificate_with(
    net: &Network,
    f: &dyn TargetFunction,
    cert: &Certificate,
    grid: Option<u32>,
    samples: usize,
    seed: u64,
) -> Result<(ErrorReport, Vec<SampleRow>)> {
    if f.dim() != cert.d {
        return Err(Error::Dimension(format!("certificate is for d = {}, target has {}", cert.d, f.dim())));
    }
    let sampling = certificate_sampling(cert, grid, samples, seed);
    let rows = sample_rows(net, f, &sampling, cert.domain_half_width.as_ref())?;
    let mut report = ErrorReport::from_rows(&rows, &cert.bound, Some(seed));
    let diag = sqrt_enclosure(cert.d as u64, cert.guard_bits)?;
    let diag = diag.div(&Interval::point(Dyadic::from_int(cert.k)), cert.guard_bits)?;
    report.cell_residual = Some(cert.modulus.upper(&diag, cert.guard_bits)?);
    Ok((report, rows))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BitLevel {
    Block,
    Locator,
    Fitter,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitCheckSummary {
    pub level: BitLevel,
    pub n: usize,
    /// `J` for blocks, `L` otherwise.
    pub size: u32,
    pub exhaustive: bool,
    pub strings: u64,
    pub cases: u64,
    pub failures: u64,
}

impl BitCheckSummary {
    pub fn pass(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }
}

fn random_bits(rng: &mut ChaCha8Rng, len: usize) -> Result<BitString> {
    Ok(BitString::new((0..len).map(|_| rng.gen()).collect())?)
}

/// Compares gadget outputs with [`oracle_extract`]. Enumerates all bit
/// strings when there are at most `cap`, otherwise draws `cap` at random.
pub fn exhaustive_bit_check(level: BitLevel, n: usize, size: u32, cap: u64, seed: u64) -> Result<BitCheckSummary> {
    let len = match level {
        BitLevel::Block => n as u64 * size as u64,
        BitLevel::Locator | BitLevel::Fitter => checked_pow(n, size)?,
    };
    let exhaustive = len < 64 && (1u64 << len) <= cap;
    let strings: Vec<BitString> = if exhaustive {
        (0..1u64 << len)
            .map(|v| BitString::from_integer(&BigInt::from(v), len as usize))
            .collect::<Result<_, _>>()?
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..cap).map(|_| random_bits(&mut rng, len as usize)).collect::<Result<_>>()?
    };
    let per_string: Vec<(u64, u64)> = match level {
        BitLevel::Block => {
            let gadget = BlockExtractor::build(n, size)?;
            let j = size as usize;
            strings
                .par_iter()
                .map(|s| {
                    let mut bad = 0;
                    for idx in 1..=n {
                        if gadget.extract(s, idx)? != oracle_extract(s, (idx - 1) * j + 1, idx * j)? {
                            bad += 1;
                        }
                    }
                    Ok((n as u64, bad))
                })
                .collect::<Result<_>>()?
        }
        BitLevel::Locator => {
            let gadget = BitLocator::build(n, size)?;
            strings
                .par_iter()
                .map(|s| {
                    let mut bad = 0;
                    for m in 1..=len {
                        let want = oracle_extract(s, m as usize, m as usize)?.bit(1);
                        if gadget.locate(s, m)? != want {
                            bad += 1;
                        }
                    }
                    Ok((len, bad))
                })
                .collect::<Result<_>>()?
        }
        BitLevel::Fitter => strings
            .par_iter()
            .map(|s| {
                let fitter = PointFitter::build(n, size, s)?;
                let mut bad = 0;
                for m in 1..=len {
                    let want = oracle_extract(s, m as usize, m as usize)?.bit(1);
                    if fitter.eval(m).map(|b| b != want).unwrap_or(true) {
                        bad += 1;
                    }
                }
                Ok((len, bad))
            })
            .collect::<Result<_>>()?,
    };
    Ok(BitCheckSummary {
        level,
        n,
        size,
        exhaustive,
        strings: strings.len() as u64,
        cases: per_string.iter().map(|c| c.0).sum(),
        failures: per_string.iter().map(|c| c.1).sum(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemorizationReport {
    pub n: usize,
    pub l: u32,
    pub seed: u64,
    pub points: u64,
    pub width: usize,
    pub depth: usize,
    pub nonzero_params: usize,
    /// Length of the binary expansion held by the one data-dependent weight.
    pub constant_bits: u64,
    /// Fractional bits of that weight after dropping trailing zeros.
    pub constant_frac_bits: u64,
    pub mismatches: u64,
    pub all_exact: bool,
}

/// Memorizes `N^L` random labels with one point fitter and checks every one.
pub fn memorization_demo(n: usize, l: u32, seed: u64) -> Result<MemorizationReport> {
    let points = checked_pow(n, l)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta = random_bits(&mut rng, points as usize)?;
    let net = build_point_fitter(n, l, &theta)?;
    let mismatches = (1..=points)
        .into_par_iter()
        .map(|m| {
            let out = net.eval_exact(&[Dyadic::from_int(m)])?.swap_remove(0);
            Ok(u64::from(out != Dyadic::from_int(theta.bit(m as usize) as u8)))
        })
        .collect::<Result<Vec<u64>>>()?
        .into_iter()
        .sum();
    let constant = &net.layers()[0].affine().bias()[0];
    let audit = net.audit();
    Ok(MemorizationReport {
        n,
        l,
        seed,
        points,
        width: audit.width,
        depth: audit.depth,
        nonzero_params: audit.nonzero_params,
        constant_bits: points,
        constant_frac_bits: constant.frac_bits(),
        mismatches,
        all_exact: mismatches == 0,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Divergence {
    pub x: Vec<Dyadic>,
    pub exact: Vec<Dyadic>,
    /// `None` when the binary64 pass produced NaN.
    pub float: Option<Vec<f64>>,
    /// First layer (hidden layers, then the output map) where the two
    /// backends differ by more than the tolerance.
    pub first_layer: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub points: usize,
    pub tolerance: Dyadic,
    pub divergences: Vec<Divergence>,
}

/// Runs both backends on every point and lists where they disagree.
pub fn float_divergence_probe(net: &Network, points: &[Vec<Dyadic>]) -> Result<DivergenceReport> {
    let tolerance = Dyadic::pow2(-FLOAT_TOLERANCE_BITS);
    let found: Vec<Option<Divergence>> = points
        .par_iter()
        .map(|x| {
            let exact = net.trace_exact(x)?;
            let xf: Vec<f64> = x.iter().map(Dyadic::to_f64).collect();
            let out = exact.last().cloned().unwrap_or_default();
            let float = match net.trace_float(&xf) {
                Ok(t) => t,
                Err(Error::NaN { layer, .. }) => {
                    return Ok(Some(Divergence {
                        x: x.clone(),
                        exact: out,
                        float: None,
                        first_layer: layer,
                    }))
                }
                Err(e) => return Err(e),
            };
            let first = exact.iter().zip(&float).position(|(e, f)| {
                e.iter().zip(f).any(|(a, b)| {
                    let b = Dyadic::from_f64(*b);
                    match b {
                        Ok(b) => (a - &b).abs() > tolerance,
                        Err(_) => true,
                    }
                })
            });
            Ok(first.map(|layer| Divergence {
                x: x.clone(),
                exact: out,
                float: float.last().cloned(),
                first_layer: layer,
            }))
        })
        .collect::<Result<_>>()?;
    Ok(DivergenceReport {
        points: points.len(),
        tolerance,
        divergences: found.into_iter().flatten().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{build_theorem2, BuildOptions};
    use crate::network::{Affine, Layer};
    use crate::target::lookup;
    use crate::ActivationKind;

    fn identity_build(l: u64) -> (Network, Certificate) {
        build_theorem2(&lookup("mean", 1, None).unwrap(), 2, l, &BuildOptions::default()).unwrap()
    }

    #[test]
    fn constant_network_has_zero_error() {
        let f = lookup("const:value=3/8", 2, None).unwrap();
        let net = Network::affine(Affine::new(2, vec![vec![Dyadic::zero(); 2]], vec![Dyadic::new(BigInt::from(3), -3)]).unwrap()).unwrap();
        let r = measure_sup_error(&net, &f, &Sampling::Grid { per_axis: 5 }, &Dyadic::zero()).unwrap();
        assert_eq!(r.max_abs_error, Dyadic::zero());
        assert_eq!(r.sample_count, 25);
        assert!(r.pass);
    }

    #[test]
    fn identity_within_bound() {
        let (net, cert) = identity_build(2);
        let f = lookup("mean", 1, None).unwrap();
        let r = measure_sup_error(&net, &f, &Sampling::Grid { per_axis: 4096 }, &cert.bound).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.max_abs_error <= Dyadic::new(BigInt::from(3), -3));
        let (r, rows) = check_certificate(&net, &f, &cert, None, 7).unwrap();
        assert!(r.pass);
        assert_eq!(rows.len(), 8 + DEFAULT_RANDOM_POINTS);
        assert_eq!(r.cell_residual, Some(Dyadic::new(BigInt::from(1), -2)));
    }

    #[test]
    fn random_sampling_is_reproducible() {
        let (net, cert) = identity_build(2);
        let f = lookup("mean", 1, None).unwrap();
        let s = Sampling::Random { count: 300, seed: 42 };
        let a = measure_sup_error(&net, &f, &s, &cert.bound).unwrap();
        let b = measure_sup_error(&net, &f, &s, &cert.bound).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.seed, Some(42));
    }

    #[test]
    fn measurement_decomposes() {
        let (net, cert) = identity_build(2);
        let f = lookup("mean", 1, None).unwrap();
        let s1 = Sampling::Random { count: 200, seed: 1 };
        let s2 = Sampling::Cells { k: 4 };
        let a = measure_sup_error(&net, &f, &s1, &cert.bound).unwrap();
        let b = measure_sup_error(&net, &f, &s2, &cert.bound).unwrap();
        let u = measure_sup_error(&net, &f, &Sampling::Union { parts: vec![s1, s2] }, &cert.bound).unwrap();
        assert_eq!(a.merge(&b).max_abs_error, u.max_abs_error);
        assert_eq!(a.merge(&b).sample_count, u.sample_count);
    }

    #[test]
    fn fault_injection_and_inflated_bound() {
        let (net, cert) = identity_build(2);
        let f = lookup("mean", 1, None).unwrap();
        let last = net.output().clone();
        let mut broken = last.clone();
        broken.set_bias(0, &last.bias()[0] + &Dyadic::pow2(-1));
        let bad = Network::new(1, net.layers().to_vec(), broken).unwrap();
        assert_eq!(bad.parameter_diff(&net), Some(1));
        let (r, _) = check_certificate(&bad, &f, &cert, None, 3).unwrap();
        assert!(!r.pass);
        let mut loose = cert.clone();
        loose.bound = Dyadic::from_int(10);
        assert!(check_certificate(&bad, &f, &loose, None, 3).unwrap().0.pass);
    }

    #[test]
    fn error_decreases_with_depth() {
        let f = lookup("mean", 1, None).unwrap();
        let errs: Vec<Dyadic> = (1..=3)
            .map(|l| {
                let (net, cert) = identity_build(l);
                check_certificate(&net, &f, &cert, Some(257), 5).unwrap().0.max_abs_error
            })
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    }

    #[test]
    fn bit_checks() {
        let s = exhaustive_bit_check(BitLevel::Block, 2, 2, 1 << 20, 0).unwrap();
        assert!(s.exhaustive && s.pass());
        assert_eq!((s.strings, s.cases), (16, 32));
        let s = exhaustive_bit_check(BitLevel::Locator, 2, 2, 1 << 20, 0).unwrap();
        assert_eq!((s.strings, s.cases, s.failures), (16, 64, 0));
        let s = exhaustive_bit_check(BitLevel::Fitter, 3, 2, 50, 9).unwrap();
        assert!(!s.exhaustive && s.pass());
        assert_eq!(s.cases, 50 * 9);
    }

    #[test]
    fn memorization_small() {
        let r = memorization_demo(2, 1, 0).unwrap();
        assert_eq!(r.points, 2);
        assert!(r.all_exact);
        let r = memorization_demo(2, 4, 1).unwrap();
        assert_eq!((r.points, r.width, r.depth), (16, 6, 26));
        assert!(r.constant_frac_bits <= 16);
    }

    #[test]
    fn probe_examples() {
        let affine = Network::affine(Affine::scalar(Dyadic::from_int(3), Dyadic::pow2(-1))).unwrap();
        let pts: Vec<Vec<Dyadic>> = (0..20).map(|i| vec![Dyadic::new(BigInt::from(i), -3)]).collect();
        assert!(float_divergence_probe(&affine, &pts).unwrap().divergences.is_empty());
        let floor = Network::new(
            1,
            vec![Layer::uniform(Affine::identity(1), ActivationKind::Floor, false)],
            Affine::identity(1),
        )
        .unwrap();
        let ints: Vec<Vec<Dyadic>> = (-5..5).map(|i| vec![Dyadic::from_int(i)]).collect();
        assert!(float_divergence_probe(&floor, &ints).unwrap().divergences.is_empty());
        // 1 − 2^{−60} rounds to 1 in binary64, so ⌊·⌋ jumps.
        let close = Network::new(
            1,
            vec![Layer::uniform(Affine::scalar(Dyadic::one(), -Dyadic::pow2(-60)), ActivationKind::Floor, false)],
            Affine::identity(1),
        )
        .unwrap();
        let r = float_divergence_probe(&close, &[vec![Dyadic::one()]]).unwrap();
        assert_eq!(r.divergences.len(), 1);
        assert_eq!(r.divergences[0].first_layer, 0);
    }
}
