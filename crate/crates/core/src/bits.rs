//! Bit-extraction gadgets.
//!
//! * [`build_gate`]: `g(x) = σ(σ(x) − σ((x+δ−1)/δ))`, `δ = 2^{−J}`.
//! * [`build_block_extractor`]: `(s, n) ↦ bin 0.θ_{(n−1)J+1}…θ_{nJ}` for
//!   `s = bin 0.θ₁…θ_{NJ}`, width `2N`, depth 4.
//! * [`build_bit_locator`]: `(s, m) ↦ θ_m / 2` for `s = bin 0.θ₁…θ_{N^L}`,
//!   width `2N+2`, depth `7L−3`.
//! * [`build_point_fitter`]: `m ↦ θ_m` on `{1,…,N^L}`, width `2N+2`, depth `7L−2`.
//!
//! Networks cannot reject inputs, so the typed wrappers ([`BlockExtractor`],
//! [`BitLocator`], [`PointFitter`]) validate arguments before evaluating.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::dyadic::{BitString, Dyadic, Rounding};
use crate::network::{compose_serial, with_passthrough, ActivationKind, Affine, Layer, Network};
use crate::{Error, Result};

/// Largest bit-string length the builders accept.
pub const MAX_BITS: u64 = 1 << 26;

/// `N^L` with an overflow/size check.
pub fn checked_pow(n: usize, l: u32) -> Result<u64> {
    (n as u64)
        .checked_pow(l)
        .filter(|v| *v <= MAX_BITS)
        .ok_or_else(|| Error::Unsupported(format!("{n}^{l} exceeds the supported size {MAX_BITS}")))
}

fn int(v: i64) -> Dyadic {
    Dyadic::from_int(v)
}

fn row(len: usize, entries: &[(usize, Dyadic)]) -> Vec<Dyadic> {
    let mut r = vec![Dyadic::zero(); len];
    for (i, v) in entries {
        r[*i] = v.clone();
    }
    r
}

fn check_positive(name: &str, v: u64) -> Result<()> {
    if v == 0 {
        return Err(Error::InvalidArgument(format!("{name} must be positive")));
    }
    Ok(())
}

pub fn build_gate(j: u32) -> Result<Network> {
    check_positive("J", j as u64)?;
    let inv_delta = Dyadic::pow2(j as i64);
    let first = Affine::new(
        1,
        vec![vec![int(1)], vec![inv_delta.clone()]],
        vec![int(0), int(1) - inv_delta],
    )?;
    let second = Affine::new(2, vec![vec![int(1), int(-1)]], vec![int(0)])?;
    Network::new(
        1,
        vec![
            Layer::uniform(first, ActivationKind::Relu, false),
            Layer::uniform(second, ActivationKind::Relu, false),
        ],
        Affine::identity(1),
    )
}

pub fn build_block_extractor(n: usize, j: u32) -> Result<Network> {
    check_positive("N", n as u64)?;
    check_positive("J", j as u64)?;
    let jj = j as i64;
    let relu = ActivationKind::Relu;

    // ⌊2^{kJ} s⌋ for k = 1..N, then carry n.
    let mut w = Vec::with_capacity(n + 1);
    for k in 1..=n {
        w.push(row(2, &[(0, Dyadic::pow2(k as i64 * jj))]));
    }
    w.push(row(2, &[(1, int(1))]));
    let mut acts = vec![ActivationKind::Floor; n];
    acts.push(relu);
    let mut nonneg = vec![false; n];
    nonneg.push(true);
    let l1 = Layer::new(Affine::new(2, w, vec![int(0); n + 1])?, acts, nonneg)?;

    // s_k = ⌊2^{kJ}s⌋/2^J − ⌊2^{(k−1)J}s⌋, then carry n.
    let mut w = Vec::with_capacity(n + 1);
    for k in 0..n {
        let mut entries = vec![(k, Dyadic::pow2(-jj))];
        if k > 0 {
            entries.push((k - 1, int(-1)));
        }
        w.push(row(n + 1, &entries));
    }
    w.push(row(n + 1, &[(n, int(1))]));
    let l2 = Layer::uniform(Affine::new(n + 1, w, vec![int(0); n + 1])?, relu, true);

    // σ(y_k) and σ((y_k+δ−1)/δ) with y_k = s_k + k − n.
    let inv_delta = Dyadic::pow2(jj);
    let mut w = Vec::with_capacity(2 * n);
    let mut b = Vec::with_capacity(2 * n);
    for k in 0..n {
        let kk = int(k as i64 + 1);
        w.push(row(n + 1, &[(k, int(1)), (n, int(-1))]));
        b.push(kk.clone());
        w.push(row(n + 1, &[(k, inv_delta.clone()), (n, -&inv_delta)]));
        b.push(&(&inv_delta * &kk) + &(int(1) - inv_delta.clone()));
    }
    let l3 = Layer::uniform(Affine::new(n + 1, w, b)?, relu, false);

    // g(y_k) = σ(σ(y_k) − σ((y_k+δ−1)/δ)).
    let w = (0..n)
        .map(|k| row(2 * n, &[(2 * k, int(1)), (2 * k + 1, int(-1))]))
        .collect();
    let l4 = Layer::uniform(Affine::new(2 * n, w, vec![int(0); n])?, relu, false);

    let out = Affine::new(n, vec![vec![int(1); n]], vec![int(0)])?;
    Network::new(2, vec![l1, l2, l3, l4], out)
}

/// Dyadic `c ≥ 1/N^k` such that `⌊c·t⌋ = ⌊t/N^k⌋` for all integers
/// `0 ≤ t < N^{k+1}`. Exact when `N^k` is a power of two.
pub fn quotient_weight(n: usize, k: u32) -> Dyadic {
    let nk = BigInt::from(n).pow(k);
    let q = BigRational::new(BigInt::one(), nk);
    // 2^{-p} ≤ N^{-(2k+1)} keeps (t)(c − 1/N^k) below the gap 1/N^k.
    let p = ((2 * k + 1) as f64 * (n as f64).log2()).ceil() as i64 + 1;
    Dyadic::from_rational(&q, p, Rounding::Ceil)
}

pub fn build_bit_locator(n: usize, l: u32) -> Result<Network> {
    check_positive("N", n as u64)?;
    check_positive("L", l as u64)?;
    checked_pow(n, l)?;
    let mut net = build_block_extractor(n, 1)?;
    for k in 1..l {
        net = locator_step(n, k, &net)?;
    }
    Ok(net)
}

/// `φ_{k+1}` from `φ_k`: `n = ⌊(m−1)/N^k⌋ + 1`, `j = m − (n−1)N^k`, extract
/// block `n` of length `N^k`, recurse on `(block, j)`.
fn locator_step(n: usize, k: u32, inner: &Network) -> Result<Network> {
    let relu = ActivationKind::Relu;
    let c = quotient_weight(n, k);
    let nk = Dyadic::from_int(BigInt::from(n).pow(k));

    // (s, m) ↦ (q, s, m) with q = ⌊c(m−1)⌋.
    let a1 = Layer::new(
        Affine::new(
            2,
            vec![row(2, &[(1, c.clone())]), row(2, &[(0, int(1))]), row(2, &[(1, int(1))])],
            vec![-c, int(0), int(0)],
        )?,
        vec![ActivationKind::Floor, relu, relu],
        vec![false, true, true],
    )?;
    // (q, s, m) ↦ (s, n, m, p) with n = q + 1, p = q·N^k.
    let a2 = Layer::uniform(
        Affine::new(
            3,
            vec![
                row(3, &[(1, int(1))]),
                row(3, &[(0, int(1))]),
                row(3, &[(2, int(1))]),
                row(3, &[(0, nk)]),
            ],
            vec![int(0), int(1), int(0), int(0)],
        )?,
        relu,
        true,
    );
    let front = Network::new(2, vec![a1, a2], Affine::identity(4))?;
    let extract = with_passthrough(&build_block_extractor(n, n.pow(k) as u32)?, 2)?;
    // (s', m, p) ↦ (s', j) with j = m − p.
    let merge = Network::new(
        3,
        vec![Layer::uniform(
            Affine::new(
                3,
                vec![row(3, &[(0, int(1))]), row(3, &[(1, int(1)), (2, int(-1))])],
                vec![int(0), int(0)],
            )?,
            relu,
            true,
        )],
        Affine::identity(2),
    )?;
    let net = compose_serial(&front, &extract)?;
    let net = compose_serial(&net, &merge)?;
    compose_serial(&net, inner)
}

pub fn build_point_fitter(n: usize, l: u32, bits: &BitString) -> Result<Network> {
    fitter_from_locator(&build_bit_locator(n, l)?, n, l, bits)
}

/// Point fitter around a prebuilt `build_bit_locator(n, l)`; lets callers
/// that need many fitters of one shape build the locator once.
pub fn fitter_from_locator(locator: &Network, n: usize, l: u32, bits: &BitString) -> Result<Network> {
    let len = checked_pow(n, l)?;
    if bits.len() as u64 != len {
        return Err(Error::InvalidArgument(format!(
            "point fitter with N={n}, L={l} needs {len} bits, got {}",
            bits.len()
        )));
    }
    let pre = Network::new(
        1,
        vec![Layer::new(
            Affine::new(1, vec![vec![int(0)], vec![int(1)]], vec![bits.value(), int(0)])?,
            vec![ActivationKind::Relu; 2],
            vec![true, false],
        )?],
        Affine::identity(2),
    )?;
    let net = compose_serial(&pre, locator)?;
    let post = Network::affine(Affine::scalar(int(2), int(0)))?;
    compose_serial(&net, &post)
}

/// Independent reference: the subsequence `bits_a … bits_b` (1-based).
pub fn oracle_extract(bits: &BitString, a: usize, b: usize) -> Result<BitString> {
    if a == 0 || a > b || b > bits.len() {
        return Err(Error::InvalidArgument(format!(
            "slice [{a}, {b}] out of range for {} bits",
            bits.len()
        )));
    }
    Ok(BitString::new(bits.bits()[a - 1..b].to_vec())?)
}

fn single_output(net: &Network, x: &[Dyadic]) -> Result<Dyadic> {
    Ok(net.eval_exact(x)?.swap_remove(0))
}

fn in_range(name: &str, v: u64, hi: u64) -> Result<()> {
    if v == 0 || v > hi {
        return Err(Error::InvalidArgument(format!("{name} = {v} outside 1..={hi}")));
    }
    Ok(())
}

/// Decodes a `len`-bit binary fraction produced by a gadget.
fn to_bits(v: &Dyadic, len: usize) -> Result<BitString> {
    let scaled = v.shift(len as i64);
    let value = scaled
        .to_integer()
        .filter(|i| i.sign() != num_bigint::Sign::Minus && i.bits() <= len as u64)
        .ok_or_else(|| Error::Precision(format!("gadget output {v} is not a {len}-bit fraction")))?;
    Ok(BitString::from_integer(&value, len)?)
}

#[derive(Clone, Debug)]
pub struct BlockExtractor {
    pub n: usize,
    pub j: u32,
    pub net: Network,
}

impl BlockExtractor {
    pub fn build(n: usize, j: u32) -> Result<Self> {
        checked_pow(n, 1)?;
        if (n as u64) * (j as u64) > MAX_BITS {
            return Err(Error::Unsupported(format!("N·J = {} too large", n as u64 * j as u64)));
        }
        Ok(BlockExtractor {
            n,
            j,
            net: build_block_extractor(n, j)?,
        })
    }

    pub fn extract(&self, s: &BitString, index: usize) -> Result<BitString> {
        if s.len() != self.n * self.j as usize {
            return Err(Error::InvalidArgument(format!(
                "expected {} bits, got {}",
                self.n * self.j as usize,
                s.len()
            )));
        }
        in_range("n", index as u64, self.n as u64)?;
        let out = single_output(&self.net, &[s.value(), Dyadic::from_int(index as i64)])?;
        to_bits(&out, self.j as usize)
    }
}

#[derive(Clone, Debug)]
pub struct BitLocator {
    pub n: usize,
    pub l: u32,
    pub net: Network,
}

impl BitLocator {
    pub fn build(n: usize, l: u32) -> Result<Self> {
        Ok(BitLocator {
            n,
            l,
            net: build_bit_locator(n, l)?,
        })
    }

    pub fn locate(&self, s: &BitString, m: u64) -> Result<bool> {
        let len = checked_pow(self.n, self.l)?;
        if s.len() as u64 != len {
            return Err(Error::InvalidArgument(format!("expected {len} bits, got {}", s.len())));
        }
        in_range("m", m, len)?;
        let out = single_output(&self.net, &[s.value(), Dyadic::from_int(m)])?;
        Ok(to_bits(&out, 1)?.bit(1))
    }
}

#[derive(Clone, Debug)]
pub struct PointFitter {
    pub n: usize,
    pub l: u32,
    pub net: Network,
}

impl PointFitter {
    pub fn build(n: usize, l: u32, bits: &BitString) -> Result<Self> {
        Ok(PointFitter {
            n,
            l,
            net: build_point_fitter(n, l, bits)?,
        })
    }

    pub fn points(&self) -> u64 {
        (self.n as u64).pow(self.l)
    }

    pub fn eval(&self, m: u64) -> Result<bool> {
        in_range("m", m, self.points())?;
        let out = single_output(&self.net, &[Dyadic::from_int(m)])?;
        if out == Dyadic::one() {
            Ok(true)
        } else if out.is_zero() {
            Ok(false)
        } else {
            Err(Error::Precision(format!("fitter output {out} is not a bit")))
        }
    }
}
