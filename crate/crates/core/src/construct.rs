//! The approximant for a continuous target on `[0,1]^d`, in four steps:
//!
//! 1. normalize `f̃ = (f − f(0) + Ω)/(2Ω)` with `Ω ≥ ω(√d)`, so `f̃ ∈ [0,1]`;
//! 2. map `x` to its cell index `β ∈ {0,…,K−1}^d`, `K = N^L` ([`build_projector_phi1`]);
//! 3. flatten `β` to `i = ψ₁(β)` and look up an `NL`-bit quantization of
//!    `f̃(β/K)` with `N·L` point fitters ([`build_psi2`]);
//! 4. undo the normalization in the output map.
//!
//! [`build_theorem1`] reparameterizes `(N, L)` into `(Ñ, L̃)` so the error
//! decays like `N^{−√L}` within width `max{d, 5N+13}` and depth `64dL+3`.

use std::time::{SystemTime, UNIX_EPOCH};

use num_bigint::BigInt;
use num_integer::Roots;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::{build_bit_locator, checked_pow, fitter_from_locator};
use crate::bounds::{bound_theorem1_with, bound_theorem2_with, omega_upper, DEFAULT_GUARD_BITS};
use crate::dyadic::{BitString, Dyadic, Rounding};
use crate::modulus::ModulusSpec;
use crate::network::{affine_wrap, compose_serial, stack_parallel, with_passthrough, ActivationKind, Affine, AuditReport, Layer, Network};
use crate::real::Interval;
use crate::target::{DomainAdapter, TargetFunction};
use crate::{Error, Result};

/// Largest sample table (`K^d` entries) the builders accept.
pub const MAX_TABLE: u64 = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BuildOptions {
    pub guard_bits: u32,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            guard_bits: DEFAULT_GUARD_BITS,
        }
    }
}

/// Uniform partition of `[0,1]^d` into `K^d` cells `Q_β`, with
/// `E_k = [k/K, (k+1)/K)` except `E_{K−1}`, which is closed at 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grid {
    pub d: usize,
    pub k: u64,
}

impl Grid {
    pub fn new(d: usize, k: u64) -> Result<Self> {
        if d == 0 || k == 0 {
            return Err(Error::InvalidArgument("grid needs d ≥ 1 and K ≥ 1".into()));
        }
        let cells = k
            .checked_pow(d as u32)
            .filter(|c| *c <= MAX_TABLE)
            .ok_or_else(|| Error::Unsupported(format!("K^d = {k}^{d} exceeds {MAX_TABLE} cells")))?;
        let _ = cells;
        Ok(Grid { d, k })
    }

    pub fn cells(&self) -> u64 {
        self.k.pow(self.d as u32)
    }

    /// `ψ₁(β) = 1 + Σ β_j K^{j−1}`.
    pub fn index(&self, beta: &[u64]) -> u64 {
        beta.iter().rev().fold(0, |acc, b| acc * self.k + b) + 1
    }

    /// Inverse of [`Grid::index`].
    pub fn beta(&self, i: u64) -> Vec<u64> {
        let mut rest = i - 1;
        (0..self.d)
            .map(|_| {
                let b = rest % self.k;
                rest /= self.k;
                b
            })
            .collect()
    }

    /// Corner `x_β = β/K` as exact rationals.
    pub fn corner(&self, beta: &[u64]) -> Vec<BigRational> {
        beta.iter()
            .map(|b| BigRational::new(BigInt::from(*b), BigInt::from(self.k)))
            .collect()
    }

    /// The unique `β` with `x ∈ Q_β`, by interval comparison.
    pub fn cell_of(&self, x: &[Dyadic]) -> Vec<u64> {
        let k = BigInt::from(self.k);
        x.iter()
            .map(|xi| {
                let scaled = xi.to_rational() * BigRational::from_integer(k.clone());
                let f = scaled.floor().to_integer();
                let f: i128 = f.try_into().unwrap_or(i128::MAX);
                f.clamp(0, self.k as i128 - 1) as u64
            })
            .collect()
    }
}

/// `φ₁(x) = ⌊−σ(−Kx + K − 1) + K − 1⌋`: width 1, depth 2.
pub fn build_quantizer_phi1(k: u64) -> Result<Network> {
    if k == 0 {
        return Err(Error::InvalidArgument("K must be positive".into()));
    }
    let kd = Dyadic::from_int(k);
    let km1 = Dyadic::from_int(k - 1);
    Network::new(
        1,
        vec![
            Layer::uniform(Affine::scalar(-&kd, km1.clone()), ActivationKind::Relu, false),
            Layer::uniform(Affine::scalar(-Dyadic::one(), km1), ActivationKind::Floor, false),
        ],
        Affine::identity(1),
    )
}

/// `Φ₁(x) = (φ₁(x₁), …, φ₁(x_d))`.
pub fn build_projector_phi1(d: usize, k: u64) -> Result<Network> {
    let phi1 = build_quantizer_phi1(k)?;
    stack_parallel(&vec![phi1; d])
}

pub fn build_indexer_psi1(d: usize, k: u64) -> Result<Affine> {
    let grid = Grid::new(d, k)?;
    let mut w = Vec::with_capacity(d);
    let mut p = BigInt::from(1);
    for _ in 0..grid.d {
        w.push(Dyadic::from(p.clone()));
        p *= grid.k;
    }
    Affine::new(d, vec![w], vec![Dyadic::one()])
}

/// Constants of step 1: `Ω`, the quantized anchor `f(0)` and its slack.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Normalization {
    pub omega: Dyadic,
    pub f0: Dyadic,
    pub eps_guard: Dyadic,
}

impl Normalization {
    pub fn compute(f: &dyn TargetFunction, guard_bits: u32) -> Result<Self> {
        let d = f.dim();
        let mut omega = omega_upper(f.modulus(), d, guard_bits)?;
        if omega.is_zero() {
            // constant target: any positive Ω keeps f̃ ≡ 1/2
            omega = Dyadic::one();
        }
        let zero = vec![BigRational::from_integer(BigInt::from(0)); d];
        let enc = f.enclose(&zero, guard_bits + 8)?;
        let f0 = enc.midpoint().round(guard_bits as i64, Rounding::Nearest);
        let gap = (enc.hi() - &f0).max(&f0 - enc.lo());
        let eps_guard = gap.round(guard_bits as i64, Rounding::Ceil);
        Ok(Normalization { omega, f0, eps_guard })
    }

    /// Enclosure of `(v − f0 + Ω)/(2Ω)`.
    pub fn normalize(&self, v: &Interval, prec: u32) -> Result<Interval> {
        let shifted = v.sub(&Interval::point(&self.f0 - &self.omega));
        Ok(shifted.div(&Interval::point(self.omega.shift(1)), prec)?)
    }
}

/// Quantized samples `ξ_i` of `f̃` at the corners, `i = ψ₁(β)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleTable {
    pub grid: Grid,
    pub bits: u32,
    /// `entries[i − 1]` is `ξ_i`.
    pub entries: Vec<BitString>,
    /// Enclosure of `f̃(x_β)` clamped to `[0,1]`, before quantization.
    pub normalized: Vec<Interval>,
}

impl SampleTable {
    /// `Σ_j 2^{−j} ξ_{i,j}`.
    pub fn value(&self, i: u64) -> Dyadic {
        self.entries[(i - 1) as usize].value()
    }
}

/// Samples `f̃` at every corner and keeps `bits` bits, with
/// `|ξ_i − f̃(x_β)| ≤ 2^{−bits}` certified for every entry.
pub fn sample_and_quantize(
    f: &dyn TargetFunction,
    grid: Grid,
    bits: u32,
    norm: &Normalization,
    guard_bits: u32,
) -> Result<SampleTable> {
    if f.dim() != grid.d {
        return Err(Error::Dimension(format!("target has dimension {}, grid {}", f.dim(), grid.d)));
    }
    if bits == 0 {
        return Err(Error::InvalidArgument("need at least one bit".into()));
    }
    let prec = bits + guard_bits + 8;
    let top = Dyadic::one() - Dyadic::pow2(-(bits as i64));
    let ulp = Dyadic::pow2(-(bits as i64));
    let rows: Vec<(BitString, Interval)> = (1..=grid.cells())
        .into_par_iter()
        .map(|i| {
            let x = grid.corner(&grid.beta(i));
            let raw = f.enclose(&x, prec)?;
            let normalized = norm.normalize(&raw, prec)?;
            let clamped = normalized.clamp(&Dyadic::zero(), &Dyadic::one()).map_err(|_| {
                Error::Modulus(format!(
                    "normalized sample {normalized:?} at corner {i} lies outside [0, 1]; the declared modulus does not bound f"
                ))
            })?;
            let xi = clamped.hi().round(bits as i64, Rounding::Floor).min(top.clone());
            if clamped.hi() - &xi > ulp || &xi - clamped.lo() > ulp {
                return Err(Error::Precision(format!(
                    "sample {i} enclosure {clamped:?} too wide for {bits}-bit quantization"
                )));
            }
            let code = xi.shift(bits as i64).to_integer().unwrap_or_default();
            Ok((BitString::from_integer(&code, bits as usize)?, clamped))
        })
        .collect::<Result<_>>()?;
    let (entries, normalized) = rows.into_iter().unzip();
    Ok(SampleTable {
        grid,
        bits,
        entries,
        normalized,
    })
}

/// `ψ₂(i) = Σ_{j=1..NL} 2^{−j} ξ_{i,j}` on `{1,…,K^d}`: `L` sequential blocks,
/// each with `N` parallel point fitters plus two carried channels (the index
/// `i` and the running partial sum).
pub fn build_psi2(n: usize, l: u32, table: &SampleTable) -> Result<Network> {
    let d = table.grid.d;
    let levels = (d as u32)
        .checked_mul(l)
        .ok_or_else(|| Error::Unsupported("d·L overflows".into()))?;
    let cells = checked_pow(n, levels)?;
    if table.grid.k != checked_pow(n, l)? || cells != table.entries.len() as u64 {
        return Err(Error::Dimension(format!(
            "table has {} entries, expected N^(dL) = {cells}",
            table.entries.len()
        )));
    }
    if table.bits as u64 != n as u64 * l as u64 {
        return Err(Error::Dimension(format!("table has {} bits per entry, expected NL", table.bits)));
    }
    let locator = build_bit_locator(n, levels)?;
    let fitter_for = |j: usize| -> Result<Network> {
        let column: Vec<bool> = table.entries.iter().map(|e| e.bit(j)).collect();
        fitter_from_locator(&locator, n, levels, &BitString::new(column)?)
    };

    // i ↦ (i, 0)
    let mut net = Network::affine(Affine::new(
        1,
        vec![vec![Dyadic::one()], vec![Dyadic::zero()]],
        vec![Dyadic::zero(); 2],
    )?)?;
    for block in 0..l as usize {
        let fitters = (0..n)
            .map(|t| fitter_for(block * n + t + 1))
            .collect::<Result<Vec<_>>>()?;
        let inner = with_passthrough(&stack_parallel(&fitters)?, 2)?;
        // (i, r) ↦ (i, …, i, i, r)
        let mut fan = Affine::zeros(n + 2, 2);
        for row in 0..=n {
            fan.set_weight(row, 0, Dyadic::one());
        }
        fan.set_weight(n + 1, 1, Dyadic::one());
        // (o_1, …, o_N, i, r) ↦ (i, r + Σ 2^{−j} o_j)
        let mut sum = Affine::zeros(2, n + 2);
        for t in 0..n {
            sum.set_weight(1, t, Dyadic::pow2(-((block * n + t + 1) as i64)));
        }
        sum.set_weight(0, n, Dyadic::one());
        sum.set_weight(1, n + 1, Dyadic::one());
        net = compose_serial(&net, &affine_wrap(&inner, Some(&fan), Some(&sum))?)?;
    }
    let pick = Affine::new(2, vec![vec![Dyadic::zero(), Dyadic::one()]], vec![Dyadic::zero()])?;
    affine_wrap(&net, None, Some(&pick))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub target: String,
    pub d: usize,
    pub n: u64,
    pub l: u64,
    pub theorem: u8,
    pub n_tilde: Option<u64>,
    pub l_tilde: Option<u64>,
    /// `K` of the construction actually built.
    pub k: u64,
    pub modulus: ModulusSpec,
    pub omega: Dyadic,
    pub guard_bits: u32,
    pub eps_guard: Dyadic,
    pub f0: Dyadic,
    /// `M` when the target lives on `[−M, M]^d`.
    pub domain_half_width: Option<Dyadic>,
    pub audit: AuditReport,
    pub width_limit: u64,
    pub depth_limit: u64,
    pub bound: Dyadic,
    /// Excluded from [`Certificate::same_claims`].
    pub created_unix: u64,
}

impl Certificate {
    /// Equality ignoring the timestamp.
    pub fn same_claims(&self, other: &Certificate) -> bool {
        let mut a = self.clone();
        a.created_unix = other.created_unix;
        &a == other
    }

    /// Recomputes the bound from the recorded constants with the shared calculators.
    pub fn recompute_bound(&self) -> Result<Dyadic> {
        let g = self.guard_bits;
        match self.theorem {
            2 => bound_theorem2_with(&self.modulus, self.d, self.n, self.l, &self.omega, &self.eps_guard, g),
            1 => {
                let (nt, lt) = (
                    self.n_tilde.ok_or_else(|| Error::InvalidArgument("missing n_tilde".into()))?,
                    self.l_tilde.ok_or_else(|| Error::InvalidArgument("missing l_tilde".into()))?,
                );
                let t1 = bound_theorem1_with(&self.modulus, self.d, self.n, self.l, &self.omega, &self.eps_guard, g)?;
                let t2 = bound_theorem2_with(&self.modulus, self.d, nt, lt, &self.omega, &self.eps_guard, g)?;
                Ok(t1.max(t2))
            }
            t => Err(Error::InvalidArgument(format!("unknown theorem {t}"))),
        }
    }

    /// Audited sizes within the recorded limits.
    pub fn sizes_ok(&self) -> bool {
        self.audit.width as u64 <= self.width_limit && self.audit.depth as u64 <= self.depth_limit
    }
}

/// Seconds since the epoch, or `SOURCE_DATE_EPOCH` when set.
fn now_unix() -> u64 {
    if let Some(t) = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|v| v.parse().ok()) {
        return t;
    }
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Intermediate artifacts of a [`build_theorem2`] run, for inspection and tests.
#[derive(Clone, Debug)]
pub struct Construction {
    pub network: Network,
    pub normalization: Normalization,
    pub table: SampleTable,
}

/// Steps 1–4 for given `(N, L)`, without certificate bookkeeping.
pub fn construct(f: &dyn TargetFunction, n: u64, l: u64, opts: &BuildOptions) -> Result<Construction> {
    let d = f.dim();
    if n < 2 {
        return Err(Error::Unsupported(
            "N = 1 degenerates to a constant approximant; use N ≥ 2 (the reparameterized path maps N = 1 to 2)".into(),
        ));
    }
    if l == 0 || d == 0 {
        return Err(Error::InvalidArgument("L and d must be positive".into()));
    }
    let (nu, lu) = (
        usize::try_from(n).map_err(|_| Error::Unsupported("N too large".into()))?,
        u32::try_from(l).map_err(|_| Error::Unsupported("L too large".into()))?,
    );
    let k = checked_pow(nu, lu)?;
    let grid = Grid::new(d, k)?;
    let nl = u32::try_from(n * l).map_err(|_| Error::Unsupported("N·L too large".into()))?;
    let norm = Normalization::compute(f, opts.guard_bits)?;
    let table = sample_and_quantize(f, grid, nl, &norm, opts.guard_bits)?;

    let front = affine_wrap(&build_projector_phi1(d, k)?, None, Some(&build_indexer_psi1(d, k)?))?;
    let phi_tilde = compose_serial(&front, &build_psi2(nu, lu, &table)?)?;
    let rescale = Affine::scalar(norm.omega.shift(1), &norm.f0 - &norm.omega);
    let network = affine_wrap(&phi_tilde, None, Some(&rescale))?;
    Ok(Construction {
        network,
        normalization: norm,
        table,
    })
}

fn check_sizes(cert: &Certificate) -> Result<()> {
    if !cert.sizes_ok() {
        return Err(Error::Unsupported(format!(
            "audited width {} / depth {} exceed the limits {} / {}",
            cert.audit.width, cert.audit.depth, cert.width_limit, cert.depth_limit
        )));
    }
    Ok(())
}

/// Width `≤ max{d, 2N²+5N}`, depth `≤ 7dL²+3`, error
/// `≤ ω(√d·N^{−L}) + 2Ω·2^{−NL} + ε_guard`.
pub fn build_theorem2(f: &dyn TargetFunction, n: u64, l: u64, opts: &BuildOptions) -> Result<(Network, Certificate)> {
    let c = construct(f, n, l, opts)?;
    let d = f.dim();
    let norm = &c.normalization;
    let bound = bound_theorem2_with(f.modulus(), d, n, l, &norm.omega, &norm.eps_guard, opts.guard_bits)?;
    let cert = Certificate {
        target: f.id(),
        d,
        n,
        l,
        theorem: 2,
        n_tilde: None,
        l_tilde: None,
        k: c.table.grid.k,
        modulus: f.modulus().clone(),
        omega: norm.omega.clone(),
        guard_bits: opts.guard_bits,
        eps_guard: norm.eps_guard.clone(),
        f0: norm.f0.clone(),
        domain_half_width: None,
        audit: c.network.audit(),
        width_limit: (d as u64).max(2 * n * n + 5 * n),
        depth_limit: 7 * d as u64 * l * l + 3,
        bound,
        created_unix: now_unix(),
    };
    check_sizes(&cert)?;
    Ok((c.network, cert))
}

/// `(Ñ, L̃)` with `(Ñ−1)² ≤ N < Ñ²` and `(L̃−1)² ≤ 4L < L̃²`.
pub fn reparameterize(n: u64, l: u64) -> Result<(u64, u64)> {
    if n == 0 || l == 0 {
        return Err(Error::InvalidArgument("N and L must be positive".into()));
    }
    let nt = n.sqrt() + 1;
    let lt = (4 * l).sqrt() + 1;
    let ok = (nt - 1) * (nt - 1) <= n
        && n < nt * nt
        && (lt - 1) * (lt - 1) <= 4 * l
        && 4 * l < lt * lt
        && 2 * nt * nt + 5 * nt <= 5 * n + 13
        && 7 * lt * lt <= 64 * l;
    if !ok {
        return Err(Error::Unsupported(format!("reparameterization of ({n}, {l}) violates its size chain")));
    }
    Ok((nt, lt))
}

/// Width `≤ max{d, 5N+13}`, depth `≤ 64dL+3`, error
/// `≤ ω(√d·N^{−√L}) + 2Ω·N^{−√L} + ε_guard` (via `build_theorem2(Ñ, L̃)`).
pub fn build_theorem1(f: &dyn TargetFunction, n: u64, l: u64, opts: &BuildOptions) -> Result<(Network, Certificate)> {
    let (nt, lt) = reparameterize(n, l)?;
    let (net, inner) = build_theorem2(f, nt, lt, opts)?;
    let d = f.dim();
    let mut cert = Certificate {
        n,
        l,
        theorem: 1,
        n_tilde: Some(nt),
        l_tilde: Some(lt),
        width_limit: (d as u64).max(5 * n + 13),
        depth_limit: 64 * d as u64 * l + 3,
        ..inner
    };
    cert.bound = cert.recompute_bound()?;
    check_sizes(&cert)?;
    Ok((net, cert))
}

/// Approximates `f` on `[−M, M]^d` by building on `x ↦ f(2M(x − 1/2))` and
/// fusing `y ↦ (y + M)/(2M)` into the first layer. `M` must be a power of two
/// so that the fused weights stay dyadic.
pub fn wrap_domain<T: TargetFunction>(
    f: T,
    half_width: &Dyadic,
    theorem: u8,
    n: u64,
    l: u64,
    opts: &BuildOptions,
) -> Result<(Network, Certificate)> {
    if half_width.signum() <= 0 || *half_width.mantissa() != BigInt::from(1) {
        return Err(Error::InvalidArgument(format!(
            "M = {half_width} must be a power of two (p/2^q with p = 1 after reduction)"
        )));
    }
    let d = f.dim();
    let adapted = DomainAdapter::new(f, half_width.clone())?;
    let (net, mut cert) = match theorem {
        1 => build_theorem1(&adapted, n, l, opts)?,
        2 => build_theorem2(&adapted, n, l, opts)?,
        t => return Err(Error::InvalidArgument(format!("theorem must be 1 or 2, got {t}"))),
    };
    let inv = half_width.shift(1);
    let scale = Dyadic::new(BigInt::from(1), -inv.exponent());
    let mut pre = Affine::zeros(d, d);
    for j in 0..d {
        pre.set_weight(j, j, scale.clone());
        pre.set_bias(j, Dyadic::pow2(-1));
    }
    let net = affine_wrap(&net, Some(&pre), None)?;
    cert.domain_half_width = Some(half_width.clone());
    cert.audit = net.audit();
    Ok((net, cert))
}
