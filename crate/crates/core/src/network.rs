//! Layered Floor-ReLU network IR.
//!
//! A [`Network`] is `x → (W₀,b₀) → act → … → (W_L,b_L)`: every hidden neuron
//! applies exactly one of [`ActivationKind::Relu`] or [`ActivationKind::Floor`]
//! and the output map is affine. Neurons whose pre-activation is known to be
//! nonnegative (the "identity" carries of the gadgets) are ReLU neurons with
//! a `nonneg` obligation that the exact evaluator checks.

use serde::{Deserialize, Serialize};

use crate::dyadic::Dyadic;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivationKind {
    Relu,
    Floor,
}

impl ActivationKind {
    pub fn apply(self, x: &Dyadic) -> Dyadic {
        match self {
            ActivationKind::Relu => x.relu(),
            ActivationKind::Floor => x.floor(),
        }
    }

    pub fn apply_f64(self, x: f64) -> f64 {
        match self {
            ActivationKind::Relu => x.max(0.0),
            ActivationKind::Floor => x.floor(),
        }
    }
}

/// `x ↦ W x + b` with `W` stored row-major (`out_dim × in_dim`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Affine {
    in_dim: usize,
    weights: Vec<Vec<Dyadic>>,
    bias: Vec<Dyadic>,
}

impl Affine {
    pub fn new(in_dim: usize, weights: Vec<Vec<Dyadic>>, bias: Vec<Dyadic>) -> Result<Self> {
        if weights.len() != bias.len() {
            return Err(Error::Dimension(format!(
                "{} weight rows but {} bias entries",
                weights.len(),
                bias.len()
            )));
        }
        if let Some((r, row)) = weights.iter().enumerate().find(|(_, row)| row.len() != in_dim) {
            return Err(Error::Dimension(format!(
                "weight row {r} has {} entries, expected {in_dim}",
                row.len()
            )));
        }
        Ok(Affine {
            in_dim,
            weights,
            bias,
        })
    }

    pub fn zeros(out_dim: usize, in_dim: usize) -> Self {
        Affine {
            in_dim,
            weights: vec![vec![Dyadic::zero(); in_dim]; out_dim],
            bias: vec![Dyadic::zero(); out_dim],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut a = Affine::zeros(n, n);
        for i in 0..n {
            a.weights[i][i] = Dyadic::one();
        }
        a
    }

    /// `x ↦ scale·x + shift` on a single coordinate.
    pub fn scalar(scale: Dyadic, shift: Dyadic) -> Self {
        Affine {
            in_dim: 1,
            weights: vec![vec![scale]],
            bias: vec![shift],
        }
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.bias.len()
    }

    pub fn weights(&self) -> &[Vec<Dyadic>] {
        &self.weights
    }

    pub fn bias(&self) -> &[Dyadic] {
        &self.bias
    }

    pub fn set_weight(&mut self, row: usize, col: usize, v: Dyadic) {
        self.weights[row][col] = v;
    }

    pub fn set_bias(&mut self, row: usize, v: Dyadic) {
        self.bias[row] = v;
    }

    pub fn apply(&self, x: &[Dyadic]) -> Vec<Dyadic> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(row, b)| {
                let mut acc = b.clone();
                for (w, xi) in row.iter().zip(x) {
                    if !w.is_zero() && !xi.is_zero() {
                        acc = acc + w * xi;
                    }
                }
                acc
            })
            .collect()
    }

    pub fn apply_f64(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(row, b)| {
                row.iter()
                    .zip(x)
                    .filter(|(w, _)| !w.is_zero())
                    .fold(b.to_f64(), |acc, (w, xi)| acc + w.to_f64() * xi)
            })
            .collect()
    }

    /// `self ∘ inner`, i.e. `x ↦ W(Ax + a) + b`.
    pub fn after(&self, inner: &Affine) -> Result<Affine> {
        if inner.out_dim() != self.in_dim {
            return Err(Error::Dimension(format!(
                "cannot compose: inner produces {} values, outer expects {}",
                inner.out_dim(),
                self.in_dim
            )));
        }
        let mut weights = Vec::with_capacity(self.out_dim());
        let mut bias = Vec::with_capacity(self.out_dim());
        for (row, b) in self.weights.iter().zip(&self.bias) {
            let mut new_row = vec![Dyadic::zero(); inner.in_dim];
            let mut new_b = b.clone();
            for (k, w) in row.iter().enumerate() {
                if w.is_zero() {
                    continue;
                }
                for (j, a) in inner.weights[k].iter().enumerate() {
                    if !a.is_zero() {
                        new_row[j] = &new_row[j] + &(w * a);
                    }
                }
                new_b = new_b + w * &inner.bias[k];
            }
            weights.push(new_row);
            bias.push(new_b);
        }
        Ok(Affine {
            in_dim: inner.in_dim,
            weights,
            bias,
        })
    }

    pub fn block_diag(blocks: &[&Affine]) -> Affine {
        let in_dim: usize = blocks.iter().map(|b| b.in_dim).sum();
        let mut weights = Vec::new();
        let mut bias = Vec::new();
        let mut offset = 0;
        for b in blocks {
            for (row, bi) in b.weights.iter().zip(&b.bias) {
                let mut r = vec![Dyadic::zero(); in_dim];
                r[offset..offset + b.in_dim].clone_from_slice(row);
                weights.push(r);
                bias.push(bi.clone());
            }
            offset += b.in_dim;
        }
        Affine {
            in_dim,
            weights,
            bias,
        }
    }

    fn nonzero_count(&self) -> usize {
        self.weights.iter().flatten().filter(|w| !w.is_zero()).count()
            + self.bias.iter().filter(|b| !b.is_zero()).count()
    }
}

/// One hidden layer: affine map followed by per-neuron activations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layer {
    affine: Affine,
    activations: Vec<ActivationKind>,
    nonneg: Vec<bool>,
}

impl Layer {
    pub fn new(affine: Affine, activations: Vec<ActivationKind>, nonneg: Vec<bool>) -> Result<Self> {
        let n = affine.out_dim();
        if activations.len() != n || nonneg.len() != n {
            return Err(Error::Dimension(format!(
                "layer has {n} neurons but {} activations and {} obligation flags",
                activations.len(),
                nonneg.len()
            )));
        }
        Ok(Layer {
            affine,
            activations,
            nonneg,
        })
    }

    /// All neurons share one activation and obligation flag.
    pub fn uniform(affine: Affine, act: ActivationKind, nonneg: bool) -> Self {
        let n = affine.out_dim();
        Layer {
            affine,
            activations: vec![act; n],
            nonneg: vec![nonneg; n],
        }
    }

    pub fn affine(&self) -> &Affine {
        &self.affine
    }

    pub fn activations(&self) -> &[ActivationKind] {
        &self.activations
    }

    pub fn nonneg(&self) -> &[bool] {
        &self.nonneg
    }

    pub fn in_dim(&self) -> usize {
        self.affine.in_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.affine.out_dim()
    }

    fn with_affine(&self, affine: Affine) -> Layer {
        Layer {
            affine,
            activations: self.activations.clone(),
            nonneg: self.nonneg.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub width: usize,
    pub depth: usize,
    pub nonzero_params: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Network {
    input_dim: usize,
    layers: Vec<Layer>,
    output: Affine,
}

impl Network {
    pub fn new(input_dim: usize, layers: Vec<Layer>, output: Affine) -> Result<Self> {
        if input_dim == 0 {
            return Err(Error::Dimension("input dimension must be positive".into()));
        }
        let mut prev = input_dim;
        for (i, layer) in layers.iter().enumerate() {
            if layer.in_dim() != prev {
                return Err(Error::Dimension(format!(
                    "layer {i} consumes {} values but receives {prev}",
                    layer.in_dim()
                )));
            }
            prev = layer.out_dim();
        }
        if output.in_dim() != prev {
            return Err(Error::Dimension(format!(
                "output map consumes {} values but receives {prev}",
                output.in_dim()
            )));
        }
        Ok(Network {
            input_dim,
            layers,
            output,
        })
    }

    /// Depth-0 network computing the given affine map.
    pub fn affine(map: Affine) -> Result<Self> {
        Network::new(map.in_dim(), Vec::new(), map)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Network::affine(Affine::identity(n))
    }

    /// Depth-1 identity on `n` nonnegative channels.
    pub fn passthrough(n: usize) -> Result<Self> {
        Network::new(
            n,
            vec![Layer::uniform(Affine::identity(n), ActivationKind::Relu, true)],
            Affine::identity(n),
        )
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output.out_dim()
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn output(&self) -> &Affine {
        &self.output
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn width(&self) -> usize {
        self.layers.iter().map(Layer::out_dim).max().unwrap_or(0)
    }

    pub fn audit(&self) -> AuditReport {
        AuditReport {
            width: self.width(),
            depth: self.depth(),
            nonzero_params: self
                .layers
                .iter()
                .map(|l| l.affine.nonzero_count())
                .sum::<usize>()
                + self.output.nonzero_count(),
        }
    }

    fn check_input(&self, n: usize) -> Result<()> {
        if n != self.input_dim {
            return Err(Error::Dimension(format!(
                "network expects {} inputs, got {n}",
                self.input_dim
            )));
        }
        Ok(())
    }

    /// Exact forward pass. Returns the hidden activations of every layer
    /// followed by the output vector.
    pub fn trace_exact(&self, x: &[Dyadic]) -> Result<Vec<Vec<Dyadic>>> {
        self.check_input(x.len())?;
        let mut trace = Vec::with_capacity(self.layers.len() + 1);
        let mut cur = x.to_vec();
        for (li, layer) in self.layers.iter().enumerate() {
            let pre = layer.affine.apply(&cur);
            let mut post = Vec::with_capacity(pre.len());
            for (n, h) in pre.iter().enumerate() {
                if layer.nonneg[n] && h.is_negative() {
                    return Err(Error::Obligation {
                        layer: li,
                        neuron: n,
                        value: h.to_string(),
                    });
                }
                post.push(layer.activations[n].apply(h));
            }
            trace.push(post.clone());
            cur = post;
        }
        trace.push(self.output.apply(&cur));
        Ok(trace)
    }

    pub fn eval_exact(&self, x: &[Dyadic]) -> Result<Vec<Dyadic>> {
        let mut trace = self.trace_exact(x)?;
        Ok(trace.pop().unwrap_or_default())
    }

    /// Binary64 forward pass with the same wiring; no exactness guarantee.
    pub fn trace_float(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_input(x.len())?;
        if let Some(n) = x.iter().position(|v| v.is_nan()) {
            return Err(Error::NaN { layer: 0, neuron: n });
        }
        let mut trace = Vec::with_capacity(self.layers.len() + 1);
        let mut cur = x.to_vec();
        for (li, layer) in self.layers.iter().enumerate() {
            let post: Vec<f64> = layer
                .affine
                .apply_f64(&cur)
                .into_iter()
                .zip(&layer.activations)
                .map(|(h, a)| a.apply_f64(h))
                .collect();
            if let Some(n) = post.iter().position(|v| v.is_nan()) {
                return Err(Error::NaN { layer: li, neuron: n });
            }
            trace.push(post.clone());
            cur = post;
        }
        let out = self.output.apply_f64(&cur);
        if let Some(n) = out.iter().position(|v| v.is_nan()) {
            return Err(Error::NaN {
                layer: self.layers.len(),
                neuron: n,
            });
        }
        trace.push(out);
        Ok(trace)
    }

    pub fn eval_float(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut trace = self.trace_float(x)?;
        Ok(trace.pop().unwrap_or_default())
    }

    /// Number of parameters that differ between two networks of identical
    /// shape, or `None` when the shapes differ.
    pub fn parameter_diff(&self, other: &Network) -> Option<usize> {
        if self.input_dim != other.input_dim || self.layers.len() != other.layers.len() {
            return None;
        }
        let affine_diff = |a: &Affine, b: &Affine| -> Option<usize> {
            if a.in_dim != b.in_dim || a.out_dim() != b.out_dim() {
                return None;
            }
            let w = a
                .weights
                .iter()
                .flatten()
                .zip(b.weights.iter().flatten())
                .filter(|(x, y)| x != y)
                .count();
            let bias = a.bias.iter().zip(&b.bias).filter(|(x, y)| x != y).count();
            Some(w + bias)
        };
        let mut total = 0;
        for (la, lb) in self.layers.iter().zip(&other.layers) {
            if la.activations != lb.activations || la.nonneg != lb.nonneg {
                return None;
            }
            total += affine_diff(&la.affine, &lb.affine)?;
        }
        Some(total + affine_diff(&self.output, &other.output)?)
    }

    /// Extends the network with extra hidden layers that carry the last
    /// hidden activations unchanged, so the depth becomes `depth`.
    ///
    /// ReLU outputs are carried by ReLU neurons (their input is a ReLU output,
    /// hence nonnegative); Floor outputs are integers and are carried by Floor
    /// neurons. A depth-0 network is first lifted with the `σ(y) − σ(−y)` split.
    pub fn pad_to_depth(&self, depth: usize) -> Result<Network> {
        if depth < self.depth() {
            return Err(Error::InvalidArgument(format!(
                "cannot pad depth {} down to {depth}",
                self.depth()
            )));
        }
        if depth == self.depth() {
            return Ok(self.clone());
        }
        let mut net = self.clone();
        if net.layers.is_empty() {
            let m = net.output.out_dim();
            let neg = Affine {
                in_dim: net.output.in_dim,
                weights: net.output.weights.iter().map(|r| r.iter().map(|w| -w).collect()).collect(),
                bias: net.output.bias.iter().map(|b| -b).collect(),
            };
            let mut weights = net.output.weights.clone();
            weights.extend(neg.weights);
            let mut bias = net.output.bias.clone();
            bias.extend(neg.bias);
            let first = Layer::uniform(Affine::new(net.input_dim, weights, bias)?, ActivationKind::Relu, false);
            let mut out = Affine::zeros(m, 2 * m);
            for i in 0..m {
                out.weights[i][i] = Dyadic::one();
                out.weights[i][m + i] = -Dyadic::one();
            }
            net = Network::new(net.input_dim, vec![first], out)?;
        }
        while net.layers.len() < depth {
            let last = net.layers.last().expect("nonempty");
            let n = last.out_dim();
            let acts = last.activations.clone();
            let nonneg = acts.iter().map(|a| *a == ActivationKind::Relu).collect();
            net.layers.push(Layer::new(Affine::identity(n), acts, nonneg)?);
        }
        Ok(net)
    }
}

/// Serial composition `second ∘ first`. The output map of `first` is fused
/// into the first affine map of `second`, so depths add exactly.
pub fn compose_serial(first: &Network, second: &Network) -> Result<Network> {
    if first.output_dim() != second.input_dim() {
        return Err(Error::Dimension(format!(
            "first network produces {} values, second expects {}",
            first.output_dim(),
            second.input_dim()
        )));
    }
    let mut layers = first.layers.clone();
    let output = match second.layers.split_first() {
        Some((head, tail)) => {
            layers.push(head.with_affine(head.affine.after(&first.output)?));
            layers.extend(tail.iter().cloned());
            second.output.clone()
        }
        None => second.output.after(&first.output)?,
    };
    Network::new(first.input_dim, layers, output)
}

/// Parallel stacking: inputs and outputs are concatenated in order, weights
/// are block diagonal, shallower members are padded to the common depth.
pub fn stack_parallel(nets: &[Network]) -> Result<Network> {
    if nets.is_empty() {
        return Err(Error::InvalidArgument("cannot stack zero networks".into()));
    }
    let depth = nets.iter().map(Network::depth).max().unwrap_or(0);
    let padded = nets
        .iter()
        .map(|n| n.pad_to_depth(depth))
        .collect::<Result<Vec<_>>>()?;
    let input_dim = padded.iter().map(Network::input_dim).sum();
    let mut layers = Vec::with_capacity(depth);
    for l in 0..depth {
        let affines: Vec<&Affine> = padded.iter().map(|n| &n.layers[l].affine).collect();
        let acts = padded.iter().flat_map(|n| n.layers[l].activations.iter().copied()).collect();
        let nonneg = padded.iter().flat_map(|n| n.layers[l].nonneg.iter().copied()).collect();
        layers.push(Layer::new(Affine::block_diag(&affines), acts, nonneg)?);
    }
    let outs: Vec<&Affine> = padded.iter().map(|n| &n.output).collect();
    Network::new(input_dim, layers, Affine::block_diag(&outs))
}

/// Appends `carried` identity channels (inputs after the network's own,
/// outputs after the network's own). Hidden copies are ReLU neurons with a
/// nonnegativity obligation.
pub fn with_passthrough(net: &Network, carried: usize) -> Result<Network> {
    if carried == 0 {
        return Ok(net.clone());
    }
    let id = Affine::identity(carried);
    let mut layers = Vec::with_capacity(net.depth());
    for layer in &net.layers {
        let mut acts = layer.activations.clone();
        acts.extend(std::iter::repeat_n(ActivationKind::Relu, carried));
        let mut nonneg = layer.nonneg.clone();
        nonneg.extend(std::iter::repeat_n(true, carried));
        layers.push(Layer::new(Affine::block_diag(&[&layer.affine, &id]), acts, nonneg)?);
    }
    Network::new(
        net.input_dim + carried,
        layers,
        Affine::block_diag(&[&net.output, &id]),
    )
}

/// Fuses `pre` into the first affine map and `post` into the output map.
/// Depth is unchanged.
pub fn affine_wrap(net: &Network, pre: Option<&Affine>, post: Option<&Affine>) -> Result<Network> {
    let mut result = net.clone();
    if let Some(pre) = pre {
        result = compose_serial(&Network::affine(pre.clone())?, &result)?;
    }
    if let Some(post) = post {
        let output = post.after(&result.output)?;
        result = Network::new(result.input_dim, result.layers, output)?;
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn dy(m: i64, e: i64) -> Dyadic {
        Dyadic::new(BigInt::from(m), e)
    }

    fn int(v: i64) -> Dyadic {
        Dyadic::from_int(v)
    }

    fn single(act: ActivationKind, w: Dyadic, b: Dyadic) -> Network {
        Network::new(
            1,
            vec![Layer::uniform(Affine::scalar(w, b), act, false)],
            Affine::identity(1),
        )
        .unwrap()
    }

    /// A small mixed network used across tests: 2 → 5 → 3 → 1.
    pub(crate) fn sample_network() -> Network {
        let w0: Vec<Vec<Dyadic>> = (0..5)
            .map(|i| vec![dy(i as i64 - 2, -1), dy(3 - i as i64, -2)])
            .collect();
        let b0 = (0..5).map(|i| dy(i as i64, -3)).collect();
        let a0 = vec![
            ActivationKind::Relu,
            ActivationKind::Floor,
            ActivationKind::Relu,
            ActivationKind::Floor,
            ActivationKind::Relu,
        ];
        let w1 = (0..3)
            .map(|i| (0..5).map(|j| dy((i * 5 + j) as i64 % 7 - 3, -1)).collect())
            .collect();
        let b1 = vec![int(1), dy(-1, -2), int(0)];
        let a1 = vec![ActivationKind::Floor, ActivationKind::Relu, ActivationKind::Relu];
        Network::new(
            2,
            vec![
                Layer::new(Affine::new(2, w0, b0).unwrap(), a0, vec![false; 5]).unwrap(),
                Layer::new(Affine::new(5, w1, b1).unwrap(), a1, vec![false; 3]).unwrap(),
            ],
            Affine::new(3, vec![vec![int(1), dy(-3, -1), int(2)]], vec![dy(1, -4)]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn eval_examples() {
        let floor = single(ActivationKind::Floor, int(1), int(0));
        assert_eq!(floor.eval_exact(&[dy(7, -2)]).unwrap(), vec![int(1)]);
        let relu = single(ActivationKind::Relu, int(-1), int(0));
        assert_eq!(relu.eval_exact(&[int(1)]).unwrap(), vec![int(0)]);
        let aff = Network::affine(Affine::scalar(int(2), int(3))).unwrap();
        assert_eq!(aff.eval_exact(&[int(5)]).unwrap(), vec![int(13)]);
        assert!(aff.eval_exact(&[int(5), int(1)]).is_err());
    }

    #[test]
    fn float_backend_examples() {
        let id = Network::identity(1).unwrap();
        assert_eq!(id.eval_float(&[0.5]).unwrap(), vec![0.5]);
        let floor = single(ActivationKind::Floor, int(1), int(0));
        let x = int(1) - dy(1, -60);
        assert_eq!(floor.eval_exact(std::slice::from_ref(&x)).unwrap(), vec![int(0)]);
        assert_eq!(floor.eval_float(&[x.to_f64()]).unwrap(), vec![1.0]);
        assert!(id.eval_float(&[f64::NAN]).is_err());
        let aff = Network::affine(Affine::scalar(dy(3, -1), int(-2))).unwrap();
        let (a, b) = (0.3, 1.7);
        let lhs = aff.eval_float(&[a + b]).unwrap()[0];
        let rhs = aff.eval_float(&[a]).unwrap()[0] + aff.eval_float(&[b]).unwrap()[0] + 2.0;
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn audit_examples() {
        let net = sample_network();
        let a = net.audit();
        assert_eq!((a.width, a.depth), (5, 2));
        assert_eq!(Network::identity(3).unwrap().audit().depth, 0);
    }

    #[test]
    fn compose_examples() {
        let net = sample_network();
        let id = Network::identity(2).unwrap();
        let c = compose_serial(&id, &net).unwrap();
        for x in [[dy(1, -1), dy(3, -2)], [int(-2), int(5)]] {
            assert_eq!(c.eval_exact(&x).unwrap(), net.eval_exact(&x).unwrap());
        }
        let deep = Network::passthrough(1).unwrap().pad_to_depth(4).unwrap();
        let three = Network::passthrough(1).unwrap().pad_to_depth(3).unwrap();
        assert_eq!(compose_serial(&deep, &three).unwrap().depth(), 7);
        assert!(compose_serial(&net, &net).is_err());
    }

    #[test]
    fn stack_examples() {
        let net = sample_network();
        let s = stack_parallel(std::slice::from_ref(&net)).unwrap();
        assert_eq!(s, net);
        let a = Network::new(1, vec![Layer::uniform(Affine::new(1, vec![vec![int(1)]; 3], vec![int(0); 3]).unwrap(), ActivationKind::Relu, false)], Affine::new(3, vec![vec![int(1); 3]], vec![int(0)]).unwrap()).unwrap();
        let b = Network::new(1, vec![Layer::uniform(Affine::new(1, vec![vec![int(1)]; 4], vec![int(0); 4]).unwrap(), ActivationKind::Floor, false)], Affine::new(4, vec![vec![int(1); 4]], vec![int(0)]).unwrap()).unwrap();
        assert_eq!(stack_parallel(&[a, b]).unwrap().width(), 7);
    }

    #[test]
    fn padding_depth_zero_member_is_exact() {
        let aff = Network::affine(Affine::scalar(int(-3), int(1))).unwrap();
        let p = aff.pad_to_depth(3).unwrap();
        assert_eq!(p.depth(), 3);
        for v in [-5i64, 0, 2, 7] {
            assert_eq!(p.eval_exact(&[int(v)]).unwrap(), aff.eval_exact(&[int(v)]).unwrap());
        }
    }

    #[test]
    fn passthrough_examples() {
        let net = sample_network();
        let p = with_passthrough(&net, 1).unwrap();
        assert_eq!(p.width(), net.width() + 1);
        let out = p.eval_exact(&[dy(1, -1), dy(1, -2), int(0)]).unwrap();
        assert_eq!(out[1], int(0));
        let out = p.eval_exact(&[dy(1, -1), dy(1, -2), int(12345)]).unwrap();
        assert_eq!(out[1], int(12345));
        assert!(matches!(
            p.eval_exact(&[dy(1, -1), dy(1, -2), int(-1)]),
            Err(Error::Obligation { .. })
        ));
    }

    #[test]
    fn affine_wrap_examples() {
        let net = sample_network();
        let w = affine_wrap(&net, Some(&Affine::identity(2)), Some(&Affine::identity(1))).unwrap();
        assert_eq!(w.eval_exact(&[dy(3, -3), int(1)]).unwrap(), net.eval_exact(&[dy(3, -3), int(1)]).unwrap());
        // y ↦ (y + M)/(2M) with M = 2
        let pre = Affine::scalar(dy(1, -2), dy(1, -1));
        let id = Network::identity(1).unwrap();
        let wrapped = affine_wrap(&id, Some(&pre), None).unwrap();
        assert_eq!(wrapped.eval_exact(&[int(2)]).unwrap(), vec![int(1)]);
        assert_eq!(wrapped.depth(), 0);
    }

    fn arb_input() -> impl Strategy<Value = Vec<Dyadic>> {
        proptest::collection::vec((-64i64..64, -6i64..2).prop_map(|(m, e)| dy(m, e)), 2)
    }

    proptest! {
        #[test]
        fn combinators_preserve_semantics(x in arb_input(), y in arb_input()) {
            let net = sample_network();
            let staged = net.eval_exact(&x).unwrap();
            prop_assert_eq!(&net.eval_exact(&x).unwrap(), &staged);

            let post = Affine::new(1, vec![vec![dy(3, -1)], vec![int(-1)]], vec![int(2), dy(1, -3)]).unwrap();
            let pre = Affine::new(2, vec![vec![int(1), dy(1, -1)], vec![int(0), int(-2)]], vec![dy(1, -2), int(1)]).unwrap();
            let wrapped = affine_wrap(&net, Some(&pre), Some(&post)).unwrap();
            let staged_wrap = post.apply(&net.eval_exact(&pre.apply(&x)).unwrap());
            prop_assert_eq!(wrapped.eval_exact(&x).unwrap(), staged_wrap);

            let second = Network::new(1, vec![Layer::uniform(Affine::scalar(dy(5, -1), dy(-1, -1)), ActivationKind::Floor, false)], Affine::scalar(int(3), int(0))).unwrap();
            let composed = compose_serial(&net, &second).unwrap();
            prop_assert_eq!(composed.depth(), net.depth() + second.depth());
            prop_assert_eq!(composed.eval_exact(&x).unwrap(), second.eval_exact(&staged).unwrap());

            let stacked = stack_parallel(&[net.clone(), second.clone(), net.clone()]).unwrap();
            prop_assert_eq!(stacked.width(), 2 * net.width() + second.width());
            let mut input = x.clone();
            input.push(y[0].clone());
            input.extend(y.iter().cloned());
            let mut expect = staged.clone();
            expect.extend(second.eval_exact(&[y[0].clone()]).unwrap());
            expect.extend(net.eval_exact(&y).unwrap());
            prop_assert_eq!(stacked.eval_exact(&input).unwrap(), expect);
        }

        #[test]
        fn eval_is_deterministic(x in arb_input()) {
            let net = sample_network();
            prop_assert_eq!(net.eval_exact(&x).unwrap(), net.eval_exact(&x).unwrap());
        }
    }
}
