//! Feedforward ReLU networks and the composition calculus used to assemble
//! them: identity emulation, sparse concatenation, parallelization, affine
//! combinations and depth alignment.
//!
//! A network with affine maps `W_1, ..., W_L` realizes
//! `x -> W_L(relu(W_{L-1}(... relu(W_1(x)) ...)))`; ReLU acts on every layer
//! except the last. `depth` counts `L + 1` and `size` counts nonzero weights
//! and biases. Weight matrices are stored as sorted nonzero triplets: the
//! calculus only ever stacks, scales and negates blocks, so assembled
//! networks stay exactly as sparse as their size accounting says.

use crate::error::{PidenetError, Result};
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

/// One affine map: `y = A x + b` with `A` kept as sorted nonzero triplets.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    in_dim: usize,
    out_dim: usize,
    /// (row, col, value), sorted by (row, col); values are never 0.0.
    entries: Vec<(u32, u32, f64)>,
    bias: Vec<f64>,
}

impl Layer {
    pub fn from_entries(
        out_dim: usize,
        in_dim: usize,
        mut entries: Vec<(u32, u32, f64)>,
        bias: Vec<f64>,
    ) -> Result<Self> {
        if bias.len() != out_dim {
            return Err(PidenetError::DimensionMismatch {
                context: "layer bias",
                expected: out_dim,
                got: bias.len(),
            });
        }
        for &(r, c, _) in &entries {
            if r as usize >= out_dim || c as usize >= in_dim {
                return Err(PidenetError::invalid(format!(
                    "weight entry ({r},{c}) outside {out_dim}x{in_dim} layer"
                )));
            }
        }
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        // merge duplicate coordinates; entries hold exactly the nonzeros
        let mut merged: Vec<(u32, u32, f64)> = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|&(_, _, v)| v != 0.0);
        Ok(Layer {
            in_dim,
            out_dim,
            entries: merged,
            bias,
        })
    }

    pub fn from_dense(weights: &Array2<f64>, bias: &Array1<f64>) -> Result<Self> {
        let (out_dim, in_dim) = weights.dim();
        let entries = weights
            .indexed_iter()
            .filter(|&(_, &v)| v != 0.0)
            .map(|((r, c), &v)| (r as u32, c as u32, v))
            .collect();
        Layer::from_entries(out_dim, in_dim, entries, bias.to_vec())
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn entries(&self) -> &[(u32, u32, f64)] {
        &self.entries
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    /// Nonzero weights plus nonzero biases.
    pub fn nnz(&self) -> usize {
        self.entries.len() + self.bias.iter().filter(|&&b| b != 0.0).count()
    }

    pub fn to_dense(&self) -> (Array2<f64>, Array1<f64>) {
        let mut a = Array2::zeros((self.out_dim, self.in_dim));
        for &(r, c, v) in &self.entries {
            a[(r as usize, c as usize)] = v;
        }
        (a, Array1::from(self.bias.clone()))
    }

    fn apply(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend_from_slice(&self.bias);
        for &(r, c, v) in &self.entries {
            out[r as usize] += v * x[c as usize];
        }
    }
}

fn relu_in_place(v: &mut [f64]) {
    for x in v {
        // the negated comparison maps NaN and -0.0 to 0.0 as well
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(*x > 0.0) {
            *x = 0.0;
        }
    }
}

/// A feedforward ReLU network.
#[derive(Debug, Clone, PartialEq)]
pub struct ReluNetwork {
    input_dim: usize,
    layers: Vec<Layer>,
}

impl ReluNetwork {
    pub fn new(input_dim: usize, layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(PidenetError::invalid(
                "a network needs at least one affine map",
            ));
        }
        let mut prev = input_dim;
        for (i, l) in layers.iter().enumerate() {
            if l.in_dim != prev {
                return Err(PidenetError::DimensionMismatch {
                    context: "layer chain",
                    expected: prev,
                    got: l.in_dim,
                });
            }
            if l.out_dim == 0 {
                return Err(PidenetError::invalid(format!("layer {i} has zero width")));
            }
            prev = l.out_dim;
        }
        Ok(ReluNetwork { input_dim, layers })
    }

    /// Single affine map `x -> A x + b` (depth 2, no ReLU applied).
    pub fn affine(weights: &Array2<f64>, bias: &Array1<f64>) -> Result<Self> {
        let layer = Layer::from_dense(weights, bias)?;
        let d = layer.in_dim;
        ReluNetwork::new(d, vec![layer])
    }

    /// The zero function with the requested shape; size 0.
    pub fn zero(input_dim: usize, output_dim: usize, affine_maps: usize) -> Result<Self> {
        if affine_maps == 0 {
            return Err(PidenetError::invalid("affine_maps must be positive"));
        }
        let mut layers = Vec::with_capacity(affine_maps);
        let mut prev = input_dim;
        for i in 0..affine_maps {
            let out = if i + 1 == affine_maps { output_dim } else { 1 };
            layers.push(Layer::from_entries(out, prev, Vec::new(), vec![0.0; out])?);
            prev = out;
        }
        ReluNetwork::new(input_dim, layers)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("nonempty").out_dim
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn affine_maps(&self) -> usize {
        self.layers.len()
    }

    /// Number of layers counting the input layer: affine maps + 1.
    pub fn depth(&self) -> usize {
        self.layers.len() + 1
    }

    /// Total number of nonzero weights and biases.
    pub fn size(&self) -> usize {
        self.layers.iter().map(Layer::nnz).sum()
    }

    /// Nonzero weights and biases of the last affine map only.
    pub fn size_out(&self) -> usize {
        self.layers.last().expect("nonempty").nnz()
    }

    /// Forward pass; ReLU on every layer except the last.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim {
            return Err(PidenetError::DimensionMismatch {
                context: "network input",
                expected: self.input_dim,
                got: x.len(),
            });
        }
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            layer.apply(&cur, &mut next);
            if i != last {
                relu_in_place(&mut next);
            }
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }
}

/// Identity emulation on R^d via the channel doubling `x = relu(x) - relu(-x)`,
/// with `ell` affine maps. Hits the `2 d ell` size bound exactly.
pub fn identity_net(d: usize, ell: usize) -> Result<ReluNetwork> {
    if ell < 2 {
        return Err(PidenetError::invalid(format!(
            "identity_net needs at least 2 affine maps, got {ell}"
        )));
    }
    identity_chain(d, ell)
}

/// Identity with `ell >= 1` affine maps; `ell = 1` is the plain affine
/// identity used for one-level depth lifts.
pub(crate) fn identity_chain(d: usize, ell: usize) -> Result<ReluNetwork> {
    if d == 0 || ell == 0 {
        return Err(PidenetError::invalid("identity needs d >= 1, ell >= 1"));
    }
    if ell == 1 {
        let entries = (0..d).map(|i| (i as u32, i as u32, 1.0)).collect();
        let layer = Layer::from_entries(d, d, entries, vec![0.0; d])?;
        return ReluNetwork::new(d, vec![layer]);
    }
    let mut layers = Vec::with_capacity(ell);
    // split: x -> (x, -x)
    let split: Vec<_> = (0..d)
        .flat_map(|i| [(i as u32, i as u32, 1.0), ((i + d) as u32, i as u32, -1.0)])
        .collect();
    layers.push(Layer::from_entries(2 * d, d, split, vec![0.0; 2 * d])?);
    // pass-through on the doubled nonnegative channels
    for _ in 0..ell.saturating_sub(2) {
        let pass: Vec<_> = (0..2 * d).map(|i| (i as u32, i as u32, 1.0)).collect();
        layers.push(Layer::from_entries(2 * d, 2 * d, pass, vec![0.0; 2 * d])?);
    }
    // merge: (p, m) -> p - m
    let merge: Vec<_> = (0..d)
        .flat_map(|i| [(i as u32, i as u32, 1.0), (i as u32, (i + d) as u32, -1.0)])
        .collect();
    layers.push(Layer::from_entries(d, 2 * d, merge, vec![0.0; d])?);
    ReluNetwork::new(d, layers)
}

/// Sparse concatenation `outer ⊙ inner` realizing `x -> outer(inner(x))`.
///
/// The junction doubles the last affine map of `inner` into `(+, -)` channels
/// and rebuilds it inside the first affine map of `outer`, so the result has
/// `L_outer + L_inner` affine maps and satisfies
/// `size ≤ 2 size(outer) + size_out(inner) + size(inner)`. With an outer
/// hidden layer present, `size_out` of the result equals `size_out(outer)`.
pub fn compose(outer: &ReluNetwork, inner: &ReluNetwork) -> Result<ReluNetwork> {
    if outer.input_dim() != inner.output_dim() {
        return Err(PidenetError::DimensionMismatch {
            context: "compose",
            expected: inner.output_dim(),
            got: outer.input_dim(),
        });
    }
    let mut layers: Vec<Layer> = Vec::with_capacity(outer.affine_maps() + inner.affine_maps());
    let l2 = inner.affine_maps();
    layers.extend_from_slice(&inner.layers[..l2 - 1]);

    // junction 1: (A, b) -> ([A; -A], [b; -b]) feeding the ReLU
    let last = &inner.layers[l2 - 1];
    let m = last.out_dim;
    let mut entries = Vec::with_capacity(2 * last.entries.len());
    for &(r, c, v) in &last.entries {
        entries.push((r, c, v));
        entries.push((r + m as u32, c, -v));
    }
    let mut bias = Vec::with_capacity(2 * m);
    bias.extend_from_slice(&last.bias);
    bias.extend(last.bias.iter().map(|b| -b));
    layers.push(Layer::from_entries(2 * m, last.in_dim, entries, bias)?);

    // junction 2: first affine map of outer applied to (p - m)
    let first = &outer.layers[0];
    let mut entries = Vec::with_capacity(2 * first.entries.len());
    for &(r, c, v) in &first.entries {
        entries.push((r, c, v));
        entries.push((r, c + m as u32, -v));
    }
    layers.push(Layer::from_entries(
        first.out_dim,
        2 * m,
        entries,
        first.bias.clone(),
    )?);

    layers.extend_from_slice(&outer.layers[1..]);
    ReluNetwork::new(inner.input_dim(), layers)
}

/// Parallelization of equal-depth networks.
///
/// With `distinct_inputs` the result maps the concatenated inputs to the
/// concatenated outputs; otherwise all networks read the same input. Size is
/// exactly additive.
pub fn parallelize(nets: &[&ReluNetwork], distinct_inputs: bool) -> Result<ReluNetwork> {
    if nets.is_empty() {
        return Err(PidenetError::invalid(
            "parallelize needs at least one network",
        ));
    }
    let maps = nets[0].affine_maps();
    for n in nets {
        if n.affine_maps() != maps {
            return Err(PidenetError::invalid(format!(
                "parallelize needs equal depths (got {} and {}); lift first",
                nets[0].depth(),
                n.depth()
            )));
        }
    }
    if !distinct_inputs {
        let d = nets[0].input_dim();
        for n in nets {
            if n.input_dim() != d {
                return Err(PidenetError::DimensionMismatch {
                    context: "parallelize shared input",
                    expected: d,
                    got: n.input_dim(),
                });
            }
        }
    }
    let mut layers = Vec::with_capacity(maps);
    for li in 0..maps {
        let shared_first = li == 0 && !distinct_inputs;
        let in_dim = if shared_first {
            nets[0].input_dim()
        } else {
            nets.iter().map(|n| n.layers[li].in_dim).sum()
        };
        let out_dim: usize = nets.iter().map(|n| n.layers[li].out_dim).sum();
        let mut entries = Vec::new();
        let mut bias = Vec::with_capacity(out_dim);
        let mut row_off = 0u32;
        let mut col_off = 0u32;
        for n in nets {
            let l = &n.layers[li];
            let co = if shared_first { 0 } else { col_off };
            entries.extend(l.entries.iter().map(|&(r, c, v)| (r + row_off, c + co, v)));
            bias.extend_from_slice(&l.bias);
            row_off += l.out_dim as u32;
            col_off += l.in_dim as u32;
        }
        layers.push(Layer::from_entries(out_dim, in_dim, entries, bias)?);
    }
    let input_dim = if distinct_inputs {
        nets.iter().map(|n| n.input_dim()).sum()
    } else {
        nets[0].input_dim()
    };
    ReluNetwork::new(input_dim, layers)
}

/// Weighted sum `bias + Σ w_i net_i(x)` of equal-depth, shared-input,
/// shared-output networks, realized at the same depth.
///
/// Hidden layers are stacked block-diagonally; the scaled output maps merge
/// into one last layer, so `size ≤ Σ size(net_i) + nnz(bias)`.
pub fn affine_combine(nets: &[&ReluNetwork], weights: &[f64], bias: &[f64]) -> Result<ReluNetwork> {
    if nets.is_empty() {
        return Err(PidenetError::invalid(
            "affine_combine needs at least one network",
        ));
    }
    if weights.len() != nets.len() {
        return Err(PidenetError::DimensionMismatch {
            context: "affine_combine weights",
            expected: nets.len(),
            got: weights.len(),
        });
    }
    let maps = nets[0].affine_maps();
    let d_in = nets[0].input_dim();
    let d_out = nets[0].output_dim();
    for n in nets {
        if n.affine_maps() != maps {
            return Err(PidenetError::invalid("affine_combine needs equal depths"));
        }
        if n.input_dim() != d_in || n.output_dim() != d_out {
            return Err(PidenetError::DimensionMismatch {
                context: "affine_combine shapes",
                expected: d_in,
                got: n.input_dim(),
            });
        }
    }
    if bias.len() != d_out {
        return Err(PidenetError::DimensionMismatch {
            context: "affine_combine bias",
            expected: d_out,
            got: bias.len(),
        });
    }

    let mut layers = Vec::with_capacity(maps);
    for li in 0..maps - 1 {
        let shared_first = li == 0;
        let in_dim = if shared_first {
            d_in
        } else {
            nets.iter().map(|n| n.layers[li].in_dim).sum()
        };
        let out_dim: usize = nets.iter().map(|n| n.layers[li].out_dim).sum();
        let mut entries = Vec::new();
        let mut b = Vec::with_capacity(out_dim);
        let mut row_off = 0u32;
        let mut col_off = 0u32;
        for n in nets {
            let l = &n.layers[li];
            let co = if shared_first { 0 } else { col_off };
            entries.extend(l.entries.iter().map(|&(r, c, v)| (r + row_off, c + co, v)));
            b.extend_from_slice(&l.bias);
            row_off += l.out_dim as u32;
            col_off += l.in_dim as u32;
        }
        layers.push(Layer::from_entries(out_dim, in_dim, entries, b)?);
    }

    // last layer: horizontally stacked scaled output maps, merged bias
    let in_dim = if maps == 1 {
        d_in
    } else {
        nets.iter().map(|n| n.layers[maps - 1].in_dim).sum()
    };
    let mut entries: Vec<(u32, u32, f64)> = Vec::new();
    let mut b = bias.to_vec();
    let mut col_off = 0u32;
    for (n, &w) in nets.iter().zip(weights) {
        let l = &n.layers[maps - 1];
        let co = if maps == 1 { 0 } else { col_off };
        entries.extend(
            l.entries
                .iter()
                .map(|&(r, c, v)| (r, c + co, w * v))
                .filter(|&(_, _, v)| v != 0.0),
        );
        for (i, &bv) in l.bias.iter().enumerate() {
            b[i] += w * bv;
        }
        col_off += l.in_dim as u32;
    }
    // single-affine-map networks share columns; from_entries merges the
    // coincident coordinates
    layers.push(Layer::from_entries(d_out, in_dim, entries, b)?);
    ReluNetwork::new(d_in, layers)
}

/// Same function at a greater depth: pre-composition with an identity
/// emulation on the input side, following the `net ⊙ I_{d,k}` pattern.
pub fn lift_to_depth(net: &ReluNetwork, target_depth: usize) -> Result<ReluNetwork> {
    let cur = net.depth();
    if target_depth < cur {
        return Err(PidenetError::invalid(format!(
            "cannot lift depth {cur} down to {target_depth}"
        )));
    }
    if target_depth == cur {
        return Ok(net.clone());
    }
    let ident = identity_chain(net.input_dim(), target_depth - cur)?;
    compose(net, &ident)
}

/// Same function at a greater depth, identity on the output side
/// (`I_{d,k} ⊙ net`). Preferable for large `net`: the doubled junction layer
/// is the identity's, so the size overhead is `size_out(net) + O(d k)`.
pub fn lift_to_depth_outer(net: &ReluNetwork, target_depth: usize) -> Result<ReluNetwork> {
    let cur = net.depth();
    if target_depth < cur {
        return Err(PidenetError::invalid(format!(
            "cannot lift depth {cur} down to {target_depth}"
        )));
    }
    if target_depth == cur {
        return Ok(net.clone());
    }
    let ident = identity_chain(net.output_dim(), target_depth - cur)?;
    compose(&ident, net)
}

/// The network `x -> net(x, v)` obtained by freezing the trailing input
/// coordinates at `v`: the frozen columns of the first affine map fold into
/// its bias, so the size never grows.
pub fn freeze_trailing_inputs(net: &ReluNetwork, frozen: &[f64]) -> Result<ReluNetwork> {
    let d = net.input_dim();
    if frozen.len() >= d {
        return Err(PidenetError::invalid(
            "freeze_trailing_inputs must leave at least one free input",
        ));
    }
    let keep = d - frozen.len();
    let first = &net.layers[0];
    let mut entries = Vec::new();
    let mut bias = first.bias.clone();
    for &(r, c, v) in &first.entries {
        if (c as usize) < keep {
            entries.push((r, c, v));
        } else {
            bias[r as usize] += v * frozen[c as usize - keep];
        }
    }
    let mut layers = vec![Layer::from_entries(first.out_dim, keep, entries, bias)?];
    layers.extend_from_slice(&net.layers[1..]);
    ReluNetwork::new(keep, layers)
}

// ---------------------------------------------------------------------------
// serialization: self-describing JSON with dense row-major weights
// ---------------------------------------------------------------------------

pub const NETWORK_FORMAT: &str = "pidenet-network";
pub const NETWORK_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct LayerDto {
    rows: usize,
    cols: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct NetworkDto {
    format: String,
    version: u32,
    input_dim: usize,
    layers: Vec<LayerDto>,
}

impl ReluNetwork {
    pub fn to_json(&self) -> String {
        let layers = self
            .layers
            .iter()
            .map(|l| {
                let mut weights = vec![0.0; l.out_dim * l.in_dim];
                for &(r, c, v) in &l.entries {
                    weights[r as usize * l.in_dim + c as usize] = v;
                }
                LayerDto {
                    rows: l.out_dim,
                    cols: l.in_dim,
                    weights,
                    bias: l.bias.clone(),
                }
            })
            .collect();
        let dto = NetworkDto {
            format: NETWORK_FORMAT.to_string(),
            version: NETWORK_FORMAT_VERSION,
            input_dim: self.input_dim,
            layers,
        };
        serde_json::to_string(&dto).expect("network serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let dto: NetworkDto =
            serde_json::from_str(text).map_err(|e| PidenetError::Serialization(e.to_string()))?;
        if dto.format != NETWORK_FORMAT {
            return Err(PidenetError::Serialization(format!(
                "unexpected format tag {:?}",
                dto.format
            )));
        }
        if dto.version != NETWORK_FORMAT_VERSION {
            return Err(PidenetError::Serialization(format!(
                "unsupported network format version {}",
                dto.version
            )));
        }
        let mut layers = Vec::with_capacity(dto.layers.len());
        for (i, l) in dto.layers.iter().enumerate() {
            if l.weights.len() != l.rows * l.cols {
                return Err(PidenetError::Serialization(format!(
                    "layer {i}: {} weights for a {}x{} matrix",
                    l.weights.len(),
                    l.rows,
                    l.cols
                )));
            }
            let entries = l
                .weights
                .iter()
                .enumerate()
                .filter(|&(_, &v)| v != 0.0)
                .map(|(k, &v)| ((k / l.cols) as u32, (k % l.cols) as u32, v))
                .collect();
            layers.push(Layer::from_entries(
                l.rows,
                l.cols,
                entries,
                l.bias.clone(),
            )?);
        }
        ReluNetwork::new(dto.input_dim, layers)
    }
}
