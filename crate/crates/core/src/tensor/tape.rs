//! Wengert tape: records forward operations, replays them in reverse to
//! accumulate gradients.
//!
//! A tape is bound to one forward pass: build the loss, call
//! [`Tape::backward`] once, then drop it. Nodes are appended in execution
//! order, so walking the list backward visits them in reverse topological
//! order. Tapes are single-threaded; the tensors they produce are plain
//! values and may move freely between threads.

use super::params::{Parameter, Parameters};
use super::{matmul_raw, same_shape, Element, Tensor};
use crate::error::{Error, Result};

/// Handle to a value recorded on a tape.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NodeId(usize);

#[derive(Debug)]
enum Op<T: Element> {
    /// Constant leaf; receives a gradient but propagates nothing.
    Input,
    /// Named leaf whose gradient is written back to a [`Parameters`] entry.
    Param(String),
    MatMul { a: NodeId, b: NodeId },
    Add { a: NodeId, b: NodeId },
    Sub { a: NodeId, b: NodeId },
    Mul { a: NodeId, b: NodeId },
    Scale { a: NodeId, factor: T },
    AddRow { a: NodeId, row: NodeId },
    Sigmoid { a: NodeId },
    Tanh { a: NodeId },
    Softmax { a: NodeId, axis: usize },
    LogSoftmax { a: NodeId, axis: usize },
    LayerNorm { x: NodeId, gain: NodeId, bias: NodeId, eps: T },
    Lookup { table: NodeId, row: usize },
    Concat { parts: Vec<NodeId>, axis: usize },
    SliceCols { a: NodeId, start: usize, len: usize },
    Pick { a: NodeId, index: usize },
    Transpose { a: NodeId },
}

struct Node<T: Element> {
    value: Tensor<T>,
    op: Op<T>,
}

/// Ordered record of executed operations for one forward pass.
pub struct Tape<T: Element = f32> {
    nodes: Vec<Node<T>>,
    grads: Vec<Option<Tensor<T>>>,
    consumed: bool,
}

impl<T: Element> Default for Tape<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Element> Tape<T> {
    pub fn new() -> Self {
        Tape { nodes: Vec::new(), grads: Vec::new(), consumed: false }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Value produced at `id` during the forward pass.
    pub fn value(&self, id: NodeId) -> &Tensor<T> {
        &self.nodes[id.0].value
    }

    /// Clones the value out of the tape (cheap: storage is shared).
    pub fn detach(&self, id: NodeId) -> Tensor<T> {
        self.nodes[id.0].value.clone()
    }

    /// Gradient computed for `id`, available after [`Tape::backward`].
    pub fn grad_of(&self, id: NodeId) -> Option<&Tensor<T>> {
        self.grads.get(id.0).and_then(|g| g.as_ref())
    }

    fn push(&mut self, value: Tensor<T>, op: Op<T>) -> NodeId {
        let id = NodeId(self.nodes.len());
        self.nodes.push(Node { value, op });
        id
    }

    /// Records a constant input.
    pub fn input(&mut self, value: Tensor<T>) -> NodeId {
        self.push(value, Op::Input)
    }

    /// Records a trainable parameter leaf. Its gradient is accumulated into
    /// the matching [`Parameters`] entry by [`Tape::backward`].
    pub fn param(&mut self, p: &Parameter<T>) -> NodeId {
        self.push(p.value().clone(), Op::Param(p.name().to_string()))
    }

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let out = matmul_raw(self.value(a), self.value(b))?;
        Ok(self.push(out, Op::MatMul { a, b }))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        same_shape("add", self.value(a), self.value(b))?;
        let out = self.value(a).zip_map(self.value(b), |x, y| x + y);
        Ok(self.push(out, Op::Add { a, b }))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        same_shape("sub", self.value(a), self.value(b))?;
        let out = self.value(a).zip_map(self.value(b), |x, y| x - y);
        Ok(self.push(out, Op::Sub { a, b }))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        same_shape("mul", self.value(a), self.value(b))?;
        let out = self.value(a).zip_map(self.value(b), |x, y| x * y);
        Ok(self.push(out, Op::Mul { a, b }))
    }

    /// Multiplies every element by a scalar.
    pub fn scale(&mut self, a: NodeId, factor: T) -> NodeId {
        let out = self.value(a).map(|x| x * factor);
        self.push(out, Op::Scale { a, factor })
    }

    /// Adds a `[1 x n]` row vector to every row of a `[m x n]` matrix.
    pub fn add_row(&mut self, a: NodeId, row: NodeId) -> Result<NodeId> {
        let (av, rv) = (self.value(a), self.value(row));
        if av.cols() != rv.cols() || rv.rows() != 1 {
            return Err(Error::Dimension {
                op: "add_row",
                detail: format!("shapes {:?} and {:?} differ", av.shape(), rv.shape()),
            });
        }
        let n = av.cols();
        let mut out = av.data().to_vec();
        for (i, v) in out.iter_mut().enumerate() {
            *v = *v + rv.data()[i % n];
        }
        let out = Tensor::from_vec(av.shape().to_vec(), out)?;
        Ok(self.push(out, Op::AddRow { a, row }))
    }

    pub fn sigmoid(&mut self, a: NodeId) -> NodeId {
        let one = T::one();
        let out = self.value(a).map(|x| one / (one + (-x).exp()));
        self.push(out, Op::Sigmoid { a })
    }

    pub fn tanh(&mut self, a: NodeId) -> NodeId {
        let out = self.value(a).map(|x| x.tanh());
        self.push(out, Op::Tanh { a })
    }

    /// Numerically stabilized softmax along `axis` (max subtraction per lane).
    pub fn softmax(&mut self, a: NodeId, axis: usize) -> Result<NodeId> {
        let out = softmax_forward(self.value(a), axis, false)?;
        Ok(self.push(out, Op::Softmax { a, axis }))
    }

    pub fn log_softmax(&mut self, a: NodeId, axis: usize) -> Result<NodeId> {
        let out = softmax_forward(self.value(a), axis, true)?;
        Ok(self.push(out, Op::LogSoftmax { a, axis }))
    }

    /// Per-row standardization of `x[m x d]` followed by elementwise gain and
    /// bias (`[1 x d]` each). Epsilon sits inside the square root.
    pub fn layer_norm(&mut self, x: NodeId, gain: NodeId, bias: NodeId, eps: T) -> Result<NodeId> {
        if eps <= T::zero() {
            return Err(Error::parameter("layer_norm epsilon must be positive"));
        }
        let (xv, gv, bv) = (self.value(x), self.value(gain), self.value(bias));
        let d = xv.cols();
        if gv.cols() != d || bv.cols() != d || gv.rows() != 1 || bv.rows() != 1 {
            return Err(Error::Dimension {
                op: "layer_norm",
                detail: format!(
                    "x {:?} needs [1 x {d}] gain/bias, got {:?} and {:?}",
                    xv.shape(),
                    gv.shape(),
                    bv.shape()
                ),
            });
        }
        let mut out = vec![T::zero(); xv.numel()];
        for r in 0..xv.rows() {
            let xr = &xv.data()[r * d..(r + 1) * d];
            let (mean, std) = row_moments(xr, eps);
            for j in 0..d {
                out[r * d + j] = gv.data()[j] * (xr[j] - mean) / std + bv.data()[j];
            }
        }
        let out = Tensor::from_vec(xv.shape().to_vec(), out)?;
        Ok(self.push(out, Op::LayerNorm { x, gain, bias, eps }))
    }

    /// Differentiable row lookup: gradient flows only into the selected row.
    pub fn lookup(&mut self, table: NodeId, row: usize) -> Result<NodeId> {
        let tv = self.value(table);
        if row >= tv.rows() {
            return Err(Error::Dimension {
                op: "lookup",
                detail: format!("row {row} out of range for table {:?}", tv.shape()),
            });
        }
        let d = tv.cols();
        let data = tv.data()[row * d..(row + 1) * d].to_vec();
        Ok(self.push(Tensor::row(data), Op::Lookup { table, row }))
    }

    /// Concatenates along `axis` (0 stacks rows, 1 joins columns).
    pub fn concat(&mut self, parts: &[NodeId], axis: usize) -> Result<NodeId> {
        if parts.is_empty() {
            return Err(Error::parameter("concat of zero tensors"));
        }
        if axis > 1 {
            return Err(Error::parameter(format!("concat axis {axis} out of range")));
        }
        let first = self.value(parts[0]);
        let (mut rows, mut cols) = (first.rows(), first.cols());
        for &p in &parts[1..] {
            let v = self.value(p);
            if axis == 0 {
                if v.cols() != cols {
                    return Err(Error::Dimension {
                        op: "concat",
                        detail: format!("shapes {:?} and {:?} differ in columns", first.shape(), v.shape()),
                    });
                }
                rows += v.rows();
            } else {
                if v.rows() != rows {
                    return Err(Error::Dimension {
                        op: "concat",
                        detail: format!("shapes {:?} and {:?} differ in rows", first.shape(), v.shape()),
                    });
                }
                cols += v.cols();
            }
        }
        let mut out = vec![T::zero(); rows * cols];
        if axis == 0 {
            let mut at = 0;
            for &p in parts {
                let v = self.value(p);
                out[at..at + v.numel()].copy_from_slice(v.data());
                at += v.numel();
            }
        } else {
            let mut col_at = 0;
            for &p in parts {
                let v = self.value(p);
                let w = v.cols();
                for r in 0..rows {
                    out[r * cols + col_at..r * cols + col_at + w]
                        .copy_from_slice(&v.data()[r * w..(r + 1) * w]);
                }
                col_at += w;
            }
        }
        let out = Tensor::from_vec(vec![rows, cols], out)?;
        Ok(self.push(out, Op::Concat { parts: parts.to_vec(), axis }))
    }

    /// Column slice `[.., start..start+len]`.
    pub fn slice_cols(&mut self, a: NodeId, start: usize, len: usize) -> Result<NodeId> {
        let av = self.value(a);
        let (rows, cols) = (av.rows(), av.cols());
        if start + len > cols {
            return Err(Error::Dimension {
                op: "slice_cols",
                detail: format!("slice {start}..{} out of range for {:?}", start + len, av.shape()),
            });
        }
        let mut out = vec![T::zero(); rows * len];
        for r in 0..rows {
            out[r * len..(r + 1) * len].copy_from_slice(&av.data()[r * cols + start..r * cols + start + len]);
        }
        let out = Tensor::from_vec(vec![rows, len], out)?;
        Ok(self.push(out, Op::SliceCols { a, start, len }))
    }

    /// Extracts one element as a `[1 x 1]` scalar tensor.
    pub fn pick(&mut self, a: NodeId, index: usize) -> Result<NodeId> {
        let av = self.value(a);
        if index >= av.numel() {
            return Err(Error::Dimension {
                op: "pick",
                detail: format!("index {index} out of range for {:?}", av.shape()),
            });
        }
        let out = Tensor::scalar(av.data()[index]);
        Ok(self.push(out, Op::Pick { a, index }))
    }

    pub fn transpose(&mut self, a: NodeId) -> NodeId {
        let out = self.value(a).transposed();
        self.push(out, Op::Transpose { a })
    }

    /// Runs the reverse pass from a scalar loss, accumulating dLoss/dParam
    /// into the gradient buffer of every parameter recorded on this tape.
    ///
    /// Gradients add onto whatever the buffers already hold; callers zero
    /// them between minibatches. A tape can be walked backward once.
    pub fn backward(&mut self, loss: NodeId, params: &mut Parameters<T>) -> Result<()> {
        if self.consumed {
            return Err(Error::contract("backward called twice on the same tape"));
        }
        if !self.value(loss).is_scalar() {
            return Err(Error::contract(format!(
                "backward requires a scalar loss, got shape {:?}",
                self.value(loss).shape()
            )));
        }
        self.consumed = true;
        self.grads = (0..self.nodes.len()).map(|_| None).collect();
        self.grads[loss.0] = Some(Tensor::filled(self.value(loss).shape().to_vec(), T::one()));

        for i in (0..self.nodes.len()).rev() {
            let Some(gout) = self.grads[i].clone() else { continue };
            self.propagate(i, &gout)?;
        }

        for (i, node) in self.nodes.iter().enumerate() {
            if let Op::Param(name) = &node.op {
                let Some(g) = &self.grads[i] else { continue };
                let Some(id) = params.id_of(name) else {
                    return Err(Error::contract(format!(
                        "parameter {name:?} recorded on tape is missing from the parameter set"
                    )));
                };
                params.get_mut(id).grad_mut().add_assign(g);
            }
        }
        Ok(())
    }

    fn accumulate(&mut self, target: NodeId, delta: Tensor<T>) {
        match &mut self.grads[target.0] {
            Some(g) => g.add_assign(&delta),
            slot @ None => *slot = Some(delta),
        }
    }

    fn propagate(&mut self, i: usize, gout: &Tensor<T>) -> Result<()> {
        // Ops are immutable once pushed; clone the sum-typed header so the
        // node list can be re-borrowed for value reads below.
        let op = match &self.nodes[i].op {
            Op::Input | Op::Param(_) => return Ok(()),
            Op::MatMul { a, b } => Op::MatMul { a: *a, b: *b },
            Op::Add { a, b } => Op::Add { a: *a, b: *b },
            Op::Sub { a, b } => Op::Sub { a: *a, b: *b },
            Op::Mul { a, b } => Op::Mul { a: *a, b: *b },
            Op::Scale { a, factor } => Op::Scale { a: *a, factor: *factor },
            Op::AddRow { a, row } => Op::AddRow { a: *a, row: *row },
            Op::Sigmoid { a } => Op::Sigmoid { a: *a },
            Op::Tanh { a } => Op::Tanh { a: *a },
            Op::Softmax { a, axis } => Op::Softmax { a: *a, axis: *axis },
            Op::LogSoftmax { a, axis } => Op::LogSoftmax { a: *a, axis: *axis },
            Op::LayerNorm { x, gain, bias, eps } => {
                Op::LayerNorm { x: *x, gain: *gain, bias: *bias, eps: *eps }
            }
            Op::Lookup { table, row } => Op::Lookup { table: *table, row: *row },
            Op::Concat { parts, axis } => Op::Concat { parts: parts.clone(), axis: *axis },
            Op::SliceCols { a, start, len } => Op::SliceCols { a: *a, start: *start, len: *len },
            Op::Pick { a, index } => Op::Pick { a: *a, index: *index },
            Op::Transpose { a } => Op::Transpose { a: *a },
        };

        match op {
            Op::Input | Op::Param(_) => {}
            Op::MatMul { a, b } => {
                let da = matmul_raw(gout, &self.value(b).transposed())?;
                let db = matmul_raw(&self.value(a).transposed(), gout)?;
                self.accumulate(a, da);
                self.accumulate(b, db);
            }
            Op::Add { a, b } => {
                self.accumulate(a, gout.clone());
                self.accumulate(b, gout.clone());
            }
            Op::Sub { a, b } => {
                self.accumulate(a, gout.clone());
                self.accumulate(b, gout.map(|v| -v));
            }
            Op::Mul { a, b } => {
                let da = gout.zip_map(self.value(b), |g, y| g * y);
                let db = gout.zip_map(self.value(a), |g, x| g * x);
                self.accumulate(a, da);
                self.accumulate(b, db);
            }
            Op::Scale { a, factor } => {
                self.accumulate(a, gout.map(|g| g * factor));
            }
            Op::AddRow { a, row } => {
                let n = self.value(row).cols();
                let mut drow = vec![T::zero(); n];
                for (i, &g) in gout.data().iter().enumerate() {
                    drow[i % n] += g;
                }
                self.accumulate(a, gout.clone());
                self.accumulate(row, Tensor::row(drow));
            }
            Op::Sigmoid { a } => {
                let y = &self.nodes[i].value;
                let da = gout.zip_map(y, |g, y| g * y * (T::one() - y));
                self.accumulate(a, da);
            }
            Op::Tanh { a } => {
                let y = &self.nodes[i].value;
                let da = gout.zip_map(y, |g, y| g * (T::one() - y * y));
                self.accumulate(a, da);
            }
            Op::Softmax { a, axis } => {
                let y = self.nodes[i].value.clone();
                let da = softmax_backward(&y, gout, axis, false);
                self.accumulate(a, da);
            }
            Op::LogSoftmax { a, axis } => {
                let y = self.nodes[i].value.clone();
                let da = softmax_backward(&y, gout, axis, true);
                self.accumulate(a, da);
            }
            Op::LayerNorm { x, gain, bias, eps } => {
                let (dx, dgain, dbias) = layer_norm_backward(self.value(x), self.value(gain), gout, eps);
                self.accumulate(x, dx);
                self.accumulate(gain, dgain);
                self.accumulate(bias, dbias);
            }
            Op::Lookup { table, row } => {
                let tv = self.value(table);
                let (rows, d) = (tv.rows(), tv.cols());
                let mut dt = vec![T::zero(); rows * d];
                dt[row * d..(row + 1) * d].copy_from_slice(gout.data());
                self.accumulate(table, Tensor::from_vec(vec![rows, d], dt)?);
            }
            Op::Concat { parts, axis } => {
                if axis == 0 {
                    let mut at = 0;
                    for &p in &parts {
                        let n = self.value(p).numel();
                        let shape = self.value(p).shape().to_vec();
                        let dp = Tensor::from_vec(shape, gout.data()[at..at + n].to_vec())?;
                        at += n;
                        self.accumulate(p, dp);
                    }
                } else {
                    let cols = self.nodes[i].value.cols();
                    let rows = self.nodes[i].value.rows();
                    let mut col_at = 0;
                    for &p in &parts {
                        let w = self.value(p).cols();
                        let mut dp = vec![T::zero(); rows * w];
                        for r in 0..rows {
                            dp[r * w..(r + 1) * w]
                                .copy_from_slice(&gout.data()[r * cols + col_at..r * cols + col_at + w]);
                        }
                        col_at += w;
                        self.accumulate(p, Tensor::from_vec(vec![rows, w], dp)?);
                    }
                }
            }
            Op::SliceCols { a, start, len } => {
                let av = self.value(a);
                let (rows, cols) = (av.rows(), av.cols());
                let mut da = vec![T::zero(); rows * cols];
                for r in 0..rows {
                    da[r * cols + start..r * cols + start + len]
                        .copy_from_slice(&gout.data()[r * len..(r + 1) * len]);
                }
                self.accumulate(a, Tensor::from_vec(vec![rows, cols], da)?);
            }
            Op::Pick { a, index } => {
                let av = self.value(a);
                let mut da = vec![T::zero(); av.numel()];
                da[index] = gout.item();
                self.accumulate(a, Tensor::from_vec(av.shape().to_vec(), da)?);
            }
            Op::Transpose { a } => {
                self.accumulate(a, gout.transposed());
            }
        }
        Ok(())
    }
}

fn row_moments<T: Element>(row: &[T], eps: T) -> (T, T) {
    let d = T::from_usize(row.len());
    let mut mean = T::zero();
    for &v in row {
        mean += v;
    }
    mean = mean / d;
    let mut var = T::zero();
    for &v in row {
        var += (v - mean) * (v - mean);
    }
    var = var / d;
    (mean, (var + eps).sqrt())
}

/// Iterates lanes of a rank-<=2 tensor along `axis` as (start, stride).
fn lanes<T: Element>(t: &Tensor<T>, axis: usize) -> Result<(Vec<(usize, usize)>, usize)> {
    let (rows, cols) = (t.rows(), t.cols());
    match axis {
        1 => Ok(((0..rows).map(|r| (r * cols, 1)).collect(), cols)),
        0 => Ok(((0..cols).map(|c| (c, cols)).collect(), rows)),
        _ => Err(Error::parameter(format!("softmax axis {axis} out of range"))),
    }
}

fn softmax_forward<T: Element>(x: &Tensor<T>, axis: usize, log: bool) -> Result<Tensor<T>> {
    let (lane_list, len) = lanes(x, axis)?;
    let mut out = vec![T::zero(); x.numel()];
    let xd = x.data();
    for (start, stride) in lane_list {
        let mut max = xd[start];
        for k in 1..len {
            let v = xd[start + k * stride];
            if v > max {
                max = v;
            }
        }
        let mut sum = T::zero();
        for k in 0..len {
            sum += (xd[start + k * stride] - max).exp();
        }
        if log {
            let log_sum = sum.ln();
            for k in 0..len {
                out[start + k * stride] = xd[start + k * stride] - max - log_sum;
            }
        } else {
            for k in 0..len {
                out[start + k * stride] = (xd[start + k * stride] - max).exp() / sum;
            }
        }
    }
    Tensor::from_vec(x.shape().to_vec(), out)
}

fn softmax_backward<T: Element>(y: &Tensor<T>, gout: &Tensor<T>, axis: usize, log: bool) -> Tensor<T> {
    let (lane_list, len) = lanes(y, axis).expect("axis validated in forward");
    let mut dx = vec![T::zero(); y.numel()];
    let (yd, gd) = (y.data(), gout.data());
    for (start, stride) in lane_list {
        if log {
            // y = log softmax(x): dx = g - exp(y) * sum(g)
            let mut gsum = T::zero();
            for k in 0..len {
                gsum += gd[start + k * stride];
            }
            for k in 0..len {
                let idx = start + k * stride;
                dx[idx] = gd[idx] - yd[idx].exp() * gsum;
            }
        } else {
            // y = softmax(x): dx = y * (g - sum(g * y))
            let mut dot = T::zero();
            for k in 0..len {
                let idx = start + k * stride;
                dot += gd[idx] * yd[idx];
            }
            for k in 0..len {
                let idx = start + k * stride;
                dx[idx] = yd[idx] * (gd[idx] - dot);
            }
        }
    }
    Tensor::from_vec(y.shape().to_vec(), dx).expect("shape preserved")
}

fn layer_norm_backward<T: Element>(
    x: &Tensor<T>,
    gain: &Tensor<T>,
    gout: &Tensor<T>,
    eps: T,
) -> (Tensor<T>, Tensor<T>, Tensor<T>) {
    let d = x.cols();
    let rows = x.rows();
    let dl = T::from_usize(d);
    let mut dx = vec![T::zero(); x.numel()];
    let mut dgain = vec![T::zero(); d];
    let mut dbias = vec![T::zero(); d];
    for r in 0..rows {
        let xr = &x.data()[r * d..(r + 1) * d];
        let gr = &gout.data()[r * d..(r + 1) * d];
        let (mean, std) = row_moments(xr, eps);
        let xhat: Vec<T> = xr.iter().map(|&v| (v - mean) / std).collect();
        let h: Vec<T> = (0..d).map(|j| gain.data()[j] * gr[j]).collect();
        let mut h_mean = T::zero();
        let mut hx_mean = T::zero();
        for j in 0..d {
            h_mean += h[j];
            hx_mean += h[j] * xhat[j];
        }
        h_mean = h_mean / dl;
        hx_mean = hx_mean / dl;
        for j in 0..d {
            dx[r * d + j] = (h[j] - h_mean - xhat[j] * hx_mean) / std;
            dgain[j] += gr[j] * xhat[j];
            dbias[j] += gr[j];
        }
    }
    (
        Tensor::from_vec(x.shape().to_vec(), dx).expect("shape preserved"),
        Tensor::row(dgain),
        Tensor::row(dbias),
    )
}
