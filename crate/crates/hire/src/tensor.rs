//! Dense 2-D tensors with a recorded operation tape for reverse-mode
//! differentiation.
//!
//! Values are 64-bit floats in row-major order. A [`Tape`] records every
//! operation applied to tape-bound values ([`Var`] handles); calling
//! [`Tape::backward`] on a scalar output accumulates gradients on every
//! leaf registered with `requires_grad`. Gradients accumulate additively
//! when a node feeds several consumers.
//!
//! The tape is single-threaded: one training step builds one tape, runs
//! one backward pass, and drops it. Tensors themselves are plain data and
//! safe to share once constructed.

use crate::error::{Error, Result};
use rand::Rng;

/// Dense 2-D array of `f64`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape {
                op: "Tensor::new",
                detail: format!("{}x{} needs {} values, got {}", rows, cols, rows * cols, data.len()),
            });
        }
        Ok(Tensor { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Tensor { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Tensor { rows, cols, data: vec![value; rows * cols] }
    }

    /// 1×1 tensor.
    pub fn scalar(value: f64) -> Self {
        Tensor { rows: 1, cols: 1, data: vec![value] }
    }

    /// Build from nested rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::Shape {
                    op: "Tensor::from_rows",
                    detail: format!("ragged rows: expected width {}, got {}", c, row.len()),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Tensor { rows: r, cols: c, data })
    }

    /// Single-row tensor.
    pub fn row_vector(values: &[f64]) -> Self {
        Tensor { rows: 1, cols: values.len(), data: values.to_vec() }
    }

    /// Single-column tensor.
    pub fn col_vector(values: &[f64]) -> Self {
        Tensor { rows: values.len(), cols: 1, data: values.to_vec() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Value of a 1×1 tensor.
    pub fn scalar_value(&self) -> Result<f64> {
        if self.rows == 1 && self.cols == 1 {
            Ok(self.data[0])
        } else {
            Err(Error::Contract(format!("expected 1x1 tensor, got {}x{}", self.rows, self.cols)))
        }
    }

    pub fn transposed(&self) -> Tensor {
        let mut out = Tensor::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Glorot (uniform) initialization: entries uniform in ±sqrt(6/(rows+cols)).
pub fn glorot_init<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Result<Tensor> {
    if rows == 0 || cols == 0 {
        return Err(Error::Degenerate(format!("glorot_init needs positive dims, got {}x{}", rows, cols)));
    }
    let bound = (6.0 / (rows + cols) as f64).sqrt();
    let data = (0..rows * cols).map(|_| rng.gen_range(-bound..=bound)).collect();
    Tensor::new(rows, cols, data)
}

/// Reduction flavor for [`Tape::reduce`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reduction {
    Sum,
    Mean,
}

/// Axis collapsed by [`Tape::reduce`]: `Rows` collapses the row dimension
/// (output 1×c), `Cols` the column dimension (output n×1), `All` both.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Rows,
    Cols,
    All,
}

/// Handle to a value recorded on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    MatMul { a: usize, b: usize },
    Add { a: usize, b: usize },
    Sub { a: usize, b: usize },
    Mul { a: usize, b: usize },
    Scale { a: usize, factor: f64 },
    Relu { a: usize },
    Tanh { a: usize },
    Exp { a: usize },
    Log { a: usize },
    Reduce { a: usize, kind: Reduction, axis: Axis },
    SoftmaxRows { a: usize, tau: f64 },
    Transpose { a: usize },
    SelectRows { a: usize, indices: Vec<usize> },
    NeighborMean { a: usize, edges: Vec<(usize, usize)>, dst_rows: usize },
    ConcatRows { parts: Vec<usize> },
    ConcatCols { parts: Vec<usize> },
}

#[derive(Debug)]
struct Node {
    value: Tensor,
    op: Op,
    requires_grad: bool,
    grad: Option<Tensor>,
}

/// Recorded computation tape. Nodes are topologically ordered by
/// construction: an operation can only consume already-recorded values.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Tape { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Register a leaf value. Only leaves with `requires_grad` receive
    /// gradients from [`Tape::backward`].
    pub fn leaf(&mut self, value: Tensor, requires_grad: bool) -> Var {
        self.push(value, Op::Leaf, requires_grad)
    }

    /// Register a gradient-free constant.
    pub fn constant(&mut self, value: Tensor) -> Var {
        self.leaf(value, false)
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    /// Gradient accumulated on `v` by the last [`Tape::backward`] call.
    /// `None` if no gradient flowed into it.
    pub fn grad(&self, v: Var) -> Option<&Tensor> {
        self.nodes[v.0].grad.as_ref()
    }

    fn push(&mut self, value: Tensor, op: Op, requires_grad: bool) -> Var {
        self.nodes.push(Node { value, op, requires_grad, grad: None });
        Var(self.nodes.len() - 1)
    }

    fn needs(&self, idx: usize) -> bool {
        self.nodes[idx].requires_grad
    }

    fn shape_of(&self, v: Var) -> (usize, usize) {
        self.nodes[v.0].value.shape()
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (m, k) = self.shape_of(a);
        let (k2, n) = self.shape_of(b);
        if k != k2 {
            return Err(Error::Shape {
                op: "matmul",
                detail: format!("lhs {}x{} vs rhs {}x{}", m, k, k2, n),
            });
        }
        let out = matmul_values(self.value(a), self.value(b));
        let rg = self.needs(a.0) || self.needs(b.0);
        Ok(self.push(out, Op::MatMul { a: a.0, b: b.0 }, rg))
    }

    fn binary_shapes(&self, op: &'static str, a: Var, b: Var) -> Result<()> {
        if self.shape_of(a) != self.shape_of(b) {
            let (ar, ac) = self.shape_of(a);
            let (br, bc) = self.shape_of(b);
            return Err(Error::Shape { op, detail: format!("lhs {}x{} vs rhs {}x{}", ar, ac, br, bc) });
        }
        Ok(())
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary_shapes("add", a, b)?;
        let out = zip_values(self.value(a), self.value(b), |x, y| x + y);
        let rg = self.needs(a.0) || self.needs(b.0);
        Ok(self.push(out, Op::Add { a: a.0, b: b.0 }, rg))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary_shapes("sub", a, b)?;
        let out = zip_values(self.value(a), self.value(b), |x, y| x - y);
        let rg = self.needs(a.0) || self.needs(b.0);
        Ok(self.push(out, Op::Sub { a: a.0, b: b.0 }, rg))
    }

    /// Entrywise (Hadamard) product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary_shapes("mul", a, b)?;
        let out = zip_values(self.value(a), self.value(b), |x, y| x * y);
        let rg = self.needs(a.0) || self.needs(b.0);
        Ok(self.push(out, Op::Mul { a: a.0, b: b.0 }, rg))
    }

    /// Multiply every entry by a scalar constant.
    pub fn scale(&mut self, a: Var, factor: f64) -> Var {
        let out = map_values(self.value(a), |x| x * factor);
        let rg = self.needs(a.0);
        self.push(out, Op::Scale { a: a.0, factor }, rg)
    }

    /// Rectified linear unit; the subgradient at 0 is 0.
    pub fn relu(&mut self, a: Var) -> Var {
        let out = map_values(self.value(a), |x| if x > 0.0 { x } else { 0.0 });
        let rg = self.needs(a.0);
        self.push(out, Op::Relu { a: a.0 }, rg)
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let out = map_values(self.value(a), f64::tanh);
        let rg = self.needs(a.0);
        self.push(out, Op::Tanh { a: a.0 }, rg)
    }

    pub fn exp(&mut self, a: Var) -> Var {
        let out = map_values(self.value(a), f64::exp);
        let rg = self.needs(a.0);
        self.push(out, Op::Exp { a: a.0 }, rg)
    }

    /// Natural logarithm; every entry must be strictly positive.
    pub fn log(&mut self, a: Var) -> Result<Var> {
        if let Some(bad) = self.value(a).data().iter().find(|v| **v <= 0.0) {
            return Err(Error::Domain(format!("log of non-positive entry {}", bad)));
        }
        let out = map_values(self.value(a), f64::ln);
        let rg = self.needs(a.0);
        Ok(self.push(out, Op::Log { a: a.0 }, rg))
    }

    /// Reduce along `axis`; `Mean` divides by the reduced extent.
    pub fn reduce(&mut self, a: Var, kind: Reduction, axis: Axis) -> Result<Var> {
        let t = self.value(a);
        if t.is_empty() {
            return Err(Error::Degenerate("reduce of empty tensor".into()));
        }
        let (n, c) = t.shape();
        let out = match axis {
            Axis::Rows => {
                let mut acc = vec![0.0; c];
                for i in 0..n {
                    for j in 0..c {
                        acc[j] += t.at(i, j);
                    }
                }
                if kind == Reduction::Mean {
                    for v in &mut acc {
                        *v /= n as f64;
                    }
                }
                Tensor { rows: 1, cols: c, data: acc }
            }
            Axis::Cols => {
                let mut acc = vec![0.0; n];
                for i in 0..n {
                    let mut s = 0.0;
                    for j in 0..c {
                        s += t.at(i, j);
                    }
                    acc[i] = if kind == Reduction::Mean { s / c as f64 } else { s };
                }
                Tensor { rows: n, cols: 1, data: acc }
            }
            Axis::All => {
                let mut s = 0.0;
                for v in t.data() {
                    s += v;
                }
                if kind == Reduction::Mean {
                    s /= (n * c) as f64;
                }
                Tensor::scalar(s)
            }
        };
        let rg = self.needs(a.0);
        Ok(self.push(out, Op::Reduce { a: a.0, kind, axis }, rg))
    }

    /// Row-wise softmax with temperature: `softmax(z_i / tau)` per row,
    /// computed with max subtraction for stability.
    pub fn softmax_rows(&mut self, a: Var, tau: f64) -> Result<Var> {
        if !(tau > 0.0) {
            return Err(Error::Config(format!("softmax temperature must be positive, got {}", tau)));
        }
        let t = self.value(a);
        let (n, c) = t.shape();
        if c == 0 {
            return Err(Error::Degenerate("softmax of zero-width tensor".into()));
        }
        let mut data = Vec::with_capacity(n * c);
        for i in 0..n {
            let row = t.row(i);
            let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut denom = 0.0;
            let mut exps = Vec::with_capacity(c);
            for &z in row {
                let e = ((z - m) / tau).exp();
                exps.push(e);
                denom += e;
            }
            for e in exps {
                data.push(e / denom);
            }
        }
        let out = Tensor { rows: n, cols: c, data };
        let rg = self.needs(a.0);
        Ok(self.push(out, Op::SoftmaxRows { a: a.0, tau }, rg))
    }

    pub fn transpose(&mut self, a: Var) -> Var {
        let out = self.value(a).transposed();
        let rg = self.needs(a.0);
        self.push(out, Op::Transpose { a: a.0 }, rg)
    }

    /// Gather rows by index; duplicate indices are allowed and gradients
    /// scatter-add back with multiplicity.
    pub fn select_rows(&mut self, a: Var, indices: &[usize]) -> Result<Var> {
        let t = self.value(a);
        let (n, c) = t.shape();
        if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
            return Err(Error::Shape {
                op: "select_rows",
                detail: format!("row index {} out of range for {}x{}", bad, n, c),
            });
        }
        let mut data = Vec::with_capacity(indices.len() * c);
        for &i in indices {
            data.extend_from_slice(t.row(i));
        }
        let out = Tensor { rows: indices.len(), cols: c, data };
        let rg = self.needs(a.0);
        Ok(self.push(out, Op::SelectRows { a: a.0, indices: indices.to_vec() }, rg))
    }

    /// Per-destination mean of source rows along an edge list. Edge
    /// multiplicity counts in both the numerator and the denominator;
    /// destinations with no incident edge get a zero row.
    pub fn neighbor_mean(&mut self, a: Var, edges: &[(usize, usize)], dst_rows: usize) -> Result<Var> {
        let t = self.value(a);
        let (n, c) = t.shape();
        if let Some(&(s, d)) = edges.iter().find(|&&(s, d)| s >= n || d >= dst_rows) {
            return Err(Error::Shape {
                op: "neighbor_mean",
                detail: format!("edge ({}, {}) out of range for src {} rows, dst {} rows", s, d, n, dst_rows),
            });
        }
        let mut acc = vec![0.0; dst_rows * c];
        let mut deg = vec![0.0f64; dst_rows];
        for &(s, d) in edges {
            deg[d] += 1.0;
            let src = t.row(s);
            let dst = &mut acc[d * c..(d + 1) * c];
            for (o, v) in dst.iter_mut().zip(src) {
                *o += v;
            }
        }
        for d in 0..dst_rows {
            if deg[d] > 0.0 {
                for v in &mut acc[d * c..(d + 1) * c] {
                    *v /= deg[d];
                }
            }
        }
        let out = Tensor { rows: dst_rows, cols: c, data: acc };
        let rg = self.needs(a.0);
        Ok(self.push(out, Op::NeighborMean { a: a.0, edges: edges.to_vec(), dst_rows }, rg))
    }

    /// Stack tensors vertically; all parts must share a column count.
    pub fn concat_rows(&mut self, parts: &[Var]) -> Result<Var> {
        if parts.is_empty() {
            return Err(Error::Degenerate("concat_rows of no tensors".into()));
        }
        let c = self.shape_of(parts[0]).1;
        let mut data = Vec::new();
        let mut rows = 0;
        for &p in parts {
            let t = self.value(p);
            if t.cols() != c {
                return Err(Error::Shape {
                    op: "concat_rows",
                    detail: format!("column mismatch: {} vs {}", c, t.cols()),
                });
            }
            rows += t.rows();
            data.extend_from_slice(t.data());
        }
        let out = Tensor { rows, cols: c, data };
        let rg = parts.iter().any(|p| self.needs(p.0));
        Ok(self.push(out, Op::ConcatRows { parts: parts.iter().map(|p| p.0).collect() }, rg))
    }

    /// Stack tensors horizontally; all parts must share a row count.
    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var> {
        if parts.is_empty() {
            return Err(Error::Degenerate("concat_cols of no tensors".into()));
        }
        let n = self.shape_of(parts[0]).0;
        let widths: Vec<usize> = parts.iter().map(|p| self.shape_of(*p).1).collect();
        for &p in parts {
            if self.shape_of(p).0 != n {
                return Err(Error::Shape {
                    op: "concat_cols",
                    detail: format!("row mismatch: {} vs {}", n, self.shape_of(p).0),
                });
            }
        }
        let total: usize = widths.iter().sum();
        let mut data = Vec::with_capacity(n * total);
        for i in 0..n {
            for (&p, &_w) in parts.iter().zip(&widths) {
                data.extend_from_slice(self.value(p).row(i));
            }
        }
        let out = Tensor { rows: n, cols: total, data };
        let rg = parts.iter().any(|p| self.needs(p.0));
        Ok(self.push(out, Op::ConcatCols { parts: parts.iter().map(|p| p.0).collect() }, rg))
    }

    /// Reverse-mode pass from a scalar output. Leaf gradients accumulate
    /// additively across all paths; repeated calls keep accumulating.
    pub fn backward(&mut self, out: Var) -> Result<()> {
        let (r, c) = self.shape_of(out);
        if (r, c) != (1, 1) {
            return Err(Error::Contract(format!("backward needs a 1x1 output, got {}x{}", r, c)));
        }
        self.accumulate(out.0, Tensor::scalar(1.0));
        for idx in (0..=out.0).rev() {
            if !self.nodes[idx].requires_grad || self.nodes[idx].grad.is_none() {
                continue;
            }
            let grad = self.nodes[idx].grad.clone().expect("checked above");
            let op = self.nodes[idx].op.clone();
            self.propagate(idx, &op, &grad);
        }
        Ok(())
    }

    fn accumulate(&mut self, idx: usize, delta: Tensor) {
        if !self.nodes[idx].requires_grad {
            return;
        }
        match &mut self.nodes[idx].grad {
            Some(g) => {
                for (gv, dv) in g.data.iter_mut().zip(delta.data()) {
                    *gv += dv;
                }
            }
            slot @ None => *slot = Some(delta),
        }
    }

    fn propagate(&mut self, idx: usize, op: &Op, g: &Tensor) {
        match op {
            Op::Leaf => {}
            Op::MatMul { a, b } => {
                if self.needs(*a) {
                    let da = matmul_values(g, &self.nodes[*b].value.transposed());
                    self.accumulate(*a, da);
                }
                if self.needs(*b) {
                    let db = matmul_values(&self.nodes[*a].value.transposed(), g);
                    self.accumulate(*b, db);
                }
            }
            Op::Add { a, b } => {
                if self.needs(*a) {
                    self.accumulate(*a, g.clone());
                }
                if self.needs(*b) {
                    self.accumulate(*b, g.clone());
                }
            }
            Op::Sub { a, b } => {
                if self.needs(*a) {
                    self.accumulate(*a, g.clone());
                }
                if self.needs(*b) {
                    self.accumulate(*b, map_values(g, |x| -x));
                }
            }
            Op::Mul { a, b } => {
                if self.needs(*a) {
                    let da = zip_values(g, &self.nodes[*b].value, |x, y| x * y);
                    self.accumulate(*a, da);
                }
                if self.needs(*b) {
                    let db = zip_values(g, &self.nodes[*a].value, |x, y| x * y);
                    self.accumulate(*b, db);
                }
            }
            Op::Scale { a, factor } => {
                if self.needs(*a) {
                    let f = *factor;
                    self.accumulate(*a, map_values(g, |x| x * f));
                }
            }
            Op::Relu { a } => {
                if self.needs(*a) {
                    let da = zip_values(g, &self.nodes[*a].value, |gx, x| if x > 0.0 { gx } else { 0.0 });
                    self.accumulate(*a, da);
                }
            }
            Op::Tanh { a } => {
                if self.needs(*a) {
                    let da = zip_values(g, &self.nodes[idx].value, |gx, y| gx * (1.0 - y * y));
                    self.accumulate(*a, da);
                }
            }
            Op::Exp { a } => {
                if self.needs(*a) {
                    let da = zip_values(g, &self.nodes[idx].value, |gx, y| gx * y);
                    self.accumulate(*a, da);
                }
            }
            Op::Log { a } => {
                if self.needs(*a) {
                    let da = zip_values(g, &self.nodes[*a].value, |gx, x| gx / x);
                    self.accumulate(*a, da);
                }
            }
            Op::Reduce { a, kind, axis } => {
                if self.needs(*a) {
                    let (n, c) = self.nodes[*a].value.shape();
                    let mut da = Tensor::zeros(n, c);
                    match axis {
                        Axis::Rows => {
                            let scale = if *kind == Reduction::Mean { 1.0 / n as f64 } else { 1.0 };
                            for i in 0..n {
                                for j in 0..c {
                                    da.data[i * c + j] = g.data[j] * scale;
                                }
                            }
                        }
                        Axis::Cols => {
                            let scale = if *kind == Reduction::Mean { 1.0 / c as f64 } else { 1.0 };
                            for i in 0..n {
                                for j in 0..c {
                                    da.data[i * c + j] = g.data[i] * scale;
                                }
                            }
                        }
                        Axis::All => {
                            let scale = if *kind == Reduction::Mean { 1.0 / (n * c) as f64 } else { 1.0 };
                            let gv = g.data[0] * scale;
                            for v in &mut da.data {
                                *v = gv;
                            }
                        }
                    }
                    self.accumulate(*a, da);
                }
            }
            Op::SoftmaxRows { a, tau } => {
                if self.needs(*a) {
                    let y = &self.nodes[idx].value;
                    let (n, c) = y.shape();
                    let mut da = Tensor::zeros(n, c);
                    for i in 0..n {
                        let mut dot = 0.0;
                        for j in 0..c {
                            dot += g.at(i, j) * y.at(i, j);
                        }
                        for j in 0..c {
                            da.data[i * c + j] = y.at(i, j) * (g.at(i, j) - dot) / tau;
                        }
                    }
                    self.accumulate(*a, da);
                }
            }
            Op::Transpose { a } => {
                if self.needs(*a) {
                    self.accumulate(*a, g.transposed());
                }
            }
            Op::SelectRows { a, indices } => {
                if self.needs(*a) {
                    let (n, c) = self.nodes[*a].value.shape();
                    let mut da = Tensor::zeros(n, c);
                    for (out_row, &src_row) in indices.iter().enumerate() {
                        for j in 0..c {
                            da.data[src_row * c + j] += g.at(out_row, j);
                        }
                    }
                    self.accumulate(*a, da);
                }
            }
            Op::NeighborMean { a, edges, dst_rows } => {
                if self.needs(*a) {
                    let (n, c) = self.nodes[*a].value.shape();
                    let mut deg = vec![0.0f64; *dst_rows];
                    for &(_, d) in edges {
                        deg[d] += 1.0;
                    }
                    let mut da = Tensor::zeros(n, c);
                    for &(s, d) in edges {
                        for j in 0..c {
                            da.data[s * c + j] += g.at(d, j) / deg[d];
                        }
                    }
                    self.accumulate(*a, da);
                }
            }
            Op::ConcatRows { parts } => {
                let mut offset = 0;
                for &p in parts {
                    let (pr, pc) = self.nodes[p].value.shape();
                    if self.needs(p) {
                        let mut dp = Tensor::zeros(pr, pc);
                        dp.data
                            .copy_from_slice(&g.data[offset * pc..(offset + pr) * pc]);
                        self.accumulate(p, dp);
                    }
                    offset += pr;
                }
            }
            Op::ConcatCols { parts } => {
                let n = g.rows();
                let mut offset = 0;
                for &p in parts {
                    let (pr, pc) = self.nodes[p].value.shape();
                    if self.needs(p) {
                        let mut dp = Tensor::zeros(pr, pc);
                        for i in 0..n {
                            for j in 0..pc {
                                dp.data[i * pc + j] = g.at(i, offset + j);
                            }
                        }
                        self.accumulate(p, dp);
                    }
                    offset += pc;
                }
            }
        }
    }
}

fn matmul_values(a: &Tensor, b: &Tensor) -> Tensor {
    let (m, _) = a.shape();
    let (_, n) = b.shape();
    let mut out = Tensor::zeros(m, n);
    for i in 0..m {
        let arow = a.row(i);
        let orow = &mut out.data[i * n..(i + 1) * n];
        for (p, &aip) in arow.iter().enumerate() {
            let brow = b.row(p);
            for (o, &bpj) in orow.iter_mut().zip(brow) {
                *o += aip * bpj;
            }
        }
    }
    out
}

fn map_values(t: &Tensor, f: impl Fn(f64) -> f64) -> Tensor {
    Tensor {
        rows: t.rows,
        cols: t.cols,
        data: t.data.iter().map(|&x| f(x)).collect(),
    }
}

fn zip_values(a: &Tensor, b: &Tensor, f: impl Fn(f64, f64) -> f64) -> Tensor {
    Tensor {
        rows: a.rows,
        cols: a.cols,
        data: a.data.iter().zip(&b.data).map(|(&x, &y)| f(x, y)).collect(),
    }
}

/// Central-difference gradient check for a scalar-valued tape program.
///
/// `build` constructs the forward graph from leaves registered for the
/// given inputs and returns the scalar output. The analytic gradients
/// from [`Tape::backward`] are compared against `(f(x+h) - f(x-h)) / 2h`
/// computed entry by entry from fresh forward passes. Returns the
/// maximum relative error over all input entries, with the denominator
/// floored at 0.01 so that near-zero gradients are compared absolutely.
pub fn check_gradients<F>(build: F, inputs: &[Tensor], h: f64) -> Result<f64>
where
    F: Fn(&mut Tape, &[Var]) -> Result<Var>,
{
    let eval = |tensors: &[Tensor]| -> Result<f64> {
        let mut tape = Tape::new();
        let vars: Vec<Var> = tensors.iter().map(|t| tape.leaf(t.clone(), true)).collect();
        let out = build(&mut tape, &vars)?;
        tape.value(out).scalar_value()
    };

    let mut tape = Tape::new();
    let vars: Vec<Var> = inputs.iter().map(|t| tape.leaf(t.clone(), true)).collect();
    let out = build(&mut tape, &vars)?;
    tape.backward(out)?;

    let mut worst = 0.0f64;
    let mut work: Vec<Tensor> = inputs.to_vec();
    for (vi, input) in inputs.iter().enumerate() {
        let analytic = tape
            .grad(vars[vi])
            .cloned()
            .unwrap_or_else(|| Tensor::zeros(input.rows(), input.cols()));
        for e in 0..input.len() {
            let orig = work[vi].data()[e];
            work[vi].data_mut()[e] = orig + h;
            let fp = eval(&work)?;
            work[vi].data_mut()[e] = orig - h;
            let fm = eval(&work)?;
            work[vi].data_mut()[e] = orig;
            let numeric = (fp - fm) / (2.0 * h);
            let a = analytic.data()[e];
            let denom = a.abs().max(numeric.abs()).max(1e-2);
            worst = worst.max((a - numeric).abs() / denom);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    fn t(rows: &[Vec<f64>]) -> Tensor {
        Tensor::from_rows(rows).unwrap()
    }

    #[test]
    fn matmul_identity() {
        let mut tape = Tape::new();
        let i2 = tape.constant(t(&[vec![1.0, 0.0], vec![0.0, 1.0]]));
        let b = tape.constant(t(&[vec![5.0, 6.0], vec![7.0, 8.0]]));
        let out = tape.matmul(i2, b).unwrap();
        assert_eq!(tape.value(out), &t(&[vec![5.0, 6.0], vec![7.0, 8.0]]));
    }

    #[test]
    fn matmul_hand_case() {
        let mut tape = Tape::new();
        let a = tape.constant(t(&[vec![1.0, 2.0], vec![3.0, 4.0]]));
        let b = tape.constant(t(&[vec![1.0], vec![1.0]]));
        let out = tape.matmul(a, b).unwrap();
        assert_eq!(tape.value(out), &t(&[vec![3.0], vec![7.0]]));
    }

    #[test]
    fn matmul_zero_annihilates() {
        let mut tape = Tape::new();
        let z = tape.constant(Tensor::zeros(2, 3));
        let b = tape.constant(t(&[vec![1.0, -2.0], vec![4.0, 0.5], vec![9.0, 3.0]]));
        let out = tape.matmul(z, b).unwrap();
        assert!(tape.value(out).data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn matmul_shape_error_names_both_shapes() {
        let mut tape = Tape::new();
        let a = tape.constant(Tensor::zeros(2, 3));
        let b = tape.constant(Tensor::zeros(2, 2));
        let err = tape.matmul(a, b).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("2x3") && msg.contains("2x2"), "message was {msg}");
    }

    #[test]
    fn relu_sign_split() {
        let mut tape = Tape::new();
        let x = tape.constant(Tensor::row_vector(&[-1.0, 0.0, 2.0]));
        let y = tape.relu(x);
        assert_eq!(tape.value(y).data(), &[0.0, 0.0, 2.0]);
    }

    #[test]
    fn tanh_odd_at_origin() {
        let mut tape = Tape::new();
        let x = tape.constant(Tensor::scalar(0.0));
        let y = tape.tanh(x);
        assert_eq!(tape.value(y).data(), &[0.0]);
    }

    #[test]
    fn exp_at_one() {
        let mut tape = Tape::new();
        let x = tape.constant(Tensor::scalar(1.0));
        let y = tape.exp(x);
        assert!((tape.value(y).data()[0] - std::f64::consts::E).abs() < 1e-15);
    }

    #[test]
    fn log_rejects_non_positive() {
        let mut tape = Tape::new();
        let x = tape.constant(Tensor::row_vector(&[1.0, 0.0]));
        assert!(matches!(tape.log(x), Err(Error::Domain(_))));
    }

    #[test]
    fn elementwise_shape_mismatch() {
        let mut tape = Tape::new();
        let a = tape.constant(Tensor::zeros(2, 2));
        let b = tape.constant(Tensor::zeros(2, 3));
        assert!(matches!(tape.add(a, b), Err(Error::Shape { .. })));
        assert!(matches!(tape.sub(a, b), Err(Error::Shape { .. })));
        assert!(matches!(tape.mul(a, b), Err(Error::Shape { .. })));
    }

    #[test]
    fn reduce_mean_over_rows() {
        let mut tape = Tape::new();
        let x = tape.constant(t(&[vec![1.0, 3.0], vec![3.0, 5.0]]));
        let y = tape.reduce(x, Reduction::Mean, Axis::Rows).unwrap();
        assert_eq!(tape.value(y).data(), &[2.0, 4.0]);
    }

    #[test]
    fn reduce_sum_of_zero_matrix() {
        let mut tape = Tape::new();
        let x = tape.constant(Tensor::zeros(3, 2));
        let y = tape.reduce(x, Reduction::Sum, Axis::All).unwrap();
        assert_eq!(tape.value(y).scalar_value().unwrap(), 0.0);
    }

    #[test]
    fn reduce_mean_all() {
        let mut tape = Tape::new();
        let x = tape.constant(t(&[vec![1.0, 2.0], vec![3.0, 6.0]]));
        let y = tape.reduce(x, Reduction::Mean, Axis::All).unwrap();
        assert_eq!(tape.value(y).scalar_value().unwrap(), 3.0);
    }

    #[test]
    fn reduce_empty_is_degenerate() {
        let mut tape = Tape::new();
        let x = tape.constant(Tensor::zeros(0, 3));
        assert!(matches!(
            tape.reduce(x, Reduction::Sum, Axis::All),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn softmax_uniform_on_constant_rows() {
        for tau in [0.5, 1.0, 8.0] {
            let mut tape = Tape::new();
            let x = tape.constant(Tensor::row_vector(&[0.0, 0.0, 0.0]));
            let y = tape.softmax_rows(x, tau).unwrap();
            for &v in tape.value(y).data() {
                assert!((v - 1.0 / 3.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn softmax_two_logits() {
        let mut tape = Tape::new();
        let x = tape.constant(Tensor::row_vector(&[1.0, 0.0]));
        let y = tape.softmax_rows(x, 1.0).unwrap();
        let e = std::f64::consts::E;
        let expect = [e / (1.0 + e), 1.0 / (1.0 + e)];
        for (got, want) in tape.value(y).data().iter().zip(expect) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn softmax_higher_temperature_is_smoother() {
        let mut tape = Tape::new();
        let x1 = tape.constant(Tensor::row_vector(&[1.0, 0.0]));
        let sharp = tape.softmax_rows(x1, 1.0).unwrap();
        let x8 = tape.constant(Tensor::row_vector(&[1.0, 0.0]));
        let smooth = tape.softmax_rows(x8, 8.0).unwrap();
        assert!(tape.value(smooth).data()[0] < tape.value(sharp).data()[0]);
    }

    #[test]
    fn softmax_rejects_non_positive_temperature() {
        let mut tape = Tape::new();
        let x = tape.constant(Tensor::row_vector(&[1.0, 0.0]));
        assert!(matches!(tape.softmax_rows(x, 0.0), Err(Error::Config(_))));
        let x = tape.constant(Tensor::row_vector(&[1.0, 0.0]));
        assert!(matches!(tape.softmax_rows(x, -2.0), Err(Error::Config(_))));
    }

    #[test]
    fn softmax_rows_sum_to_one_under_large_logits() {
        let mut tape = Tape::new();
        let x = tape.constant(t(&[vec![300.0, -300.0, 10.0], vec![-5.0, 0.0, 5.0]]));
        let y = tape.softmax_rows(x, 1.0).unwrap();
        for i in 0..2 {
            let s: f64 = tape.value(y).row(i).iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn backward_square() {
        let mut tape = Tape::new();
        let x = tape.leaf(Tensor::scalar(3.0), true);
        let y = tape.mul(x, x).unwrap();
        tape.backward(y).unwrap();
        assert!((tape.grad(x).unwrap().data()[0] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn backward_constant_has_no_gradient() {
        let mut tape = Tape::new();
        let x = tape.leaf(Tensor::scalar(2.0), true);
        let c = tape.constant(Tensor::scalar(5.0));
        let y = tape.mul(c, c).unwrap();
        tape.backward(y).unwrap();
        assert!(tape.grad(x).is_none());
    }

    #[test]
    fn backward_rejects_non_scalar() {
        let mut tape = Tape::new();
        let x = tape.leaf(Tensor::zeros(2, 2), true);
        assert!(matches!(tape.backward(x), Err(Error::Contract(_))));
    }

    #[test]
    fn backward_matmul_relu_sum_chain_matches_finite_differences() {
        let mut rng = substream(11, "chain");
        let mut a = glorot_init(3, 4, &mut rng).unwrap();
        let mut b = glorot_init(4, 2, &mut rng).unwrap();
        // keep pre-activation entries away from the relu kink
        for v in a.data_mut().iter_mut().chain(b.data_mut().iter_mut()) {
            if v.abs() < 1e-3 {
                *v += 0.1;
            }
        }
        let err = check_gradients(
            |tape, vars| {
                let prod = tape.matmul(vars[0], vars[1])?;
                let act = tape.relu(prod);
                tape.reduce(act, Reduction::Sum, Axis::All)
            },
            &[a, b],
            1e-5,
        )
        .unwrap();
        assert!(err < 1e-6, "relative error {err}");
    }

    #[test]
    fn gradient_accumulation_matches_single_use_decomposition() {
        // f(x) = sum(x*c1) + sum(x*c2) uses x twice; gradient must equal
        // the sum of the single-use gradients c1 and c2.
        let c1 = t(&[vec![1.0, -2.0], vec![0.5, 3.0]]);
        let c2 = t(&[vec![-4.0, 2.5], vec![1.5, -1.0]]);
        let x = t(&[vec![0.3, 0.7], vec![-0.2, 0.9]]);

        let mut tape = Tape::new();
        let xv = tape.leaf(x, true);
        let c1v = tape.constant(c1.clone());
        let c2v = tape.constant(c2.clone());
        let p1 = tape.mul(xv, c1v).unwrap();
        let p2 = tape.mul(xv, c2v).unwrap();
        let s1 = tape.reduce(p1, Reduction::Sum, Axis::All).unwrap();
        let s2 = tape.reduce(p2, Reduction::Sum, Axis::All).unwrap();
        let total = tape.add(s1, s2).unwrap();
        tape.backward(total).unwrap();
        let g = tape.grad(xv).unwrap();
        for i in 0..4 {
            assert!((g.data()[i] - (c1.data()[i] + c2.data()[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn select_rows_duplicates_accumulate() {
        let mut tape = Tape::new();
        let x = tape.leaf(t(&[vec![1.0, 2.0], vec![3.0, 4.0]]), true);
        let sel = tape.select_rows(x, &[0, 0, 1]).unwrap();
        assert_eq!(tape.value(sel).rows(), 3);
        let s = tape.reduce(sel, Reduction::Sum, Axis::All).unwrap();
        tape.backward(s).unwrap();
        assert_eq!(tape.grad(x).unwrap().data(), &[2.0, 2.0, 1.0, 1.0]);
    }

    #[test]
    fn neighbor_mean_forward_and_empty_destination() {
        let mut tape = Tape::new();
        let x = tape.constant(t(&[vec![2.0, 4.0], vec![10.0, 20.0]]));
        // node 0 and node 1 both feed destination 0; destination 1 is isolated
        let y = tape.neighbor_mean(x, &[(0, 0), (1, 0)], 2).unwrap();
        assert_eq!(tape.value(y).row(0), &[6.0, 12.0]);
        assert_eq!(tape.value(y).row(1), &[0.0, 0.0]);
    }

    #[test]
    fn glorot_bounds_and_determinism() {
        let mut rng = substream(0, "glorot");
        let w = glorot_init(2, 3, &mut rng).unwrap();
        let bound = (6.0f64 / 5.0).sqrt();
        assert!(w.data().iter().all(|v| v.abs() <= bound));

        let w1 = glorot_init(4, 4, &mut substream(42, "glorot")).unwrap();
        let w2 = glorot_init(4, 4, &mut substream(42, "glorot")).unwrap();
        assert_eq!(w1, w2);

        let w3 = glorot_init(1, 1, &mut substream(3, "glorot")).unwrap();
        assert!(w3.data()[0].abs() <= 3.0f64.sqrt());
    }

    #[test]
    fn glorot_rejects_zero_dims() {
        assert!(glorot_init(0, 3, &mut substream(0, "g")).is_err());
    }

    /// Randomized gradient check across every differentiable operation.
    #[test]
    fn all_ops_pass_randomized_gradient_checks() {
        let h = 1e-5;
        for seed in 0..20u64 {
            let mut rng = substream(seed, "gradcheck");
            let mut mk = |r: usize, c: usize| {
                let mut t = glorot_init(r, c, &mut rng).unwrap();
                for v in t.data_mut() {
                    // keep away from relu/log kinks and log's domain edge
                    *v = 0.5 + v.abs();
                }
                t
            };
            let a = mk(3, 4);
            let b = mk(4, 2);
            let c = mk(3, 4);

            let checks: Vec<(&str, f64)> = vec![
                (
                    "matmul",
                    check_gradients(
                        |t, v| {
                            let p = t.matmul(v[0], v[1])?;
                            t.reduce(p, Reduction::Sum, Axis::All)
                        },
                        &[a.clone(), b.clone()],
                        h,
                    )
                    .unwrap(),
                ),
                (
                    "add_sub_mul",
                    check_gradients(
                        |t, v| {
                            let s = t.add(v[0], v[1])?;
                            let d = t.sub(s, v[1])?;
                            let m = t.mul(d, v[0])?;
                            t.reduce(m, Reduction::Sum, Axis::All)
                        },
                        &[a.clone(), c.clone()],
                        h,
                    )
                    .unwrap(),
                ),
                (
                    "scale_relu",
                    check_gradients(
                        |t, v| {
                            let s = t.scale(v[0], -1.7);
                            let r = t.relu(s);
                            t.reduce(r, Reduction::Sum, Axis::All)
                        },
                        &[a.clone()],
                        h,
                    )
                    .unwrap(),
                ),
                (
                    "tanh_exp_log",
                    check_gradients(
                        |t, v| {
                            let th = t.tanh(v[0]);
                            let e = t.exp(th);
                            let l = t.log(e)?;
                            t.reduce(l, Reduction::Mean, Axis::All)
                        },
                        &[a.clone()],
                        h,
                    )
                    .unwrap(),
                ),
                (
                    "reduce_axes",
                    check_gradients(
                        |t, v| {
                            let rows = t.reduce(v[0], Reduction::Mean, Axis::Rows)?;
                            let again = t.reduce(rows, Reduction::Sum, Axis::All)?;
                            let cols = t.reduce(v[0], Reduction::Sum, Axis::Cols)?;
                            let more = t.reduce(cols, Reduction::Mean, Axis::All)?;
                            t.add(again, more)
                        },
                        &[a.clone()],
                        h,
                    )
                    .unwrap(),
                ),
                (
                    "softmax",
                    check_gradients(
                        |t, v| {
                            let sm = t.softmax_rows(v[0], 2.5)?;
                            let sq = t.mul(sm, sm)?;
                            t.reduce(sq, Reduction::Sum, Axis::All)
                        },
                        &[a.clone()],
                        h,
                    )
                    .unwrap(),
                ),
                (
                    "transpose_select_concat",
                    check_gradients(
                        |t, v| {
                            let tr = t.transpose(v[0]);
                            let sel = t.select_rows(v[0], &[0, 2, 0])?;
                            let cat = t.concat_rows(&[sel, v[0]])?;
                            let s1 = t.reduce(cat, Reduction::Sum, Axis::All)?;
                            let s2 = t.reduce(tr, Reduction::Mean, Axis::All)?;
                            t.add(s1, s2)
                        },
                        &[a.clone()],
                        h,
                    )
                    .unwrap(),
                ),
                (
                    "neighbor_mean_concat_cols",
                    check_gradients(
                        |t, v| {
                            let agg = t.neighbor_mean(v[0], &[(0, 1), (2, 1), (1, 0)], 3)?;
                            let cat = t.concat_cols(&[agg, v[0]])?;
                            t.reduce(cat, Reduction::Sum, Axis::All)
                        },
                        &[a.clone()],
                        h,
                    )
                    .unwrap(),
                ),
            ];
            for (name, err) in checks {
                assert!(err < 1e-4, "op {name} seed {seed}: relative error {err}");
            }
        }
    }
}
