//! Bipartite graph convolution over the variable-constraint graph.
//!
//! Parameters live in one flat vector; [`GnnShape::blocks`] gives the layout.
//! Every block is a two-layer perceptron `out = act(W2 relu(W1 x + b1) + b2)`
//! where `act` is a ReLU for all blocks except the final head.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::features::VcgSample;
use crate::{Error, Result};

const LOG_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GnnShape {
    pub cons_in: usize,
    pub var_in: usize,
    pub edge_in: usize,
    pub h: usize,
    /// Skip both half-convolutions and classify raw constraint embeddings.
    #[serde(default)]
    pub cons_only: bool,
}

/// Position of one block inside the flat parameter vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub name: String,
    pub offset: usize,
    pub inp: usize,
    pub hid: usize,
    pub out: usize,
    pub relu_out: bool,
}

impl BlockSpec {
    pub fn len(&self) -> usize {
        self.hid * self.inp + self.hid + self.out * self.hid + self.out
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn w1(&self) -> usize {
        self.offset
    }

    fn b1(&self) -> usize {
        self.w1() + self.hid * self.inp
    }

    fn w2(&self) -> usize {
        self.b1() + self.hid
    }

    fn b2(&self) -> usize {
        self.w2() + self.out * self.hid
    }
}

const CONS_EMBED: usize = 0;
const VAR_EMBED: usize = 1;
const PSI_V: usize = 2;
const PHI_V: usize = 3;
const PSI_C: usize = 4;
const PHI_C: usize = 5;
const HEAD: usize = 6;

impl GnnShape {
    pub fn new(cons_in: usize, var_in: usize, h: usize) -> Self {
        GnnShape {
            cons_in,
            var_in,
            edge_in: 1,
            h,
            cons_only: false,
        }
    }

    /// Blocks in storage order: constraint embedding, variable embedding,
    /// psi_V, phi_V, psi_C, phi_C, head.
    pub fn blocks(&self) -> Vec<BlockSpec> {
        let h = self.h;
        let dims = [
            ("cons_embed", self.cons_in, h, true),
            ("var_embed", self.var_in, h, true),
            ("psi_v", 2 * h + self.edge_in, h, true),
            ("phi_v", 2 * h, h, true),
            ("psi_c", 2 * h + self.edge_in, h, true),
            ("phi_c", 2 * h, h, true),
            ("head", h, 1, false),
        ];
        let mut offset = 0;
        dims.iter()
            .map(|&(name, inp, out, relu_out)| {
                let b = BlockSpec {
                    name: name.into(),
                    offset,
                    inp,
                    hid: h,
                    out,
                    relu_out,
                };
                offset += b.len();
                b
            })
            .collect()
    }

    pub fn num_params(&self) -> usize {
        self.blocks().iter().map(BlockSpec::len).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GnnParams {
    pub shape: GnnShape,
    pub theta: Vec<f64>,
}

impl GnnParams {
    pub fn zeros(shape: GnnShape) -> Self {
        GnnParams {
            shape,
            theta: vec![0.0; shape.num_params()],
        }
    }

    /// Weights uniform in `+-1/sqrt(fan_in)`, biases zero.
    pub fn init(shape: GnnShape, rng: &mut ChaCha8Rng) -> Self {
        let mut p = Self::zeros(shape);
        for b in shape.blocks() {
            let s1 = 1.0 / (b.inp as f64).sqrt();
            for w in &mut p.theta[b.w1()..b.b1()] {
                *w = rng.gen_range(-s1..s1);
            }
            let s2 = 1.0 / (b.hid as f64).sqrt();
            for w in &mut p.theta[b.w2()..b.b2()] {
                *w = rng.gen_range(-s2..s2);
            }
        }
        p
    }

    pub fn check_sample(&self, s: &VcgSample) -> Result<()> {
        let sh = &self.shape;
        if s.cons_feats.cols != sh.cons_in || s.var_feats.cols != sh.var_in {
            return Err(Error::Shape(format!(
                "sample widths {}/{} against model {}/{}",
                s.cons_feats.cols, s.var_feats.cols, sh.cons_in, sh.var_in
            )));
        }
        let (m, n) = (s.num_cons(), s.num_vars());
        if let Some(e) = s.edges.iter().find(|e| e.row >= m || e.col >= n) {
            return Err(Error::Shape(format!("edge ({}, {}) outside {m}x{n}", e.row, e.col)));
        }
        Ok(())
    }
}

/// Dropout state for a training pass.
pub struct Dropout<'a> {
    pub rate: f64,
    pub rng: &'a mut ChaCha8Rng,
}

struct BlockCache {
    x: Vec<f64>,
    /// Hidden activations after ReLU and dropout.
    a1: Vec<f64>,
    /// Backward multiplier of the hidden layer (ReLU gate times dropout scale).
    gate: Vec<f64>,
    y: Vec<f64>,
    rows: usize,
}

fn block_forward(theta: &[f64], b: &BlockSpec, x: Vec<f64>, rows: usize, drop: &mut Option<Dropout>) -> BlockCache {
    debug_assert_eq!(x.len(), rows * b.inp);
    let (w1, b1, w2, b2) = (
        &theta[b.w1()..b.b1()],
        &theta[b.b1()..b.w2()],
        &theta[b.w2()..b.b2()],
        &theta[b.b2()..b.offset + b.len()],
    );
    let mut a1 = vec![0.0; rows * b.hid];
    let mut gate = vec![0.0; rows * b.hid];
    for r in 0..rows {
        let xr = &x[r * b.inp..(r + 1) * b.inp];
        for k in 0..b.hid {
            let wk = &w1[k * b.inp..(k + 1) * b.inp];
            let z = b1[k] + wk.iter().zip(xr).map(|(w, v)| w * v).sum::<f64>();
            if z > 0.0 {
                let mut g = 1.0;
                if let Some(d) = drop.as_mut() {
                    if d.rate > 0.0 {
                        g = if d.rng.gen::<f64>() < d.rate { 0.0 } else { 1.0 / (1.0 - d.rate) };
                    }
                }
                a1[r * b.hid + k] = z * g;
                gate[r * b.hid + k] = g;
            }
        }
    }
    let mut y = vec![0.0; rows * b.out];
    for r in 0..rows {
        let ar = &a1[r * b.hid..(r + 1) * b.hid];
        for o in 0..b.out {
            let wo = &w2[o * b.hid..(o + 1) * b.hid];
            let z = b2[o] + wo.iter().zip(ar).map(|(w, v)| w * v).sum::<f64>();
            y[r * b.out + o] = if b.relu_out { z.max(0.0) } else { z };
        }
    }
    BlockCache { x, a1, gate, y, rows }
}

/// Accumulates parameter gradients into `grad` and returns the input gradient.
fn block_backward(theta: &[f64], b: &BlockSpec, c: &BlockCache, mut dy: Vec<f64>, grad: &mut [f64]) -> Vec<f64> {
    if b.relu_out {
        for (d, y) in dy.iter_mut().zip(&c.y) {
            if *y <= 0.0 {
                *d = 0.0;
            }
        }
    }
    let w1 = &theta[b.w1()..b.b1()];
    let w2 = &theta[b.w2()..b.b2()];
    let mut da1 = vec![0.0; c.rows * b.hid];
    for r in 0..c.rows {
        let ar = &c.a1[r * b.hid..(r + 1) * b.hid];
        let dar = &mut da1[r * b.hid..(r + 1) * b.hid];
        for o in 0..b.out {
            let d = dy[r * b.out + o];
            if d == 0.0 {
                continue;
            }
            grad[b.b2() + o] += d;
            let gw = &mut grad[b.w2() + o * b.hid..b.w2() + (o + 1) * b.hid];
            for (g, a) in gw.iter_mut().zip(ar) {
                *g += d * a;
            }
            for (da, w) in dar.iter_mut().zip(&w2[o * b.hid..(o + 1) * b.hid]) {
                *da += d * w;
            }
        }
    }
    let mut dx = vec![0.0; c.rows * b.inp];
    for r in 0..c.rows {
        let xr = &c.x[r * b.inp..(r + 1) * b.inp];
        let dxr = &mut dx[r * b.inp..(r + 1) * b.inp];
        for k in 0..b.hid {
            let d = da1[r * b.hid + k] * c.gate[r * b.hid + k];
            if d == 0.0 {
                continue;
            }
            grad[b.b1() + k] += d;
            let gw = &mut grad[b.w1() + k * b.inp..b.w1() + (k + 1) * b.inp];
            for (g, v) in gw.iter_mut().zip(xr) {
                *g += d * v;
            }
            for (dv, w) in dxr.iter_mut().zip(&w1[k * b.inp..(k + 1) * b.inp]) {
                *dv += d * w;
            }
        }
    }
    dx
}

struct Trace {
    cons: BlockCache,
    var: BlockCache,
    conv: Option<ConvTrace>,
    head: BlockCache,
}

struct ConvTrace {
    psi_v: BlockCache,
    phi_v: BlockCache,
    psi_c: BlockCache,
    phi_c: BlockCache,
}

fn edge_inputs(left: &[f64], right: &[f64], s: &VcgSample, h: usize) -> Vec<f64> {
    let mut z = Vec::with_capacity(s.edges.len() * (2 * h + 1));
    for e in &s.edges {
        z.extend_from_slice(&left[e.row * h..(e.row + 1) * h]);
        z.extend_from_slice(&right[e.col * h..(e.col + 1) * h]);
        z.push(e.coef);
    }
    z
}

fn concat_rows(a: &[f64], b: &[f64], rows: usize, h: usize) -> Vec<f64> {
    let mut z = Vec::with_capacity(rows * 2 * h);
    for r in 0..rows {
        z.extend_from_slice(&a[r * h..(r + 1) * h]);
        z.extend_from_slice(&b[r * h..(r + 1) * h]);
    }
    z
}

fn run(p: &GnnParams, s: &VcgSample, mut drop: Option<Dropout>) -> Trace {
    let blocks = p.shape.blocks();
    let h = p.shape.h;
    let (m, n) = (s.num_cons(), s.num_vars());
    let th = &p.theta;
    let cons = block_forward(th, &blocks[CONS_EMBED], s.cons_feats.data.clone(), m, &mut drop);
    let var = block_forward(th, &blocks[VAR_EMBED], s.var_feats.data.clone(), n, &mut drop);
    if p.shape.cons_only {
        let head = block_forward(th, &blocks[HEAD], cons.y.clone(), m, &mut drop);
        return Trace { cons, var, conv: None, head };
    }
    let ne = s.edges.len();
    let psi_v = block_forward(th, &blocks[PSI_V], edge_inputs(&cons.y, &var.y, s, h), ne, &mut drop);
    let mut agg_v = vec![0.0; n * h];
    for (k, e) in s.edges.iter().enumerate() {
        for (a, v) in agg_v[e.col * h..(e.col + 1) * h].iter_mut().zip(&psi_v.y[k * h..(k + 1) * h]) {
            *a += v;
        }
    }
    let phi_v = block_forward(th, &blocks[PHI_V], concat_rows(&var.y, &agg_v, n, h), n, &mut drop);
    let psi_c = block_forward(th, &blocks[PSI_C], edge_inputs(&cons.y, &phi_v.y, s, h), ne, &mut drop);
    let mut agg_c = vec![0.0; m * h];
    for (k, e) in s.edges.iter().enumerate() {
        for (a, v) in agg_c[e.row * h..(e.row + 1) * h].iter_mut().zip(&psi_c.y[k * h..(k + 1) * h]) {
            *a += v;
        }
    }
    let phi_c = block_forward(th, &blocks[PHI_C], concat_rows(&cons.y, &agg_c, m, h), m, &mut drop);
    let head = block_forward(th, &blocks[HEAD], phi_c.y.clone(), m, &mut drop);
    Trace {
        cons,
        var,
        conv: Some(ConvTrace { psi_v, phi_v, psi_c, phi_c }),
        head,
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Per-constraint logits.
pub fn logits(p: &GnnParams, s: &VcgSample) -> Result<Vec<f64>> {
    p.check_sample(s)?;
    Ok(run(p, s, None).head.y)
}

/// Per-constraint probabilities in evaluation mode.
pub fn forward(p: &GnnParams, s: &VcgSample) -> Result<Vec<f64>> {
    Ok(logits(p, s)?.into_iter().map(sigmoid).collect())
}

/// Weighted binary cross-entropy averaged over constraints.
pub fn loss_wbce(yhat: &[f64], y: &[f64], w0: f64, w1: f64) -> Result<f64> {
    if yhat.len() != y.len() {
        return Err(Error::Shape(format!("{} predictions for {} labels", yhat.len(), y.len())));
    }
    if y.is_empty() {
        return Ok(0.0);
    }
    let total: f64 = yhat
        .iter()
        .zip(y)
        .map(|(&p, &t)| w1 * t * p.max(LOG_CLAMP).ln() + w0 * (1.0 - t) * (1.0 - p).max(LOG_CLAMP).ln())
        .sum();
    Ok(-total / y.len() as f64)
}

/// Derivative of [`loss_wbce`] with respect to each logit.
fn loss_grad_logits(yhat: &[f64], y: &[f64], w0: f64, w1: f64) -> Vec<f64> {
    let m = y.len() as f64;
    yhat.iter()
        .zip(y)
        .map(|(&p, &t)| {
            let mut d = 0.0;
            if p > LOG_CLAMP {
                d -= w1 * t / p;
            }
            if 1.0 - p > LOG_CLAMP {
                d += w0 * (1.0 - t) / (1.0 - p);
            }
            d * p * (1.0 - p) / m
        })
        .collect()
}

/// Loss and its gradient over `theta` for one sample, accumulated into `grad`.
pub fn loss_and_grad(
    p: &GnnParams,
    s: &VcgSample,
    y: &[f64],
    w0: f64,
    w1: f64,
    drop: Option<Dropout>,
    grad: &mut [f64],
) -> Result<f64> {
    p.check_sample(s)?;
    if y.len() != s.num_cons() || grad.len() != p.theta.len() {
        return Err(Error::Shape(format!(
            "{} labels / {} grads for {} rows / {} params",
            y.len(),
            grad.len(),
            s.num_cons(),
            p.theta.len()
        )));
    }
    let tr = run(p, s, drop);
    let yhat: Vec<f64> = tr.head.y.iter().map(|&z| sigmoid(z)).collect();
    let loss = loss_wbce(&yhat, y, w0, w1)?;
    let dz = loss_grad_logits(&yhat, y, w0, w1);
    let blocks = p.shape.blocks();
    let th = &p.theta;
    let h = p.shape.h;
    let (m, n) = (s.num_cons(), s.num_vars());
    let d_top = block_backward(th, &blocks[HEAD], &tr.head, dz, grad);
    let Some(cv) = tr.conv else {
        block_backward(th, &blocks[CONS_EMBED], &tr.cons, d_top, grad);
        return Ok(loss);
    };
    let d_phi_c = block_backward(th, &blocks[PHI_C], &cv.phi_c, d_top, grad);
    let mut d_cons = vec![0.0; m * h];
    let mut d_psi_c = vec![0.0; s.edges.len() * h];
    for r in 0..m {
        d_cons[r * h..(r + 1) * h].copy_from_slice(&d_phi_c[r * 2 * h..r * 2 * h + h]);
    }
    for (k, e) in s.edges.iter().enumerate() {
        d_psi_c[k * h..(k + 1) * h].copy_from_slice(&d_phi_c[e.row * 2 * h + h..(e.row + 1) * 2 * h]);
    }
    let dz_c = block_backward(th, &blocks[PSI_C], &cv.psi_c, d_psi_c, grad);
    let w = 2 * h + 1;
    let mut d_vnew = vec![0.0; n * h];
    for (k, e) in s.edges.iter().enumerate() {
        let row = &dz_c[k * w..(k + 1) * w];
        for (d, g) in d_cons[e.row * h..(e.row + 1) * h].iter_mut().zip(&row[..h]) {
            *d += g;
        }
        for (d, g) in d_vnew[e.col * h..(e.col + 1) * h].iter_mut().zip(&row[h..2 * h]) {
            *d += g;
        }
    }
    let d_phi_v = block_backward(th, &blocks[PHI_V], &cv.phi_v, d_vnew, grad);
    let mut d_var = vec![0.0; n * h];
    for r in 0..n {
        d_var[r * h..(r + 1) * h].copy_from_slice(&d_phi_v[r * 2 * h..r * 2 * h + h]);
    }
    let mut d_psi_v = vec![0.0; s.edges.len() * h];
    for (k, e) in s.edges.iter().enumerate() {
        d_psi_v[k * h..(k + 1) * h].copy_from_slice(&d_phi_v[e.col * 2 * h + h..(e.col + 1) * 2 * h]);
    }
    let dz_v = block_backward(th, &blocks[PSI_V], &cv.psi_v, d_psi_v, grad);
    for (k, e) in s.edges.iter().enumerate() {
        let row = &dz_v[k * w..(k + 1) * w];
        for (d, g) in d_cons[e.row * h..(e.row + 1) * h].iter_mut().zip(&row[..h]) {
            *d += g;
        }
        for (d, g) in d_var[e.col * h..(e.col + 1) * h].iter_mut().zip(&row[h..2 * h]) {
            *d += g;
        }
    }
    block_backward(th, &blocks[CONS_EMBED], &tr.cons, d_cons, grad);
    block_backward(th, &blocks[VAR_EMBED], &tr.var, d_var, grad);
    Ok(loss)
}

/// Gradient of the weighted loss for one sample with dropout disabled.
pub fn gradients(p: &GnnParams, s: &VcgSample, y: &[f64], w0: f64, w1: f64) -> Result<Vec<f64>> {
    let mut g = vec![0.0; p.theta.len()];
    loss_and_grad(p, s, y, w0, w1, None, &mut g)?;
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{Edge, Matrix};
    use rand::SeedableRng;

    pub(crate) fn tiny_graph(rng: &mut ChaCha8Rng, m: usize, n: usize, fc: usize, fv: usize) -> VcgSample {
        let mut cons = Matrix::zeros(m, fc);
        cons.data.iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
        let mut var = Matrix::zeros(n, fv);
        var.data.iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
        let mut edges = Vec::new();
        for i in 0..m {
            for j in 0..n {
                if rng.gen_bool(0.5) {
                    edges.push(Edge { row: i, col: j, coef: rng.gen_range(-1.0..1.0) });
                }
            }
        }
        VcgSample {
            instance_id: "g".into(),
            round: 1,
            cons_feats: cons,
            var_feats: var,
            edges,
            labels: None,
        }
    }

    #[test]
    fn zero_params_give_one_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = tiny_graph(&mut rng, 4, 3, 5, 2);
        let p = GnnParams::zeros(GnnShape::new(5, 2, 4));
        assert!(forward(&p, &s).unwrap().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn loss_hand_value() {
        let l = loss_wbce(&[0.5], &[1.0], 1.0, 2.0).unwrap();
        assert!((l - 2.0 * 2f64.ln()).abs() < 1e-12);
        assert!(loss_wbce(&[1.0, 0.0], &[1.0, 0.0], 1.0, 1.0).unwrap().abs() < 1e-12);
        assert!(matches!(loss_wbce(&[0.5], &[], 1.0, 1.0), Err(Error::Shape(_))));
    }

    #[test]
    fn width_mismatch() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = tiny_graph(&mut rng, 2, 2, 5, 2);
        let p = GnnParams::zeros(GnnShape::new(6, 2, 4));
        assert!(matches!(forward(&p, &s), Err(Error::Shape(_))));
    }

    #[test]
    fn matched_half_labels_are_stationary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = tiny_graph(&mut rng, 3, 3, 4, 2);
        let p = GnnParams::zeros(GnnShape::new(4, 2, 4));
        let g = gradients(&p, &s, &[0.5; 3], 1.0, 1.0).unwrap();
        assert!(g.iter().all(|&v| v.abs() < 1e-15));
    }

    #[test]
    fn finite_differences_match() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for shape in [GnnShape::new(4, 3, 3), GnnShape { cons_only: true, ..GnnShape::new(4, 3, 3) }] {
            let s = tiny_graph(&mut rng, 3, 4, 4, 3);
            let mut p = GnnParams::zeros(shape);
            p.theta.iter_mut().for_each(|t| *t = rng.gen_range(-0.8..0.8));
            let y = [1.0, 0.0, 1.0];
            let g = gradients(&p, &s, &y, 1.0, 2.0).unwrap();
            let eps = 1e-5;
            for t in 0..p.theta.len() {
                let mut q = p.clone();
                q.theta[t] += eps;
                let lp = loss_wbce(&forward(&q, &s).unwrap(), &y, 1.0, 2.0).unwrap();
                q.theta[t] -= 2.0 * eps;
                let lm = loss_wbce(&forward(&q, &s).unwrap(), &y, 1.0, 2.0).unwrap();
                let fd = (lp - lm) / (2.0 * eps);
                let rel = (g[t] - fd).abs() / g[t].abs().max(fd.abs()).max(1e-6);
                assert!(rel < 1e-4, "param {t}: {} vs {fd}", g[t]);
            }
        }
    }
}
