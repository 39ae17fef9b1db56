//! Embedding → stacked LSTM → linear → softmax over the token vocabulary.
//!
//! All parameters live in one flat vector so that optimisers, checkpoints
//! and gradient checks can treat the network as a single tensor. Gradients
//! are accumulated by backpropagation through time over a cached forward
//! pass.

use std::ops::Range;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chem::Token;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NetDims {
    pub vocab: usize,
    pub embedding: usize,
    pub hidden: usize,
    pub layers: usize,
}

impl NetDims {
    fn layer_input(&self, layer: usize) -> usize {
        if layer == 0 {
            self.embedding
        } else {
            self.hidden
        }
    }

    fn embedding_range(&self) -> Range<usize> {
        0..self.vocab * self.embedding
    }

    /// Weight matrix (4H × (in + H), row-major, gate order i f g o) and
    /// bias of one LSTM layer.
    fn layer_ranges(&self, layer: usize) -> (Range<usize>, Range<usize>) {
        let mut off = self.vocab * self.embedding;
        for l in 0..layer {
            off += 4 * self.hidden * (self.layer_input(l) + self.hidden) + 4 * self.hidden;
        }
        let w = 4 * self.hidden * (self.layer_input(layer) + self.hidden);
        (off..off + w, off + w..off + w + 4 * self.hidden)
    }

    fn output_ranges(&self) -> (Range<usize>, Range<usize>) {
        let off = self.layer_ranges(self.layers - 1).1.end;
        let w = self.vocab * self.hidden;
        (off..off + w, off + w..off + w + self.vocab)
    }

    pub fn param_count(&self) -> usize {
        self.output_ranges().1.end
    }

    /// Named parameter tensors and their slices of the flat vector.
    pub fn tensors(&self) -> Vec<(String, Range<usize>)> {
        let mut out = vec![("embedding".to_string(), self.embedding_range())];
        for l in 0..self.layers {
            let (w, b) = self.layer_ranges(l);
            out.push((format!("lstm{l}.weight"), w));
            out.push((format!("lstm{l}.bias"), b));
        }
        let (w, b) = self.output_ranges();
        out.push(("output.weight".to_string(), w));
        out.push(("output.bias".to_string(), b));
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyNet<F> {
    dims: NetDims,
    params: Vec<F>,
}

/// Recurrent state carried between tokens during sampling.
#[derive(Debug, Clone)]
pub struct RecurrentState<F> {
    h: Vec<Vec<F>>,
    c: Vec<Vec<F>>,
}

/// Everything the backward pass needs about one layer at one time step.
#[derive(Debug, Clone)]
struct LayerStep<F> {
    /// Concatenated [x; h_prev].
    xh: Vec<F>,
    c_prev: Vec<F>,
    /// Activated gates i, f, g, o (4H).
    gates: Vec<F>,
    tanh_c: Vec<F>,
}

/// Cached forward pass over one sequence.
#[derive(Debug, Clone)]
pub struct SequenceTrace<F> {
    steps: Vec<Vec<LayerStep<F>>>,
    top_h: Vec<Vec<F>>,
    probs: Vec<Vec<F>>,
    /// log π(target_t | prefix) for every position.
    pub log_probs: Vec<F>,
}

#[inline]
fn sigmoid<F: Scalar>(x: F) -> F {
    crate::logistic(x)
}

impl<F: Scalar> PolicyNet<F> {
    pub fn zeros(dims: NetDims) -> Self {
        assert!(dims.layers >= 1 && dims.hidden >= 1 && dims.embedding >= 1 && dims.vocab >= 2);
        PolicyNet { dims, params: vec![F::zero(); dims.param_count()] }
    }

    /// Uniform initialisation: embeddings in (−1, 1), everything else in
    /// (−1/√H, 1/√H).
    pub fn random(dims: NetDims, seed: u64) -> Self {
        let mut net = PolicyNet::zeros(dims);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = 1.0 / (dims.hidden as f64).sqrt();
        let emb = dims.embedding_range();
        for (i, p) in net.params.iter_mut().enumerate() {
            let bound = if emb.contains(&i) { 1.0 } else { k };
            *p = F::lit(rng.gen_range(-bound..bound));
        }
        net
    }

    pub fn from_params(dims: NetDims, params: Vec<F>) -> Self {
        assert_eq!(params.len(), dims.param_count(), "parameter count mismatch");
        PolicyNet { dims, params }
    }

    pub fn dims(&self) -> NetDims {
        self.dims
    }

    pub fn params(&self) -> &[F] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [F] {
        &mut self.params
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }

    /// Order-sensitive FNV-1a hash of the raw parameter bits.
    pub fn param_hash(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for p in &self.params {
            for byte in p.as_f64().to_bits().to_le_bytes() {
                h ^= byte as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
        h
    }

    pub fn initial_state(&self) -> RecurrentState<F> {
        RecurrentState {
            h: vec![vec![F::zero(); self.dims.hidden]; self.dims.layers],
            c: vec![vec![F::zero(); self.dims.hidden]; self.dims.layers],
        }
    }

    /// One LSTM cell; returns (gates, c, tanh(c), h).
    fn cell(&self, layer: usize, xh: &[F], c_prev: &[F]) -> (Vec<F>, Vec<F>, Vec<F>, Vec<F>) {
        let hd = self.dims.hidden;
        let (wr, br) = self.dims.layer_ranges(layer);
        let w = &self.params[wr];
        let b = &self.params[br];
        let cols = xh.len();
        let mut gates: Vec<F> = (0..4 * hd)
            .map(|r| {
                b[r] + dot(&w[r * cols..(r + 1) * cols], xh)
            })
            .collect();
        for (r, z) in gates.iter_mut().enumerate() {
            *z = if r / hd == 2 { z.tanh() } else { sigmoid(*z) };
        }
        let mut c = vec![F::zero(); hd];
        let mut tc = vec![F::zero(); hd];
        let mut h = vec![F::zero(); hd];
        for k in 0..hd {
            let (i, f, g, o) = (gates[k], gates[hd + k], gates[2 * hd + k], gates[3 * hd + k]);
            c[k] = f * c_prev[k] + i * g;
            tc[k] = c[k].tanh();
            h[k] = o * tc[k];
        }
        (gates, c, tc, h)
    }

    fn logits(&self, h_top: &[F]) -> Vec<F> {
        let (wr, br) = self.dims.output_ranges();
        let w = &self.params[wr];
        let b = &self.params[br];
        let hd = self.dims.hidden;
        (0..self.dims.vocab)
            .map(|v| {
                b[v] + dot(&w[v * hd..(v + 1) * hd], h_top)
            })
            .collect()
    }

    fn embed(&self, token: Token) -> &[F] {
        let e = self.dims.embedding;
        &self.params[token.index() * e..(token.index() + 1) * e]
    }

    /// Feeds one token and returns the log-probabilities of the next one.
    pub fn step(&self, token: Token, state: &mut RecurrentState<F>) -> Vec<F> {
        let mut x = self.embed(token).to_vec();
        for l in 0..self.dims.layers {
            let mut xh = x;
            xh.extend_from_slice(&state.h[l]);
            let (_, c, _, h) = self.cell(l, &xh, &state.c[l]);
            state.c[l] = c;
            state.h[l] = h.clone();
            x = h;
        }
        log_softmax(&self.logits(&x))
    }

    /// Forward pass over `tokens[..n-1]` predicting `tokens[1..]`.
    pub fn trace(&self, tokens: &[Token]) -> SequenceTrace<F> {
        let steps_n = tokens.len().saturating_sub(1);
        let mut state = self.initial_state();
        let mut trace = SequenceTrace {
            steps: Vec::with_capacity(steps_n),
            top_h: Vec::with_capacity(steps_n),
            probs: Vec::with_capacity(steps_n),
            log_probs: Vec::with_capacity(steps_n),
        };
        for t in 0..steps_n {
            let mut x = self.embed(tokens[t]).to_vec();
            let mut layers = Vec::with_capacity(self.dims.layers);
            for l in 0..self.dims.layers {
                let mut xh = x;
                xh.extend_from_slice(&state.h[l]);
                let (gates, c, tanh_c, h) = self.cell(l, &xh, &state.c[l]);
                let c_prev = std::mem::replace(&mut state.c[l], c);
                state.h[l] = h.clone();
                layers.push(LayerStep { xh, c_prev, gates, tanh_c });
                x = h;
            }
            let lp = log_softmax(&self.logits(&x));
            trace.log_probs.push(lp[tokens[t + 1].index()]);
            trace.probs.push(lp.iter().map(|v| v.exp()).collect());
            trace.top_h.push(x);
            trace.steps.push(layers);
        }
        trace
    }

    /// Adds ∂/∂θ Σ_t weights[t]·log π(tokens[t+1] | tokens[..=t]) to `grad`.
    pub fn accumulate_gradient(
        &self,
        tokens: &[Token],
        trace: &SequenceTrace<F>,
        weights: &[F],
        grad: &mut [F],
    ) {
        let d = self.dims;
        let hd = d.hidden;
        assert_eq!(weights.len(), trace.log_probs.len());
        assert_eq!(grad.len(), self.params.len());
        let (owr, obr) = d.output_ranges();
        let mut dh_rec = vec![vec![F::zero(); hd]; d.layers];
        let mut dc_rec = vec![vec![F::zero(); hd]; d.layers];

        for t in (0..trace.log_probs.len()).rev() {
            let target = tokens[t + 1].index();
            let w_t = weights[t];
            let mut dh_above = vec![F::zero(); hd];
            if w_t != F::zero() {
                let probs = &trace.probs[t];
                let h_top = &trace.top_h[t];
                for v in 0..d.vocab {
                    let onehot = if v == target { F::one() } else { F::zero() };
                    let dl = w_t * (onehot - probs[v]);
                    if dl == F::zero() {
                        continue;
                    }
                    grad[obr.start + v] += dl;
                    let wrow = owr.start + v * hd;
                    axpy(dl, h_top, &mut grad[wrow..wrow + hd]);
                    axpy(dl, &self.params[wrow..wrow + hd], &mut dh_above);
                }
            }
            for l in (0..d.layers).rev() {
                let step = &trace.steps[t][l];
                let (wr, br) = d.layer_ranges(l);
                let cols = step.xh.len();
                let input = d.layer_input(l);
                let mut dz = vec![F::zero(); 4 * hd];
                let mut dc_prev = vec![F::zero(); hd];
                for k in 0..hd {
                    let (i, f, g, o) = (
                        step.gates[k],
                        step.gates[hd + k],
                        step.gates[2 * hd + k],
                        step.gates[3 * hd + k],
                    );
                    let tc = step.tanh_c[k];
                    let dh = dh_above[k] + dh_rec[l][k];
                    let dc = dc_rec[l][k] + dh * o * (F::one() - tc * tc);
                    dz[k] = dc * g * i * (F::one() - i);
                    dz[hd + k] = dc * step.c_prev[k] * f * (F::one() - f);
                    dz[2 * hd + k] = dc * i * (F::one() - g * g);
                    dz[3 * hd + k] = dh * tc * o * (F::one() - o);
                    dc_prev[k] = dc * f;
                }
                let mut dxh = vec![F::zero(); cols];
                for (r, &dzr) in dz.iter().enumerate() {
                    if dzr == F::zero() {
                        continue;
                    }
                    grad[br.start + r] += dzr;
                    let row = wr.start + r * cols;
                    axpy(dzr, &step.xh, &mut grad[row..row + cols]);
                    axpy(dzr, &self.params[row..row + cols], &mut dxh);
                }
                dh_rec[l] = dxh[input..].to_vec();
                dc_rec[l] = dc_prev;
                dh_above = dxh[..input].to_vec();
            }
            // dh_above now holds the gradient w.r.t. the embedding row
            let e = d.embedding;
            let row = tokens[t].index() * e;
            for k in 0..e {
                grad[row + k] += dh_above[k];
            }
        }
    }
}

/// Dot product with four interleaved partial sums.
fn dot<F: Scalar>(a: &[F], b: &[F]) -> F {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [F::zero(); 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: F = ca.remainder().iter().zip(cb.remainder()).map(|(&x, &y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for j in 0..4 {
            acc[j] += x[j] * y[j];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `y += alpha * x`.
fn axpy<F: Scalar>(alpha: F, x: &[F], y: &mut [F]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn log_softmax<F: Scalar>(logits: &[F]) -> Vec<F> {
    let max = logits.iter().copied().fold(F::neg_infinity(), F::max);
    let sum: F = logits.iter().map(|&z| (z - max).exp()).sum();
    let lse = max + sum.ln();
    logits.iter().map(|&z| z - lse).collect()
}
