//! Linear combinations of entropies of marginals of `p(cells) q(y|x) q(z|x)`,
//! with analytic gradients.
//!
//! A [`Model`] describes a distribution over a product of auxiliary axes
//! (for example `U x V x W x X`, or `U x V` with `X = t(U,V)`) together with
//! the input symbol carried by every cell. Receiver outputs are attached
//! through the channel kernels. Entropy terms may involve either output but
//! never both, which is all that the rate expressions need.

use std::collections::HashMap;
use std::f64::consts::LOG2_E;

use crate::channel::{BroadcastChannel, Side};
use crate::optimize::Objective;
use crate::probkit::entropy_bits;

/// A set of random variables: a bitmask over auxiliary axes, plus at most
/// one receiver output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VarSet {
    pub axes: u32,
    pub output: Option<Side>,
}

impl VarSet {
    pub const EMPTY: VarSet = VarSet { axes: 0, output: None };

    pub fn axes(list: &[usize]) -> Self {
        VarSet { axes: list.iter().fold(0, |m, &a| m | (1 << a)), output: None }
    }

    pub fn y() -> Self {
        VarSet { axes: 0, output: Some(Side::Y) }
    }

    pub fn z() -> Self {
        VarSet { axes: 0, output: Some(Side::Z) }
    }

    pub fn with(self, other: VarSet) -> Self {
        let output = match (self.output, other.output) {
            (Some(a), Some(b)) => {
                assert_eq!(a, b, "entropy terms never involve Y and Z jointly");
                Some(a)
            }
            (a, b) => a.or(b),
        };
        VarSet { axes: self.axes | other.axes, output }
    }
}

#[derive(Debug, Clone)]
struct Marginal {
    output: Option<Side>,
    /// marginal index (before the output axis) of every cell
    index: Vec<usize>,
    size: usize,
    out_size: usize,
}

/// Precomputed marginalization maps for one auxiliary layout and channel.
#[derive(Debug, Clone)]
pub struct Model {
    dims: Vec<usize>,
    input: Vec<usize>,
    q_y: Vec<Vec<f64>>,
    q_z: Vec<Vec<f64>>,
    marginals: Vec<Marginal>,
    ids: HashMap<VarSet, usize>,
}

/// A linear combination of entropies registered in a [`Model`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InfoExpr {
    terms: Vec<(usize, f64)>,
}

impl InfoExpr {
    pub fn scaled(&self, c: f64) -> InfoExpr {
        InfoExpr { terms: self.terms.iter().map(|&(i, a)| (i, a * c)).collect() }
    }

    pub fn plus(&self, other: &InfoExpr) -> InfoExpr {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        InfoExpr { terms }
    }

    pub fn minus(&self, other: &InfoExpr) -> InfoExpr {
        self.plus(&other.scaled(-1.0))
    }

    pub fn value(&self, ev: &Evaluation) -> f64 {
        self.terms.iter().map(|&(i, c)| c * ev.entropies[i]).sum()
    }

    /// Adds `coef * d(expr)/dp` into `grad`.
    pub fn add_gradient(&self, model: &Model, ev: &Evaluation, coef: f64, grad: &mut [f64]) {
        for &(i, c) in &self.terms {
            model.add_entropy_gradient(ev, i, coef * c, grad);
        }
    }
}

/// Marginals and entropies of one point.
#[derive(Debug, Clone)]
pub struct Evaluation {
    logs: Vec<Vec<f64>>,
    entropies: Vec<f64>,
}

impl Model {
    /// `input[k]` is the channel input symbol of flat cell `k` of `dims`.
    pub fn new(dims: Vec<usize>, input: Vec<usize>, ch: &BroadcastChannel) -> Self {
        let cells: usize = dims.iter().product();
        assert_eq!(cells, input.len(), "one input symbol per cell");
        assert!(input.iter().all(|&x| x < ch.x_size()));
        Self {
            dims,
            input,
            q_y: ch.q_y().to_vec(),
            q_z: ch.q_z().to_vec(),
            marginals: Vec::new(),
            ids: HashMap::new(),
        }
    }

    /// Layout whose last axis is the channel input itself.
    pub fn with_input_axis(mut dims: Vec<usize>, ch: &BroadcastChannel) -> Self {
        dims.push(ch.x_size());
        let cells: usize = dims.iter().product();
        let input = (0..cells).map(|k| k % ch.x_size()).collect();
        Self::new(dims, input, ch)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn cells(&self) -> usize {
        self.input.len()
    }

    pub fn input_of(&self, cell: usize) -> usize {
        self.input[cell]
    }

    fn kernel(&self, side: Side) -> &[Vec<f64>] {
        match side {
            Side::Y => &self.q_y,
            Side::Z => &self.q_z,
        }
    }

    /// Registers `H(set)` and returns its id.
    pub fn entropy_id(&mut self, set: VarSet) -> usize {
        if let Some(&id) = self.ids.get(&set) {
            return id;
        }
        let axes: Vec<usize> = (0..self.dims.len()).filter(|a| set.axes & (1 << a) != 0).collect();
        let mut index = Vec::with_capacity(self.cells());
        let mut coord = vec![0usize; self.dims.len()];
        for _ in 0..self.cells() {
            index.push(axes.iter().fold(0, |acc, &a| acc * self.dims[a] + coord[a]));
            for ax in (0..self.dims.len()).rev() {
                coord[ax] += 1;
                if coord[ax] < self.dims[ax] {
                    break;
                }
                coord[ax] = 0;
            }
        }
        let size = axes.iter().map(|&a| self.dims[a]).product();
        let out_size = set.output.map_or(1, |s| self.kernel(s)[0].len());
        self.marginals.push(Marginal { output: set.output, index, size, out_size });
        let id = self.marginals.len() - 1;
        self.ids.insert(set, id);
        id
    }

    pub fn entropy(&mut self, set: VarSet) -> InfoExpr {
        if set == VarSet::EMPTY {
            return InfoExpr::default();
        }
        let id = self.entropy_id(set);
        InfoExpr { terms: vec![(id, 1.0)] }
    }

    /// `I(A;B|C) = H(AC) + H(BC) - H(ABC) - H(C)`.
    pub fn info(&mut self, a: VarSet, b: VarSet, c: VarSet) -> InfoExpr {
        let hac = self.entropy(a.with(c));
        let hbc = self.entropy(b.with(c));
        let habc = self.entropy(a.with(b).with(c));
        let hc = self.entropy(c);
        hac.plus(&hbc).minus(&habc).minus(&hc)
    }

    pub fn evaluate(&self, p: &[f64]) -> Evaluation {
        let mut logs = Vec::with_capacity(self.marginals.len());
        let mut entropies = Vec::with_capacity(self.marginals.len());
        for m in &self.marginals {
            let mut table = vec![0.0; m.size * m.out_size];
            match m.output {
                None => {
                    for (k, &pk) in p.iter().enumerate() {
                        table[m.index[k]] += pk;
                    }
                }
                Some(side) => {
                    let q = self.kernel(side);
                    for (k, &pk) in p.iter().enumerate() {
                        if pk == 0.0 {
                            continue;
                        }
                        let base = m.index[k] * m.out_size;
                        for (o, qv) in q[self.input[k]].iter().enumerate() {
                            table[base + o] += pk * qv;
                        }
                    }
                }
            }
            entropies.push(entropy_bits(&table));
            logs.push(table.iter().map(|&v| v.max(1e-300).log2()).collect());
        }
        Evaluation { logs, entropies }
    }

    fn add_entropy_gradient(&self, ev: &Evaluation, id: usize, coef: f64, grad: &mut [f64]) {
        let m = &self.marginals[id];
        let logs = &ev.logs[id];
        match m.output {
            None => {
                for (k, g) in grad.iter_mut().enumerate() {
                    *g -= coef * (logs[m.index[k]] + LOG2_E);
                }
            }
            Some(side) => {
                let q = self.kernel(side);
                for (k, g) in grad.iter_mut().enumerate() {
                    let base = m.index[k] * m.out_size;
                    let s: f64 = q[self.input[k]]
                        .iter()
                        .enumerate()
                        .map(|(o, qv)| qv * logs[base + o])
                        .sum();
                    *g -= coef * (s + LOG2_E);
                }
            }
        }
    }
}

/// Smooth objective `expr(p)` over a model.
pub struct LinearObjective<'a> {
    pub model: &'a Model,
    pub expr: &'a InfoExpr,
}

impl Objective for LinearObjective<'_> {
    fn value(&self, p: &[f64]) -> f64 {
        self.expr.value(&self.model.evaluate(p))
    }

    fn gradient(&self, p: &[f64], grad: &mut [f64]) {
        let ev = self.model.evaluate(p);
        grad.iter_mut().for_each(|g| *g = 0.0);
        self.expr.add_gradient(self.model, &ev, 1.0, grad);
    }
}

/// Smoothed minimum of several expressions,
/// `-tau log2 sum_k 2^(-e_k/tau)`, which lies within `tau log2 K` below the
/// true minimum. With `tau = 0` the exact minimum is used and the gradient is
/// that of the (first) active branch.
pub struct SoftMinObjective<'a> {
    pub model: &'a Model,
    /// Each branch is a combination `sum_i w_i * exprs[i]`.
    pub branches: &'a [Vec<f64>],
    pub exprs: &'a [InfoExpr],
    /// Extra expressions that must stay nonnegative; violations are
    /// penalized linearly with this weight.
    pub nonneg: &'a [usize],
    pub penalty: f64,
    pub tau: f64,
}

impl SoftMinObjective<'_> {
    fn parts(&self, ev: &Evaluation) -> (Vec<f64>, Vec<f64>) {
        let vals: Vec<f64> = self.exprs.iter().map(|e| e.value(ev)).collect();
        let branch_vals =
            self.branches.iter().map(|w| w.iter().zip(&vals).map(|(a, b)| a * b).sum()).collect();
        (vals, branch_vals)
    }

    fn weights(&self, branch_vals: &[f64]) -> (f64, Vec<f64>) {
        let lo = branch_vals.iter().copied().fold(f64::INFINITY, f64::min);
        if self.tau <= 0.0 {
            let mut w = vec![0.0; branch_vals.len()];
            let i = branch_vals.iter().position(|&v| v == lo).unwrap_or(0);
            w[i] = 1.0;
            return (lo, w);
        }
        let e: Vec<f64> = branch_vals.iter().map(|v| (-(v - lo) / self.tau).exp2()).collect();
        let total: f64 = e.iter().sum();
        (lo - self.tau * total.log2(), e.iter().map(|v| v / total).collect())
    }
}

impl Objective for SoftMinObjective<'_> {
    fn value(&self, p: &[f64]) -> f64 {
        let ev = self.model.evaluate(p);
        let (vals, branch_vals) = self.parts(&ev);
        let (smin, _) = self.weights(&branch_vals);
        let pen: f64 = self.nonneg.iter().map(|&i| vals[i].min(0.0)).sum();
        smin + self.penalty * pen
    }

    fn gradient(&self, p: &[f64], grad: &mut [f64]) {
        let ev = self.model.evaluate(p);
        let (vals, branch_vals) = self.parts(&ev);
        let (_, w) = self.weights(&branch_vals);
        let mut coef = vec![0.0; self.exprs.len()];
        for (wk, branch) in w.iter().zip(self.branches) {
            for (c, b) in coef.iter_mut().zip(branch) {
                *c += wk * b;
            }
        }
        for &i in self.nonneg {
            if vals[i] < 0.0 {
                coef[i] += self.penalty;
            }
        }
        grad.iter_mut().for_each(|g| *g = 0.0);
        for (e, c) in self.exprs.iter().zip(coef) {
            if c != 0.0 {
                e.add_gradient(self.model, &ev, c, grad);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimize::{gradient_check, BlockSimplex};
    use crate::probkit::JointTable;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn channel() -> BroadcastChannel {
        BroadcastChannel::new(
            vec![vec![0.7, 0.2, 0.1], vec![0.25, 0.5, 0.25]],
            vec![vec![0.9, 0.1], vec![0.35, 0.65]],
        )
        .unwrap()
    }

    #[test]
    fn matches_dense_table_computation() {
        let ch = channel();
        // axes U, V, X
        let mut model = Model::with_input_axis(vec![2, 3], &ch);
        let (u, v) = (VarSet::axes(&[0]), VarSet::axes(&[1]));
        let expr = model
            .info(u, VarSet::y(), VarSet::EMPTY)
            .plus(&model.info(v, VarSet::z(), VarSet::EMPTY))
            .minus(&model.info(u, v, VarSet::EMPTY));
        let set = BlockSimplex::simplex(12);
        let p = set.random_point(&mut ChaCha8Rng::seed_from_u64(3));
        let got = expr.value(&model.evaluate(&p));

        // dense (U,V,X,Y) and (U,V,X,Z) tables
        let mut jy = Vec::new();
        let mut jz = Vec::new();
        for (k, &pk) in p.iter().enumerate() {
            let x = k % 2;
            jy.extend(ch.q_y()[x].iter().map(|q| pk * q));
            jz.extend(ch.q_z()[x].iter().map(|q| pk * q));
        }
        let ty = JointTable::new(vec![2, 3, 2, 3], jy).unwrap();
        let tz = JointTable::new(vec![2, 3, 2, 2], jz).unwrap();
        let expect = ty.info_raw(&[0], &[3], &[]) + tz.info_raw(&[1], &[3], &[])
            - ty.info_raw(&[0], &[1], &[]);
        assert!((got - expect).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_differences() {
        let ch = channel();
        let mut model = Model::with_input_axis(vec![2, 2, 2], &ch);
        let (u, v, w) = (VarSet::axes(&[0]), VarSet::axes(&[1]), VarSet::axes(&[2]));
        let expr = model
            .info(w, VarSet::y(), VarSet::EMPTY)
            .scaled(0.3)
            .plus(&model.info(u, VarSet::y(), w))
            .plus(&model.info(v, VarSet::z(), w))
            .minus(&model.info(u, v, w));
        let obj = LinearObjective { model: &model, expr: &expr };
        let set = BlockSimplex::simplex(model.cells());
        for seed in 0..5 {
            let p = set.random_point(&mut ChaCha8Rng::seed_from_u64(seed));
            let err = gradient_check(&obj, &set, &p);
            assert!(err < 1e-4, "relative error {err}");
        }
    }
}
