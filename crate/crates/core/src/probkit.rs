//! Finite-alphabet probability arithmetic.
//!
//! Everything is measured in bits. Dense row-major storage is used for joint
//! tables (last axis varies fastest); alphabets in this crate are tiny so no
//! sparse representation is needed.

use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerance on the total mass of a distribution.
pub const SUM_TOL: f64 = 1e-9;

/// Information values above `-CLAMP_TOL` are clamped to zero.
pub const CLAMP_TOL: f64 = 1e-9;

/// `-sum p log2 p` over raw weights, with `0 log 0 = 0`. No validation.
pub fn entropy_bits(probs: &[f64]) -> f64 {
    let mut h = 0.0;
    for &p in probs {
        if p > 0.0 {
            h -= p * p.log2();
        }
    }
    h
}

fn check_mass(probs: &[f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::Validation("empty distribution".into()));
    }
    for (i, &p) in probs.iter().enumerate() {
        if !p.is_finite() {
            return Err(Error::Validation(format!("entry {i} is not finite")));
        }
        if p < 0.0 {
            return Err(Error::Validation(format!("entry {i} is negative ({p})")));
        }
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > SUM_TOL {
        return Err(Error::Validation(format!("entries sum to {total}, expected 1")));
    }
    Ok(())
}

/// A validated probability distribution over an indexed alphabet.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ProbVector {
    probs: Vec<f64>,
}

impl ProbVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        check_mass(&probs)?;
        Ok(Self { probs })
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform distribution needs a nonempty alphabet");
        Self { probs: vec![1.0 / n as f64; n] }
    }

    /// Point mass on `index`.
    pub fn point(n: usize, index: usize) -> Self {
        let mut probs = vec![0.0; n];
        probs[index] = 1.0;
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.probs
    }
}

/// Joint distribution over a product alphabet.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointTable {
    dims: Vec<usize>,
    probs: Vec<f64>,
}

impl JointTable {
    pub fn new(dims: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::Validation(format!("bad table dimensions {dims:?}")));
        }
        let size: usize = dims.iter().product();
        if size != probs.len() {
            return Err(Error::Validation(format!(
                "table with dims {dims:?} needs {size} entries, got {}",
                probs.len()
            )));
        }
        check_mass(&probs)?;
        Ok(Self { dims, probs })
    }

    /// Builds a table from unnormalized nonnegative weights.
    pub fn from_weights(dims: Vec<usize>, mut weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(Error::Validation("weights must be nonnegative with positive total".into()));
        }
        weights.iter_mut().for_each(|w| *w /= total);
        Self::new(dims, weights)
    }

    /// Product distribution `p(a) p(b)` as a two-axis table.
    pub fn product(a: &ProbVector, b: &ProbVector) -> Self {
        let probs = a
            .probs()
            .iter()
            .flat_map(|pa| b.probs().iter().map(move |pb| pa * pb))
            .collect();
        Self { dims: vec![a.len(), b.len()], probs }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    pub fn flat_index(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.dims.len());
        index.iter().zip(&self.dims).fold(0, |acc, (i, d)| acc * d + i)
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.probs[self.flat_index(index)]
    }

    /// Decomposes a flat index into per-axis coordinates.
    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dims.len()];
        for (slot, d) in idx.iter_mut().zip(&self.dims).rev() {
            *slot = flat % d;
            flat /= d;
        }
        idx
    }

    /// Marginal over `axes`, in the order given.
    pub fn marginal(&self, axes: &[usize]) -> JointTable {
        let dims: Vec<usize> = axes.iter().map(|&a| self.dims[a]).collect();
        let probs = marginal_weights(&self.dims, &self.probs, axes);
        JointTable { dims: if dims.is_empty() { vec![1] } else { dims }, probs }
    }

    pub fn marginal_vector(&self, axis: usize) -> ProbVector {
        ProbVector { probs: marginal_weights(&self.dims, &self.probs, &[axis]) }
    }

    pub fn entropy(&self) -> f64 {
        entropy_bits(&self.probs)
    }

    /// Joint entropy of the listed axes.
    pub fn entropy_of(&self, axes: &[usize]) -> f64 {
        if axes.is_empty() {
            return 0.0;
        }
        entropy_bits(&marginal_weights(&self.dims, &self.probs, axes))
    }

    /// `I(A;B|C)` for axis groups, not clamped.
    pub fn info_raw(&self, a: &[usize], b: &[usize], given: &[usize]) -> f64 {
        let ac: Vec<usize> = a.iter().chain(given).copied().collect();
        let bc: Vec<usize> = b.iter().chain(given).copied().collect();
        let abc: Vec<usize> = a.iter().chain(b).chain(given).copied().collect();
        self.entropy_of(&ac) + self.entropy_of(&bc) - self.entropy_of(&abc) - self.entropy_of(given)
    }

    /// `I(A;B|C)` for axis groups, clamped at zero.
    pub fn info(&self, a: &[usize], b: &[usize], given: &[usize]) -> f64 {
        clamp_info(self.info_raw(a, b, given))
    }
}

/// Sums `probs` (laid out over `dims`) down to the listed axes.
pub fn marginal_weights(dims: &[usize], probs: &[f64], axes: &[usize]) -> Vec<f64> {
    let out_size: usize = axes.iter().map(|&a| dims[a]).product();
    let mut out = vec![0.0; out_size];
    // stride of each kept axis inside the output table
    let mut out_stride = vec![0usize; dims.len()];
    let mut s = 1;
    for &a in axes.iter().rev() {
        out_stride[a] += s;
        s *= dims[a];
    }
    let mut idx = vec![0usize; dims.len()];
    for &p in probs {
        let o: usize = idx.iter().zip(&out_stride).map(|(i, st)| i * st).sum();
        out[o] += p;
        for ax in (0..dims.len()).rev() {
            idx[ax] += 1;
            if idx[ax] < dims[ax] {
                break;
            }
            idx[ax] = 0;
        }
    }
    out
}

pub fn clamp_info(v: f64) -> f64 {
    debug_assert!(v >= -1e-6, "information value {v} is far below zero");
    v.max(0.0)
}

/// Shannon entropy in bits.
pub fn entropy(p: &ProbVector) -> f64 {
    entropy_bits(p.probs())
}

/// `I(A;B)` of a two-axis table.
pub fn mutual_information(joint: &JointTable) -> Result<f64> {
    if joint.rank() != 2 {
        return Err(Error::Usage(format!(
            "mutual_information needs a 2-axis table, got {} axes",
            joint.rank()
        )));
    }
    Ok(joint.info(&[0], &[1], &[]))
}

/// `I(A;B|C)` of a three-axis table; the last axis is the conditioning one.
pub fn conditional_mutual_information(joint: &JointTable) -> Result<f64> {
    if joint.rank() != 3 {
        return Err(Error::Usage(format!(
            "conditional_mutual_information needs a 3-axis table, got {} axes",
            joint.rank()
        )));
    }
    Ok(joint.info(&[0], &[1], &[2]))
}

/// Joint `p(a) k(b|a)` from an input law and a row-stochastic kernel.
pub fn compose(p: &ProbVector, kernel: &[Vec<f64>]) -> Result<JointTable> {
    if kernel.len() != p.len() || kernel.is_empty() {
        return Err(Error::Usage("kernel row count must match the input alphabet".into()));
    }
    let width = kernel[0].len();
    let mut probs = Vec::with_capacity(p.len() * width);
    for (pa, row) in p.probs().iter().zip(kernel) {
        if row.len() != width {
            return Err(Error::Usage("ragged kernel".into()));
        }
        probs.extend(row.iter().map(|k| pa * k));
    }
    JointTable::new(vec![p.len(), width], probs)
}
