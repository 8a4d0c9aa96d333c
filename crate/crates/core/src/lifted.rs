//! Joint search space `p(w,u,v,x)` shared by the sum-rate and region
//! computations, with the input as a free axis.

use crate::channel::BroadcastChannel;
use crate::error::Result;
use crate::infoexpr::{InfoExpr, Model, SoftMinObjective, VarSet};
use crate::optimize::{maximize_from, Ascent, AscentConfig, BlockSimplex, Objective};
use crate::probkit::JointTable;

pub(crate) const W: usize = 0;
pub(crate) const U: usize = 1;
pub(crate) const V: usize = 2;

/// Entries of `p(x|w)` below this are treated as zero when a witness is
/// extracted; `w` with less mass than this is dropped.
pub(crate) const PRUNE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Layout {
    pub nw: usize,
    pub nu: usize,
    pub nv: usize,
    pub nx: usize,
}

impl Layout {
    pub fn len(&self) -> usize {
        self.nw * self.nu * self.nv * self.nx
    }

    pub fn index(&self, w: usize, u: usize, v: usize, x: usize) -> usize {
        ((w * self.nu + u) * self.nv + v) * self.nx + x
    }

    pub fn model(&self, ch: &BroadcastChannel) -> Model {
        Model::with_input_axis(vec![self.nw, self.nu, self.nv], ch)
    }

    pub fn joint(&self, p: &[f64]) -> Result<JointTable> {
        JointTable::from_weights(vec![self.nw, self.nu, self.nv, self.nx], p.to_vec())
    }

    /// `p(w,x)` flattened row-major.
    pub fn p_wx(&self, p: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.nw * self.nx];
        for w in 0..self.nw {
            for u in 0..self.nu {
                for v in 0..self.nv {
                    for x in 0..self.nx {
                        out[w * self.nx + x] += p[self.index(w, u, v, x)];
                    }
                }
            }
        }
        out
    }

    /// Point that puts `weight(w,u,v,x)` on each cell, normalized.
    pub fn embed(&self, weight: impl Fn(usize, usize, usize, usize) -> f64) -> Vec<f64> {
        let mut p = vec![0.0; self.len()];
        for w in 0..self.nw {
            for u in 0..self.nu {
                for v in 0..self.nv {
                    for x in 0..self.nx {
                        p[self.index(w, u, v, x)] = weight(w, u, v, x);
                    }
                }
            }
        }
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= total);
        p
    }

    /// Starting points for the classical single-auxiliary strategies:
    /// superposition (`W = X`), and each receiver decoding `X` alone.
    pub fn structured_seeds(&self) -> Vec<Vec<f64>> {
        let mut seeds = Vec::new();
        let nx = self.nx;
        if self.nw >= nx {
            seeds.push(self.embed(|w, u, v, x| f64::from(u8::from(w == x && u == 0 && v == 0))));
        }
        if self.nu >= nx {
            seeds.push(self.embed(|w, u, v, x| f64::from(u8::from(w == 0 && u == x && v == 0))));
        }
        if self.nv >= nx {
            seeds.push(self.embed(|w, u, v, x| f64::from(u8::from(w == 0 && u == 0 && v == x))));
        }
        if self.nu >= nx && self.nv >= nx && nx > 1 {
            // binning-like start: U and V each carry a noisy copy of X
            seeds.push(self.embed(|w, u, v, x| {
                if w != 0 {
                    return 0.0;
                }
                (if u == x { 3.0 } else { 1.0 }) * (if v == x { 3.0 } else { 1.0 })
            }));
        }
        seeds
    }
}

pub(crate) fn wset() -> VarSet {
    VarSet::axes(&[W])
}

pub(crate) fn uset() -> VarSet {
    VarSet::axes(&[U])
}

pub(crate) fn vset() -> VarSet {
    VarSet::axes(&[V])
}

/// `p(w)` and `p(x|w)` from a flattened `p(w,x)`, with negligible entries
/// removed and rows renormalized. Returned `w` indices refer to the input.
pub(crate) fn clean_wx(p_wx: &[f64], nx: usize) -> Vec<(usize, f64, Vec<f64>)> {
    let nw = p_wx.len() / nx;
    let mut rows = Vec::new();
    for w in 0..nw {
        let row = &p_wx[w * nx..(w + 1) * nx];
        let pw: f64 = row.iter().sum();
        if pw < PRUNE {
            continue;
        }
        let mut cond: Vec<f64> = row.iter().map(|v| v / pw).collect();
        cond.iter_mut().for_each(|v| {
            if *v < PRUNE {
                *v = 0.0;
            }
        });
        let s: f64 = cond.iter().sum();
        cond.iter_mut().for_each(|v| *v /= s);
        rows.push((w, pw, cond));
    }
    let total: f64 = rows.iter().map(|r| r.1).sum();
    for r in &mut rows {
        r.1 /= total;
    }
    rows
}

/// Smoothing levels of the soft-min continuation.
pub(crate) const TAU_SCHEDULE: [f64; 4] = [1e-2, 1e-3, 1e-4, 1e-5];

/// Maximizes `min_k branch_k . exprs` by continuation on the soft-min
/// temperature. The first level is multi-start; later levels refine the
/// best point so far and the best seed. The returned point is the one with
/// the highest exact (unsmoothed) objective among everything visited, so
/// the result is never worse than any seed.
#[allow(clippy::too_many_arguments)]
pub(crate) fn anneal_softmin(
    model: &Model,
    exprs: &[InfoExpr],
    branches: &[Vec<f64>],
    nonneg: &[usize],
    set: &BlockSimplex,
    cfg: &AscentConfig,
    seeds: &[Vec<f64>],
) -> Result<Ascent> {
    let penalty = 10.0 * branches.iter().flatten().fold(1.0f64, |m, &v| m.max(v.abs()));
    let exact = SoftMinObjective { model, branches, exprs, nonneg, penalty, tau: 0.0 };
    let mut best_seed: Option<(f64, Vec<f64>)> = None;
    for s in seeds {
        let v = exact.value(s);
        if best_seed.as_ref().map_or(true, |b| v > b.0) {
            best_seed = Some((v, s.clone()));
        }
    }
    let mut chain: Option<Ascent> = None;
    let mut seed_chain: Option<Vec<f64>> = best_seed.as_ref().map(|b| b.1.clone());
    let mut visited: Vec<Ascent> = Vec::new();
    for (level, &tau) in TAU_SCHEDULE.iter().enumerate() {
        let obj = SoftMinObjective { model, branches, exprs, nonneg, penalty, tau };
        let run = if level == 0 {
            maximize_from(&obj, set, cfg, seeds)?
        } else {
            let start = chain.as_ref().map(|b| b.point.clone()).into_iter().collect::<Vec<_>>();
            maximize_from(&obj, set, &AscentConfig { starts: 0, ..cfg.clone() }, &start)?
        };
        if let Some(s) = seed_chain.take() {
            let r = maximize_from(&obj, set, &AscentConfig { starts: 0, ..cfg.clone() }, &[s])?;
            seed_chain = Some(r.point.clone());
            visited.push(r);
        }
        visited.push(run.clone());
        chain = Some(run);
    }
    let mut out = chain.expect("schedule is nonempty");
    out.value = exact.value(&out.point);
    for mut r in visited {
        r.value = exact.value(&r.point);
        if r.value > out.value {
            out = r;
        }
    }
    if let Some((v, p)) = best_seed {
        if v > out.value {
            out.value = v;
            out.point = p;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_indexing_matches_joint() {
        let l = Layout { nw: 2, nu: 3, nv: 2, nx: 2 };
        let p = l.embed(|w, u, v, x| (1 + w + 2 * u + 3 * v + 5 * x) as f64);
        let j = l.joint(&p).unwrap();
        assert!((j.get(&[1, 2, 0, 1]) - p[l.index(1, 2, 0, 1)]).abs() < 1e-15);
        let wx = l.p_wx(&p);
        let m = j.marginal(&[0, 3]);
        for (a, b) in wx.iter().zip(m.probs()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn cleaning_drops_tiny_mass() {
        let rows = clean_wx(&[0.5, 1e-12, 0.0, 0.0, 0.25, 0.25], 2);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].2, vec![1.0, 0.0]);
        assert!((rows[1].1 - 0.5).abs() < 1e-9);
    }
}
