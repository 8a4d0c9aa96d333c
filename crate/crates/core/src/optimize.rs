//! Multi-start ascent over products of scaled simplices, simplex projection
//! and golden-section search.
//!
//! Feasible sets are described by [`BlockSimplex`]: the coordinates are
//! partitioned into blocks and each block must be a nonnegative vector with
//! a fixed total mass. A plain probability simplex is one block of mass 1;
//! fixing an input marginal `p(x)` for a mapping-structured `p(u,v)` gives
//! one block per input symbol. Projection onto such a set is exact, block
//! by block.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Objective to be maximized.
///
/// Implementations must be reentrant: starts run concurrently.
pub trait Objective: Sync {
    fn value(&self, p: &[f64]) -> f64;

    /// Gradient of [`Objective::value`]. Defaults to central differences.
    fn gradient(&self, p: &[f64], grad: &mut [f64]) {
        finite_difference_gradient(|q| self.value(q), p, grad);
    }
}

/// Step used by [`finite_difference_gradient`].
pub const FD_STEP: f64 = 1e-6;

/// Central differences; one-sided at coordinates closer than the step to 0.
pub fn finite_difference_gradient<F: Fn(&[f64]) -> f64>(f: F, p: &[f64], grad: &mut [f64]) {
    let mut q = p.to_vec();
    for k in 0..p.len() {
        let orig = q[k];
        if orig >= FD_STEP {
            q[k] = orig + FD_STEP;
            let up = f(&q);
            q[k] = orig - FD_STEP;
            let down = f(&q);
            grad[k] = (up - down) / (2.0 * FD_STEP);
        } else {
            let base = f(&q);
            q[k] = orig + FD_STEP;
            grad[k] = (f(&q) - base) / FD_STEP;
        }
        q[k] = orig;
    }
}

/// Largest relative disagreement between the analytic gradient and central
/// differences at `p`, measured on the block-tangent components.
pub fn gradient_check<O: Objective + ?Sized>(obj: &O, set: &BlockSimplex, p: &[f64]) -> f64 {
    let mut analytic = vec![0.0; p.len()];
    obj.gradient(p, &mut analytic);
    let mut numeric = vec![0.0; p.len()];
    finite_difference_gradient(|q| obj.value(q), p, &mut numeric);
    set.tangent(&mut analytic);
    set.tangent(&mut numeric);
    let scale = analytic.iter().fold(1e-3f64, |m, v| m.max(v.abs()));
    analytic.iter().zip(&numeric).map(|(a, n)| (a - n).abs() / scale).fold(0.0, f64::max)
}

/// Euclidean projection onto the probability simplex (sort and threshold).
pub fn project_to_simplex(v: &[f64]) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::Usage("cannot project an empty vector".into()));
    }
    Ok(project_scaled(v, 1.0))
}

fn project_scaled(v: &[f64], mass: f64) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, &s) in sorted.iter().enumerate() {
        cum += s;
        let t = (cum - mass) / (i + 1) as f64;
        if s - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub indices: Vec<usize>,
    pub mass: f64,
}

/// Product of scaled simplices over a partition of the coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSimplex {
    dim: usize,
    blocks: Vec<Block>,
}

impl BlockSimplex {
    pub fn simplex(dim: usize) -> Self {
        Self { dim, blocks: vec![Block { indices: (0..dim).collect(), mass: 1.0 }] }
    }

    /// Blocks must partition `0..dim`; masses must be nonnegative.
    pub fn new(dim: usize, blocks: Vec<Block>) -> Result<Self> {
        let mut seen = vec![false; dim];
        for b in &blocks {
            if b.mass < 0.0 || !b.mass.is_finite() {
                return Err(Error::Usage(format!("block mass {} is invalid", b.mass)));
            }
            if b.indices.is_empty() && b.mass > 0.0 {
                return Err(Error::Usage("empty block with positive mass".into()));
            }
            for &i in &b.indices {
                if i >= dim || seen[i] {
                    return Err(Error::Usage(format!("coordinate {i} is out of range or repeated")));
                }
                seen[i] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Usage("blocks do not cover every coordinate".into()));
        }
        Ok(Self { dim, blocks })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for b in &self.blocks {
            if b.mass == 0.0 {
                continue;
            }
            let sub: Vec<f64> = b.indices.iter().map(|&i| v[i]).collect();
            for (&i, x) in b.indices.iter().zip(project_scaled(&sub, b.mass)) {
                out[i] = x;
            }
        }
        out
    }

    /// Removes the per-block mean, leaving the mass-preserving component.
    pub fn tangent(&self, g: &mut [f64]) {
        for b in &self.blocks {
            if b.indices.is_empty() {
                continue;
            }
            let mean = b.indices.iter().map(|&i| g[i]).sum::<f64>() / b.indices.len() as f64;
            for &i in &b.indices {
                g[i] -= mean;
            }
        }
    }

    pub fn uniform_point(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.dim];
        for b in &self.blocks {
            for &i in &b.indices {
                p[i] = b.mass / b.indices.len() as f64;
            }
        }
        p
    }

    /// Dirichlet(1) inside every block.
    pub fn random_point(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut p = vec![0.0; self.dim];
        for b in &self.blocks {
            let draws: Vec<f64> = b.indices.iter().map(|_| Exp1.sample(rng)).collect();
            let total: f64 = draws.iter().sum();
            for (&i, d) in b.indices.iter().zip(draws) {
                p[i] = b.mass * d / total;
            }
        }
        p
    }

    /// Mixes `p` with the uniform point so that every coordinate of a
    /// positive-mass block is strictly positive.
    pub fn interiorize(&self, p: &[f64], weight: f64) -> Vec<f64> {
        let u = self.uniform_point();
        p.iter().zip(u).map(|(a, b)| (1.0 - weight) * a + weight * b).collect()
    }

    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        p.len() == self.dim
            && p.iter().all(|&v| v >= -tol)
            && self.blocks.iter().all(|b| {
                (b.indices.iter().map(|&i| p[i]).sum::<f64>() - b.mass).abs() <= tol
            })
    }
}

/// Step geometry of the ascent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    /// Gradient step followed by Euclidean projection.
    Euclidean,
    /// Exponentiated-gradient (entropic mirror) step, renormalized per block.
    /// Iterates stay in the relative interior.
    Entropic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AscentConfig {
    pub starts: usize,
    pub max_iters: usize,
    /// Stop once an accepted step improves the objective by less than this.
    pub tol: f64,
    pub seed: u64,
    pub geometry: Geometry,
    pub initial_step: f64,
    pub shrink: f64,
    pub armijo: f64,
    pub max_backtracks: usize,
}

impl Default for AscentConfig {
    fn default() -> Self {
        Self {
            starts: 32,
            max_iters: 2000,
            tol: 1e-7,
            seed: 0,
            geometry: Geometry::Euclidean,
            initial_step: 1.0,
            shrink: 0.5,
            armijo: 1e-4,
            max_backtracks: 50,
        }
    }
}

impl AscentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || !(self.tol > 0.0) || !(self.initial_step > 0.0) {
            return Err(Error::Usage("ascent counts and tolerances must be positive".into()));
        }
        if !(0.0 < self.shrink && self.shrink < 1.0) {
            return Err(Error::Usage("backtracking shrink factor must be in (0,1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StartOutcome {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ascent {
    pub point: Vec<f64>,
    pub value: f64,
    pub best_start: usize,
    pub starts: Vec<StartOutcome>,
}

/// Multi-start ascent from the uniform point and `cfg.starts - 1`
/// Dirichlet draws.
pub fn maximize<O: Objective + ?Sized>(obj: &O, set: &BlockSimplex, cfg: &AscentConfig) -> Result<Ascent> {
    maximize_from(obj, set, cfg, &[])
}

/// As [`maximize`], with caller-supplied starting points tried first.
///
/// Ties between starts are broken towards the lowest start index, so results
/// do not depend on thread scheduling.
pub fn maximize_from<O: Objective + ?Sized>(
    obj: &O,
    set: &BlockSimplex,
    cfg: &AscentConfig,
    seeds: &[Vec<f64>],
) -> Result<Ascent> {
    cfg.validate()?;
    let mut initial: Vec<Vec<f64>> = seeds.iter().map(|s| set.project(s)).collect();
    for k in 0..cfg.starts {
        if k == 0 {
            initial.push(set.uniform_point());
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(0x9E37_79B9).wrapping_add(k as u64));
            initial.push(set.random_point(&mut rng));
        }
    }
    if initial.is_empty() {
        return Err(Error::Usage("ascent needs at least one start".into()));
    }
    let runs: Vec<(Vec<f64>, StartOutcome)> =
        initial.into_par_iter().map(|p0| ascend(obj, set, cfg, p0)).collect();
    let mut best: Option<usize> = None;
    for (i, (_, out)) in runs.iter().enumerate() {
        if !out.value.is_finite() {
            continue;
        }
        if best.map_or(true, |b| out.value > runs[b].1.value) {
            best = Some(i);
        }
    }
    let Some(b) = best else {
        return Err(Error::Numerical("every start produced a non-finite objective".into()));
    };
    let starts = runs.iter().map(|(_, o)| o.clone()).collect();
    let (point, outcome) = runs.into_iter().nth(b).expect("index in range");
    Ok(Ascent { point, value: outcome.value, best_start: b, starts })
}

fn sanitize(g: &mut [f64]) {
    for v in g.iter_mut() {
        if v.is_nan() {
            *v = 0.0;
        } else if !v.is_finite() || v.abs() > 1e6 {
            *v = v.signum() * 1e6;
        }
    }
}

fn take_step(set: &BlockSimplex, geometry: Geometry, p: &[f64], g: &[f64], eta: f64) -> Vec<f64> {
    match geometry {
        Geometry::Euclidean => {
            let moved: Vec<f64> = p.iter().zip(g).map(|(a, b)| a + eta * b).collect();
            set.project(&moved)
        }
        Geometry::Entropic => {
            let mut out = vec![0.0; p.len()];
            for b in set.blocks() {
                if b.mass == 0.0 {
                    continue;
                }
                let top = b
                    .indices
                    .iter()
                    .filter(|&&i| p[i] > 0.0)
                    .map(|&i| eta * g[i])
                    .fold(f64::NEG_INFINITY, f64::max);
                let mut total = 0.0;
                for &i in &b.indices {
                    let w = if p[i] > 0.0 { p[i] * (eta * g[i] - top).exp2() } else { 0.0 };
                    out[i] = w;
                    total += w;
                }
                for &i in &b.indices {
                    out[i] *= b.mass / total;
                }
            }
            out
        }
    }
}

fn ascend<O: Objective + ?Sized>(
    obj: &O,
    set: &BlockSimplex,
    cfg: &AscentConfig,
    mut p: Vec<f64>,
) -> (Vec<f64>, StartOutcome) {
    let mut f = obj.value(&p);
    if !f.is_finite() {
        return (p, StartOutcome { value: f64::NEG_INFINITY, iterations: 0, converged: false });
    }
    let mut g = vec![0.0; p.len()];
    let mut eta = cfg.initial_step;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iters {
        iterations += 1;
        obj.gradient(&p, &mut g);
        sanitize(&mut g);
        let mut accepted = None;
        for _ in 0..=cfg.max_backtracks {
            let q = take_step(set, cfg.geometry, &p, &g, eta);
            let fq = obj.value(&q);
            let predicted: f64 = g.iter().zip(q.iter().zip(&p)).map(|(gi, (a, b))| gi * (a - b)).sum();
            if fq.is_finite() && fq >= f + cfg.armijo * predicted.max(0.0) && fq >= f {
                accepted = Some((q, fq));
                break;
            }
            eta *= cfg.shrink;
        }
        match accepted {
            Some((q, fq)) => {
                let gain = fq - f;
                p = q;
                f = fq;
                eta = (eta * 2.0).min(1e8);
                if gain <= cfg.tol {
                    converged = true;
                    break;
                }
            }
            None => {
                converged = true;
                break;
            }
        }
    }
    (p, StartOutcome { value: f, iterations, converged })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoldenOutcome {
    pub argmin: f64,
    pub value: f64,
    /// Every `(lambda, f(lambda))` pair evaluated, in evaluation order.
    pub evaluations: Vec<(f64, f64)>,
    /// Midpoint-convexity violations spotted among the evaluations.
    pub warnings: Vec<String>,
}

/// Golden-section minimization of a convex function on `[0, 1]`.
///
/// Both endpoints are always evaluated, since the minimum of a convex
/// function on an interval may sit on the boundary.
pub fn golden_section_min<F: FnMut(f64) -> f64>(mut f: F, tol: f64) -> GoldenOutcome {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut evals: Vec<(f64, f64)> = Vec::new();
    let mut eval = |x: f64, evals: &mut Vec<(f64, f64)>| {
        let v = f(x);
        evals.push((x, v));
        v
    };
    let f0 = eval(0.0, &mut evals);
    let f1 = eval(1.0, &mut evals);
    let (mut a, mut b) = (0.0f64, 1.0f64);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = eval(c, &mut evals);
    let mut fd = eval(d, &mut evals);
    let tol = tol.max(1e-12);
    while (b - a) > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c, &mut evals);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d, &mut evals);
        }
    }
    let mut best = if fc <= fd { (c, fc) } else { (d, fd) };
    for cand in [(0.0, f0), (1.0, f1)] {
        if cand.1 < best.1 {
            best = cand;
        }
    }
    let warnings = convexity_warnings(&evals);
    GoldenOutcome { argmin: best.0, value: best.1, evaluations: evals, warnings }
}

/// Reports points that sit above the chord of their sorted neighbours.
pub fn convexity_warnings(evals: &[(f64, f64)]) -> Vec<String> {
    let mut pts = evals.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-15);
    let mut out = Vec::new();
    for w in pts.windows(3) {
        let (x0, y0) = w[0];
        let (x1, y1) = w[1];
        let (x2, y2) = w[2];
        let chord = y0 + (y2 - y0) * (x1 - x0) / (x2 - x0);
        let excess = y1 - chord;
        if excess > 1e-6 * (1.0 + y1.abs()) {
            out.push(format!("convexity violated at {x1:.6} by {excess:.3e}"));
        }
    }
    out
}
