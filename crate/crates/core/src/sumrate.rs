//! Sum-rate of Marton's inner bound.
//!
//! `T(p_x)` is the largest value of `I(U;Y)+I(V;Z)-I(U;V)` with `X ~ p_x` a
//! deterministic function of `(U,V)`. `T_lambda` adds a superposition layer
//! `W`, and the sum-rate is `min_lambda T_lambda`.
//!
//! Every `T_lambda` evaluation runs a multi-start ascent over the full joint
//! `p(w,u,v,x)` and then certifies the result by solving the fixed-`p(x|w)`
//! problem separately for each `w` over explicit mapping tables. The value
//! reported is always the certified one, so each witness is a lower bound
//! that can be rechecked from its parts.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{BroadcastChannel, Side};
use crate::error::{Error, Result};
use crate::infoexpr::{InfoExpr, LinearObjective, Model, VarSet};
use crate::lifted::{self, clean_wx, Layout};
use crate::mappings::{
    admissible_mappings, check_less_noisy, check_stationarity, check_support_positivity,
    enumerate_mappings, extend_with_outputs, joint_from_mapping, ConditionReport, LessNoisyProbe,
    MappingTable,
};
use crate::optimize::{
    golden_section_min, maximize_from, AscentConfig, Block, BlockSimplex, Geometry,
};
use crate::probkit::{JointTable, ProbVector};

/// How the necessary-condition filters are used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterMode {
    /// Search admissible mapping tables only.
    On,
    /// Search every mapping table.
    Off,
    /// Search every table and record whether the optimum would survive.
    Report,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SumRateOptions {
    pub seed: u64,
    /// Starts of the joint ascent over `p(w,u,v,x)`.
    pub starts: usize,
    /// Starts per mapping table in the fixed-`p_x` problem.
    pub inner_starts: usize,
    pub max_iters: usize,
    pub filters: FilterMode,
    /// Use `|U|, |V| <= |X|` instead of the tighter output-size bounds.
    pub widen: bool,
    /// Smoothing applied to channels with zero entries when filters are on.
    pub smoothing_delta: f64,
    pub golden_tol: f64,
    pub condition_tol: f64,
    /// Random kernels for the less-noisy evidence; 0 skips it.
    pub less_noisy_samples: usize,
}

impl Default for SumRateOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            starts: 12,
            inner_starts: 3,
            max_iters: 4000,
            filters: FilterMode::On,
            widen: false,
            smoothing_delta: 1e-6,
            golden_tol: 1e-4,
            condition_tol: 1e-3,
            less_noisy_samples: 0,
        }
    }
}

impl SumRateOptions {
    pub fn validate(&self) -> Result<()> {
        if self.inner_starts == 0 {
            return Err(Error::Usage("inner_starts must be positive".into()));
        }
        if !(self.golden_tol > 0.0) || !(self.condition_tol > 0.0) {
            return Err(Error::Usage("tolerances must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.smoothing_delta) {
            return Err(Error::Usage("smoothing delta must lie in [0,1)".into()));
        }
        Ok(())
    }

    fn outer_config(&self, seed_offset: u64) -> AscentConfig {
        AscentConfig {
            starts: self.starts,
            max_iters: self.max_iters,
            tol: 1e-12,
            seed: self.seed.wrapping_add(seed_offset),
            geometry: Geometry::Entropic,
            ..AscentConfig::default()
        }
    }

    fn inner_config(&self, seed: u64) -> AscentConfig {
        AscentConfig {
            starts: self.inner_starts,
            max_iters: self.max_iters,
            tol: 1e-14,
            seed,
            geometry: Geometry::Entropic,
            ..AscentConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InnerTResult {
    pub value: f64,
    pub mapping: MappingTable,
    /// `p(u,v)`.
    pub joint: JointTable,
    /// Whether `mapping` is profile-extremal (recorded in every filter mode).
    pub admissible: bool,
    pub support: ConditionReport,
    pub stationarity: ConditionReport,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub less_noisy: Vec<ConditionReport>,
}

impl InnerTResult {
    pub fn conditions_pass(&self) -> bool {
        self.support.passed && self.stationarity.passed
    }

    /// The induced `(U,V,X)` joint.
    pub fn uvx(&self) -> Result<JointTable> {
        joint_from_mapping(self.joint.probs(), &self.mapping)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SumRateWitness {
    pub value: f64,
    pub lambda_star: f64,
    pub p_wx: JointTable,
    /// Mass of each retained `w`, aligned with `per_w`.
    pub p_w: Vec<f64>,
    pub per_w: Vec<InnerTResult>,
    /// Objective of the joint ascent before per-`w` certification.
    pub ascent_value: f64,
    pub smoothing_delta: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub(crate) lifted_point: Vec<f64>,
    #[serde(skip)]
    pub(crate) layout_nw: usize,
}

impl SumRateWitness {
    /// `lambda I(W;Y) + (1-lambda) I(W;Z) + sum_w p(w) T(p(x|w))`, recomputed
    /// from the stored parts on channel `ch`.
    pub fn reconstruct(&self, ch: &BroadcastChannel) -> Result<f64> {
        let (iwy, iwz) = w_informations(&self.p_wx, ch)?;
        let inner: f64 = self.p_w.iter().zip(&self.per_w).map(|(p, r)| p * r.value).sum();
        Ok(self.lambda_star * iwy + (1.0 - self.lambda_star) * iwz + inner)
    }

    pub fn conditions_pass(&self) -> bool {
        self.per_w.iter().all(InnerTResult::conditions_pass)
    }
}

/// `(I(W;Y), I(W;Z))` for a `(W,X)` joint.
pub fn w_informations(p_wx: &JointTable, ch: &BroadcastChannel) -> Result<(f64, f64)> {
    if p_wx.rank() != 2 || p_wx.dims()[1] != ch.x_size() {
        return Err(Error::Usage("p(w,x) shape does not match the channel".into()));
    }
    let side = |k: &[Vec<f64>]| -> Result<f64> {
        let (nw, nx, no) = (p_wx.dims()[0], ch.x_size(), k[0].len());
        let mut t = vec![0.0; nw * no];
        for w in 0..nw {
            for x in 0..nx {
                let p = p_wx.get(&[w, x]);
                for (o, q) in k[x].iter().enumerate() {
                    t[w * no + o] += p * q;
                }
            }
        }
        Ok(JointTable::from_weights(vec![nw, no], t)?.info(&[0], &[1], &[]))
    };
    Ok((side(ch.q_y())?, side(ch.q_z())?))
}

fn aux_bounds(ch: &BroadcastChannel, widen: bool) -> (usize, usize) {
    let nx = ch.x_size();
    if widen {
        (nx, nx)
    } else {
        (nx.min(ch.y_size()), nx.min(ch.z_size()))
    }
}

/// `a I(U;Y) + b I(V;Z) - I(U;V)` on a `U x V` model.
fn weighted_uv_expr(model: &mut Model, a: f64, b: f64) -> InfoExpr {
    let (u, v) = (VarSet::axes(&[0]), VarSet::axes(&[1]));
    model
        .info(u, VarSet::y(), VarSet::EMPTY)
        .scaled(a)
        .plus(&model.info(v, VarSet::z(), VarSet::EMPTY).scaled(b))
        .minus(&model.info(u, v, VarSet::EMPTY))
}

/// Best `p(u,v)` for one mapping table at fixed `p_x`; `None` when the
/// table cannot carry `p_x`.
fn optimize_table(
    p_x: &[f64],
    ch: &BroadcastChannel,
    t: &MappingTable,
    weights: (f64, f64),
    cfg: &AscentConfig,
    strict_support: bool,
) -> Result<Option<(f64, Vec<f64>)>> {
    let used = t.symbols_used();
    for (x, &p) in p_x.iter().enumerate() {
        if p > 0.0 && !used[x] {
            return Ok(None);
        }
        if strict_support && p == 0.0 && used[x] {
            return Ok(None);
        }
    }
    let blocks: Vec<Block> = (0..p_x.len())
        .map(|x| Block {
            indices: (0..t.cells().len()).filter(|&c| t.cells()[c] == x).collect(),
            mass: p_x[x],
        })
        .collect();
    let set = BlockSimplex::new(t.cells().len(), blocks)?;
    let mut model = Model::new(vec![t.u_size(), t.v_size()], t.cells().to_vec(), ch);
    let expr = weighted_uv_expr(&mut model, weights.0, weights.1);
    let obj = LinearObjective { model: &model, expr: &expr };
    let run = maximize_from(&obj, &set, cfg, &[])?;
    Ok(Some((run.value, run.point)))
}

fn shapes(nu: usize, nv: usize) -> Vec<(usize, usize)> {
    let mut s: Vec<(usize, usize)> =
        (1..=nu).flat_map(|a| (1..=nv).map(move |b| (a, b))).collect();
    s.sort_by_key(|&(a, b)| (a * b, a, b));
    s
}

type TableCache = Mutex<HashMap<(usize, usize, usize, bool), Arc<Vec<MappingTable>>>>;

/// Row/column-orbit representatives of the searched tables of a shape.
fn search_tables(a: usize, b: usize, x: usize, filtered: bool) -> Result<Arc<Vec<MappingTable>>> {
    static CACHE: OnceLock<TableCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (a, b, x, filtered);
    if let Some(hit) = cache.lock().expect("cache lock").get(&key) {
        return Ok(Arc::clone(hit));
    }
    let pool = if filtered { admissible_mappings(a, b, x)?.to_vec() } else { enumerate_mappings(a, b, x)? };
    let reps = Arc::new(pool.into_iter().filter(MappingTable::is_rowcol_minimal).collect::<Vec<_>>());
    cache.lock().expect("cache lock").insert(key, Arc::clone(&reps));
    Ok(reps)
}

/// Values within this of the best are treated as ties.
const TIE_TOL: f64 = 1e-8;

struct InnerSearch {
    value: f64,
    mapping: MappingTable,
    puv: Vec<f64>,
}

fn search_mappings(
    p_x: &[f64],
    ch: &BroadcastChannel,
    bounds: (usize, usize),
    weights: (f64, f64),
    filtered: bool,
    opts: &SumRateOptions,
    seed: u64,
) -> Result<InnerSearch> {
    let nx = ch.x_size();
    let mut candidates: Vec<MappingTable> = Vec::new();
    for (a, b) in shapes(bounds.0, bounds.1) {
        candidates.extend(search_tables(a, b, nx, filtered)?.iter().cloned());
    }
    let cfg = opts.inner_config(seed);
    let results: Vec<Result<Option<(f64, Vec<f64>)>>> = candidates
        .par_iter()
        .map(|t| optimize_table(p_x, ch, t, weights, &cfg, filtered))
        .collect();
    let mut scored = Vec::new();
    for (t, r) in candidates.into_iter().zip(results) {
        if let Some((v, p)) = r? {
            scored.push((t, v, p));
        }
    }
    let top = scored.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return Err(Error::Usage(format!(
            "no mapping table with |U| <= {}, |V| <= {} can carry p_x = {p_x:?}",
            bounds.0, bounds.1
        )));
    }
    // candidates are ordered by shape size, then lexicographically
    let (mapping, value, puv) =
        scored.into_iter().find(|s| s.1 >= top - TIE_TOL).expect("top is attained");
    Ok(InnerSearch { value, mapping, puv })
}

fn inner_t_with(
    p_x: &ProbVector,
    ch: &BroadcastChannel,
    bounds: (usize, usize),
    opts: &SumRateOptions,
    seed: u64,
) -> Result<InnerTResult> {
    if p_x.len() != ch.x_size() {
        return Err(Error::Usage(format!(
            "p_x has {} entries, channel input alphabet has {}",
            p_x.len(),
            ch.x_size()
        )));
    }
    let filtered = opts.filters == FilterMode::On;
    let mut best = search_mappings(p_x.probs(), ch, bounds, (1.0, 1.0), filtered, opts, seed)?;
    let mut report = conditions(&best, ch, opts)?;
    // a local optimum can miss the first-order conditions; retry with fresh
    // starts before giving up
    for retry in 1..=2u64 {
        if report.0.passed && report.1.passed {
            break;
        }
        let wider = SumRateOptions { inner_starts: opts.inner_starts * 4, ..opts.clone() };
        let again = search_mappings(
            p_x.probs(),
            ch,
            bounds,
            (1.0, 1.0),
            filtered,
            &wider,
            seed.wrapping_add(0x5151 * retry),
        )?;
        let again_report = conditions(&again, ch, opts)?;
        let better = again.value > best.value + TIE_TOL;
        let fixes = again.value >= best.value - TIE_TOL && again_report.0.passed && again_report.1.passed;
        if better || fixes {
            best = again;
            report = again_report;
        }
    }
    let uvx = joint_from_mapping(&best.puv, &best.mapping)?;
    let less_noisy = if opts.less_noisy_samples > 0 {
        let full = extend_with_outputs(&uvx, ch)?;
        let probe = LessNoisyProbe { samples: opts.less_noisy_samples, seed, ..Default::default() };
        vec![check_less_noisy(&full, Side::Y, &probe)?, check_less_noisy(&full, Side::Z, &probe)?]
    } else {
        Vec::new()
    };
    let admissible = admissible_mappings(best.mapping.u_size(), best.mapping.v_size(), ch.x_size())?
        .contains(&best.mapping);
    Ok(InnerTResult {
        value: best.value,
        joint: JointTable::from_weights(
            vec![best.mapping.u_size(), best.mapping.v_size()],
            best.puv.clone(),
        )?,
        mapping: best.mapping,
        admissible,
        support: report.0,
        stationarity: report.1,
        less_noisy,
    })
}

fn conditions(
    s: &InnerSearch,
    ch: &BroadcastChannel,
    opts: &SumRateOptions,
) -> Result<(ConditionReport, ConditionReport)> {
    let uvx = joint_from_mapping(&s.puv, &s.mapping)?;
    Ok((check_support_positivity(&uvx, ch)?, check_stationarity(&uvx, &s.mapping, ch, opts.condition_tol)?))
}

/// `T(p_x)`: best `I(U;Y)+I(V;Z)-I(U;V)` over mapping tables and `p(u,v)`.
pub fn inner_t(p_x: &ProbVector, ch: &BroadcastChannel, opts: &SumRateOptions) -> Result<InnerTResult> {
    opts.validate()?;
    inner_t_with(p_x, ch, aux_bounds(ch, opts.widen), opts, opts.seed)
}

fn prepare_channel(ch: &BroadcastChannel, opts: &SumRateOptions) -> Result<(BroadcastChannel, f64)> {
    opts.validate()?;
    if !ch.validate().is_empty() {
        return Err(Error::Validation("channel failed validation".into()));
    }
    if opts.filters == FilterMode::On && !ch.is_strictly_positive() && opts.smoothing_delta > 0.0 {
        Ok((ch.smooth(opts.smoothing_delta)?, opts.smoothing_delta))
    } else {
        Ok((ch.clone(), 0.0))
    }
}

/// `lambda I(W;Y) + (1-lambda) I(W;Z) + I(U;Y|W) + I(V;Z|W) - I(U;V|W)`.
fn t_lambda_expr(model: &mut Model, lambda: f64) -> InfoExpr {
    let (w, u, v) = (lifted::wset(), lifted::uset(), lifted::vset());
    model
        .info(w, VarSet::y(), VarSet::EMPTY)
        .scaled(lambda)
        .plus(&model.info(w, VarSet::z(), VarSet::EMPTY).scaled(1.0 - lambda))
        .plus(&model.info(u, VarSet::y(), w))
        .plus(&model.info(v, VarSet::z(), w))
        .minus(&model.info(u, v, w))
}

/// The certified part of a witness: per-`w` inner problems at the extracted
/// `p(x|w)`.
fn certify(
    ch: &BroadcastChannel,
    p_wx_raw: &[f64],
    bounds: (usize, usize),
    opts: &SumRateOptions,
) -> Result<(JointTable, Vec<f64>, Vec<InnerTResult>)> {
    let nx = ch.x_size();
    let rows = clean_wx(p_wx_raw, nx);
    let per_w: Vec<Result<InnerTResult>> = rows
        .par_iter()
        .map(|(w, _, cond)| {
            let px = ProbVector::new(cond.clone())?;
            inner_t_with(&px, ch, bounds, opts, opts.seed.wrapping_add(1 + *w as u64))
        })
        .collect();
    let per_w = per_w.into_iter().collect::<Result<Vec<_>>>()?;
    let p_w: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let mut flat = Vec::with_capacity(rows.len() * nx);
    for (_, pw, cond) in &rows {
        flat.extend(cond.iter().map(|c| pw * c));
    }
    let p_wx = JointTable::from_weights(vec![rows.len(), nx], flat)?;
    Ok((p_wx, p_w, per_w))
}

fn t_lambda_seeded(
    ch: &BroadcastChannel,
    lambda: f64,
    opts: &SumRateOptions,
    warm: &[Vec<f64>],
    delta: f64,
) -> Result<SumRateWitness> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Usage(format!("lambda {lambda} outside [0,1]")));
    }
    let bounds = aux_bounds(ch, opts.widen);
    let layout = Layout { nw: ch.x_size(), nu: bounds.0, nv: bounds.1, nx: ch.x_size() };
    let mut model = layout.model(ch);
    let expr = t_lambda_expr(&mut model, lambda);
    let set = BlockSimplex::simplex(layout.len());
    let mut seeds: Vec<Vec<f64>> = warm.to_vec();
    seeds.extend(layout.structured_seeds());
    let seeds: Vec<Vec<f64>> = seeds.iter().map(|s| set.interiorize(s, 1e-3)).collect();
    let obj = LinearObjective { model: &model, expr: &expr };
    let run = maximize_from(&obj, &set, &opts.outer_config(0), &seeds)?;

    let (p_wx, p_w, per_w) = certify(ch, &layout.p_wx(&run.point), bounds, opts)?;
    let (iwy, iwz) = w_informations(&p_wx, ch)?;
    let inner: f64 = p_w.iter().zip(&per_w).map(|(p, r)| p * r.value).sum();
    let value = lambda * iwy + (1.0 - lambda) * iwz + inner;
    let mut warnings = Vec::new();
    if value < run.value - 1e-6 {
        warnings.push(format!(
            "per-w certification ({value:.9}) fell short of the joint ascent ({:.9})",
            run.value
        ));
    }
    for (k, r) in per_w.iter().enumerate() {
        if !r.conditions_pass() {
            warnings.push(format!("w={k}: first-order conditions not met at tol {}", opts.condition_tol));
        }
    }
    Ok(SumRateWitness {
        value,
        lambda_star: lambda,
        p_wx,
        p_w,
        per_w,
        ascent_value: run.value,
        smoothing_delta: delta,
        warnings,
        lifted_point: run.point,
        layout_nw: layout.nw,
    })
}

/// `T_lambda` with its witness.
pub fn t_lambda(ch: &BroadcastChannel, lambda: f64, opts: &SumRateOptions) -> Result<SumRateWitness> {
    let (ch, delta) = prepare_channel(ch, opts)?;
    t_lambda_seeded(&ch, lambda, opts, &[], delta)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SumRateResult {
    pub value: f64,
    pub lambda_star: f64,
    pub witness: SumRateWitness,
    /// Every `(lambda, T_lambda)` evaluated by the search.
    pub evaluations: Vec<(f64, f64)>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// `min_lambda T_lambda` by golden-section search; endpoints are always
/// evaluated.
pub fn marton_sum_rate(ch: &BroadcastChannel, opts: &SumRateOptions) -> Result<SumRateResult> {
    let (ch, delta) = prepare_channel(ch, opts)?;
    let mut witnesses: Vec<SumRateWitness> = Vec::new();
    let mut failure: Option<Error> = None;
    let golden = golden_section_min(
        |lambda| {
            if failure.is_some() {
                return f64::NAN;
            }
            // reuse earlier maximizers as starts; they are optimal or close
            // to it for nearby lambda
            let warm: Vec<Vec<f64>> = witnesses.iter().rev().take(3).map(|w| w.lifted_point.clone()).collect();
            match t_lambda_seeded(&ch, lambda, opts, &warm, delta) {
                Ok(w) => {
                    let v = w.value;
                    witnesses.push(w);
                    v
                }
                Err(e) => {
                    failure = Some(e);
                    f64::NAN
                }
            }
        },
        opts.golden_tol,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let witness = witnesses
        .iter()
        .find(|w| w.lambda_star == golden.argmin && w.value == golden.value)
        .cloned()
        .ok_or_else(|| Error::Numerical("golden-section search lost its minimizer".into()))?;
    Ok(SumRateResult {
        value: golden.value,
        lambda_star: golden.argmin,
        witness,
        evaluations: golden.evaluations,
        warnings: golden.warnings,
    })
}

/// Direct maximization of
/// `min(I(W;Y), I(W;Z)) + I(U;Y|W) + I(V;Z|W) - I(U;V|W)`.
pub fn marton_sum_rate_direct(ch: &BroadcastChannel, opts: &SumRateOptions) -> Result<SumRateWitness> {
    let (ch, delta) = prepare_channel(ch, opts)?;
    let nx = ch.x_size();
    let layout = Layout { nw: nx + 1, nu: nx, nv: nx, nx };
    let mut model = layout.model(&ch);
    let (w, u, v) = (lifted::wset(), lifted::uset(), lifted::vset());
    let exprs = vec![
        model.info(w, VarSet::y(), VarSet::EMPTY),
        model.info(w, VarSet::z(), VarSet::EMPTY),
        model.info(u, VarSet::y(), w).plus(&model.info(v, VarSet::z(), w)).minus(&model.info(u, v, w)),
    ];
    let branches = vec![vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 1.0]];
    let set = BlockSimplex::simplex(layout.len());
    let seeds: Vec<Vec<f64>> =
        layout.structured_seeds().iter().map(|s| set.interiorize(s, 1e-3)).collect();
    let run = lifted::anneal_softmin(&model, &exprs, &branches, &[], &set, &opts.outer_config(17), &seeds)?;

    let bounds = (nx, nx);
    let (p_wx, p_w, per_w) = certify(&ch, &layout.p_wx(&run.point), bounds, opts)?;
    let (iwy, iwz) = w_informations(&p_wx, &ch)?;
    let lambda = if iwy <= iwz { 1.0 } else { 0.0 };
    let inner: f64 = p_w.iter().zip(&per_w).map(|(p, r)| p * r.value).sum();
    let value = iwy.min(iwz) + inner;
    let mut warnings = Vec::new();
    if value < run.value - 1e-6 {
        warnings.push(format!(
            "per-w certification ({value:.9}) fell short of the joint ascent ({:.9})",
            run.value
        ));
    }
    Ok(SumRateWitness {
        value,
        lambda_star: lambda,
        p_wx,
        p_w,
        per_w,
        ascent_value: run.value,
        smoothing_delta: delta,
        warnings,
        lifted_point: run.point,
        layout_nw: layout.nw,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinaryInequalityReport {
    pub inner_t: f64,
    pub i_xy: f64,
    pub i_xz: f64,
    /// `max(I(X;Y), I(X;Z)) - T(p_x)`.
    pub slack: f64,
    pub passed: bool,
}

/// Compares the unrestricted `T(p_x)` on a binary-input channel against
/// `max(I(X;Y), I(X;Z))`.
pub fn binary_inequality_check(
    ch: &BroadcastChannel,
    p_x: &ProbVector,
    opts: &SumRateOptions,
) -> Result<BinaryInequalityReport> {
    if ch.x_size() != 2 {
        return Err(Error::Usage(format!("binary inequality needs |X| = 2, got {}", ch.x_size())));
    }
    let unfiltered = SumRateOptions { filters: FilterMode::Off, widen: true, ..opts.clone() };
    let t = inner_t(p_x, ch, &unfiltered)?;
    let (i_xy, i_xz) = input_informations(p_x, ch)?;
    let slack = i_xy.max(i_xz) - t.value;
    Ok(BinaryInequalityReport {
        inner_t: t.value,
        i_xy,
        i_xz,
        slack,
        passed: slack >= -1e-4 && slack.abs() <= 1e-3,
    })
}

/// `(I(X;Y), I(X;Z))` at input law `p_x`.
pub fn input_informations(p_x: &ProbVector, ch: &BroadcastChannel) -> Result<(f64, f64)> {
    let p_wx = JointTable::from_weights(
        vec![ch.x_size(), ch.x_size()],
        (0..ch.x_size() * ch.x_size())
            .map(|k| if k / ch.x_size() == k % ch.x_size() { p_x.probs()[k % ch.x_size()] } else { 0.0 })
            .collect(),
    )?;
    w_informations(&p_wx, ch)
}

/// The fixed joint of the degraded counterexample, `p(v,x)` with `V -> X`.
pub const CLAIM1_PVX: [[f64; 2]; 2] = [[0.0, 0.41], [0.48, 0.11]];

/// Weight on `I(V;Z)` in the counterexample objective.
pub const CLAIM1_WEIGHT: f64 = 2.4;

/// `I(X;Y|V) + 2.4 I(V;Z)` at [`CLAIM1_PVX`].
pub fn claim1_value_a(ch: &BroadcastChannel) -> Result<f64> {
    if ch.x_size() != 2 {
        return Err(Error::Usage("the counterexample joint is binary".into()));
    }
    let pvx = JointTable::new(vec![2, 2], CLAIM1_PVX.iter().flatten().copied().collect())?;
    let mut y = vec![0.0; 2 * 2 * ch.y_size()];
    for v in 0..2 {
        for x in 0..2 {
            for (o, q) in ch.q_y()[x].iter().enumerate() {
                y[(v * 2 + x) * ch.y_size() + o] = pvx.get(&[v, x]) * q;
            }
        }
    }
    let vxy = JointTable::new(vec![2, 2, ch.y_size()], y)?;
    let i_xy_given_v = vxy.info(&[1], &[2], &[0]);
    let (_, i_vz) = w_informations(&pvx, ch)?;
    Ok(i_xy_given_v + CLAIM1_WEIGHT * i_vz)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Claim1Maximum {
    pub value: f64,
    /// `(U,V,X)` maximizer.
    pub joint: JointTable,
    pub i_u_vx: f64,
    pub h_x_given_v: f64,
    pub structure: String,
}

/// `max I(U;Y) + 2.4 I(V;Z) - I(U;V)` over `|U|, |V| <= 2` without `W`.
pub fn claim1_value_b(ch: &BroadcastChannel, opts: &SumRateOptions) -> Result<Claim1Maximum> {
    let nx = ch.x_size();
    let layout = Layout { nw: 1, nu: 2, nv: 2, nx };
    let mut model = layout.model(ch);
    let (u, v) = (lifted::uset(), lifted::vset());
    let expr = model
        .info(u, VarSet::y(), VarSet::EMPTY)
        .plus(&model.info(v, VarSet::z(), VarSet::EMPTY).scaled(CLAIM1_WEIGHT))
        .minus(&model.info(u, v, VarSet::EMPTY));
    let set = BlockSimplex::simplex(layout.len());
    let seeds: Vec<Vec<f64>> =
        layout.structured_seeds().iter().map(|s| set.interiorize(s, 1e-3)).collect();
    let cfg = AscentConfig { starts: opts.starts.max(8), ..opts.outer_config(29) };
    let run = maximize_from(&LinearObjective { model: &model, expr: &expr }, &set, &cfg, &seeds)?;
    let full = layout.joint(&run.point)?;
    let joint = full.marginal(&[1, 2, 3]);
    let i_u_vx = joint.info(&[0], &[1, 2], &[]);
    let h_x_given_v = (joint.entropy_of(&[1, 2]) - joint.entropy_of(&[1])).max(0.0);
    let structure = match (i_u_vx < 1e-3, h_x_given_v < 1e-3) {
        (true, true) => "X=V, U constant",
        (true, false) => "U constant",
        (false, true) => "X=V",
        (false, false) => "general",
    };
    Ok(Claim1Maximum { value: run.value, joint, i_u_vx, h_x_given_v, structure: structure.into() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> SumRateOptions {
        SumRateOptions { starts: 6, ..Default::default() }
    }

    fn bsc_pair(a: f64, b: f64) -> BroadcastChannel {
        BroadcastChannel::new(vec![vec![1.0 - a, a], vec![a, 1.0 - a]], vec![vec![1.0 - b, b], vec![b, 1.0 - b]])
            .unwrap()
    }

    #[test]
    fn noiseless_ternary_inner_t() {
        let ch = BroadcastChannel::noiseless(3);
        let opts = SumRateOptions { filters: FilterMode::Off, ..quick() };
        let r = inner_t(&ProbVector::uniform(3), &ch, &opts).unwrap();
        assert!((r.value - 3f64.log2()).abs() < 1e-6, "{}", r.value);
    }

    #[test]
    fn single_input_is_zero() {
        let ch = BroadcastChannel::new(vec![vec![0.5, 0.5]], vec![vec![1.0]]).unwrap();
        let r = inner_t(&ProbVector::uniform(1), &ch, &quick()).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(marton_sum_rate_direct(&ch, &quick()).unwrap().value.abs() < 1e-9);
    }

    #[test]
    fn binary_inequality_on_bsc_pair() {
        let ch = bsc_pair(0.3, 0.4);
        let r = binary_inequality_check(&ch, &ProbVector::uniform(2), &quick()).unwrap();
        assert!(r.passed, "{r:?}");
        let bad = BroadcastChannel::noiseless(3);
        assert!(binary_inequality_check(&bad, &ProbVector::uniform(3), &quick()).is_err());
    }

    #[test]
    fn noiseless_binary_t_lambda() {
        let ch = BroadcastChannel::noiseless(2);
        for lambda in [0.0, 0.3, 1.0] {
            let w = t_lambda(&ch, lambda, &quick()).unwrap();
            assert!((w.value - 1.0).abs() < 1e-3, "lambda {lambda}: {}", w.value);
            assert!(w.smoothing_delta > 0.0);
        }
    }

    #[test]
    fn witness_reconstructs() {
        let ch = bsc_pair(0.1, 0.25);
        let w = t_lambda(&ch, 0.4, &quick()).unwrap();
        assert!((w.reconstruct(&ch).unwrap() - w.value).abs() < 1e-9);
        assert!(w.value >= w.ascent_value - 1e-6, "{w:?}");
    }

    #[test]
    fn claim1_values() {
        let ch = BroadcastChannel::claim1();
        let a = claim1_value_a(&ch).unwrap();
        assert!((a - 0.1228561).abs() < 1e-6, "{a}");
        let b = claim1_value_b(&ch, &quick()).unwrap();
        assert!((b.value - 0.1214546).abs() < 1e-5, "{b:?}");
        assert_eq!(b.structure, "X=V, U constant");
    }

    #[test]
    fn z_degenerate_sum_rate_is_y_capacity() {
        let ch = BroadcastChannel::new(vec![vec![0.7, 0.3], vec![0.3, 0.7]], vec![vec![1.0], vec![1.0]]).unwrap();
        let r = marton_sum_rate(&ch, &quick()).unwrap();
        assert!((r.value - 0.118709).abs() < 1e-3, "{}", r.value);
    }
}
