//! Support functions of Marton's region and of the two degraded message set
//! regions, the directional comparison between them, and the two-letter
//! region.
//!
//! At a fixed distribution each region is a polyhedron in at most three
//! rate variables, so `max d.R` is a tiny LP solved by vertex enumeration.
//! For the outer maximization the LP value is written through its dual as
//! `min_y y.a(p)` over the dual vertices `y`, a minimum of finitely many
//! linear functions of the bounds, and handed to the soft-min ascent.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::Serialize;

use crate::channel::BroadcastChannel;
use crate::error::{Error, Result};
use crate::infoexpr::{InfoExpr, Model, VarSet};
use crate::lifted::{self, Layout};
use crate::optimize::{AscentConfig, BlockSimplex, Geometry};
use crate::probkit::JointTable;

const VERTEX_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateTriple {
    pub r0: f64,
    pub r1: f64,
    pub r2: f64,
}

/// Nonnegative weights `(lambda0, lambda1, lambda2)`, stored with the largest
/// component scaled to 1 and the scale kept separately.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Direction {
    pub l0: f64,
    pub l1: f64,
    pub l2: f64,
    pub scale: f64,
}

impl Direction {
    pub fn new(l0: f64, l1: f64, l2: f64) -> Result<Self> {
        let all = [l0, l1, l2];
        if all.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Usage(format!("direction ({l0}, {l1}, {l2}) must be nonnegative")));
        }
        let scale = all.iter().copied().fold(0.0, f64::max);
        if scale == 0.0 {
            return Err(Error::Usage("direction must not be zero".into()));
        }
        Ok(Self { l0: l0 / scale, l1: l1 / scale, l2: l2 / scale, scale })
    }

    /// Original (unnormalized) components.
    pub fn raw(&self) -> [f64; 3] {
        [self.l0 * self.scale, self.l1 * self.scale, self.l2 * self.scale]
    }

    pub fn dominates_private(&self) -> bool {
        self.l0 + 1e-12 >= self.l1 + self.l2
    }
}

fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c in col..n {
                        a[r][c] -= f * a[col][c];
                    }
                    b[r] -= f * b[col];
                }
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Vertices of `{ r >= 0 : a r <= b }` (rows of `a` have the dimension of `r`).
pub fn polyhedron_vertices(a: &[Vec<f64>], b: &[f64]) -> Vec<Vec<f64>> {
    let n = a.first().map_or(0, Vec::len);
    let m = a.len();
    // constraint i < m is a row of a; m + j is r_j >= 0
    let row = |i: usize| -> (Vec<f64>, f64) {
        if i < m {
            (a[i].clone(), b[i])
        } else {
            let mut e = vec![0.0; n];
            e[i - m] = 1.0;
            (e, 0.0)
        }
    };
    let mut out: Vec<Vec<f64>> = Vec::new();
    for s in subsets(m + n, n) {
        let (rows, rhs): (Vec<_>, Vec<_>) = s.iter().map(|&i| row(i)).unzip();
        let Some(r) = solve_square(rows, rhs) else { continue };
        let scale = 1.0 + b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let feasible = r.iter().all(|&v| v >= -VERTEX_TOL * scale)
            && a.iter().zip(b).all(|(ai, bi)| {
                ai.iter().zip(&r).map(|(x, y)| x * y).sum::<f64>() <= bi + VERTEX_TOL * scale
            });
        if feasible && !out.iter().any(|o| o.iter().zip(&r).all(|(p, q)| (p - q).abs() < 1e-9)) {
            out.push(r.into_iter().map(|v| v.max(0.0)).collect());
        }
    }
    out
}

/// `max c.r` over `{ r >= 0 : a r <= b }`; `None` when empty. The region is
/// assumed bounded in the directions of `c`.
pub fn lp_max(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Option<(f64, Vec<f64>)> {
    polyhedron_vertices(a, b)
        .into_iter()
        .map(|r| (c.iter().zip(&r).map(|(x, y)| x * y).sum::<f64>(), r))
        .fold(None, |best: Option<(f64, Vec<f64>)>, cand| match best {
            Some(b) if b.0 >= cand.0 => Some(b),
            _ => Some(cand),
        })
}

/// Vertices of the dual feasible set `{ y >= 0 : a^T y >= c }`.
pub fn dual_vertices(c: &[f64], a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = c.len();
    let m = a.len();
    // -a^T y <= -c, in the form used by polyhedron_vertices
    let at: Vec<Vec<f64>> = (0..n).map(|j| (0..m).map(|i| -a[i][j]).collect()).collect();
    let rhs: Vec<f64> = c.iter().map(|v| -v).collect();
    polyhedron_vertices(&at, &rhs)
}

/// Rate-sum coefficients of Marton's five bounds on `(R0, R1, R2)`.
pub const MARTON_ROWS: [[f64; 3]; 5] =
    [[1.0, 1.0, 0.0], [1.0, 0.0, 1.0], [1.0, 1.0, 1.0], [1.0, 1.0, 1.0], [2.0, 1.0, 1.0]];

/// Right-hand sides of Marton's bounds at a `(U,V,W,X)` joint.
pub fn marton_bounds(p_uvwx: &JointTable, ch: &BroadcastChannel) -> Result<[f64; 5]> {
    if p_uvwx.rank() != 4 || p_uvwx.dims()[3] != ch.x_size() {
        return Err(Error::Usage("expected a (U,V,W,X) joint matching the channel".into()));
    }
    let attach = |k: &[Vec<f64>]| -> Result<JointTable> {
        let no = k[0].len();
        let d = p_uvwx.dims();
        let aux = d[0] * d[1] * d[2];
        let mut t = vec![0.0; aux * no];
        for (i, &p) in p_uvwx.probs().iter().enumerate() {
            let (cell, x) = (i / d[3], i % d[3]);
            for (o, q) in k[x].iter().enumerate() {
                t[cell * no + o] += p * q;
            }
        }
        JointTable::from_weights(vec![d[0], d[1], d[2], no], t)
    };
    let jy = attach(ch.q_y())?;
    let jz = attach(ch.q_z())?;
    let (u, v, w, o) = (0usize, 1usize, 2usize, 3usize);
    let i_uw_y = jy.info(&[u, w], &[o], &[]);
    let i_vw_z = jz.info(&[v, w], &[o], &[]);
    let i_v_z_w = jz.info(&[v], &[o], &[w]);
    let i_u_y_w = jy.info(&[u], &[o], &[w]);
    let i_uv_w = jy.info(&[u], &[v], &[w]);
    Ok([
        i_uw_y,
        i_vw_z,
        i_uw_y + i_v_z_w - i_uv_w,
        i_u_y_w + i_vw_z - i_uv_w,
        i_uw_y + i_vw_z - i_uv_w,
    ])
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupportOptions {
    pub seed: u64,
    pub starts: usize,
    pub max_iters: usize,
}

impl Default for SupportOptions {
    fn default() -> Self {
        Self { seed: 0, starts: 12, max_iters: 4000 }
    }
}

impl SupportOptions {
    fn config(&self, offset: u64) -> AscentConfig {
        AscentConfig {
            starts: self.starts,
            max_iters: self.max_iters,
            tol: 1e-12,
            seed: self.seed.wrapping_add(offset),
            geometry: Geometry::Entropic,
            ..AscentConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MartonSupport {
    pub value: f64,
    pub rates: RateTriple,
    pub bounds: [f64; 5],
    /// `(W,U,V,X)` maximizer.
    pub witness: JointTable,
}

fn marton_exprs(model: &mut Model) -> Vec<InfoExpr> {
    let (w, u, v) = (lifted::wset(), lifted::uset(), lifted::vset());
    let i_uw_y = model.info(u.with(w), VarSet::y(), VarSet::EMPTY);
    let i_vw_z = model.info(v.with(w), VarSet::z(), VarSet::EMPTY);
    let i_v_z_w = model.info(v, VarSet::z(), w);
    let i_u_y_w = model.info(u, VarSet::y(), w);
    let i_uv_w = model.info(u, v, w);
    vec![
        i_uw_y.clone(),
        i_vw_z.clone(),
        i_uw_y.plus(&i_v_z_w).minus(&i_uv_w),
        i_u_y_w.plus(&i_vw_z).minus(&i_uv_w),
        i_uw_y.plus(&i_vw_z).minus(&i_uv_w),
    ]
}

fn marton_rows() -> Vec<Vec<f64>> {
    MARTON_ROWS.iter().map(|r| r.to_vec()).collect()
}

/// `max d.R` over Marton's region, with `|U|, |V| <= |X|` and
/// `|W| <= |X| + 4`. Extra `(W,U,V,X)` seeds may be supplied.
pub fn marton_support(
    ch: &BroadcastChannel,
    d: &Direction,
    opts: &SupportOptions,
    extra_seeds: &[JointTable],
) -> Result<MartonSupport> {
    let nx = ch.x_size();
    let layout = Layout { nw: nx + 4, nu: nx, nv: nx, nx };
    let mut model = layout.model(ch);
    let exprs = marton_exprs(&mut model);
    let c = [d.l0, d.l1, d.l2];
    let branches = dual_vertices(&c, &marton_rows());
    if branches.is_empty() {
        return Err(Error::Numerical("dual of the rate LP has no vertices".into()));
    }
    let set = BlockSimplex::simplex(layout.len());
    let mut seeds: Vec<Vec<f64>> =
        layout.structured_seeds().iter().map(|s| set.interiorize(s, 1e-4)).collect();
    for s in extra_seeds {
        let raw = embed_seed(&layout, s)?;
        seeds.push(set.interiorize(&raw, 1e-4));
        seeds.push(raw);
    }
    let run = lifted::anneal_softmin(&model, &exprs, &branches, &[2, 3, 4], &set, &opts.config(3), &seeds)?;
    let witness = layout.joint(&run.point)?;
    let uvwx = witness.marginal(&[1, 2, 0, 3]);
    let bounds = marton_bounds(&uvwx, ch)?;
    let (value, r) = lp_max(&c, &marton_rows(), &bounds)
        .ok_or_else(|| Error::Numerical("Marton region is empty at the maximizer".into()))?;
    Ok(MartonSupport {
        value: value * d.scale,
        rates: RateTriple { r0: r[0], r1: r[1], r2: r[2] },
        bounds,
        witness,
    })
}

fn embed_seed(layout: &Layout, s: &JointTable) -> Result<Vec<f64>> {
    let d = s.dims();
    if d.len() != 4 || d[0] > layout.nw || d[1] > layout.nu || d[2] > layout.nv || d[3] != layout.nx {
        return Err(Error::Usage(format!("seed with dims {d:?} does not fit the search layout")));
    }
    Ok(layout.embed(|w, u, v, x| {
        if w < d[0] && u < d[1] && v < d[2] {
            s.get(&[w, u, v, x])
        } else {
            0.0
        }
    }))
}

/// Which private rate a degraded message set region keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Degraded {
    /// `R1 = 0`: common rate to both, private rate to `Z`.
    D1,
    /// `R2 = 0`: common rate to both, private rate to `Y`.
    D2,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegradedSupport {
    pub region: Degraded,
    pub value: f64,
    /// `(R0, R_private)`.
    pub rates: [f64; 2],
    pub bounds: [f64; 3],
    /// `(W,X)` maximizer.
    pub witness: JointTable,
}

impl DegradedSupport {
    /// The witness as a `(W,U,V,X)` point of Marton's region attaining the
    /// same rates.
    pub fn as_marton_point(&self) -> Result<JointTable> {
        let (nw, nx) = (self.witness.dims()[0], self.witness.dims()[1]);
        let (nu, nv) = match self.region {
            Degraded::D1 => (1, nx),
            Degraded::D2 => (nx, 1),
        };
        let mut probs = vec![0.0; nw * nu * nv * nx];
        for w in 0..nw {
            for x in 0..nx {
                let (u, v) = match self.region {
                    Degraded::D1 => (0, x),
                    Degraded::D2 => (x, 0),
                };
                probs[((w * nu + u) * nv + v) * nx + x] = self.witness.get(&[w, x]);
            }
        }
        JointTable::from_weights(vec![nw, nu, nv, nx], probs)
    }
}

const DEGRADED_ROWS: [[f64; 2]; 3] = [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];

/// Bounds `[I(W;A), I(X;B|W), I(X;B)]` of a degraded region at `p(w,x)`,
/// with `A` the receiver that decodes only the common message.
pub fn degraded_bounds(p_wx: &JointTable, ch: &BroadcastChannel, region: Degraded) -> Result<[f64; 3]> {
    let (nw, nx) = (p_wx.dims()[0], p_wx.dims()[1]);
    if p_wx.rank() != 2 || nx != ch.x_size() {
        return Err(Error::Usage("p(w,x) shape does not match the channel".into()));
    }
    let (common, private) = match region {
        Degraded::D1 => (ch.q_y(), ch.q_z()),
        Degraded::D2 => (ch.q_z(), ch.q_y()),
    };
    let attach = |k: &[Vec<f64>]| -> Result<JointTable> {
        let no = k[0].len();
        let mut t = vec![0.0; nw * nx * no];
        for w in 0..nw {
            for x in 0..nx {
                for (o, q) in k[x].iter().enumerate() {
                    t[(w * nx + x) * no + o] = p_wx.get(&[w, x]) * q;
                }
            }
        }
        JointTable::from_weights(vec![nw, nx, no], t)
    };
    let jc = attach(common)?;
    let jp = attach(private)?;
    Ok([jc.info(&[0], &[2], &[]), jp.info(&[1], &[2], &[0]), jp.info(&[1], &[2], &[])])
}

fn degraded_support(
    ch: &BroadcastChannel,
    l0: f64,
    lp: f64,
    region: Degraded,
    opts: &SupportOptions,
) -> Result<DegradedSupport> {
    if !(l0 >= 0.0 && lp >= 0.0) {
        return Err(Error::Usage("degraded-region weights must be nonnegative".into()));
    }
    let nx = ch.x_size();
    let nw = nx + 1;
    let mut model = Model::with_input_axis(vec![nw], ch);
    let (common, private) = match region {
        Degraded::D1 => (VarSet::y(), VarSet::z()),
        Degraded::D2 => (VarSet::z(), VarSet::y()),
    };
    let (w, x) = (VarSet::axes(&[0]), VarSet::axes(&[1]));
    let exprs = vec![
        model.info(w, common, VarSet::EMPTY),
        model.info(x, private, w),
        model.info(x, private, VarSet::EMPTY),
    ];
    let rows: Vec<Vec<f64>> = DEGRADED_ROWS.iter().map(|r| r.to_vec()).collect();
    let c = [l0, lp];
    let set = BlockSimplex::simplex(nw * nx);
    let superposition: Vec<f64> =
        (0..nw * nx).map(|k| if k / nx == k % nx { 1.0 / nx as f64 } else { 0.0 }).collect();
    let single: Vec<f64> = (0..nw * nx).map(|k| if k / nx == 0 { 1.0 / nx as f64 } else { 0.0 }).collect();
    let seeds: Vec<Vec<f64>> = [superposition, single].iter().map(|s| set.interiorize(s, 1e-4)).collect();
    let (point, value) = if l0 == 0.0 && lp == 0.0 {
        (set.uniform_point(), 0.0)
    } else {
        let branches = dual_vertices(&c, &rows);
        let offset = if region == Degraded::D1 { 5 } else { 7 };
        let run = lifted::anneal_softmin(&model, &exprs, &branches, &[], &set, &opts.config(offset), &seeds)?;
        (run.point, run.value)
    };
    let witness = JointTable::from_weights(vec![nw, nx], point)?;
    let bounds = degraded_bounds(&witness, ch, region)?;
    let (exact, r) = lp_max(&c, &rows, &bounds)
        .ok_or_else(|| Error::Numerical("degraded region is empty".into()))?;
    debug_assert!(l0 + lp == 0.0 || (exact - value).abs() < 1e-6 * (1.0 + value.abs()));
    Ok(DegradedSupport { region, value: exact, rates: [r[0], r[1]], bounds, witness })
}

/// `max l0 R0 + l2 R2` over the region with `R1 = 0`.
pub fn degraded_support_d1(ch: &BroadcastChannel, l0: f64, l2: f64, opts: &SupportOptions) -> Result<DegradedSupport> {
    degraded_support(ch, l0, l2, Degraded::D1, opts)
}

/// `max l0 R0 + l1 R1` over the region with `R2 = 0`.
pub fn degraded_support_d2(ch: &BroadcastChannel, l0: f64, l1: f64, opts: &SupportOptions) -> Result<DegradedSupport> {
    degraded_support(ch, l0, l1, Degraded::D2, opts)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectionalReport {
    pub direction: [f64; 3],
    pub marton_support: f64,
    pub d1_support: f64,
    pub d2_support: f64,
    pub gap: f64,
    pub tol: f64,
    pub agree: bool,
    pub marton_rates: RateTriple,
}

/// Default agreement tolerance of [`directional_optimality_check`].
pub const DIRECTION_TOL: f64 = 2e-3;

/// Compares Marton's support with the larger degraded support along a
/// direction with `l0 >= l1 + l2`.
pub fn directional_optimality_check(
    ch: &BroadcastChannel,
    d: &Direction,
    opts: &SupportOptions,
    tol: f64,
) -> Result<DirectionalReport> {
    if !d.dominates_private() {
        let [a, b, c] = d.raw();
        return Err(Error::Usage(format!("direction ({a}, {b}, {c}) violates l0 >= l1 + l2")));
    }
    let d1 = degraded_support_d1(ch, d.l0, d.l2, opts)?;
    let d2 = degraded_support_d2(ch, d.l0, d.l1, opts)?;
    let seeds = [d1.as_marton_point()?, d2.as_marton_point()?];
    let m = marton_support(ch, d, opts, &seeds)?;
    let (s1, s2) = (d1.value * d.scale, d2.value * d.scale);
    let gap = m.value - s1.max(s2);
    Ok(DirectionalReport {
        direction: d.raw(),
        marton_support: m.value,
        d1_support: s1,
        d2_support: s2,
        gap,
        tol,
        agree: gap.abs() <= tol,
        marton_rates: m.rates,
    })
}

fn random_row(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let draw: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = draw.iter().sum();
    draw.into_iter().map(|v| v / total).collect()
}

/// Dense-table size cap for the two-letter joints.
pub const TWO_LETTER_CAP: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq)]
pub struct TwoLetterInput {
    r_uvw: JointTable,
    /// `r(x | u1,v1,w1,u2,v2,w2)` flattened with `x` fastest.
    kernel: Vec<f64>,
    x_size: usize,
}

impl TwoLetterInput {
    pub fn new(r_uvw: JointTable, kernel: Vec<f64>, x_size: usize) -> Result<Self> {
        if r_uvw.rank() != 3 || x_size == 0 {
            return Err(Error::Usage("r(u,v,w) must have three axes and |X| > 0".into()));
        }
        let cells = r_uvw.probs().len();
        if kernel.len() != cells * cells * x_size {
            return Err(Error::Usage(format!(
                "kernel has {} entries, expected {}",
                kernel.len(),
                cells * cells * x_size
            )));
        }
        for (i, row) in kernel.chunks(x_size).enumerate() {
            let s: f64 = row.iter().sum();
            if row.iter().any(|v| !v.is_finite() || *v < 0.0) || (s - 1.0).abs() > 1e-9 {
                return Err(Error::Validation(format!("kernel row {i} is not a distribution (sum {s})")));
            }
        }
        Ok(Self { r_uvw, kernel, x_size })
    }

    /// The kernel that ignores the first letter: `r(x|.,.,.,u,v,w) = r1(x|u,v,w)`.
    pub fn markov(r_uvw: JointTable, single: &[f64], x_size: usize) -> Result<Self> {
        let cells = r_uvw.probs().len();
        if single.len() != cells * x_size {
            return Err(Error::Usage(format!(
                "single-letter kernel has {} entries, expected {}",
                single.len(),
                cells * x_size
            )));
        }
        let mut kernel = Vec::with_capacity(cells * cells * x_size);
        for _ in 0..cells {
            kernel.extend_from_slice(single);
        }
        Self::new(r_uvw, kernel, x_size)
    }

    /// Uniformly random `r(u,v,w)` and kernel rows (flat Dirichlet draws).
    pub fn random(dims: [usize; 3], x_size: usize, seed: u64, markov: bool) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cells = dims.iter().product::<usize>();
        let r = JointTable::from_weights(dims.to_vec(), random_row(&mut rng, cells))?;
        let rows = if markov { cells } else { cells * cells };
        let kernel: Vec<f64> = (0..rows).flat_map(|_| random_row(&mut rng, x_size)).collect();
        if markov {
            Self::markov(r, &kernel, x_size)
        } else {
            Self::new(r, kernel, x_size)
        }
    }

    pub fn r_uvw(&self) -> &JointTable {
        &self.r_uvw
    }

    pub fn kernel(&self) -> &[f64] {
        &self.kernel
    }

    /// The single-letter kernel when `r(x|.)` ignores the first letter.
    pub fn markov_part(&self) -> Option<Vec<f64>> {
        let block = self.r_uvw.probs().len() * self.x_size;
        let first = &self.kernel[..block];
        self.kernel
            .chunks(block)
            .all(|c| c.iter().zip(first).all(|(a, b)| (a - b).abs() <= 1e-12))
            .then(|| first.to_vec())
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    /// `r~(x|u,v,w) = sum_{u',v',w'} r(x|u',v',w',u,v,w) r(u',v',w')`.
    pub fn averaged_kernel(&self) -> Vec<f64> {
        let cells = self.r_uvw.probs().len();
        let nx = self.x_size;
        let mut out = vec![0.0; cells * nx];
        for (c1, &r1) in self.r_uvw.probs().iter().enumerate() {
            for c2 in 0..cells {
                for x in 0..nx {
                    out[c2 * nx + x] += r1 * self.kernel[(c1 * cells + c2) * nx + x];
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoLetterBounds {
    pub b_01: f64,
    pub b_02: f64,
    pub b_012a: f64,
    pub b_012b: f64,
    pub b_0012: f64,
}

impl TwoLetterBounds {
    pub fn as_array(&self) -> [f64; 5] {
        [self.b_01, self.b_02, self.b_012a, self.b_012b, self.b_0012]
    }
}

/// Dense `(U1,V1,W1,U2,V2,W2,O1,O2)` joint for one receiver kernel.
fn two_letter_joint(input: &TwoLetterInput, tilde: &[f64], k: &[Vec<f64>]) -> Result<JointTable> {
    let d = input.r_uvw.dims();
    let cells = input.r_uvw.probs().len();
    let nx = input.x_size;
    let no = k[0].len();
    let total = cells
        .checked_mul(cells)
        .and_then(|v| v.checked_mul(no * no))
        .filter(|&v| v <= TWO_LETTER_CAP)
        .ok_or_else(|| Error::Resource(format!("two-letter joint exceeds {TWO_LETTER_CAP} cells")))?;
    // output law given an auxiliary cell and a kernel over x
    let out_law = |kx: &[f64]| -> Vec<f64> {
        (0..no).map(|o| (0..nx).map(|x| kx[x] * k[x][o]).sum()).collect()
    };
    let first: Vec<Vec<f64>> = (0..cells).map(|c| out_law(&tilde[c * nx..(c + 1) * nx])).collect();
    let mut probs = vec![0.0; total];
    for c1 in 0..cells {
        let r1 = input.r_uvw.probs()[c1];
        if r1 == 0.0 {
            continue;
        }
        for c2 in 0..cells {
            let r2 = input.r_uvw.probs()[c2];
            if r2 == 0.0 {
                continue;
            }
            let second = out_law(&input.kernel[(c1 * cells + c2) * nx..(c1 * cells + c2 + 1) * nx]);
            let base = (c1 * cells + c2) * no * no;
            for o1 in 0..no {
                for o2 in 0..no {
                    probs[base + o1 * no + o2] = r1 * r2 * first[c1][o1] * second[o2];
                }
            }
        }
    }
    let mut dims = d.to_vec();
    dims.extend_from_slice(d);
    dims.extend([no, no]);
    JointTable::new(dims, probs)
}

/// The five bounds of the two-letter region, evaluated exactly.
pub fn two_letter_bounds(input: &TwoLetterInput, ch: &BroadcastChannel) -> Result<TwoLetterBounds> {
    if input.x_size != ch.x_size() {
        return Err(Error::Usage("kernel input alphabet does not match the channel".into()));
    }
    let tilde = input.averaged_kernel();
    let jy = two_letter_joint(input, &tilde, ch.q_y())?;
    let jz = two_letter_joint(input, &tilde, ch.q_z())?;
    // axes: 0 U1, 1 V1, 2 W1, 3 U2, 4 V2, 5 W2, 6 O1, 7 O2
    let b_01 = jy.info(&[3, 5], &[6, 7, 0, 2], &[]);
    let b_02 = jz.info(&[4, 5], &[6, 7, 1, 2], &[]);
    let i_uv = jy.info(&[3], &[4], &[5]);
    let b_012a = jz.info(&[4], &[6, 7, 1, 2], &[5]) + b_01 - i_uv;
    let b_012b = jy.info(&[3], &[6, 7, 0, 2], &[5]) + b_02 - i_uv;
    let b_0012 = b_01 + b_02 - i_uv;
    Ok(TwoLetterBounds { b_01, b_02, b_012a, b_012b, b_0012 })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoLetterReduction {
    pub two_letter: TwoLetterBounds,
    pub single_letter: [f64; 5],
    pub max_abs_diff: f64,
    pub passed: bool,
}

/// Tolerance of [`two_letter_reduction_check`].
pub const REDUCTION_TOL: f64 = 1e-9;

/// Two-letter bounds of a Markov kernel against Marton's single-letter
/// bounds at `r(u,v,w) r(x|u,v,w)`.
pub fn two_letter_reduction_check(
    r_uvw: &JointTable,
    r_x_single: &[f64],
    ch: &BroadcastChannel,
) -> Result<TwoLetterReduction> {
    let nx = ch.x_size();
    let input = TwoLetterInput::markov(r_uvw.clone(), r_x_single, nx)?;
    let two_letter = two_letter_bounds(&input, ch)?;
    let d = r_uvw.dims();
    let probs: Vec<f64> = r_uvw
        .probs()
        .iter()
        .enumerate()
        .flat_map(|(c, &p)| (0..nx).map(move |x| p * r_x_single[c * nx + x]))
        .collect();
    let uvwx = JointTable::from_weights(vec![d[0], d[1], d[2], nx], probs)?;
    let single_letter = marton_bounds(&uvwx, ch)?;
    let max_abs_diff = two_letter
        .as_array()
        .iter()
        .zip(&single_letter)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(TwoLetterReduction { two_letter, single_letter, max_abs_diff, passed: max_abs_diff <= REDUCTION_TOL })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bsc(a: f64) -> Vec<Vec<f64>> {
        vec![vec![1.0 - a, a], vec![a, 1.0 - a]]
    }

    fn quick() -> SupportOptions {
        SupportOptions { starts: 4, ..Default::default() }
    }

    #[test]
    fn direction_normalization() {
        let d = Direction::new(2.0, 1.0, 1.0).unwrap();
        assert_eq!((d.l0, d.l1, d.l2, d.scale), (1.0, 0.5, 0.5, 2.0));
        assert!(d.dominates_private());
        assert!(!Direction::new(0.0, 1.0, 1.0).unwrap().dominates_private());
        assert!(Direction::new(0.0, 0.0, 0.0).is_err());
        assert!(Direction::new(-1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn lp_examples() {
        let rows = marton_rows();
        let b = [1.0, 1.0, 1.5, 1.5, 2.0];
        let (v, r) = lp_max(&[1.0, 0.0, 0.0], &rows, &b).unwrap();
        assert!((v - 1.0).abs() < 1e-12, "{r:?}");
        let (v, _) = lp_max(&[0.0, 1.0, 1.0], &rows, &b).unwrap();
        assert!((v - 1.5).abs() < 1e-12);
        assert!(lp_max(&[1.0, 1.0, 1.0], &rows, &[1.0, 1.0, -0.1, 1.0, 1.0]).is_none());
        // strong duality on the same data
        for c in [[1.0, 0.0, 0.0], [1.0, 0.5, 0.5], [0.3, 1.0, 0.2]] {
            let primal = lp_max(&c, &rows, &b).unwrap().0;
            let dual = dual_vertices(&c, &rows)
                .iter()
                .map(|y| y.iter().zip(&b).map(|(p, q)| p * q).sum::<f64>())
                .fold(f64::INFINITY, f64::min);
            assert!((primal - dual).abs() < 1e-9, "{c:?}: {primal} vs {dual}");
        }
    }

    #[test]
    fn degraded_noiseless() {
        let ch = BroadcastChannel::noiseless(2);
        let r = degraded_support_d1(&ch, 1.0, 0.0, &quick()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-4, "{r:?}");
        let r = degraded_support_d2(&ch, 0.0, 1.0, &quick()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-4, "{r:?}");
        let one = BroadcastChannel::new(vec![vec![1.0]], vec![vec![0.5, 0.5]]).unwrap();
        assert!(degraded_support_d1(&one, 1.0, 1.0, &quick()).unwrap().value.abs() < 1e-12);
    }

    #[test]
    fn marton_single_receiver_directions() {
        let ch = BroadcastChannel::new(bsc(0.3), bsc(0.2)).unwrap();
        let r = marton_support(&ch, &Direction::new(0.0, 1.0, 0.0).unwrap(), &quick(), &[]).unwrap();
        assert!((r.value - 0.118709).abs() < 1e-4, "{}", r.value);
        let r = marton_support(&ch, &Direction::new(0.0, 0.0, 1.0).unwrap(), &quick(), &[]).unwrap();
        assert!((r.value - 0.278072).abs() < 1e-4, "{}", r.value);
    }

    #[test]
    fn direction_precondition() {
        let ch = BroadcastChannel::claim1();
        let d = Direction::new(0.0, 1.0, 1.0).unwrap();
        assert!(matches!(directional_optimality_check(&ch, &d, &quick(), 2e-3), Err(Error::Usage(_))));
    }

    #[test]
    fn reduction_on_deterministic_kernel() {
        let ch = BroadcastChannel::new(bsc(0.1), bsc(0.35)).unwrap();
        let r = JointTable::from_weights(vec![2, 2, 2], (1..=8).map(f64::from).collect()).unwrap();
        // X = U
        let single: Vec<f64> =
            (0..8).flat_map(|c| if c / 4 == 0 { [1.0, 0.0] } else { [0.0, 1.0] }).collect();
        let rep = two_letter_reduction_check(&r, &single, &ch).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert!(rep.single_letter[0] > 0.1);
    }

    #[test]
    fn singleton_alphabets_give_zero() {
        let ch = BroadcastChannel::new(vec![vec![1.0]], vec![vec![1.0]]).unwrap();
        let r = JointTable::new(vec![1, 1, 1], vec![1.0]).unwrap();
        let input = TwoLetterInput::markov(r, &[1.0], 1).unwrap();
        let b = two_letter_bounds(&input, &ch).unwrap();
        assert!(b.as_array().iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn random_inputs_and_markov_detection() {
        let m = TwoLetterInput::random([2, 2, 2], 2, 3, true).unwrap();
        assert_eq!(m.markov_part().unwrap().len(), 16);
        let g = TwoLetterInput::random([2, 2, 2], 2, 3, false).unwrap();
        assert!(g.markov_part().is_none());
        assert_eq!(g, TwoLetterInput::random([2, 2, 2], 2, 3, false).unwrap());
    }

    #[test]
    fn bad_kernel_rows_rejected() {
        let r = JointTable::new(vec![1, 1, 1], vec![1.0]).unwrap();
        assert!(matches!(TwoLetterInput::new(r, vec![0.5, 0.4], 2), Err(Error::Validation(_))));
    }
}
