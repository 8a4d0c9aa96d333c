//! Deterministic mapping tables `U x V -> X` and the necessary conditions
//! that optimal auxiliary distributions satisfy.
//!
//! A table's *profile* counts, for every row `u` and every column `v`, how
//! often each input symbol occurs. A table whose profile is a convex
//! combination of the profiles of other tables on the same shape can never
//! be the mapping of a maximizer (on an irreducible, strictly positive
//! channel), which is what [`admissible_mappings`] prunes.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::Serialize;

use crate::channel::{BroadcastChannel, Side};
use crate::error::{Error, Result};
use crate::lpsolve::{solve_convex_feasibility, ConvexFeasibilityProblem, LP_TOL};
use crate::probkit::{entropy_bits, JointTable};

/// Default cap on `|X|^(|U||V|)` for enumeration.
pub const ENUMERATION_CAP: u64 = 1_000_000;

/// Default floor below which a marginal counts as zero.
pub const POSITIVITY_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct MappingTable {
    u_size: usize,
    v_size: usize,
    x_size: usize,
    /// row-major: cell `(u, v)` at `u * v_size + v`
    cells: Vec<usize>,
}

impl MappingTable {
    pub fn new(u_size: usize, v_size: usize, x_size: usize, cells: Vec<usize>) -> Result<Self> {
        if u_size == 0 || v_size == 0 || x_size == 0 {
            return Err(Error::Usage("mapping table sizes must be positive".into()));
        }
        if cells.len() != u_size * v_size {
            return Err(Error::Usage(format!(
                "{u_size}x{v_size} table needs {} cells, got {}",
                u_size * v_size,
                cells.len()
            )));
        }
        if let Some(bad) = cells.iter().find(|&&c| c >= x_size) {
            return Err(Error::Usage(format!("cell symbol {bad} outside input alphabet {x_size}")));
        }
        Ok(Self { u_size, v_size, x_size, cells })
    }

    /// Every cell maps to `x`.
    pub fn constant(u_size: usize, v_size: usize, x_size: usize, x: usize) -> Self {
        Self { u_size, v_size, x_size, cells: vec![x; u_size * v_size] }
    }

    pub fn u_size(&self) -> usize {
        self.u_size
    }

    pub fn v_size(&self) -> usize {
        self.v_size
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn get(&self, u: usize, v: usize) -> usize {
        self.cells[u * self.v_size + v]
    }

    /// Symbols that occur somewhere in the table.
    pub fn symbols_used(&self) -> Vec<bool> {
        let mut used = vec![false; self.x_size];
        for &c in &self.cells {
            used[c] = true;
        }
        used
    }

    /// New row `i` is old row `perm[i]`.
    pub fn permute_rows(&self, perm: &[usize]) -> Self {
        let mut cells = Vec::with_capacity(self.cells.len());
        for &r in perm {
            cells.extend_from_slice(&self.cells[r * self.v_size..(r + 1) * self.v_size]);
        }
        Self { cells, ..self.clone() }
    }

    /// New column `j` is old column `perm[j]`.
    pub fn permute_cols(&self, perm: &[usize]) -> Self {
        let mut cells = Vec::with_capacity(self.cells.len());
        for u in 0..self.u_size {
            cells.extend(perm.iter().map(|&c| self.get(u, c)));
        }
        Self { cells, ..self.clone() }
    }

    /// Symbol `x` becomes `perm[x]`.
    pub fn relabel_symbols(&self, perm: &[usize]) -> Self {
        Self { cells: self.cells.iter().map(|&c| perm[c]).collect(), ..self.clone() }
    }

    /// Whether no row and column relabeling gives a lexicographically
    /// smaller table. Relabeling the auxiliaries never changes an objective
    /// value, so searches only need these representatives.
    pub fn is_rowcol_minimal(&self) -> bool {
        let cols = permutations(self.v_size);
        permutations(self.u_size).iter().all(|r| {
            let tr = self.permute_rows(r);
            cols.iter().all(|c| tr.permute_cols(c).cells >= self.cells)
        })
    }

    /// Smallest table in the orbit under row, column and symbol relabelings.
    pub fn canonical(&self) -> Self {
        let rows = permutations(self.u_size);
        let cols = permutations(self.v_size);
        let syms = permutations(self.x_size);
        let mut best = self.clone();
        for r in &rows {
            let tr = self.permute_rows(r);
            for c in &cols {
                let tc = tr.permute_cols(c);
                for s in &syms {
                    let ts = tc.relabel_symbols(s);
                    if ts.cells < best.cells {
                        best = ts;
                    }
                }
            }
        }
        best
    }
}

impl fmt::Display for MappingTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.u_size)
            .map(|u| {
                (0..self.v_size).map(|v| self.get(u, v).to_string()).collect::<Vec<_>>().join(",")
            })
            .collect();
        write!(f, "[{}]", rows.join(";"))
    }
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Row blocks then column blocks of symbol counts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ProfileVector {
    counts: Vec<u32>,
}

impl ProfileVector {
    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| f64::from(c)).collect()
    }
}

pub fn profile(t: &MappingTable) -> ProfileVector {
    let x = t.x_size;
    let mut counts = vec![0u32; (t.u_size + t.v_size) * x];
    for u in 0..t.u_size {
        for v in 0..t.v_size {
            let s = t.get(u, v);
            counts[u * x + s] += 1;
            counts[(t.u_size + v) * x + s] += 1;
        }
    }
    ProfileVector { counts }
}

fn table_count(u_size: usize, v_size: usize, x_size: usize, cap: u64) -> Result<u64> {
    let cells = (u_size * v_size) as u32;
    match (x_size as u64).checked_pow(cells) {
        Some(n) if n <= cap => Ok(n),
        Some(n) => Err(Error::Resource(format!(
            "{n} mapping tables on {u_size}x{v_size}->{x_size} exceed the cap of {cap}"
        ))),
        None => Err(Error::Resource(format!(
            "{x_size}^{cells} mapping tables on {u_size}x{v_size}->{x_size} exceed the cap of {cap}"
        ))),
    }
}

/// All `|X|^(|U||V|)` tables in lexicographic cell order.
pub fn enumerate_mappings(u_size: usize, v_size: usize, x_size: usize) -> Result<Vec<MappingTable>> {
    enumerate_mappings_capped(u_size, v_size, x_size, ENUMERATION_CAP)
}

pub fn enumerate_mappings_capped(
    u_size: usize,
    v_size: usize,
    x_size: usize,
    cap: u64,
) -> Result<Vec<MappingTable>> {
    if u_size == 0 || v_size == 0 || x_size == 0 {
        return Err(Error::Usage("mapping table sizes must be positive".into()));
    }
    let n = table_count(u_size, v_size, x_size, cap)?;
    let len = u_size * v_size;
    let mut out = Vec::with_capacity(n as usize);
    let mut cells = vec![0usize; len];
    for _ in 0..n {
        out.push(MappingTable { u_size, v_size, x_size, cells: cells.clone() });
        for c in (0..len).rev() {
            cells[c] += 1;
            if cells[c] < x_size {
                break;
            }
            cells[c] = 0;
        }
    }
    Ok(out)
}

/// One representative (the canonical form) per relabeling orbit.
pub fn enumerate_canonical(u_size: usize, v_size: usize, x_size: usize) -> Result<Vec<MappingTable>> {
    Ok(enumerate_mappings(u_size, v_size, x_size)?
        .into_iter()
        .filter(|t| t.canonical() == *t)
        .collect())
}

/// Distinct profiles of a shape, with how many tables share each.
struct ProfileCensus {
    distinct: Vec<ProfileVector>,
    multiplicity: HashMap<ProfileVector, usize>,
}

impl ProfileCensus {
    fn build(u_size: usize, v_size: usize, x_size: usize) -> Result<Self> {
        let mut multiplicity: HashMap<ProfileVector, usize> = HashMap::new();
        let mut distinct = Vec::new();
        for t in enumerate_mappings(u_size, v_size, x_size)? {
            let p = profile(&t);
            let e = multiplicity.entry(p.clone()).or_insert(0);
            if *e == 0 {
                distinct.push(p);
            }
            *e += 1;
        }
        Ok(Self { distinct, multiplicity })
    }

    fn is_extremal(&self, prof: &ProfileVector) -> Result<bool> {
        match self.multiplicity.get(prof) {
            Some(&m) if m > 1 => return Ok(false),
            _ => {}
        }
        let others: Vec<Vec<f64>> =
            self.distinct.iter().filter(|p| *p != prof).map(ProfileVector::as_f64).collect();
        if others.is_empty() {
            return Ok(true);
        }
        let problem = ConvexFeasibilityProblem::new(prof.as_f64(), others)?;
        Ok(!solve_convex_feasibility(&problem, LP_TOL)?.is_feasible())
    }
}

/// Whether `profile(t)` lies outside the convex hull of the profiles of
/// every other table of the same shape.
///
/// Profiles add up cell by cell, so this holds exactly when some scores
/// `a_u(x) + b_v(x)` make `t(u,v)` the unique best symbol in every cell.
/// Such scores exist unless the origin is a convex combination of the
/// vectors `e(u,t) + e(v,t) - e(u,x) - e(v,x)` over cells and `x != t(u,v)`,
/// which is one small feasibility problem in `(|U|+|V|)|X|` dimensions.
pub fn is_profile_extremal(t: &MappingTable) -> Result<bool> {
    let x = t.x_size;
    let dim = (t.u_size + t.v_size) * x;
    let mut rows = Vec::new();
    for u in 0..t.u_size {
        for v in 0..t.v_size {
            let s = t.get(u, v);
            for other in (0..x).filter(|&o| o != s) {
                let mut r = vec![0.0; dim];
                r[u * x + s] += 1.0;
                r[(t.u_size + v) * x + s] += 1.0;
                r[u * x + other] -= 1.0;
                r[(t.u_size + v) * x + other] -= 1.0;
                rows.push(r);
            }
        }
    }
    if rows.is_empty() {
        return Ok(true);
    }
    let problem = ConvexFeasibilityProblem::new(vec![0.0; dim], rows)?;
    Ok(!solve_convex_feasibility(&problem, LP_TOL)?.is_feasible())
}

/// [`is_profile_extremal`] computed from the definition: one hull-membership
/// problem against every distinct profile of the shape. Exponentially more
/// expensive; kept as a reference.
pub fn is_profile_extremal_by_hull(t: &MappingTable) -> Result<bool> {
    let census = ProfileCensus::build(t.u_size, t.v_size, t.x_size)?;
    census.is_extremal(&profile(t))
}

type AdmissibleCache = Mutex<HashMap<(usize, usize, usize), Arc<Vec<MappingTable>>>>;

fn admissible_cache() -> &'static AdmissibleCache {
    static CACHE: OnceLock<AdmissibleCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// The profile-extremal tables of a shape, in enumeration order. Cached
/// per shape for the life of the process.
pub fn admissible_mappings(u_size: usize, v_size: usize, x_size: usize) -> Result<Arc<Vec<MappingTable>>> {
    let key = (u_size, v_size, x_size);
    if let Some(hit) = admissible_cache().lock().expect("cache lock").get(&key) {
        return Ok(Arc::clone(hit));
    }
    let mut keep = Vec::new();
    for t in enumerate_mappings(u_size, v_size, x_size)? {
        if is_profile_extremal(&t)? {
            keep.push(t);
        }
    }
    let keep = Arc::new(keep);
    admissible_cache().lock().expect("cache lock").insert(key, Arc::clone(&keep));
    Ok(keep)
}

/// Every table of a shape with its profile and admissibility flag.
pub fn mapping_census(
    u_size: usize,
    v_size: usize,
    x_size: usize,
) -> Result<Vec<(MappingTable, ProfileVector, bool)>> {
    enumerate_mappings(u_size, v_size, x_size)?
        .into_iter()
        .map(|t| {
            let ok = is_profile_extremal(&t)?;
            let p = profile(&t);
            Ok((t, p, ok))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionDiagnostic {
    pub name: String,
    pub worst_violation: f64,
    pub tolerance: f64,
    pub witness: Vec<usize>,
}

impl ConditionDiagnostic {
    pub fn ok(&self) -> bool {
        self.worst_violation <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub name: String,
    pub passed: bool,
    /// Set when a precondition of the underlying result does not hold
    /// (for example a channel with zero transition probabilities).
    pub not_applicable: bool,
    pub diagnostics: Vec<ConditionDiagnostic>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_kernel: Option<Vec<Vec<f64>>>,
}

impl ConditionReport {
    fn from_diagnostics(name: &str, diagnostics: Vec<ConditionDiagnostic>) -> Self {
        let passed = diagnostics.iter().all(ConditionDiagnostic::ok);
        Self { name: name.into(), passed, not_applicable: false, diagnostics, witness_kernel: None }
    }

    pub fn worst(&self) -> Option<&ConditionDiagnostic> {
        self.diagnostics.iter().max_by(|a, b| {
            (a.worst_violation - a.tolerance).total_cmp(&(b.worst_violation - b.tolerance))
        })
    }
}

fn require_uvx(joint: &JointTable, ch: &BroadcastChannel) -> Result<()> {
    if joint.rank() != 3 || joint.dims()[2] != ch.x_size() {
        return Err(Error::Usage(format!(
            "expected a (U,V,X) table with |X| = {}, got dims {:?}",
            ch.x_size(),
            joint.dims()
        )));
    }
    Ok(())
}

/// `p(u,y)` (or `p(v,z)`) as a `|A| x |out|` table from a `(U,V,X)` joint.
fn aux_output(joint: &JointTable, ch: &BroadcastChannel, side: Side) -> Vec<Vec<f64>> {
    let [nu, nv, nx] = [joint.dims()[0], joint.dims()[1], joint.dims()[2]];
    let q = ch.kernel(side);
    let (na, nout) = match side {
        Side::Y => (nu, ch.y_size()),
        Side::Z => (nv, ch.z_size()),
    };
    let mut out = vec![vec![0.0; nout]; na];
    for u in 0..nu {
        for v in 0..nv {
            for x in 0..nx {
                let p = joint.get(&[u, v, x]);
                let a = if side == Side::Y { u } else { v };
                for (o, qv) in q[x].iter().enumerate() {
                    out[a][o] += p * qv;
                }
            }
        }
    }
    out
}

fn pair_marginal(joint: &JointTable) -> Vec<Vec<f64>> {
    let [nu, nv, nx] = [joint.dims()[0], joint.dims()[1], joint.dims()[2]];
    (0..nu).map(|u| (0..nv).map(|v| (0..nx).map(|x| joint.get(&[u, v, x])).sum()).collect()).collect()
}

/// Positivity of `p(u,v)`, `p(u,y)` and `p(v,z)` over all symbols.
pub fn check_support_positivity(joint: &JointTable, ch: &BroadcastChannel) -> Result<ConditionReport> {
    check_support_positivity_with_floor(joint, ch, POSITIVITY_FLOOR)
}

pub fn check_support_positivity_with_floor(
    joint: &JointTable,
    ch: &BroadcastChannel,
    floor: f64,
) -> Result<ConditionReport> {
    require_uvx(joint, ch)?;
    let mut diagnostics = Vec::new();
    let families = [
        ("p(u,v) > 0", pair_marginal(joint)),
        ("p(u,y) > 0", aux_output(joint, ch, Side::Y)),
        ("p(v,z) > 0", aux_output(joint, ch, Side::Z)),
    ];
    for (name, table) in families {
        let mut worst = (f64::INFINITY, vec![]);
        for (i, row) in table.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v < worst.0 {
                    worst = (v, vec![i, j]);
                }
            }
        }
        // violation is how far the smallest entry sits below the floor
        diagnostics.push(ConditionDiagnostic {
            name: name.into(),
            worst_violation: (floor - worst.0).max(0.0),
            tolerance: 0.0,
            witness: worst.1,
        });
    }
    let mut report = ConditionReport::from_diagnostics("support positivity", diagnostics);
    for d in &mut report.diagnostics {
        // a zero floor gap means strictly above the floor
        if d.worst_violation == 0.0 {
            d.witness.clear();
        }
    }
    report.passed = report.diagnostics.iter().all(|d| d.worst_violation == 0.0);
    report.not_applicable = !ch.is_strictly_positive();
    Ok(report)
}

/// The functions `f_u`, `g_v` and `h` of the first-order optimality
/// conditions, in bits.
#[derive(Debug, Clone, PartialEq)]
pub struct StationarityFunctions {
    pub f: Vec<Vec<f64>>,
    pub g: Vec<Vec<f64>>,
    pub h: Vec<f64>,
    pub log_puv: Vec<Vec<f64>>,
}

pub fn stationarity_functions(joint: &JointTable, ch: &BroadcastChannel) -> Result<StationarityFunctions> {
    require_uvx(joint, ch)?;
    let puv = pair_marginal(joint);
    let puy = aux_output(joint, ch, Side::Y);
    let pvz = aux_output(joint, ch, Side::Z);
    let nx = ch.x_size();
    let lg = |v: f64| if v > 0.0 { v.log2() } else { f64::NEG_INFINITY };
    let dot = |q: &[f64], row: &[f64]| -> f64 {
        q.iter().zip(row).map(|(a, b)| if *a == 0.0 { 0.0 } else { a * lg(*b) }).sum()
    };
    let f: Vec<Vec<f64>> =
        puy.iter().map(|row| (0..nx).map(|x| dot(&ch.q_y()[x], row)).collect()).collect();
    let g: Vec<Vec<f64>> =
        pvz.iter().map(|row| (0..nx).map(|x| dot(&ch.q_z()[x], row)).collect()).collect();
    let log_puv: Vec<Vec<f64>> = puv.iter().map(|r| r.iter().map(|&v| lg(v)).collect()).collect();
    let h = (0..nx)
        .map(|x| {
            let mut m = f64::INFINITY;
            for (u, row) in log_puv.iter().enumerate() {
                for (v, &l) in row.iter().enumerate() {
                    m = m.min(l - f[u][x] - g[v][x]);
                }
            }
            m
        })
        .collect();
    Ok(StationarityFunctions { f, g, h, log_puv })
}

/// First-order conditions of a maximizer of `I(U;Y)+I(V;Z)-I(U;V)` at
/// fixed `p(x)`, plus the cross-ratio inequality they imply for cells that
/// share a symbol.
pub fn check_stationarity(
    joint: &JointTable,
    t: &MappingTable,
    ch: &BroadcastChannel,
    tol: f64,
) -> Result<ConditionReport> {
    require_uvx(joint, ch)?;
    let [nu, nv, nx] = [joint.dims()[0], joint.dims()[1], joint.dims()[2]];
    if t.u_size != nu || t.v_size != nv || t.x_size != nx {
        return Err(Error::Usage("mapping table shape does not match the joint".into()));
    }
    for u in 0..nu {
        for v in 0..nv {
            for x in 0..nx {
                if x != t.get(u, v) && joint.get(&[u, v, x]) > 1e-9 {
                    return Err(Error::Usage(format!(
                        "joint puts mass on ({u},{v},{x}) but the table maps ({u},{v}) to {}",
                        t.get(u, v)
                    )));
                }
            }
        }
    }
    let sf = stationarity_functions(joint, ch)?;
    let score = |u: usize, v: usize, x: usize| sf.f[u][x] + sf.g[v][x] + sf.h[x];

    let mut eq = (0.0f64, vec![]);
    let mut arg = (0.0f64, vec![]);
    for u in 0..nu {
        for v in 0..nv {
            let best = (0..nx).map(|x| score(u, v, x)).fold(f64::NEG_INFINITY, f64::max);
            let gap = if sf.log_puv[u][v].is_finite() && best.is_finite() {
                (sf.log_puv[u][v] - best).abs()
            } else {
                f64::INFINITY
            };
            if gap > eq.0 || (gap.is_infinite() && eq.1.is_empty()) {
                eq = (gap, vec![u, v]);
            }
            let mapped = score(u, v, t.get(u, v));
            let shortfall = if mapped.is_finite() { best - mapped } else { f64::INFINITY };
            if shortfall > arg.0 {
                arg = (shortfall, vec![u, v]);
            }
        }
    }

    let puv = pair_marginal(joint);
    let mut cross = (0.0f64, vec![]);
    for u0 in 0..nu {
        for u1 in 0..nu {
            for v0 in 0..nv {
                for v1 in 0..nv {
                    if u0 == u1 || v0 == v1 || t.get(u0, v0) != t.get(u1, v1) {
                        continue;
                    }
                    let lhs = puv[u0][v0] * puv[u1][v1];
                    let rhs = puv[u1][v0] * puv[u0][v1];
                    let excess = if rhs > 0.0 { lhs / rhs - 1.0 } else if lhs > 0.0 { f64::INFINITY } else { 0.0 };
                    if excess > cross.0 {
                        cross = (excess, vec![u0, v0, u1, v1]);
                    }
                }
            }
        }
    }
    let diagnostics = vec![
        ConditionDiagnostic {
            name: "log p(u,v) = max_x [f_u + g_v + h]".into(),
            worst_violation: eq.0,
            tolerance: tol,
            witness: eq.1,
        },
        ConditionDiagnostic {
            name: "mapped symbol attains the max".into(),
            worst_violation: arg.0,
            tolerance: tol,
            witness: arg.1,
        },
        ConditionDiagnostic {
            name: "p(u0,v0)p(u1,v1) <= p(u1,v0)p(u0,v1)".into(),
            worst_violation: cross.0,
            tolerance: tol,
            witness: cross.1,
        },
    ];
    let mut report = ConditionReport::from_diagnostics("stationarity", diagnostics);
    report.not_applicable = !ch.is_strictly_positive();
    Ok(report)
}

/// Configuration of the sampled less-noisy refuter.
#[derive(Debug, Clone, PartialEq)]
pub struct LessNoisyProbe {
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for LessNoisyProbe {
    fn default() -> Self {
        Self { samples: 200, seed: 0, tol: 1e-6 }
    }
}

/// Maps of `U` onto `{0..k}` for every set partition of `U`.
fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, next: usize, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for b in 0..=next {
            prefix.push(b);
            rec(prefix, next.max(b + 1), n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        rec(&mut vec![0], 1, n, &mut out);
    }
    out
}

/// `I(Ubar; B)` where `p(u,b)` is given as rows and `Ubar` is drawn through
/// `kernel[u][ubar]`.
fn info_through(kernel: &[Vec<f64>], pub_: &[Vec<f64>]) -> f64 {
    let nbar = kernel[0].len();
    let nb = pub_[0].len();
    let mut joint = vec![0.0; nbar * nb];
    for (u, row) in pub_.iter().enumerate() {
        for (ub, k) in kernel[u].iter().enumerate() {
            if *k == 0.0 {
                continue;
            }
            for (b, p) in row.iter().enumerate() {
                joint[ub * nb + b] += k * p;
            }
        }
    }
    let pu: Vec<f64> = (0..nbar).map(|i| joint[i * nb..(i + 1) * nb].iter().sum()).collect();
    let pb: Vec<f64> = (0..nb).map(|b| (0..nbar).map(|i| joint[i * nb + b]).sum()).collect();
    entropy_bits(&pu) + entropy_bits(&pb) - entropy_bits(&joint)
}

/// Sampled refutation of `I(Ubar;Y) >= I(Ubar;VZ)` over `Ubar - U - (V,X,Y,Z)`
/// (`Side::Y`), or of `I(Vbar;Z) >= I(Vbar;UY)` (`Side::Z`).
///
/// `joint` has axes `(U, V, X, Y, Z)`. Every deterministic partition of the
/// auxiliary is probed, then `probe.samples` random Dirichlet kernels. A
/// failure is a certified violation and carries the witness kernel; a pass
/// is evidence only.
pub fn check_less_noisy(joint: &JointTable, side: Side, probe: &LessNoisyProbe) -> Result<ConditionReport> {
    if joint.rank() != 5 {
        return Err(Error::Usage("less-noisy check needs a (U,V,X,Y,Z) table".into()));
    }
    // rows: the auxiliary being coarse-grained; columns: the flattened rest
    let (aux, own, other) = match side {
        Side::Y => (0usize, joint.marginal(&[0, 3]), joint.marginal(&[0, 1, 4])),
        Side::Z => (1usize, joint.marginal(&[1, 4]), joint.marginal(&[1, 0, 3])),
    };
    let n = joint.dims()[aux];
    let rows = |t: &JointTable| -> Vec<Vec<f64>> {
        let w = t.probs().len() / n;
        t.probs().chunks(w).map(<[f64]>::to_vec).collect()
    };
    let (own_rows, other_rows) = (rows(&own), rows(&other));

    let mut kernels: Vec<Vec<Vec<f64>>> = set_partitions(n)
        .into_iter()
        .map(|labels| {
            labels
                .iter()
                .map(|&l| (0..n).map(|b| if b == l { 1.0 } else { 0.0 }).collect())
                .collect()
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(probe.seed);
    for _ in 0..probe.samples {
        kernels.push(
            (0..n)
                .map(|_| {
                    let d: Vec<f64> = (0..n).map(|_| Exp1.sample(&mut rng)).collect();
                    let s: f64 = d.iter().sum();
                    d.into_iter().map(|v| v / s).collect()
                })
                .collect(),
        );
    }
    let mut worst = (f64::INFINITY, 0usize);
    for (i, k) in kernels.iter().enumerate() {
        let gap = info_through(k, &own_rows) - info_through(k, &other_rows);
        if gap < worst.0 {
            worst = (gap, i);
        }
    }
    let name = match side {
        Side::Y => "I(Ubar;Y) >= I(Ubar;VZ)",
        Side::Z => "I(Vbar;Z) >= I(Vbar;UY)",
    };
    let diag = ConditionDiagnostic {
        name: name.into(),
        worst_violation: (-worst.0).max(0.0),
        tolerance: probe.tol,
        witness: vec![worst.1],
    };
    let mut report = ConditionReport::from_diagnostics("less noisy (sampled)", vec![diag]);
    if !report.passed {
        report.witness_kernel = Some(kernels.swap_remove(worst.1));
    }
    Ok(report)
}

/// Builds the `(U,V,X)` joint of `p(u,v)` pushed through a mapping table.
pub fn joint_from_mapping(puv: &[f64], t: &MappingTable) -> Result<JointTable> {
    if puv.len() != t.u_size * t.v_size {
        return Err(Error::Usage("p(u,v) length does not match the table".into()));
    }
    let mut probs = vec![0.0; puv.len() * t.x_size];
    for (cell, &p) in puv.iter().enumerate() {
        probs[cell * t.x_size + t.cells[cell]] = p;
    }
    JointTable::from_weights(vec![t.u_size, t.v_size, t.x_size], probs)
}

/// Extends a `(U,V,X)` joint to `(U,V,X,Y,Z)` with conditionally
/// independent outputs. Only the `(.,Y)` and `(.,Z)` marginals of the result
/// are meaningful.
pub fn extend_with_outputs(joint: &JointTable, ch: &BroadcastChannel) -> Result<JointTable> {
    require_uvx(joint, ch)?;
    let (ny, nz) = (ch.y_size(), ch.z_size());
    let mut probs = Vec::with_capacity(joint.probs().len() * ny * nz);
    for (k, &p) in joint.probs().iter().enumerate() {
        let x = k % ch.x_size();
        for qy in &ch.q_y()[x] {
            for qz in &ch.q_z()[x] {
                probs.push(p * qy * qz);
            }
        }
    }
    let mut dims = joint.dims().to_vec();
    dims.extend([ny, nz]);
    JointTable::from_weights(dims, probs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t2(cells: [usize; 4]) -> MappingTable {
        MappingTable::new(2, 2, 2, cells.to_vec()).unwrap()
    }

    #[test]
    fn profile_examples() {
        let xor = t2([0, 1, 1, 0]);
        assert_eq!(profile(&xor).counts(), &[1, 1, 1, 1, 1, 1, 1, 1]);
        let c = MappingTable::constant(2, 3, 2, 0);
        assert_eq!(profile(&c).counts(), &[3, 0, 3, 0, 2, 0, 2, 0, 2, 0]);
        assert_eq!(profile(&xor), profile(&t2([1, 0, 0, 1])));
    }

    #[test]
    fn enumeration_counts_and_order() {
        assert_eq!(enumerate_mappings(2, 2, 2).unwrap().len(), 16);
        assert_eq!(enumerate_mappings(1, 1, 3).unwrap().len(), 3);
        let all = enumerate_mappings(2, 2, 3).unwrap();
        assert_eq!(all.len(), 81);
        assert!(all.windows(2).all(|w| w[0].cells() < w[1].cells()));
        assert!(matches!(enumerate_mappings(4, 4, 3), Err(Error::Resource(_))));
        assert!(matches!(enumerate_mappings_capped(2, 2, 2, 10), Err(Error::Resource(m)) if m.contains("16")));
    }

    #[test]
    fn extremality_examples() {
        assert!(!is_profile_extremal(&t2([0, 1, 1, 0])).unwrap());
        assert!(is_profile_extremal(&MappingTable::constant(2, 2, 2, 0)).unwrap());
        assert!(is_profile_extremal(&t2([0, 0, 0, 1])).unwrap());
    }

    #[test]
    fn separating_scores_agree_with_hull() {
        for (a, b, x) in [(2, 2, 2), (1, 3, 2), (2, 3, 2), (2, 2, 3), (1, 2, 3)] {
            for t in enumerate_mappings(a, b, x).unwrap() {
                assert_eq!(
                    is_profile_extremal(&t).unwrap(),
                    is_profile_extremal_by_hull(&t).unwrap(),
                    "{t}"
                );
            }
        }
    }

    #[test]
    fn admissible_sets() {
        let adm = admissible_mappings(2, 2, 2).unwrap();
        assert!(!adm.contains(&t2([0, 1, 1, 0])));
        assert!(!adm.contains(&t2([1, 0, 0, 1])));
        assert!(adm.contains(&MappingTable::constant(2, 2, 2, 0)));
        assert!(adm.contains(&MappingTable::constant(2, 2, 2, 1)));
        for x in 1..4 {
            assert_eq!(admissible_mappings(1, 1, x).unwrap().len(), x);
        }
    }

    #[test]
    fn rowcol_representatives() {
        let reps: Vec<_> =
            enumerate_mappings(2, 2, 2).unwrap().into_iter().filter(MappingTable::is_rowcol_minimal).collect();
        // orbits under row/column swaps of the 16 binary 2x2 tables
        assert_eq!(reps.len(), 7);
        assert!(reps.contains(&t2([0, 1, 1, 0])));
        assert!(!reps.contains(&t2([1, 0, 0, 1])));
    }

    #[test]
    fn canonical_forms() {
        let a = t2([0, 1, 1, 1]);
        assert_eq!(a.canonical(), t2([0, 0, 0, 1]));
        let reps = enumerate_canonical(2, 2, 2).unwrap();
        assert!(reps.iter().all(|t| t.canonical() == *t));
        // constant, single odd cell, row split, column split, diagonal
        assert_eq!(reps.len(), 5);
    }

    #[test]
    fn single_cell_stationarity_is_vacuous() {
        let ch = BroadcastChannel::new(
            vec![vec![0.6, 0.4], vec![0.1, 0.9]],
            vec![vec![0.3, 0.7], vec![0.8, 0.2]],
        )
        .unwrap();
        let t = MappingTable::constant(1, 1, 2, 1);
        let joint = joint_from_mapping(&[1.0], &t).unwrap();
        let r = check_stationarity(&joint, &t, &ch, 1e-9).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn inconsistent_joint_is_rejected() {
        let ch = BroadcastChannel::claim1();
        let t = MappingTable::constant(1, 1, 2, 1);
        let joint = JointTable::new(vec![1, 1, 2], vec![0.5, 0.5]).unwrap();
        assert!(matches!(check_stationarity(&joint, &t, &ch, 1e-3), Err(Error::Usage(_))));
    }

    #[test]
    fn support_positivity() {
        let ch = BroadcastChannel::claim1().smooth(1e-3).unwrap();
        let t = t2([0, 0, 0, 1]);
        let good = joint_from_mapping(&[0.1, 0.2, 0.3, 0.4], &t).unwrap();
        let r = check_support_positivity(&good, &ch).unwrap();
        assert!(r.passed && !r.not_applicable);
        let bad = joint_from_mapping(&[0.0, 0.2, 0.3, 0.5], &t).unwrap();
        let r = check_support_positivity(&bad, &ch).unwrap();
        assert!(!r.passed);
        assert_eq!(r.diagnostics[0].witness, vec![0, 0]);
        let raw = check_support_positivity(&good, &BroadcastChannel::noiseless(2)).unwrap();
        assert!(raw.not_applicable);
    }

    fn uvxyz(nu: usize, nv: usize, f: impl Fn(usize, usize, usize, usize, usize) -> f64, dims: [usize; 5]) -> JointTable {
        let mut probs = Vec::new();
        for u in 0..nu {
            for v in 0..nv {
                for x in 0..dims[2] {
                    for y in 0..dims[3] {
                        for z in 0..dims[4] {
                            probs.push(f(u, v, x, y, z));
                        }
                    }
                }
            }
        }
        JointTable::from_weights(dims.to_vec(), probs).unwrap()
    }

    #[test]
    fn less_noisy_examples() {
        let probe = LessNoisyProbe { samples: 50, ..Default::default() };
        // V constant, Z = Y, U = X, Y a noisy copy of X
        let j = uvxyz(2, 1, |u, _, x, y, z| {
            if u != x || y != z { 0.0 } else if y == x { 0.4 } else { 0.1 }
        }, [2, 1, 2, 2, 2]);
        let r = check_less_noisy(&j, Side::Y, &probe).unwrap();
        assert!(r.passed);
        assert!(r.diagnostics[0].worst_violation < 1e-12);

        // Y = X, U = X, arbitrary V and Z
        let j = uvxyz(2, 2, |u, v, x, y, z| {
            if u != x || y != x { 0.0 } else { 0.05 + 0.1 * (v + 2 * z) as f64 * 0.3 + 0.02 * u as f64 }
        }, [2, 2, 2, 2, 2]);
        assert!(check_less_noisy(&j, Side::Y, &probe).unwrap().passed);

        // Y independent of X, Z = X, U = X
        let j = uvxyz(2, 1, |u, _, x, _y, z| if u == x && z == x { 0.25 } else { 0.0 }, [2, 1, 2, 2, 2]);
        let r = check_less_noisy(&j, Side::Y, &probe).unwrap();
        assert!(!r.passed);
        let k = r.witness_kernel.unwrap();
        assert!(k.iter().flatten().all(|&v| v == 0.0 || v == 1.0), "deterministic witness: {k:?}");
    }

    #[test]
    fn partitions_are_bell_numbers() {
        assert_eq!(set_partitions(1).len(), 1);
        assert_eq!(set_partitions(3).len(), 5);
        assert_eq!(set_partitions(4).len(), 15);
    }
}
