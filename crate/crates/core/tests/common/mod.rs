//! Seeded channel generators and brute-force reference computations shared
//! by the integration tests. Nothing here calls into the library's
//! information routines.
#![allow(dead_code)]

use martonkit::BroadcastChannel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Flat Dirichlet draw mixed with `floor` of the uniform law.
pub fn random_row(rng: &mut ChaCha8Rng, n: usize, floor: f64) -> Vec<f64> {
    let d: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = d.iter().sum();
    d.iter().map(|v| (1.0 - floor) * v / s + floor / n as f64).collect()
}

pub fn random_kernel(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Vec<Vec<f64>> {
    (0..rows).map(|_| random_row(rng, cols, 0.04)).collect()
}

/// Strictly positive channel with the given alphabet sizes.
pub fn random_channel(seed: u64, x: usize, y: usize, z: usize) -> BroadcastChannel {
    let mut r = rng(seed);
    let q_y = random_kernel(&mut r, x, y);
    let q_z = random_kernel(&mut r, x, z);
    BroadcastChannel::new(q_y, q_z).expect("random channel is valid")
}

/// Binary-input channel with `|Y|, |Z|` drawn from {2, 3}.
pub fn random_binary_channel(seed: u64) -> BroadcastChannel {
    let mut r = rng(seed ^ 0x5eed);
    let y = r.gen_range(2..=3);
    let z = r.gen_range(2..=3);
    random_channel(seed, 2, y, z)
}

pub fn h(p: &[f64]) -> f64 {
    p.iter().filter(|&&v| v > 0.0).map(|&v| -v * v.log2()).sum()
}

pub fn output_law(px: &[f64], k: &[Vec<f64>]) -> Vec<f64> {
    (0..k[0].len()).map(|o| px.iter().zip(k).map(|(p, row)| p * row[o]).sum()).collect()
}

/// `I(X;O)` for input law `px` through kernel `k`.
pub fn mi(px: &[f64], k: &[Vec<f64>]) -> f64 {
    h(&output_law(px, k)) - px.iter().zip(k).map(|(p, row)| p * h(row)).sum::<f64>()
}

/// Upper concave envelope of `(x_i, g_i)` (x sorted), evaluated at the x_i.
pub fn concave_envelope(xs: &[f64], gs: &[f64]) -> Vec<f64> {
    let mut hull: Vec<usize> = Vec::new();
    for i in 0..xs.len() {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (xs[b] - xs[a]) * (gs[i] - gs[a]) - (gs[b] - gs[a]) * (xs[i] - xs[a]);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let mut out = vec![0.0; xs.len()];
    for w in hull.windows(2) {
        let (a, b) = (w[0], w[1]);
        for i in a..=b {
            let t = (xs[i] - xs[a]) / (xs[b] - xs[a]);
            out[i] = gs[a] + t * (gs[b] - gs[a]);
        }
    }
    if hull.len() == 1 {
        out[hull[0]] = gs[hull[0]];
    }
    out
}

/// `T_lambda` of a binary-input channel on a grid of input laws, using
/// `T(p_x) = max(I(X;Y), I(X;Z))` for binary inputs:
/// `T_lambda = max_q [lambda H(Y) + (1-lambda) H(Z) + env(g)(q)]` with
/// `g(q) = max(I_Y(q), I_Z(q)) - lambda H(Y|q) - (1-lambda) H(Z|q)`.
pub fn binary_t_lambda_oracle(ch: &BroadcastChannel, lambda: f64, grid: usize) -> f64 {
    assert_eq!(ch.x_size(), 2);
    let xs: Vec<f64> = (0..=grid).map(|i| i as f64 / grid as f64).collect();
    let hy = |q: f64| h(&output_law(&[1.0 - q, q], ch.q_y()));
    let hz = |q: f64| h(&output_law(&[1.0 - q, q], ch.q_z()));
    let gs: Vec<f64> = xs
        .iter()
        .map(|&q| {
            let px = [1.0 - q, q];
            mi(&px, ch.q_y()).max(mi(&px, ch.q_z())) - lambda * hy(q) - (1.0 - lambda) * hz(q)
        })
        .collect();
    let env = concave_envelope(&xs, &gs);
    xs.iter()
        .zip(&env)
        .map(|(&q, e)| lambda * hy(q) + (1.0 - lambda) * hz(q) + e)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `min_lambda` of the binary oracle by ternary search (the function is
/// convex in lambda).
pub fn binary_sum_rate_oracle(ch: &BroadcastChannel, grid: usize) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..60 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if binary_t_lambda_oracle(ch, m1, grid) <= binary_t_lambda_oracle(ch, m2, grid) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    [0.0, 1.0, 0.5 * (lo + hi)]
        .iter()
        .map(|&l| binary_t_lambda_oracle(ch, l, grid))
        .fold(f64::INFINITY, f64::min)
}

/// Dense joint over arbitrary axes, for brute-force information terms.
pub struct Dense {
    pub dims: Vec<usize>,
    pub p: Vec<f64>,
}

impl Dense {
    pub fn entropy_of(&self, axes: &[usize]) -> f64 {
        let mut idx = vec![0usize; self.dims.len()];
        let mut acc = std::collections::HashMap::<Vec<usize>, f64>::new();
        for &v in &self.p {
            let key: Vec<usize> = axes.iter().map(|&a| idx[a]).collect();
            *acc.entry(key).or_insert(0.0) += v;
            for k in (0..idx.len()).rev() {
                idx[k] += 1;
                if idx[k] < self.dims[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        let vals: Vec<f64> = acc.into_values().collect();
        h(&vals)
    }

    /// `I(A;B|C)`.
    pub fn info(&self, a: &[usize], b: &[usize], c: &[usize]) -> f64 {
        let cat = |x: &[usize], y: &[usize]| -> Vec<usize> { x.iter().chain(y).copied().collect() };
        self.entropy_of(&cat(a, c)) + self.entropy_of(&cat(b, c))
            - self.entropy_of(&cat(&cat(a, b), c))
            - self.entropy_of(c)
    }
}
