//! Phase-I simplex for convex-hull membership.
//!
//! Decides whether a target vector is a convex combination of candidate
//! vectors by minimizing the sum of artificial variables of
//!
//! ```text
//!   sum_t alpha_t c_t = target,   sum_t alpha_t = 1,   alpha >= 0.
//! ```
//!
//! Bland's rule is used for both the entering and the leaving variable, so
//! the method terminates on degenerate problems (profile vectors are small
//! integer vectors and degeneracy is the rule, not the exception).

use crate::error::{Error, Result};

/// Default feasibility tolerance.
pub const LP_TOL: f64 = 1e-9;

const PIVOT_EPS: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexFeasibilityProblem {
    target: Vec<f64>,
    candidates: Vec<Vec<f64>>,
}

impl ConvexFeasibilityProblem {
    pub fn new(target: Vec<f64>, candidates: Vec<Vec<f64>>) -> Result<Self> {
        if candidates.is_empty() {
            return Err(Error::Usage("convex feasibility needs at least one candidate".into()));
        }
        let d = target.len();
        if let Some(bad) = candidates.iter().position(|c| c.len() != d) {
            return Err(Error::Usage(format!(
                "candidate {bad} has length {}, target has length {d}",
                candidates[bad].len()
            )));
        }
        Ok(Self { target, candidates })
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn candidates(&self) -> &[Vec<f64>] {
        &self.candidates
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility {
    Feasible { weights: Vec<f64> },
    Infeasible { phase_one_value: f64 },
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible { .. })
    }
}

pub fn solve_convex_feasibility(p: &ConvexFeasibilityProblem, tol: f64) -> Result<Feasibility> {
    let d = p.target.len();
    let m = d + 1;
    let n_alpha = p.candidates.len();
    let n = n_alpha + m;
    let width = n + 1;
    let rhs_col = n;

    let mut tab = vec![0.0; m * width];
    for i in 0..m {
        let (b, row_coef): (f64, Box<dyn Fn(usize) -> f64>) = if i < d {
            (p.target[i], Box::new(move |t| p.candidates[t][i]))
        } else {
            (1.0, Box::new(|_| 1.0))
        };
        let sign = if b < 0.0 { -1.0 } else { 1.0 };
        let row = &mut tab[i * width..(i + 1) * width];
        for (t, slot) in row.iter_mut().take(n_alpha).enumerate() {
            *slot = sign * row_coef(t);
        }
        row[n_alpha + i] = 1.0;
        row[rhs_col] = sign * b;
    }
    let mut basis: Vec<usize> = (n_alpha..n).collect();

    // reduced costs of the phase-I objective (sum of artificials)
    let mut reduced = vec![0.0; width];
    for i in 0..m {
        for j in 0..n_alpha {
            reduced[j] -= tab[i * width + j];
        }
        reduced[rhs_col] -= tab[i * width + rhs_col];
    }

    let cap = 10 * (d + n_alpha).max(1);
    let mut iters = 0;
    loop {
        let entering = (0..n).find(|&j| reduced[j] < -PIVOT_EPS);
        let Some(col) = entering else { break };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let a = tab[i * width + col];
            if a > PIVOT_EPS {
                let ratio = tab[i * width + rhs_col] / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - 1e-12 || ((ratio - lr).abs() <= 1e-12 && basis[i] < basis[li]) {
                            Some((i, ratio))
                        } else {
                            Some((li, lr))
                        }
                    }
                };
            }
        }
        // the phase-I objective is bounded below by 0, so a column with
        // negative reduced cost always has a positive entry
        let Some((row, _)) = leave else {
            return Err(Error::Numerical("phase-I simplex found an unbounded ray".into()));
        };
        pivot(&mut tab, &mut reduced, width, m, row, col);
        basis[row] = col;
        iters += 1;
        if iters > cap {
            let residual = -reduced[rhs_col];
            return Err(Error::Numerical(format!(
                "phase-I simplex exceeded {cap} iterations (artificial residual {residual:e})"
            )));
        }
    }

    let phase_one_value = -reduced[rhs_col];
    if phase_one_value > tol {
        return Ok(Feasibility::Infeasible { phase_one_value });
    }
    let mut weights = vec![0.0; n_alpha];
    for (i, &b) in basis.iter().enumerate() {
        if b < n_alpha {
            weights[b] = tab[i * width + rhs_col].max(0.0);
        }
    }
    // the certificate is checked rather than trusted
    let total: f64 = weights.iter().sum();
    let mut worst: f64 = (total - 1.0).abs();
    for i in 0..d {
        let recon: f64 = weights.iter().zip(&p.candidates).map(|(w, c)| w * c[i]).sum();
        worst = worst.max((recon - p.target[i]).abs());
    }
    if worst > tol.max(1e-9) * 10.0 {
        return Ok(Feasibility::Infeasible { phase_one_value: phase_one_value.max(worst) });
    }
    Ok(Feasibility::Feasible { weights })
}

fn pivot(tab: &mut [f64], reduced: &mut [f64], width: usize, m: usize, row: usize, col: usize) {
    let inv = 1.0 / tab[row * width + col];
    for v in &mut tab[row * width..(row + 1) * width] {
        *v *= inv;
    }
    let pivot_row: Vec<f64> = tab[row * width..(row + 1) * width].to_vec();
    for i in 0..m {
        if i == row {
            continue;
        }
        let f = tab[i * width + col];
        if f != 0.0 {
            for (v, pr) in tab[i * width..(i + 1) * width].iter_mut().zip(&pivot_row) {
                *v -= f * pr;
            }
        }
    }
    let f = reduced[col];
    if f != 0.0 {
        for (v, pr) in reduced.iter_mut().zip(&pivot_row) {
            *v -= f * pr;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint_is_feasible() {
        let p = ConvexFeasibilityProblem::new(vec![0.5, 0.5], vec![vec![1.0, 0.0], vec![0.0, 1.0]])
            .unwrap();
        match solve_convex_feasibility(&p, LP_TOL).unwrap() {
            Feasibility::Feasible { weights } => {
                assert!((weights[0] - 0.5).abs() < 1e-12);
                assert!((weights[1] - 0.5).abs() < 1e-12);
            }
            other => panic!("expected feasible, got {other:?}"),
        }
    }

    #[test]
    fn point_outside_segment() {
        let p = ConvexFeasibilityProblem::new(vec![2.0, 0.0], vec![vec![0.0, 0.0], vec![1.0, 0.0]])
            .unwrap();
        let r = solve_convex_feasibility(&p, LP_TOL).unwrap();
        assert!(matches!(r, Feasibility::Infeasible { phase_one_value } if phase_one_value > 0.5));
    }

    #[test]
    fn negative_targets() {
        let p = ConvexFeasibilityProblem::new(
            vec![-1.0, 0.5],
            vec![vec![-2.0, 0.0], vec![0.0, 1.0], vec![5.0, 5.0]],
        )
        .unwrap();
        assert!(solve_convex_feasibility(&p, LP_TOL).unwrap().is_feasible());
    }

    #[test]
    fn bad_problems_rejected() {
        assert!(ConvexFeasibilityProblem::new(vec![1.0], vec![]).is_err());
        assert!(ConvexFeasibilityProblem::new(vec![1.0], vec![vec![1.0, 2.0]]).is_err());
    }
}
