mod common;

use common::Dense;
use martonkit::regions::{
    degraded_support_d1, degraded_support_d2, directional_optimality_check, lp_max, marton_support,
    two_letter_bounds, two_letter_reduction_check, Direction, SupportOptions, TwoLetterInput, MARTON_ROWS,
};
use martonkit::BroadcastChannel;
use proptest::prelude::*;

fn bsc(a: f64) -> Vec<Vec<f64>> {
    vec![vec![1.0 - a, a], vec![a, 1.0 - a]]
}

fn hb(p: f64) -> f64 {
    common::h(&[p, 1.0 - p])
}

fn opts() -> SupportOptions {
    SupportOptions::default()
}

/// The full two-letter joint over
/// (U1,V1,W1,U2,V2,W2,X1,X2,Y1,Y2,Z1,Z2), built cell by cell.
fn two_letter_oracle(input: &TwoLetterInput, ch: &BroadcastChannel) -> [f64; 5] {
    let r = input.r_uvw().probs();
    let k = input.kernel();
    let nx = input.x_size();
    let (ny, nz) = (ch.y_size(), ch.z_size());
    let cells = r.len();
    // r~(x|c) with c the second-letter slot
    let tilde = |c: usize, x: usize| -> f64 { (0..cells).map(|c1| r[c1] * k[(c1 * cells + c) * nx + x]).sum() };
    let d = input.r_uvw().dims().to_vec();
    let mut dims = d.clone();
    dims.extend(&d);
    dims.extend([nx, nx, ny, ny, nz, nz]);
    let mut p = Vec::new();
    for c1 in 0..cells {
        for c2 in 0..cells {
            for x1 in 0..nx {
                for x2 in 0..nx {
                    let base = r[c1] * r[c2] * k[(c1 * cells + c2) * nx + x2] * tilde(c1, x1);
                    for y1 in 0..ny {
                        for y2 in 0..ny {
                            for z1 in 0..nz {
                                for z2 in 0..nz {
                                    p.push(
                                        base * ch.q_y()[x1][y1]
                                            * ch.q_y()[x2][y2]
                                            * ch.q_z()[x1][z1]
                                            * ch.q_z()[x2][z2],
                                    );
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let j = Dense { dims, p };
    // 0 U1, 1 V1, 2 W1, 3 U2, 4 V2, 5 W2, 6 X1, 7 X2, 8 Y1, 9 Y2, 10 Z1, 11 Z2
    let b01 = j.info(&[3, 5], &[8, 9, 0, 2], &[]);
    let b02 = j.info(&[4, 5], &[10, 11, 1, 2], &[]);
    let iuv = j.info(&[3], &[4], &[5]);
    [
        b01,
        b02,
        j.info(&[4], &[10, 11, 1, 2], &[5]) + b01 - iuv,
        j.info(&[3], &[8, 9, 0, 2], &[5]) + b02 - iuv,
        b01 + b02 - iuv,
    ]
}

#[test]
fn non_markov_two_letter_bounds_match_dense_oracle() {
    for seed in 0..3 {
        let ch = common::random_channel(40 + seed, 2, 2, 2);
        let input = TwoLetterInput::random([2, 2, 2], 2, seed, false).unwrap();
        assert!(input.markov_part().is_none());
        let b = two_letter_bounds(&input, &ch).unwrap().as_array();
        let o = two_letter_oracle(&input, &ch);
        for (x, y) in b.iter().zip(&o) {
            assert!((x - y).abs() <= 1e-9, "seed {seed}: {b:?} vs {o:?}");
        }
    }
}

#[test]
fn markov_two_letter_bounds_reduce() {
    let ch = BroadcastChannel::claim1();
    for seed in 0..5 {
        let input = TwoLetterInput::random([2, 2, 2], 2, seed, true).unwrap();
        let rep = two_letter_reduction_check(input.r_uvw(), &input.markov_part().unwrap(), &ch).unwrap();
        assert!(rep.passed, "{rep:?}");
        let o = two_letter_oracle(&input, &ch);
        for (x, y) in rep.single_letter.iter().zip(&o) {
            assert!((x - y).abs() <= 1e-9);
        }
    }
}

#[test]
fn marton_support_examples() {
    let bs = BroadcastChannel::new(bsc(0.3), bsc(0.2)).unwrap();
    let v = marton_support(&bs, &Direction::new(0.0, 1.0, 0.0).unwrap(), &opts(), &[]).unwrap().value;
    assert!((v - (1.0 - hb(0.3))).abs() < 1e-4, "{v}");
    assert!((v - 0.118709).abs() < 1e-4);
    let v = marton_support(&bs, &Direction::new(0.0, 0.0, 1.0).unwrap(), &opts(), &[]).unwrap().value;
    assert!((v - (1.0 - hb(0.2))).abs() < 1e-4, "{v}");
    let nl = BroadcastChannel::noiseless(2);
    let r = marton_support(&nl, &Direction::new(1.0, 0.0, 0.0).unwrap(), &opts(), &[]).unwrap();
    assert!((r.value - 1.0).abs() < 1e-3, "{r:?}");
}

#[test]
fn degraded_support_examples() {
    let bs = BroadcastChannel::new(bsc(0.3), bsc(0.2)).unwrap();
    let d1 = degraded_support_d1(&bs, 0.0, 1.0, &opts()).unwrap();
    assert!((d1.value - (1.0 - hb(0.2))).abs() < 1e-4, "{d1:?}");
    let d2 = degraded_support_d2(&bs, 0.0, 1.0, &opts()).unwrap();
    assert!((d2.value - (1.0 - hb(0.3))).abs() < 1e-4, "{d2:?}");
    // common message only: limited by the weaker receiver
    let d1 = degraded_support_d1(&bs, 1.0, 0.0, &opts()).unwrap();
    assert!((d1.value - (1.0 - hb(0.3))).abs() < 1e-4, "{d1:?}");
    let nl = BroadcastChannel::noiseless(2);
    assert!((degraded_support_d1(&nl, 1.0, 0.0, &opts()).unwrap().value - 1.0).abs() < 1e-4);
    let single = BroadcastChannel::new(vec![vec![0.3, 0.7]], vec![vec![1.0]]).unwrap();
    for (a, b) in [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0)] {
        assert!(degraded_support_d1(&single, a, b, &opts()).unwrap().value.abs() < 1e-12);
        assert!(degraded_support_d2(&single, a, b, &opts()).unwrap().value.abs() < 1e-12);
    }
}

#[test]
fn marton_dominates_degraded_and_scales() {
    for seed in 0..3 {
        let ch = common::random_channel(60 + seed, 2, 2, 2);
        let d = Direction::new(2.0, 1.0, 0.5).unwrap();
        let r = directional_optimality_check(&ch, &d, &opts(), 2e-3).unwrap();
        assert!(r.marton_support >= r.d1_support - 1e-6 && r.marton_support >= r.d2_support - 1e-6, "{r:?}");
        assert!(r.agree, "{r:?}");
        let small = Direction::new(1.0, 0.5, 0.25).unwrap();
        let s = marton_support(&ch, &small, &opts(), &[]).unwrap().value;
        let big = marton_support(&ch, &d, &opts(), &[]).unwrap().value;
        assert!((big - 2.0 * s).abs() < 1e-9, "{big} vs 2 * {s}");
    }
}

fn grid_max(c: &[f64; 3], b: &[f64; 5], steps: usize) -> f64 {
    let top = b.iter().fold(0.0f64, |m, v| m.max(*v));
    let mut best = f64::NEG_INFINITY;
    for i in 0..=steps {
        for j in 0..=steps {
            for k in 0..=steps {
                let r = [top * i as f64 / steps as f64, top * j as f64 / steps as f64, top * k as f64 / steps as f64];
                let ok = MARTON_ROWS
                    .iter()
                    .zip(b)
                    .all(|(row, bi)| row.iter().zip(&r).map(|(a, x)| a * x).sum::<f64>() <= bi + 1e-12);
                if ok {
                    best = best.max(c.iter().zip(&r).map(|(a, x)| a * x).sum());
                }
            }
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn vertex_lp_matches_grid(
        c in prop::array::uniform3(0.0f64..1.0),
        b in prop::array::uniform5(0.05f64..1.0),
    ) {
        prop_assume!(c.iter().any(|v| *v > 0.05));
        let rows: Vec<Vec<f64>> = MARTON_ROWS.iter().map(|r| r.to_vec()).collect();
        let (v, r) = lp_max(&c, &rows, &b).unwrap();
        let g = grid_max(&c, &b, 40);
        let top = b.iter().fold(0.0f64, |m, x| m.max(*x));
        prop_assert!(g <= v + 1e-9, "grid {g} above lp {v}");
        prop_assert!(v - g <= 3.0 * top / 40.0 * 3.0, "grid {g} far below lp {v}");
        prop_assert!(r.iter().all(|x| *x >= 0.0));
    }

    #[test]
    fn direction_normalization(l in prop::array::uniform3(0.0f64..5.0)) {
        prop_assume!(l.iter().any(|v| *v > 1e-6));
        let d = Direction::new(l[0], l[1], l[2]).unwrap();
        let m = d.l0.max(d.l1).max(d.l2);
        prop_assert!((m - 1.0).abs() < 1e-15);
        let raw = d.raw();
        for k in 0..3 {
            prop_assert!((raw[k] - l[k]).abs() <= 1e-12 * (1.0 + l[k]));
        }
    }
}
