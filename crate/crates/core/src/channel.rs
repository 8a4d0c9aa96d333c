//! Two-receiver broadcast channel model.
//!
//! A channel is stored through its two marginal kernels `q(y|x)` and
//! `q(z|x)`. Every quantity computed in this crate involves `Y` or `Z` but
//! never the pair `(Y, Z)`, so the joint kernel is marginalized on load.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probkit::SUM_TOL;

/// Entry-wise equality tolerance for comparing kernel rows.
pub const ROW_EQ_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BroadcastChannel {
    q_y: Vec<Vec<f64>>,
    q_z: Vec<Vec<f64>>,
}

/// Which kernel of a channel a diagnostic refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Side {
    Y,
    Z,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Y => f.write_str("q_y"),
            Side::Z => f.write_str("q_z"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ChannelIssue {
    Shape { side: Side, detail: String },
    RowSum { side: Side, row: usize, sum: f64 },
    Negative { side: Side, row: usize, col: usize, value: f64 },
    NotFinite { side: Side, row: usize, col: usize },
}

impl fmt::Display for ChannelIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelIssue::Shape { side, detail } => write!(f, "{side}: {detail}"),
            ChannelIssue::RowSum { side, row, sum } => {
                write!(f, "{side} row {row} sums to {sum}, expected 1")
            }
            ChannelIssue::Negative { side, row, col, value } => {
                write!(f, "{side} entry ({row},{col}) is negative ({value})")
            }
            ChannelIssue::NotFinite { side, row, col } => {
                write!(f, "{side} entry ({row},{col}) is not finite")
            }
        }
    }
}

fn check_kernel(side: Side, k: &[Vec<f64>], rows: usize, issues: &mut Vec<ChannelIssue>) {
    if k.len() != rows {
        issues.push(ChannelIssue::Shape {
            side,
            detail: format!("expected {rows} rows, got {}", k.len()),
        });
        return;
    }
    let width = k.first().map_or(0, Vec::len);
    if width == 0 {
        issues.push(ChannelIssue::Shape { side, detail: "empty output alphabet".into() });
        return;
    }
    for (r, row) in k.iter().enumerate() {
        if row.len() != width {
            issues.push(ChannelIssue::Shape {
                side,
                detail: format!("row {r} has {} entries, expected {width}", row.len()),
            });
            continue;
        }
        for (c, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                issues.push(ChannelIssue::NotFinite { side, row: r, col: c });
            } else if v < 0.0 {
                issues.push(ChannelIssue::Negative { side, row: r, col: c, value: v });
            }
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            issues.push(ChannelIssue::RowSum { side, row: r, sum });
        }
    }
}

fn issues_to_error(issues: Vec<ChannelIssue>) -> Error {
    let msg: Vec<String> = issues.iter().map(ToString::to_string).collect();
    Error::Validation(msg.join("; "))
}

impl BroadcastChannel {
    /// Validated construction.
    pub fn new(q_y: Vec<Vec<f64>>, q_z: Vec<Vec<f64>>) -> Result<Self> {
        let ch = Self { q_y, q_z };
        let issues = ch.validate();
        if issues.is_empty() {
            Ok(ch)
        } else {
            Err(issues_to_error(issues))
        }
    }

    /// Construction without validation; pair with [`BroadcastChannel::validate`].
    pub fn new_unchecked(q_y: Vec<Vec<f64>>, q_z: Vec<Vec<f64>>) -> Self {
        Self { q_y, q_z }
    }

    /// Row-sum, sign and shape problems, each naming its location.
    pub fn validate(&self) -> Vec<ChannelIssue> {
        let mut issues = Vec::new();
        let rows = self.q_y.len();
        if rows == 0 {
            issues.push(ChannelIssue::Shape { side: Side::Y, detail: "empty input alphabet".into() });
            return issues;
        }
        check_kernel(Side::Y, &self.q_y, rows, &mut issues);
        check_kernel(Side::Z, &self.q_z, rows, &mut issues);
        issues
    }

    /// Binary-symmetric-then-erasure-like channel used for the degraded
    /// counterexample: `Y = BSC(0.3)(X)` and `Z` a Z-channel applied to `Y`.
    pub fn claim1() -> Self {
        let bsc = vec![vec![0.7, 0.3], vec![0.3, 0.7]];
        let z_given_y = vec![vec![0.6, 0.4], vec![0.0, 1.0]];
        compose_degraded(&bsc, &z_given_y).expect("built-in channel is well formed")
    }

    /// Both receivers see the input noiselessly.
    pub fn noiseless(n: usize) -> Self {
        let id: Vec<Vec<f64>> =
            (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        Self { q_y: id.clone(), q_z: id }
    }

    pub fn x_size(&self) -> usize {
        self.q_y.len()
    }

    pub fn y_size(&self) -> usize {
        self.q_y[0].len()
    }

    pub fn z_size(&self) -> usize {
        self.q_z[0].len()
    }

    pub fn q_y(&self) -> &[Vec<f64>] {
        &self.q_y
    }

    pub fn q_z(&self) -> &[Vec<f64>] {
        &self.q_z
    }

    pub fn kernel(&self, side: Side) -> &[Vec<f64>] {
        match side {
            Side::Y => &self.q_y,
            Side::Z => &self.q_z,
        }
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.q_y.iter().chain(&self.q_z).flatten().all(|&v| v > 0.0)
    }

    /// Whether no two inputs are indistinguishable at both receivers.
    pub fn is_irreducible(&self) -> bool {
        let same = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(p, q)| (p - q).abs() <= ROW_EQ_TOL);
        let n = self.x_size();
        for a in 0..n {
            for b in a + 1..n {
                if same(&self.q_y[a], &self.q_y[b]) && same(&self.q_z[a], &self.q_z[b]) {
                    return false;
                }
            }
        }
        true
    }

    /// Mixes every kernel row with the uniform law: `(1-delta) r + delta u`.
    pub fn smooth(&self, delta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::Usage(format!("smoothing delta {delta} outside [0,1)")));
        }
        let mix = |k: &[Vec<f64>]| -> Vec<Vec<f64>> {
            k.iter()
                .map(|row| {
                    let u = delta / row.len() as f64;
                    row.iter().map(|v| (1.0 - delta) * v + u).collect()
                })
                .collect()
        };
        Ok(Self { q_y: mix(&self.q_y), q_z: mix(&self.q_z) })
    }

    /// Relabels inputs: new input `i` behaves like old input `perm[i]`.
    pub fn permute_inputs(&self, perm: &[usize]) -> Self {
        Self {
            q_y: perm.iter().map(|&i| self.q_y[i].clone()).collect(),
            q_z: perm.iter().map(|&i| self.q_z[i].clone()).collect(),
        }
    }

    /// The channel with the two receivers exchanged.
    pub fn swapped(&self) -> Self {
        Self { q_y: self.q_z.clone(), q_z: self.q_y.clone() }
    }
}

/// `X -> Y -> Z`: keeps `q_y` and sets `q_z = q_y * p(z|y)`.
pub fn compose_degraded(q_y: &[Vec<f64>], z_given_y: &[Vec<f64>]) -> Result<BroadcastChannel> {
    let y_size = q_y.first().map_or(0, Vec::len);
    if y_size == 0 || z_given_y.len() != y_size {
        return Err(Error::Usage(format!(
            "dimension mismatch: q_y has {y_size} outputs, p(z|y) has {} rows",
            z_given_y.len()
        )));
    }
    let z_size = z_given_y[0].len();
    if z_given_y.iter().any(|r| r.len() != z_size) || q_y.iter().any(|r| r.len() != y_size) {
        return Err(Error::Usage("ragged kernel".into()));
    }
    let mut issues = Vec::new();
    check_kernel(Side::Y, q_y, q_y.len(), &mut issues);
    check_kernel(Side::Z, z_given_y, y_size, &mut issues);
    if !issues.is_empty() {
        return Err(issues_to_error(issues));
    }
    let q_z = q_y
        .iter()
        .map(|row| {
            (0..z_size).map(|z| row.iter().zip(z_given_y).map(|(p, k)| p * k[z]).sum()).collect()
        })
        .collect();
    BroadcastChannel::new(q_y.to_vec(), q_z)
}

/// On-disk channel description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelFile {
    pub x_size: usize,
    pub y_size: usize,
    pub z_size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_y: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_z: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_yz: Option<Vec<Vec<Vec<f64>>>>,
}

impl ChannelFile {
    pub fn from_channel(ch: &BroadcastChannel) -> Self {
        Self {
            x_size: ch.x_size(),
            y_size: ch.y_size(),
            z_size: ch.z_size(),
            q_y: Some(ch.q_y.clone()),
            q_z: Some(ch.q_z.clone()),
            q_yz: None,
        }
    }

    pub fn into_channel(self) -> Result<BroadcastChannel> {
        let (q_y, q_z) = match (self.q_y, self.q_z, self.q_yz) {
            (Some(q_y), Some(q_z), None) => (q_y, q_z),
            (None, None, Some(q_yz)) => {
                if q_yz.len() != self.x_size {
                    return Err(Error::Validation(format!(
                        "q_yz has {} input slices, expected {}",
                        q_yz.len(),
                        self.x_size
                    )));
                }
                let mut q_y = Vec::with_capacity(self.x_size);
                let mut q_z = Vec::with_capacity(self.x_size);
                for (x, slice) in q_yz.iter().enumerate() {
                    if slice.len() != self.y_size || slice.iter().any(|r| r.len() != self.z_size) {
                        return Err(Error::Validation(format!(
                            "q_yz slice {x} is not {}x{}",
                            self.y_size, self.z_size
                        )));
                    }
                    q_y.push(slice.iter().map(|r| r.iter().sum()).collect());
                    q_z.push((0..self.z_size).map(|z| slice.iter().map(|r| r[z]).sum()).collect());
                }
                (q_y, q_z)
            }
            _ => {
                return Err(Error::Validation(
                    "channel file needs either q_y and q_z, or q_yz".into(),
                ))
            }
        };
        let ch = BroadcastChannel::new_unchecked(q_y, q_z);
        let mut issues = ch.validate();
        if issues.is_empty() {
            if ch.x_size() != self.x_size {
                issues.push(ChannelIssue::Shape { side: Side::Y, detail: "x_size mismatch".into() });
            }
            if ch.y_size() != self.y_size {
                issues.push(ChannelIssue::Shape { side: Side::Y, detail: "y_size mismatch".into() });
            }
            if ch.z_size() != self.z_size {
                issues.push(ChannelIssue::Shape { side: Side::Z, detail: "z_size mismatch".into() });
            }
        }
        if issues.is_empty() {
            Ok(ch)
        } else {
            Err(issues_to_error(issues))
        }
    }
}

pub fn parse_channel_json(text: &str) -> Result<BroadcastChannel> {
    let file: ChannelFile = serde_json::from_str(text)
        .map_err(|e| Error::Validation(format!("malformed channel file: {e}")))?;
    file.into_channel()
}

/// Resolves a built-in name (`claim1`, `noiseless2`, `noiseless3`) or a
/// path to a channel JSON file.
pub fn load_channel(source: &str) -> Result<BroadcastChannel> {
    match source {
        "claim1" => return Ok(BroadcastChannel::claim1()),
        "noiseless2" => return Ok(BroadcastChannel::noiseless(2)),
        "noiseless3" => return Ok(BroadcastChannel::noiseless(3)),
        _ => {}
    }
    let path = Path::new(source);
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Validation(format!("cannot read channel file {source}: {e}")))?;
    parse_channel_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bsc(e: f64) -> Vec<Vec<f64>> {
        vec![vec![1.0 - e, e], vec![e, 1.0 - e]]
    }

    #[test]
    fn claim1_channel_is_well_formed() {
        let ch = BroadcastChannel::claim1();
        assert!(ch.validate().is_empty());
        assert!(ch.is_irreducible());
        let expect = [[0.42, 0.58], [0.18, 0.82]];
        for x in 0..2 {
            for z in 0..2 {
                assert!((ch.q_z()[x][z] - expect[x][z]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn validate_names_location() {
        let ch = BroadcastChannel::new_unchecked(vec![vec![0.5, 0.4], vec![0.5, 0.5]], bsc(0.1));
        let issues = ch.validate();
        assert_eq!(issues.len(), 1);
        assert!(matches!(issues[0], ChannelIssue::RowSum { side: Side::Y, row: 0, .. }));
        assert!(issues[0].to_string().contains("row 0"));

        let ch = BroadcastChannel::new_unchecked(bsc(0.1), vec![vec![1.1, -0.1], vec![0.5, 0.5]]);
        let issues = ch.validate();
        assert_eq!(
            issues,
            vec![ChannelIssue::Negative { side: Side::Z, row: 0, col: 1, value: -0.1 }]
        );
    }

    #[test]
    fn irreducibility() {
        let dup = BroadcastChannel::new(
            vec![vec![0.2, 0.8], vec![0.2, 0.8], vec![0.9, 0.1]],
            vec![vec![0.5, 0.5], vec![0.5, 0.5], vec![0.1, 0.9]],
        )
        .unwrap();
        assert!(!dup.is_irreducible());
        // same Y law but different Z law is still distinguishable
        let half = BroadcastChannel::new(
            vec![vec![0.2, 0.8], vec![0.2, 0.8]],
            vec![vec![0.5, 0.5], vec![0.4, 0.6]],
        )
        .unwrap();
        assert!(half.is_irreducible());
        let single = BroadcastChannel::new(vec![vec![1.0]], vec![vec![0.3, 0.7]]).unwrap();
        assert!(single.is_irreducible());
    }

    #[test]
    fn compose_examples() {
        let id = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let ch = compose_degraded(&id, &id).unwrap();
        assert_eq!(ch.q_z(), &id[..]);
        let constant = vec![vec![0.25, 0.75], vec![0.25, 0.75]];
        let ch = compose_degraded(&bsc(0.2), &constant).unwrap();
        assert_eq!(ch.q_z()[0], ch.q_z()[1]);
        assert!(matches!(
            compose_degraded(&bsc(0.2), &[vec![1.0]]),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn smoothing() {
        let ch = BroadcastChannel::claim1();
        assert_eq!(ch.smooth(0.0).unwrap(), ch);
        let s = ch.smooth(0.01).unwrap();
        assert!((s.q_z()[1][0] - 0.1832).abs() < 1e-12);
        assert!(s.validate().is_empty());
        assert!(ch.smooth(1.0).is_err());
        assert!(ch.smooth(-0.1).is_err());
        let noiseless = BroadcastChannel::noiseless(3).smooth(0.03).unwrap();
        assert!(noiseless.q_y().iter().flatten().all(|&v| v >= 0.01 - 1e-15));
    }

    #[test]
    fn joint_kernel_is_marginalized() {
        let text = r#"{"x_size":2,"y_size":2,"z_size":2,
            "q_yz":[[[0.5,0.2],[0.1,0.2]],[[0.0,0.3],[0.3,0.4]]]}"#;
        let ch = parse_channel_json(text).unwrap();
        assert!((ch.q_y()[0][0] - 0.7).abs() < 1e-12);
        assert!((ch.q_z()[1][1] - 0.7).abs() < 1e-12);
    }

    #[test]
    fn malformed_file_names_row() {
        let text = r#"{"x_size":2,"y_size":2,"z_size":2,
            "q_y":[[0.5,0.5],[0.6,0.3]],"q_z":[[1,0],[0,1]]}"#;
        let err = parse_channel_json(text).unwrap_err();
        assert!(err.to_string().contains("q_y row 1"), "{err}");
        assert_eq!(err.exit_code(), 2);
        assert!(parse_channel_json("{").is_err());
        assert!(load_channel("claim1").is_ok());
    }
}
