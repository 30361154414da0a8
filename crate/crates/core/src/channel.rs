//! Channel-strength matrices, the delta aggregates, the SLS-optimality
//! condition checker and the transpose (dual) channel.
//!
//! Indices are 0-based in code; reports and text output are 1-based.

use std::fmt;

use itertools::Itertools;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{format_rational, int, positive_part, Rational, Q};

/// Antenna-relabeling search is exhaustive up to this many antennas.
pub const MAX_RELABEL_ANTENNAS: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChannelError {
    #[error("need at least 2 users, got {0}")]
    TooFewUsers(usize),
    #[error("need at least 1 antenna, got {0}")]
    NoAntennas(usize),
    #[error("row {row} has {found} entries, expected {expected}")]
    Ragged { row: usize, expected: usize, found: usize },
    #[error("alpha[{row}][{col}] = {value} is negative")]
    Negative { row: usize, col: usize, value: String },
    #[error("declared {field} = {declared} but alpha has {actual}")]
    DeclaredShape {
        field: &'static str,
        declared: usize,
        actual: usize,
    },
    #[error("operation needs K = {expected} users, channel has {found}")]
    WrongUserCount { expected: usize, found: usize },
    #[error("operation needs at least {expected} antennas, channel has {found}")]
    TooFewAntennas { expected: usize, found: usize },
    #[error("dual needs a square channel, got {k}x{m}")]
    NotSquare { k: usize, m: usize },
}

/// K×M grid of nonnegative strength exponents: link (k, m) has strength `P^alpha[k][m]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChannelMatrix {
    alpha: Vec<Vec<Rational>>,
}

impl ChannelMatrix {
    pub fn new(alpha: Vec<Vec<Rational>>) -> Result<Self, ChannelError> {
        let k = alpha.len();
        if k < 2 {
            return Err(ChannelError::TooFewUsers(k));
        }
        let m = alpha[0].len();
        if m < 1 {
            return Err(ChannelError::NoAntennas(m));
        }
        for (r, row) in alpha.iter().enumerate() {
            if row.len() != m {
                return Err(ChannelError::Ragged {
                    row: r,
                    expected: m,
                    found: row.len(),
                });
            }
            for (c, v) in row.iter().enumerate() {
                if *v < Rational::zero() {
                    return Err(ChannelError::Negative {
                        row: r,
                        col: c,
                        value: format_rational(v),
                    });
                }
            }
        }
        Ok(ChannelMatrix { alpha })
    }

    /// Builds from a literal grid of `(numerator, denominator)` pairs.
    pub fn from_ratios(grid: &[&[(i64, i64)]]) -> Result<Self, ChannelError> {
        Self::new(
            grid.iter()
                .map(|row| row.iter().map(|&(n, d)| crate::rational::ratio(n, d)).collect())
                .collect(),
        )
    }

    pub fn users(&self) -> usize {
        self.alpha.len()
    }

    pub fn antennas(&self) -> usize {
        self.alpha[0].len()
    }

    pub fn alpha(&self, k: usize, m: usize) -> &Rational {
        &self.alpha[k][m]
    }

    pub fn grid(&self) -> &[Vec<Rational>] {
        &self.alpha
    }

    pub fn require_users(&self, k: usize) -> Result<(), ChannelError> {
        if self.users() != k {
            return Err(ChannelError::WrongUserCount {
                expected: k,
                found: self.users(),
            });
        }
        Ok(())
    }

    pub fn require_antennas(&self, m: usize) -> Result<(), ChannelError> {
        if self.antennas() < m {
            return Err(ChannelError::TooFewAntennas {
                expected: m,
                found: self.antennas(),
            });
        }
        Ok(())
    }

    /// Reorders antenna columns: new column `j` is old column `perm[j]`.
    pub fn permute_antennas(&self, perm: &[usize]) -> ChannelMatrix {
        ChannelMatrix {
            alpha: self
                .alpha
                .iter()
                .map(|row| perm.iter().map(|&p| row[p].clone()).collect())
                .collect(),
        }
    }

    /// Relabels users and the matching antennas jointly:
    /// `alpha'[a][b] = alpha[perm[a]][perm[b]]` on the leading square block.
    pub fn relabel_users(&self, perm: &[usize]) -> ChannelMatrix {
        let k = self.users();
        debug_assert_eq!(perm.len(), k);
        let mut cols: Vec<usize> = perm.to_vec();
        cols.extend(k..self.antennas());
        ChannelMatrix {
            alpha: perm
                .iter()
                .map(|&a| cols.iter().map(|&b| self.alpha[a][b].clone()).collect())
                .collect(),
        }
    }

    /// The leading 3×3 block, used by the three-user achievable schemes.
    pub fn leading_block(&self, n: usize) -> ChannelMatrix {
        ChannelMatrix {
            alpha: self.alpha[..n].iter().map(|r| r[..n].to_vec()).collect(),
        }
    }

    /// Largest off-diagonal entry of the leading 3×3 block.
    pub fn max_cross(&self) -> Rational {
        let mut best = Rational::zero();
        for l in 0..3 {
            for m in 0..3 {
                if l != m && self.alpha[l][m] > best {
                    best = self.alpha[l][m].clone();
                }
            }
        }
        best
    }

    pub fn max_entry(&self) -> Rational {
        self.alpha.iter().flatten().max().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn to_json(&self) -> ChannelJson {
        ChannelJson {
            k: self.users(),
            m: self.antennas(),
            alpha: self
                .alpha
                .iter()
                .map(|r| r.iter().cloned().map(Q).collect())
                .collect(),
        }
    }

    pub fn from_json(j: &ChannelJson) -> Result<Self, ChannelError> {
        let ch = Self::new(j.alpha.iter().map(|r| r.iter().map(|q| q.0.clone()).collect()).collect())?;
        if j.k != ch.users() {
            return Err(ChannelError::DeclaredShape {
                field: "K",
                declared: j.k,
                actual: ch.users(),
            });
        }
        if j.m != ch.antennas() {
            return Err(ChannelError::DeclaredShape {
                field: "M",
                declared: j.m,
                actual: ch.antennas(),
            });
        }
        Ok(ch)
    }
}

impl fmt::Display for ChannelMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.alpha {
            let cells: Vec<String> = row.iter().map(format_rational).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

/// Wire format: `{"K", "M", "alpha": [["p/q", ...], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelJson {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub alpha: Vec<Vec<Q>>,
}

impl Serialize for ChannelMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ChannelMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = ChannelJson::deserialize(d)?;
        ChannelMatrix::from_json(&j).map_err(serde::de::Error::custom)
    }
}

/// `delta_i[i] = max_m alpha[i][m]`, `delta_ij[i][j] = max_m (alpha[i][m] - alpha[j][m])⁺`,
/// and for three users the sum-bound value `delta3`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaSet {
    pub delta_i: Vec<Rational>,
    pub delta_ij: Vec<Vec<Rational>>,
    pub delta3: Option<Rational>,
}

impl DeltaSet {
    pub fn single(&self, i: usize) -> &Rational {
        &self.delta_i[i]
    }

    pub fn pair(&self, i: usize, j: usize) -> &Rational {
        &self.delta_ij[i][j]
    }

    /// The two branches of the three-user sum bound for user order `(i, j, k)`:
    /// the chain `delta_i + delta_ji + delta_kj` and the halved six-term sum.
    pub fn sum_branches(&self, i: usize, j: usize, k: usize) -> (Rational, Rational) {
        let chain = &self.delta_i[i] + &self.delta_ij[j][i] + &self.delta_ij[k][j];
        let half = (&self.delta_i[i]
            + &self.delta_i[k]
            + &self.delta_ij[i][j]
            + &self.delta_ij[j][i]
            + &self.delta_ij[j][k]
            + &self.delta_ij[k][i])
            / int(2);
        (chain, half)
    }
}

pub fn compute_deltas(ch: &ChannelMatrix) -> DeltaSet {
    let k = ch.users();
    let delta_i: Vec<Rational> = ch
        .grid()
        .iter()
        .map(|r| r.iter().max().cloned().expect("nonempty row"))
        .collect();
    let mut delta_ij = vec![vec![Rational::zero(); k]; k];
    for i in 0..k {
        for j in 0..k {
            if i == j {
                continue;
            }
            delta_ij[i][j] = (0..ch.antennas())
                .map(|m| positive_part(ch.alpha(i, m) - ch.alpha(j, m)))
                .max()
                .expect("at least one antenna");
        }
    }
    let mut ds = DeltaSet {
        delta_i,
        delta_ij,
        delta3: None,
    };
    if k == 3 {
        let mut best: Option<Rational> = None;
        for p in (0..3).permutations(3) {
            let (a, b) = ds.sum_branches(p[0], p[1], p[2]);
            let v = a.min(b);
            best = Some(match best {
                Some(x) if x <= v => x,
                _ => v,
            });
        }
        ds.delta3 = best;
    }
    ds
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConditionRule {
    /// `max(alpha_im, alpha_ki) ≤ alpha_ii`
    #[serde(rename = "con1")]
    DiagonalDominance,
    /// `alpha_ki + alpha_im ≤ alpha_ii + alpha_km`
    #[serde(rename = "con")]
    CrossSum,
}

impl fmt::Display for ConditionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConditionRule::DiagonalDominance => f.write_str("max(a_im, a_ki) <= a_ii"),
            ConditionRule::CrossSum => f.write_str("a_ki + a_im <= a_ii + a_km"),
        }
    }
}

/// One failed instance of a condition, with 1-based indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: ConditionRule,
    pub i: usize,
    pub k: usize,
    pub m: usize,
    pub lhs: Q,
    pub rhs: Q,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub satisfied: bool,
    /// Antenna order (1-based old column per new column) under which the conditions hold.
    pub witness_permutation: Option<Vec<usize>>,
    pub identity_satisfied: bool,
    /// Violations under the identity labeling.
    pub violations: Vec<Violation>,
    /// Set when M exceeds the exhaustive relabeling cap.
    pub identity_only: bool,
}

impl ConditionReport {
    /// 0-based antenna permutation of the witness.
    pub fn witness(&self) -> Option<Vec<usize>> {
        self.witness_permutation
            .as_ref()
            .map(|w| w.iter().map(|&x| x - 1).collect())
    }
}

fn violations(ch: &ChannelMatrix) -> Vec<Violation> {
    let mut out = Vec::new();
    for i in 0..3 {
        for k in 0..3 {
            for m in 0..ch.antennas() {
                let a_ii = ch.alpha(i, i);
                let lhs = ch.alpha(i, m).max(ch.alpha(k, i)).clone();
                if lhs > *a_ii {
                    out.push(Violation {
                        rule: ConditionRule::DiagonalDominance,
                        i: i + 1,
                        k: k + 1,
                        m: m + 1,
                        lhs: Q(lhs),
                        rhs: Q(a_ii.clone()),
                    });
                }
                let lhs = ch.alpha(k, i) + ch.alpha(i, m);
                let rhs = a_ii + ch.alpha(k, m);
                if lhs > rhs {
                    out.push(Violation {
                        rule: ConditionRule::CrossSum,
                        i: i + 1,
                        k: k + 1,
                        m: m + 1,
                        lhs: Q(lhs),
                        rhs: Q(rhs),
                    });
                }
            }
        }
    }
    out
}

/// Both conditions with the antennas in their given order.
pub fn conditions_hold(ch: &ChannelMatrix) -> bool {
    for i in 0..3 {
        let a_ii = ch.alpha(i, i);
        for k in 0..3 {
            for m in 0..ch.antennas() {
                if ch.alpha(i, m) > a_ii || ch.alpha(k, i) > a_ii {
                    return false;
                }
                if ch.alpha(k, i) + ch.alpha(i, m) > a_ii + ch.alpha(k, m) {
                    return false;
                }
            }
        }
    }
    true
}

/// Checks the SLS-optimality conditions for a three-user channel with at
/// least three antennas, retrying every antenna order when the identity
/// labeling fails and `M ≤ 6`.
pub fn check_sls_conditions(ch: &ChannelMatrix) -> Result<ConditionReport, ChannelError> {
    ch.require_users(3)?;
    ch.require_antennas(3)?;
    let v = violations(ch);
    let identity_satisfied = v.is_empty();
    let identity_only = ch.antennas() > MAX_RELABEL_ANTENNAS;
    let mut witness = None;
    if identity_satisfied {
        witness = Some((0..ch.antennas()).collect::<Vec<_>>());
    } else if !identity_only {
        witness = (0..ch.antennas())
            .permutations(ch.antennas())
            .find(|p| conditions_hold(&ch.permute_antennas(p)));
    }
    Ok(ConditionReport {
        satisfied: witness.is_some(),
        witness_permutation: witness.map(|w| w.into_iter().map(|x| x + 1).collect()),
        identity_satisfied,
        violations: v,
        identity_only,
    })
}

/// The transpose channel, with transmit and receive roles exchanged.
pub fn dual(ch: &ChannelMatrix) -> Result<ChannelMatrix, ChannelError> {
    let (k, m) = (ch.users(), ch.antennas());
    if k != m {
        return Err(ChannelError::NotSquare { k, m });
    }
    Ok(ChannelMatrix {
        alpha: (0..m).map(|j| (0..k).map(|i| ch.alpha(i, j).clone()).collect()).collect(),
    })
}

/// Cyclic `(1, a, b)` channel: unit diagonal, `alpha12 = alpha23 = alpha31 = a`,
/// `alpha13 = alpha21 = alpha32 = b`.
pub fn cyclic_channel(a: &Rational, b: &Rational) -> Result<ChannelMatrix, ChannelError> {
    let one = int(1);
    ChannelMatrix::new(vec![
        vec![one.clone(), a.clone(), b.clone()],
        vec![b.clone(), one.clone(), a.clone()],
        vec![a.clone(), b.clone(), one],
    ])
}

/// The closed-form regime `0 ≤ a ≤ b ≤ 1`, `b − a ≤ 1 − b` of the cyclic channel.
pub fn in_cyclic_regime(a: &Rational, b: &Rational) -> bool {
    let zero = Rational::zero();
    let one = int(1);
    *a >= zero && a <= b && *b <= one && (b - a) <= (&one - b)
}

/// Treating interference as noise is optimal in the companion three-user
/// interference channel: `max_{j≠i} alpha_ij + max_{k≠i} alpha_ki ≤ alpha_ii`.
pub fn tin_optimal_ic(ch: &ChannelMatrix) -> Result<bool, ChannelError> {
    ch.require_users(3)?;
    ch.require_antennas(3)?;
    Ok((0..3).all(|i| {
        let out = (0..3).filter(|&j| j != i).map(|j| ch.alpha(i, j)).max().expect("two others");
        let inn = (0..3).filter(|&k| k != i).map(|k| ch.alpha(k, i)).max().expect("two others");
        out + inn <= *ch.alpha(i, i)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{parse_rational, ratio};

    pub(crate) fn sample() -> ChannelMatrix {
        ChannelMatrix::from_ratios(&[
            &[(6, 5), (11, 10), (9, 10)],
            &[(9, 10), (13, 10), (7, 10)],
            &[(7, 10), (9, 10), (1, 1)],
        ])
        .unwrap()
    }

    fn r(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn sample_deltas() {
        let d = compute_deltas(&sample());
        assert_eq!(d.delta_i, vec![r("1.2"), r("1.3"), r("1")]);
        assert_eq!(d.pair(1, 0), &r("0.2"));
        assert_eq!(d.pair(2, 1), &r("0.3"));
        assert_eq!(d.pair(0, 1), &r("0.3"));
        assert_eq!(d.pair(2, 0), &r("0.1"));
        assert_eq!(d.pair(1, 2), &r("0.4"));
        assert_eq!(d.pair(0, 2), &r("0.5"));
        assert_eq!(d.delta3, Some(r("1.6")));
    }

    #[test]
    fn zero_and_two_user_deltas() {
        let z = ChannelMatrix::new(vec![vec![int(0); 3]; 3]).unwrap();
        let d = compute_deltas(&z);
        assert!(d.delta_i.iter().all(Zero::is_zero));
        assert_eq!(d.delta3, Some(int(0)));
        let mut a = vec![vec![int(0); 3]; 3];
        a[0][1] = int(1);
        a[1][0] = int(2);
        let d = compute_deltas(&ChannelMatrix::new(a).unwrap());
        assert_eq!(d.delta_i, vec![int(1), int(2), int(0)]);
        assert_eq!(d.pair(1, 0), &int(2));
        assert_eq!(d.pair(0, 1), &int(1));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            ChannelMatrix::new(vec![vec![int(1)], vec![int(-1)]]),
            Err(ChannelError::Negative { row: 1, col: 0, .. })
        ));
        assert!(ChannelMatrix::new(vec![vec![int(1)]]).is_err());
        assert!(ChannelMatrix::new(vec![vec![int(1), int(1)], vec![int(1)]]).is_err());
    }

    #[test]
    fn conditions_sample_and_cyclic() {
        let rep = check_sls_conditions(&sample()).unwrap();
        assert!(rep.satisfied && rep.identity_satisfied);
        assert_eq!(rep.witness_permutation, Some(vec![1, 2, 3]));

        let c = cyclic_channel(&int(2), &int(2)).unwrap();
        let rep = check_sls_conditions(&c).unwrap();
        assert!(!rep.satisfied);
        assert!(rep.violations.iter().any(|v| v.rule == ConditionRule::CrossSum));
        for v in &rep.violations {
            assert!(v.lhs.0 > v.rhs.0);
        }

        let z = ChannelMatrix::new(vec![vec![int(0); 3]; 3]).unwrap();
        assert!(check_sls_conditions(&z).unwrap().satisfied);
    }

    #[test]
    fn relabeling_finds_witness() {
        // The sample channel with antenna columns rotated: identity fails, a relabeling restores it.
        let ch = sample().permute_antennas(&[1, 2, 0]);
        let rep = check_sls_conditions(&ch).unwrap();
        assert!(!rep.identity_satisfied);
        assert!(rep.satisfied);
        let w = rep.witness().unwrap();
        assert_eq!(ch.permute_antennas(&w), sample());
    }

    #[test]
    fn dual_examples() {
        let d = dual(&sample()).unwrap();
        let want = ChannelMatrix::from_ratios(&[
            &[(6, 5), (9, 10), (7, 10)],
            &[(11, 10), (13, 10), (9, 10)],
            &[(9, 10), (7, 10), (1, 1)],
        ])
        .unwrap();
        assert_eq!(d, want);
        assert_eq!(dual(&d).unwrap(), sample());
        let mut a = vec![vec![int(0); 3]; 3];
        a[0][1] = int(1);
        a[1][0] = int(2);
        let d = dual(&ChannelMatrix::new(a).unwrap()).unwrap();
        assert_eq!(d.alpha(0, 1), &int(2));
        assert_eq!(d.alpha(1, 0), &int(1));
        assert!(dual(&ChannelMatrix::new(vec![vec![int(0); 3]; 2]).unwrap()).is_err());
    }

    #[test]
    fn cyclic_examples() {
        let c = cyclic_channel(&int(0), &int(0)).unwrap();
        assert_eq!(c, ChannelMatrix::new(vec![
            vec![int(1), int(0), int(0)],
            vec![int(0), int(1), int(0)],
            vec![int(0), int(0), int(1)],
        ]).unwrap());
        assert!(in_cyclic_regime(&ratio(1, 2), &ratio(3, 4)));
        assert!(!in_cyclic_regime(&ratio(3, 4), &ratio(1, 2)));
        assert!(tin_optimal_ic(&cyclic_channel(&r("0.2"), &r("0.3")).unwrap()).unwrap());
        let c = cyclic_channel(&r("0.5"), &r("0.75")).unwrap();
        assert!(!tin_optimal_ic(&c).unwrap());
        assert!(check_sls_conditions(&c).unwrap().satisfied);
    }

    #[test]
    fn json_round_trip() {
        let s = serde_json::to_string(&sample()).unwrap();
        assert!(s.starts_with(r#"{"K":3,"M":3,"alpha":[["6/5","11/10","9/10"]"#));
        let back: ChannelMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, sample());
        let bad = r#"{"K":3,"M":3,"alpha":[["1","-1","0"],["0","1","0"],["0","0","1"]]}"#;
        assert!(serde_json::from_str::<ChannelMatrix>(bad).is_err());
        let decimals = r#"{"K":2,"M":2,"alpha":[[1.2, 0.5],["3/4", 1]]}"#;
        let ch: ChannelMatrix = serde_json::from_str(decimals).unwrap();
        assert_eq!(ch.alpha(0, 0), &ratio(6, 5));
    }

    mod props {
        use super::super::*;
        use crate::testgen::{channel, conforming_channel, sixteenths};
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(1000))]

            #[test]
            fn pair_deltas_bounded_below(ch in channel(32)) {
                let d = compute_deltas(&ch);
                for i in 0..3 {
                    for j in (0..3).filter(|&j| j != i) {
                        prop_assert!(*d.pair(i, j) >= ch.alpha(i, i) - ch.alpha(j, i));
                    }
                }
            }

            #[test]
            fn pair_deltas_exact_under_conditions(ch in conforming_channel()) {
                let d = compute_deltas(&ch);
                for i in 0..3 {
                    for j in (0..3).filter(|&j| j != i) {
                        prop_assert_eq!(d.pair(i, j), &(ch.alpha(i, i) - ch.alpha(j, i)));
                    }
                }
            }

            #[test]
            fn dual_involution(ch in channel(32)) {
                prop_assert_eq!(dual(&dual(&ch).unwrap()).unwrap(), ch);
            }

            #[test]
            fn conditions_survive_transpose(ch in conforming_channel()) {
                prop_assert!(check_sls_conditions(&dual(&ch).unwrap()).unwrap().satisfied);
            }

            #[test]
            fn tin_implies_sls_on_cyclic(a in sixteenths(20), b in sixteenths(20)) {
                let ch = cyclic_channel(&a, &b).unwrap();
                if tin_optimal_ic(&ch).unwrap() {
                    prop_assert!(conditions_hold(&ch));
                }
            }
        }
    }
}
