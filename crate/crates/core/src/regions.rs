//! Three-user GDoF regions: the outer bound, the cyclic closed form, the
//! twelve layered-superposition achievable regions, and the verdict that
//! locates the achievable region matching the outer bound.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{check_sls_conditions, compute_deltas, in_cyclic_regime, ChannelError, ChannelMatrix, ConditionReport};
use crate::polytope::{poly_equal, LinearInequality, Polytope, PolytopeError};
use crate::rational::{format_rational, int, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegionError {
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
    #[error("(a, b) = ({a}, {b}) is outside the regime 0 <= a <= b <= 1, b - a <= 1 - b")]
    OutsideCyclicRegime { a: String, b: String },
    #[error("order must be a permutation of (1, 2, 3)")]
    BadOrder,
}

/// Which antenna carries the attenuated copy in the layered scheme:
/// antenna 1 for `D`, antenna 2 for `F`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "D123", alias = "D")]
    D,
    #[serde(rename = "F123", alias = "F")]
    F,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::D => "D123",
            Variant::F => "F123",
        })
    }
}

/// One of the twelve achievable parts, e.g. `D213`. The order is 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartLabel {
    pub variant: Variant,
    pub order: [usize; 3],
}

impl PartLabel {
    pub fn all() -> Vec<PartLabel> {
        let mut out = Vec::new();
        for variant in [Variant::D, Variant::F] {
            for p in (0..3).permutations(3) {
                out.push(PartLabel {
                    variant,
                    order: [p[0], p[1], p[2]],
                });
            }
        }
        out
    }
}

impl fmt::Display for PartLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = match self.variant {
            Variant::D => 'D',
            Variant::F => 'F',
        };
        write!(f, "{v}{}{}{}", self.order[0] + 1, self.order[1] + 1, self.order[2] + 1)
    }
}

impl FromStr for PartLabel {
    type Err = RegionError;
    fn from_str(s: &str) -> Result<Self, RegionError> {
        let mut chars = s.chars();
        let variant = match chars.next() {
            Some('D') => Variant::D,
            Some('F') => Variant::F,
            _ => return Err(RegionError::BadOrder),
        };
        let digits: Vec<usize> = chars
            .map(|c| c.to_digit(10).map(|d| d as usize))
            .collect::<Option<Vec<_>>>()
            .ok_or(RegionError::BadOrder)?;
        let order = check_order(&digits.iter().map(|d| d.wrapping_sub(1)).collect::<Vec<_>>())?;
        Ok(PartLabel { variant, order })
    }
}

impl Serialize for PartLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PartLabel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn check_order(order: &[usize]) -> Result<[usize; 3], RegionError> {
    if order.len() != 3 {
        return Err(RegionError::BadOrder);
    }
    let mut seen = [false; 3];
    for &o in order {
        if o >= 3 || seen[o] {
            return Err(RegionError::BadOrder);
        }
        seen[o] = true;
    }
    Ok([order[0], order[1], order[2]])
}

fn unit(idx: &[usize]) -> Vec<Rational> {
    let mut c = vec![Rational::from_integer(0.into()); 3];
    for &i in idx {
        c[i] += int(1);
    }
    c
}

fn le(idx: &[usize], rhs: Rational) -> LinearInequality {
    LinearInequality::new(unit(idx), rhs)
}

fn nonneg_rows() -> Vec<LinearInequality> {
    (0..3).map(|i| LinearInequality::ge(unit(&[i]), int(0))).collect()
}

fn finish(rows: Vec<LinearInequality>) -> Polytope {
    let p = Polytope::new(3, rows).expect("three-dimensional rows");
    p.remove_redundant().unwrap_or_else(|e| Polytope::empty(e.dim))
}

/// The three-user outer bound with every `min` branch emitted as its own row
/// and redundant rows pruned. Valid for every channel.
pub fn outer_region(ch: &ChannelMatrix) -> Result<Polytope, RegionError> {
    ch.require_users(3)?;
    let ds = compute_deltas(ch);
    let mut rows = nonneg_rows();
    for i in 0..3 {
        rows.push(le(&[i], ds.single(i).clone()));
    }
    for (i, k) in [(0, 1), (0, 2), (1, 2)] {
        rows.push(le(&[i, k], ds.single(i) + ds.pair(k, i)));
        rows.push(le(&[i, k], ds.single(k) + ds.pair(i, k)));
    }
    for p in (0..3).permutations(3) {
        let (chain, half) = ds.sum_branches(p[0], p[1], p[2]);
        rows.push(le(&[0, 1, 2], chain));
        rows.push(le(&[0, 1, 2], half));
    }
    Ok(finish(rows))
}

/// A sum-GDoF bound for the cyclic `(1, 2, 2)` channel that is strictly
/// tighter than the outer region's value of 4. Kept as a reference value only.
pub fn cyclic_122_tighter_sum_bound() -> Rational {
    crate::rational::ratio(15, 4)
}

/// Closed form for the cyclic `(1, a, b)` channel inside its regime.
pub fn cyclic_region(a: &Rational, b: &Rational) -> Result<Polytope, RegionError> {
    if !in_cyclic_regime(a, b) {
        return Err(RegionError::OutsideCyclicRegime {
            a: format_rational(a),
            b: format_rational(b),
        });
    }
    let mut rows = nonneg_rows();
    for i in 0..3 {
        rows.push(le(&[i], int(1)));
    }
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        rows.push(le(&[i, j], int(2) - b));
    }
    rows.push(le(&[0, 1, 2], int(3) - int(2) * b));
    Ok(finish(rows))
}

fn maxr(vals: &[&Rational]) -> Rational {
    vals.iter().max().map(|v| (*v).clone()).expect("nonempty")
}

fn hat_common(ch: &ChannelMatrix, o: [usize; 3]) -> Result<Option<(Vec<LinearInequality>, Rational)>, RegionError> {
    ch.require_users(3)?;
    ch.require_antennas(3)?;
    let a = |x: usize, y: usize| ch.alpha(x, y);
    let (i, j) = (o[0], o[1]);
    let mc = ch.max_cross();
    if mc > *a(i, i).min(a(j, j)) {
        return Ok(None);
    }
    let mut rows = nonneg_rows();
    for n in 0..3 {
        rows.push(le(&[n], a(n, n).clone()));
    }
    rows.push(le(&[i, j], a(i, i) + a(j, j) - &mc));
    Ok(Some((rows, mc)))
}

/// Achievable part `D̂_ijk`; `None` when the guard
/// `max cross ≤ min(alpha_ii, alpha_jj)` fails.
pub fn achievable_d_hat(ch: &ChannelMatrix, order: [usize; 3]) -> Result<Option<Polytope>, RegionError> {
    let o = check_order(&order)?;
    let Some((mut rows, mc)) = hat_common(ch, o)? else {
        return Ok(None);
    };
    let a = |x: usize, y: usize| ch.alpha(x, y);
    let [i, j, k] = o;
    rows.push(le(&[i, k], a(i, i) + a(k, k) - maxr(&[a(j, k), a(k, j), a(k, i), a(i, k)])));
    rows.push(le(&[j, k], a(j, j) + a(k, k) - maxr(&[a(j, k), a(k, j)])));
    let total = a(0, 0) + a(1, 1) + a(2, 2);
    for sub in [
        &mc + maxr(&[a(j, k), a(k, j)]),
        a(i, k) + a(k, i),
        a(k, i) + a(i, j),
        a(j, i) + a(i, k),
    ] {
        rows.push(le(&[0, 1, 2], &total - sub));
    }
    Ok(Some(finish(rows)))
}

/// Achievable part `F̂_ijk`, including the halved four-term sum branch.
pub fn achievable_f_hat(ch: &ChannelMatrix, order: [usize; 3]) -> Result<Option<Polytope>, RegionError> {
    let o = check_order(&order)?;
    let Some((mut rows, mc)) = hat_common(ch, o)? else {
        return Ok(None);
    };
    let a = |x: usize, y: usize| ch.alpha(x, y);
    let [i, j, k] = o;
    rows.push(le(&[i, k], a(i, i) + a(k, k) - maxr(&[a(j, k), a(k, i), a(i, k)])));
    rows.push(le(&[j, k], a(j, j) + a(k, k) - maxr(&[a(j, k), a(k, i), a(k, j)])));
    let total = a(0, 0) + a(1, 1) + a(2, 2);
    for sub in [
        &mc + maxr(&[a(k, i), a(j, k)]),
        a(i, k) + a(j, i),
        a(k, j) + a(j, i),
        a(k, j) + a(i, k),
        (a(i, j) + a(i, k) + a(k, j) + a(j, i)) / int(2),
    ] {
        rows.push(le(&[0, 1, 2], &total - sub));
    }
    Ok(Some(finish(rows)))
}

pub fn achievable_part(ch: &ChannelMatrix, label: PartLabel) -> Result<Option<Polytope>, RegionError> {
    match label.variant {
        Variant::D => achievable_d_hat(ch, label.order),
        Variant::F => achievable_f_hat(ch, label.order),
    }
}

/// The part predicted to equal the outer bound: relabel so the largest cross
/// link (first in row-major order on ties) sits at (1, 2), then pick
/// `D213`, `D123` or `F123` by comparing the remaining cross links, and map
/// the label back to the original users.
pub fn predicted_part(ch: &ChannelMatrix) -> Result<PartLabel, RegionError> {
    ch.require_users(3)?;
    ch.require_antennas(3)?;
    let mc = ch.max_cross();
    let (l, m) = (0..3)
        .cartesian_product(0..3)
        .find(|&(l, m)| l != m && *ch.alpha(l, m) == mc)
        .expect("a cross link attains the maximum");
    let pi = [l, m, 3 - l - m];
    let r = ch.relabel_users(&pi);
    let a = |x: usize, y: usize| r.alpha(x, y);
    let (variant, local) = if a(0, 2).max(a(2, 0)) <= a(1, 2) {
        (Variant::D, [1, 0, 2])
    } else if a(1, 2).max(a(2, 1)) <= a(2, 0) {
        (Variant::D, [0, 1, 2])
    } else {
        (Variant::F, [0, 1, 2])
    };
    Ok(PartLabel {
        variant,
        order: [pi[local[0]], pi[local[1]], pi[local[2]]],
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionVerdict {
    pub outer: Polytope,
    pub parts: BTreeMap<PartLabel, Option<Polytope>>,
    pub conditions: ConditionReport,
    /// Part chosen by the case analysis, when the conditions hold.
    pub predicted: Option<PartLabel>,
    /// Part verified exactly equal to the outer region.
    pub matched: Option<PartLabel>,
    pub equal: bool,
    /// Antenna order used to build the parts (0-based).
    pub antenna_order: Vec<usize>,
    pub note: Option<String>,
}

/// Builds the outer bound and all twelve parts. When the SLS conditions hold,
/// the predicted part is compared with the outer bound exactly; if the
/// prediction fails, every part is scanned.
pub fn achievability_verdict(ch: &ChannelMatrix) -> Result<RegionVerdict, RegionError> {
    ch.require_users(3)?;
    let conditions = check_sls_conditions(ch)?;
    let outer = outer_region(ch)?;
    let antenna_order = conditions.witness().unwrap_or_else(|| (0..ch.antennas()).collect());
    let work = ch.permute_antennas(&antenna_order);
    let mut parts = BTreeMap::new();
    for label in PartLabel::all() {
        parts.insert(label, achievable_part(&work, label)?);
    }
    let mut predicted = None;
    let mut matched = None;
    let mut note = None;
    if conditions.satisfied {
        let p = predicted_part(&work)?;
        predicted = Some(p);
        if let Some(Some(part)) = parts.get(&p) {
            if poly_equal(part, &outer)? {
                matched = Some(p);
            }
        }
        if matched.is_none() {
            note = Some(format!("predicted part {p} does not match; scanned all parts"));
            for (label, part) in &parts {
                if let Some(part) = part {
                    if poly_equal(part, &outer)? {
                        matched = Some(*label);
                        break;
                    }
                }
            }
        }
    } else {
        note = Some("SLS conditions fail: outer bound not known tight".to_string());
    }
    Ok(RegionVerdict {
        outer,
        parts,
        conditions,
        predicted,
        equal: matched.is_some(),
        matched,
        antenna_order,
        note,
    })
}
