//! Exact polyhedral computation: canonical half-space rows, Fourier-Motzkin
//! projection, LP-based redundancy removal, vertex enumeration and
//! vertex-based containment tests.

pub mod lp;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use itertools::Itertools;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{format_rational, Rational, Q};
use lp::LpOutcome;

pub type Point = Vec<Rational>;

/// Row ceiling for hyperplane-subset vertex enumeration.
pub const DEFAULT_VERTEX_ROW_LIMIT: usize = 64;
/// Largest dimension accepted by vertex enumeration.
pub const MAX_VERTEX_DIM: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolytopeError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("polytope dimension must be positive")]
    ZeroDimension,
    #[error("variable index {var} out of range for dimension {dim}")]
    VariableOutOfRange { var: usize, dim: usize },
    #[error("polyhedron is unbounded")]
    Unbounded,
    #[error("{rows} rows exceed the vertex enumeration ceiling of {limit}")]
    TooManyRows { rows: usize, limit: usize },
    #[error("dimension {dim} exceeds the vertex enumeration limit of {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },
    #[error("supplied vertex does not satisfy the rows")]
    InvalidVertex,
}

/// Returned by [`Polytope::remove_redundant`] when the rows admit no point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("region is empty (dimension {dim})")]
pub struct Infeasible {
    pub dim: usize,
}

/// `coeffs · x ≤ rhs`, scaled so the first nonzero coefficient is ±1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinearInequality {
    coeffs: Vec<Rational>,
    rhs: Rational,
}

impl LinearInequality {
    pub fn new(coeffs: Vec<Rational>, rhs: Rational) -> Self {
        let mut row = LinearInequality { coeffs, rhs };
        if let Some(lead) = row.coeffs.iter().find(|c| !c.is_zero()).map(|c| c.abs()) {
            if !lead.is_one() {
                for c in row.coeffs.iter_mut() {
                    *c /= &lead;
                }
                row.rhs /= &lead;
            }
        }
        row
    }

    /// `coeffs · x ≥ rhs`.
    pub fn ge(coeffs: Vec<Rational>, rhs: Rational) -> Self {
        Self::new(coeffs.into_iter().map(|c| -c).collect(), -rhs)
    }

    /// Row with integer coefficients, convenient for fixtures.
    pub fn from_ints(coeffs: &[i64], rhs: Rational) -> Self {
        Self::new(coeffs.iter().map(|&c| crate::rational::int(c)).collect(), rhs)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn rhs(&self) -> &Rational {
        &self.rhs
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn lhs(&self, x: &[Rational]) -> Rational {
        self.coeffs
            .iter()
            .zip(x)
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, v)| c * v)
            .sum()
    }

    pub fn holds_at(&self, x: &[Rational]) -> bool {
        self.lhs(x) <= self.rhs
    }

    pub fn is_tight_at(&self, x: &[Rational]) -> bool {
        self.lhs(x) == self.rhs
    }

    pub fn permute(&self, perm: &[usize]) -> Self {
        let mut c = vec![Rational::zero(); self.coeffs.len()];
        for (i, &p) in perm.iter().enumerate() {
            c[p] = self.coeffs[i].clone();
        }
        Self::new(c, self.rhs.clone())
    }
}

impl fmt::Display for LinearInequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            if !mag.is_one() {
                write!(f, "{}*", format_rational(&mag))?;
            }
            write!(f, "d{}", i + 1)?;
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " <= {}", format_rational(&self.rhs))
    }
}

/// A polyhedron `{x : A x ≤ b}` with canonical, sorted, deduplicated rows and
/// an optional cached vertex list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polytope {
    dim: usize,
    hrep: Vec<LinearInequality>,
    vrep: Option<Vec<Point>>,
}

impl Polytope {
    /// Builds a polytope from arbitrary rows. Trivially true zero rows are
    /// dropped; a contradictory zero row yields [`Polytope::empty`].
    pub fn new(dim: usize, rows: Vec<LinearInequality>) -> Result<Self, PolytopeError> {
        if dim == 0 {
            return Err(PolytopeError::ZeroDimension);
        }
        let mut best: BTreeMap<Vec<Rational>, Rational> = BTreeMap::new();
        for row in rows {
            if row.dim() != dim {
                return Err(PolytopeError::DimensionMismatch {
                    expected: dim,
                    found: row.dim(),
                });
            }
            if row.is_zero() {
                if row.rhs.is_negative() {
                    return Ok(Self::empty(dim));
                }
                continue;
            }
            let LinearInequality { coeffs, rhs } = row;
            match best.get_mut(&coeffs) {
                Some(r) if *r <= rhs => {}
                Some(r) => *r = rhs,
                None => {
                    best.insert(coeffs, rhs);
                }
            }
        }
        let hrep = best
            .into_iter()
            .map(|(coeffs, rhs)| LinearInequality { coeffs, rhs })
            .collect();
        Ok(Polytope {
            dim,
            hrep,
            vrep: None,
        })
    }

    /// The canonical empty region `{x₁ ≤ −1, −x₁ ≤ 0}`.
    pub fn empty(dim: usize) -> Self {
        let mut a = vec![Rational::zero(); dim];
        a[0] = Rational::one();
        let b: Vec<Rational> = a.iter().map(|v| -v).collect();
        Polytope {
            dim,
            hrep: vec![
                LinearInequality::new(b, Rational::zero()),
                LinearInequality::new(a, -Rational::one()),
            ],
            vrep: Some(Vec::new()),
        }
    }

    /// The box `0 ≤ xᵢ ≤ upper[i]`.
    pub fn boxed(upper: &[Rational]) -> Self {
        let dim = upper.len();
        let mut rows = Vec::new();
        for (i, u) in upper.iter().enumerate() {
            let mut e = vec![Rational::zero(); dim];
            e[i] = Rational::one();
            rows.push(LinearInequality::ge(e.clone(), Rational::zero()));
            rows.push(LinearInequality::new(e, u.clone()));
        }
        Polytope::new(dim, rows).expect("box rows have matching dimension")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[LinearInequality] {
        &self.hrep
    }

    pub fn cached_vertices(&self) -> Option<&[Point]> {
        self.vrep.as_deref()
    }

    pub fn is_empty(&self) -> bool {
        let refs: Vec<&LinearInequality> = self.hrep.iter().collect();
        !lp::feasible(self.dim, &refs)
    }

    /// Adds the rows of `other`.
    pub fn intersect(&self, other: &Polytope) -> Result<Polytope, PolytopeError> {
        self.check_dim(other.dim)?;
        Polytope::new(self.dim, self.hrep.iter().chain(&other.hrep).cloned().collect())
    }

    /// Moves coordinate `i` to position `perm[i]`.
    pub fn permute_coords(&self, perm: &[usize]) -> Polytope {
        let rows = self.hrep.iter().map(|r| r.permute(perm)).collect();
        let mut p = Polytope::new(self.dim, rows).expect("permutation keeps dimension");
        p.vrep = self.vrep.as_ref().map(|vs| {
            let mut out: Vec<Point> = vs
                .iter()
                .map(|v| {
                    let mut w = vec![Rational::zero(); v.len()];
                    for (i, &t) in perm.iter().enumerate() {
                        w[t] = v[i].clone();
                    }
                    w
                })
                .collect();
            out.sort();
            out
        });
        p
    }

    fn check_dim(&self, found: usize) -> Result<(), PolytopeError> {
        if found != self.dim {
            return Err(PolytopeError::DimensionMismatch {
                expected: self.dim,
                found,
            });
        }
        Ok(())
    }

    pub fn contains_point(&self, x: &[Rational]) -> Result<bool, PolytopeError> {
        self.check_dim(x.len())?;
        Ok(self.hrep.iter().all(|r| r.holds_at(x)))
    }

    /// Maximizes `c · x` over the polytope.
    pub fn maximize(&self, c: &[Rational]) -> Result<LpOutcome, PolytopeError> {
        self.check_dim(c.len())?;
        let refs: Vec<&LinearInequality> = self.hrep.iter().collect();
        Ok(lp::maximize(c, &refs))
    }

    /// Drops every row implied by the remaining ones, deciding implication by
    /// exact LP. Rows are visited in canonical order, so the output is
    /// deterministic.
    pub fn remove_redundant(&self) -> Result<Polytope, Infeasible> {
        let refs: Vec<&LinearInequality> = self.hrep.iter().collect();
        if !lp::feasible(self.dim, &refs) {
            return Err(Infeasible { dim: self.dim });
        }
        let mut keep = vec![true; self.hrep.len()];
        for i in 0..self.hrep.len() {
            let others: Vec<&LinearInequality> = self
                .hrep
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i && keep[j])
                .map(|(_, r)| r)
                .collect();
            let row = &self.hrep[i];
            if let LpOutcome::Optimal { value, .. } = lp::maximize(row.coeffs(), &others) {
                if value <= row.rhs {
                    keep[i] = false;
                }
            }
        }
        let hrep = self
            .hrep
            .iter()
            .zip(&keep)
            .filter(|(_, &k)| k)
            .map(|(r, _)| r.clone())
            .collect();
        Ok(Polytope {
            dim: self.dim,
            hrep,
            vrep: self.vrep.clone(),
        })
    }

    /// Projects out coordinate `var`, then prunes redundant rows. An empty
    /// input projects to the canonical empty region.
    pub fn fm_eliminate(&self, var: usize) -> Result<Polytope, PolytopeError> {
        if var >= self.dim {
            return Err(PolytopeError::VariableOutOfRange { var, dim: self.dim });
        }
        if self.dim == 1 {
            return Err(PolytopeError::ZeroDimension);
        }
        let drop = |c: &[Rational]| -> Vec<Rational> {
            c.iter()
                .enumerate()
                .filter(|&(j, _)| j != var)
                .map(|(_, v)| v.clone())
                .collect()
        };
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        let mut rows = Vec::new();
        for r in &self.hrep {
            let a = &r.coeffs[var];
            if a.is_zero() {
                rows.push(LinearInequality::new(drop(&r.coeffs), r.rhs.clone()));
            } else if a.is_positive() {
                pos.push(r);
            } else {
                neg.push(r);
            }
        }
        for p in &pos {
            let ap = &p.coeffs[var];
            for n in &neg {
                let an = -&n.coeffs[var];
                let coeffs: Vec<Rational> = p
                    .coeffs
                    .iter()
                    .zip(&n.coeffs)
                    .enumerate()
                    .filter(|&(j, _)| j != var)
                    .map(|(_, (x, y))| x * &an + y * ap)
                    .collect();
                let rhs = &p.rhs * &an + &n.rhs * ap;
                rows.push(LinearInequality::new(coeffs, rhs));
            }
        }
        let projected = Polytope::new(self.dim - 1, rows)?;
        Ok(projected
            .remove_redundant()
            .unwrap_or_else(|e| Polytope::empty(e.dim)))
    }

    /// Eliminates several coordinates; indices refer to the input polytope.
    pub fn fm_eliminate_many(&self, vars: &[usize]) -> Result<Polytope, PolytopeError> {
        let mut vars: Vec<usize> = vars.to_vec();
        vars.sort_unstable();
        vars.dedup();
        let mut p = self.clone();
        for &v in vars.iter().rev() {
            p = p.fm_eliminate(v)?;
        }
        Ok(p)
    }

    /// Exact extreme points, sorted. Empty input gives an empty list.
    pub fn vertices(&self) -> Result<Vec<Point>, PolytopeError> {
        self.vertices_with_limit(DEFAULT_VERTEX_ROW_LIMIT)
    }

    pub fn vertices_with_limit(&self, row_limit: usize) -> Result<Vec<Point>, PolytopeError> {
        if let Some(v) = &self.vrep {
            return Ok(v.clone());
        }
        if self.dim > MAX_VERTEX_DIM {
            return Err(PolytopeError::DimensionTooLarge {
                dim: self.dim,
                limit: MAX_VERTEX_DIM,
            });
        }
        if self.hrep.len() > row_limit {
            return Err(PolytopeError::TooManyRows {
                rows: self.hrep.len(),
                limit: row_limit,
            });
        }
        let refs: Vec<&LinearInequality> = self.hrep.iter().collect();
        let mut e = vec![Rational::zero(); self.dim];
        for i in 0..self.dim {
            for s in [1, -1] {
                e[i] = crate::rational::int(s);
                match lp::maximize(&e, &refs) {
                    LpOutcome::Infeasible => return Ok(Vec::new()),
                    LpOutcome::Unbounded => return Err(PolytopeError::Unbounded),
                    LpOutcome::Optimal { .. } => {}
                }
            }
            e[i] = Rational::zero();
        }
        let mut found = BTreeSet::new();
        for subset in (0..self.hrep.len()).combinations(self.dim) {
            let a: Vec<&[Rational]> = subset.iter().map(|&i| self.hrep[i].coeffs()).collect();
            let b: Vec<&Rational> = subset.iter().map(|&i| self.hrep[i].rhs()).collect();
            if let Some(x) = solve_square(&a, &b) {
                if self.hrep.iter().all(|r| r.holds_at(&x)) {
                    found.insert(x);
                }
            }
        }
        Ok(found.into_iter().collect())
    }

    /// Returns a copy carrying its vertex list, for serialization.
    pub fn with_vertices(&self) -> Result<Polytope, PolytopeError> {
        let v = self.vertices()?;
        Ok(Polytope {
            vrep: Some(v),
            ..self.clone()
        })
    }

    pub fn without_vertices(&self) -> Polytope {
        Polytope {
            vrep: None,
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> PolytopeJson {
        PolytopeJson {
            dim: self.dim,
            hrep: self
                .hrep
                .iter()
                .map(|r| RowJson {
                    coeffs: r.coeffs.iter().cloned().map(Q).collect(),
                    rhs: Q(r.rhs.clone()),
                })
                .collect(),
            vrep: self
                .vrep
                .as_ref()
                .map(|vs| vs.iter().map(|v| v.iter().cloned().map(Q).collect()).collect()),
        }
    }

    /// Rebuilds from the wire format. A supplied vertex list is checked
    /// against the rows and then trusted as the cache.
    pub fn from_json(j: &PolytopeJson) -> Result<Polytope, PolytopeError> {
        let rows = j
            .hrep
            .iter()
            .map(|r| LinearInequality::new(r.coeffs.iter().map(|q| q.0.clone()).collect(), r.rhs.0.clone()))
            .collect();
        let mut p = Polytope::new(j.dim, rows)?;
        if let Some(vs) = &j.vrep {
            let mut pts: Vec<Point> = vs.iter().map(|v| v.iter().map(|q| q.0.clone()).collect()).collect();
            for v in &pts {
                if !p.contains_point(v)? {
                    return Err(PolytopeError::InvalidVertex);
                }
            }
            pts.sort();
            pts.dedup();
            p.vrep = Some(pts);
        }
        Ok(p)
    }
}

impl fmt::Display for Polytope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.hrep {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

/// `vertices(a) ⊂ b`, which for bounded `a` is equivalent to `a ⊂ b`.
pub fn poly_subset(a: &Polytope, b: &Polytope) -> Result<bool, PolytopeError> {
    a.check_dim(b.dim)?;
    for v in a.vertices()? {
        if !b.contains_point(&v)? {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn poly_equal(a: &Polytope, b: &Polytope) -> Result<bool, PolytopeError> {
    Ok(poly_subset(a, b)? && poly_subset(b, a)?)
}

/// Solves a square system exactly; `None` when singular.
pub fn solve_square(a: &[&[Rational]], b: &[&Rational]) -> Option<Point> {
    let n = a.len();
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, &r)| {
            let mut v = row.to_vec();
            v.push(r.clone());
            v
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        let p = m[col][col].clone();
        for v in m[col].iter_mut() {
            *v /= &p;
        }
        let prow = m[col].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (x, y) in row.iter_mut().zip(&prow) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
    }
    Some(m.into_iter().map(|mut row| row.pop().expect("augmented")).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowJson {
    pub coeffs: Vec<Q>,
    pub rhs: Q,
}

/// Wire format: `{"dim", "hrep": [{"coeffs", "rhs"}], "vrep"?}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolytopeJson {
    pub dim: usize,
    pub hrep: Vec<RowJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vrep: Option<Vec<Vec<Q>>>,
}

impl Serialize for Polytope {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polytope {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = PolytopeJson::deserialize(d)?;
        Polytope::from_json(&j).map_err(serde::de::Error::custom)
    }
}
