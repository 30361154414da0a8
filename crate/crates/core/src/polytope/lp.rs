//! Exact two-phase simplex over rationals.
//!
//! Solves `max c·x` subject to `A x ≤ b` with `x` free. Free variables are
//! split as `x = x⁺ − x⁻`; pivoting uses Bland's rule, so the method always
//! terminates and results are deterministic.

use num_traits::{One, Signed, Zero};

use super::LinearInequality;
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Rational, point: Vec<Rational> },
    Unbounded,
    Infeasible,
}

impl LpOutcome {
    pub fn value(&self) -> Option<&Rational> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }
}

struct Tableau {
    a: Vec<Vec<Rational>>,
    b: Vec<Rational>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, obj: &mut [Rational], val: &mut Rational, r: usize, c: usize) {
        let piv = self.a[r][c].clone();
        if !piv.is_one() {
            for v in self.a[r].iter_mut() {
                if !v.is_zero() {
                    *v /= &piv;
                }
            }
            self.b[r] /= &piv;
        }
        let (head, rest) = self.a.split_at_mut(r);
        let (prow, tail) = rest.split_first_mut().expect("pivot row");
        let br = self.b[r].clone();
        for (i, row) in head.iter_mut().chain(tail.iter_mut()).enumerate() {
            let i = if i < r { i } else { i + 1 };
            let f = row[c].clone();
            if f.is_zero() {
                continue;
            }
            for (x, p) in row.iter_mut().zip(prow.iter()) {
                if !p.is_zero() {
                    *x -= &f * p;
                }
            }
            self.b[i] -= &f * &br;
        }
        let f = obj[c].clone();
        if !f.is_zero() {
            for (x, p) in obj.iter_mut().zip(prow.iter()) {
                if !p.is_zero() {
                    *x -= &f * p;
                }
            }
            *val += &f * &br;
        }
        self.basis[r] = c;
    }

    /// Runs simplex iterations on the reduced-cost row `obj`, restricted to
    /// entering columns below `ncols`. Returns false when unbounded.
    fn optimize(&mut self, obj: &mut [Rational], val: &mut Rational, ncols: usize) -> bool {
        loop {
            let Some(c) = (0..ncols).find(|&j| obj[j].is_positive()) else {
                return true;
            };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.a.len() {
                let aic = &self.a[i][c];
                if !aic.is_positive() {
                    continue;
                }
                let ratio = &self.b[i] / aic;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(obj, val, r, c),
                None => return false,
            }
        }
    }
}

/// Maximizes `objective · x` over `{x : row.coeffs · x ≤ row.rhs for all rows}`.
pub fn maximize(objective: &[Rational], rows: &[&LinearInequality]) -> LpOutcome {
    let n = objective.len();
    let m = rows.len();
    let structural = 2 * n + m;
    let negatives: Vec<usize> = (0..m).filter(|&i| rows[i].rhs().is_negative()).collect();
    let ncols = structural + negatives.len();

    let mut a = Vec::with_capacity(m);
    let mut b = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut art = 0;
    for (i, row) in rows.iter().enumerate() {
        debug_assert_eq!(row.coeffs().len(), n);
        let mut line = vec![Rational::zero(); ncols];
        let flip = row.rhs().is_negative();
        for (j, c) in row.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let c = if flip { -c } else { c.clone() };
            line[n + j] = -&c;
            line[j] = c;
        }
        line[2 * n + i] = if flip { -Rational::one() } else { Rational::one() };
        if flip {
            line[structural + art] = Rational::one();
            basis.push(structural + art);
            art += 1;
            b.push(-row.rhs());
        } else {
            basis.push(2 * n + i);
            b.push(row.rhs().clone());
        }
        a.push(line);
    }
    let mut t = Tableau { a, b, basis };

    if !negatives.is_empty() {
        let mut obj = vec![Rational::zero(); ncols];
        let mut val = Rational::zero();
        for i in 0..m {
            if t.basis[i] >= structural {
                for (o, x) in obj.iter_mut().zip(t.a[i].iter()) {
                    *o += x;
                }
                obj[t.basis[i]] = Rational::zero();
                val -= &t.b[i];
            }
        }
        t.optimize(&mut obj, &mut val, ncols);
        if val.is_negative() {
            return LpOutcome::Infeasible;
        }
        let mut i = 0;
        while i < t.a.len() {
            if t.basis[i] >= structural {
                match (0..structural).find(|&j| !t.a[i][j].is_zero()) {
                    Some(j) => {
                        t.pivot(&mut obj, &mut val, i, j);
                        i += 1;
                    }
                    None => {
                        t.a.remove(i);
                        t.b.remove(i);
                        t.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
        for row in t.a.iter_mut() {
            row.truncate(structural);
        }
    }

    let mut obj = vec![Rational::zero(); structural];
    for (j, c) in objective.iter().enumerate() {
        obj[j] = c.clone();
        obj[n + j] = -c;
    }
    let mut val = Rational::zero();
    for i in 0..t.a.len() {
        let cb = obj[t.basis[i]].clone();
        if cb.is_zero() {
            continue;
        }
        for (o, x) in obj.iter_mut().zip(t.a[i].iter()) {
            if !x.is_zero() {
                *o -= &cb * x;
            }
        }
        val += &cb * &t.b[i];
    }
    if !t.optimize(&mut obj, &mut val, structural) {
        return LpOutcome::Unbounded;
    }
    let mut point = vec![Rational::zero(); n];
    for (i, &bv) in t.basis.iter().enumerate() {
        if bv < n {
            point[bv] += &t.b[i];
        } else if bv < 2 * n {
            point[bv - n] -= &t.b[i];
        }
    }
    LpOutcome::Optimal { value: val, point }
}

/// True when the system has at least one solution.
pub fn feasible(dim: usize, rows: &[&LinearInequality]) -> bool {
    let zero = vec![Rational::zero(); dim];
    !matches!(maximize(&zero, rows), LpOutcome::Infeasible)
}
