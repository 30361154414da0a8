#![allow(dead_code)]

use gdof_core::channel::check_sls_conditions;
use gdof_core::polytope::lp::{maximize, LpOutcome};
use gdof_core::rational::{int, ratio};
use gdof_core::{poly_equal, ChannelMatrix, LinearInequality, Polytope, Rational};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn sample() -> ChannelMatrix {
    ChannelMatrix::from_ratios(&[
        &[(6, 5), (11, 10), (9, 10)],
        &[(9, 10), (13, 10), (7, 10)],
        &[(7, 10), (9, 10), (1, 1)],
    ])
    .unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn sixteenths<R: Rng>(rng: &mut R, max: i64) -> Rational {
    ratio(rng.random_range(0..=max), 16)
}

/// A random 3x3 channel passing the SLS conditions, with its antennas put
/// in witness order. Half the draws clamp cross links below both diagonal
/// entries, which lands many samples on the boundary of the conditions.
pub fn random_conforming<R: Rng>(rng: &mut R) -> ChannelMatrix {
    loop {
        let clamp = rng.random_bool(0.5);
        let diag: Vec<Rational> = (0..3).map(|_| sixteenths(rng, 24)).collect();
        let rows = (0..3)
            .map(|k| {
                (0..3)
                    .map(|m| {
                        if k == m {
                            return diag[k].clone();
                        }
                        let x = sixteenths(rng, 24);
                        if clamp {
                            x.min(diag[k].clone()).min(diag[m].clone())
                        } else {
                            x
                        }
                    })
                    .collect()
            })
            .collect();
        let ch = ChannelMatrix::new(rows).unwrap();
        let report = check_sls_conditions(&ch).unwrap();
        if let Some(w) = report.witness() {
            return ch.permute_antennas(&w);
        }
    }
}

pub fn random_conforming_set(seed: u64, n: usize) -> Vec<ChannelMatrix> {
    let mut r = rng(seed);
    (0..n).map(|_| random_conforming(&mut r)).collect()
}

/// Random bounded polytopes: a box plus a few random cuts. Some are empty.
pub fn polytope_strategy() -> impl Strategy<Value = Polytope> {
    (2usize..=4).prop_flat_map(|dim| {
        let row = (proptest::collection::vec(-3i64..=3, dim), -8i64..=24);
        (
            Just(dim),
            proptest::collection::vec(1i64..=8, dim),
            proptest::collection::vec(row, 1..=6),
        )
            .prop_map(|(dim, upper, cuts)| {
                let mut rows = Vec::new();
                for i in 0..dim {
                    let mut c = vec![int(0); dim];
                    c[i] = int(1);
                    rows.push(LinearInequality::new(c.clone(), int(upper[i])));
                    c[i] = int(-1);
                    rows.push(LinearInequality::new(c, int(0)));
                }
                for (c, r) in cuts {
                    rows.push(LinearInequality::new(c.into_iter().map(int).collect(), ratio(r, 4)));
                }
                Polytope::new(dim, rows).unwrap()
            })
    })
}

pub fn point_strategy(dim: usize) -> impl Strategy<Value = Vec<Rational>> {
    proptest::collection::vec((-4i64..=36).prop_map(|n| ratio(n, 4)), dim)
}

/// True when `x` is a convex combination of `verts` (exact LP).
pub fn in_hull(verts: &[Vec<Rational>], x: &[Rational]) -> bool {
    if verts.is_empty() {
        return false;
    }
    let n = verts.len();
    let mut rows = Vec::new();
    let eq = |rows: &mut Vec<LinearInequality>, c: Vec<Rational>, r: Rational| {
        rows.push(LinearInequality::new(c.iter().map(|v| -v).collect(), -r.clone()));
        rows.push(LinearInequality::new(c, r));
    };
    for j in 0..x.len() {
        eq(&mut rows, verts.iter().map(|v| v[j].clone()).collect(), x[j].clone());
    }
    eq(&mut rows, vec![int(1); n], int(1));
    for i in 0..n {
        let mut c = vec![int(0); n];
        c[i] = int(-1);
        rows.push(LinearInequality::new(c, int(0)));
    }
    let refs: Vec<&LinearInequality> = rows.iter().collect();
    !matches!(maximize(&vec![int(0); n], &refs), LpOutcome::Infeasible)
}

/// Projection soundness: every point of `p` projects into the eliminated
/// polytope, and every vertex of the projection lifts back into `p`.
pub fn check_projection(p: &Polytope, var: usize) -> Result<(), TestCaseError> {
    let proj = p.fm_eliminate(var).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert_eq!(&proj, &p.fm_eliminate(var).unwrap(), "elimination is not deterministic");
    let grid: Vec<Rational> = (-1..=34).map(|n| ratio(n, 4)).collect();
    let mut probe = vec![int(0); p.dim() - 1];
    for seed in 0..6usize {
        for (j, x) in probe.iter_mut().enumerate() {
            *x = grid[(seed * 7 + j * 11) % grid.len()].clone();
        }
        let lifted = grid.iter().any(|t| {
            let mut full = probe.clone();
            full.insert(var, t.clone());
            p.contains_point(&full).unwrap()
        });
        if lifted {
            prop_assert!(proj.contains_point(&probe).unwrap(), "grid lift of {:?} not in projection", probe);
        }
    }
    let verts = p.vertices().unwrap();
    for v in &verts {
        let mut w = v.clone();
        w.remove(var);
        prop_assert!(proj.contains_point(&w).unwrap(), "projected vertex {:?} outside", w);
    }
    let pverts = proj.vertices().unwrap();
    prop_assert_eq!(verts.is_empty(), pverts.is_empty());
    for w in &pverts {
        let mut rows: Vec<LinearInequality> = p.rows().to_vec();
        for (j, val) in w.iter().enumerate() {
            let k = if j < var { j } else { j + 1 };
            let mut c = vec![int(0); p.dim()];
            c[k] = int(1);
            rows.push(LinearInequality::new(c.clone(), val.clone()));
            c[k] = int(-1);
            rows.push(LinearInequality::new(c, -val.clone()));
        }
        let refs: Vec<&LinearInequality> = rows.iter().collect();
        prop_assert!(gdof_core::polytope::lp::feasible(p.dim(), &refs), "vertex {:?} of projection does not lift", w);
    }
    Ok(())
}

/// Vertices satisfy every row, and membership agrees with the convex hull.
pub fn check_vertices_contains(p: &Polytope, x: &[Rational]) -> Result<(), TestCaseError> {
    let verts = p.vertices().unwrap();
    for v in &verts {
        prop_assert!(p.contains_point(v).unwrap());
        let tight: Vec<&LinearInequality> = p.rows().iter().filter(|r| r.is_tight_at(v)).collect();
        let mut normal = vec![int(0); p.dim()];
        for r in &tight {
            for (n, c) in normal.iter_mut().zip(r.coeffs()) {
                *n += c;
            }
        }
        if normal.iter().all(|c| *c == int(0)) {
            continue;
        }
        let out: Vec<Rational> = v
            .iter()
            .zip(&normal)
            .map(|(a, n)| a + n * ratio(1, 1000 * tight.len() as i64))
            .collect();
        prop_assert!(!p.contains_point(&out).unwrap(), "outward step from {:?} stays inside", v);
    }
    prop_assert_eq!(p.contains_point(x).unwrap(), in_hull(&verts, x), "membership of {:?}", x);
    Ok(())
}

/// Pruning keeps the set and every sampled point's membership, keeps only original rows, and leaves no row that
/// could be dropped.
pub fn check_redundancy(p: &Polytope, points: &[Vec<Rational>]) -> Result<(), TestCaseError> {
    let Ok(q) = p.remove_redundant() else {
        prop_assert!(p.vertices().unwrap().is_empty());
        return Ok(());
    };
    prop_assert!(poly_equal(p, &q).unwrap());
    for x in points {
        prop_assert_eq!(p.contains_point(x).unwrap(), q.contains_point(x).unwrap(), "membership of {:?}", x);
    }
    for r in q.rows() {
        prop_assert!(p.rows().contains(r));
    }
    for i in 0..q.rows().len() {
        let mut rows = q.rows().to_vec();
        rows.remove(i);
        let smaller = Polytope::new(q.dim(), rows).unwrap();
        let bounded = !matches!(
            smaller.maximize(q.rows()[i].coeffs()).unwrap(),
            LpOutcome::Unbounded
        );
        if bounded {
            prop_assert!(!poly_equal(&smaller, &q).unwrap(), "row {} was redundant", i);
        }
    }
    Ok(())
}

/// `poly_equal` is an equivalence that ignores row order, scaling and
/// redundant rows, and detects a cut through a vertex.
pub fn check_equality(p: &Polytope) -> Result<(), TestCaseError> {
    prop_assert!(poly_equal(p, p).unwrap());
    let mut rows: Vec<LinearInequality> = p.rows().iter().rev().cloned().collect();
    let scaled: Vec<LinearInequality> = rows
        .iter()
        .map(|r| LinearInequality::new(r.coeffs().iter().map(|c| c * int(3)).collect(), r.rhs() * int(3)))
        .collect();
    let first = rows[0].clone();
    rows.push(LinearInequality::new(first.coeffs().to_vec(), first.rhs() + int(1)));
    let q = Polytope::new(p.dim(), rows).unwrap();
    let s = Polytope::new(p.dim(), scaled).unwrap();
    prop_assert!(poly_equal(p, &q).unwrap() && poly_equal(&q, p).unwrap());
    prop_assert!(poly_equal(p, &s).unwrap());
    let verts = p.vertices().unwrap();
    if let Some(v) = verts.last() {
        if verts.len() > 1 {
            let c: Vec<Rational> = (0..p.dim()).map(|j| if j == 0 { int(1) } else { int(0) }).collect();
            let top = verts.iter().map(|u| u[0].clone()).max().unwrap();
            let bottom = verts.iter().map(|u| u[0].clone()).min().unwrap();
            if top > bottom {
                let cut = LinearInequality::new(c, (&top + &bottom) / int(2));
                let mut rows = p.rows().to_vec();
                rows.push(cut);
                let smaller = Polytope::new(p.dim(), rows).unwrap();
                prop_assert!(!poly_equal(p, &smaller).unwrap());
                prop_assert!(gdof_core::poly_subset(&smaller, p).unwrap());
            }
        }
        let _ = v;
    }
    Ok(())
}
