//! Parameters realizing a given GDoF point: closed-form corner tables for
//! the `D123` scheme, and an exact lexicographic LP otherwise.

use itertools::Itertools;
use serde::Serialize;

use crate::channel::{check_sls_conditions, ChannelMatrix};
use crate::polytope::{lp, LinearInequality, Point, Polytope};
use crate::rational::{int, max_of, Rational};
use crate::regions::{achievability_verdict, achievable_part, PartLabel, Variant};

use super::sinr::{sinr_exponents, SinrReport};
use super::{
    constraint_violations, constraints, find_rate_split, param_region_rows, require_three, validate_rate_split, RateSplit,
    SlsError, SlsParams, SlsScheme,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ParamSource {
    /// A closed-form corner entry, e.g. `B` or `C`.
    Table { corner: String },
    Lp,
}

/// Parameters for the scheme of `label`, stated for the channel relabeled by
/// `label.order` (scheme user `a` is original user `label.order[a]`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VertexParams {
    pub label: PartLabel,
    pub params: SlsParams,
    pub source: ParamSource,
    /// Antenna order applied before taking the leading 3x3 block (0-based).
    pub antenna_order: Vec<usize>,
    pub diagnostics: Vec<String>,
}

/// The point seen from the scheme of `order`: `v'_a = v[order[a]]`.
pub fn to_scheme_frame(v: &[Rational], order: [usize; 3]) -> Point {
    order.iter().map(|&o| v[o].clone()).collect()
}

pub fn from_scheme_frame(v: &[Rational], order: [usize; 3]) -> Point {
    let mut out = vec![int(0); 3];
    for (a, &o) in order.iter().enumerate() {
        out[o] = v[a].clone();
    }
    out
}

fn in_region(ch: &ChannelMatrix, variant: Variant, p: &SlsParams, v: &[Rational]) -> bool {
    v.iter().all(|x| *x >= int(0))
        && param_region_rows(variant).iter().all(|row| {
            let lhs: Rational = row.d.iter().zip(v).map(|(&c, x)| x * int(c as i64)).sum();
            lhs <= row.rhs.eval(ch, p)
        })
}

fn valid(ch: &ChannelMatrix, variant: Variant, p: &SlsParams, v: &[Rational]) -> bool {
    constraint_violations(ch, variant, p).is_empty() && in_region(ch, variant, p, v)
}

/// Closed-form corner candidates for `D123` on a 3x3 channel, in table
/// order, each as (corner name, point, parameter options).
fn d_corner_table(ch: &ChannelMatrix) -> Vec<(String, Point, Vec<SlsParams>)> {
    let a = |k: usize, m: usize| ch.alpha(k, m).clone();
    let (a11, a22, a33) = (a(0, 0), a(1, 1), a(2, 2));
    let (a12, a13, a21, a23, a31, a32) = (a(0, 1), a(0, 2), a(1, 0), a(1, 2), a(2, 0), a(2, 1));
    let mc = ch.max_cross();
    let m4 = max_of([&a23, &a32, &a31, &a13]);
    let m2 = max_of([&a23, &a32]);
    let big = max_of([&mc + &m2, &a13 + &a21, &a12 + &a31, &a13 + &a31].iter());
    let p = |l: &Rational, lp_: &Rational, g: &Rational, gp: &Rational| SlsParams::new(l.clone(), lp_.clone(), g.clone(), gp.clone());
    let zero = int(0);
    let mut out = Vec::new();

    out.push((
        "A".to_string(),
        vec![a11.clone(), &a22 - &mc, &a33 - &m4],
        vec![p(&m4, &(&mc - &m4), &zero, &zero)],
    ));

    // B and E share one parameter list with lambda = max(alpha_23, alpha_32).
    let lam = m2.clone();
    let mut be = Vec::new();
    let guards: Vec<(bool, Rational, Rational, Rational)> = vec![
        (&a13 + &a21 == big, &a13 - &lam, &a31 - &lam, &a21 - &a31),
        (&a13 + &a31 == big, &a13 - &lam, &a31 - &lam, zero.clone()),
        (&a12 + &a31 == big, &a13 - &lam, &a31 - &lam, &a12 - &a13),
        (
            &mc + &lam == big && mc == a12,
            &a12 - max_of([&a21, &a32, &a23]),
            zero.clone(),
            max_of([&a21, &a32, &a23]) - &lam,
        ),
        (&mc + &lam == big && mc == a13, &a13 - &lam, zero.clone(), zero.clone()),
        (
            &mc + &lam == big && mc == a21,
            zero.clone(),
            &a21 - max_of([&a12, &a23, &a32]),
            max_of([&a12, &a23, &a32]) - &lam,
        ),
        (&mc + &lam == big && mc == a31, zero.clone(), &a31 - &lam, zero.clone()),
        (&mc + &lam == big && mc == m2, zero.clone(), zero.clone(), zero.clone()),
    ];
    for (guard, g, gp, lp_) in guards {
        if guard {
            be.push(p(&lam, &lp_, &g, &gp));
        }
    }
    out.push(("B".to_string(), vec![&a11 - &big + &m2, a22.clone(), &a33 - &m2], be.clone()));

    let lam_c = &big - &mc;
    let mut c = Vec::new();
    if mc == a12 {
        let m = max_of([&a21, &a32, &a23]);
        c.push(p(&lam_c, &(&m - &lam_c), &(&a12 - &m), &zero));
    }
    if mc == a21 {
        let m = max_of([&a12, &a32, &a23]);
        c.push(p(&lam_c, &(&m - &lam_c), &zero, &(&a21 - &m)));
    }
    if mc == a31 {
        c.push(p(&lam_c, &zero, &zero, &(&a31 - &lam_c)));
    }
    if mc == a13 {
        c.push(p(&lam_c, &zero, &(&a13 - &lam_c), &zero));
    }
    if mc == m2 {
        c.push(p(&lam_c, &zero, &zero, &zero));
    }
    out.push(("C".to_string(), vec![&a11 - &mc, a22.clone(), &a33 + &mc - &big], c));

    let mut d = Vec::new();
    if m4 == a13 {
        let l = max_of([&a23, &a32, &a31]);
        d.push(p(&l, &(&big - &a13 - &l), &(&a13 - &l), &zero));
    }
    if m4 == a31 {
        let l = max_of([&a23, &a32, &a13]);
        d.push(p(&l, &(&big - &a31 - &l), &zero, &(&a31 - &l)));
    }
    if m4 == m2 {
        d.push(p(&m2, &(&big - &m2 - &m2), &zero, &zero));
    }
    out.push(("D".to_string(), vec![&a11 - &m4, &a22 + &m4 - &big, a33.clone()], d));

    out.push(("E".to_string(), vec![&a11 - &big + &m2, &a22 - &m2, a33.clone()], be));

    let lf = &big - &mc;
    let lpf = &mc - &m4;
    let gf = max_of([&a13 - &lf, &a12 - &lf - &lpf, zero.clone()].iter());
    let gpf = &mc + &m4 - &big - &gf;
    let f_point = {
        // d1 + d2 = a11 + a22 - mc, d1 + d3 = a11 + a33 - m4, sum = S - big.
        let s = &a11 + &a22 + &a33 - &big;
        let d3 = &s - (&a11 + &a22 - &mc);
        let d2 = &s - (&a11 + &a33 - &m4);
        let d1 = &s - &d2 - &d3;
        vec![d1, d2, d3]
    };
    out.push(("F".to_string(), f_point, vec![p(&lf, &lpf, &gf, &gpf)]));

    let top = ch.max_entry();
    out.push(("origin".to_string(), vec![zero.clone(); 3], vec![p(&top, &top, &top, &top)]));
    out
}

/// Lexicographically smallest `(lambda, lambda', gamma, gamma')` meeting the
/// variant's constraints with `v` in the parameterized region.
pub fn lp_params(ch: &ChannelMatrix, variant: Variant, v: &[Rational]) -> Option<SlsParams> {
    if v.iter().any(|x| *x < int(0)) {
        return None;
    }
    let mut rows: Vec<LinearInequality> = constraints(variant).iter().map(|c| c.as_param_row(ch)).collect();
    for row in param_region_rows(variant) {
        // d·v <= alpha part + params part  <=>  -params part <= alpha part - d·v
        let dv: Rational = row.d.iter().zip(v).map(|(&c, x)| x * int(c as i64)).sum();
        let coeffs = row.rhs.param_coeffs().iter().map(|&c| int(-(c as i64))).collect();
        rows.push(LinearInequality::new(coeffs, row.rhs.alpha_part(ch) - dv));
    }
    let mut fixed = Vec::new();
    for i in 0..4 {
        let mut obj = vec![int(0); 4];
        obj[i] = int(-1);
        let refs: Vec<&LinearInequality> = rows.iter().collect();
        let best = match lp::maximize(&obj, &refs) {
            lp::LpOutcome::Optimal { value, .. } => -value,
            _ => return None,
        };
        let mut e = vec![int(0); 4];
        e[i] = int(1);
        rows.push(LinearInequality::new(e.clone(), best.clone()));
        rows.push(LinearInequality::new(e.iter().map(|x| -x).collect(), -best.clone()));
        fixed.push(best);
    }
    let p = SlsParams::from_array([fixed[0].clone(), fixed[1].clone(), fixed[2].clone(), fixed[3].clone()]);
    debug_assert!(valid(ch, variant, &p, v));
    Some(p)
}

/// Per-channel state for repeated vertex queries.
#[derive(Debug, Clone)]
pub struct VertexSolver {
    antenna_order: Vec<usize>,
    work: ChannelMatrix,
    d_parts: Vec<([usize; 3], Polytope)>,
    lp_order: Vec<PartLabel>,
}

impl VertexSolver {
    pub fn new(ch: &ChannelMatrix) -> Result<Self, SlsError> {
        require_three(ch)?;
        let conditions = check_sls_conditions(ch)?;
        let antenna_order = conditions.witness().unwrap_or_else(|| (0..ch.antennas()).collect());
        let work = ch.permute_antennas(&antenna_order).leading_block(3);
        let mut d_parts = Vec::new();
        for p in (0..3).permutations(3) {
            let order = [p[0], p[1], p[2]];
            if let Some(part) = achievable_part(&work, PartLabel { variant: Variant::D, order })? {
                d_parts.push((order, part));
            }
        }
        let mut lp_order = PartLabel::all();
        if let Some(m) = achievability_verdict(&work)?.matched {
            lp_order.retain(|l| *l != m);
            lp_order.insert(0, m);
        }
        Ok(VertexSolver {
            antenna_order,
            work,
            d_parts,
            lp_order,
        })
    }

    /// The leading 3x3 block after the antenna reordering.
    pub fn channel(&self) -> &ChannelMatrix {
        &self.work
    }

    /// Searches for a scheme whose parameterized region contains `v`.
    ///
    /// The `D` corner tables are tried first for every order whose
    /// achievable part contains `v`; then the exact LP, starting with the
    /// part matched by the verdict and continuing through all twelve.
    pub fn params(&self, v: &[Rational]) -> Result<Option<VertexParams>, SlsError> {
        let mut diagnostics = Vec::new();
        for (order, part) in &self.d_parts {
            if !part.contains_point(v)? {
                continue;
            }
            let label = PartLabel { variant: Variant::D, order: *order };
            let r = self.work.relabel_users(order);
            let vp = to_scheme_frame(v, *order);
            for (corner, point, options) in d_corner_table(&r) {
                if point != vp {
                    continue;
                }
                match options.into_iter().find(|p| valid(&r, Variant::D, p, &vp)) {
                    Some(params) => {
                        return Ok(Some(VertexParams {
                            label,
                            params,
                            source: ParamSource::Table { corner },
                            antenna_order: self.antenna_order.clone(),
                            diagnostics,
                        }))
                    }
                    None => diagnostics.push(format!("table-miss: corner {corner} of {label}")),
                }
            }
        }
        for &label in &self.lp_order {
            let r = self.work.relabel_users(&label.order);
            let vp = to_scheme_frame(v, label.order);
            if let Some(params) = lp_params(&r, label.variant, &vp) {
                return Ok(Some(VertexParams {
                    label,
                    params,
                    source: ParamSource::Lp,
                    antenna_order: self.antenna_order.clone(),
                    diagnostics,
                }));
            }
        }
        Ok(None)
    }

    pub fn certify(&self, v: &[Rational]) -> Result<Option<Certificate>, SlsError> {
        let Some(vertex) = self.params(v)? else {
            return Ok(None);
        };
        let r = self.work.relabel_users(&vertex.label.order);
        let vp = to_scheme_frame(v, vertex.label.order);
        let Some(split) = find_rate_split(&r, vertex.label.variant, &vertex.params, &vp)? else {
            return Ok(None);
        };
        let scheme = SlsScheme {
            variant: vertex.label.variant,
            params: vertex.params.clone(),
            split: split.clone(),
            channel: r,
        };
        let check = validate_rate_split(&scheme)?;
        let sinr = sinr_exponents(&scheme)?;
        Ok(Some(Certificate {
            reproduces_point: from_scheme_frame(&check.d, vertex.label.order) == v,
            split_valid: check.valid,
            vertex,
            split,
            sinr,
        }))
    }
}

impl VertexSolver {
    /// The scheme a certificate describes, on the relabeled channel it was built for.
    pub fn scheme(&self, cert: &Certificate) -> SlsScheme {
        SlsScheme {
            variant: cert.vertex.label.variant,
            params: cert.vertex.params.clone(),
            split: cert.split.clone(),
            channel: self.work.relabel_users(&cert.vertex.label.order),
        }
    }
}

pub fn params_for_vertex(ch: &ChannelMatrix, v: &[Rational]) -> Result<Option<VertexParams>, SlsError> {
    VertexSolver::new(ch)?.params(v)
}

/// A complete scheme for one GDoF point: parameters, a rate split inducing
/// the point exactly, and the SINR check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub vertex: VertexParams,
    pub split: RateSplit,
    pub sinr: SinrReport,
    pub split_valid: bool,
    pub reproduces_point: bool,
}

impl Certificate {
    pub fn ok(&self) -> bool {
        self.split_valid && self.reproduces_point && self.sinr.feasible
    }
}

pub fn certify_vertex(ch: &ChannelMatrix, v: &[Rational]) -> Result<Option<Certificate>, SlsError> {
    VertexSolver::new(ch)?.certify(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::parse_rational;
    use crate::regions::outer_region;

    fn r(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    fn sample() -> ChannelMatrix {
        ChannelMatrix::from_ratios(&[
            &[(6, 5), (11, 10), (9, 10)],
            &[(9, 10), (13, 10), (7, 10)],
            &[(7, 10), (9, 10), (1, 1)],
        ])
        .unwrap()
    }

    #[test]
    fn sample_corner_uses_table() {
        let v = vec![r("1.2"), r("0.2"), r("0.1")];
        let got = params_for_vertex(&sample(), &v).unwrap().unwrap();
        assert_eq!(got.label.to_string(), "D123");
        assert_eq!(got.params, SlsParams::new(r("0.9"), r("0.2"), int(0), int(0)));
        assert_eq!(got.source, ParamSource::Table { corner: "A".into() });
    }

    #[test]
    fn origin_table_entry_misses_then_lp() {
        let v = vec![int(0); 3];
        let got = params_for_vertex(&sample(), &v).unwrap().unwrap();
        assert_eq!(got.source, ParamSource::Lp);
        assert!(got.diagnostics.iter().any(|d| d.contains("corner origin")));
        let z = ChannelMatrix::new(vec![vec![int(0); 3]; 3]).unwrap();
        let got = params_for_vertex(&z, &v).unwrap().unwrap();
        assert_eq!(got.params, SlsParams::zero());
        assert_eq!(got.source, ParamSource::Table { corner: "A".into() });
    }

    #[test]
    fn interior_point_via_lp() {
        let v = vec![r("0.3"), r("0.3"), r("0.3")];
        let got = params_for_vertex(&sample(), &v).unwrap().unwrap();
        assert_eq!(got.source, ParamSource::Lp);
        let r2 = sample().relabel_users(&got.label.order);
        assert!(valid(&r2, got.label.variant, &got.params, &to_scheme_frame(&v, got.label.order)));
    }

    #[test]
    fn every_sample_outer_vertex_certified() {
        let outer = outer_region(&sample()).unwrap();
        let solver = VertexSolver::new(&sample()).unwrap();
        for v in outer.vertices().unwrap() {
            let c = solver.certify(&v).unwrap().expect("certificate");
            assert!(c.ok(), "{v:?}: {c:?}");
        }
    }
}
