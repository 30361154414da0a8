//! Layered-superposition (SLS) schemes for three users: parameter
//! constraints, the parameterized regions, the auxiliary-variable region,
//! rate splits, SINR exponents and per-vertex parameter search.
//!
//! Everything here is written for the `D123` / `F123` schemes; the other ten
//! orders are reached by relabeling users (see [`vertex`]).

pub mod affine;
pub mod sinr;
pub mod vertex;

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{ChannelError, ChannelJson, ChannelMatrix};
use crate::polytope::{lp, LinearInequality, Point, Polytope, PolytopeError};
use crate::rational::{format_rational, int, Rational, Q};
use crate::regions::{RegionError, Variant};

pub use affine::Affine;
pub use sinr::{sinr_exponents, Layer, SinrEntry, SinrReport};
pub use vertex::{certify_vertex, params_for_vertex, Certificate, ParamSource, VertexParams, VertexSolver};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SlsError {
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error("constraint {constraint} violated: {lhs} > {rhs}")]
    ConstraintViolated { constraint: String, lhs: String, rhs: String },
    #[error("scheme has no channel and none was supplied")]
    MissingChannel,
    #[error("rate split has {field} of length {found}, expected {expected}")]
    SplitShape {
        field: &'static str,
        expected: usize,
        found: usize,
    },
}

/// Power-control parameters `(lambda, lambda', gamma, gamma')`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SlsParams {
    #[serde(with = "crate::rational::as_q")]
    pub lambda: Rational,
    #[serde(with = "crate::rational::as_q")]
    pub lambda_p: Rational,
    #[serde(with = "crate::rational::as_q")]
    pub gamma: Rational,
    #[serde(with = "crate::rational::as_q")]
    pub gamma_p: Rational,
}

impl SlsParams {
    pub fn new(lambda: Rational, lambda_p: Rational, gamma: Rational, gamma_p: Rational) -> Self {
        SlsParams {
            lambda,
            lambda_p,
            gamma,
            gamma_p,
        }
    }

    pub fn zero() -> Self {
        Self::from_array([int(0), int(0), int(0), int(0)])
    }

    pub fn from_array(v: [Rational; 4]) -> Self {
        let [lambda, lambda_p, gamma, gamma_p] = v;
        SlsParams::new(lambda, lambda_p, gamma, gamma_p)
    }

    pub fn as_array(&self) -> [&Rational; 4] {
        [&self.lambda, &self.lambda_p, &self.gamma, &self.gamma_p]
    }
}

impl fmt::Display for SlsParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(lambda, lambda', gamma, gamma') = ({}, {}, {}, {})",
            format_rational(&self.lambda),
            format_rational(&self.lambda_p),
            format_rational(&self.gamma),
            format_rational(&self.gamma_p)
        )
    }
}

/// One parameter constraint `lhs <= rhs`, numbered 1 to 10 within its
/// variant; row 10 is the four nonnegativity rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub variant: Variant,
    pub index: usize,
    pub lhs: Affine,
    pub rhs: Affine,
}

impl Constraint {
    pub fn name(&self) -> String {
        let v = match self.variant {
            Variant::D => 'D',
            Variant::F => 'F',
        };
        format!("{v}{} ({} <= {})", self.index, self.lhs, self.rhs)
    }

    pub fn holds(&self, ch: &ChannelMatrix, p: &SlsParams) -> bool {
        self.lhs.eval(ch, p) <= self.rhs.eval(ch, p)
    }

    /// The constraint as a row over the parameter vector.
    pub fn as_param_row(&self, ch: &ChannelMatrix) -> LinearInequality {
        let g = self.lhs - self.rhs;
        LinearInequality::new(g.param_coeffs().iter().map(|&c| int(c as i64)).collect(), -g.alpha_part(ch))
    }
}

pub fn constraints(variant: Variant) -> Vec<Constraint> {
    use affine::{a, GAMMA, GAMMA_P, LAMBDA, LAMBDA_P};
    let (l, lp_, g, gp) = (LAMBDA, LAMBDA_P, GAMMA, GAMMA_P);
    let rows: Vec<(Affine, Affine)> = match variant {
        Variant::D => vec![
            (l + lp_ + g + gp, a(0, 0)),
            (l + lp_, a(1, 1)),
            (l, a(2, 2)),
            (a(0, 1), l + lp_ + g),
            (a(0, 2), l + g),
            (a(1, 0), l + lp_ + gp),
            (a(1, 2), l),
            (a(2, 0), l + gp),
            (a(2, 1), l),
        ],
        Variant::F => vec![
            (l + lp_ + g, a(0, 0)),
            (l + lp_ + gp, a(1, 1)),
            (l, a(2, 2)),
            (a(0, 1), l + lp_ + g + gp),
            (a(0, 2), l + g),
            (a(1, 0), l + lp_),
            (a(1, 2), l),
            (a(2, 0), l),
            (a(2, 1), l + gp),
        ],
    };
    let mut out: Vec<Constraint> = rows
        .into_iter()
        .enumerate()
        .map(|(i, (lhs, rhs))| Constraint {
            variant,
            index: i + 1,
            lhs,
            rhs,
        })
        .collect();
    for p in [l, lp_, g, gp] {
        out.push(Constraint {
            variant,
            index: 10,
            lhs: Affine::ZERO,
            rhs: p,
        });
    }
    out
}

/// Every violated constraint, as `(name, lhs value, rhs value)`.
pub fn constraint_violations(ch: &ChannelMatrix, variant: Variant, p: &SlsParams) -> Vec<(String, Rational, Rational)> {
    constraints(variant)
        .iter()
        .filter_map(|c| {
            let (l, r) = (c.lhs.eval(ch, p), c.rhs.eval(ch, p));
            (l > r).then(|| (c.name(), l, r))
        })
        .collect()
}

pub fn check_constraints(ch: &ChannelMatrix, variant: Variant, p: &SlsParams) -> Result<(), SlsError> {
    require_three(ch)?;
    match constraint_violations(ch, variant, p).into_iter().next() {
        None => Ok(()),
        Some((constraint, l, r)) => Err(SlsError::ConstraintViolated {
            constraint,
            lhs: format_rational(&l),
            rhs: format_rational(&r),
        }),
    }
}

/// All parameter vectors meeting the variant's constraints, as a polytope in
/// `(lambda, lambda', gamma, gamma')`.
pub fn param_feasible_set(ch: &ChannelMatrix, variant: Variant) -> Result<Polytope, SlsError> {
    require_three(ch)?;
    let rows = constraints(variant).iter().map(|c| c.as_param_row(ch)).collect();
    Ok(Polytope::new(4, rows)?)
}

pub(crate) fn require_three(ch: &ChannelMatrix) -> Result<(), SlsError> {
    ch.require_users(3)?;
    ch.require_antennas(3)?;
    Ok(())
}

/// A row `d · coeffs <= rhs` of a parameterized region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegionRow {
    pub d: [i32; 3],
    pub rhs: Affine,
}

pub fn param_region_rows(variant: Variant) -> Vec<RegionRow> {
    use affine::{a, GAMMA, GAMMA_P, LAMBDA, LAMBDA_P};
    let (l, lp_, g, gp) = (LAMBDA, LAMBDA_P, GAMMA, GAMMA_P);
    let (a1, a2, a3) = (a(0, 0), a(1, 1), a(2, 2));
    let two_l = l + l;
    let rows = match variant {
        Variant::D => [
            ([1, 0, 0], a1 - g - gp),
            ([0, 1, 0], a2),
            ([0, 0, 1], a3),
            ([1, 1, 0], a1 + a2 - l - lp_ - g - gp),
            ([1, 0, 1], a1 + a3 - l - g - gp),
            ([0, 1, 1], a2 + a3 - l),
            ([1, 1, 1], a1 + a2 + a3 - two_l - lp_ - g - gp),
        ],
        Variant::F => [
            ([1, 0, 0], a1 - g),
            ([0, 1, 0], a2 - gp),
            ([0, 0, 1], a3),
            ([1, 1, 0], a1 + a2 - l - lp_ - g - gp),
            ([1, 0, 1], a1 + a3 - l - g),
            ([0, 1, 1], a2 + a3 - l - gp),
            ([1, 1, 1], a1 + a2 + a3 - two_l - lp_ - g - gp),
        ],
    };
    rows.into_iter().map(|(d, rhs)| RegionRow { d, rhs }).collect()
}

fn ints(v: &[i32]) -> Vec<Rational> {
    v.iter().map(|&c| int(c as i64)).collect()
}

fn nonneg(dim: usize, idx: usize) -> LinearInequality {
    let mut c = vec![int(0); dim];
    c[idx] = int(-1);
    LinearInequality::new(c, int(0))
}

/// The seven-row region at fixed parameters, plus `d >= 0`.
pub fn param_region(ch: &ChannelMatrix, variant: Variant, p: &SlsParams) -> Result<Polytope, SlsError> {
    check_constraints(ch, variant, p)?;
    let mut rows: Vec<LinearInequality> = (0..3).map(|i| nonneg(3, i)).collect();
    for r in param_region_rows(variant) {
        rows.push(LinearInequality::new(ints(&r.d), r.rhs.eval(ch, p)));
    }
    Ok(Polytope::new(3, rows)?)
}

pub fn param_region_d(ch: &ChannelMatrix, p: &SlsParams) -> Result<Polytope, SlsError> {
    param_region(ch, Variant::D, p)
}

pub fn param_region_f(ch: &ChannelMatrix, p: &SlsParams) -> Result<Polytope, SlsError> {
    param_region(ch, Variant::F, p)
}

/// Caps on `d_{1}, d_{2}, d_{3}, d_{1,2}, d_{1,2,3}`.
pub fn caps(variant: Variant) -> [Affine; 5] {
    use affine::{a, GAMMA, GAMMA_P, LAMBDA, LAMBDA_P};
    let (l, lp_, g, gp) = (LAMBDA, LAMBDA_P, GAMMA, GAMMA_P);
    match variant {
        Variant::D => [a(0, 0) - l - lp_ - g - gp, a(1, 1) - l - lp_, a(2, 2) - l, lp_, l],
        Variant::F => [a(0, 0) - l - lp_ - g, a(1, 1) - l - lp_ - gp, a(2, 2) - l, lp_, l],
    }
}

/// Builds the region over `(d, d_{k}, d_{1,2}, d_{1,2,3}, e, f)` where
/// `e_k = mu_k d_{1,2}` and `f_k = xi_k d_{1,2,3}` linearize the shares, then
/// eliminates everything except `d`.
pub fn full_region(ch: &ChannelMatrix, variant: Variant, p: &SlsParams) -> Result<Polytope, SlsError> {
    check_constraints(ch, variant, p)?;
    const N: usize = 13;
    let (s0, d12, d123, e0, f0) = (3, 6, 7, 8, 10);
    let row = |terms: &[(usize, i64)], rhs: Rational| {
        let mut c = vec![int(0); N];
        for &(i, v) in terms {
            c[i] += int(v);
        }
        LinearInequality::new(c, rhs)
    };
    let mut rows = Vec::new();
    let mut eq = |terms: &[(usize, i64)]| {
        let neg: Vec<(usize, i64)> = terms.iter().map(|&(i, v)| (i, -v)).collect();
        rows.push(row(terms, int(0)));
        rows.push(row(&neg, int(0)));
    };
    eq(&[(0, 1), (s0, -1), (e0, -1), (f0, -1)]);
    eq(&[(1, 1), (s0 + 1, -1), (e0 + 1, -1), (f0 + 1, -1)]);
    eq(&[(2, 1), (s0 + 2, -1), (f0 + 2, -1)]);
    eq(&[(e0, 1), (e0 + 1, 1), (d12, -1)]);
    eq(&[(f0, 1), (f0 + 1, 1), (f0 + 2, 1), (d123, -1)]);
    let cap = caps(variant);
    for (i, var) in [s0, s0 + 1, s0 + 2, d12, d123].into_iter().enumerate() {
        rows.push(row(&[(var, 1)], cap[i].eval(ch, p)));
    }
    for v in 3..N {
        rows.push(nonneg(N, v));
    }
    let full = Polytope::new(N, rows)?;
    Ok(full.fm_eliminate_many(&(3..N).collect::<Vec<_>>())?)
}

pub fn full_region_d123(ch: &ChannelMatrix, p: &SlsParams) -> Result<Polytope, SlsError> {
    full_region(ch, Variant::D, p)
}

pub fn full_region_f123(ch: &ChannelMatrix, p: &SlsParams) -> Result<Polytope, SlsError> {
    full_region(ch, Variant::F, p)
}

/// GDoF carried by each message and how the common messages are shared.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RateSplit {
    #[serde(with = "crate::rational::as_q_vec")]
    pub d_single: Vec<Rational>,
    #[serde(with = "crate::rational::as_q")]
    pub d_pair: Rational,
    #[serde(with = "crate::rational::as_q")]
    pub d_all: Rational,
    #[serde(with = "crate::rational::as_q_vec")]
    pub mu: Vec<Rational>,
    #[serde(with = "crate::rational::as_q_vec")]
    pub xi: Vec<Rational>,
}

impl RateSplit {
    pub fn zero() -> Self {
        RateSplit {
            d_single: vec![int(0); 3],
            d_pair: int(0),
            d_all: int(0),
            mu: vec![int(1), int(0)],
            xi: vec![int(1), int(0), int(0)],
        }
    }

    fn check_shape(&self) -> Result<(), SlsError> {
        for (field, v, n) in [("d_single", &self.d_single, 3), ("mu", &self.mu, 2), ("xi", &self.xi, 3)] {
            if v.len() != n {
                return Err(SlsError::SplitShape {
                    field,
                    expected: n,
                    found: v.len(),
                });
            }
        }
        Ok(())
    }

    /// Per-user GDoF `d_k = d_{k} + mu_k d_{1,2} + xi_k d_{1,2,3}`.
    pub fn induced(&self) -> Result<Point, SlsError> {
        self.check_shape()?;
        Ok((0..3)
            .map(|k| {
                let pair = if k < 2 { &self.mu[k] * &self.d_pair } else { int(0) };
                &self.d_single[k] + pair + &self.xi[k] * &self.d_all
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlsScheme {
    pub variant: Variant,
    pub params: SlsParams,
    pub split: RateSplit,
    pub channel: ChannelMatrix,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SlsSchemeJson {
    pub variant: Variant,
    pub params: SlsParams,
    pub split: RateSplit,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelJson>,
}

impl SlsScheme {
    pub fn to_json(&self) -> SlsSchemeJson {
        SlsSchemeJson {
            variant: self.variant,
            params: self.params.clone(),
            split: self.split.clone(),
            channel: Some(self.channel.to_json()),
        }
    }

    /// Builds a scheme from JSON; `fallback` supplies the channel when the
    /// document has none.
    pub fn from_json(j: &SlsSchemeJson, fallback: Option<&ChannelMatrix>) -> Result<Self, SlsError> {
        let channel = match (&j.channel, fallback) {
            (Some(c), _) => ChannelMatrix::from_json(c)?,
            (None, Some(c)) => c.clone(),
            (None, None) => return Err(SlsError::MissingChannel),
        };
        require_three(&channel)?;
        j.split.check_shape()?;
        Ok(SlsScheme {
            variant: j.variant,
            params: j.params.clone(),
            split: j.split.clone(),
            channel,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplitCheck {
    pub valid: bool,
    #[serde(with = "crate::rational::as_q_vec")]
    pub d: Point,
    pub failures: Vec<String>,
}

/// Checks the caps, nonnegativity and share sums of the split.
pub fn validate_rate_split(s: &SlsScheme) -> Result<SplitCheck, SlsError> {
    require_three(&s.channel)?;
    let d = s.split.induced()?;
    let sp = &s.split;
    let mut failures = Vec::new();
    let names = ["d_{1}", "d_{2}", "d_{3}", "d_{1,2}", "d_{1,2,3}"];
    let loads = [&sp.d_single[0], &sp.d_single[1], &sp.d_single[2], &sp.d_pair, &sp.d_all];
    for ((name, load), cap) in names.iter().zip(loads).zip(caps(s.variant)) {
        let c = cap.eval(&s.channel, &s.params);
        if load.is_negative() {
            failures.push(format!("{name} = {} is negative", format_rational(load)));
        }
        if *load > c {
            failures.push(format!("{name} = {} exceeds {cap} = {}", format_rational(load), format_rational(&c)));
        }
    }
    for (name, shares) in [("mu", &sp.mu), ("xi", &sp.xi)] {
        if shares.iter().any(|x| x.is_negative()) {
            failures.push(format!("{name} has a negative share"));
        }
        let total: Rational = shares.iter().sum();
        if !total.is_one() {
            failures.push(format!("{name} sums to {}", format_rational(&total)));
        }
    }
    Ok(SplitCheck {
        valid: failures.is_empty(),
        d,
        failures,
    })
}

/// Finds a split under the caps of `variant` inducing exactly `d`, if any.
pub fn find_rate_split(ch: &ChannelMatrix, variant: Variant, p: &SlsParams, d: &[Rational]) -> Result<Option<RateSplit>, SlsError> {
    require_three(ch)?;
    // Variables: s1 s2 s3 e1 e2 f1 f2 f3.
    const N: usize = 8;
    let row = |terms: &[(usize, i64)], rhs: Rational| {
        let mut c = vec![int(0); N];
        for &(i, v) in terms {
            c[i] = int(v);
        }
        LinearInequality::new(c, rhs)
    };
    let cap: Vec<Rational> = caps(variant).iter().map(|c| c.eval(ch, p)).collect();
    let mut rows = vec![
        row(&[(0, 1)], cap[0].clone()),
        row(&[(1, 1)], cap[1].clone()),
        row(&[(2, 1)], cap[2].clone()),
        row(&[(3, 1), (4, 1)], cap[3].clone()),
        row(&[(5, 1), (6, 1), (7, 1)], cap[4].clone()),
    ];
    for (k, terms) in [vec![(0, 1), (3, 1), (5, 1)], vec![(1, 1), (4, 1), (6, 1)], vec![(2, 1), (7, 1)]]
        .into_iter()
        .enumerate()
    {
        let neg: Vec<_> = terms.iter().map(|&(i, v)| (i, -v)).collect();
        rows.push(row(&terms, d[k].clone()));
        rows.push(row(&neg, -d[k].clone()));
    }
    for v in 0..N {
        rows.push(nonneg(N, v));
    }
    let refs: Vec<&LinearInequality> = rows.iter().collect();
    let x = match lp::maximize(&vec![int(0); N], &refs) {
        lp::LpOutcome::Optimal { point, .. } => point,
        _ => return Ok(None),
    };
    let d_pair = &x[3] + &x[4];
    let d_all = &x[5] + &x[6] + &x[7];
    let mu = if d_pair.is_zero() {
        vec![int(1), int(0)]
    } else {
        vec![&x[3] / &d_pair, &x[4] / &d_pair]
    };
    let xi = if d_all.is_zero() {
        vec![int(1), int(0), int(0)]
    } else {
        (5..8).map(|i| &x[i] / &d_all).collect()
    };
    Ok(Some(RateSplit {
        d_single: x[0..3].to_vec(),
        d_pair,
        d_all,
        mu,
        xi,
    }))
}

/// Wraps a rational so it prints as `p/q` in JSON.
pub(crate) fn q(r: &Rational) -> Q {
    Q(r.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::{poly_equal, poly_subset};
    use crate::rational::parse_rational;
    use crate::regions::{achievable_d_hat, achievable_f_hat};

    fn r(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    pub(crate) fn sample() -> ChannelMatrix {
        ChannelMatrix::from_ratios(&[
            &[(6, 5), (11, 10), (9, 10)],
            &[(9, 10), (13, 10), (7, 10)],
            &[(7, 10), (9, 10), (1, 1)],
        ])
        .unwrap()
    }

    fn sample_params() -> SlsParams {
        SlsParams::new(r("0.9"), r("0.2"), int(0), int(0))
    }

    fn rows_of(p: &Polytope) -> Vec<(Vec<Rational>, Rational)> {
        p.rows().iter().map(|r| (r.coeffs().to_vec(), r.rhs().clone())).collect()
    }

    #[test]
    fn sample_param_region_rows() {
        let p = param_region_d(&sample(), &sample_params()).unwrap();
        let rows = rows_of(&p);
        let want = [
            ([1, 0, 0], "1.2"),
            ([0, 1, 0], "1.3"),
            ([0, 0, 1], "1"),
            ([1, 1, 0], "1.4"),
            ([1, 0, 1], "1.3"),
            ([0, 1, 1], "1.4"),
            ([1, 1, 1], "1.5"),
        ];
        for (c, rhs) in want {
            assert!(rows.contains(&(ints(&c), r(rhs))), "{c:?}");
        }
        assert_eq!(rows.len(), 10);
        let full = full_region_d123(&sample(), &sample_params()).unwrap();
        assert!(poly_equal(&full, &p).unwrap());
        let hat = achievable_d_hat(&sample(), [0, 1, 2]).unwrap().unwrap();
        assert!(poly_subset(&p, &hat).unwrap());
    }

    #[test]
    fn constraint_errors_name_the_row() {
        let p = SlsParams::new(r("0.9"), r("0.1"), int(0), int(0));
        match param_region_d(&sample(), &p) {
            Err(SlsError::ConstraintViolated { constraint, lhs, rhs }) => {
                assert!(constraint.starts_with("D4"), "{constraint}");
                assert_eq!((lhs.as_str(), rhs.as_str()), ("11/10", "1"));
            }
            o => panic!("{o:?}"),
        }
        let neg = SlsParams::new(int(1), int(-1), int(0), int(0));
        assert!(check_constraints(&sample(), Variant::F, &neg).is_err());
    }

    #[test]
    fn zero_channel_regions() {
        let z = ChannelMatrix::new(vec![vec![int(0); 3]; 3]).unwrap();
        for v in [Variant::D, Variant::F] {
            let p = param_region(&z, v, &SlsParams::zero()).unwrap();
            assert_eq!(p.vertices().unwrap(), vec![vec![int(0); 3]]);
            let f = full_region(&z, v, &SlsParams::zero()).unwrap();
            assert_eq!(f.vertices().unwrap(), vec![vec![int(0); 3]]);
        }
    }

    #[test]
    fn f_chain_on_sample() {
        let p = SlsParams::new(r("0.9"), r("0.2"), int(0), int(0));
        let bar = param_region_f(&sample(), &p).unwrap();
        let full = full_region_f123(&sample(), &p).unwrap();
        assert!(poly_equal(&bar, &full).unwrap());
        let hat = achievable_f_hat(&sample(), [0, 1, 2]).unwrap().unwrap();
        assert!(poly_subset(&bar, &hat).unwrap());
    }

    #[test]
    fn rate_split_checks() {
        let zero = SlsScheme {
            variant: Variant::D,
            params: sample_params(),
            split: RateSplit::zero(),
            channel: sample(),
        };
        let c = validate_rate_split(&zero).unwrap();
        assert!(c.valid);
        assert_eq!(c.d, vec![int(0); 3]);

        let mut s = zero.clone();
        s.split = RateSplit {
            d_single: vec![r("0.1"), r("0.2"), r("0.1")],
            d_pair: r("0.2"),
            d_all: r("0.9"),
            mu: vec![int(1), int(0)],
            xi: vec![int(1), int(0), int(0)],
        };
        let c = validate_rate_split(&s).unwrap();
        assert!(c.valid, "{:?}", c.failures);
        assert_eq!(c.d, vec![r("1.2"), r("0.2"), r("0.1")]);
        s.split.d_all = int(1);
        assert!(!validate_rate_split(&s).unwrap().valid);
        s.split.d_all = r("0.9");
        s.split.mu = vec![r("0.5"), r("0.6")];
        assert!(!validate_rate_split(&s).unwrap().valid);
    }

    #[test]
    fn finds_split_for_corner() {
        let d = vec![r("1.2"), r("0.2"), r("0.1")];
        let split = find_rate_split(&sample(), Variant::D, &sample_params(), &d).unwrap().unwrap();
        assert_eq!(split.induced().unwrap(), d);
        let too_much = vec![r("1.3"), int(0), int(0)];
        assert!(find_rate_split(&sample(), Variant::D, &sample_params(), &too_much).unwrap().is_none());
    }

    #[test]
    fn scheme_json_round_trip() {
        let s = SlsScheme {
            variant: Variant::F,
            params: sample_params(),
            split: RateSplit::zero(),
            channel: sample(),
        };
        let text = serde_json::to_string(&s.to_json()).unwrap();
        assert!(text.contains("\"variant\":\"F123\""));
        let back: SlsSchemeJson = serde_json::from_str(&text).unwrap();
        assert_eq!(SlsScheme::from_json(&back, None).unwrap(), s);
    }

    mod props {
        use super::super::sinr::{decoding_order, exponent_branches};
        use super::super::vertex::to_scheme_frame;
        use super::super::*;
        use crate::polytope::poly_equal;
        use crate::rational::ratio;
        use crate::regions::{achievability_verdict, outer_region};
        use crate::testgen::conforming_channel;
        use proptest::prelude::*;

        /// A convex combination of the feasible set's vertices.
        fn blend(set: &Polytope, weights: &[i64]) -> Option<SlsParams> {
            let verts = set.vertices().unwrap();
            if verts.is_empty() {
                return None;
            }
            let w: Vec<i64> = verts.iter().zip(weights.iter().cycle()).map(|(_, w)| *w).collect();
            let total: i64 = w.iter().sum();
            if total == 0 {
                return Some(SlsParams::from_array(verts[0].clone().try_into().unwrap()));
            }
            let mut p = vec![int(0); 4];
            for (v, w) in verts.iter().zip(&w) {
                for j in 0..4 {
                    p[j] += &v[j] * ratio(*w, total);
                }
            }
            Some(SlsParams::from_array(p.try_into().unwrap()))
        }

        fn variants() -> impl Strategy<Value = Variant> {
            prop_oneof![Just(Variant::D), Just(Variant::F)]
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(40))]

            #[test]
            fn chain_matches_closed_form(ch in conforming_channel(), var in variants(), w in proptest::collection::vec(0i64..=4, 8)) {
                let Some(p) = blend(&param_feasible_set(&ch, var).unwrap(), &w) else { return Ok(()) };
                prop_assert!(check_constraints(&ch, var, &p).is_ok());
                prop_assert!(poly_equal(&full_region(&ch, var, &p).unwrap(), &param_region(&ch, var, &p).unwrap()).unwrap());
            }

            #[test]
            fn raw_exponents_nonnegative(ch in conforming_channel(), var in variants(), w in proptest::collection::vec(0i64..=4, 8)) {
                let Some(p) = blend(&param_feasible_set(&ch, var).unwrap(), &w) else { return Ok(()) };
                for rx in 0..3 {
                    for &layer in decoding_order(rx) {
                        let raw = exponent_branches(var, rx, layer).iter().map(|b| b.eval(&ch, &p)).min().unwrap();
                        prop_assert!(raw >= int(0), "{:?} rx{} {:?} {}", var, rx, layer, p);
                    }
                }
            }

            #[test]
            fn matched_part_vertices_have_params(ch in conforming_channel()) {
                let v = achievability_verdict(&ch).unwrap();
                let label = v.matched.unwrap();
                let solver = VertexSolver::new(&ch).unwrap();
                for x in v.parts[&label].as_ref().unwrap().vertices().unwrap() {
                    let vp = solver.params(&x).unwrap();
                    prop_assert!(vp.is_some(), "no params for {:?}", x);
                    let vp = vp.unwrap();
                    let r = solver.channel().relabel_users(&vp.label.order);
                    let region = param_region(&r, vp.label.variant, &vp.params).unwrap();
                    prop_assert!(region.contains_point(&to_scheme_frame(&x, vp.label.order)).unwrap());
                }
            }

            #[test]
            fn shrinking_a_split_keeps_it_feasible(ch in conforming_channel(), pick in any::<prop::sample::Index>(), cut in proptest::collection::vec(0i64..=16, 5)) {
                let solver = VertexSolver::new(&ch).unwrap();
                let verts = outer_region(&ch).unwrap().vertices().unwrap();
                let cert = solver.certify(&verts[pick.index(verts.len())]).unwrap().unwrap();
                prop_assert!(cert.ok());
                let mut s = solver.scheme(&cert);
                let f: Vec<Rational> = cut.iter().map(|&c| ratio(c, 16)).collect();
                for k in 0..3 {
                    s.split.d_single[k] *= &f[k];
                }
                s.split.d_pair *= &f[3];
                s.split.d_all *= &f[4];
                prop_assert!(validate_rate_split(&s).unwrap().valid);
                prop_assert!(sinr_exponents(&s).unwrap().feasible);
            }
        }
    }
}
