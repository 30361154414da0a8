//! K-user outer bounds from bounding patterns: permutations, merges, pattern
//! generation and the resulting sum-GDoF inequalities.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;

use itertools::Itertools;
use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{compute_deltas, ChannelError, ChannelMatrix, DeltaSet};
use crate::polytope::{LinearInequality, Polytope, PolytopeError};
use crate::rational::{format_rational, int, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KUserError {
    #[error("invalid permutation {0:?}: {1}")]
    BadPermutation(Vec<u8>, &'static str),
    #[error("element {shared} does not occur in both {p} and {q}")]
    SharedMissing { shared: u8, p: Permutation, q: Permutation },
    #[error("merge needs permutations of length at least 2")]
    TooShort,
    #[error("ordering {given:?} is not an arrangement of {expected:?}")]
    BadOrdering { given: Vec<u8>, expected: Vec<u8> },
    #[error("generation budget must allow at least one pattern")]
    ZeroBudget,
    #[error("K = {0} is outside 2..=8")]
    BadK(usize),
    #[error("pattern refers to user {user} but K = {k}")]
    UserOutOfRange { user: u8, k: usize },
    #[error("replayed derivation does not reproduce the pattern")]
    ReplayMismatch,
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
}

pub type Result<T> = std::result::Result<T, KUserError>;

/// Ordered arrangement of distinct users (1-based); `0` appears only in the
/// seed shape `(0, x)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct Permutation(Vec<u8>);

impl Permutation {
    pub fn new(elems: Vec<u8>) -> Result<Self> {
        if elems.is_empty() {
            return Err(KUserError::BadPermutation(elems, "empty"));
        }
        if elems.iter().duplicates().next().is_some() {
            return Err(KUserError::BadPermutation(elems, "repeated element"));
        }
        if let Some(pos) = elems.iter().position(|&e| e == 0) {
            if pos != 0 || elems.len() != 2 {
                return Err(KUserError::BadPermutation(elems, "0 only allowed as (0, x)"));
            }
        }
        Ok(Permutation(elems))
    }

    pub fn elems(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn head(&self) -> u8 {
        self.0[0]
    }

    pub fn position(&self, x: u8) -> Option<usize> {
        self.0.iter().position(|&e| e == x)
    }

    pub fn is_seed_head(&self) -> bool {
        self.0.len() == 2 && self.0[0] == 0
    }

    /// Users at positions 2 and later; these carry the `d` coefficients.
    pub fn tail(&self) -> &[u8] {
        &self.0[1..]
    }
}

impl TryFrom<Vec<u8>> for Permutation {
    type Error = KUserError;
    fn try_from(v: Vec<u8>) -> Result<Self> {
        Permutation::new(v)
    }
}

impl From<Permutation> for Vec<u8> {
    fn from(p: Permutation) -> Vec<u8> {
        p.0
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.0.iter().join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeResult {
    pub u1: Permutation,
    pub u2: Permutation,
    pub u3: Permutation,
    pub u4: Permutation,
}

fn check_arrangement(given: &[u8], expected: &[u8]) -> Result<()> {
    let mut a = given.to_vec();
    let mut b = expected.to_vec();
    a.sort_unstable();
    b.sort_unstable();
    if a != b || given.iter().duplicates().next().is_some() {
        return Err(KUserError::BadOrdering {
            given: given.to_vec(),
            expected: expected.to_vec(),
        });
    }
    Ok(())
}

/// Tails after the shared element: `(p₊ ∩ q₊, p₊ ∪ q₊)` in ascending order.
fn merge_sets(p: &Permutation, q: &Permutation, shared: u8) -> Result<(usize, usize, Vec<u8>, Vec<u8>)> {
    if p.len() < 2 || q.len() < 2 {
        return Err(KUserError::TooShort);
    }
    let (Some(k), Some(l)) = (p.position(shared), q.position(shared)) else {
        return Err(KUserError::SharedMissing {
            shared,
            p: p.clone(),
            q: q.clone(),
        });
    };
    let pp: Vec<u8> = p.0[k + 1..].to_vec();
    let qp: Vec<u8> = q.0[l + 1..].to_vec();
    let inter: Vec<u8> = pp.iter().copied().filter(|x| qp.contains(x)).sorted().collect();
    let union: Vec<u8> = pp.iter().chain(&qp).copied().sorted().dedup().collect();
    Ok((k, l, inter, union))
}

/// Merge of `p` and `q` at `shared` with the given tail orderings.
pub fn merge(p: &Permutation, q: &Permutation, shared: u8, u3_order: &[u8], u4_order: &[u8]) -> Result<MergeResult> {
    let (k, l, inter, union) = merge_sets(p, q, shared)?;
    check_arrangement(u3_order, &inter)?;
    check_arrangement(u4_order, &union)?;
    let lead = |tail: &[u8]| Permutation(std::iter::once(shared).chain(tail.iter().copied()).collect());
    Ok(MergeResult {
        u1: Permutation(p.0[..=k].to_vec()),
        u2: Permutation(q.0[..=l].to_vec()),
        u3: lead(u3_order),
        u4: lead(u4_order),
    })
}

/// Longest tail for which every ordering is tried; longer tails use ascending order only.
pub const ORDERING_CAP: usize = 4;

fn orderings(set: &[u8]) -> Vec<Vec<u8>> {
    if set.len() <= ORDERING_CAP {
        set.iter().copied().permutations(set.len()).collect()
    } else {
        vec![set.to_vec()]
    }
}

/// Every merge of `p` and `q` at `shared`, subject to [`ORDERING_CAP`].
pub fn merges_at(p: &Permutation, q: &Permutation, shared: u8) -> Result<Vec<MergeResult>> {
    let (_, _, inter, union) = merge_sets(p, q, shared)?;
    let mut out = Vec::new();
    for o3 in orderings(&inter) {
        for o4 in orderings(&union) {
            out.push(merge(p, q, shared, &o3, &o4)?);
        }
    }
    Ok(out)
}

/// `f(p)`: zero for singletons, `delta_x` for `(0, x)`, otherwise the sum of
/// `delta_{p(k), p(k-1)}` along the permutation.
pub fn f_of_p(p: &Permutation, ds: &DeltaSet) -> Rational {
    if p.len() == 1 {
        return int(0);
    }
    if p.is_seed_head() {
        return ds.single(p.0[1] as usize - 1).clone();
    }
    p.0.windows(2)
        .map(|w| ds.pair(w[1] as usize - 1, w[0] as usize - 1).clone())
        .fold(int(0), |a, b| a + b)
}

/// One step of a pattern derivation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Step {
    /// Adds the seed `((0, p(1)), p̄)`; the first step starts the pattern.
    Seed { p: Permutation },
    /// Replaces `q1, q2` of `B` by `u3, u4` and adds `u1, u2` to `A`.
    Merge {
        q1: Permutation,
        q2: Permutation,
        shared: u8,
        u3: Permutation,
        u4: Permutation,
    },
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Step::Seed { p } => write!(f, "seed {p}"),
            Step::Merge { q1, q2, shared, u3, u4 } => write!(f, "merge {q1} and {q2} at {shared} -> {u3}, {u4}"),
        }
    }
}

/// A pair of permutation multisets `(A, B)` with the steps that built it.
/// Both multisets are kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundingPattern {
    pub a: Vec<Permutation>,
    pub b: Vec<Permutation>,
    pub derivation: Vec<Step>,
}

type PatternKey = (Vec<Permutation>, Vec<Permutation>);

impl BoundingPattern {
    pub fn seed(p: &Permutation) -> Result<Self> {
        let mut out = BoundingPattern {
            a: Vec::new(),
            b: Vec::new(),
            derivation: Vec::new(),
        };
        out.add_seed(p)?;
        Ok(out)
    }

    fn add_seed(&mut self, p: &Permutation) -> Result<()> {
        if p.len() < 2 || p.0.contains(&0) {
            return Err(KUserError::BadPermutation(p.0.clone(), "seed needs two or more users"));
        }
        insert_sorted(&mut self.a, Permutation(vec![0, p.head()]));
        insert_sorted(&mut self.b, p.clone());
        self.derivation.push(Step::Seed { p: p.clone() });
        Ok(())
    }

    /// Multiset sum of two patterns.
    pub fn combine(&self, other: &BoundingPattern) -> BoundingPattern {
        let mut out = self.clone();
        for x in &other.a {
            insert_sorted(&mut out.a, x.clone());
        }
        for x in &other.b {
            insert_sorted(&mut out.b, x.clone());
        }
        out.derivation.extend(other.derivation.iter().cloned());
        out
    }

    /// Applies a merge of two members of `B`.
    pub fn apply_merge(&self, q1: &Permutation, q2: &Permutation, m: &MergeResult) -> Result<BoundingPattern> {
        let mut out = self.clone();
        for q in [q1, q2] {
            let i = out.b.iter().position(|x| x == q).ok_or_else(|| KUserError::SharedMissing {
                shared: m.u3.head(),
                p: q1.clone(),
                q: q2.clone(),
            })?;
            out.b.remove(i);
        }
        insert_sorted(&mut out.a, m.u1.clone());
        insert_sorted(&mut out.a, m.u2.clone());
        insert_sorted(&mut out.b, m.u3.clone());
        insert_sorted(&mut out.b, m.u4.clone());
        out.derivation.push(Step::Merge {
            q1: q1.clone(),
            q2: q2.clone(),
            shared: m.u3.head(),
            u3: m.u3.clone(),
            u4: m.u4.clone(),
        });
        Ok(out)
    }

    /// Rebuilds a pattern from its derivation.
    pub fn replay(steps: &[Step]) -> Result<BoundingPattern> {
        let mut out = BoundingPattern {
            a: Vec::new(),
            b: Vec::new(),
            derivation: Vec::new(),
        };
        for s in steps {
            match s {
                Step::Seed { p } => out.add_seed(p)?,
                Step::Merge { q1, q2, shared, u3, u4 } => {
                    let m = merge(q1, q2, *shared, u3.tail(), u4.tail())?;
                    out = out.apply_merge(q1, q2, &m)?;
                }
            }
        }
        Ok(out)
    }

    /// Checks that replaying the derivation gives back this pattern.
    pub fn verify(&self) -> Result<()> {
        if BoundingPattern::replay(&self.derivation)? == *self {
            Ok(())
        } else {
            Err(KUserError::ReplayMismatch)
        }
    }

    pub fn size(&self) -> usize {
        self.a.len() + self.b.len()
    }

    /// Number of merges in the derivation.
    pub fn depth(&self) -> usize {
        self.derivation.iter().filter(|s| matches!(s, Step::Merge { .. })).count()
    }

    pub fn key(&self) -> PatternKey {
        (self.a.clone(), self.b.clone())
    }

    pub fn max_user(&self) -> u8 {
        self.a.iter().chain(&self.b).flat_map(|p| p.0.iter().copied()).max().unwrap_or(0)
    }

    fn members(&self) -> impl Iterator<Item = (&Permutation, bool)> {
        self.a.iter().map(|p| (p, false)).chain(self.b.iter().map(|p| (p, true)))
    }
}

impl fmt::Display for BoundingPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items = self.members().map(|(p, bar)| if bar { format!("~{p}") } else { p.to_string() });
        write!(f, "{{{}}}", items.format(", "))
    }
}

fn insert_sorted(v: &mut Vec<Permutation>, p: Permutation) {
    let i = v.partition_point(|x| *x <= p);
    v.insert(i, p);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationBudget {
    pub max_depth: usize,
    pub max_size: usize,
    pub max_patterns: usize,
}

impl Default for GenerationBudget {
    fn default() -> Self {
        GenerationBudget {
            max_depth: 2,
            max_size: 8,
            max_patterns: 100_000,
        }
    }
}

impl GenerationBudget {
    pub fn with_depth(depth: usize) -> Self {
        GenerationBudget {
            max_depth: depth,
            ..Self::default()
        }
    }

    fn check(&self) -> Result<()> {
        if self.max_size < 2 || self.max_patterns == 0 {
            return Err(KUserError::ZeroBudget);
        }
        Ok(())
    }
}

/// What the budget cut off during generation.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truncation {
    pub emitted: usize,
    /// Some pattern was dropped because `max_patterns` was reached.
    pub pattern_cap_hit: bool,
    /// Some merge was skipped because of `max_depth`.
    pub depth_limited: bool,
    /// Some extension was skipped because of `max_size`.
    pub size_limited: bool,
}

impl Truncation {
    pub fn any(&self) -> bool {
        self.pattern_cap_hit || self.depth_limited || self.size_limited
    }
}

/// Every permutation of every subset of `[K]` with at least two users.
pub fn seed_permutations(k: usize) -> Vec<Permutation> {
    let users: Vec<u8> = (1..=k as u8).collect();
    (2..=k)
        .flat_map(|n| users.iter().copied().permutations(n).map(Permutation).collect::<Vec<_>>())
        .collect()
}

/// Breadth-first stream of distinct bounding patterns within a budget.
/// Seeds come first; each emitted pattern is then extended by one more
/// seed and by every merge of two members of its `B`.
pub struct PatternStream {
    seeds: Vec<Permutation>,
    budget: GenerationBudget,
    queue: VecDeque<BoundingPattern>,
    seen: HashSet<PatternKey>,
    truncation: Truncation,
}

pub fn generate_patterns(k: usize, budget: GenerationBudget) -> Result<PatternStream> {
    if !(2..=8).contains(&k) {
        return Err(KUserError::BadK(k));
    }
    budget.check()?;
    let seeds = seed_permutations(k);
    let mut s = PatternStream {
        seeds: seeds.clone(),
        budget,
        queue: VecDeque::new(),
        seen: HashSet::new(),
        truncation: Truncation::default(),
    };
    for p in &seeds {
        s.offer(BoundingPattern::seed(p)?);
    }
    Ok(s)
}

impl PatternStream {
    pub fn truncation(&self) -> &Truncation {
        &self.truncation
    }

    fn offer(&mut self, pat: BoundingPattern) {
        if pat.size() > self.budget.max_size {
            self.truncation.size_limited = true;
            return;
        }
        let key = pat.key();
        if self.seen.contains(&key) {
            return;
        }
        if self.seen.len() >= self.budget.max_patterns {
            self.truncation.pattern_cap_hit = true;
            return;
        }
        self.seen.insert(key);
        self.queue.push_back(pat);
    }

    fn expand(&mut self, pat: &BoundingPattern) {
        if pat.size() + 2 > self.budget.max_size {
            self.truncation.size_limited = true;
            return;
        }
        for i in 0..self.seeds.len() {
            let mut next = pat.clone();
            next.add_seed(&self.seeds[i]).expect("seeds are valid");
            self.offer(next);
        }
        if pat.depth() >= self.budget.max_depth {
            self.truncation.depth_limited = true;
            return;
        }
        for i in 0..pat.b.len() {
            for j in i + 1..pat.b.len() {
                let (q1, q2) = (&pat.b[i], &pat.b[j]);
                if q1.len() < 2 || q2.len() < 2 || (j > i + 1 && pat.b[j - 1] == *q2) {
                    continue;
                }
                if i > 0 && pat.b[i - 1] == *q1 {
                    continue;
                }
                for &shared in q1.elems().iter().filter(|x| q2.elems().contains(x)) {
                    for m in merges_at(q1, q2, shared).expect("shared element present") {
                        let next = pat.apply_merge(q1, q2, &m).expect("members present");
                        self.offer(next);
                    }
                }
            }
        }
    }
}

impl Iterator for PatternStream {
    type Item = BoundingPattern;

    fn next(&mut self) -> Option<BoundingPattern> {
        let pat = self.queue.pop_front()?;
        self.expand(&pat);
        self.truncation.emitted += 1;
        Some(pat)
    }
}

/// `sum_i coeffs[i] * d_i ≤ rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GdofBound {
    pub coeffs: Vec<u32>,
    #[serde(with = "crate::rational::as_q")]
    pub rhs: Rational,
    pub provenance: String,
}

impl GdofBound {
    pub fn to_row(&self) -> LinearInequality {
        LinearInequality::new(self.coeffs.iter().map(|&c| int(c as i64)).collect(), self.rhs.clone())
    }
}

impl fmt::Display for GdofBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.coeffs.iter().enumerate().filter(|(_, c)| **c > 0).map(|(i, &c)| {
            if c == 1 {
                format!("d{}", i + 1)
            } else {
                format!("{c}*d{}", i + 1)
            }
        });
        let lhs = terms.format(" + ").to_string();
        let lhs = if lhs.is_empty() { "0".to_string() } else { lhs };
        write!(f, "{lhs} <= {}", format_rational(&self.rhs))
    }
}

fn coeffs_of(pat: &BoundingPattern, k: usize) -> Result<Vec<u32>> {
    let mut c = vec![0u32; k];
    for (p, _) in pat.members() {
        for &u in p.tail() {
            let slot = c.get_mut(u as usize - 1).ok_or(KUserError::UserOutOfRange { user: u, k })?;
            *slot += 1;
        }
    }
    Ok(c)
}

pub fn bound_from_pattern(pat: &BoundingPattern, ds: &DeltaSet) -> Result<GdofBound> {
    let k = ds.delta_i.len();
    if pat.max_user() as usize > k {
        return Err(KUserError::UserOutOfRange { user: pat.max_user(), k });
    }
    Ok(GdofBound {
        coeffs: coeffs_of(pat, k)?,
        rhs: pat.members().map(|(p, _)| f_of_p(p, ds)).fold(int(0), |a, b| a + b),
        provenance: pat.to_string(),
    })
}

/// A channel-free form of a bound: coefficients plus the multiplicity of
/// each `delta_i` and `delta_ij` on the right-hand side.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct SymbolicBound {
    coeffs: Vec<u32>,
    single: Vec<u32>,
    pair: Vec<u32>,
}

impl SymbolicBound {
    fn of(pat: &BoundingPattern, k: usize) -> Result<Self> {
        let mut single = vec![0u32; k];
        let mut pair = vec![0u32; k * k];
        for (p, _) in pat.members() {
            if p.is_seed_head() {
                single[p.0[1] as usize - 1] += 1;
            } else {
                for w in p.0.windows(2) {
                    pair[(w[1] as usize - 1) * k + (w[0] as usize - 1)] += 1;
                }
            }
        }
        Ok(SymbolicBound {
            coeffs: coeffs_of(pat, k)?,
            single,
            pair,
        })
    }

    fn rhs(&self, ds: &DeltaSet) -> Rational {
        let k = self.single.len();
        let mut s = int(0);
        for (i, &n) in self.single.iter().enumerate() {
            if n > 0 {
                s += ds.single(i) * int(n as i64);
            }
        }
        for (idx, &n) in self.pair.iter().enumerate() {
            if n > 0 {
                s += ds.pair(idx / k, idx % k) * int(n as i64);
            }
        }
        s
    }
}

/// Generated patterns for one `K` and budget, reduced to one representative
/// per distinct channel-free bound.
#[derive(Debug, Clone)]
pub struct PatternCatalog {
    pub k: usize,
    pub budget: GenerationBudget,
    pub truncation: Truncation,
    pub patterns_seen: usize,
    entries: Vec<(SymbolicBound, BoundingPattern)>,
}

impl PatternCatalog {
    pub fn build(k: usize, budget: GenerationBudget) -> Result<Self> {
        let mut stream = generate_patterns(k, budget)?;
        let mut index: HashMap<SymbolicBound, usize> = HashMap::new();
        let mut entries = Vec::new();
        let mut seen = 0;
        for pat in stream.by_ref() {
            seen += 1;
            let sym = SymbolicBound::of(&pat, k)?;
            if !index.contains_key(&sym) {
                index.insert(sym.clone(), entries.len());
                entries.push((sym, pat));
            }
        }
        Ok(PatternCatalog {
            k,
            budget,
            truncation: stream.truncation().clone(),
            patterns_seen: seen,
            entries,
        })
    }

    /// Distinct bounds in the catalog.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn patterns(&self) -> impl Iterator<Item = &BoundingPattern> {
        self.entries.iter().map(|(_, p)| p)
    }
}

/// A surviving row of the outer-bound polytope with the pattern behind it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundRow {
    pub bound: GdofBound,
    pub pattern: Option<BoundingPattern>,
}

#[derive(Debug, Clone)]
pub struct KBounds {
    pub polytope: Polytope,
    pub rows: Vec<BoundRow>,
    pub truncation: Truncation,
    pub patterns_seen: usize,
}

pub fn enumerate_outer_bounds(ch: &ChannelMatrix, budget: GenerationBudget) -> Result<KBounds> {
    let catalog = PatternCatalog::build(ch.users(), budget)?;
    outer_bounds_from_catalog(ch, &catalog)
}

fn scaled_key(c: &[u32]) -> (Vec<u32>, u32) {
    let g = c.iter().fold(0u32, |g, &x| g.gcd(&x)).max(1);
    (c.iter().map(|x| x / g).collect(), g)
}

/// Evaluates a catalog on one channel. Rows sharing a direction keep only the
/// smallest right-hand side as they stream in; the survivors are then pruned
/// exactly.
pub fn outer_bounds_from_catalog(ch: &ChannelMatrix, catalog: &PatternCatalog) -> Result<KBounds> {
    let k = catalog.k;
    if ch.users() != k {
        return Err(KUserError::BadK(ch.users()));
    }
    let ds = compute_deltas(ch);
    let mut best: BTreeMap<Vec<u32>, (Rational, Option<usize>)> = BTreeMap::new();
    for i in 0..k {
        let mut c = vec![0u32; k];
        c[i] = 1;
        best.insert(c, (ds.single(i).clone(), None));
    }
    for (n, (sym, _)) in catalog.entries.iter().enumerate() {
        let (dir, g) = scaled_key(&sym.coeffs);
        if g == 0 || dir.iter().all(|&x| x == 0) {
            continue;
        }
        let r = sym.rhs(&ds) / int(g as i64);
        match best.get(&dir) {
            Some((cur, _)) if *cur <= r => {}
            _ => {
                best.insert(dir, (r, Some(n)));
            }
        }
    }
    let mut rows = Vec::new();
    let mut by_row: Vec<BoundRow> = Vec::new();
    for i in 0..k {
        let mut c = vec![int(0); k];
        c[i] = int(-1);
        rows.push(LinearInequality::new(c, int(0)));
    }
    for (dir, (rhs, src)) in &best {
        let row = LinearInequality::new(dir.iter().map(|&c| int(c as i64)).collect(), rhs.clone());
        rows.push(row);
        let (bound, pattern) = match src {
            Some(n) => {
                let pat = &catalog.entries[*n].1;
                (bound_from_pattern(pat, &ds)?, Some(pat.clone()))
            }
            None => {
                let i = dir.iter().position(|&c| c == 1).expect("unit row");
                (
                    GdofBound {
                        coeffs: dir.clone(),
                        rhs: rhs.clone(),
                        provenance: format!("d{} <= delta_{}", i + 1, i + 1),
                    },
                    None,
                )
            }
        };
        by_row.push(BoundRow { bound, pattern });
    }
    let full = Polytope::new(k, rows)?;
    let pruned = full
        .remove_redundant()
        .map_err(|_| KUserError::Polytope(PolytopeError::Unbounded))?;
    let keep: Vec<BoundRow> = by_row
        .into_iter()
        .filter(|r| {
            let (dir, g) = scaled_key(&r.bound.coeffs);
            let row = LinearInequality::new(
                dir.iter().map(|&c| int(c as i64)).collect(),
                &r.bound.rhs / int(g as i64),
            );
            pruned.rows().contains(&row)
        })
        .collect();
    Ok(KBounds {
        polytope: pruned,
        rows: keep,
        truncation: catalog.truncation.clone(),
        patterns_seen: catalog.patterns_seen,
    })
}

/// The inequality chain behind one pattern: one line per permutation and the total.
pub fn explain(pat: &BoundingPattern, ds: &DeltaSet) -> Result<String> {
    let mut out = format!("pattern {pat}\n");
    for step in &pat.derivation {
        out.push_str(&format!("  {step}\n"));
    }
    for (p, bar) in pat.members() {
        let lhs = if p.len() == 1 {
            "0".to_string()
        } else {
            p.tail().iter().map(|u| format!("d{u}")).join(" + ")
        };
        let terms = if p.len() == 1 {
            "0".to_string()
        } else if p.is_seed_head() {
            format!("delta_{}", p.0[1])
        } else {
            p.0.windows(2).map(|w| format!("delta_{}{}", w[1], w[0])).join(" + ")
        };
        let mark = if bar { "~" } else { "" };
        out.push_str(&format!(
            "  {mark}{p}: {lhs} <= {terms} = {}\n",
            format_rational(&f_of_p(p, ds))
        ));
    }
    let b = bound_from_pattern(pat, ds)?;
    out.push_str(&format!("  total: {b}\n"));
    Ok(out)
}
