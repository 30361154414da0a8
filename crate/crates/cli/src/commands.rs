use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use gdof_core::channel::{conditions_hold, in_cyclic_regime, tin_optimal_ic, ConditionRule};
use gdof_core::kuser::{generate_patterns, outer_bounds_from_catalog, GenerationBudget, PatternCatalog};
use gdof_core::polytope::PolytopeJson;
use gdof_core::rational::{format_rational, int, Rational, Q};
use gdof_core::regions::achievable_part;
use gdof_core::sim::summarize;
use gdof_core::sls::{constraint_violations, SlsSchemeJson, VertexSolver};
use gdof_core::{
    achievability_verdict, check_sls_conditions, compute_deltas, cyclic_region, dual, explain, outer_region,
    poly_equal, simulate_scheme, sinr_exponents, validate_rate_split, ChannelMatrix, PartLabel, Polytope, SimConfig,
    SlsScheme,
};
use serde::Serialize;
use serde_json::json;

use crate::input::{self, CliError, CliResult, Sink};

fn one_based(order: &[usize]) -> Vec<usize> {
    order.iter().map(|x| x + 1).collect()
}

fn polytope_json(p: &Polytope, with_vertices: bool) -> CliResult<PolytopeJson> {
    let mut j = p.to_json();
    if with_vertices {
        let verts = p.vertices().map_err(CliError::input)?;
        j.vrep = Some(verts.into_iter().map(|v| v.into_iter().map(Q).collect()).collect());
    }
    Ok(j)
}

#[derive(Serialize)]
struct CheckOut {
    summary: String,
    #[serde(flatten)]
    report: gdof_core::ConditionReport,
}

pub fn check(sink: &Sink, ch: &ChannelMatrix) -> CliResult<bool> {
    let report = check_sls_conditions(ch).map_err(CliError::input)?;
    let summary = match &report.witness_permutation {
        Some(_) if report.identity_satisfied => "conditions satisfied (identity labeling)".to_string(),
        Some(w) => format!("conditions satisfied (antenna order {})", w.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")),
        None if report.identity_only => "conditions violated (identity labeling only, M > 6)".to_string(),
        None => "conditions violated under every antenna order".to_string(),
    };
    eprintln!("{summary}");
    if !report.satisfied {
        for v in &report.violations {
            let tag = match v.rule {
                ConditionRule::DiagonalDominance => "con1",
                ConditionRule::CrossSum => "con",
            };
            eprintln!("  ({tag}) i={} k={} m={}: {} > {}  [{}]", v.i, v.k, v.m, v.lhs, v.rhs, v.rule);
        }
    }
    let ok = report.satisfied;
    sink.json(&CheckOut { summary, report })?;
    Ok(ok)
}

pub fn region(
    sink: &Sink,
    ch: &ChannelMatrix,
    part: Option<PartLabel>,
    closed_form: Option<Vec<Rational>>,
    vertices: bool,
) -> CliResult<bool> {
    let poly = if let Some(ab) = closed_form {
        cyclic_region(&ab[0], &ab[1]).map_err(CliError::input)?
    } else if let Some(label) = part {
        let rep = check_sls_conditions(ch).map_err(CliError::input)?;
        let order = rep.witness().unwrap_or_else(|| (0..ch.antennas()).collect());
        let work = ch.permute_antennas(&order);
        match achievable_part(&work, label).map_err(CliError::input)? {
            Some(p) => {
                eprintln!("part {label} with antenna order {:?}", one_based(&order));
                p
            }
            None => {
                eprintln!("part {label} is empty: its parameter constraints cannot be met");
                sink.json(&serde_json::Value::Null)?;
                return Ok(false);
            }
        }
    } else {
        outer_region(ch).map_err(CliError::input)?
    };
    sink.json(&polytope_json(&poly, vertices)?)?;
    Ok(true)
}

pub fn verify_equivalence(sink: &Sink, ch: &ChannelMatrix) -> CliResult<bool> {
    let v = achievability_verdict(ch).map_err(CliError::input)?;
    match v.matched {
        Some(l) => eprintln!("outer region achieved by part {l}"),
        None => eprintln!("no achievable part equals the outer region"),
    }
    if let Some(n) = &v.note {
        eprintln!("note: {n}");
    }
    let parts: BTreeMap<String, Option<PolytopeJson>> =
        v.parts.iter().map(|(l, p)| (l.to_string(), p.as_ref().map(|p| p.to_json()))).collect();
    sink.json(&json!({
        "equal": v.equal,
        "predicted": v.predicted,
        "matched": v.matched,
        "antenna_order": one_based(&v.antenna_order),
        "conditions": v.conditions,
        "note": v.note,
        "outer": v.outer,
        "parts": parts,
    }))?;
    Ok(v.equal)
}

pub fn verify_scheme(sink: &Sink, path: &Path, channel: Option<&Path>) -> CliResult<bool> {
    let j: SlsSchemeJson = input::read_json(path)?;
    let fallback = channel.map(input::read_json::<ChannelMatrix>).transpose()?;
    let s = SlsScheme::from_json(&j, fallback.as_ref()).map_err(CliError::input)?;
    let split = validate_rate_split(&s).map_err(CliError::input)?;
    let sinr = sinr_exponents(&s).map_err(CliError::input)?;
    let violations: Vec<String> = constraint_violations(&s.channel, s.variant, &s.params)
        .into_iter()
        .map(|(name, lhs, rhs)| format!("{name}: {} > {}", format_rational(&lhs), format_rational(&rhs)))
        .collect();
    let verified = split.valid && sinr.feasible;
    eprintln!("{}", sinr.table());
    for f in &split.failures {
        eprintln!("split: {f}");
    }
    eprintln!("scheme {}", if verified { "verified" } else { "rejected" });
    sink.json(&json!({
        "verified": verified,
        "d": split.d.iter().cloned().map(Q).collect::<Vec<_>>(),
        "split": split,
        "sinr": sinr,
        "constraint_violations": violations,
    }))?;
    Ok(verified)
}

fn require_point(ch: &ChannelMatrix, point: &[Rational]) -> CliResult<()> {
    if point.len() != ch.users() {
        return Err(CliError::Input(format!("point has {} coordinates, channel has {} users", point.len(), ch.users())));
    }
    Ok(())
}

pub fn params_for_vertex(sink: &Sink, ch: &ChannelMatrix, point: &[Rational]) -> CliResult<bool> {
    require_point(ch, point)?;
    let solver = VertexSolver::new(ch).map_err(CliError::input)?;
    let Some(cert) = solver.certify(point).map_err(CliError::input)? else {
        eprintln!("no scheme found for this point");
        sink.json(&json!({ "found": false }))?;
        return Ok(false);
    };
    eprintln!("{}: {}", cert.vertex.label, cert.vertex.params);
    sink.json(&json!({ "found": true, "ok": cert.ok(), "certificate": cert }))?;
    Ok(cert.ok())
}

pub fn kbounds(
    sink: &Sink,
    channel: Option<&Path>,
    k: Option<usize>,
    budget: GenerationBudget,
    with_explain: bool,
) -> CliResult<bool> {
    let Some(path) = channel else {
        let k = k.ok_or_else(|| CliError::input("give a channel file or --K"))?;
        let mut stream = generate_patterns(k, budget).map_err(CliError::input)?;
        let patterns: Vec<_> = stream
            .by_ref()
            .map(|p| json!({ "pattern": p.to_string(), "depth": p.depth(), "derivation": p.derivation }))
            .collect();
        let trunc = stream.truncation().clone();
        eprintln!("{} patterns for K = {k}", patterns.len());
        if trunc.any() {
            eprintln!("warning: budget truncated the enumeration: {trunc:?}");
        }
        sink.json(&json!({ "K": k, "budget": budget, "truncation": trunc, "patterns": patterns }))?;
        return Ok(true);
    };
    let ch: ChannelMatrix = input::read_json(path)?;
    if let Some(k) = k {
        if k != ch.users() {
            return Err(CliError::Input(format!("--K {k} but the channel has {} users", ch.users())));
        }
    }
    let catalog = PatternCatalog::build(ch.users(), budget).map_err(CliError::input)?;
    let kb = outer_bounds_from_catalog(&ch, &catalog).map_err(CliError::input)?;
    let ds = compute_deltas(&ch);
    let mut rows = Vec::new();
    for r in &kb.rows {
        let mut row = json!({
            "bound": r.bound.to_string(),
            "coeffs": r.bound.coeffs,
            "rhs": Q(r.bound.rhs.clone()),
            "provenance": r.bound.provenance,
        });
        if let Some(p) = &r.pattern {
            row["pattern"] = json!(p.to_string());
            row["derivation"] = json!(p.derivation);
            if with_explain {
                row["explanation"] = json!(explain(p, &ds).map_err(CliError::input)?);
            }
        }
        rows.push(row);
    }
    eprintln!("{} bounds from {} patterns", kb.rows.len(), kb.patterns_seen);
    if kb.truncation.any() {
        eprintln!("warning: budget truncated the enumeration: {:?}", kb.truncation);
    }
    sink.json(&json!({
        "K": ch.users(),
        "budget": budget,
        "truncation": kb.truncation,
        "patterns_seen": kb.patterns_seen,
        "polytope": kb.polytope,
        "rows": rows,
    }))?;
    Ok(true)
}

#[derive(Serialize)]
struct SweepRow {
    a: String,
    b: String,
    sls_regime: bool,
    tin_regime: bool,
    closed_form_regime: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    outer_rows: Option<String>,
}

fn csv_bytes<T: Serialize>(rows: &[T]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(CliError::input)?;
    }
    w.into_inner().map_err(CliError::input)
}

pub fn cyclic_sweep(sink: &Sink, step: &Rational, with_rows: bool) -> CliResult<bool> {
    if *step <= int(0) || *step > int(1) {
        return Err(CliError::Input(format!("step {} must lie in (0, 1]", format_rational(step))));
    }
    let mut values = Vec::new();
    let mut x = int(0);
    while x <= int(1) {
        values.push(x.clone());
        x += step;
    }
    let mut rows = Vec::new();
    for a in &values {
        for b in &values {
            let ch = gdof_core::cyclic_channel(a, b).map_err(CliError::input)?;
            let outer_rows = if with_rows {
                let outer = outer_region(&ch).map_err(CliError::input)?;
                let upper: Vec<String> = outer
                    .rows()
                    .iter()
                    .filter(|r| r.coeffs().iter().any(|c| *c > int(0)))
                    .map(|r| r.to_string().replace(' ', ""))
                    .collect();
                Some(upper.join(";"))
            } else {
                None
            };
            rows.push(SweepRow {
                a: format_rational(a),
                b: format_rational(b),
                sls_regime: check_sls_conditions(&ch).map_err(CliError::input)?.satisfied,
                tin_regime: tin_optimal_ic(&ch).map_err(CliError::input)?,
                closed_form_regime: in_cyclic_regime(a, b),
                outer_rows,
            });
        }
    }
    let n = rows.len() as f64;
    let frac = |f: fn(&SweepRow) -> bool| rows.iter().filter(|r| f(r)).count() as f64 / n;
    let summary = json!({
        "points": rows.len(),
        "sls_fraction": frac(|r| r.sls_regime),
        "tin_fraction": frac(|r| r.tin_regime),
    });
    eprintln!("{summary}");
    sink.bytes(&csv_bytes(&rows)?)?;
    Ok(true)
}

pub enum SchemeSource {
    File(PathBuf),
    Certify(PathBuf, Vec<Rational>),
}

#[derive(Serialize)]
struct LayerRow {
    #[serde(rename = "P")]
    p: f64,
    receiver: usize,
    layer: &'static str,
    mean_normalized_rate: f64,
    design_load: f64,
    gap: f64,
}

pub fn simulate(sink: &Sink, source: SchemeSource, cfg: SimConfig, summary_path: Option<&Path>) -> CliResult<bool> {
    let scheme = match source {
        SchemeSource::File(p) => {
            let j: SlsSchemeJson = input::read_json(&p)?;
            SlsScheme::from_json(&j, None).map_err(CliError::input)?
        }
        SchemeSource::Certify(c, point) => {
            let ch: ChannelMatrix = input::read_json(&c)?;
            require_point(&ch, &point)?;
            let solver = VertexSolver::new(&ch).map_err(CliError::input)?;
            match solver.certify(&point).map_err(CliError::input)? {
                Some(cert) if cert.ok() => solver.scheme(&cert),
                _ => return Err(CliError::input("no certified scheme for this point")),
            }
        }
    };
    let res = simulate_scheme(&scheme, &cfg).map_err(CliError::input)?;
    let rows: Vec<LayerRow> = res
        .layers
        .iter()
        .map(|s| LayerRow {
            p: s.p,
            receiver: s.receiver,
            layer: s.layer.name(),
            mean_normalized_rate: s.mean_normalized_rate,
            design_load: s.design_load,
            gap: s.gap,
        })
        .collect();
    sink.bytes(&csv_bytes(&rows)?)?;
    let summary = summarize(&res).map_err(CliError::input)?;
    let text = serde_json::to_string_pretty(&summary).map_err(CliError::input)? + "\n";
    match summary_path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Write {
            path: p.display().to_string(),
            source,
        })?,
        None => eprint!("{text}"),
    }
    Ok(true)
}

pub fn dual_check(sink: &Sink, ch: &ChannelMatrix) -> CliResult<bool> {
    let t = dual(ch).map_err(CliError::input)?;
    let (a, b) = (
        achievability_verdict(ch).map_err(CliError::input)?,
        achievability_verdict(&t).map_err(CliError::input)?,
    );
    let outer_equal = poly_equal(&a.outer, &b.outer).map_err(CliError::input)?;
    let ok = outer_equal && a.equal == b.equal;
    eprintln!(
        "outer regions {}; verdicts {} / {}",
        if outer_equal { "equal" } else { "differ" },
        a.equal,
        b.equal
    );
    sink.json(&json!({
        "outer_equal": outer_equal,
        "conditions_satisfied": a.conditions.satisfied,
        "dual_conditions_satisfied": b.conditions.satisfied,
        "identity_conditions_hold": conditions_hold(ch),
        "verdict_equal": a.equal,
        "dual_verdict_equal": b.equal,
        "matched": a.matched,
        "dual_matched": b.matched,
        "outer": a.outer,
        "dual_outer": b.outer,
    }))?;
    Ok(ok)
}
