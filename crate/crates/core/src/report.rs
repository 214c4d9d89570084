//! Rendering of results as structured text (pretty JSON with sorted keys) and
//! plain tables. Decimals carry six places; exact forms go alongside them.

use serde_json::{json, Map, Value};

use crate::avgfree::AvgFreeSet;
use crate::cwprotocol::{ExpectedCounts, ProtocolResult};
use crate::degeneration::{BorderRankBounds, DegenerationReport};
use crate::interpolation::{CompiledCheck, RankPowerBound};
use crate::slocc::{RankRateBound, SchmidtProfile};
use crate::support::{ExactValue, MaxEntropy, RateBound, SupportDistribution, SupportFunctionals, Theta};
use crate::Rational;

pub fn decimal(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.6}")
    }
}

/// `{"decimal": …, "exact": …}`.
pub fn exact_pair(exact: &str, value: f64) -> Value {
    json!({ "exact": exact, "decimal": decimal(value) })
}

pub fn rational_value(r: &Rational) -> Value {
    exact_pair(&r.to_string(), r.to_f64())
}

pub fn exact_value(v: &ExactValue) -> Value {
    exact_pair(&v.exact, v.value)
}

/// A document with the resolved configuration first and the result second.
pub fn document(command: &str, config: Value, result: Value) -> Value {
    let mut cfg = match config {
        Value::Object(m) => m,
        other => Map::from_iter([("value".to_string(), other)]),
    };
    cfg.insert("command".into(), Value::String(command.into()));
    json!({ "config": cfg, "result": result })
}

pub fn render(doc: &Value) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("values serialize");
    s.push('\n');
    s
}

fn cut_label(cut: &[usize]) -> String {
    let parts: Vec<String> = cut.iter().map(usize::to_string).collect();
    format!("{{{}}}", parts.join(","))
}

pub fn schmidt_json(p: &SchmidtProfile) -> Value {
    json!({
        "parties": p.parties,
        "cuts": p.ranks.iter().map(|(cut, r)| json!({ "cut": cut, "rank": r })).collect::<Vec<_>>(),
        "min_rank": p.min_rank(),
    })
}

/// One row per cut class.
pub fn schmidt_table(p: &SchmidtProfile) -> String {
    let width = p.ranks.iter().map(|(c, _)| cut_label(c).len()).max().unwrap_or(3).max(3);
    let mut out = format!("{:<width$}  rank\n", "cut");
    for (cut, r) in &p.ranks {
        out.push_str(&format!("{:<width$}  {r}\n", cut_label(cut)));
    }
    out
}

pub fn rank_rate_json(b: &RankRateBound) -> Value {
    let mut v = match b {
        RankRateBound::Finite { cut, target_rank, source_rank } => {
            json!({ "cut": cut, "target_rank": target_rank, "source_rank": source_rank, "infinite": false })
        }
        RankRateBound::Infinite { cut } => json!({ "cut": cut, "infinite": true }),
    };
    v["bound"] = exact_pair(&b.exact(), b.value());
    v
}

pub fn degeneration_json(r: &DegenerationReport, claimed_d: usize, claimed_e: usize) -> Value {
    json!({
        "valid": r.valid,
        "d": claimed_d,
        "e": claimed_e,
        "measured_d": r.measured_d,
        "measured_e": r.measured_e,
        "issues": r.issues,
    })
}

pub fn border_rank_json(b: &BorderRankBounds) -> Value {
    json!({ "lower": b.lower, "upper": b.upper, "exact": b.upper == Some(b.lower) })
}

pub fn compiled_check_json(c: &CompiledCheck) -> Value {
    json!({
        "ok": c.ok,
        "phase_map_ok": c.phase_map_ok,
        "diff_count": c.diff_count,
        "diff_sample": c.diff_sample,
    })
}

pub fn rank_power_json(b: &RankPowerBound, n: usize, e: usize) -> Value {
    json!({
        "rank_bound": b.bound.to_string(),
        "formula": format!("{}^{} * ({}*{}+1)", b.level, n, n, e),
        "source_level": b.level,
        "order": b.order,
        "verified": b.verified,
    })
}

pub fn distribution_json(p: &SupportDistribution) -> Value {
    Value::Array(
        p.support()
            .iter()
            .zip(p.probs())
            .filter(|(_, &q)| q > 0.0)
            .map(|(x, &q)| json!({ "index": x, "p": decimal(q) }))
            .collect(),
    )
}

pub fn theta_json(t: &Theta) -> Value {
    Value::Array(t.weights().iter().map(|w| Value::String(w.to_string())).collect())
}

pub fn max_entropy_json(m: &MaxEntropy) -> Value {
    json!({
        "value": decimal(m.value),
        "kkt_residual": format!("{:.3e}", m.kkt_residual),
        "iterations": m.iterations,
        "converged": m.converged,
        "argmax": m.argmax.as_ref().map(distribution_json),
    })
}

pub fn support_json(f: &SupportFunctionals, theta: &Theta) -> Value {
    json!({
        "theta": theta_json(theta),
        "rho_upper_est": decimal(f.rho_upper_est),
        "rho_lower_est": decimal(f.rho_lower_est),
        "oblique": f.oblique,
        "reversed_sites": f.reversed_sites,
        "argmax": f.argmax.as_ref().map(distribution_json),
    })
}

pub fn rate_bound_json(b: &RateBound, closed_form: Option<&ExactValue>) -> Value {
    let mut v = json!({ "value": decimal(b.value), "theta": theta_json(&b.theta) });
    if let Some(c) = closed_form {
        v["closed_form"] = exact_value(c);
    }
    v
}

pub fn avgfree_json(s: &AvgFreeSet, verified: Option<bool>) -> Value {
    let mut v = json!({
        "m": s.m(),
        "size": s.len(),
        "elements": s.elements().iter().map(|e| Value::String(e.to_string())).collect::<Vec<_>>(),
        "provenance": s.provenance().to_string(),
    });
    if let Some(ok) = verified {
        v["verified"] = Value::Bool(ok);
    }
    v
}

pub fn expected_counts_json(e: &ExpectedCounts) -> Value {
    json!({
        "mean_list_size": rational_value(&e.mean_list_size),
        "mean_collision_pairs": rational_value(&e.mean_collision_pairs),
    })
}

/// Full record of one protocol run, survivors as per-copy party labels.
pub fn protocol_json(r: &ProtocolResult, realized: Option<bool>) -> Value {
    let mut v = json!({
        "k": r.k,
        "n": r.n,
        "seed": r.seed,
        "alpha": decimal(r.alpha),
        "M": r.modulus,
        "B": avgfree_json(&r.set_b, None),
        "hash": { "u": r.hash.u, "v": r.hash.v },
        "tuples": r.tuples_total,
        "filtered": r.filtered,
        "blocks": r.blocks.iter().map(|b| json!({ "b": b.b, "before": b.before, "after": b.after })).collect::<Vec<_>>(),
        "mean_list_size": decimal(r.mean_list_size),
        "N": r.n_n,
        "rate": decimal(r.rate),
        "survivors": r.survivors.iter().map(|t| t.assignment()).collect::<Vec<_>>(),
    });
    if r.n_n > 1 {
        v["rate_exact"] = Value::String(format!("log2({}) / {}", r.n_n, r.k * r.n));
    }
    if r.degenerate {
        v["flag"] = Value::String("degenerate".into());
    }
    if let Some(ok) = realized {
        v["realized"] = Value::Bool(ok);
    }
    v
}
