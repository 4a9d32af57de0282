use std::fmt::Write as _;
use std::path::Path;

use cps_reliab_core::catalog::{assemble_architecture, load_catalog, RedundancyPlan};
use cps_reliab_core::data_quality::{data_reliability, QualitySchema, QualityScores, RecordBatch};
use cps_reliab_core::document::{architecture_to_json, load_architecture};
use cps_reliab_core::montecarlo::simulate_architecture;
use cps_reliab_core::{
    evaluate_cps, CombinerMode, CpsArchitecture, CpsBreakdown, SimulationConfig,
};
use serde_json::{json, Map, Value};

use crate::format::num;
use crate::{Failure, OutputFormat};

type CmdResult = Result<String, Failure>;

fn json_out(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

fn line(out: &mut String, label: &str, value: impl std::fmt::Display) {
    let _ = writeln!(out, "{label:<28}{value}");
}

fn check_mission(m: f64) -> Result<f64, Failure> {
    if m.is_finite() && m >= 0.0 {
        Ok(m)
    } else {
        Err(Failure::validation(format!(
            "mission must be >= 0 hours, got {m}"
        )))
    }
}

/// Parses `t0:t1:steps` into `steps + 1` evenly spaced times.
fn parse_curve(spec: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::validation(format!("--curve expects t0:t1:steps, got `{spec}`"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [t0, t1, steps] = parts[..] else {
        return Err(bad());
    };
    let t0: f64 = t0.trim().parse().map_err(|_| bad())?;
    let t1: f64 = t1.trim().parse().map_err(|_| bad())?;
    let steps: usize = steps.trim().parse().map_err(|_| bad())?;
    if !(t0.is_finite() && t1.is_finite() && 0.0 <= t0 && t0 <= t1 && steps >= 1) {
        return Err(bad());
    }
    Ok((0..=steps)
        .map(|i| {
            if i == steps {
                t1
            } else {
                t0 + (t1 - t0) * i as f64 / steps as f64
            }
        })
        .collect())
}

fn breakdown_flags(b: &CpsBreakdown) -> Vec<&'static str> {
    let mut flags = Vec::new();
    if b.cc.exceeds_unity {
        flags.push("r_cc_exceeds_unity");
    }
    if b.system > 1.0 {
        flags.push("r_cps_exceeds_unity");
    }
    flags
}

fn breakdown_json(b: &CpsBreakdown, mode: &CombinerMode) -> Value {
    let modules: Map<String, Value> = b
        .module_values()
        .into_iter()
        .map(|(slot, r)| (slot.key().to_owned(), json!(r)))
        .collect();
    json!({
        "mission_hours": b.mission,
        "modules": modules,
        "cc_mode": mode.name(),
        "r_cc": b.cc.value,
        "r_cps": b.system,
        "r_cps_with_data": b.system_with_data,
        "flags": breakdown_flags(b),
    })
}

fn breakdown_text(out: &mut String, b: &CpsBreakdown, mode: &CombinerMode) {
    line(out, "mission_hours", num(b.mission));
    for (slot, r) in b.module_values() {
        line(out, slot.key(), num(r));
    }
    line(out, &format!("r_cc ({})", mode.name()), num(b.cc.value));
    line(out, "r_cps", num(b.system));
    if let Some(d) = b.system_with_data {
        line(out, "r_cps_with_data", num(d));
    }
    let flags = breakdown_flags(b);
    line(
        out,
        "flags",
        if flags.is_empty() {
            "none".into()
        } else {
            flags.join(",")
        },
    );
}

pub fn eval(
    model: &Path,
    mission: Option<f64>,
    curve: Option<&str>,
    allow_literal_sum: bool,
    fmt: OutputFormat,
) -> CmdResult {
    let arch = load_architecture(model)?;
    let mission = check_mission(mission.unwrap_or(arch.mission))?;
    let times = curve.map(parse_curve).transpose()?;
    let b = evaluate_cps(&arch, mission, allow_literal_sum)?;
    let rows = times
        .unwrap_or_default()
        .into_iter()
        .map(|t| evaluate_cps(&arch, t, allow_literal_sum))
        .collect::<Result<Vec<_>, _>>()?;

    match fmt {
        OutputFormat::Json => {
            let mut v = breakdown_json(&b, &arch.cc_mode);
            if !rows.is_empty() {
                v["curve"] = rows
                    .iter()
                    .map(|r| breakdown_json(r, &arch.cc_mode))
                    .collect();
            }
            Ok(json_out(&v))
        }
        OutputFormat::Text => {
            let mut out = String::new();
            breakdown_text(&mut out, &b, &arch.cc_mode);
            if let Some(first) = rows.first() {
                out.push('\n');
                let mut header = vec!["t_hours"];
                header.extend(first.module_values().iter().map(|(s, _)| s.key()));
                header.extend(["r_cc", "r_cps"]);
                if first.system_with_data.is_some() {
                    header.push("r_cps_with_data");
                }
                let _ = writeln!(out, "{}", header.join(","));
                for r in &rows {
                    let mut cells = vec![num(r.mission)];
                    cells.extend(r.module_values().iter().map(|(_, v)| num(*v)));
                    cells.extend([num(r.cc.value), num(r.system)]);
                    if let Some(d) = r.system_with_data {
                        cells.push(num(d));
                    }
                    let _ = writeln!(out, "{}", cells.join(","));
                }
            }
            Ok(out)
        }
    }
}

/// Analytical reference for the simulation: every module in series.
fn product_reference(arch: &CpsArchitecture, mission: f64) -> Result<f64, Failure> {
    let mut series = arch.clone();
    series.cc_mode = CombinerMode::Product;
    Ok(evaluate_cps(&series, mission, false)?.headline())
}

pub fn simulate(
    model: &Path,
    samples: u64,
    seed: u64,
    mission: Option<f64>,
    threads: Option<usize>,
    fmt: OutputFormat,
) -> CmdResult {
    if samples == 0 {
        return Err(Failure::validation("--samples must be at least 1"));
    }
    let arch = load_architecture(model)?;
    let mission = check_mission(mission.unwrap_or(arch.mission))?;
    let config = SimulationConfig::new(samples, seed, mission)?;
    let analytic = product_reference(&arch, mission)?;
    let est = match threads {
        Some(0) => return Err(Failure::validation("--threads must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Failure::validation(e.to_string()))?
            .install(|| simulate_architecture(&arch, &config))?,
        None => simulate_architecture(&arch, &config)?,
    };
    let sigma = est.sigma_distance(analytic);
    let mut flags = Vec::new();
    if est.degenerate_ci {
        flags.push("degenerate_ci");
    }
    if arch.cc_mode != CombinerMode::Product {
        flags.push("reference_uses_product_combiner");
    }

    match fmt {
        OutputFormat::Json => Ok(json_out(&json!({
            "mission_hours": mission,
            "samples": est.samples,
            "seed": est.seed,
            "successes": est.successes,
            "p_hat": est.p_hat,
            "std_error": est.std_error,
            "ci95": [est.ci95.0, est.ci95.1],
            "analytical": analytic,
            "sigma_distance": sigma,
            "flags": flags,
        }))),
        OutputFormat::Text => {
            let mut out = String::new();
            line(&mut out, "mission_hours", num(mission));
            line(&mut out, "samples", est.samples);
            line(&mut out, "seed", est.seed);
            line(&mut out, "successes", est.successes);
            line(&mut out, "p_hat", num(est.p_hat));
            line(&mut out, "std_error", num(est.std_error));
            line(
                &mut out,
                "ci95",
                format!("[{}, {}]", num(est.ci95.0), num(est.ci95.1)),
            );
            line(&mut out, "analytical", num(analytic));
            line(&mut out, "sigma_distance", num(sigma));
            line(
                &mut out,
                "flags",
                if flags.is_empty() {
                    "none".into()
                } else {
                    flags.join(",")
                },
            );
            Ok(out)
        }
    }
}

pub fn select(
    catalog: &Path,
    mission: f64,
    redundancy: Option<&str>,
    emit_model: Option<&Path>,
    fmt: OutputFormat,
) -> CmdResult {
    let mission = check_mission(mission)?;
    let plan: RedundancyPlan = match redundancy {
        Some(spec) => spec.parse()?,
        None => RedundancyPlan::default(),
    };
    let entries = load_catalog(catalog)?;
    let (arch, report) = assemble_architecture(&entries, mission, &plan)?;
    if let Some(path) = emit_model {
        std::fs::write(path, architecture_to_json(&arch)).map_err(|e| Failure {
            code: 1,
            message: format!("{}: {e}", path.display()),
        })?;
    }

    match fmt {
        OutputFormat::Json => {
            let modules: Vec<Value> = report
                .modules
                .iter()
                .map(|m| {
                    json!({
                        "kind": m.kind.as_str(),
                        "chosen": m.chosen().entry.component_id,
                        "tie": m.tie,
                        "ranked": m.ranked.iter().map(|c| json!({
                            "component_id": c.entry.component_id,
                            "model": c.entry.model.family(),
                            "reliability": c.reliability,
                            "source": c.entry.source,
                        })).collect::<Vec<_>>(),
                    })
                })
                .collect();
            let mut v = breakdown_json(&report.breakdown, &arch.cc_mode);
            v["redundancy"] = json!(plan.to_string());
            v["selection"] = Value::Array(modules);
            v["emitted_model"] = json!(emit_model.map(|p| p.display().to_string()));
            Ok(json_out(&v))
        }
        OutputFormat::Text => {
            let mut out = String::new();
            line(&mut out, "redundancy", plan);
            for m in &report.modules {
                let _ = writeln!(out, "\n[{}]", m.kind);
                let _ = writeln!(
                    out,
                    "  {:<5} {:<16} {:<9} reliability",
                    "rank", "component_id", "model"
                );
                for (i, c) in m.ranked.iter().enumerate() {
                    let mark = match (i, m.tie) {
                        (0, true) => "  chosen (tie, lowest id)",
                        (0, false) => "  chosen",
                        _ => "",
                    };
                    let _ = writeln!(
                        out,
                        "  {:<5} {:<16} {:<9} {}{mark}",
                        i + 1,
                        c.entry.component_id,
                        c.entry.model.family(),
                        num(c.reliability)
                    );
                }
            }
            out.push('\n');
            breakdown_text(&mut out, &report.breakdown, &arch.cc_mode);
            if let Some(p) = emit_model {
                line(&mut out, "emitted_model", p.display());
            }
            Ok(out)
        }
    }
}

fn combiner(mode: &str, weights: Option<&str>) -> Result<CombinerMode, Failure> {
    let mode: CombinerMode = mode.parse()?;
    match (mode, weights) {
        (m, None) => Ok(m),
        (CombinerMode::NormalizedMean { .. }, Some(w)) => {
            let weights = w
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| {
                    Failure::validation(format!("--weights: `{w}` is not a list of numbers"))
                })?;
            let m = CombinerMode::NormalizedMean {
                weights: Some(weights),
            };
            m.validate(Some(4))?;
            Ok(m)
        }
        (_, Some(_)) => Err(Failure::validation(
            "--weights applies to normalized_mean only",
        )),
    }
}

pub fn data_score(
    schema: &Path,
    records: &Path,
    combine: &str,
    weights: Option<&str>,
    fmt: OutputFormat,
) -> CmdResult {
    let mode = combiner(combine, weights)?;
    let schema = QualitySchema::load(schema)?;
    let batch = RecordBatch::load_csv(records, &schema)?;
    let scores = QualityScores::score(&batch, &schema);
    let r_data = data_reliability(&scores, &mode)?;
    let flags: Vec<&str> = if r_data.exceeds_unity {
        vec!["r_data_exceeds_unity"]
    } else {
        vec![]
    };

    match fmt {
        OutputFormat::Json => {
            let factors: Map<String, Value> = scores
                .factors()
                .into_iter()
                .map(|(name, f)| {
                    (
                        name.to_owned(),
                        json!({"score": f.score, "violations": f.violations, "total": f.total}),
                    )
                })
                .collect();
            Ok(json_out(&json!({
                "records": batch.records.len(),
                "factors": factors,
                "combine": mode.name(),
                "r_data": r_data.value,
                "warnings": scores.warnings(),
                "flags": flags,
            })))
        }
        OutputFormat::Text => {
            let mut out = String::new();
            line(&mut out, "records", batch.records.len());
            let _ = writeln!(
                out,
                "{:<28}{:<16}{:<12}total",
                "factor", "score", "violations"
            );
            for (name, f) in scores.factors() {
                let _ = writeln!(
                    out,
                    "{name:<28}{:<16}{:<12}{}",
                    num(f.score),
                    f.violations,
                    f.total
                );
            }
            line(
                &mut out,
                &format!("r_data ({})", mode.name()),
                num(r_data.value),
            );
            line(
                &mut out,
                "flags",
                if flags.is_empty() {
                    "none".into()
                } else {
                    flags.join(",")
                },
            );
            for w in scores.warnings() {
                let _ = writeln!(out, "warning: {w}");
            }
            Ok(out)
        }
    }
}
