//! Human-readable output, computed only from the JSON each command emits.

use std::io::IsTerminal;

use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Asm,
    Run,
    Trace,
    Measure,
    Sync,
    Scan,
    Compare,
    Embed,
}

/// Reads `QCM_COLOR` (`auto`, `always`, `never`).
pub fn color_enabled() -> bool {
    match std::env::var("QCM_COLOR").as_deref() {
        Ok("always") => true,
        Ok("never") => false,
        _ => std::io::stdout().is_terminal(),
    }
}

fn paint(text: &str, good: bool, color: bool) -> String {
    if !color {
        return text.to_string();
    }
    let code = if good { "32" } else { "31" };
    format!("\x1b[{code}m{text}\x1b[0m")
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or(f64::NAN)
}

fn term_line(term: &Value) -> String {
    let amp = term["amp"].as_array().cloned().unwrap_or_default();
    let (re, im) = (amp.first().map_or(0.0, num), amp.get(1).map_or(0.0, num));
    let mut parts: Vec<String> = term["regs"]
        .as_object()
        .map(|m| m.iter().map(|(k, v)| format!("{k}:{v}")).collect())
        .unwrap_or_default();
    for key in ["pc", "br"] {
        if let Some(v) = term.get(key).filter(|v| !v.is_null()) {
            parts.push(format!("{key}:{v}"));
        }
    }
    if let Some(v) = term.get("in").and_then(Value::as_str) {
        parts.push(format!("in:{v}"));
    }
    if let Some(h) = term.get("history").and_then(Value::as_array) {
        let h: Vec<String> = h.iter().map(Value::to_string).collect();
        parts.push(format!("history:[{}]", h.join(",")));
    }
    format!("  {re:+.6}{im:+.6}i |{}⟩", parts.join(", "))
}

fn state_lines(state: &Value, out: &mut Vec<String>) {
    let terms = state["terms"].as_array().cloned().unwrap_or_default();
    if terms.is_empty() {
        out.push("  0".into());
    }
    out.extend(terms.iter().map(term_line));
}

fn verdict_line(label: &str, verdict: &Value, color: bool) -> String {
    match verdict["verdict"].as_str() {
        Some("separable") => format!("{label}: {} on {}", paint("separable", true, color), verdict["control"].as_str().unwrap_or("?")),
        Some("entangled") => {
            let controls: Vec<&str> = verdict["controls"]
                .as_array()
                .map(|a| a.iter().filter_map(Value::as_str).collect())
                .unwrap_or_default();
            let note = if verdict["proportional"].as_bool() == Some(true) {
                " (conditional data proportional)"
            } else {
                ""
            };
            format!("{label}: {} between {}{note}", paint("entangled", false, color), controls.join(" and "))
        }
        _ => format!("{label}: none (zero state)"),
    }
}

fn object(value: &Value) -> Map<String, Value> {
    value.as_object().cloned().unwrap_or_default()
}

pub fn pretty(kind: Kind, value: &Value, color: bool) -> String {
    let mut out: Vec<String> = Vec::new();
    match kind {
        Kind::Asm => {
            let regs: Vec<&str> = value["registers"]
                .as_array()
                .map(|a| a.iter().filter_map(Value::as_str).collect())
                .unwrap_or_default();
            out.push(format!("; k={} registers: {}", value["word_size"], regs.join(" ")));
            for line in value["lines"].as_array().cloned().unwrap_or_default() {
                let label = line["label"].as_str().map(|l| format!("{l}:")).unwrap_or_default();
                out.push(format!(
                    "{:>4}  {label:<5} {}",
                    line["line"].as_u64().unwrap_or(0),
                    line["text"].as_str().unwrap_or("")
                ));
            }
        }
        Kind::Run => {
            let halted = if value["halted"].as_bool() == Some(true) { " (halted)" } else { "" };
            out.push(format!("cycle {}{halted}", value["cycle"]));
            state_lines(value, &mut out);
        }
        Kind::Trace => {
            for snap in value["snapshots"].as_array().cloned().unwrap_or_default() {
                out.push(format!("cycle {}", snap["cycle"]));
                state_lines(&snap, &mut out);
            }
        }
        Kind::Measure => {
            let dist = if value.get("distribution").is_some() {
                object(&value["distribution"])
            } else {
                object(value)
            };
            for (outcome, p) in dist {
                out.push(format!("{outcome:>8}  {:.6}", num(&p)));
            }
            if let Some(samples) = value.get("samples").and_then(Value::as_array) {
                let s: Vec<String> = samples.iter().map(|v| v.as_str().unwrap_or("?").to_string()).collect();
                out.push(format!("samples: {}", s.join(" ")));
            }
        }
        Kind::Sync => {
            let ok = value["verdict"] == "synchronized";
            let verdict = paint(value["verdict"].as_str().unwrap_or("?"), ok, color);
            out.push(format!("t={} {verdict}", value["t"]));
            if ok {
                out.push(format!("pc: {}", value["pc"]));
                out.push(format!("unitary deviation: {:.3e}", num(&value["unitary_deviation"])));
            }
            for w in value["witness"].as_array().cloned().unwrap_or_default() {
                let input: Vec<String> = object(&w["input"]).iter().map(|(k, v)| format!("{k}={v}")).collect();
                out.push(format!("witness {}: pc {} br {}", input.join(","), w["pc"], w["br"]));
            }
        }
        Kind::Scan => {
            let times: Vec<String> = value["times"]
                .as_array()
                .map(|a| a.iter().map(Value::to_string).collect())
                .unwrap_or_default();
            if times.is_empty() {
                out.push(format!("{} for t <= {}", paint("never synchronized", false, color), value["t_max"]));
            } else {
                out.push(format!("synchronized at t = {}", times.join(", ")));
            }
        }
        Kind::Compare => {
            let ok = value["match"].as_bool() == Some(true);
            out.push(format!(
                "{} {}: {}",
                value["oracle"].as_str().unwrap_or("?"),
                value["description"].as_str().unwrap_or(""),
                paint(if ok { "match" } else { "mismatch" }, ok, color)
            ));
            if !value["t"].is_null() {
                out.push(format!("t: {}", value["t"]));
            }
            out.push(format!("max deviation: {:.3e}", num(&value["max_deviation"])));
            if let Some(n) = value.get("compared") {
                out.push(format!("columns compared: {n}"));
            }
            if let Some(phase) = value.get("phase").and_then(Value::as_array) {
                out.push(format!("global phase: {:+.6}{:+.6}i", num(&phase[0]), num(&phase[1])));
            }
        }
        Kind::Embed => {
            out.push(format!("mode {} after {} steps", value["mode"].as_str().unwrap_or("?"), value["steps"]));
            let norms: Vec<String> = value["norms"]
                .as_array()
                .map(|a| a.iter().map(|n| format!("{:.6}", num(n))).collect())
                .unwrap_or_default();
            out.push(format!("norms: {}", norms.join(" ")));
            state_lines(&value["state"], &mut out);
            out.push(verdict_line("verdict", &value["verdict"], color));
            if let Some(residual) = value.get("residual") {
                out.push("after uncomputing pc and history:".into());
                state_lines(residual, &mut out);
                out.push(verdict_line("residual verdict", &value["residual_verdict"], color));
            }
        }
    }
    out.join("\n")
}
