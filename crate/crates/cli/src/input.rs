use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;
use qcm_core::analysis::InputDomain;
use qcm_core::qstate::{BasisLabel, QuantumState};
use serde_json::Value;

/// Parses `x=3,y=0` into ordered name/value pairs.
pub fn parse_assignments(text: &str) -> Result<Vec<(String, u64)>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| {
            let (name, value) = pair
                .split_once('=')
                .ok_or_else(|| anyhow!("expected name=value, got `{pair}`"))?;
            let value = value
                .trim()
                .parse()
                .with_context(|| format!("`{}` is not an unsigned integer", value.trim()))?;
            Ok((name.trim().to_string(), value))
        })
        .collect()
}

/// Parses `y=0..2` (inclusive) or `y=1,4,5`.
pub fn parse_vary(text: &str) -> Result<(String, Vec<u64>)> {
    let (name, values) = text
        .split_once('=')
        .ok_or_else(|| anyhow!("expected name=range, got `{text}`"))?;
    let values = if let Some((lo, hi)) = values.split_once("..") {
        let lo: u64 = lo.trim().parse().with_context(|| format!("bad range start in `{text}`"))?;
        let hi: u64 = hi
            .trim()
            .trim_start_matches('=')
            .parse()
            .with_context(|| format!("bad range end in `{text}`"))?;
        if hi < lo {
            bail!("empty range in `{text}`");
        }
        (lo..=hi).collect()
    } else {
        values
            .split(',')
            .map(|v| v.trim().parse().with_context(|| format!("bad value `{v}` in `{text}`")))
            .collect::<Result<Vec<u64>>>()?
    };
    Ok((name.trim().to_string(), values))
}

pub fn build_domain(fix: &[String], vary: &[String]) -> Result<Option<InputDomain>> {
    if fix.is_empty() && vary.is_empty() {
        return Ok(None);
    }
    let mut domain = InputDomain::new();
    for spec in fix {
        for (name, value) in parse_assignments(spec)? {
            domain = domain.fix(&name, value);
        }
    }
    for spec in vary {
        let (name, values) = parse_vary(spec)?;
        domain = domain.vary(&name, values);
    }
    Ok(Some(domain))
}

pub fn fixed_value(fix: &[String], register: &str) -> Result<Option<u64>> {
    for spec in fix {
        for (name, value) in parse_assignments(spec)? {
            if name == register {
                return Ok(Some(value));
            }
        }
    }
    Ok(None)
}

/// Basis state with the named registers set and every other register 0.
pub fn inline_state(word_size: u32, registers: &[String], text: &str) -> Result<QuantumState> {
    let mut regs = vec![0; registers.len()];
    for (name, value) in parse_assignments(text)? {
        let i = registers
            .iter()
            .position(|r| *r == name)
            .ok_or_else(|| anyhow!("input names unknown register `{name}`"))?;
        regs[i] = value;
    }
    Ok(QuantumState::basis(word_size, registers, BasisLabel::data(regs))?)
}

/// Reads `{"amps": [{"re", "im", "regs": {..}, "pc"?}]}`. The state is
/// renormalized when its squared norm is off by more than 1e-6; the second
/// value reports that norm.
pub fn file_state(word_size: u32, registers: &[String], text: &str) -> Result<(QuantumState, Option<f64>)> {
    let json: Value = serde_json::from_str(text).context("input file is not valid JSON")?;
    let amps = json
        .get("amps")
        .and_then(Value::as_array)
        .ok_or_else(|| anyhow!("input file needs an \"amps\" array"))?;
    let mut terms = Vec::with_capacity(amps.len());
    for (n, entry) in amps.iter().enumerate() {
        let number = |key: &str| -> Result<f64> {
            match entry.get(key) {
                None => Ok(0.0),
                Some(v) => v.as_f64().ok_or_else(|| anyhow!("amps[{n}].{key} is not a number")),
            }
        };
        let amp = Complex64::new(number("re")?, number("im")?);
        let mut regs = vec![0; registers.len()];
        if let Some(map) = entry.get("regs") {
            let map = map.as_object().ok_or_else(|| anyhow!("amps[{n}].regs is not an object"))?;
            for (name, value) in map {
                let i = registers
                    .iter()
                    .position(|r| r == name)
                    .ok_or_else(|| anyhow!("amps[{n}] names unknown register `{name}`"))?;
                regs[i] = value
                    .as_u64()
                    .ok_or_else(|| anyhow!("amps[{n}].regs.{name} is not an unsigned integer"))?;
            }
        }
        let pc = match entry.get("pc") {
            None | Some(Value::Null) => None,
            Some(v) => Some(v.as_u64().ok_or_else(|| anyhow!("amps[{n}].pc is not an unsigned integer"))?),
        };
        let label = BasisLabel {
            regs,
            pc,
            ..Default::default()
        };
        terms.push((label, amp));
    }
    let state = QuantumState::from_terms(word_size, registers, terms)?;
    let norm = state.norm();
    if (norm - 1.0).abs() > 1e-6 {
        Ok((state.normalized()?, Some(norm)))
    } else {
        Ok((state, None))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assignments_and_ranges() {
        assert_eq!(
            parse_assignments("x=3, y=0").unwrap(),
            vec![("x".to_string(), 3), ("y".to_string(), 0)]
        );
        assert!(parse_assignments("x").is_err());
        assert_eq!(parse_vary("y=0..2").unwrap(), ("y".to_string(), vec![0, 1, 2]));
        assert_eq!(parse_vary("y=1,5").unwrap(), ("y".to_string(), vec![1, 5]));
        assert!(parse_vary("y=3..1").is_err());
    }

    #[test]
    fn file_state_normalizes() {
        let regs = vec!["x".to_string(), "y".to_string()];
        let text = r#"{"amps":[{"re":1,"im":0,"regs":{"x":1}},{"re":1,"regs":{"y":2}}]}"#;
        let (state, off) = file_state(4, &regs, text).unwrap();
        assert_eq!(off, Some(2.0));
        assert!((state.norm() - 1.0).abs() < 1e-12);
        assert!(file_state(4, &regs, r#"{"amps":[{"re":1,"regs":{"z":1}}]}"#).is_err());
    }
}
