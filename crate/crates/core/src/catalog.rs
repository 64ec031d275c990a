//! Machine documents: explicit rule tables, `{"builtin": ...}` references
//! and `{"transform": ...}` chains.

use serde_json::Value;

use crate::error::{Error, Result};
use crate::machine::{compile_rule_table, export_table_capped, table_to_rules, Machine, RuleTable};
use crate::popproto::PopulationProtocol;
use crate::transforms::{self, Combinator};
use crate::zoo;

pub const TRANSFORM_NAMES: [&str; 7] = [
    "synchronize",
    "lib2excl-strong",
    "excl2lib-strong",
    "exclweak2sync",
    "product",
    "decount",
    "from-popproto",
];

pub fn machine_from_value(v: &Value) -> Result<Machine> {
    if let Some(name) = v.get("builtin") {
        let name = name
            .as_str()
            .ok_or_else(|| Error::parse("builtin", "expected a string"))?;
        return zoo::builtin(name, v.get("params").unwrap_or(&Value::Null));
    }
    if let Some(name) = v.get("transform") {
        let name = name
            .as_str()
            .ok_or_else(|| Error::parse("transform", "expected a string"))?;
        let params = v.get("params").cloned().unwrap_or(Value::Null);
        if name == "from-popproto" {
            let proto = v
                .get("protocol")
                .ok_or_else(|| Error::parse("protocol", "missing protocol"))?;
            let pp = protocol_from_value(proto)?;
            return transforms::popproto_to_automaton(&pp);
        }
        let inputs = v
            .get("inputs")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::parse("inputs", "expected an array of machines"))?;
        let machines = inputs
            .iter()
            .enumerate()
            .map(|(i, m)| machine_from_value(m).map_err(|e| nest(&format!("inputs[{i}]"), e)))
            .collect::<Result<Vec<_>>>()?;
        return apply_transform(name, &machines, &params);
    }
    let rt: RuleTable = serde_json::from_value(v.clone()).map_err(|e| Error::parse("machine", e.to_string()))?;
    compile_rule_table(&rt)
}

fn nest(prefix: &str, e: Error) -> Error {
    match e {
        Error::Parse { location, message } => Error::parse(format!("{prefix}.{location}"), message),
        other => other,
    }
}

pub fn parse_machine(text: &str) -> Result<Machine> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::parse("machine", e.to_string()))?;
    machine_from_value(&v)
}

pub fn protocol_from_value(v: &Value) -> Result<PopulationProtocol> {
    PopulationProtocol::parse(&v.to_string())
}

/// Applies a named transform. `product` takes two machines and a
/// `combinator` parameter, `decount` a degree bound `k`; the others take a
/// single machine.
pub fn apply_transform(name: &str, machines: &[Machine], params: &Value) -> Result<Machine> {
    let one = || -> Result<&Machine> {
        match machines {
            [m] => Ok(m),
            _ => Err(Error::domain(format!("{name} takes exactly one machine"))),
        }
    };
    match name {
        "synchronize" => transforms::synchronize(one()?),
        "lib2excl-strong" => transforms::liberal_strong_to_exclusive_strong(one()?),
        "excl2lib-strong" => transforms::exclusive_strong_to_liberal_strong(one()?),
        "exclweak2sync" => transforms::exclusive_weak_to_synchronous_weak(one()?),
        "decount" => {
            let k = params
                .get("k")
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::parse("params.k", "decount needs a degree bound k"))?;
            transforms::decount_bounded_degree(one()?, k as usize)
        }
        "product" => {
            let [a, b] = machines else {
                return Err(Error::domain("product takes exactly two machines"));
            };
            let comb: Combinator = params
                .get("combinator")
                .and_then(Value::as_str)
                .unwrap_or("and")
                .parse()?;
            transforms::product(a, b, comb)
        }
        "from-popproto" => Err(Error::domain("from-popproto takes a protocol, not a machine")),
        _ => Err(Error::domain(format!(
            "unknown transform {name:?}; known: {}",
            TRANSFORM_NAMES.join(", ")
        ))),
    }
}

/// The document that reproduces `m`: its recorded source, or else its
/// explicit rule table.
pub fn machine_to_value(m: &Machine) -> Result<Value> {
    if let Some(s) = m.source() {
        return Ok(s.clone());
    }
    let table = export_table_capped(m, crate::machine::TABLE_CAP)?;
    Ok(serde_json::to_value(table_to_rules(m, &table)).expect("rule table serializes"))
}

/// Explicit rule-table form when the table is small enough.
pub fn machine_rules_value(m: &Machine, cap: u64) -> Result<Value> {
    let table = export_table_capped(m, cap)?;
    Ok(serde_json::to_value(table_to_rules(m, &table)).expect("rule table serializes"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_and_transform_roundtrip() {
        let m = zoo::black_detector().machine;
        let s = transforms::synchronize(&m).unwrap();
        let v = machine_to_value(&s).unwrap();
        let back = machine_from_value(&v).unwrap();
        assert_eq!(back.num_states(), 12);
        assert_eq!(back.states(), s.states());
    }

    #[test]
    fn unknown_transform_is_domain_error() {
        let m = zoo::black_detector().machine;
        assert!(matches!(
            apply_transform("nope", &[m], &Value::Null),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn nested_parse_error_location() {
        let v = serde_json::json!({"transform": "synchronize", "inputs": [{"states": 3}]});
        match machine_from_value(&v) {
            Err(Error::Parse { location, .. }) => assert!(location.starts_with("inputs[0]")),
            other => panic!("unexpected {other:?}"),
        }
    }
}
