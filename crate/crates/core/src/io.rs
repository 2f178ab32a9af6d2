//! JSON wire formats.
//!
//! Set systems: `{"universe": n, "sets": [[i,...],...]}` with indices
//! strictly ascending inside each set. Weighted families add
//! `"weights": ["p/q", ...]`. Loaders reject out-of-range indices,
//! non-ascending index lists and duplicate sets.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational};
use crate::set_system::{ElementSet, SetSystem};
use crate::weighted::WeightedFamily;

pub fn set_system_to_json(f: &SetSystem) -> Value {
    json!({
        "universe": f.universe(),
        "sets": f.sets().iter().map(|s| s.members()).collect::<Vec<_>>(),
    })
}

pub fn set_system_to_string(f: &SetSystem) -> String {
    set_system_to_json(f).to_string()
}

pub fn set_system_from_value(v: &Value) -> Result<SetSystem> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::input("set system JSON must be an object".to_string()))?;
    let universe = obj
        .get("universe")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::input("missing or non-integer \"universe\"".to_string()))?
        as usize;
    let sets_v = obj
        .get("sets")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::input("missing \"sets\" array".to_string()))?;

    let mut seen = std::collections::HashSet::new();
    let mut sets = Vec::with_capacity(sets_v.len());
    for entry in sets_v {
        let indices = entry
            .as_array()
            .ok_or_else(|| Error::input("each set must be an array of indices".to_string()))?;
        let mut members = Vec::with_capacity(indices.len());
        for ix in indices {
            let i = ix
                .as_u64()
                .ok_or_else(|| Error::input("set indices must be non-negative integers".to_string()))?
                as usize;
            if i >= universe {
                return Err(Error::input(format!(
                    "index {i} out of range for universe {universe}"
                )));
            }
            if let Some(&last) = members.last() {
                if i <= last {
                    return Err(Error::input(
                        "set indices must be strictly ascending".to_string(),
                    ));
                }
            }
            members.push(i);
        }
        let s = ElementSet::from_indices(&members)?;
        if !seen.insert(s.mask()) {
            return Err(Error::input(format!("duplicate set {s} in family")));
        }
        sets.push(s);
    }
    SetSystem::new(universe, sets)
}

pub fn set_system_from_str(s: &str) -> Result<SetSystem> {
    let v: Value =
        serde_json::from_str(s).map_err(|e| Error::input(format!("bad JSON: {e}")))?;
    set_system_from_value(&v)
}

pub fn weighted_family_to_json(d: &WeightedFamily) -> Value {
    json!({
        "universe": d.family().universe(),
        "sets": d.family().sets().iter().map(|s| s.members()).collect::<Vec<_>>(),
        "weights": d.weights().iter().map(format_rational).collect::<Vec<_>>(),
    })
}

pub fn weighted_family_from_value(v: &Value) -> Result<WeightedFamily> {
    let family = set_system_from_value(v)?;
    let weights_v = v
        .get("weights")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::input("missing \"weights\" array".to_string()))?;
    let weights = weights_v
        .iter()
        .map(|w| {
            w.as_str()
                .ok_or_else(|| Error::input("weights must be \"p/q\" strings".to_string()))
                .and_then(parse_rational)
        })
        .collect::<Result<Vec<_>>>()?;
    WeightedFamily::new(family, weights)
}

pub fn weighted_family_from_str(s: &str) -> Result<WeightedFamily> {
    let v: Value =
        serde_json::from_str(s).map_err(|e| Error::input(format!("bad JSON: {e}")))?;
    weighted_family_from_value(&v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn set_system_round_trip() {
        let f = SetSystem::from_members(4, &[vec![0, 1], vec![2]]).unwrap();
        let s = set_system_to_string(&f);
        let g = set_system_from_str(&s).unwrap();
        assert!(f.same_family(&g));
        assert_eq!(s, set_system_to_string(&g));
    }

    #[test]
    fn loader_rejects_bad_inputs() {
        assert!(set_system_from_str(r#"{"universe":2,"sets":[[0,2]]}"#).is_err());
        assert!(set_system_from_str(r#"{"universe":3,"sets":[[1,0]]}"#).is_err());
        assert!(set_system_from_str(r#"{"universe":3,"sets":[[0],[0]]}"#).is_err());
        assert!(set_system_from_str(r#"{"universe":3}"#).is_err());
    }

    #[test]
    fn weighted_round_trip() {
        let f = SetSystem::from_members(3, &[vec![0], vec![1, 2]]).unwrap();
        let d = WeightedFamily::new(f, vec![rat(1, 3), rat(2, 3)]).unwrap();
        let v = weighted_family_to_json(&d);
        let d2 = weighted_family_from_value(&v).unwrap();
        assert_eq!(d.weights(), d2.weights());
        assert!(d.family().same_family(d2.family()));
    }
}
