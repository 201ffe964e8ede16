//! Minimal JSON Schema validator covering the subset the shipped schema
//! files use: type (including union types), required, properties,
//! additionalProperties, items, minItems/maxItems, enum, const, numeric
//! bounds, and local `$ref`s into `definitions`. External `$ref`s and
//! `oneOf` are treated permissively (structural checks only).

use serde_json::Value;

pub fn validate(schema: &Value, value: &Value) -> Result<(), String> {
    let mut errors = Vec::new();
    check(schema, schema, value, "$", &mut errors);
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors.join("; "))
    }
}

fn type_name(value: &Value) -> &'static str {
    match value {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(n) => {
            if n.is_u64() || n.is_i64() {
                "integer"
            } else {
                "number"
            }
        }
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

fn type_matches(expected: &str, value: &Value) -> bool {
    match expected {
        "number" => value.is_number(),
        "integer" => value.as_i64().is_some() || value.as_u64().is_some(),
        other => type_name(value) == other,
    }
}

fn resolve<'a>(root: &'a Value, reference: &str) -> Option<&'a Value> {
    let path = reference.strip_prefix("#/")?;
    let mut node = root;
    for part in path.split('/') {
        node = node.get(part)?;
    }
    Some(node)
}

fn check(root: &Value, schema: &Value, value: &Value, path: &str, errors: &mut Vec<String>) {
    let Some(obj) = schema.as_object() else {
        return;
    };

    if let Some(Value::String(reference)) = obj.get("$ref") {
        if let Some(target) = resolve(root, reference) {
            check(root, target, value, path, errors);
        }
        // external refs: skipped
        return;
    }

    if let Some(expected) = obj.get("type") {
        let ok = match expected {
            Value::String(t) => type_matches(t, value),
            Value::Array(ts) => ts
                .iter()
                .filter_map(|t| t.as_str())
                .any(|t| type_matches(t, value)),
            _ => true,
        };
        if !ok {
            errors.push(format!(
                "{path}: expected type {expected}, got {}",
                type_name(value)
            ));
            return;
        }
    }

    if let Some(allowed) = obj.get("enum").and_then(Value::as_array) {
        if !allowed.contains(value) {
            errors.push(format!("{path}: {value} not in enum {allowed:?}"));
        }
    }
    if let Some(expected) = obj.get("const") {
        if expected != value {
            errors.push(format!("{path}: expected const {expected}, got {value}"));
        }
    }

    if let Some(n) = value.as_f64() {
        for (key, pass) in [
            (
                "minimum",
                n >= obj
                    .get("minimum")
                    .and_then(Value::as_f64)
                    .unwrap_or(f64::NEG_INFINITY),
            ),
            (
                "maximum",
                n <= obj
                    .get("maximum")
                    .and_then(Value::as_f64)
                    .unwrap_or(f64::INFINITY),
            ),
            (
                "exclusiveMinimum",
                n > obj
                    .get("exclusiveMinimum")
                    .and_then(Value::as_f64)
                    .unwrap_or(f64::NEG_INFINITY),
            ),
            (
                "exclusiveMaximum",
                n < obj
                    .get("exclusiveMaximum")
                    .and_then(Value::as_f64)
                    .unwrap_or(f64::INFINITY),
            ),
        ] {
            if obj.contains_key(key) && !pass {
                errors.push(format!("{path}: {n} violates {key} {}", obj[key]));
            }
        }
    }

    if let Some(items) = value.as_array() {
        if let Some(min) = obj.get("minItems").and_then(Value::as_u64) {
            if (items.len() as u64) < min {
                errors.push(format!("{path}: {} items < minItems {min}", items.len()));
            }
        }
        if let Some(max) = obj.get("maxItems").and_then(Value::as_u64) {
            if (items.len() as u64) > max {
                errors.push(format!("{path}: {} items > maxItems {max}", items.len()));
            }
        }
        if let Some(item_schema) = obj.get("items") {
            for (i, item) in items.iter().enumerate() {
                check(root, item_schema, item, &format!("{path}[{i}]"), errors);
            }
        }
    }

    if let Some(map) = value.as_object() {
        if let Some(required) = obj.get("required").and_then(Value::as_array) {
            for name in required.iter().filter_map(Value::as_str) {
                if !map.contains_key(name) {
                    errors.push(format!("{path}: missing required key {name:?}"));
                }
            }
        }
        let properties = obj.get("properties").and_then(Value::as_object);
        if let Some(props) = properties {
            for (name, sub) in props {
                if let Some(child) = map.get(name) {
                    check(root, sub, child, &format!("{path}.{name}"), errors);
                }
            }
        }
        if obj.get("additionalProperties") == Some(&Value::Bool(false)) {
            for key in map.keys() {
                if properties.is_none_or(|p| !p.contains_key(key)) {
                    errors.push(format!("{path}: unexpected key {key:?}"));
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn accepts_matching_documents() {
        let schema = json!({
            "type": "object",
            "required": ["name", "values"],
            "additionalProperties": false,
            "properties": {
                "name": {"type": "string"},
                "values": {"type": "array", "items": {"type": "number", "minimum": 0}}
            }
        });
        assert!(validate(&schema, &json!({"name": "x", "values": [1.5, 2.0]})).is_ok());
    }

    #[test]
    fn rejects_violations() {
        let schema = json!({
            "type": "object",
            "required": ["n"],
            "additionalProperties": false,
            "properties": {"n": {"type": "integer", "minimum": 1}}
        });
        assert!(validate(&schema, &json!({})).is_err());
        assert!(validate(&schema, &json!({"n": 0})).is_err());
        assert!(validate(&schema, &json!({"n": 1, "extra": true})).is_err());
    }

    #[test]
    fn follows_local_refs() {
        let schema = json!({
            "type": "object",
            "properties": {"x": {"$ref": "#/definitions/pos"}},
            "definitions": {"pos": {"type": "number", "exclusiveMinimum": 0}}
        });
        assert!(validate(&schema, &json!({"x": 2.0})).is_ok());
        assert!(validate(&schema, &json!({"x": -1.0})).is_err());
    }
}
