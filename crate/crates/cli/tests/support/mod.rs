//! Shared helpers for the CLI test suites: binary invocation and a minimal
//! JSON-Schema validator covering the keyword subset the published schemas
//! use (type, enum, properties, required, additionalProperties, items,
//! minItems, maxItems, $ref into $defs).

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

pub fn ctk_binary() -> &'static str {
    env!("CARGO_BIN_EXE_ctk")
}

pub fn ctk(args: &[&str]) -> Output {
    Command::new(ctk_binary())
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn ctk_ok(args: &[&str]) -> String {
    let out = ctk(args);
    assert!(
        out.status.success(),
        "ctk {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8 output")
}

pub fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas")
}

pub fn validate_against(schema_file: &str, text: &str) -> Result<(), String> {
    let schema_text = std::fs::read_to_string(schema_dir().join(schema_file))
        .map_err(|e| format!("cannot read schema {schema_file}: {e}"))?;
    let schema: Value =
        serde_json::from_str(&schema_text).map_err(|e| format!("bad schema: {e}"))?;
    let instance: Value =
        serde_json::from_str(text).map_err(|e| format!("instance is not JSON: {e}"))?;
    check(&schema, &schema, &instance, "$")
}

fn resolve<'a>(root: &'a Value, reference: &str) -> &'a Value {
    let path = reference
        .strip_prefix("#/")
        .unwrap_or_else(|| panic!("unsupported $ref {reference}"));
    let mut node = root;
    for key in path.split('/') {
        node = node
            .get(key)
            .unwrap_or_else(|| panic!("$ref {reference} does not resolve"));
    }
    node
}

fn type_matches(name: &str, value: &Value) -> bool {
    match name {
        "object" => value.is_object(),
        "array" => value.is_array(),
        "string" => value.is_string(),
        "number" => value.is_number(),
        "integer" => value.is_i64() || value.is_u64(),
        "boolean" => value.is_boolean(),
        "null" => value.is_null(),
        other => panic!("unsupported type name {other}"),
    }
}

fn check(root: &Value, schema: &Value, value: &Value, path: &str) -> Result<(), String> {
    if let Some(Value::String(reference)) = schema.get("$ref") {
        return check(root, resolve(root, reference), value, path);
    }
    if let Some(ty) = schema.get("type") {
        let names: Vec<&str> = match ty {
            Value::String(s) => vec![s.as_str()],
            Value::Array(a) => a.iter().filter_map(|v| v.as_str()).collect(),
            other => return Err(format!("{path}: bad type spec {other}")),
        };
        if !names.iter().any(|n| type_matches(n, value)) {
            return Err(format!("{path}: expected {names:?}, found {value}"));
        }
    }
    if let Some(Value::Array(options)) = schema.get("enum") {
        if !options.contains(value) {
            return Err(format!("{path}: {value} not in enum {options:?}"));
        }
    }
    if let Value::Object(map) = value {
        if let Some(Value::Array(required)) = schema.get("required") {
            for key in required.iter().filter_map(|k| k.as_str()) {
                if !map.contains_key(key) {
                    return Err(format!("{path}: missing required key {key}"));
                }
            }
        }
        let properties = schema.get("properties").and_then(|p| p.as_object());
        for (key, item) in map {
            let child_path = format!("{path}.{key}");
            if let Some(prop_schema) = properties.and_then(|p| p.get(key)) {
                check(root, prop_schema, item, &child_path)?;
            } else {
                match schema.get("additionalProperties") {
                    Some(Value::Bool(false)) => {
                        return Err(format!("{path}: unexpected key {key}"))
                    }
                    Some(Value::Bool(true)) | None => {}
                    Some(extra_schema) => check(root, extra_schema, item, &child_path)?,
                }
            }
        }
    }
    if let Value::Array(items) = value {
        if let Some(min) = schema.get("minItems").and_then(|v| v.as_u64()) {
            if (items.len() as u64) < min {
                return Err(format!("{path}: fewer than {min} items"));
            }
        }
        if let Some(max) = schema.get("maxItems").and_then(|v| v.as_u64()) {
            if (items.len() as u64) > max {
                return Err(format!("{path}: more than {max} items"));
            }
        }
        if let Some(item_schema) = schema.get("items") {
            for (i, item) in items.iter().enumerate() {
                check(root, item_schema, item, &format!("{path}[{i}]"))?;
            }
        }
    }
    Ok(())
}
