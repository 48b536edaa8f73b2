use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::CliError;

pub fn schema_for(command: &str) -> String {
    format!("fdl.{command}.v1")
}

/// Reads a config file for `command` and overlays the flags given on the
/// command line. Keys the command does not know are rejected.
pub fn merge<T>(command: &str, path: Option<&Path>, flags: &T) -> Result<T, CliError>
where
    T: Serialize + DeserializeOwned + Default,
{
    let Some(path) = path else {
        return serde_json::from_value(to_object(flags)?.into()).map_err(config_err);
    };
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut file: Map<String, Value> = match serde_json::from_str(&text) {
        Ok(Value::Object(m)) => m,
        Ok(_) => return Err(CliError::Config("config must be a JSON object".into())),
        Err(e) => return Err(CliError::Config(format!("{}: {e}", path.display()))),
    };
    let expected = schema_for(command);
    match file.remove("schema") {
        Some(Value::String(s)) if s == expected => {}
        Some(other) => {
            return Err(CliError::Config(format!("schema {other} does not match \"{expected}\"")));
        }
        None => return Err(CliError::Config(format!("missing \"schema\": \"{expected}\""))),
    }
    let known = to_object(&T::default())?;
    if let Some(key) = file.keys().find(|k| !known.contains_key(*k)) {
        return Err(CliError::Config(format!("unknown key \"{key}\" for {command}")));
    }
    for (key, value) in to_object(flags)? {
        let unset = value.is_null() || value.as_array().is_some_and(|a| a.is_empty());
        if !unset {
            file.insert(key, value);
        }
    }
    serde_json::from_value(Value::Object(file)).map_err(config_err)
}

fn to_object<T: Serialize>(value: &T) -> Result<Map<String, Value>, CliError> {
    match serde_json::to_value(value).map_err(config_err)? {
        Value::Object(m) => Ok(m),
        _ => Err(CliError::Config("arguments do not form an object".into())),
    }
}

fn config_err(e: serde_json::Error) -> CliError {
    CliError::Config(e.to_string())
}
