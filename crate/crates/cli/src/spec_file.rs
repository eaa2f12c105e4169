//! Channel spec documents: one channel object, an array of them, or
//! `{"users": [...]}`.

use std::fs;
use std::path::Path;

use lowsnr::{ChannelSpec, FadingModel};
use serde_json::Value;

use crate::error::{bad, CliError};

pub fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| bad(format!("{} is not valid JSON: {e}", path.display())))
}

pub fn parse_channels(doc: Value) -> Result<Vec<FadingModel>, CliError> {
    let entries = match doc {
        Value::Array(items) => items,
        Value::Object(mut map) if map.contains_key("users") => {
            if map.len() != 1 {
                return Err(bad("a spec with `users` takes no other keys"));
            }
            match map.remove("users") {
                Some(Value::Array(items)) => items,
                _ => return Err(bad("`users` must be an array of channel objects")),
            }
        }
        single @ Value::Object(_) => vec![single],
        _ => {
            return Err(bad(
                "a spec is a channel object, an array, or {\"users\": [...]}",
            ))
        }
    };
    if entries.is_empty() {
        return Err(bad("the channel file lists no users"));
    }
    entries
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            let spec: ChannelSpec =
                serde_json::from_value(v).map_err(|e| bad(format!("user {}: {e}", i + 1)))?;
            spec.to_model()
                .map_err(|e| bad(format!("user {}: {e}", i + 1)))
        })
        .collect()
}

pub fn load_channels(path: &Path) -> Result<Vec<FadingModel>, CliError> {
    parse_channels(read_json(path)?)
}
