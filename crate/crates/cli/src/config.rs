//! `--config FILE` expansion: JSON keys become flags inserted right after
//! the subcommand, so flags typed on the command line override them.

use std::ffi::OsString;
use std::path::Path;

use serde_json::{Map, Value};

use crate::CliError;

const SUBCOMMANDS: [&str; 6] = ["simulate", "exact", "bounds", "capacity", "figures", "verify"];

/// Returns `args` with any `--config FILE` replaced by the flags it holds.
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(sub) = args
        .iter()
        .skip(1)
        .position(|a| SUBCOMMANDS.iter().any(|s| a == *s))
        .map(|i| i + 1)
    else {
        return Ok(args);
    };
    let mut path = None;
    let mut rest = Vec::with_capacity(args.len());
    let mut iter = args.iter().skip(sub + 1);
    while let Some(a) = iter.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            let v = iter
                .next()
                .ok_or_else(|| CliError::usage("--config needs a file"))?;
            path = Some(v.clone());
        } else if let Some(v) = s.strip_prefix("--config=") {
            path = Some(OsString::from(v));
        } else {
            rest.push(a.clone());
        }
    }
    let Some(path) = path else {
        return Ok(args);
    };
    let name = args[sub].to_string_lossy().into_owned();
    let flags = load(Path::new(&path), &name)?;
    let mut out: Vec<OsString> = args[..=sub].to_vec();
    out.extend(flags.into_iter().map(OsString::from));
    out.extend(rest);
    Ok(out)
}

fn load(path: &Path, subcommand: &str) -> Result<Vec<String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("reading {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let Value::Object(mut obj) = value else {
        return Err(CliError::usage(format!("{}: expected a JSON object", path.display())));
    };
    // a run manifest keeps the flags under "parameters"
    if let Some(Value::Object(params)) = obj.remove("parameters") {
        if let Some(Value::String(s)) = obj.get("subcommand") {
            if s != subcommand {
                return Err(CliError::usage(format!(
                    "{} was written by `{s}`, not `{subcommand}`",
                    path.display()
                )));
            }
        }
        obj = params;
    }
    to_flags(&obj)
}

fn to_flags(obj: &Map<String, Value>) -> Result<Vec<String>, CliError> {
    let mut out = Vec::new();
    for (key, value) in obj {
        let flag = format!("--{}", key.replace('_', "-"));
        let text = match value {
            Value::Null | Value::Bool(false) => continue,
            Value::Bool(true) => {
                out.push(flag);
                continue;
            }
            Value::Number(n) => n.to_string(),
            Value::String(s) => s.clone(),
            Value::Array(items) => items
                .iter()
                .map(|v| match v {
                    Value::Number(n) => Ok(n.to_string()),
                    Value::String(s) => Ok(s.clone()),
                    _ => Err(CliError::usage(format!("bad list item for {key}"))),
                })
                .collect::<Result<Vec<_>, _>>()?
                .join(","),
            Value::Object(_) => return Err(CliError::usage(format!("nested object for {key}"))),
        };
        out.push(flag);
        out.push(text);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn flags_from_object() {
        let obj: Map<String, Value> = serde_json::from_str(
            r#"{"n": 8, "p": 0.1, "fresh_codebook": true, "canonical": false, "sweep": [8, 12], "x": null}"#,
        )
        .unwrap();
        let flags = to_flags(&obj).unwrap();
        assert_eq!(
            flags,
            ["--fresh-codebook", "--n", "8", "--p", "0.1", "--sweep", "8,12"]
        );
    }

    #[test]
    fn passes_through_without_config() {
        let args = os(&["beeid", "bounds", "--p", "0.1"]);
        assert_eq!(expand(args.clone()).unwrap(), args);
    }

    #[test]
    fn inserts_after_subcommand() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"p": 0.2, "steps": 3}"#).unwrap();
        let args = os(&["beeid", "--threads", "2", "bounds", "--p", "0.1", "--config", path.to_str().unwrap()]);
        assert_eq!(
            expand(args).unwrap(),
            os(&["beeid", "--threads", "2", "bounds", "--p", "0.2", "--steps", "3", "--p", "0.1"])
        );
    }

    #[test]
    fn manifest_must_match_subcommand() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        std::fs::write(&path, r#"{"subcommand": "bounds", "parameters": {"p": 0.2}}"#).unwrap();
        let p = path.to_str().unwrap();
        assert!(expand(os(&["beeid", "capacity", "--config", p])).is_err());
        assert_eq!(
            expand(os(&["beeid", "bounds", "--config", p])).unwrap(),
            os(&["beeid", "bounds", "--p", "0.2"])
        );
    }
}
