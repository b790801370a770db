use std::path::Path;

use super::CliError;
use crate::sim::{Scenario, ValidationError};

/// Parses a scenario document, fills defaults and validates it.
///
/// A run header is accepted too, in which case its embedded scenario is
/// used, so a header alone reproduces its run.
pub fn parse_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_named(&text, &path.display().to_string())
}

pub fn parse_scenario_str(text: &str) -> Result<Scenario, CliError> {
    parse_named(text, "<input>")
}

fn parse_named(text: &str, name: &str) -> Result<Scenario, CliError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| {
        let suffix = format!(" at line {} column {}", e.line(), e.column());
        let message = e.to_string();
        CliError::Parse {
            path: name.to_string(),
            line: e.line(),
            column: e.column(),
            message: message.strip_suffix(&suffix).unwrap_or(&message).to_string(),
        }
    })?;
    let (value, prefix) = match value {
        serde_json::Value::Object(mut m) if m.contains_key("generator") && m.contains_key("scenario") => {
            (m.remove("scenario").unwrap_or_default(), "scenario.")
        }
        v => (v, ""),
    };
    let scenario: Scenario = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        ValidationError {
            path: if path == "." {
                prefix.trim_end_matches('.').to_string()
            } else {
                format!("{prefix}{path}")
            },
            message: e.into_inner().to_string(),
        }
    })?;
    scenario.validate()?;
    Ok(scenario)
}
