//! Resolution of the index, form and Gram arguments.

use std::path::Path;

use serde_json::Value;
use upcong_core::fixtures::table1;
use upcong_core::jacobi::{JacobiExpansion, JacobiIndex};
use upcong_siegel::lattice::{d16_plus, e8, Gram};

use crate::error::{CliError, CliResult};

fn read_json(path: &str) -> CliResult<Value> {
    let text = std::fs::read_to_string(Path::new(path)).map_err(|source| CliError::Io { path: path.to_string(), source })?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{path}: {e}")))
}

/// Inline JSON when the argument looks like a matrix, otherwise a file.
fn json_arg(arg: &str) -> CliResult<Value> {
    if arg.trim_start().starts_with('[') {
        serde_json::from_str(arg).map_err(|e| CliError::Input(format!("{arg}: {e}")))
    } else {
        read_json(arg)
    }
}

fn matrix(v: &Value, key: &str) -> CliResult<Vec<Vec<i64>>> {
    let m = match v {
        Value::Object(o) => o.get(key).ok_or_else(|| CliError::Input(format!("missing \"{key}\"")))?,
        other => other,
    };
    serde_json::from_value(m.clone()).map_err(|e| CliError::Input(format!("{key}: {e}")))
}

pub fn parse_index(arg: &str) -> CliResult<JacobiIndex> {
    if let Some(idx) = JacobiIndex::named(arg) {
        return Ok(idx);
    }
    Ok(JacobiIndex::from_twice(&matrix(&json_arg(arg)?, "twice_index")?)?)
}

/// A Jacobi expansion file, or `table1:<name>` for a shipped table form.
pub fn parse_form(arg: &str) -> CliResult<JacobiExpansion> {
    if let Some(name) = arg.strip_prefix("table1:") {
        let t = table1()?;
        let f = t.form(name).ok_or_else(|| CliError::Input(format!("no table form named {name}")))?;
        return Ok(f.expansion.clone());
    }
    Ok(JacobiExpansion::from_json(&read_json(arg)?)?)
}

pub fn parse_gram(arg: &str) -> CliResult<Gram> {
    match arg.to_ascii_lowercase().as_str() {
        "e8" => return Ok(e8()),
        "d16+" => return Ok(d16_plus()?),
        "e8+e8" => return Ok(e8().direct_sum(&e8())),
        _ => {}
    }
    Ok(Gram::new(matrix(&json_arg(arg)?, "gram")?)?)
}
