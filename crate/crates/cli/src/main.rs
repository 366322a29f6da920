mod args;
mod commands;

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, Parser};
use serde_json::Value;

use args::Cli;
use commands::CliError;

const SYNOPSIS: &str = "usage: kelvinasym <lemmas|kelvin-check|poisson|residual-n3|expand3|radial|fit|residual-scaling> [flags]; see --help";

fn main() -> ExitCode {
    let argv: Vec<OsString> = std::env::args_os().collect();
    ExitCode::from(run(argv))
}

fn run(argv: Vec<OsString>) -> u8 {
    let argv = match merge_config(argv) {
        Ok(a) => a,
        Err(e) => return usage_error(&e),
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code() as u8;
        }
    };
    if let Err(e) = configure_threads() {
        return usage_error(&e);
    }
    match commands::dispatch(cli.command) {
        Ok(()) => 0,
        Err(CliError::Usage(m)) => usage_error(&m),
        Err(CliError::Failed(m)) => {
            eprintln!("verification failed: {m}");
            1
        }
    }
}

fn usage_error(msg: &str) -> u8 {
    eprintln!("error: {msg}");
    eprintln!("{SYNOPSIS}");
    2
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("KELVINASYM_THREADS") else {
        return Ok(());
    };
    let threads: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| format!("KELVINASYM_THREADS must be a positive integer, got {v:?}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().map_err(|e| e.to_string())
}

/// Appends `--key value` for every entry of the `--config` object whose
/// flag is not already on the command line.
fn merge_config(mut argv: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let strs: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let Some(pos) = strs.iter().position(|a| a == "--config" || a.starts_with("--config=")) else {
        return Ok(argv);
    };
    let path = match strs[pos].strip_prefix("--config=") {
        Some(p) => p.to_string(),
        None => strs.get(pos + 1).cloned().ok_or("--config needs a path")?,
    };
    let path = PathBuf::from(path);
    let text = std::fs::read_to_string(&path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let Value::Object(map) = value else {
        return Err(format!("{} must hold a JSON object", path.display()));
    };
    let given: BTreeSet<String> = strs
        .iter()
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a).to_string())
        .collect();
    let subcommand = strs.get(1).cloned().unwrap_or_default();
    let known: BTreeSet<String> = Cli::command()
        .find_subcommand(&subcommand)
        .map(|c| c.get_arguments().filter_map(|a| a.get_long().map(str::to_string)).collect())
        .unwrap_or_default();
    for (key, val) in map {
        let flag = key.replace('_', "-");
        if flag == "config" || given.contains(&flag) {
            continue;
        }
        if !known.is_empty() && !known.contains(&flag) {
            return Err(format!("unknown key {key:?} in {}", path.display()));
        }
        let text = match val {
            Value::Bool(true) => {
                argv.push(format!("--{flag}").into());
                continue;
            }
            Value::Bool(false) | Value::Null => continue,
            Value::String(s) => s,
            Value::Array(items) => items.iter().map(scalar_text).collect::<Vec<_>>().join(","),
            other => scalar_text(&other),
        };
        argv.push(format!("--{flag}").into());
        argv.push(text.into());
    }
    Ok(argv)
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}
