//! `key = value` config files. Keys are long flag names (`k-max` or
//! `k_max`); a repeated key supplies several values. Flags given on the
//! command line win over the file.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::parser::ValueSource;
use clap::{ArgMatches, Command, CommandFactory};
use serde::Serialize;

use super::args::Cli;
use super::CliError;
use crate::error::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

pub fn parse_config(text: &str) -> Result<Vec<Entry>, String> {
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected `key = value`", no + 1))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(format!("line {}: empty key", no + 1));
        }
        out.push(Entry {
            line: no + 1,
            key: key.replace('_', "-"),
            value: value.trim().to_owned(),
        });
    }
    Ok(out)
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Some(true),
        "false" | "no" | "0" | "off" => Some(false),
        _ => None,
    }
}

fn subcommand_position(argv: &[OsString], name: &str) -> Option<usize> {
    argv.iter().skip(1).position(|a| a == name).map(|i| i + 1)
}

/// Command line with the config file's entries spliced in ahead of the
/// user's own arguments. Without `--config` the input comes back as is.
pub fn merge_config(argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let lenient = Cli::command().ignore_errors(true);
    let Ok(matches) = lenient.try_get_matches_from(&argv) else {
        return Ok(argv);
    };
    let Some((name, sub)) = matches.subcommand() else {
        return Ok(argv);
    };
    let Some(path) = config_path(sub) else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::Data(Error::io(&path, e)))?;
    let entries = parse_config(&text).map_err(|m| CliError::Usage(format!("{}: {m}", path.display())))?;

    let cmd = Cli::command();
    let sub_cmd = cmd.find_subcommand(name).expect("matched subcommand");
    let (flags, positionals) = entries_to_args(sub_cmd, sub, &entries, &path)?;

    let at = subcommand_position(&argv, name).unwrap_or(1);
    let mut merged: Vec<OsString> = argv[..=at].to_vec();
    merged.extend(flags.into_iter().map(OsString::from));
    merged.extend(argv[at + 1..].iter().cloned());
    if !positionals.is_empty() {
        if !merged.iter().any(|a| a == "--") {
            merged.push("--".into());
        }
        merged.extend(positionals.into_iter().map(OsString::from));
    }
    Ok(merged)
}

fn config_path(sub: &ArgMatches) -> Option<PathBuf> {
    sub.try_get_one::<PathBuf>("config").ok().flatten().cloned()
}

fn entries_to_args(
    cmd: &Command,
    matches: &ArgMatches,
    entries: &[Entry],
    path: &Path,
) -> Result<(Vec<String>, Vec<String>), CliError> {
    let mut flags = Vec::new();
    let mut positionals = Vec::new();
    for e in entries {
        let usage = |m: &str| CliError::Usage(format!("{}:{}: {m}", path.display(), e.line));
        let arg = cmd
            .get_arguments()
            .find(|a| a.get_long() == Some(e.key.as_str()) || a.get_id().as_str().replace('_', "-") == e.key)
            .ok_or_else(|| usage(&format!("unknown key `{}`", e.key)))?;
        let id = arg.get_id().as_str();
        if id == "config" {
            return Err(usage("a config file cannot name another config file"));
        }
        if matches!(matches.value_source(id), Some(ValueSource::CommandLine)) {
            continue;
        }
        if arg.is_positional() {
            positionals.push(e.value.clone());
        } else if arg.get_action().takes_values() {
            flags.push(format!("--{}", arg.get_long().expect("long flag")));
            flags.push(match arg.get_value_delimiter() {
                Some(d) => e.value.split(d).map(str::trim).collect::<Vec<_>>().join(&d.to_string()),
                None => e.value.clone(),
            });
        } else {
            let on = parse_bool(&e.value).ok_or_else(|| usage(&format!("`{}` expects true or false", e.key)))?;
            if on {
                flags.push(format!("--{}", arg.get_long().expect("long flag")));
            }
        }
    }
    Ok((flags, positionals))
}

/// Renders a resolved argument struct as a config file that reproduces
/// it: one `key = value` line per field, lists as repeated keys, unset
/// options as comments.
pub fn render_config<T: Serialize>(command: &str, args: &T) -> String {
    let value = serde_json::to_value(args).expect("arguments serialize");
    let mut out = format!("# nrep {command}\n");
    let serde_json::Value::Object(map) = value else {
        return out;
    };
    for (key, v) in map {
        let key = key.replace('_', "-");
        match v {
            serde_json::Value::Null => out.push_str(&format!("# {key} =\n")),
            serde_json::Value::Array(items) => {
                for item in items {
                    out.push_str(&format!("{key} = {}\n", scalar(&item)));
                }
            }
            other => out.push_str(&format!("{key} = {}\n", scalar(&other))),
        }
    }
    out
}

fn scalar(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}
