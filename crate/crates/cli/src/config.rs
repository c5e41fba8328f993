//! Key-value configuration files.
//!
//! ```text
//! # comment
//! h = 1.5
//! theta = auto
//! residual = true      # switches take true/false
//! ```
//!
//! Keys are the long flag names of the chosen subcommand (`site_a` and `site-a`
//! both work). A flag given on the command line wins over the file.

use crate::{args::Cli, CliError, Result};
use clap::CommandFactory;
use std::ffi::OsString;

/// One `key = value` line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

pub fn parse(text: &str) -> Result<Vec<Entry>> {
    let mut entries: Vec<Entry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Usage(format!("config line {}: expected `key = value`, got `{line}`", i + 1)));
        };
        let key = k.trim().trim_start_matches("--").to_string();
        let value = v.trim().to_string();
        if key.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key", i + 1)));
        }
        if let Some(prev) = entries.iter().find(|e| e.key == key) {
            return Err(CliError::Usage(format!(
                "config line {}: `{key}` already set on line {}",
                i + 1,
                prev.line
            )));
        }
        entries.push(Entry { line: i + 1, key, value });
    }
    Ok(entries)
}

/// Removes `--config FILE` from `argv` and splices the file's flags in after the subcommand.
pub fn merge(mut argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut path: Option<String> = None;
    let mut i = 1;
    while i < argv.len() {
        let tok = argv[i].to_string_lossy().into_owned();
        if tok == "--" {
            break;
        }
        if tok == "--config" {
            if i + 1 >= argv.len() {
                return Err(CliError::Usage("--config needs a file".into()));
            }
            path = Some(argv[i + 1].to_string_lossy().into_owned());
            argv.drain(i..i + 2);
        } else if let Some(p) = tok.strip_prefix("--config=") {
            path = Some(p.to_string());
            argv.remove(i);
        } else {
            i += 1;
        }
    }
    let Some(path) = path else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(&path).map_err(|source| CliError::Io { path: path.clone(), source })?;
    let entries = parse(&text).map_err(|e| CliError::Usage(format!("{path}: {e}")))?;

    // Locate the subcommand (and the sweep target) to find the flags they accept.
    let mut cmd = Cli::command();
    let mut insert_at = None;
    let mut j = 1;
    while j < argv.len() {
        let tok = argv[j].to_string_lossy().into_owned();
        if !tok.starts_with('-') {
            match cmd.find_subcommand(&tok) {
                Some(sub) => {
                    cmd = sub.clone();
                    insert_at = Some(j + 1);
                    if !cmd.has_subcommands() {
                        break;
                    }
                }
                None => break,
            }
        }
        j += 1;
    }
    let Some(at) = insert_at.filter(|_| !cmd.has_subcommands()) else {
        return Err(CliError::Usage(format!("{path}: a config file needs a subcommand on the command line")));
    };

    let given: Vec<String> = argv[at..].iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let mut extra: Vec<OsString> = Vec::new();
    for e in entries {
        let arg = cmd
            .get_arguments()
            .find(|a| a.get_long() == Some(e.key.as_str()))
            .or_else(|| {
                let dashed = e.key.replace('_', "-");
                cmd.get_arguments().find(|a| a.get_long() == Some(dashed.as_str()))
            })
            .filter(|a| a.get_long() != Some("help"))
            .ok_or_else(|| {
                CliError::Usage(format!("{path} line {}: `{}` is not a flag of `{}`", e.line, e.key, cmd.get_name()))
            })?;
        let long = arg.get_long().expect("found by long name");
        let flag = format!("--{long}");
        if given.iter().any(|g| *g == flag || g.starts_with(&format!("{flag}="))) {
            continue;
        }
        if arg.get_action().takes_values() {
            extra.push(flag.into());
            extra.push(e.value.into());
        } else {
            match e.value.as_str() {
                "true" => extra.push(flag.into()),
                "false" => {}
                v => {
                    return Err(CliError::Usage(format!(
                        "{path} line {}: `{long}` is a switch, expected true or false, got `{v}`",
                        e.line
                    )))
                }
            }
        }
    }
    argv.splice(at..at, extra);
    Ok(argv)
}
