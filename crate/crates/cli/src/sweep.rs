//! One-parameter sweeps. Points run in parallel; rows are emitted in range order.

use crate::args::{SweepOpts, SweepTarget, ThetaArg};
use crate::commands::{
    chain_result_on, config_value, field_profiles, field_result_on, ising_table, load_chain, minimal_result,
};
use crate::output::{num, CsvTable, Done, Output};
use crate::{CliError, Result, EXIT_INVARIANT, EXIT_OK};
use rayon::prelude::*;
use serde_json::Value;
use std::path::PathBuf;

type Table = (Vec<String>, Vec<Vec<String>>);

fn pick(v: &Value, keys: &[&str]) -> Table {
    let row = keys.iter().map(|k| v.get(*k).and_then(Value::as_f64).map(num).unwrap_or_default()).collect();
    (keys.iter().map(|k| k.to_string()).collect(), vec![row])
}

fn unknown(param: &str, target: &str, allowed: &[&str]) -> CliError {
    CliError::Usage(format!("`{param}` cannot be swept for {target}; choose one of {}", allowed.join(", ")))
}

pub fn run(target: SweepTarget) -> Result<Done> {
    match target {
        SweepTarget::Minimal { sweep, args } => {
            const ALLOWED: [&str; 3] = ["h", "k", "theta"];
            if !ALLOWED.contains(&sweep.param.as_str()) {
                return Err(unknown(&sweep.param, "minimal", &ALLOWED));
            }
            let keys = ["h", "k", "theta", "theta_opt", "E_A", "E_B", "E_B_max"];
            let (seed, out) = (args.common.seed, args.common.output.clone());
            let config = merged("minimal", &sweep, config_value(&args));
            assemble("sweep minimal", seed, config, out, &sweep, |x| {
                let mut a = args.clone();
                match sweep.param.as_str() {
                    "h" => a.h = x,
                    "k" => a.k = x,
                    _ => a.theta = ThetaArg::Value(x),
                }
                Ok(pick(&minimal_result(&a)?, &keys))
            })
        }
        SweepTarget::Chain { sweep, args } => {
            if sweep.param != "theta" {
                return Err(unknown(&sweep.param, "chain", &["theta"]));
            }
            let chain = load_chain(&args)?;
            let keys = ["theta", "theta_opt", "eta", "xi", "E_A", "E_B", "E_B_closed_form", "E_B_max"];
            let (seed, out) = (args.common.seed, args.common.output.clone());
            let config = merged("chain", &sweep, config_value(&args));
            assemble("sweep chain", seed, config, out, &sweep, |x| {
                let mut a = args.clone();
                a.theta = ThetaArg::Value(x);
                Ok(pick(&chain_result_on(&chain, &a)?, &keys))
            })
        }
        SweepTarget::Ising { sweep, args } => {
            const ALLOWED: [&str; 2] = ["J", "c"];
            if !ALLOWED.contains(&sweep.param.as_str()) {
                return Err(unknown(&sweep.param, "ising", &ALLOWED));
            }
            let (seed, out) = (args.common.seed, args.common.output.clone());
            let config = merged("ising", &sweep, config_value(&args));
            assemble("sweep ising", seed, config, out, &sweep, |x| {
                let mut a = args.clone();
                match sweep.param.as_str() {
                    "J" => a.j = x,
                    _ => a.c = x,
                }
                let (header, rows, _) = ising_table(&a)?;
                Ok((header, rows))
            })
        }
        SweepTarget::Field { sweep, args } => {
            const ALLOWED: [&str; 2] = ["T", "theta"];
            if !ALLOWED.contains(&sweep.param.as_str()) {
                return Err(unknown(&sweep.param, "field", &ALLOWED));
            }
            let (lambda, p) = field_profiles(&args)?;
            let keys = ["theta", "theta_opt", "E_A", "eta", "xi", "E_B", "E_B_max"];
            let (seed, out) = (args.common.seed, args.common.output.clone());
            let config = merged("field", &sweep, config_value(&args));
            assemble("sweep field", seed, config, out, &sweep, |x| {
                let mut a = args.clone();
                match sweep.param.as_str() {
                    "T" => a.t = x,
                    _ => a.theta = ThetaArg::Value(x),
                }
                Ok(pick(&field_result_on(lambda.clone(), p.clone(), &a)?, &keys))
            })
        }
    }
}

fn merged(target: &str, sweep: &SweepOpts, args: Value) -> Value {
    let mut m = serde_json::Map::new();
    m.insert("target".into(), Value::String(target.into()));
    if let Value::Object(s) = config_value(sweep) {
        m.extend(s);
    }
    if let Value::Object(a) = args {
        m.extend(a);
    }
    Value::Object(m)
}

fn assemble<F>(command: &str, seed: u64, config: Value, path: Option<PathBuf>, sweep: &SweepOpts, f: F) -> Result<Done>
where
    F: Fn(f64) -> Result<Table> + Sync,
{
    let points = sweep.range.points(sweep.log).map_err(CliError::Usage)?;
    let results: Vec<Result<Table>> = points.par_iter().map(|&x| f(x)).collect();
    let header = results
        .iter()
        .find_map(|r| r.as_ref().ok().map(|(h, _)| h.clone()))
        .unwrap_or_default();
    let mut table = CsvTable::new(command, seed, &config, vec![]);
    // The swept value gets its own column unless the results already carry it.
    let own_column = !header.contains(&sweep.param);
    table.header = std::iter::once("index".to_string())
        .chain(own_column.then(|| sweep.param.clone()))
        .chain(header.iter().cloned())
        .chain(["error".to_string()])
        .collect();
    let mut status = EXIT_OK;
    let mut notes = Vec::new();
    for (i, (x, r)) in points.iter().zip(results).enumerate() {
        let lead: Vec<String> = std::iter::once(i.to_string()).chain(own_column.then(|| num(*x))).collect();
        match r {
            Ok((_, rows)) => {
                for row in rows {
                    table.rows.push(lead.iter().cloned().chain(row).chain([String::new()]).collect());
                }
            }
            Err(e) => {
                if e.exit_code() == EXIT_INVARIANT {
                    status = EXIT_INVARIANT;
                }
                notes.push(format!("warning: point {i} ({} = {x}): {e}", sweep.param));
                let blanks = header.iter().map(|h| if *h == sweep.param { num(*x) } else { String::new() });
                table.rows.push(lead.iter().cloned().chain(blanks).chain([e.to_string()]).collect());
            }
        }
    }
    Ok(Done { output: Output { body: table.render(), path }, status, notes })
}
