//! Acceptance run: one line per criterion, nonzero exit if any fails.

use qet_cli::verify;
use std::process::Command;
use std::time::{Duration, Instant};

const SEED: u64 = 20240;

/// Wall-clock budgets; criteria without one are `None`.
fn budget(n: u32) -> Option<Duration> {
    match n {
        1 | 3 => Some(Duration::from_secs(5)),
        8 => Some(Duration::from_secs(1)),
        10 => Some(Duration::from_secs(30)),
        _ => None,
    }
}

fn run_qet(args: &[&str]) -> (Option<i32>, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_qet")).args(args).output().expect("qet binary runs");
    (out.status.code(), out.stdout)
}

fn determinism() -> (bool, String) {
    let cases: [&[&str]; 2] = [
        &["verify", "--suite", "all", "--seed", "7"],
        &["sweep", "minimal", "--param", "k", "--range", "0.1:10:50", "--log", "--seed", "7"],
    ];
    let mut notes = Vec::new();
    let mut ok = true;
    for args in cases {
        let (c1, o1) = run_qet(args);
        let (c2, o2) = run_qet(args);
        let same = o1 == o2 && !o1.is_empty();
        ok &= same && c1 == Some(0) && c2 == Some(0);
        notes.push(format!("`{}`: exit {:?}/{:?}, {} bytes, identical {same}", args.join(" "), c1, c2, o1.len()));
    }
    (ok, notes.join("; "))
}

fn main() {
    let mut failed = Vec::new();
    for n in verify::NUMBERED {
        let start = Instant::now();
        let check = verify::criterion(n, SEED);
        let elapsed = start.elapsed();
        let in_time = budget(n).is_none_or(|b| elapsed < b);
        let passed = check.passed && in_time;
        let limit = budget(n).map(|b| format!(" / {} s", b.as_secs())).unwrap_or_default();
        println!(
            "criterion {n:>2} {}  {}: {} [{:.2} s{limit}]",
            if passed { "PASS" } else { "FAIL" },
            check.name,
            check.detail,
            elapsed.as_secs_f64()
        );
        if !passed {
            failed.push(n);
        }
    }
    let report = verify::ising_cross_check();
    println!("{}", report.line());

    let (ok, detail) = determinism();
    println!("criterion 11 {}  CLI determinism: {detail}", if ok { "PASS" } else { "FAIL" });
    if !ok {
        failed.push(11);
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
    println!("all 11 criteria pass");
}
