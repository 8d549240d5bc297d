//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use okishio_lab::cli;
use okishio_lab::equilibrium::RESIDUAL_TOLERANCE;
use okishio_lab::verify::{
    run_suite, SuiteConfig, SuiteRow, Verdict, ORACLE_AGREEMENT, ORACLE_MAX_N,
};

const SUITE_SEED: u64 = 1000;
const SUITE_COUNT: usize = 500;
const STRICT: f64 = 1e-12;
const EQUAL: f64 = 1e-9;

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn criterion(name: &'static str, failures: &[String], detail: String) -> Outcome {
    Outcome {
        name,
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            detail
        } else {
            format!(
                "{} failing: {}",
                failures.len(),
                failures
                    .iter()
                    .take(3)
                    .cloned()
                    .collect::<Vec<_>>()
                    .join("; ")
            )
        },
    }
}

fn failing(rows: &[SuiteRow], what: &str, ok: impl Fn(&SuiteRow) -> bool) -> Vec<String> {
    rows.iter()
        .filter(|r| !ok(r))
        .map(|r| format!("seed {} {what}", r.seed))
        .collect()
}

fn golden_replay() -> Outcome {
    let started = Instant::now();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cli::run(["okishio-lab", "reproduce-example"], &mut out, &mut err);
    let elapsed = started.elapsed();
    let (mut sink, mut sink_err) = (Vec::new(), Vec::new());
    let control = cli::run(
        ["okishio-lab", "reproduce-example", "--perturb-a", "0.01"],
        &mut sink,
        &mut sink_err,
    );
    let mut failures = Vec::new();
    if code != cli::EXIT_OK {
        failures.push(format!(
            "exit {code}: {}",
            String::from_utf8_lossy(&err).trim()
        ));
    }
    if control != cli::EXIT_GOLDEN_MISMATCH {
        failures.push(format!("perturbed control exited {control}"));
    }
    if elapsed >= Duration::from_secs(1) {
        failures.push(format!("took {elapsed:?}"));
    }
    let summary = String::from_utf8_lossy(&out)
        .lines()
        .last()
        .unwrap_or_default()
        .to_string();
    criterion("golden replay", &failures, summary)
}

fn main() -> ExitCode {
    let mut outcomes = vec![golden_replay()];

    let started = Instant::now();
    let suite = run_suite(&SuiteConfig::new(SUITE_SEED, SUITE_COUNT));
    let elapsed = started.elapsed();
    let rows = &suite.rows;
    let feasible: Vec<SuiteRow> = rows.iter().filter(|r| r.region_feasible).cloned().collect();

    let mut pipeline = failing(rows, "errored", |r| r.error.is_empty());
    pipeline.extend(failing(&feasible, "constant-exploitation outcome", |r| {
        r.pi_bar < r.pi - STRICT && (r.e_bar - r.e).abs() <= EQUAL
    }));
    if rows.len() < SUITE_COUNT {
        pipeline.push(format!("only {} scenarios", rows.len()));
    }
    for n in 2..=8 {
        if !rows.iter().any(|r| r.n == n) {
            pipeline.push(format!("no economy of size {n}"));
        }
    }
    if elapsed >= Duration::from_secs(60) {
        pipeline.push(format!("took {elapsed:?}"));
    }
    outcomes.push(criterion(
        "falling profit at constant exploitation",
        &pipeline,
        format!(
            "{} of {} feasible, {} constant-exploitation verdicts, {:.2} s",
            feasible.len(),
            rows.len(),
            suite.summary.verdicts.profit_fell_exploitation_constant,
            elapsed.as_secs_f64()
        ),
    ));

    let synthesis = failing(rows, "synthesis guarantee", |r| {
        r.viable && r.culs && r.condition_11 && r.region_feasible && r.conditions_agree
    });
    outcomes.push(criterion(
        "synthesized change is viable, CU-LS, and feasible",
        &synthesis,
        format!(
            "{} changes, condition and intercept tests agree on all",
            rows.len()
        ),
    ));

    let okishio = failing(rows, "fixed-wage profit fell", |r| {
        r.okishio_pi_bar >= r.pi - EQUAL
    });
    outcomes.push(criterion(
        "fixed real wage never lowers profit",
        &okishio,
        format!("{} controls", rows.len()),
    ));

    let rising = failing(&feasible, "rising-exploitation outcome", |r| {
        r.rising_e_bar > r.e + STRICT
            && r.rising_pi_bar < r.pi - STRICT
            && r.rising_verdict == Verdict::ProfitFellExploitationRose
    });
    outcomes.push(criterion(
        "falling profit with rising exploitation",
        &rising,
        format!(
            "{} rising-exploitation verdicts",
            suite.summary.rising_verdicts.profit_fell_exploitation_rose
        ),
    ));

    let mut chain = failing(rows, "value/price chain", |r| r.chain_holds);
    chain.extend(failing(rows, "residual", |r| {
        r.max_residual <= RESIDUAL_TOLERANCE
    }));
    let small: Vec<SuiteRow> = rows
        .iter()
        .filter(|r| r.n <= ORACLE_MAX_N)
        .cloned()
        .collect();
    chain.extend(failing(&small, "oracle gap", |r| {
        r.oracle_gap <= ORACLE_AGREEMENT
    }));
    if small.is_empty() {
        chain.push("no oracle-sized economies".into());
    }
    outcomes.push(criterion(
        "p >> values >= new values, residual and oracle",
        &chain,
        format!(
            "max residual {:.1e}, max oracle gap {:.1e} over {} economies",
            suite.summary.max_residual,
            suite.summary.max_oracle_gap,
            small.len()
        ),
    ));

    for (k, o) in outcomes.iter().enumerate() {
        println!(
            "{} criterion {}: {} ({})",
            if o.pass { "PASS" } else { "FAIL" },
            k + 1,
            o.name,
            o.detail
        );
    }
    if outcomes.iter().all(|o| o.pass) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
