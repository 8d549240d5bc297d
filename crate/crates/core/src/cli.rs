//! Command-line front end.
//!
//! Exit codes: 0 success, 1 golden mismatch, 2 input validation, 3 internal
//! guarantee violation.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::equilibrium::{
    assumption_b_report, max_profit_rate, uniform_profit_rate, RESIDUAL_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::example::{self, WorkedExample};
use crate::linalg::{dot, Matrix};
use crate::linear_economy::{
    check_productive_indecomposable, labor_values, Technology, ValueSystem, WageBundle,
};
use crate::synthesis::{
    build_region, price_value_condition, sample_constant_exploitation, sample_rising_exploitation,
    synthesize_culs_change, SamplingStrategy,
};
use crate::technical_change::{apply, check_properties, classify, TechChange, TechChangeSpec};
use crate::verify::{run_scenario, run_suite, SuiteConfig, SuiteRow};

pub const EXIT_OK: i32 = 0;
pub const EXIT_GOLDEN_MISMATCH: i32 = 1;
pub const EXIT_INVALID_INPUT: i32 = 2;
pub const EXIT_GUARANTEE: i32 = 3;

/// Environment variable overriding the residual tolerance.
pub const TOLERANCE_ENV: &str = "OKISHIO_LAB_TOL";

#[derive(Debug, Parser)]
#[command(
    name = "okishio-lab",
    version,
    about = "Prices of production, labor values and falling-profit technical change"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    pub format: Format,

    /// Residual tolerance for the price system (overrides OKISHIO_LAB_TOL).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Strategy {
    /// Spread leftover value in proportion to the pre-change bundle.
    Proportional,
    /// Equal quantities of every non-pivot commodity.
    EqualRest,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Equilibrium, labor values and admissibility of an economy.
    Analyze {
        #[arg(long)]
        economy: PathBuf,
    },
    /// Classify a technical change, optionally against a new wage bundle.
    CheckTc {
        #[arg(long)]
        economy: PathBuf,
        #[arg(long)]
        tc: PathBuf,
        #[arg(long)]
        wage: Option<PathBuf>,
    },
    /// Build a viable capital-using labor-saving change in a sector.
    SynthTc {
        #[arg(long)]
        economy: PathBuf,
        /// 1-based sector index.
        #[arg(long)]
        sector: usize,
        #[arg(long, default_value_t = 0.5)]
        epsilon_frac: f64,
        #[arg(long, default_value_t = 0.5)]
        labor_frac: f64,
    },
    /// Sample a post-change wage bundle that lowers the profit rate.
    SynthWage {
        #[arg(long)]
        economy: PathBuf,
        #[arg(long)]
        tc: PathBuf,
        #[arg(long, default_value_t = 1000)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Strategy::Proportional)]
        strategy: Strategy,
        /// Sample strictly below the value plane (rising exploitation).
        #[arg(long)]
        rising: bool,
    },
    /// Run the full before/after scenario for a change and a new bundle.
    Verify {
        #[arg(long)]
        economy: PathBuf,
        #[arg(long)]
        tc: PathBuf,
        #[arg(long)]
        wage: PathBuf,
    },
    /// Recompute the three-sector worked example and compare to its figures.
    ReproduceExample {
        /// Add this amount to a₁₁ before replaying (negative control).
        #[arg(long, hide = true)]
        perturb_a: Option<f64>,
    },
    /// Seeded Monte Carlo run of every pipeline.
    Sweep {
        #[arg(long, default_value_t = 1000)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 2)]
        n_min: usize,
        #[arg(long, default_value_t = 8)]
        n_max: usize,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Summary JSON destination; stderr when omitted.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
}

/// Economy interchange document. `A` is stored row-major and column `i`
/// is sector `i`'s input recipe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EconomyFile {
    #[serde(rename = "A")]
    pub inputs: Vec<Vec<f64>>,
    #[serde(rename = "L")]
    pub labor: Vec<f64>,
    pub b: Vec<f64>,
}

impl EconomyFile {
    pub fn from_economy(tech: &Technology, bundle: &WageBundle) -> Self {
        EconomyFile {
            inputs: tech.inputs().rows(),
            labor: tech.labor().to_vec(),
            b: bundle.as_slice().to_vec(),
        }
    }

    pub fn into_economy(self) -> Result<(Technology, WageBundle)> {
        let tech = Technology::new(Matrix::from_rows(&self.inputs)?, self.labor)?;
        let bundle = WageBundle::new(self.b)?;
        bundle.check_len(tech.sectors())?;
        Ok((tech, bundle))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WageFile {
    pub b: Vec<f64>,
}

pub fn load_economy(path: &Path) -> Result<(Technology, WageBundle)> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str::<EconomyFile>(&text)?.into_economy()
}

pub fn load_change(path: &Path, tech: &Technology) -> Result<TechChange> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str::<TechChangeSpec>(&text)?.into_change(tech)
}

pub fn load_wage(path: &Path, n: usize) -> Result<WageBundle> {
    let text = fs::read_to_string(path)?;
    let bundle = WageBundle::new(serde_json::from_str::<WageFile>(&text)?.b)?;
    bundle.check_len(n)?;
    Ok(bundle)
}

/// Formats with seven significant digits.
pub fn sig7(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (6 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

fn vec7(v: &[f64]) -> String {
    v.iter().map(|x| sig7(*x)).collect::<Vec<_>>().join("  ")
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn exit_code_for(err: &Error) -> i32 {
    match err.root() {
        Error::NoConvergence { .. }
        | Error::DegenerateNormalization(_)
        | Error::SamplingExhausted { .. } => EXIT_GUARANTEE,
        _ => EXIT_INVALID_INPUT,
    }
}

struct Ctx<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    format: Format,
    tolerance: f64,
}

impl Ctx<'_> {
    fn json(&mut self, value: &impl Serialize) -> Result<()> {
        writeln!(self.out, "{}", serde_json::to_string_pretty(value)?)?;
        Ok(())
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_INVALID_INPUT
            } else {
                EXIT_OK
            };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    let env_tol = std::env::var(TOLERANCE_ENV)
        .ok()
        .and_then(|s| s.parse::<f64>().ok());
    let tolerance = cli.tol.or(env_tol).unwrap_or(RESIDUAL_TOLERANCE);
    let mut ctx = Ctx {
        out,
        err,
        format: cli.format,
        tolerance,
    };
    match dispatch(&cli.command, &mut ctx) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(ctx.err, "error: {e}");
            exit_code_for(&e)
        }
    }
}

fn dispatch(command: &Command, ctx: &mut Ctx<'_>) -> Result<i32> {
    match command {
        Command::Analyze { economy } => analyze(economy, ctx),
        Command::CheckTc { economy, tc, wage } => check_tc(economy, tc, wage.as_deref(), ctx),
        Command::SynthTc {
            economy,
            sector,
            epsilon_frac,
            labor_frac,
        } => synth_tc(economy, *sector, *epsilon_frac, *labor_frac, ctx),
        Command::SynthWage {
            economy,
            tc,
            seed,
            strategy,
            rising,
        } => synth_wage(economy, tc, *seed, *strategy, *rising, ctx),
        Command::Verify { economy, tc, wage } => verify(economy, tc, wage, ctx),
        Command::ReproduceExample { perturb_a } => reproduce_example(*perturb_a, ctx),
        Command::Sweep {
            seed,
            count,
            n_min,
            n_max,
            out,
            summary,
        } => sweep(
            *seed,
            *count,
            *n_min,
            *n_max,
            out.as_deref(),
            summary.as_deref(),
            ctx,
        ),
    }
}

fn residual_guard(residual: f64, ctx: &mut Ctx<'_>) -> Result<i32> {
    if residual > ctx.tolerance {
        writeln!(
            ctx.err,
            "error: price-system residual {residual:e} exceeds tolerance {:e}",
            ctx.tolerance
        )?;
        return Ok(EXIT_GUARANTEE);
    }
    Ok(EXIT_OK)
}

fn analyze(path: &Path, ctx: &mut Ctx<'_>) -> Result<i32> {
    let (tech, bundle) = load_economy(path)?;
    let eq = uniform_profit_rate(&tech, &bundle)?;
    let vs = ValueSystem::new(&tech, &bundle)?;
    let diagnosis = check_productive_indecomposable(tech.inputs())?;
    let r = max_profit_rate(&tech)?;
    let report = assumption_b_report(&eq.prices, &vs.values, &bundle);
    let ratios = eq.price_value_ratios(&vs.values);
    match ctx.format {
        Format::Json | Format::Csv => ctx.json(&json!({
            "equilibrium": eq,
            "values": vs.values,
            "bundle_value": vs.bundle_value,
            "exploitation": vs.exploitation,
            "max_profit_rate": r,
            "rho_a": diagnosis.spectral_radius,
            "rho_m": eq.spectral_radius,
            "price_value_ratios": ratios,
            "assumption_b": {
                "in_b1": report.in_b1,
                "in_b2": report.in_b2,
                "max_ratio": report.max_ratio,
                "argmax_sector": report.argmax + 1,
                "one_plus_e": report.one_plus_e,
            },
        }))?,
        Format::Text => {
            let o = &mut ctx.out;
            writeln!(o, "sectors              {}", tech.sectors())?;
            writeln!(o, "profit rate          {}", sig7(eq.profit_rate))?;
            writeln!(o, "max profit rate      {}", sig7(r))?;
            writeln!(
                o,
                "rho(A)               {}",
                sig7(diagnosis.spectral_radius)
            )?;
            writeln!(o, "rho(M)               {}", sig7(eq.spectral_radius))?;
            writeln!(o, "prices               {}", vec7(&eq.prices))?;
            writeln!(o, "labor values         {}", vec7(&vs.values))?;
            writeln!(o, "price/value ratios   {}", vec7(&ratios))?;
            writeln!(o, "value of bundle      {}", sig7(vs.bundle_value))?;
            writeln!(o, "exploitation rate    {}", sig7(vs.exploitation))?;
            writeln!(
                o,
                "max ratio            {} at sector {}",
                sig7(report.max_ratio),
                report.argmax + 1
            )?;
            writeln!(o, "in B1                {}", yes(report.in_b1))?;
            writeln!(o, "in B2                {}", yes(report.in_b2))?;
            writeln!(o, "residual             {:e}", eq.residual)?;
        }
    }
    residual_guard(eq.residual, ctx)
}

fn check_tc(economy: &Path, tc: &Path, wage: Option<&Path>, ctx: &mut Ctx<'_>) -> Result<i32> {
    let (tech, bundle) = load_economy(economy)?;
    let change = load_change(tc, &tech)?;
    let eq = uniform_profit_rate(&tech, &bundle)?;
    let cls = classify(&tech, &eq, &change)?;
    let before = labor_values(&tech)?;
    let after = labor_values(&apply(&tech, &change)?)?;
    let bundle_value = dot(&before, bundle.as_slice());
    let region = if cls.viable {
        Some(build_region(&eq, &after, bundle_value, &cls)?)
    } else {
        None
    };
    let condition = price_value_condition(&eq.prices, &after, 1.0 / bundle_value - 1.0, cls.g);
    let properties = match wage {
        Some(path) => {
            let new_bundle = load_wage(path, tech.sectors())?;
            Some(check_properties(
                &tech,
                &change,
                &eq,
                &before,
                &after,
                &bundle,
                &new_bundle,
            )?)
        }
        None => None,
    };
    match ctx.format {
        Format::Json | Format::Csv => ctx.json(&json!({
            "sector": change.sector() + 1,
            "viable": cls.viable,
            "culs": cls.culs,
            "cost_before": cls.cost_before,
            "cost_after": cls.cost_after,
            "cost_drop": cls.cost_drop,
            "g": cls.g,
            "alpha": cls.alpha,
            "post_values": after,
            "condition_11": condition.iter().any(|c| *c),
            "region": region,
            "properties": properties,
        }))?,
        Format::Text => {
            let o = &mut ctx.out;
            writeln!(o, "sector               {}", change.sector() + 1)?;
            writeln!(o, "viable               {}", yes(cls.viable))?;
            writeln!(o, "capital-using, labor-saving {}", yes(cls.culs))?;
            writeln!(
                o,
                "unit cost            {} -> {}",
                sig7(cls.cost_before),
                sig7(cls.cost_after)
            )?;
            writeln!(o, "g                    {}", sig7(cls.g))?;
            writeln!(o, "alpha                {}", sig7(cls.alpha))?;
            writeln!(o, "post-change values   {}", vec7(&after))?;
            if let Some(region) = &region {
                writeln!(o, "price-plane axes     {}", vec7(&region.x_intercepts))?;
                writeln!(o, "value-plane axes     {}", vec7(&region.y_intercepts))?;
                writeln!(o, "region feasible      {}", yes(region.feasible))?;
            }
            if let Some(p) = &properties {
                writeln!(o, "dearer at old prices {}", yes(p.more_expensive))?;
                writeln!(o, "bundle value kept    {}", yes(p.constant_value))?;
                writeln!(o, "bounded cost drop    {}", yes(p.bounded_cost_drop))?;
                writeln!(o, "new bundle in B1     {}", yes(p.new_bundle_in_b1))?;
            }
        }
    }
    Ok(EXIT_OK)
}

fn synth_tc(
    economy: &Path,
    sector: usize,
    epsilon_frac: f64,
    labor_frac: f64,
    ctx: &mut Ctx<'_>,
) -> Result<i32> {
    let (tech, bundle) = load_economy(economy)?;
    if sector == 0 || sector > tech.sectors() {
        return Err(Error::InvalidSector {
            sector,
            n: tech.sectors(),
        });
    }
    let eq = uniform_profit_rate(&tech, &bundle)?;
    let synth = synthesize_culs_change(&tech, &bundle, &eq, sector - 1, epsilon_frac, labor_frac)?;
    match ctx.format {
        Format::Json | Format::Csv => ctx.json(&synth.change.to_spec())?,
        Format::Text => {
            let o = &mut ctx.out;
            writeln!(o, "sector               {}", sector)?;
            writeln!(o, "pivot sector         {}", synth.pivot + 1)?;
            writeln!(o, "phi                  {}", sig7(synth.phi))?;
            writeln!(o, "epsilon              {}", sig7(synth.epsilon))?;
            writeln!(
                o,
                "labor interval       ({}, {})",
                sig7(synth.labor_interval.0),
                sig7(synth.labor_interval.1)
            )?;
            writeln!(o, "new column           {}", vec7(synth.change.recipe()))?;
            writeln!(o, "new labor            {}", sig7(synth.change.labor()))?;
        }
    }
    Ok(EXIT_OK)
}

fn synth_wage(
    economy: &Path,
    tc: &Path,
    seed: u64,
    strategy: Strategy,
    rising: bool,
    ctx: &mut Ctx<'_>,
) -> Result<i32> {
    let (tech, bundle) = load_economy(economy)?;
    let change = load_change(tc, &tech)?;
    let eq = uniform_profit_rate(&tech, &bundle)?;
    let cls = classify(&tech, &eq, &change)?;
    let before = labor_values(&tech)?;
    let after = labor_values(&apply(&tech, &change)?)?;
    let region = build_region(&eq, &after, dot(&before, bundle.as_slice()), &cls)?;
    let strategy = match strategy {
        Strategy::Proportional => SamplingStrategy::Proportional(bundle.as_slice().to_vec()),
        Strategy::EqualRest => SamplingStrategy::EqualRest,
    };
    let new_bundle = if rising {
        sample_rising_exploitation(&region, seed, &strategy)?
    } else {
        sample_constant_exploitation(&region, seed, &strategy)?
    };
    match ctx.format {
        Format::Json | Format::Csv => ctx.json(&WageFile {
            b: new_bundle.as_slice().to_vec(),
        })?,
        Format::Text => {
            let o = &mut ctx.out;
            writeln!(o, "pivot sector         {}", region.pivot() + 1)?;
            writeln!(o, "alpha                {}", sig7(region.alpha))?;
            writeln!(o, "beta                 {}", sig7(region.beta))?;
            writeln!(o, "new wage bundle      {}", vec7(new_bundle.as_slice()))?;
            writeln!(
                o,
                "price at old prices  {}",
                sig7(dot(&eq.prices, new_bundle.as_slice()))
            )?;
            writeln!(
                o,
                "value after change   {}",
                sig7(dot(&after, new_bundle.as_slice()))
            )?;
        }
    }
    Ok(EXIT_OK)
}

fn verify(economy: &Path, tc: &Path, wage: &Path, ctx: &mut Ctx<'_>) -> Result<i32> {
    let (tech, bundle) = load_economy(economy)?;
    let change = load_change(tc, &tech)?;
    let new_bundle = load_wage(wage, tech.sectors())?;
    let report = run_scenario(&tech, &bundle, &change, &new_bundle)?;
    match ctx.format {
        Format::Json | Format::Csv => ctx.json(&report)?,
        Format::Text => {
            let o = &mut ctx.out;
            let f = &report.flags;
            writeln!(
                o,
                "profit rate          {} -> {}",
                sig7(report.pre.profit_rate),
                sig7(report.post.profit_rate)
            )?;
            writeln!(
                o,
                "exploitation rate    {} -> {}",
                sig7(report.pre.exploitation),
                sig7(report.post.exploitation)
            )?;
            writeln!(o, "prices after         {}", vec7(&report.post.prices))?;
            writeln!(o, "values after         {}", vec7(&report.post.values))?;
            writeln!(
                o,
                "viable / CU-LS       {} / {}",
                yes(f.viable),
                yes(f.culs)
            )?;
            writeln!(
                o,
                "P1 / P2 / P3         {} / {} / {}",
                yes(f.p1),
                yes(f.p2),
                yes(f.p3)
            )?;
            writeln!(o, "b in B before        {}", yes(f.in_b_pre))?;
            writeln!(o, "new b in B1          {}", yes(f.in_b1_post))?;
            writeln!(o, "condition (p/value)  {}", yes(f.condition_11))?;
            writeln!(o, "region feasible      {}", yes(f.region_feasible))?;
            writeln!(o, "verdict              {:?}", report.verdict)?;
        }
    }
    residual_guard(report.pre.residual.max(report.post.residual), ctx)
}

fn reproduce_example(perturb: Option<f64>, ctx: &mut Ctx<'_>) -> Result<i32> {
    let started = std::time::Instant::now();
    let mut inputs = Matrix::from_rows(&example::input_rows())?;
    if let Some(delta) = perturb {
        inputs[(0, 0)] += delta;
    }
    let report = example::replay(&WorkedExample::with_inputs(inputs)?)?;
    let elapsed = started.elapsed();
    match ctx.format {
        Format::Json | Format::Csv => ctx.json(&report)?,
        Format::Text => {
            for check in &report.checks {
                writeln!(
                    ctx.out,
                    "{} {:<34} expected {:<40} actual {}",
                    if check.pass { "PASS" } else { "FAIL" },
                    check.name,
                    vec7(&check.expected),
                    vec7(&check.actual)
                )?;
            }
            writeln!(
                ctx.out,
                "{} of {} fixtures match within {:e} ({:.1} ms)",
                report.checks.iter().filter(|c| c.pass).count(),
                report.checks.len(),
                example::GOLDEN_TOLERANCE,
                elapsed.as_secs_f64() * 1e3
            )?;
        }
    }
    if !report.pass {
        for check in report.mismatches() {
            writeln!(
                ctx.err,
                "mismatch: {} expected {:?} actual {:?}",
                check.name, check.expected, check.actual
            )?;
        }
        return Ok(EXIT_GOLDEN_MISMATCH);
    }
    Ok(EXIT_OK)
}

/// Column order of the sweep CSV.
pub const SWEEP_HEADER: [&str; 26] = [
    "seed",
    "n",
    "sector",
    "viable",
    "culs",
    "p1",
    "p2",
    "p3",
    "in_b_pre",
    "in_b1_post",
    "condition_11",
    "region_feasible",
    "conditions_agree",
    "pi",
    "pi_bar",
    "e",
    "e_bar",
    "verdict",
    "okishio_pi_bar",
    "rising_pi_bar",
    "rising_e_bar",
    "rising_verdict",
    "chain_holds",
    "max_residual",
    "oracle_gap",
    "error",
];

pub fn write_sweep_csv(rows: &[SuiteRow], sink: impl Write) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(sink);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    writer.write_record(SWEEP_HEADER).map_err(io)?;
    for row in rows {
        writer.serialize(row).map_err(io)?;
    }
    writer.flush()?;
    Ok(())
}

fn sweep(
    seed: u64,
    count: usize,
    n_min: usize,
    n_max: usize,
    out: Option<&Path>,
    summary_path: Option<&Path>,
    ctx: &mut Ctx<'_>,
) -> Result<i32> {
    if n_min < 1 || n_min > n_max {
        return Err(Error::NotInB {
            reason: format!("invalid sector range {n_min}..={n_max}"),
        });
    }
    let mut config = SuiteConfig::new(seed, count);
    config.generator.n_min = n_min;
    config.generator.n_max = n_max;
    let outcome = run_suite(&config);
    match out {
        Some(path) => write_sweep_csv(&outcome.rows, fs::File::create(path)?)?,
        None => write_sweep_csv(&outcome.rows, &mut *ctx.out)?,
    }
    let summary = serde_json::to_string_pretty(&outcome.summary)?;
    match summary_path {
        Some(path) => fs::write(path, summary + "\n")?,
        None => writeln!(ctx.err, "{summary}")?,
    }
    if outcome.summary.violations.total() > 0 {
        return Ok(EXIT_GUARANTEE);
    }
    Ok(EXIT_OK)
}
