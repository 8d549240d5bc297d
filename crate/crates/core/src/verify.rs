//! End-to-end scenario checks, independent oracles and the seeded Monte
//! Carlo suite.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::equilibrium::{assumption_b_report, uniform_profit_rate, RESIDUAL_TOLERANCE};
use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix, PATTERN_ZERO};
use crate::linear_economy::{check_productive_indecomposable, Technology, ValueSystem, WageBundle};
use crate::synthesis::{
    build_region, price_value_condition, sample_constant_exploitation, sample_rising_exploitation,
    synthesize_culs_change, SamplingStrategy, WageRegion, ON_PLANE_TOLERANCE,
};
use crate::technical_change::{
    apply, check_properties, classify, TechChange, STRICT_MARGIN, VALUE_EQUALITY_TOLERANCE,
};

/// Tolerance for `π̄ ≥ π` in the fixed-wage control.
pub const OKISHIO_TOLERANCE: f64 = 1e-9;
/// Agreement required between power iteration and the bisection oracle.
pub const ORACLE_AGREEMENT: f64 = 1e-8;
/// Slack on `Λ̄ ≤ Λ` for capital-using labor-saving changes.
pub const VALUE_FALL_TOLERANCE: f64 = 1e-10;
/// Largest matrix the determinant oracle accepts.
pub const ORACLE_MAX_N: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    ProfitFellExploitationConstant,
    ProfitFellExploitationRose,
    OkishioRise,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Snapshot {
    pub profit_rate: f64,
    pub prices: Vec<f64>,
    pub values: Vec<f64>,
    pub exploitation: f64,
    pub residual: f64,
    pub spectral_radius: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ScenarioFlags {
    pub viable: bool,
    pub culs: bool,
    pub p1: bool,
    pub p2: bool,
    pub p3: bool,
    pub in_b_pre: bool,
    pub in_b1_post: bool,
    pub condition_11: bool,
    pub region_feasible: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub pre: Snapshot,
    pub post: Snapshot,
    pub flags: ScenarioFlags,
    pub verdict: Verdict,
}

impl ScenarioReport {
    pub fn profit_fell(&self) -> bool {
        self.post.profit_rate < self.pre.profit_rate - STRICT_MARGIN
    }

    pub fn exploitation_constant(&self) -> bool {
        (self.post.exploitation - self.pre.exploitation).abs() <= VALUE_EQUALITY_TOLERANCE
    }
}

/// Outcome observed in a scenario; the conditions behind it live in the flags.
pub fn verdict_for(pre: &Snapshot, post: &Snapshot) -> Verdict {
    let fell = post.profit_rate < pre.profit_rate - STRICT_MARGIN;
    let rose = post.profit_rate > pre.profit_rate + STRICT_MARGIN;
    let de = post.exploitation - pre.exploitation;
    if rose {
        Verdict::OkishioRise
    } else if fell && de.abs() <= VALUE_EQUALITY_TOLERANCE {
        Verdict::ProfitFellExploitationConstant
    } else if fell && de > STRICT_MARGIN {
        Verdict::ProfitFellExploitationRose
    } else {
        Verdict::Inconclusive
    }
}

fn snapshot(tech: &Technology, bundle: &WageBundle) -> Result<Snapshot> {
    let eq = uniform_profit_rate(tech, bundle)?;
    let vs = ValueSystem::new(tech, bundle)?;
    Ok(Snapshot {
        profit_rate: eq.profit_rate,
        prices: eq.prices,
        values: vs.values,
        exploitation: vs.exploitation,
        residual: eq.residual,
        spectral_radius: eq.spectral_radius,
    })
}

/// Recomputes both equilibria from scratch and classifies the outcome.
pub fn run_scenario(
    tech: &Technology,
    bundle: &WageBundle,
    change: &TechChange,
    new_bundle: &WageBundle,
) -> Result<ScenarioReport> {
    let pre = snapshot(tech, bundle).map_err(|e| e.in_stage("pre-change equilibrium"))?;
    let new_tech = apply(tech, change).map_err(|e| e.in_stage("applying technical change"))?;
    new_bundle
        .check_len(tech.sectors())
        .map_err(|e| e.in_stage("post-change wage bundle"))?;
    let post =
        snapshot(&new_tech, new_bundle).map_err(|e| e.in_stage("post-change equilibrium"))?;

    let eq_pre =
        uniform_profit_rate(tech, bundle).map_err(|e| e.in_stage("pre-change equilibrium"))?;
    let cls = classify(tech, &eq_pre, change).map_err(|e| e.in_stage("classification"))?;
    let props = check_properties(
        tech,
        change,
        &eq_pre,
        &pre.values,
        &post.values,
        bundle,
        new_bundle,
    )
    .map_err(|e| e.in_stage("property check"))?;
    let b_report = assumption_b_report(&pre.prices, &pre.values, bundle);

    let mut flags = ScenarioFlags {
        viable: cls.viable,
        culs: cls.culs,
        p1: props.more_expensive,
        p2: props.constant_value,
        p3: props.bounded_cost_drop,
        in_b_pre: b_report.in_b(),
        in_b1_post: props.new_bundle_in_b1,
        ..ScenarioFlags::default()
    };
    if cls.viable {
        let bundle_value = dot(&pre.values, bundle.as_slice());
        let region = build_region(&eq_pre, &post.values, bundle_value, &cls)
            .map_err(|e| e.in_stage("wage region"))?;
        flags.region_feasible = region.feasible;
        flags.condition_11 =
            price_value_condition(&pre.prices, &post.values, pre.exploitation, cls.g)
                .into_iter()
                .any(|c| c);
    }
    let verdict = verdict_for(&pre, &post);
    Ok(ScenarioReport {
        pre,
        post,
        flags,
        verdict,
    })
}

/// Perron root of a nonnegative matrix by bisection on `μ`.
///
/// `μ > ρ(M)` exactly when `μI − M` is a nonsingular M-matrix, i.e. when
/// the Neumann series of `M/μ` converges, and for a Z-matrix that holds iff
/// every leading principal minor is positive. Minors are expanded by
/// cofactors, so this shares no code with the power iteration.
pub fn oracle_spectral_radius(m: &Matrix) -> Result<f64> {
    let n = m.dim();
    if n > ORACLE_MAX_N {
        return Err(Error::OracleLimit { n });
    }
    if n == 0 {
        return Err(Error::Empty);
    }
    let rows = m.rows();
    let mut hi = rows
        .iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    if hi == 0.0 {
        return Ok(0.0);
    }
    // ρ ≤ ‖M‖∞; nudge the bracket so the upper end passes the test.
    hi *= 1.0 + 1e-9;
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if neumann_converges(&rows, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn neumann_converges(rows: &[Vec<f64>], mu: f64) -> bool {
    let n = rows.len();
    let shifted: Vec<Vec<f64>> = (0..n)
        .map(|r| {
            (0..n)
                .map(|c| if r == c { mu - rows[r][c] } else { -rows[r][c] })
                .collect()
        })
        .collect();
    (1..=n).all(|k| {
        let minor: Vec<Vec<f64>> = shifted[..k].iter().map(|r| r[..k].to_vec()).collect();
        cofactor_det(&minor) > 0.0
    })
}

fn cofactor_det(m: &[Vec<f64>]) -> f64 {
    match m.len() {
        0 => 1.0,
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        n => (0..n)
            .map(|c| {
                let sub: Vec<Vec<f64>> = m[1..]
                    .iter()
                    .map(|r| {
                        r.iter()
                            .enumerate()
                            .filter(|&(k, _)| k != c)
                            .map(|(_, v)| *v)
                            .collect()
                    })
                    .collect();
                let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
                sign * m[0][c] * cofactor_det(&sub)
            })
            .sum(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct OracleMembership {
    pub on_v: bool,
    pub above_p: bool,
    pub nonneg: bool,
}

impl OracleMembership {
    pub fn accepted(&self) -> bool {
        self.on_v && self.above_p && self.nonneg
    }
}

/// Recomputes plane membership from raw sums over the region's normals.
pub fn oracle_region_membership(bundle: &[f64], region: &WageRegion) -> Result<OracleMembership> {
    let n = region.prices.len();
    if bundle.len() != n || region.values.len() != n {
        return Err(Error::DimensionMismatch {
            what: "bundle for membership oracle",
            expected: n,
            found: bundle.len(),
        });
    }
    let mut price = 0.0;
    let mut value = 0.0;
    for k in 0..n {
        price += region.prices[k] * bundle[k];
        value += region.values[k] * bundle[k];
    }
    let mut nonneg = true;
    let mut any_positive = false;
    for &q in bundle {
        nonneg &= q >= 0.0;
        any_positive |= q > 0.0;
    }
    Ok(OracleMembership {
        on_v: (value - region.beta).abs() <= ON_PLANE_TOLERANCE,
        above_p: price - region.alpha > STRICT_MARGIN,
        // The zero bundle is rejected by convention.
        nonneg: nonneg && any_positive,
    })
}

/// Parameters of the random-economy generator.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorConfig {
    pub n_min: usize,
    pub n_max: usize,
    pub entry_max: f64,
    pub zero_probability: f64,
    pub rho_range: (f64, f64),
    pub labor_range: (f64, f64),
    pub bundle_value_range: (f64, f64),
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            n_min: 2,
            n_max: 8,
            entry_max: 0.3,
            zero_probability: 0.2,
            rho_range: (0.3, 0.8),
            labor_range: (0.05, 0.5),
            bundle_value_range: (0.3, 0.9),
        }
    }
}

const MAX_GENERATOR_ATTEMPTS: usize = 1_000;

/// Draws a productive, indecomposable economy with an admissible wage bundle.
pub fn random_economy(
    rng: &mut impl Rng,
    n: usize,
    config: &GeneratorConfig,
) -> Result<(Technology, WageBundle)> {
    for _ in 0..MAX_GENERATOR_ATTEMPTS {
        let mut inputs = Matrix::from_fn(n, |_, _| {
            if rng.random::<f64>() < config.zero_probability {
                0.0
            } else {
                rng.random_range(0.0..config.entry_max)
            }
        });
        if !crate::linalg::strongly_connected(&inputs) {
            let mut cycle: Vec<usize> = (0..n).collect();
            cycle.shuffle(rng);
            for k in 0..n {
                let (from, to) = (cycle[k], cycle[(k + 1) % n]);
                inputs[(from, to)] += 1e-3;
            }
        }
        let rho = check_productive_indecomposable(&inputs)?.spectral_radius;
        if rho <= PATTERN_ZERO {
            continue;
        }
        let target = rng.random_range(config.rho_range.0..config.rho_range.1);
        let inputs = inputs.scale(target / rho);
        let labor: Vec<f64> = (0..n)
            .map(|_| rng.random_range(config.labor_range.0..config.labor_range.1))
            .collect();
        let tech = match Technology::new(inputs, labor) {
            Ok(t) => t,
            Err(_) => continue,
        };
        let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let Ok(raw) = WageBundle::new(raw) else {
            continue;
        };
        let values = crate::linear_economy::labor_values(&tech)?;
        let target_value =
            rng.random_range(config.bundle_value_range.0..config.bundle_value_range.1);
        let bundle = raw.scaled(target_value / dot(&values, raw.as_slice()))?;
        let eq = uniform_profit_rate(&tech, &bundle)?;
        if assumption_b_report(&eq.prices, &values, &bundle).in_b() {
            return Ok((tech, bundle));
        }
    }
    Err(Error::SamplingExhausted {
        proposals: MAX_GENERATOR_ATTEMPTS,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    pub seed: u64,
    pub count: usize,
    pub generator: GeneratorConfig,
}

impl SuiteConfig {
    pub fn new(seed: u64, count: usize) -> Self {
        SuiteConfig {
            seed,
            count,
            generator: GeneratorConfig::default(),
        }
    }
}

/// One generated economy pushed through every pipeline.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteRow {
    pub seed: u64,
    pub n: usize,
    /// 1-based sector of the synthesized change.
    pub sector: usize,
    pub viable: bool,
    pub culs: bool,
    pub p1: bool,
    pub p2: bool,
    pub p3: bool,
    pub in_b_pre: bool,
    pub in_b1_post: bool,
    pub condition_11: bool,
    pub region_feasible: bool,
    pub conditions_agree: bool,
    pub pi: f64,
    pub pi_bar: f64,
    pub e: f64,
    pub e_bar: f64,
    pub verdict: Verdict,
    pub okishio_pi_bar: f64,
    pub rising_pi_bar: f64,
    pub rising_e_bar: f64,
    pub rising_verdict: Verdict,
    pub chain_holds: bool,
    pub max_residual: f64,
    /// Largest gap between power iteration and the oracle; `NaN` when n > 6.
    pub oracle_gap: f64,
    /// Pipeline error, if any stage failed.
    pub error: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Violations {
    /// Constant-exploitation pipeline did not yield falling profit.
    pub constant_exploitation: usize,
    /// Synthesized change not viable, not CU-LS, or region test disagreement.
    pub synthesis: usize,
    pub okishio_control: usize,
    pub rising_exploitation: usize,
    pub value_price_chain: usize,
    pub residual: usize,
    pub oracle: usize,
    pub errors: usize,
}

impl Violations {
    pub fn total(&self) -> usize {
        self.constant_exploitation
            + self.synthesis
            + self.okishio_control
            + self.rising_exploitation
            + self.value_price_chain
            + self.residual
            + self.oracle
            + self.errors
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct VerdictCounts {
    #[serde(rename = "ProfitFellExploitationConstant")]
    pub profit_fell_exploitation_constant: usize,
    #[serde(rename = "ProfitFellExploitationRose")]
    pub profit_fell_exploitation_rose: usize,
    #[serde(rename = "OkishioRise")]
    pub okishio_rise: usize,
    #[serde(rename = "Inconclusive")]
    pub inconclusive: usize,
}

impl VerdictCounts {
    fn add(&mut self, v: Verdict) {
        match v {
            Verdict::ProfitFellExploitationConstant => self.profit_fell_exploitation_constant += 1,
            Verdict::ProfitFellExploitationRose => self.profit_fell_exploitation_rose += 1,
            Verdict::OkishioRise => self.okishio_rise += 1,
            Verdict::Inconclusive => self.inconclusive += 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteSummary {
    pub seed: u64,
    pub count: usize,
    pub verdicts: VerdictCounts,
    pub rising_verdicts: VerdictCounts,
    pub violations: Violations,
    pub max_residual: f64,
    pub max_oracle_gap: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteOutcome {
    pub rows: Vec<SuiteRow>,
    pub summary: SuiteSummary,
}

/// Runs `count` scenarios seeded `seed, seed + 1, …`.
///
/// Scenarios run in parallel; rows come back in seed order so the output is
/// independent of the thread count.
pub fn run_suite(config: &SuiteConfig) -> SuiteOutcome {
    let rows: Vec<SuiteRow> = (0..config.count as u64)
        .into_par_iter()
        .map(|k| suite_scenario(config.seed.wrapping_add(k), &config.generator))
        .collect();
    let summary = summarize(config, &rows);
    SuiteOutcome { rows, summary }
}

fn summarize(config: &SuiteConfig, rows: &[SuiteRow]) -> SuiteSummary {
    let mut verdicts = VerdictCounts::default();
    let mut rising_verdicts = VerdictCounts::default();
    let mut v = Violations::default();
    let mut max_residual: f64 = 0.0;
    let mut max_oracle_gap: f64 = 0.0;
    for row in rows {
        if !row.error.is_empty() {
            v.errors += 1;
            continue;
        }
        verdicts.add(row.verdict);
        rising_verdicts.add(row.rising_verdict);
        if row.verdict != Verdict::ProfitFellExploitationConstant
            || !(row.pi_bar < row.pi - STRICT_MARGIN)
            || (row.e_bar - row.e).abs() > VALUE_EQUALITY_TOLERANCE
        {
            v.constant_exploitation += 1;
        }
        if !(row.viable
            && row.culs
            && row.condition_11
            && row.region_feasible
            && row.conditions_agree)
        {
            v.synthesis += 1;
        }
        if row.okishio_pi_bar < row.pi - OKISHIO_TOLERANCE {
            v.okishio_control += 1;
        }
        if !(row.rising_e_bar > row.e + STRICT_MARGIN && row.rising_pi_bar < row.pi - STRICT_MARGIN)
        {
            v.rising_exploitation += 1;
        }
        if !row.chain_holds {
            v.value_price_chain += 1;
        }
        if row.max_residual > RESIDUAL_TOLERANCE {
            v.residual += 1;
        }
        if row.oracle_gap > ORACLE_AGREEMENT {
            v.oracle += 1;
        }
        max_residual = max_residual.max(row.max_residual);
        if row.oracle_gap.is_finite() {
            max_oracle_gap = max_oracle_gap.max(row.oracle_gap);
        }
    }
    SuiteSummary {
        seed: config.seed,
        count: rows.len(),
        verdicts,
        rising_verdicts,
        violations: v,
        max_residual,
        max_oracle_gap,
    }
}

fn suite_scenario(seed: u64, generator: &GeneratorConfig) -> SuiteRow {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(generator.n_min..=generator.n_max);
    let mut row = SuiteRow {
        seed,
        n,
        sector: 0,
        viable: false,
        culs: false,
        p1: false,
        p2: false,
        p3: false,
        in_b_pre: false,
        in_b1_post: false,
        condition_11: false,
        region_feasible: false,
        conditions_agree: false,
        pi: f64::NAN,
        pi_bar: f64::NAN,
        e: f64::NAN,
        e_bar: f64::NAN,
        verdict: Verdict::Inconclusive,
        okishio_pi_bar: f64::NAN,
        rising_pi_bar: f64::NAN,
        rising_e_bar: f64::NAN,
        rising_verdict: Verdict::Inconclusive,
        chain_holds: false,
        max_residual: f64::NAN,
        oracle_gap: f64::NAN,
        error: String::new(),
    };
    if let Err(e) = fill_row(&mut row, &mut rng, generator) {
        row.error = e.to_string();
    }
    row
}

fn fill_row(row: &mut SuiteRow, rng: &mut ChaCha8Rng, generator: &GeneratorConfig) -> Result<()> {
    let n = row.n;
    let (tech, bundle) =
        random_economy(rng, n, generator).map_err(|e| e.in_stage("generating economy"))?;
    let sector = rng.random_range(0..n);
    let epsilon_frac = rng.random_range(0.1..0.9);
    let labor_frac = rng.random_range(0.1..0.9);
    row.sector = sector + 1;

    let eq = uniform_profit_rate(&tech, &bundle)?;
    let values = ValueSystem::new(&tech, &bundle)?;
    let synth = synthesize_culs_change(&tech, &bundle, &eq, sector, epsilon_frac, labor_frac)
        .map_err(|e| e.in_stage("synthesizing change"))?;
    let new_tech = apply(&tech, &synth.change)?;
    let values_after = crate::linear_economy::labor_values(&new_tech)?;
    let cls = classify(&tech, &eq, &synth.change)?;
    let region = build_region(&eq, &values_after, values.bundle_value, &cls)
        .map_err(|e| e.in_stage("wage region"))?;
    let intercept_test: Vec<bool> = (0..n)
        .map(|j| region.y_intercepts[j] > region.x_intercepts[j])
        .collect();
    let condition = price_value_condition(&eq.prices, &values_after, values.exploitation, cls.g);
    row.conditions_agree = intercept_test == condition;

    let strategy = SamplingStrategy::Proportional(bundle.as_slice().to_vec());
    let new_bundle = sample_constant_exploitation(&region, row.seed, &strategy)
        .map_err(|e| e.in_stage("sampling constant bundle"))?;
    let report = run_scenario(&tech, &bundle, &synth.change, &new_bundle)?;
    let f = &report.flags;
    row.viable = f.viable;
    row.culs = f.culs;
    row.p1 = f.p1;
    row.p2 = f.p2;
    row.p3 = f.p3;
    row.in_b_pre = f.in_b_pre;
    row.in_b1_post = f.in_b1_post;
    row.condition_11 = f.condition_11;
    row.region_feasible = f.region_feasible;
    row.pi = report.pre.profit_rate;
    row.pi_bar = report.post.profit_rate;
    row.e = report.pre.exploitation;
    row.e_bar = report.post.exploitation;
    row.verdict = report.verdict;

    let control = run_scenario(&tech, &bundle, &synth.change, &bundle)?;
    row.okishio_pi_bar = control.post.profit_rate;

    let rising = sample_rising_exploitation(&region, row.seed, &strategy)
        .map_err(|e| e.in_stage("sampling rising bundle"))?;
    let rising_report = run_scenario(&tech, &bundle, &synth.change, &rising)?;
    row.rising_pi_bar = rising_report.post.profit_rate;
    row.rising_e_bar = rising_report.post.exploitation;
    row.rising_verdict = rising_report.verdict;

    row.chain_holds =
        value_price_chain(&report.pre.prices, &report.pre.values, &report.post.values);
    row.max_residual = [&report, &control, &rising_report]
        .iter()
        .flat_map(|r| [r.pre.residual, r.post.residual])
        .fold(0.0, f64::max);

    if n <= ORACLE_MAX_N {
        let mut gap: f64 = 0.0;
        for (t, b, rho) in [
            (&tech, &bundle, report.pre.spectral_radius),
            (&new_tech, &new_bundle, report.post.spectral_radius),
        ] {
            let oracle = oracle_spectral_radius(&t.augmented(b))?;
            gap = gap.max((oracle - rho).abs());
        }
        row.oracle_gap = gap;
    }
    Ok(())
}

/// `p ≫ Λ ≥ Λ̄` elementwise, with slack only on the weak inequality.
pub fn value_price_chain(prices: &[f64], values: &[f64], values_after: &[f64]) -> bool {
    prices.iter().zip(values).all(|(p, v)| p > v)
        && values
            .iter()
            .zip(values_after)
            .all(|(v, w)| *w <= v + VALUE_FALL_TOLERANCE)
}
