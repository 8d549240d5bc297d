//! Prices of production, labor values and technical change in linear
//! circulating-capital economies.
//!
//! An economy is a nonnegative input matrix `A` (column `i` is sector `i`'s
//! recipe), a positive direct-labor vector `L` and a real-wage bundle `b`.
//! The crate computes the uniform profit rate and prices, labor values and
//! the exploitation rate; classifies technical changes; builds the region of
//! post-change wage bundles under which a viable capital-using, labor-saving
//! change lowers the profit rate with exploitation unchanged; and checks all
//! of it against independent oracles.
//!
//! ```
//! use okishio_lab::{example::WorkedExample, uniform_profit_rate};
//!
//! let ex = WorkedExample::new().unwrap();
//! let eq = uniform_profit_rate(&ex.tech, &ex.bundle).unwrap();
//! assert!((eq.profit_rate - 3.0 / 17.0).abs() < 1e-12);
//! ```

// `!(x > 0.0)` is used on purpose: it rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod equilibrium;
pub mod error;
pub mod example;
pub mod linalg;
pub mod linear_economy;
pub mod synthesis;
pub mod technical_change;
pub mod verify;

pub use equilibrium::{
    check_assumption_b, max_profit_rate, uniform_profit_rate, AssumptionBReport, Equilibrium,
};
pub use error::{Error, Result};
pub use linalg::Matrix;
pub use linear_economy::{
    check_productive_indecomposable, exploitation_rate, labor_values, value_of_bundle, Technology,
    ValueSystem, WageBundle,
};
pub use synthesis::{
    build_region, sample_constant_exploitation, sample_rising_exploitation, synthesize_culs_change,
    SamplingStrategy, WageRegion,
};
pub use technical_change::{apply, classify, ChangeClassification, TechChange};
pub use verify::{run_scenario, run_suite, ScenarioReport, SuiteConfig, Verdict};

/// The guide's code snippets, compiled and run as doctests.
#[cfg(doctest)]
pub mod guide {
    #[doc = include_str!("../../../book/src/economy.md")]
    pub mod economy {}
    #[doc = include_str!("../../../book/src/equilibrium.md")]
    pub mod equilibrium {}
    #[doc = include_str!("../../../book/src/technical-change.md")]
    pub mod technical_change {}
    #[doc = include_str!("../../../book/src/wage-region.md")]
    pub mod wage_region {}
    #[doc = include_str!("../../../book/src/synthesis.md")]
    pub mod synthesis {}
    #[doc = include_str!("../../../book/src/verification.md")]
    pub mod verification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
