//! Resilience and resistance of welfare time series.
//!
//! A unit's levels `k_t` are differenced, the increments are modelled as an
//! ARMA(p, q) process around a mean increment `g`, and four properties are read
//! off the fit: level (mean of `k_t`), trend (`g`), relative volatility
//! (`ρ = σ / 2|g| − 1`) and persistence (`π`, the sum of all ARMA
//! coefficients). Units with a non-deteriorating trend are *resilient* when
//! `π < 0` and *resistant* when `ρ < 0`.
//!
//! ```
//! use resilience_core::{arma, resilience, ts::LevelSeries};
//!
//! let params = arma::ArmaParams::new(10.0, vec![-0.5], vec![], 50.0);
//! let increments = arma::simulate(&params, params.spec(), 199, 7).unwrap();
//! let levels = increments.integrate(2000.0).unwrap();
//! let levels = LevelSeries::from_values("demo", 1961, levels.values().to_vec()).unwrap();
//! let profile = resilience::profile(&levels, &Default::default()).unwrap();
//! assert!(profile.pi < 0.0);
//! ```

pub mod arma;
pub mod crosssection;
pub mod diagnostics;
pub mod error;
mod linalg;
pub mod optim;
pub mod resilience;
pub mod ts;

pub use arma::{ArmaFit, ArmaParams, ArmaSpec};
pub use crosssection::{OlsResult, PanelTable, Property, Ranking};
pub use diagnostics::{AdfResult, LjungBoxResult};
pub use error::{Error, Result};
pub use resilience::{AnalysisConfig, Classification, ResilienceProfile};
pub use ts::{DescriptiveStats, IncrementSeries, LevelSeries};
