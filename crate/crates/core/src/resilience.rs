//! The four properties of a welfare trajectory (level, trend, volatility,
//! persistence) and the resilience / resistance classification built on them.
//!
//! A unit is *resilient* when its trend is not deteriorating and its increments
//! are anti-persistent (`π < 0`); it is *resistant* when its trend is not
//! deteriorating and typical shocks are too small to invert the trend (`ρ < 0`).

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::arma::{select_order_with, AicVariant, ArmaFit, ArmaParams, ArmaSpec, FitWarning};
use crate::diagnostics::{
    adf_test_with, default_ljung_box_lags, ljung_box, AdfResult, AdfVariant, LagOrder,
    LjungBoxResult, RegressionKind, ADF_MIN_LENGTH,
};
use crate::error::{Error, Result};
use crate::ts::{acf, describe, difference, DescriptiveStats, LevelSeries};

/// Persistence values this close to zero never count as anti-persistent.
pub const PI_TOLERANCE: f64 = 1e-6;

/// Shortest level series accepted by [`profile`] (ten increments).
pub const MIN_PROFILE_LENGTH: usize = 11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TrendCategory {
    Improving,
    Neutral,
    Deteriorating,
}

impl TrendCategory {
    pub fn as_str(&self) -> &'static str {
        match self {
            TrendCategory::Improving => "improving",
            TrendCategory::Neutral => "neutral",
            TrendCategory::Deteriorating => "deteriorating",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PersistenceCategory {
    AntiPersistent,
    Random,
    Persistent,
}

impl PersistenceCategory {
    pub fn of(pi: f64) -> Self {
        if pi < 0.0 {
            PersistenceCategory::AntiPersistent
        } else if pi > 0.0 {
            PersistenceCategory::Persistent
        } else {
            PersistenceCategory::Random
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            PersistenceCategory::AntiPersistent => "anti-persistent",
            PersistenceCategory::Random => "random",
            PersistenceCategory::Persistent => "persistent",
        }
    }
}

/// How "not deteriorating" is decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TrendRule {
    /// Improving or statistically neutral trend.
    #[default]
    Significance,
    /// `g ≥ 0`, ignoring the standard error.
    RawSign,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub max_p: usize,
    pub max_q: usize,
    /// Two-sided level of the trend significance test.
    pub alpha_trend: f64,
    /// `None` uses `min(10, n/5)`.
    pub ljung_box_lags: Option<usize>,
    pub aic_variant: AicVariant,
    pub adf_variant: AdfVariant,
    pub trend_rule: TrendRule,
    /// Carried for downstream randomized steps; fitting itself is deterministic.
    pub random_seed: u64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            max_p: 2,
            max_q: 2,
            alpha_trend: 0.05,
            ljung_box_lags: None,
            aic_variant: AicVariant::Aic,
            adf_variant: AdfVariant::Tau,
            trend_rule: TrendRule::Significance,
            random_seed: 0,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_trend > 0.0 && self.alpha_trend < 1.0) {
            return Err(Error::InvalidInput(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha_trend
            )));
        }
        if self.ljung_box_lags == Some(0) {
            return Err(Error::InvalidInput("Ljung-Box lags must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProfileWarning {
    Fit(FitWarning),
    /// Increment ADF fails to reject a unit root at 10 %.
    NonStationaryIncrements,
    /// Too few points for an ADF regression; the test was skipped.
    AdfSkipped,
}

impl ProfileWarning {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProfileWarning::Fit(w) => w.as_str(),
            ProfileWarning::NonStationaryIncrements => "non-stationary-increments",
            ProfileWarning::AdfSkipped => "adf-skipped",
        }
    }
}

/// Which conditions of the two definitions held.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rationale {
    pub trend_not_deteriorating: bool,
    pub anti_persistent: bool,
    pub not_volatile: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub resilient: bool,
    pub resistant: bool,
    pub rationale: Rationale,
}

/// Parameter-free counterparts of trend, volatility and persistence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonParametricProfile {
    pub g_np: f64,
    pub sigma_np: f64,
    /// Lag-1 autocorrelation of the increments; absent when they are constant.
    pub pi_np: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResilienceProfile {
    pub unit_id: String,
    pub n_levels: usize,
    /// Mean of the levels.
    pub level: f64,
    pub trend_g: f64,
    pub se_g: f64,
    pub trend_category: TrendCategory,
    pub trend_rule: TrendRule,
    pub sigma: f64,
    /// Relative volatility; `+inf` when `g = 0`.
    pub rho: f64,
    pub pi: f64,
    pub persistence_category: PersistenceCategory,
    pub fit: ArmaFit,
    pub ljung_box: LjungBoxResult,
    pub adf_levels: Option<AdfResult>,
    pub adf_increments: Option<AdfResult>,
    pub residual_stats: DescriptiveStats,
    pub nonparametric: NonParametricProfile,
    pub classification: Classification,
    pub warnings: Vec<ProfileWarning>,
}

impl ResilienceProfile {
    pub fn selected_spec(&self) -> ArmaSpec {
        self.fit.spec
    }

    pub fn params(&self) -> &ArmaParams {
        &self.fit.params
    }
}

/// `π = Σ β_i + Σ θ_j`, exactly zero for an ARMA(0,0) fit.
pub fn persistence(fit: &ArmaFit) -> f64 {
    fit.persistence()
}

/// `ρ = σ / (2|g|) − 1`, or `+inf` when `g = 0`.
pub fn relative_volatility(g: f64, sigma: f64) -> Result<f64> {
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(Error::InvalidSigma(sigma));
    }
    if g == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(sigma / (2.0 * g.abs()) - 1.0)
}

/// Two-sided z test of `g = 0` at level `alpha`.
pub fn trend_category(g: f64, se_g: f64, alpha: f64) -> TrendCategory {
    let z = Normal::standard().inverse_cdf(1.0 - alpha / 2.0);
    let t = g / se_g;
    if t > z {
        TrendCategory::Improving
    } else if t < -z {
        TrendCategory::Deteriorating
    } else {
        TrendCategory::Neutral
    }
}

/// Classification from the three ingredients.
pub fn classify_parts(trend_not_deteriorating: bool, pi: f64, rho: f64) -> Classification {
    let anti_persistent = pi < -PI_TOLERANCE;
    let not_volatile = rho < 0.0;
    Classification {
        resilient: trend_not_deteriorating && anti_persistent,
        resistant: trend_not_deteriorating && not_volatile,
        rationale: Rationale {
            trend_not_deteriorating,
            anti_persistent,
            not_volatile,
        },
    }
}

fn trend_not_deteriorating(rule: TrendRule, category: TrendCategory, g: f64) -> bool {
    match rule {
        TrendRule::Significance => category != TrendCategory::Deteriorating,
        TrendRule::RawSign => g >= 0.0,
    }
}

pub fn classify(profile: &ResilienceProfile) -> Classification {
    classify_parts(
        trend_not_deteriorating(profile.trend_rule, profile.trend_category, profile.trend_g),
        profile.pi,
        profile.rho,
    )
}

pub fn nonparametric_profile(series: &LevelSeries) -> Result<NonParametricProfile> {
    if series.len() < MIN_PROFILE_LENGTH {
        return Err(Error::SeriesTooShort {
            needed: MIN_PROFILE_LENGTH,
            got: series.len(),
        });
    }
    let inc = difference(series)?;
    let stats = describe(inc.values())?;
    let pi_np = if stats.sd == 0.0 {
        None
    } else {
        Some(acf(inc.values(), 1)?.at(1))
    };
    Ok(NonParametricProfile {
        g_np: stats.mean,
        sigma_np: stats.sd,
        pi_np,
    })
}

/// Full single-unit pipeline: differencing, unit-root screening, order
/// selection, the four properties, Ljung–Box on the increments and the
/// classification.
pub fn profile(series: &LevelSeries, config: &AnalysisConfig) -> Result<ResilienceProfile> {
    config.validate()?;
    let n = series.len();
    if n < MIN_PROFILE_LENGTH {
        return Err(Error::SeriesTooShort {
            needed: MIN_PROFILE_LENGTH,
            got: n,
        });
    }
    let increments = difference(series)?;
    if describe(increments.values())?.sd == 0.0 {
        return Err(Error::DegenerateSeries);
    }
    let nonparametric = nonparametric_profile(series)?;

    let mut warnings = Vec::new();
    let adf_levels = if n >= ADF_MIN_LENGTH {
        Some(adf_test_with(
            series.values(),
            RegressionKind::ConstantTrend,
            LagOrder::Auto,
            config.adf_variant,
        )?)
    } else {
        None
    };
    let adf_increments = if increments.len() >= ADF_MIN_LENGTH {
        Some(adf_test_with(
            increments.values(),
            RegressionKind::Constant,
            LagOrder::Auto,
            config.adf_variant,
        )?)
    } else {
        None
    };
    if adf_levels.is_none() || adf_increments.is_none() {
        warnings.push(ProfileWarning::AdfSkipped);
    }
    if adf_increments.is_some_and(|r| !r.decisions.reject_10pct) {
        warnings.push(ProfileWarning::NonStationaryIncrements);
    }

    let fit = select_order_with(&increments, config.max_p, config.max_q, config.aic_variant)?.best;
    warnings.extend(fit.warnings.iter().map(|w| ProfileWarning::Fit(*w)));

    let level = describe(series.values())?.mean;
    let g = fit.params.g;
    let sigma = fit.params.sigma;
    let rho = relative_volatility(g, sigma)?;
    let pi = persistence(&fit);
    let category = trend_category(g, fit.se_g, config.alpha_trend);

    let lags = config
        .ljung_box_lags
        .unwrap_or_else(|| default_ljung_box_lags(increments.len()));
    let lb = ljung_box(increments.values(), lags)?;

    let classification = classify_parts(
        trend_not_deteriorating(config.trend_rule, category, g),
        pi,
        rho,
    );

    Ok(ResilienceProfile {
        unit_id: series.unit_id().to_string(),
        n_levels: n,
        level,
        trend_g: g,
        se_g: fit.se_g,
        trend_category: category,
        trend_rule: config.trend_rule,
        sigma,
        rho,
        pi,
        persistence_category: PersistenceCategory::of(pi),
        residual_stats: fit.residual_stats,
        fit,
        ljung_box: lb,
        adf_levels,
        adf_increments,
        nonparametric,
        classification,
        warnings,
    })
}
