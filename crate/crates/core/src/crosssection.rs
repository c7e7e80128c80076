//! Panel-wide analyses: rankings, yearly cross-sectional moments, the Spearman
//! matrix of the four properties and heteroskedasticity-robust regressions.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::diagnostics::significance_stars;
use crate::error::{Error, Result};
use crate::linalg::least_squares;
use crate::resilience::ResilienceProfile;
use crate::ts::{average_ranks, describe, pearson, DescriptiveStats, LevelSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Property {
    Level,
    Trend,
    Rho,
    Pi,
}

impl Property {
    pub const ALL: [Property; 4] = [Property::Level, Property::Trend, Property::Rho, Property::Pi];

    pub fn value(&self, profile: &ResilienceProfile) -> f64 {
        match self {
            Property::Level => profile.level,
            Property::Trend => profile.trend_g,
            Property::Rho => profile.rho,
            Property::Pi => profile.pi,
        }
    }

    /// Best-first ordering: decreasing level and trend, increasing relative
    /// volatility and persistence.
    pub fn default_direction(&self) -> Direction {
        match self {
            Property::Level | Property::Trend => Direction::Descending,
            Property::Rho | Property::Pi => Direction::Ascending,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Property::Level => "level",
            Property::Trend => "trend",
            Property::Rho => "rho",
            Property::Pi => "pi",
        }
    }
}

impl std::str::FromStr for Property {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "level" => Ok(Property::Level),
            "trend" | "g" => Ok(Property::Trend),
            "rho" => Ok(Property::Rho),
            "pi" => Ok(Property::Pi),
            other => Err(Error::InvalidInput(format!("unknown property '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Ascending,
    Descending,
}

/// One profile per unit plus optional real-valued covariates per unit.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct PanelTable {
    rows: Vec<ResilienceProfile>,
    covariates: BTreeMap<String, BTreeMap<String, f64>>,
}

impl PanelTable {
    pub fn new(rows: Vec<ResilienceProfile>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for r in &rows {
            if !seen.insert(r.unit_id.as_str()) {
                return Err(Error::InvalidInput(format!("duplicate unit '{}'", r.unit_id)));
            }
        }
        Ok(Self {
            rows,
            covariates: BTreeMap::new(),
        })
    }

    pub fn with_covariates(mut self, covariates: BTreeMap<String, BTreeMap<String, f64>>) -> Self {
        self.covariates = covariates;
        self
    }

    pub fn rows(&self) -> &[ResilienceProfile] {
        &self.rows
    }

    pub fn covariate(&self, unit: &str, name: &str) -> Option<f64> {
        self.covariates.get(unit)?.get(name).copied()
    }

    /// Every covariate name present for at least one unit.
    pub fn covariate_names(&self) -> Vec<String> {
        let names: BTreeSet<&String> = self.covariates.values().flat_map(|m| m.keys()).collect();
        names.into_iter().cloned().collect()
    }

    /// Keeps only the units accepted by `keep`.
    pub fn filter(&self, keep: impl Fn(&str) -> bool) -> Self {
        Self {
            rows: self.rows.iter().filter(|r| keep(&r.unit_id)).cloned().collect(),
            covariates: self.covariates.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    /// 1-based position in the complete ordering.
    pub position: usize,
    pub unit_id: String,
    pub value: f64,
    /// Ljung–Box stars, persistence rankings only.
    pub stars: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub property: Property,
    pub direction: Direction,
    pub entries: Vec<RankEntry>,
    /// Units left out because the property is not finite (`ρ = +inf`).
    pub excluded: usize,
}

/// Orders the panel by `property`. With `top_k`, keeps the first `top_k`
/// entries, or the first and last `top_k` when `both_ends` is set. Ties are
/// broken by unit id.
pub fn rank(
    panel: &PanelTable,
    property: Property,
    direction: Direction,
    top_k: Option<usize>,
    both_ends: bool,
) -> Result<Ranking> {
    if panel.is_empty() {
        return Err(Error::EmptyPanel);
    }
    let mut items: Vec<(&ResilienceProfile, f64)> = panel
        .rows
        .iter()
        .map(|r| (r, property.value(r)))
        .filter(|(_, v)| v.is_finite())
        .collect();
    let excluded = panel.len() - items.len();
    items.sort_by(|(a, va), (b, vb)| {
        let ord = match direction {
            Direction::Ascending => va.total_cmp(vb),
            Direction::Descending => vb.total_cmp(va),
        };
        ord.then_with(|| a.unit_id.cmp(&b.unit_id))
    });
    let all: Vec<RankEntry> = items
        .into_iter()
        .enumerate()
        .map(|(i, (r, v))| RankEntry {
            position: i + 1,
            unit_id: r.unit_id.clone(),
            value: v,
            stars: (property == Property::Pi).then(|| r.ljung_box.stars().to_string()),
        })
        .collect();
    let entries = match top_k {
        None => all,
        Some(k) if both_ends && 2 * k < all.len() => {
            let tail = all.len() - k;
            all.iter()
                .take(k)
                .chain(all.iter().skip(tail))
                .cloned()
                .collect()
        }
        Some(_) if both_ends => all,
        Some(k) => all.into_iter().take(k).collect(),
    };
    Ok(Ranking {
        property,
        direction,
        entries,
        excluded,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CovarianceKind {
    /// Huber–White sandwich without small-sample correction.
    #[default]
    Hc0,
    /// HC0 scaled by `n / (n − k)`.
    Hc1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsResult {
    /// `"intercept"` followed by the regressor names.
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    /// Robust standard errors of the chosen [`CovarianceKind`].
    pub robust_se: Vec<f64>,
    /// Homoskedastic standard errors, for comparison.
    pub classical_se: Vec<f64>,
    pub r_squared: f64,
    pub n_used: usize,
    pub covariance: CovarianceKind,
}

impl OlsResult {
    pub fn t_stat(&self, i: usize) -> f64 {
        self.coefficients[i] / self.robust_se[i]
    }

    /// Two-sided p-value from Student's t with `n − k` degrees of freedom.
    pub fn p_value(&self, i: usize) -> f64 {
        let dof = (self.n_used - self.coefficients.len()) as f64;
        let t = self.t_stat(i);
        if !t.is_finite() {
            return if t.is_nan() { f64::NAN } else { 0.0 };
        }
        let dist = StudentsT::new(0.0, 1.0, dof).expect("positive degrees of freedom");
        (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0)
    }

    pub fn stars(&self, i: usize) -> &'static str {
        significance_stars(self.p_value(i))
    }
}

/// OLS with an intercept and HC0 (Huber–White) standard errors.
/// `x` holds one row of regressors per observation; rows with any non-finite
/// entry (or non-finite `y`) are dropped.
pub fn ols_hc0(y: &[f64], x: &[Vec<f64>]) -> Result<OlsResult> {
    ols_robust(y, x, None, CovarianceKind::Hc0)
}

pub fn ols_robust(
    y: &[f64],
    x: &[Vec<f64>],
    names: Option<&[String]>,
    kind: CovarianceKind,
) -> Result<OlsResult> {
    if y.len() != x.len() {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: x.len(),
        });
    }
    let m = x.first().map_or(0, |r| r.len());
    if x.iter().any(|r| r.len() != m) {
        return Err(Error::InvalidInput("ragged regressor rows".into()));
    }
    let rows: Vec<usize> = (0..y.len())
        .filter(|&i| y[i].is_finite() && x[i].iter().all(|v| v.is_finite()))
        .collect();
    let n = rows.len();
    if n <= m + 1 {
        return Err(Error::InsufficientData {
            needed: m + 1,
            got: n,
        });
    }
    let k = m + 1;
    let design = DMatrix::from_fn(n, k, |r, c| if c == 0 { 1.0 } else { x[rows[r]][c - 1] });
    let response = DVector::from_iterator(n, rows.iter().map(|&i| y[i]));
    let fit = least_squares(&design, &response).ok_or(Error::RankDeficient)?;

    // (X'X)^-1 X' diag(e²) X (X'X)^-1
    let mut meat = DMatrix::<f64>::zeros(k, k);
    for r in 0..n {
        let row = design.row(r);
        let e2 = fit.residuals[r] * fit.residuals[r];
        meat += row.transpose() * row * e2;
    }
    let mut cov = &fit.xtx_inv * meat * &fit.xtx_inv;
    if kind == CovarianceKind::Hc1 {
        cov *= n as f64 / (n - k) as f64;
    }
    let s2 = fit.ssr / (n - k) as f64;

    let mean = response.mean();
    let sst: f64 = response.iter().map(|v| (v - mean).powi(2)).sum();
    let r_squared = if sst == 0.0 {
        1.0
    } else {
        (1.0 - fit.ssr / sst).clamp(0.0, 1.0)
    };

    let mut all_names = vec!["intercept".to_string()];
    match names {
        Some(ns) => all_names.extend(ns.iter().cloned()),
        None => all_names.extend((1..=m).map(|i| format!("x{i}"))),
    }

    Ok(OlsResult {
        names: all_names,
        coefficients: fit.coef.iter().copied().collect(),
        robust_se: (0..k).map(|i| cov[(i, i)].max(0.0).sqrt()).collect(),
        classical_se: (0..k).map(|i| (s2 * fit.xtx_inv[(i, i)]).sqrt()).collect(),
        r_squared,
        n_used: n,
        covariance: kind,
    })
}

/// Regresses one property on the named covariates across the panel.
pub fn regress(
    panel: &PanelTable,
    dependent: Property,
    regressors: &[String],
    kind: CovarianceKind,
) -> Result<OlsResult> {
    if panel.is_empty() {
        return Err(Error::EmptyPanel);
    }
    let y: Vec<f64> = panel.rows.iter().map(|r| dependent.value(r)).collect();
    let x: Vec<Vec<f64>> = panel
        .rows
        .iter()
        .map(|r| {
            regressors
                .iter()
                .map(|name| panel.covariate(&r.unit_id, name).unwrap_or(f64::NAN))
                .collect()
        })
        .collect();
    ols_robust(&y, &x, Some(regressors), kind)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearStats {
    pub year: i64,
    pub stats: DescriptiveStats,
}

/// Cross-sectional moments of the levels for each year in `years`
/// (inclusive; defaults to the span of the data).
pub fn yearly_stats(levels: &[LevelSeries], years: Option<(i64, i64)>) -> Result<Vec<YearStats>> {
    let (from, to) = match years {
        Some(r) => r,
        None => {
            let from = levels.iter().filter_map(|s| s.times().first()).min();
            let to = levels.iter().filter_map(|s| s.times().last()).max();
            match (from, to) {
                (Some(&a), Some(&b)) => (a, b),
                _ => return Err(Error::EmptyPanel),
            }
        }
    };
    if from > to {
        return Err(Error::InvalidInput(format!("empty year range {from}..{to}")));
    }
    (from..=to)
        .map(|year| {
            let values: Vec<f64> = levels.iter().filter_map(|s| s.value_at(year)).collect();
            if values.is_empty() {
                return Err(Error::EmptyYear(year));
            }
            Ok(YearStats {
                year,
                stats: describe(&values)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyMatrix {
    pub properties: [Property; 4],
    pub coefficients: [[f64; 4]; 4],
    /// Permutation p-values; `None` on the diagonal.
    pub p_values: [[Option<f64>; 4]; 4],
    pub n_used: usize,
    /// Units dropped because a property was not finite.
    pub n_excluded: usize,
    pub permutations: usize,
}

pub const DEFAULT_PERMUTATIONS: usize = 1000;

/// Two-sided permutation p-value for a Spearman coefficient, with the
/// `(count + 1) / (B + 1)` convention.
pub fn spearman_permutation_test(
    x: &[f64],
    y: &[f64],
    permutations: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(f64, f64)> {
    let r = crate::ts::spearman(x, y)?;
    let rx = average_ranks(x);
    let mut ry = average_ranks(y);
    let threshold = r.abs() - 1e-12;
    let mut hits = 0usize;
    for _ in 0..permutations {
        ry.shuffle(rng);
        if pearson(&rx, &ry).abs() >= threshold {
            hits += 1;
        }
    }
    Ok((r, (hits + 1) as f64 / (permutations + 1) as f64))
}

/// Pairwise Spearman coefficients over level, trend, ρ and π with seeded
/// permutation p-values. Each pair draws from its own stream of `seed`.
pub fn property_matrix(panel: &PanelTable, permutations: usize, seed: u64) -> Result<PropertyMatrix> {
    let usable: Vec<[f64; 4]> = panel
        .rows
        .iter()
        .map(|r| Property::ALL.map(|p| p.value(r)))
        .filter(|v| v.iter().all(|x| x.is_finite()))
        .collect();
    let n_excluded = panel.len() - usable.len();
    if usable.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: usable.len(),
        });
    }
    let columns: Vec<Vec<f64>> = (0..4).map(|c| usable.iter().map(|v| v[c]).collect()).collect();
    let mut coefficients = [[1.0; 4]; 4];
    let mut p_values = [[None; 4]; 4];
    let mut stream = 0u64;
    for i in 0..4 {
        for j in (i + 1)..4 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            stream += 1;
            let (r, p) = spearman_permutation_test(&columns[i], &columns[j], permutations, &mut rng)?;
            coefficients[i][j] = r;
            coefficients[j][i] = r;
            p_values[i][j] = Some(p);
            p_values[j][i] = Some(p);
        }
    }
    Ok(PropertyMatrix {
        properties: Property::ALL,
        coefficients,
        p_values,
        n_used: usable.len(),
        n_excluded,
        permutations,
    })
}
