//! Augmented Dickey–Fuller unit-root test and Ljung–Box portmanteau test.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_ur;

use crate::error::{Error, Result};
use crate::linalg::least_squares;
use crate::ts::acf;

pub const ADF_MIN_LENGTH: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegressionKind {
    Constant,
    ConstantTrend,
}

/// Which statistic the test reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum AdfVariant {
    /// t-ratio on the lagged level.
    #[default]
    Tau,
    /// Joint F on the lagged level and the highest deterministic term
    /// (Φ1 with a constant, Φ3 with constant and trend).
    JointF,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LagOrder {
    /// AIC over `0..=⌊(n − 1)^(1/3)⌋`.
    Auto,
    Fixed(usize),
}

/// Reject / fail-to-reject at the 1 %, 5 % and 10 % levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdfDecisions {
    pub reject_1pct: bool,
    pub reject_5pct: bool,
    pub reject_10pct: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdfResult {
    pub statistic: f64,
    pub lags_used: usize,
    pub nobs: usize,
    pub kind: RegressionKind,
    pub variant: AdfVariant,
    /// Critical values at 1 %, 5 %, 10 %.
    pub critical_values: [f64; 3],
    pub decisions: AdfDecisions,
}

// MacKinnon (2010) response surfaces, one variable: cv(T) = b0 + b1/T + b2/T² + b3/T³.
// Rows are 1 %, 5 %, 10 %.
const TAU_C: [[f64; 4]; 3] = [
    [-3.43035, -6.5393, -16.786, -79.433],
    [-2.86154, -2.8903, -4.234, -40.040],
    [-2.56677, -1.5384, -2.809, 0.0],
];
const TAU_CT: [[f64; 4]; 3] = [
    [-3.95877, -9.0531, -28.428, -134.155],
    [-3.41049, -4.3904, -9.036, -45.374],
    [-3.12705, -2.5856, -3.925, -22.380],
];

// Dickey–Fuller (1981) tables for Φ1 and Φ3, columns 1 %, 5 %, 10 %.
const PHI_SIZES: [f64; 6] = [25.0, 50.0, 100.0, 250.0, 500.0, f64::INFINITY];
const PHI1: [[f64; 3]; 6] = [
    [7.88, 5.18, 4.12],
    [7.06, 4.86, 3.94],
    [6.70, 4.71, 3.86],
    [6.52, 4.63, 3.81],
    [6.47, 4.61, 3.79],
    [6.43, 4.59, 3.78],
];
const PHI3: [[f64; 3]; 6] = [
    [10.61, 7.24, 5.91],
    [9.31, 6.73, 5.61],
    [8.73, 6.49, 5.47],
    [8.43, 6.34, 5.39],
    [8.34, 6.30, 5.36],
    [8.27, 6.25, 5.34],
];

fn tau_critical_values(kind: RegressionKind, nobs: usize) -> [f64; 3] {
    let table = match kind {
        RegressionKind::Constant => &TAU_C,
        RegressionKind::ConstantTrend => &TAU_CT,
    };
    let inv = 1.0 / nobs as f64;
    table.map(|b| b[0] + b[1] * inv + b[2] * inv * inv + b[3] * inv * inv * inv)
}

/// Linear interpolation in `1/T` between tabulated sample sizes.
fn phi_critical_values(kind: RegressionKind, nobs: usize) -> [f64; 3] {
    let table = match kind {
        RegressionKind::Constant => &PHI1,
        RegressionKind::ConstantTrend => &PHI3,
    };
    let x = 1.0 / nobs as f64;
    let inv = PHI_SIZES.map(|s| 1.0 / s);
    if x >= inv[0] {
        return table[0];
    }
    let i = (1..inv.len()).find(|&i| x >= inv[i]).unwrap_or(inv.len() - 1);
    let w = (x - inv[i]) / (inv[i - 1] - inv[i]);
    [0, 1, 2].map(|c| table[i][c] + w * (table[i - 1][c] - table[i][c]))
}

struct AdfRegression {
    statistic_tau: f64,
    ssr: f64,
    nobs: usize,
    n_regressors: usize,
    aic: f64,
    /// Design and response, kept for the restricted joint-F regression.
    x: DMatrix<f64>,
    y: DVector<f64>,
}

/// Regression of `Δx_t` on `[1, (t), x_{t−1}, Δx_{t−1..t−lags}]` using rows
/// from `first_row` on (indices into the differenced series).
fn adf_regression(
    levels: &[f64],
    kind: RegressionKind,
    lags: usize,
    first_row: usize,
) -> Result<AdfRegression> {
    let diffs: Vec<f64> = levels.windows(2).map(|w| w[1] - w[0]).collect();
    let rows: Vec<usize> = (first_row.max(lags)..diffs.len()).collect();
    let deterministic = match kind {
        RegressionKind::Constant => 1,
        RegressionKind::ConstantTrend => 2,
    };
    let k = deterministic + 1 + lags;
    let nobs = rows.len();
    if nobs <= k {
        return Err(Error::SeriesTooShort {
            needed: levels.len() + k + 1 - nobs,
            got: levels.len(),
        });
    }
    let mut x = DMatrix::<f64>::zeros(nobs, k);
    let mut y = DVector::<f64>::zeros(nobs);
    for (r, &t) in rows.iter().enumerate() {
        y[r] = diffs[t];
        x[(r, 0)] = 1.0;
        if deterministic == 2 {
            x[(r, 1)] = (t + 1) as f64;
        }
        x[(r, deterministic)] = levels[t];
        for i in 1..=lags {
            x[(r, deterministic + i)] = diffs[t - i];
        }
    }
    let fit = least_squares(&x, &y).ok_or(Error::SingularRegression)?;
    let dof = (nobs - k) as f64;
    let s2 = fit.ssr / dof;
    let se = (s2 * fit.xtx_inv[(deterministic, deterministic)]).sqrt();
    let nf = nobs as f64;
    Ok(AdfRegression {
        statistic_tau: fit.coef[deterministic] / se,
        ssr: fit.ssr,
        nobs,
        n_regressors: k,
        aic: nf * (fit.ssr / nf).ln() + 2.0 * k as f64,
        x,
        y,
    })
}

fn joint_f(reg: &AdfRegression, kind: RegressionKind) -> Result<f64> {
    // Drop the lagged level and the highest deterministic term.
    let drop: &[usize] = match kind {
        RegressionKind::Constant => &[0, 1],
        RegressionKind::ConstantTrend => &[1, 2],
    };
    let keep: Vec<usize> = (0..reg.n_regressors).filter(|c| !drop.contains(c)).collect();
    let ssr_restricted = if keep.is_empty() {
        reg.y.norm_squared()
    } else {
        let xr = reg.x.select_columns(&keep);
        least_squares(&xr, &reg.y)
            .ok_or(Error::SingularRegression)?
            .ssr
    };
    let dof = (reg.nobs - reg.n_regressors) as f64;
    Ok(((ssr_restricted - reg.ssr) / 2.0) / (reg.ssr / dof))
}

/// Maximum lag searched by [`LagOrder::Auto`].
pub fn auto_max_lag(n: usize) -> usize {
    ((n.saturating_sub(1)) as f64).cbrt().floor() as usize
}

/// Augmented Dickey–Fuller test reporting the tau statistic.
pub fn adf_test(series: &[f64], kind: RegressionKind, lags: LagOrder) -> Result<AdfResult> {
    adf_test_with(series, kind, lags, AdfVariant::Tau)
}

pub fn adf_test_with(
    series: &[f64],
    kind: RegressionKind,
    lags: LagOrder,
    variant: AdfVariant,
) -> Result<AdfResult> {
    let n = series.len();
    if n < ADF_MIN_LENGTH {
        return Err(Error::SeriesTooShort {
            needed: ADF_MIN_LENGTH,
            got: n,
        });
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite value in ADF input".into()));
    }
    let lags_used = match lags {
        LagOrder::Fixed(l) => l,
        LagOrder::Auto => {
            let max_lag = auto_max_lag(n);
            let mut best: Option<(usize, f64)> = None;
            for l in 0..=max_lag {
                let reg = adf_regression(series, kind, l, max_lag)?;
                if best.is_none_or(|(_, a)| reg.aic < a) {
                    best = Some((l, reg.aic));
                }
            }
            best.map(|(l, _)| l).unwrap_or(0)
        }
    };
    let reg = adf_regression(series, kind, lags_used, 0)?;
    let (statistic, critical_values, decisions) = match variant {
        AdfVariant::Tau => {
            let cv = tau_critical_values(kind, reg.nobs);
            let d = AdfDecisions {
                reject_1pct: reg.statistic_tau < cv[0],
                reject_5pct: reg.statistic_tau < cv[1],
                reject_10pct: reg.statistic_tau < cv[2],
            };
            (reg.statistic_tau, cv, d)
        }
        AdfVariant::JointF => {
            let f = joint_f(&reg, kind)?;
            let cv = phi_critical_values(kind, reg.nobs);
            let d = AdfDecisions {
                reject_1pct: f > cv[0],
                reject_5pct: f > cv[1],
                reject_10pct: f > cv[2],
            };
            (f, cv, d)
        }
    };
    if !statistic.is_finite() {
        return Err(Error::SingularRegression);
    }
    Ok(AdfResult {
        statistic,
        lags_used,
        nobs: reg.nobs,
        kind,
        variant,
        critical_values,
        decisions,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LjungBoxResult {
    pub q_statistic: f64,
    pub lags: usize,
    /// Degrees of freedom of the reference chi-square.
    pub df: usize,
    pub p_value: f64,
}

impl LjungBoxResult {
    pub fn stars(&self) -> &'static str {
        significance_stars(self.p_value)
    }
}

/// `min(10, n / 5)`, at least 1.
pub fn default_ljung_box_lags(n: usize) -> usize {
    (n / 5).clamp(1, 10)
}

/// Ljung–Box test on raw data, chi-square with `lags` degrees of freedom.
pub fn ljung_box(values: &[f64], lags: usize) -> Result<LjungBoxResult> {
    ljung_box_with_df(values, lags, 0)
}

/// Ljung–Box test on the residuals of a model with `fitted` ARMA coefficients;
/// degrees of freedom are `max(1, lags − fitted)`.
pub fn ljung_box_with_df(values: &[f64], lags: usize, fitted: usize) -> Result<LjungBoxResult> {
    let n = values.len();
    if lags == 0 || n <= lags + 1 {
        return Err(Error::LagTooLarge { lag: lags, n });
    }
    let r = acf(values, lags)?;
    let nf = n as f64;
    let q = nf
        * (nf + 2.0)
        * (1..=lags)
            .map(|s| r.at(s).powi(2) / (nf - s as f64))
            .sum::<f64>();
    let df = lags.saturating_sub(fitted).max(1);
    Ok(LjungBoxResult {
        q_statistic: q,
        lags,
        df,
        p_value: chi_square_sf(q, df)?,
    })
}

/// Upper tail of the chi-square distribution.
pub fn chi_square_sf(x: f64, df: usize) -> Result<f64> {
    if df == 0 {
        return Err(Error::InvalidInput("chi-square needs df >= 1".into()));
    }
    if x.is_nan() || x < 0.0 {
        return Err(Error::InvalidInput(format!("chi-square argument {x} is negative")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok(gamma_ur(df as f64 / 2.0, x / 2.0).clamp(0.0, 1.0))
}

/// `***` p < 0.01, `**` p < 0.05, `*` p < 0.1.
pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.1 {
        "*"
    } else {
        ""
    }
}
