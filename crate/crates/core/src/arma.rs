//! ARMA(p, q) model of increments:
//!
//! ```text
//! Δ_t = g + Σ β_i (Δ_{t−i} − g) + Σ θ_j ε_{t−j} + ε_t
//! ```
//!
//! Estimation is conditional maximum likelihood (conditional sum of squares)
//! with pre-sample excess increments and shocks set to zero. Coefficients are
//! searched in an unconstrained space mapped through partial autocorrelations,
//! so every candidate is stationary (AR) and invertible up to the unit circle
//! (MA). Orders are chosen by AIC over a small grid.

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::ts::{describe, DescriptiveStats, IncrementSeries};

/// MA configurations whose smallest root modulus is within this distance of 1
/// are kept and flagged.
pub const MA_BOUNDARY_TOL: f64 = 1e-6;

/// Below this many increments a fit carries a short-series warning.
pub const RECOMMENDED_MIN_LENGTH: usize = 50;

/// Absolute minimum number of increments for any fit.
pub const MIN_FIT_LENGTH: usize = 10;

/// Order selection discards mixed fits in which some AR root and some MA root
/// lie within this relative distance of each other: the factors nearly
/// cancel, so the extra parameters only chase sampling noise.
pub const COMMON_FACTOR_TOL: f64 = 0.2;

const MAX_RESTARTS: usize = 5;
const AR_PARTIAL_LIMIT: f64 = 1.0 - 1e-9;
const MEAN_STEP: f64 = 0.1;
const COEF_STEP: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ArmaSpec {
    pub p: usize,
    pub q: usize,
}

impl ArmaSpec {
    pub const fn new(p: usize, q: usize) -> Self {
        Self { p, q }
    }

    /// Parameters counted by the information criterion: `p + q` coefficients,
    /// the trend `g` and the shock scale `σ`.
    pub fn n_params(&self) -> usize {
        self.p + self.q + 2
    }

    pub fn is_white_noise(&self) -> bool {
        self.p == 0 && self.q == 0
    }
}

impl std::fmt::Display for ArmaSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ARMA({},{})", self.p, self.q)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmaParams {
    /// Mean increment.
    pub g: f64,
    pub betas: Vec<f64>,
    pub thetas: Vec<f64>,
    /// Shock standard deviation.
    pub sigma: f64,
}

impl ArmaParams {
    pub fn new(g: f64, betas: Vec<f64>, thetas: Vec<f64>, sigma: f64) -> Self {
        Self {
            g,
            betas,
            thetas,
            sigma,
        }
    }

    pub fn spec(&self) -> ArmaSpec {
        ArmaSpec::new(self.betas.len(), self.thetas.len())
    }

    /// Sum of all AR and MA coefficients.
    pub fn persistence(&self) -> f64 {
        self.betas.iter().sum::<f64>() + self.thetas.iter().sum::<f64>()
    }

    /// Checks the orders against `spec`, finiteness, `σ > 0`, AR stationarity
    /// and MA invertibility (up to [`MA_BOUNDARY_TOL`]).
    pub fn validate(&self, spec: ArmaSpec) -> Result<()> {
        if self.spec() != spec {
            return Err(Error::InvalidParams(format!(
                "expected {spec}, got {} AR and {} MA coefficients",
                self.betas.len(),
                self.thetas.len()
            )));
        }
        if !self.g.is_finite()
            || self.betas.iter().chain(&self.thetas).any(|c| !c.is_finite())
        {
            return Err(Error::InvalidParams("non-finite coefficient".into()));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        let ar_poly: Vec<f64> = self.betas.iter().map(|b| -b).collect();
        if min_root_modulus(&ar_poly) <= 1.0 {
            return Err(Error::InvalidParams("AR polynomial is not stationary".into()));
        }
        if min_root_modulus(&self.thetas) < 1.0 - MA_BOUNDARY_TOL {
            return Err(Error::InvalidParams("MA polynomial is not invertible".into()));
        }
        Ok(())
    }

    /// True when the MA polynomial has a root within [`MA_BOUNDARY_TOL`] of the unit circle.
    pub fn ma_on_boundary(&self) -> bool {
        min_root_modulus(&self.thetas) <= 1.0 + MA_BOUNDARY_TOL
    }

    /// Smallest distance between an AR root and an MA root, relative to the
    /// smaller modulus of the pair; infinite unless both parts are present.
    pub fn common_factor_distance(&self) -> f64 {
        let ar_poly: Vec<f64> = self.betas.iter().map(|b| -b).collect();
        let ar = polynomial_roots(&ar_poly);
        let ma = polynomial_roots(&self.thetas);
        let mut best = f64::INFINITY;
        for a in &ar {
            for m in &ma {
                best = best.min((a - m).norm() / a.norm().min(m.norm()));
            }
        }
        best
    }
}

/// Roots of `1 + c_1 z + ... + c_k z^k`, trailing zero coefficients ignored.
pub fn polynomial_roots(coefs: &[f64]) -> Vec<Complex<f64>> {
    let k = coefs.iter().rposition(|c| *c != 0.0).map_or(0, |i| i + 1);
    if k == 0 {
        return Vec::new();
    }
    if k == 1 {
        return vec![Complex::new(-1.0 / coefs[0], 0.0)];
    }
    // Reciprocal roots are the eigenvalues of the companion matrix of
    // x^k + c_1 x^(k-1) + ... + c_k.
    let mut companion = DMatrix::<f64>::zeros(k, k);
    for j in 0..k {
        companion[(0, j)] = -coefs[j];
    }
    for i in 1..k {
        companion[(i, i - 1)] = 1.0;
    }
    companion
        .complex_eigenvalues()
        .iter()
        .map(|z| Complex::new(1.0, 0.0) / z)
        .collect()
}

/// Smallest root modulus of `1 + c_1 z + ... + c_k z^k`; infinite for a constant polynomial.
pub fn min_root_modulus(coefs: &[f64]) -> f64 {
    polynomial_roots(coefs)
        .iter()
        .map(|z| z.norm())
        .fold(f64::INFINITY, f64::min)
}

/// Maps partial autocorrelations in (−1, 1) to the coefficients `φ` of a
/// stationary polynomial `1 − Σ φ_i z^i` (Durbin–Levinson recursion).
pub fn partials_to_coefficients(partials: &[f64]) -> Vec<f64> {
    let mut phi: Vec<f64> = Vec::with_capacity(partials.len());
    for (k, &r) in partials.iter().enumerate() {
        let prev = phi.clone();
        for j in 0..k {
            phi[j] = prev[j] - r * prev[k - 1 - j];
        }
        phi.push(r);
    }
    phi
}

fn ar_from_free(free: &[f64]) -> Vec<f64> {
    let partials: Vec<f64> = free
        .iter()
        .map(|x| x.tanh().clamp(-AR_PARTIAL_LIMIT, AR_PARTIAL_LIMIT))
        .collect();
    partials_to_coefficients(&partials)
}

/// `1 + Σ θ_j z^j = 1 − Σ (−θ_j) z^j`. `tanh` may saturate at ±1, which is
/// how the deterministic-trend boundary `θ_1 = −1` is reached.
fn ma_from_free(free: &[f64]) -> Vec<f64> {
    let partials: Vec<f64> = free.iter().map(|x| x.tanh()).collect();
    partials_to_coefficients(&partials)
        .into_iter()
        .map(|c| -c)
        .collect()
}

/// Conditional residuals of the recursion, written into `out`. Returns the
/// sum of squares.
fn css_residuals_into(
    data: &[f64],
    g: f64,
    betas: &[f64],
    thetas: &[f64],
    out: &mut Vec<f64>,
) -> f64 {
    out.clear();
    let mut ssr = 0.0;
    for t in 0..data.len() {
        let mut e = data[t] - g;
        for (i, b) in betas.iter().enumerate() {
            if t > i {
                e -= b * (data[t - i - 1] - g);
            }
        }
        for (j, th) in thetas.iter().enumerate() {
            if t > j {
                e -= th * out[t - j - 1];
            }
        }
        ssr += e * e;
        out.push(e);
    }
    ssr
}

/// Conditional residuals `ε̂_t` for `params` on `data`.
pub fn residuals(params: &ArmaParams, data: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(data.len());
    css_residuals_into(data, params.g, &params.betas, &params.thetas, &mut out);
    out
}

fn gaussian_loglik(n: usize, ssr: f64, sigma: f64) -> f64 {
    let n = n as f64;
    -0.5 * n * (2.0 * PI * sigma * sigma).ln() - ssr / (2.0 * sigma * sigma)
}

/// Conditional Gaussian log-likelihood of `increments` under `params`.
pub fn loglik(params: &ArmaParams, spec: ArmaSpec, increments: &IncrementSeries) -> Result<f64> {
    if params.spec() != spec {
        return Err(Error::InvalidParams(format!(
            "parameters do not match {spec}"
        )));
    }
    let needed = spec.p + spec.q + 2;
    if increments.len() < needed {
        return Err(Error::SeriesTooShort {
            needed,
            got: increments.len(),
        });
    }
    if params.sigma.is_nan() || params.sigma <= 0.0 {
        return Err(Error::InvalidSigma(params.sigma));
    }
    let e = residuals(params, increments.values());
    let ssr: f64 = e.iter().map(|x| x * x).sum();
    Ok(gaussian_loglik(e.len(), ssr, params.sigma))
}

/// Draws `n` increments from the model. Pre-sample increments equal `g`,
/// pre-sample shocks are zero and the first `max(100, 10 (p + q))` draws are
/// discarded.
pub fn simulate(params: &ArmaParams, spec: ArmaSpec, n: usize, seed: u64) -> Result<IncrementSeries> {
    params.validate(spec)?;
    if n == 0 {
        return Err(Error::InvalidInput("simulation length must be at least 1".into()));
    }
    let burn_in = 100.max(10 * (spec.p + spec.q));
    let total = burn_in + n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut excess = vec![0.0; total];
    let mut shocks = vec![0.0; total];
    for t in 0..total {
        let z: f64 = StandardNormal.sample(&mut rng);
        let e = params.sigma * z;
        let mut x = e;
        for (i, b) in params.betas.iter().enumerate() {
            if t > i {
                x += b * excess[t - i - 1];
            }
        }
        for (j, th) in params.thetas.iter().enumerate() {
            if t > j {
                x += th * shocks[t - j - 1];
            }
        }
        excess[t] = x;
        shocks[t] = e;
    }
    let values = excess[burn_in..].iter().map(|x| params.g + x).collect();
    IncrementSeries::from_values("simulated", values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitWarning {
    /// Fewer than [`RECOMMENDED_MIN_LENGTH`] increments.
    ShortSeries,
    /// MA polynomial has a root on (or within tolerance of) the unit circle.
    MaBoundary,
    /// Observed information was not positive definite; `se_g` is `sd(Δ)/√n`.
    StandardErrorFallback,
}

impl FitWarning {
    pub fn as_str(&self) -> &'static str {
        match self {
            FitWarning::ShortSeries => "short-series",
            FitWarning::MaBoundary => "boundary-MA",
            FitWarning::StandardErrorFallback => "convergence-fallback",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum AicVariant {
    #[default]
    Aic,
    /// Small-sample corrected AIC.
    Aicc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmaFit {
    pub spec: ArmaSpec,
    pub params: ArmaParams,
    pub loglik: f64,
    /// `2 (p + q + 2) − 2 loglik`
    pub aic: f64,
    pub residuals: Vec<f64>,
    pub se_g: f64,
    pub residual_stats: DescriptiveStats,
    pub warnings: Vec<FitWarning>,
}

impl ArmaFit {
    pub fn n(&self) -> usize {
        self.residuals.len()
    }

    pub fn aicc(&self) -> f64 {
        let k = self.spec.n_params() as f64;
        let n = self.n() as f64;
        if n - k - 1.0 <= 0.0 {
            return f64::INFINITY;
        }
        self.aic + 2.0 * k * (k + 1.0) / (n - k - 1.0)
    }

    pub fn criterion(&self, variant: AicVariant) -> f64 {
        match variant {
            AicVariant::Aic => self.aic,
            AicVariant::Aicc => self.aicc(),
        }
    }

    pub fn persistence(&self) -> f64 {
        if self.spec.is_white_noise() {
            0.0
        } else {
            self.params.persistence()
        }
    }
}

/// Increments standardized to zero mean and unit sample sd. Fitting on this
/// scale makes estimates equivariant under affine changes of the data.
struct Standardized {
    mean: f64,
    scale: f64,
    data: Vec<f64>,
}

fn standardize(values: &[f64]) -> Result<Standardized> {
    let stats = describe(values)?;
    if stats.sd == 0.0 {
        return Err(Error::DegenerateSeries);
    }
    Ok(Standardized {
        mean: stats.mean,
        scale: stats.sd,
        data: values.iter().map(|v| (v - stats.mean) / stats.sd).collect(),
    })
}

fn unpack(x: &[f64], spec: ArmaSpec) -> (f64, Vec<f64>, Vec<f64>) {
    (
        x[0],
        ar_from_free(&x[1..1 + spec.p]),
        ma_from_free(&x[1 + spec.p..1 + spec.p + spec.q]),
    )
}

/// Fits `spec` by conditional maximum likelihood.
pub fn fit(increments: &IncrementSeries, spec: ArmaSpec) -> Result<ArmaFit> {
    let values = increments.values();
    let n = values.len();
    let needed = (spec.p + spec.q + 2).max(MIN_FIT_LENGTH);
    if n < needed {
        return Err(Error::SeriesTooShort { needed, got: n });
    }
    let std = standardize(values)?;

    let (g, betas, thetas) = if spec.is_white_noise() {
        (std.mean, Vec::new(), Vec::new())
    } else {
        let (x, converged, value) = optimize(&std.data, spec);
        let (g_std, betas, thetas) = unpack(&x, spec);
        let g = std.mean + std.scale * g_std;
        if !converged {
            let e = {
                let mut out = Vec::new();
                let ssr = css_residuals_into(values, g, &betas, &thetas, &mut out);
                (ssr / n as f64).sqrt()
            };
            let best = ArmaParams::new(g, betas, thetas, e);
            let loglik = if value.is_finite() {
                gaussian_loglik(n, best.sigma * best.sigma * n as f64, best.sigma)
            } else {
                f64::NEG_INFINITY
            };
            return Err(Error::ConvergenceFailure {
                p: spec.p,
                q: spec.q,
                best: Box::new(best),
                loglik,
            });
        }
        (g, betas, thetas)
    };

    let mut resid = Vec::with_capacity(n);
    let ssr = if spec.is_white_noise() {
        resid.extend(values.iter().map(|v| v - g));
        resid.iter().map(|e| e * e).sum()
    } else {
        css_residuals_into(values, g, &betas, &thetas, &mut resid)
    };
    let sigma = (ssr / n as f64).sqrt();
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(Error::DegenerateSeries);
    }
    let params = ArmaParams::new(g, betas, thetas, sigma);
    let loglik = gaussian_loglik(n, ssr, sigma);
    let aic = 2.0 * spec.n_params() as f64 - 2.0 * loglik;

    let mut warnings = Vec::new();
    if n < RECOMMENDED_MIN_LENGTH {
        warnings.push(FitWarning::ShortSeries);
    }
    if params.ma_on_boundary() {
        warnings.push(FitWarning::MaBoundary);
    }
    let se_g = match standard_error_of_mean(&std, &params) {
        Some(se) => se,
        None => {
            warnings.push(FitWarning::StandardErrorFallback);
            std.scale / (n as f64).sqrt()
        }
    };
    let residual_stats = describe(&resid)?;

    Ok(ArmaFit {
        spec,
        params,
        loglik,
        aic,
        residuals: resid,
        se_g,
        residual_stats,
        warnings,
    })
}

/// Minimizes the concentrated negative log-likelihood `(n/2) ln(SSR/n)` over
/// `(g, free AR, free MA)` on standardized data. Returns the best point, whether
/// any run converged, and its objective value.
fn optimize(data: &[f64], spec: ArmaSpec) -> (Vec<f64>, bool, f64) {
    let dim = 1 + spec.p + spec.q;
    let n = data.len() as f64;
    let mut buf = Vec::with_capacity(data.len());
    let mut objective = |x: &[f64]| {
        let (g, betas, thetas) = unpack(x, spec);
        let ssr = css_residuals_into(data, g, &betas, &thetas, &mut buf);
        0.5 * n * (ssr / n).ln()
    };
    let opts = NelderMeadOptions::default();
    let mut steps = vec![COEF_STEP; dim];
    steps[0] = MEAN_STEP;

    let mut best: Option<(Vec<f64>, f64)> = None;
    for attempt in 0..=MAX_RESTARTS {
        let start: Vec<f64> = (0..dim)
            .map(|i| {
                if attempt == 0 {
                    0.0
                } else {
                    // Deterministic jitter, alternating sign per coordinate.
                    let sign = if (i + attempt) % 2 == 0 { 1.0 } else { -1.0 };
                    sign * 0.3 * attempt as f64 * if i == 0 { MEAN_STEP } else { 1.0 }
                }
            })
            .collect();
        let mut m = nelder_mead(&mut objective, &start, &steps, opts);
        if m.converged {
            // Restart from the optimum until the value stops moving, guarding
            // against a collapsed simplex.
            for _ in 0..MAX_RESTARTS {
                let again = nelder_mead(&mut objective, &m.x, &steps, opts);
                let improved = m.value - again.value;
                if again.value < m.value {
                    m = crate::optim::Minimum {
                        converged: again.converged,
                        ..again
                    };
                }
                if improved < opts.f_tolerance || !m.converged {
                    break;
                }
            }
            if m.converged {
                return (m.x, true, m.value);
            }
        }
        if best.as_ref().is_none_or(|(_, v)| m.value < *v) {
            best = Some((m.x, m.value));
        }
    }
    let (x, v) = best.expect("at least one attempt");
    (x, false, v)
}

/// Standard error of the mean increment from the finite-difference Hessian of
/// the negative log-likelihood in `(g, β, θ, σ)` on the standardized scale.
fn standard_error_of_mean(std: &Standardized, params: &ArmaParams) -> Option<f64> {
    let p = params.betas.len();
    let q = params.thetas.len();
    let dim = p + q + 2;
    let mut point = Vec::with_capacity(dim);
    point.push((params.g - std.mean) / std.scale);
    point.extend_from_slice(&params.betas);
    point.extend_from_slice(&params.thetas);
    point.push(params.sigma / std.scale);

    let mut buf = Vec::with_capacity(std.data.len());
    let mut nll = |x: &[f64]| -> f64 {
        let sigma = x[dim - 1];
        let ssr = css_residuals_into(&std.data, x[0], &x[1..1 + p], &x[1 + p..1 + p + q], &mut buf);
        -gaussian_loglik(std.data.len(), ssr, sigma)
    };

    let steps: Vec<f64> = point.iter().map(|x| 1e-4 * x.abs().max(1.0)).collect();
    let f0 = nll(&point);
    let mut hessian = DMatrix::<f64>::zeros(dim, dim);
    let mut shifted = point.clone();
    for i in 0..dim {
        for j in i..dim {
            let value = if i == j {
                shifted[i] = point[i] + steps[i];
                let fp = nll(&shifted);
                shifted[i] = point[i] - steps[i];
                let fm = nll(&shifted);
                shifted[i] = point[i];
                (fp - 2.0 * f0 + fm) / (steps[i] * steps[i])
            } else {
                let mut corner = |si: f64, sj: f64| {
                    shifted[i] = point[i] + si * steps[i];
                    shifted[j] = point[j] + sj * steps[j];
                    let v = nll(&shifted);
                    shifted[i] = point[i];
                    shifted[j] = point[j];
                    v
                };
                (corner(1.0, 1.0) - corner(1.0, -1.0) - corner(-1.0, 1.0) + corner(-1.0, -1.0))
                    / (4.0 * steps[i] * steps[j])
            };
            hessian[(i, j)] = value;
            hessian[(j, i)] = value;
        }
    }
    if hessian.iter().any(|h| !h.is_finite()) {
        return None;
    }
    let inverse = hessian.cholesky()?.inverse();
    let var = inverse[(0, 0)];
    (var > 0.0 && var.is_finite()).then(|| std.scale * var.sqrt())
}

/// Score of one candidate order during selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub spec: ArmaSpec,
    /// `None` when the fit failed.
    pub criterion: Option<f64>,
    /// Near-cancelling AR and MA factors; excluded from selection.
    pub redundant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderSelection {
    pub best: ArmaFit,
    pub candidates: Vec<CandidateScore>,
}

/// Minimum-AIC fit over `0..=max_p × 0..=max_q`.
pub fn select_order(increments: &IncrementSeries, max_p: usize, max_q: usize) -> Result<ArmaFit> {
    select_order_with(increments, max_p, max_q, AicVariant::Aic).map(|s| s.best)
}

/// Like [`select_order`], with a choice of criterion and every candidate's score.
/// Failed fits and fits with near-common AR/MA factors (see
/// [`COMMON_FACTOR_TOL`]) are skipped; ties go to the smaller `p + q`, then
/// the smaller `p`.
pub fn select_order_with(
    increments: &IncrementSeries,
    max_p: usize,
    max_q: usize,
    variant: AicVariant,
) -> Result<OrderSelection> {
    if increments.len() < MIN_FIT_LENGTH {
        return Err(Error::SeriesTooShort {
            needed: MIN_FIT_LENGTH,
            got: increments.len(),
        });
    }
    let mut candidates = Vec::new();
    let mut fits = Vec::new();
    for p in 0..=max_p {
        for q in 0..=max_q {
            let spec = ArmaSpec::new(p, q);
            match fit(increments, spec) {
                Ok(f) => {
                    let redundant = f.params.common_factor_distance() < COMMON_FACTOR_TOL;
                    candidates.push(CandidateScore {
                        spec,
                        criterion: Some(f.criterion(variant)),
                        redundant,
                    });
                    if !redundant {
                        fits.push(f);
                    }
                }
                Err(Error::DegenerateSeries) => return Err(Error::DegenerateSeries),
                Err(_) => candidates.push(CandidateScore {
                    spec,
                    criterion: None,
                    redundant: false,
                }),
            }
        }
    }
    let best = pick_best(fits, variant).ok_or(Error::AllFitsFailed)?;
    Ok(OrderSelection { best, candidates })
}

fn pick_best(fits: Vec<ArmaFit>, variant: AicVariant) -> Option<ArmaFit> {
    fits.into_iter().min_by(|a, b| {
        a.criterion(variant)
            .total_cmp(&b.criterion(variant))
            .then((a.spec.p + a.spec.q).cmp(&(b.spec.p + b.spec.q)))
            .then(a.spec.p.cmp(&b.spec.p))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(values: Vec<f64>) -> IncrementSeries {
        IncrementSeries::from_values("u", values).unwrap()
    }

    fn white_noise(n: usize, seed: u64) -> IncrementSeries {
        simulate(&ArmaParams::new(0.0, vec![], vec![], 1.0), ArmaSpec::new(0, 0), n, seed).unwrap()
    }

    #[test]
    fn partials_map_matches_hand_expansion() {
        // Order 2: φ1 = r1 − r2 r1, φ2 = r2.
        let phi = partials_to_coefficients(&[0.5, -0.3]);
        assert!((phi[0] - (0.5 + 0.3 * 0.5)).abs() < 1e-15);
        assert_eq!(phi[1], -0.3);
    }

    #[test]
    fn root_modulus() {
        assert_eq!(min_root_modulus(&[]), f64::INFINITY);
        assert!((min_root_modulus(&[-0.5]) - 2.0).abs() < 1e-12);
        // 1 − 0.25 z^2 has roots ±2.
        assert!((min_root_modulus(&[0.0, -0.25]) - 2.0).abs() < 1e-9);
        // 1 + z has a root at −1.
        assert!((min_root_modulus(&[1.0]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn validate_rejects_explosive_ar() {
        let p = ArmaParams::new(0.0, vec![1.2], vec![], 1.0);
        assert!(matches!(p.validate(ArmaSpec::new(1, 0)), Err(Error::InvalidParams(_))));
        let p = ArmaParams::new(0.0, vec![], vec![-1.0], 1.0);
        assert!(p.validate(ArmaSpec::new(0, 1)).is_ok());
        assert!(p.ma_on_boundary());
        let p = ArmaParams::new(0.0, vec![], vec![], 0.0);
        assert!(p.validate(ArmaSpec::new(0, 0)).is_err());
    }

    #[test]
    fn simulate_is_deterministic() {
        let params = ArmaParams::new(10.0, vec![-0.5], vec![0.2], 50.0);
        let spec = ArmaSpec::new(1, 1);
        let a = simulate(&params, spec, 200, 7).unwrap();
        let b = simulate(&params, spec, 200, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, simulate(&params, spec, 200, 8).unwrap());
    }

    #[test]
    fn simulate_white_noise_mean() {
        let params = ArmaParams::new(10.0, vec![], vec![], 1.0);
        let s = simulate(&params, ArmaSpec::new(0, 0), 10_000, 3).unwrap();
        let mean = s.values().iter().sum::<f64>() / 10_000.0;
        assert!((mean - 10.0).abs() < 0.03, "mean {mean}");
    }

    #[test]
    fn simulate_ar1_autocorrelation() {
        let params = ArmaParams::new(0.0, vec![0.9], vec![], 1.0);
        let s = simulate(&params, ArmaSpec::new(1, 0), 5000, 5).unwrap();
        let r = crate::ts::acf(s.values(), 1).unwrap();
        assert!((r.at(1) - 0.9).abs() < 0.05, "lag-1 acf {}", r.at(1));
    }

    #[test]
    fn loglik_white_noise_closed_form() {
        let data = vec![1.0, -0.5, 2.0, 0.3, 0.7, -1.1];
        let params = ArmaParams::new(0.4, vec![], vec![], 1.3);
        let ll = loglik(&params, ArmaSpec::new(0, 0), &series(data.clone())).unwrap();
        let direct: f64 = data
            .iter()
            .map(|x| {
                let z = (x - 0.4) / 1.3;
                -0.5 * (2.0 * PI).ln() - 1.3f64.ln() - 0.5 * z * z
            })
            .sum();
        assert!((ll - direct).abs() < 1e-12);
    }

    #[test]
    fn loglik_sigma_doubling_with_zero_residuals() {
        let data = vec![2.0; 6];
        let spec = ArmaSpec::new(0, 0);
        let a = loglik(&ArmaParams::new(2.0, vec![], vec![], 1.0), spec, &series(data.clone())).unwrap();
        let b = loglik(&ArmaParams::new(2.0, vec![], vec![], 2.0), spec, &series(data)).unwrap();
        assert!(((a - b) - 6.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn loglik_rejects_short_series() {
        let params = ArmaParams::new(0.0, vec![0.1], vec![0.1], 1.0);
        assert!(matches!(
            loglik(&params, ArmaSpec::new(1, 1), &series(vec![1.0, 2.0, 3.0])),
            Err(Error::SeriesTooShort { .. })
        ));
    }

    #[test]
    fn fit_rejects_short_and_constant_series() {
        assert!(matches!(
            fit(&series(vec![1.0, 2.0, 0.5, 3.0]), ArmaSpec::new(0, 0)),
            Err(Error::SeriesTooShort { .. })
        ));
        assert!(matches!(
            fit(&series(vec![4.0; 20]), ArmaSpec::new(1, 0)),
            Err(Error::DegenerateSeries)
        ));
    }

    #[test]
    fn white_noise_fit_is_exact_demeaning() {
        let s = white_noise(80, 1);
        let f = fit(&s, ArmaSpec::new(0, 0)).unwrap();
        let mean = s.values().iter().sum::<f64>() / 80.0;
        assert_eq!(f.params.g, mean);
        for (e, v) in f.residuals.iter().zip(s.values()) {
            assert_eq!(*e, v - mean);
        }
        assert_eq!(f.persistence(), 0.0);
        assert_eq!(f.aic, 2.0 * 2.0 - 2.0 * f.loglik);
    }

    #[test]
    fn white_noise_ar_fit_is_small() {
        let f = fit(&white_noise(500, 2), ArmaSpec::new(1, 0)).unwrap();
        assert!(f.params.betas[0].abs() < 0.15);
        assert!(f.warnings.is_empty());
    }

    #[test]
    fn short_series_warning() {
        let f = fit(&white_noise(30, 4), ArmaSpec::new(0, 0)).unwrap();
        assert_eq!(f.warnings, vec![FitWarning::ShortSeries]);
    }

    #[test]
    fn deterministic_trend_gives_unit_ma_root() {
        use rand_distr::Normal;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let noise = Normal::new(0.0, 20.0).unwrap();
        let levels: Vec<f64> = (0..=200)
            .map(|t| 2000.0 + 10.0 * t as f64 + noise.sample(&mut rng))
            .collect();
        let inc: Vec<f64> = levels.windows(2).map(|w| w[1] - w[0]).collect();
        let f = fit(&series(inc), ArmaSpec::new(0, 1)).unwrap();
        assert!((f.params.thetas[0] + 1.0).abs() < 0.1, "theta {}", f.params.thetas[0]);
        assert!((f.params.g - 10.0).abs() < 1.0);
    }

    #[test]
    fn fit_dominates_truth() {
        let truth = ArmaParams::new(10.0, vec![-0.5], vec![], 50.0);
        let spec = ArmaSpec::new(1, 0);
        for seed in 0..10 {
            let s = simulate(&truth, spec, 200, seed).unwrap();
            let f = fit(&s, spec).unwrap();
            let at_truth = loglik(&truth, spec, &s).unwrap();
            assert!(f.loglik >= at_truth - 1e-6, "seed {seed}");
            assert_eq!(f.aic, 2.0 * 3.0 - 2.0 * f.loglik);
        }
    }

    #[test]
    fn translation_equivariance() {
        let truth = ArmaParams::new(3.0, vec![0.4], vec![0.3], 2.0);
        let spec = ArmaSpec::new(1, 1);
        let s = simulate(&truth, spec, 150, 21).unwrap();
        let shifted = series(s.values().iter().map(|v| v + 25.0).collect());
        let a = fit(&s, spec).unwrap();
        let b = fit(&shifted, spec).unwrap();
        assert!((b.params.g - a.params.g - 25.0).abs() < 1e-6);
        assert!((a.params.betas[0] - b.params.betas[0]).abs() < 1e-6);
        assert!((a.params.thetas[0] - b.params.thetas[0]).abs() < 1e-6);
        assert!((a.params.sigma - b.params.sigma).abs() < 1e-6);
    }

    #[test]
    fn tie_break_prefers_parsimony() {
        let s = white_noise(60, 3);
        let base = fit(&s, ArmaSpec::new(0, 0)).unwrap();
        let mut ar = fit(&s, ArmaSpec::new(1, 0)).unwrap();
        let mut ma = fit(&s, ArmaSpec::new(0, 1)).unwrap();
        let mut arma = fit(&s, ArmaSpec::new(1, 1)).unwrap();
        ar.aic = base.aic;
        ma.aic = base.aic;
        arma.aic = base.aic;
        let best = pick_best(vec![arma.clone(), ma.clone(), ar.clone(), base], AicVariant::Aic).unwrap();
        assert_eq!(best.spec, ArmaSpec::new(0, 0));
        let best = pick_best(vec![arma, ma, ar], AicVariant::Aic).unwrap();
        assert_eq!(best.spec, ArmaSpec::new(0, 1));
    }

    #[test]
    fn select_order_candidates_cover_grid() {
        let s = white_noise(120, 8);
        let sel = select_order_with(&s, 2, 1, AicVariant::Aicc).unwrap();
        assert_eq!(sel.candidates.len(), 6);
        let min = sel
            .candidates
            .iter()
            .filter(|c| !c.redundant)
            .filter_map(|c| c.criterion)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(sel.best.aicc(), min);
    }

    #[test]
    fn common_factor_distance_detects_cancellation() {
        // (1 − 0.5z)(Δ − g) = (1 − 0.48z) ε: roots 2 and 2.083.
        let p = ArmaParams::new(0.0, vec![0.5], vec![-0.48], 1.0);
        assert!((p.common_factor_distance() - (1.0 / 0.48 - 2.0) / 2.0).abs() < 1e-12);
        let p = ArmaParams::new(0.0, vec![0.5], vec![0.5], 1.0);
        assert!((p.common_factor_distance() - 2.0).abs() < 1e-12);
        assert_eq!(ArmaParams::new(0.0, vec![0.5], vec![], 1.0).common_factor_distance(), f64::INFINITY);
    }

    #[test]
    fn polynomial_roots_of_quadratic() {
        // 1 − 3z + 2z² = (1 − z)(1 − 2z): roots 1 and 0.5.
        let mut r: Vec<f64> = polynomial_roots(&[-3.0, 2.0]).iter().map(|z| z.re).collect();
        r.sort_by(f64::total_cmp);
        assert!((r[0] - 0.5).abs() < 1e-12 && (r[1] - 1.0).abs() < 1e-12);
    }
}
