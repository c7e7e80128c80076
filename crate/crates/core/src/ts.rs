//! Time-series containers, differencing, descriptive statistics,
//! autocorrelation and rank correlation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Welfare levels `k_t` of one unit on a strictly increasing integer time index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSeries {
    unit_id: String,
    times: Vec<i64>,
    values: Vec<f64>,
}

impl LevelSeries {
    pub fn new(unit_id: impl Into<String>, times: Vec<i64>, values: Vec<f64>) -> Result<Self> {
        let unit_id = unit_id.into();
        if times.len() != values.len() {
            return Err(Error::LengthMismatch {
                left: times.len(),
                right: values.len(),
            });
        }
        if values.len() < 2 {
            return Err(Error::SeriesTooShort {
                needed: 2,
                got: values.len(),
            });
        }
        if let Some(w) = times.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSeries(format!(
                "unit {unit_id}: times must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSeries(format!(
                "unit {unit_id}: non-finite value at time {}",
                times[i]
            )));
        }
        Ok(Self {
            unit_id,
            times,
            values,
        })
    }

    /// Builds a series on consecutive times `start, start + 1, ...`.
    pub fn from_values(unit_id: impl Into<String>, start: i64, values: Vec<f64>) -> Result<Self> {
        let times = (0..values.len() as i64).map(|i| start + i).collect();
        Self::new(unit_id, times, values)
    }

    pub fn unit_id(&self) -> &str {
        &self.unit_id
    }

    pub fn times(&self) -> &[i64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value observed at `time`, if any.
    pub fn value_at(&self, time: i64) -> Option<f64> {
        self.times
            .binary_search(&time)
            .ok()
            .map(|i| self.values[i])
    }

    /// Restricts the series to `from..=to`.
    pub fn window(&self, from: i64, to: i64) -> Result<Self> {
        let (times, values): (Vec<i64>, Vec<f64>) = self
            .times
            .iter()
            .zip(&self.values)
            .filter(|(t, _)| (from..=to).contains(*t))
            .map(|(t, v)| (*t, *v))
            .unzip();
        Self::new(self.unit_id.clone(), times, values)
    }

    /// Applies `f` to every level, keeping the time index.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.unit_id.clone(),
            self.times.clone(),
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }
}

/// First differences `Δ_t = k_t − k_{t−1}`, indexed by the later endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementSeries {
    unit_id: String,
    times: Vec<i64>,
    values: Vec<f64>,
}

impl IncrementSeries {
    pub fn new(unit_id: impl Into<String>, times: Vec<i64>, values: Vec<f64>) -> Result<Self> {
        let unit_id = unit_id.into();
        if times.len() != values.len() {
            return Err(Error::LengthMismatch {
                left: times.len(),
                right: values.len(),
            });
        }
        if values.is_empty() {
            return Err(Error::EmptyInput);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSeries(format!(
                "unit {unit_id}: non-finite increment"
            )));
        }
        Ok(Self {
            unit_id,
            times,
            values,
        })
    }

    /// Increments indexed `1..=n`.
    pub fn from_values(unit_id: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let times = (1..=values.len() as i64).collect();
        Self::new(unit_id, times, values)
    }

    pub fn unit_id(&self) -> &str {
        &self.unit_id
    }

    pub fn times(&self) -> &[i64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Cumulative sum starting from `initial` at time `times[0] - 1`.
    pub fn integrate(&self, initial: f64) -> Result<LevelSeries> {
        let mut values = Vec::with_capacity(self.len() + 1);
        let mut level = initial;
        values.push(level);
        for d in &self.values {
            level += d;
            values.push(level);
        }
        let mut times = Vec::with_capacity(self.len() + 1);
        times.push(self.times[0] - 1);
        times.extend_from_slice(&self.times);
        LevelSeries::new(self.unit_id.clone(), times, values)
    }
}

pub fn difference(series: &LevelSeries) -> Result<IncrementSeries> {
    if series.len() < 2 {
        return Err(Error::SeriesTooShort {
            needed: 2,
            got: series.len(),
        });
    }
    let values = series.values.windows(2).map(|w| w[1] - w[0]).collect();
    IncrementSeries::new(series.unit_id.clone(), series.times[1..].to_vec(), values)
}

/// Sample moments. `skewness` needs n ≥ 3 and `excess_kurtosis` n ≥ 4;
/// both are absent for constant samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveStats {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub skewness: Option<f64>,
    pub excess_kurtosis: Option<f64>,
}

/// Mean, sample sd (n − 1 denominator) and the moment estimators
/// `m3 / m2^(3/2)` and `m4 / m2^2 − 3`.
pub fn describe(values: &[f64]) -> Result<DescriptiveStats> {
    let n = values.len();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    if values.iter().all(|&v| v == values[0]) {
        return Ok(DescriptiveStats {
            n,
            mean: values[0],
            sd: 0.0,
            skewness: None,
            excess_kurtosis: None,
        });
    }
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in values {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let sd = (m2 / (nf - 1.0)).sqrt();
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    Ok(DescriptiveStats {
        n,
        mean,
        sd,
        skewness: (n >= 3).then(|| m3 / m2.powf(1.5)),
        excess_kurtosis: (n >= 4).then(|| m4 / (m2 * m2) - 3.0),
    })
}

/// Sample autocorrelations for lags `0..=max_lag`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfResult {
    pub coefficients: Vec<f64>,
}

impl AcfResult {
    pub fn max_lag(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn at(&self, lag: usize) -> f64 {
        self.coefficients[lag]
    }
}

/// Box–Jenkins autocorrelation: overall-mean centering, lag-0 (n-denominator)
/// autocovariance in the denominator.
pub fn acf(values: &[f64], max_lag: usize) -> Result<AcfResult> {
    let n = values.len();
    if n < max_lag + 2 {
        return Err(Error::LagTooLarge { lag: max_lag, n });
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let c0: f64 = centered.iter().map(|d| d * d).sum();
    if c0 == 0.0 {
        return Err(Error::DegenerateInput("autocorrelation of a constant series"));
    }
    let mut coefficients = Vec::with_capacity(max_lag + 1);
    coefficients.push(1.0);
    for lag in 1..=max_lag {
        let ck: f64 = centered
            .iter()
            .zip(&centered[lag..])
            .map(|(a, b)| a * b)
            .sum();
        coefficients.push((ck / c0).clamp(-1.0, 1.0));
    }
    Ok(AcfResult { coefficients })
}

/// 1-based ranks, ties receiving the average of the positions they span.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

pub(crate) fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 3 {
        return Err(Error::SeriesTooShort {
            needed: 3,
            got: x.len(),
        });
    }
    let constant = |v: &[f64]| v.iter().all(|&a| a == v[0]);
    if constant(x) || constant(y) {
        return Err(Error::DegenerateInput("spearman of a constant sequence"));
    }
    Ok(pearson(&average_ranks(x), &average_ranks(y)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn levels(values: &[f64]) -> LevelSeries {
        LevelSeries::from_values("u", 2000, values.to_vec()).unwrap()
    }

    #[test]
    fn difference_basic() {
        let inc = difference(&levels(&[2.0, 5.0, 9.0])).unwrap();
        assert_eq!(inc.values(), &[3.0, 4.0]);
        assert_eq!(inc.times(), &[2001, 2002]);
    }

    #[test]
    fn difference_constant_and_length() {
        let inc = difference(&levels(&[7.5; 4])).unwrap();
        assert_eq!(inc.values(), &[0.0, 0.0, 0.0]);
        let long: Vec<f64> = (0..51).map(|i| (i * i) as f64).collect();
        assert_eq!(difference(&levels(&long)).unwrap().len(), 50);
    }

    #[test]
    fn level_series_rejects_bad_input() {
        assert!(matches!(
            LevelSeries::new("u", vec![1], vec![1.0]),
            Err(Error::SeriesTooShort { .. })
        ));
        assert!(LevelSeries::new("u", vec![1, 1], vec![1.0, 2.0]).is_err());
        assert!(LevelSeries::new("u", vec![1, 2], vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn describe_symmetric_and_degenerate() {
        let s = describe(&[-1.0, 0.0, 1.0]).unwrap();
        assert_eq!(s.mean, 0.0);
        assert_eq!(s.skewness, Some(0.0));
        assert_eq!(s.excess_kurtosis, None);

        let s = describe(&[5.0]).unwrap();
        assert_eq!((s.mean, s.sd, s.skewness, s.excess_kurtosis), (5.0, 0.0, None, None));
        assert!(matches!(describe(&[]), Err(Error::EmptyInput)));

        let s = describe(&[0.1; 7]).unwrap();
        assert_eq!(s.sd, 0.0);
    }

    #[test]
    fn describe_matches_brute_force_moments() {
        let xs = [3.1, -0.4, 2.2, 7.9, 1.0, 1.0, -2.5, 4.4];
        // Oracle: raw power sums expanded binomially around the mean.
        let n = xs.len() as f64;
        let s1: f64 = xs.iter().sum();
        let s2: f64 = xs.iter().map(|x| x * x).sum();
        let s3: f64 = xs.iter().map(|x| x * x * x).sum();
        let s4: f64 = xs.iter().map(|x| x * x * x * x).sum();
        let mu = s1 / n;
        let m2 = s2 / n - mu * mu;
        let m3 = s3 / n - 3.0 * mu * s2 / n + 2.0 * mu.powi(3);
        let m4 = s4 / n - 4.0 * mu * s3 / n + 6.0 * mu * mu * s2 / n - 3.0 * mu.powi(4);
        let s = describe(&xs).unwrap();
        assert!((s.mean - mu).abs() < 1e-12);
        assert!((s.sd - (m2 * n / (n - 1.0)).sqrt()).abs() < 1e-12);
        assert!((s.skewness.unwrap() - m3 / m2.powf(1.5)).abs() < 1e-10);
        assert!((s.excess_kurtosis.unwrap() - (m4 / (m2 * m2) - 3.0)).abs() < 1e-10);
    }

    #[test]
    fn acf_lag_zero_and_errors() {
        let r = acf(&[1.0, 3.0, 2.0, 5.0], 2).unwrap();
        assert_eq!(r.at(0), 1.0);
        assert!(matches!(acf(&[1.0, 2.0, 3.0], 2), Err(Error::LagTooLarge { .. })));
    }

    #[test]
    fn acf_white_noise_and_ar1() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let noise: Vec<f64> = (0..1000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let r = acf(&noise, 10).unwrap();
        let band = 2.0 / (1000f64).sqrt();
        let inside = (1..=10).filter(|&k| r.at(k).abs() < band).count();
        assert!(inside >= 8, "only {inside} lags inside the white-noise band");

        let mut x = vec![0.0; 5000];
        for t in 1..x.len() {
            let e: f64 = StandardNormal.sample(&mut rng);
            x[t] = 0.9 * x[t - 1] + e;
        }
        let r = acf(&x, 1).unwrap();
        assert!((r.at(1) - 0.9).abs() < 0.05, "lag-1 acf {}", r.at(1));
    }

    #[test]
    fn spearman_monotone_and_errors() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap(), 1.0);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[30.0, 20.0, 10.0]).unwrap(), -1.0);
        assert!(matches!(
            spearman(&[1.0, 2.0], &[1.0, 2.0, 3.0]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn spearman_with_tie_matches_explicit_ranks() {
        let x = [1.5, 3.0, 3.0, 0.2, 9.0, 4.1];
        let y = [2.0, 1.0, 5.0, 0.5, 7.0, 6.0];
        // Ranks written out by hand: x has a tie at positions 2 and 3 (ranks 3 and 4 -> 3.5).
        let rx = [2.0, 3.5, 3.5, 1.0, 6.0, 5.0];
        let ry = [3.0, 2.0, 4.0, 1.0, 6.0, 5.0];
        let mean = 3.5;
        let num: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mean) * (b - mean)).sum();
        let dx: f64 = rx.iter().map(|a| (a - mean) * (a - mean)).sum();
        let dy: f64 = ry.iter().map(|b| (b - mean) * (b - mean)).sum();
        let expected = num / (dx * dy).sqrt();
        assert!((spearman(&x, &y).unwrap() - expected).abs() < 1e-12);
        // Frozen from scipy.stats.spearmanr on the same data.
        assert!((expected - 0.898645105261295).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn difference_then_integrate_round_trips(
            values in prop::collection::vec(-1e4f64..1e4, 2..60)
        ) {
            let series = levels(&values);
            let back = difference(&series).unwrap().integrate(values[0]).unwrap();
            prop_assert_eq!(back.times(), series.times());
            for (a, b) in back.values().iter().zip(series.values()) {
                prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
            }
        }

        #[test]
        fn describe_is_permutation_invariant(
            values in prop::collection::vec(-100f64..100.0, 4..40),
            seed in any::<u64>()
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut shuffled = values.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let a = describe(&values).unwrap();
            let b = describe(&shuffled).unwrap();
            prop_assert!((a.mean - b.mean).abs() < 1e-9);
            prop_assert!((a.sd - b.sd).abs() < 1e-9);
            if let (Some(x), Some(y)) = (a.skewness, b.skewness) {
                prop_assert!((x - y).abs() < 1e-6);
            }
        }

        #[test]
        fn acf_bounded_and_shift_invariant(
            values in prop::collection::vec(-50f64..50.0, 12..60),
            shift in -1e3f64..1e3
        ) {
            prop_assume!(values.iter().any(|&v| (v - values[0]).abs() > 1e-3));
            let a = acf(&values, 5).unwrap();
            let shifted: Vec<f64> = values.iter().map(|v| v + shift).collect();
            let b = acf(&shifted, 5).unwrap();
            for (x, y) in a.coefficients.iter().zip(&b.coefficients) {
                prop_assert!((-1.0..=1.0).contains(x));
                prop_assert!((x - y).abs() < 1e-8);
            }
        }

        #[test]
        fn spearman_invariant_under_monotone_transform(
            pairs in prop::collection::vec((-10f64..10.0, -10f64..10.0), 5..40)
        ) {
            let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            prop_assume!(x.iter().any(|&v| v != x[0]) && y.iter().any(|&v| v != y[0]));
            let r = spearman(&x, &y).unwrap();
            let tx: Vec<f64> = x.iter().map(|v| v.exp()).collect();
            let ty: Vec<f64> = y.iter().map(|v| v.powi(3) + 2.0 * v).collect();
            prop_assert!((r - spearman(&tx, &ty).unwrap()).abs() < 1e-12);
            prop_assert!((-1.0..=1.0).contains(&r));
        }
    }
}
