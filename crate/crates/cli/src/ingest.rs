//! Long-format CSV ingestion: panel observations, alias splicing, covariates,
//! gap handling and per-unit sample windows.

use std::collections::BTreeMap;
use std::path::Path;

use resilience_core::LevelSeries;

use crate::CliError;

/// Longest run of missing periods that `--interpolate` will bridge.
pub const MAX_INTERPOLATED_GAP: i64 = 2;

pub type Observations = BTreeMap<String, BTreeMap<i64, f64>>;

/// `unit → (covariate name → value)`.
pub type Covariates = BTreeMap<String, BTreeMap<String, f64>>;

#[derive(Debug, Clone, PartialEq)]
pub struct Alias {
    pub source: String,
    pub target: String,
    pub from: i64,
    pub to: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub from: i64,
    pub to: i64,
}

/// Parses `unit=from:to`.
pub fn parse_window(spec: &str) -> Result<(String, Window), String> {
    let (unit, range) = spec
        .rsplit_once('=')
        .ok_or_else(|| format!("expected unit=from:to, got '{spec}'"))?;
    let (from, to) = range
        .split_once(':')
        .ok_or_else(|| format!("expected unit=from:to, got '{spec}'"))?;
    let from: i64 = from.trim().parse().map_err(|_| format!("bad start year in '{spec}'"))?;
    let to: i64 = to.trim().parse().map_err(|_| format!("bad end year in '{spec}'"))?;
    if unit.is_empty() || from > to {
        return Err(format!("invalid window '{spec}'"));
    }
    Ok((unit.to_string(), Window { from, to }))
}

fn open(path: &Path, expected: &[&str]) -> Result<csv::Reader<std::fs::File>, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let headers = rdr
        .headers()
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let got: Vec<&str> = headers.iter().map(|h| h.trim_start_matches('\u{feff}')).collect();
    if got != expected {
        return Err(CliError::Input(format!(
            "{}: expected header '{}', found '{}'",
            path.display(),
            expected.join(","),
            got.join(",")
        )));
    }
    Ok(rdr)
}

fn field<T: std::str::FromStr>(
    path: &Path,
    record: &csv::StringRecord,
    index: usize,
    column: &str,
) -> Result<T, CliError> {
    let line = record.position().map_or(0, |p| p.line());
    let raw = record.get(index).unwrap_or("");
    raw.parse().map_err(|_| {
        CliError::Input(format!(
            "{}: line {line}, column '{column}': cannot parse '{raw}'",
            path.display()
        ))
    })
}

pub fn read_panel(path: &Path) -> Result<Observations, CliError> {
    let mut rdr = open(path, &["unit", "time", "value"])?;
    let mut out = Observations::new();
    for record in rdr.records() {
        let record = record.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let unit = record[0].to_string();
        let time: i64 = field(path, &record, 1, "time")?;
        let value: f64 = field(path, &record, 2, "value")?;
        if !value.is_finite() {
            return Err(CliError::Input(format!(
                "{}: line {}, column 'value': non-finite value",
                path.display(),
                record.position().map_or(0, |p| p.line())
            )));
        }
        if out.entry(unit.clone()).or_default().insert(time, value).is_some() {
            return Err(CliError::Input(format!(
                "duplicate observation for unit '{unit}' at time {time}"
            )));
        }
    }
    if out.is_empty() {
        return Err(CliError::Input(format!("{}: no observations", path.display())));
    }
    Ok(out)
}

pub fn read_aliases(path: &Path) -> Result<Vec<Alias>, CliError> {
    let mut rdr = open(path, &["source_unit", "target_unit", "time_from", "time_to"])?;
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let alias = Alias {
            source: record[0].to_string(),
            target: record[1].to_string(),
            from: field(path, &record, 2, "time_from")?,
            to: field(path, &record, 3, "time_to")?,
        };
        if alias.from > alias.to || alias.source == alias.target {
            return Err(CliError::Input(format!(
                "{}: line {}: invalid alias row",
                path.display(),
                record.position().map_or(0, |p| p.line())
            )));
        }
        out.push(alias);
    }
    Ok(out)
}

/// Empty and `NA` values are treated as missing and left out.
pub fn read_covariates(path: &Path) -> Result<Covariates, CliError> {
    let mut rdr = open(path, &["unit", "name", "value"])?;
    let mut out = Covariates::new();
    for record in rdr.records() {
        let record = record.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        if record[2].is_empty() || record[2].eq_ignore_ascii_case("na") {
            continue;
        }
        let value: f64 = field(path, &record, 2, "value")?;
        let (unit, name) = (record[0].to_string(), record[1].to_string());
        if out
            .entry(unit.clone())
            .or_default()
            .insert(name.clone(), value)
            .is_some()
        {
            return Err(CliError::Input(format!(
                "duplicate covariate '{name}' for unit '{unit}'"
            )));
        }
    }
    Ok(out)
}

/// Copies each source unit's observations within the alias range into the
/// target unit, then drops every source unit. Overlapping observations are
/// an error.
pub fn apply_aliases(mut obs: Observations, aliases: &[Alias]) -> Result<Observations, CliError> {
    for alias in aliases {
        let source = obs.get(&alias.source).ok_or_else(|| {
            CliError::Input(format!("alias source unit '{}' not in panel", alias.source))
        })?;
        let moved: Vec<(i64, f64)> = source
            .range(alias.from..=alias.to)
            .map(|(&t, &v)| (t, v))
            .collect();
        let target = obs.entry(alias.target.clone()).or_default();
        for (t, v) in moved {
            if target.insert(t, v).is_some() {
                return Err(CliError::Input(format!(
                    "duplicate observation for unit '{}' at time {t} after aliasing '{}'",
                    alias.target, alias.source
                )));
            }
        }
    }
    for alias in aliases {
        obs.remove(&alias.source);
    }
    Ok(obs)
}

/// Builds one level series per unit, restricted to its window if any.
/// Gaps are an error unless `interpolate` is set and the gap is at most
/// [`MAX_INTERPOLATED_GAP`] periods, in which case it is bridged linearly.
pub fn build_series(
    obs: &Observations,
    windows: &BTreeMap<String, Window>,
    interpolate: bool,
) -> Result<Vec<LevelSeries>, CliError> {
    for unit in windows.keys() {
        if !obs.contains_key(unit) {
            return Err(CliError::Input(format!("window names unknown unit '{unit}'")));
        }
    }
    obs.iter()
        .map(|(unit, points)| {
            let (times, values) = fill_gaps(unit, points, interpolate)?;
            let series = LevelSeries::new(unit.clone(), times, values)
                .map_err(|e| CliError::Input(format!("unit '{unit}': {e}")))?;
            match windows.get(unit) {
                None => Ok(series),
                Some(w) => {
                    let (first, last) = (series.times()[0], series.times()[series.len() - 1]);
                    if w.from < first || w.to > last {
                        return Err(CliError::Input(format!(
                            "window {}:{} for unit '{unit}' outside its data range {first}:{last}",
                            w.from, w.to
                        )));
                    }
                    series
                        .window(w.from, w.to)
                        .map_err(|e| CliError::Input(format!("unit '{unit}': {e}")))
                }
            }
        })
        .collect()
}

fn fill_gaps(
    unit: &str,
    points: &BTreeMap<i64, f64>,
    interpolate: bool,
) -> Result<(Vec<i64>, Vec<f64>), CliError> {
    let mut times = Vec::with_capacity(points.len());
    let mut values = Vec::with_capacity(points.len());
    let mut prev: Option<(i64, f64)> = None;
    for (&t, &v) in points {
        if let Some((pt, pv)) = prev {
            let missing = t - pt - 1;
            if missing > 0 {
                if !interpolate || missing > MAX_INTERPOLATED_GAP {
                    return Err(CliError::Input(format!(
                        "non-contiguous series for unit '{unit}': no observations between {pt} and {t}"
                    )));
                }
                for k in 1..=missing {
                    times.push(pt + k);
                    values.push(pv + (v - pv) * k as f64 / (t - pt) as f64);
                }
            }
        }
        times.push(t);
        values.push(v);
        prev = Some((t, v));
    }
    Ok((times, values))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(rows: &[(&str, i64, f64)]) -> Observations {
        let mut o = Observations::new();
        for &(u, t, v) in rows {
            o.entry(u.to_string()).or_default().insert(t, v);
        }
        o
    }

    #[test]
    fn window_parsing() {
        assert_eq!(
            parse_window("BEL=1970:2000").unwrap(),
            ("BEL".to_string(), Window { from: 1970, to: 2000 })
        );
        assert!(parse_window("BEL=2000:1970").is_err());
        assert!(parse_window("BEL").is_err());
        assert!(parse_window("=1:2").is_err());
    }

    #[test]
    fn aliases_splice_and_drop_source() {
        let o = obs(&[("BLX", 1, 1.0), ("BLX", 2, 2.0), ("BEL", 3, 3.0), ("LUX", 3, 9.0)]);
        let aliases = vec![
            Alias { source: "BLX".into(), target: "BEL".into(), from: 1, to: 2 },
            Alias { source: "BLX".into(), target: "LUX".into(), from: 1, to: 2 },
        ];
        let out = apply_aliases(o, &aliases).unwrap();
        assert_eq!(out.keys().collect::<Vec<_>>(), ["BEL", "LUX"]);
        assert_eq!(out["BEL"].values().copied().collect::<Vec<_>>(), [1.0, 2.0, 3.0]);
        assert_eq!(out["LUX"].values().copied().collect::<Vec<_>>(), [1.0, 2.0, 9.0]);
    }

    #[test]
    fn alias_overlap_is_an_error() {
        let o = obs(&[("A", 1, 1.0), ("B", 1, 2.0)]);
        let aliases = vec![Alias { source: "A".into(), target: "B".into(), from: 1, to: 1 }];
        assert!(apply_aliases(o, &aliases).is_err());
    }

    #[test]
    fn gaps_error_or_interpolate() {
        let o = obs(&[("A", 1, 1.0), ("A", 4, 4.0), ("A", 5, 5.0)]);
        let err = build_series(&o, &BTreeMap::new(), false).unwrap_err();
        assert!(err.to_string().contains("'A'") && err.to_string().contains("between 1 and 4"));
        let s = build_series(&o, &BTreeMap::new(), true).unwrap();
        assert_eq!(s[0].times(), [1, 2, 3, 4, 5]);
        assert_eq!(s[0].values(), [1.0, 2.0, 3.0, 4.0, 5.0]);

        let long = obs(&[("A", 1, 1.0), ("A", 5, 5.0)]);
        assert!(build_series(&long, &BTreeMap::new(), true).is_err());
    }

    #[test]
    fn windows_restrict_and_validate() {
        let o = obs(&[("A", 1, 1.0), ("A", 2, 2.0), ("A", 3, 3.0), ("A", 4, 4.0)]);
        let mut w = BTreeMap::new();
        w.insert("A".to_string(), Window { from: 2, to: 3 });
        assert_eq!(build_series(&o, &w, false).unwrap()[0].values(), [2.0, 3.0]);
        w.insert("A".to_string(), Window { from: 0, to: 3 });
        assert!(build_series(&o, &w, false).is_err());
        let mut unknown = BTreeMap::new();
        unknown.insert("Z".to_string(), Window { from: 1, to: 2 });
        assert!(build_series(&o, &unknown, false).is_err());
    }
}
