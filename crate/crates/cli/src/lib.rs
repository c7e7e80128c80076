//! Command-line front end: ingestion, batch profiling and report emission.

pub mod ingest;
pub mod report;

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use resilience_core::arma::{self, AicVariant, ArmaParams};
use resilience_core::crosssection::{
    property_matrix, rank, regress, yearly_stats, CovarianceKind, Direction, PanelTable, Property,
    DEFAULT_PERMUTATIONS,
};
use resilience_core::diagnostics::{AdfResult, AdfVariant};
use resilience_core::resilience::{profile, AnalysisConfig, TrendRule};
use resilience_core::{LevelSeries, ResilienceProfile};

use ingest::Window;
use report::{artifacts, Cell, Table};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("analysis failed: {0}")]
    Analysis(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Io(_) => 1,
            CliError::Analysis(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "resilience", version, about = "Resilience and resistance of welfare time series")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit every unit and write profiles.csv.
    Profile(AnalysisArgs),
    /// Resilience / resistance flags with the conditions behind them.
    Classify(AnalysisArgs),
    /// Order units by one property.
    Rank(RankArgs),
    /// Cross-sectional moments of the levels per year.
    YearlyStats(YearlyArgs),
    /// Spearman correlations among level, trend, rho and pi.
    Matrix(MatrixArgs),
    /// Robust cross-sectional regressions of the properties on covariates.
    Regress(RegressArgs),
    /// Generate an ARIMA(p,1,q) panel in the input format.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Panel CSV with header unit,time,value.
    #[arg(long)]
    pub input: PathBuf,
    /// Alias CSV with header source_unit,target_unit,time_from,time_to.
    #[arg(long)]
    pub aliases: Option<PathBuf>,
    /// Restrict a unit to a sample window, e.g. BEL=1970:2011. Repeatable.
    #[arg(long = "window", value_parser = ingest::parse_window)]
    pub windows: Vec<(String, Window)>,
    /// Linearly bridge gaps of up to two missing periods.
    #[arg(long)]
    pub interpolate: bool,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
    /// Also write a JSON mirror of each table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AdfChoice {
    Tau,
    JointF,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TrendChoice {
    Significance,
    RawSign,
}

#[derive(Debug, Clone, Args)]
pub struct AnalysisArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long, default_value_t = 2)]
    pub max_p: usize,
    #[arg(long, default_value_t = 2)]
    pub max_q: usize,
    /// Two-sided level of the trend significance test.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Use the small-sample corrected AIC for order selection.
    #[arg(long)]
    pub aicc: bool,
    #[arg(long, value_enum, default_value_t = AdfChoice::Tau)]
    pub adf: AdfChoice,
    #[arg(long, value_enum, default_value_t = TrendChoice::Significance)]
    pub trend_rule: TrendChoice,
    /// Ljung-Box lags; defaults to min(10, n/5).
    #[arg(long)]
    pub lb_lags: Option<usize>,
    /// Exit with status 2 if any unit fails instead of recording the error.
    #[arg(long)]
    pub strict: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PropertyChoice {
    Level,
    Trend,
    Rho,
    Pi,
}

impl From<PropertyChoice> for Property {
    fn from(p: PropertyChoice) -> Self {
        match p {
            PropertyChoice::Level => Property::Level,
            PropertyChoice::Trend => Property::Trend,
            PropertyChoice::Rho => Property::Rho,
            PropertyChoice::Pi => Property::Pi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DirectionChoice {
    Asc,
    Desc,
}

#[derive(Debug, Clone, Args)]
pub struct RankArgs {
    #[command(flatten)]
    pub analysis: AnalysisArgs,
    #[arg(long, value_enum)]
    pub property: PropertyChoice,
    /// Defaults to descending for level and trend, ascending for rho and pi.
    #[arg(long, value_enum)]
    pub direction: Option<DirectionChoice>,
    #[arg(long)]
    pub top: Option<usize>,
    /// With --top, keep both the first and the last `top` units.
    #[arg(long, requires = "top")]
    pub both_ends: bool,
}

#[derive(Debug, Clone, Args)]
pub struct YearlyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long, requires = "to")]
    pub from: Option<i64>,
    #[arg(long, requires = "from")]
    pub to: Option<i64>,
}

#[derive(Debug, Clone, Args)]
pub struct MatrixArgs {
    #[command(flatten)]
    pub analysis: AnalysisArgs,
    #[arg(long, default_value_t = DEFAULT_PERMUTATIONS)]
    pub permutations: usize,
}

#[derive(Debug, Clone, Args)]
pub struct RegressArgs {
    #[command(flatten)]
    pub analysis: AnalysisArgs,
    /// Covariate CSV with header unit,name,value.
    #[arg(long)]
    pub covariates: PathBuf,
    /// Covariate names to use as regressors; defaults to all of them.
    #[arg(long, value_delimiter = ',')]
    pub regressors: Vec<String>,
    /// Properties to regress; defaults to all four.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub dependent: Vec<PropertyChoice>,
    /// HC1 instead of HC0 standard errors.
    #[arg(long)]
    pub hc1: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub beta1: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub beta2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub theta1: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub g: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Levels per unit.
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// First level of every path.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub start_level: f64,
    /// Time label of the first level.
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    pub start_time: i64,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Runs a parsed command, returning the files written.
pub fn run(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    let (dir, files) = match cli.command {
        Command::Profile(a) => {
            let batch = Batch::run(&a)?;
            (a.output.output_dir.clone(), artifacts("profiles", &profiles_table(&batch.results), a.output.json)?)
        }
        Command::Classify(a) => {
            let batch = Batch::run(&a)?;
            (a.output.output_dir.clone(), artifacts("classification", &classification_table(&batch.results), a.output.json)?)
        }
        Command::Rank(r) => {
            let panel = Batch::run(&r.analysis)?.panel()?;
            let property: Property = r.property.into();
            let direction = match r.direction {
                Some(DirectionChoice::Asc) => Direction::Ascending,
                Some(DirectionChoice::Desc) => Direction::Descending,
                None => property.default_direction(),
            };
            let ranking = rank(&panel, property, direction, r.top, r.both_ends).map_err(analysis)?;
            if ranking.excluded > 0 {
                eprintln!("{} unit(s) without a finite {} left out", ranking.excluded, property.as_str());
            }
            let mut t = Table::new(vec!["position", "unit", "property", "value", "stars"]);
            for e in ranking.entries {
                t.push(vec![
                    e.position.into(),
                    e.unit_id.into(),
                    property.as_str().into(),
                    e.value.into(),
                    e.stars.map_or(Cell::Empty, Cell::Text),
                ]);
            }
            (r.analysis.output.output_dir.clone(), artifacts("ranking", &t, r.analysis.output.json)?)
        }
        Command::YearlyStats(y) => {
            let series = load_series(&y.input)?;
            let range = y.from.zip(y.to);
            let stats = yearly_stats(&series, range).map_err(|e| CliError::Input(e.to_string()))?;
            let mut t = Table::new(vec!["year", "n", "mean", "sd", "skewness", "excess_kurtosis"]);
            for s in stats {
                t.push(vec![
                    s.year.into(),
                    s.stats.n.into(),
                    s.stats.mean.into(),
                    s.stats.sd.into(),
                    s.stats.skewness.into(),
                    s.stats.excess_kurtosis.into(),
                ]);
            }
            (y.output.output_dir.clone(), artifacts("yearly_stats", &t, y.output.json)?)
        }
        Command::Matrix(m) => {
            let panel = Batch::run(&m.analysis)?.panel()?;
            let pm = property_matrix(&panel, m.permutations, m.analysis.seed).map_err(analysis)?;
            let mut t = Table::new(vec!["row", "column", "spearman", "p_value", "n_used", "n_excluded", "permutations"]);
            for i in 0..4 {
                for j in 0..4 {
                    t.push(vec![
                        pm.properties[i].as_str().into(),
                        pm.properties[j].as_str().into(),
                        pm.coefficients[i][j].into(),
                        pm.p_values[i][j].into(),
                        pm.n_used.into(),
                        pm.n_excluded.into(),
                        pm.permutations.into(),
                    ]);
                }
            }
            (m.analysis.output.output_dir.clone(), artifacts("matrix", &t, m.analysis.output.json)?)
        }
        Command::Regress(r) => {
            let covariates = ingest::read_covariates(&r.covariates)?;
            let panel = Batch::run(&r.analysis)?.panel()?.with_covariates(covariates);
            let regressors = if r.regressors.is_empty() {
                panel.covariate_names()
            } else {
                r.regressors.clone()
            };
            if regressors.is_empty() {
                return Err(CliError::Input("no covariates to regress on".into()));
            }
            let dependents: Vec<Property> = if r.dependent.is_empty() {
                Property::ALL.to_vec()
            } else {
                r.dependent.iter().map(|&d| d.into()).collect()
            };
            let kind = if r.hc1 { CovarianceKind::Hc1 } else { CovarianceKind::Hc0 };
            let se_header = if r.hc1 { "hc1_se" } else { "hc0_se" };
            let mut t = Table::new(vec![
                "dependent", "term", "coefficient", se_header, "classical_se", "t_stat", "p_value", "stars", "r_squared", "n_used",
            ]);
            for dep in dependents {
                let ols = regress(&panel, dep, &regressors, kind).map_err(analysis)?;
                for i in 0..ols.coefficients.len() {
                    t.push(vec![
                        dep.as_str().into(),
                        ols.names[i].clone().into(),
                        ols.coefficients[i].into(),
                        ols.robust_se[i].into(),
                        ols.classical_se[i].into(),
                        ols.t_stat(i).into(),
                        ols.p_value(i).into(),
                        ols.stars(i).into(),
                        ols.r_squared.into(),
                        ols.n_used.into(),
                    ]);
                }
            }
            (r.analysis.output.output_dir.clone(), artifacts("regress", &t, r.analysis.output.json)?)
        }
        Command::Simulate(s) => (s.output.output_dir.clone(), artifacts("simulated", &simulate_table(&s)?, s.output.json)?),
    };
    report::write_all(&dir, &files)
}

fn analysis(e: resilience_core::Error) -> CliError {
    CliError::Analysis(e.to_string())
}

fn load_series(input: &InputArgs) -> Result<Vec<LevelSeries>, CliError> {
    let mut obs = ingest::read_panel(&input.input)?;
    if let Some(path) = &input.aliases {
        obs = ingest::apply_aliases(obs, &ingest::read_aliases(path)?)?;
    }
    let mut windows = BTreeMap::new();
    for (unit, w) in &input.windows {
        if windows.insert(unit.clone(), *w).is_some() {
            return Err(CliError::Input(format!("more than one window for unit '{unit}'")));
        }
    }
    ingest::build_series(&obs, &windows, input.interpolate)
}

fn config_from(a: &AnalysisArgs) -> Result<AnalysisConfig, CliError> {
    let config = AnalysisConfig {
        max_p: a.max_p,
        max_q: a.max_q,
        alpha_trend: a.alpha,
        ljung_box_lags: a.lb_lags,
        aic_variant: if a.aicc { AicVariant::Aicc } else { AicVariant::Aic },
        adf_variant: match a.adf {
            AdfChoice::Tau => AdfVariant::Tau,
            AdfChoice::JointF => AdfVariant::JointF,
        },
        trend_rule: match a.trend_rule {
            TrendChoice::Significance => TrendRule::Significance,
            TrendChoice::RawSign => TrendRule::RawSign,
        },
        random_seed: a.seed,
    };
    config.validate().map_err(|e| CliError::Input(e.to_string()))?;
    Ok(config)
}

/// Per-unit outcome of a batch run, in unit order.
pub struct Batch {
    pub results: Vec<(String, Result<ResilienceProfile, String>)>,
}

impl Batch {
    /// Profiles every unit on a worker pool. Under `--strict` any unit failure
    /// aborts the run with an analysis error.
    pub fn run(a: &AnalysisArgs) -> Result<Self, CliError> {
        let config = config_from(a)?;
        let series = load_series(&a.input)?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(a.jobs)
            .build()
            .map_err(|e| CliError::Io(e.to_string()))?;
        let results: Vec<(String, Result<ResilienceProfile, String>)> = pool.install(|| {
            series
                .par_iter()
                .map(|s| {
                    (
                        s.unit_id().to_string(),
                        profile(s, &config).map_err(|e| e.to_string()),
                    )
                })
                .collect()
        });
        let failures: Vec<String> = results
            .iter()
            .filter_map(|(u, r)| r.as_ref().err().map(|e| format!("{u}: {e}")))
            .collect();
        if !failures.is_empty() {
            if a.strict {
                return Err(CliError::Analysis(failures.join("; ")));
            }
            for f in &failures {
                eprintln!("warning: {f}");
            }
        }
        Ok(Self { results })
    }

    /// Successful profiles only.
    pub fn panel(self) -> Result<PanelTable, CliError> {
        let rows: Vec<ResilienceProfile> = self.results.into_iter().filter_map(|(_, r)| r.ok()).collect();
        PanelTable::new(rows).map_err(analysis)
    }
}

fn adf_decision(r: &Option<AdfResult>) -> Cell {
    match r {
        Some(r) if r.decisions.reject_5pct => "reject".into(),
        Some(_) => "no-reject".into(),
        None => "skipped".into(),
    }
}

pub const PROFILE_HEADERS: [&str; 18] = [
    "unit",
    "n",
    "level",
    "g",
    "se_g",
    "trend_category",
    "sigma",
    "rho",
    "pi",
    "p",
    "q",
    "aic",
    "ljung_box_p",
    "adf_levels_decision_5pct",
    "adf_increments_decision_5pct",
    "resilient",
    "resistant",
    "warnings",
];

/// One row per unit; failed units keep their row with the error in `warnings`.
pub fn profiles_table(results: &[(String, Result<ResilienceProfile, String>)]) -> Table {
    let mut t = Table::new(PROFILE_HEADERS.to_vec());
    for (unit, r) in results {
        match r {
            Ok(p) => t.push(vec![
                unit.as_str().into(),
                p.n_levels.into(),
                p.level.into(),
                p.trend_g.into(),
                p.se_g.into(),
                p.trend_category.as_str().into(),
                p.sigma.into(),
                p.rho.into(),
                p.pi.into(),
                p.fit.spec.p.into(),
                p.fit.spec.q.into(),
                p.fit.aic.into(),
                p.ljung_box.p_value.into(),
                adf_decision(&p.adf_levels),
                adf_decision(&p.adf_increments),
                p.classification.resilient.into(),
                p.classification.resistant.into(),
                p.warnings.iter().map(|w| w.as_str()).collect::<Vec<_>>().join(";").into(),
            ]),
            Err(e) => {
                let mut row = vec![Cell::Empty; PROFILE_HEADERS.len()];
                row[0] = unit.as_str().into();
                row[17] = format!("error:{e}").into();
                t.push(row);
            }
        }
    }
    t
}

pub fn classification_table(results: &[(String, Result<ResilienceProfile, String>)]) -> Table {
    let mut t = Table::new(vec![
        "unit",
        "trend_category",
        "persistence_category",
        "pi",
        "rho",
        "trend_not_deteriorating",
        "anti_persistent",
        "not_volatile",
        "resilient",
        "resistant",
        "error",
    ]);
    for (unit, r) in results {
        match r {
            Ok(p) => {
                let c = p.classification;
                t.push(vec![
                    unit.as_str().into(),
                    p.trend_category.as_str().into(),
                    p.persistence_category.as_str().into(),
                    p.pi.into(),
                    p.rho.into(),
                    c.rationale.trend_not_deteriorating.into(),
                    c.rationale.anti_persistent.into(),
                    c.rationale.not_volatile.into(),
                    c.resilient.into(),
                    c.resistant.into(),
                    Cell::Empty,
                ]);
            }
            Err(e) => {
                let mut row = vec![Cell::Empty; 11];
                row[0] = unit.as_str().into();
                row[10] = e.as_str().into();
                t.push(row);
            }
        }
    }
    t
}

/// `reps` independent level paths of `n` points each; per-path seeds are
/// drawn from a generator seeded with `seed`.
pub fn simulate_table(s: &SimulateArgs) -> Result<Table, CliError> {
    if s.n < 2 || s.reps == 0 {
        return Err(CliError::Input("--n must be at least 2 and --reps at least 1".into()));
    }
    let mut betas = Vec::new();
    if s.beta1 != 0.0 || s.beta2.is_some() {
        betas.push(s.beta1);
    }
    betas.extend(s.beta2);
    let params = ArmaParams::new(s.g, betas, s.theta1.into_iter().collect(), s.sigma);
    let mut seeder = ChaCha8Rng::seed_from_u64(s.seed);
    let width = s.reps.to_string().len();
    let mut t = Table::new(vec!["unit", "time", "value"]);
    for rep in 0..s.reps {
        let inc = arma::simulate(&params, params.spec(), s.n - 1, seeder.next_u64())
            .map_err(|e| CliError::Input(e.to_string()))?;
        let levels = inc.integrate(s.start_level).map_err(|e| CliError::Input(e.to_string()))?;
        let unit = format!("sim{:0width$}", rep + 1);
        for (i, v) in levels.values().iter().enumerate() {
            t.push(vec![unit.as_str().into(), (s.start_time + i as i64).into(), (*v).into()]);
        }
    }
    Ok(t)
}
