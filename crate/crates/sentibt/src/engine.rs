//! The daily backtest loop: aggregate pre-open, signal, execute at the
//! open, mark at the close. Also strategy comparison, threshold sweeps,
//! and the result-directory serialization.

use std::collections::BTreeMap;
use std::io::Write as IoWrite;
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate, NaiveTime, SecondsFormat, TimeZone, Utc};
use chrono_tz::Tz;
use serde::{Deserialize, Serialize};

use crate::aggregation::{aggregate, build_windows, DEFAULT_MARKET_OPEN};
use crate::error::{Error, Result};
use crate::execution::{
    execute_day, mark_to_market, run_buy_and_hold, ExecutionConfig, Fill, PortfolioState,
};
use crate::marketdata::{load_prices, PriceSeries, TradingCalendar};
use crate::metrics::{self, MetricsConfig, MetricsReport, MetricValue, Period};
use crate::newsfeed::{
    load_articles, load_precomputed_scores, score_articles, AliasTable, ArticleAssetScore,
    LexiconScorer,
};
use crate::strategy::{
    benchmark_plan, build_order_lists, classify, BenchmarkMode, NoDataPolicy, Signal, Thresholds,
};
use crate::Currency;

pub const DEFAULT_TZ_ENV: &str = "SENTIBT_DEFAULT_TZ";

fn default_timezone() -> String {
    std::env::var(DEFAULT_TZ_ENV).unwrap_or_else(|_| "America/New_York".to_string())
}

fn default_open_time() -> NaiveTime {
    DEFAULT_MARKET_OPEN
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    #[default]
    Sentiment,
    BuyAndHold,
}

/// Where (article, asset) scores come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScorerConfig {
    /// Replay model outputs from a CSV of precomputed scores.
    Precomputed { scores: PathBuf },
    /// Match aliases in raw articles and score with the word-count lexicon.
    Lexicon {
        articles: PathBuf,
        aliases: PathBuf,
        #[serde(default)]
        positive: Vec<String>,
        #[serde(default)]
        negative: Vec<String>,
    },
}

/// One run's complete configuration; this is the JSON config file schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BacktestConfig {
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
    pub universe: Vec<String>,
    pub prices: PathBuf,
    #[serde(default)]
    pub scorer: Option<ScorerConfig>,
    #[serde(default)]
    pub strategy: StrategyKind,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub no_data_policy: NoDataPolicy,
    #[serde(default)]
    pub execution: ExecutionConfig,
    #[serde(default)]
    pub benchmark_mode: BenchmarkMode,
    #[serde(default)]
    pub metrics: MetricsConfig,
    #[serde(default = "default_timezone")]
    pub market_timezone: String,
    #[serde(default = "default_open_time")]
    pub market_open_time: NaiveTime,
    /// Optional dividends CSV (date,amount) feeding income into the
    /// annual-return numerator. Income defaults to zero without it.
    #[serde(default)]
    pub dividends: Option<PathBuf>,
}

impl BacktestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.start_date >= self.end_date {
            return Err(Error::Config(format!(
                "start_date {} must precede end_date {}",
                self.start_date, self.end_date
            )));
        }
        if self.universe.is_empty() {
            return Err(Error::Config("universe must be non-empty".into()));
        }
        self.thresholds.validate()?;
        self.execution.validate()?;
        self.timezone()?;
        if self.strategy == StrategyKind::Sentiment && self.scorer.is_none() {
            return Err(Error::Config(
                "sentiment strategy requires a scorer (precomputed or lexicon)".into(),
            ));
        }
        Ok(())
    }

    pub fn timezone(&self) -> Result<Tz> {
        self.market_timezone
            .parse()
            .map_err(|_| Error::Config(format!("unknown timezone {:?}", self.market_timezone)))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let cfg: BacktestConfig =
            serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Loaded and validated inputs for one run.
pub struct BacktestInputs {
    pub series: PriceSeries,
    pub calendar: TradingCalendar,
    pub scores: Vec<ArticleAssetScore>,
    pub income_by_year: BTreeMap<i32, Currency>,
}

pub fn load_inputs(cfg: &BacktestConfig) -> Result<BacktestInputs> {
    let (series, calendar) = load_prices(&cfg.prices)?;
    let scores = match &cfg.scorer {
        None => Vec::new(),
        Some(ScorerConfig::Precomputed { scores }) => load_precomputed_scores(scores)?,
        Some(ScorerConfig::Lexicon {
            articles,
            aliases,
            positive,
            negative,
        }) => {
            let articles = load_articles(articles)?;
            let aliases = AliasTable::load(aliases)?;
            let scorer = if positive.is_empty() && negative.is_empty() {
                LexiconScorer::default_lexicon()
            } else {
                LexiconScorer::new(positive, negative)
            };
            score_articles(&articles, &aliases, &scorer)?
        }
    };
    let mut income_by_year = BTreeMap::new();
    if let Some(path) = &cfg.dividends {
        let file =
            std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::Parse {
                line,
                msg: e.to_string(),
            })?;
            let date: NaiveDate = rec[0].parse().map_err(|_| Error::Parse {
                line,
                msg: format!("bad date {:?}", &rec[0]),
            })?;
            let amount: f64 = rec[1].parse().map_err(|_| Error::Parse {
                line,
                msg: format!("bad amount {:?}", &rec[1]),
            })?;
            *income_by_year.entry(chrono::Datelike::year(&date)).or_insert(0.0) += amount;
        }
    }
    Ok(BacktestInputs {
        series,
        calendar,
        scores,
        income_by_year,
    })
}

/// One row of the daily sentiment audit trail.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SentimentAuditRow {
    pub asset_id: String,
    pub trading_date: NaiveDate,
    pub score_0_100: Option<f64>,
    pub article_count: usize,
    /// Latest article timestamp that entered the aggregate; the look-ahead
    /// audit checks it stays strictly below the window end.
    pub latest_article_ts: Option<DateTime<Utc>>,
    pub window_end: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignalAuditRow {
    pub trading_date: NaiveDate,
    pub asset_id: String,
    pub signal: Signal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BacktestResult {
    pub config: serde_json::Value,
    pub equity_curve: Vec<(NaiveDate, Currency)>,
    pub fills: Vec<Fill>,
    pub signals: Vec<SignalAuditRow>,
    pub sentiment: Vec<SentimentAuditRow>,
    pub metrics: MetricsReport,
    pub warnings: Vec<String>,
}

impl BacktestResult {
    pub fn cumulative_return(&self) -> Result<f64> {
        let v_b = self.equity_curve.first().map(|&(_, v)| v).ok_or_else(|| {
            Error::Domain("empty equity curve".into())
        })?;
        let v_e = self.equity_curve.last().unwrap().1;
        metrics::cumulative_return(v_e, v_b)
    }

    /// Count of (asset, day) aggregates whose newest article was published
    /// at or after that day's market open. Zero by construction.
    pub fn look_ahead_violations(&self) -> usize {
        self.sentiment
            .iter()
            .filter(|row| {
                row.latest_article_ts
                    .is_some_and(|ts| ts >= row.window_end)
            })
            .count()
    }
}

/// Run one backtest over loaded inputs. Per-day phase order is fixed:
/// aggregate the pre-open window, classify, execute at the open, mark to
/// market at the close.
pub fn run_backtest(cfg: &BacktestConfig, inputs: &BacktestInputs) -> Result<BacktestResult> {
    cfg.validate()?;
    let tz = cfg.timezone()?;

    let horizon: Vec<NaiveDate> = inputs
        .calendar
        .dates()
        .iter()
        .copied()
        .filter(|d| *d >= cfg.start_date && *d <= cfg.end_date)
        .collect();
    let calendar = TradingCalendar::new(horizon).map_err(|_| {
        Error::Config(format!(
            "no trading days between {} and {}",
            cfg.start_date, cfg.end_date
        ))
    })?;

    let income = inputs.income_by_year.clone();
    let income_fn = move |year: i32| income.get(&year).copied().unwrap_or(0.0);

    if cfg.strategy == StrategyKind::BuyAndHold {
        return run_benchmark(cfg, inputs, &calendar, &income_fn);
    }

    let backtest_start = tz
        .from_local_datetime(&cfg.start_date.and_time(NaiveTime::MIN))
        .single()
        .ok_or_else(|| Error::Config("ambiguous backtest start datetime".into()))?
        .with_timezone(&Utc);
    let windows = build_windows(&calendar, cfg.market_open_time, tz, backtest_start)?;

    // per-asset scores sorted by timestamp for window slicing
    let mut by_asset: BTreeMap<&str, Vec<&ArticleAssetScore>> = BTreeMap::new();
    for s in &inputs.scores {
        by_asset.entry(s.asset_id.as_str()).or_default().push(s);
    }
    for v in by_asset.values_mut() {
        v.sort_by_key(|s| s.timestamp);
    }

    let mut state = PortfolioState::new(cfg.execution.initial_capital);
    let mut fills = Vec::new();
    let mut signals_audit = Vec::new();
    let mut sentiment_audit = Vec::new();

    for window in &windows {
        let date = window.trading_date;

        // phase 1: aggregate the open-to-open window per asset
        let mut signals: BTreeMap<String, Signal> = BTreeMap::new();
        for asset in &cfg.universe {
            let slice: Vec<ArticleAssetScore> = by_asset
                .get(asset.as_str())
                .map(|v| {
                    let lo = v.partition_point(|s| s.timestamp < window.window_start);
                    let hi = v.partition_point(|s| s.timestamp < window.window_end);
                    v[lo..hi].iter().map(|&s| s.clone()).collect()
                })
                .unwrap_or_default();
            let mut daily = aggregate(&slice, window);
            daily.asset_id = asset.clone();
            let latest = slice.iter().map(|s| s.timestamp).max();
            sentiment_audit.push(SentimentAuditRow {
                asset_id: asset.clone(),
                trading_date: date,
                score_0_100: daily.score_0_100,
                article_count: daily.article_count,
                latest_article_ts: latest,
                window_end: window.window_end,
            });

            // phase 2: classify
            let signal = classify(&daily, &cfg.thresholds);
            signals_audit.push(SignalAuditRow {
                trading_date: date,
                asset_id: asset.clone(),
                signal,
            });
            signals.insert(asset.clone(), signal);
        }

        // phase 3: execute at the open
        let lists = build_order_lists(date, &signals, cfg.no_data_policy);
        let open = |asset: &str| inputs.series.open_price(asset, date);
        fills.extend(execute_day(&mut state, &lists, &open, &cfg.execution));

        // phase 4: mark to market at the close
        let close = |asset: &str| inputs.series.close_price(asset, date).ok();
        mark_to_market(&mut state, &close, date);
    }

    let report = MetricsReport::from_equity_curve(&state.equity_curve, &income_fn, &cfg.metrics)?;
    Ok(BacktestResult {
        config: serde_json::to_value(cfg).map_err(|e| Error::Config(e.to_string()))?,
        equity_curve: state.equity_curve.clone(),
        fills,
        signals: signals_audit,
        sentiment: sentiment_audit,
        metrics: report,
        warnings: state.warnings,
    })
}

fn run_benchmark(
    cfg: &BacktestConfig,
    inputs: &BacktestInputs,
    calendar: &TradingCalendar,
    income_fn: &dyn Fn(i32) -> f64,
) -> Result<BacktestResult> {
    let entry = calendar.first();
    let exit = calendar.last();
    let entry_open = |asset: &str| inputs.series.open_price(asset, entry);
    let plan = benchmark_plan(
        &cfg.universe,
        entry,
        exit,
        cfg.execution.initial_capital,
        cfg.benchmark_mode,
        &entry_open,
    )?;
    let open = |asset: &str, date: NaiveDate| inputs.series.open_price(asset, date);
    let close = |asset: &str, date: NaiveDate| inputs.series.close_price(asset, date).ok();
    let (state, fills) = run_buy_and_hold(&plan, calendar.dates(), &open, &close, &cfg.execution)?;
    let report = MetricsReport::from_equity_curve(&state.equity_curve, income_fn, &cfg.metrics)?;
    Ok(BacktestResult {
        config: serde_json::to_value(cfg).map_err(|e| Error::Config(e.to_string()))?,
        equity_curve: state.equity_curve.clone(),
        fills,
        signals: Vec::new(),
        sentiment: Vec::new(),
        metrics: report,
        warnings: state.warnings,
    })
}

/// Comparison across named variants sharing horizon and universe, with
/// alpha computed against the designated benchmark variant.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonResult {
    pub reports: BTreeMap<String, MetricsReport>,
    pub cumulative_series: BTreeMap<String, Vec<(NaiveDate, f64)>>,
    pub monthly_series: BTreeMap<String, Vec<(NaiveDate, f64)>>,
    pub results: BTreeMap<String, BacktestResult>,
}

pub fn run_comparison(
    variants: &[(String, BacktestConfig)],
    benchmark: Option<&str>,
) -> Result<ComparisonResult> {
    if variants.is_empty() {
        return Err(Error::Config("comparison needs at least one variant".into()));
    }
    let (first_name, first) = &variants[0];
    for (name, cfg) in variants.iter().skip(1) {
        if cfg.start_date != first.start_date || cfg.end_date != first.end_date {
            return Err(Error::Contract(format!(
                "variant {name} horizon differs from {first_name}"
            )));
        }
        if cfg.universe != first.universe {
            return Err(Error::Contract(format!(
                "variant {name} universe differs from {first_name}"
            )));
        }
    }
    if let Some(b) = benchmark {
        if !variants.iter().any(|(n, _)| n == b) {
            return Err(Error::Config(format!(
                "designated benchmark {b:?} is not among the variants"
            )));
        }
    }

    let mut results = BTreeMap::new();
    for (name, cfg) in variants {
        let inputs = load_inputs(cfg)?;
        results.insert(name.clone(), run_backtest(cfg, &inputs)?);
    }
    attach_alpha(&mut results, benchmark)?;

    let mut reports = BTreeMap::new();
    let mut cumulative_series = BTreeMap::new();
    let mut monthly_series = BTreeMap::new();
    for (name, result) in &results {
        reports.insert(name.clone(), result.metrics.clone());
        let v_b = result.equity_curve[0].1;
        cumulative_series.insert(
            name.clone(),
            result
                .equity_curve
                .iter()
                .map(|&(d, v)| (d, (v - v_b) / v_b * 100.0))
                .collect(),
        );
        monthly_series.insert(
            name.clone(),
            metrics::periodic_compound_returns(&result.equity_curve, Period::Month),
        );
    }
    Ok(ComparisonResult {
        reports,
        cumulative_series,
        monthly_series,
        results,
    })
}

/// Fill in each result's alpha against the benchmark's cumulative return.
pub fn attach_alpha(
    results: &mut BTreeMap<String, BacktestResult>,
    benchmark: Option<&str>,
) -> Result<()> {
    let bench_cum = match benchmark {
        None => None,
        Some(b) => Some(
            results
                .get(b)
                .ok_or_else(|| Error::Config(format!("benchmark {b:?} missing")))?
                .cumulative_return()?,
        ),
    };
    for result in results.values_mut() {
        result.metrics.alpha = match bench_cum {
            None => MetricValue::undefined("no-benchmark"),
            Some(b) => MetricValue::defined(metrics::alpha(result.cumulative_return()?, b)),
        };
    }
    Ok(())
}

/// One threshold-sweep row: the pair, its executed-fill count, and metrics.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub sell_signal: f64,
    pub buy_signal: f64,
    pub transaction_count: usize,
    pub metrics: MetricsReport,
}

pub fn threshold_sweep(
    base: &BacktestConfig,
    inputs: &BacktestInputs,
    pairs: &[(f64, f64)],
) -> Result<Vec<SweepRow>> {
    if pairs.is_empty() {
        return Err(Error::Config("threshold sweep needs at least one pair".into()));
    }
    let mut rows = Vec::new();
    for &(sell, buy) in pairs {
        let mut cfg = base.clone();
        cfg.thresholds = Thresholds::new(sell, buy)?;
        let result = run_backtest(&cfg, inputs)?;
        rows.push(SweepRow {
            sell_signal: sell,
            buy_signal: buy,
            transaction_count: result.fills.len(),
            metrics: result.metrics,
        });
    }
    Ok(rows)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp)
            .map_err(|e| Error::io(tmp.display().to_string(), e))?;
        f.write_all(bytes)
            .map_err(|e| Error::io(tmp.display().to_string(), e))?;
        f.sync_all().map_err(|e| Error::io(tmp.display().to_string(), e))?;
    }
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path.display().to_string(), e))
}

fn ts_str(ts: &DateTime<Utc>) -> String {
    ts.to_rfc3339_opts(SecondsFormat::Secs, true)
}

impl BacktestResult {
    /// Serialize the result as a directory: config.json, equity.csv,
    /// fills.csv, signals.csv, sentiment.csv, metrics.json. Each file is
    /// written to a temp name and renamed into place.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;

        let config = serde_json::to_string_pretty(&self.config)
            .map_err(|e| Error::Config(e.to_string()))?;
        write_atomic(&dir.join("config.json"), config.as_bytes())?;

        let mut equity = String::from("date,equity\n");
        for (date, value) in &self.equity_curve {
            equity.push_str(&format!("{date},{value}\n"));
        }
        write_atomic(&dir.join("equity.csv"), equity.as_bytes())?;

        let mut fills = String::from("date,asset,action,quantity,price,notional,commission\n");
        for f in &self.fills {
            fills.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                f.trading_date,
                f.asset_id,
                f.action.as_str(),
                f.quantity,
                f.price,
                f.notional,
                f.commission
            ));
        }
        write_atomic(&dir.join("fills.csv"), fills.as_bytes())?;

        let mut signals = String::from("date,asset,signal\n");
        for s in &self.signals {
            signals.push_str(&format!(
                "{},{},{:?}\n",
                s.trading_date, s.asset_id, s.signal
            ));
        }
        write_atomic(&dir.join("signals.csv"), signals.as_bytes())?;

        let mut sentiment =
            String::from("asset_id,trading_date,score_0_100,article_count,latest_article_ts,window_end\n");
        for row in &self.sentiment {
            sentiment.push_str(&format!(
                "{},{},{},{},{},{}\n",
                row.asset_id,
                row.trading_date,
                row.score_0_100.map_or(String::new(), |s| s.to_string()),
                row.article_count,
                row.latest_article_ts.as_ref().map_or(String::new(), ts_str),
                ts_str(&row.window_end)
            ));
        }
        write_atomic(&dir.join("sentiment.csv"), sentiment.as_bytes())?;

        let metrics = serde_json::to_string_pretty(&self.metrics)
            .map_err(|e| Error::Config(e.to_string()))?;
        write_atomic(&dir.join("metrics.json"), metrics.as_bytes())?;

        Ok(())
    }
}
