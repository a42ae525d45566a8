//! Seeded synthetic datasets: geometric-random-walk prices plus score
//! records with a planted sentiment-to-future-return correlation.

use std::path::Path;

use chrono::{Datelike, Duration, NaiveDate, TimeZone, Utc, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marketdata::{write_prices, PriceBar, PriceSeries, TradingCalendar};
use crate::newsfeed::ArticleAssetScore;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthSpec {
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
    pub universe_size: usize,
    pub initial_price: f64,
    /// Per-day log-drift of the price process.
    pub drift: f64,
    /// Per-day log-volatility of the price process.
    pub volatility: f64,
    /// Expected articles per asset per trading day.
    pub article_rate: f64,
    /// Planted correlation between a day's sentiment and the next
    /// open-to-open return, in [0, 1]. Zero means signal-free data.
    pub correlation: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            start_date: NaiveDate::from_ymd_opt(2020, 1, 1).unwrap(),
            end_date: NaiveDate::from_ymd_opt(2022, 4, 30).unwrap(),
            universe_size: 30,
            initial_price: 100.0,
            drift: 0.0,
            volatility: 0.01,
            article_rate: 1.0,
            correlation: 0.0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.start_date >= self.end_date {
            return Err(Error::Validation(format!(
                "start_date {} must precede end_date {}",
                self.start_date, self.end_date
            )));
        }
        if self.universe_size == 0 {
            return Err(Error::Validation("universe_size must be > 0".into()));
        }
        if self.initial_price <= 0.0 {
            return Err(Error::Validation("initial_price must be > 0".into()));
        }
        if self.volatility < 0.0 {
            return Err(Error::Validation("volatility must be >= 0".into()));
        }
        if self.article_rate < 0.0 {
            return Err(Error::Validation("article_rate must be >= 0".into()));
        }
        if !(0.0..=1.0).contains(&self.correlation) {
            return Err(Error::Validation(format!(
                "correlation must be in [0, 1], got {}",
                self.correlation
            )));
        }
        Ok(())
    }

    pub fn asset_ids(&self) -> Vec<String> {
        (0..self.universe_size).map(|i| format!("SYN{i:02}")).collect()
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub series: PriceSeries,
    pub calendar: TradingCalendar,
    pub scores: Vec<ArticleAssetScore>,
    pub universe: Vec<String>,
}

impl SyntheticDataset {
    pub fn write_files(&self, prices_path: &Path, scores_path: &Path) -> Result<()> {
        let prices_file = std::fs::File::create(prices_path)
            .map_err(|e| Error::io(prices_path.display().to_string(), e))?;
        write_prices(&self.series, prices_file)?;

        let mut out = String::from("article_id,asset_id,timestamp,score\n");
        for s in &self.scores {
            out.push_str(&format!(
                "{},{},{},{}\n",
                s.article_id,
                s.asset_id,
                s.timestamp.to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
                s.score
            ));
        }
        std::fs::write(scores_path, out)
            .map_err(|e| Error::io(scores_path.display().to_string(), e))
    }
}

fn weekday_calendar(start: NaiveDate, end: NaiveDate) -> Vec<NaiveDate> {
    let mut dates = Vec::new();
    let mut d = start;
    while d <= end {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            dates.push(d);
        }
        d += Duration::days(1);
    }
    dates
}

// Box-Muller standard normal draw
fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Generate a reproducible dataset. Per asset, a daily sentiment value
/// s_d in [-1, 1] is drawn for every trading day after the first; the
/// next open-to-open log-return is
///     drift + volatility * (rho * s_d * sqrt(3) + sqrt(1 - rho^2) * z)
/// so rho = 0 yields signal-free prices and rho = 1 a deterministic
/// next-day drift (s is uniform, sqrt(3) normalizes its variance). The
/// articles carrying s_d are timestamped on the previous trading day at
/// 20:00 UTC, inside the aggregation window of day d.
pub fn generate_synthetic_dataset(seed: u64, spec: &SynthSpec) -> Result<SyntheticDataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dates = weekday_calendar(spec.start_date, spec.end_date);
    if dates.len() < 2 {
        return Err(Error::Validation(
            "horizon must contain at least two weekdays".into(),
        ));
    }
    let calendar = TradingCalendar::new(dates.clone())?;
    let universe = spec.asset_ids();
    let rho = spec.correlation;

    let mut series = PriceSeries::default();
    let mut scores = Vec::new();

    for (asset_idx, asset) in universe.iter().enumerate() {
        // stagger starting prices so assets are distinguishable
        let mut open = spec.initial_price * (1.0 + asset_idx as f64 * 0.07);
        let mut opens = Vec::with_capacity(dates.len() + 1);
        opens.push(open);
        // sentiments[i] is tradable at day i's open, so it drives the
        // open[i] -> open[i+1] step; day 0 has no window and stays 0
        let mut sentiments = vec![0.0f64; dates.len()];
        for s in sentiments.iter_mut().skip(1) {
            *s = rng.gen_range(-1.0..=1.0);
        }

        for day in 1..=dates.len() {
            let s = sentiments[day - 1];
            let z = normal(&mut rng);
            let log_ret =
                spec.drift + spec.volatility * (rho * s * 3f64.sqrt() + (1.0 - rho * rho).sqrt() * z);
            open *= log_ret.exp();
            opens.push(open);
        }

        for (i, &date) in dates.iter().enumerate() {
            let o = opens[i];
            let c = if i + 1 < dates.len() {
                (o * opens[i + 1]).sqrt()
            } else {
                o
            };
            let bar = PriceBar {
                asset_id: asset.clone(),
                date,
                open: o,
                high: o.max(c) * 1.001,
                low: o.min(c) * 0.999,
                close: c,
                volume: 1_000 + (rng.gen_range(0..9_000)),
            };
            series.insert(bar)?;
        }

        // articles for day i land in its window: previous trading day 20:00 UTC
        for i in 1..dates.len() {
            let count =
                spec.article_rate.floor() as usize + usize::from(rng.gen::<f64>() < spec.article_rate.fract());
            if count == 0 {
                continue;
            }
            let publish = Utc
                .from_utc_datetime(&dates[i - 1].and_hms_opt(20, 0, 0).unwrap());
            for k in 0..count {
                scores.push(ArticleAssetScore {
                    article_id: format!("art-{asset}-{}-{k}", dates[i]),
                    asset_id: asset.clone(),
                    score: sentiments[i],
                    timestamp: publish + Duration::minutes(k as i64),
                });
            }
        }
    }

    scores.sort_by(|a, b| {
        a.timestamp
            .cmp(&b.timestamp)
            .then_with(|| a.article_id.cmp(&b.article_id))
    });

    Ok(SyntheticDataset {
        series,
        calendar,
        scores,
        universe,
    })
}
