//! Open-to-open aggregation of per-article scores into one 0-100 sentiment
//! value per asset per trading day.

use chrono::{DateTime, NaiveDate, NaiveTime, Utc};
use chrono_tz::Tz;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::marketdata::TradingCalendar;
use crate::newsfeed::ArticleAssetScore;

pub const DEFAULT_MARKET_OPEN: NaiveTime = match NaiveTime::from_hms_opt(9, 30, 0) {
    Some(t) => t,
    None => unreachable!(),
};

/// The half-open interval [window_start, window_end) whose articles decide
/// one trading day's sentiment. window_end is the day's market open.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregationWindow {
    pub trading_date: NaiveDate,
    pub window_start: DateTime<Utc>,
    pub window_end: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DailyAssetSentiment {
    pub asset_id: String,
    pub trading_date: NaiveDate,
    /// None when no article fell in the window.
    pub score_0_100: Option<f64>,
    pub article_count: usize,
}

fn market_open_utc(date: NaiveDate, open: NaiveTime, tz: Tz) -> Result<DateTime<Utc>> {
    date.and_time(open)
        .and_local_timezone(tz)
        .single()
        .map(|dt| dt.with_timezone(&Utc))
        .ok_or_else(|| {
            Error::Config(format!(
                "ambiguous or missing local time {date} {open} in zone {tz}"
            ))
        })
}

/// Build one window per trading day. Consecutive days produce contiguous,
/// non-overlapping windows; weekends and holidays fold into the next
/// trading day's window. The first day's window starts at `backtest_start`.
pub fn build_windows(
    calendar: &TradingCalendar,
    market_open: NaiveTime,
    tz: Tz,
    backtest_start: DateTime<Utc>,
) -> Result<Vec<AggregationWindow>> {
    let mut windows = Vec::with_capacity(calendar.len());
    let mut prev_open: Option<DateTime<Utc>> = None;
    for &date in calendar.dates() {
        let open = market_open_utc(date, market_open, tz)?;
        let start = match prev_open {
            Some(p) => p,
            None => backtest_start,
        };
        if start >= open {
            return Err(Error::Config(format!(
                "window start {start} is not before market open {open} for {date}"
            )));
        }
        windows.push(AggregationWindow {
            trading_date: date,
            window_start: start,
            window_end: open,
        });
        prev_open = Some(open);
    }
    Ok(windows)
}

/// Average the per-article scores falling inside the window and map the
/// mean from [-1, 1] onto [0, 100]. No articles means an absent score.
pub fn aggregate(scores: &[ArticleAssetScore], window: &AggregationWindow) -> DailyAssetSentiment {
    let mut sum = 0.0;
    let mut count = 0usize;
    let mut asset_id = String::new();
    for s in scores {
        if asset_id.is_empty() {
            asset_id = s.asset_id.clone();
        }
        debug_assert_eq!(s.asset_id, asset_id, "aggregate expects a single asset");
        if s.timestamp >= window.window_start && s.timestamp < window.window_end {
            sum += s.score;
            count += 1;
        }
    }
    let score_0_100 = if count == 0 {
        None
    } else {
        let mean = sum / count as f64;
        Some((mean + 1.0) * 50.0)
    };
    DailyAssetSentiment {
        asset_id,
        trading_date: window.trading_date,
        score_0_100,
        article_count: count,
    }
}
