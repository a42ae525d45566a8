//! Sentiment-to-signal rules and the Buy&Hold benchmark plan.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::aggregation::DailyAssetSentiment;
use crate::error::{Error, Result};

/// Buy/Sell trigger levels on the 0-100 sentiment scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub sell_signal: f64,
    pub buy_signal: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            sell_signal: 40.0,
            buy_signal: 60.0,
        }
    }
}

impl Thresholds {
    pub fn new(sell_signal: f64, buy_signal: f64) -> Result<Self> {
        let t = Thresholds {
            sell_signal,
            buy_signal,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0 <= self.sell_signal && self.sell_signal < self.buy_signal && self.buy_signal <= 100.0)
        {
            return Err(Error::Validation(format!(
                "thresholds must satisfy 0 <= sell < buy <= 100, got ({}, {})",
                self.sell_signal, self.buy_signal
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Signal {
    Buy,
    Neutral,
    Sell,
    NoData,
}

/// Policy for days with no articles: keep positions untouched (Hold) or
/// route the asset to the neutral list (Neutral, which closes positions).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoDataPolicy {
    #[default]
    Hold,
    Neutral,
}

/// Scores above buy_signal are Buy, below sell_signal are Sell; the band
/// is inclusive at both thresholds and maps to Neutral.
pub fn classify(score: &DailyAssetSentiment, t: &Thresholds) -> Signal {
    match score.score_0_100 {
        None => Signal::NoData,
        Some(s) if s > t.buy_signal => Signal::Buy,
        Some(s) if s < t.sell_signal => Signal::Sell,
        Some(_) => Signal::Neutral,
    }
}

/// Per-day order lists; pairwise disjoint by construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderLists {
    pub trading_date: NaiveDate,
    pub buy_list: Vec<String>,
    pub neutral_list: Vec<String>,
    pub sell_list: Vec<String>,
}

pub fn build_order_lists(
    trading_date: NaiveDate,
    signals: &BTreeMap<String, Signal>,
    policy: NoDataPolicy,
) -> OrderLists {
    let mut lists = OrderLists {
        trading_date,
        buy_list: Vec::new(),
        neutral_list: Vec::new(),
        sell_list: Vec::new(),
    };
    for (asset, signal) in signals {
        match signal {
            Signal::Buy => lists.buy_list.push(asset.clone()),
            Signal::Neutral => lists.neutral_list.push(asset.clone()),
            Signal::Sell => lists.sell_list.push(asset.clone()),
            Signal::NoData => match policy {
                NoDataPolicy::Hold => {}
                NoDataPolicy::Neutral => lists.neutral_list.push(asset.clone()),
            },
        }
    }
    lists
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchmarkMode {
    #[default]
    EqualValue,
    EqualShares,
}

/// Buy everything on the first day, liquidate on the last.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkPlan {
    pub entry_date: NaiveDate,
    pub exit_date: NaiveDate,
    pub mode: BenchmarkMode,
    /// (asset, quantity) per day-1 buy order.
    pub orders: Vec<(String, f64)>,
}

/// Size the day-1 benchmark orders. Equal-value splits capital/N notional
/// per asset; equal-shares solves capital = n * sum(prices) for one share
/// count applied to every asset.
pub fn benchmark_plan(
    universe: &[String],
    entry_date: NaiveDate,
    exit_date: NaiveDate,
    capital: f64,
    mode: BenchmarkMode,
    entry_open: &dyn Fn(&str) -> Result<f64>,
) -> Result<BenchmarkPlan> {
    if universe.is_empty() {
        return Err(Error::Config("benchmark universe is empty".into()));
    }
    if capital <= 0.0 {
        return Err(Error::Config(format!("capital must be > 0, got {capital}")));
    }
    if entry_date >= exit_date {
        return Err(Error::Validation(format!(
            "benchmark entry {entry_date} must precede exit {exit_date}"
        )));
    }
    let mut prices = Vec::with_capacity(universe.len());
    for asset in universe {
        let p = entry_open(asset).map_err(|e| {
            Error::Config(format!("missing day-1 price for benchmark asset {asset}: {e}"))
        })?;
        prices.push(p);
    }
    let mut orders = Vec::with_capacity(universe.len());
    match mode {
        BenchmarkMode::EqualValue => {
            let notional = capital / universe.len() as f64;
            for (asset, price) in universe.iter().zip(&prices) {
                orders.push((asset.clone(), notional / price));
            }
        }
        BenchmarkMode::EqualShares => {
            let total: f64 = prices.iter().sum();
            let shares = capital / total;
            for asset in universe {
                orders.push((asset.clone(), shares));
            }
        }
    }
    orders.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(BenchmarkPlan {
        entry_date,
        exit_date,
        mode,
        orders,
    })
}
