//! Daily OHLC price series, the trading calendar, and open-price lookups.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Price;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceBar {
    pub asset_id: String,
    pub date: NaiveDate,
    pub open: Price,
    pub high: Price,
    pub low: Price,
    pub close: Price,
    pub volume: u64,
}

impl PriceBar {
    pub fn validate(&self) -> Result<()> {
        if self.open <= 0.0 {
            return Err(Error::Validation(format!(
                "non-positive open for {} on {}",
                self.asset_id, self.date
            )));
        }
        let ohlc_ok = self.low <= self.open
            && self.open <= self.high
            && self.low <= self.close
            && self.close <= self.high;
        if !ohlc_ok {
            return Err(Error::Validation(format!(
                "OHLC invariant violated for {} on {}: o={} h={} l={} c={}",
                self.asset_id, self.date, self.open, self.high, self.low, self.close
            )));
        }
        Ok(())
    }
}

/// Strictly ascending sequence of trading dates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradingCalendar {
    dates: Vec<NaiveDate>,
}

impl TradingCalendar {
    pub fn new(dates: Vec<NaiveDate>) -> Result<Self> {
        if dates.is_empty() {
            return Err(Error::Validation("empty trading calendar".into()));
        }
        if !dates.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Validation(
                "trading calendar dates must be strictly ascending".into(),
            ));
        }
        Ok(TradingCalendar { dates })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn first(&self) -> NaiveDate {
        self.dates[0]
    }

    pub fn last(&self) -> NaiveDate {
        *self.dates.last().unwrap()
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.dates.binary_search(&date).is_ok()
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    /// Immediately preceding calendar entry, or a no-predecessor error
    /// when `date` is the first entry.
    pub fn previous_trading_day(&self, date: NaiveDate) -> Result<NaiveDate> {
        match self.dates.binary_search(&date) {
            Ok(0) => Err(Error::NoPredecessor(date)),
            Ok(i) => Ok(self.dates[i - 1]),
            Err(_) => Err(Error::Validation(format!(
                "{date} is not a trading day in the calendar"
            ))),
        }
    }
}

/// Per-asset ordered map from date to bar.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    assets: BTreeMap<String, BTreeMap<NaiveDate, PriceBar>>,
}

impl PriceSeries {
    pub fn assets(&self) -> impl Iterator<Item = &str> {
        self.assets.keys().map(|s| s.as_str())
    }

    pub fn bar(&self, asset: &str, date: NaiveDate) -> Option<&PriceBar> {
        self.assets.get(asset).and_then(|m| m.get(&date))
    }

    pub fn bars_for(&self, asset: &str) -> Option<&BTreeMap<NaiveDate, PriceBar>> {
        self.assets.get(asset)
    }

    /// Opening price used as the execution reference.
    pub fn open_price(&self, asset: &str, date: NaiveDate) -> Result<Price> {
        self.bar(asset, date)
            .map(|b| b.open)
            .ok_or_else(|| Error::DataGap {
                asset: asset.to_string(),
                date,
            })
    }

    pub fn close_price(&self, asset: &str, date: NaiveDate) -> Result<Price> {
        self.bar(asset, date)
            .map(|b| b.close)
            .ok_or_else(|| Error::DataGap {
                asset: asset.to_string(),
                date,
            })
    }

    pub fn insert(&mut self, bar: PriceBar) -> Result<()> {
        bar.validate()?;
        let per_asset = self.assets.entry(bar.asset_id.clone()).or_default();
        if per_asset.insert(bar.date, bar.clone()).is_some() {
            return Err(Error::Validation(format!(
                "duplicate bar for {} on {}",
                bar.asset_id, bar.date
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
struct PriceRow {
    asset_id: String,
    date: NaiveDate,
    open: f64,
    high: f64,
    low: f64,
    close: f64,
    volume: u64,
}

/// Load a CSV price file (asset_id,date,open,high,low,close,volume with a
/// header row). The calendar is the sorted union of all dates seen.
pub fn load_prices(path: &Path) -> Result<(PriceSeries, TradingCalendar)> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    load_prices_from_reader(file)
}

pub fn load_prices_from_reader<R: Read>(reader: R) -> Result<(PriceSeries, TradingCalendar)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let mut series = PriceSeries::default();
    let mut dates = BTreeSet::new();
    for (i, row) in rdr.deserialize::<PriceRow>().enumerate() {
        let line = i + 2; // 1-based, after the header
        let row = row.map_err(|e| Error::Parse {
            line,
            msg: e.to_string(),
        })?;
        let bar = PriceBar {
            asset_id: row.asset_id,
            date: row.date,
            open: row.open,
            high: row.high,
            low: row.low,
            close: row.close,
            volume: row.volume,
        };
        dates.insert(bar.date);
        series.insert(bar)?;
    }
    let calendar = TradingCalendar::new(dates.into_iter().collect())?;
    Ok((series, calendar))
}

/// Serialize a price series back to the CSV wire format.
pub fn write_prices<W: std::io::Write>(series: &PriceSeries, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["asset_id", "date", "open", "high", "low", "close", "volume"])
        .map_err(|e| Error::Validation(e.to_string()))?;
    for (asset, bars) in &series.assets {
        for bar in bars.values() {
            wtr.write_record([
                asset.as_str(),
                &bar.date.to_string(),
                &bar.open.to_string(),
                &bar.high.to_string(),
                &bar.low.to_string(),
                &bar.close.to_string(),
                &bar.volume.to_string(),
            ])
            .map_err(|e| Error::Validation(e.to_string()))?;
        }
    }
    wtr.flush().map_err(|e| Error::Validation(e.to_string()))?;
    Ok(())
}
