//! Portfolio state and order execution: equal-value fills at the open,
//! commissions, short selling, and daily mark-to-market.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::strategy::{BenchmarkPlan, OrderLists};
use crate::{Currency, Price};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Long,
    Short,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub asset_id: String,
    pub side: Side,
    pub quantity: f64,
    pub entry_price: Price,
    pub entry_date: NaiveDate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FillAction {
    OpenLong,
    CloseLong,
    OpenShort,
    CloseShort,
}

impl FillAction {
    pub fn as_str(self) -> &'static str {
        match self {
            FillAction::OpenLong => "open_long",
            FillAction::CloseLong => "close_long",
            FillAction::OpenShort => "open_short",
            FillAction::CloseShort => "close_short",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fill {
    pub trading_date: NaiveDate,
    pub asset_id: String,
    pub action: FillAction,
    pub quantity: f64,
    pub price: Price,
    pub notional: Currency,
    pub commission: Currency,
}

impl Fill {
    /// Signed cash delta this fill applied: opening a long or closing a
    /// short pays out, the other two actions collect, commission always
    /// debits.
    pub fn cash_delta(&self) -> Currency {
        let signed = match self.action {
            FillAction::OpenLong | FillAction::CloseShort => -self.notional,
            FillAction::CloseLong | FillAction::OpenShort => self.notional,
        };
        signed - self.commission
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExecutionConfig {
    pub initial_capital: Currency,
    pub order_value: Currency,
    pub commission_rate: f64,
    pub allow_fractional_shares: bool,
    /// Whether the benchmark's final liquidation pays commission.
    pub benchmark_liquidation_commission: bool,
}

impl Default for ExecutionConfig {
    fn default() -> Self {
        ExecutionConfig {
            initial_capital: 300_000.0,
            order_value: 10_000.0,
            commission_rate: 0.0005,
            allow_fractional_shares: true,
            benchmark_liquidation_commission: true,
        }
    }
}

impl ExecutionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.initial_capital <= 0.0 || self.order_value <= 0.0 {
            return Err(Error::Config(
                "initial_capital and order_value must be > 0".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.commission_rate) {
            return Err(Error::Config(format!(
                "commission_rate must be in [0, 1), got {}",
                self.commission_rate
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PortfolioState {
    pub cash: Currency,
    pub positions: BTreeMap<String, Position>,
    pub equity_curve: Vec<(NaiveDate, Currency)>,
    /// Last price seen per asset, used when a close bar is missing.
    last_marks: BTreeMap<String, Price>,
    pub warnings: Vec<String>,
}

impl PortfolioState {
    pub fn new(initial_capital: Currency) -> Self {
        PortfolioState {
            cash: initial_capital,
            positions: BTreeMap::new(),
            equity_curve: Vec::new(),
            last_marks: BTreeMap::new(),
            warnings: Vec::new(),
        }
    }

    fn warn(&mut self, msg: String) {
        log::warn!("{msg}");
        self.warnings.push(msg);
    }

    /// equity = cash + sum_long q*p - sum_short q*p. Short proceeds sit in
    /// cash from entry, so the obligation to repurchase marks at -q*p;
    /// relative to entry that nets out to the usual q*(entry - p)
    /// unrealized P&L and keeps equity continuous through the cover.
    pub fn equity_at(&self, mark: &dyn Fn(&str) -> Option<Price>) -> Currency {
        let mut equity = self.cash;
        for pos in self.positions.values() {
            let price = mark(&pos.asset_id)
                .or_else(|| self.last_marks.get(&pos.asset_id).copied())
                .unwrap_or(pos.entry_price);
            equity += match pos.side {
                Side::Long => pos.quantity * price,
                Side::Short => -pos.quantity * price,
            };
        }
        equity
    }
}

fn open_fill(
    state: &mut PortfolioState,
    date: NaiveDate,
    asset: &str,
    price: Price,
    side: Side,
    cfg: &ExecutionConfig,
) -> Option<Fill> {
    let mut quantity = cfg.order_value / price;
    if !cfg.allow_fractional_shares {
        let rounded = quantity.floor();
        if rounded < 1.0 {
            state.warn(format!(
                "{date} {asset}: order_value {} buys no whole share at {price}, skipped",
                cfg.order_value
            ));
            return None;
        }
        quantity = rounded;
    }
    let notional = quantity * price;
    let commission = cfg.commission_rate * notional;
    let action = match side {
        Side::Long => {
            if state.cash < notional + commission {
                state.warn(format!(
                    "{date} {asset}: insufficient cash {} for buy notional {notional}, skipped",
                    state.cash
                ));
                return None;
            }
            state.cash -= notional + commission;
            FillAction::OpenLong
        }
        Side::Short => {
            state.cash += notional - commission;
            FillAction::OpenShort
        }
    };
    state.positions.insert(
        asset.to_string(),
        Position {
            asset_id: asset.to_string(),
            side,
            quantity,
            entry_price: price,
            entry_date: date,
        },
    );
    state.last_marks.insert(asset.to_string(), price);
    Some(Fill {
        trading_date: date,
        asset_id: asset.to_string(),
        action,
        quantity,
        price,
        notional,
        commission,
    })
}

fn close_fill(
    state: &mut PortfolioState,
    date: NaiveDate,
    asset: &str,
    price: Price,
    cfg: &ExecutionConfig,
) -> Option<Fill> {
    let pos = state.positions.remove(asset)?;
    let notional = pos.quantity * price;
    let commission = cfg.commission_rate * notional;
    let action = match pos.side {
        Side::Long => {
            state.cash += notional - commission;
            FillAction::CloseLong
        }
        Side::Short => {
            state.cash -= notional + commission;
            if state.cash < 0.0 {
                state.warn(format!(
                    "{date} {asset}: short cover drove cash negative ({})",
                    state.cash
                ));
            }
            FillAction::CloseShort
        }
    };
    state.last_marks.insert(asset.to_string(), price);
    Some(Fill {
        trading_date: date,
        asset_id: asset.to_string(),
        action,
        quantity: pos.quantity,
        price,
        notional,
        commission,
    })
}

/// Execute one day's order lists against opening prices. Processing order
/// is Buy, then Neutral, then Sell, each in ascending asset_id. Buys and
/// Sells skip assets that already hold a position of either side; Neutral
/// closes whatever is open. Missing prices skip that asset with a warning.
pub fn execute_day(
    state: &mut PortfolioState,
    lists: &OrderLists,
    open_price: &dyn Fn(&str) -> Result<Price>,
    cfg: &ExecutionConfig,
) -> Vec<Fill> {
    let date = lists.trading_date;
    let mut fills = Vec::new();

    let sorted = |v: &[String]| {
        let mut v = v.to_vec();
        v.sort();
        v
    };

    for asset in sorted(&lists.buy_list) {
        if state.positions.contains_key(&asset) {
            continue; // already in the portfolio, no action
        }
        match open_price(&asset) {
            Ok(p) => {
                if let Some(f) = open_fill(state, date, &asset, p, Side::Long, cfg) {
                    fills.push(f);
                }
            }
            Err(e) => state.warn(format!("{date} {asset}: buy skipped, {e}")),
        }
    }

    for asset in sorted(&lists.neutral_list) {
        if !state.positions.contains_key(&asset) {
            continue;
        }
        match open_price(&asset) {
            Ok(p) => {
                if let Some(f) = close_fill(state, date, &asset, p, cfg) {
                    fills.push(f);
                }
            }
            Err(e) => state.warn(format!("{date} {asset}: close skipped, {e}")),
        }
    }

    for asset in sorted(&lists.sell_list) {
        if state.positions.contains_key(&asset) {
            continue; // long or short, the literal skip rule
        }
        match open_price(&asset) {
            Ok(p) => {
                if let Some(f) = open_fill(state, date, &asset, p, Side::Short, cfg) {
                    fills.push(f);
                }
            }
            Err(e) => state.warn(format!("{date} {asset}: short skipped, {e}")),
        }
    }

    fills
}

/// Append the day's equity point, valuing positions at the close and
/// carrying the last known price over gaps.
pub fn mark_to_market(
    state: &mut PortfolioState,
    close_price: &dyn Fn(&str) -> Option<Price>,
    date: NaiveDate,
) {
    let mut gap_assets = Vec::new();
    for pos in state.positions.values() {
        if close_price(&pos.asset_id).is_none() {
            gap_assets.push(pos.asset_id.clone());
        }
    }
    for asset in gap_assets {
        state.warn(format!(
            "{date} {asset}: no close price, carrying last known mark"
        ));
    }
    let equity = state.equity_at(&|a| close_price(a));
    if let Some(&(last, _)) = state.equity_curve.last() {
        debug_assert!(last < date, "equity curve dates must ascend");
    }
    // refresh marks for assets that did price today
    let assets: Vec<String> = state.positions.keys().cloned().collect();
    for asset in assets {
        if let Some(p) = close_price(&asset) {
            state.last_marks.insert(asset, p);
        }
    }
    state.equity_curve.push((date, equity));
}

/// Run the Buy&Hold benchmark: planned buys at the first open, daily
/// marks, liquidation at the last day's open. Benchmark buys are placed
/// at planned size even though commissions push cash slightly below
/// zero; the plan deploys the full capital by definition.
pub fn run_buy_and_hold(
    plan: &BenchmarkPlan,
    calendar_dates: &[NaiveDate],
    open_price: &dyn Fn(&str, NaiveDate) -> Result<Price>,
    close_price: &dyn Fn(&str, NaiveDate) -> Option<Price>,
    cfg: &ExecutionConfig,
) -> Result<(PortfolioState, Vec<Fill>)> {
    cfg.validate()?;
    let mut state = PortfolioState::new(cfg.initial_capital);
    let mut fills = Vec::new();

    for (asset, quantity) in &plan.orders {
        let price = open_price(asset, plan.entry_date)?;
        let notional = quantity * price;
        let commission = cfg.commission_rate * notional;
        state.cash -= notional + commission;
        state.positions.insert(
            asset.clone(),
            Position {
                asset_id: asset.clone(),
                side: Side::Long,
                quantity: *quantity,
                entry_price: price,
                entry_date: plan.entry_date,
            },
        );
        fills.push(Fill {
            trading_date: plan.entry_date,
            asset_id: asset.clone(),
            action: FillAction::OpenLong,
            quantity: *quantity,
            price,
            notional,
            commission,
        });
    }

    for &date in calendar_dates {
        if date < plan.entry_date {
            continue;
        }
        if date == plan.exit_date {
            let assets: Vec<String> = state.positions.keys().cloned().collect();
            for asset in assets {
                let price = open_price(&asset, date)?;
                let liquidation_cfg = ExecutionConfig {
                    commission_rate: if cfg.benchmark_liquidation_commission {
                        cfg.commission_rate
                    } else {
                        0.0
                    },
                    ..cfg.clone()
                };
                if let Some(f) = close_fill(&mut state, date, &asset, price, &liquidation_cfg) {
                    fills.push(f);
                }
            }
        }
        mark_to_market(&mut state, &|a| close_price(a, date), date);
        if date == plan.exit_date {
            break;
        }
    }

    Ok((state, fills))
}
