//! Risk/return metric suite: returns, drawdown, Sharpe/Sortino/Calmar,
//! volatility, historical VaR, alpha, and periodic return series.
//!
//! The numeric kernel is generic over the scalar type; the crate-root
//! aliases pin f64 for the rest of the pipeline.

use chrono::{Datelike, NaiveDate};
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Trading periods per year used for annualization.
pub const DEFAULT_PERIODS_PER_YEAR: f64 = 252.0;

pub fn mean<F: Float>(xs: &[F]) -> F {
    let n = F::from(xs.len()).unwrap();
    xs.iter().fold(F::zero(), |a, &x| a + x) / n
}

/// Sample (N-1) standard deviation.
pub fn sample_stdev<F: Float>(xs: &[F]) -> F {
    let m = mean(xs);
    let n = F::from(xs.len() - 1).unwrap();
    let ss = xs.iter().fold(F::zero(), |a, &x| a + (x - m) * (x - m));
    (ss / n).sqrt()
}

/// Daily returns r_i = equity_i / equity_{i-1} - 1.
pub fn daily_returns<F: Float>(equity: &[F]) -> Vec<F> {
    equity
        .windows(2)
        .map(|w| w[1] / w[0] - F::one())
        .collect()
}

/// Simple return over the whole horizon, in percent.
pub fn cumulative_return<F: Float>(v_e: F, v_b: F) -> Result<F> {
    if v_b <= F::zero() {
        return Err(Error::Domain("beginning value must be > 0".into()));
    }
    Ok((v_e - v_b) / v_b * F::from(100.0).unwrap())
}

/// One-year simple return including income, in percent.
pub fn annual_return<F: Float>(v_e: F, v_b: F, v_i: F) -> Result<F> {
    if v_b <= F::zero() {
        return Err(Error::Domain("beginning value must be > 0".into()));
    }
    Ok((v_e - v_b + v_i) / v_b * F::from(100.0).unwrap())
}

/// Compound annual growth rate over n years, in percent.
pub fn annual_compound_return<F: Float>(v_e: F, v_b: F, n: F) -> Result<F> {
    if v_b <= F::zero() || n <= F::zero() {
        return Err(Error::Domain("beginning value and years must be > 0".into()));
    }
    if v_e <= F::zero() {
        return Err(Error::Domain("ending value must be > 0".into()));
    }
    Ok(((v_e / v_b).powf(F::one() / n) - F::one()) * F::from(100.0).unwrap())
}

/// Streaming max drawdown: min over troughs of (V_t - V_p)/V_p * 100
/// against the running peak. Result is <= 0.
pub fn max_drawdown<F: Float>(equity: &[F]) -> F {
    let mut peak = F::neg_infinity();
    let mut worst = F::zero();
    for &v in equity {
        if v > peak {
            peak = v;
        }
        let dd = (v - peak) / peak;
        if dd < worst {
            worst = dd;
        }
    }
    worst * F::from(100.0).unwrap()
}

/// (R_p - R_f) / |mdd|; positive excess return over a drawdown gives a
/// positive ratio. None when there was no drawdown.
pub fn calmar<F: Float>(r_p: F, r_f: F, mdd: F) -> Option<F> {
    if mdd == F::zero() {
        None
    } else {
        Some((r_p - r_f) / mdd.abs())
    }
}

/// Annualized Sharpe: (mean(r)*T - R_f) / (stdev(r)*sqrt(T)), sample
/// standard deviation, R_f annual. None when variance is zero.
pub fn sharpe<F: Float>(returns: &[F], annual_risk_free: F, periods_per_year: F) -> Option<F> {
    if returns.len() < 2 {
        return None;
    }
    let sd = sample_stdev(returns);
    if sd == F::zero() {
        return None;
    }
    let excess = mean(returns) * periods_per_year - annual_risk_free;
    Some(excess / (sd * periods_per_year.sqrt()))
}

/// Downside deviation: sqrt((1/N) * sum(min(r_i - MAR, 0)^2)) with
/// MAR = annual_rate / periods_per_year.
pub fn downside_deviation<F: Float>(returns: &[F], annual_risk_free: F, periods_per_year: F) -> F {
    let mar = annual_risk_free / periods_per_year;
    let n = F::from(returns.len()).unwrap();
    let ss = returns.iter().fold(F::zero(), |a, &r| {
        let d = (r - mar).min(F::zero());
        a + d * d
    });
    (ss / n).sqrt()
}

/// Annualized Sortino. None when no return falls below the MAR.
pub fn sortino<F: Float>(returns: &[F], annual_risk_free: F, periods_per_year: F) -> Option<F> {
    if returns.len() < 2 {
        return None;
    }
    let mar = annual_risk_free / periods_per_year;
    if !returns.iter().any(|&r| r < mar) {
        return None;
    }
    let sd = downside_deviation(returns, annual_risk_free, periods_per_year);
    let excess = mean(returns) * periods_per_year - annual_risk_free;
    Some(excess / (sd * periods_per_year.sqrt()))
}

/// stdev(r) * sqrt(T), in percent.
pub fn annual_volatility<F: Float>(returns: &[F], periods_per_year: F) -> Option<F> {
    if returns.len() < 2 {
        return None;
    }
    Some(sample_stdev(returns) * periods_per_year.sqrt() * F::from(100.0).unwrap())
}

/// Empirical-CDF percentile with linear interpolation: position h = n*p
/// (1-based); integer h picks the h-th order statistic, otherwise the
/// value interpolates between neighbours.
pub fn percentile<F: Float>(sorted: &[F], p: F) -> F {
    let n = F::from(sorted.len()).unwrap();
    let h = n * p;
    let lo = h.floor();
    if lo < F::one() {
        return sorted[0];
    }
    let idx = lo.to_f64().unwrap() as usize - 1;
    if idx + 1 >= sorted.len() {
        return sorted[sorted.len() - 1];
    }
    let frac = h - lo;
    sorted[idx] + frac * (sorted[idx + 1] - sorted[idx])
}

/// Historical-simulation 95% daily VaR: magnitude of the 5th percentile
/// of the daily-return distribution, floored at zero, in percent.
/// None below 20 observations.
pub fn var_95_daily<F: Float>(returns: &[F]) -> Option<F> {
    if returns.len() < 20 {
        return None;
    }
    let mut sorted = returns.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q = percentile(&sorted, F::from(0.05).unwrap());
    Some((-q).max(F::zero()) * F::from(100.0).unwrap())
}

/// Strategy cumulative return minus benchmark cumulative return, both
/// in percent over the identical date range.
pub fn alpha<F: Float>(strategy_cumulative: F, benchmark_cumulative: F) -> F {
    strategy_cumulative - benchmark_cumulative
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Period {
    Month,
    Year,
}

/// Compound return per calendar period, anchored at the last equity point
/// on or before each period boundary. The leading partial period (curve
/// start to first boundary) and trailing partial period are included so
/// the product of (1 + r) telescopes to V_e/V_b.
pub fn periodic_compound_returns(
    curve: &[(NaiveDate, f64)],
    period: Period,
) -> Vec<(NaiveDate, f64)> {
    if curve.len() < 2 {
        return Vec::new();
    }
    let period_key = |d: NaiveDate| match period {
        Period::Month => (d.year(), d.month()),
        Period::Year => (d.year(), 0),
    };
    let mut anchors: Vec<(NaiveDate, f64)> = vec![curve[0]];
    for w in curve.windows(2) {
        if period_key(w[0].0) != period_key(w[1].0) && anchors.last().unwrap().0 != w[0].0 {
            // w[0] is the last point on or before the boundary
            anchors.push(w[0]);
        }
    }
    let last = *curve.last().unwrap();
    if anchors.last().unwrap().0 != last.0 {
        anchors.push(last);
    }
    anchors
        .windows(2)
        .map(|w| (w[1].0, w[1].1 / w[0].1 - 1.0))
        .collect()
}

/// Years elapsed between two dates, in Julian years.
pub fn years_between(start: NaiveDate, end: NaiveDate) -> f64 {
    (end - start).num_days() as f64 / 365.25
}

/// Arithmetic mean of calendar-year simple returns with partial years
/// pro-rated: sum of per-year simple returns divided by elapsed years.
/// Per-year income (dividends) enters the matching year's numerator.
pub fn annualized_simple_return(
    curve: &[(NaiveDate, f64)],
    income_by_year: &dyn Fn(i32) -> f64,
) -> Result<f64> {
    if curve.len() < 2 {
        return Err(Error::Domain("equity curve too short".into()));
    }
    let n_years = years_between(curve[0].0, curve.last().unwrap().0);
    if n_years <= 0.0 {
        return Err(Error::Domain("horizon spans no time".into()));
    }
    let mut sum = 0.0;
    let mut seg_start = curve[0];
    for w in curve.windows(2) {
        let year_changed = w[0].0.year() != w[1].0.year();
        if year_changed {
            sum += annual_return(w[0].1, seg_start.1, income_by_year(w[0].0.year()))? / 100.0;
            seg_start = w[0];
        }
    }
    let last = *curve.last().unwrap();
    if last.0 != seg_start.0 {
        sum += annual_return(last.1, seg_start.1, income_by_year(last.0.year()))? / 100.0;
    }
    Ok(sum / n_years * 100.0)
}

/// A metric that is either a value or undefined with a reason code.
/// Undefined serializes as a null value plus the reason, never as zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricValue {
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl MetricValue {
    pub fn defined(v: f64) -> Self {
        MetricValue {
            value: Some(v),
            reason: None,
        }
    }

    pub fn undefined(reason: &str) -> Self {
        MetricValue {
            value: None,
            reason: Some(reason.to_string()),
        }
    }

    pub fn from_option(v: Option<f64>, reason: &str) -> Self {
        match v {
            Some(v) => Self::defined(v),
            None => Self::undefined(reason),
        }
    }

    fn csv_cell(&self) -> String {
        match &self.value {
            Some(v) => format!("{v}"),
            None => format!("UNDEFINED({})", self.reason.as_deref().unwrap_or("unknown")),
        }
    }
}

/// Annualization and risk-free conventions, echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricsConfig {
    pub periods_per_year: f64,
    pub annual_risk_free_rate: f64,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig {
            periods_per_year: DEFAULT_PERIODS_PER_YEAR,
            annual_risk_free_rate: 0.0,
        }
    }
}

/// The Table-1 shaped report: nine metrics plus alpha.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub annual_return: MetricValue,
    pub annual_compound_return: MetricValue,
    pub annual_cumulative_return: MetricValue,
    pub calmar: MetricValue,
    pub sharpe: MetricValue,
    pub sortino: MetricValue,
    pub mdd: MetricValue,
    pub annual_volatility: MetricValue,
    pub var_95_daily: MetricValue,
    pub alpha: MetricValue,
    pub conventions: MetricsConfig,
}

impl MetricsReport {
    /// Compute the full suite from a dated equity curve. Alpha starts
    /// undefined; comparisons fill it in against their benchmark.
    pub fn from_equity_curve(
        curve: &[(NaiveDate, f64)],
        income_by_year: &dyn Fn(i32) -> f64,
        cfg: &MetricsConfig,
    ) -> Result<Self> {
        if curve.len() < 2 {
            return Err(Error::Domain(
                "equity curve needs at least two points".into(),
            ));
        }
        let values: Vec<f64> = curve.iter().map(|&(_, v)| v).collect();
        let returns = daily_returns(&values);
        let v_b = values[0];
        let v_e = *values.last().unwrap();
        let n_years = years_between(curve[0].0, curve.last().unwrap().0);
        let t = cfg.periods_per_year;
        let rf = cfg.annual_risk_free_rate;

        let cumulative = cumulative_return(v_e, v_b)?;
        let mdd_v = max_drawdown(&values);
        let annual = annualized_simple_return(curve, income_by_year)?;

        Ok(MetricsReport {
            annual_return: MetricValue::defined(annual),
            annual_compound_return: MetricValue::defined(annual_compound_return(
                v_e, v_b, n_years,
            )?),
            annual_cumulative_return: MetricValue::defined(cumulative),
            calmar: MetricValue::from_option(calmar(annual, rf * 100.0, mdd_v), "no-drawdown"),
            sharpe: MetricValue::from_option(sharpe(&returns, rf, t), "zero-volatility"),
            sortino: MetricValue::from_option(sortino(&returns, rf, t), "no-downside"),
            mdd: MetricValue::defined(mdd_v),
            annual_volatility: MetricValue::from_option(
                annual_volatility(&returns, t),
                "insufficient-data",
            ),
            var_95_daily: MetricValue::from_option(var_95_daily(&returns), "insufficient-data"),
            alpha: MetricValue::undefined("no-benchmark"),
            conventions: cfg.clone(),
        })
    }

    /// CSV rows in Table-1 order plus the alpha row.
    pub fn to_csv(&self) -> String {
        let rows = [
            ("Annual Return", &self.annual_return),
            ("Annual Compound Return", &self.annual_compound_return),
            ("Annual Cumulative Return", &self.annual_cumulative_return),
            ("Calmar Ratio", &self.calmar),
            ("Sharpe Ratio", &self.sharpe),
            ("Sortino Ratio", &self.sortino),
            ("MDD", &self.mdd),
            ("Annual Volatility", &self.annual_volatility),
            ("95% Daily VaR", &self.var_95_daily),
            ("Alpha", &self.alpha),
        ];
        let mut out = String::from("metric,value\n");
        for (name, v) in rows {
            out.push_str(name);
            out.push(',');
            out.push_str(&v.csv_cell());
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // O(n^2) brute force over all ordered (peak, trough) pairs
    fn mdd_brute_force(equity: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..equity.len() {
            for j in i..equity.len() {
                let dd = (equity[j] - equity[i]) / equity[i];
                if dd < worst {
                    worst = dd;
                }
            }
        }
        worst * 100.0
    }

    #[test]
    fn annual_return_direct_evaluation() {
        // (108000 - 100000 + 2000) / 100000 = 10%
        assert!((annual_return(108_000.0, 100_000.0, 2_000.0).unwrap() - 10.0).abs() < 1e-12);
        assert_eq!(annual_return(100.0, 100.0, 0.0).unwrap(), 0.0);
        assert!(annual_return(100.0, 100.0, 5.0).unwrap() > 0.0);
        assert!(annual_return(100.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn compound_return_closed_forms() {
        // sqrt(2) - 1
        let got = annual_compound_return(200.0, 100.0, 2.0).unwrap();
        assert!((got - ((2.0f64).sqrt() - 1.0) * 100.0).abs() < 1e-9);
        assert!((got - 41.4214).abs() < 1e-4);
        assert_eq!(annual_compound_return(100.0, 100.0, 3.0).unwrap(), 0.0);
        // n = 1 reduces to simple return
        let simple = cumulative_return(130.0, 100.0).unwrap();
        let compound = annual_compound_return(130.0, 100.0, 1.0).unwrap();
        assert!((simple - compound).abs() < 1e-9);
    }

    #[test]
    fn cumulative_return_table_values() {
        // V_e back-solved from a 50.63% cumulative return
        let v_e = 300_000.0 * 1.5063;
        assert!((cumulative_return(v_e, 300_000.0).unwrap() - 50.63).abs() < 1e-9);
        assert_eq!(cumulative_return(100.0, 100.0).unwrap(), 0.0);
        assert_eq!(cumulative_return(50.0, 100.0).unwrap(), -50.0);
    }

    #[test]
    fn max_drawdown_examples() {
        assert_eq!(max_drawdown(&[100.0, 110.0, 120.0]), 0.0);
        let got = max_drawdown(&[100.0, 120.0, 90.0, 130.0]);
        assert!((got - (-25.0)).abs() < 1e-12);
        assert_eq!(got, mdd_brute_force(&[100.0, 120.0, 90.0, 130.0]));
    }

    #[test]
    fn calmar_sign_convention() {
        assert!((calmar(10.0, 0.0, -25.0).unwrap() - 0.4).abs() < 1e-12);
        assert_eq!(calmar(5.0, 5.0, -10.0).unwrap(), 0.0);
        assert_eq!(calmar(10.0, 0.0, 0.0), None);
    }

    #[test]
    fn sharpe_cases() {
        let r = [0.01, -0.01, 0.01, -0.01];
        let got = sharpe(&r, 0.0, 252.0).unwrap();
        assert!(got.abs() < 1e-12, "zero mean gives zero Sharpe");
        assert_eq!(sharpe(&[0.01, 0.01, 0.01], 0.0, 252.0), None);

        // two-pass reference oracle on a random-ish series
        let r: Vec<f64> = (0..100)
            .map(|i| ((i * 2654435761u64 as usize) % 1000) as f64 / 1000.0 * 0.02 - 0.01)
            .collect();
        let m: f64 = r.iter().sum::<f64>() / r.len() as f64;
        let sd = (r.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (r.len() - 1) as f64).sqrt();
        let expect = (m * 252.0) / (sd * 252.0f64.sqrt());
        assert!((sharpe(&r, 0.0, 252.0).unwrap() - expect).abs() < 1e-9);
    }

    #[test]
    fn sortino_hand_evaluated() {
        let r = [0.02, -0.01, 0.03, -0.02];
        let sd = ((0.01f64.powi(2) + 0.02f64.powi(2)) / 4.0).sqrt();
        let expect = (r.iter().sum::<f64>() / 4.0 * 252.0) / (sd * 252.0f64.sqrt());
        assert!((sortino(&r, 0.0, 252.0).unwrap() - expect).abs() < 1e-9);
        // all returns at or above MAR
        assert_eq!(sortino(&[0.01, 0.02, 0.0], 0.0, 252.0), None);
    }

    #[test]
    fn volatility_golden_and_homogeneity() {
        // returns engineered to sample stdev exactly 1%
        let r = [0.01, -0.01];
        let sd = sample_stdev(&r);
        let scaled: Vec<f64> = r.iter().map(|x| x / sd * 0.01).collect();
        let got = annual_volatility(&scaled, 252.0).unwrap();
        assert!((got - 15.8745).abs() < 1e-4, "{got}");
        assert_eq!(annual_volatility(&[0.01, 0.01, 0.01], 252.0), Some(0.0));
        let doubled: Vec<f64> = scaled.iter().map(|x| x * 2.0).collect();
        assert!((annual_volatility(&doubled, 252.0).unwrap() - 2.0 * got).abs() < 1e-9);
    }

    #[test]
    fn var_order_statistic_construction() {
        // 100 returns, five worst all -3%: n*p = 5 picks the 5th order statistic
        let mut r = vec![0.01f64; 95];
        r.extend([-0.03; 5]);
        assert!((var_95_daily(&r).unwrap() - 3.0).abs() < 1e-12);
        // never negative
        let pos = vec![0.01f64; 50];
        assert!(var_95_daily(&pos).unwrap() >= 0.0);
        assert_eq!(var_95_daily(&[0.01; 5]), None);
    }

    #[test]
    fn var_matches_sort_based_oracle() {
        let r: Vec<f64> = (0..251)
            .map(|i| (((i * 48271) % 1009) as f64 / 1009.0 - 0.5) * 0.04)
            .collect();
        let got = var_95_daily(&r).unwrap();
        // independent oracle: full sort, 1-based position h = n * 0.05
        let mut sorted = r.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let h = sorted.len() as f64 * 0.05;
        let idx = h.floor() as usize - 1;
        let frac = h - h.floor();
        let q = sorted[idx] + frac * (sorted[idx + 1] - sorted[idx]);
        assert!((got - (-q).max(0.0) * 100.0).abs() < 1e-12);
    }

    #[test]
    fn alpha_reference_differences() {
        assert!((alpha(50.63, 26.96) - 23.67).abs() < 1e-9);
        assert!((alpha(15.49, 26.96) - (-11.47)).abs() < 1e-9);
        assert_eq!(alpha(10.0, 10.0), 0.0);
    }

    fn d(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    #[test]
    fn periodic_returns_two_months() {
        let curve = vec![
            (d("2020-01-31"), 100.0),
            (d("2020-02-29"), 110.0),
            (d("2020-03-31"), 121.0),
        ];
        let monthly = periodic_compound_returns(&curve, Period::Month);
        assert_eq!(monthly.len(), 2);
        assert!((monthly[0].1 - 0.10).abs() < 1e-12);
        assert!((monthly[1].1 - 0.10).abs() < 1e-12);
    }

    #[test]
    fn periodic_returns_flat_curve() {
        let curve: Vec<(NaiveDate, f64)> = (1..=90)
            .map(|i| (d("2020-01-01") + chrono::Duration::days(i), 100.0))
            .collect();
        for (_, r) in periodic_compound_returns(&curve, Period::Month) {
            assert_eq!(r, 0.0);
        }
    }

    #[test]
    fn annualized_simple_return_single_year() {
        let curve = vec![(d("2020-01-01"), 100_000.0), (d("2020-12-31"), 110_000.0)];
        let got = annualized_simple_return(&curve, &|_| 0.0).unwrap();
        // one (nearly full) year, 10% simple return pro-rated over 365/365.25 years
        let expect = 10.0 / ((365.0) / 365.25);
        assert!((got - expect).abs() < 1e-9, "{got} vs {expect}");
    }

    #[test]
    fn report_undefined_serializes_as_null() {
        let flat: Vec<(NaiveDate, f64)> = (0..30)
            .map(|i| (d("2020-01-01") + chrono::Duration::days(i), 100.0))
            .collect();
        let report =
            MetricsReport::from_equity_curve(&flat, &|_| 0.0, &MetricsConfig::default()).unwrap();
        assert_eq!(report.sharpe.value, None);
        assert_eq!(report.sharpe.reason.as_deref(), Some("zero-volatility"));
        let json = serde_json::to_value(&report).unwrap();
        assert!(json["sharpe"]["value"].is_null());
        assert_eq!(json["sharpe"]["reason"], "zero-volatility");
        // csv carries the reason too
        assert!(report.to_csv().contains("UNDEFINED(zero-volatility)"));
    }

    proptest! {
        // streaming equals brute force
        #[test]
        fn mdd_oracle_equivalence(steps in proptest::collection::vec(-0.05f64..0.05, 2..60)) {
            let mut equity = vec![100.0f64];
            for s in steps {
                let next = equity.last().unwrap() * (1.0 + s);
                equity.push(next);
            }
            let fast = max_drawdown(&equity);
            let slow = mdd_brute_force(&equity);
            prop_assert!((fast - slow).abs() < 1e-12);
        }

        // telescoping: product of (1 + r_i) = V_e / V_b
        #[test]
        fn telescoping_identity(steps in proptest::collection::vec(-0.05f64..0.05, 2..200)) {
            let mut equity = vec![100.0f64];
            for s in &steps {
                let next = equity.last().unwrap() * (1.0 + s);
                equity.push(next);
            }
            let returns = daily_returns(&equity);
            let product: f64 = returns.iter().map(|r| 1.0 + r).product();
            let ratio = equity.last().unwrap() / equity[0];
            prop_assert!((product / ratio - 1.0).abs() < 1e-9);
        }

        // ratio metrics are invariant under uniform scaling of the curve
        #[test]
        fn scale_invariance(
            steps in proptest::collection::vec(-0.05f64..0.05, 25..80),
            scale in 0.1f64..10.0,
        ) {
            let mut equity = vec![100.0f64];
            for s in &steps {
                let next = equity.last().unwrap() * (1.0 + s);
                equity.push(next);
            }
            let scaled: Vec<f64> = equity.iter().map(|v| v * scale).collect();
            let r1 = daily_returns(&equity);
            let r2 = daily_returns(&scaled);
            prop_assert!((max_drawdown(&equity) - max_drawdown(&scaled)).abs() < 1e-9);
            if let (Some(a), Some(b)) = (sharpe(&r1, 0.0, 252.0), sharpe(&r2, 0.0, 252.0)) {
                prop_assert!((a - b).abs() < 1e-6);
            }
            if let (Some(a), Some(b)) = (var_95_daily(&r1), var_95_daily(&r2)) {
                prop_assert!((a - b).abs() < 1e-6);
            }
            if let (Some(a), Some(b)) = (annual_volatility(&r1, 252.0), annual_volatility(&r2, 252.0)) {
                prop_assert!((a - b).abs() < 1e-6);
            }
        }

        // Sortino magnitude dominates Sharpe when downside deviation is smaller
        #[test]
        fn sortino_vs_sharpe_inequality(steps in proptest::collection::vec(-0.03f64..0.04, 30..100)) {
            let mut equity = vec![100.0f64];
            for s in &steps {
                let next = equity.last().unwrap() * (1.0 + s);
                equity.push(next);
            }
            let r = daily_returns(&equity);
            let total_sd = sample_stdev(&r);
            let down_sd = downside_deviation(&r, 0.0, 252.0);
            if let (Some(sh), Some(so)) = (sharpe(&r, 0.0, 252.0), sortino(&r, 0.0, 252.0)) {
                if down_sd < total_sd && down_sd > 0.0 {
                    prop_assert!(so.abs() >= sh.abs() - 1e-9);
                }
            }
        }

        // monthly product reproduces the yearly growth factor
        #[test]
        fn monthly_telescopes_to_annual(steps in proptest::collection::vec(-0.02f64..0.02, 240..260)) {
            let start = d("2020-01-02");
            let mut curve = vec![(start, 100_000.0f64)];
            for (i, s) in steps.iter().enumerate() {
                let prev = curve.last().unwrap().1;
                curve.push((start + chrono::Duration::days(i as i64 + 1), prev * (1.0 + s)));
            }
            let monthly = periodic_compound_returns(&curve, Period::Month);
            let product: f64 = monthly.iter().map(|(_, r)| 1.0 + r).product();
            let ratio = curve.last().unwrap().1 / curve[0].1;
            prop_assert!((product / ratio - 1.0).abs() < 1e-12);
        }
    }
}
