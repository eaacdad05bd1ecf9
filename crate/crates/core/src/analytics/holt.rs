//! Holt linear-trend (double exponential) smoothing with normal prediction
//! intervals that widen as `sqrt(h)`.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{KpiError, Result};

pub const DEFAULT_ALPHA: f64 = 0.5;
pub const DEFAULT_BETA: f64 = 0.3;
pub const DEFAULT_CONFIDENCE: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoltState {
    pub alpha: f64,
    pub beta: f64,
    pub level: f64,
    pub trend: f64,
    /// One-step-ahead errors `y_t - (level_{t-1} + trend_{t-1})` for t >= 1.
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastStep {
    pub step: usize,
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastResult {
    pub confidence: f64,
    pub z: f64,
    pub residual_std: f64,
    pub state: HoltState,
    pub steps: Vec<ForecastStep>,
}

impl HoltState {
    pub fn fit(series: &[f64], alpha: f64, beta: f64) -> Result<Self> {
        if series.len() < 3 {
            return Err(KpiError::SeriesTooShort(series.len()));
        }
        if series.iter().any(|v| !v.is_finite()) {
            return Err(KpiError::InvalidArgument("series must be finite".into()));
        }
        for (name, v) in [("alpha", alpha), ("beta", beta)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(KpiError::InvalidArgument(format!("{name} must lie in (0, 1], got {v}")));
            }
        }
        let mut level = series[0];
        let mut trend = series[1] - series[0];
        let mut residuals = Vec::with_capacity(series.len() - 1);
        for &y in &series[1..] {
            let prev = level;
            residuals.push(y - (level + trend));
            level = alpha * y + (1.0 - alpha) * (level + trend);
            trend = beta * (level - prev) + (1.0 - beta) * trend;
        }
        Ok(Self { alpha, beta, level, trend, residuals })
    }

    pub fn point_forecast(&self, h: usize) -> f64 {
        self.level + h as f64 * self.trend
    }

    /// Population standard deviation of the one-step residuals.
    pub fn residual_std(&self) -> f64 {
        let n = self.residuals.len() as f64;
        let mean = self.residuals.iter().sum::<f64>() / n;
        (self.residuals.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n).sqrt()
    }
}

/// Two-sided standard-normal quantile for `confidence`, e.g. 1.959964 at 0.95.
pub fn normal_quantile(confidence: f64) -> Result<f64> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(KpiError::InvalidArgument(format!("confidence must lie in (0, 1), got {confidence}")));
    }
    let normal = Normal::standard();
    Ok(normal.inverse_cdf(0.5 + confidence / 2.0))
}

pub fn holt_fit_forecast(
    series: &[f64],
    horizon: usize,
    alpha: f64,
    beta: f64,
    confidence: f64,
) -> Result<ForecastResult> {
    if horizon == 0 {
        return Err(KpiError::InvalidArgument("horizon must be at least 1".into()));
    }
    let z = normal_quantile(confidence)?;
    let state = HoltState::fit(series, alpha, beta)?;
    let s = state.residual_std();
    let steps = (1..=horizon)
        .map(|h| {
            let point = state.point_forecast(h);
            let half = z * s * (h as f64).sqrt();
            ForecastStep { step: h, point, lower: point - half, upper: point + half }
        })
        .collect();
    Ok(ForecastResult { confidence, z, residual_std: s, state, steps })
}
