//! Small least-squares helpers shared by the experiment modules: straight
//! lines, line intersections, log-log power laws, and moving averages.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("abscissa values are all equal; slope is undefined")]
    DegenerateAbscissa,
    #[error("mismatched coordinate lengths: {xs} vs {ys}")]
    LengthMismatch { xs: usize, ys: usize },
    #[error("power-law fit needs strictly positive values, found {value} at t={t}")]
    NonPositiveSample { t: f64, value: f64 },
    #[error("fitted lines are parallel; no crossing")]
    ParallelLines,
    #[error("window [{lo}, {hi}] selects fewer than {needed} samples")]
    EmptyWindow { lo: f64, hi: f64, needed: usize },
}

/// y = slope * x + intercept, by ordinary least squares.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub slope: f64,
    pub intercept: f64,
}

impl Line {
    pub fn eval(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<Line, FitError> {
    if xs.len() != ys.len() {
        return Err(FitError::LengthMismatch {
            xs: xs.len(),
            ys: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(FitError::TooFewPoints {
            needed: 2,
            got: xs.len(),
        });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return Err(FitError::DegenerateAbscissa);
    }
    let slope = sxy / sxx;
    Ok(Line {
        slope,
        intercept: my - slope * mx,
    })
}

/// Abscissa where two fitted lines meet.
pub fn crossing(a: &Line, b: &Line) -> Result<f64, FitError> {
    let ds = a.slope - b.slope;
    if ds.abs() < 1e-12 {
        return Err(FitError::ParallelLines);
    }
    Ok((b.intercept - a.intercept) / ds)
}

/// y = amplitude * t^exponent, fitted by least squares in log-log space.
#[derive(Debug, Clone, Copy)]
pub struct PowerLaw {
    pub exponent: f64,
    pub amplitude: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
}

impl PowerLaw {
    pub fn eval(&self, t: f64) -> f64 {
        self.amplitude * t.powf(self.exponent)
    }
}

/// Fit a power law to the samples with t in [t_min, t_max] (inclusive).
pub fn fit_power_law(ts: &[f64], ys: &[f64], t_min: f64, t_max: f64) -> Result<PowerLaw, FitError> {
    if ts.len() != ys.len() {
        return Err(FitError::LengthMismatch {
            xs: ts.len(),
            ys: ys.len(),
        });
    }
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for (&t, &y) in ts.iter().zip(ys) {
        if t < t_min || t > t_max {
            continue;
        }
        if y <= 0.0 || t <= 0.0 {
            return Err(FitError::NonPositiveSample { t, value: y });
        }
        lx.push(t.ln());
        ly.push(y.ln());
    }
    if lx.len() < 3 {
        return Err(FitError::EmptyWindow {
            lo: t_min,
            hi: t_max,
            needed: 3,
        });
    }
    let line = fit_line(&lx, &ly)?;
    let mut ss = 0.0;
    for (&x, &y) in lx.iter().zip(&ly) {
        let r = y - line.eval(x);
        ss += r * r;
    }
    Ok(PowerLaw {
        exponent: line.slope,
        amplitude: line.intercept.exp(),
        residual: (ss / lx.len() as f64).sqrt(),
    })
}

/// Centered moving average with symmetric shrinking at the edges.
pub fn moving_average(values: &[f64], width: usize) -> Vec<f64> {
    let half = width.max(1) / 2;
    (0..values.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(values.len() - 1);
            let span = &values[lo..=hi];
            span.iter().sum::<f64>() / span.len() as f64
        })
        .collect()
}

/// Sample mean and standard deviation (n-1 normalization; std is 0 for n < 2).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}
