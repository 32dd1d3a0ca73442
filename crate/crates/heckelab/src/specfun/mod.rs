//! Numerical special functions on 1-D grids: the Dickman function, the root
//! kappa of rho(2u) = 2 log u, and the delay integral equation for beta with
//! a piecewise-constant kernel.

pub mod beta;
pub mod dickman;

use crate::error::{Error, Result};

/// Sampled function on a uniform grid with linear interpolation.
#[derive(Debug, Clone)]
pub struct GridFunction {
    pub start: f64,
    pub step: f64,
    pub samples: Vec<f64>,
    pub meta: String,
}

impl GridFunction {
    pub fn end(&self) -> f64 {
        self.start + self.step * (self.samples.len().saturating_sub(1)) as f64
    }

    pub fn eval(&self, u: f64) -> f64 {
        let t = (u - self.start) / self.step;
        if t <= 0.0 {
            return self.samples[0];
        }
        let i = t.floor() as usize;
        if i + 1 >= self.samples.len() {
            return *self.samples.last().unwrap();
        }
        let frac = t - i as f64;
        self.samples[i] * (1.0 - frac) + self.samples[i + 1] * frac
    }

    /// First index whose sample has strictly opposite sign to the previous.
    pub fn first_sign_change(&self) -> Option<usize> {
        self.samples
            .windows(2)
            .position(|w| w[0] > 0.0 && w[1] <= 0.0)
            .map(|i| i + 1)
    }

    /// `u,value` rows at 17 significant digits, for external plotting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("u,value\n");
        for (i, &v) in self.samples.iter().enumerate() {
            let u = self.start + self.step * i as f64;
            out.push_str(&format!("{:.16e},{:.16e}\n", u, v));
        }
        out
    }
}

/// Piecewise-constant kernel on [0, inf): value[i] on [breaks[i], breaks[i+1]),
/// the last value extending to infinity.
#[derive(Debug, Clone)]
pub struct StepFunction {
    breaks: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    pub fn new(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breaks.is_empty() || breaks[0] != 0.0 {
            return Err(Error::InvalidInput("breakpoints must start at 0".into()));
        }
        if breaks.len() != values.len() {
            return Err(Error::InvalidInput("one value per breakpoint".into()));
        }
        if breaks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("breakpoints must strictly increase".into()));
        }
        Ok(StepFunction { breaks, values })
    }

    pub fn constant(v: f64) -> Self {
        StepFunction { breaks: vec![0.0], values: vec![v] }
    }

    /// The capped staircase kernel: 2 on [0, 1/(M+1)), 2 cos(pi/(m+1)) on
    /// [1/(m+1), 1/m) for m = M..1, and -2 from 1 on.
    pub fn remark_alpha(m_cap: u32) -> Result<Self> {
        if m_cap < 1 {
            return Err(Error::InvalidInput("cap must be >= 1".into()));
        }
        let mut breaks = vec![0.0];
        let mut values = vec![2.0];
        for m in (1..=m_cap).rev() {
            breaks.push(1.0 / (m as f64 + 1.0));
            values.push(2.0 * (std::f64::consts::PI / (m as f64 + 1.0)).cos());
        }
        breaks.push(1.0);
        values.push(-2.0);
        Self::new(breaks, values)
    }

    pub fn eval(&self, u: f64) -> f64 {
        match self
            .breaks
            .binary_search_by(|b| b.partial_cmp(&u).unwrap())
        {
            Ok(i) => self.values[i],
            Err(0) => self.values[0], // u < 0 treated as the leading value
            Err(i) => self.values[i - 1],
        }
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}
