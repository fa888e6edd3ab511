//! The four worked experiments and their figures of merit.

pub mod chorus;
pub mod composite;
pub mod optimize;
pub mod psyche;
pub mod zq;

use serde::Serialize;

use crate::error::{Error, Result};

/// One named observable along a scan axis; `None` marks an undefined point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub name: String,
    pub values: Vec<Option<f64>>,
}

impl Series {
    /// Values with undefined points dropped, paired with their axis index.
    pub fn defined(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|v| (i, v)))
    }
}

/// Observables tabulated against a strictly increasing axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    pub axis_name: String,
    pub axis: Vec<f64>,
    pub series: Vec<Series>,
}

impl ScanResult {
    pub fn new(axis_name: impl Into<String>, axis: Vec<f64>) -> Result<Self> {
        if axis.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("scan axis must be strictly increasing"));
        }
        Ok(ScanResult {
            axis_name: axis_name.into(),
            axis,
            series: Vec::new(),
        })
    }

    pub fn push(&mut self, name: impl Into<String>, values: Vec<Option<f64>>) -> Result<()> {
        let name = name.into();
        if values.len() != self.axis.len() {
            return Err(Error::domain(format!(
                "series `{name}` has {} points for an axis of {}",
                values.len(),
                self.axis.len()
            )));
        }
        self.series.push(Series { name, values });
        Ok(())
    }

    pub fn push_dense(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        self.push(name, values.into_iter().map(Some).collect())
    }

    pub fn get(&self, name: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.name == name)
    }

    /// Series `name` with undefined points as NaN.
    pub fn values(&self, name: &str) -> Option<Vec<f64>> {
        self.get(name)
            .map(|s| s.values.iter().map(|v| v.unwrap_or(f64::NAN)).collect())
    }

    pub fn is_empty(&self) -> bool {
        self.axis.is_empty()
    }
}

/// A scalar observable on a rectangular grid; `values[row][col]` belongs to
/// `(x[col], y[row])`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridResult {
    pub x_name: String,
    pub x: Vec<f64>,
    pub y_name: String,
    pub y: Vec<f64>,
    pub value_name: String,
    pub values: Vec<Vec<f64>>,
}

impl GridResult {
    pub fn row(&self, y: f64) -> Option<&[f64]> {
        let i = self.y.iter().position(|&v| (v - y).abs() <= 1e-12 * y.abs().max(1.0))?;
        Some(&self.values[i])
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty() || self.y.is_empty()
    }
}

/// Circular variance `1 - |mean exp(i phi)|` of a set of phases.
pub fn circular_variance(phases: &[f64]) -> f64 {
    if phases.is_empty() {
        return 0.0;
    }
    let n = phases.len() as f64;
    let (s, c) = phases
        .iter()
        .fold((0.0, 0.0), |(s, c), p| (s + p.sin(), c + p.cos()));
    1.0 - (s / n).hypot(c / n)
}

/// Circular mean `arg(mean exp(i phi))` in `(-pi, pi]`.
pub fn circular_mean(phases: &[f64]) -> f64 {
    let (s, c) = phases
        .iter()
        .fold((0.0, 0.0), |(s, c), p| (s + p.sin(), c + p.cos()));
    s.atan2(c)
}

/// Circular standard deviation `sqrt(-2 ln R)` (rad), `R` the mean resultant length.
pub fn circular_std(phases: &[f64]) -> f64 {
    let r = 1.0 - circular_variance(phases);
    if r <= 0.0 {
        return f64::INFINITY;
    }
    (-2.0 * r.ln()).max(0.0).sqrt()
}

/// Largest pairwise angular distance within a set of phases, taken about
/// their circular mean (rad).
pub fn phase_spread(phases: &[f64]) -> f64 {
    if phases.is_empty() {
        return 0.0;
    }
    let mean = circular_mean(phases);
    let dev: Vec<f64> = phases.iter().map(|p| wrap(p - mean)).collect();
    let hi = dev.iter().copied().fold(f64::MIN, f64::max);
    let lo = dev.iter().copied().fold(f64::MAX, f64::min);
    hi - lo
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap(a: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// `n` offsets (Hz) evenly covering the central `fraction` of a band of width `bandwidth`.
pub fn central_band(bandwidth: f64, fraction: f64, n: usize) -> Vec<f64> {
    let half = 0.5 * bandwidth * fraction;
    crate::pulse::linspace(-half, half, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scan_axis_must_increase() {
        assert!(ScanResult::new("x", vec![0.0, 1.0, 1.0]).is_err());
        let mut s = ScanResult::new("x", vec![0.0, 1.0]).unwrap();
        assert!(s.push_dense("y", vec![1.0]).is_err());
        s.push("y", vec![Some(1.0), None]).unwrap();
        assert_eq!(s.get("y").unwrap().defined().count(), 1);
    }

    #[test]
    fn circular_statistics() {
        use std::f64::consts::PI;
        assert!(circular_variance(&[0.3; 5]).abs() < 1e-15);
        assert!((circular_variance(&[0.0, std::f64::consts::PI]) - 1.0).abs() < 1e-15);
        // branch cut does not matter
        let a = circular_variance(&[std::f64::consts::PI - 0.04, 0.04 - std::f64::consts::PI]);
        let b = circular_variance(&[0.04, -0.04]);
        assert!((a - b).abs() < 1e-12);
        assert!((phase_spread(&[3.1, -3.1]) - (2.0 * std::f64::consts::PI - 6.2)).abs() < 1e-12);
        let small = [0.01, -0.02, 0.015];
        assert!((circular_mean(&[PI - 0.1, 0.1 - PI]) - PI).abs() < 1e-12);
        let std = circular_std(&small);
        assert!(std > 0.0 && std < 0.03);
    }

    #[test]
    fn wrap_range() {
        use std::f64::consts::PI;
        assert_eq!(wrap(PI), PI);
        assert!((wrap(-PI) - PI).abs() < 1e-15);
        assert!((wrap(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
    }
}
