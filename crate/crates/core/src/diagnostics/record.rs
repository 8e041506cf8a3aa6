use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

use super::sweep::SweepRow;

/// Labeled time series with strictly increasing times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub label: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl Series {
    pub fn new(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            times: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn from_parts(label: impl Into<String>, times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let mut s = Self::new(label);
        for (t, v) in times.into_iter().zip(values) {
            s.push(t, v)?;
        }
        Ok(s)
    }

    pub fn push(&mut self, t: f64, v: f64) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if !(t > last) {
                return Err(invalid(format!(
                    "series '{}' times must increase: {t} after {last}",
                    self.label
                )));
            }
        }
        self.times.push(t);
        self.values.push(v);
        Ok(())
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Everything a diagnostics pass produced, with the `ε₀` used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub eps0: f64,
    pub series: Vec<Series>,
    pub cylinders: Vec<SweepRow>,
}

impl DiagnosticsRecord {
    pub fn new(eps0: f64) -> Self {
        Self {
            eps0,
            series: Vec::new(),
            cylinders: Vec::new(),
        }
    }

    pub fn series(&self, label: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.label == label)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_rejects_non_increasing_times() {
        let mut s = Series::new("x");
        s.push(0.0, 1.0).unwrap();
        s.push(0.5, 2.0).unwrap();
        assert!(s.push(0.5, 3.0).is_err());
        assert_eq!(s.max(), 2.0);
        let mut r = DiagnosticsRecord::new(0.05);
        r.series.push(s);
        assert!(r.series("x").is_some());
    }
}
