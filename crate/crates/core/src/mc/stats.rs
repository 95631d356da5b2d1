use serde::{Deserialize, Serialize};

/// Neumaier-compensated sum; the result does not depend on how the caller
/// partitioned the work that produced `values`.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Sample statistics of a per-path quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub std: f64,
    /// `std / sqrt(n)`
    pub std_error: f64,
    pub max_abs: f64,
}

pub fn summarize(values: &[f64]) -> Summary {
    let n = values.len();
    if n == 0 {
        return Summary {
            n,
            mean: f64::NAN,
            std: f64::NAN,
            std_error: f64::NAN,
            max_abs: f64::NAN,
        };
    }
    let mean = compensated_sum(values.iter().copied()) / n as f64;
    let var = if n > 1 {
        compensated_sum(values.iter().map(|v| (v - mean) * (v - mean))) / (n - 1) as f64
    } else {
        0.0
    };
    let std = var.sqrt();
    Summary {
        n,
        mean,
        std,
        std_error: std / (n as f64).sqrt(),
        max_abs: values.iter().fold(0.0, |m, v| m.max(v.abs())),
    }
}

/// Monte Carlo estimate of a scalar with its standard error and a reference value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
    pub target: f64,
}

impl Estimate {
    /// `|mean - target|` measured in standard errors.
    pub fn z_score(&self) -> f64 {
        (self.mean - self.target).abs() / self.std_error
    }
}
