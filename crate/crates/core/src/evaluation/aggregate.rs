use serde::{Deserialize, Serialize};

use super::EvalError;

/// Mean and sample standard deviation of one metric over repeated runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunAggregate {
    pub metric_name: String,
    pub mean: f64,
    pub std: f64,
    pub n_runs: usize,
    pub values: Vec<f64>,
}

/// Uses the n−1 denominator; a single run has std 0.
pub fn aggregate_runs(values: &[f64], name: &str) -> Result<RunAggregate, EvalError> {
    if values.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = if n == 1 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    };
    Ok(RunAggregate { metric_name: name.to_string(), mean, std, n_runs: n, values: values.to_vec() })
}
