//! Regression evaluation of a trained network on a test set: per-output
//! MSE, NMSE, MAE, absolute-error extrema and Pearson correlation, plus the
//! half-adder rounding check.

use crate::dataset::Dataset;
use crate::error::{CanfisError, Result};
use crate::network::CanfisNetwork;

/// Regression statistics for one output channel.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OutputMetrics {
    pub mse: f64,
    /// MSE divided by the population variance of the desired values.
    pub nmse: f64,
    pub mae: f64,
    pub min_abs_error: f64,
    pub max_abs_error: f64,
    /// Pearson linear correlation between desired and actual.
    pub r: f64,
}

/// Statistics for both outputs (sum and carry).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PerformanceRecord {
    pub sum: OutputMetrics,
    pub carry: OutputMetrics,
}

impl PerformanceRecord {
    pub fn output(&self, index: usize) -> &OutputMetrics {
        if index == 0 {
            &self.sum
        } else {
            &self.carry
        }
    }

    /// Serializes as CSV with one row per metric and one column per output.
    pub fn to_csv_string(&self) -> String {
        let rows: [(&str, fn(&OutputMetrics) -> f64); 6] = [
            ("mse", |m| m.mse),
            ("nmse", |m| m.nmse),
            ("mae", |m| m.mae),
            ("min_abs_error", |m| m.min_abs_error),
            ("max_abs_error", |m| m.max_abs_error),
            ("r", |m| m.r),
        ];
        let mut out = String::from("metric,s,c\n");
        for (name, get) in rows {
            out.push_str(&format!("{},{},{}\n", name, get(&self.sum), get(&self.carry)));
        }
        out
    }
}

/// One test sample with desired and actual outputs.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TestingRecord {
    pub x: f64,
    pub y: f64,
    pub desired_s: f64,
    pub desired_c: f64,
    pub output_s: f64,
    pub output_c: f64,
}

/// Serializes testing records as CSV in the
/// `x,y,desired_s,desired_c,output_s,output_c` column order.
pub fn testing_records_to_csv(records: &[TestingRecord]) -> String {
    let mut out = String::from("x,y,desired_s,desired_c,output_s,output_c\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.x, r.y, r.desired_s, r.desired_c, r.output_s, r.output_c
        ));
    }
    out
}

/// Per-sample outcome of the rounding check.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FidelityRow {
    pub rounded_s: u8,
    pub rounded_c: u8,
    pub s_ok: bool,
    pub c_ok: bool,
}

/// Population variance (divide by N, not N-1).
pub fn population_variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
}

/// Pearson product-moment correlation coefficient.
pub fn pearson_r(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(CanfisError::Dimension {
            expected: a.len(),
            actual: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(CanfisError::Data(
            "correlation needs at least 2 points".into(),
        ));
    }
    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    let mut sab = 0.0;
    for (&va, &vb) in a.iter().zip(b) {
        let da = va - mean_a;
        let db = vb - mean_b;
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(CanfisError::CorrelationUndefined {
            output: "constant series".into(),
        });
    }
    Ok(sab / (saa * sbb).sqrt())
}

fn output_metrics(desired: &[f64], actual: &[f64], label: &str) -> Result<OutputMetrics> {
    let n = desired.len() as f64;
    let mut sq_sum = 0.0;
    let mut abs_sum = 0.0;
    let mut min_abs = f64::INFINITY;
    let mut max_abs = 0.0f64;
    for (&d, &a) in desired.iter().zip(actual) {
        let e = d - a;
        sq_sum += e * e;
        abs_sum += e.abs();
        min_abs = min_abs.min(e.abs());
        max_abs = max_abs.max(e.abs());
    }
    let mse = sq_sum / n;
    let variance = population_variance(desired);
    if variance == 0.0 {
        return Err(CanfisError::CorrelationUndefined {
            output: label.into(),
        });
    }
    let r = pearson_r(desired, actual).map_err(|e| match e {
        CanfisError::CorrelationUndefined { .. } => CanfisError::CorrelationUndefined {
            output: label.into(),
        },
        other => other,
    })?;
    Ok(OutputMetrics {
        mse,
        nmse: mse / variance,
        mae: abs_sum / n,
        min_abs_error: min_abs,
        max_abs_error: max_abs,
        r,
    })
}

/// Evaluates a network on a test set with frozen weights.
///
/// Errors if the set is empty or either desired column is constant (NMSE
/// and r are undefined then).
pub fn evaluate(
    net: &CanfisNetwork,
    test_set: &Dataset,
) -> Result<(PerformanceRecord, Vec<TestingRecord>)> {
    test_set.validate()?;
    let mut records = Vec::with_capacity(test_set.len());
    for sample in &test_set.samples {
        let trace = net.forward(sample.x, sample.y)?;
        records.push(TestingRecord {
            x: sample.x,
            y: sample.y,
            desired_s: sample.s,
            desired_c: sample.c,
            output_s: trace.outputs[0],
            output_c: trace.outputs[1],
        });
    }
    let desired_s: Vec<f64> = records.iter().map(|r| r.desired_s).collect();
    let desired_c: Vec<f64> = records.iter().map(|r| r.desired_c).collect();
    let actual_s: Vec<f64> = records.iter().map(|r| r.output_s).collect();
    let actual_c: Vec<f64> = records.iter().map(|r| r.output_c).collect();
    let performance = PerformanceRecord {
        sum: output_metrics(&desired_s, &actual_s, "S")?,
        carry: output_metrics(&desired_c, &actual_c, "C")?,
    };
    Ok((performance, records))
}

/// Rounds a value at the threshold; ties go to 1.
fn round_at(value: f64, threshold: f64) -> u8 {
    u8::from(value >= threshold)
}

/// Whether rounding every output at `threshold` reproduces the desired
/// binary outputs on every sample: does the learned circuit compute the
/// half-adder exactly after rounding?
pub fn binary_fidelity(records: &[TestingRecord], threshold: f64) -> (bool, Vec<FidelityRow>) {
    let rows: Vec<FidelityRow> = records
        .iter()
        .map(|r| {
            let rounded_s = round_at(r.output_s, threshold);
            let rounded_c = round_at(r.output_c, threshold);
            FidelityRow {
                rounded_s,
                rounded_c,
                s_ok: rounded_s == round_at(r.desired_s, threshold),
                c_ok: rounded_c == round_at(r.desired_c, threshold),
            }
        })
        .collect();
    let all_ok = !rows.is_empty() && rows.iter().all(|row| row.s_ok && row.c_ok);
    (all_ok, rows)
}
