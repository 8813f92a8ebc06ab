//! Half-adder datasets: the built-in truth table, its noisy cross-validation
//! and testing variants, and `X,Y,S,C` CSV loading/saving.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{CanfisError, Result};

/// One exemplar: two inputs and the desired sum/carry outputs.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Sample {
    pub x: f64,
    pub y: f64,
    pub s: f64,
    pub c: f64,
}

impl Sample {
    pub const fn new(x: f64, y: f64, s: f64, c: f64) -> Self {
        Self { x, y, s, c }
    }
}

/// What a dataset is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Train,
    Cv,
    Test,
}

/// An ordered, immutable collection of samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub samples: Vec<Sample>,
    pub role: Role,
    pub name: String,
}

const CSV_HEADER: &str = "X,Y,S,C";

/// The half-adder truth table: 4 exemplars.
pub fn builtin_training() -> Dataset {
    Dataset {
        samples: vec![
            Sample::new(0.0, 0.0, 0.0, 0.0),
            Sample::new(0.0, 1.0, 1.0, 0.0),
            Sample::new(1.0, 0.0, 1.0, 0.0),
            Sample::new(1.0, 1.0, 0.0, 1.0),
        ],
        role: Role::Train,
        name: "builtin-training".into(),
    }
}

/// Cross-validation data: the truth table with inputs perturbed around 0 and 1.
///
/// Row 3 pairs X = 0.06 with Y = 1.06; the Y value exceeding 1 is kept as is.
pub fn builtin_cv() -> Dataset {
    Dataset {
        samples: vec![
            Sample::new(0.05, 0.03, 0.0, 0.0),
            Sample::new(0.09, 0.98, 1.0, 0.0),
            Sample::new(0.06, 1.06, 1.0, 0.0),
            Sample::new(1.02, 0.96, 0.0, 1.0),
            Sample::new(0.97, 0.035, 1.0, 0.0),
            Sample::new(0.99, 0.97, 0.0, 1.0),
            Sample::new(0.055, 0.98, 1.0, 0.0),
            Sample::new(1.01, 0.03, 1.0, 0.0),
            Sample::new(1.04, 0.99, 0.0, 1.0),
        ],
        role: Role::Cv,
        name: "builtin-cv".into(),
    }
}

/// Testing data: 6 near-binary input pairs.
pub fn builtin_test() -> Dataset {
    Dataset {
        samples: vec![
            Sample::new(0.07, 0.02, 0.0, 0.0),
            Sample::new(0.09, 0.99, 1.0, 0.0),
            Sample::new(1.045, 0.03, 1.0, 0.0),
            Sample::new(0.08, 0.01, 0.0, 0.0),
            Sample::new(0.98, 0.02, 1.0, 0.0),
            Sample::new(0.975, 0.98, 0.0, 1.0),
        ],
        role: Role::Test,
        name: "builtin-test".into(),
    }
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Rejects empty datasets and non-finite entries.
    pub fn validate(&self) -> Result<()> {
        if self.samples.is_empty() {
            return Err(CanfisError::Data(format!(
                "dataset \"{}\" is empty",
                self.name
            )));
        }
        for (i, sample) in self.samples.iter().enumerate() {
            let values = [sample.x, sample.y, sample.s, sample.c];
            if values.iter().any(|v| !v.is_finite()) {
                return Err(CanfisError::Data(format!(
                    "dataset \"{}\" has a non-finite value in sample {}",
                    self.name,
                    i + 1
                )));
            }
        }
        Ok(())
    }

    /// Per-input (min, max) over the samples; the grid initialization range.
    pub fn input_range(&self) -> Result<[(f64, f64); 2]> {
        self.validate()?;
        let mut range = [(f64::INFINITY, f64::NEG_INFINITY); 2];
        for sample in &self.samples {
            for (r, v) in range.iter_mut().zip([sample.x, sample.y]) {
                r.0 = r.0.min(v);
                r.1 = r.1.max(v);
            }
        }
        Ok(range)
    }

    /// Desired values of one output as a column vector.
    pub fn desired_column(&self, output: usize) -> Vec<f64> {
        self.samples
            .iter()
            .map(|s| if output == 0 { s.s } else { s.c })
            .collect()
    }

    /// Loads a `X,Y,S,C` CSV. Errors carry 1-based file row (header = row 1)
    /// and column positions.
    pub fn load_csv(path: impl AsRef<Path>, role: Role) -> Result<Dataset> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| CanfisError::File {
            path: path.display().to_string(),
            source,
        })?;
        let mut lines = text.lines().enumerate();
        let header = match lines.next() {
            Some((_, line)) => line.trim().to_string(),
            None => return Err(CanfisError::MalformedHeader { found: String::new() }),
        };
        if header != CSV_HEADER {
            return Err(CanfisError::MalformedHeader { found: header });
        }
        let mut samples = Vec::new();
        for (idx, line) in lines {
            let row = idx + 1; // 1-based file line
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(CanfisError::RowWidth {
                    row,
                    expected: 4,
                    found: fields.len(),
                });
            }
            let mut values = [0.0f64; 4];
            for (col, (slot, field)) in values.iter_mut().zip(&fields).enumerate() {
                *slot = field.trim().parse().map_err(|_| CanfisError::ParseCell {
                    row,
                    col: col + 1,
                    value: field.trim().to_string(),
                })?;
            }
            samples.push(Sample::new(values[0], values[1], values[2], values[3]));
        }
        if samples.is_empty() {
            return Err(CanfisError::EmptyBody);
        }
        let dataset = Dataset {
            samples,
            role,
            name: path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "csv".into()),
        };
        dataset.validate()?;
        Ok(dataset)
    }

    /// Serializes the dataset as `X,Y,S,C` CSV text. Values use the shortest
    /// representation that parses back to the same float, so save/load
    /// round-trips exactly.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for sample in &self.samples {
            let _ = writeln!(out, "{},{},{},{}", sample.x, sample.y, sample.s, sample.c);
        }
        out
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv_string()).map_err(|source| CanfisError::File {
            path: path.display().to_string(),
            source,
        })
    }
}
