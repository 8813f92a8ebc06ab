//! The rejected plain-MLP approach for comparison: an XOR perceptron and an
//! AND perceptron trained separately, then wired together as a half-adder.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::Dataset;
use crate::error::{CanfisError, Result};
use crate::metrics::TestingRecord;
use crate::network::sigmoid;
use crate::train::{momentum_step, TrainingConfig};

/// Which desired column of a half-adder dataset a subnet learns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum TargetColumn {
    /// The sum output (XOR of the inputs).
    Sum,
    /// The carry output (AND of the inputs).
    Carry,
}

/// Default XOR subnet topology: 2 inputs, 2 hidden units, 1 output.
pub const XOR_TOPOLOGY: [usize; 3] = [2, 2, 1];
/// Default AND subnet topology: no hidden layer.
pub const AND_TOPOLOGY: [usize; 2] = [2, 1];

/// A fully connected perceptron with sigmoid transfer on every layer.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpSubnet {
    topology: Vec<usize>,
    /// Per layer: weights (output-major, then input) followed by biases.
    params: Vec<f64>,
}

fn param_count(topology: &[usize]) -> usize {
    topology
        .windows(2)
        .map(|pair| pair[0] * pair[1] + pair[1])
        .sum()
}

impl MlpSubnet {
    /// Random weights and biases, uniform in [-1, 1], deterministic per seed.
    pub fn init(topology: &[usize], seed: u64) -> Result<Self> {
        if topology.len() < 2 || topology.iter().any(|&n| n == 0) {
            return Err(CanfisError::Config(format!(
                "topology needs at least two nonzero layers, got {topology:?}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = (0..param_count(topology))
            .map(|_| rng.random_range(-1.0..=1.0))
            .collect();
        Ok(Self {
            topology: topology.to_vec(),
            params,
        })
    }

    pub fn topology(&self) -> &[usize] {
        &self.topology
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.params.len() {
            return Err(CanfisError::Dimension {
                expected: self.params.len(),
                actual: params.len(),
            });
        }
        self.params.copy_from_slice(params);
        Ok(())
    }

    /// Activations of every layer, input first. The last entry is the
    /// network output.
    fn activations(&self, inputs: &[f64]) -> Vec<Vec<f64>> {
        let mut layers = Vec::with_capacity(self.topology.len());
        layers.push(inputs.to_vec());
        let mut offset = 0;
        for pair in self.topology.windows(2) {
            let (n_in, n_out) = (pair[0], pair[1]);
            let prev = layers.last().unwrap();
            let mut next = Vec::with_capacity(n_out);
            for unit in 0..n_out {
                let w = &self.params[offset + unit * n_in..offset + (unit + 1) * n_in];
                let b = self.params[offset + n_in * n_out + unit];
                let z: f64 = w.iter().zip(prev).map(|(wi, ai)| wi * ai).sum::<f64>() + b;
                next.push(sigmoid(z));
            }
            offset += n_in * n_out + n_out;
            layers.push(next);
        }
        layers
    }

    pub fn forward(&self, x: f64, y: f64) -> Vec<f64> {
        self.activations(&[x, y]).pop().unwrap()
    }

    /// Gradient of `0.5 * sum_o (desired_o - output_o)^2` with respect to
    /// every weight and bias, in parameter order.
    pub fn backward(&self, inputs: &[f64], desired: &[f64]) -> Result<Vec<f64>> {
        let layers = self.activations(inputs);
        let outputs = layers.last().unwrap();
        if desired.len() != outputs.len() {
            return Err(CanfisError::Dimension {
                expected: outputs.len(),
                actual: desired.len(),
            });
        }
        // delta = dL/dz per unit, built from the output layer backwards.
        let mut delta: Vec<f64> = outputs
            .iter()
            .zip(desired)
            .map(|(out, d)| (out - d) * out * (1.0 - out))
            .collect();

        let mut grads = vec![0.0; self.params.len()];
        let mut offsets: Vec<usize> = Vec::with_capacity(self.topology.len() - 1);
        let mut acc = 0;
        for pair in self.topology.windows(2) {
            offsets.push(acc);
            acc += pair[0] * pair[1] + pair[1];
        }

        for layer in (0..self.topology.len() - 1).rev() {
            let (n_in, n_out) = (self.topology[layer], self.topology[layer + 1]);
            let offset = offsets[layer];
            let prev = &layers[layer];
            for unit in 0..n_out {
                for (i, ai) in prev.iter().enumerate() {
                    grads[offset + unit * n_in + i] = delta[unit] * ai;
                }
                grads[offset + n_in * n_out + unit] = delta[unit];
            }
            if layer > 0 {
                delta = (0..n_in)
                    .map(|i| {
                        let a = prev[i];
                        let upstream: f64 = (0..n_out)
                            .map(|unit| delta[unit] * self.params[offset + unit * n_in + i])
                            .sum();
                        upstream * a * (1.0 - a)
                    })
                    .collect();
            }
        }
        Ok(grads)
    }
}

fn target_of(sample: &crate::dataset::Sample, target: TargetColumn) -> f64 {
    match target {
        TargetColumn::Sum => sample.s,
        TargetColumn::Carry => sample.c,
    }
}

/// Default settings for subnet training. Long saturation phase; no early
/// stopping (there is no held-out set in this protocol).
pub fn default_subnet_config(seed: u64) -> TrainingConfig {
    TrainingConfig {
        max_epochs: 20_000,
        step_size: 1.0,
        momentum: 0.6,
        cv_patience: 0,
        seed,
    }
}

/// Trains one subnet on a single desired column of a truth table with
/// full-batch momentum backprop. Returns the trained subnet and the
/// per-epoch RMSE history.
pub fn train_subnet(
    table: &Dataset,
    target: TargetColumn,
    topology: &[usize],
    config: &TrainingConfig,
) -> Result<(MlpSubnet, Vec<f64>)> {
    config.validate()?;
    table.validate()?;
    if *topology.last().unwrap_or(&0) != 1 {
        return Err(CanfisError::Config(format!(
            "subnet must have a single output, got {topology:?}"
        )));
    }
    let mut subnet = MlpSubnet::init(topology, config.seed)?;
    let mut params = subnet.params().to_vec();
    let mut velocity = vec![0.0; params.len()];
    let mut history = Vec::with_capacity(config.max_epochs);

    for epoch in 1..=config.max_epochs {
        let mut grads = vec![0.0; params.len()];
        for sample in &table.samples {
            let g = subnet.backward(&[sample.x, sample.y], &[target_of(sample, target)])?;
            for (acc, gi) in grads.iter_mut().zip(&g) {
                *acc += gi;
            }
        }
        momentum_step(
            &mut params,
            &mut velocity,
            &grads,
            config.step_size,
            config.momentum,
        )?;
        subnet.set_params(&params)?;

        let mut sq_sum = 0.0;
        for sample in &table.samples {
            let out = subnet.forward(sample.x, sample.y)[0];
            let e = target_of(sample, target) - out;
            sq_sum += e * e;
        }
        let rmse = (sq_sum / table.len() as f64).sqrt();
        if !rmse.is_finite() {
            return Err(CanfisError::Diverged { epoch });
        }
        history.push(rmse);
    }
    Ok((subnet, history))
}

/// The XOR and AND subnets wired as a half-adder: S from XOR, C from AND.
#[derive(Debug, Clone, PartialEq)]
pub struct ComposedHalfAdder {
    pub xor_subnet: MlpSubnet,
    pub and_subnet: MlpSubnet,
}

impl ComposedHalfAdder {
    pub fn forward(&self, x: f64, y: f64) -> [f64; 2] {
        [
            self.xor_subnet.forward(x, y)[0],
            self.and_subnet.forward(x, y)[0],
        ]
    }
}

/// Evaluates the composition on a dataset: RMSE over both outputs plus
/// per-sample records.
pub fn compose_and_evaluate(
    composed: &ComposedHalfAdder,
    test_set: &Dataset,
) -> Result<(f64, Vec<TestingRecord>)> {
    test_set.validate()?;
    let mut records = Vec::with_capacity(test_set.len());
    let mut sq_sum = 0.0;
    for sample in &test_set.samples {
        let [out_s, out_c] = composed.forward(sample.x, sample.y);
        let es = sample.s - out_s;
        let ec = sample.c - out_c;
        sq_sum += es * es + ec * ec;
        records.push(TestingRecord {
            x: sample.x,
            y: sample.y,
            desired_s: sample.s,
            desired_c: sample.c,
            output_s: out_s,
            output_c: out_c,
        });
    }
    let rmse = (sq_sum / (test_set.len() as f64 * 2.0)).sqrt();
    Ok((rmse, records))
}
