//! Backpropagation through the sigmoid, TSK aggregation, normalization and
//! bell layers; heavy-ball momentum updates; and the batch epoch loop with
//! cross-validation monitoring and best-weight snapshotting.

use crate::dataset::Dataset;
use crate::error::{CanfisError, Result};
use crate::fuzzy::DEGENERACY_EPS;
use crate::network::{CanfisNetwork, ForwardTrace, N_OUTPUTS};

/// Optimizer and epoch-loop settings.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrainingConfig {
    /// Upper bound on epochs; one epoch is one full-batch update.
    pub max_epochs: usize,
    /// Step size applied to the accumulated batch gradient.
    pub step_size: f64,
    /// Heavy-ball velocity decay, in [0, 1).
    pub momentum: f64,
    /// Consecutive epochs of CV MSE above its running minimum before
    /// training stops early; 0 disables early stopping.
    pub cv_patience: usize,
    /// Seed for procedures that draw initial parameters from this config
    /// (the CANFIS network carries its own seed; the baseline MLPs use
    /// this one).
    pub seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            max_epochs: 1000,
            step_size: 1.0,
            momentum: 0.6,
            cv_patience: 50,
            seed: 0,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_epochs < 1 {
            return Err(CanfisError::Config("max_epochs must be at least 1".into()));
        }
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return Err(CanfisError::Config(format!(
                "step_size must be positive, got {}",
                self.step_size
            )));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(CanfisError::Config(format!(
                "momentum must be in [0, 1), got {}",
                self.momentum
            )));
        }
        Ok(())
    }
}

/// Train and cross-validation MSE after one epoch's update.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EpochRecord {
    /// 1-based epoch number.
    pub epoch: usize,
    pub train_mse: f64,
    pub cv_mse: f64,
}

/// Outcome of a training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingReport {
    pub records: Vec<EpochRecord>,
    /// Epoch whose update produced the minimum CV MSE.
    pub best_epoch: usize,
    pub min_cv_mse: f64,
    pub final_train_mse: f64,
    /// Parameters after the last epoch.
    pub final_params: Vec<f64>,
    /// Parameter snapshot at `best_epoch` ("best weights").
    pub best_params: Vec<f64>,
    pub stopped_early: bool,
}

impl TrainingReport {
    /// First epoch whose training MSE is at or below `threshold`, if any.
    pub fn first_epoch_at_or_below(&self, threshold: f64) -> Option<usize> {
        self.records
            .iter()
            .find(|r| r.train_mse <= threshold)
            .map(|r| r.epoch)
    }

    /// Minimum training MSE over all recorded epochs.
    pub fn min_train_mse(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.train_mse)
            .fold(f64::INFINITY, f64::min)
    }

    /// Serializes the per-epoch records as `epoch,train_mse,cv_mse` CSV.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("epoch,train_mse,cv_mse\n");
        for r in &self.records {
            out.push_str(&format!("{},{},{}\n", r.epoch, r.train_mse, r.cv_mse));
        }
        out
    }
}

/// Mean squared error over a dataset, averaged over samples and both
/// outputs (one scalar per epoch).
pub fn compute_mse(net: &CanfisNetwork, data: &Dataset) -> Result<f64> {
    if data.is_empty() {
        return Err(CanfisError::Data(format!(
            "cannot compute MSE of empty dataset \"{}\"",
            data.name
        )));
    }
    let mut sum = 0.0;
    for sample in &data.samples {
        let trace = net.forward(sample.x, sample.y)?;
        let es = sample.s - trace.outputs[0];
        let ec = sample.c - trace.outputs[1];
        sum += es * es + ec * ec;
    }
    Ok(sum / (data.len() as f64 * N_OUTPUTS as f64))
}

/// Loss of one sample: `0.5 * sum_o (desired_o - output_o)^2`.
pub fn sample_loss(net: &CanfisNetwork, x: f64, y: f64, desired: [f64; N_OUTPUTS]) -> Result<f64> {
    let trace = net.forward(x, y)?;
    Ok(0.5
        * desired
            .iter()
            .zip(&trace.outputs)
            .map(|(d, out)| (d - out) * (d - out))
            .sum::<f64>())
}

/// Gradient of the per-sample loss with respect to every parameter, flat
/// and in [`CanfisNetwork::params`] order.
///
/// The chain rule passes through the sigmoid, the normalized weighted sum
/// (quotient rule across all rules), the product firing layer, and the
/// bell partials. `trace` must come from `net.forward(x, y)`.
pub fn backward(
    net: &CanfisNetwork,
    trace: &ForwardTrace,
    x: f64,
    y: f64,
    desired: [f64; N_OUTPUTS],
) -> Result<Vec<f64>> {
    let n_mf = net.config().n_mf;
    let n_rules = net.n_rules();
    if trace.firing.raw.len() != n_rules {
        return Err(CanfisError::Dimension {
            expected: n_rules,
            actual: trace.firing.raw.len(),
        });
    }

    // dL/dz_o through the sigmoid.
    let delta: [f64; N_OUTPUTS] = std::array::from_fn(|o| {
        let out = trace.outputs[o];
        (out - desired[o]) * out * (1.0 - out)
    });

    let normalized = &trace.firing.normalized;

    // Consequent gradients and dL/d(normalized weight).
    let mut consequent_grads = vec![[0.0f64; 3 * N_OUTPUTS]; n_rules];
    let mut d_norm = vec![0.0f64; n_rules];
    for k in 0..n_rules {
        for o in 0..N_OUTPUTS {
            let scale = delta[o] * normalized[k];
            consequent_grads[k][3 * o] = scale * x;
            consequent_grads[k][3 * o + 1] = scale * y;
            consequent_grads[k][3 * o + 2] = scale;
            d_norm[k] += delta[o] * trace.rule_outputs[k][o];
        }
    }

    // Through normalization: d norm_k / d raw_j = (delta_kj - norm_k) / sum.
    // In the degenerate branch the normalized weights are a constant uniform
    // vector, so nothing flows back into the raw firings.
    let raw_sum: f64 = trace.firing.raw.iter().sum();
    let d_raw: Vec<f64> = if trace.firing.degenerate || raw_sum < DEGENERACY_EPS {
        vec![0.0; n_rules]
    } else {
        let dot: f64 = d_norm.iter().zip(normalized).map(|(g, w)| g * w).sum();
        d_norm.iter().map(|g| (g - dot) / raw_sum).collect()
    };

    // Through the product firing into per-MF membership gradients.
    let mu_x = &trace.memberships[0];
    let mu_y = &trace.memberships[1];
    let mut d_mu = [vec![0.0f64; n_mf], vec![0.0f64; n_mf]];
    for i in 0..n_mf {
        for j in 0..n_mf {
            let g = d_raw[i * n_mf + j];
            d_mu[0][i] += g * mu_y[j];
            d_mu[1][j] += g * mu_x[i];
        }
    }

    // Assemble the flat gradient: MF params first, then consequents.
    let mut grads = Vec::with_capacity(net.param_count());
    for (input, value) in [(0usize, x), (1usize, y)] {
        for (mf, dm) in net.grid().mfs(input).iter().zip(&d_mu[input]) {
            let g = mf.grad(value);
            grads.extend([dm * g.d_width, dm * g.d_slope, dm * g.d_center]);
        }
    }
    for per_rule in &consequent_grads {
        grads.extend_from_slice(per_rule);
    }
    Ok(grads)
}

/// One heavy-ball update, in place:
/// `velocity <- momentum * velocity - step_size * grads; params += velocity`.
pub fn momentum_step(
    params: &mut [f64],
    velocity: &mut [f64],
    grads: &[f64],
    step_size: f64,
    momentum: f64,
) -> Result<()> {
    if params.len() != grads.len() || velocity.len() != grads.len() {
        return Err(CanfisError::Dimension {
            expected: params.len(),
            actual: grads.len(),
        });
    }
    for ((p, v), g) in params.iter_mut().zip(velocity.iter_mut()).zip(grads) {
        *v = momentum * *v - step_size * g;
        *p += *v;
    }
    Ok(())
}

/// Central finite differences of the per-sample loss over the flat
/// parameter vector. The independent oracle for [`backward`].
pub fn finite_diff_gradient(
    net: &CanfisNetwork,
    x: f64,
    y: f64,
    desired: [f64; N_OUTPUTS],
    step: f64,
) -> Result<Vec<f64>> {
    if !(step.is_finite() && step > 0.0) {
        return Err(CanfisError::Config(format!(
            "finite-difference step must be positive, got {step}"
        )));
    }
    let base = net.params();
    let mut probe = net.clone();
    let mut grads = Vec::with_capacity(base.len());
    let mut shifted = base.clone();
    for i in 0..base.len() {
        shifted[i] = base[i] + step;
        probe.set_params(&shifted)?;
        let plus = sample_loss(&probe, x, y, desired)?;
        shifted[i] = base[i] - step;
        probe.set_params(&shifted)?;
        let minus = sample_loss(&probe, x, y, desired)?;
        shifted[i] = base[i];
        grads.push((plus - minus) / (2.0 * step));
    }
    Ok(grads)
}

/// Runs the batch epoch loop.
///
/// Each epoch accumulates the sample gradients over the full training
/// batch, applies one momentum step, and then records the training and CV
/// MSE of the updated parameters. Parameters are snapshotted whenever the
/// CV MSE reaches a new minimum. Training stops at `max_epochs`, or early
/// after `cv_patience` consecutive epochs with CV MSE above the running
/// minimum. A non-finite loss aborts with the failing epoch.
pub fn train(
    net: &mut CanfisNetwork,
    train_set: &Dataset,
    cv_set: &Dataset,
    config: &TrainingConfig,
) -> Result<TrainingReport> {
    config.validate()?;
    train_set.validate()?;
    cv_set.validate()?;

    let mut params = net.params();
    let mut velocity = vec![0.0; params.len()];
    let mut records = Vec::with_capacity(config.max_epochs);
    let mut best_epoch = 0usize;
    let mut min_cv_mse = f64::INFINITY;
    let mut best_params = params.clone();
    let mut above_min_streak = 0usize;
    let mut stopped_early = false;

    for epoch in 1..=config.max_epochs {
        let mut grads = vec![0.0; params.len()];
        for sample in &train_set.samples {
            let trace = net.forward(sample.x, sample.y)?;
            let g = backward(net, &trace, sample.x, sample.y, [sample.s, sample.c])?;
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
        net.set_params(&params)?;

        let train_mse = compute_mse(net, train_set)?;
        let cv_mse = compute_mse(net, cv_set)?;
        if !(train_mse.is_finite() && cv_mse.is_finite()) {
            return Err(CanfisError::Diverged { epoch });
        }
        records.push(EpochRecord {
            epoch,
            train_mse,
            cv_mse,
        });

        if cv_mse < min_cv_mse {
            min_cv_mse = cv_mse;
            best_epoch = epoch;
            best_params.copy_from_slice(&params);
            above_min_streak = 0;
        } else if cv_mse > min_cv_mse {
            above_min_streak += 1;
            if config.cv_patience > 0 && above_min_streak >= config.cv_patience {
                stopped_early = true;
                break;
            }
        } else {
            above_min_streak = 0;
        }
    }

    let final_train_mse = records.last().expect("max_epochs >= 1").train_mse;
    Ok(TrainingReport {
        records,
        best_epoch,
        min_cv_mse,
        final_train_mse,
        final_params: params,
        best_params,
        stopped_early,
    })
}
