//! The CANFIS forward pass: one grid of bell antecedents shared across both
//! outputs, a first-order TSK consequent per rule per output, normalized
//! weighted aggregation, and a sigmoid output stage.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CanfisError, Result};
use crate::fuzzy::{BellMf, FiringVector, FuzzyGrid};

/// Input processing elements. Fixed by the architecture.
pub const N_INPUTS: usize = 2;
/// Output processing elements (sum and carry). Fixed by the architecture.
pub const N_OUTPUTS: usize = 2;

/// Structural configuration of a network.
///
/// The membership shape (bell), fuzzy model (first-order TSK) and output
/// transfer (sigmoid) are fixed; only the MF count per input and the
/// initialization randomness vary.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NetworkConfig {
    /// Membership functions per input; the grid has `n_mf^2` rules.
    pub n_mf: usize,
    /// Seed for parameter initialization.
    pub seed: u64,
    /// Relative jitter applied to each MF parameter at init, as a fraction
    /// of its value.
    pub init_jitter: f64,
}

impl NetworkConfig {
    pub fn new(n_mf: usize, seed: u64) -> Self {
        Self {
            n_mf,
            seed,
            init_jitter: 0.05,
        }
    }
}

/// First-order TSK rule consequent for one (rule, output) pair:
/// `coeff_x * x + coeff_y * y + bias`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TskConsequent {
    pub coeff_x: f64,
    pub coeff_y: f64,
    pub bias: f64,
}

/// Everything the forward pass computes for one input point, cached for
/// backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    /// Membership degrees per input per MF.
    pub memberships: [Vec<f64>; 2],
    /// The single firing vector shared by both outputs.
    pub firing: FiringVector,
    /// TSK consequent values per rule per output.
    pub rule_outputs: Vec<[f64; N_OUTPUTS]>,
    /// Normalized-weighted sums per output, pre-sigmoid.
    pub aggregates: [f64; N_OUTPUTS],
    /// Sigmoid outputs, each in (0, 1).
    pub outputs: [f64; N_OUTPUTS],
}

/// Logistic sigmoid.
pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// A CANFIS network: shared antecedent grid plus per-output consequents.
#[derive(Debug, Clone, PartialEq)]
pub struct CanfisNetwork {
    config: NetworkConfig,
    grid: FuzzyGrid,
    /// Rule-indexed (row-major over MF indices), then output-indexed.
    consequents: Vec<[TskConsequent; N_OUTPUTS]>,
}

/// On-disk form of a trained network: config header plus flat parameters.
#[derive(serde::Serialize, serde::Deserialize)]
struct NetworkDocument {
    config: NetworkConfig,
    params: Vec<f64>,
}

impl CanfisNetwork {
    /// Initializes a network over the given per-input ranges.
    ///
    /// Centers are spaced evenly over `[lo, hi]` (midpoint for a single MF),
    /// widths cover half the gap between neighboring centers, slopes start
    /// at 2. Each MF parameter is then jittered by a uniform relative amount
    /// and consequent coefficients are drawn uniformly from [-0.1, 0.1].
    /// Deterministic for a given seed.
    pub fn init(config: NetworkConfig, input_range: [(f64, f64); 2]) -> Result<Self> {
        if config.n_mf < 1 {
            return Err(CanfisError::Config("n_mf must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&config.init_jitter) {
            return Err(CanfisError::Config(format!(
                "init_jitter must be in [0, 1), got {}",
                config.init_jitter
            )));
        }
        for (lo, hi) in input_range {
            if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
                return Err(CanfisError::Config(format!(
                    "degenerate input range [{lo}, {hi}]"
                )));
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let n = config.n_mf;
        let jitter = |value: f64, rng: &mut ChaCha8Rng| -> f64 {
            if config.init_jitter == 0.0 {
                value
            } else {
                value * (1.0 + rng.random_range(-config.init_jitter..=config.init_jitter))
            }
        };

        let mut inputs: Vec<Vec<BellMf>> = Vec::with_capacity(N_INPUTS);
        for (lo, hi) in input_range {
            let span = hi - lo;
            let width = if n == 1 {
                span / 2.0
            } else {
                span / (2.0 * (n - 1) as f64)
            };
            let mut mfs = Vec::with_capacity(n);
            for k in 0..n {
                let center = if n == 1 {
                    lo + span / 2.0
                } else {
                    lo + span * k as f64 / (n - 1) as f64
                };
                let a = jitter(width, &mut rng);
                let b = jitter(2.0, &mut rng);
                let c = jitter(center, &mut rng);
                mfs.push(BellMf::new(a, b, c)?);
            }
            inputs.push(mfs);
        }
        let second = inputs.pop().expect("two inputs");
        let first = inputs.pop().expect("two inputs");
        let grid = FuzzyGrid::new(first, second)?;

        let consequents = (0..n * n)
            .map(|_| {
                std::array::from_fn(|_| TskConsequent {
                    coeff_x: rng.random_range(-0.1..=0.1),
                    coeff_y: rng.random_range(-0.1..=0.1),
                    bias: rng.random_range(-0.1..=0.1),
                })
            })
            .collect();

        Ok(Self {
            config,
            grid,
            consequents,
        })
    }

    /// Rebuilds a network from a config and a flat parameter vector, as used
    /// by [`Self::params`]/[`Self::set_params`].
    pub fn from_params(config: NetworkConfig, params: &[f64]) -> Result<Self> {
        if config.n_mf < 1 {
            return Err(CanfisError::Config("n_mf must be at least 1".into()));
        }
        let n = config.n_mf;
        let placeholder = BellMf {
            width: 1.0,
            slope: 2.0,
            center: 0.0,
        };
        let mut net = Self {
            config,
            grid: FuzzyGrid::from_raw(vec![placeholder; n], vec![placeholder; n]),
            consequents: vec![
                [TskConsequent {
                    coeff_x: 0.0,
                    coeff_y: 0.0,
                    bias: 0.0,
                }; N_OUTPUTS];
                n * n
            ],
        };
        net.set_params(params)?;
        Ok(net)
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn grid(&self) -> &FuzzyGrid {
        &self.grid
    }

    pub fn consequents(&self) -> &[[TskConsequent; N_OUTPUTS]] {
        &self.consequents
    }

    pub fn n_rules(&self) -> usize {
        self.grid.n_rules()
    }

    /// Total adjustable parameters:
    /// `2 * n_mf * 3` MF parameters plus `n_mf^2 * 2 * 3` consequent terms.
    pub fn param_count(&self) -> usize {
        N_INPUTS * self.config.n_mf * 3 + self.n_rules() * N_OUTPUTS * 3
    }

    /// Full forward pass, returning every intermediate.
    pub fn forward(&self, x: f64, y: f64) -> Result<ForwardTrace> {
        if !(x.is_finite() && y.is_finite()) {
            return Err(CanfisError::ParameterDomain(format!(
                "network input must be finite, got ({x}, {y})"
            )));
        }
        let memberships = self.grid.memberships(x, y);
        let firing = self.grid.fire(x, y);
        let rule_outputs: Vec<[f64; N_OUTPUTS]> = self
            .consequents
            .iter()
            .map(|per_output| {
                std::array::from_fn(|o| {
                    let q = &per_output[o];
                    q.coeff_x * x + q.coeff_y * y + q.bias
                })
            })
            .collect();
        let aggregates: [f64; N_OUTPUTS] = std::array::from_fn(|o| {
            firing
                .normalized
                .iter()
                .zip(&rule_outputs)
                .map(|(w, r)| w * r[o])
                .sum()
        });
        let outputs = aggregates.map(sigmoid);
        Ok(ForwardTrace {
            memberships,
            firing,
            rule_outputs,
            aggregates,
            outputs,
        })
    }

    /// Flat parameter vector. Ordering: for each input, for each MF, the
    /// (width, slope, center) triple; then for each rule (row-major), for
    /// each output, the (coeff_x, coeff_y, bias) triple.
    pub fn params(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.param_count());
        for input in 0..N_INPUTS {
            for mf in self.grid.mfs(input) {
                v.extend([mf.width, mf.slope, mf.center]);
            }
        }
        for per_output in &self.consequents {
            for q in per_output {
                v.extend([q.coeff_x, q.coeff_y, q.bias]);
            }
        }
        v
    }

    /// Overwrites every parameter from a flat vector in [`Self::params`]
    /// order. This is the optimizer's raw view: MF validity (positive width
    /// and slope, ordered centers) is not re-checked here.
    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(CanfisError::Dimension {
                expected: self.param_count(),
                actual: params.len(),
            });
        }
        let mut it = params.iter().copied();
        for input in 0..N_INPUTS {
            for mf in self.grid.mfs_mut(input) {
                mf.width = it.next().unwrap();
                mf.slope = it.next().unwrap();
                mf.center = it.next().unwrap();
            }
        }
        for per_output in &mut self.consequents {
            for q in per_output.iter_mut() {
                q.coeff_x = it.next().unwrap();
                q.coeff_y = it.next().unwrap();
                q.bias = it.next().unwrap();
            }
        }
        Ok(())
    }

    /// Serializes config plus flat parameters as a JSON document.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&NetworkDocument {
            config: self.config,
            params: self.params(),
        })
        .expect("network document serializes")
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|source| CanfisError::File {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: NetworkDocument =
            serde_json::from_str(text).map_err(|e| CanfisError::NetworkDecode(e.to_string()))?;
        Self::from_params(doc.config, &doc.params)
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| CanfisError::File {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const UNIT: [(f64, f64); 2] = [(0.0, 1.0), (0.0, 1.0)];

    fn no_jitter(n_mf: usize, seed: u64) -> NetworkConfig {
        NetworkConfig {
            n_mf,
            seed,
            init_jitter: 0.0,
        }
    }

    #[test]
    fn init_grid_two_mfs_unit_range() {
        let net = CanfisNetwork::init(no_jitter(2, 0), UNIT).unwrap();
        for input in 0..2 {
            let mfs = net.grid().mfs(input);
            assert_eq!(mfs[0].center, 0.0);
            assert_eq!(mfs[1].center, 1.0);
            assert_eq!(mfs[0].width, 0.5);
            assert_eq!(mfs[1].width, 0.5);
            assert_eq!(mfs[0].slope, 2.0);
        }
    }

    #[test]
    fn init_grid_single_mf_is_midpoint() {
        let net = CanfisNetwork::init(no_jitter(1, 0), UNIT).unwrap();
        let mf = net.grid().mfs(0)[0];
        assert_eq!((mf.center, mf.width, mf.slope), (0.5, 0.5, 2.0));
    }

    #[test]
    fn init_is_deterministic_per_seed() {
        let a = CanfisNetwork::init(NetworkConfig::new(3, 17), UNIT).unwrap();
        let b = CanfisNetwork::init(NetworkConfig::new(3, 17), UNIT).unwrap();
        assert_eq!(a.params(), b.params());
        let c = CanfisNetwork::init(NetworkConfig::new(3, 18), UNIT).unwrap();
        assert_ne!(a.params(), c.params());
    }

    #[test]
    fn init_rejects_degenerate_range() {
        assert!(CanfisNetwork::init(no_jitter(2, 0), [(0.0, 0.0), (0.0, 1.0)]).is_err());
        assert!(CanfisNetwork::init(no_jitter(2, 0), [(1.0, 0.0), (0.0, 1.0)]).is_err());
        assert!(CanfisNetwork::init(no_jitter(0, 0), UNIT).is_err());
    }

    #[test]
    fn param_count_follows_architecture() {
        for (n_mf, expect) in [(2, 36), (3, 72), (4, 120)] {
            let net = CanfisNetwork::init(no_jitter(n_mf, 0), UNIT).unwrap();
            assert_eq!(net.param_count(), expect);
            assert_eq!(net.params().len(), expect);
        }
    }

    #[test]
    fn forward_zero_consequents_gives_half() {
        let mut net = CanfisNetwork::init(no_jitter(1, 0), UNIT).unwrap();
        let mut params = net.params();
        for p in params.iter_mut().skip(2 * 1 * 3) {
            *p = 0.0;
        }
        net.set_params(&params).unwrap();
        for (x, y) in [(0.0, 0.0), (1.0, 1.0), (0.3, 0.9)] {
            let trace = net.forward(x, y).unwrap();
            assert_eq!(trace.aggregates, [0.0, 0.0]);
            assert_eq!(trace.outputs, [0.5, 0.5]);
        }
    }

    #[test]
    fn forward_single_rule_sigmoid_hand_value() {
        // One rule has normalized weight 1; consequent (1, 1, 0) at input
        // (1, 1) gives z = 2 and y = 1/(1+e^-2).
        let mut net = CanfisNetwork::init(no_jitter(1, 0), UNIT).unwrap();
        let mut params = net.params();
        let base = 2 * 1 * 3;
        params[base..base + 6].copy_from_slice(&[1.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        net.set_params(&params).unwrap();
        let trace = net.forward(1.0, 1.0).unwrap();
        assert_eq!(trace.firing.normalized, vec![1.0]);
        assert!((trace.aggregates[0] - 2.0).abs() < 1e-15);
        assert!((trace.outputs[0] - 0.8807970779778823).abs() < 1e-12);
        assert_eq!(trace.outputs[1], 0.5);
    }

    #[test]
    fn forward_outputs_stay_inside_unit_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for seed in 0..20 {
            let net = CanfisNetwork::init(NetworkConfig::new(3, seed), UNIT).unwrap();
            for _ in 0..25 {
                let x = rng.random_range(-0.5..1.5);
                let y = rng.random_range(-0.5..1.5);
                let trace = net.forward(x, y).unwrap();
                for out in trace.outputs {
                    assert!(out > 0.0 && out < 1.0);
                }
            }
        }
    }

    #[test]
    fn forward_rejects_non_finite_input() {
        let net = CanfisNetwork::init(no_jitter(2, 0), UNIT).unwrap();
        assert!(net.forward(f64::NAN, 0.0).is_err());
        assert!(net.forward(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn params_round_trip_preserves_outputs() {
        let mut net = CanfisNetwork::init(NetworkConfig::new(2, 9), UNIT).unwrap();
        let before = net.params();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let probes: Vec<(f64, f64)> = (0..100)
            .map(|_| (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)))
            .collect();
        let outputs_before: Vec<[f64; 2]> = probes
            .iter()
            .map(|&(x, y)| net.forward(x, y).unwrap().outputs)
            .collect();
        net.set_params(&before).unwrap();
        assert_eq!(net.params(), before);
        for (probe, expect) in probes.iter().zip(&outputs_before) {
            assert_eq!(net.forward(probe.0, probe.1).unwrap().outputs, *expect);
        }
    }

    #[test]
    fn set_params_rejects_wrong_length() {
        let mut net = CanfisNetwork::init(no_jitter(2, 0), UNIT).unwrap();
        let params = net.params();
        assert!(matches!(
            net.set_params(&params[..params.len() - 1]),
            Err(CanfisError::Dimension { expected: 36, actual: 35 })
        ));
    }

    #[test]
    fn perturbing_one_coordinate_changes_only_that_field() {
        let net = CanfisNetwork::init(NetworkConfig::new(2, 3), UNIT).unwrap();
        let params = net.params();
        // Coordinate 4 is input 0, MF 1, slope (width=3, slope=4, center=5).
        let mut perturbed = params.clone();
        perturbed[4] += 0.125;
        let changed = CanfisNetwork::from_params(*net.config(), &perturbed).unwrap();
        assert_eq!(changed.grid().mfs(0)[0], net.grid().mfs(0)[0]);
        assert_eq!(
            changed.grid().mfs(0)[1].slope,
            net.grid().mfs(0)[1].slope + 0.125
        );
        assert_eq!(changed.grid().mfs(0)[1].width, net.grid().mfs(0)[1].width);
        assert_eq!(changed.grid().mfs(1), net.grid().mfs(1));
        assert_eq!(changed.consequents(), net.consequents());

        // And the first consequent coordinate of rule 2, output 1.
        let idx = 12 + (2 * 2 + 1) * 3;
        let mut perturbed = params.clone();
        perturbed[idx] -= 0.25;
        let changed = CanfisNetwork::from_params(*net.config(), &perturbed).unwrap();
        assert_eq!(changed.grid(), net.grid());
        assert_eq!(
            changed.consequents()[2][1].coeff_x,
            net.consequents()[2][1].coeff_x - 0.25
        );
        assert_eq!(changed.consequents()[2][0], net.consequents()[2][0]);
    }

    #[test]
    fn shared_antecedents_single_firing_vector() {
        // Both outputs aggregate over the one firing vector in the trace.
        let net = CanfisNetwork::init(NetworkConfig::new(2, 1), UNIT).unwrap();
        let trace = net.forward(0.4, 0.7).unwrap();
        for o in 0..2 {
            let z: f64 = trace
                .firing
                .normalized
                .iter()
                .zip(&trace.rule_outputs)
                .map(|(w, r)| w * r[o])
                .sum();
            assert!((z - trace.aggregates[o]).abs() < 1e-15);
        }
    }

    #[test]
    fn json_round_trip() {
        let net = CanfisNetwork::init(NetworkConfig::new(3, 21), UNIT).unwrap();
        let restored = CanfisNetwork::from_json(&net.to_json()).unwrap();
        assert_eq!(restored.params(), net.params());
        assert_eq!(restored.config(), net.config());
    }
}
