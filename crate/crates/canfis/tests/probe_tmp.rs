use canfis::dataset::{builtin_cv, builtin_training};
use canfis::network::{CanfisNetwork, NetworkConfig};
use canfis::train::{train, TrainingConfig};

#[test]
#[ignore]
fn probe_convergence() {
    let train_set = builtin_training();
    let cv_set = builtin_cv();
    let range = train_set.input_range().unwrap();
    for step in [1.0f64, 0.25] {
        println!("=== step_size {step} (1.0 = summed batch, 0.25 = mean batch) ===");
        for n_mf in [2usize, 3, 4, 5, 6] {
            let mut lines = Vec::new();
            for seed in 0..10u64 {
                let mut net = CanfisNetwork::init(NetworkConfig::new(n_mf, seed), range).unwrap();
                let config = TrainingConfig { max_epochs: 2000, cv_patience: 0, step_size: step, ..Default::default() };
                match train(&mut net, &train_set, &cv_set, &config) {
                    Ok(report) => {
                        let thr = report.first_epoch_at_or_below(0.001);
                        let e1 = report.records[0].train_mse;
                        let e200 = report.records[199].train_mse;
                        let e1000 = report.records[999].train_mse;
                        lines.push(format!(
                            "  seed {seed}: e1={e1:.4} e200={e200:.5} e1000={e1000:.3e} thr={thr:?}"
                        ));
                    }
                    Err(e) => lines.push(format!("  seed {seed}: ERROR {e}")),
                }
            }
            println!("n_mf={n_mf}:\n{}", lines.join("\n"));
        }
    }
}
