use vqlip_core::dataset::{generate_dataset, split};
use vqlip_core::model::{build_logistic_circuit, OutputScaling};
use vqlip_core::training::{train, TrainingConfig};

fn main() -> Result<(), vqlip_core::Error> {
    let layout = build_logistic_circuit(4, 12)?;
    let scaling = OutputScaling::from_target_range(3.5, 4.0)?;
    let data = generate_dataset(1000, 3.5, 4.0, 0.5, 12)?;
    let (train_set, test_set) = split(&data, 200, 7)?;
    let config = TrainingConfig { lambda: 0.004, seed: 1, ..Default::default() };
    let record = train(&layout, &train_set, &test_set, &scaling, &config)?;
    println!(
        "test MSE {:.5}, L_Θ {:.2}",
        record.final_metrics.gap.test_mse,
        record.final_metrics.lipschitz.bound_raw,
    );
    Ok(())
}
