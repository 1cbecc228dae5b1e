use robust_bayes::commands::{DAM_BRACKET, DAM_THETA};
use robust_bayes::RayonExecutor;
use robust_bayes_core::losses::make_dam_losses;
use robust_bayes_core::ratelab::theorems::{diameter_law_check, estimator_concentration};
use robust_bayes_core::ratelab::{ExperimentConfig, Measure, SamplingModel};
use robust_bayes_core::robustness::limit_diameter;
use robust_bayes_core::LossClass;

#[test]
fn estimator_centers_on_theta_at_large_n() {
    let exec = RayonExecutor::new(None).unwrap();
    for model in [
        SamplingModel::exponential(0.5).unwrap(),
        SamplingModel::normal(1.2, 3.0, 0.0, 0.01).unwrap(),
    ] {
        let c = estimator_concentration(&model, 10_000, 200, 42, &exec).unwrap();
        assert!(c.within(3.0), "{:?}: {c:?}", model.family);
    }
}

#[test]
fn scaled_dam_diameter_error_is_centered() {
    let exec = RayonExecutor::new(None).unwrap();
    let dam = make_dam_losses().unwrap();
    let class: LossClass = dam.finite.into();
    let model = SamplingModel::exponential(DAM_THETA).unwrap();
    let limit = limit_diameter(&class, DAM_THETA, Some(DAM_BRACKET)).unwrap();
    let config =
        ExperimentConfig::new(vec![10_000], 500, 42, Measure::Diameter).with_bracket(DAM_BRACKET);
    let c = diameter_law_check(&model, &class, limit, &config, &exec).unwrap();
    assert_eq!(c.replications, 500);
    assert!(c.within(3.0), "{c:?} (z = {:.2})", c.z_score());
}
