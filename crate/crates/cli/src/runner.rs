//! Glue between a loaded scenario and the engine: run the schedule, attach
//! tract trajectories, and assemble the writable bundle.

use crate::output::ResultBundle;
use crate::scenario::LoadedScenario;
use fieldplan_core::{
    run_experiment, simulate_tract_variable, ExperimentResult, Model, SimError, TargetMode,
};

/// Flag overrides from the command line; `None` keeps the scenario value.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub dt: Option<f64>,
    pub record_history: bool,
}

pub fn run_scenario(
    scenario: &LoadedScenario,
    overrides: &Overrides,
) -> Result<(ExperimentResult, ResultBundle), SimError> {
    let mut settings = scenario.run.clone();
    if let Some(seed) = overrides.seed {
        settings.seed = seed;
    }
    if let Some(dt) = overrides.dt {
        settings.dt = dt;
    }
    if overrides.record_history {
        settings.record_history = true;
    }

    let mut model = Model::new(scenario.model.clone(), scenario.grid.clone())?;
    let mut result = run_experiment(&mut model, &scenario.trials, &settings)?;

    if let Some(osc) = &scenario.oscillator {
        for trial in result.trials.iter_mut() {
            let has_target = match osc.mode {
                TargetMode::PlateauConstant => trial.peak_position.is_some(),
                TargetMode::TimeVarying => true,
            };
            if has_target {
                trial.tract_trajectory = Some(simulate_tract_variable(
                    trial,
                    &osc.params,
                    osc.mode,
                    osc.x0,
                    settings.dt,
                )?);
            }
        }
    }

    let mut bundle = ResultBundle::from_experiment(&result);
    if !scenario.write_trajectories {
        bundle.trajectories.clear();
    }
    Ok((result, bundle))
}
