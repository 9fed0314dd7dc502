//! Datasets, the experiment runner and the bounds-table emitter — the
//! operational surface behind the CLI and the examples.

pub mod config;
pub mod dataset;
pub mod report;
pub mod table;

use rayon::prelude::*;

use crate::baselines::{
    central_laplace, local_laplace, local_randomized_response, mse_central_laplace,
    mse_local_laplace, mse_local_randomized_response,
};
use crate::error::{Error, Result};
use crate::ikos::{mse_bound_ikos, plan_ikos, IkosProtocol};
use crate::recursive::{
    mse_bound_recursive, optimize_recursive_params, plan_recursive_basic, RecursiveProtocol,
};
use crate::sampling::RngStream;
use crate::shuffle::execute;
use config::{DatasetSpec, ExperimentConfig, ProtocolSelector};
use report::{Bound, ExperimentReport, REPORT_SCHEMA};

/// One run of a mechanism over a dataset: returns the private sum estimate.
pub type MechanismFn = Box<dyn Fn(&[f64], &mut RngStream) -> Result<f64> + Send + Sync>;

/// A planned mechanism: metadata for reporting plus the runnable closure.
/// `runner` is `None` exactly when the plan is infeasible.
pub struct PlannedMechanism {
    pub name: String,
    pub messages: Option<u32>,
    pub bound: Bound,
    pub formula: &'static str,
    pub runner: Option<MechanismFn>,
}

/// Plans the selected mechanism at `(n, epsilon, delta)`. Infeasible
/// planner outcomes produce a `PlannedMechanism` with an infinite bound and
/// no runner; genuine parameter errors propagate.
pub fn plan_mechanism(
    selector: ProtocolSelector,
    n: u64,
    epsilon: f64,
    delta: f64,
    messages: Option<usize>,
) -> Result<PlannedMechanism> {
    let infeasible = |name: &str, m: Option<u32>, formula: &'static str| PlannedMechanism {
        name: name.to_string(),
        messages: m,
        bound: Bound::Infinite,
        formula,
        runner: None,
    };
    match selector {
        ProtocolSelector::Single | ProtocolSelector::Recursive | ProtocolSelector::RecursiveOpt => {
            let m = match selector {
                ProtocolSelector::Single => 1,
                _ => messages.unwrap_or(2),
            };
            let formula: &'static str = "n/(4 q_m^2) + sum_j B_j/q_j^2";
            let planned = if selector == ProtocolSelector::RecursiveOpt {
                optimize_recursive_params(epsilon, delta, n, m)
            } else {
                plan_recursive_basic(epsilon, delta, n, m)
            };
            match planned {
                Ok(params) => {
                    let bound = Bound::from_f64(mse_bound_recursive(&params));
                    let protocol = RecursiveProtocol { params };
                    Ok(PlannedMechanism {
                        name: selector.to_string(),
                        messages: Some(m as u32),
                        bound,
                        formula,
                        runner: Some(Box::new(move |data, rng| {
                            execute(&protocol, data, rng).map(|(_, out)| out)
                        })),
                    })
                }
                Err(Error::Infeasible(_)) => {
                    Ok(infeasible(&selector.to_string(), Some(m as u32), formula))
                }
                Err(e) => Err(e),
            }
        }
        ProtocolSelector::Ikos => {
            let params = plan_ikos(epsilon, delta, n)?;
            let bound = Bound::Finite(mse_bound_ikos(epsilon, n, params.p, params.q));
            let m = params.m_total;
            let protocol = IkosProtocol { params };
            Ok(PlannedMechanism {
                name: selector.to_string(),
                messages: Some(m),
                bound,
                formula: "2a/(p^2(1-a)^2) + n/(4p^2) + (q/p)^2 a^((q-np)/2)",
                runner: Some(Box::new(move |data, rng| {
                    execute(&protocol, data, rng).map(|(_, out)| out)
                })),
            })
        }
        ProtocolSelector::CentralLaplace => Ok(PlannedMechanism {
            name: selector.to_string(),
            messages: None,
            bound: Bound::Finite(mse_central_laplace(epsilon)),
            formula: "2/eps^2",
            runner: Some(Box::new(move |data, rng| central_laplace(data, epsilon, rng))),
        }),
        ProtocolSelector::LocalLaplace => Ok(PlannedMechanism {
            name: selector.to_string(),
            messages: Some(1),
            bound: Bound::Finite(mse_local_laplace(n, epsilon)),
            formula: "2n/eps^2",
            runner: Some(Box::new(move |data, rng| local_laplace(data, epsilon, rng))),
        }),
        ProtocolSelector::LocalRr => Ok(PlannedMechanism {
            name: selector.to_string(),
            messages: Some(1),
            bound: Bound::Finite(mse_local_randomized_response(n, epsilon)),
            formula: "n*(e^eps/(e^eps-1)^2 + 1/4)",
            runner: Some(Box::new(move |data, rng| {
                local_randomized_response(data, epsilon, rng)
            })),
        }),
    }
}

/// Materializes the dataset for a config. CSV datasets define their own
/// size; synthetic ones use `config.n`. Stream 0 of the seed is reserved
/// for data generation, trials use streams `1..`.
pub fn build_dataset(config: &ExperimentConfig) -> Result<Vec<f64>> {
    match &config.dataset {
        DatasetSpec::Uniform => Ok(dataset::gen_uniform(config.n as usize, config.seed)),
        DatasetSpec::Normal { mean, std } => {
            dataset::gen_normal(config.n as usize, *mean, *std, config.seed)
        }
        DatasetSpec::Csv {
            path,
            column,
            normalizer,
        } => dataset::load_csv(path, column, *normalizer),
    }
}

/// Runs a mechanism `runs` times over fixed data with independent
/// substreams and reports the per-run standard error `|sum - estimate|/n`.
/// Trials execute in parallel; aggregation is ordered by run index.
pub fn run_mechanism(
    mechanism: &MechanismFn,
    data: &[f64],
    runs: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    (0..runs)
        .into_par_iter()
        .map(|trial| {
            let mut rng = RngStream::new(seed, trial + 1);
            mechanism(data, &mut rng)
        })
        .collect()
}

/// Executes the full experiment described by `config`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let data = build_dataset(config)?;
    let n = data.len() as u64;
    let delta = config.delta.unwrap_or_else(|| 1.0 / (n as f64 * n as f64));
    let planned = plan_mechanism(config.protocol, n, config.epsilon, delta, config.messages)?;

    let mut report = ExperimentReport {
        schema: REPORT_SCHEMA,
        protocol: planned.name.clone(),
        n,
        epsilon: config.epsilon,
        delta,
        messages: planned.messages,
        runs: 0,
        seed: config.seed,
        dataset: config.dataset.label(),
        formula: planned.formula,
        analytic_mse_bound: planned.bound,
        true_sum: data.iter().sum(),
        per_run_std_error: Vec::new(),
        mean_std_error: None,
        std_dev_std_error: None,
        empirical_mse: None,
        mean_output: None,
    };
    let Some(runner) = planned.runner else {
        return Ok(report);
    };

    let outputs = run_mechanism(&runner, &data, config.runs, config.seed)?;
    let true_sum = report.true_sum;
    let errors: Vec<f64> = outputs
        .iter()
        .map(|out| (true_sum - out).abs() / n as f64)
        .collect();
    let runs = outputs.len() as f64;
    let mean_se = errors.iter().sum::<f64>() / runs;
    let var_se = errors.iter().map(|e| (e - mean_se).powi(2)).sum::<f64>() / runs;
    report.runs = config.runs;
    report.mean_std_error = Some(mean_se);
    report.std_dev_std_error = Some(var_se.sqrt());
    report.empirical_mse =
        Some(outputs.iter().map(|o| (o - true_sum).powi(2)).sum::<f64>() / runs);
    report.mean_output = Some(outputs.iter().sum::<f64>() / runs);
    report.per_run_std_error = errors;
    Ok(report)
}
