//! Experiment execution: expand the sweep, run every trial, aggregate.

use std::time::Instant;

use rayon::prelude::*;

use crate::gear::{capacity, GridConfig};
use crate::planner::{makespan, plan_greedy, validate_plan, PlanError};
use crate::rng::derive_seed;

use super::stats::{mean, population_std};
use super::{generate_scenario, ExperimentKind, ExperimentSpec, SimError, SummaryRow, TrialRecord};

// Keeps the greedy planner's kick stream apart from the scenario draws.
const STREAM_KICKS: u64 = 0x4b49_434b;

/// Everything one experiment produces: the per-trial records in canonical
/// (point, trial) order, the per-point summaries, and any warnings about
/// points that had to be dropped from the summary.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRun {
    pub records: Vec<TrialRecord>,
    pub summaries: Vec<SummaryRow>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
struct Point {
    rows: u16,
    cols: u16,
    q: u32,
}

fn expand_points(spec: &ExperimentSpec) -> Result<Vec<Point>, SimError> {
    if spec.trials == 0 {
        return Err(SimError::NoTrials);
    }
    if spec.points.is_empty() {
        return Err(SimError::NoPoints);
    }
    spec.points
        .iter()
        .map(|&key| {
            let (rows, cols, q) = match spec.kind {
                ExperimentKind::GridSize => {
                    let side = u16::try_from(key).map_err(|_| SimError::BadPoint {
                        point: key,
                        message: "grid side does not fit u16".into(),
                    })?;
                    (side, side, spec.sensors)
                }
                ExperimentKind::Population => (spec.rows, spec.cols, key),
            };
            let config =
                GridConfig::new(rows, cols, spec.channels).map_err(|e| SimError::BadPoint {
                    point: key,
                    message: e.to_string(),
                })?;
            if q as u64 > capacity(&config) {
                return Err(SimError::OverCapacity {
                    rows,
                    cols,
                    q: q as u64,
                    capacity: capacity(&config),
                });
            }
            Ok(Point { rows, cols, q })
        })
        .collect()
}

/// Run every trial of the sweep and aggregate the results.
///
/// Trials execute in parallel but land in canonical (point, trial) order,
/// and each derives its seed from the experiment seed and its coordinates
/// alone, so the records are identical no matter the thread count.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentRun, SimError> {
    let points = expand_points(spec)?;
    let jobs: Vec<(Point, u32)> = points
        .iter()
        .flat_map(|&p| (0..spec.trials).map(move |t| (p, t)))
        .collect();
    let records: Vec<TrialRecord> = jobs
        .par_iter()
        .map(|&(point, trial)| run_trial(spec, &point, trial))
        .collect();
    let (summaries, warnings) = summarize(&records, spec.kind);
    Ok(ExperimentRun {
        records,
        summaries,
        warnings,
    })
}

fn trial_seed(spec: &ExperimentSpec, point: &Point, trial: u32) -> u64 {
    derive_seed(&[
        spec.seed,
        point.rows as u64,
        point.cols as u64,
        spec.channels as u64,
        point.q as u64,
        trial as u64,
    ])
}

fn run_trial(spec: &ExperimentSpec, point: &Point, trial: u32) -> TrialRecord {
    let seed = trial_seed(spec, point, trial);
    let config = GridConfig::new(point.rows, point.cols, spec.channels)
        .expect("points are validated before any trial runs");
    let scenario = generate_scenario(&config, point.q, seed)
        .expect("populations are validated before any trial runs");
    let mut params = spec.params;
    params.seed = derive_seed(&[seed, STREAM_KICKS]);

    let clock = Instant::now();
    let outcome = plan_greedy(&scenario, &params);
    let runtime_ms = if spec.record_runtime {
        clock.elapsed().as_millis() as u64
    } else {
        0
    };

    let (solved, steps, total_cost, makespan_s) = match outcome {
        Ok(plan) => {
            let report = validate_plan(&scenario, &plan);
            (
                report.valid && report.targets_met,
                plan.step_count as u64,
                plan.total_cost,
                makespan(&config, &plan.steps, &scenario.cost_model),
            )
        }
        Err(PlanError::StepBudget { partial, .. }) | Err(PlanError::Deadlock { partial, .. }) => (
            false,
            partial.step_count as u64,
            partial.total_cost,
            makespan(&config, &partial.steps, &scenario.cost_model),
        ),
        Err(_) => (false, 0, 0.0, 0.0),
    };

    TrialRecord {
        experiment: spec.kind,
        rows: point.rows,
        cols: point.cols,
        channels: spec.channels,
        q: point.q,
        trial,
        seed,
        solved,
        steps,
        total_cost,
        makespan_s,
        runtime_ms,
    }
}

/// Collapse records into one row per sweep point: mean and population
/// standard deviation of step counts over the solved trials, plus the
/// solved fraction. Points with no solved trials are omitted, each with a
/// warning naming it.
pub fn summarize(
    records: &[TrialRecord],
    kind: ExperimentKind,
) -> (Vec<SummaryRow>, Vec<String>) {
    let key_of = |r: &TrialRecord| match kind {
        ExperimentKind::GridSize => r.rows as u32,
        ExperimentKind::Population => r.q,
    };
    // First-appearance grouping keeps the sweep order of the records.
    let mut groups: Vec<(u32, Vec<f64>, u32)> = Vec::new();
    for record in records {
        let key = key_of(record);
        let group = match groups.iter_mut().find(|g| g.0 == key) {
            Some(g) => g,
            None => {
                groups.push((key, Vec::new(), 0));
                groups.last_mut().expect("just pushed")
            }
        };
        group.2 += 1;
        if record.solved {
            group.1.push(record.steps as f64);
        }
    }
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for (key, solved_steps, total) in groups {
        if solved_steps.is_empty() {
            warnings.push(format!(
                "point {key}: no solved trials, row omitted from the summary"
            ));
            continue;
        }
        rows.push(SummaryRow {
            key,
            mean_steps: mean(&solved_steps),
            std_steps: population_std(&solved_steps),
            solved_fraction: solved_steps.len() as f64 / total as f64,
        });
    }
    (rows, warnings)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summarize_means_only_the_solved_trials() {
        let mk = |q: u32, trial: u32, solved: bool, steps: u64| TrialRecord {
            experiment: ExperimentKind::Population,
            rows: 3,
            cols: 3,
            channels: 4,
            q,
            trial,
            seed: 0,
            solved,
            steps,
            total_cost: 0.0,
            makespan_s: 0.0,
            runtime_ms: 0,
        };
        let records = vec![
            mk(1, 0, true, 3),
            mk(1, 1, true, 5),
            mk(1, 2, false, 99),
            mk(2, 0, false, 7),
            mk(2, 1, false, 7),
        ];
        let (rows, warnings) = summarize(&records, ExperimentKind::Population);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].key, 1);
        assert_eq!(rows[0].mean_steps, 4.0);
        assert_eq!(rows[0].std_steps, 1.0);
        assert!((rows[0].solved_fraction - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("point 2"), "{}", warnings[0]);
    }

    #[test]
    fn rejects_empty_or_overloaded_sweeps() {
        let mut spec = ExperimentSpec::population(2, 2, 1, vec![1, 3]);
        assert!(matches!(
            run_experiment(&spec),
            Err(SimError::OverCapacity { q: 3, .. })
        ));
        spec.points = vec![];
        assert_eq!(run_experiment(&spec), Err(SimError::NoPoints));
        spec.points = vec![1];
        spec.trials = 0;
        assert_eq!(run_experiment(&spec), Err(SimError::NoTrials));
    }

    #[test]
    fn records_arrive_in_point_then_trial_order_with_stable_seeds() {
        let mut spec = ExperimentSpec::population(3, 3, 4, vec![1, 2]);
        spec.trials = 3;
        spec.seed = 42;
        let run = run_experiment(&spec).unwrap();
        assert_eq!(run.records.len(), 6);
        let coords: Vec<(u32, u32)> = run.records.iter().map(|r| (r.q, r.trial)).collect();
        assert_eq!(coords, vec![(1, 0), (1, 1), (1, 2), (2, 0), (2, 1), (2, 2)]);
        let again = run_experiment(&spec).unwrap();
        assert_eq!(run.records, again.records);
        let mut seeds: Vec<u64> = run.records.iter().map(|r| r.seed).collect();
        seeds.sort_unstable();
        seeds.dedup();
        assert_eq!(seeds.len(), 6, "per-trial seeds must not collide");
    }

    #[test]
    fn tiny_population_sweep_solves_everything() {
        let mut spec = ExperimentSpec::population(3, 3, 4, vec![1, 2, 4]);
        spec.trials = 4;
        spec.seed = 7;
        let run = run_experiment(&spec).unwrap();
        assert!(run.records.iter().all(|r| r.solved), "{:#?}", run.records);
        assert!(run.warnings.is_empty());
        assert_eq!(run.summaries.len(), 3);
        for row in &run.summaries {
            assert_eq!(row.solved_fraction, 1.0);
        }
    }
}
