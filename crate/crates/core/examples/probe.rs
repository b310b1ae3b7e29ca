//! Scratch measurement runs. Not part of the crate surface.

use std::time::Instant;

use gearmat::sim::stats::{linear_r2, spearman};
use gearmat::sim::{run_experiment, summarize, ExperimentSpec};

fn main() {
    for seed in [42u64, 7, 1234] {
        let mut spec = ExperimentSpec::population(3, 3, 4, vec![1, 2, 4, 8, 16, 20]);
        spec.seed = seed;
        spec.params.restarts = 4;
        let t0 = Instant::now();
        let run = run_experiment(&spec).unwrap();
        let (rows, warnings) = summarize(&run.records, spec.kind);
        println!("== population seed {seed} ({:.1}s)", t0.elapsed().as_secs_f64());
        for w in &warnings {
            println!("   warn: {w}");
        }
        for row in &rows {
            println!(
                "   q={:<2} mean={:<6.2} std={:<5.2} solved={:.3}",
                row.key, row.mean_steps, row.std_steps, row.solved_fraction
            );
        }
        let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.key as f64, r.mean_steps)).collect();
        let rho = spearman(&pts);
        let std1 = rows.iter().find(|r| r.key == 1).map(|r| r.std_steps);
        let std20 = rows.iter().find(|r| r.key == 20).map(|r| r.std_steps);
        println!("   spearman={rho:.3}  std(1)={std1:?}  std(20)={std20:?}");
    }

    for seed in [42u64, 7] {
        let mut spec = ExperimentSpec::grid_size(vec![2, 4, 8, 16, 32, 64], 4, 4);
        spec.seed = seed;
        spec.params.restarts = 4;
        let t0 = Instant::now();
        let run = run_experiment(&spec).unwrap();
        let (rows, warnings) = summarize(&run.records, spec.kind);
        println!("== grid seed {seed} ({:.1}s)", t0.elapsed().as_secs_f64());
        for w in &warnings {
            println!("   warn: {w}");
        }
        for row in &rows {
            println!(
                "   n={:<2} mean={:<7.2} std={:<6.2} solved={:.3}",
                row.key, row.mean_steps, row.std_steps, row.solved_fraction
            );
        }
        let solved_total: usize = run.records.iter().filter(|r| r.solved).count();
        println!(
            "   solved {}/{}  nondecreasing={}",
            solved_total,
            run.records.len(),
            rows.windows(2).all(|w| w[1].mean_steps >= w[0].mean_steps)
        );
        let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.key as f64, r.mean_steps)).collect();
        println!("   r2(mean vs n)={:.3}", linear_r2(&pts));
    }
}
