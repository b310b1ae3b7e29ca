//! Fixed-format CSV rendering. Column order and float precision are pinned
//! so identical runs serialize byte-identically.

use std::fmt::Write;

use super::{SummaryRow, TrialRecord};

pub fn records_csv(records: &[TrialRecord]) -> String {
    let mut out = String::from(
        "experiment,rows,cols,channels,q,trial,seed,solved,steps,total_cost,makespan_s,runtime_ms\n",
    );
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{:.6},{:.3},{}",
            r.experiment.as_str(),
            r.rows,
            r.cols,
            r.channels,
            r.q,
            r.trial,
            r.seed,
            r.solved,
            r.steps,
            r.total_cost,
            r.makespan_s,
            r.runtime_ms,
        )
        .expect("writing to a String cannot fail");
    }
    out
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from("key,mean_steps,std_steps,solved_fraction\n");
    for row in rows {
        writeln!(
            out,
            "{},{:.6},{:.6},{:.6}",
            row.key, row.mean_steps, row.std_steps, row.solved_fraction,
        )
        .expect("writing to a String cannot fail");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::ExperimentKind;

    #[test]
    fn records_render_with_pinned_precision() {
        let record = TrialRecord {
            experiment: ExperimentKind::GridSize,
            rows: 4,
            cols: 4,
            channels: 4,
            q: 4,
            trial: 2,
            seed: 99,
            solved: true,
            steps: 11,
            total_cost: 5.78,
            makespan_s: 3.1,
            runtime_ms: 0,
        };
        let csv = records_csv(&[record]);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "experiment,rows,cols,channels,q,trial,seed,solved,steps,total_cost,makespan_s,runtime_ms"
        );
        assert_eq!(
            lines.next().unwrap(),
            "grid_size,4,4,4,4,2,99,true,11,5.780000,3.100,0"
        );
        assert_eq!(lines.next(), None);
    }

    #[test]
    fn summaries_render_one_row_per_point() {
        let rows = vec![SummaryRow {
            key: 8,
            mean_steps: 12.25,
            std_steps: 0.5,
            solved_fraction: 1.0,
        }];
        assert_eq!(
            summary_csv(&rows),
            "key,mean_steps,std_steps,solved_fraction\n8,12.250000,0.500000,1.000000\n"
        );
    }
}
