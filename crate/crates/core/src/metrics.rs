//! Classification decisions, error counts and per-iteration trajectories.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::graph::FeatureMatrix;

/// Row-wise argmax. Ties go to the lowest class index.
pub fn classify(f: &FeatureMatrix) -> Vec<usize> {
    (0..f.rows()).map(|r| argmax(f.row(r))).collect()
}

pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = k;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorSummary {
    pub count: usize,
    /// Unlabelled nodes considered.
    pub total: usize,
    pub percentage: f64,
}

/// Misclassified unlabelled nodes. All slices are row-aligned.
pub fn error_against(pred: &[usize], truth: &[usize], labeled: &[bool]) -> Result<ErrorSummary> {
    if pred.len() != truth.len() || pred.len() != labeled.len() {
        return Err(Error::dims(format!(
            "predictions {}, truth {}, label mask {}",
            pred.len(),
            truth.len(),
            labeled.len()
        )));
    }
    let mut count = 0;
    let mut total = 0;
    for ((p, t), &l) in pred.iter().zip(truth).zip(labeled) {
        if l {
            continue;
        }
        total += 1;
        if p != t {
            count += 1;
        }
    }
    let percentage = if total == 0 {
        0.0
    } else {
        100.0 * count as f64 / total as f64
    };
    Ok(ErrorSummary {
        count,
        total,
        percentage,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub iteration: usize,
    pub error_count: usize,
    pub error_pct: f64,
    pub n_nodes: usize,
}

pub const TRAJECTORY_HEADER: [&str; 4] = ["iteration", "error_count", "error_pct", "n_nodes"];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrajectoryRecord {
    pub rows: Vec<TrajectoryRow>,
    /// Optional per-iteration class snapshots, aligned with `rows`.
    pub snapshots: Option<Vec<Vec<usize>>>,
}

impl TrajectoryRecord {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_snapshots() -> Self {
        Self {
            rows: Vec::new(),
            snapshots: Some(Vec::new()),
        }
    }

    /// Appends a row; iteration indices must strictly increase.
    pub fn push(&mut self, iteration: usize, error: ErrorSummary, n_nodes: usize) {
        if let Some(last) = self.rows.last() {
            assert!(iteration > last.iteration, "iterations must increase");
        }
        self.rows.push(TrajectoryRow {
            iteration,
            error_count: error.count,
            error_pct: error.percentage,
            n_nodes,
        });
    }

    pub fn push_snapshot(&mut self, classes: Vec<usize>) {
        if let Some(s) = self.snapshots.as_mut() {
            s.push(classes);
        }
    }

    pub fn last(&self) -> Option<&TrajectoryRow> {
        self.rows.last()
    }

    /// `iteration,error_count,error_pct,n_nodes`, plus an `iter_per_avg_degree`
    /// column when `avg_degree` is given.
    pub fn write_csv<W: Write>(&self, out: W, avg_degree: Option<f64>) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = TRAJECTORY_HEADER.to_vec();
        if avg_degree.is_some() {
            header.push("iter_per_avg_degree");
        }
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![
                r.iteration.to_string(),
                r.error_count.to_string(),
                r.error_pct.to_string(),
                r.n_nodes.to_string(),
            ];
            if let Some(d) = avg_degree {
                rec.push((r.iteration as f64 / d).to_string());
            }
            w.write_record(&rec)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(input);
        let headers = rd.headers()?.clone();
        if headers.len() < 4 || headers.iter().take(4).ne(TRAJECTORY_HEADER) {
            return Err(Error::invalid(format!("unexpected trajectory header {headers:?}")));
        }
        let mut rec = Self::new();
        for row in rd.records() {
            let row = row?;
            let field = |i: usize| {
                row.get(i)
                    .ok_or_else(|| Error::invalid("short trajectory row"))
                    .map(str::to_owned)
            };
            let parse_err = |e: String| Error::invalid(format!("trajectory field: {e}"));
            rec.rows.push(TrajectoryRow {
                iteration: field(0)?.parse().map_err(|e| parse_err(format!("{e}")))?,
                error_count: field(1)?.parse().map_err(|e| parse_err(format!("{e}")))?,
                error_pct: field(2)?.parse().map_err(|e| parse_err(format!("{e}")))?,
                n_nodes: field(3)?.parse().map_err(|e| parse_err(format!("{e}")))?,
            });
        }
        Ok(rec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn classify_examples() {
        let f = FeatureMatrix::from_rows(&[vec![0.6, 0.4], vec![0.5, 0.5], vec![0.1, 0.2]]).unwrap();
        assert_eq!(classify(&f), vec![0, 0, 1]);
    }

    #[test]
    fn error_examples() {
        let truth = vec![0, 1, 2, 0];
        let none = vec![false; 4];
        let e = error_against(&truth, &truth, &none).unwrap();
        assert_eq!((e.count, e.percentage), (0, 0.0));

        let truth = vec![0; 10];
        let pred = vec![1; 10];
        let e = error_against(&pred, &truth, &[false; 10]).unwrap();
        assert_eq!((e.count, e.percentage), (10, 100.0));

        let mut mask = vec![false; 10];
        mask[0] = true;
        let e = error_against(&pred, &truth, &mask).unwrap();
        assert_eq!((e.count, e.total), (9, 9));

        assert!(error_against(&[0], &[0, 1], &[false]).is_err());
    }

    #[test]
    fn csv_roundtrip() {
        let mut t = TrajectoryRecord::new();
        t.push(1, ErrorSummary { count: 3, total: 7, percentage: 300.0 / 7.0 }, 10);
        t.push(2, ErrorSummary { count: 0, total: 7, percentage: 0.0 }, 10);
        let mut buf = Vec::new();
        t.write_csv(&mut buf, None).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("iteration,error_count,error_pct,n_nodes\n1,3,42.857142857142854,10\n"));
        assert_eq!(TrajectoryRecord::read_csv(buf.as_slice()).unwrap(), t);

        let mut buf = Vec::new();
        t.write_csv(&mut buf, Some(4.0)).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().contains("n_nodes,iter_per_avg_degree\n1,3,"));
        assert_eq!(TrajectoryRecord::read_csv(buf.as_slice()).unwrap().rows, t.rows);
    }

    proptest! {
        #[test]
        fn argmax_invariant_under_shift_and_scale(
            row in prop::collection::vec(-10.0f64..10.0, 1..6),
            shift in -5.0f64..5.0,
            scale in 0.1f64..10.0,
        ) {
            let f = FeatureMatrix::from_rows(std::slice::from_ref(&row)).unwrap();
            let g = FeatureMatrix::from_rows(&[row.iter().map(|v| v * scale).collect::<Vec<_>>()]).unwrap();
            prop_assert_eq!(classify(&f), classify(&g));
            // Shifts can reorder values that differ only by rounding; use a
            // shift that is exact for these magnitudes.
            let s = (shift * 8.0).round() / 8.0;
            let h: Vec<f64> = row.iter().map(|v| ((v * 8.0).round() / 8.0) + s).collect();
            let base: Vec<f64> = row.iter().map(|v| (v * 8.0).round() / 8.0).collect();
            prop_assert_eq!(argmax(&h), argmax(&base));
        }

        #[test]
        fn error_is_permutation_invariant(
            data in prop::collection::vec((0usize..3, 0usize..3, any::<bool>()), 1..40),
            seed in any::<u64>(),
        ) {
            let pred: Vec<usize> = data.iter().map(|d| d.0).collect();
            let truth: Vec<usize> = data.iter().map(|d| d.1).collect();
            let mask: Vec<bool> = data.iter().map(|d| d.2).collect();
            let mut order: Vec<usize> = (0..data.len()).collect();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let p2: Vec<usize> = order.iter().map(|&i| pred[i]).collect();
            let t2: Vec<usize> = order.iter().map(|&i| truth[i]).collect();
            let m2: Vec<bool> = order.iter().map(|&i| mask[i]).collect();
            prop_assert_eq!(
                error_against(&pred, &truth, &mask).unwrap(),
                error_against(&p2, &t2, &m2).unwrap()
            );
        }
    }
}
