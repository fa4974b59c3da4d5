use serde::Serialize;

use super::{population_sd, PitchMatrix, TuningError};
use crate::ingest::MicroMidi;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TuningDegree {
    pub degree_index: usize,
    pub mean_cents: f64,
    pub stdev_cents: f64,
    pub support: usize,
    pub label: Option<String>,
    pub fluid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Tuning {
    pub degrees: Vec<TuningDegree>,
}

impl Tuning {
    pub fn means(&self) -> Vec<f64> {
        self.degrees.iter().map(|d| d.mean_cents).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tuning serialises")
    }
}

/// Averages every column with at least `min_support` entries and expresses
/// the means relative to the best-supported column. Columns whose spread
/// reaches `fluid_stdev` are flagged as fluid.
pub fn derive_tuning(m: &PitchMatrix, min_support: usize, fluid_stdev: f64) -> Result<Tuning, TuningError> {
    m.validate()?;
    let kept: Vec<usize> = (0..m.column_count()).filter(|&j| m.support(j) >= min_support.max(1)).collect();
    if kept.is_empty() {
        return Err(TuningError::EmptyTuning(min_support));
    }
    let reference = kept
        .iter()
        .copied()
        .fold(kept[0], |b, j| if m.support(j) > m.support(b) { j } else { b });
    let col_mean = |j: usize| {
        let c = m.column(j);
        c.iter().sum::<f64>() / c.len() as f64
    };
    let origin = col_mean(reference);
    let degrees = kept
        .iter()
        .enumerate()
        .map(|(k, &j)| {
            let sd = population_sd(&m.column(j));
            TuningDegree {
                degree_index: k,
                mean_cents: col_mean(j) - origin,
                stdev_cents: sd,
                support: m.support(j),
                label: modal_label(m, j).map(|n| n.name()),
                fluid: sd >= fluid_stdev,
            }
        })
        .collect();
    Ok(Tuning { degrees })
}

fn modal_label(m: &PitchMatrix, j: usize) -> Option<MicroMidi> {
    let mut counts: std::collections::BTreeMap<MicroMidi, usize> = Default::default();
    for row in &m.labels {
        if let Some(n) = row[j] {
            *counts.entry(n).or_default() += 1;
        }
    }
    // BTreeMap iterates ascending, so strict > keeps the lowest note on ties
    counts
        .into_iter()
        .fold(None, |best: Option<(MicroMidi, usize)>, (n, c)| match best {
            Some((_, bc)) if bc >= c => best,
            _ => Some((n, c)),
        })
        .map(|(n, _)| n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: Vec<Vec<Option<f64>>>) -> PitchMatrix {
        let ids = (0..rows.len()).map(|i| format!("p{i}")).collect();
        PitchMatrix::new(ids, rows).unwrap()
    }

    #[test]
    fn identical_rows() {
        let t = derive_tuning(&matrix(vec![vec![Some(0.0), Some(150.0), Some(350.0)]; 4]), 1, 10.0).unwrap();
        assert_eq!(t.means(), vec![0.0, 150.0, 350.0]);
        assert!(t.degrees.iter().all(|d| d.stdev_cents == 0.0 && d.support == 4 && !d.fluid));
    }

    #[test]
    fn gauge_on_best_supported_column() {
        let m = matrix(vec![
            vec![None, Some(100.0), Some(300.0)],
            vec![Some(-50.0), Some(104.0), None],
        ]);
        let t = derive_tuning(&m, 1, 10.0).unwrap();
        assert_eq!(t.means(), vec![-152.0, 0.0, 198.0]);
        let t = derive_tuning(&m, 2, 10.0).unwrap();
        assert_eq!(t.degrees.len(), 1);
        assert_eq!(t.degrees[0].stdev_cents, 2.0);
        assert_eq!(derive_tuning(&m, 3, 10.0).unwrap_err(), TuningError::EmptyTuning(3));
    }

    #[test]
    fn fluid_flag_and_labels() {
        let mut m = matrix(vec![
            vec![Some(0.0), Some(120.0)],
            vec![Some(0.0), Some(180.0)],
            vec![Some(0.0), Some(150.0)],
        ]);
        m.labels[0][0] = Some(MicroMidi::new(110).unwrap());
        m.labels[1][0] = Some(MicroMidi::new(110).unwrap());
        m.labels[2][0] = Some(MicroMidi::new(112).unwrap());
        let t = derive_tuning(&m, 1, 10.0).unwrap();
        assert!(!t.degrees[0].fluid);
        assert!(t.degrees[1].fluid && t.degrees[1].stdev_cents >= 12.0);
        assert_eq!(t.degrees[0].label.as_deref(), Some("G2"));
        assert_eq!(t.degrees[1].label, None);
        let json: serde_json::Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(json[0]["degree_index"], 0);
        assert_eq!(json[1]["mean_cents"], 150.0);
    }
}
