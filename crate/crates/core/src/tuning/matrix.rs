use std::fmt::Write as _;

use serde::Serialize;

use super::{population_sd, TuningError};
use crate::histogram::{modal_peak, Peak};
use crate::ingest::MicroMidi;

/// Pieces by scale-degree columns. `None` marks a degree the piece lacks
/// (written as `0` in CSV exports).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PitchMatrix {
    pub piece_ids: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
    /// Score note behind each cell, when known.
    pub labels: Vec<Vec<Option<MicroMidi>>>,
}

impl PitchMatrix {
    pub fn new(piece_ids: Vec<String>, rows: Vec<Vec<Option<f64>>>) -> Result<Self, TuningError> {
        let labels = rows.iter().map(|r| vec![None; r.len()]).collect();
        let m = PitchMatrix { piece_ids, rows, labels };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), TuningError> {
        let bad = |msg: String| Err(TuningError::InvalidMatrix(msg));
        if self.piece_ids.len() != self.rows.len() || self.labels.len() != self.rows.len() {
            return bad("row, id and label counts differ".into());
        }
        let width = self.column_count();
        for (r, row) in self.rows.iter().enumerate() {
            if row.len() != width || self.labels[r].len() != width {
                return bad(format!("row {r} has {} entries, expected {width}", row.len()));
            }
            let present: Vec<f64> = row.iter().flatten().copied().collect();
            if present.iter().any(|v| !v.is_finite()) {
                return bad(format!("row {r} holds a non-finite value"));
            }
            if present.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("row {r} is not strictly increasing"));
            }
        }
        Ok(())
    }

    pub fn column_count(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r[j]).collect()
    }

    pub fn support(&self, j: usize) -> usize {
        self.rows.iter().filter(|r| r[j].is_some()).count()
    }

    /// Moves every present entry of row `r` by `delta` cents.
    pub fn shift_row(&mut self, r: usize, delta: f64) {
        self.rows[r].iter_mut().flatten().for_each(|v| *v += delta);
    }

    pub fn translate(&mut self, delta: f64) {
        for r in 0..self.rows.len() {
            self.shift_row(r, delta);
        }
    }

    /// Column with the most entries, lowest index on ties.
    pub fn reference_column(&self) -> Option<usize> {
        (0..self.column_count())
            .filter(|&j| self.support(j) > 0)
            .fold(None, |best: Option<usize>, j| match best {
                Some(b) if self.support(b) >= self.support(j) => Some(b),
                _ => Some(j),
            })
    }

    /// Translated so the reference column's mean sits at 0 cents.
    pub fn gauge_fixed(&self) -> Self {
        let mut out = self.clone();
        if let Some(j) = self.reference_column() {
            let col = self.column(j);
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            out.translate(-mean);
        }
        out
    }

    /// `piece_id,c0,c1,...` with `0` for absent entries.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("piece_id");
        for j in 0..self.column_count() {
            write!(out, ",c{j}").expect("writing to a String");
        }
        out.push('\n');
        for (id, row) in self.piece_ids.iter().zip(&self.rows) {
            out.push_str(id);
            for v in row {
                match v {
                    Some(v) => write!(out, ",{v:.6}"),
                    None => write!(out, ",0"),
                }
                .expect("writing to a String");
            }
            out.push('\n');
        }
        out
    }
}

/// Total over columns of the population standard deviation of the present
/// entries. Columns with a single entry contribute nothing.
pub fn cost(m: &PitchMatrix) -> f64 {
    (0..m.column_count()).map(|j| population_sd(&m.column(j))).sum()
}

#[derive(Debug, Clone, Copy)]
struct Item {
    piece: usize,
    peak: usize,
    value: f64,
}

/// Builds the initial pitch matrix from each piece's peaks.
///
/// Each piece is first translated so its heaviest peak sits at 0 cents.
/// All translated centres are then grouped by single linkage at
/// `link_threshold`. When a piece lands two peaks in one group, the one
/// nearest the group mean stays and the others are regrouped into new
/// columns. Pieces without peaks are skipped with a warning.
pub fn assemble_matrix(pieces: &[(String, Vec<Peak>)], link_threshold: f64) -> Result<PitchMatrix, TuningError> {
    if !(link_threshold > 0.0) {
        return Err(TuningError::InvalidParameter("link_threshold must be positive".into()));
    }
    let mut kept: Vec<(&String, &Vec<Peak>)> = Vec::new();
    for (id, peaks) in pieces {
        if peaks.is_empty() {
            log::warn!("piece {id} has no peaks; left out of the pitch matrix");
        } else {
            kept.push((id, peaks));
        }
    }
    if kept.is_empty() {
        return Err(TuningError::NoPieces);
    }

    let mut pending: Vec<Item> = Vec::new();
    for (p, (_, peaks)) in kept.iter().enumerate() {
        let origin = modal_peak(peaks).expect("non-empty").center;
        pending.extend(peaks.iter().enumerate().map(|(k, pk)| Item {
            piece: p,
            peak: k,
            value: pk.center - origin,
        }));
    }

    let mut columns: Vec<Vec<Item>> = Vec::new();
    while !pending.is_empty() {
        let mut losers = Vec::new();
        for cluster in single_linkage(pending, link_threshold) {
            let (stay, lose) = one_per_piece(cluster);
            columns.push(stay);
            losers.extend(lose);
        }
        pending = losers;
    }

    // Regrouped losers can break the left-to-right order of a row; move any
    // such entry to a column of its own until every row is increasing.
    loop {
        columns.sort_by(|a, b| mean(a).total_cmp(&mean(b)));
        let Some((earlier, later)) = first_order_violation(&columns, kept.len()) else {
            break;
        };
        // a singleton already sits at its own value; move the other entry
        let (col, idx) = if columns[later.0].len() > 1 { later } else { earlier };
        let item = columns[col].remove(idx);
        columns.push(vec![item]);
        columns.retain(|c| !c.is_empty());
    }

    let width = columns.len();
    let mut rows = vec![vec![None; width]; kept.len()];
    let mut labels = vec![vec![None; width]; kept.len()];
    for (j, col) in columns.iter().enumerate() {
        for it in col {
            rows[it.piece][j] = Some(it.value);
            labels[it.piece][j] = kept[it.piece].1[it.peak].note;
        }
    }
    let m = PitchMatrix {
        piece_ids: kept.iter().map(|(id, _)| (*id).clone()).collect(),
        rows,
        labels,
    };
    m.validate()?;
    Ok(m)
}

fn mean(items: &[Item]) -> f64 {
    items.iter().map(|i| i.value).sum::<f64>() / items.len() as f64
}

fn single_linkage(mut items: Vec<Item>, threshold: f64) -> Vec<Vec<Item>> {
    items.sort_by(|a, b| a.value.total_cmp(&b.value).then(a.piece.cmp(&b.piece)));
    let mut clusters: Vec<Vec<Item>> = Vec::new();
    for it in items {
        match clusters.last_mut() {
            Some(c) if it.value - c.last().expect("non-empty").value <= threshold => c.push(it),
            _ => clusters.push(vec![it]),
        }
    }
    clusters
}

fn one_per_piece(cluster: Vec<Item>) -> (Vec<Item>, Vec<Item>) {
    let m = mean(&cluster);
    let mut stay: Vec<Item> = Vec::new();
    let mut lose = Vec::new();
    for it in cluster {
        match stay.iter_mut().find(|s| s.piece == it.piece) {
            Some(s) if (it.value - m).abs() < (s.value - m).abs() => lose.push(std::mem::replace(s, it)),
            Some(_) => lose.push(it),
            None => stay.push(it),
        }
    }
    (stay, lose)
}

fn first_order_violation(columns: &[Vec<Item>], pieces: usize) -> Option<((usize, usize), (usize, usize))> {
    // last placed entry of each piece: (value, column, index)
    let mut last: Vec<Option<(f64, usize, usize)>> = vec![None; pieces];
    for (j, col) in columns.iter().enumerate() {
        for (k, it) in col.iter().enumerate() {
            if let Some((v, pj, pk)) = last[it.piece] {
                if it.value <= v {
                    return Some(((pj, pk), (j, k)));
                }
            }
        }
        for (k, it) in col.iter().enumerate() {
            last[it.piece] = Some((it.value, j, k));
        }
    }
    None
}
