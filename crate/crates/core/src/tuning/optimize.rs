use std::fmt::Write as _;

use serde::Serialize;

use super::{cost, population_sd, PitchMatrix, TuningError};

/// Cost after every row trial, in execution order. Step 0 is the initial
/// matrix.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CostTrace {
    pub values: Vec<(usize, f64)>,
}

impl CostTrace {
    pub fn initial(&self) -> Option<f64> {
        self.values.first().map(|v| v.1)
    }

    pub fn last(&self) -> Option<f64> {
        self.values.last().map(|v| v.1)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,cost\n");
        for (step, c) in &self.values {
            writeln!(out, "{step},{c}").expect("writing to a String");
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizeResult {
    pub matrix: PitchMatrix,
    pub trace: CostTrace,
    /// Net integer shift applied to each row, in cents.
    pub shifts: Vec<i64>,
    pub trials: usize,
    pub accepted: usize,
}

impl OptimizeResult {
    pub fn final_cost(&self) -> f64 {
        self.trace.last().unwrap_or(0.0)
    }
}

struct State<'a> {
    base: &'a PitchMatrix,
    shifts: Vec<i64>,
    column_sd: Vec<f64>,
}

impl State<'_> {
    fn value(&self, r: usize, j: usize, extra: i64) -> Option<f64> {
        self.base.rows[r][j].map(|v| v + (self.shifts[r] + extra) as f64)
    }

    fn column_sd_with(&self, j: usize, row: usize, extra: i64) -> f64 {
        let col: Vec<f64> = (0..self.base.row_count())
            .filter_map(|r| self.value(r, j, if r == row { extra } else { 0 }))
            .collect();
        population_sd(&col)
    }

    fn total(sds: &[f64]) -> f64 {
        sds.iter().sum()
    }

    fn materialise(&self) -> PitchMatrix {
        let mut m = self.base.clone();
        for (r, row) in m.rows.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = self.value(r, j, 0);
            }
        }
        m
    }
}

/// Greedy row-shift search.
///
/// Each sweep tries `+1` cent on every row in order, then `-1` cent on every
/// row. A trial is kept only if the total cost strictly decreases. The
/// search stops after `max_sweeps` sweeps or `patience` consecutive rejected
/// trials. Rows move rigidly and absent cells stay absent.
pub fn optimize(m: &PitchMatrix, max_sweeps: usize, patience: usize) -> Result<OptimizeResult, TuningError> {
    if max_sweeps == 0 || patience == 0 {
        return Err(TuningError::InvalidParameter("max_sweeps and patience must be at least 1".into()));
    }
    m.validate()?;
    let rows = m.row_count();
    let mut st = State {
        base: m,
        shifts: vec![0; rows],
        column_sd: (0..m.column_count()).map(|j| population_sd(&m.column(j))).collect(),
    };
    let mut current = State::total(&st.column_sd);
    let mut trace = CostTrace { values: vec![(0, current)] };
    let (mut trials, mut accepted, mut stale) = (0usize, 0usize, 0usize);

    'sweeps: for _ in 0..max_sweeps {
        for delta in [1i64, -1] {
            for r in 0..rows {
                trials += 1;
                let touched: Vec<usize> = (0..m.column_count()).filter(|&j| m.rows[r][j].is_some()).collect();
                let mut candidate = st.column_sd.clone();
                for &j in &touched {
                    candidate[j] = st.column_sd_with(j, r, delta);
                }
                let c = State::total(&candidate);
                if c < current {
                    st.shifts[r] += delta;
                    st.column_sd = candidate;
                    current = c;
                    accepted += 1;
                    stale = 0;
                } else {
                    stale += 1;
                }
                trace.values.push((trials, current));
                if stale >= patience {
                    break 'sweeps;
                }
            }
        }
    }

    Ok(OptimizeResult {
        matrix: st.materialise(),
        trace,
        shifts: st.shifts,
        trials,
        accepted,
    })
}

/// Exhaustive search over integer shifts in `[-bound, bound]` for every row
/// but the first, which stays put. Returns the shifts and the optimal cost;
/// ties keep the lexicographically first shift vector.
pub fn brute_force_optimize(m: &PitchMatrix, bound: i64) -> Result<(Vec<i64>, f64), TuningError> {
    let rows = m.row_count();
    if rows == 0 || rows > 4 || !(0..=40).contains(&bound) {
        return Err(TuningError::TooLarge(format!(
            "{rows} rows with bound {bound}; at most 4 rows and bound 40"
        )));
    }
    m.validate()?;
    let mut shifts = vec![0i64; rows];
    for s in shifts.iter_mut().skip(1) {
        *s = -bound;
    }
    let mut best = (shifts.clone(), f64::INFINITY);
    let mut work = m.clone();
    loop {
        for ((row, base), &k) in work.rows.iter_mut().zip(&m.rows).zip(&shifts) {
            for (cell, b) in row.iter_mut().zip(base) {
                *cell = b.map(|v| v + k as f64);
            }
        }
        let c = cost(&work);
        if c < best.1 {
            best = (shifts.clone(), c);
        }
        // odometer over rows 1..
        let mut r = rows - 1;
        loop {
            if r == 0 {
                return Ok(best);
            }
            if shifts[r] < bound {
                shifts[r] += 1;
                break;
            }
            shifts[r] = -bound;
            r -= 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn matrix(rows: Vec<Vec<Option<f64>>>) -> PitchMatrix {
        let ids = (0..rows.len()).map(|i| format!("p{i}")).collect();
        PitchMatrix::new(ids, rows).unwrap()
    }

    fn offsets_instance(rng: &mut ChaCha8Rng, offsets: &[f64], cols: usize, noise: f64) -> PitchMatrix {
        let truth: Vec<f64> = (0..cols).map(|j| j as f64 * 170.0).collect();
        let n = Normal::new(0.0, noise).unwrap();
        matrix(
            offsets
                .iter()
                .map(|o| truth.iter().map(|t| Some(t + o + n.sample(rng))).collect())
                .collect(),
        )
    }

    #[test]
    fn optimal_matrix_is_left_alone() {
        let m = matrix(vec![vec![Some(0.0), Some(150.0), Some(350.0)]; 3]);
        let r = optimize(&m, 1000, 6).unwrap();
        assert_eq!(r.accepted, 0);
        assert_eq!(r.trials, 6);
        assert_eq!(r.matrix, m);
    }

    #[test]
    fn constant_offset_is_removed() {
        let m = matrix(vec![
            vec![Some(0.0), Some(200.0), Some(350.0)],
            vec![Some(10.0), Some(210.0), Some(360.0)],
        ]);
        let r = optimize(&m, 1000, 4).unwrap();
        assert_eq!(r.final_cost(), 0.0);
        assert_eq!(r.accepted, 10);
        assert_eq!((r.shifts[0] - r.shifts[1]).abs(), 10);
    }

    #[test]
    fn brute_force_trivial_cases() {
        let m = matrix(vec![vec![Some(0.0), Some(150.0)]; 3]);
        assert_eq!(brute_force_optimize(&m, 5).unwrap(), (vec![0, 0, 0], 0.0));
        let m = matrix(vec![vec![Some(0.0), Some(150.0)], vec![Some(10.0), Some(160.0)]]);
        assert_eq!(brute_force_optimize(&m, 20).unwrap(), (vec![0, -10], 0.0));
        assert!(matches!(brute_force_optimize(&m, 41), Err(TuningError::TooLarge(_))));
        let big = matrix(vec![vec![Some(0.0)]; 5]);
        assert!(matches!(brute_force_optimize(&big, 3), Err(TuningError::TooLarge(_))));
    }

    #[test]
    fn greedy_near_brute_force_with_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = offsets_instance(&mut rng, &[-7.0, 0.0, 12.0], 5, 1.0);
        let (_, best) = brute_force_optimize(&m, 30).unwrap();
        let r = optimize(&m, 1000, 6).unwrap();
        assert!(r.final_cost() >= best - 1e-9);
        assert!(r.final_cost() <= best * 1.05 + 1e-9, "greedy {} vs optimum {best}", r.final_cost());
    }

    #[test]
    fn greedy_never_beats_brute_force() {
        for seed in 0..50 {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let rows = rng.random_range(2..=3);
            let offsets: Vec<f64> = (0..rows).map(|_| rng.random_range(-8.0..8.0)).collect();
            let mut m = offsets_instance(&mut rng, &offsets, 4, 3.0);
            for r in 0..rows {
                if rng.random_bool(0.3) {
                    m.rows[r][rng.random_range(0..4)] = None;
                }
            }
            let (_, best) = brute_force_optimize(&m, 25).unwrap();
            let r = optimize(&m, 1000, 2 * rows).unwrap();
            assert!(r.final_cost() >= best - 1e-9, "seed {seed}");
        }
    }

    #[test]
    fn invariants_hold() {
        for seed in 0..30 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let offsets: Vec<f64> = (0..6).map(|_| rng.random_range(-40.0..40.0)).collect();
            let mut m = offsets_instance(&mut rng, &offsets, 6, 4.0);
            for r in 0..6 {
                if rng.random_bool(0.5) {
                    m.rows[r][rng.random_range(0..6)] = None;
                }
            }
            let (n, l) = (50, 12);
            let r = optimize(&m, n, l).unwrap();
            assert!(r.trials <= n * 2 * m.row_count());
            assert!(r.final_cost() <= r.trace.initial().unwrap());
            assert!(r.trace.values.windows(2).all(|w| w[1].1 <= w[0].1));
            for (a, b) in m.rows.iter().zip(&r.matrix.rows) {
                for j in 0..a.len() {
                    assert_eq!(a[j].is_some(), b[j].is_some());
                    for k in 0..a.len() {
                        if let (Some(x), Some(y), Some(u), Some(v)) = (a[j], a[k], b[j], b[k]) {
                            assert!(((x - y) - (u - v)).abs() < 1e-9);
                        }
                    }
                }
            }
            assert_eq!(optimize(&m, n, l).unwrap(), r);
        }
    }

    #[test]
    fn rejects_zero_parameters() {
        let m = matrix(vec![vec![Some(0.0)]]);
        assert!(optimize(&m, 0, 1).is_err());
        assert!(optimize(&m, 1, 0).is_err());
    }

    #[test]
    fn trace_csv() {
        let t = CostTrace { values: vec![(0, 2.5), (1, 2.0)] };
        assert_eq!(t.to_csv(), "step,cost\n0,2.5\n1,2\n");
    }
}
