//! Dense two-phase revised simplex for small equality-form LPs:
//!
//! ```text
//! minimize cᵀx  subject to  A x = b,  x ≥ 0
//! ```
//!
//! The problems solved here have at most a few dozen rows and a few
//! thousand columns, so the basis is refactored from scratch every pivot.
//! That keeps the primal values at the accuracy of a single LU solve no
//! matter how many pivots were taken.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::tol;

const PIVOT_TOL: f64 = 1e-11;
const OPTIMALITY_TOL: f64 = 1e-11;
const DEGENERATE_STEP: f64 = 1e-13;
/// Consecutive degenerate pivots before switching to Bland's rule.
const STALL_LIMIT: usize = 60;
const MAX_ITERATIONS: usize = 100_000;

#[derive(Debug, Clone)]
pub struct StandardLp {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: DVector<f64>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: DVector<f64>,
    pub objective: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

impl StandardLp {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, c: DVector<f64>) -> Result<Self> {
        if a.nrows() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                got: b.len(),
            });
        }
        if a.ncols() != c.len() {
            return Err(Error::DimensionMismatch {
                expected: a.ncols(),
                got: c.len(),
            });
        }
        Ok(Self { a, b, c })
    }

    pub fn solve(&self) -> Result<LpOutcome> {
        let Some(mut phase) = Phase::feasible_start(&self.a, &self.b)? else {
            return Ok(LpOutcome::Infeasible);
        };
        let iters_one = phase.iterations;
        match phase.run(&self.c)? {
            RunStatus::Optimal => {}
            RunStatus::Unbounded => return Ok(LpOutcome::Unbounded),
        }
        let x = phase.primal(self.a.ncols())?;
        Ok(LpOutcome::Optimal(LpSolution {
            objective: self.c.dot(&x),
            x,
            iterations: iters_one + phase.iterations,
        }))
    }
}

/// A point of `{x ≥ 0 : A x = b}`, or `None` when the set is empty.
pub fn find_feasible(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<Option<DVector<f64>>> {
    match Phase::feasible_start(a, b)? {
        Some(phase) => Ok(Some(phase.primal(a.ncols())?)),
        None => Ok(None),
    }
}

enum RunStatus {
    Optimal,
    Unbounded,
}

/// Working state of one simplex run: constraint data restricted to the
/// non-redundant rows, plus the current basis.
struct Phase {
    a: DMatrix<f64>,
    b: DVector<f64>,
    basis: Vec<usize>,
    /// Columns at or beyond this index are artificial and may not enter.
    enterable: usize,
    iterations: usize,
}

impl Phase {
    /// Phase one. Returns a phase positioned at a feasible basis of the
    /// structural columns only, or `None` when infeasible.
    fn feasible_start(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<Option<Self>> {
        let (m, n) = a.shape();
        let mut a_signed = a.clone();
        let mut b_signed = b.clone();
        for i in 0..m {
            if b_signed[i] < 0.0 {
                a_signed.row_mut(i).neg_mut();
                b_signed[i] = -b_signed[i];
            }
        }
        let mut aug = DMatrix::zeros(m, n + m);
        aug.view_mut((0, 0), (m, n)).copy_from(&a_signed);
        for i in 0..m {
            aug[(i, n + i)] = 1.0;
        }
        let mut cost = DVector::zeros(n + m);
        cost.rows_mut(n, m).fill(1.0);

        let mut phase = Phase {
            a: aug,
            b: b_signed,
            basis: (n..n + m).collect(),
            enterable: n,
            iterations: 0,
        };
        if m == 0 {
            return Ok(Some(phase));
        }
        match phase.run(&cost)? {
            RunStatus::Optimal => {}
            RunStatus::Unbounded => {
                return Err(Error::SolverError("phase one reported unbounded".into()))
            }
        }
        let xb = phase.basic_values()?;
        let infeasibility: f64 = phase
            .basis
            .iter()
            .zip(xb.iter())
            .filter(|(&j, _)| j >= n)
            .map(|(_, v)| v.max(0.0))
            .sum();
        let scale = 1.0 + phase.b.amax();
        if infeasibility > tol::LP_FEASIBILITY * scale {
            return Ok(None);
        }
        phase.drive_out_artificials(n)?;
        phase.a = phase.a.columns(0, n).into_owned();
        Ok(Some(phase))
    }

    /// Pivots zero-level artificials out of the basis; rows where no
    /// structural column can replace them are redundant and get dropped.
    fn drive_out_artificials(&mut self, n: usize) -> Result<()> {
        loop {
            let Some(pos) = self.basis.iter().position(|&j| j >= n) else {
                return Ok(());
            };
            let binv_row = {
                let bmat = self.basis_matrix();
                let lu = bmat.transpose().lu();
                let mut e = DVector::zeros(self.basis.len());
                e[pos] = 1.0;
                lu.solve(&e)
                    .ok_or_else(|| Error::SolverError("singular basis in phase one".into()))?
            };
            let mut best: Option<(usize, f64)> = None;
            for j in 0..n {
                if self.basis.contains(&j) {
                    continue;
                }
                let v = binv_row.dot(&self.a.column(j)).abs();
                if v > 1e-9 && best.is_none_or(|(_, bv)| v > bv) {
                    best = Some((j, v));
                }
            }
            match best {
                Some((j, _)) => self.basis[pos] = j,
                None => {
                    // Earlier removals shift rows, so locate the artificial's
                    // unit entry instead of trusting its column index.
                    let col = self.a.column(self.basis[pos]);
                    let row = col.iamax();
                    self.a = self.a.clone().remove_row(row);
                    self.b = self.b.clone().remove_row(row);
                    self.basis.remove(pos);
                }
            }
        }
    }

    fn basis_matrix(&self) -> DMatrix<f64> {
        self.a.select_columns(self.basis.iter())
    }

    fn basic_values(&self) -> Result<DVector<f64>> {
        self.basis_matrix()
            .lu()
            .solve(&self.b)
            .ok_or_else(|| Error::SolverError("singular basis".into()))
    }

    fn primal(&self, n: usize) -> Result<DVector<f64>> {
        let xb = self.basic_values()?;
        let mut x = DVector::zeros(n);
        for (&j, &v) in self.basis.iter().zip(xb.iter()) {
            if j < n {
                x[j] = v;
            }
        }
        Ok(x)
    }

    fn run(&mut self, cost: &DVector<f64>) -> Result<RunStatus> {
        let m = self.basis.len();
        let mut stall = 0usize;
        let mut bland = false;
        loop {
            if self.iterations >= MAX_ITERATIONS {
                return Err(Error::SolverError(format!(
                    "iteration limit {MAX_ITERATIONS} reached"
                )));
            }
            if m == 0 {
                return Ok(RunStatus::Optimal);
            }
            let bmat = self.basis_matrix();
            let lu = bmat.clone().lu();
            let lu_t = bmat.transpose().lu();
            let xb = lu
                .solve(&self.b)
                .ok_or_else(|| Error::SolverError("singular basis".into()))?;
            let cb = DVector::from_iterator(m, self.basis.iter().map(|&j| cost[j]));
            let y = lu_t
                .solve(&cb)
                .ok_or_else(|| Error::SolverError("singular basis".into()))?;

            let cost_scale = 1.0 + cost.amax();
            let mut entering: Option<(usize, f64)> = None;
            for j in 0..self.enterable {
                if self.basis.contains(&j) {
                    continue;
                }
                let d = cost[j] - y.dot(&self.a.column(j));
                if d < -OPTIMALITY_TOL * cost_scale {
                    if bland {
                        entering = Some((j, d));
                        break;
                    }
                    if entering.is_none_or(|(_, best)| d < best) {
                        entering = Some((j, d));
                    }
                }
            }
            let Some((q, _)) = entering else {
                return Ok(RunStatus::Optimal);
            };

            let w = lu
                .solve(&self.a.column(q).into_owned())
                .ok_or_else(|| Error::SolverError("singular basis".into()))?;
            let leave = if bland {
                ratio_test_bland(&xb, &w, &self.basis)
            } else {
                ratio_test_harris(&xb, &w)
            };
            let Some(p) = leave else {
                return Ok(RunStatus::Unbounded);
            };
            let step = xb[p].max(0.0) / w[p];
            if step <= DEGENERATE_STEP {
                stall += 1;
                if stall > STALL_LIMIT {
                    bland = true;
                }
            } else {
                stall = 0;
            }
            self.basis[p] = q;
            self.iterations += 1;
        }
    }
}

/// Two-pass Harris ratio test: among rows whose ratio is within the
/// feasibility slack of the minimum, take the largest pivot element.
fn ratio_test_harris(xb: &DVector<f64>, w: &DVector<f64>) -> Option<usize> {
    let mut bound = f64::INFINITY;
    for i in 0..w.len() {
        if w[i] > PIVOT_TOL {
            bound = bound.min((xb[i].max(0.0) + tol::LP_FEASIBILITY) / w[i]);
        }
    }
    if !bound.is_finite() {
        return None;
    }
    let mut best: Option<usize> = None;
    for i in 0..w.len() {
        if w[i] > PIVOT_TOL && xb[i].max(0.0) / w[i] <= bound && best.is_none_or(|b| w[i] > w[b]) {
            best = Some(i);
        }
    }
    best
}

/// Textbook min-ratio test with ties broken by smallest basic index.
fn ratio_test_bland(xb: &DVector<f64>, w: &DVector<f64>, basis: &[usize]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for i in 0..w.len() {
        if w[i] > PIVOT_TOL {
            let ratio = xb[i].max(0.0) / w[i];
            match best {
                None => best = Some((i, ratio)),
                Some((b, r)) => {
                    if ratio < r - 1e-12 || (ratio <= r + 1e-12 && basis[i] < basis[b]) {
                        best = Some((i, ratio));
                    }
                }
            }
        }
    }
    best.map(|(i, _)| i)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(a: &[&[f64]], b: &[f64], c: &[f64]) -> StandardLp {
        let rows = a.len();
        let cols = a[0].len();
        let flat: Vec<f64> = a.iter().flat_map(|r| r.iter().copied()).collect();
        StandardLp::new(
            DMatrix::from_row_slice(rows, cols, &flat),
            DVector::from_row_slice(b),
            DVector::from_row_slice(c),
        )
        .unwrap()
    }

    fn optimal(outcome: LpOutcome) -> LpSolution {
        match outcome {
            LpOutcome::Optimal(s) => s,
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn small_textbook_problem() {
        // max 3x + 5y s.t. x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18  → (2, 6), value 36.
        let p = lp(
            &[
                &[1.0, 0.0, 1.0, 0.0, 0.0],
                &[0.0, 2.0, 0.0, 1.0, 0.0],
                &[3.0, 2.0, 0.0, 0.0, 1.0],
            ],
            &[4.0, 12.0, 18.0],
            &[-3.0, -5.0, 0.0, 0.0, 0.0],
        );
        let s = optimal(p.solve().unwrap());
        assert!((s.objective + 36.0).abs() < 1e-12);
        assert!((s.x[0] - 2.0).abs() < 1e-12 && (s.x[1] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let infeasible = lp(&[&[1.0, 1.0]], &[-1.0], &[1.0, 1.0]);
        assert!(matches!(infeasible.solve().unwrap(), LpOutcome::Infeasible));
        let unbounded = lp(&[&[1.0, -1.0]], &[1.0], &[0.0, -1.0]);
        assert!(matches!(unbounded.solve().unwrap(), LpOutcome::Unbounded));
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        // Second row is twice the first.
        let p = lp(
            &[&[1.0, 1.0, 1.0], &[2.0, 2.0, 2.0], &[1.0, -1.0, 0.0]],
            &[1.0, 2.0, 0.0],
            &[0.0, 0.0, 1.0],
        );
        let s = optimal(p.solve().unwrap());
        assert!(s.objective.abs() < 1e-12);
        assert!((s.x[0] - 0.5).abs() < 1e-12 && (s.x[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Beale's cycling example in equality form.
        let p = lp(
            &[
                &[0.25, -60.0, -0.04, 9.0, 1.0, 0.0, 0.0],
                &[0.5, -90.0, -0.02, 3.0, 0.0, 1.0, 0.0],
                &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
            ],
            &[0.0, 0.0, 1.0],
            &[-0.75, 150.0, -0.02, 6.0, 0.0, 0.0, 0.0],
        );
        let s = optimal(p.solve().unwrap());
        assert!((s.objective + 0.05).abs() < 1e-12);
    }

    #[test]
    fn feasibility_point_satisfies_constraints() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 0.0, 1.0, 1.0]);
        let b = DVector::from_row_slice(&[4.0, 1.0]);
        let x = find_feasible(&a, &b).unwrap().unwrap();
        assert!((&a * &x - &b).amax() < 1e-12);
        assert!(x.iter().all(|&v| v >= -1e-12));
        let b_bad = DVector::from_row_slice(&[-1.0, 1.0]);
        assert!(find_feasible(&a, &b_bad).unwrap().is_none());
    }
}
