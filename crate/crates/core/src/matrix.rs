//! One-shot zero-sum matrix games.
//!
//! [`solve_matrix_game`] returns a mixed equilibrium with a certified
//! exploitability bound, computed by an exact dense-simplex solve of the
//! standard shifted linear program. Ties break toward the lowest index
//! everywhere (Bland's rule inside the solver), so results are
//! deterministic; when a game has several equilibria, the returned one is
//! whichever vertex that pivot order reaches.

use crate::error::{Error, Result};

/// Dense row-major matrix of payoffs to the max (row) player.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidDimension(
                "matrix must have at least one row and column".into(),
            ));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "matrix data has {} entries, expected {}",
                data.len(),
                rows * cols
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_fn<F: FnMut(usize, usize) -> f64>(rows: usize, cols: usize, mut f: F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    fn check_finite(&self) -> Result<()> {
        for i in 0..self.rows {
            for j in 0..self.cols {
                if !self.at(i, j).is_finite() {
                    return Err(Error::InvalidPayoff { row: i, col: j });
                }
            }
        }
        Ok(())
    }
}

/// Mixed solution of a matrix game with its certified exploitability.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MatrixGameSolution {
    /// Row-player (max) mixed strategy.
    pub max_strategy: Vec<f64>,
    /// Column-player (min) mixed strategy.
    pub min_strategy: Vec<f64>,
    /// Game value estimate; always inside the best-response bracket
    /// `[min_b (mu^T Q)_b, max_a (Q nu)_a]`.
    pub value: f64,
    /// `max_a (Q nu)_a - min_b (mu^T Q)_b`, computed on the original payoffs.
    pub exploitability: f64,
}

/// How far a strategy pair is from equilibrium in a one-shot game:
/// `max_a (Q nu)_a - min_b (mu^T Q)_b`. Zero exactly at equilibrium.
pub fn exploitability(q: &Matrix, max_strategy: &[f64], min_strategy: &[f64]) -> Result<f64> {
    let (lo, hi) = response_bracket(q, max_strategy, min_strategy)?;
    Ok(hi - lo)
}

/// Returns `(min_b (mu^T Q)_b, max_a (Q nu)_a)`.
fn response_bracket(q: &Matrix, mu: &[f64], nu: &[f64]) -> Result<(f64, f64)> {
    if mu.len() != q.rows || nu.len() != q.cols {
        return Err(Error::DimensionMismatch(format!(
            "strategies of length {}/{} against a {}x{} matrix",
            mu.len(),
            nu.len(),
            q.rows,
            q.cols
        )));
    }
    let mut hi = f64::NEG_INFINITY;
    for a in 0..q.rows {
        let payoff: f64 = q.row(a).iter().zip(nu).map(|(v, p)| v * p).sum();
        hi = hi.max(payoff);
    }
    let mut lo = f64::INFINITY;
    for b in 0..q.cols {
        let payoff: f64 = (0..q.rows).map(|a| q.at(a, b) * mu[a]).sum();
        lo = lo.min(payoff);
    }
    Ok((lo, hi))
}

/// Solves the matrix game to exploitability at most `eps_ne`.
///
/// Payoffs are shifted positive and the standard primal/dual linear
/// program is solved exactly; the exploitability of the recovered
/// strategies is then certified against `eps_ne` on the original payoffs.
pub fn solve_matrix_game(q: &Matrix, eps_ne: f64) -> Result<MatrixGameSolution> {
    if eps_ne <= 0.0 {
        return Err(Error::InvalidDimension("eps_ne must be positive".into()));
    }
    q.check_finite()?;

    let min_entry = q
        .data
        .iter()
        .fold(f64::INFINITY, |acc, &v| acc.min(v));
    let shift = 1.0 - min_entry;
    let shifted = Matrix::from_fn(q.rows, q.cols, |i, j| q.at(i, j) + shift);

    let lp = simplex::solve_game_lp(&shifted);
    let solution = build_solution(q, &lp.column_weights, &lp.row_duals);
    match lp.outcome {
        simplex::Outcome::Optimal if solution.exploitability <= eps_ne => Ok(solution),
        _ => {
            let exploitability = solution.exploitability;
            Err(Error::SolverBudget {
                best: Box::new(solution),
                exploitability,
            })
        }
    }
}

fn build_solution(q: &Matrix, column_weights: &[f64], row_duals: &[f64]) -> MatrixGameSolution {
    let nu = normalize_or_uniform(column_weights);
    let mu = normalize_or_uniform(row_duals);
    let (lo, hi) = response_bracket(q, &mu, &nu).expect("dimensions fixed by solver");
    MatrixGameSolution {
        max_strategy: mu,
        min_strategy: nu,
        value: 0.5 * (lo + hi),
        exploitability: hi - lo,
    }
}

fn normalize_or_uniform(weights: &[f64]) -> Vec<f64> {
    let clipped: Vec<f64> = weights.iter().map(|&w| w.max(0.0)).collect();
    let sum: f64 = clipped.iter().sum();
    if sum > 0.0 {
        clipped.into_iter().map(|w| w / sum).collect()
    } else {
        vec![1.0 / weights.len() as f64; weights.len()]
    }
}

/// Pure max-min solution for turn-based play: the min player replies to
/// each row, the max player picks the row with the best reply value.
#[derive(Debug, Clone, PartialEq)]
pub struct PureMaxmin {
    /// Max player's action (lowest index on ties).
    pub best_row: usize,
    /// Min player's best reply per max action (lowest index on ties).
    pub column_reply: Vec<usize>,
    /// `max_a min_b Q(a, b)`.
    pub value: f64,
}

pub fn solve_maxmin_pure(q: &Matrix) -> Result<PureMaxmin> {
    q.check_finite()?;
    let mut column_reply = Vec::with_capacity(q.rows);
    let mut best_row = 0;
    let mut best_value = f64::NEG_INFINITY;
    for a in 0..q.rows {
        let mut reply = 0;
        let mut reply_value = q.at(a, 0);
        for b in 1..q.cols {
            if q.at(a, b) < reply_value {
                reply_value = q.at(a, b);
                reply = b;
            }
        }
        column_reply.push(reply);
        if reply_value > best_value {
            best_value = reply_value;
            best_row = a;
        }
    }
    Ok(PureMaxmin {
        best_row,
        column_reply,
        value: best_value,
    })
}

mod simplex {
    //! Dense full-tableau simplex for the zero-sum game LP
    //! `max 1^T y  s.t.  Q y <= 1, y >= 0` with all entries of `Q`
    //! at least 1 (guaranteed by the caller's shift), so the program is
    //! feasible (y = 0) and bounded. Bland's rule picks the lowest-index
    //! entering column and breaks ratio ties toward the lowest basic
    //! index, which rules out cycling.

    use super::Matrix;

    const PIVOT_TOL: f64 = 1e-11;

    pub(super) enum Outcome {
        Optimal,
        Budget,
    }

    pub(super) struct LpResult {
        /// Unnormalized column-player weights y.
        pub column_weights: Vec<f64>,
        /// Unnormalized row duals x (shadow prices of the row constraints).
        pub row_duals: Vec<f64>,
        pub outcome: Outcome,
    }

    pub(super) fn solve_game_lp(q: &Matrix) -> LpResult {
        let rows = q.rows;
        let cols = q.cols;
        let width = cols + rows;
        // tableau[i] holds the structural columns then the slack columns.
        let mut tableau: Vec<Vec<f64>> = (0..rows)
            .map(|i| {
                let mut row = vec![0.0; width];
                row[..cols].copy_from_slice(q.row(i));
                row[cols + i] = 1.0;
                row
            })
            .collect();
        let mut rhs = vec![1.0; rows];
        let mut reduced: Vec<f64> = (0..width).map(|j| if j < cols { 1.0 } else { 0.0 }).collect();
        let mut basis: Vec<usize> = (cols..width).collect();

        let budget = 200 * (rows + cols + 1);
        let mut outcome = Outcome::Budget;
        for _ in 0..budget {
            let Some(entering) = reduced.iter().position(|&r| r > PIVOT_TOL) else {
                outcome = Outcome::Optimal;
                break;
            };
            let mut leaving: Option<usize> = None;
            let mut best_ratio = f64::INFINITY;
            for i in 0..rows {
                let coef = tableau[i][entering];
                if coef > PIVOT_TOL {
                    let ratio = rhs[i] / coef;
                    let better = match leaving {
                        None => true,
                        Some(current) => {
                            ratio < best_ratio - PIVOT_TOL
                                || (ratio < best_ratio + PIVOT_TOL && basis[i] < basis[current])
                        }
                    };
                    if better {
                        best_ratio = ratio;
                        leaving = Some(i);
                    }
                }
            }
            // A positive shifted payoff matrix keeps every column bounded.
            let Some(pivot_row) = leaving else {
                break;
            };
            pivot(
                &mut tableau,
                &mut rhs,
                &mut reduced,
                pivot_row,
                entering,
            );
            basis[pivot_row] = entering;
        }

        let mut column_weights = vec![0.0; cols];
        for (i, &var) in basis.iter().enumerate() {
            if var < cols {
                column_weights[var] = rhs[i];
            }
        }
        let row_duals: Vec<f64> = (0..rows).map(|a| -reduced[cols + a]).collect();
        LpResult {
            column_weights,
            row_duals,
            outcome,
        }
    }

    fn pivot(
        tableau: &mut [Vec<f64>],
        rhs: &mut [f64],
        reduced: &mut [f64],
        pivot_row: usize,
        entering: usize,
    ) {
        let scale = tableau[pivot_row][entering];
        for v in tableau[pivot_row].iter_mut() {
            *v /= scale;
        }
        rhs[pivot_row] /= scale;
        for i in 0..tableau.len() {
            if i == pivot_row {
                continue;
            }
            let factor = tableau[i][entering];
            if factor != 0.0 {
                for j in 0..tableau[i].len() {
                    tableau[i][j] -= factor * tableau[pivot_row][j];
                }
                rhs[i] -= factor * rhs[pivot_row];
            }
        }
        let factor = reduced[entering];
        if factor != 0.0 {
            for j in 0..reduced.len() {
                reduced[j] -= factor * tableau[pivot_row][j];
            }
        }
    }
}
