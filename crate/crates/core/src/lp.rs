//! Linear feasibility: decide whether `{A_eq x = b_eq, A_ge x >= b_ge}`
//! admits a solution, and return one when it does.
//!
//! The solver is a dense phase-1 simplex. Free variables are shifted to
//! non-negative ones when per-variable lower bounds are supplied (the core
//! system supplies the singleton values `x_i >= v({i})`), and split into
//! positive and negative parts otherwise. Bland's rule is always on: these
//! systems are small and frequently degenerate, so anti-cycling beats pivot
//! speed.
//!
//! Tolerances are relative to `scale = max(1, max |rhs|)`:
//! pivot 1e-10, phase-1 feasibility 1e-9, and an independent residual
//! re-check of every returned witness at 1e-7.

/// One linear row: `coeffs . x (= or >=) rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearRow {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
}

impl LinearRow {
    pub fn new(coeffs: Vec<f64>, rhs: f64) -> Self {
        Self { coeffs, rhs }
    }
}

/// A feasibility system over `n_vars` free variables.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearSystem {
    pub n_vars: usize,
    pub eq_rows: Vec<LinearRow>,
    pub ge_rows: Vec<LinearRow>,
    /// When present, known valid lower bounds used to shift variables into
    /// the non-negative orthant. The bounds are constraints too: the
    /// returned witness satisfies `x_i >= lower_bounds[i]`.
    pub lower_bounds: Option<Vec<f64>>,
}

impl LinearSystem {
    pub fn new(n_vars: usize) -> Self {
        Self {
            n_vars,
            ..Self::default()
        }
    }

    pub fn push_eq(&mut self, coeffs: Vec<f64>, rhs: f64) {
        debug_assert_eq!(coeffs.len(), self.n_vars);
        self.eq_rows.push(LinearRow::new(coeffs, rhs));
    }

    pub fn push_ge(&mut self, coeffs: Vec<f64>, rhs: f64) {
        debug_assert_eq!(coeffs.len(), self.n_vars);
        self.ge_rows.push(LinearRow::new(coeffs, rhs));
    }

    /// `max(1, max |rhs|)` over all rows; the reference scale for tolerances.
    pub fn scale(&self) -> f64 {
        self.eq_rows
            .iter()
            .chain(self.ge_rows.iter())
            .map(|row| row.rhs.abs())
            .fold(1.0, f64::max)
    }

    /// Largest violation of any row (and any lower bound) at `x`.
    pub fn max_residual(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for row in &self.eq_rows {
            let lhs: f64 = row.coeffs.iter().zip(x).map(|(c, v)| c * v).sum();
            worst = worst.max((lhs - row.rhs).abs());
        }
        for row in &self.ge_rows {
            let lhs: f64 = row.coeffs.iter().zip(x).map(|(c, v)| c * v).sum();
            worst = worst.max(row.rhs - lhs);
        }
        if let Some(bounds) = &self.lower_bounds {
            for (v, lb) in x.iter().zip(bounds) {
                worst = worst.max(lb - v);
            }
        }
        worst.max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeasStatus {
    Feasible(Vec<f64>),
    Infeasible,
    /// Iteration cap hit before a verdict. Never silently reported as
    /// infeasible.
    Stalled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityResult {
    pub status: FeasStatus,
    pub iterations: usize,
    /// For a feasible result, the verified residual of the witness on the
    /// original rows. Otherwise the final phase-1 objective value.
    pub max_residual: f64,
}

pub const PIVOT_TOL: f64 = 1e-10;
pub const FEASIBILITY_TOL: f64 = 1e-9;
pub const WITNESS_TOL: f64 = 1e-7;

enum Sense {
    Eq,
    Le,
    Ge,
}

/// Phase-1 simplex over the standard-form translation of `sys`.
pub fn solve_feasibility(sys: &LinearSystem, iter_cap: usize) -> FeasibilityResult {
    assert!(iter_cap > 0);
    let n = sys.n_vars;
    let scale = sys.scale();
    let shifted = sys.lower_bounds.is_some();
    let n_cols = if shifted { n } else { 2 * n };

    // Translate each row to the shifted/split variables and normalize the
    // right-hand side to be non-negative.
    let mut rows: Vec<(Vec<f64>, f64, Sense)> = Vec::new();
    let translate = |row: &LinearRow| -> (Vec<f64>, f64) {
        match &sys.lower_bounds {
            Some(bounds) => {
                let rhs = row.rhs
                    - row
                        .coeffs
                        .iter()
                        .zip(bounds)
                        .map(|(c, lb)| c * lb)
                        .sum::<f64>();
                (row.coeffs.clone(), rhs)
            }
            None => {
                let mut coeffs = Vec::with_capacity(2 * n);
                coeffs.extend_from_slice(&row.coeffs);
                coeffs.extend(row.coeffs.iter().map(|c| -c));
                (coeffs, row.rhs)
            }
        }
    };
    for row in &sys.eq_rows {
        let (mut coeffs, mut rhs) = translate(row);
        if rhs < 0.0 {
            coeffs.iter_mut().for_each(|c| *c = -*c);
            rhs = -rhs;
        }
        rows.push((coeffs, rhs, Sense::Eq));
    }
    for row in &sys.ge_rows {
        let (mut coeffs, mut rhs) = translate(row);
        if rhs <= 0.0 {
            // `>=` with non-positive rhs flips to `<=`, whose slack can start
            // basic without an artificial variable.
            coeffs.iter_mut().for_each(|c| *c = -*c);
            rhs = -rhs;
            rows.push((coeffs, rhs, Sense::Le));
        } else {
            rows.push((coeffs, rhs, Sense::Ge));
        }
    }

    let m = rows.len();
    if m == 0 {
        let x = witness_from(&vec![0.0; n_cols], sys, shifted);
        return FeasibilityResult {
            status: FeasStatus::Feasible(x),
            iterations: 0,
            max_residual: 0.0,
        };
    }

    // Column layout: structural | slack/surplus (one per Le/Ge row) |
    // artificial (one per Eq/Ge row) | rhs.
    let n_slack = rows
        .iter()
        .filter(|(_, _, s)| matches!(s, Sense::Le | Sense::Ge))
        .count();
    let n_art = rows
        .iter()
        .filter(|(_, _, s)| matches!(s, Sense::Eq | Sense::Ge))
        .count();
    let width = n_cols + n_slack + n_art + 1;
    let rhs_col = width - 1;

    let mut tableau = vec![vec![0.0f64; width]; m + 1];
    let mut basis = vec![0usize; m];
    let mut slack_at = n_cols;
    let mut art_at = n_cols + n_slack;
    let mut artificial_cols = Vec::with_capacity(n_art);
    for (r, (coeffs, rhs, sense)) in rows.iter().enumerate() {
        tableau[r][..n_cols].copy_from_slice(coeffs);
        tableau[r][rhs_col] = *rhs;
        match sense {
            Sense::Le => {
                tableau[r][slack_at] = 1.0;
                basis[r] = slack_at;
                slack_at += 1;
            }
            Sense::Ge => {
                tableau[r][slack_at] = -1.0;
                slack_at += 1;
                tableau[r][art_at] = 1.0;
                basis[r] = art_at;
                artificial_cols.push(art_at);
                art_at += 1;
            }
            Sense::Eq => {
                tableau[r][art_at] = 1.0;
                basis[r] = art_at;
                artificial_cols.push(art_at);
                art_at += 1;
            }
        }
    }

    // Phase-1 objective: minimize the sum of artificials. Price out the
    // basic artificials so the objective row holds reduced costs.
    {
        let (obj, body) = {
            let (head, tail) = tableau.split_at_mut(m);
            (&mut tail[0], head)
        };
        for &col in &artificial_cols {
            obj[col] = 1.0;
        }
        for (r, row) in body.iter().enumerate() {
            if artificial_cols.contains(&basis[r]) {
                for j in 0..width {
                    obj[j] -= row[j];
                }
            }
        }
    }

    let pivot_tol = PIVOT_TOL * scale.max(1.0);
    let mut iterations = 0usize;
    loop {
        // Bland: entering column = lowest index with negative reduced cost.
        let entering = (0..n_cols + n_slack + n_art).find(|&j| tableau[m][j] < -pivot_tol);
        let Some(col) = entering else {
            break;
        };

        // Min ratio; ties broken by the lowest basic-variable index.
        let mut leaving: Option<(usize, f64)> = None;
        for r in 0..m {
            let a = tableau[r][col];
            if a <= pivot_tol {
                continue;
            }
            let ratio = tableau[r][rhs_col] / a;
            match leaving {
                None => leaving = Some((r, ratio)),
                Some((best_r, best)) => {
                    if ratio < best - 1e-12 * scale
                        || ((ratio - best).abs() <= 1e-12 * scale && basis[r] < basis[best_r])
                    {
                        leaving = Some((r, ratio));
                    }
                }
            }
        }
        let Some((row, _)) = leaving else {
            // Phase-1 objective is bounded below by zero, so an unbounded
            // direction can only be numerical noise; report it as a stall.
            return FeasibilityResult {
                status: FeasStatus::Stalled,
                iterations,
                max_residual: -tableau[m][rhs_col],
            };
        };

        pivot(&mut tableau, row, col);
        basis[row] = col;

        iterations += 1;
        if iterations >= iter_cap {
            return FeasibilityResult {
                status: FeasStatus::Stalled,
                iterations,
                max_residual: -tableau[m][rhs_col],
            };
        }
    }

    // Objective row carries -z; optimum of the artificial sum.
    let objective = -tableau[m][rhs_col];
    if objective > FEASIBILITY_TOL * scale {
        return FeasibilityResult {
            status: FeasStatus::Infeasible,
            iterations,
            max_residual: objective,
        };
    }

    let mut solution = vec![0.0f64; n_cols];
    for r in 0..m {
        if basis[r] < n_cols {
            solution[basis[r]] = tableau[r][rhs_col];
        }
    }
    let x = witness_from(&solution, sys, shifted);
    let residual = sys.max_residual(&x);
    if residual > WITNESS_TOL * scale {
        // Objective says feasible but the recovered point does not check
        // out; never turn that into an infeasibility claim.
        return FeasibilityResult {
            status: FeasStatus::Stalled,
            iterations,
            max_residual: residual,
        };
    }
    FeasibilityResult {
        status: FeasStatus::Feasible(x),
        iterations,
        max_residual: residual,
    }
}

fn witness_from(solution: &[f64], sys: &LinearSystem, shifted: bool) -> Vec<f64> {
    let n = sys.n_vars;
    if shifted {
        let bounds = sys.lower_bounds.as_ref().expect("shifted implies bounds");
        (0..n).map(|j| bounds[j] + solution[j]).collect()
    } else {
        (0..n).map(|j| solution[j] - solution[n + j]).collect()
    }
}

fn pivot(tableau: &mut [Vec<f64>], row: usize, col: usize) {
    let width = tableau[0].len();
    let inv = 1.0 / tableau[row][col];
    for j in 0..width {
        tableau[row][j] *= inv;
    }
    tableau[row][col] = 1.0;
    for r in 0..tableau.len() {
        if r == row {
            continue;
        }
        let factor = tableau[r][col];
        if factor == 0.0 {
            continue;
        }
        for j in 0..width {
            tableau[r][j] -= factor * tableau[row][j];
        }
        tableau[r][col] = 0.0;
    }
}
