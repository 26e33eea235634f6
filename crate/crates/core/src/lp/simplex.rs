//! Two-phase bounded-variable primal simplex on a dense tableau.
//!
//! Every variable is shifted to `[0, ub]` (free variables are split). The
//! initial basis is the identity formed by slack and artificial columns, so
//! the columns of those unit vectors in the current tableau hold `B⁻¹`; basic
//! values and reduced costs are periodically recomputed from the original
//! data through it. Pricing is Dantzig's rule; after a run of degenerate
//! pivots it switches to Bland's smallest-index rule until progress resumes.

use super::{LinearProgram, LpSolution, LpStatus, FEAS_TOL, OPT_TOL};
use crate::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const DROP_TOL: f64 = 1e-14;
const TIE_TOL: f64 = 1e-12;
const REFRESH_EVERY: usize = 64;
const DEGENERATE_STREAK: usize = 32;
const MAX_INVERSE_ENTRY: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ColState {
    Basic,
    Lower,
    Upper,
}

/// How an original variable maps onto shifted tableau columns.
#[derive(Clone, Copy, Debug)]
enum VarMap {
    /// `v = lo + col`
    Shift { col: usize, lo: f64 },
    /// `v = hi - col`
    Flip { col: usize, hi: f64 },
    /// `v = pos - neg`
    Split { pos: usize, neg: usize },
}

struct Tableau {
    rows: usize,
    cols: usize,
    /// Row-major `rows × cols`, holds `B⁻¹ A`.
    t: Vec<f64>,
    beta: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<ColState>,
    ub: Vec<f64>,
    cost: Vec<f64>,
    reduced: Vec<f64>,
    /// Original sparse columns, entries `(row, coeff)`.
    columns: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
    /// Column that formed the identity in each row of the starting basis.
    unit_col: Vec<usize>,
    first_artificial: usize,
    allow_artificial: bool,
}

enum Outcome {
    Optimal,
    Unbounded,
}

/// Solves `lp`. Infeasible and unbounded problems are reported through
/// [`LpSolution::status`]; numerical trouble is an error.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;

    // Column layout: structural columns first, then slacks, then artificials.
    let mut maps = Vec::with_capacity(lp.num_vars());
    let mut ub = Vec::new();
    let mut cost = Vec::new();
    for (j, &(lo, hi)) in lp.bounds().iter().enumerate() {
        let c = lp.objective()[j];
        if lo.is_finite() {
            maps.push(VarMap::Shift { col: ub.len(), lo });
            ub.push(hi - lo);
            cost.push(c);
        } else if hi.is_finite() {
            maps.push(VarMap::Flip { col: ub.len(), hi });
            ub.push(f64::INFINITY);
            cost.push(-c);
        } else {
            let pos = ub.len();
            maps.push(VarMap::Split { pos, neg: pos + 1 });
            ub.extend([f64::INFINITY, f64::INFINITY]);
            cost.extend([c, -c]);
        }
    }
    let structural = ub.len();

    struct Staged {
        coeffs: Vec<(usize, f64)>,
        rhs: f64,
        slack: bool,
    }
    let mut staged = Vec::new();
    for (row, slack) in lp
        .equalities()
        .iter()
        .map(|r| (r, false))
        .chain(lp.inequalities().iter().map(|r| (r, true)))
    {
        let mut rhs = row.rhs;
        let mut coeffs = Vec::with_capacity(row.coeffs.len());
        for &(j, a) in &row.coeffs {
            match maps[j] {
                VarMap::Shift { col, lo } => {
                    coeffs.push((col, a));
                    rhs -= a * lo;
                }
                VarMap::Flip { col, hi } => {
                    coeffs.push((col, -a));
                    rhs -= a * hi;
                }
                VarMap::Split { pos, neg } => {
                    coeffs.push((pos, a));
                    coeffs.push((neg, -a));
                }
            }
        }
        staged.push(Staged { coeffs, rhs, slack });
    }

    let rows = staged.len();
    let slacks = staged.iter().filter(|s| s.slack).count();
    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); structural + slacks];
    let mut rhs = vec![0.0; rows];
    let mut unit_col = vec![usize::MAX; rows];
    let mut needs_artificial = Vec::new();
    let mut next_slack = structural;
    for (i, s) in staged.iter().enumerate() {
        let sign = if s.rhs < 0.0 { -1.0 } else { 1.0 };
        rhs[i] = sign * s.rhs;
        for &(col, a) in &s.coeffs {
            columns[col].push((i, sign * a));
        }
        if s.slack {
            columns[next_slack].push((i, sign));
            if sign > 0.0 {
                unit_col[i] = next_slack;
            } else {
                needs_artificial.push(i);
            }
            next_slack += 1;
        } else {
            needs_artificial.push(i);
        }
    }
    ub.extend(std::iter::repeat(f64::INFINITY).take(slacks));
    cost.extend(std::iter::repeat(0.0).take(slacks));
    let first_artificial = columns.len();
    for &i in &needs_artificial {
        unit_col[i] = columns.len();
        columns.push(vec![(i, 1.0)]);
        ub.push(f64::INFINITY);
        cost.push(0.0);
    }

    // Duplicate entries for the same (row, col) are summed.
    let cols = columns.len();
    let mut t = vec![0.0; rows * cols];
    for (j, col) in columns.iter().enumerate() {
        for &(i, a) in col {
            t[i * cols + j] += a;
        }
    }

    let mut tab = Tableau {
        rows,
        cols,
        t,
        beta: rhs.clone(),
        basis: unit_col.clone(),
        state: vec![ColState::Lower; cols],
        ub,
        cost: vec![0.0; cols],
        reduced: vec![0.0; cols],
        columns,
        rhs,
        unit_col,
        first_artificial,
        allow_artificial: true,
    };
    for &b in &tab.basis {
        tab.state[b] = ColState::Basic;
    }

    let max_iter = 50 * (rows + cols) + 10_000;
    let scale = 1.0 + tab.rhs.iter().fold(0.0f64, |m, b| m.max(b.abs()));

    // Phase 1: drive the artificials to zero.
    if first_artificial < cols {
        for j in first_artificial..cols {
            tab.cost[j] = 1.0;
        }
        tab.refresh()?;
        match tab.iterate(max_iter)? {
            Outcome::Optimal => {}
            Outcome::Unbounded => {
                return Err(Error::Numerical("phase one reported unbounded".into()))
            }
        }
        let infeasibility: f64 = (0..rows)
            .filter(|&i| tab.basis[i] >= first_artificial)
            .map(|i| tab.beta[i].max(0.0))
            .sum();
        if infeasibility > 1e-8 * scale {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                value: f64::NAN,
                assignment: Vec::new(),
            });
        }
        tab.expel_artificials();
        for j in first_artificial..cols {
            tab.ub[j] = 0.0;
        }
        tab.allow_artificial = false;
    }

    // Phase 2.
    tab.cost = cost;
    tab.refresh()?;
    if let Outcome::Unbounded = tab.iterate(max_iter)? {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            value: f64::NAN,
            assignment: Vec::new(),
        });
    }

    let internal = tab.values();
    let assignment: Vec<f64> = maps
        .iter()
        .zip(lp.bounds())
        .map(|(m, &(lo, hi))| {
            let v = match *m {
                VarMap::Shift { col, lo } => lo + internal[col],
                VarMap::Flip { col, hi } => hi - internal[col],
                VarMap::Split { pos, neg } => internal[pos] - internal[neg],
            };
            v.clamp(lo, hi)
        })
        .collect();

    let violation = lp.max_violation(&assignment);
    if violation > FEAS_TOL * scale {
        return Err(Error::Numerical(format!(
            "final point violates constraints by {violation:e}"
        )));
    }
    let value = lp.objective_value(&assignment);
    Ok(LpSolution {
        status: LpStatus::Optimal,
        value,
        assignment,
    })
}

impl Tableau {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.cols + j]
    }

    fn enterable(&self, j: usize) -> bool {
        self.state[j] != ColState::Basic
            && self.ub[j] > 0.0
            && (self.allow_artificial || j < self.first_artificial)
    }

    /// Recomputes basic values and reduced costs from the original data
    /// using the `B⁻¹` held in the unit columns.
    fn refresh(&mut self) -> Result<()> {
        let (m, n) = (self.rows, self.cols);
        let mut residual = self.rhs.clone();
        for j in 0..n {
            if self.state[j] == ColState::Upper {
                let u = self.ub[j];
                for &(i, a) in &self.columns[j] {
                    residual[i] -= a * u;
                }
            }
        }
        let mut worst = 0.0f64;
        let mut duals = vec![0.0; m];
        for r in 0..m {
            let row = &self.t[r * n..(r + 1) * n];
            let cb = self.cost[self.basis[r]];
            let mut acc = 0.0;
            for i in 0..m {
                let binv = row[self.unit_col[i]];
                worst = worst.max(binv.abs());
                acc += binv * residual[i];
                duals[i] += cb * binv;
            }
            self.beta[r] = acc;
        }
        if worst > MAX_INVERSE_ENTRY {
            return Err(Error::Numerical(format!(
                "basis inverse entry {worst:e} exceeds conditioning limit"
            )));
        }
        for j in 0..n {
            self.reduced[j] = if self.state[j] == ColState::Basic {
                0.0
            } else {
                self.cost[j]
                    - self.columns[j]
                        .iter()
                        .map(|&(i, a)| duals[i] * a)
                        .sum::<f64>()
            };
        }
        Ok(())
    }

    fn price(&self, bland: bool) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.cols {
            if !self.enterable(j) {
                continue;
            }
            let d = self.reduced[j];
            let gain = match self.state[j] {
                ColState::Lower if d < -OPT_TOL => -d,
                ColState::Upper if d > OPT_TOL => d,
                _ => continue,
            };
            if bland {
                return Some(j);
            }
            if best.map_or(true, |(_, g)| gain > g) {
                best = Some((j, gain));
            }
        }
        best.map(|(j, _)| j)
    }

    fn iterate(&mut self, max_iter: usize) -> Result<Outcome> {
        let mut fresh = true;
        let mut degenerate = 0usize;
        let mut since_refresh = 0usize;
        for _ in 0..max_iter {
            if since_refresh >= REFRESH_EVERY {
                self.refresh()?;
                since_refresh = 0;
                fresh = true;
            }
            let bland = degenerate >= DEGENERATE_STREAK;
            let Some(enter) = self.price(bland) else {
                if fresh {
                    return Ok(Outcome::Optimal);
                }
                self.refresh()?;
                since_refresh = 0;
                fresh = true;
                continue;
            };
            let dir = if self.state[enter] == ColState::Upper {
                -1.0
            } else {
                1.0
            };

            // Ratio test; `None` as leaving row means a bound flip.
            let mut theta = self.ub[enter];
            let mut leave: Option<(usize, bool)> = None;
            let mut leave_mag = 0.0;
            for i in 0..self.rows {
                let a = self.at(i, enter);
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                let g = dir * a;
                let b = self.basis[i];
                let (limit, to_upper) = if g > 0.0 {
                    (self.beta[i].max(0.0) / g, false)
                } else if self.ub[b].is_finite() {
                    ((self.ub[b] - self.beta[i]).max(0.0) / -g, true)
                } else {
                    continue;
                };
                let better = match leave {
                    None => limit < theta - TIE_TOL,
                    Some((r, _)) => {
                        if limit < theta - TIE_TOL {
                            true
                        } else if limit <= theta + TIE_TOL {
                            if bland {
                                b < self.basis[r]
                            } else {
                                a.abs() > leave_mag
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    theta = theta.min(limit);
                    leave = Some((i, to_upper));
                    leave_mag = a.abs();
                }
            }
            if theta.is_infinite() {
                return Ok(Outcome::Unbounded);
            }

            if theta > 0.0 {
                for i in 0..self.rows {
                    let a = self.t[i * self.cols + enter];
                    if a != 0.0 {
                        self.beta[i] -= theta * dir * a;
                    }
                }
            }
            if theta <= TIE_TOL {
                degenerate += 1;
            } else {
                degenerate = 0;
            }

            match leave {
                None => {
                    self.state[enter] = if dir > 0.0 {
                        ColState::Upper
                    } else {
                        ColState::Lower
                    };
                }
                Some((r, to_upper)) => {
                    let leaving = self.basis[r];
                    let value = if dir > 0.0 {
                        theta
                    } else {
                        self.ub[enter] - theta
                    };
                    self.pivot(r, enter);
                    self.basis[r] = enter;
                    self.beta[r] = value;
                    self.state[enter] = ColState::Basic;
                    self.state[leaving] = if to_upper {
                        ColState::Upper
                    } else {
                        ColState::Lower
                    };
                }
            }
            fresh = false;
            since_refresh += 1;
        }
        Err(Error::Numerical(format!(
            "iteration limit of {max_iter} reached"
        )))
    }

    fn pivot(&mut self, r: usize, enter: usize) {
        let n = self.cols;
        let piv = self.t[r * n + enter];
        let (before, rest) = self.t.split_at_mut(r * n);
        let (prow, after) = rest.split_at_mut(n);
        let mut nz = Vec::new();
        for (k, v) in prow.iter_mut().enumerate() {
            if *v != 0.0 {
                *v /= piv;
                if v.abs() < DROP_TOL {
                    *v = 0.0;
                } else {
                    nz.push(k);
                }
            }
        }
        prow[enter] = 1.0;
        let eliminate = |row: &mut [f64]| {
            let f = row[enter];
            if f != 0.0 {
                for &k in &nz {
                    let v = row[k] - f * prow[k];
                    row[k] = if v.abs() < DROP_TOL { 0.0 } else { v };
                }
                row[enter] = 0.0;
            }
        };
        for row in before.chunks_exact_mut(n) {
            eliminate(row);
        }
        for row in after.chunks_exact_mut(n) {
            eliminate(row);
        }
        eliminate(&mut self.reduced);
    }

    /// Pivots basic artificials (all at zero) out of the basis where some
    /// non-artificial column can replace them. Rows where none can are
    /// redundant and keep their artificial at zero.
    fn expel_artificials(&mut self) {
        for r in 0..self.rows {
            if self.basis[r] < self.first_artificial {
                continue;
            }
            let mut pick: Option<(usize, f64)> = None;
            for j in 0..self.first_artificial {
                if self.state[j] == ColState::Basic {
                    continue;
                }
                let a = self.at(r, j).abs();
                if a > 1e-7 && pick.map_or(true, |(_, best)| a > best) {
                    pick = Some((j, a));
                }
            }
            if let Some((j, _)) = pick {
                let leaving = self.basis[r];
                let value = match self.state[j] {
                    ColState::Upper => self.ub[j],
                    _ => 0.0,
                };
                self.pivot(r, j);
                self.basis[r] = j;
                self.beta[r] = value;
                self.state[j] = ColState::Basic;
                self.state[leaving] = ColState::Lower;
            }
        }
    }

    fn values(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.cols];
        for j in 0..self.cols {
            if self.state[j] == ColState::Upper {
                v[j] = self.ub[j];
            }
        }
        for (r, &b) in self.basis.iter().enumerate() {
            v[b] = self.beta[r].clamp(0.0, self.ub[b]);
        }
        v
    }
}
