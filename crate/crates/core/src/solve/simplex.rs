//! Bounded-variable simplex on a dense tableau.
//!
//! Every row `a'x (sense) b` becomes `a'x + s = b` with a bounded slack, so
//! the slack columns form the initial basis and their tableau columns hold
//! `B^-1` at all times. Rows whose slack cannot absorb the starting residual
//! get an artificial column for phase 1. The dual simplex reoptimizes after
//! bound changes, which is how branch-and-bound nodes reuse a parent basis.

use std::sync::Arc;
use std::time::Instant;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::milp::model::{MilpModel, Sense};

pub const FEAS_TOL: f64 = 1e-7;
pub const OPT_TOL: f64 = 1e-7;
const PIVOT_TOL: f64 = 1e-9;
const REFRESH_EVERY: usize = 100;
const DEGENERATE_LIMIT: usize = 50;
const NONE: usize = usize::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    TimeLimit,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Structural column values; meaningful only when `status` is optimal.
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

/// Solves the continuous relaxation of `model` (integrality dropped).
pub fn solve_lp(model: &MilpModel) -> LpSolution {
    let mut t = Tableau::new(model);
    let status = t.solve(None);
    t.solution(status)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum State {
    Basic,
    Lower,
    Upper,
    /// Free column resting at zero.
    Zero,
}

#[derive(Clone)]
pub(crate) struct Tableau {
    m: usize,
    n: usize,
    ncols: usize,
    /// Row-major `m x ncols`, equal to `B^-1 [A I Art]`.
    t: Vec<f64>,
    x: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    cost: Arc<Vec<f64>>,
    d: Vec<f64>,
    state: Vec<State>,
    basis: Vec<usize>,
    row_of: Vec<usize>,
    b: Arc<Vec<f64>>,
    cols: Arc<Vec<Vec<(usize, f64)>>>,
    iterations: usize,
    since_refresh: usize,
    max_iterations: usize,
}

fn rest_value(lo: f64, hi: f64) -> (f64, State) {
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) if hi.abs() < lo.abs() => (hi, State::Upper),
        (true, _) => (lo, State::Lower),
        (false, true) => (hi, State::Upper),
        (false, false) => (0.0, State::Zero),
    }
}

impl Tableau {
    pub(crate) fn new(model: &MilpModel) -> Tableau {
        let n = model.num_vars();
        let m = model.constraints.len();
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n + m];
        let mut b = Vec::with_capacity(m);
        let mut lo = Vec::with_capacity(n + m);
        let mut hi = Vec::with_capacity(n + m);
        for v in &model.variables {
            lo.push(v.lower);
            hi.push(v.upper);
        }
        for (r, c) in model.constraints.iter().enumerate() {
            for &(j, a) in &c.coefs {
                cols[j].push((r, a));
            }
            cols[n + r].push((r, 1.0));
            b.push(c.rhs);
            let (l, h) = match c.sense {
                Sense::Le => (0.0, f64::INFINITY),
                Sense::Ge => (f64::NEG_INFINITY, 0.0),
                Sense::Eq => (0.0, 0.0),
            };
            lo.push(l);
            hi.push(h);
        }

        let mut x = vec![0.0; n + m];
        let mut state = vec![State::Lower; n + m];
        for j in 0..n {
            let (v, s) = rest_value(lo[j], hi[j]);
            x[j] = v;
            state[j] = s;
        }
        let mut resid = b.clone();
        for j in 0..n {
            if x[j] != 0.0 {
                for &(r, a) in &cols[j] {
                    resid[r] -= a * x[j];
                }
            }
        }

        // slack basic where it can take the residual, artificial otherwise
        let mut basis = vec![0; m];
        let mut sign = vec![1.0; m];
        for r in 0..m {
            let s = n + r;
            if resid[r] >= lo[s] && resid[r] <= hi[s] {
                basis[r] = s;
                x[s] = resid[r];
                state[s] = State::Basic;
            } else {
                let bound = if resid[r] < lo[s] { lo[s] } else { hi[s] };
                x[s] = bound;
                state[s] = if bound == lo[s] { State::Lower } else { State::Upper };
                let a = cols.len();
                sign[r] = if resid[r] - bound >= 0.0 { 1.0 } else { -1.0 };
                cols.push(vec![(r, sign[r])]);
                lo.push(0.0);
                hi.push(f64::INFINITY);
                x.push((resid[r] - bound).abs());
                state.push(State::Basic);
                basis[r] = a;
            }
        }
        let ncols = cols.len();
        let mut t = vec![0.0; m * ncols];
        for (j, col) in cols.iter().enumerate() {
            for &(r, a) in col {
                // the starting basis is diagonal with entries +-1
                let diag = if basis[r] >= n + m { sign[r] } else { 1.0 };
                t[r * ncols + j] = a * diag;
            }
        }
        let mut row_of = vec![NONE; ncols];
        for (r, &j) in basis.iter().enumerate() {
            row_of[j] = r;
        }
        let mut cost = model.objective_dense();
        cost.resize(ncols, 0.0);
        Tableau {
            m,
            n,
            ncols,
            t,
            x,
            lo,
            hi,
            cost: Arc::new(cost),
            d: vec![0.0; ncols],
            state,
            basis,
            row_of,
            b: Arc::new(b),
            cols: Arc::new(cols),
            iterations: 0,
            since_refresh: 0,
            max_iterations: 20_000 + 50 * (n + 2 * m),
        }
    }

    fn has_artificials(&self) -> bool {
        self.ncols > self.n + self.m
    }

    /// Phase 1 (when needed) then phase 2 from the current basis.
    pub(crate) fn solve(&mut self, deadline: Option<Instant>) -> LpStatus {
        if self.has_artificials() {
            let mut phase1 = vec![0.0; self.ncols];
            for c in &mut phase1[self.n + self.m..] {
                *c = 1.0;
            }
            let st = self.primal(&phase1, deadline);
            if st != LpStatus::Optimal {
                return if st == LpStatus::Unbounded { LpStatus::Infeasible } else { st };
            }
            let infeas: f64 = self.x[self.n + self.m..].iter().sum();
            let scale = 1.0 + self.b.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            if infeas > FEAS_TOL * scale {
                return LpStatus::Infeasible;
            }
            self.retire_artificials();
        }
        let cost = Arc::clone(&self.cost);
        self.polish(&cost, deadline)
    }

    /// Reoptimizes after bound changes while the basis stays dual feasible.
    pub(crate) fn reoptimize(&mut self, deadline: Option<Instant>) -> LpStatus {
        if self.has_artificials() && self.lo[self.n + self.m] != self.hi[self.n + self.m] {
            return self.solve(deadline);
        }
        let st = self.dual(deadline);
        if st != LpStatus::Optimal {
            return st;
        }
        let cost = Arc::clone(&self.cost);
        self.polish(&cost, deadline)
    }

    /// Primal phase 2 followed by a from-scratch accuracy check; reinverts
    /// the basis when the tableau has drifted.
    fn polish(&mut self, cost: &[f64], deadline: Option<Instant>) -> LpStatus {
        for attempt in 0..4 {
            let st = self.primal(cost, deadline);
            if st != LpStatus::Optimal {
                return st;
            }
            if self.residual() <= 1e-9 * self.scale() {
                return LpStatus::Optimal;
            }
            self.reinvert();
            if attempt == 3 {
                break;
            }
            if self.max_violation() > FEAS_TOL {
                let st = self.dual(deadline);
                if st != LpStatus::Optimal {
                    return st;
                }
            }
        }
        LpStatus::Optimal
    }

    fn scale(&self) -> f64 {
        1.0 + self.b.iter().fold(0.0_f64, |a, v| a.max(v.abs()))
    }

    /// Fixes artificials at zero and drops the nonbasic ones.
    fn retire_artificials(&mut self) {
        let first = self.n + self.m;
        for j in first..self.ncols {
            self.lo[j] = 0.0;
            self.hi[j] = 0.0;
            if self.state[j] != State::Basic {
                self.x[j] = 0.0;
                self.state[j] = State::Lower;
            }
        }
        let keep: Vec<usize> = (0..self.ncols)
            .filter(|&j| j < first || self.state[j] == State::Basic)
            .collect();
        if keep.len() == self.ncols {
            return;
        }
        let nc = keep.len();
        let mut t = vec![0.0; self.m * nc];
        for r in 0..self.m {
            let src = &self.t[r * self.ncols..(r + 1) * self.ncols];
            let dst = &mut t[r * nc..(r + 1) * nc];
            for (new, &old) in keep.iter().enumerate() {
                dst[new] = src[old];
            }
        }
        let pick = |v: &[f64]| keep.iter().map(|&j| v[j]).collect::<Vec<f64>>();
        self.x = pick(&self.x);
        self.lo = pick(&self.lo);
        self.hi = pick(&self.hi);
        self.d = pick(&self.d);
        self.cost = Arc::new(pick(&self.cost));
        self.state = keep.iter().map(|&j| self.state[j]).collect();
        self.cols = Arc::new(keep.iter().map(|&j| self.cols[j].clone()).collect());
        self.t = t;
        self.ncols = nc;
        self.row_of = vec![NONE; nc];
        let mut new_of = vec![NONE; keep.iter().max().map_or(0, |&j| j + 1)];
        for (new, &old) in keep.iter().enumerate() {
            new_of[old] = new;
        }
        for r in 0..self.m {
            self.basis[r] = new_of[self.basis[r]];
            self.row_of[self.basis[r]] = r;
        }
    }

    /// Changes the bounds of structural column `j`, moving it if nonbasic.
    pub(crate) fn set_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        self.lo[j] = lo;
        self.hi[j] = hi;
        if self.state[j] == State::Basic {
            return;
        }
        let (target, st) = if lo == hi {
            (lo, State::Lower)
        } else {
            match self.state[j] {
                State::Upper if hi.is_finite() => (hi, State::Upper),
                _ => rest_value(lo, hi),
            }
        };
        let delta = target - self.x[j];
        self.x[j] = target;
        self.state[j] = st;
        if delta != 0.0 {
            for r in 0..self.m {
                let a = self.t[r * self.ncols + j];
                if a != 0.0 {
                    self.x[self.basis[r]] -= a * delta;
                }
            }
        }
    }

    pub(crate) fn bounds(&self, j: usize) -> (f64, f64) {
        (self.lo[j], self.hi[j])
    }

    pub(crate) fn solution(&self, status: LpStatus) -> LpSolution {
        let x: Vec<f64> = (0..self.n).map(|j| self.x[j].clamp(self.lo[j], self.hi[j])).collect();
        let objective = x.iter().zip(self.cost.iter()).map(|(a, c)| a * c).sum();
        LpSolution {
            status,
            x,
            objective,
            iterations: self.iterations,
        }
    }

    pub(crate) fn iterations(&self) -> usize {
        self.iterations
    }

    pub(crate) fn memory_bytes(&self) -> usize {
        8 * (self.t.len() + 6 * self.ncols)
    }

    fn row(&self, r: usize) -> &[f64] {
        &self.t[r * self.ncols..(r + 1) * self.ncols]
    }

    fn compute_duals(&mut self, cost: &[f64]) {
        self.d.copy_from_slice(cost);
        for r in 0..self.m {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                let row = &self.t[r * self.ncols..(r + 1) * self.ncols];
                for (dj, a) in self.d.iter_mut().zip(row) {
                    *dj -= cb * a;
                }
            }
        }
        for r in 0..self.m {
            self.d[self.basis[r]] = 0.0;
        }
    }

    /// Recomputes basic values from `B^-1 b` and the nonbasic columns.
    fn recompute_basics(&mut self) {
        let (n, m, nc) = (self.n, self.m, self.ncols);
        for r in 0..m {
            let row = &self.t[r * nc..(r + 1) * nc];
            let mut v: f64 = (0..m).map(|i| row[n + i] * self.b[i]).sum();
            for j in 0..nc {
                if self.state[j] != State::Basic && self.x[j] != 0.0 && row[j] != 0.0 {
                    v -= row[j] * self.x[j];
                }
            }
            self.x[self.basis[r]] = v;
        }
    }

    fn max_violation(&self) -> f64 {
        self.basis
            .iter()
            .map(|&j| (self.lo[j] - self.x[j]).max(self.x[j] - self.hi[j]))
            .fold(0.0, f64::max)
    }

    /// `max |A x + s - b|` over the original rows.
    fn residual(&self) -> f64 {
        let mut r: Vec<f64> = self.b.iter().map(|v| -v).collect();
        for (j, col) in self.cols.iter().enumerate() {
            let xj = self.x[j];
            if xj != 0.0 {
                for &(i, a) in col {
                    r[i] += a * xj;
                }
            }
        }
        r.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Rebuilds the tableau from the original columns and the current basis.
    fn reinvert(&mut self) {
        let m = self.m;
        let mut bm = DMatrix::<f64>::zeros(m, m);
        for (r, &j) in self.basis.iter().enumerate() {
            for &(i, a) in &self.cols[j] {
                bm[(i, r)] = a;
            }
        }
        let Some(inv) = bm.try_inverse() else {
            log::debug!("basis matrix is singular; keeping the current tableau");
            return;
        };
        let nc = self.ncols;
        let mut t = vec![0.0; m * nc];
        for (j, col) in self.cols.iter().enumerate() {
            for &(i, a) in col {
                for r in 0..m {
                    t[r * nc + j] += inv[(r, i)] * a;
                }
            }
        }
        for (r, &j) in self.basis.iter().enumerate() {
            for rr in 0..m {
                t[rr * nc + j] = if rr == r { 1.0 } else { 0.0 };
            }
        }
        self.t = t;
        self.recompute_basics();
        let cost = Arc::clone(&self.cost);
        self.compute_duals(&cost);
        self.since_refresh = 0;
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let nc = self.ncols;
        let piv = self.t[r * nc + q];
        let (before, rest) = self.t.split_at_mut(r * nc);
        let (prow, after) = rest.split_at_mut(nc);
        for v in prow.iter_mut() {
            *v /= piv;
        }
        prow[q] = 1.0;
        for other in before.chunks_exact_mut(nc).chain(after.chunks_exact_mut(nc)) {
            let f = other[q];
            if f != 0.0 {
                for (o, p) in other.iter_mut().zip(prow.iter()) {
                    *o -= f * p;
                }
                other[q] = 0.0;
            }
        }
        let f = self.d[q];
        if f != 0.0 {
            for (dj, p) in self.d.iter_mut().zip(prow.iter()) {
                *dj -= f * p;
            }
        }
        self.d[q] = 0.0;
        let old = self.basis[r];
        self.row_of[old] = NONE;
        self.basis[r] = q;
        self.row_of[q] = r;
        self.state[q] = State::Basic;
        self.iterations += 1;
        self.since_refresh += 1;
    }

    fn limits_hit(&self, deadline: Option<Instant>) -> Option<LpStatus> {
        if self.iterations >= self.max_iterations {
            return Some(LpStatus::IterationLimit);
        }
        if self.iterations % 32 == 0 {
            if let Some(dl) = deadline {
                if Instant::now() >= dl {
                    return Some(LpStatus::TimeLimit);
                }
            }
        }
        None
    }

    fn refresh_if_due(&mut self, cost: &[f64]) {
        if self.since_refresh >= REFRESH_EVERY {
            self.recompute_basics();
            self.compute_duals(cost);
            self.since_refresh = 0;
        }
    }

    /// Primal simplex from a primal feasible basis.
    fn primal(&mut self, cost: &[f64], deadline: Option<Instant>) -> LpStatus {
        self.compute_duals(cost);
        let nc = self.ncols;
        let mut degenerate = 0;
        let mut verified = false;
        loop {
            if let Some(st) = self.limits_hit(deadline) {
                return st;
            }
            self.refresh_if_due(cost);
            let bland = degenerate > DEGENERATE_LIMIT;

            let mut enter: Option<(usize, f64)> = None;
            let mut best = OPT_TOL;
            for j in 0..nc {
                if self.state[j] == State::Basic || self.lo[j] == self.hi[j] {
                    continue;
                }
                let dj = self.d[j];
                let dir = match self.state[j] {
                    State::Lower if dj < -OPT_TOL => 1.0,
                    State::Upper if dj > OPT_TOL => -1.0,
                    State::Zero if dj.abs() > OPT_TOL => -dj.signum(),
                    _ => continue,
                };
                if bland {
                    enter = Some((j, dir));
                    break;
                }
                if dj.abs() > best {
                    best = dj.abs();
                    enter = Some((j, dir));
                }
            }
            let Some((q, dir)) = enter else {
                if verified || self.since_refresh == 0 {
                    return LpStatus::Optimal;
                }
                // confirm against freshly computed values
                self.recompute_basics();
                self.compute_duals(cost);
                self.since_refresh = 0;
                verified = true;
                continue;
            };
            verified = false;

            // Harris ratio test
            let flip = self.hi[q] - self.lo[q];
            let mut theta_max = flip;
            for r in 0..self.m {
                let a = dir * self.t[r * nc + q];
                let jb = self.basis[r];
                let lim = if a > PIVOT_TOL {
                    (self.x[jb] - self.lo[jb] + FEAS_TOL) / a
                } else if a < -PIVOT_TOL {
                    (self.hi[jb] - self.x[jb] + FEAS_TOL) / -a
                } else {
                    continue;
                };
                theta_max = theta_max.min(lim);
            }
            if theta_max == f64::INFINITY {
                return LpStatus::Unbounded;
            }
            let mut leave: Option<(usize, f64)> = None;
            let mut best_key = (f64::NEG_INFINITY, 0.0);
            for r in 0..self.m {
                let a = dir * self.t[r * nc + q];
                let jb = self.basis[r];
                let ratio = if a > PIVOT_TOL {
                    (self.x[jb] - self.lo[jb]) / a
                } else if a < -PIVOT_TOL {
                    (self.hi[jb] - self.x[jb]) / -a
                } else {
                    continue;
                };
                if ratio > theta_max {
                    continue;
                }
                let key = if bland { (-ratio, -(jb as f64)) } else { (a.abs(), -ratio) };
                if key > best_key {
                    best_key = key;
                    leave = Some((r, ratio.max(0.0)));
                }
            }

            let step = match leave {
                Some((_, ratio)) if ratio < flip => ratio,
                _ => flip,
            };
            if step != 0.0 {
                self.x[q] += dir * step;
                for r in 0..self.m {
                    let a = self.t[r * nc + q];
                    if a != 0.0 {
                        self.x[self.basis[r]] -= dir * a * step;
                    }
                }
            }
            degenerate = if step < 1e-12 { degenerate + 1 } else { 0 };
            match leave {
                Some((r, ratio)) if ratio < flip => {
                    let jb = self.basis[r];
                    let a = dir * self.t[r * nc + q];
                    if a > 0.0 {
                        self.x[jb] = self.lo[jb];
                        self.state[jb] = State::Lower;
                    } else {
                        self.x[jb] = self.hi[jb];
                        self.state[jb] = State::Upper;
                    }
                    self.pivot(r, q);
                }
                _ => {
                    // bound flip
                    if dir > 0.0 {
                        self.x[q] = self.hi[q];
                        self.state[q] = State::Upper;
                    } else {
                        self.x[q] = self.lo[q];
                        self.state[q] = State::Lower;
                    }
                    self.iterations += 1;
                }
            }
        }
    }

    /// Dual simplex from a dual feasible basis.
    fn dual(&mut self, deadline: Option<Instant>) -> LpStatus {
        let cost = Arc::clone(&self.cost);
        self.compute_duals(&cost);
        let nc = self.ncols;
        let mut degenerate = 0;
        loop {
            if let Some(st) = self.limits_hit(deadline) {
                return st;
            }
            self.refresh_if_due(&cost);
            let bland = degenerate > DEGENERATE_LIMIT;

            let mut leave: Option<usize> = None;
            let mut worst = FEAS_TOL;
            for r in 0..self.m {
                let jb = self.basis[r];
                let v = (self.lo[jb] - self.x[jb]).max(self.x[jb] - self.hi[jb]);
                if v > worst {
                    worst = v;
                    leave = Some(r);
                    if bland {
                        break;
                    }
                }
            }
            let Some(r) = leave else {
                return LpStatus::Optimal;
            };
            let jb = self.basis[r];
            let below = self.x[jb] < self.lo[jb];
            let target = if below { self.lo[jb] } else { self.hi[jb] };
            let s = if below { 1.0 } else { -1.0 };

            let row = self.row(r);
            let eligible = |j: usize| -> Option<f64> {
                let a = row[j];
                if self.state[j] == State::Basic || self.lo[j] == self.hi[j] || a.abs() <= PIVOT_TOL {
                    return None;
                }
                let ok = match self.state[j] {
                    State::Lower => s * a < 0.0,
                    State::Upper => s * a > 0.0,
                    _ => true,
                };
                ok.then(|| self.d[j].abs())
            };
            let mut theta_max = f64::INFINITY;
            for j in 0..nc {
                if let Some(dj) = eligible(j) {
                    theta_max = theta_max.min((dj + OPT_TOL) / row[j].abs());
                }
            }
            if theta_max == f64::INFINITY {
                return LpStatus::Infeasible;
            }
            let mut enter = None;
            let mut best_key = (f64::NEG_INFINITY, 0.0);
            for j in 0..nc {
                if let Some(dj) = eligible(j) {
                    let ratio = dj / row[j].abs();
                    if ratio > theta_max {
                        continue;
                    }
                    let key = if bland { (-ratio, -(j as f64)) } else { (row[j].abs(), -ratio) };
                    if key > best_key {
                        best_key = key;
                        enter = Some(j);
                    }
                }
            }
            let q = enter.expect("eligible column exists");
            let alpha = self.t[r * nc + q];
            let delta = (self.x[jb] - target) / alpha;
            degenerate = if (best_key.1).abs() < 1e-12 && !bland { degenerate + 1 } else { 0 };
            self.x[q] += delta;
            for rr in 0..self.m {
                let a = self.t[rr * nc + q];
                if a != 0.0 {
                    self.x[self.basis[rr]] -= a * delta;
                }
            }
            self.x[jb] = target;
            self.state[jb] = if below { State::Lower } else { State::Upper };
            self.pivot(r, q);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::model::Integrality;

    fn cont(m: &mut MilpModel, name: &str, lo: f64, hi: f64) -> usize {
        m.add_var(name, lo, hi, Integrality::Continuous)
    }

    #[test]
    fn single_lower_row() {
        let mut m = MilpModel::new("a");
        let x = cont(&mut m, "x", 0.0, 10.0);
        m.set_objective(x, 1.0);
        m.add_constraint("r", vec![(x, 1.0)], Sense::Ge, 3.0);
        let s = solve_lp(&m);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.x[0] - 3.0).abs() < 1e-9 && (s.objective - 3.0).abs() < 1e-9);
    }

    #[test]
    fn box_and_budget() {
        let mut m = MilpModel::new("b");
        let x = cont(&mut m, "x", 0.0, 1.0);
        let y = cont(&mut m, "y", 0.0, 1.0);
        m.set_objective(x, -1.0);
        m.set_objective(y, -1.0);
        m.add_constraint("r", vec![(x, 1.0), (y, 1.0)], Sense::Le, 1.0);
        let s = solve_lp(&m);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective + 1.0).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut m = MilpModel::new("inf");
        let x = cont(&mut m, "x", 0.0, 1.0);
        m.add_constraint("r", vec![(x, 1.0)], Sense::Ge, 2.0);
        assert_eq!(solve_lp(&m).status, LpStatus::Infeasible);

        let mut m = MilpModel::new("unb");
        let x = cont(&mut m, "x", 0.0, f64::INFINITY);
        let y = cont(&mut m, "y", f64::NEG_INFINITY, f64::INFINITY);
        m.set_objective(y, 1.0);
        m.add_constraint("r", vec![(x, 1.0), (y, 1.0)], Sense::Eq, 0.0);
        assert_eq!(solve_lp(&m).status, LpStatus::Unbounded);
    }

    #[test]
    fn equality_and_free_columns() {
        // min |x - 2| via x - p + q = 2 written with a free x
        let mut m = MilpModel::new("eq");
        let x = cont(&mut m, "x", f64::NEG_INFINITY, f64::INFINITY);
        let p = cont(&mut m, "p", 0.0, f64::INFINITY);
        let q = cont(&mut m, "q", 0.0, f64::INFINITY);
        m.set_objective(p, 1.0);
        m.set_objective(q, 1.0);
        m.set_objective(x, 0.0);
        m.add_constraint("r", vec![(x, 1.0), (p, -1.0), (q, 1.0)], Sense::Eq, 2.0);
        m.add_constraint("s", vec![(x, 1.0)], Sense::Ge, 5.0);
        let s = solve_lp(&m);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 3.0).abs() < 1e-9, "{s:?}");
    }

    #[test]
    fn dual_reoptimization_after_fixing() {
        let mut m = MilpModel::new("d");
        let x = cont(&mut m, "x", 0.0, 1.0);
        let y = cont(&mut m, "y", 0.0, 1.0);
        m.set_objective(x, -2.0);
        m.set_objective(y, -1.0);
        m.add_constraint("r", vec![(x, 1.0), (y, 1.0)], Sense::Le, 1.5);
        let mut t = Tableau::new(&m);
        assert_eq!(t.solve(None), LpStatus::Optimal);
        assert!((t.solution(LpStatus::Optimal).objective + 2.5).abs() < 1e-9);
        t.set_bounds(y, 0.0, 0.0);
        assert_eq!(t.reoptimize(None), LpStatus::Optimal);
        assert!((t.solution(LpStatus::Optimal).objective + 2.0).abs() < 1e-9);
        t.set_bounds(x, 0.0, 0.0);
        t.set_bounds(y, 1.0, 1.0);
        assert_eq!(t.reoptimize(None), LpStatus::Optimal);
        assert!((t.solution(LpStatus::Optimal).objective + 1.0).abs() < 1e-9);
    }
}
