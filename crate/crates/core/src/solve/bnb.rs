//! Branch-and-bound over the binary columns of a [`MilpModel`].
//!
//! Nodes are evaluated lazily: a child inherits its parent's LP value as a
//! bound and is solved only when popped, starting from the parent's optimal
//! tableau (dual simplex) when that tableau is still held, or from the root
//! tableau otherwise.

use std::cell::Cell;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::rc::Rc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::simplex::{LpStatus, Tableau};
use crate::error::{Error, Result};
use crate::milp::model::{check_solution, MilpModel, Sense};

pub const INTEGRALITY_TOL: f64 = 1e-6;
const WARM_BUDGET_BYTES: usize = 512 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchRule {
    MostFractional,
    FirstFractional,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchOrder {
    BestBound,
    DepthFirst,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    /// Stop once `(objective - bound) / |objective|` is at most this.
    pub gap_threshold: f64,
    /// Seconds.
    pub time_limit: f64,
    pub node_limit: usize,
    pub branch_rule: BranchRule,
    pub search: SearchOrder,
    /// Run the rounding heuristic every this many nodes.
    pub heuristic_every: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            gap_threshold: 0.05,
            time_limit: 3600.0,
            node_limit: 10_000_000,
            branch_rule: BranchRule::MostFractional,
            search: SearchOrder::BestBound,
            heuristic_every: 25,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.gap_threshold) {
            return Err(Error::Config(format!("gap threshold {} must lie in [0, 1)", self.gap_threshold)));
        }
        if !(self.time_limit > 0.0) || self.node_limit == 0 || self.heuristic_every == 0 {
            return Err(Error::Config("time limit, node limit and heuristic period must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    GapReached,
    TimeLimit,
    NodeLimit,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub incumbent: Option<Vec<f64>>,
    /// Incumbent objective, `+inf` without one.
    pub objective: f64,
    pub best_bound: f64,
    pub gap: f64,
    pub nodes: usize,
    pub lp_iterations: usize,
    pub wall_time: f64,
}

impl SolveResult {
    pub fn has_incumbent(&self) -> bool {
        self.incumbent.is_some()
    }
}

/// `(objective - bound) / max(|objective|, 1e-9)`, infinite without an
/// incumbent.
pub fn relative_gap(objective: f64, bound: f64) -> f64 {
    if !objective.is_finite() {
        return f64::INFINITY;
    }
    ((objective - bound) / objective.abs().max(1e-9)).max(0.0)
}

/// Tableau shared between siblings, counted against a memory budget.
struct Warm {
    tab: Tableau,
    bytes: usize,
    live: Rc<Cell<usize>>,
}

impl Drop for Warm {
    fn drop(&mut self) {
        self.live.set(self.live.get() - self.bytes);
    }
}

struct Node {
    bound: f64,
    depth: usize,
    id: usize,
    fixes: Vec<(usize, f64)>,
    warm: Option<Rc<Warm>>,
}

// max-heap order: smallest bound first, then deeper, then older
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.id.cmp(&self.id))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

enum Open {
    Heap(BinaryHeap<Node>),
    Stack(Vec<Node>),
}

impl Open {
    fn push(&mut self, n: Node) {
        match self {
            Open::Heap(h) => h.push(n),
            Open::Stack(s) => s.push(n),
        }
    }

    fn pop(&mut self) -> Option<Node> {
        match self {
            Open::Heap(h) => h.pop(),
            Open::Stack(s) => s.pop(),
        }
    }

    fn min_bound(&self) -> f64 {
        match self {
            Open::Heap(h) => h.peek().map_or(f64::INFINITY, |n| n.bound),
            Open::Stack(s) => s.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min),
        }
    }

    fn is_empty(&self) -> bool {
        match self {
            Open::Heap(h) => h.is_empty(),
            Open::Stack(s) => s.is_empty(),
        }
    }
}

struct Search<'a> {
    model: &'a MilpModel,
    binaries: Vec<usize>,
    /// Rows `sum c = 1` over binaries, used by the rounding heuristic.
    groups: Vec<Vec<usize>>,
    deadline: Instant,
    incumbent: Option<(f64, Vec<f64>)>,
    lp_iterations: usize,
}

impl Search<'_> {
    fn prune_level(&self) -> f64 {
        match &self.incumbent {
            Some((v, _)) => v - 1e-9 * v.abs().max(1.0),
            None => f64::INFINITY,
        }
    }

    fn offer(&mut self, x: Vec<f64>) {
        let Ok(chk) = check_solution(self.model, &x) else { return };
        if !chk.feasible {
            log::debug!("heuristic point rejected, violation {:.3e}", chk.max_violation);
            return;
        }
        let better = match &self.incumbent {
            None => true,
            Some((v, old)) => chk.objective < *v - 1e-12 || (chk.objective <= *v && x < *old),
        };
        if better {
            log::debug!("new incumbent {:.6}", chk.objective);
            self.incumbent = Some((chk.objective, x));
        }
    }

    /// Rounds the binaries of `x` (one winner per assignment row), fixes
    /// them in a copy of `base` and reoptimizes the continuous part.
    fn round_and_fix(&mut self, base: &Tableau, x: &[f64]) {
        let mut target: Vec<Option<f64>> = vec![None; x.len()];
        for g in &self.groups {
            let mut best = g[0];
            for &j in g {
                if x[j] > x[best] + 1e-12 {
                    best = j;
                }
            }
            for &j in g {
                target[j] = Some(if j == best { 1.0 } else { 0.0 });
            }
        }
        let mut tab = base.clone();
        for &j in &self.binaries {
            if let Some(v) = target[j] {
                tab.set_bounds(j, v, v);
            }
        }
        let before = tab.iterations();
        let st = tab.reoptimize(Some(self.deadline));
        self.lp_iterations += tab.iterations() - before;
        if st != LpStatus::Optimal {
            return;
        }
        let mut sol = tab.solution(st).x;
        let loose: Vec<usize> = self.binaries.iter().copied().filter(|&j| target[j].is_none()).collect();
        if loose.iter().any(|&j| fractionality(sol[j]) > INTEGRALITY_TOL) {
            for &j in &loose {
                let v = sol[j].round();
                tab.set_bounds(j, v, v);
            }
            let st = tab.reoptimize(Some(self.deadline));
            if st != LpStatus::Optimal {
                return;
            }
            sol = tab.solution(st).x;
        }
        for &j in &self.binaries {
            sol[j] = sol[j].round();
        }
        self.offer(sol);
    }
}

fn fractionality(v: f64) -> f64 {
    (v - v.floor()).min(v.ceil() - v)
}

fn assignment_groups(model: &MilpModel) -> Vec<Vec<usize>> {
    let is_bin: Vec<bool> = model
        .variables
        .iter()
        .map(|v| v.integrality == crate::milp::model::Integrality::Binary)
        .collect();
    model
        .constraints
        .iter()
        .filter(|c| {
            c.sense == Sense::Eq && c.rhs == 1.0 && !c.coefs.is_empty() && c.coefs.iter().all(|&(j, a)| a == 1.0 && is_bin[j])
        })
        .map(|c| c.coefs.iter().map(|&(j, _)| j).collect())
        .collect()
}

/// Branch-and-bound on the binary columns with LP relaxations.
pub fn solve_milp(model: &MilpModel, cfg: &SolveConfig) -> Result<SolveResult> {
    cfg.validate()?;
    model.validate()?;
    let start = Instant::now();
    let deadline = start + Duration::from_secs_f64(cfg.time_limit.min(1e9));
    let mut search = Search {
        model,
        binaries: model.binaries().collect(),
        groups: assignment_groups(model),
        deadline,
        incumbent: None,
        lp_iterations: 0,
    };
    let finish = |search: Search, status: SolveStatus, bound: f64, nodes: usize| {
        let (objective, incumbent) = match search.incumbent {
            Some((v, x)) => (v, Some(x)),
            None => (f64::INFINITY, None),
        };
        let best_bound = if status == SolveStatus::Optimal { objective } else { bound.min(objective) };
        SolveResult {
            status,
            gap: relative_gap(objective, best_bound),
            incumbent,
            objective,
            best_bound,
            nodes,
            lp_iterations: search.lp_iterations,
            wall_time: start.elapsed().as_secs_f64(),
        }
    };

    let mut root = Tableau::new(model);
    let st = root.solve(Some(deadline));
    search.lp_iterations += root.iterations();
    match st {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Ok(finish(search, SolveStatus::Infeasible, f64::INFINITY, 1)),
        LpStatus::Unbounded => return Ok(finish(search, SolveStatus::Unbounded, f64::NEG_INFINITY, 1)),
        LpStatus::TimeLimit | LpStatus::IterationLimit => {
            return Ok(finish(search, SolveStatus::TimeLimit, f64::NEG_INFINITY, 1));
        }
    }
    let root_bound = root.solution(st).objective;
    let root = Rc::new(root);
    let live = Rc::new(Cell::new(0usize));

    let mut open = match cfg.search {
        SearchOrder::BestBound => Open::Heap(BinaryHeap::new()),
        SearchOrder::DepthFirst => Open::Stack(Vec::new()),
    };
    open.push(Node {
        bound: root_bound,
        depth: 0,
        id: 0,
        fixes: Vec::new(),
        warm: None,
    });
    let mut next_id = 1;
    let mut nodes = 0;
    // bound of nodes given up on after LP failures
    let mut lost = f64::INFINITY;
    let mut first = true;

    let status = loop {
        let global = open.min_bound().min(lost);
        if let Some((v, _)) = &search.incumbent {
            let closed = open.min_bound() >= search.prune_level();
            if closed && lost == f64::INFINITY {
                break SolveStatus::Optimal;
            }
            if closed || relative_gap(*v, global) <= cfg.gap_threshold {
                break SolveStatus::GapReached;
            }
        } else if open.is_empty() {
            break if lost == f64::INFINITY { SolveStatus::Infeasible } else { SolveStatus::NodeLimit };
        }
        if Instant::now() >= deadline {
            break SolveStatus::TimeLimit;
        }
        if nodes >= cfg.node_limit {
            break SolveStatus::NodeLimit;
        }
        let node = open.pop().unwrap();
        if node.bound >= search.prune_level() {
            continue;
        }

        let mut tab = if first {
            first = false;
            (*root).clone()
        } else {
            let mut t = match &node.warm {
                Some(w) => w.tab.clone(),
                None => (*root).clone(),
            };
            for &(j, v) in &node.fixes {
                if t.bounds(j) != (v, v) {
                    t.set_bounds(j, v, v);
                }
            }
            t
        };
        let before = tab.iterations();
        let mut st = if nodes == 0 { LpStatus::Optimal } else { tab.reoptimize(Some(deadline)) };
        if st == LpStatus::IterationLimit || st == LpStatus::Unbounded {
            log::warn!("node LP returned {st:?}; re-solving from scratch");
            let mut t = Tableau::new(model);
            for &(j, v) in &node.fixes {
                t.set_bounds(j, v, v);
            }
            st = t.solve(Some(deadline));
            tab = t;
        }
        nodes += 1;
        search.lp_iterations += tab.iterations().saturating_sub(before);
        let sol = tab.solution(st);
        match st {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => continue,
            LpStatus::TimeLimit => {
                open.push(node);
                break SolveStatus::TimeLimit;
            }
            LpStatus::IterationLimit | LpStatus::Unbounded => {
                log::warn!("abandoning node {} after LP status {st:?}", node.id);
                lost = lost.min(node.bound);
                continue;
            }
        }
        let bound = sol.objective.max(node.bound);
        if bound >= search.prune_level() {
            continue;
        }

        let pick = match cfg.branch_rule {
            BranchRule::MostFractional => {
                let mut best: Option<(usize, f64)> = None;
                for &j in &search.binaries {
                    let f = fractionality(sol.x[j]);
                    if f > INTEGRALITY_TOL && best.is_none_or(|(_, bf)| f > bf) {
                        best = Some((j, f));
                    }
                }
                best.map(|(j, _)| j)
            }
            BranchRule::FirstFractional => search
                .binaries
                .iter()
                .copied()
                .find(|&j| fractionality(sol.x[j]) > INTEGRALITY_TOL),
        };
        let Some(j) = pick else {
            // integral relaxation: polish the continuous part with binaries pinned
            search.round_and_fix(&tab, &sol.x);
            continue;
        };
        if nodes == 1 || nodes % cfg.heuristic_every == 0 {
            search.round_and_fix(&tab, &sol.x);
        }

        let bytes = tab.memory_bytes();
        let warm = (live.get() + bytes <= WARM_BUDGET_BYTES).then(|| {
            live.set(live.get() + bytes);
            Rc::new(Warm {
                tab,
                bytes,
                live: Rc::clone(&live),
            })
        });
        let up_first = sol.x[j] >= 0.5;
        let order = if up_first { [0.0, 1.0] } else { [1.0, 0.0] };
        for v in order {
            let mut fixes = node.fixes.clone();
            fixes.push((j, v));
            open.push(Node {
                bound,
                depth: node.depth + 1,
                id: next_id,
                fixes,
                warm: warm.clone(),
            });
            next_id += 1;
        }
        if nodes % 500 == 0 {
            log::info!(
                "nodes {nodes}, open bound {:.6}, incumbent {:?}",
                open.min_bound(),
                search.incumbent.as_ref().map(|(v, _)| *v)
            );
        }
    };
    let bound = open.min_bound().min(lost);
    Ok(finish(search, status, bound, nodes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::model::Integrality;

    fn exact() -> SolveConfig {
        SolveConfig {
            gap_threshold: 0.0,
            ..SolveConfig::default()
        }
    }

    #[test]
    fn integral_relaxation_needs_one_node() {
        let mut m = MilpModel::new("int");
        let a = m.add_binary("a");
        let b = m.add_binary("b");
        m.set_objective(a, 1.0);
        m.set_objective(b, 2.0);
        m.add_constraint("one", vec![(a, 1.0), (b, 1.0)], Sense::Eq, 1.0);
        let r = solve_milp(&m, &exact()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert_eq!(r.nodes, 1);
        assert_eq!(r.incumbent.unwrap(), vec![1.0, 0.0]);
        assert!((r.objective - 1.0).abs() < 1e-9 && r.gap == 0.0);
    }

    #[test]
    fn forced_zero_assignment_is_infeasible() {
        let mut m = MilpModel::new("inf");
        let a = m.add_var("a", 0.0, 0.0, Integrality::Binary);
        let b = m.add_var("b", 0.0, 0.0, Integrality::Binary);
        m.add_constraint("one", vec![(a, 1.0), (b, 1.0)], Sense::Eq, 1.0);
        let r = solve_milp(&m, &exact()).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible);
        assert!(r.incumbent.is_none());
    }

    #[test]
    fn knapsack_needs_branching() {
        // max 5a + 4b + 3c  s.t. 2a + 3b + c <= 4 ; optimum a + c -> 8
        let mut m = MilpModel::new("knap");
        let v: Vec<usize> = ["a", "b", "c"].iter().map(|n| m.add_binary(*n)).collect();
        for (j, c) in v.iter().zip([-5.0, -4.0, -3.0]) {
            m.set_objective(*j, c);
        }
        m.add_constraint("w", vec![(v[0], 2.0), (v[1], 3.0), (v[2], 1.0)], Sense::Le, 4.0);
        for search in [SearchOrder::BestBound, SearchOrder::DepthFirst] {
            let cfg = SolveConfig { search, ..exact() };
            let r = solve_milp(&m, &cfg).unwrap();
            assert_eq!(r.status, SolveStatus::Optimal);
            assert!((r.objective + 8.0).abs() < 1e-9, "{r:?}");
            assert!(r.best_bound <= r.objective + 1e-9);
        }
    }

    #[test]
    fn config_validation() {
        assert!(SolveConfig { gap_threshold: 1.0, ..exact() }.validate().is_err());
        assert!(SolveConfig { time_limit: 0.0, ..exact() }.validate().is_err());
        assert!(exact().validate().is_ok());
    }

    #[test]
    fn gap_formula() {
        assert_eq!(relative_gap(10.0, 9.0), 0.1);
        assert_eq!(relative_gap(0.0, 0.0), 0.0);
        assert!(relative_gap(f64::INFINITY, 1.0).is_infinite());
    }
}
