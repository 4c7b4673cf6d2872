use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::cluster::{Assignment, ClusterParams, ClusterType};
use crate::data::{Dataset, Response, Task};
use crate::error::{Error, Result};
use crate::loss::{LossKind, LossSpec, Regularization, WW_MARGIN};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrality {
    Continuous,
    Binary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub integrality: Integrality,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub coefs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// Big-M constants for each constraint family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BigM {
    /// Loss activation rows.
    pub m: f64,
    /// Center-distance rows.
    pub m2: f64,
    /// Box containment rows.
    pub m3: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub geometry: ClusterType,
    pub loss: LossKind,
    pub k: usize,
    pub n: usize,
    pub d: usize,
    pub n_classes: usize,
    pub big_m: BigM,
    pub lambda: f64,
    pub theta_bound: f64,
    pub epsilon: f64,
    pub strict_boxes: bool,
}

/// Minimization MILP with binary and continuous columns.
#[derive(Clone, Debug, PartialEq)]
pub struct MilpModel {
    pub name: String,
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    /// Sparse objective, one entry per column at most.
    pub objective: Vec<(usize, f64)>,
    pub var_index: HashMap<String, usize>,
    pub metadata: Option<ModelMetadata>,
}

impl MilpModel {
    pub fn new(name: impl Into<String>) -> Self {
        MilpModel {
            name: name.into(),
            variables: Vec::new(),
            constraints: Vec::new(),
            objective: Vec::new(),
            var_index: HashMap::new(),
            metadata: None,
        }
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64, integrality: Integrality) -> usize {
        let name = name.into();
        let idx = self.variables.len();
        self.var_index.insert(name.clone(), idx);
        self.variables.push(Variable {
            name,
            lower,
            upper,
            integrality,
        });
        idx
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> usize {
        self.add_var(name, 0.0, 1.0, Integrality::Binary)
    }

    /// Adds a row; coefficients are stored sorted by column.
    pub fn add_constraint(&mut self, name: impl Into<String>, mut coefs: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        coefs.sort_by_key(|&(j, _)| j);
        self.constraints.push(Constraint {
            name: name.into(),
            coefs,
            sense,
            rhs,
        });
    }

    /// Sets one objective coefficient, keeping entries sorted by column.
    pub fn set_objective(&mut self, var: usize, coef: f64) {
        match self.objective.binary_search_by_key(&var, |&(j, _)| j) {
            Ok(p) => self.objective[p].1 = coef,
            Err(p) => self.objective.insert(p, (var, coef)),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn var(&self, name: &str) -> Option<usize> {
        self.var_index.get(name).copied()
    }

    pub fn binaries(&self) -> impl Iterator<Item = usize> + '_ {
        self.variables
            .iter()
            .enumerate()
            .filter(|(_, v)| v.integrality == Integrality::Binary)
            .map(|(i, _)| i)
    }

    /// Dense objective vector.
    pub fn objective_dense(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.num_vars()];
        for &(j, v) in &self.objective {
            c[j] += v;
        }
        c
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().map(|&(j, c)| c * x[j]).sum()
    }

    pub fn rebuild_index(&mut self) {
        self.var_index = self
            .variables
            .iter()
            .enumerate()
            .map(|(i, v)| (v.name.clone(), i))
            .collect();
    }

    /// Structural checks: column references, bounds, binaries, names.
    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.var_index.len() != n {
            return Err(Error::Model("variable names are not unique".into()));
        }
        for v in &self.variables {
            if v.name.is_empty() || v.name.chars().any(char::is_whitespace) {
                return Err(Error::Model(format!("invalid variable name {:?}", v.name)));
            }
            if v.lower.is_nan() || v.upper.is_nan() || v.lower > v.upper {
                return Err(Error::Model(format!("variable {} has bounds [{}, {}]", v.name, v.lower, v.upper)));
            }
            if v.integrality == Integrality::Binary && (v.lower < 0.0 || v.upper > 1.0) {
                return Err(Error::Model(format!("binary {} must lie in [0, 1]", v.name)));
            }
        }
        for c in &self.constraints {
            if c.name.is_empty() || c.name.chars().any(char::is_whitespace) {
                return Err(Error::Model(format!("invalid constraint name {:?}", c.name)));
            }
            if !c.rhs.is_finite() {
                return Err(Error::Model(format!("constraint {} has non-finite rhs", c.name)));
            }
            for &(j, a) in &c.coefs {
                if j >= n {
                    return Err(Error::Model(format!("constraint {} references column {j}", c.name)));
                }
                if !a.is_finite() {
                    return Err(Error::Model(format!("constraint {} has a non-finite coefficient", c.name)));
                }
            }
        }
        for &(j, a) in &self.objective {
            if j >= n || !a.is_finite() {
                return Err(Error::Model("bad objective entry".into()));
            }
        }
        if let Some(meta) = &self.metadata {
            let bm = meta.big_m;
            if [bm.m, bm.m2, bm.m3].iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(Error::Model("big-M values must be finite and positive".into()));
            }
        }
        Ok(())
    }
}

/// Hyperparameters of the exact formulation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MilpHyper {
    /// Weight of the center-distance term (closest-center only).
    pub lambda: f64,
    /// Box bound on every model weight.
    pub theta_bound: f64,
    /// Minimum box width and strict-containment margin.
    pub epsilon: f64,
    /// Forbid points from lying inside boxes they are not assigned to.
    pub strict_boxes: bool,
}

impl Default for MilpHyper {
    fn default() -> Self {
        MilpHyper {
            lambda: 1.0,
            theta_bound: 100.0,
            epsilon: 1e-6,
            strict_boxes: false,
        }
    }
}

/// Big-M constants that make every deactivated row slack for any weights
/// within `[-B, B]`.
pub fn compute_big_m(ds: &Dataset, spec: &LossSpec, theta_bound: f64, epsilon: f64) -> BigM {
    // |theta'x~| <= B * (||x||_1 + 1) with the constant feature
    let max_l1 = ds
        .rows()
        .map(|x| x.iter().map(|v| v.abs()).sum::<f64>() + 1.0)
        .fold(0.0_f64, f64::max);
    let m = match spec.kind {
        LossKind::HingeWw => WW_MARGIN + 2.0 * theta_bound * max_l1,
        _ => {
            let y = ds.y().unwrap_or(&[]);
            (0..ds.n())
                .map(|i| y.get(i).map_or(0.0, |v| v.abs()) + theta_bound * (ds.row(i).iter().map(|v| v.abs()).sum::<f64>() + 1.0))
                .fold(0.0_f64, f64::max)
        }
    };
    let ranges: Vec<f64> = ds.feature_ranges().iter().map(|(lo, hi)| hi - lo).collect();
    let m2: f64 = ranges.iter().sum();
    let m3 = ranges.iter().copied().fold(0.0_f64, f64::max) + epsilon;
    BigM {
        m: m.max(f64::MIN_POSITIVE),
        m2: m2.max(epsilon),
        m3,
    }
}

/// Compiles the clustered objective into a MILP.
///
/// Supported losses are MAE (regression) and the Weston-Watkins hinge with
/// L1-regularized weights (classification); the hinge loss is not offered
/// with arbitrary clustering.
pub fn build_milp(ds: &Dataset, spec: &LossSpec, geometry: ClusterType, k: usize, hyper: &MilpHyper) -> Result<MilpModel> {
    spec.validate()?;
    match (ds.task(), spec.kind) {
        (Task::Regression, LossKind::Mae) => {}
        (Task::Classification { .. }, LossKind::HingeWw) => {
            if geometry == ClusterType::Arbitrary {
                return Err(Error::Unsupported("arbitrary clustering is not offered with the hinge loss".into()));
            }
            if matches!(spec.regularization, Regularization::L2(_)) {
                return Err(Error::Unsupported("the exact formulation regularizes with L1".into()));
            }
        }
        (_, kind) => {
            return Err(Error::Unsupported(format!("exact formulation does not support {kind} loss for this task")));
        }
    }
    if k == 0 || k > ds.n() {
        return Err(Error::Config(format!("K = {k} must lie in 1..={}", ds.n())));
    }
    if !(hyper.theta_bound > 0.0 && hyper.theta_bound.is_finite()) {
        return Err(Error::Config("theta bound must be positive".into()));
    }
    if !(hyper.epsilon > 0.0) || !(hyper.lambda >= 0.0) {
        return Err(Error::Config("epsilon must be positive and lambda nonnegative".into()));
    }

    let (n, d) = (ds.n(), ds.d());
    let bm = compute_big_m(ds, spec, hyper.theta_bound, hyper.epsilon);
    let b = hyper.theta_bound;
    let n_classes = ds.task().n_classes().unwrap_or(0);
    let mut model = MilpModel::new(format!("predclust_{}_{}_k{k}", geometry.short_name(), spec.kind));

    let c: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..k).map(|kk| model.add_binary(format!("c_{i}_{kk}"))).collect())
        .collect();
    for i in 0..n {
        model.add_constraint(format!("assign_{i}"), c[i].iter().map(|&v| (v, 1.0)).collect(), Sense::Eq, 1.0);
    }

    match spec.kind {
        LossKind::Mae => {
            let y = ds.y().unwrap();
            let theta: Vec<Vec<usize>> = (0..k)
                .map(|kk| {
                    (0..=d)
                        .map(|j| model.add_var(format!("theta_{kk}_{j}"), -b, b, Integrality::Continuous))
                        .collect()
                })
                .collect();
            for i in 0..n {
                for kk in 0..k {
                    let e = model.add_var(format!("e_{i}_{kk}"), 0.0, bm.m, Integrality::Continuous);
                    model.set_objective(e, 1.0);
                    let x = ds.row(i);
                    let mut pos = vec![(e, 1.0)];
                    let mut neg = vec![(e, 1.0)];
                    for j in 0..=d {
                        let xj = if j < d { x[j] } else { 1.0 };
                        if xj != 0.0 {
                            pos.push((theta[kk][j], xj));
                            neg.push((theta[kk][j], -xj));
                        }
                    }
                    pos.push((c[i][kk], -bm.m));
                    neg.push((c[i][kk], -bm.m));
                    // e >= (y - theta'x) - M(1 - c)  and  e >= (theta'x - y) - M(1 - c)
                    model.add_constraint(format!("maep_{i}_{kk}"), pos, Sense::Ge, y[i] - bm.m);
                    model.add_constraint(format!("maen_{i}_{kk}"), neg, Sense::Ge, -y[i] - bm.m);
                }
            }
        }
        LossKind::HingeWw => {
            let reg = match spec.regularization {
                Regularization::L1(s) => s,
                _ => 0.0,
            };
            // theta = tp - tn, both in [0, B]
            let mut tp = vec![vec![vec![0; d + 1]; n_classes]; k];
            let mut tn = tp.clone();
            for kk in 0..k {
                for m in 0..n_classes {
                    for j in 0..=d {
                        tp[kk][m][j] = model.add_var(format!("tp_{kk}_{m}_{j}"), 0.0, b, Integrality::Continuous);
                        tn[kk][m][j] = model.add_var(format!("tn_{kk}_{m}_{j}"), 0.0, b, Integrality::Continuous);
                        if reg != 0.0 {
                            model.set_objective(tp[kk][m][j], reg);
                            model.set_objective(tn[kk][m][j], reg);
                        }
                    }
                }
            }
            let labels = ds.labels().unwrap();
            for i in 0..n {
                let x = ds.row(i);
                let yi = labels[i];
                for kk in 0..k {
                    for m in (0..n_classes).filter(|&m| m != yi) {
                        let xi = model.add_var(format!("xi_{i}_{kk}_{m}"), 0.0, bm.m, Integrality::Continuous);
                        model.set_objective(xi, spec.svm_c);
                        let mut row = vec![(xi, 1.0)];
                        for j in 0..=d {
                            let xj = if j < d { x[j] } else { 1.0 };
                            if xj != 0.0 {
                                row.push((tp[kk][yi][j], xj));
                                row.push((tn[kk][yi][j], -xj));
                                row.push((tp[kk][m][j], -xj));
                                row.push((tn[kk][m][j], xj));
                            }
                        }
                        row.push((c[i][kk], -bm.m));
                        // (theta_y - theta_m)'x + xi + M(1 - c) >= 2
                        model.add_constraint(format!("hinge_{i}_{kk}_{m}"), row, Sense::Ge, WW_MARGIN - bm.m);
                    }
                }
            }
        }
        LossKind::Mse => unreachable!(),
    }

    let ranges = ds.feature_ranges();
    match geometry {
        ClusterType::Arbitrary => {}
        ClusterType::ClosestCenter => {
            let beta: Vec<Vec<usize>> = (0..k)
                .map(|kk| {
                    (0..d)
                        .map(|j| model.add_var(format!("beta_{kk}_{j}"), ranges[j].0, ranges[j].1, Integrality::Continuous))
                        .collect()
                })
                .collect();
            for i in 0..n {
                let x = ds.row(i);
                let dist = model.add_var(format!("dist_{i}"), 0.0, bm.m2, Integrality::Continuous);
                if hyper.lambda != 0.0 {
                    model.set_objective(dist, hyper.lambda);
                }
                for kk in 0..k {
                    let mut drow = vec![(dist, 1.0)];
                    for j in 0..d {
                        let u = model.add_var(format!("u_{i}_{kk}_{j}"), 0.0, ranges[j].1 - ranges[j].0, Integrality::Continuous);
                        model.add_constraint(format!("up_{i}_{kk}_{j}"), vec![(u, 1.0), (beta[kk][j], 1.0)], Sense::Ge, x[j]);
                        model.add_constraint(format!("un_{i}_{kk}_{j}"), vec![(u, 1.0), (beta[kk][j], -1.0)], Sense::Ge, -x[j]);
                        drow.push((u, -1.0));
                    }
                    drow.push((c[i][kk], -bm.m2));
                    // dist_i >= sum_j u_ikj - M2 (1 - c_ik)
                    model.add_constraint(format!("dist_{i}_{kk}"), drow, Sense::Ge, -bm.m2);
                }
            }
        }
        ClusterType::BoundingBox => {
            let eps = hyper.epsilon;
            let mut bmin = vec![vec![0; d]; k];
            let mut bmax = vec![vec![0; d]; k];
            for kk in 0..k {
                for j in 0..d {
                    let (lo, hi) = (ranges[j].0 - eps, ranges[j].1 + eps);
                    bmin[kk][j] = model.add_var(format!("bmin_{kk}_{j}"), lo, hi, Integrality::Continuous);
                    bmax[kk][j] = model.add_var(format!("bmax_{kk}_{j}"), lo, hi, Integrality::Continuous);
                    model.add_constraint(format!("width_{kk}_{j}"), vec![(bmax[kk][j], 1.0), (bmin[kk][j], -1.0)], Sense::Ge, eps);
                }
            }
            for i in 0..n {
                let x = ds.row(i);
                for kk in 0..k {
                    for j in 0..d {
                        // c_ik = 1  =>  bmin_kj <= x_ij <= bmax_kj
                        model.add_constraint(
                            format!("inlo_{i}_{kk}_{j}"),
                            vec![(bmin[kk][j], 1.0), (c[i][kk], bm.m3)],
                            Sense::Le,
                            x[j] + bm.m3,
                        );
                        model.add_constraint(
                            format!("inhi_{i}_{kk}_{j}"),
                            vec![(bmax[kk][j], 1.0), (c[i][kk], -bm.m3)],
                            Sense::Ge,
                            x[j] - bm.m3,
                        );
                    }
                }
            }
            if hyper.strict_boxes {
                let big = bm.m3 + eps;
                for i in 0..n {
                    let x = ds.row(i);
                    for kk in 0..k {
                        let mut cover = vec![(c[i][kk], 1.0)];
                        for j in 0..d {
                            let olo = model.add_binary(format!("olo_{i}_{kk}_{j}"));
                            let ohi = model.add_binary(format!("ohi_{i}_{kk}_{j}"));
                            // olo = 1  =>  x_ij <= bmin_kj - eps
                            model.add_constraint(
                                format!("exlo_{i}_{kk}_{j}"),
                                vec![(bmin[kk][j], -1.0), (olo, big)],
                                Sense::Le,
                                big - eps - x[j],
                            );
                            // ohi = 1  =>  x_ij >= bmax_kj + eps
                            model.add_constraint(
                                format!("exhi_{i}_{kk}_{j}"),
                                vec![(bmax[kk][j], 1.0), (ohi, big)],
                                Sense::Le,
                                big - eps + x[j],
                            );
                            cover.push((olo, 1.0));
                            cover.push((ohi, 1.0));
                        }
                        // a point outside cluster k lies outside box k on some side
                        model.add_constraint(format!("outside_{i}_{kk}"), cover, Sense::Ge, 1.0);
                    }
                }
            }
        }
    }

    model.metadata = Some(ModelMetadata {
        geometry,
        loss: spec.kind,
        k,
        n,
        d,
        n_classes,
        big_m: bm,
        lambda: hyper.lambda,
        theta_bound: b,
        epsilon: hyper.epsilon,
        strict_boxes: hyper.strict_boxes,
    });
    model.validate()?;
    Ok(model)
}

/// Result of evaluating a point against a model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionCheck {
    pub feasible: bool,
    pub max_violation: f64,
    pub objective: f64,
}

/// Absolute tolerance used by [`check_solution`] to call a point feasible.
pub const FEASIBILITY_TOL: f64 = 1e-6;

/// Evaluates bounds, rows and integrality at `x`.
pub fn check_solution(model: &MilpModel, x: &[f64]) -> Result<SolutionCheck> {
    if x.len() != model.num_vars() {
        return Err(Error::Dimension(format!("{} values for {} columns", x.len(), model.num_vars())));
    }
    let mut worst = 0.0_f64;
    for (v, &val) in model.variables.iter().zip(x) {
        worst = worst.max(v.lower - val).max(val - v.upper);
        if v.integrality == Integrality::Binary {
            worst = worst.max((val - val.round()).abs());
        }
    }
    for c in &model.constraints {
        let lhs: f64 = c.coefs.iter().map(|&(j, a)| a * x[j]).sum();
        let viol = match c.sense {
            Sense::Le => lhs - c.rhs,
            Sense::Ge => c.rhs - lhs,
            Sense::Eq => (lhs - c.rhs).abs(),
        };
        worst = worst.max(viol);
    }
    Ok(SolutionCheck {
        feasible: worst <= FEASIBILITY_TOL,
        max_violation: worst,
        objective: model.objective_value(x),
    })
}

/// Builds the feasible integral point that represents `(asg, params)` in a
/// model produced by [`build_milp`].
///
/// Closest-center models read `params.centers` (clamped into the feature
/// range); bounding-box models read `params.boxes`, which must contain
/// every member. Auxiliary columns take their smallest feasible values.
pub fn encode_point(model: &MilpModel, ds: &Dataset, asg: &Assignment, params: &ClusterParams) -> Result<Vec<f64>> {
    let meta = model.metadata.as_ref().ok_or_else(|| Error::Model("model has no metadata".into()))?;
    let (n, d, k) = (meta.n, meta.d, meta.k);
    if asg.n() != n || asg.k() != k || params.k() != k || ds.n() != n {
        return Err(Error::Dimension("assignment, params and model disagree".into()));
    }
    let col = |name: String| model.var(&name).ok_or_else(|| Error::Model(format!("column {name} missing")));
    let mut x = vec![0.0; model.num_vars()];
    for i in 0..n {
        x[col(format!("c_{i}_{}", asg.cluster_of(i)))?] = 1.0;
    }
    match meta.loss {
        LossKind::Mae => {
            for kk in 0..k {
                for j in 0..=d {
                    x[col(format!("theta_{kk}_{j}"))?] = params.weights[kk][j];
                }
            }
            for i in 0..n {
                let kk = asg.cluster_of(i);
                if let Response::Value(y) = ds.response(i) {
                    x[col(format!("e_{i}_{kk}"))?] = (y - crate::cluster::affine(&params.weights[kk], ds.row(i))).abs();
                }
            }
        }
        LossKind::HingeWw => {
            for kk in 0..k {
                for m in 0..meta.n_classes {
                    for j in 0..=d {
                        let w = params.class_weights(kk, m)[j];
                        x[col(format!("tp_{kk}_{m}_{j}"))?] = w.max(0.0);
                        x[col(format!("tn_{kk}_{m}_{j}"))?] = (-w).max(0.0);
                    }
                }
            }
            let labels = ds.labels().ok_or_else(|| Error::Model("hinge model needs class labels".into()))?;
            for i in 0..n {
                let kk = asg.cluster_of(i);
                let yi = labels[i];
                let s_true = crate::cluster::affine(params.class_weights(kk, yi), ds.row(i));
                for m in (0..meta.n_classes).filter(|&m| m != yi) {
                    let s = crate::cluster::affine(params.class_weights(kk, m), ds.row(i));
                    x[col(format!("xi_{i}_{kk}_{m}"))?] = (WW_MARGIN - (s_true - s)).max(0.0);
                }
            }
        }
        LossKind::Mse => unreachable!(),
    }
    match meta.geometry {
        ClusterType::Arbitrary => {}
        ClusterType::ClosestCenter => {
            let centers = params
                .centers
                .as_ref()
                .ok_or_else(|| Error::Model("closest-center point needs centers".into()))?;
            let mut beta = vec![vec![0.0; d]; k];
            for kk in 0..k {
                for j in 0..d {
                    let v = &model.variables[col(format!("beta_{kk}_{j}"))?];
                    beta[kk][j] = centers[kk][j].clamp(v.lower, v.upper);
                    x[col(format!("beta_{kk}_{j}"))?] = beta[kk][j];
                }
            }
            for i in 0..n {
                let row = ds.row(i);
                for kk in 0..k {
                    for j in 0..d {
                        x[col(format!("u_{i}_{kk}_{j}"))?] = (row[j] - beta[kk][j]).abs();
                    }
                }
                let own = asg.cluster_of(i);
                x[col(format!("dist_{i}"))?] = (0..d).map(|j| (row[j] - beta[own][j]).abs()).sum();
            }
        }
        ClusterType::BoundingBox => {
            let boxes = params
                .boxes
                .as_ref()
                .ok_or_else(|| Error::Model("bounding-box point needs boxes".into()))?;
            for kk in 0..k {
                for j in 0..d {
                    let lo_col = col(format!("bmin_{kk}_{j}"))?;
                    let hi_col = col(format!("bmax_{kk}_{j}"))?;
                    let lo = boxes[kk].lower[j].max(model.variables[lo_col].lower);
                    let hi = boxes[kk].upper[j].min(model.variables[hi_col].upper).max(lo + meta.epsilon);
                    x[lo_col] = lo;
                    x[hi_col] = hi;
                }
            }
            if meta.strict_boxes {
                for i in 0..n {
                    let row = ds.row(i);
                    for kk in (0..k).filter(|&kk| kk != asg.cluster_of(i)) {
                        for j in 0..d {
                            let lo = x[col(format!("bmin_{kk}_{j}"))?];
                            let hi = x[col(format!("bmax_{kk}_{j}"))?];
                            if row[j] <= lo - meta.epsilon {
                                x[col(format!("olo_{i}_{kk}_{j}"))?] = 1.0;
                                break;
                            }
                            if row[j] >= hi + meta.epsilon {
                                x[col(format!("ohi_{i}_{kk}_{j}"))?] = 1.0;
                                break;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Dataset {
        Dataset::regression(vec![vec![0.0], vec![1.0]], vec![1.0, -2.0]).unwrap()
    }

    #[test]
    fn arbitrary_mae_counts() {
        let m = build_milp(&tiny(), &LossSpec::mae(), ClusterType::Arbitrary, 2, &MilpHyper::default()).unwrap();
        assert_eq!(m.num_vars(), 12);
        assert_eq!(m.constraints.iter().filter(|c| c.name.starts_with("assign_")).count(), 2);
        assert_eq!(m.constraints.iter().filter(|c| c.name.starts_with("mae")).count(), 8);
        assert_eq!(m.constraints.len(), 10);
    }

    #[test]
    fn every_binary_in_exactly_one_assignment_row() {
        let ds = Dataset::regression(vec![vec![0.0, 1.0], vec![1.0, 0.5], vec![2.0, 2.0]], vec![1.0, 2.0, 3.0]).unwrap();
        for g in ClusterType::ALL {
            let m = build_milp(&ds, &LossSpec::mae(), g, 2, &MilpHyper::default()).unwrap();
            for b in m.binaries() {
                let hits = m
                    .constraints
                    .iter()
                    .filter(|c| c.name.starts_with("assign_") && c.coefs.iter().any(|&(j, _)| j == b))
                    .count();
                assert_eq!(hits, 1);
            }
        }
    }

    #[test]
    fn big_m_formulas() {
        // features in [0,1]^2, |y| <= 10, B = 10
        let ds = Dataset::regression(vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.5, 0.2]], vec![10.0, -3.0, 1.0]).unwrap();
        let bm = compute_big_m(&ds, &LossSpec::mae(), 10.0, 1e-6);
        // |y| + B (||x||_1 + 1) is largest at row 0 (10 + 10) and row 1 (3 + 30)
        assert_eq!(bm.m, 33.0);
        assert_eq!(bm.m2, 2.0);
        assert!((bm.m3 - 1.0).abs() < 1e-5);
        let ds = Dataset::regression(vec![vec![1.0, 1.0], vec![0.0, 0.0]], vec![10.0, 0.0]).unwrap();
        assert_eq!(compute_big_m(&ds, &LossSpec::mae(), 10.0, 1e-6).m, 40.0);
        let dc = Dataset::classification(vec![vec![1.0, 1.0], vec![0.0, 0.0]], vec![0, 1], 2).unwrap();
        assert_eq!(compute_big_m(&dc, &LossSpec::hinge_l1(1.0), 10.0, 1e-6).m, 2.0 + 2.0 * 10.0 * 3.0);
    }

    #[test]
    fn rejects_invalid_combinations() {
        let dc = Dataset::classification(vec![vec![1.0], vec![0.0]], vec![0, 1], 2).unwrap();
        let h = MilpHyper::default();
        assert!(matches!(
            build_milp(&dc, &LossSpec::hinge_l1(1.0), ClusterType::Arbitrary, 2, &h),
            Err(Error::Unsupported(_))
        ));
        assert!(build_milp(&tiny(), &LossSpec::mse(), ClusterType::Arbitrary, 2, &h).is_err());
        assert!(build_milp(&tiny(), &LossSpec::mae(), ClusterType::Arbitrary, 3, &h).is_err());
        let bad = MilpHyper { theta_bound: 0.0, ..h };
        assert!(build_milp(&tiny(), &LossSpec::mae(), ClusterType::Arbitrary, 2, &bad).is_err());
    }

    #[test]
    fn check_solution_reports_violations() {
        let m = build_milp(&tiny(), &LossSpec::mae(), ClusterType::Arbitrary, 2, &MilpHyper::default()).unwrap();
        let zeros = vec![0.0; m.num_vars()];
        let chk = check_solution(&m, &zeros).unwrap();
        assert!(!chk.feasible);
        assert!((chk.max_violation - 1.0).abs() < 1e-12);

        let asg = Assignment::new(vec![0, 1], 2).unwrap();
        let mut params = ClusterParams::zeros(Task::Regression, 1, 2);
        params.weights[0] = vec![0.0, 1.0];
        params.weights[1] = vec![0.0, -2.0];
        let mut x = encode_point(&m, &tiny(), &asg, &params).unwrap();
        let chk = check_solution(&m, &x).unwrap();
        assert!(chk.feasible && chk.objective == 0.0, "{chk:?}");

        let c = m.var("c_0_0").unwrap();
        x[c] = 0.5;
        x[m.var("c_0_1").unwrap()] = 0.5;
        let chk = check_solution(&m, &x).unwrap();
        assert!((chk.max_violation - 0.5).abs() < 1e-12, "{chk:?}");
    }
}
