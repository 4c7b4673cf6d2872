//! Per-cluster profiles: size, feature means in input units and weights.

use serde::{Deserialize, Serialize};

use crate::cluster::{Assignment, ClusterParams};
use crate::data::Dataset;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedValue {
    pub name: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub cluster: usize,
    pub size: usize,
    /// Member feature averages in input units.
    pub feature_means: Vec<NamedValue>,
    /// Model weights on the (possibly standardized) features; the last
    /// entry of each block is the intercept.
    pub weights: Vec<NamedValue>,
}

pub fn cluster_summaries(ds: &Dataset, asg: &Assignment, params: &ClusterParams) -> Vec<ClusterSummary> {
    let d = ds.d();
    let mut names: Vec<String> = ds.column_names.clone();
    names.push("intercept".into());
    (0..asg.k())
        .map(|k| {
            let members = asg.members(k);
            let mut means = vec![0.0; d];
            for &i in &members {
                for (m, v) in means.iter_mut().zip(ds.original_row(i)) {
                    *m += v;
                }
            }
            if !members.is_empty() {
                means.iter_mut().for_each(|m| *m /= members.len() as f64);
            }
            let w = &params.weights[k];
            let weights = w
                .iter()
                .enumerate()
                .map(|(j, &value)| {
                    let block = j / (d + 1);
                    let name = if w.len() > d + 1 {
                        format!("class{block}:{}", names[j % (d + 1)])
                    } else {
                        names[j].clone()
                    };
                    NamedValue { name, value }
                })
                .collect();
            ClusterSummary {
                cluster: k,
                size: members.len(),
                feature_means: ds
                    .column_names
                    .iter()
                    .zip(means)
                    .map(|(n, value)| NamedValue { name: n.clone(), value })
                    .collect(),
                weights,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Task;

    #[test]
    fn means_are_in_input_units() {
        let mut ds = Dataset::regression(vec![vec![0.0, 10.0], vec![2.0, 30.0], vec![4.0, 50.0]], vec![1.0, 2.0, 3.0]).unwrap();
        ds.standardize();
        let asg = Assignment::new(vec![0, 0, 1], 2).unwrap();
        let params = ClusterParams::zeros(Task::Regression, 2, 2);
        let s = cluster_summaries(&ds, &asg, &params);
        assert_eq!(s[0].size, 2);
        assert!((s[0].feature_means[0].value - 1.0).abs() < 1e-12);
        assert!((s[0].feature_means[1].value - 20.0).abs() < 1e-12);
        assert_eq!(s[1].weights.last().unwrap().name, "intercept");
    }
}
