//! Metrics, routing of new points, splits, cross-validation and the
//! greedy-versus-exact benchmark.

pub mod benchmark;
pub mod cv;
pub mod metrics;
pub mod predict;
pub mod split;
pub mod summary;

pub use benchmark::{benchmark_csv, benchmark_fig2, write_benchmark_csv, BenchmarkGrid, BenchmarkRow};
pub use cv::{cross_validate, select_best, CvReport, EvalProtocol, FoldResult, KScore, Method, SplitScheme};
pub use metrics::{accuracy, adjusted_rand_index, evaluate, r2_score, rmse, Metric, Predictions};
pub use predict::{predict, predict_row, route, route_all};
pub use split::{k_fold, train_val_test_split, Split};
pub use summary::{cluster_summaries, ClusterSummary, NamedValue};
