use criterion::{black_box, criterion_group, criterion_main, Criterion};
use predclust::milp::{build_milp, MilpHyper};
use predclust::solve::{solve_lp, solve_milp, SolveConfig};
use predclust::synth::{gen_regression, SynthSpec};
use predclust::{fit, ClusterType, GreedyConfig, LossSpec};

fn greedy_10k(c: &mut Criterion) {
    let data = gen_regression(&SynthSpec {
        n: 10_000,
        k_true: 3,
        ..SynthSpec::default()
    })
    .unwrap();
    let mut group = c.benchmark_group("greedy");
    group.sample_size(10);
    for g in ClusterType::ALL {
        let cfg = GreedyConfig {
            k: 3,
            cluster_type: g,
            restarts: 1,
            workers: 1,
            ..GreedyConfig::default()
        };
        group.bench_function(format!("n10000_{}", g.short_name()), |b| {
            b.iter(|| fit(black_box(&data.dataset), &LossSpec::mse(), &cfg).unwrap())
        });
    }
    group.finish();
}

fn lp_relaxation(c: &mut Criterion) {
    let data = gen_regression(&SynthSpec {
        n: 40,
        k_true: 2,
        ..SynthSpec::default()
    })
    .unwrap();
    let model = build_milp(&data.dataset, &LossSpec::mae(), ClusterType::ClosestCenter, 2, &MilpHyper::default()).unwrap();
    let mut relaxed = model.clone();
    for v in relaxed.variables.iter_mut() {
        v.integrality = predclust::milp::Integrality::Continuous;
    }
    c.bench_function("lp/cc_relaxation_n40", |b| b.iter(|| solve_lp(black_box(&relaxed))));
}

fn small_milp(c: &mut Criterion) {
    let data = gen_regression(&SynthSpec {
        n: 12,
        k_true: 2,
        ..SynthSpec::default()
    })
    .unwrap();
    let model = build_milp(&data.dataset, &LossSpec::mae(), ClusterType::Arbitrary, 2, &MilpHyper::default()).unwrap();
    let cfg = SolveConfig {
        gap_threshold: 0.0,
        time_limit: 60.0,
        ..SolveConfig::default()
    };
    let mut group = c.benchmark_group("milp");
    group.sample_size(10);
    group.bench_function("arbitrary_mae_n12", |b| b.iter(|| solve_milp(black_box(&model), &cfg).unwrap()));
    group.finish();
}

criterion_group!(benches, greedy_10k, lp_relaxation, small_milp);
criterion_main!(benches);
