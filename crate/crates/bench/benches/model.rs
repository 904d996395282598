use criterion::{black_box, criterion_group, criterion_main, Criterion};
use hpv_bench::{capped_bounds, constant_rates};
use hpv_core::cea::rank;
use hpv_core::integrator::integrate_forward;
use hpv_core::model::rhs_full;
use hpv_core::scenario::{run_selected, Selection};
use hpv_core::*;

fn kernels(c: &mut Criterion) {
    let p = ModelParameters::default();
    let sim = SimulationConfig::default();
    let x = sim.initial_state;
    let controls = ControlVector::new(0.1, 0.07, 0.05, 0.03, 0.1);

    c.bench_function("rhs_full", |b| b.iter(|| rhs_full(black_box(&x), black_box(&controls), &p)));
    c.bench_function("effective_r", |b| b.iter(|| effective_r(black_box(&controls), &p)));
    c.bench_function("simulate_100y", |b| b.iter(|| integrate_forward(&p, black_box(&controls), &sim).unwrap()));

    let records: Vec<_> = constant_rates()
        .iter()
        .enumerate()
        .map(|(i, (id, _))| OutcomeRecord::new(id.to_string(), 50.0 + 3.0 * i as f64, 31.0 + (i as f64 * 0.37) % 1.7))
        .collect();
    c.bench_function("rank_8", |b| b.iter(|| rank(black_box(&records)).unwrap()));
}

fn solvers(c: &mut Criterion) {
    let mut group = c.benchmark_group("solvers");
    group.sample_size(10);
    let p = ModelParameters::default();
    let w = CostWeights::default();
    let sim = SimulationConfig::default();
    let cfg = FbsmConfig { bounds: capped_bounds(StrategyId::S4), ..Default::default() };
    group.bench_function("fbsm_s4", |b| b.iter(|| fbsm_solve(StrategyId::S4.mask(), &p, &w, &sim, &cfg).unwrap()));

    let table3 = ScenarioConfig::load("table3").unwrap();
    group.bench_function("table3_constant", |b| b.iter(|| run_selected(&table3, Selection { constant: true, optimal: false }).unwrap()));
    group.finish();
}

criterion_group!(benches, kernels, solvers);
criterion_main!(benches);
