use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use bilateral::compare::{effort_curve, linspace, EffortSettings};
use bilateral::domain::{CoefficientProfile, HourglassGrid, IntervalGrid};
use bilateral::kernel_hyp::{hyp_kernel_series, HypPlant, SeriesSettings};
use bilateral::kernel_rd::{rd_kernel_goursat, GoursatSettings, RdPlant};
use bilateral::par::Execution;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn rd_goursat(c: &mut Criterion) {
    let plant = RdPlant::new(1.0, CoefficientProfile::expression("5 + 3*sin(2*x)").unwrap(), 1.0).unwrap();
    let mut group = c.benchmark_group("rd_goursat");
    group.sample_size(10);
    for n in [101, 201] {
        let grid = HourglassGrid::new(IntervalGrid::new(1.0, n).unwrap());
        for (name, execution) in MODES {
            let settings = GoursatSettings { execution, ..Default::default() };
            group.bench_with_input(BenchmarkId::new(name, n), &grid, |b, g| {
                b.iter(|| rd_kernel_goursat(black_box(&plant), g, &settings).unwrap())
            });
        }
    }
    group.finish();
}

fn hyp_series(c: &mut Criterion) {
    let coeffs = ["0.3*sin(x)", "1 + 0.5*x", "0.8*cos(2*x)", "-0.2 + 0.1*x"]
        .map(|s| CoefficientProfile::expression(s).unwrap());
    let plant = HypPlant::new(1.0, coeffs, 1.0).unwrap();
    let mut group = c.benchmark_group("hyp_series");
    group.sample_size(10);
    for n in [101, 201] {
        let grid = HourglassGrid::new(IntervalGrid::new(1.0, n).unwrap());
        for (name, execution) in MODES {
            let settings = SeriesSettings { execution, ..Default::default() };
            group.bench_with_input(BenchmarkId::new(name, n), &grid, |b, g| {
                b.iter(|| hyp_kernel_series(black_box(&plant), g, &settings).unwrap())
            });
        }
    }
    group.finish();
}

fn effort(c: &mut Criterion) {
    let deltas = linspace(0.5, 10.0, 64);
    let mut group = c.benchmark_group("effort_curve");
    for (name, execution) in MODES {
        let settings = EffortSettings { execution, ..Default::default() };
        group.bench_function(name, |b| b.iter(|| effort_curve(black_box(&deltas), &settings).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, rd_goursat, hyp_series, effort);
criterion_main!(benches);
