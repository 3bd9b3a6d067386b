//! Parallel against sequential execution on the sweeps the test suites run.
//!
//!     cargo bench -p derlab-core --bench sweeps

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use derlab_core::algebra::standard::dual_numbers;
use derlab_core::category::shapes;
use derlab_core::diagram::{diagrams_with_objects, ext1_dim, Diagram};
use derlab_core::gorenstein::is_gproj;
use derlab_core::homotopy::loop_via_square;
use derlab_core::modules::{enumerate_modules, Module, SearchBudget};
use derlab_core::par::{self, Exec};

fn cospan_diagrams() -> Vec<Diagram> {
    let alg = dual_numbers(2);
    let reps = [Module::trivial(&alg, 1).unwrap(), Module::regular(&alg), Module::trivial(&alg, 2).unwrap()];
    let cospan = shapes::cospan();
    let mut out = Vec::new();
    for a in &reps {
        for b in &reps {
            for c in &reps {
                out.extend(diagrams_with_objects(&cospan, &alg, &[a.clone(), b.clone(), c.clone()]));
            }
        }
    }
    out
}

fn recognition(c: &mut Criterion) {
    let ds = cospan_diagrams();
    let lam = Module::regular(&dual_numbers(2));
    let mut g = c.benchmark_group("recognition");
    g.sample_size(10);
    for exec in [Exec::Parallel, Exec::Sequential] {
        g.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            par::set_exec(exec);
            b.iter(|| {
                par::map(&ds, |x| {
                    let oracle = (0..3).all(|j| ext1_dim(x, &Diagram::stalk(x.shape(), j, &lam)).unwrap() == 0);
                    oracle == is_gproj(x)
                })
            })
        });
    }
    g.finish();
}

fn stability(c: &mut Criterion) {
    let alg = dual_numbers(2);
    let mods: Vec<Module> = (1..=3).flat_map(|d| enumerate_modules(&alg, d)).collect();
    let mut g = c.benchmark_group("loop_via_square");
    g.sample_size(10);
    for exec in [Exec::Parallel, Exec::Sequential] {
        g.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            par::set_exec(exec);
            b.iter(|| par::map(&mods, |m| loop_via_square(m, SearchBudget::default()).unwrap().verdict.is_true()))
        });
    }
    g.finish();
    par::set_exec(Exec::Parallel);
}

criterion_group!(benches, recognition, stability);
criterion_main!(benches);
