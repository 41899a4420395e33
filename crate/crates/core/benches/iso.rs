use std::hint::black_box;

use btt_core::semantics::{FiniteModel, Value};
use btt_core::syntax::Expr;
use btt_core::transport::{id_set_with, Strategy};
use btt_core::typecheck::Context;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

/// `Z_n` under addition as a magma on atoms named by `prefix`.
fn cyclic(prefix: &str, n: usize, shift: usize) -> Value {
    let atom = |i: usize| Value::atom(format!("{prefix}{}", (i + shift) % n));
    let carrier = Value::set((0..n).map(atom));
    let op = Value::fun((0..n).flat_map(|i| (0..n).map(move |j| (Value::pair(atom(i), atom(j)), atom(i + j)))));
    Value::pair(carrier, op)
}

fn magma() -> Expr {
    let a = Expr::var("a");
    Expr::sigma("a", Expr::set(), Expr::arrow(Expr::product(a.clone(), a.clone()), a))
}

fn strategies() -> Vec<(&'static str, Strategy)> {
    #[cfg_attr(not(feature = "parallel"), allow(unused_mut))]
    let mut out = vec![("sequential", Strategy::Sequential)];
    #[cfg(feature = "parallel")]
    out.push(("parallel", Strategy::Parallel));
    out
}

fn iso(c: &mut Criterion) {
    let ctx = Context::new();
    let sigma = magma();
    let model = FiniteModel::new().with_budget(1_000_000);
    let mut group = c.benchmark_group("id_set_cyclic_magma");
    group.sample_size(10);
    for n in [4, 5, 6] {
        let (a, b) = (cyclic("a", n, 0), cyclic("b", n, 1));
        for (name, strategy) in strategies() {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |bench, _| {
                bench.iter(|| id_set_with(&ctx, &sigma, black_box(&a), black_box(&b), &model, strategy).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, iso);
criterion_main!(benches);
