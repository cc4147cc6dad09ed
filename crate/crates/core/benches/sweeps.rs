//! Sequential against rayon-parallel execution of the main sweeps.
//! Without the `parallel` feature both arms run sequentially.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use polyhyp::chainseq::{turan_check, unit_grid};
use polyhyp::families::{CoefficientSequence, PollaczekParams};
use polyhyp::hypergroup::LinearizationTable;
use polyhyp::par::Exec;
use polyhyp::scalar::Scalar;
use polyhyp::spectrum::atom_characters;

const ARMS: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn property_p(c: &mut Criterion) {
    let mut g = c.benchmark_group("property_p_qleg");
    g.sample_size(10);
    for big_n in [12usize, 20] {
        for (name, exec) in ARMS {
            g.bench_with_input(BenchmarkId::new(name, big_n), &big_n, |b, &n| {
                b.iter(|| {
                    // fresh table: the linearization cache would otherwise absorb the work
                    let t = LinearizationTable::from_sequence(CoefficientSequence::little_q_legendre(Scalar::ratio(1, 2)).unwrap());
                    t.property_p_check(n, exec)
                })
            });
        }
    }
    g.finish();
}

fn characters(c: &mut Criterion) {
    let mut g = c.benchmark_group("qleg_atom_characters");
    g.sample_size(10);
    let q = Scalar::ratio(1, 2);
    let cs = CoefficientSequence::little_q_legendre(q.clone()).unwrap();
    for (name, exec) in ARMS {
        g.bench_function(name, |b| b.iter(|| atom_characters(&cs, &q, 40, 30, exec)));
    }
    g.finish();
}

fn turan(c: &mut Criterion) {
    let mut g = c.benchmark_group("pollaczek_turan");
    g.sample_size(10);
    let cs = CoefficientSequence::pollaczek(PollaczekParams::ratios((1, 2), (3, 10), (1, 1)).unwrap()).unwrap();
    let xs = unit_grid(64);
    for (name, exec) in ARMS {
        g.bench_function(name, |b| b.iter(|| turan_check(&cs, &xs, 100, 256, exec)));
    }
    g.finish();
}

criterion_group!(benches, property_p, characters, turan);
criterion_main!(benches);
