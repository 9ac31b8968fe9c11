use criterion::{black_box, criterion_group, criterion_main, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qdesign_core::data::Q3_HALVING;
use qdesign_core::field::Field;
use qdesign_core::gaussian_binomial;
use qdesign_core::grassmann::visit_grassmannian;
use qdesign_core::joins::{join_size, lambda_of_join, JoinSpec};
use qdesign_core::km::orbits;
use qdesign_core::subspace::{MatGf, Subspace};

fn random_matrix(rng: &mut ChaCha8Rng, q: u32, rows: usize, cols: usize) -> MatGf {
    let mut m = MatGf::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m.set(i, j, rng.gen_range(0..q) as u8);
        }
    }
    m
}

fn bench_rref(c: &mut Criterion) {
    let f5 = Field::gf(5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mats: Vec<MatGf> = (0..256).map(|_| random_matrix(&mut rng, 5, 3, 6)).collect();
    let mut i = 0;
    c.bench_function("rref 3x6 GF(5)", |b| {
        b.iter(|| {
            let mut m = mats[i & 255].clone();
            i += 1;
            black_box(m.rref(&f5));
        })
    });
}

fn bench_gaussian_binomial(c: &mut Criterion) {
    c.bench_function("gaussian_binomial(14,7,5)", |b| {
        b.iter(|| black_box(gaussian_binomial(black_box(14), black_box(7), black_box(5))))
    });
}

fn bench_enumeration(c: &mut Criterion) {
    let f2 = Field::gf(2).unwrap();
    c.bench_function("enumerate [6,3]_2 (1395 subspaces)", |b| {
        b.iter(|| {
            let mut n = 0u64;
            visit_grassmannian(&f2, 6, 3, |_, _| n += 1);
            black_box(n)
        })
    });
}

fn bench_orbit_step(c: &mut Criterion) {
    let field = Q3_HALVING.field();
    let singer = Q3_HALVING.singer();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let subs: Vec<Subspace> = (0..256)
        .map(|_| loop {
            let m = random_matrix(&mut rng, 3, 3, 6);
            let s = Subspace::canonicalize(&field, &m);
            if s.dim() == 3 {
                break s;
            }
        })
        .collect();
    let mut i = 0;
    c.bench_function("orbit step: apply + canonicalize (3x6 GF(3))", |b| {
        b.iter(|| {
            let s = &subs[i & 255];
            i += 1;
            black_box(s.apply(&singer))
        })
    });
}

fn bench_lambda_of_join(c: &mut Criterion) {
    let f3 = Field::gf(3).unwrap();
    let v = 6;
    let spec = JoinSpec::ordinary(3, 1, 2).unwrap();
    let u = Subspace::chain_member(&f3, v, 3);
    let k1 = Subspace::chain_member(&f3, 3, 1).embed_last(v);
    let a2 = Subspace::canonicalize(&f3, &MatGf::from_rows(&[&[1, 0, 0], &[0, 1, 0]]));
    let k2 = a2.lift_preimage(3);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let ts: Vec<Subspace> = (0..256)
        .map(|_| {
            let m = random_matrix(&mut rng, 3, 2, 6);
            Subspace::canonicalize(&f3, &m)
        })
        .collect();
    let mut i = 0;
    assert_eq!(join_size(&spec, 3), 81u32.into());
    c.bench_function("lambda_of_join closed form", |b| {
        b.iter(|| {
            let t = &ts[i & 255];
            i += 1;
            black_box(lambda_of_join(t, &k1, &k2, &u).unwrap())
        })
    });
}

fn bench_q3_orbits(c: &mut Criterion) {
    let group = Q3_HALVING.group().unwrap();
    let mut g = c.benchmark_group("orbits");
    g.sample_size(10);
    g.bench_function("q=3 orbits on [6,3]_3 (33880 subspaces)", |b| {
        b.iter(|| black_box(orbits(&group, 3).orbit_count()))
    });
    g.finish();
}

criterion_group!(
    benches,
    bench_rref,
    bench_gaussian_binomial,
    bench_enumeration,
    bench_orbit_step,
    bench_lambda_of_join,
    bench_q3_orbits
);
criterion_main!(benches);
