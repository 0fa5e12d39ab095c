use criterion::{criterion_group, criterion_main, BatchSize, Criterion, Throughput};
use pal_bench::{corpus_sources, mandelbrot, mandelbrot_source, small_mandelbrot};
use pal_core::il::parse_assembly;
use pal_core::runtime::run_on;
use pal_core::transform::transform;
use pal_core::PlatformInfo;

fn interpreter(c: &mut Criterion) {
    let mut group = c.benchmark_group("mandelbrot_120x80");
    group.sample_size(10);
    let cfg = small_mandelbrot(4);
    group.throughput(Throughput::Elements(cfg.pixel_count() as u64));
    let program = mandelbrot(&cfg);
    let single = PlatformInfo::overridden(1).unwrap();
    group.bench_function("sequential", |b| b.iter(|| run_on(&program, single).unwrap()));
    let host = PlatformInfo::detect();
    let (parallel, _) = transform(&program, host).unwrap();
    group.bench_function("transformed_host_cores", |b| b.iter(|| run_on(&parallel, host).unwrap()));
    group.finish();
}

fn load_time(c: &mut Criterion) {
    let cfg = small_mandelbrot(4);
    let src = mandelbrot_source(&cfg);
    let program = mandelbrot(&cfg);
    let four = PlatformInfo::overridden(4).unwrap();
    c.bench_function("parse_mandelbrot", |b| b.iter(|| parse_assembly(&src).unwrap()));
    c.bench_function("transform_mandelbrot", |b| {
        b.iter_batched(|| program.clone(), |p| transform(&p, four).unwrap(), BatchSize::SmallInput)
    });
    let corpus = corpus_sources(32);
    c.bench_function("parse_corpus_32", |b| {
        b.iter(|| corpus.iter().map(|s| parse_assembly(s).unwrap().methods.len()).sum::<usize>())
    });
}

criterion_group!(benches, interpreter, load_time);
criterion_main!(benches);
