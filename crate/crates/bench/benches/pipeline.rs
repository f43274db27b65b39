use criterion::{criterion_group, criterion_main, Criterion};
use flcsp_core::checker::{Checker, ExploreOptions};
use flcsp_core::corpus::load_case;
use flcsp_core::cspir::{compare_structural, parse_model};
use flcsp_core::frontend::parse_program;
use flcsp_core::translate::translate_source;

fn frontend(c: &mut Criterion) {
    for name in ["centralized", "decentralized"] {
        let case = load_case(name).unwrap();
        c.bench_function(&format!("parse_program/{name}"), |b| {
            b.iter(|| parse_program(std::hint::black_box(case.source)).unwrap())
        });
        c.bench_function(&format!("translate/{name}"), |b| {
            b.iter(|| translate_source(std::hint::black_box(case.source), &case.config).unwrap())
        });
        c.bench_function(&format!("parse_model/{name}"), |b| {
            b.iter(|| parse_model(std::hint::black_box(case.golden)).unwrap())
        });
        let golden = parse_model(case.golden).unwrap();
        let translated = translate_source(case.source, &case.config).unwrap();
        c.bench_function(&format!("compare_structural/{name}"), |b| {
            b.iter(|| assert!(compare_structural(&translated, &golden).equal))
        });
    }
}

fn checker(c: &mut Criterion) {
    let case = load_case("centralized").unwrap();
    let model = parse_model(case.golden).unwrap();
    let checker = Checker::new(&model).unwrap();
    let mut group = c.benchmark_group("checker");
    group.sample_size(10);
    group.bench_function("explore/centralized", |b| {
        b.iter(|| checker.explore(&ExploreOptions::default()).unwrap().num_states())
    });
    group.bench_function("verify/centralized", |b| {
        b.iter(|| checker.verify(&model.assertions, &ExploreOptions::default()).unwrap().states)
    });
    group.finish();
}

criterion_group!(benches, frontend, checker);
criterion_main!(benches);
