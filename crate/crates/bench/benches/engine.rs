use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use ladder_bench::fixture;
use ladder_core::dataset::{generate, GenConfig};
use ladder_core::engine::{derive_estimand, oracle};
use ladder_core::{Assignment, Cbn, Direction, GraphName, NodeSet, QueryInstance, QueryType, Scm};

fn identification(c: &mut Criterion) {
    let mut group = c.benchmark_group("estimand_vs_oracle");
    for (g, q) in [
        (GraphName::Confounding, QueryType::Ate),
        (GraphName::Frontdoor, QueryType::Ate),
        (GraphName::Mediation, QueryType::Nde),
        (GraphName::Diamond, QueryType::CounterfactualProb),
    ] {
        let (spec, params) = fixture(g, 1);
        let cbn = Cbn::new(spec.dag.clone(), params).unwrap();
        let mut inst = QueryInstance::simple(g, q, Direction::Increase);
        if q == QueryType::CounterfactualProb {
            inst.evidence_value = Some(0);
        }
        let est = derive_estimand(&spec, &inst).unwrap();
        let id = format!("{g}/{q}");
        group.bench_with_input(BenchmarkId::new("estimand", &id), &cbn, |b, cbn| b.iter(|| est.evaluate(black_box(cbn))));
        group.bench_with_input(BenchmarkId::new("oracle", &id), &cbn, |b, cbn| b.iter(|| oracle(&spec, black_box(cbn), &inst)));
    }
    group.finish();
}

fn counterfactual(c: &mut Criterion) {
    let (spec, params) = fixture(GraphName::Arrowhead, 2);
    let cbn = Cbn::new(spec.dag.clone(), params).unwrap();
    c.bench_function("scm_build_arrowhead", |b| b.iter(|| Scm::new(black_box(cbn.clone()))));
    let scm = Scm::new(cbn);
    let evidence = Assignment::of(spec.treatment, 0).with(spec.outcome, 1);
    c.bench_function("counterfactual_prob_arrowhead", |b| {
        b.iter(|| scm.counterfactual_prob(evidence, Assignment::of(spec.treatment, 1), Assignment::of(spec.outcome, 1)))
    });
}

fn dseparation(c: &mut Criterion) {
    let (spec, _) = fixture(GraphName::Diamond, 0);
    let dag = spec.dag;
    c.bench_function("d_separated_all_triples_diamond", |b| {
        b.iter(|| {
            let mut n = 0;
            for a in 0..dag.len() {
                for bb in 0..dag.len() {
                    if a == bb {
                        continue;
                    }
                    for s in dag.all().without(a).without(bb).subsets() {
                        n += usize::from(dag.d_separated(NodeSet::single(a), NodeSet::single(bb), s).unwrap());
                    }
                }
            }
            n
        })
    });
}

fn generation(c: &mut Criterion) {
    let mut group = c.benchmark_group("generate");
    group.sample_size(10);
    for size in [100, 1056] {
        group.bench_with_input(BenchmarkId::from_parameter(size), &size, |b, &size| {
            b.iter(|| generate(&GenConfig { size, seed: 42, ..GenConfig::default() }).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, identification, counterfactual, dseparation, generation);
criterion_main!(benches);
