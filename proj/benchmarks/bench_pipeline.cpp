#include <benchmark/benchmark.h>

#include "idashaper/cases.hpp"
#include "idashaper/sim.hpp"

using namespace idashaper;

namespace {

const Bundle& vtol() {
    static const Bundle bundle = demo_bundle("vtol");
    return bundle;
}

const Bundle& pendubot() {
    static const Bundle bundle = demo_bundle("pendubot");
    return bundle;
}

const Bundle& spider() {
    static const Bundle bundle = demo_bundle("spider");
    return bundle;
}

void BM_DerivedKinetics(benchmark::State& state) {
    const SystemModel sys = spider_model(SpiderParams{});
    VectorXd q(3);
    q << 0.2, 2.0, 0.4;
    for (auto _ : state) {
        benchmark::DoNotOptimize(derived_kinetics(sys, q));
    }
}
BENCHMARK(BM_DerivedKinetics);

void BM_AssemblePsi(benchmark::State& state) {
    const SystemModel sys = spider_model(SpiderParams{});
    const StructuredMdInv md = spider_md(SpiderParams{});
    VectorXd q(3);
    q << 0.2, 2.0, 0.4;
    for (auto _ : state) {
        benchmark::DoNotOptimize(assemble_psi(md, sys, q));
    }
}
BENCHMARK(BM_AssemblePsi);

void BM_SolveAlphas(benchmark::State& state) {
    const Bundle& b = spider();
    VectorXd q(3);
    q << 0.2, 2.0, 0.4;
    for (auto _ : state) {
        benchmark::DoNotOptimize(b.alphas->solve_at(q));
    }
}
BENCHMARK(BM_SolveAlphas);

void BM_ControlLaw(benchmark::State& state) {
    const Bundle& b = vtol();
    State s;
    s.q = (VectorXd(3) << 2.0, -1.0, 0.4).finished();
    s.p = (VectorXd(3) << 0.3, -0.2, 0.1).finished();
    for (auto _ : state) {
        benchmark::DoNotOptimize(control_law(b.sys, b.de, b.j2, b.kv, s));
    }
}
BENCHMARK(BM_ControlLaw);

void BM_ControlLawPendubot(benchmark::State& state) {
    const Bundle& b = pendubot();
    State s;
    s.q = (VectorXd(2) << 0.3, -0.5).finished();
    s.p = (VectorXd(2) << 0.2, 0.1).finished();
    for (auto _ : state) {
        benchmark::DoNotOptimize(control_law(b.sys, b.de, b.j2, b.kv, s));
    }
}
BENCHMARK(BM_ControlLawPendubot);

void BM_IntegrateVtolSecond(benchmark::State& state) {
    const Bundle& b = vtol();
    State s0;
    s0.q = (VectorXd(3) << 1.0, -0.5, 0.3).finished();
    s0.p = VectorXd::Zero(3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            integrate(b.sys, b.de, b.j2, b.kv, s0, 1.0, 1e-3));
    }
}
BENCHMARK(BM_IntegrateVtolSecond)->Unit(benchmark::kMillisecond);

void BM_MatchCertificateSample(benchmark::State& state) {
    const Bundle& b = spider();
    const auto states = sample_states(b, 1, 11);
    const ClosedLoopForm cl = b.closed_loop();
    for (auto _ : state) {
        benchmark::DoNotOptimize(match_certificate(b.sys, cl, states));
    }
}
BENCHMARK(BM_MatchCertificateSample);

}  // namespace

BENCHMARK_MAIN();
