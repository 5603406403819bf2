#include <benchmark/benchmark.h>

#include <numbers>

#include "qwg/fem.hpp"
#include "qwg/floquet.hpp"
#include "qwg/reduced_model.hpp"
#include "qwg/scattering.hpp"

using namespace qwg;

namespace {

const GeometryTee kTee{1.6, 2.5, 2.0, true};

void BM_TeeMesh(benchmark::State& state) {
    const double h = 1.0 / static_cast<double>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(build_tee_mesh(kTee, h, 2));
}
BENCHMARK(BM_TeeMesh)->Arg(10)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_Assemble(benchmark::State& state) {
    const auto mesh = build_tee_mesh(kTee, 1.0 / static_cast<double>(state.range(0)), 2);
    for (auto _ : state) benchmark::DoNotOptimize(assemble(mesh));
    state.counters["nodes"] = static_cast<double>(mesh.num_nodes());
}
BENCHMARK(BM_Assemble)->Arg(10)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_ScatteringSolve(benchmark::State& state) {
    const MeshParams mp{1.0 / static_cast<double>(state.range(0)), 2};
    for (auto _ : state) benchmark::DoNotOptimize(threshold_scattering_matrix(kTee, mp));
}
BENCHMARK(BM_ScatteringSolve)->Arg(10)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_CellEigensolve(benchmark::State& state) {
    const auto mesh = build_cell_mesh(kTee, 0.1, 0.1, 2);
    const auto ops = assemble(mesh);
    const auto q = apply_quasi_periodic(ops, mesh, 1.0);
    EigenOptions o;
    o.dense_limit = 0;
    for (auto _ : state) benchmark::DoNotOptimize(smallest_eigenpairs(q.K, q.M, static_cast<int>(state.range(0)), o));
    state.counters["dofs"] = static_cast<double>(q.K.rows());
}
BENCHMARK(BM_CellEigensolve)->Arg(2)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_ModelBands(benchmark::State& state) {
    const auto p = ModelParams::from_sin2theta(0.7, 2.0, 3.0);
    for (auto _ : state) benchmark::DoNotOptimize(band_intervals(static_cast<int>(state.range(0)), p));
}
BENCHMARK(BM_ModelBands)->Arg(4)->Arg(16);

void BM_ModelDispersionCurve(benchmark::State& state) {
    const auto p = ModelParams::from_sin2theta(0.7, 2.0, -5.0);
    for (auto _ : state)
        for (int j = 0; j <= 64; ++j) benchmark::DoNotOptimize(solve_nu(2, 2 * std::numbers::pi * j / 64, p));
}
BENCHMARK(BM_ModelDispersionCurve);

} // namespace

BENCHMARK_MAIN();
