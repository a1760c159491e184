#include <benchmark/benchmark.h>

#include "evb/adadelta.hpp"
#include "evb/bessel.hpp"
#include "evb/eis.hpp"
#include "evb/registry.hpp"
#include "evb/sv_model.hpp"
#include "evb/vb.hpp"

namespace {

struct SvFixture {
  std::unique_ptr<evb::StateSpaceModel> model = evb::make_model("sv");
  evb::Vector theta{{-1.3, 0.95, 0.3}};
  evb::Simulation sim;
  explicit SvFixture(int T) : sim(evb::simulate(*model, theta, T, 11)) {}
};

void BM_StateApproxSample(benchmark::State& state) {
  SvFixture f(static_cast<int>(state.range(0)));
  const auto a = evb::calibrate(*f.model, f.sim.data, f.theta, evb::KernelParams::zeros(f.sim.data.T(), 1), 6, 3);
  evb::StateApprox approx(f.model->transition(f.theta), a);
  evb::Rng rng = evb::make_rng(5);
  evb::StateMatrix x(f.sim.data.T(), 1);
  for (auto _ : state) benchmark::DoNotOptimize(approx.sample(rng, x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_StateApproxSample)->Arg(500)->Arg(4000);

void BM_Calibrate(benchmark::State& state) {
  SvFixture f(static_cast<int>(state.range(0)));
  const auto a0 = evb::KernelParams::zeros(f.sim.data.T(), 1);
  for (auto _ : state) benchmark::DoNotOptimize(evb::calibrate(*f.model, f.sim.data, f.theta, a0, 6, 3));
}
BENCHMARK(BM_Calibrate)->Arg(500)->Arg(4000);

void BM_ElboGradient(benchmark::State& state) {
  SvFixture f(static_cast<int>(state.range(0)));
  const auto q = evb::VariationalParams::init(f.model->transform(f.theta), 1);
  const evb::Vector z = evb::Vector::Constant(1, 0.3);
  const evb::Vector eps = evb::Vector::Constant(3, -0.2);
  for (auto _ : state)
    benchmark::DoNotOptimize(evb::elbo_gradient_estimate(*f.model, f.sim.data, q, z, eps, f.sim.states));
}
BENCHMARK(BM_ElboGradient)->Arg(500)->Arg(4000);

void BM_SkellamJointGrad(benchmark::State& state) {
  evb::ModelOptions opts;
  auto sim_model = evb::make_model("skellam", opts);
  // kappa, xbar, vech(L), omega, beta
  const evb::Vector theta{{0.3, 0.2, 0.2, 0.1, 3.0, 0.5, 2.5, 0.9, 0.85, 0.1, -0.1, 0.05, 0.0, 0.1, -0.05}};
  const auto sim = evb::simulate(*sim_model, theta, 500, 4);
  auto model = evb::make_model("skellam", opts, &sim.data);
  const evb::Vector u = model->transform(theta);
  for (auto _ : state) benchmark::DoNotOptimize(model->log_joint_grad(u, sim.states, sim.data));
}
BENCHMARK(BM_SkellamJointGrad);

void BM_LogBessel(benchmark::State& state) {
  const double z = static_cast<double>(state.range(0)) / 10.0;
  for (auto _ : state) {
    for (int nu = 0; nu < 20; ++nu) benchmark::DoNotOptimize(evb::log_bessel_i_scaled(nu, z));
  }
}
BENCHMARK(BM_LogBessel)->Arg(5)->Arg(100)->Arg(1000);

void BM_Adadelta(benchmark::State& state) {
  const auto n = state.range(0);
  evb::AdadeltaState s(n);
  evb::Vector lambda = evb::Vector::Zero(n);
  const evb::Vector g = evb::Vector::LinSpaced(n, -1.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(evb::adadelta_step(s, lambda, g));
}
BENCHMARK(BM_Adadelta)->Arg(9)->Arg(100);

}  // namespace

BENCHMARK_MAIN();
