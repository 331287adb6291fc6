// Compares the OpenMP kernels against their serial reference paths on the
// bundled dataset: batch rollout evaluation, bound sampling, NSGA-III
// offspring evaluation, and one training iteration. Outputs must match
// bitwise; this tool reports wall time and speedup.

#include <chrono>
#include <iostream>
#include <string>

#include "resop/bounds.hpp"
#include "resop/io.hpp"
#include "resop/moea.hpp"
#include "resop/parallel.hpp"
#include "resop/trainer.hpp"

using namespace resop;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

template <class Fn>
void compare(const std::string& name, Fn&& fn) {
  parallel::set_enabled(false);
  auto t0 = Clock::now();
  fn();
  const double serial = seconds_since(t0);
  parallel::set_enabled(true);
  t0 = Clock::now();
  fn();
  const double parallel_time = seconds_since(t0);
  std::cout << name << ": serial " << serial << " s, openmp " << parallel_time << " s, speedup "
            << serial / parallel_time << "x\n";
}

}  // namespace

int main(int argc, char** argv) {
  const std::string dataset = argc > 1 ? argv[1] : "data/desk";
  std::cout << "threads available: " << parallel::max_threads() << "\n";

  const hydro::SystemInstance inst = io::load_instance(dataset, 2592000.0);
  const env::ActionSpace space = env::ActionSpace::create(inst, 51, 51);

  compare("random rollout batch (20k)", [&] {
    std::vector<double> sink(20000);
    parallel::for_each_index(20000, [&](int b) {
      Rng rng(Rng::derive_seed(7, b));
      env::UniformPolicy policy;
      const auto result = env::rollout(inst, space, policy, rng);
      sink[b] = result.schedule.power(0, 0);
    });
  });

  compare("bound sampling (budget 20k)", [&] {
    (void)decomp::estimate_bounds_sampled(inst, space, 20000, 11);
  });

  compare("nsga3 (pop 100, 10 gens)", [&] {
    moea::MoeaConfig config;
    config.population = 100;
    config.generations = 10;
    (void)moea::nsga3_run(inst, config, 5);
  });

  const decomp::ObjectiveBounds bounds = decomp::estimate_bounds_sampled(inst, space, 4000, 11);
  compare("training (two-stage, batch 16, 4 iters)", [&] {
    policy::EncoderConfig encoder;
    encoder.embedding_size = 32;
    encoder.num_heads = 4;
    train::TrainConfig config;
    config.batch_size = 16;
    config.epochs = 1;
    config.iterations_per_epoch = 4;
    config.eval_batch = 4;
    (void)train::train_subproblem(inst, space, {0.5, 0.25, 0.25}, bounds, encoder, config);
  });

  return 0;
}
