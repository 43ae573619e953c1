// Simulate ex1 under Toeplitz correlation, select a Hermite dimension, report MISE.

#include <cstdio>

#include "driftsel/bench.hpp"

int main() {
  using namespace driftsel;
  const ModelSpec model = make_model(ModelId::Ex1);
  const auto R = CorrelationMatrix::toeplitz(100, 0.5);
  const PathEnsemble ens = simulate_ensemble(model, R, 100.0, 0.1, {.seed = 1});

  SelectionOptions opt;
  opt.m_max = default_m_max(ModelId::Ex1, BasisFamily::Hermite);
  const SelectionResult sel = select(ens, BasisSpec::hermite(opt.m_max), opt, model.diffusion);

  for (const auto& c : sel.candidates) {
    std::printf("m=%2d  norm=%.5f  pen=%.5f  crit=%.5f%s\n", c.m, c.norm_sq, c.penalty, c.criterion,
                c.m == sel.m_hat ? "  <-" : "");
  }
  std::printf("m_hat=%d  100*ISE=%.4f\n", sel.m_hat, 100.0 * mise(sel.estimate, model, 500));
}
