#ifndef EDR_RESULT_HPP
#define EDR_RESULT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "edr/model.hpp"

namespace edr {

struct SolveConfig {
  enum class Method { auto_mode, dynamics, subgradient };

  // Stopping threshold on max_i d_i(delta) / C_N.
  Rat tolerance = Rat(mpz_class(1), mpz_class(10000000000));  // 1e-10
  long max_iterations = 1000000;  // best responses
  Method method = Method::auto_mode;
  std::uint64_t seed = 0;
};

struct EquilibriumResult {
  Distribution distribution;
  Decomposition decomposition;
  std::vector<Rat> utilities;  // per agent, profile order
  double nash_welfare_value = 0.0;
  Rat residual;                // max_i d_i(delta) / C_N; exactly 0 for verified exact results
  Mode mode = Mode::exact;
  bool converged = true;
  std::string method;
  long iterations = 0;
  std::vector<std::string> warnings;
};

}  // namespace edr

#endif
