#ifndef EDR_TEST_HELPERS_HPP
#define EDR_TEST_HELPERS_HPP

#include <string>
#include <vector>

#include "edr/model.hpp"

namespace edr::testing {

inline std::string fixture_path(const std::string& name) {
  return std::string(EDR_FIXTURE_DIR) + "/" + name;
}

// Two donors, four charities; the introduction's running example.
inline Profile example1() {
  return Profile({"A", "B", "C", "D"},
                 {AgentSpec{"donor1", Rat(900), {Rat(1), Rat(1), Rat(1), Rat(0)}},
                  AgentSpec{"donor2", Rat(100), {Rat(0), Rat(0), Rat(1), Rat(1)}}});
}

// Ten donors valuing a common charity at 2 and a personal one at 1.
inline Profile example2() {
  std::vector<std::string> charities{"A"};
  for (int i = 1; i <= 10; ++i) charities.push_back("B" + std::to_string(i));
  std::vector<AgentSpec> agents;
  for (int i = 1; i <= 10; ++i) {
    AgentSpec a;
    a.name = "donor" + std::to_string(i);
    a.contribution = 30;
    a.values.assign(11, Rat(0));
    a.values[0] = 2;
    a.values[i] = 1;
    agents.push_back(std::move(a));
  }
  return Profile(std::move(charities), std::move(agents));
}

// General weights (1,2,0) and (0,1,1), contributions 30/30.
inline Profile example62() {
  return Profile({"x", "y", "z"},
                 {AgentSpec{"agent1", Rat(30), {Rat(1), Rat(2), Rat(0)}},
                  AgentSpec{"agent2", Rat(30), {Rat(0), Rat(1), Rat(1)}}});
}

// Two agents sharing the middle charity, contributions 6/6.
inline Profile remark_cd() {
  return Profile({"a", "b", "c"},
                 {AgentSpec{"agent1", Rat(6), {Rat(1), Rat(1), Rat(0)}},
                  AgentSpec{"agent2", Rat(6), {Rat(0), Rat(1), Rat(1)}}});
}

// Same approval pattern with unit contributions.
inline Profile footnote_eff() {
  return Profile({"a", "b", "c"},
                 {AgentSpec{"agent1", Rat(1), {Rat(1), Rat(1), Rat(0)}},
                  AgentSpec{"agent2", Rat(1), {Rat(0), Rat(1), Rat(1)}}});
}

// Approvals {a} and {a,b} with contributions 2/1.
inline Profile appendix_b() {
  return Profile({"a", "b"}, {AgentSpec{"agent1", Rat(2), {Rat(1), Rat(0)}},
                              AgentSpec{"agent2", Rat(1), {Rat(1), Rat(1)}}});
}

inline Distribution dist(std::vector<Rat> amounts) {
  return make_distribution(std::move(amounts));
}

}  // namespace edr::testing

#endif
