#include "pdgsem/fixtures.hpp"

namespace pdgsem {

const std::map<std::string, std::string>& fixture_sources() {
  static const std::map<std::string, std::string> catalog = {
      {"straight", R"(node 1: x := 1
node 2: y := x + 1
node 3: ret y
edge 1 -> 2
edge 2 -> 3
)"},
      {"diamond", R"(node 1: if c
node 2: x := 1
node 3: x := 2
node 4: y := x
node 5: ret y
edge 1 -T-> 2
edge 1 -F-> 3
edge 2 -> 4
edge 3 -> 4
edge 4 -> 5
)"},
      // Do-while summation: the body runs once before the condition.
      {"while", R"(node 1: s := 0
node 2: s := s + i
node 3: i := i - 1
node 4: if i > 0
node 5: ret s
edge 1 -> 2
edge 2 -> 3
edge 3 -> 4
edge 4 -T-> 2
edge 4 -F-> 5
)"},
      // One cyclic region with two entries (0 branches into its middle) and
      // two exits; both if-nodes 3 and 6 can leave the loop.
      {"two_exit_loop", R"(node 0: if c
node 1: x := x - 1
node 2: y := y + x
node 3: if x > 0
node 4: z := z - 1
node 5: y := y + z
node 6: if z > 0
node 7: ret y
edge 0 -T-> 1
edge 0 -F-> 4
edge 1 -> 2
edge 2 -> 3
edge 3 -T-> 4
edge 3 -F-> 7
edge 4 -> 5
edge 5 -> 6
edge 6 -T-> 1
edge 6 -F-> 7
)"},
      // Inner counter loop nested in an outer counter loop.
      {"nested_loops", R"(node 0: s := 0
node 1: x := x - 1
node 2: y := y - 1
node 3: s := s + 1
node 4: if y > 0
node 5: if x > 0
node 6: ret s
edge 0 -> 1
edge 1 -> 2
edge 2 -> 3
edge 3 -> 4
edge 4 -T-> 2
edge 4 -F-> 5
edge 5 -T-> 1
edge 5 -F-> 6
)"},
      // A back edge from the bottom if re-enters one arm of the top branch.
      {"branch_backedge", R"(node 1: if a
node 2: x := 1
node 3: x := 2
node 4: s := s + x
node 5: if s < 3
node 6: ret s
edge 1 -T-> 2
edge 1 -F-> 3
edge 2 -> 4
edge 3 -> 4
edge 4 -> 5
edge 5 -T-> 2
edge 5 -F-> 6
)"},
      {"sum3", R"(node 1: s := 0
node 2: i := 1
node 3: if i < 4
node 4: s := s + i
node 5: i := i + 1
node 6: ret s
edge 1 -> 2
edge 2 -> 3
edge 3 -T-> 4
edge 3 -F-> 6
edge 4 -> 5
edge 5 -> 3
)"},
      // Loop-carried producer/consumer pair probing scheduler freedom.
      {"stuck_probe", R"(node 1: c := 3
node 2: a := b
node 3: b := a + 1
node 4: c := c - 1
node 5: if c > 0
node 6: ret b
edge 1 -> 2
edge 2 -> 3
edge 3 -> 4
edge 4 -> 5
edge 5 -T-> 2
edge 5 -F-> 6
)"},
      {"loop_forever", R"(node 1: x := 0
node 2: x := x + 1
node 3: if x > 0
node 4: ret x
edge 1 -> 2
edge 2 -> 3
edge 3 -T-> 2
edge 3 -F-> 4
)"},
  };
  return catalog;
}

Cfg fixture(const std::string& name) {
  return parse_cfg(fixture_sources().at(name));
}

}  // namespace pdgsem
