#include "doctest.h"
#include "pdgsem/fixtures.hpp"

using namespace pdgsem;

TEST_CASE("expression evaluation") {
  auto env = [](const std::string& name) -> Value {
    if (name == "x") return Value::integer(3);
    if (name == "b") return Value::truth(true);
    throw EvalError("unbound variable '" + name + "'");
  };

  auto eval = [&](const std::string& text) {
    Cfg cfg = parse_cfg("node 1: y := " + text + "\nnode 2: ret y\nedge 1 -> 2\n");
    return eval_expr(*cfg.nodes.at(1).expr, env);
  };

  CHECK(eval("x + 1") == Value::integer(4));
  CHECK(eval("x * x - 2") == Value::integer(7));
  CHECK(eval("2 + 3 * x") == Value::integer(11));
  CHECK(eval("(2 + 3) * x") == Value::integer(15));
  CHECK(eval("x - 1 - 1") == Value::integer(1));
  CHECK(eval("x < 4") == Value::truth(true));
  CHECK(eval("x == 3") == Value::truth(true));
  CHECK(eval("x != 3") == Value::truth(false));
  CHECK(eval("T") == Value::truth(true));
  CHECK(eval("b == T") == Value::truth(true));
  CHECK(eval("0 - -1") == Value::integer(1));

  CHECK_THROWS_AS(eval("b + 1"), EvalError);       // arithmetic on truth
  CHECK_THROWS_AS(eval("b < 1"), EvalError);       // ordered cmp on truth
  CHECK_THROWS_AS(eval("b == 1"), EvalError);      // mixed equality
  CHECK_THROWS_AS(eval("y + 1"), EvalError);       // unbound

  // Signed overflow is a runtime error, not wraparound.
  auto big = [&](const std::string& name) -> Value {
    (void)name;
    return Value::integer(INT64_MAX);
  };
  Cfg cfg = parse_cfg("node 1: y := v + 1\nnode 2: ret y\nedge 1 -> 2\n");
  CHECK_THROWS_AS(eval_expr(*cfg.nodes.at(1).expr, big), EvalError);
}

TEST_CASE("parse/print round trip is canonical") {
  for (const auto& [name, src] : fixture_sources()) {
    CAPTURE(name);
    Cfg cfg = parse_cfg(src);
    std::string printed = print_cfg(cfg);
    Cfg again = parse_cfg(printed);
    CHECK(print_cfg(again) == printed);
    CHECK(again.nodes.size() == cfg.nodes.size());
    CHECK(again.edges == cfg.edges);
    CHECK(again.start == cfg.start);
  }
}

TEST_CASE("parser diagnostics") {
  CHECK_THROWS_AS(parse_cfg("node 1: ret x\nnode 1: ret x\n"), ParseError);
  CHECK_THROWS_AS(parse_cfg("node 1: ret x\nedge 1 -> 2\n"), ParseError);
  CHECK_THROWS_AS(parse_cfg("node 1: x := 1 y\nnode 2: ret x\nedge 1 -> 2\n"),
                  ParseError);
  CHECK_THROWS_AS(parse_cfg("bogus line\n"), ParseError);

  // Every node has a predecessor: no start.
  CHECK_THROWS_AS(
      parse_cfg("node 1: x := 1\nnode 2: ret x\nedge 1 -> 2\nedge 2 -> 1\n"),
      ParseError);
  // Two predecessor-free nodes: ambiguous start.
  CHECK_THROWS_AS(parse_cfg("node 1: x := 1\nnode 2: y := 2\nnode 3: ret x\n"
                            "edge 1 -> 3\nedge 2 -> 3\n"),
                  ParseError);

  // Comments and blank lines are ignored.
  Cfg cfg = parse_cfg("# header\n\nnode 1: ret x  # trailing\n");
  CHECK(cfg.nodes.size() == 1);
}

TEST_CASE("structural validation catches mutations") {
  Cfg good = fixture("sum3");
  CHECK(validate_cfg(good).empty());

  SUBCASE("if-node missing a false edge") {
    Cfg bad = good;
    std::erase_if(bad.edges, [](const CfgEdge& e) {
      return e.src == 3 && e.label == EdgeLabel::F;
    });
    CHECK(!validate_cfg(bad).empty());
  }
  SUBCASE("assign with two successors") {
    Cfg bad = good;
    bad.edges.push_back({1, 6, EdgeLabel::None});
    CHECK(!validate_cfg(bad).empty());
  }
  SUBCASE("edge out of the ret node") {
    Cfg bad = good;
    bad.edges.push_back({6, 1, EdgeLabel::None});
    CHECK(!validate_cfg(bad).empty());
  }
  SUBCASE("unreachable node") {
    Cfg bad = good;
    bad.nodes.emplace(9, Statement::assign("s", Expr::int_lit(0)));
    bad.edges.push_back({9, 6, EdgeLabel::None});
    CHECK(!validate_cfg(bad).empty());
  }
  SUBCASE("two ret nodes") {
    Cfg bad = good;
    bad.nodes.emplace(9, Statement::ret("s"));
    CHECK(!validate_cfg(bad).empty());
  }
}

TEST_CASE("augmented graph wires entry and exit") {
  AugmentedCfg aug = augment_cfg(fixture("straight"));
  CHECK(aug.successor(kEntryNode, EdgeLabel::T) == 1);
  CHECK(aug.successor(kEntryNode, EdgeLabel::F) == kExitNode);
  CHECK(aug.successors(3) == std::vector<NodeId>{kExitNode});
  CHECK(aug.nodes.size() == 5);
}

TEST_CASE("cfg_step changes only the assigned variable") {
  Cfg cfg = fixture("sum3");
  Store store = parse_store("s=7,i=2");
  auto [next, after] = cfg_step(cfg, 4, store);  // s := s + i
  CHECK(next == 5);
  CHECK(after.at("s") == Value::integer(9));
  CHECK(after.at("i") == store.at("i"));
  CHECK(after.size() == store.size());

  auto [next2, after2] = cfg_step(cfg, 3, store);  // if i < 4
  CHECK(next2 == 4);
  CHECK(after2 == store);
}

TEST_CASE("cfg_run terminates on the summation example") {
  Cfg cfg = fixture("sum3");
  CfgTrace t = cfg_run(cfg, parse_store("s=9,i=9"), 1000);
  REQUIRE(t.verdict == CfgTrace::Verdict::Terminated);
  CHECK(t.returned == Value::integer(6));
  CHECK(t.final_store.at("i") == Value::integer(4));
  CHECK(t.steps.front().node == cfg.start);

  // Determinism: two runs agree step for step.
  CfgTrace t2 = cfg_run(cfg, parse_store("s=9,i=9"), 1000);
  REQUIRE(t.steps.size() == t2.steps.size());
  for (size_t i = 0; i < t.steps.size(); i++)
    CHECK(t.steps[i].node == t2.steps[i].node);
}

TEST_CASE("cfg_run reports bound exhaustion and runtime errors") {
  CfgTrace t = cfg_run(fixture("loop_forever"), parse_store("x=0"), 100);
  CHECK(t.verdict == CfgTrace::Verdict::BoundExceeded);
  CHECK(t.steps.size() == 100);

  Cfg typed = parse_cfg(
      "node 1: x := b + 1\nnode 2: ret x\nedge 1 -> 2\n");
  CfgTrace err = cfg_run(typed, parse_store("x=0,b=T"), 10);
  CHECK(err.verdict == CfgTrace::Verdict::RuntimeError);
  CHECK(!err.error.empty());

  CHECK_THROWS_AS(cfg_run(typed, parse_store("x=0"), 10),
                  std::invalid_argument);  // partial store
}

TEST_CASE("store parsing") {
  Store s = parse_store("x=1, y=T\nz=-4");
  CHECK(s.at("x") == Value::integer(1));
  CHECK(s.at("y") == Value::truth(true));
  CHECK(s.at("z") == Value::integer(-4));
  CHECK(parse_store(print_store(s)) == s);
  CHECK_THROWS(parse_store("x=1,x=2"));
  CHECK_THROWS(parse_store("nonsense"));
}
