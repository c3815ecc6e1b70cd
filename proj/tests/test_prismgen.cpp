#include <doctest.h>

#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "goalc/error.hpp"
#include "goalc/prismgen.hpp"
#include "support.hpp"

using namespace goalc;

namespace {

std::string read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string golden(const std::string& name) { return read(std::string(GOALC_GOLDEN_DIR) + "/" + name); }

cgm::GoalModel leaf_model(bool context) {
  return cgm::parse_model(context ? R"({"root": "T", "nodes": [{"id": "T", "kind": "leaf", "contexts": ["C1"]}],
                                        "contexts": [{"id": "C1"}]})"
                                  : R"({"root": "T", "nodes": [{"id": "T", "kind": "leaf"}]})");
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("two-leaf DM model matches the golden files byte for byte") {
  auto m = cgm::load_model(std::string(GOALC_GOLDEN_DIR) + "/dm2.json");
  auto e = prismgen::emit(m, "G");
  CHECK(e.model == golden("dm2.pm"));
  CHECK(e.properties == golden("dm2.pctl"));
  CHECK(e.ctx_constants == 3);
  CHECK(prismgen::emit(m, "G").model == e.model);
}

TEST_CASE("leaf module lines") {
  auto m = leaf_model(true);
  std::string text = prismgen::emit_leaf_module(m.node("T"), 1, 1, {"c1"});
  CHECK(text.find("  [next1] s1 = 0 -> c1*f1 : (s1'=1)+(1-c1*f1) : (s1'=3);\n") != std::string::npos);
  CHECK(text.find("  [] s1 = 1 -> r1 : (s1'=2) + (1 - r1) : (s1'=4); //running to final state\n") !=
        std::string::npos);
  CHECK(count(text, "[next2]") == 3);

  std::string free = prismgen::emit_leaf_module(leaf_model(false).node("T"), 1, 1, {});
  CHECK(free.find("f1 : (s1'=1)+(1-f1) : (s1'=3);") != std::string::npos);

  std::string full = prismgen::emit_model(leaf_model(false), "T");
  CHECK(full.find("  s1 = 1 : w1; //cost of T execution\n") != std::string::npos);
  CHECK(prismgen::emit_properties(leaf_model(false), "T").find("Pmax=? [ F (s1=2) ]") != std::string::npos);
}

TEST_CASE("every leaf module follows the five-command skeleton") {
  std::string pm = prismgen::emit_model(testing::bsn(), "G1");
  std::regex module(R"(module N(\d+)\n  s\1 :\[0\.\.4\] init 0;\n  //init to running[^\n]*\n)"
                    R"(  \[next\d+\] s\1 = 0 -> [^\n]*\n  \[\] s\1 = 1 -> [^\n]*\n)"
                    R"(  \[next\d+\] s\1 = 2 -> \(s\1'=2\); //final state success\n)"
                    R"(  \[next\d+\] s\1 = 3 -> \(s\1'=3\); //final state skipped\n)"
                    R"(  \[next\d+\] s\1 = 4 -> \(s\1'=4\); //final state failure\nendmodule)");
  auto begin = std::sregex_iterator(pm.begin(), pm.end(), module);
  CHECK(std::distance(begin, std::sregex_iterator()) == 16);
  CHECK(count(pm, "\nmodule ") == 17);
}

TEST_CASE("synchronisation labels run 1..M+1 and every constant is declared") {
  std::string pm = prismgen::emit_model(testing::bsn(), "G1");
  std::regex label(R"(\[next(\d+)\])");
  std::set<int> seen;
  for (auto it = std::sregex_iterator(pm.begin(), pm.end(), label); it != std::sregex_iterator(); ++it)
    seen.insert(std::stoi((*it)[1].str()));
  REQUIRE(!seen.empty());
  CHECK(*seen.begin() == 1);
  CHECK(static_cast<std::size_t>(*seen.rbegin()) == seen.size());

  std::regex use(R"(\b([rfw]\d+|OPT\d+|CTX_\d+)\b)");
  std::set<std::string> used;
  for (auto it = std::sregex_iterator(pm.begin(), pm.end(), use); it != std::sregex_iterator(); ++it)
    used.insert((*it)[1].str());
  for (const auto& name : used) {
    bool declared = pm.find("const double " + name + ";") != std::string::npos ||
                    pm.find("const int " + name + ";") != std::string::npos;
    CHECK_MESSAGE(declared, name);
  }
}

TEST_CASE("BSN T1 declares one CTX constant per non-empty subset") {
  auto e = prismgen::emit(testing::bsn(), "T1");
  CHECK(e.ctx_constants == 31);
  CHECK(count(e.model, "const int CTX_") == 31);
  CHECK(e.model.find("s_T1 :[0..33] init 0;") != std::string::npos);
}

TEST_CASE("single-child DM module") {
  auto m = cgm::parse_model(R"({"root": "G", "nodes": [
    {"id": "G", "decomposition": "or", "children": ["A"], "dm": ["A"]},
    {"id": "A", "kind": "leaf", "contexts": ["C1"]}], "contexts": [{"id": "C1"}]})");
  std::string text = prismgen::emit_dm_module(m.node("G"), {"c1"}, 1, 1);
  CHECK(count(text, "CTX_") == 2);
  CHECK(count(text, "(c1'=1)") == 1);
  CHECK(prismgen::emit(m, "G").ctx_constants == 1);
}

TEST_CASE("propositions") {
  const auto& m = testing::bsn();
  // DM child with context: success or (context off and skipped).
  std::string t11 = prismgen::proposition(m, "T1", "T1.1");
  CHECK(t11 == "((s1=2 & s2=2 & s3=2) | (!(C1=1) & (s1=3 & s2=3 & s3=3)))");
  // Context-constrained node outside a DM is wrapped.
  auto g = cgm::parse_model(R"({"root": "G", "nodes": [
    {"id": "G", "decomposition": "and", "children": ["H", "B"]},
    {"id": "H", "kind": "task", "decomposition": "and", "children": ["A"], "contexts": ["C1"]},
    {"id": "A", "kind": "leaf"}, {"id": "B", "kind": "leaf"}], "contexts": [{"id": "C1"}]})");
  CHECK(prismgen::proposition(g, "G", "H") == "((!(C1=1) & s1=3) | s1=2)");
  CHECK_THROWS_AS(prismgen::emit(m, "nope"), DomainError);
}

TEST_CASE("DM over more than twelve children is rejected") {
  std::string nodes, kids, ctx;
  for (int i = 1; i <= 13; ++i) {
    std::string id = "L" + std::to_string(i);
    kids += (i > 1 ? ", \"" : "\"") + id + "\"";
    nodes += R"(, {"id": ")" + id + R"(", "kind": "leaf", "contexts": ["C)" + std::to_string(i) + "\"]}";
    ctx += std::string(i > 1 ? ", " : "") + R"({"id": "C)" + std::to_string(i) + "\"}";
  }
  auto m = cgm::parse_model(R"({"root": "G", "nodes": [{"id": "G", "decomposition": "or", "children": [)" + kids +
                            "], \"dm\": [" + kids + "]}" + nodes + "], \"contexts\": [" + ctx + "]}");
  CHECK_THROWS_AS(prismgen::emit(m, "G"), DomainError);
}
