#include <gtest/gtest.h>

#include "lemmaloop/smtlib.hpp"
#include "support.hpp"

namespace lemmaloop {
namespace {

using testing::fixture;
using testing::running_example;

ParseErrorKind error_kind(const std::string& text) {
  try {
    parse_script(text);
  } catch (const ParseError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no ParseError for:\n" << text;
  return ParseErrorKind::Syntax;
}

const std::string kNatPrelude =
    "(declare-datatype Nat ((zero) (succ (n Nat))))\n"
    "(declare-fun plus (Nat Nat) Nat)\n";

TEST(ParseScriptTest, RunningExampleHasFourAxiomsAndCommutativityGoal) {
  Task t = running_example();
  EXPECT_EQ(t.axioms.size(), 4u);
  ASSERT_EQ(t.datatypes.size(), 1u);
  EXPECT_EQ(t.datatypes[0].decls[0].name, "Nat");
  Term expected = parse_formula("(forall ((a Nat) (b Nat)) (= (mult a b) (mult b a)))", t);
  EXPECT_TRUE(alpha_equivalent(t.goal, expected));
  ASSERT_EQ(t.functions.size(), 2u);
  for (const auto& f : t.functions) {
    EXPECT_EQ(f.form, DefinitionForm::AxiomSet) << f.name;
    EXPECT_EQ(f.defining_axioms.size(), 2u) << f.name;
  }
}

TEST(ParseScriptTest, LabeledGoalIsTakenPositively) {
  Task t = parse_file(fixture("corpus/labeled-goal.smt2").string());
  EXPECT_EQ(t.axioms.size(), 2u);
  EXPECT_EQ(render_term(t.goal), "(forall ((x Nat)) (= (plus x zero) x))");
}

TEST(ParseScriptTest, ErrorKinds) {
  EXPECT_EQ(error_kind("(assert true)(check-sat)"), ParseErrorKind::NoGoalFound);
  EXPECT_EQ(error_kind(kNatPrelude + "; proof goal\n(assert true)\n; proof goal\n(assert false)"),
            ParseErrorKind::MultipleGoals);
  EXPECT_EQ(error_kind(kNatPrelude + "(assert (not (= (plus zero q) zero)))"), ParseErrorKind::UnknownSymbol);
  EXPECT_EQ(error_kind(kNatPrelude + "(assert (not (= (plus zero 1) zero)))"), ParseErrorKind::SortMismatch);
  EXPECT_EQ(error_kind("(push 1)"), ParseErrorKind::Unsupported);
  EXPECT_EQ(error_kind("(assert (not true)"), ParseErrorKind::Syntax);
}

TEST(ParseScriptTest, ErrorMessageCarriesLocation) {
  try {
    parse_script(kNatPrelude + "(assert (not (= (plus zero q) zero)))");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.loc().line, 3);
    EXPECT_NE(std::string(e.what()).find("UnknownSymbol at 3:"), std::string::npos) << e.what();
  }
}

TEST(ParseScriptTest, DesugarsMatchAndLet) {
  Task t = parse_file(fixture("corpus/sort-alias-let.smt2").string());
  std::string goal = render_term(t.goal);
  EXPECT_EQ(goal.find("let"), std::string::npos);
  EXPECT_EQ(goal, "(forall ((n Nat)) (= (add n one) (S n)))");
  Task m = parse_file(fixture("mini-suite/plus-zero-right.smt2").string());
  ASSERT_TRUE(m.functions[0].body.has_value());
  EXPECT_EQ(render_term(*m.functions[0].body), "(ite ((_ is zero) x) y (succ (plus (n x) y)))");
}

TEST(ParseScriptTest, AcceptsLegacyAndParametricDatatypes) {
  Task legacy = parse_file(fixture("mini-suite/rev-rev.smt2").string());
  ASSERT_EQ(legacy.datatypes.size(), 1u);
  EXPECT_EQ(legacy.datatypes[0].decls[0].params, std::vector<std::string>{"T"});
  Task par = parse_file(fixture("corpus/tree-mirror.smt2").string());
  EXPECT_EQ(par.datatypes[0].decls[0].params, std::vector<std::string>{"T"});
  Task mutual = parse_file(fixture("corpus/forest.smt2").string());
  EXPECT_EQ(mutual.datatypes[0].decls.size(), 2u);
  EXPECT_EQ(mutual.functions[0].rec_group, mutual.functions[1].rec_group);
  EXPECT_GE(mutual.functions[0].rec_group, 0);
}

TEST(ParseFormulaTest, StripsAssertAndChecksSorts) {
  Task t = running_example();
  Term a = parse_formula("(assert " + testing::kL1 + ")", t);
  Term b = parse_formula(testing::kL1, t);
  EXPECT_TRUE(a == b);
  EXPECT_THROW(parse_formula("(plus zero zero)", t), ParseError);
  EXPECT_THROW(parse_formula("(forall ((x Nat)) (= x y))", t), ParseError);
}

TEST(RenderTest, ScriptEndsWithNegatedGoalAndCheckSat) {
  std::string s = render_script(running_example());
  EXPECT_NE(s.find("(assert (not (forall ((x Nat) (y Nat)) (= (mult x y) (mult y x)))))\n(check-sat)"),
            std::string::npos)
      << s;
}

TEST(RenderTest, RoundTripsEveryCorpusFile) {
  int seen = 0;
  for (const auto& dir : {"corpus", "mini-suite"}) {
    for (const auto& e : std::filesystem::directory_iterator(fixture(dir))) {
      if (e.path().extension() != ".smt2") continue;
      SCOPED_TRACE(e.path().string());
      Task t = parse_file(e.path().string());
      Task back = parse_script(render_script(t));
      EXPECT_TRUE(alpha_equivalent(t, back));
      ++seen;
    }
  }
  EXPECT_GE(seen, 10);
}

TEST(LabelTest, RunningExampleSections) {
  LabeledScript l = preprocess_label(running_example());
  const std::string& s = l.full_text;
  auto dt = s.find("; datatype definitions");
  auto fn = s.find("; function definitions");
  auto goal = s.find("; proof goal");
  ASSERT_NE(dt, std::string::npos);
  ASSERT_LT(dt, fn);
  ASSERT_LT(fn, goal);
  EXPECT_NE(l.goal_section.find("(assert (forall ((x Nat) (y Nat)) (= (mult x y) (mult y x))))"), std::string::npos);
  EXPECT_EQ(s.find("check-sat"), std::string::npos);
  EXPECT_EQ(s.find("(not (forall"), std::string::npos);
}

TEST(LabelTest, LabeledTextReparsesToSameTask) {
  for (const auto& name : {"nat-mult-comm.smt2", "corpus/forest.smt2", "corpus/tree-mirror.smt2"}) {
    SCOPED_TRACE(name);
    Task t = parse_file(fixture(name).string());
    Task back = parse_script(preprocess_label(t).full_text);
    EXPECT_TRUE(alpha_equivalent(t, back));
  }
}

}  // namespace
}  // namespace lemmaloop
