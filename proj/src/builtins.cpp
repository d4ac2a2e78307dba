#include "lemmaloop/builtins.hpp"

#include <algorithm>
#include <set>

namespace lemmaloop {

namespace {

const std::set<std::string>& bool_ops() {
  static const std::set<std::string> ops{"not", "and", "or", "xor", "=>"};
  return ops;
}

const std::set<std::string>& int_ops() {
  static const std::set<std::string> ops{"+", "-", "*", "div", "mod", "abs"};
  return ops;
}

const std::set<std::string>& cmp_ops() {
  static const std::set<std::string> ops{"<", "<=", ">", ">="};
  return ops;
}

bool all_are(const std::vector<Sort>& args, const Sort& s) {
  return std::all_of(args.begin(), args.end(), [&](const Sort& a) { return a == s; });
}

}  // namespace

bool is_builtin_operator(const std::string& name) {
  return bool_ops().count(name) || int_ops().count(name) || cmp_ops().count(name) ||
         name == "=" || name == "distinct" || name == "ite";
}

std::optional<Sort> builtin_result_sort(const std::string& op, const std::vector<Sort>& args,
                                        std::string& error) {
  const std::size_t n = args.size();
  if (op == "not") {
    if (n != 1) return error = "expects 1 argument", std::nullopt;
    if (!args[0].is_bool()) return error = "expects a Bool argument", std::nullopt;
    return Sort::boolean();
  }
  if (bool_ops().count(op)) {
    std::size_t min = (op == "and" || op == "or") ? 1 : 2;
    if (n < min) return error = "expects at least " + std::to_string(min) + " arguments", std::nullopt;
    if (!all_are(args, Sort::boolean())) return error = "expects Bool arguments", std::nullopt;
    return Sort::boolean();
  }
  if (op == "=" || op == "distinct") {
    if (n < 2) return error = "expects at least 2 arguments", std::nullopt;
    if (!all_are(args, args[0])) return error = "relates terms of different sorts", std::nullopt;
    return Sort::boolean();
  }
  if (op == "ite") {
    if (n != 3) return error = "expects 3 arguments", std::nullopt;
    if (!args[0].is_bool()) return error = "condition must be Bool", std::nullopt;
    if (!(args[1] == args[2])) return error = "branches have different sorts", std::nullopt;
    return args[1];
  }
  if (int_ops().count(op)) {
    std::size_t min = 2, max = SIZE_MAX;
    if (op == "-") min = 1;
    if (op == "abs") min = max = 1;
    if (op == "div" || op == "mod") min = max = 2;
    if (n < min || n > max) return error = "wrong number of arguments", std::nullopt;
    if (!all_are(args, Sort::integer())) return error = "expects Int arguments", std::nullopt;
    return Sort::integer();
  }
  if (cmp_ops().count(op)) {
    if (n < 2) return error = "expects at least 2 arguments", std::nullopt;
    if (!all_are(args, Sort::integer())) return error = "expects Int arguments", std::nullopt;
    return Sort::boolean();
  }
  error = "unknown operator";
  return std::nullopt;
}

}  // namespace lemmaloop
