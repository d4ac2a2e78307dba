#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lemmaloop/term.hpp"

namespace lemmaloop {

/// Core and Ints operators understood by the front end.
bool is_builtin_operator(const std::string& name);

/// Result sort of builtin `op` applied to `args`, or nullopt with a reason
/// in `error`.
std::optional<Sort> builtin_result_sort(const std::string& op, const std::vector<Sort>& args,
                                        std::string& error);

}  // namespace lemmaloop
