/// @file builtins.hpp
/// @brief Logic step functions: the interface both builtin and extern
/// handlers implement, and the closed set of builtin primitives.
///
/// A step runs when an input arrives (once every input slot is ready) or when
/// a storage response arrives. It returns output values, whether the service's
/// commands fire, and any storage requests to issue.
///
/// Builtins and their parameters:
///
///   average               mean of the single numeric input's window
///   threshold(cmp=v)      compare the single numeric input; fires when true
///   all / any             conjunction / disjunction over inputs; numeric
///                         inputs need a comparator (`gt=50` for all numeric
///                         inputs, `lt_avgSpeed=40` for one); `not_x=true`
///                         negates boolean input x
///   passthrough           forwards the single input; always fires
///   latch                 fires on a rising edge of its boolean input, once
///                         per triggering scope until the input resets
///   keyed-lookup-forward  requests the storage item keyed by the input and
///                         forwards the response; `default=v` covers absent keys
///
/// Comparators: gt, ge, lt, le, eq, ne. Windowed inputs are reduced to their
/// mean before comparison.

#pragma once

#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "iotforge/ast.hpp"
#include "iotforge/codegen.hpp"
#include "iotforge/value.hpp"

namespace iotforge {

struct SlotState {
    std::size_t capacity = 1;  // window size, 1 for last-value slots
    std::deque<Value> window;
    std::string last_scope;  // scope path of the topic that delivered the last value

    bool ready() const { return window.size() >= capacity; }
    const Value& latest() const { return window.back(); }
    /// Mean of the window; requires numeric values.
    double mean() const;
};

struct StepContext {
    enum class Trigger { Input, Response };
    Trigger trigger = Trigger::Input;
    std::string trigger_data;   // input data name, or request data name
    std::string trigger_scope;  // scope path of the delivering topic
    std::optional<Value> response;  // set for a present storage response
    const LogicContract* contract = nullptr;
    const std::map<std::string, SlotState>* inputs = nullptr;

    const SlotState& slot(std::string_view data) const;
};

struct StepResult {
    std::vector<std::pair<std::string, Value>> outputs;
    bool fire = false;
    std::vector<std::pair<std::string, Value>> requests;  // (request data, key)
};

using LogicFunction = std::function<StepResult(const StepContext&)>;

inline constexpr const char* kBuiltinNames[] = {
    "average", "threshold", "all", "any", "passthrough", "latch", "keyed-lookup-forward"};

bool is_builtin(std::string_view name);

/// Problems binding builtin `name` with `params` to `contract`; empty when
/// the combination is valid.
std::vector<std::string> validate_builtin(std::string_view name,
                                          const std::vector<LogicParam>& params,
                                          const LogicContract& contract);

/// A fresh step function with its own state. Throws std::invalid_argument
/// when validate_builtin would report a problem.
LogicFunction make_builtin(std::string_view name, const std::vector<LogicParam>& params,
                           const LogicContract& contract);

}  // namespace iotforge
