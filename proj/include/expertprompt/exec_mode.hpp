#pragma once

#include <string>

namespace expertprompt {

/// Execution strategy for data-parallel stages. `serial` is the reference
/// implementation; `parallel` uses OpenMP and must produce identical results.
enum class ExecMode {
    serial,
    parallel,
};

std::string to_string(ExecMode mode);
ExecMode exec_mode_from_string(const std::string& name);

}  // namespace expertprompt
