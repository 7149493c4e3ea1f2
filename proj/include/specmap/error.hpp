#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace specmap {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when an operation requires a connected neighborhood graph.
// Carries the component census so callers can report which k failed and how
// the graph fell apart.
struct DisconnectedGraphError : Error {
    DisconnectedGraphError(std::string msg, std::vector<int> component_of_, int component_count_)
        : Error(std::move(msg)),
          component_of(std::move(component_of_)),
          component_count(component_count_) {}

    std::vector<int> component_of;
    int component_count;
};

} // namespace specmap
