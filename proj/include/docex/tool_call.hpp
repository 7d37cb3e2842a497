#pragma once

#include <stdexcept>
#include <string>

#include "docex/geometry.hpp"

namespace docex {

enum class ElementType { Region, Text, Table, Image, Equation };

ElementType element_type_from_string(const std::string& s);  // throws std::invalid_argument
std::string to_string(ElementType type);

/// One invocation of the zoom-and-recognize tool: what to look for, where,
/// how to orient the crop, and at what semantic granularity to parse.
struct ToolCall {
    std::string label;
    NormBox box;
    Rotation rotation = Rotation::R0;
    ElementType element_type = ElementType::Region;
};

}  // namespace docex
