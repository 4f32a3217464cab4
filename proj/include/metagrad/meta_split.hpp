#pragma once

#include <string_view>

namespace metagrad {

enum class MetaSplit { Train, Val, Test };

constexpr std::string_view to_string(MetaSplit split) {
    switch (split) {
        case MetaSplit::Train: return "train";
        case MetaSplit::Val: return "val";
        case MetaSplit::Test: return "test";
    }
    return "?";
}

}  // namespace metagrad
