#pragma once

#include <optional>
#include <string_view>

namespace lhc {

enum class RecoveryKind { MarketValue, Treasury, Par, MultipleDefaults };

/// "market_value", "treasury", "par", "multiple_defaults".
std::string_view to_string(RecoveryKind kind);
std::optional<RecoveryKind> recovery_kind_from_string(std::string_view name);

/// All schemes except multiple defaults use an absorbing default state.
inline bool has_default_state(RecoveryKind kind) { return kind != RecoveryKind::MultipleDefaults; }

}  // namespace lhc
