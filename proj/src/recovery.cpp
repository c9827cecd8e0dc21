#include "lhc/recovery.hpp"

namespace lhc {

std::string_view to_string(RecoveryKind kind) {
  switch (kind) {
    case RecoveryKind::MarketValue: return "market_value";
    case RecoveryKind::Treasury: return "treasury";
    case RecoveryKind::Par: return "par";
    case RecoveryKind::MultipleDefaults: return "multiple_defaults";
  }
  return "unknown";
}

std::optional<RecoveryKind> recovery_kind_from_string(std::string_view name) {
  for (auto kind : {RecoveryKind::MarketValue, RecoveryKind::Treasury, RecoveryKind::Par,
                    RecoveryKind::MultipleDefaults})
    if (to_string(kind) == name) return kind;
  return std::nullopt;
}

}  // namespace lhc
