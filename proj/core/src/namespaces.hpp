#pragma once

#include <string_view>

namespace xlel::wikitext::detail {

enum class PrefixKind { none, file, category, wikipedia, language, other };

/// Classifies the part of a link target before the first ':' (localized
/// namespace names for the dataset's languages, interwiki and language codes).
PrefixKind classify_prefix(std::string_view prefix);

}  // namespace xlel::wikitext::detail
