#pragma once

#include <string_view>

namespace ironyprof::resources {

// Contents of the bundled data files (core/data/*.tsv).
std::string_view lexicon_tsv();
std::string_view tag_lexicon_tsv();
std::string_view suffix_rules_tsv();

}  // namespace ironyprof::resources
