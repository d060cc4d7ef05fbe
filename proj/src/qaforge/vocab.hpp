#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace qaforge::vocab {

// The 62 first-level disciplines the classifier may emit, in canonical order.
const std::vector<std::string>& disciplines();

// disciplines() plus the three sentinel labels cross-discipline / Other / Invalid.
const std::vector<std::string>& discipline_vocabulary();

bool is_valid_discipline(std::string_view name);

// Disciplines that get boosted sampling weight by default.
const std::vector<std::string>& stem_disciplines();
bool is_stem(std::string_view name);

enum class Tier { basic, standard, improvement, challenge, extreme, other };

// H1 (easiest) .. H5 (hardest); 0 means "none" (tier == other).
int h_level(Tier t);
Tier tier_from_h_level(int h);

std::string tier_name(Tier t);
bool tier_from_name(std::string_view name, Tier& out);
std::string h_level_name(int h);  // "H1".."H5" or "none"

// Educational stages used by stage-alignment validation.
const std::vector<std::string>& stages();  // primary, junior_high, high_school, college, graduate, other
bool is_valid_stage(std::string_view name);

}  // namespace qaforge::vocab
