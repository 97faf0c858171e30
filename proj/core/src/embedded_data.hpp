#pragma once

#include <string_view>

// Default data files compiled into the library (see core/data/).
namespace fans::embedded {

extern const std::string_view kPromptPreamble;
extern const std::string_view kPromptLevel1;
extern const std::string_view kPromptLevel2;
extern const std::string_view kPromptLevel3;
extern const std::string_view kRefusalPatterns;
extern const std::string_view kGazetteer;

}  // namespace fans::embedded
