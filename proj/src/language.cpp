#include "bridgex/language.hpp"

#include <array>
#include <utility>

#include "bridgex/error.hpp"
#include "bridgex/text.hpp"

namespace bridgex {

namespace {

constexpr std::array<std::pair<std::string_view, std::string_view>, 24> kNames{{
    {"ar", "Arabic"},     {"de", "German"},   {"en", "English"},  {"es", "Spanish"},
    {"fr", "French"},     {"he", "Hebrew"},   {"id", "Indonesian"}, {"it", "Italian"},
    {"ja", "Japanese"},   {"pt", "Portuguese"}, {"sw", "Swahili"}, {"tl", "Tagalog"},
    {"zh", "Chinese"},    {"ru", "Russian"},  {"ko", "Korean"},   {"vi", "Vietnamese"},
    {"th", "Thai"},       {"hi", "Hindi"},    {"tr", "Turkish"},  {"nl", "Dutch"},
    {"pl", "Polish"},     {"fa", "Persian"},  {"bn", "Bengali"},  {"ms", "Malay"},
}};

}  // namespace

std::string_view to_string(ResourceClass rc) {
  switch (rc) {
    case ResourceClass::high: return "high";
    case ResourceClass::moderate: return "moderate";
    case ResourceClass::low: return "low";
  }
  return "moderate";
}

ResourceClass parse_resource_class(std::string_view text) {
  const auto t = text::to_lower_ascii(text::trim(text));
  if (t == "high") return ResourceClass::high;
  if (t == "moderate") return ResourceClass::moderate;
  if (t == "low") return ResourceClass::low;
  throw ValidationError("unknown resource class '" + std::string(text) + "'");
}

bool is_valid_language_code(std::string_view code) {
  if (code.empty()) return false;
  for (char c : code) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
    if (!ok) return false;
  }
  return true;
}

std::string language_display_name(std::string_view code) {
  for (const auto& [c, name] : kNames)
    if (c == code) return std::string(name);
  return std::string(code);
}

LanguageTag::LanguageTag(std::string code, std::string family, ResourceClass resource)
    : code_(std::move(code)), family_(std::move(family)), resource_(resource) {
  if (!is_valid_language_code(code_))
    throw ValidationError("invalid language code '" + code_ + "'");
}

std::string LanguageTag::display_name() const { return language_display_name(code_); }

}  // namespace bridgex
