#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace bridgex {

enum class ResourceClass { high, moderate, low };

std::string_view to_string(ResourceClass rc);
ResourceClass parse_resource_class(std::string_view text);

/// A language identified by a short lowercase ASCII code ("ar", "zh").
/// Equality and ordering use the code only.
class LanguageTag {
public:
  LanguageTag() = default;
  explicit LanguageTag(std::string code, std::string family = {},
                       ResourceClass resource = ResourceClass::moderate);

  const std::string& code() const noexcept { return code_; }
  const std::string& family() const noexcept { return family_; }
  ResourceClass resource_class() const noexcept { return resource_; }

  /// English display name used in prompt templates; falls back to the code.
  std::string display_name() const;

  friend bool operator==(const LanguageTag& a, const LanguageTag& b) { return a.code_ == b.code_; }
  friend std::strong_ordering operator<=>(const LanguageTag& a, const LanguageTag& b) {
    return a.code_ <=> b.code_;
  }

private:
  std::string code_;
  std::string family_;
  ResourceClass resource_ = ResourceClass::moderate;
};

/// True when `code` is non-empty lowercase ASCII (letters, digits, '_').
bool is_valid_language_code(std::string_view code);

std::string language_display_name(std::string_view code);

}  // namespace bridgex
