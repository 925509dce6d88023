#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace bridgex {

/// Symmetric |L| x |L| language similarity matrix with unit diagonal.
/// Cells whose similarity is undefined are empty rather than zero.
class SpectrumMatrix {
public:
  SpectrumMatrix() = default;
  explicit SpectrumMatrix(std::vector<std::string> languages);

  const std::vector<std::string>& languages() const noexcept { return languages_; }
  std::size_t size() const noexcept { return languages_.size(); }

  std::optional<double> at(std::size_t i, std::size_t j) const { return values_[i * size() + j]; }
  /// Looks a pair up by language code; throws LookupError for unknown codes.
  std::optional<double> at(const std::string& a, const std::string& b) const;
  std::size_t index_of(const std::string& code) const;

  /// Sets both (i, j) and (j, i).
  void set(std::size_t i, std::size_t j, std::optional<double> value);

  /// Off-diagonal pairs with no value, as (i, j) with i < j.
  std::vector<std::pair<std::size_t, std::size_t>> missing() const;

private:
  std::vector<std::string> languages_;
  std::vector<std::optional<double>> values_;
};

}  // namespace bridgex
