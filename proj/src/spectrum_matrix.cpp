#include "bridgex/spectrum_matrix.hpp"

#include <set>

#include "bridgex/error.hpp"

namespace bridgex {

SpectrumMatrix::SpectrumMatrix(std::vector<std::string> languages)
    : languages_(std::move(languages)), values_(languages_.size() * languages_.size()) {
  std::set<std::string> seen;
  for (const auto& l : languages_)
    if (!seen.insert(l).second) throw ValidationError("language '" + l + "' listed twice");
  for (std::size_t i = 0; i < size(); ++i) values_[i * size() + i] = 1.0;
}

std::size_t SpectrumMatrix::index_of(const std::string& code) const {
  for (std::size_t i = 0; i < languages_.size(); ++i)
    if (languages_[i] == code) return i;
  throw LookupError("language '" + code + "' is not in the matrix");
}

std::optional<double> SpectrumMatrix::at(const std::string& a, const std::string& b) const {
  return at(index_of(a), index_of(b));
}

void SpectrumMatrix::set(std::size_t i, std::size_t j, std::optional<double> value) {
  values_.at(i * size() + j) = value;
  values_.at(j * size() + i) = value;
}

std::vector<std::pair<std::size_t, std::size_t>> SpectrumMatrix::missing() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t j = i + 1; j < size(); ++j)
      if (!values_[i * size() + j]) out.emplace_back(i, j);
  return out;
}

}  // namespace bridgex
