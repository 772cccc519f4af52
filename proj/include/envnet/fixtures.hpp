#pragma once

#include <span>
#include <string_view>

namespace envnet {

/// A bundled model from the worked examples, with its expected-results
/// sidecar (key = value lines consumed by the test suite).
struct Fixture {
  std::string_view name;
  std::string_view model_text;
  std::string_view expected;
};

std::span<const Fixture> fixtures();
const Fixture* find_fixture(std::string_view name);  // nullptr when unknown

}  // namespace envnet
