#include "envnet/fixtures.hpp"

#include "fixtures_data.hpp"

namespace envnet {

std::span<const Fixture> fixtures() { return detail::kFixtures; }

const Fixture* find_fixture(std::string_view name) {
  for (const auto& f : detail::kFixtures)
    if (f.name == name) return &f;
  return nullptr;
}

}  // namespace envnet
