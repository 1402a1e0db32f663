#pragma once

#include <string>
#include <vector>

#include "impfac/config.hpp"

namespace impfac {

// Embedded, network-free fixtures. Every expected value records how it was
// derived and the tolerance it is meant to hold at.
struct ExpectedValue {
    std::string name;
    double value = 0.0;
    double tol = 0.0;
    std::string note;
};

struct Fixture {
    std::string name;
    std::string config_text;  // JSON document, parseable by parse_config_text
    std::vector<ExpectedValue> expected;

    RunConfig parse() const { return parse_config_text(config_text); }
    double expect(const std::string& key) const;
};

std::vector<std::string> list_fixtures();
Fixture load_fixture(const std::string& name);  // throws UnknownFixture

}  // namespace impfac
