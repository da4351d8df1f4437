#pragma once

// JSON serialization of analysis reports. Every to_json/from_json pair
// round-trips exactly (doubles are written with 17 significant digits).

#include <string>

#include "hcl/fuchsian.hpp"
#include "hcl/melnikov.hpp"
#include "hcl/variational.hpp"

namespace hcl::report_io {

std::string to_json(const melnikov::MelnikovReport& r);
melnikov::MelnikovReport melnikov_from_json(const std::string& text);

std::string to_json(const variational::BoundedCount& c, double s, double beta1);
variational::BoundedCount bounded_from_json(const std::string& text);

std::string to_json(const fuchsian::KimuraVerdict& v, const fuchsian::ExponentScheme& scheme);
fuchsian::KimuraVerdict kimura_from_json(const std::string& text);

}  // namespace hcl::report_io
