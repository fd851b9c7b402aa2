#pragma once

#include <string>

#include "ssmx/system.hpp"

namespace ssmx {

// Plain-text model format, line oriented:
//
//   ssmx-model 1
//   name pendulum
//   dim 4
//   degree-limit 6
//   hamiltonian 1
//   eval-radius 8
//   collar 0.05
//   matrix L
//   <dim rows of dim numbers>
//   end
//   matrix C <eps-power>
//   ...
//   end
//   poly N
//   <dim exponents> : <dim coefficients>
//   end
//   poly G <eps-power>
//   ...
//   end
//   poly I
//   <dim exponents> : <coefficient>
//   end
//
// '#' starts a comment. Numbers are written with 17 significant digits so a
// write/parse round trip reproduces every coefficient bit for bit.

SystemSpec parse_model(const std::string& text, const std::string& origin);
SystemSpec load_model_file(const std::string& path);
std::string serialize_model(const SystemSpec& spec);
void write_model_file(const SystemSpec& spec, const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace ssmx
