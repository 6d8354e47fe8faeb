#pragma once

#include <string>

#include "flowlab/field.hpp"

namespace flowlab {

class FieldFileError : public std::runtime_error {
public:
    FieldFileError(const std::string& file, int line, const std::string& what)
        : std::runtime_error(file + ":" + std::to_string(line) + ": " + what) {}
};

// Flat key-value field definition with [section] headers.  Two styles:
//
//   name = "cosh"                # [field] section with v1/v2 (or stream)
//   [field]                      # expressions; pressure optional
//   v1 = "-cosh(x1)"
//   v2 = "x2*sinh(x1)"
//   stream = "x2*cosh(x1)"
//   pressure = "-cosh(2*x1)/4 + x2^2/2"
//
//   name = "cellular"            # or a builtin reference
//   builtin = "cellular"
//   [params]
//   alpha = 1.0
//   beta = 1.0
//
// Shear builtins take [shear] profile = "..." and angle = <radians>.
// Every file needs a [domain] section with xmin/xmax/ymin/ymax.
BuiltinField load_field_file(const std::string& path);
BuiltinField parse_field_text(const std::string& text, const std::string& filename);

} // namespace flowlab
