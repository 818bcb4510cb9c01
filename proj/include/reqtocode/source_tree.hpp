#pragma once

#include <string>
#include <vector>

namespace reqtocode {

struct SourceFile {
  std::string path;  // repository-relative, '/'-separated
  std::string content;
};

/// Files of one revision (or of the working tree), sorted by path.
using SourceTree = std::vector<SourceFile>;

}  // namespace reqtocode
