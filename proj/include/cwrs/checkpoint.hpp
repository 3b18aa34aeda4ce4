#pragma once
#include <map>
#include <string>

#include "cwrs/params.hpp"

namespace cwrs {

// Binary container: magic, format version, then name -> shape -> raw
// little-endian doubles, in name order. A plain-text manifest of
// hyperparameters is written next to it at <path>.manifest.
void save_checkpoint(const std::string& path, const ParamStore& params,
                     const std::map<std::string, std::string>& manifest);

struct LoadedCheckpoint {
  std::map<std::string, Tensor> tensors;
  std::map<std::string, std::string> manifest;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

// restore tensors into an already-constructed store (shapes must match)
void restore_params(ParamStore& params, const std::map<std::string, Tensor>& tensors);

}  // namespace cwrs
