#pragma once
#include <map>
#include <string>
#include <vector>

#include "cwrs/autodiff.hpp"
#include "cwrs/rng.hpp"

namespace cwrs {

enum class Init { zeros, uniform_symmetric, fan_in };

// Named parameter registry. Initialization is seeded per name so the result
// does not depend on creation order. std::map keeps iteration (and therefore
// checkpoints and Adam updates) in a fixed order.
class ParamStore {
 public:
  explicit ParamStore(uint64_t seed = 0) : seed_(seed) {}

  uint64_t seed() const { return seed_; }

  // scale: uniform_symmetric -> uniform(-scale, +scale);
  //        fan_in            -> uniform(-1/sqrt(fan), +1/sqrt(fan)), fan = shape[0]
  Param& get_or_create(const std::string& name, const std::vector<int>& shape, Init init,
                       double scale = 0.0);
  Param& adopt(const std::string& name, Tensor value);  // e.g. from a checkpoint
  Param* find(const std::string& name);
  const Param* find(const std::string& name) const;
  bool contains(const std::string& name) const { return params_.count(name) > 0; }

  std::vector<Param*> all();                              // name order
  std::vector<Param*> matching(const std::string& prefix);  // name order
  void zero_all_grads();
  size_t size() const { return params_.size(); }

  std::map<std::string, Param>& raw() { return params_; }
  const std::map<std::string, Param>& raw() const { return params_; }

 private:
  uint64_t seed_;
  std::map<std::string, Param> params_;
};

}  // namespace cwrs
