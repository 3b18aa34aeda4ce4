#include "cwrs/params.hpp"

#include <cmath>

#include "cwrs/errors.hpp"

namespace cwrs {

Param& ParamStore::get_or_create(const std::string& name, const std::vector<int>& shape, Init init,
                                 double scale) {
  auto it = params_.find(name);
  if (it != params_.end()) {
    if (it->second.value.shape() != shape)
      throw ShapeMismatch("param " + name + " recreated with different shape");
    return it->second;
  }
  Tensor value(shape);
  if (init != Init::zeros) {
    double s = scale;
    if (init == Init::fan_in) s = 1.0 / std::sqrt(static_cast<double>(shape[0]));
    Rng rng(mix64(seed_, fnv1a(name)));
    for (size_t i = 0; i < value.numel(); ++i) value[i] = rng.uniform(-s, s);
  }
  return params_.emplace(name, Param(name, std::move(value))).first->second;
}

Param& ParamStore::adopt(const std::string& name, Tensor value) {
  auto it = params_.find(name);
  if (it != params_.end()) {
    if (it->second.value.shape() != value.shape())
      throw ShapeMismatch("param " + name + " adopted with different shape");
    it->second.value = std::move(value);
    it->second.grad.fill(0.0);
    return it->second;
  }
  return params_.emplace(name, Param(name, std::move(value))).first->second;
}

Param* ParamStore::find(const std::string& name) {
  auto it = params_.find(name);
  return it == params_.end() ? nullptr : &it->second;
}

const Param* ParamStore::find(const std::string& name) const {
  auto it = params_.find(name);
  return it == params_.end() ? nullptr : &it->second;
}

std::vector<Param*> ParamStore::all() {
  std::vector<Param*> out;
  out.reserve(params_.size());
  for (auto& [name, p] : params_) out.push_back(&p);
  return out;
}

std::vector<Param*> ParamStore::matching(const std::string& prefix) {
  std::vector<Param*> out;
  for (auto& [name, p] : params_)
    if (name.rfind(prefix, 0) == 0) out.push_back(&p);
  return out;
}

void ParamStore::zero_all_grads() {
  for (auto& [name, p] : params_) p.grad.fill(0.0);
}

}  // namespace cwrs
