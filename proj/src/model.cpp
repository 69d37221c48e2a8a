#include "driftsync/model.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace driftsync {

PointKey::PointKey(std::span<const double> p) {
  bits.reserve(p.size());
  for (double v : p) bits.push_back(std::bit_cast<std::uint64_t>(v));
}

std::size_t PointKeyHash::operator()(const PointKey& k) const noexcept {
  // FNV-1a over the raw words
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint64_t w : k.bits) {
    for (int i = 0; i < 8; ++i) {
      h ^= (w >> (8 * i)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  }
  return static_cast<std::size_t>(h);
}

KernelModel::KernelModel(KernelSpec spec) : spec_(spec) { spec_.validate(); }

std::optional<std::size_t> KernelModel::find(std::span<const double> point) const {
  auto it = index_.find(PointKey(point));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool KernelModel::add(SupportVector sv, double coeff) {
  if (sv.point.empty()) throw std::invalid_argument("model: empty point");
  if (dim_ == 0) dim_ = sv.point.size();
  if (sv.point.size() != dim_)
    throw std::invalid_argument("model: point dimension mismatch");
  for (double v : sv.point)
    if (!std::isfinite(v)) throw std::invalid_argument("model: non-finite point");
  if (!std::isfinite(coeff)) throw std::invalid_argument("model: non-finite coefficient");

  PointKey key(sv.point);
  auto it = index_.find(key);
  if (it != index_.end()) {
    std::size_t i = it->second;
    coeffs_[i] += coeff;
    if (sv.birth < supports_[i].birth) supports_[i].birth = sv.birth;
    return false;
  }
  index_.emplace(std::move(key), supports_.size());
  supports_.push_back(std::move(sv));
  coeffs_.push_back(coeff);
  return true;
}

void KernelModel::scale(double factor) {
  if (!std::isfinite(factor)) throw std::invalid_argument("model: non-finite scale");
  for (double& c : coeffs_) c *= factor;
}

KernelModel KernelModel::compact() const {
  KernelModel out(spec_);
  for (std::size_t i = 0; i < size(); ++i)
    if (coeffs_[i] != 0.0) out.add(supports_[i], coeffs_[i]);
  return out;
}

SupportSet KernelModel::support_set() const {
  SupportSet s;
  s.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) s.insert(PointKey(supports_[i].point));
  return s;
}

void ModelConfiguration::validate() const {
  if (models.empty())
    throw std::invalid_argument("configuration: needs at least one model");
  const KernelSpec& spec = models.front().kernel();
  for (const KernelModel& f : models)
    if (!(f.kernel() == spec))
      throw std::invalid_argument("configuration: kernel specs differ");
}

}  // namespace driftsync
