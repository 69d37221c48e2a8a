#include "driftsync/stream.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "driftsync/rng.hpp"

namespace driftsync {

void StreamSpec::validate() const {
  switch (kind) {
    case Kind::gaussian_xor:
      if (d < 2) throw std::invalid_argument("stream: gaussian_xor needs d >= 2");
      if (!(cluster_sd >= 0.0) || !std::isfinite(cluster_sd))
        throw std::invalid_argument("stream: cluster_sd must be >= 0");
      if (!std::isfinite(drift_rate))
        throw std::invalid_argument("stream: drift_rate must be finite");
      break;
    case Kind::rotating_hyperplane:
      if (d < 2) throw std::invalid_argument("stream: rotating_hyperplane needs d >= 2");
      if (!(margin >= 0.0) || !std::isfinite(margin))
        throw std::invalid_argument("stream: margin must be >= 0");
      if (!(noise >= 0.0) || !(noise <= 1.0))
        throw std::invalid_argument("stream: noise must be in [0,1]");
      if (!std::isfinite(angular_rate))
        throw std::invalid_argument("stream: angular_rate must be finite");
      break;
    case Kind::csv:
      if (path.empty()) throw std::invalid_argument("stream: csv needs a path");
      break;
  }
}

namespace {

std::vector<double> parse_csv_line(const std::string& line, int lineno) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      out.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw std::runtime_error("csv: line " + std::to_string(lineno) +
                               ": not a number: '" + cell + "'");
    }
  }
  return out;
}

}  // namespace

Stream::Stream(const StreamSpec& spec, int m) : spec_(spec), m_(m) {
  spec_.validate();
  if (m_ < 1) throw std::invalid_argument("stream: m must be >= 1");
  if (spec_.kind != StreamSpec::Kind::csv) {
    dim_ = spec_.d;
    return;
  }

  std::ifstream in(spec_.path);
  if (!in) throw std::runtime_error("csv: cannot open " + spec_.path);
  std::string line;
  int lineno = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1 && spec_.header) continue;
    if (line.empty()) continue;
    std::vector<double> row = parse_csv_line(line, lineno);
    if (row.size() < 2)
      throw std::runtime_error("csv: line " + std::to_string(lineno) +
                               ": need at least one feature and a label");
    if (width == 0) width = row.size();
    if (row.size() != width)
      throw std::runtime_error("csv: line " + std::to_string(lineno) +
                               ": inconsistent column count");
    int lc = spec_.label_column < 0 ? static_cast<int>(width) - 1 : spec_.label_column;
    if (lc >= static_cast<int>(width))
      throw std::runtime_error("csv: label column out of range");
    double raw = row[lc];
    double y = spec_.label_mode == StreamSpec::LabelMode::raw
                   ? raw
                   : (raw > 0.0 ? 1.0 : -1.0);
    row.erase(row.begin() + lc);
    rows_.push_back(std::move(row));
    labels_.push_back(y);
  }
  if (rows_.empty()) throw std::runtime_error("csv: no data rows in " + spec_.path);
  dim_ = static_cast<int>(rows_.front().size());

  if (spec_.normalize) {
    // per-feature min-max from the first 200 rows, mapped to [-1,1];
    // constant features map to 0
    std::size_t probe = rows_.size() < 200 ? rows_.size() : 200;
    std::vector<double> lo(dim_, std::numeric_limits<double>::infinity());
    std::vector<double> hi(dim_, -std::numeric_limits<double>::infinity());
    for (std::size_t r = 0; r < probe; ++r)
      for (int c = 0; c < dim_; ++c) {
        lo[c] = std::min(lo[c], rows_[r][c]);
        hi[c] = std::max(hi[c], rows_[r][c]);
      }
    for (auto& row : rows_)
      for (int c = 0; c < dim_; ++c) {
        double range = hi[c] - lo[c];
        row[c] = range > 0.0 ? 2.0 * (row[c] - lo[c]) / range - 1.0 : 0.0;
      }
  }
}

std::int64_t Stream::max_rounds() const {
  if (spec_.kind != StreamSpec::Kind::csv)
    return std::numeric_limits<std::int64_t>::max();
  return static_cast<std::int64_t>(rows_.size()) / m_;
}

Example Stream::generate(int learner, std::int64_t t) const {
  if (learner < 0 || learner >= m_)
    throw std::invalid_argument("stream: learner out of range");
  if (t < 1) throw std::invalid_argument("stream: rounds start at 1");
  switch (spec_.kind) {
    case StreamSpec::Kind::gaussian_xor:
      return generate_xor(learner, t);
    case StreamSpec::Kind::rotating_hyperplane:
      return generate_hyperplane(learner, t);
    case StreamSpec::Kind::csv:
      return generate_csv(learner, t);
  }
  throw std::logic_error("stream: unknown kind");
}

Example Stream::generate_xor(int learner, std::int64_t t) const {
  Rng rng(mix_key(spec_.seed, static_cast<std::uint64_t>(learner) + 1,
                  static_cast<std::uint64_t>(t)));
  static constexpr double centers[4][2] = {{1, 1}, {-1, -1}, {1, -1}, {-1, 1}};
  std::uint64_t q = rng.next_u64() & 3;
  double label = q < 2 ? 1.0 : -1.0;  // +1 where the center signs agree

  double theta = spec_.drift_rate * static_cast<double>(t - 1);
  double c = std::cos(theta), s = std::sin(theta);
  double cx = centers[q][0] * c - centers[q][1] * s;
  double cy = centers[q][0] * s + centers[q][1] * c;

  Example ex;
  ex.x.resize(spec_.d);
  ex.x[0] = cx + spec_.cluster_sd * rng.normal();
  ex.x[1] = cy + spec_.cluster_sd * rng.normal();
  for (int k = 2; k < spec_.d; ++k) ex.x[k] = spec_.cluster_sd * rng.normal();
  ex.y = label;
  return ex;
}

Example Stream::generate_hyperplane(int learner, std::int64_t t) const {
  Rng rng(mix_key(spec_.seed, static_cast<std::uint64_t>(learner) + 1,
                  static_cast<std::uint64_t>(t)));
  double theta = spec_.angular_rate * static_cast<double>(t - 1);
  double c = std::cos(theta), s = std::sin(theta);

  Example ex;
  ex.x.resize(spec_.d);
  for (int k = 0; k < spec_.d; ++k) ex.x[k] = rng.uniform(-1.0, 1.0);

  double p = ex.x[0] * c + ex.x[1] * s;
  double sgn = p >= 0.0 ? 1.0 : -1.0;
  if (std::abs(p) < spec_.margin) {
    // push along the normal until the point sits exactly on the margin
    double shift = (spec_.margin - std::abs(p)) * sgn;
    ex.x[0] += shift * c;
    ex.x[1] += shift * s;
  }
  ex.y = sgn;
  if (spec_.noise > 0.0 && rng.unit() < spec_.noise) ex.y = -ex.y;
  return ex;
}

Example Stream::generate_csv(int learner, std::int64_t t) const {
  std::int64_t idx;
  if (spec_.partition == StreamSpec::Partition::round_robin) {
    idx = (t - 1) * m_ + learner;
  } else {
    std::int64_t block = static_cast<std::int64_t>(rows_.size()) / m_;
    idx = learner * block + (t - 1);
    if (t > block) idx = -1;
  }
  if (idx < 0 || idx >= static_cast<std::int64_t>(rows_.size()))
    throw std::out_of_range("csv: stream exhausted at round " + std::to_string(t));
  return {rows_[static_cast<std::size_t>(idx)], labels_[static_cast<std::size_t>(idx)]};
}

}  // namespace driftsync
