#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace driftsync {

struct Example {
  std::vector<double> x;
  double y = 0.0;
};

struct StreamSpec {
  enum class Kind { gaussian_xor, rotating_hyperplane, csv };
  enum class Partition { round_robin, contiguous };
  enum class LabelMode { sign, raw };

  Kind kind = Kind::gaussian_xor;
  std::uint64_t seed = 1;
  int d = 2;

  // gaussian_xor: four clusters at (+-1, +-1) in the first two dims, label
  // +1 when the center signs agree; extra dims carry pure noise; the
  // centers rotate by drift_rate radians per round
  double cluster_sd = 0.25;
  double drift_rate = 0.0;

  // rotating_hyperplane: labels by a unit normal rotating in the (0,1)
  // plane; samples are pushed onto the margin, labels flipped w.p. noise
  double angular_rate = 0.0;
  double margin = 0.0;
  double noise = 0.0;

  // csv
  std::string path;
  int label_column = -1;  // -1 means last column
  Partition partition = Partition::round_robin;
  LabelMode label_mode = LabelMode::sign;
  bool normalize = false;  // per-feature min-max to [-1,1] from the first 200 rows
  bool header = false;

  void validate() const;
};

/**
 * Example source for an m-learner run. Generation is a pure function of
 * (spec.seed, learner, round): replays are bitwise identical and no state
 * is shared between learners, so round loops can parallelise over
 * learners freely. CSV data is loaded once at construction.
 */
class Stream {
 public:
  Stream(const StreamSpec& spec, int m);

  Example generate(int learner, std::int64_t t) const;  // learner 0-based, t >= 1
  int dim() const { return dim_; }
  int learners() const { return m_; }

  // rounds available per learner; synthetic streams are unbounded
  std::int64_t max_rounds() const;

 private:
  Example generate_xor(int learner, std::int64_t t) const;
  Example generate_hyperplane(int learner, std::int64_t t) const;
  Example generate_csv(int learner, std::int64_t t) const;

  StreamSpec spec_;
  int m_ = 1;
  int dim_ = 0;
  std::vector<std::vector<double>> rows_;  // csv features
  std::vector<double> labels_;
};

}  // namespace driftsync
