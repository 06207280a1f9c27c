#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace eville {

/// An adapted nonnegative process E_0, E_1, ... held in log-domain.
///
/// A process is an immutable recipe. `tracker()` hands out a fresh online
/// evaluator for one path: feed x_t, get back log E_t. Because a tracker only
/// ever sees x_1..x_t, every process built this way is adapted to the natural
/// filtration. log E_t may be -inf (E_t = 0) but never +inf or NaN.
class EvidenceProcess {
 public:
  using Tracker = std::function<double(double)>;
  using Factory = std::function<Tracker()>;

  EvidenceProcess(std::string label, double log_initial, Factory factory,
                  bool nondecreasing = false)
      : label_(std::move(label)),
        log_initial_(log_initial),
        factory_(std::move(factory)),
        nondecreasing_(nondecreasing) {}

  const std::string& label() const { return label_; }
  /// log E_0, the value before any observation.
  double log_initial() const { return log_initial_; }
  /// True when every path of the process is nondecreasing in t.
  bool nondecreasing() const { return nondecreasing_; }
  Tracker tracker() const { return factory_(); }

  /// log E_t for t = prefix.size().
  double log_eval(std::span<const double> prefix) const {
    double v = log_initial_;
    auto tr = tracker();
    for (double x : prefix) v = tr(x);
    return v;
  }

  double eval(std::span<const double> prefix) const {
    return std::exp(log_eval(prefix));
  }

  /// log E_t for t = 0..T.
  std::vector<double> log_trajectory(std::span<const double> values) const {
    std::vector<double> out;
    out.reserve(values.size() + 1);
    out.push_back(log_initial_);
    auto tr = tracker();
    for (double x : values) out.push_back(tr(x));
    return out;
  }

 private:
  std::string label_;
  double log_initial_;
  Factory factory_;
  bool nondecreasing_;
};

}  // namespace eville
