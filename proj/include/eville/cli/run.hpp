#pragma once

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "eville/cli/config.hpp"
#include "eville/cli/specs.hpp"
#include "eville/eville.hpp"

namespace eville::cli {

/// The output destination could not be opened or written.
class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Cell = std::variant<std::monostate, std::string, double, std::uint64_t, bool>;

/// Collects comment lines and rows, then renders CSV or JSON Lines.
class Table {
 public:
  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void note(std::string text) { notes_.push_back(std::move(text)); }
  void add(std::vector<Cell> row) {
    if (row.size() != columns_.size()) throw std::logic_error("Table: row width mismatch");
    rows_.push_back(std::move(row));
  }
  std::size_t size() const { return rows_.size(); }

  std::string render(const std::string& format, std::uint64_t seed) const {
    std::ostringstream out;
    out << "# eville " << kVersion << " seed=" << seed << '\n';
    for (const auto& n : notes_) out << "# note: " << n << '\n';
    if (format == "jsonl") {
      for (const auto& row : rows_) {
        nlohmann::ordered_json j;
        for (std::size_t c = 0; c < columns_.size(); ++c) j[columns_[c]] = to_json(row[c]);
        out << j.dump() << '\n';
      }
      return out.str();
    }
    for (std::size_t c = 0; c < columns_.size(); ++c) out << (c ? "," : "") << columns_[c];
    out << '\n';
    for (const auto& row : rows_) {
      for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << to_csv(row[c]);
      out << '\n';
    }
    return out.str();
  }

 private:
  static std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
      if (ch == '"') q += '"';
      q += ch;
    }
    return q + '"';
  }
  static std::string to_csv(const Cell& c) {
    if (auto* s = std::get_if<std::string>(&c)) return quote(*s);
    if (auto* d = std::get_if<double>(&c)) return format_number(*d);
    if (auto* u = std::get_if<std::uint64_t>(&c)) return std::to_string(*u);
    if (auto* b = std::get_if<bool>(&c)) return *b ? "true" : "false";
    return "";
  }
  static nlohmann::ordered_json to_json(const Cell& c) {
    if (auto* s = std::get_if<std::string>(&c)) return *s;
    if (auto* d = std::get_if<double>(&c)) return *d;
    if (auto* u = std::get_if<std::uint64_t>(&c)) return *u;
    if (auto* b = std::get_if<bool>(&c)) return *b;
    return nullptr;
  }

  std::vector<std::string> columns_;
  std::vector<std::string> notes_;
  std::vector<std::vector<Cell>> rows_;
};

/// What a job produced.
struct JobResult {
  Table table;
  bool violation = false;
  std::string summary;
};

namespace detail {

inline McConfig mc_config(const JobConfig& c) {
  McConfig m;
  m.horizon = c.horizon;
  m.n_paths = c.paths;
  m.seed = c.seed;
  m.workers = c.threads;
  return m;
}

inline Table mc_table() {
  return Table({"family", "process_or_rule", "kind", "value", "stderr", "n_paths", "horizon", "seed",
                "bound", "violated"});
}

inline void add_rows(Table& t, const VerificationReport& r) {
  for (const auto& row : r.rows) {
    const auto& e = row.estimate;
    t.add({row.family, row.subject, std::string(to_string(e.kind)), e.value, e.std_error,
           std::uint64_t{e.n_paths}, std::uint64_t{e.horizon}, e.seed,
           row.bound ? Cell(*row.bound) : Cell(), row.violated});
  }
  for (const auto& n : r.notes) t.note(n);
}

/// sup over members of r(K): closed forms where available, Monte Carlo for
/// members that only have a known mean.
inline TailFunction family_tail(const DistributionFamily& family, const JobConfig& c, bool& used_mc) {
  used_mc = false;
  for (const auto& m : family.members()) {
    const bool closed = m.tail && m.tail->form() == TailForm::kClosedForm;
    if (!closed && !m.mean) {
      throw InputError("member '" + m.label + "' has neither a tail function nor a known mean");
    }
    used_mc = used_mc || !closed;
  }
  const auto members = family.members();
  const std::uint64_t n_mc = c.tail_samples;
  const std::uint64_t seed = c.seed;
  auto eval = [members, n_mc, seed](double k) {
    double best = 0.0;
    for (const auto& m : members) best = std::max(best, tail_r(m, k, n_mc, seed).value);
    return best;
  };
  return TailFunction(eval, used_mc ? TailForm::kMonteCarlo : TailForm::kClosedForm);
}

inline std::vector<ScheduleEntry> read_schedule(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read schedule file '" + path + "'");
  std::vector<ScheduleEntry> entries;
  std::string line;
  bool header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (!line.starts_with("n,k_n")) throw InputError("schedule file: header must start with 'n,k_n'");
      header = true;
      continue;
    }
    std::istringstream fields(line);
    std::string n_text;
    std::string k_text;
    std::getline(fields, n_text, ',');
    std::getline(fields, k_text, ',');
    try {
      std::size_t used_n = 0;
      std::size_t used_k = 0;
      const auto n = std::stoull(n_text, &used_n);
      const auto k = std::stoull(k_text, &used_k);
      if (used_n != n_text.size() || used_k != k_text.size()) throw std::invalid_argument("trailing");
      entries.push_back({n, k});
    } catch (const std::exception&) {
      throw InputError("schedule file line " + std::to_string(line_no) + ": expected two integers");
    }
  }
  if (!header) throw InputError("schedule file: missing header");
  return entries;
}

}  // namespace detail

/// A parsed, validated job: every spec is turned into objects before any
/// sampling happens.
class Job {
 public:
  explicit Job(JobConfig config) : c_(std::move(config)) {
    validate(c_);
    if (!c_.family.empty()) family_ = parse_family(c_.family);
    if (!c_.process.empty()) process_ = parse_process(c_.process);
    for (const auto& r : c_.rules) rules_.push_back(parse_rule(r, process_ ? &*process_ : nullptr));
    if (c_.command == "slln-run") schedule_ = detail::read_schedule(c_.schedule);
  }

  const JobConfig& config() const { return c_; }

  JobResult run() const {
    const std::string& cmd = c_.command;
    if (cmd == "simulate") return simulate();
    if (cmd.starts_with("bound")) return bound();
    if (cmd == "verify-ville") return verify_ville();
    if (cmd == "verify-eprocess") return verify_eprocess();
    if (cmd == "mu-star") return mu_star();
    if (cmd == "slln-schedule") return slln_schedule();
    if (cmd == "slln-run") return slln_run();
    return oracle();
  }

 private:
  JobResult simulate() const {
    JobResult r{detail::mc_table(), false, ""};
    const auto mc = detail::mc_config(c_);
    for (const auto& m : family_->members()) {
      for (const auto& rule : rules_) {
        const auto e = estimate_stop_prob(m, rule, mc);
        r.table.add({m.label, rule.description(), std::string(to_string(e.kind)), e.value, e.std_error,
                     std::uint64_t{e.n_paths}, std::uint64_t{e.horizon}, e.seed, Cell(), false});
      }
    }
    r.table.note("P(tau <= T) is a horizon-truncated lower bound on P(tau < inf)");
    r.summary = std::to_string(r.table.size()) + " estimates";
    return r;
  }

  JobResult bound() const {
    JobResult r{Table({"bound", "eps", "gamma", "K", "rK", "vacuous"}), false, ""};
    bool used_mc = false;
    const TailFunction tail = detail::family_tail(*family_, c_, used_mc);
    BoundReport b;
    if (c_.command == "bound-l1") {
      b = l1_bound(*c_.eps, *c_.gamma, *c_.K, tail(*c_.K));
      r.table.note("event: sup_t |S_t|/(gamma+t) > eps + r(K) = " + format_number(b.threshold));
    } else if (c_.command == "bound-l1-auto") {
      b = l1_bound_auto(*c_.eps, *c_.gamma, tail);
      r.table.note("K = gamma^(1/3); event: sup_t |S_t|/(gamma+t) > 2 eps = " + format_number(b.threshold));
    } else {
      b = fixed_k_mean_bound(*c_.eps, *c_.k, tail);
      r.table.note("gamma column holds k; event: |S_k|/k > eps");
    }
    if (used_mc) {
      r.table.note("r(K) is a Monte Carlo estimate from " + std::to_string(c_.tail_samples) +
                   " draws per member, not a certified value");
    }
    if (family_->size() > 1) r.table.note("r(K) is the grid-supremum over " + family_->label());
    r.table.add({b.bound_value, b.epsilon, b.gamma, b.k_cut, b.r_of_k, b.vacuous});
    r.summary = "bound " + format_number(b.bound_value) + (b.vacuous ? " (vacuous)" : "");
    return r;
  }

  JobResult verify_ville() const {
    JobResult r{detail::mc_table(), false, ""};
    const auto mc = detail::mc_config(c_);
    for (const auto& m : family_->members()) {
      const auto report = ville_check(*process_, m, c_.alpha, mc);
      detail::add_rows(r.table, report);
      r.violation = r.violation || report.any_violation();
    }
    r.table.note("violated means value > alpha + 3 SE; a smoke test, not a calibrated test across the grid");
    r.summary = std::to_string(r.table.size()) + " rows, " + (r.violation ? "VIOLATION" : "no violation");
    return r;
  }

  JobResult verify_eprocess() const {
    JobResult r{detail::mc_table(), false, ""};
    const auto rl = rules_.empty() ? standard_eprocess_rules(*process_, c_.horizon, c_.levels) : rules_;
    const auto report = eprocess_check(*process_, rl, *family_, detail::mc_config(c_));
    detail::add_rows(r.table, report);
    r.violation = report.any_violation();
    r.table.note("stopped values use E_{tau ^ T}; violated means mean > 1 + 3 SE");
    r.summary = std::to_string(r.table.size()) + " rows, " + (r.violation ? "VIOLATION" : "no violation");
    return r;
  }

  JobResult mu_star() const {
    JobResult r{detail::mc_table(), false, ""};
    detail::add_rows(r.table, mu_star_grid_bound(*family_, rules_.front(), detail::mc_config(c_)));
    r.table.note("not by itself an upper or lower bound on the inverse-capital measure of the covered event");
    r.summary = std::to_string(r.table.size()) + " rows";
    return r;
  }

  JobResult slln_schedule() const {
    JobResult r{Table({"n", "k_n", "certified"}), false, ""};
    const auto s = k_schedule(*family_, *c_.n_max);
    for (const auto& e : s.entries) r.table.add({e.n, e.k, s.certified});
    r.table.note("certified over grid " + s.family_label);
    r.summary = std::to_string(s.entries.size()) + " entries";
    return r;
  }

  JobResult slln_run() const {
    JobResult r{Table({"family", "replicate", "terminal", "certified"}), false, ""};
    const auto schedule = make_schedule(schedule_, &*family_);
    const auto witness = slln_witness(schedule);
    const auto mc = detail::mc_config(c_);
    std::string summary;
    for (const auto& m : family_->members()) {
      const auto terminal = run_replicates<double>(mc.n_paths, mc.seed, mc.workers, [&](Engine rng, std::size_t) {
        auto xs = m.stream(std::move(rng));
        auto tr = witness.process.tracker();
        double v = witness.process.log_initial();
        for (std::size_t t = 1; t <= mc.horizon; ++t) v = tr(xs());
        return std::exp(v);
      });
      for (std::size_t i = 0; i < terminal.size(); ++i) {
        r.table.add({m.label, std::uint64_t{i}, terminal[i], witness.certified});
      }
      const auto mean = mean_estimate(terminal, mc);
      summary += m.label + " mean terminal " + format_number(mean.value) + " (SE " + format_number(mean.std_error) + "); ";
    }
    if (!witness.certified) {
      r.table.note("schedule NOT certified for " + family_->label() + ": the witness is not a proven e-process");
    }
    r.summary = summary + (witness.certified ? "certified" : "uncertified");
    return r;
  }

  JobResult oracle() const {
    JobResult r{Table({"value", "error_bound", "method"}), false, ""};
    const auto p = c_.command == "oracle-two-coin"
                       ? two_coin_tau_n_prob(static_cast<int>(c_.i), *c_.n, c_.trunc)
                       : binary_pn_stop_prob(*c_.m, *c_.n);
    r.table.add({p.value, p.error_bound, p.method});
    r.summary = "value " + format_number(p.value);
    return r;
  }

  JobConfig c_;
  std::optional<DistributionFamily> family_;
  std::optional<EvidenceProcess> process_;
  std::vector<StoppingRule> rules_;
  std::vector<ScheduleEntry> schedule_;
};

/// Writes `text` to the configured destination; throws OutputError.
inline void write_output(const JobConfig& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text << std::flush;
    if (!std::cout) throw OutputError("cannot write to stdout");
    return;
  }
  std::ofstream f(c.out, std::ios::binary | std::ios::trunc);
  if (!f) throw OutputError("cannot open output file '" + c.out + "'");
  f << text;
  f.flush();
  if (!f) throw OutputError("cannot write output file '" + c.out + "'");
}

/// Checks up front that the output file can be created, so that a bad path
/// fails before a long job starts.
inline void probe_output(const JobConfig& c) {
  if (c.out.empty()) return;
  std::ofstream f(c.out, std::ios::binary | std::ios::app);
  if (!f) throw OutputError("cannot open output file '" + c.out + "'");
}

/// Exit status: 0 ok, 2 usage error, 3 verification violation, 4 I/O error,
/// 1 any other failure.
inline int main(int argc, const char* const* argv) {
  auto parsed = parse_args(argc, argv, std::cerr);
  if (!parsed.config) return parsed.status;
  try {
    Job job(*parsed.config);
    probe_output(job.config());
    auto result = job.run();
    write_output(job.config(), result.table.render(job.config().format, job.config().seed));
    std::cerr << job.config().command << ": " << result.summary << '\n';
    return result.violation ? 3 : 0;
  } catch (const InputError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const OutputError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace eville::cli
