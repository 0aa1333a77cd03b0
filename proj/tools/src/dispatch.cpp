#include "hcfm_cli/dispatch.hpp"

#include <cmath>
#include <filesystem>
#include <limits>
#include <ostream>

#include "hcfm_cli/csv.hpp"
#include "hermite_cfm/error.hpp"
#include "hermite_cfm/harness.hpp"

namespace hcfm::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

CsvTable make_table(const std::string& command, const Config& c,
                    std::vector<std::string> header) {
  CsvTable t;
  t.comments.push_back("command: " + command);
  for (const auto& p : c.provenance) t.comments.push_back(p.key + " = " + p.value + " (" + p.origin + ")");
  t.header = std::move(header);
  return t;
}

std::string join(const std::string& dir, const std::string& file) {
  return (std::filesystem::path(dir) / file).string();
}

void study_rows(CsvTable& t, const StudyResult& r) {
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const auto& row = r.rows[i];
    const double rate = i > 0 && i - 1 < r.rate.pair_rates.size() ? r.rate.pair_rates[i - 1] : kNaN;
    const double drate = i > 0 && i - 1 < r.divergence_rate.pair_rates.size()
                             ? r.divergence_rate.pair_rates[i - 1]
                             : kNaN;
    t.add_row({static_cast<double>(row.n), row.h, row.dt, static_cast<double>(row.steps), row.error,
               row.divergence, rate, drate});
  }
  t.comments.push_back("fitted_rate = " + format_number(r.rate.slope));
  t.comments.push_back("fitted_divergence_rate = " + format_number(r.divergence_rate.slope));
}

const std::vector<std::string> kStudyHeader = {"n",     "h",          "dt",   "steps",
                                               "error", "divergence", "rate", "divergence_rate"};

std::vector<std::string> run_command(const Config& c, const std::string& dir, std::ostream& log) {
  ProblemSpec p = c.make_problem();
  if (!p.exact && c.problem.name == "zero") p.exact = p.initial;
  const int n = c.meshes.front();
  Solver s(p, n, c.solver_params());
  CsvTable steps = make_table("run", c, {"step", "time", "max_abs", "error"});
  steps.add_row({0.0, s.state().time(), s.max_abs(), p.exact ? s.error_max() : kNaN});
  const auto diag = s.run(-1.0, [&](const Solver& sv, std::size_t k) {
    steps.add_row({static_cast<double>(k), sv.state().time(), sv.max_abs(),
                   sv.problem().exact ? sv.error_max() : kNaN});
  });
  std::vector<std::string> header = {"n", "h", "dt", "steps", "time", "max_abs", "error",
                                     "divergence"};
  const auto names = p.dim == 1 ? std::vector<std::string>{"error_H", "error_E"}
                                : std::vector<std::string>{"error_Hx", "error_Hy", "error_Ez"};
  header.insert(header.end(), names.begin(), names.end());
  CsvTable fin = make_table("run", c, header);
  std::vector<double> row = {static_cast<double>(n), s.mesh().h(), diag.dt,
                             static_cast<double>(diag.steps), diag.time, diag.max_abs,
                             p.exact ? s.error_max() : kNaN,
                             p.dim == 2 ? s.divergence_l2() : kNaN};
  if (p.exact) {
    for (double e : s.field_errors()) row.push_back(e);
  } else {
    row.insert(row.end(), names.size(), kNaN);
  }
  fin.add_row(row);
  const auto a = join(dir, "run_steps.csv"), b = join(dir, "run_final.csv");
  write_csv(a, steps);
  write_csv(b, fin);
  log << "run: n=" << n << " steps=" << diag.steps << " error=" << format_number(row[6]) << '\n';
  return {a, b};
}

std::vector<std::string> converge_command(const Config& c, const std::string& dir,
                                          std::ostream& log) {
  const ProblemSpec p = c.make_problem();
  if (!p.exact) throw ConfigError("converge needs a problem with an exact solution; use selfconverge");
  const auto r = convergence_study(p, c.solver_params(), c.meshes);
  CsvTable t = make_table("converge", c, kStudyHeader);
  study_rows(t, r);
  const auto path = join(dir, "converge.csv");
  write_csv(path, t);
  log << "converge: fitted rate " << format_number(r.rate.slope) << '\n';
  return {path};
}

std::vector<std::string> selfconverge_command(const Config& c, const std::string& dir,
                                              std::ostream& log) {
  if (c.reference == 0) throw ConfigError("selfconverge requires 'reference'");
  const auto r = self_convergence(c.make_problem(), c.solver_params(), c.meshes, c.reference);
  CsvTable t = make_table("selfconverge", c, kStudyHeader);
  study_rows(t, r);
  const auto path = join(dir, "selfconverge.csv");
  write_csv(path, t);
  log << "selfconverge: fitted rate " << format_number(r.rate.slope) << '\n';
  return {path};
}

std::vector<std::string> stability_command(const Config& c, const std::string& dir,
                                           std::ostream& log) {
  if (c.dimension != 1) throw ConfigError("stability requires dimension 1");
  const ProblemSpec p = c.make_homogeneous();
  CsvTable t = make_table("stability", c, {"n", "h", "cfl", "c_h", "dimension", "rho", "deviation", "stable"});
  auto add = [&](const SpectrumResult& r) {
    t.add_row({static_cast<double>(r.n), r.h, r.cfl, r.c_h, static_cast<double>(r.dimension), r.rho,
               r.deviation, r.stable ? 1.0 : 0.0});
    log << "stability: n=" << r.n << " cfl=" << format_number(r.cfl)
        << " c_h=" << format_number(r.c_h) << " rho=" << format_number(r.rho)
        << (r.stable ? " stable" : " unstable") << '\n';
  };
  const SolverParams base = c.solver_params();
  if (c.sweep.parameter == "cfl" || c.sweep.parameter == "c_h") {
    for (double v : c.sweep.values) {
      SolverParams sp = base;
      if (c.sweep.parameter == "cfl") sp.cfl = v;
      else sp.cfm.c_h = v;
      add(stability_spectrum(p, sp, c.meshes.front()));
    }
  } else {
    for (int n : c.meshes) add(stability_spectrum(p, base, n));
  }
  const auto path = join(dir, "stability.csv");
  write_csv(path, t);
  return {path};
}

std::vector<std::string> longrun_command(const Config& c, const std::string& dir,
                                         std::ostream& log) {
  const auto r = stability_longrun(c.make_homogeneous(), c.solver_params(), c.meshes.front(),
                                   c.steps, c.seed, c.record_every);
  CsvTable t = make_table("longrun", c, {"step", "maxnorm"});
  for (const auto& [k, v] : r.history) t.add_row({static_cast<double>(k), v});
  t.comments.push_back("initial = " + format_number(r.initial));
  t.comments.push_back("final = " + format_number(r.final_norm));
  t.comments.push_back(std::string("bounded = ") + (r.bounded ? "true" : "false"));
  const auto path = join(dir, "longrun.csv");
  write_csv(path, t);
  log << "longrun: initial " << format_number(r.initial) << " final " << format_number(r.final_norm)
      << (r.bounded ? " bounded" : " unbounded") << '\n';
  if (r.overflow_step >= 0) throw InstabilityError(r.overflow_step);
  return {path};
}

std::vector<std::string> cond_command(const Config& c, const std::string& dir, std::ostream& log) {
  SweepKind kind = SweepKind::MeshSize;
  std::vector<double> values;
  if (c.sweep.parameter.empty() || c.sweep.parameter == "h") {
    if (c.sweep.parameter == "h") {
      values = c.sweep.values;
    } else {
      for (int n : c.meshes) values.push_back(n);
    }
  } else {
    kind = c.sweep.parameter == "cfl" ? SweepKind::Cfl : SweepKind::PenaltyWeight;
    values = c.sweep.values;
  }
  const auto r = cond_study(c.make_homogeneous(), c.solver_params(), kind, values, c.meshes.front());
  CsvTable t = make_table("cond", c, {to_string(kind), "kappa_max"});
  for (const auto& row : r.rows) t.add_row({row.value, row.kappa});
  t.comments.push_back("slope = " + format_number(r.slope));
  const auto path = join(dir, "cond.csv");
  write_csv(path, t);
  log << "cond: slope vs " << to_string(kind) << " " << format_number(r.slope) << '\n';
  return {path};
}

}  // namespace

const std::vector<std::string>& commands() {
  static const std::vector<std::string> list = {"run", "converge", "selfconverge",
                                                "stability", "longrun", "cond"};
  return list;
}

std::vector<std::string> execute(const std::string& command, const Config& config,
                                 const std::string& out_dir, std::ostream& log) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + out_dir + "': " + ec.message());
  if (command == "run") return run_command(config, out_dir, log);
  if (command == "converge") return converge_command(config, out_dir, log);
  if (command == "selfconverge") return selfconverge_command(config, out_dir, log);
  if (command == "stability") return stability_command(config, out_dir, log);
  if (command == "longrun") return longrun_command(config, out_dir, log);
  if (command == "cond") return cond_command(config, out_dir, log);
  std::string allowed;
  for (const auto& c : commands()) allowed += (allowed.empty() ? "" : ", ") + c;
  throw ConfigError("unknown command '" + command + "' (allowed: " + allowed + ")");
}

int dispatch(const std::string& command, const std::string& config_path,
             const std::optional<std::string>& out_dir, const std::optional<std::uint64_t>& seed,
             std::ostream& log, std::ostream& err) {
  try {
    Config c = parse_config(config_path);
    if (seed) {
      c.seed = *seed;
      c.provenance.push_back({"seed", std::to_string(*seed), "command line"});
    }
    execute(command, c, out_dir.value_or(c.output), log);
    return kOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigFailure;
  } catch (const InvalidArgument& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigFailure;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  }
}

}  // namespace hcfm::cli
