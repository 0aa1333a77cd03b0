#include "hcfm_cli/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "hermite_cfm/error.hpp"
#include "json.hpp"

namespace hcfm::cli {

namespace {

using nlohmann::json;

constexpr const char* kLiterature = "literature";
constexpr const char* kDefault = "project default";
constexpr const char* kConfig = "config";

const std::set<std::string> kTopKeys = {
    "dimension", "domain", "m", "k", "c_h", "beta", "cfl", "quadrature_points", "q", "problem",
    "material", "bc", "t0", "tf", "meshes", "reference", "seed", "output", "steps",
    "record_every", "sweep"};

const char* kProblems = "standing-1d, standing-2d, gaussian, manufactured-varcoef, zero";

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

template <class T>
T get(const json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("invalid value for '" + key + "': " + e.what());
  }
}

void require(const json& j, const std::string& key) {
  if (!j.contains(key)) throw ConfigError("missing required key '" + key + "'");
}

bool aligned(double length, int n) {
  const double c = length * n;
  return std::abs(c - std::round(c)) <= 1e-8 * std::max(1.0, std::abs(c)) && std::round(c) >= 1;
}

DomainConfig default_domain(const std::string& problem, int dim) {
  DomainConfig d;
  if (problem == "standing-1d" || (problem == "zero" && dim == 1)) {
    d.type = "interval";
    d.bounds = {1.0 / 3.0, 4.0 / 3.0, 0.0, 0.0};
  } else if (problem == "standing-2d") {
    d.type = "rectangle";
    d.bounds = {1.0 / 3.0, 4.0 / 3.0, 1.0 / 6.0, 7.0 / 6.0};
  } else if (problem == "manufactured-varcoef") {
    d.type = "cross";
    d.bounds = {0.0, 1.0, 0.0, 1.0};
  } else {
    d.type = "rectangle";
    d.bounds = {0.0, 1.0, 0.0, 1.0};
  }
  return d;
}

int problem_dim(const std::string& problem, int requested) {
  if (problem == "standing-1d") return 1;
  if (problem == "zero") return requested;
  return 2;
}

Domain build_domain(const DomainConfig& d) {
  const auto& b = d.bounds;
  if (d.type == "interval") return Domain::interval(b[0], b[1]);
  if (d.type == "rectangle") return Domain::rectangle(b[0], b[1], b[2], b[3]);
  return Domain::cross(b[0], b[1], b[2], b[3], d.arm_lo, d.arm_hi);
}

}  // namespace

Config parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!kTopKeys.count(key)) throw ConfigError("unknown config key '" + key + "'");

  Config c;
  auto note = [&c](const std::string& key, const std::string& value, const char* origin) {
    c.provenance.push_back({key, value, origin});
  };

  require(j, "dimension");
  require(j, "problem");
  require(j, "m");
  require(j, "meshes");

  c.dimension = get<int>(j, "dimension");
  if (c.dimension != 1 && c.dimension != 2) throw ConfigError("dimension must be 1 or 2");
  note("dimension", std::to_string(c.dimension), kConfig);

  // problem
  const json& pj = j.at("problem");
  if (pj.is_string()) {
    c.problem.name = pj.get<std::string>();
  } else if (pj.is_object()) {
    require(pj, "name");
    c.problem.name = get<std::string>(pj, "name");
  } else {
    throw ConfigError("'problem' must be a name or an object");
  }
  const std::set<std::string> problems = {"standing-1d", "standing-2d", "gaussian",
                                          "manufactured-varcoef", "zero"};
  if (!problems.count(c.problem.name))
    throw ConfigError("unknown problem '" + c.problem.name + "' (allowed: " + kProblems + ")");
  if (problem_dim(c.problem.name, c.dimension) != c.dimension)
    throw ConfigError("problem '" + c.problem.name + "' requires dimension " +
                      std::to_string(problem_dim(c.problem.name, c.dimension)));
  note("problem", c.problem.name, kConfig);

  const bool has_omega = pj.is_object() && pj.contains("omega");
  c.problem.omega = has_omega ? get<double>(pj, "omega")
                              : (c.problem.name == "standing-1d" ? 10.0 : 5.0);
  if (c.problem.name == "standing-1d" || c.problem.name == "standing-2d") {
    if (!(c.problem.omega > 0.0)) throw ConfigError("omega must be positive");
    note("omega", fmt(c.problem.omega), has_omega ? kConfig : kDefault);
  }
  if (c.problem.name == "gaussian") {
    const bool has_sigma = pj.is_object() && pj.contains("sigma");
    if (has_sigma) c.problem.sigma = get<double>(pj, "sigma");
    if (!(c.problem.sigma > 0.0)) throw ConfigError("sigma must be positive");
    note("sigma", fmt(c.problem.sigma), has_sigma ? kConfig : kLiterature);
    const bool has_center = pj.is_object() && pj.contains("center");
    if (has_center) c.problem.center = get<std::array<double, 2>>(pj, "center");
    note("center", fmt(c.problem.center[0]) + " " + fmt(c.problem.center[1]),
         has_center ? kConfig : kDefault);
  }

  const ProblemSpec base = hcfm::make_problem(c.problem.name, c.dimension, BcKind::PEC, false,
                                              c.problem.omega, c.problem.sigma);

  // domain
  c.domain = default_domain(c.problem.name, c.dimension);
  if (j.contains("domain")) {
    const json& dj = j.at("domain");
    if (!dj.is_object()) throw ConfigError("'domain' must be an object");
    require(dj, "type");
    c.domain.type = get<std::string>(dj, "type");
    if (c.domain.type != "interval" && c.domain.type != "rectangle" && c.domain.type != "cross")
      throw ConfigError("unknown domain type '" + c.domain.type +
                        "' (allowed: interval, rectangle, cross)");
    if ((c.domain.type == "interval") != (c.dimension == 1))
      throw ConfigError("domain type '" + c.domain.type + "' does not match dimension");
    if (dj.contains("bounds")) {
      const auto b = get<std::vector<double>>(dj, "bounds");
      const std::size_t want = c.dimension == 1 ? 2 : 4;
      if (b.size() != want)
        throw ConfigError("domain bounds need " + std::to_string(want) + " numbers");
      std::copy(b.begin(), b.end(), c.domain.bounds.begin());
    }
    if (dj.contains("arms")) {
      const auto a = get<std::vector<double>>(dj, "arms");
      if (a.size() != 2) throw ConfigError("cross arms need two fractions");
      c.domain.arm_lo = a[0];
      c.domain.arm_hi = a[1];
    }
    note("domain", c.domain.type, kConfig);
  } else {
    note("domain", c.domain.type, kDefault);
  }
  const auto& b = c.domain.bounds;
  if (!(b[1] > b[0]) || (c.dimension == 2 && !(b[3] > b[2])))
    throw ConfigError("domain bounds must be increasing");
  if (c.domain.type == "cross" && !(0.0 < c.domain.arm_lo && c.domain.arm_lo < c.domain.arm_hi &&
                                    c.domain.arm_hi < 1.0))
    throw ConfigError("cross arm fractions must satisfy 0 < lo < hi < 1");

  // discretization
  c.m = get<int>(j, "m");
  if (c.m < 1) throw ConfigError("m must be at least 1");
  note("m", std::to_string(c.m), kConfig);

  if (j.contains("k")) {
    c.k = get<int>(j, "k");
    note("k", std::to_string(c.k), kConfig);
  } else {
    c.k = 2 * c.m;
    note("k", std::to_string(c.k), kLiterature);
  }
  if (c.k < 2 * c.m) throw ConfigError("k >= 2m required (k=" + std::to_string(c.k) +
                                       ", m=" + std::to_string(c.m) + ")");

  if (j.contains("c_h")) {
    c.c_h = get<double>(j, "c_h");
    note("c_h", fmt(c.c_h), kConfig);
  } else {
    note("c_h", fmt(c.c_h), kLiterature);
  }
  if (!(c.c_h > 0.0 && c.c_h <= 1.0)) throw ConfigError("c_h must lie in (0, 1]");

  if (j.contains("beta")) {
    c.beta = get<double>(j, "beta");
    note("beta", fmt(c.beta), kConfig);
  } else {
    note("beta", fmt(c.beta), kDefault);
  }
  if (!(c.beta > 0.0)) throw ConfigError("beta must be positive");

  if (j.contains("cfl")) {
    c.cfl = get<double>(j, "cfl");
    note("cfl", fmt(c.cfl), kConfig);
  } else {
    if (c.m > 5) throw ConfigError("no default CFL for m > 5; set 'cfl'");
    c.cfl = default_cfl(c.dimension, c.m);
    note("cfl", fmt(c.cfl), kLiterature);
  }
  if (!(c.cfl > 0.0 && c.cfl < 1.0)) throw ConfigError("cfl must lie in (0, 1)");

  if (j.contains("quadrature_points")) {
    c.quad_points = get<int>(j, "quadrature_points");
    if (c.quad_points < 1) throw ConfigError("quadrature_points must be positive");
    note("quadrature_points", std::to_string(c.quad_points), kConfig);
  } else {
    c.quad_points = c.k + 3;
    note("quadrature_points", std::to_string(c.quad_points), kDefault);
  }

  if (j.contains("q")) {
    c.q = get<int>(j, "q");
    if (c.q < 1) throw ConfigError("q must be positive");
    note("q", std::to_string(c.q), kConfig);
  } else {
    c.q = c.dimension * (2 * c.m + 1);
    note("q", std::to_string(c.q), kDefault);
  }

  // material
  if (j.contains("material")) {
    const json& mj = j.at("material");
    if (mj.is_string()) {
      c.material.type = mj.get<std::string>();
    } else if (mj.is_object()) {
      require(mj, "type");
      c.material.type = get<std::string>(mj, "type");
      if (mj.contains("mu")) c.material.mu = get<double>(mj, "mu");
      if (mj.contains("eps")) c.material.eps = get<double>(mj, "eps");
    } else {
      throw ConfigError("'material' must be a name or an object");
    }
    if (c.material.type != "constant" && c.material.type != "varcoef")
      throw ConfigError("unknown material '" + c.material.type +
                        "' (allowed: constant, varcoef)");
    if (c.material.type == "constant" && !(c.material.mu > 0.0 && c.material.eps > 0.0))
      throw ConfigError("material mu and eps must be positive");
    note("material", c.material.type, kConfig);
  } else {
    c.material.type = c.problem.name == "manufactured-varcoef" ? "varcoef" : "constant";
    note("material", c.material.type, kDefault);
  }
  if (base.exact) {
    const bool matches = c.problem.name == "manufactured-varcoef"
                             ? c.material.type == "varcoef"
                             : (c.material.type == "constant" && c.material.mu == 1.0 &&
                                c.material.eps == 1.0);
    if (!matches)
      throw ConfigError("problem '" + c.problem.name +
                        "' has an exact solution tied to its own material");
  }
  if (c.material.type == "varcoef" && c.dimension != 2)
    throw ConfigError("varcoef material requires dimension 2");

  // boundary condition
  if (j.contains("bc")) {
    const auto name = get<std::string>(j, "bc");
    try {
      c.bc = parse_bc_kind(name);
    } catch (const InvalidArgument&) {
      throw ConfigError("unknown bc '" + name + "' (allowed: pec, pmc, impedance)");
    }
    note("bc", to_string(c.bc), kConfig);
  } else {
    c.bc = c.problem.name == "manufactured-varcoef" ? BcKind::Impedance : BcKind::PEC;
    note("bc", to_string(c.bc), kDefault);
  }

  // time window
  c.t0 = j.contains("t0") ? get<double>(j, "t0") : base.t0;
  c.tf = j.contains("tf") ? get<double>(j, "tf") : base.tf;
  note("t0", fmt(c.t0), j.contains("t0") ? kConfig : kDefault);
  note("tf", fmt(c.tf), j.contains("tf") ? kConfig : kDefault);
  if (!(c.tf > c.t0)) throw ConfigError("tf must exceed t0");

  // meshes
  c.meshes = get<std::vector<int>>(j, "meshes");
  if (c.meshes.empty()) throw ConfigError("'meshes' must not be empty");
  for (int n : c.meshes) {
    if (n < 1) throw ConfigError("mesh resolutions must be positive");
    bool ok = aligned(b[1] - b[0], n) && (c.dimension == 1 || aligned(b[3] - b[2], n));
    if (ok && c.domain.type == "cross") {
      ok = aligned(c.domain.arm_lo * (b[1] - b[0]), n) &&
           aligned(c.domain.arm_hi * (b[1] - b[0]), n) &&
           aligned(c.domain.arm_lo * (b[3] - b[2]), n) &&
           aligned(c.domain.arm_hi * (b[3] - b[2]), n);
    }
    if (!ok)
      throw ConfigError("mesh " + std::to_string(n) +
                        " does not put every boundary line on a primal grid line");
  }
  {
    std::string list;
    for (int n : c.meshes) list += (list.empty() ? "" : " ") + std::to_string(n);
    note("meshes", list, kConfig);
  }
  if (j.contains("reference")) {
    c.reference = get<int>(j, "reference");
    for (int n : c.meshes)
      if (c.reference <= n || c.reference % n != 0)
        throw ConfigError("reference " + std::to_string(c.reference) +
                          " must be a proper multiple of every mesh");
    note("reference", std::to_string(c.reference), kConfig);
  }

  if (j.contains("seed")) {
    c.seed = get<std::uint64_t>(j, "seed");
    note("seed", std::to_string(c.seed), kConfig);
  } else {
    note("seed", std::to_string(c.seed), kDefault);
  }
  if (j.contains("output")) c.output = get<std::string>(j, "output");
  if (j.contains("steps")) {
    c.steps = get<std::size_t>(j, "steps");
    note("steps", std::to_string(c.steps), kConfig);
  }
  if (j.contains("record_every")) {
    c.record_every = get<std::size_t>(j, "record_every");
    if (c.record_every == 0) throw ConfigError("record_every must be positive");
  }
  if (j.contains("sweep")) {
    const json& sj = j.at("sweep");
    require(sj, "parameter");
    require(sj, "values");
    c.sweep.parameter = get<std::string>(sj, "parameter");
    c.sweep.values = get<std::vector<double>>(sj, "values");
    if (c.sweep.parameter != "h" && c.sweep.parameter != "cfl" && c.sweep.parameter != "c_h")
      throw ConfigError("unknown sweep parameter '" + c.sweep.parameter +
                        "' (allowed: h, cfl, c_h)");
    if (c.sweep.values.empty()) throw ConfigError("sweep values must not be empty");
    for (double v : c.sweep.values) {
      if (c.sweep.parameter == "cfl" && !(v > 0.0 && v < 1.0))
        throw ConfigError("sweep cfl values must lie in (0, 1)");
      if (c.sweep.parameter == "c_h" && !(v > 0.0 && v <= 1.0))
        throw ConfigError("sweep c_h values must lie in (0, 1]");
    }
    note("sweep", c.sweep.parameter, kConfig);
  }
  return c;
}

Config parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

ProblemSpec Config::make_problem() const {
  ProblemSpec p;
  if (problem.name == "gaussian") {
    p = gaussian_pulse(problem.sigma, false, problem.center[0], problem.center[1]);
  } else {
    p = hcfm::make_problem(problem.name, dimension, bc, false, problem.omega, problem.sigma);
  }
  p.domain = build_domain(domain);
  p.bc = bc;
  p.t0 = t0;
  p.tf = tf;
  if (material.type == "varcoef") {
    if (problem.name != "manufactured-varcoef") p.material = manufactured_varcoef().material;
  } else {
    p.material = Material::constant(material.mu, material.eps);
  }
  return p;
}

ProblemSpec Config::make_homogeneous() const {
  ProblemSpec p = zero_problem(dimension, bc, false);
  p.domain = build_domain(domain);
  p.t0 = t0;
  p.tf = tf;
  if (material.type == "varcoef")
    p.material = manufactured_varcoef().material;
  else
    p.material = Material::constant(material.mu, material.eps);
  return p;
}

SolverParams Config::solver_params() const {
  SolverParams s;
  s.m = m;
  s.q = q;
  s.cfl = cfl;
  s.cfm.k = k;
  s.cfm.c_h = c_h;
  s.cfm.beta = beta;
  s.cfm.quad_points = quad_points;
  return s;
}

}  // namespace hcfm::cli
