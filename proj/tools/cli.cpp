#include "cli.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "selfnorm/errors.hpp"
#include "selfnorm/exact_prefactor.hpp"
#include "selfnorm/exact_twopoint.hpp"
#include "selfnorm/geometry.hpp"
#include "selfnorm/legendre.hpp"
#include "selfnorm/shao_rate.hpp"
#include "selfnorm/simulate.hpp"

namespace selfnorm::cli {

using nlohmann::json;

namespace {

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ConfigError(where + "." + key + ": unknown field");
  }
}

const json& field(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key)) throw ConfigError(where + "." + key + ": missing field");
  return obj.at(key);
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError(where + ": expected a number");
  return v.get<double>();
}

long integer(const json& v, const std::string& where, long min) {
  if (!v.is_number_integer()) throw ConfigError(where + ": expected an integer");
  const long x = v.get<long>();
  if (x < min) throw ConfigError(where + ": must be at least " + std::to_string(min));
  return x;
}

std::vector<std::pair<double, double>> pairs(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) throw ConfigError(where + ": expected a non-empty array of [x, y] pairs");
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string w = where + "[" + std::to_string(i) + "]";
    if (!v[i].is_array() || v[i].size() != 2) throw ConfigError(w + ": expected [x, y]");
    out.emplace_back(number(v[i][0], w + "[0]"), number(v[i][1], w + "[1]"));
  }
  return out;
}

constexpr double kInfinity = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void require(bool present, const char* what) {
  if (!present) throw ConfigError(std::string(what) + ": missing field");
}

json options(const RunConfig& cfg, std::initializer_list<const char*> allowed) {
  only_keys(cfg.options, "options", allowed);
  return cfg.options;
}

}  // namespace

ScalarDistribution parse_distribution(const json& spec, const std::string& where) {
  if (!spec.is_object()) throw ConfigError(where + ": expected an object");
  const json& fam = field(spec, where, "family");
  if (!fam.is_string()) throw ConfigError(where + ".family: expected a string");
  const std::string f = fam.get<std::string>();
  try {
    if (f == "two_point") {
      only_keys(spec, where, {"family", "a", "b", "q"});
      return ScalarDistribution::two_point(number(field(spec, where, "a"), where + ".a"),
                                           number(field(spec, where, "b"), where + ".b"),
                                           number(field(spec, where, "q"), where + ".q"));
    }
    if (f == "finite") {
      only_keys(spec, where, {"family", "atoms"});
      std::vector<Atom> atoms;
      for (const auto& [x, p] : pairs(field(spec, where, "atoms"), where + ".atoms")) atoms.push_back({x, p});
      return ScalarDistribution::finite(atoms);
    }
    if (f == "gaussian") {
      only_keys(spec, where, {"family", "mu", "sigma"});
      return ScalarDistribution::gaussian(number(field(spec, where, "mu"), where + ".mu"),
                                          number(field(spec, where, "sigma"), where + ".sigma"));
    }
    if (f == "pareto") {
      only_keys(spec, where, {"family", "scale", "tail_index", "shift"});
      const double shift = spec.contains("shift") ? number(spec["shift"], where + ".shift") : 0.0;
      return ScalarDistribution::pareto(number(field(spec, where, "scale"), where + ".scale"),
                                        number(field(spec, where, "tail_index"), where + ".tail_index"), shift);
    }
  } catch (const PreconditionError& e) {
    throw ConfigError(where + ": " + e.what());
  }
  throw ConfigError(where + ".family: unknown family '" + f + "'");
}

Normalizer parse_normalizer(const json& spec, std::optional<double>* p) {
  only_keys(spec, "normalizer", {"p", "tabulated"});
  if (spec.contains("p") == spec.contains("tabulated"))
    throw ConfigError("normalizer: give exactly one of 'p' or 'tabulated'");
  try {
    if (spec.contains("p")) {
      const double v = number(spec["p"], "normalizer.p");
      if (p) *p = v;
      return Normalizer::power_law(v);
    }
    return Normalizer::tabulated(pairs(spec["tabulated"], "normalizer.tabulated"));
  } catch (const PreconditionError& e) {
    throw ConfigError(std::string("normalizer: ") + e.what());
  }
}

RunConfig parse_config(const json& doc) {
  only_keys(doc, "config", {"version", "distribution", "normalizer", "z", "n", "trials", "seed", "threads",
                            "options", "output"});
  const json& version = field(doc, "config", "version");
  if (!version.is_number_integer() || version.get<long>() != 1)
    throw ConfigError("config.version: only version 1 is supported");
  RunConfig cfg;
  if (doc.contains("distribution")) {
    cfg.dist = parse_distribution(doc["distribution"]);
    cfg.dist_spec = doc["distribution"];
  }
  if (doc.contains("normalizer")) cfg.norm = parse_normalizer(doc["normalizer"], &cfg.p);
  if (doc.contains("z")) {
    const json& z = doc["z"];
    if (z.is_array()) {
      if (z.empty()) throw ConfigError("config.z: empty list");
      for (std::size_t i = 0; i < z.size(); ++i) cfg.z.push_back(number(z[i], "config.z[" + std::to_string(i) + "]"));
    } else {
      cfg.z.push_back(number(z, "config.z"));
    }
  }
  if (doc.contains("n")) {
    const json& n = doc["n"];
    if (n.is_array()) {
      if (n.empty()) throw ConfigError("config.n: empty list");
      for (std::size_t i = 0; i < n.size(); ++i) cfg.n.push_back(integer(n[i], "config.n[" + std::to_string(i) + "]", 1));
    } else {
      cfg.n.push_back(integer(n, "config.n", 1));
    }
  }
  if (doc.contains("trials")) cfg.trials = integer(doc["trials"], "config.trials", 1);
  if (doc.contains("seed")) cfg.seed = static_cast<std::uint64_t>(integer(doc["seed"], "config.seed", 0));
  if (doc.contains("threads")) cfg.threads = static_cast<unsigned>(integer(doc["threads"], "config.threads", 0));
  if (doc.contains("options")) {
    if (!doc["options"].is_object()) throw ConfigError("config.options: expected an object");
    cfg.options = doc["options"];
  }
  if (doc.contains("output")) {
    if (!doc["output"].is_string()) throw ConfigError("config.output: expected a string");
    cfg.output = doc["output"].get<std::string>();
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: malformed JSON: " + std::string(e.what()));
  }
  return parse_config(doc);
}

std::string cmd_rate(const RunConfig& cfg) {
  options(cfg, {});
  require(cfg.dist.has_value(), "distribution");
  require(cfg.norm.has_value(), "normalizer");
  require(!cfg.z.empty(), "z");
  json out;
  out["version"] = 1;
  out["command"] = "rate";
  out["distribution"] = cfg.dist->describe();
  out["results"] = json::array();
  for (double z : cfg.z) out["results"].push_back(json::parse(to_json(rate_report(*cfg.dist, *cfg.norm, z))));
  return out.dump(2) + "\n";
}

std::string cmd_exact(const RunConfig& cfg) {
  const json opt = options(cfg, {"lattice"});
  require(cfg.dist.has_value(), "distribution");
  require(cfg.norm.has_value(), "normalizer");
  require(!cfg.z.empty(), "z");
  require(!cfg.n.empty(), "n");
  if (cfg.dist_spec.value("family", "") != "two_point")
    throw ConfigError("distribution.family: the exact command needs a two_point law");
  LatticeRule rule = LatticeRule::per_n;
  if (opt.contains("lattice")) {
    const json& l = opt["lattice"];
    if (l == "per_n") rule = LatticeRule::per_n;
    else if (l == "literal") rule = LatticeRule::literal_ceiling;
    else throw ConfigError("options.lattice: expected 'per_n' or 'literal'");
  }
  const double a = cfg.dist_spec["a"].get<double>(), b = cfg.dist_spec["b"].get<double>(),
               q = cfg.dist_spec["q"].get<double>();
  std::ostringstream os;
  os << "z,n,case,alpha_upper,alpha_lower,log_exact,log_asymptotic,exact,asymptotic,ratio\n";
  for (double z : cfg.z)
    for (long n : cfg.n) {
      const BinomialAsymptotics r = asymptotic_prob(a, b, q, *cfg.norm, z, n, rule);
      os << fmt(z) << ',' << n << ',' << to_string(r.case_tag) << ',' << fmt(r.alpha_upper) << ','
         << fmt(r.alpha_lower) << ',' << fmt(r.log_exact) << ',' << fmt(r.log_total) << ',' << fmt(r.exact) << ','
         << fmt(r.total) << ',' << fmt(r.ratio) << '\n';
    }
  return os.str();
}

std::string cmd_prefactor(const RunConfig& cfg) {
  options(cfg, {});
  require(cfg.dist.has_value(), "distribution");
  require(cfg.norm.has_value(), "normalizer");
  require(!cfg.z.empty(), "z");
  require(!cfg.n.empty(), "n");
  json out;
  out["version"] = 1;
  out["command"] = "prefactor";
  out["distribution"] = cfg.dist->describe();
  out["results"] = json::array();
  for (double z : cfg.z) {
    const PrefactorReport rep = prefactor_report(*cfg.dist, *cfg.norm, z);
    for (long n : cfg.n) out["results"].push_back(json::parse(to_json(asymptotic_estimate(rep, n))));
  }
  return out.dump(2) + "\n";
}

std::string cmd_simulate(const RunConfig& cfg) {
  const json opt = options(cfg, {"method"});
  require(cfg.dist.has_value(), "distribution");
  require(cfg.norm.has_value(), "normalizer");
  require(!cfg.z.empty(), "z");
  require(!cfg.n.empty(), "n");
  std::string method = "importance";
  if (opt.contains("method")) {
    if (!opt["method"].is_string()) throw ConfigError("options.method: expected a string");
    method = opt["method"].get<std::string>();
    if (method != "direct" && method != "importance" && method != "both")
      throw ConfigError("options.method: expected 'direct', 'importance' or 'both'");
  }
  const McOptions mc{cfg.trials, cfg.seed, cfg.threads};
  std::ostringstream os;
  os << "z," << mc_csv_header() << '\n';
  for (double z : cfg.z)
    for (long n : cfg.n) {
      if (method != "importance") os << fmt(z) << ',' << mc_csv_row(direct_mc(*cfg.dist, *cfg.norm, z, n, mc)) << '\n';
      if (method != "direct") os << fmt(z) << ',' << mc_csv_row(importance_mc(*cfg.dist, *cfg.norm, z, n, mc)) << '\n';
    }
  return os.str();
}

std::string cmd_contour(const RunConfig& cfg) {
  const json opt = options(cfg, {"x1", "x2", "n1", "n2", "boundary_points", "y_max"});
  require(cfg.dist.has_value(), "distribution");
  require(cfg.norm.has_value(), "normalizer");
  auto interval = [&](const char* key, Interval dflt) {
    if (!opt.contains(key)) return dflt;
    const auto& v = opt[key];
    const std::string w = std::string("options.") + key;
    if (!v.is_array() || v.size() != 2) throw ConfigError(w + ": expected [lo, hi]");
    const Interval iv{number(v[0], w + "[0]"), number(v[1], w + "[1]")};
    if (!(iv.hi > iv.lo)) throw ConfigError(w + ": need lo < hi");
    return iv;
  };
  GridSpec spec;
  spec.x1 = interval("x1", {-1.5, 2.0});
  spec.x2 = interval("x2", {0.0, 4.0});
  spec.n1 = opt.contains("n1") ? static_cast<int>(integer(opt["n1"], "options.n1", 1)) : 71;
  spec.n2 = opt.contains("n2") ? static_cast<int>(integer(opt["n2"], "options.n2", 1)) : 81;
  const long nb = opt.contains("boundary_points") ? integer(opt["boundary_points"], "options.boundary_points", 2) : 201;
  const double y_max = opt.contains("y_max") ? number(opt["y_max"], "options.y_max") : 2.0;

  const ContourGrid grid = contour(*cfg.dist, *cfg.norm, spec, EvalOrder::row_major, std::max(1u, cfg.threads));
  std::ostringstream os;
  os << "kind,z,y,x1,x2,rate\n";
  for (int i2 = 0; i2 < spec.n2; ++i2)
    for (int i1 = 0; i1 < spec.n1; ++i1) {
      const RatePoint& c = grid.at(i1, i2);
      os << "grid,,," << fmt(grid.x1s[i1]) << ',' << fmt(grid.x2s[i2]) << ','
         << (c.converged ? fmt(c.rate.value()) : "inf") << '\n';
    }
  for (double z : cfg.z) {
    const BoundaryChart chart(z, *cfg.norm);
    NewtonOptions nopts;
    for (long k = 0; k < nb; ++k) {
      const double y = y_max * static_cast<double>(k) / static_cast<double>(nb - 1);
      const Eigen::Vector2d pt = chart.point(y);
      double rate = kInfinity;
      if (y == 0.0) {
        const double p0 = cfg.dist->prob_zero();
        rate = p0 > 0 ? -std::log(p0) : kInfinity;
      } else {
        const RatePoint r = rate_at(*cfg.dist, *cfg.norm, pt, nopts);
        if (r.converged) {
          rate = r.rate.value();
          nopts.start = r.tilt;
        }
      }
      os << "boundary," << fmt(z) << ',' << fmt(y) << ',' << fmt(pt(0)) << ',' << fmt(pt(1)) << ',' << fmt(rate)
         << '\n';
    }
  }
  return os.str();
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Large deviations of self-normalized sums"};
  app.require_subcommand(1);
  std::string config, out_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  using Command = std::string (*)(const RunConfig&);
  struct Entry {
    const char* name;
    const char* help;
    Command fn;
  };
  const std::vector<Entry> commands{
      {"rate", "log-rate J(z) by all applicable routes (JSON)", cmd_rate},
      {"exact", "exact two-point probabilities vs asymptotics (CSV)", cmd_exact},
      {"prefactor", "dominating point, sigma^2 and asymptotic estimate (JSON)", cmd_prefactor},
      {"simulate", "direct and tilted Monte Carlo (CSV)", cmd_simulate},
      {"contour", "rate function grid and target-set boundary (CSV)", cmd_contour}};
  for (const auto& [name, help, fn] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "JSON config file")->required();
    sub->add_option("--out", out_path, "output file (default: stdout)");
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--threads", threads, "override the config thread count");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "selfnorm: " << e.what() << '\n';
    return config_error;
  }

  try {
    RunConfig cfg = load_config(config);
    if (seed) cfg.seed = *seed;
    if (threads) cfg.threads = *threads;
    if (!out_path.empty()) cfg.output = out_path;
    std::string text;
    for (const auto& [name, help, fn] : commands)
      if (app.got_subcommand(name)) text = fn(cfg);
    if (cfg.output.empty()) {
      out << text;
    } else {
      std::ofstream file(cfg.output, std::ios::binary);
      if (!file) throw ConfigError("cannot write output file '" + cfg.output + "'");
      file << text;
    }
    return ok;
  } catch (const ConfigError& e) {
    err << "selfnorm: config error: " << e.what() << '\n';
    return config_error;
  } catch (const PreconditionError& e) {
    err << "selfnorm: precondition failed: " << e.what() << '\n';
    return precondition_error;
  } catch (const NumericFailure& e) {
    err << "selfnorm: numeric failure: " << e.what() << '\n';
    return numeric_error;
  } catch (const std::exception& e) {
    err << "selfnorm: internal error: " << e.what() << '\n';
    return numeric_error;
  }
}

}  // namespace selfnorm::cli
