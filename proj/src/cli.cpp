#include "hgm/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <chrono>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "hgm/errors.hpp"
#include "hgm/families.hpp"
#include "hgm/integrator.hpp"
#include "hgm/laplace.hpp"
#include "hgm/oracle.hpp"
#include "hgm/selftest.hpp"

namespace hgm {

namespace {

using ordered_json = nlohmann::ordered_json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

struct ParamFlags {
  std::vector<double> sigma2;
  std::vector<double> mu;
  std::string params_file;
  std::string family;
  int dim = 0;
  std::string mean = "zero";
};

struct SolverFlags {
  double r0 = SolveOptions{}.r0;
  double switch_radius = SolveOptions{}.switch_radius;
  double rtol = SolveOptions{}.rel_tol;
  double atol = SolveOptions{}.abs_tol;
  double rescale_high = SolveOptions{}.rescale_high;
  double far = 0.0;
  std::size_t max_steps = SolveOptions{}.max_steps;
  bool no_timing = false;

  SolveOptions options() const {
    SolveOptions o;
    o.r0 = r0;
    o.switch_radius = switch_radius;
    o.rel_tol = rtol;
    o.abs_tol = atol;
    o.rescale_high = rescale_high;
    o.far_radius = far;
    o.max_steps = max_steps;
    return o;
  }
};

void add_param_flags(CLI::App* sub, ParamFlags& p) {
  sub->add_option("--sigma2", p.sigma2, "Variances, comma separated")->delimiter(',');
  sub->add_option("--mu", p.mu, "Means, comma separated (default all zero)")->delimiter(',');
  sub->add_option("--params", p.params_file, "JSON file with sigma2 and mu arrays");
  sub->add_option("--family", p.family, "Parameter family instead of explicit lists")
      ->check(CLI::IsMember({"hirotsu1", "hirotsu2", "anderson-darling", "chi", "exp-product"}));
  sub->add_option("--dim", p.dim, "Dimension for --family");
  sub->add_option("--mean", p.mean, "Mean pattern for --family")->check(CLI::IsMember({"zero", "ramp"}));
}

void add_solver_flags(CLI::App* sub, SolverFlags& s) {
  sub->add_option("--r0", s.r0, "Initial radius")->capture_default_str();
  sub->add_option("--switch", s.switch_radius, "Radius where the gauge phase starts")->capture_default_str();
  sub->add_option("--rtol", s.rtol, "Relative local error tolerance")->capture_default_str();
  sub->add_option("--atol", s.atol, "Absolute local error tolerance (relative to the state norm)")
      ->capture_default_str();
  sub->add_option("--rescale-high", s.rescale_high, "Mantissa ceiling")->capture_default_str();
  sub->add_option("--far", s.far, "Far radius of the tail integration (0: max(40, 2R))");
  sub->add_option("--max-steps", s.max_steps, "Step budget")->capture_default_str();
  sub->add_flag("--no-timing", s.no_timing, "Report wall time as 0 for reproducible output");
}

ModelParams resolve_params(const ParamFlags& f) {
  const int sources = !f.sigma2.empty() + !f.params_file.empty() + !f.family.empty();
  if (sources != 1) throw UsageError("give exactly one of --sigma2, --params, --family");
  ModelParams p;
  if (!f.family.empty()) {
    if (f.dim < 1) throw UsageError("--family needs --dim >= 1");
    return make_family(*parse_family(f.family), f.dim, *parse_mean_pattern(f.mean));
  }
  if (!f.params_file.empty()) {
    std::ifstream in(f.params_file);
    if (!in) throw UsageError("cannot open " + f.params_file);
    try {
      const auto j = nlohmann::json::parse(in);
      p.sigma2 = j.at("sigma2").get<std::vector<double>>();
      p.mu = j.contains("mu") ? j.at("mu").get<std::vector<double>>() : std::vector<double>{};
    } catch (const nlohmann::json::exception& e) {
      throw UsageError(std::string("bad parameter file: ") + e.what());
    }
  } else {
    p.sigma2 = f.sigma2;
    p.mu = f.mu;
  }
  if (p.mu.empty()) p.mu.assign(p.sigma2.size(), 0.0);
  if (p.mu.size() != p.sigma2.size()) throw UsageError("sigma2 and mu must have the same length");
  return p;
}

std::vector<int> parse_dims(const std::string& spec) {
  std::vector<long> parts;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ':')) {
    std::size_t used = 0;
    long v = 0;
    try {
      v = std::stol(tok, &used);
    } catch (const std::exception&) {
      throw UsageError("bad --dims: " + spec);
    }
    if (used != tok.size()) throw UsageError("bad --dims: " + spec);
    parts.push_back(v);
  }
  if (parts.empty() || parts.size() > 3) throw UsageError("--dims expects a:b[:step]");
  const long a = parts[0];
  const long b = parts.size() > 1 ? parts[1] : a;
  const long step = parts.size() > 2 ? parts[2] : 1;
  if (a < 1 || b < a || step < 1) throw UsageError("bad --dims range: " + spec);
  std::vector<int> dims;
  for (long d = a; d <= b; d += step) dims.push_back(static_cast<int>(d));
  return dims;
}

double timing(const SolverFlags& s, double t) { return s.no_timing ? 0.0 : t; }

int cmd_prob(const ParamFlags& pf, const SolverFlags& sf, double R, const std::string& format, std::ostream& out) {
  const ModelParams p = resolve_params(pf);
  const BallProbResult res = solve_ball_probability(p, R, sf.options());
  const double wall = timing(sf, res.stats.wall_time_s);
  if (format == "csv") {
    out << "p,one_minus_p,steps,rescales,wall_time_s\n"
        << num(res.p) << ',' << num(res.one_minus_p) << ',' << res.stats.steps << ',' << res.stats.rescales << ','
        << num(wall) << '\n';
  } else {
    ordered_json j;
    j["p"] = res.p;
    j["one_minus_p"] = res.one_minus_p;
    j["steps"] = res.stats.steps;
    j["rescales"] = res.stats.rescales;
    j["wall_time_s"] = wall;
    out << j.dump() << '\n';
  }
  return kExitOk;
}

int cmd_cdf(const ParamFlags& pf, const SolverFlags& sf, double rmax, int points, std::ostream& out) {
  if (points < 1) throw UsageError("--points must be >= 1");
  const ModelParams p = resolve_params(pf);
  SolveOptions o = sf.options();
  if (!(rmax >= o.r0)) throw UsageError("--rmax must be >= r0");
  // A grid collapsed onto r0 is reported once.
  if (rmax == o.r0) points = 1;
  for (int k = 1; k <= points; ++k) o.checkpoint_radii.push_back(std::max(o.r0, rmax * k / points));
  o.checkpoint_radii.back() = rmax;
  o.complementary_tail = false;
  const BallProbResult res = solve_ball_probability(p, rmax, o);
  out << "r,G\n";
  for (const auto& c : res.checkpoints) out << num(c.r) << ',' << num(c.G) << '\n';
  return kExitOk;
}

int cmd_laplace_ratio(const ParamFlags& pf, const SolverFlags& sf, std::vector<double> radii, double tie_tol,
                      std::ostream& out) {
  const ModelParams p = resolve_params(pf);
  const NaturalParams np = to_natural(p);
  std::sort(radii.begin(), radii.end());
  if (radii.empty() || radii.front() <= 0.0) throw UsageError("--radii must be positive");
  const auto trace = solve_f_trace(np, radii, sf.options());
  const std::size_t d = np.dim();
  out << "r,component,hgm_over_asymptotic\n";
  for (const auto& tp : trace) {
    LaplaceEval le;
    try {
      le = asymptotic_eval(np, tp.r, tie_tol);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::GroupSeparationTooSmall) throw;
      out << num(tp.r) << ",diagnostic," << e.name() << '\n';
      continue;
    }
    out << num(tp.r) << ",f," << num(std::exp(tp.f.log_abs() - le.log_f)) << '\n';
    auto ratio = [&](double mant, double asym_ratio) {
      if (asym_ratio == 0.0) return mant == 0.0 ? std::nan("") : std::copysign(INFINITY, mant);
      const double sign = (mant < 0) != (asym_ratio < 0) ? -1.0 : 1.0;
      return sign * std::exp(std::log(std::abs(mant)) + tp.F.log_scale - le.log_f - std::log(std::abs(asym_ratio)));
    };
    // Rows follow the user's coordinate order.
    std::vector<std::size_t> canon(d);
    for (std::size_t k = 0; k < d; ++k) canon[np.perm[k]] = k;
    for (std::size_t u = 0; u < d; ++u) {
      const std::size_t k = canon[u];
      out << num(tp.r) << ",dtau" << u + 1 << ',' << num(ratio(tp.F.vec[k], le.dtau_ratio[k])) << '\n';
    }
    for (std::size_t u = 0; u < d; ++u) {
      const std::size_t k = canon[u];
      out << num(tp.r) << ",dlambda" << u + 1 << ',' << num(ratio(tp.F.vec[d + k], le.dlambda_ratio[k])) << '\n';
    }
  }
  return kExitOk;
}

double default_bench_radius(Family f) {
  switch (f) {
    case Family::Hirotsu1:
    case Family::Hirotsu2: return 40.0;
    case Family::AndersonDarling: return 20.0;
    case Family::Chi:
    case Family::ExpProduct: return 1.0;
  }
  return 1.0;
}

int cmd_bench(const std::string& family, const std::string& mean, const std::string& dims_spec, double R,
              unsigned jobs, const SolverFlags& sf, std::ostream& out) {
  const Family fam = *parse_family(family);
  const MeanPattern mp = *parse_mean_pattern(mean);
  const std::vector<int> dims = parse_dims(dims_spec);
  if (R <= 0.0) R = default_bench_radius(fam);
  const bool exact = fam == Family::Chi || fam == Family::ExpProduct;
  if (fam == Family::ExpProduct) {
    for (int d : dims) {
      if (d % 2) throw UsageError("exp-product needs even dimensions");
    }
  }

  std::vector<std::string> rows(dims.size());
  std::vector<std::optional<Error>> failures(dims.size());
  auto run = [&](std::size_t i) {
    const int d = dims[i];
    try {
      const ModelParams p = make_family(fam, d, mp);
      std::ostringstream row;
      if (fam == Family::Chi) {
        const double radii[1] = {R};
        const auto t0 = std::chrono::steady_clock::now();
        const double hgm = solve_f_trace(p, radii, sf.options()).front().f.value();
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const double ex = chi_closed_form(d, R);
        row << family << ',' << d << ',' << num(R) << ',' << num(hgm) << ',' << num(ex) << ',' << num(ex - hgm) << ','
            << num(timing(sf, wall));
      } else {
        const BallProbResult res = solve_ball_probability(p, R, sf.options());
        if (exact) {
          const double ex = exp_product_closed_form(d / 2, R);
          row << family << ',' << d << ',' << num(R) << ',' << num(res.p) << ',' << num(ex) << ','
              << num(ex - res.p) << ',' << num(timing(sf, res.stats.wall_time_s));
        } else {
          row << family << ',' << mean << ',' << d << ',' << num(R) << ',' << num(res.p) << ','
              << num(res.one_minus_p) << ',' << res.stats.steps << ',' << num(timing(sf, res.stats.wall_time_s));
        }
      }
      rows[i] = row.str();
    } catch (const Error& e) {
      failures[i] = e;
    }
  };

  const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(dims.size())));
  if (n == 1) {
    for (std::size_t i = 0; i < dims.size(); ++i) run(i);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < dims.size(); i += n) run(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (const auto& f : failures) {
    if (f) throw *f;
  }

  if (exact) {
    out << "family,d,r,hgm,exact,exact_minus_hgm,wall_time_s\n";
  } else {
    out << "family,mean,d,r,p,one_minus_p,steps,wall_time_s\n";
  }
  for (const auto& r : rows) out << r << '\n';
  return kExitOk;
}

int cmd_selftest(const std::string& level, unsigned long long seed, std::ostream& out) {
  const auto results = run_selftest(level == "full" ? SelftestLevel::Full : SelftestLevel::Quick, seed);
  print_results(results, out);
  const auto failed = std::count_if(results.begin(), results.end(), [](const auto& r) { return !r.passed; });
  out << (failed ? "FAIL" : "PASS") << " selftest " << level << ": " << results.size() - failed << '/'
      << results.size() << " suites passed\n";
  return failed ? kExitSolverError : kExitOk;
}

bool is_usage_code(ErrorCode c) {
  return c == ErrorCode::InvalidArgument || c == ErrorCode::NonPositiveVariance || c == ErrorCode::NonFinite;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ball probability of a multivariate normal by the holonomic gradient method", "hgm_ball"};
  app.require_subcommand(1);

  ParamFlags pf;
  SolverFlags sf;
  SolverFlags bench_sf;
  bench_sf.rtol = 1e-10;
  bench_sf.atol = 1e-10;

  double R = 0.0;
  std::string format = "json";
  auto* prob = app.add_subcommand("prob", "Probability P(||X|| <= R)");
  add_param_flags(prob, pf);
  add_solver_flags(prob, sf);
  prob->add_option("--r", R, "Radius R")->required();
  prob->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();

  double rmax = 0.0;
  int points = 100;
  auto* cdf = app.add_subcommand("cdf", "CSV of G(r) on an even grid up to rmax");
  add_param_flags(cdf, pf);
  add_solver_flags(cdf, sf);
  cdf->add_option("--rmax", rmax, "Largest radius")->required();
  cdf->add_option("--points", points, "Number of rows")->capture_default_str();

  std::vector<double> radii{5.0, 10.0, 20.0};
  double tie_tol = kDefaultTieTol;
  auto* lap = app.add_subcommand("laplace-ratio", "CSV of HGM values over their Laplace asymptotics");
  add_param_flags(lap, pf);
  add_solver_flags(lap, sf);
  lap->add_option("--radii", radii, "Radii, comma separated")->delimiter(',')->capture_default_str();
  lap->add_option("--tie-tol", tie_tol, "Tolerance for tied lambda values")->capture_default_str();

  std::string family;
  std::string dims;
  std::string mean = "zero";
  unsigned jobs = 1;
  auto* bench = app.add_subcommand("bench", "Benchmark families over a range of dimensions (tolerances default to 1e-10)");
  add_solver_flags(bench, bench_sf);
  bench->add_option("--family", family, "Family")
      ->required()
      ->check(CLI::IsMember({"hirotsu1", "hirotsu2", "anderson-darling", "chi", "exp-product"}));
  bench->add_option("--dims", dims, "Dimension range a:b[:step]")->required();
  bench->add_option("--r", R, "Radius (default 40, 20 for anderson-darling, 1 for chi and exp-product)");
  bench->add_option("--mean", mean, "Mean pattern")->check(CLI::IsMember({"zero", "ramp"}))->capture_default_str();
  bench->add_option("--jobs", jobs, "Dimensions solved concurrently")->capture_default_str();

  std::string level = "quick";
  auto* self = app.add_subcommand("selftest", "Cross-oracle and invariant suites");
  self->add_option("--level", level, "quick or full")->check(CLI::IsMember({"quick", "full"}))->capture_default_str();
  unsigned long long seed = 1000;
  self->add_option("--seed", seed, "Base Monte Carlo seed for the coverage suite")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (prob->parsed()) return cmd_prob(pf, sf, R, format, out);
    if (cdf->parsed()) return cmd_cdf(pf, sf, rmax, points, out);
    if (lap->parsed()) return cmd_laplace_ratio(pf, sf, radii, tie_tol, out);
    if (bench->parsed()) return cmd_bench(family, mean, dims, R, jobs, bench_sf, out);
    return cmd_selftest(level, seed, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    if (is_usage_code(e.code())) {
      err << "usage error: " << e.name() << ": " << e.what() << '\n';
      return kExitUsage;
    }
    ordered_json j;
    j["error"] = std::string(e.name());
    j["message"] = e.what();
    if (!std::isnan(e.radius())) j["radius"] = e.radius();
    out << j.dump() << '\n';
    err << "error: " << e.name() << ": " << e.what() << '\n';
    return kExitSolverError;
  }
}

}  // namespace hgm
