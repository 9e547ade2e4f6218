// Command-line front end for the p-adic heat equation library: kernel
// tables and property checks, Cauchy-problem solving, diffusion sampling,
// and the elliptic-polynomial utilities.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "padic/json_io.hpp"
#include "padic/padic_heat.hpp"

using namespace padic;
using nlohmann::json;

namespace {

// all numbers serialized round-trip exact for binary64
std::string num17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct CheckLine {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double tolerance = 0.0;
};

struct CheckReport {
  std::vector<CheckLine> lines;

  void add(const std::string& name, double measured, double tol) {
    lines.push_back({name, measured <= tol, measured, tol});
  }
  bool all_pass() const {
    return std::all_of(lines.begin(), lines.end(), [](const CheckLine& l) { return l.pass; });
  }
  void print(std::ostream& os) const {
    for (const auto& l : lines)
      os << (l.pass ? "PASS" : "FAIL") << " " << l.name << " measured=" << num17(l.measured)
         << " tol=" << num17(l.tolerance) << "\n";
  }
  json to_json(const std::string& command) const {
    json checks = json::array();
    for (const auto& l : lines)
      checks.push_back({{"name", l.name},
                        {"pass", l.pass},
                        {"measured", l.measured},
                        {"tolerance", l.tolerance}});
    return json{{"command", command}, {"checks", checks}, {"all_pass", all_pass()}};
  }
};

void write_summary(const std::string& path, const json& j) {
  if (path.empty()) return;
  std::ofstream f(path);
  f << j.dump(2) << "\n";
}

int thread_override() {
  if (const char* env = std::getenv("PADIC_HEAT_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

std::ostream& open_out(std::ofstream& file, const std::string& path) {
  if (path.empty()) return std::cout;
  file.open(path);
  if (!file) throw std::runtime_error("cannot open output file: " + path);
  return file;
}

// ---- kernel ---------------------------------------------------------------

struct KernelArgs {
  long long p = 2;
  int n = 1;
  double alpha = 1.0;
  double a = 1.0;
  double t = 1.0;
  std::vector<int> m_range{-10, 10};
  bool check = false;
  std::string out;
  std::string summary;
  std::string format = "csv";
};

int run_kernel(const KernelArgs& args) {
  KernelParams kp{args.p, args.n, args.alpha, args.a, {}};
  kp.validate();
  KernelSlice slice(kp, args.t);

  std::ofstream file;
  std::ostream& os = open_out(file, args.out);
  int m_lo = args.m_range[0], m_hi = args.m_range[1];
  if (args.format == "csv") {
    os << "m,radius,z_value,sphere_mass,cdf\n";
    for (int m = m_lo; m <= m_hi; ++m) {
      double radius = std::pow(double(args.p), double(m));
      os << m << "," << num17(radius) << "," << num17(z_tent(m, args.t, kp)) << ","
         << num17(sphere_mass(m, args.t, kp)) << "," << num17(radial_cdf(m, args.t, kp)) << "\n";
    }
  } else {
    json rows = json::array();
    for (int m = m_lo; m <= m_hi; ++m)
      rows.push_back({{"m", m},
                      {"radius", std::pow(double(args.p), double(m))},
                      {"z_value", z_tent(m, args.t, kp)},
                      {"sphere_mass", sphere_mass(m, args.t, kp)},
                      {"cdf", radial_cdf(m, args.t, kp)}});
    os << rows.dump(2) << "\n";
  }

  if (!args.check) {
    write_summary(args.summary, json{{"command", "kernel"}, {"all_pass", true}});
    return 0;
  }

  CheckReport rep;
  // normalization
  rep.add("normalization", std::abs(integrate_radial(slice.radial()).real() - 1.0), 1e-12);
  // nonnegativity over a wide radius band
  double min_val = 0.0;
  for (int m = -40; m <= 40; ++m) min_val = std::min(min_val, z_tent(m, args.t, kp));
  rep.add("nonnegativity", std::max(0.0, -min_val), 1e-15);
  // representation agreement
  double rep_dev = 0.0;
  for (int m = -8; m <= 8; ++m) {
    double tent = z_tent(m, args.t, kp);
    rep_dev = std::max(rep_dev,
                       std::abs(tent - z_series1(m, args.t, kp)) / std::max(1.0, tent));
  }
  rep.add("representation", rep_dev, 1e-10);
  // semigroup at (t/2, t/2)
  double semi_dev = 0.0;
  for (int m = -4; m <= 4; ++m)
    semi_dev = std::max(semi_dev, std::abs(semigroup_convolve(kp, args.t / 2, args.t / 2, m).value -
                                           z_tent(m, args.t, kp)));
  rep.add("semigroup", semi_dev, 1e-8);
  // heat equation: termwise identity and finite differences
  double term_dev = 0.0, fd_dev = 0.0;
  for (RadiusArg m : {RadiusArg{}, RadiusArg{0}, RadiusArg{2}, RadiusArg{-2}}) {
    double lhs = dZ_dt(m, args.t, kp);
    double rhs = -kp.a * DgammaZ(m, args.t, kp.alpha, kp);
    term_dev = std::max(term_dev, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
    double h = 1e-5 * args.t;
    double fd = (z_tent(m, args.t + h, kp) - z_tent(m, args.t - h, kp)) / (2.0 * h);
    fd_dev = std::max(fd_dev, std::abs(lhs - fd) / std::max(1.0, std::abs(lhs)));
  }
  rep.add("heat_equation_termwise", term_dev, 1e-14);
  rep.add("heat_equation_fd", fd_dev, 1e-6);

  rep.print(std::cout);
  write_summary(args.summary, rep.to_json("kernel"));
  return rep.all_pass() ? 0 : 1;
}

// ---- solve ----------------------------------------------------------------

struct SolveArgs {
  std::string problem_path;
  std::vector<double> times;
  std::vector<int> m_range{-3, 3};
  bool check_residual = false;
  double residual_tol = 1e-5;
  std::string out;
  std::string summary;
};

int run_solve(const SolveArgs& args) {
  std::ifstream f(args.problem_path);
  if (!f) {
    std::cerr << "error: cannot open problem file: " << args.problem_path << "\n";
    return 2;
  }
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    std::cerr << "error: malformed JSON in " << args.problem_path << ": " << e.what() << "\n";
    return 2;
  }
  CauchyProblem prob = problem_from_json(j);
  auto u = solve(prob);

  std::vector<double> times = args.times;
  if (times.empty()) times = {prob.T / 4, prob.T / 2, prob.T};

  std::ofstream file;
  std::ostream& os = open_out(file, args.out);
  os << "x_id,m,t,re_u,im_u,residual\n";

  std::optional<ResidualReport> residuals;
  if (args.check_residual) {
    std::vector<int> probes;
    for (int m = args.m_range[0]; m <= args.m_range[1]; ++m) probes.push_back(m);
    double h = 1e-4;
    std::vector<double> safe_times;
    for (double t : times)
      if (t - h > 0.0 && t + h <= prob.T) safe_times.push_back(t);
    residuals = residual_check(u, probes, true, safe_times, {h, 6});
  }
  auto residual_at = [&](int m, double t) -> std::string {
    if (!residuals) return "";
    for (const auto& e : residuals->entries)
      if (e.m == m && e.t == t) return num17(e.residual);
    return "";
  };

  int x_id = 0;
  for (double t : times) {
    for (int m = args.m_range[0]; m <= args.m_range[1]; ++m) {
      complex_t v = u.evaluate(SolutionField::sphere_point(prob.params.prime, prob.params.n, m), t);
      os << x_id++ << "," << m << "," << num17(t) << "," << num17(v.real()) << ","
         << num17(v.imag()) << "," << residual_at(m, t) << "\n";
    }
    complex_t v0 = u.evaluate(PAdicPoint::origin(prob.params.prime, prob.params.n), t);
    os << x_id++ << ",zero," << num17(t) << "," << num17(v0.real()) << "," << num17(v0.imag())
       << "," << residual_at(std::numeric_limits<int>::min(), t) << "\n";
  }

  CheckReport rep;
  if (residuals) {
    rep.add("cauchy_residual", residuals->max_abs, args.residual_tol);
    rep.print(std::cout);
  }
  write_summary(args.summary, rep.to_json("solve"));
  return rep.all_pass() ? 0 : 1;
}

// ---- simulate ---------------------------------------------------------------

struct SimulateArgs {
  long long p = 2;
  int n = 1;
  double alpha = 1.0;
  double a = 1.0;
  double dt = 1.0;
  int steps = 1;
  int paths = 1000;
  uint64_t seed = 0;
  int span = 32;
  int law_hi = 48;
  bool check = false;
  std::string out;
  std::string summary;
};

int run_simulate(const SimulateArgs& args) {
  KernelParams kp{args.p, args.n, args.alpha, args.a, {}};
  kp.validate();
  IncrementWindow win{-args.span, args.law_hi, 1e-9};
  SimConfig cfg{std::max(args.span, args.law_hi)};
  auto trajs = simulate(kp, args.dt, args.steps, args.paths, args.seed, cfg, win,
                        thread_override());

  if (!args.out.empty()) {
    std::ofstream os(args.out);
    if (!os) throw std::runtime_error("cannot open output file: " + args.out);
    for (const auto& tr : trajs) {
      for (size_t s = 1; s < tr.states.size(); ++s) {
        PAdicPoint inc = tr.states[s] - tr.states[s - 1];
        json rec{{"path", tr.path_index},
                 {"step", s},
                 {"t", tr.times[s]},
                 {"state", point_to_json(tr.states[s])},
                 {"radius_exp", inc.norm_exp()},
                 {"clipped", bool(tr.clipped[s - 1])}};
        os << rec.dump() << "\n";
      }
    }
  }

  CheckReport rep;
  if (args.check) {
    IncrementLaw law = build_increment_law(kp, args.dt, win);
    rep.add("clipped_mass", law.clipped_mass, 1e-9);
    std::vector<int> radii = displacement_radii(trajs, 1);
    auto emp = empirical_vs_exact(radii, law);
    rep.add("increment_law_pvalue_floor", 0.01, emp.chi_square.p_value);
    if (args.steps >= 2) {
      IncrementLaw law2 = build_increment_law(kp, 2.0 * args.dt, win);
      auto ck = empirical_vs_exact(displacement_radii(trajs, 2), law2);
      rep.add("chapman_kolmogorov_pvalue_floor", 0.01, ck.chi_square.p_value);
    }
    rep.print(std::cout);
  }
  write_summary(args.summary, rep.to_json("simulate"));
  return rep.all_pass() ? 0 : 1;
}

// ---- elliptic ---------------------------------------------------------------

int run_elliptic_check(const std::string& path, long long samples, uint64_t seed,
                       const std::string& summary) {
  std::ifstream f(path);
  if (!f) {
    std::cerr << "error: cannot open polynomial file: " << path << "\n";
    return 2;
  }
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    std::cerr << "error: malformed JSON in " << path << ": " << e.what() << "\n";
    return 2;
  }
  HomogeneousPoly poly = poly_from_json(j);

  CheckReport rep;
  bool elliptic = is_elliptic_mod_p(poly);
  rep.add("elliptic_mod_p", elliptic ? 0.0 : 1.0, 0.5);
  std::optional<EllipticityWitness> wit;
  bool strong = is_strongly_elliptic(poly, &wit);
  rep.add("strongly_elliptic", strong ? 0.0 : 1.0, 0.5);
  if (!strong && wit) {
    std::cout << "witness: stratum {";
    for (size_t i = 0; i < wit->stratum.size(); ++i)
      std::cout << (i ? "," : "") << wit->stratum[i];
    std::cout << "} point (";
    for (size_t i = 0; i < wit->point.size(); ++i)
      std::cout << (i ? "," : "") << wit->point[i];
    std::cout << ")\n";
  }
  if (strong) {
    auto pts = random_window_points(poly.prime(), poly.vars(), -3, 3, samples, seed);
    auto nid = norm_identity_check(poly, pts);
    rep.add("norm_identity_violations", double(nid.violations + nid.precision_failures), 0.5);
  }
  rep.print(std::cout);
  write_summary(summary, rep.to_json("elliptic check"));
  return rep.all_pass() ? 0 : 1;
}

int run_elliptic_gen(long long p, int n, uint64_t seed, const std::string& out,
                     const std::string& summary) {
  HomogeneousPoly poly = generate_strongly_elliptic(p, n, seed);
  CheckReport rep;
  rep.add("generated_strongly_elliptic", is_strongly_elliptic(poly) ? 0.0 : 1.0, 0.5);

  std::ofstream file;
  std::ostream& os = open_out(file, out);
  os << poly_to_json(poly).dump(2) << "\n";
  rep.print(std::cout);
  write_summary(summary, rep.to_json("elliptic gen"));
  return rep.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"p-adic heat equation toolkit: Taibleson-operator heat kernels, Cauchy "
               "solutions, and ultrametric diffusion"};
  app.require_subcommand(1);

  KernelArgs ka;
  auto* kernel = app.add_subcommand("kernel", "tabulate the heat kernel and run its checks");
  kernel->add_option("--p", ka.p, "prime")->check(CLI::PositiveNumber);
  kernel->add_option("--n", ka.n, "dimension")->check(CLI::PositiveNumber);
  kernel->add_option("--alpha", ka.alpha, "operator order")->check(CLI::PositiveNumber);
  kernel->add_option("--a", ka.a, "diffusion constant")->check(CLI::PositiveNumber);
  kernel->add_option("--t", ka.t, "time")->check(CLI::PositiveNumber);
  kernel->add_option("--m-range", ka.m_range, "radius exponents lo hi")->expected(2);
  kernel->add_flag("--check", ka.check, "run the kernel property suites");
  kernel->add_option("--out", ka.out, "CSV output path (default stdout)");
  kernel->add_option("--summary", ka.summary, "machine-readable summary JSON path");
  kernel->add_option("--format", ka.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));

  SolveArgs sa;
  auto* solve_cmd = app.add_subcommand("solve", "solve a Cauchy problem from a JSON file");
  solve_cmd->add_option("--problem", sa.problem_path, "problem JSON path")->required();
  solve_cmd->add_option("--t", sa.times, "evaluation times (default T/4 T/2 T)");
  solve_cmd->add_option("--m-range", sa.m_range, "radius exponents lo hi")->expected(2);
  solve_cmd->add_flag("--check-residual", sa.check_residual, "verify the PDE residual");
  solve_cmd->add_option("--residual-tol", sa.residual_tol, "residual tolerance");
  solve_cmd->add_option("--out", sa.out, "CSV output path (default stdout)");
  solve_cmd->add_option("--summary", sa.summary, "summary JSON path");

  SimulateArgs ma;
  auto* sim = app.add_subcommand("simulate", "sample the ultrametric diffusion");
  sim->add_option("--p", ma.p, "prime")->check(CLI::PositiveNumber);
  sim->add_option("--n", ma.n, "dimension")->check(CLI::PositiveNumber);
  sim->add_option("--alpha", ma.alpha, "operator order")->check(CLI::PositiveNumber);
  sim->add_option("--a", ma.a, "diffusion constant")->check(CLI::PositiveNumber);
  sim->add_option("--dt", ma.dt, "time step")->check(CLI::PositiveNumber);
  sim->add_option("--steps", ma.steps, "steps per path")->check(CLI::NonNegativeNumber);
  sim->add_option("--paths", ma.paths, "number of paths")->check(CLI::NonNegativeNumber);
  sim->add_option("--seed", ma.seed, "RNG seed");
  sim->add_option("--span", ma.span, "state valuation span");
  sim->add_flag("--check", ma.check, "run law and semigroup checks");
  sim->add_option("--out", ma.out, "trajectory JSONL path");
  sim->add_option("--summary", ma.summary, "summary JSON path");

  auto* ell = app.add_subcommand("elliptic", "strongly elliptic polynomial utilities");
  ell->require_subcommand(1);
  std::string poly_path, ell_out, ell_summary;
  long long ell_samples = 10000;
  uint64_t ell_seed = 0;
  auto* ell_check = ell->add_subcommand("check", "check a polynomial from JSON");
  ell_check->add_option("-f,--file", poly_path, "polynomial JSON path")->required();
  ell_check->add_option("--samples", ell_samples, "norm-identity sample count");
  ell_check->add_option("--seed", ell_seed, "sample seed");
  ell_check->add_option("--summary", ell_summary, "summary JSON path");
  long long gen_p = 3;
  int gen_n = 2;
  uint64_t gen_seed = 0;
  auto* ell_gen = ell->add_subcommand("gen", "generate a strongly elliptic polynomial");
  ell_gen->add_option("--p", gen_p, "prime")->check(CLI::PositiveNumber);
  ell_gen->add_option("--n", gen_n, "variables")->check(CLI::PositiveNumber);
  ell_gen->add_option("--seed", gen_seed, "construction seed");
  ell_gen->add_option("--out", ell_out, "output JSON path (default stdout)");
  ell_gen->add_option("--summary", ell_summary, "summary JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*kernel) return run_kernel(ka);
    if (*solve_cmd) return run_solve(sa);
    if (*sim) return run_simulate(ma);
    if (*ell_check) return run_elliptic_check(poly_path, ell_samples, ell_seed, ell_summary);
    if (*ell_gen) return run_elliptic_gen(gen_p, gen_n, gen_seed, ell_out, ell_summary);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
