// bernstein_lab: evaluation, scanning, sampling and verification driver.
//
// Exit codes: 0 ok, 1 verification failure, 2 usage or validation error,
// 3 numeric failure (including closed-form/quadrature disagreement).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bernstein/bernstein.hpp"
#include "bernstein/io.hpp"

namespace {

using namespace bernstein;

struct Options {
  std::string config;
  std::string preset = "stationary";
  std::size_t d = 1;
  double T = 1.0;
  std::string phi0, psiT;
  std::string region = "annulus:0:1";
  std::string region0, regionT;
  std::optional<double> t_start, t_end;
  int steps = 11;
  std::string output;
  std::string summary;
  std::string format = "csv";
  std::uint64_t seed = 1;
  std::vector<int> N{1, 2, 4, 8};
  int kernel_N = 8;
  int order = 48;
  std::size_t count = 10000;
  double tol_scale = 1.0;
  std::string plot_script;
  std::vector<std::string> xs{"0"}, ys{"0"};
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, sep)) out.push_back(part);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

Point parse_point(const std::string& s) {
  Point p;
  for (const auto& c : split(s, ',')) p.push_back(parse_number(c));
  if (p.empty()) throw ValidationError("empty point '" + s + "'");
  return p;
}

Point centered_or(const std::vector<std::string>& parts, std::size_t i, std::size_t d) {
  if (parts.size() <= i) return Point(d, 0.0);
  Point p = parse_point(parts[i]);
  if (p.size() != d) throw ValidationError("point has " + std::to_string(p.size()) + " entries, expected " +
                                           std::to_string(d));
  return p;
}

/// kind[:sigma[:a1,a2,...]], e.g. "gaussian:1", "hat_isotropic:0.5:1,0", "dirac".
Datum parse_datum(const std::string& s, std::size_t d) {
  const auto parts = split(s, ':');
  const std::string& kind = parts.at(0);
  if (kind == "dirac") return Datum::dirac(d);
  if (parts.size() < 2) throw ValidationError("datum '" + s + "' needs a sigma");
  const double sigma = parse_number(parts[1]);
  const Point a = centered_or(parts, 2, d);
  if (kind == "gaussian") return Datum::gaussian(sigma, a);
  if (kind == "hat_product") return Datum::hat_product(sigma, a);
  if (kind == "hat_isotropic") return Datum::hat_isotropic(sigma, a);
  throw ValidationError("unknown datum kind '" + kind + "'");
}

/// annulus:R1:R2 | ball:r[:c] | hypercube:h[:c] | box:lo:hi | full | point:p, with a leading '!' for the complement.
Region parse_region(std::string s, std::size_t d) {
  bool complement = false;
  if (!s.empty() && s.front() == '!') {
    complement = true;
    s.erase(0, 1);
  }
  const auto parts = split(s, ':');
  const std::string& kind = parts.at(0);
  auto need = [&](std::size_t n) {
    if (parts.size() < n) throw ValidationError("region '" + s + "' is missing parameters");
  };
  std::optional<Region> r;
  if (kind == "annulus") {
    need(3);
    r = Region::annulus(d, parse_number(parts[1]), parse_number(parts[2]));
  } else if (kind == "ball") {
    need(2);
    r = Region::ball(centered_or(parts, 2, d), parse_number(parts[1]));
  } else if (kind == "hypercube") {
    need(2);
    r = Region::hypercube(centered_or(parts, 2, d), parse_number(parts[1]));
  } else if (kind == "box") {
    need(3);
    r = Region::box(centered_or(parts, 1, d), centered_or(parts, 2, d));
  } else if (kind == "full") {
    r = Region::full_space(d);
  } else if (kind == "point") {
    r = Region::singleton(centered_or(parts, 1, d));
  } else {
    throw ValidationError("unknown region kind '" + kind + "'");
  }
  return complement ? r->complement() : *r;
}

ProcessSpec build_spec(const Options& o) {
  if (!o.config.empty()) return load_spec(o.config);
  const Datum g = Datum::gaussian(1.0, Point(o.d, 0.0));
  const Datum delta = Datum::dirac(o.d);
  std::optional<Datum> phi, psi;
  if (o.preset == "stationary") {
    phi = g;
    psi = g;
  } else if (o.preset == "pinned_start") {
    phi = delta;
    psi = g;
  } else if (o.preset == "pinned_end") {
    phi = g;
    psi = delta;
  } else if (o.preset == "loop") {
    phi = delta;
    psi = delta;
  } else {
    throw ValidationError("unknown case preset '" + o.preset + "'");
  }
  if (!o.phi0.empty()) phi = parse_datum(o.phi0, o.d);
  if (!o.psiT.empty()) psi = parse_datum(o.psiT, o.d);
  return ProcessSpec::create(o.d, o.T, *phi, *psi);
}

std::vector<double> time_grid(const Options& o, double lo, double hi) {
  const double a = o.t_start.value_or(lo), b = o.t_end.value_or(hi);
  if (o.steps < 1) throw ValidationError("time grid is empty (--steps must be >= 1)");
  if (!(std::isfinite(a) && std::isfinite(b) && a <= b)) throw ValidationError("time grid needs t-start <= t-end");
  if (o.steps == 1) return {a};
  std::vector<double> ts(o.steps);
  for (int k = 0; k < o.steps; ++k) ts[k] = a + (b - a) * k / (o.steps - 1);
  ts.back() = b;
  return ts;
}

void write_table(const Table& t, const Options& o, const std::string& path) {
  std::ofstream file;
  if (!path.empty()) {
    file.open(path);
    if (!file) throw ValidationError("cannot write output '" + path + "'");
  }
  std::ostream& os = path.empty() ? std::cout : file;
  if (o.format == "json")
    os << t.to_json().dump(2) << '\n';
  else
    t.write_csv(os);
}

/// gnuplot script plotting the listed columns (1-based) of the CSV output against column `x`.
void emit_plot_script(const Options& o, const Table& t, int x, const std::vector<int>& cols) {
  if (o.plot_script.empty()) return;
  if (o.output.empty() || o.format != "csv")
    throw ValidationError("--emit-plot-script needs --output with --format csv");
  std::ofstream s(o.plot_script);
  if (!s) throw ValidationError("cannot write plot script '" + o.plot_script + "'");
  s << "set datafile separator ','\n"
    << "set key autotitle columnhead\n"
    << "set xlabel '" << t.columns()[x - 1] << "'\n"
    << "plot ";
  for (std::size_t i = 0; i < cols.size(); ++i)
    s << (i ? ", " : "") << "'" << o.output << "' using " << x << ":" << cols[i] << " with linespoints";
  s << "\npause -1\n";
}

std::string fmt(double v) { return format_number(v); }
std::string fmt(std::optional<double> v) { return v ? format_number(*v) : "NA"; }

// ---------------------------------------------------------------------------

int cmd_kernel_eval(const Options& o) {
  std::vector<Point> xs, ys;
  for (const auto& s : o.xs) xs.push_back(parse_point(s));
  for (const auto& s : o.ys) ys.push_back(parse_point(s));
  if (xs.empty() || ys.empty()) throw ValidationError("kernel-eval: need at least one x and one y");
  const std::size_t d = xs.front().size();
  for (const auto& p : xs) detail::require(p.size() == d, "kernel-eval: all points need the same dimension");
  for (const auto& p : ys) detail::require(p.size() == d, "kernel-eval: all points need the same dimension");
  const int N = o.kernel_N;
  detail::require(N >= 1, "kernel-eval: --N must be >= 1");
  const auto ts = time_grid(o, 0.1, 2.0);
  for (double t : ts) detail::require(t > 0.0, "kernel-eval: times must be positive");

  std::vector<std::string> cols{"t"};
  for (std::size_t j = 0; j < d; ++j) cols.push_back("x" + std::to_string(j + 1));
  for (std::size_t j = 0; j < d; ++j) cols.push_back("y" + std::to_string(j + 1));
  cols.insert(cols.end(), {"g_closed", "g_series_N", "tail_bound"});
  Table table(cols);
  for (const auto& x : xs)
    for (const auto& y : ys)
      for (double t : ts) {
        std::vector<std::string> row{fmt(t)};
        for (double v : x) row.push_back(fmt(v));
        for (double v : y) row.push_back(fmt(v));
        row.push_back(fmt(mehler(x, t, y)));
        row.push_back(fmt(spectral_series(x, t, y, N)));
        row.push_back(fmt(series_tail_bound(t, d, N)));
        table.add_row(std::move(row));
      }
  write_table(table, o, o.output);
  emit_plot_script(o, table, 1, {static_cast<int>(2 * d + 2), static_cast<int>(2 * d + 3)});
  return 0;
}

/// Smallest root of the analytic derivative bracketed by the grid, if any.
std::optional<double> grid_root(ProcessCase c, double r1, double r2, double T, const std::vector<double>& ts) {
  auto f = [&](double t) { return annulus_probability_derivative(c, r1, r2, t, T); };
  for (std::size_t k = 1; k < ts.size(); ++k) {
    double lo = ts[k - 1], hi = ts[k];
    if (lo <= 0.0 || hi >= T) continue;
    double flo = f(lo);
    if (flo == 0.0) return lo;
    if ((flo > 0.0) == (f(hi) > 0.0)) continue;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = f(mid);
      if ((fm > 0.0) == (flo > 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    return hi;
  }
  return std::nullopt;
}

int cmd_prob_scan(const Options& o) {
  const ProcessSpec spec = build_spec(o);
  const Region F = parse_region(o.region, spec.dimension());
  const double T = spec.horizon();
  const auto ts = time_grid(o, 0.0, T);
  for (double t : ts) detail::require(t >= 0.0 && t <= T, "prob-scan: times must lie in [0, T]");
  const ProcessCase c = spec.process_case();
  const bool annulus_columns = (c == ProcessCase::pinned_start || c == ProcessCase::pinned_end ||
                                c == ProcessCase::loop) &&
                               F.kind() == Region::Kind::annulus && !F.is_complement();
  const bool closed = !spec.phi0().is_hat() && !spec.psiT().is_hat();
  RuleOptions opt;
  opt.order = o.order;

  std::vector<std::string> cols{"t", "P_closed", "P_quadrature", "abs_diff"};
  if (annulus_columns) cols.insert(cols.end(), {"rho", "dP_dt", "regime", "t_star"});
  Table table(cols);

  std::optional<double> tstar;
  const double r1 = F.inner_radius(), r2 = F.outer_radius();
  if (annulus_columns) {
    if (c == ProcessCase::pinned_start)
      tstar = critical_time(r1, r2, T);
    else if (c == ProcessCase::pinned_end) {
      if (const auto s = critical_time(r1, r2, T)) tstar = T - *s;
    } else {
      tstar = grid_root(c, r1, r2, T, ts);
    }
  }

  double worst = 0.0;
  for (double t : ts) {
    const double quad = region_probability(spec, F, t, RegionMethod::quadrature, opt);
    std::optional<double> pc;
    if (closed) pc = region_probability(spec, F, t);
    const std::optional<double> diff = pc ? std::optional<double>(std::abs(*pc - quad)) : std::nullopt;
    if (diff) worst = std::max(worst, *diff);
    std::vector<std::string> row{fmt(t), fmt(pc), fmt(quad), fmt(diff)};
    if (annulus_columns) {
      const bool interior = t > 0.0 && t < T;
      std::optional<double> dp;
      if (interior) dp = annulus_probability_derivative(c, r1, r2, t, T);
      const std::string regime = !dp ? "NA" : (*dp > 0.0 ? "increasing" : (*dp < 0.0 ? "decreasing" : "stationary"));
      row.insert(row.end(), {fmt(width_parameter(c, t, T)), fmt(dp), regime, fmt(tstar)});
    }
    table.add_row(std::move(row));
  }
  write_table(table, o, o.output);
  emit_plot_script(o, table, 1, {2, 3});
  const double tol = 1e-6 * o.tol_scale;
  if (worst > tol) {
    std::cerr << "prob-scan: closed form and quadrature differ by " << worst << " (tolerance " << tol << ")\n";
    return 3;
  }
  return 0;
}

int cmd_joint_prob(const Options& o) {
  const ProcessSpec spec = build_spec(o);
  const std::size_t d = spec.dimension();
  const Region F0 = parse_region(o.region0.empty() ? o.region : o.region0, d);
  const Region FT = parse_region(o.regionT.empty() ? o.region : o.regionT, d);
  RuleOptions opt;
  opt.order = o.order;
  const Integral exact = joint_endpoint_integral(spec, F0, FT, opt);
  Table table({"T", "P_exact", "quadrature_error", "P_leading", "error_bound", "total_bound", "abs_diff"});
  std::vector<std::string> row{fmt(spec.horizon()), fmt(exact.value), fmt(exact.error_estimate)};
  if (spec.phi0().is_gaussian() && spec.psiT().is_gaussian()) {
    const Prop4Result p = prop4_joint_probability(spec.phi0().sigma(), spec.psiT().sigma(), spec.phi0().center(),
                                                  spec.psiT().center(), F0, FT, spec.horizon(), d);
    row.insert(row.end(), {fmt(p.leading), fmt(p.error_bound), fmt(p.total_bound), fmt(std::abs(p.leading - exact.value))});
  } else {
    row.insert(row.end(), {"NA", "NA", "NA", "NA"});
  }
  table.add_row(std::move(row));
  write_table(table, o, o.output);
  return 0;
}

int cmd_galerkin_error(const Options& o) {
  const ProcessSpec spec = build_spec(o);
  const std::size_t d = spec.dimension();
  const double T = spec.horizon();
  const auto ts = time_grid(o, 0.0, T);
  for (double t : ts) detail::require(t >= 0.0 && t <= T, "galerkin-error: times must lie in [0, T]");
  if (spec.phi0().is_dirac()) {
    for (double t : ts) detail::require(t > 0.0, "galerkin-error: Dirac initial data needs t > 0");
  }
  // Probe points along the first axis and the diagonal.
  std::vector<Point> probes;
  for (int i = 0; i <= 40; ++i) {
    const double s = -4.0 + 0.2 * i;
    Point axis(d, 0.0), diag(d, s / std::sqrt(static_cast<double>(d)));
    axis[0] = s;
    probes.push_back(axis);
    if (d > 1) probes.push_back(diag);
  }
  const LemmaNormalization lemma = lemma_normalization(d, T, spec.phi0(), spec.psiT());
  Table table({"N", "normalization_residual", "sup_forward_error", "lemma_N0T", "exact_N", "lemma_rel_diff"});
  for (int N : o.N) {
    const GalerkinTruncation tr(spec, N);
    double sup = 0.0;
    for (double t : ts)
      for (const auto& x : probes)
        sup = std::max(sup, std::abs(truncated_forward(tr, x, t) - forward_solution(spec, x, t)));
    table.add_row({std::to_string(N), fmt(spectral_normalization_residual(tr)), fmt(sup), fmt(lemma.value),
                   fmt(spec.normalization()), fmt(lemma.value / spec.normalization() - 1.0)});
  }
  write_table(table, o, o.output);
  emit_plot_script(o, table, 1, {2, 3});
  return 0;
}

int cmd_sample(const Options& o) {
  const ProcessSpec spec = build_spec(o);
  if (spec.process_case() == ProcessCase::general)
    throw ValidationError("sample: only the stationary, pinned and loop cases (centered Gaussian or Dirac data) can be "
                          "sampled");
  const double T = spec.horizon();
  const GaussianCase gc = gaussian_case(spec, time_grid(o, 0.0, T));
  const Region F = parse_region(o.region, spec.dimension());
  const SampleBatch batch = sample_paths(gc, o.count, o.seed);
  write_table(batch_table(batch), o, o.output);

  auto z = [](double est, double exact, double se) -> std::optional<double> {
    if (se > 0.0) return (est - exact) / se;
    if (est == exact) return 0.0;
    return std::nullopt;
  };
  Table summary({"t", "width", "width_stderr", "rho", "z_width", "P_empirical", "P_stderr", "P_closed", "z_P"});
  double worst = 0.0;
  for (std::size_t k = 0; k < gc.times.size(); ++k) {
    const double t = gc.times[k];
    const Estimate w = empirical_width(batch, k);
    const double rho = width_parameter(gc.kind, t, T);
    const Estimate p = empirical_region_probability(batch, F, k);
    const double pc = region_probability(spec, F, t);
    const auto zw = z(w.value, rho, w.std_error), zp = z(p.value, pc, p.std_error);
    if (zw) worst = std::max(worst, std::abs(*zw));
    if (zp) worst = std::max(worst, std::abs(*zp));
    summary.add_row({fmt(t), fmt(w.value), fmt(w.std_error), fmt(rho), fmt(zw), fmt(p.value), fmt(p.std_error), fmt(pc),
                     fmt(zp)});
  }
  if (!o.summary.empty()) {
    write_table(summary, o, o.summary);
  } else {
    std::ostream& os = o.output.empty() ? std::cerr : std::cout;
    summary.write_csv(os);
  }
  std::cerr << "sample: max |z| = " << worst << "\n";
  return 0;
}

int cmd_verify(const Options& o) {
  detail::require(o.tol_scale > 0.0, "verify: --tol-scale must be positive");
  const auto results = run_acceptance(o.tol_scale);
  Table table({"criterion", "name", "status", "measured", "tolerance", "seconds", "time_limit", "detail"});
  bool all = true;
  for (const auto& r : results) {
    std::string detail = r.detail;
    std::replace(detail.begin(), detail.end(), ',', ' ');
    table.add_row({std::to_string(r.id), r.name, r.passed ? "PASS" : "FAIL", fmt(r.measured), fmt(r.tolerance),
                   fmt(r.seconds), fmt(r.time_limit), detail});
    all = all && r.passed;
  }
  write_table(table, o, o.output);
  return all ? 0 : 1;
}

void add_spec_options(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "JSON process spec {d, T, phi0, psiT}")->check(CLI::ExistingFile);
  sub->add_option("--case", o.preset, "preset data: stationary, pinned_start, pinned_end, loop");
  sub->add_option("--d", o.d, "dimension")->check(CLI::PositiveNumber);
  sub->add_option("--T", o.T, "horizon");
  sub->add_option("--phi0", o.phi0, "initial datum kind[:sigma[:a]] (gaussian, hat_product, hat_isotropic, dirac)");
  sub->add_option("--psiT", o.psiT, "final datum, same syntax as --phi0");
}

void add_grid_options(CLI::App* sub, Options& o) {
  sub->add_option("--t-start", o.t_start, "first grid time");
  sub->add_option("--t-end", o.t_end, "last grid time");
  sub->add_option("--steps", o.steps, "number of grid times");
}

void add_output_options(CLI::App* sub, Options& o) {
  sub->add_option("--output", o.output, "output file (stdout if omitted)");
  sub->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bernstein process laboratory for the harmonic oscillator"};
  app.require_subcommand(1, 1);
  Options o;

  auto* kernel = app.add_subcommand("kernel-eval", "Mehler kernel: closed form, truncated series and tail bound");
  kernel->add_option("--x", o.xs, "evaluation point(s) x, comma-separated coordinates");
  kernel->add_option("--y", o.ys, "evaluation point(s) y, comma-separated coordinates");
  kernel->add_option("--N", o.kernel_N, "series truncation per axis");
  add_grid_options(kernel, o);
  add_output_options(kernel, o);
  kernel->add_option("--emit-plot-script", o.plot_script, "write a gnuplot script for the CSV output");

  auto* scan = app.add_subcommand("prob-scan", "P(Z_t in F) over a time grid");
  add_spec_options(scan, o);
  scan->add_option("--region", o.region, "annulus:R1:R2 | ball:r[:c] | hypercube:h[:c] | box:lo:hi | full | point:p");
  scan->add_option("--order", o.order, "quadrature order")->check(CLI::Range(4, 256));
  scan->add_option("--tol-scale", o.tol_scale, "scale of the consistency tolerance 1e-6");
  add_grid_options(scan, o);
  add_output_options(scan, o);
  scan->add_option("--emit-plot-script", o.plot_script, "write a gnuplot script for the CSV output");

  auto* joint = app.add_subcommand("joint-prob", "P(Z_0 in F0, Z_T in FT) and its ground-state approximation");
  add_spec_options(joint, o);
  joint->add_option("--region", o.region, "region used for both ends unless --F0/--FT are given");
  joint->add_option("--F0", o.region0, "initial region");
  joint->add_option("--FT", o.regionT, "final region");
  joint->add_option("--order", o.order, "quadrature order")->check(CLI::Range(4, 256));
  add_output_options(joint, o);

  auto* galerkin = app.add_subcommand("galerkin-error", "Galerkin truncation errors against the exact solution");
  add_spec_options(galerkin, o);
  galerkin->add_option("--N", o.N, "truncations to compare");
  add_grid_options(galerkin, o);
  add_output_options(galerkin, o);
  galerkin->add_option("--emit-plot-script", o.plot_script, "write a gnuplot script for the CSV output");

  auto* sample = app.add_subcommand("sample", "exact Gaussian path sampling with a Monte Carlo summary");
  add_spec_options(sample, o);
  sample->add_option("--region", o.region, "region for the empirical probabilities");
  sample->add_option("--count", o.count, "number of paths")->check(CLI::PositiveNumber);
  sample->add_option("--seed", o.seed, "random seed");
  sample->add_option("--summary", o.summary, "summary file (stdout when --output is set, stderr otherwise)");
  add_grid_options(sample, o);
  add_output_options(sample, o);

  auto* verify = app.add_subcommand("verify", "run the acceptance suite");
  verify->add_option("--tol-scale", o.tol_scale, "multiply numeric tolerances");
  add_output_options(verify, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*kernel) return cmd_kernel_eval(o);
    if (*scan) return cmd_prob_scan(o);
    if (*joint) return cmd_joint_prob(o);
    if (*galerkin) return cmd_galerkin_error(o);
    if (*sample) return cmd_sample(o);
    if (*verify) return cmd_verify(o);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const UnsupportedError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
