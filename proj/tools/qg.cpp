// Command-line batch interface: identity verification suites, form-factor
// tables, Monte Carlo ensembles, Abel trace ladders and orbit-family sums,
// with CSV or JSON output.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qg/combinatorics.hpp"
#include "qg/graph.hpp"
#include "qg/ring.hpp"
#include "qg/series.hpp"

namespace {

using nlohmann::json;

struct OutputOptions {
  std::string format = "csv";
  std::string out_path;
};

void add_output_flags(CLI::App* cmd, OutputOptions& opts) {
  cmd->add_option("--format", opts.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--out", opts.out_path, "Write output to this file instead of stdout");
}

// Output lands in one shot: everything is rendered first, then written via a
// temporary file and rename so readers never observe a partial table.
void write_text(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  const std::string tmp = out_path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot open output file " + tmp);
    out << text;
  }
  if (std::rename(tmp.c_str(), out_path.c_str()) != 0)
    throw std::runtime_error("cannot move output into place at " + out_path);
}

std::string render_cell(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_float()) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v.get<double>());
    return buf;
  }
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.dump();
}

void write_rows(const OutputOptions& opts, const std::vector<std::string>& columns,
                const std::vector<json>& rows) {
  std::ostringstream text;
  if (opts.format == "json") {
    text << json(rows).dump(2) << "\n";
  } else {
    for (size_t i = 0; i < columns.size(); ++i)
      text << (i ? "," : "") << columns[i];
    text << "\n";
    for (const json& row : rows) {
      for (size_t i = 0; i < columns.size(); ++i)
        text << (i ? "," : "") << render_cell(row.at(columns[i]));
      text << "\n";
    }
  }
  write_text(opts.out_path, text.str());
}

std::pair<int, int> parse_range(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    const int n = std::stoi(text);
    return {n, n};
  }
  const int lo = std::stoi(text.substr(0, colon));
  const int hi = std::stoi(text.substr(colon + 1));
  if (hi < lo) throw std::invalid_argument("empty range " + text);
  return {lo, hi};
}

qg::graph::PhasedSystem load_system(const std::string& spec, int beta) {
  if (spec == "ring") {
    if (beta != 2)
      throw std::invalid_argument(
          "the ring ensemble has broken time reversal; use --beta 2");
    return qg::graph::ring_system(qg::kPi / 4);
  }
  if (spec.rfind("complete:", 0) == 0) {
    const int v = std::stoi(spec.substr(9));
    return qg::graph::phased_system(qg::graph::complete_graph(v), beta);
  }
  return qg::graph::phased_system(qg::graph::parse_graph_file(spec), beta);
}

// ---------------------------------------------------------------------------
// verify-identities
// ---------------------------------------------------------------------------

struct CheckResult {
  std::string name;
  bool pass = true;
  std::string detail;
};

int run_verify(int max_n, int order, int m_max, bool inject_fault,
               const OutputOptions& opts) {
  std::vector<CheckResult> results;
  const auto add = [&](const std::string& name, bool pass, const std::string& detail) {
    results.push_back({name, pass, detail});
  };

  {
    const qg::BigRational expect = inject_fault ? qg::BigRational(2) : qg::BigRational(1);
    CheckResult r{"pair-weight-sum", true, ""};
    for (int n = 2; n <= max_n && r.pass; ++n)
      for (int q = 1; q < n; ++q) {
        const qg::BigRational s = qg::orbit_pair_weight_sum(n, q);
        if (s != expect) {
          r.pass = false;
          r.detail = "first counterexample n=" + std::to_string(n) +
                     " q=" + std::to_string(q) + " sum=" + qg::fraction_string(s);
          break;
        }
      }
    results.push_back(r);
  }
  {
    CheckResult r{"pair-weight-recursion", true, ""};
    const int cap = std::min(max_n, 40);
    for (int n = 3; n <= cap && r.pass; ++n)
      for (int q = 1; q <= n - 2 && r.pass; ++q) {
        const int vcap = std::min(q, n - q) + 1;
        for (int v = 1; v <= vcap && r.pass; ++v)
          for (int vp = 1; vp <= vcap; ++vp) {
            const qg::BigRational res = qg::orbit_pair_recursion_residual(n, q, v, vp);
            if (!res.is_zero()) {
              r.pass = false;
              r.detail = "residual nonzero at n=" + std::to_string(n) + " q=" +
                         std::to_string(q) + " v=" + std::to_string(v) + " v'=" +
                         std::to_string(vp);
              break;
            }
          }
      }
    results.push_back(r);
  }
  {
    CheckResult r{"composition-convolution", true, ""};
    for (int n = 2; n <= max_n && r.pass; ++n)
      for (int v = 1; v <= n / 2 + 1; ++v)
        if (!qg::composition_convolution_identity(n, v)) {
          r.pass = false;
          r.detail = "n=" + std::to_string(n) + " v=" + std::to_string(v);
          break;
        }
    results.push_back(r);
  }
  {
    CheckResult r{"kravtchouk-consistency", true, ""};
    const int cap = std::min(max_n, 40);
    for (int s = 1; s <= cap && r.pass; ++s)
      for (int t = 1; t <= cap; ++t)
        if (!qg::kravtchouk_integer_consistent(s, t)) {
          r.pass = false;
          r.detail = "s=" + std::to_string(s) + " t=" + std::to_string(t);
          break;
        }
    results.push_back(r);
  }
  {
    CheckResult r{"kravtchouk-moment", true, ""};
    for (int m = 1; m <= m_max && r.pass; ++m)
      for (const qg::Parity p : {qg::Parity::even, qg::Parity::odd}) {
        const qg::MomentCheck c = qg::kravtchouk_moment_check(m, p);
        if (!c.equal) {
          r.pass = false;
          r.detail = "m=" + std::to_string(m) +
                     (p == qg::Parity::even ? " even" : " odd") + " lhs=" +
                     c.lhs.str() + " rhs=" + c.rhs.str();
          break;
        }
      }
    results.push_back(r);
  }
  add("gf-square", qg::kravtchouk_square_gf_po(order) == qg::kravtchouk_square_gf_closed(order),
      "order " + std::to_string(order));
  add("gf-cross", qg::kravtchouk_cross_gf_po(order) == qg::kravtchouk_cross_gf_closed(order),
      "order " + std::to_string(order));
  add("gf-bivariate", qg::kravtchouk_gf2_po(order) == qg::kravtchouk_gf2_closed(order),
      "total order " + std::to_string(order));
  {
    const qg::Series1 spectral = qg::form_factor_gf_spectral(order);
    bool pass = spectral == qg::form_factor_gf_po(order);
    std::string detail = "order " + std::to_string(order);
    for (int n = 0; n <= order && pass; ++n)
      if (spectral[n] != qg::rational_pow(qg::BigRational(2), n) * qg::ring::form_factor_exact(n)) {
        pass = false;
        detail = "coefficient n=" + std::to_string(n) + " != 2^n K(n)";
      }
    add("gf-form-factor", pass, detail);
  }
  {
    CheckResult r{"amplitude-completeness", true, ""};
    const int cap = std::min(max_n, 40);
    for (int n = 1; n <= cap; ++n) {
      const qg::ring::AmplitudeTable t = qg::ring::amplitude_table(n);
      if (t.square_sum() != 2 * qg::ring::form_factor_exact(n)) {
        r.pass = false;
        r.detail = "n=" + std::to_string(n);
        break;
      }
    }
    results.push_back(r);
  }
  {
    CheckResult r{"form-factor-po-equivalence", true, ""};
    const int cap = std::min(max_n, 40);
    for (int n = 1; n <= cap; ++n)
      if (qg::ring::form_factor_exact(n) != qg::ring::form_factor_po(n)) {
        r.pass = false;
        r.detail = "n=" + std::to_string(n);
        break;
      }
    results.push_back(r);
  }
  {
    CheckResult r{"form-factor-ensemble-cue", true, ""};
    for (int n = 1; n <= std::min(max_n, 25); ++n)
      if (qg::ring::form_factor_ensemble_po(n) != qg::ring::form_factor_cue(n)) {
        r.pass = false;
        r.detail = "n=" + std::to_string(n);
        break;
      }
    results.push_back(r);
  }
  {
    CheckResult r{"trace-ladder", true, ""};
    const std::vector<double> ladder{0.2, 0.1, 0.05, 0.02};
    for (int nu = 0; nu <= 4 && r.pass; ++nu)
      for (int kappa = 0; kappa <= nu && r.pass; ++kappa) {
        const qg::ring::AbelTraceSum abel(nu, kappa, 2000);
        const double target = abel.target();
        double prev = 1e9;
        for (double eps : ladder) {
          const double err = std::abs(abel.evaluate(eps) - target);
          if (err > prev + 1e-12 || (eps == 0.02 && err >= 0.05)) {
            r.pass = false;
            r.detail = "nu=" + std::to_string(nu) + " kappa=" + std::to_string(kappa) +
                       " eps=" + std::to_string(eps) + " err=" + std::to_string(err);
            break;
          }
          prev = err;
        }
      }
    results.push_back(r);
  }

  int failures = 0;
  if (opts.format == "json") {
    std::vector<json> rows;
    for (const CheckResult& r : results) {
      rows.push_back({{"check", r.name}, {"pass", r.pass}, {"detail", r.detail}});
      failures += r.pass ? 0 : 1;
    }
    write_rows(opts, {"check", "pass", "detail"}, rows);
  } else {
    std::ostringstream text;
    for (const CheckResult& r : results) {
      text << (r.pass ? "PASS " : "FAIL ") << r.name;
      if (!r.detail.empty()) text << ": " << r.detail;
      text << "\n";
      failures += r.pass ? 0 : 1;
    }
    text << (failures == 0 ? "all identities verified\n"
                           : std::to_string(failures) + " identity check(s) failed\n");
    write_text(opts.out_path, text.str());
  }
  return failures == 0 ? 0 : 1;
}

// ---------------------------------------------------------------------------

int run_form_factor(const std::string& graph_spec, const std::string& n_range,
                    const OutputOptions& opts) {
  if (graph_spec != "ring")
    throw std::invalid_argument("form-factor: only --graph ring is supported");
  const auto [lo, hi] = parse_range(n_range);
  std::vector<json> rows;
  for (const auto& entry : qg::ring::form_factor_table(std::max(lo, 1), hi)) {
    // one row per n; fold the four methods into columns
    if (entry.method != qg::ring::FormFactorMethod::exact) continue;
    const int n = entry.n;
    const qg::BigRational exact = qg::ring::form_factor_exact(n);
    const qg::BigRational po = qg::ring::form_factor_po(n);
    const qg::BigRational cue = qg::ring::form_factor_cue(n);
    rows.push_back({{"n", n},
                    {"K_exact", qg::to_double(exact)},
                    {"K_po", qg::to_double(po)},
                    {"K_approx", qg::ring::form_factor_asymptotic(n)},
                    {"K_cue", qg::to_double(cue)},
                    {"K_exact_frac", qg::fraction_string(exact)},
                    {"K_po_frac", qg::fraction_string(po)},
                    {"K_cue_frac", qg::fraction_string(cue)}});
  }
  write_rows(opts, {"n", "K_exact", "K_po", "K_approx", "K_cue", "K_exact_frac",
                    "K_po_frac", "K_cue_frac"},
             rows);
  return 0;
}

int run_mc(const std::string& graph_spec, int beta, const std::string& n_range,
           long long samples, std::uint64_t seed, const OutputOptions& opts) {
  const qg::graph::PhasedSystem sys = load_system(graph_spec, beta);
  const auto [lo, hi] = parse_range(n_range);
  const auto sweep = qg::graph::mc_form_factor_sweep(sys, hi, samples, seed);
  std::vector<json> rows;
  for (int n = std::max(lo, 1); n <= hi; ++n) {
    json row{{"n", n},
             {"estimate", sweep[n].estimate},
             {"stderr", sweep[n].std_error},
             {"exact_if_known", ""}};
    if (graph_spec == "ring")
      row["exact_if_known"] = qg::to_double(qg::ring::form_factor_exact(n));
    rows.push_back(row);
  }
  write_rows(opts, {"n", "estimate", "stderr", "exact_if_known"}, rows);
  return 0;
}

int run_trace_identity(int nu, int kappa, const std::string& eps_list, long long n0,
                       const OutputOptions& opts) {
  std::vector<double> ladder;
  std::stringstream ss(eps_list);
  std::string item;
  while (std::getline(ss, item, ',')) ladder.push_back(std::stod(item));
  if (ladder.empty()) throw std::invalid_argument("trace-identity: empty --eps list");
  double horizon_eps = *std::min_element(ladder.begin(), ladder.end());
  const qg::ring::AbelTraceSum abel(
      nu, kappa, static_cast<long long>(std::ceil(40.0 / horizon_eps)));
  const double target = abel.target();
  std::vector<json> rows;
  for (double eps : ladder) {
    const double sum = abel.evaluate(eps, n0);
    rows.push_back({{"epsilon", eps},
                    {"sum", sum},
                    {"target", target},
                    {"abs_error", std::abs(sum - target)}});
  }
  write_rows(opts, {"epsilon", "sum", "target", "abs_error"}, rows);
  return 0;
}

std::string family_key_string(const std::vector<int>& key) {
  std::string s;
  for (size_t i = 0; i < key.size(); ++i) {
    if (i) s += '|';
    s += std::to_string(key[i]);
  }
  return s;
}

int run_famsum(const std::string& graph_spec, int beta, int n,
               const OutputOptions& opts) {
  const qg::graph::PhasedSystem sys = load_system(graph_spec, beta);
  const qg::graph::FamilyTable table = qg::graph::enumerate_families(sys, n);
  std::vector<json> rows;
  long long total_orbits = 0;
  for (const auto& [key, entry] : table.families) {
    total_orbits += entry.orbit_count;
    rows.push_back({{"family_key", family_key_string(key)},
                    {"orbit_count", entry.orbit_count},
                    {"amp_re", entry.amplitude.real()},
                    {"amp_im", entry.amplitude.imag()}});
  }
  rows.push_back({{"family_key", "TOTAL"},
                  {"orbit_count", total_orbits},
                  {"amp_re", qg::graph::famsum_form_factor(table)},
                  {"amp_im", 0.0}});
  write_rows(opts, {"family_key", "orbit_count", "amp_re", "amp_im"}, rows);
  return 0;
}

int run_conjecture_report(const std::string& graph_spec, int beta,
                          const std::string& n_range, long long samples,
                          std::uint64_t seed, const OutputOptions& opts) {
  const qg::graph::PhasedSystem sys = load_system(graph_spec, beta);
  int lo = 1, hi = 3 * sys.dim() / 2;
  if (!n_range.empty()) std::tie(lo, hi) = parse_range(n_range);
  const auto sweep = qg::graph::mc_form_factor_sweep(sys, hi, samples, seed);
  std::vector<json> rows;
  for (int n = std::max(lo, 1); n <= hi; ++n) {
    const double tau = static_cast<double>(n) / sys.dim();
    rows.push_back({{"graph", graph_spec},
                    {"beta", beta},
                    {"n", n},
                    {"tau", tau},
                    {"estimate", sweep[n].estimate},
                    {"stderr", sweep[n].std_error},
                    {"rmt_reference", qg::graph::rmt_reference(tau, beta)}});
  }
  write_rows(opts, {"graph", "beta", "n", "tau", "estimate", "stderr", "rmt_reference"},
             rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quantum-graph spectral combinatorics toolkit"};
  app.require_subcommand(1);

  // verify-identities
  int max_n = 40, order = 30, m_max = 20;
  bool inject_fault = false;
  OutputOptions verify_opts;
  CLI::App* verify = app.add_subcommand(
      "verify-identities", "Run every exact identity suite and report PASS/FAIL");
  verify->add_option("--max-n", max_n)->check(CLI::Range(2, 200));
  verify->add_option("--order", order)->check(CLI::Range(2, 60));
  verify->add_option("--m-max", m_max)->check(CLI::Range(1, 60));
  verify->add_flag("--inject-fault", inject_fault)->group("");  // test hook
  add_output_flags(verify, verify_opts);

  // form-factor
  std::string ff_graph = "ring", ff_n = "1:40";
  OutputOptions ff_opts;
  CLI::App* ff = app.add_subcommand("form-factor",
                                    "Ring form-factor table (exact, po, approx, cue)");
  ff->add_option("--graph", ff_graph);
  ff->add_option("--n", ff_n, "n or lo:hi");
  add_output_flags(ff, ff_opts);

  // mc
  std::string mc_graph, mc_n = "1:8";
  int mc_beta = 2;
  long long mc_samples = 100000;
  std::uint64_t mc_seed = 1;
  OutputOptions mc_opts;
  CLI::App* mc = app.add_subcommand("mc", "Monte Carlo form-factor estimates");
  mc->add_option("--graph", mc_graph, "ring | complete:V | graph file")->required();
  mc->add_option("--beta", mc_beta)->check(CLI::IsMember({1, 2}));
  mc->add_option("--n", mc_n, "n or lo:hi");
  mc->add_option("--samples", mc_samples)->check(CLI::PositiveNumber);
  mc->add_option("--seed", mc_seed);
  add_output_flags(mc, mc_opts);

  // trace-identity
  int ti_nu = 0, ti_kappa = 0;
  long long ti_n0 = 0;
  std::string ti_eps = "0.2,0.1,0.05,0.02";
  OutputOptions ti_opts;
  CLI::App* ti = app.add_subcommand("trace-identity",
                                    "Abel ladder for the trace autocorrelation");
  ti->add_option("--nu", ti_nu)->required()->check(CLI::Range(0, 16));
  ti->add_option("--kappa", ti_kappa)->required()->check(CLI::Range(0, 16));
  ti->add_option("--eps", ti_eps, "comma-separated epsilon ladder");
  ti->add_option("--n0", ti_n0, "lower summation limit");
  add_output_flags(ti, ti_opts);

  // famsum
  std::string fs_graph;
  int fs_beta = 2, fs_n = 0;
  OutputOptions fs_opts;
  CLI::App* fs = app.add_subcommand("famsum", "Orbit-family amplitude sums");
  fs->add_option("--graph", fs_graph)->required();
  fs->add_option("--beta", fs_beta)->check(CLI::IsMember({1, 2}));
  fs->add_option("--n", fs_n)->required()->check(CLI::PositiveNumber);
  add_output_flags(fs, fs_opts);

  // conjecture-report
  std::string cr_graph, cr_n;
  int cr_beta = 2;
  long long cr_samples = 4000;
  std::uint64_t cr_seed = 7;
  OutputOptions cr_opts;
  CLI::App* cr = app.add_subcommand(
      "conjecture-report", "MC form factor vs COE/CUE reference for a graph family");
  cr->add_option("--graph", cr_graph)->required();
  cr->add_option("--beta", cr_beta)->check(CLI::IsMember({1, 2}));
  cr->add_option("--n", cr_n, "n or lo:hi (default 1 : 3B)");
  cr->add_option("--samples", cr_samples)->check(CLI::PositiveNumber);
  cr->add_option("--seed", cr_seed);
  add_output_flags(cr, cr_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (verify->parsed())
      return run_verify(max_n, order, m_max, inject_fault, verify_opts);
    if (ff->parsed()) return run_form_factor(ff_graph, ff_n, ff_opts);
    if (mc->parsed())
      return run_mc(mc_graph, mc_beta, mc_n, mc_samples, mc_seed, mc_opts);
    if (ti->parsed())
      return run_trace_identity(ti_nu, ti_kappa, ti_eps, ti_n0, ti_opts);
    if (fs->parsed()) return run_famsum(fs_graph, fs_beta, fs_n, fs_opts);
    if (cr->parsed())
      return run_conjecture_report(cr_graph, cr_beta, cr_n, cr_samples, cr_seed, cr_opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
