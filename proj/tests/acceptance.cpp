// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// Usage: dlsa_acceptance [path-to-dlsa-cli]

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "dlsa/combiner.hpp"
#include "dlsa/envelope.hpp"
#include "dlsa/pipeline.hpp"
#include "dlsa/shrinkage.hpp"
#include "dlsa/simulation.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace dlsa;
using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
namespace fs = std::filesystem;

namespace {

int failures = 0;

struct Outcome {
  bool pass = true;
  std::string detail;
};

void criterion(const std::string& id, const std::string& title, double budget_seconds,
               const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (budget_seconds > 0 && secs > budget_seconds) {
    out.pass = false;
    out.detail += " [over time budget " + std::to_string(static_cast<int>(budget_seconds)) + " s]";
  }
  if (!out.pass) ++failures;
  std::printf("%s %-5s %s | %s | %.1f s\n", out.pass ? "PASS" : "FAIL", id.c_str(), title.c_str(),
              out.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(double x, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << x;
  return s.str();
}

std::string fmt(const VectorXd& v, int precision = 3) {
  std::ostringstream s;
  s.precision(precision);
  s << "(";
  for (Index i = 0; i < v.size(); ++i) s << (i ? " " : "") << v(i);
  s << ")";
  return s.str();
}

IndexSet all_indices(Index q) {
  IndexSet s;
  for (Index j = 0; j < q; ++j) s.push_back(j);
  return s;
}

VectorXd weights_of(const VectorXd& theta) { return theta.cwiseAbs().cwiseInverse(); }

sim::SimulationReport scenario(int example, sim::Setting setting, std::uint64_t n) {
  sim::ScenarioSpec s;
  s.example = example;
  s.setting = setting;
  s.n_total = n;
  s.workers = 5;
  s.replications = 100;
  return sim::run_scenario(s);
}

VectorXd on_support(const VectorXd& v, const IndexSet& support) {
  VectorXd out(static_cast<Index>(support.size()));
  for (std::size_t i = 0; i < support.size(); ++i) out(static_cast<Index>(i)) = v(support[i]);
  return out;
}

Outcome linear_exactness() {
  std::mt19937_64 rng(1001);
  double worst = 0.0;
  for (int dataset = 0; dataset < 20; ++dataset) {
    const VectorXd theta = oracle::random_vector(8, rng);
    const auto pooled = fixture::draw(ModelFamily::linear(), 5000, theta, rng);
    const VectorXd reference = oracle::ols(pooled.covariates(), pooled.response());
    for (Index k : {1, 2, 5, 10}) {
      std::vector<LocalSummary> s;
      const Index rows = 5000 / k;
      for (Index i = 0; i < k; ++i) {
        DataPartition part(static_cast<std::uint64_t>(i), pooled.covariates().middleRows(i * rows, rows),
                           pooled.response().segment(i * rows, rows));
        s.push_back(fit_local(ModelFamily::linear(), part));
      }
      worst = std::max(worst, (combine_wlse(s).theta_tilde.stacked() - reference).lpNorm<Eigen::Infinity>());
    }
  }
  return {worst <= 1e-8, "max |theta_tilde - OLS| = " + fmt(worst) + " (tol 1e-8)"};
}

Outcome table1_setting1() {
  const auto r = scenario(1, sim::Setting::iid, 10000);
  const auto& ree = r.row("DLSA").ree;
  const bool ree_ok = (ree.array() >= 0.97).all() && (ree.array() <= 1.03).all();
  const bool ms_ok = r.ms >= 3.0 && r.ms <= 3.1;
  const bool cm_ok = r.cm >= 0.95;
  return {ree_ok && ms_ok && cm_ok,
          "DLSA REE " + fmt(ree) + " in [0.97,1.03]; MS " + fmt(r.ms) + " in [3.0,3.1]; CM " + fmt(r.cm) +
              " >= 0.95"};
}

Outcome table2_setting2() {
  const auto r = scenario(2, sim::Setting::heterogeneous, 20000);
  const double dlsa = r.row("DLSA").ree.mean();
  const double os = r.row("OS").ree.mean();
  const double csl = r.row("CSL").ree.mean();
  const bool ok = dlsa >= 0.93 && os >= 0.8 && os <= 0.97 && csl <= 0.6 && dlsa > os && os > csl;
  return {ok, "mean REE DLSA " + fmt(dlsa) + " >= 0.93; OS " + fmt(os) + " in [0.8,0.97]; CSL " + fmt(csl) +
                  " <= 0.6; DLSA > OS > CSL"};
}

Outcome table3_csl_collapse() {
  const auto r = scenario(3, sim::Setting::heterogeneous, 10000);
  const auto& csl = r.row("CSL").ree;
  const auto& dlsa = r.row("DLSA").ree;
  const bool ok = csl.maxCoeff() <= 0.15 && dlsa.minCoeff() >= 0.9;
  return {ok, "max REE CSL " + fmt(csl.maxCoeff()) + " <= 0.15; min REE DLSA " + fmt(dlsa.minCoeff()) + " >= 0.9"};
}

Outcome sdlsa_gain() {
  const auto r = scenario(4, sim::Setting::heterogeneous, 10000);
  const auto support = sim::true_params(4).true_support();
  const VectorXd ree = on_support(r.row("SDLSA").ree, support);
  const bool ok = ree.minCoeff() >= 0.95 && ree.maxCoeff() > 1.0;
  return {ok, "SDLSA REE on true support " + fmt(ree) + "; need all >= 0.95 and one > 1.0"};
}

Outcome censoring_rate() {
  // Fraction over the full R = 100 study at N = 20000; single replications are
  // reported alongside.
  sim::ScenarioSpec s;
  s.example = 4;
  s.n_total = 20000;
  std::string detail;
  bool ok = true;
  for (auto setting : {sim::Setting::iid, sim::Setting::heterogeneous}) {
    s.setting = setting;
    double total = 0.0, lo = 1.0, hi = 0.0, first = 0.0;
    for (std::uint64_t r = 0; r < s.replications; ++r) {
      const auto data = sim::generate(s, r);
      double censored = 0.0;
      for (const auto& p : data.partitions) censored += static_cast<double>((p.event().array() == 0.0).count());
      const double frac = censored / static_cast<double>(s.n_total);
      if (r == 0) first = frac;
      lo = std::min(lo, frac);
      hi = std::max(hi, frac);
      total += frac;
    }
    const double frac = total / static_cast<double>(s.replications);
    ok = ok && frac >= 0.25 && frac <= 0.35;
    detail += std::string(detail.empty() ? "" : "; ") + "setting " + std::to_string(static_cast<int>(setting)) +
              " censored " + fmt(frac) + " in [0.25,0.35] (replication 0 " + fmt(first) + ", range " + fmt(lo) +
              "-" + fmt(hi) + ")";
  }
  return {ok, detail};
}

Outcome finite_differences() {
  std::mt19937_64 rng(1007);
  double worst_g = 0.0, worst_h = 0.0;
  for (int f = 0; f < 5; ++f) {
    const auto& family = fixture::family_of(f);
    const auto ncut = family.num_cutpoints();
    for (int probe = 0; probe < 200; ++probe) {
      const auto truth = fixture::probe_params(family, 4, rng);
      const auto data = fixture::draw(family, 40, truth.coefficients, rng, 1.0, truth.cutpoints);
      const VectorXd at = fixture::probe_params(family, 4, rng).stacked();
      const auto value = [&](const VectorXd& v) { return loss(family, ParamVector::from_stacked(v, ncut), data); };
      const auto grad = [&](const VectorXd& v) {
        return gradient(family, ParamVector::from_stacked(v, ncut), data);
      };
      worst_g = std::max(worst_g, oracle::rel_error(grad(at), oracle::fd_gradient(value, at)));
      worst_h = std::max(worst_h, oracle::rel_error(hessian(family, ParamVector::from_stacked(at, ncut), data),
                                                    oracle::fd_jacobian(grad, at)));
    }
  }
  return {worst_g <= 1e-6 && worst_h <= 1e-5,
          "worst gradient error " + fmt(worst_g) + " (tol 1e-6), hessian " + fmt(worst_h) + " (tol 1e-5)"};
}

Outcome kkt_certificates() {
  std::mt19937_64 rng(1008);
  double worst = 0.0;
  std::size_t knots = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const MatrixXd omega = oracle::random_spd(8, rng, 20.0);
    const VectorXd theta = oracle::random_vector(8, rng);
    const auto path = lasso_path(omega, theta, all_indices(8));
    const VectorXd w = weights_of(theta);
    for (std::size_t i = 0; i < path.knots.size(); ++i) {
      worst = std::max(worst, oracle::kkt_violation(omega, theta, w, path.knots[i], path.coefficients[i]));
    }
    knots += path.knots.size();
  }
  return {worst <= 1e-7, std::to_string(knots) + " knots, worst KKT violation " + fmt(worst) + " (tol 1e-7)"};
}

Outcome soft_threshold() {
  std::mt19937_64 rng(1009);
  std::uniform_real_distribution<double> unif(0.5, 3.0);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    VectorXd d(8);
    for (Index j = 0; j < 8; ++j) d(j) = unif(rng);
    const VectorXd theta = oracle::random_vector(8, rng);
    const auto path = lasso_path(MatrixXd(d.asDiagonal()), theta, all_indices(8));
    std::vector<double> expected{0.0};
    for (Index j = 0; j < 8; ++j) expected.push_back(2 * d(j) * theta(j) * theta(j));
    std::sort(expected.rbegin(), expected.rend());
    if (path.knots.size() != expected.size()) return {false, "knot count mismatch"};
    for (std::size_t i = 0; i < expected.size(); ++i) {
      worst = std::max(worst, std::abs(path.knots[i] - expected[i]) / std::max(1.0, expected[i]));
      worst = std::max(worst, (path.coefficients[i] - oracle::diagonal_solution(d, theta, path.knots[i]))
                                  .lpNorm<Eigen::Infinity>());
    }
  }
  return {worst <= 1e-9, "worst deviation from the closed form " + fmt(worst) + " (tol 1e-9)"};
}

Outcome dbic_brute_force() {
  std::mt19937_64 rng(1010);
  std::uniform_int_distribution<Index> dim(2, 8);
  int agree = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Index q = dim(rng);
    const MatrixXd omega = oracle::random_spd(q, rng, 10.0);
    VectorXd theta = oracle::random_vector(q, rng, 0.05);
    theta(0) += 1.0;
    const std::uint64_t n = 2000;
    const auto sel = dbic(lasso_path(omega, theta, all_indices(q)), omega, theta, n);
    const auto brute = oracle::brute_force_dbic(omega, theta, weights_of(theta), n);
    worst = std::max(worst, std::abs(sel.dbic_min - brute.value) / std::max(1.0, std::abs(brute.value)));
    if (sel.support == brute.support) ++agree;
  }
  return {agree == 100 && worst <= 1e-9,
          std::to_string(agree) + "/100 supports agree, worst DBIC gap " + fmt(worst)};
}

Outcome envelope_round_trip() {
  std::mt19937_64 rng(1011);
  std::uniform_int_distribution<int> kind(0, 4), dim(1, 9);
  std::uniform_int_distribution<std::uint64_t> big;
  int ok = 0;
  for (int i = 0; i < 1000; ++i) {
    const int k = kind(rng);
    const ModelFamily family =
        k == 4 ? ModelFamily::ordered_probit(4) : ModelFamily::from_tag(static_cast<std::uint16_t>(k), 0);
    const Index p = dim(rng);
    VectorXd cuts = fixture::default_cuts().head(family.num_cutpoints());
    const LocalSummary s(family, big(rng), 1 + big(rng) % 1000000,
                         ParamVector(oracle::random_vector(p, rng, 10), cuts),
                         oracle::random_spd(family.num_params(p), rng, 1e3) * 1e4);
    const auto bytes = wire::encode(s);
    if (bytes.size() == wire::encoded_size(static_cast<std::size_t>(s.q())) && wire::decode(bytes) == s &&
        wire::encode(wire::decode(bytes)) == bytes) {
      ++ok;
    }
  }
  return {ok == 1000, std::to_string(ok) + "/1000 bit-exact round trips"};
}

Outcome byte_accounting() {
  std::mt19937_64 rng(1012);
  std::string detail;
  bool ok = true;
  for (int f = 0; f < 5; ++f) {
    const auto& family = fixture::family_of(f);
    const auto truth = fixture::probe_params(family, 8, rng);
    std::vector<DataPartition> parts;
    const std::uint64_t k = 4;
    for (std::uint64_t i = 0; i < k; ++i) {
      parts.push_back(fixture::draw(family, 500, truth.coefficients, rng, 1.0, truth.cutpoints, i));
    }
    const auto q = static_cast<std::size_t>(family.num_params(8));
    const auto plain = run_partitions(parts, family, {.shrink = true, .csl = false, .threads = 0});
    const auto csl = run_partitions(parts, family, {.shrink = false, .csl = true, .threads = 0});
    ok = ok && plain.ledger.messages() == k && plain.ledger.bytes() == k * wire::encoded_size(q) &&
         csl.ledger.messages() == 2 * k &&
         csl.ledger.bytes() == k * (wire::encoded_size(q) + gradient_message_size(q));
    detail += std::string(detail.empty() ? "" : "; ") + std::string(family.name()) + " " +
              std::to_string(plain.ledger.bytes()) + " B/" + std::to_string(plain.ledger.messages()) + " msg";
  }
  return {ok, detail + " (= K x envelope size, one round; CSL 2K)"};
}

Outcome million_row_smoke(const std::string& cli) {
  if (cli.empty()) return {false, "no CLI path given"};
  const auto dir = fs::temp_directory_path() / "dlsa_acceptance_1m";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::mt19937_64 rng(1013);
    std::normal_distribution<double> normal;
    std::FILE* f = std::fopen((dir / "data.csv").c_str(), "w");
    if (!f) return {false, "cannot write fixture"};
    std::fputs("y,x1,x2,x3,x4,x5,x6,x7,x8\n", f);
    const double theta[8] = {3, 1.5, 0, 0, 2, 0, 0, 0};
    for (int i = 0; i < 1'000'000; ++i) {
      double x[8], eta = 0.0;
      for (int j = 0; j < 8; ++j) {
        x[j] = normal(rng);
        eta += theta[j] * x[j];
      }
      std::fprintf(f, "%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", eta + normal(rng), x[0], x[1], x[2], x[3],
                   x[4], x[5], x[6], x[7]);
    }
    std::fclose(f);
    std::ofstream(dir / "schema.json") << R"({"columns": [{"name": "y", "role": "response"},
      {"name": "x1", "role": "numeric"}, {"name": "x2", "role": "numeric"}, {"name": "x3", "role": "numeric"},
      {"name": "x4", "role": "numeric"}, {"name": "x5", "role": "numeric"}, {"name": "x6", "role": "numeric"},
      {"name": "x7", "role": "numeric"}, {"name": "x8", "role": "numeric"}]})";
  }
  const std::string cmd = cli + " fit --family linear --input " + (dir / "data.csv").string() + " --schema " +
                          (dir / "schema.json").string() + " --k 10 --out " + (dir / "out").string() +
                          " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(dir / "out" / "summary.txt");
  std::string line;
  std::string messages;
  while (std::getline(in, line)) {
    if (line.rfind("total messages: ", 0) == 0) messages = line.substr(16);
  }
  fs::remove_all(dir);
  return {code == 0 && messages == "10",
          "exit " + std::to_string(code) + ", total messages " + (messages.empty() ? "?" : messages) + " (K = 10)"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  criterion("1", "linear DLSA equals pooled least squares", 10, linear_exactness);
  criterion("2", "example 1 setting 1: DLSA REE, MS, CM", 120, table1_setting1);
  criterion("3", "example 2 setting 2: DLSA > OS > CSL", 300, table2_setting2);
  criterion("4", "example 3 setting 2: CSL collapse", 180, table3_csl_collapse);
  criterion("5", "example 4 setting 2: SDLSA efficiency gain", 300, sdlsa_gain);
  criterion("6", "cox censoring rate at N = 20000", 5, censoring_rate);
  criterion("7a", "finite-difference derivatives, 5 families x 200 probes", 0, finite_differences);
  criterion("7b", "KKT at every LARS knot, 50 problems", 0, kkt_certificates);
  criterion("7c", "diagonal precision soft-threshold path", 0, soft_threshold);
  criterion("7d", "DBIC knot selection vs all-subsets brute force", 0, dbic_brute_force);
  criterion("7e", "envelope round trip, 1000 trials", 0, envelope_round_trip);
  criterion("7f", "single-round byte accounting", 0, byte_accounting);
  criterion("8", "dlsa fit on a 1M-row CSV in one round", 0, [&] { return million_row_smoke(cli); });
  std::printf("%s: %d criteria failed\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
