#include "vdm/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "vdm/cumulants.hpp"
#include "vdm/error.hpp"
#include "vdm/montecarlo.hpp"

namespace vdm {

namespace {

using nlohmann::json;

struct Globals {
  bool json = false;
  std::string cache_path;
  std::uint64_t seed = 1;
  std::size_t trials = 2000;
  int guard_override = 0;
  unsigned threads = 1;
};

class Session {
 public:
  Session(const Globals& g, std::ostream& out, std::ostream& err) : g_(g), out_(out), err_(err) {}

  MomentEngine& moments() {
    if (!moments_) {
      MomentOptions options;
      if (g_.guard_override > 0) {
        options.letter_guard = g_.guard_override;
        options.partition_guard = std::max(options.partition_guard, g_.guard_override / 2);
      }
      moments_ = std::make_unique<MomentEngine>(options, cache());
    }
    return *moments_;
  }

  LambdaCache* cache() {
    if (!cache_ && !cache_path().empty()) {
      cache_ = std::make_unique<LambdaCache>(cache_path());
      for (const auto& w : cache_->warnings()) err_ << "warning: " << w << "\n";
    }
    return cache_.get();
  }

  std::string cache_path() const {
    if (!g_.cache_path.empty()) return g_.cache_path;
    const char* env = std::getenv(kCacheEnvVar);
    return env ? env : "";
  }

  MonteCarloOptions mc_options() const { return MonteCarloOptions{g_.threads}; }

  void emit(const json& j, const std::string& human) {
    if (g_.json) out_ << j.dump() << "\n";
    else out_ << human << "\n";
  }

  const Globals& globals() const { return g_; }
  std::ostream& err() { return err_; }

 private:
  const Globals& g_;
  std::ostream& out_;
  std::ostream& err_;
  std::unique_ptr<LambdaCache> cache_;
  std::unique_ptr<MomentEngine> moments_;
};

json stats_json(const DerivationStats& s) {
  return {{"words_evaluated", s.words_evaluated},
          {"memo_hits", s.memo_hits},
          {"partitions_summed", s.partitions_summed},
          {"max_depth", s.max_depth}};
}

json function_json(const PiecewisePoly& f) {
  return {{"text", f.to_string()}, {"function", f.to_json()}, {"tau", to_string(f.tau())}, {"constant", f.is_constant()}};
}

std::vector<PiecewisePoly> parse_functions(const std::vector<std::string>& texts) {
  std::vector<PiecewisePoly> out;
  for (const auto& s : texts) out.push_back(parse_function(s));
  return out;
}

std::string fixed(double x, int digits = 6) {
  std::ostringstream os;
  os << std::setprecision(digits) << x;
  return os.str();
}

std::string report_line(const EstimatorReport& r) {
  std::ostringstream os;
  os << r.word << "  N=" << r.N << " trials=" << r.trials << " seed=" << r.seed << "  mean=" << fixed(r.mean.real());
  if (std::abs(r.mean.imag()) > 0) os << (r.mean.imag() < 0 ? " - " : " + ") << fixed(std::abs(r.mean.imag())) << "i";
  os << " stderr=" << fixed(r.stderr_, 3);
  if (r.analytic) os << "  analytic=" << fixed(*r.analytic);
  if (r.verdict) os << "  " << *r.verdict;
  return os.str();
}

std::vector<int> parse_sizes(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw ArgumentError("bad matrix size '" + item + "' in list '" + text + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ArgumentError("empty matrix size list");
  return out;
}

// One paper value recomputed through the engines.
struct TableRow {
  std::string quantity;
  std::string paper;
  std::string computed;
  bool pass;
};

std::vector<TableRow> compute_table(MomentEngine& m, LambdaCache* cache, std::size_t& cache_hits) {
  std::vector<TableRow> rows;
  auto add = [&](std::string q, std::string paper, std::string computed, bool pass) {
    rows.push_back({std::move(q), std::move(paper), std::move(computed), pass});
  };
  const auto xx = m.expectation(parse_word("X X*")).value, x_x = m.expectation(parse_word("X* X")).value;
  add("E(X X*), E(X* X)", "1, 1", xx.to_string() + ", " + x_x.to_string(), xx.is_one() && x_x.is_one());
  const auto p2 = m.expectation(parse_word("(X X*)^2")).value;
  add("E((X X*)^2)", "2", p2.to_string(), p2 == PiecewisePoly::constant(2));
  const auto p3 = m.trace_moment(parse_word("(X* X)^3"));
  add("tau E((X* X)^3)", "5", to_string(p3), p3 == 5);
  const auto p4 = m.expectation(parse_word("(X X*)^4")).value;
  add("E((X X*)^4)", "14 + 2/3", p4.to_string(), p4 == PiecewisePoly::constant(parse_rational("44/3")));
  const auto q4 = m.expectation(parse_word("(X* X)^4")).value;
  add("E((X* X)^4)", "14 + 1/2 + t(1 - t)", q4.to_string(), q4 == parse_function("29/2 + t - t^2"));
  const auto lam = m.lambda().function(parse_partition("{1,3|2,4}"), std::vector<PiecewisePoly>(3, PiecewisePoly::one())).f;
  add("Lambda_{1,3|2,4}(1,1,1)", "1/2 + t(1 - t)", lam.to_string(), lam == parse_function("1/2 + t - t^2"));
  MomentOptions wide = m.options();
  wide.letter_guard = std::max(wide.letter_guard, 24);
  MomentEngine witness_engine(wide, cache);
  const auto witness = witness_engine.trace_moment(
      parse_word_expression("((X* X)^4 - 44/3) ((X X*)^2 - 2) ((X* X)^4 - 44/3) ((X X*)^2 - 2)"));
  add("tau E(((X*X)^4 - 44/3)((XX*)^2 - 2)((X*X)^4 - 44/3)((XX*)^2 - 2))", "1/270", to_string(witness),
      witness == parse_rational("1/270"));
  cache_hits = m.lambda().stats().cache_hits + witness_engine.lambda().stats().cache_hits;
  return rows;
}

void add_globals(CLI::App& app, Globals& g) {
  app.add_flag("--json", g.json, "Emit one JSON object per result line");
  app.add_option("--cache-path", g.cache_path, std::string("Lambda cache file (default: $") + kCacheEnvVar + ")");
  app.add_option("--seed", g.seed, "Monte Carlo seed")->capture_default_str();
  app.add_option("--trials", g.trials, "Monte Carlo trials")->capture_default_str()->check(CLI::Range(2, 100000000));
  app.add_option("--guard-override", g.guard_override,
                 "Raise the letter guard to this many matrix letters (partition guard to half of it)")
      ->check(CLI::Range(1, 64));
  app.add_option("--threads", g.threads, "Monte Carlo worker threads")->capture_default_str()->check(CLI::Range(1, 256));
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Asymptotic *-distribution of random Vandermonde matrices", "vdm"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  add_globals(app, g);
  Session session(g, out, err);
  int status = kExitOk;

  // moment / trace / diag
  std::string word_text;
  auto* moment = app.add_subcommand("moment", "C[0,1]-valued expectation E(word)");
  moment->add_option("word", word_text, "Word expression, e.g. \"(X* X)^4\"")->required();
  moment->callback([&] {
    const auto r = session.moments().expectation(parse_word_expression(word_text));
    json j{{"kind", "moment"}, {"word", word_text}, {"stats", stats_json(r.stats)}};
    j.update(function_json(r.value));
    session.emit(j, "E = " + r.value.to_string() + "\ntau = " + to_string(r.value.tau()));
  });

  auto* trace = app.add_subcommand("trace", "Scalar moment tau(E(word))");
  trace->add_option("word", word_text, "Word expression")->required();
  trace->callback([&] {
    const auto r = session.moments().expectation(parse_word_expression(word_text));
    const auto v = r.value.tau();
    session.emit({{"kind", "trace"}, {"word", word_text}, {"value", to_string(v)}, {"stats", stats_json(r.stats)}},
                 to_string(v));
  });

  std::string t_text;
  auto* diag = app.add_subcommand("diag", "Diagonal limit E(word)(t) of an alternating word");
  diag->add_option("word", word_text, "Alternating word of even length")->required();
  diag->add_option("--t", t_text, "Point in [0,1], rational")->required();
  diag->callback([&] {
    const auto t = parse_rational(t_text);
    const auto v = session.moments().diagonal_limit(parse_word(word_text), t);
    session.emit({{"kind", "diag"}, {"word", word_text}, {"t", to_string(t)}, {"value", to_string(v)}}, to_string(v));
  });

  // lambda / gamma
  std::string partition_text, tau_text;
  std::vector<std::string> g_texts;
  auto* lambda = app.add_subcommand("lambda", "Lambda_pi(g_1..g_{n-1}) as a function, at t, or tau(Lambda_pi(g) g_n)");
  lambda->add_option("partition", partition_text, "Partition such as {1,3|2,4}")->required();
  lambda->add_option("g", g_texts, "Polynomial arguments g_1..g_{n-1}");
  lambda->add_option("--t", t_text, "Evaluate at this rational point only");
  lambda->add_option("--tau", tau_text, "Report tau(Lambda_pi(g) g_n) for this g_n");
  lambda->callback([&] {
    const auto p = parse_partition(partition_text);
    const auto gs = parse_functions(g_texts);
    if (gs.size() != static_cast<std::size_t>(p.n() - 1)) {
      throw ArgumentError("partition of {1.." + std::to_string(p.n()) + "} needs " + std::to_string(p.n() - 1) +
                          " arguments, got " + std::to_string(gs.size()));
    }
    json j{{"kind", "lambda"}, {"partition", p.to_string()}};
    auto& engine = session.moments().lambda();
    if (!t_text.empty() && !tau_text.empty()) throw ArgumentError("--t and --tau are mutually exclusive");
    if (!t_text.empty()) {
      const auto t = parse_rational(t_text);
      const auto v = engine.eval_at(p, gs, t);
      j.update({{"t", to_string(t)}, {"value", to_string(v)}});
      session.emit(j, to_string(v));
    } else if (!tau_text.empty()) {
      const auto v = engine.tau(p, gs, parse_function(tau_text));
      j.update({{"gn", tau_text}, {"value", to_string(v)}});
      session.emit(j, to_string(v));
    } else {
      const auto f = engine.function(p, gs);
      j.update(function_json(f.f));
      j["provenance"] = to_string(f.provenance);
      session.emit(j, f.f.to_string() + "  (" + to_string(f.provenance) + ")");
    }
  });

  auto* gamma_cmd = app.add_subcommand("gamma", "Gamma_pi(g_1..g_n)");
  gamma_cmd->add_option("partition", partition_text, "Partition such as {1,3|2,4}")->required();
  gamma_cmd->add_option("g", g_texts, "Polynomial arguments g_1..g_n");
  gamma_cmd->callback([&] {
    const auto p = parse_partition(partition_text);
    const auto gs = parse_functions(g_texts);
    if (gs.size() != static_cast<std::size_t>(p.n())) {
      throw ArgumentError("partition of {1.." + std::to_string(p.n()) + "} needs " + std::to_string(p.n()) +
                          " arguments, got " + std::to_string(gs.size()));
    }
    const auto v = gamma(p, gs);
    json j{{"kind", "gamma"}, {"partition", p.to_string()}};
    j.update(function_json(v));
    session.emit(j, v.to_string());
  });

  // cumulant
  int order = 0, pattern = 1, report_order = 0;
  std::string eps_text;
  auto* cumulant = app.add_subcommand("cumulant", "Cumulant maps alpha^(1)_n, alpha^(2)_n and the inversion oracle");
  cumulant->add_option("b", g_texts, "Coefficients b_1..b_{2n-1} (all 1 when omitted)");
  auto* n_opt = cumulant->add_option("--n", order, "Order n of alpha, 1..8");
  cumulant->add_option("--pattern", pattern, "1 for the X-first map, 2 for the X*-first map")
      ->capture_default_str()
      ->check(CLI::IsMember({1, 2}));
  auto* eps_opt = cumulant->add_option("--eps", eps_text, "Compute the inversion oracle for this pattern, e.g. 1*1*");
  auto* report_opt = cumulant->add_option("--report", report_order, "Consistency report up to this order");
  n_opt->excludes(eps_opt)->excludes(report_opt);
  eps_opt->excludes(report_opt);
  cumulant->callback([&] {
    CumulantEngine engine(session.moments());
    if (*report_opt) {
      bool all = true;
      for (const auto& row : engine.consistency_report(report_order, g.seed)) {
        all = all && row.equal;
        std::string bs;
        std::vector<std::string> b_texts;
        for (const auto& b : row.b) {
          b_texts.push_back(b.to_string());
          bs += (bs.empty() ? "" : ", ") + b_texts.back();
        }
        session.emit({{"kind", "cumulant-consistency"},
                      {"eps", row.eps.to_string()},
                      {"b", b_texts},
                      {"expected", row.expected.to_string()},
                      {"inversion", row.inversion.to_string()},
                      {"equal", row.equal}},
                     row.eps.to_string() + "  [" + bs + "]  alpha=" + row.expected.to_string() +
                         "  inversion=" + row.inversion.to_string() + "  " + (row.equal ? "equal" : "DIFFER"));
      }
      if (!all) status = kExitVerdictFail;
      return;
    }
    auto bs = parse_functions(g_texts);
    if (*eps_opt) {
      const auto eps = parse_star_pattern(eps_text);
      if (bs.empty()) bs.assign(static_cast<std::size_t>(std::max(0, eps.n() - 1)), PiecewisePoly::one());
      const auto v = engine.cumulant_by_inversion(eps, bs);
      json j{{"kind", "cumulant-inversion"}, {"eps", eps.to_string()}};
      j.update(function_json(v));
      session.emit(j, v.to_string());
      return;
    }
    if (!*n_opt) throw ArgumentError("cumulant needs one of --n, --eps or --report");
    if (bs.empty()) bs.assign(static_cast<std::size_t>(std::max(0, 2 * order - 1)), PiecewisePoly::one());
    const auto v = engine.alpha(CumulantSpec{order, pattern, bs});
    json j{{"kind", "cumulant"}, {"n", order}, {"pattern", pattern}};
    j.update(function_json(v));
    session.emit(j, v.to_string());
  });

  // mc
  int N = 200;
  double allowance = 0.0;
  std::string sizes_text = "25,50,100,200";
  int power = 2;
  auto* mc = app.add_subcommand("mc", "Monte Carlo estimates at finite N");
  mc->require_subcommand(0, 1);
  mc->add_option("--word", word_text, "Word to estimate");
  mc->add_option("--N", N, "Matrix size")->capture_default_str();
  mc->add_option("--t", t_text, "Probe the diagonal entry h_N(t) instead of the trace");
  mc->add_option("--allowance", allowance, "Finite-N bias allowance added to the 3-stderr band")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  mc->callback([&] {
    if (!mc->get_subcommands().empty()) return;
    if (word_text.empty()) throw ArgumentError("mc needs --word or a subcommand (decay, growth)");
    const auto w = parse_word(word_text);
    std::optional<Rational> t;
    if (!t_text.empty()) t = parse_rational(t_text);
    auto r = t ? estimate_diagonal(w, N, *t, g.trials, g.seed, session.mc_options())
               : estimate_trace(w, N, g.trials, g.seed, session.mc_options());
    std::optional<double> analytic;
    try {
      const auto limit = session.moments().expectation(w).value;
      analytic = to_double(t ? limit.eval_at(*t) : limit.tau());
    } catch (const Error& e) {
      session.err() << "note: no analytic limit (" << e.what() << ")\n";
    }
    if (analytic && !r.judge(*analytic, allowance)) status = kExitVerdictFail;
    auto j = r.to_json();
    if (t) j["t"] = to_string(*t);
    session.emit(j, report_line(r));
  });

  auto* decay = mc->add_subcommand("decay", "Centred products over the maximal alternating blocks of a pattern");
  decay->add_option("--eps", eps_text, "Pattern such as 11 or 1**1")->required();
  decay->add_option("--Ns", sizes_text, "Comma-separated matrix sizes")->capture_default_str();
  decay->callback([&] {
    const auto blocks = centered_blocks(parse_star_pattern(eps_text), session.moments());
    const auto sizes = parse_sizes(sizes_text);
    const auto report = centered_decay(blocks, sizes, g.trials, g.seed, session.mc_options());
    std::ostringstream human;
    human << "N      |mean|        stderr\n";
    for (const auto& row : report.rows)
      human << std::left << std::setw(7) << row.N << std::setw(14) << fixed(std::abs(row.mean)) << fixed(row.stderr_, 3)
            << "\n";
    human << "slope  " << (report.slope ? fixed(*report.slope, 4) : std::string("n/a"));
    auto j = report.to_json();
    j.update({{"kind", "decay"}, {"eps", eps_text}, {"trials", g.trials}, {"seed", g.seed}});
    session.emit(j, human.str());
  });

  auto* growth = mc->add_subcommand("growth", "Ratio E Tr((X*X)^p) / N across sizes");
  growth->add_option("--p", power, "Power, 1..6")->capture_default_str();
  growth->add_option("--Ns", sizes_text, "Comma-separated matrix sizes")->capture_default_str();
  growth->callback([&] {
    const auto report = growth_check(power, parse_sizes(sizes_text), g.trials, g.seed, session.mc_options());
    std::ostringstream human;
    human << "N      ratio         stderr\n";
    for (const auto& row : report.rows)
      human << std::left << std::setw(7) << row.N << std::setw(14) << fixed(row.ratio) << fixed(row.stderr_, 3) << "\n";
    human << (report.grows ? "ratio grows with N beyond noise" : "no growth beyond noise");
    auto j = report.to_json();
    j.update({{"kind", "growth"}, {"trials", g.trials}, {"seed", g.seed}});
    session.emit(j, human.str());
  });

  // table
  auto* table = app.add_subcommand("table", "Recompute the reference values and compare");
  table->callback([&] {
    const auto start = std::chrono::steady_clock::now();
    std::size_t hits = 0;
    const auto rows = compute_table(session.moments(), session.cache(), hits);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool all = true;
    for (const auto& row : rows) {
      all = all && row.pass;
      session.emit({{"kind", "table"},
                    {"quantity", row.quantity},
                    {"paper", row.paper},
                    {"computed", row.computed},
                    {"verdict", row.pass ? "PASS" : "FAIL"}},
                   std::string(row.pass ? "PASS" : "FAIL") + "  " + row.quantity + " = " + row.computed +
                       "   (reference: " + row.paper + ")");
    }
    session.err() << "table: " << rows.size() << " rows in " << fixed(seconds, 3) << " s";
    if (auto* c = session.cache()) session.err() << ", cache entries " << c->size();
    session.err() << ", lambda cache hits " << hits << "\n";
    if (!all) status = kExitVerdictFail;
  });

  // cache
  auto* cache = app.add_subcommand("cache", "Inspect or clear the Lambda cache");
  cache->require_subcommand(1);
  auto require_cache = [&]() -> LambdaCache& {
    auto* c = session.cache();
    if (!c) throw ArgumentError(std::string("no cache configured; pass --cache-path or set ") + kCacheEnvVar);
    return *c;
  };
  cache->add_subcommand("stats", "Entry count and load warnings")->callback([&] {
    auto& c = require_cache();
    session.emit({{"kind", "cache"}, {"path", c.path().string()}, {"entries", c.size()}, {"warnings", c.warnings()}},
                 c.path().string() + ": " + std::to_string(c.size()) + " entries, " +
                     std::to_string(c.warnings().size()) + " discarded lines");
  });
  cache->add_subcommand("clear", "Remove every entry")->callback([&] {
    auto& c = require_cache();
    c.clear();
    session.emit({{"kind", "cache"}, {"path", c.path().string()}, {"entries", 0}}, "cleared " + c.path().string());
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ResourceLimitError& e) {
    err << "error: " << e.what() << "\n";
    return kExitResource;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ContractError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return status;
}

}  // namespace vdm
