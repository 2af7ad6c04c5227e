#include <signal.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "screener/artifacts.hpp"
#include "screener/kernels.hpp"
#include "screener/metrics.hpp"
#include "screener/screening.hpp"
#include "screener/service.hpp"
#include "screener/stats.hpp"
#include "screener/trace.hpp"

namespace fs = std::filesystem;
using namespace screener;

namespace {

struct Manifest {
  std::string corpus;
  std::string feature_model = "bow";
  std::string strategy;
  std::string config;
  std::vector<std::string> overrides;
  std::string out = "screener-out";
  std::string cache;
  std::vector<std::uint64_t> seeds = {0};
};

void add_manifest(CLI::App* cmd, Manifest& m, bool needs_strategy) {
  cmd->add_option("-c,--corpus", m.corpus, "Corpus file (.jsonl or .csv)")->required()->check(CLI::ExistingFile);
  cmd->add_option("-f,--features", m.feature_model, "Feature model: bow, lda, pv, pv_tm, bow_tm")
      ->check(CLI::IsMember({"bow", "lda", "pv", "pv_tm", "bow_tm"}));
  if (needs_strategy) {
    cmd->add_option("-s,--strategy", m.strategy, "Strategy: naive, ig, lc")->check(CLI::IsMember({"naive", "ig", "lc"}));
  }
  cmd->add_option("--config", m.config, "Settings file (key = value lines)")->check(CLI::ExistingFile);
  cmd->add_option("--set", m.overrides, "Override one setting, KEY=VALUE (repeatable)");
  cmd->add_option("-o,--out", m.out, "Output directory");
  cmd->add_option("--cache", m.cache, "Artifact cache directory (default: <out>/artifacts)");
  cmd->add_option("--seeds", m.seeds, "Screening seeds")->delimiter(',');
}

RunSettings resolve_settings(const Manifest& m) {
  RunSettings s;
  if (!m.config.empty()) s = load_run_settings(m.config);
  for (const auto& kv : m.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw InvalidArgument("--set expects KEY=VALUE, got \"" + kv + "\"");
    apply_setting(s, kv.substr(0, eq), kv.substr(eq + 1));
  }
  s.features.model = feature_model_from_string(m.feature_model);
  if (!m.strategy.empty()) s.strategy.strategy = strategy_from_string(m.strategy);
  s.strategy.validate();
  if (m.seeds.empty()) throw InvalidArgument("at least one seed is required");
  return s;
}

fs::path cache_dir(const Manifest& m) { return m.cache.empty() ? fs::path(m.out) / "artifacts" : fs::path(m.cache); }

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
  if (!out) throw Error("cannot write " + p.string());
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

int cmd_features(const Manifest& m, bool topics) {
  const RunSettings s = resolve_settings(m);
  const Corpus corpus = load_corpus(m.corpus);
  ArtifactStore store(cache_dir(m));
  const bool with_topics = topics || s.strategy.strategy == Strategy::kIg;
  const FeatureSet set = store.feature_set(corpus, s.features, with_topics);
  nlohmann::ordered_json j = {{"feature_model", to_string(s.features.model)},
                              {"documents", set.features.rows()},
                              {"columns", set.features.cols()},
                              {"flagged_rows", set.features.flagged_rows().size()},
                              {"topics", set.topics ? set.topics->topics() : 0},
                              {"cache_hits", store.hits()},
                              {"cache_misses", store.misses()},
                              {"cache", store.root().string()}};
  std::cout << j.dump(2) << '\n';
  return 0;
}

struct SeedResult {
  std::uint64_t seed = 0;
  MetricsReport report;
};

std::map<std::uint64_t, double> read_baseline(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("baseline " + path.string() + " not found; run it first");
  std::map<std::uint64_t, double> out;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string seed, wss;
    std::getline(row, seed, ',');
    std::getline(row, wss, ',');
    out[std::stoull(seed)] = std::stod(wss);
  }
  return out;
}

int cmd_simulate(const Manifest& m, std::string name, const std::string& baseline, double fraction) {
  const RunSettings s = resolve_settings(m);
  const Corpus corpus = load_corpus(m.corpus);
  ArtifactStore store(cache_dir(m));
  const bool ig = s.strategy.strategy == Strategy::kIg;
  const FeatureSet set = store.feature_set(corpus, s.features, ig);
  if (name.empty()) name = to_string(s.strategy.strategy) + "-" + to_string(s.features.model);

  const fs::path run_dir = fs::path(m.out) / name;
  fs::create_directories(run_dir);
  SimulationOptions opts;
  opts.metrics.recall_fractions = {fraction};
  std::vector<SeedResult> results;
  for (const std::uint64_t seed : m.seeds) {
    StrategyConfig config = s.strategy;
    config.seed = seed;
    const SimulationResult r = run_simulation(corpus, set.features, set.topics ? &*set.topics : nullptr, config, opts);
    const fs::path dir = run_dir / ("seed-" + std::to_string(seed));
    fs::create_directories(dir);
    write_file(dir / "trace.csv", trace_csv(r.state.trace(), corpus));
    std::ostringstream curve;
    write_curve_csv(curve, r.state.trace());
    write_file(dir / "curve.csv", curve.str());
    write_file(dir / "metrics.json", metrics_json(*r.metrics) + "\n");
    std::cout << name << " seed " << seed << ": WSS@" << r.metrics->yield_threshold * 100 << " = " << fmt(r.metrics->wss)
              << ", recall@" << fraction << " = " << fmt(r.metrics->recall_at.at(fraction)) << '\n';
    results.push_back({seed, *r.metrics});
  }

  std::vector<double> wss, wss_manual, recall;
  std::ostringstream per_seed;
  per_seed << "seed,wss,wss_manual_only,recall_at,cut_iteration\n";
  for (const auto& r : results) {
    wss.push_back(r.report.wss);
    wss_manual.push_back(r.report.wss_manual_only);
    recall.push_back(r.report.recall_at.at(fraction));
    per_seed << r.seed << ',' << fmt(r.report.wss) << ',' << fmt(r.report.wss_manual_only) << ','
             << fmt(r.report.recall_at.at(fraction)) << ',' << r.report.cut_iteration << '\n';
  }
  write_file(run_dir / "per_seed.csv", per_seed.str());

  std::string t_cols = ",,,,";
  if (!baseline.empty()) {
    const auto base = read_baseline(fs::path(m.out) / baseline / "per_seed.csv");
    std::vector<double> a, b;
    for (const auto& r : results) {
      if (const auto it = base.find(r.seed); it != base.end()) {
        a.push_back(r.report.wss);
        b.push_back(it->second);
      }
    }
    if (a.size() < 2) throw InvalidArgument("baseline shares fewer than two seeds with this run");
    const PairedTTest t = paired_t_test(a, b);
    t_cols = baseline + "," + fmt(t.mean_difference) + "," + fmt(t.t) + "," + fmt(t.degrees_of_freedom) + "," +
             fmt(t.p_value);
    std::cout << "paired t-test vs " << baseline << ": mean diff " << fmt(t.mean_difference) << ", t = " << fmt(t.t)
              << ", p = " << fmt(t.p_value) << '\n';
  }

  const fs::path table = fs::path(m.out) / "results.csv";
  const bool fresh = !fs::exists(table);
  std::ofstream out(table, std::ios::app);
  if (fresh) {
    out << "name,strategy,feature_model,seeds,wss_mean,wss_std,wss_manual_mean,wss_manual_std,recall_mean,"
           "recall_std,baseline,mean_difference,t,df,p_value\n";
  }
  out << name << ',' << to_string(s.strategy.strategy) << ',' << to_string(s.features.model) << ',' << results.size()
      << ',' << fmt(mean(wss)) << ',' << fmt(stddev(wss)) << ',' << fmt(mean(wss_manual)) << ','
      << fmt(stddev(wss_manual)) << ',' << fmt(mean(recall)) << ',' << fmt(stddev(recall)) << ',' << t_cols << '\n';
  if (!out) throw Error("cannot append to " + table.string());
  return 0;
}

nlohmann::ordered_json selection_json(const MethodSelection& sel) {
  return {{"chosen", sel.chosen == FeatureChoice::kPv ? "pv" : "bow"},
          {"recall_bow", sel.recall_bow},
          {"recall_pv", sel.recall_pv},
          {"tie", sel.tie}};
}

int cmd_select(const Manifest& m, double cutoff) {
  RunSettings s = resolve_settings(m);
  const Corpus corpus = load_corpus(m.corpus);
  ArtifactStore store(cache_dir(m));
  FeatureParams bow = s.features, pv = s.features;
  bow.model = FeatureModel::kBow;
  pv.model = FeatureModel::kPv;
  const FeatureMatrix bow_x = store.features(corpus, bow);
  const FeatureMatrix pv_x = store.features(corpus, pv);
  const TopicMatrix topics = store.topics(corpus, bow);
  s.strategy.seed = m.seeds.front();
  const MethodSelection sel = select_method(corpus, bow_x, pv_x, topics, s.strategy, cutoff);
  const std::string text = selection_json(sel).dump(2);
  fs::create_directories(m.out);
  write_file(fs::path(m.out) / "selection.json", text + "\n");
  std::cout << text << '\n';
  return 0;
}

int cmd_serve(ServiceOptions opts, bool port_given, bool dir_given, int port, const std::string& dir) {
  opts = apply_env_overrides(opts);
  if (port_given) opts.port = port;
  if (dir_given) opts.data_dir = dir;

  sigset_t sigs;
  sigemptyset(&sigs);
  sigaddset(&sigs, SIGINT);
  sigaddset(&sigs, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &sigs, nullptr);

  SessionManager sessions(opts.data_dir);
  Service service(sessions);
  const int bound = service.bind(opts.host, opts.port);
  std::cout << "listening on http://" << opts.host << ':' << bound << " (data: " << opts.data_dir.string() << ", "
            << sessions.ids().size() << " sessions restored)" << std::endl;
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&sigs, &sig);
    service.stop();
  });
  service.run();
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Screening prioritisation for systematic reviews"};
  app.require_subcommand(1);

  Manifest fm;
  bool topics = false;
  auto* features = app.add_subcommand("features", "Extract and cache feature (and topic) matrices");
  add_manifest(features, fm, true);
  features->add_flag("--topics", topics, "Also build the topic matrix used by IG");

  Manifest sm;
  std::string name, baseline;
  double fraction = 0.10;
  auto* simulate = app.add_subcommand("simulate", "Simulate screening with the gold labels as oracle");
  add_manifest(simulate, sm, true);
  simulate->add_option("--name", name, "Run name (default: <strategy>-<features>)");
  simulate->add_option("--baseline", baseline, "Earlier run name for the paired t-test");
  simulate->add_option("--recall-fraction", fraction, "Fraction screened for the recall column")
      ->check(CLI::Range(0.0, 1.0));

  Manifest selm;
  double cutoff = 0.10;
  std::optional<double> recall_bow, recall_pv;
  auto* select = app.add_subcommand("select", "Choose between bag-of-words and paragraph vectors");
  select->add_option("-c,--corpus", selm.corpus, "Corpus file")->check(CLI::ExistingFile);
  select->add_option("--config", selm.config, "Settings file")->check(CLI::ExistingFile);
  select->add_option("--set", selm.overrides, "Override one setting, KEY=VALUE");
  select->add_option("-o,--out", selm.out, "Output directory");
  select->add_option("--cache", selm.cache, "Artifact cache directory");
  select->add_option("--seeds", selm.seeds, "Screening seed (first value used)")->delimiter(',');
  select->add_option("--cutoff", cutoff, "Fraction screened before comparing recall")->check(CLI::Range(0.0, 1.0));
  select->add_option("--recall-bow", recall_bow, "Apply the rule to a known IG-BoW recall");
  select->add_option("--recall-pv", recall_pv, "Apply the rule to a known IG-PV recall");

  ServiceOptions serve_opts;
  int port = 0;
  std::string data_dir;
  auto* serve = app.add_subcommand("serve", "Run the live screening HTTP service");
  auto* port_opt = serve->add_option("--port", port, "Port (env SCREENER_PORT)")->check(CLI::Range(0, 65535));
  auto* dir_opt = serve->add_option("--data-dir", data_dir, "Session store (env SCREENER_DATA_DIR)");
  serve->add_option("--host", serve_opts.host, "Bind address");

  bool show_isa = false;
  app.add_flag("--isa", show_isa, "Print the selected SIMD kernel set to stderr");

  CLI11_PARSE(app, argc, argv);
  if (show_isa) std::cerr << "kernels: " << kernels::isa_name(kernels::active().isa) << '\n';

  try {
    if (*features) return cmd_features(fm, topics);
    if (*simulate) return cmd_simulate(sm, name, baseline, fraction);
    if (*select) {
      if (recall_bow || recall_pv) {
        if (!recall_bow || !recall_pv) throw InvalidArgument("--recall-bow and --recall-pv go together");
        std::cout << selection_json(choose_method(*recall_bow, *recall_pv)).dump(2) << '\n';
        return 0;
      }
      if (selm.corpus.empty()) throw InvalidArgument("select needs --corpus (or --recall-bow/--recall-pv)");
      return cmd_select(selm, cutoff);
    }
    if (*serve) return cmd_serve(serve_opts, port_opt->count() > 0, dir_opt->count() > 0, port, data_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
