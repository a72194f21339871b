#include "cli/app.hpp"

#include <CLI11.hpp>

#include <cctype>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "topomap/backends_config.hpp"
#include "topomap/error.hpp"
#include "topomap/evaluation.hpp"
#include "topomap/graph_io.hpp"
#include "topomap/ground_truth.hpp"
#include "topomap/json_util.hpp"
#include "topomap/session.hpp"
#include "topomap/simulator.hpp"
#include "topomap/slam.hpp"

namespace topomap::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
  std::string workdir = ".";
  std::string config;
};

// Flag overrides layered on top of the config file.
struct Overrides {
  std::optional<std::size_t> m;
  std::optional<double> th_sim;
  std::optional<std::uint32_t> th_lg;
  std::optional<bool> prior;
  std::optional<bool> matcher;
  std::optional<bool> retrieval;

  std::string similarity_type;
  std::string matcher_type;
  std::string weights;
  std::string descriptors;
  std::string index;
  std::string scores;
  std::string counts;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& common) {
  cmd->add_option("--workdir", common.workdir, "Directory all relative paths are resolved against")
      ->capture_default_str();
  cmd->add_option("--config", common.config, "Pipeline configuration file (structured text)");
}

void add_slam_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--m", o.m, "Window radius in hops around the previous position");
  cmd->add_option("--th-sim", o.th_sim, "Retrieval acceptance threshold (strict)");
  cmd->add_option("--th-lg", o.th_lg, "Match-count acceptance threshold (strict)");
  // Negated spellings report a negative count.
  auto toggle = [cmd](const char* names, std::optional<bool>& target, const char* help) {
    cmd->add_flag_function(names, [&target](std::int64_t n) { target = n > 0; }, help);
  };
  toggle("--prior,!--no-prior", o.prior, "Restrict candidates to the window");
  toggle("--matcher,!--no-matcher", o.matcher, "Enable geometric verification");
  toggle("--retrieval,!--no-retrieval", o.retrieval, "Enable retrieval localization");
}

void add_backend_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--similarity", o.similarity_type, "Similarity backend")
      ->check(CLI::IsMember({"mlp", "table", "oracle"}));
  cmd->add_option("--matcher-backend", o.matcher_type, "Match-count backend")->check(CLI::IsMember({"table", "oracle"}));
  cmd->add_option("--weights", o.weights, "MLP weights file (mlp similarity)");
  cmd->add_option("--descriptors", o.descriptors, "Descriptor file (mlp similarity)");
  cmd->add_option("--index", o.index, "Descriptor index file (default: <descriptors>.idx)");
  cmd->add_option("--scores", o.scores, "Score table (table similarity)");
  cmd->add_option("--counts", o.counts, "Match-count table (table matcher)");
  cmd->add_option("--seed", o.seed, "Seed for oracle backends");
}

void apply_slam(SlamConfig& slam, const Overrides& o) {
  if (o.m) slam.window_radius = *o.m;
  if (o.th_sim) slam.similarity_threshold = *o.th_sim;
  if (o.th_lg) slam.match_threshold = *o.th_lg;
  if (o.prior) slam.prior_enabled = *o.prior;
  if (o.matcher) slam.matcher_enabled = *o.matcher;
  if (o.retrieval) slam.retrieval_enabled = *o.retrieval;
}

void apply_backends(PipelineConfig& cfg, const Overrides& o) {
  if (!o.similarity_type.empty()) {
    SimilaritySpec s = cfg.similarity.value_or(SimilaritySpec{});
    if (o.similarity_type == "mlp") {
      s.type = SimilaritySpec::Type::kMlp;
    } else if (o.similarity_type == "table") {
      s.type = SimilaritySpec::Type::kTable;
    } else {
      s.type = SimilaritySpec::Type::kOracle;
    }
    cfg.similarity = s;
  }
  if (!o.matcher_type.empty()) {
    MatcherSpec m = cfg.matcher.value_or(MatcherSpec{});
    m.type = o.matcher_type == "table" ? MatcherSpec::Type::kTable : MatcherSpec::Type::kOracle;
    cfg.matcher = m;
  }
  if (cfg.similarity) {
    if (!o.weights.empty()) cfg.similarity->weights = o.weights;
    if (!o.descriptors.empty()) cfg.similarity->descriptors = o.descriptors;
    if (!o.index.empty()) cfg.similarity->index = o.index;
    if (!o.scores.empty()) cfg.similarity->path = o.scores;
    if (o.seed) cfg.similarity->noise.seed = *o.seed;
    const auto& s = *cfg.similarity;
    if (s.type == SimilaritySpec::Type::kMlp && (s.weights.empty() || s.descriptors.empty())) {
      fail(ErrorCategory::kConfig, "config.similarity", "mlp similarity needs --weights and --descriptors");
    }
    if (s.type == SimilaritySpec::Type::kTable && s.path.empty()) {
      fail(ErrorCategory::kConfig, "config.similarity", "table similarity needs --scores");
    }
  }
  if (cfg.matcher) {
    if (!o.counts.empty()) cfg.matcher->path = o.counts;
    if (o.seed) cfg.matcher->seed = *o.seed;
    if (cfg.matcher->type == MatcherSpec::Type::kTable && cfg.matcher->path.empty()) {
      fail(ErrorCategory::kConfig, "config.matcher", "table matcher needs --counts");
    }
  }
}

fs::path resolve(const fs::path& workdir, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : workdir / path;
}

PipelineConfig load_config(const Common& common) {
  if (common.config.empty()) return PipelineConfig{};
  return PipelineConfig::load(resolve(common.workdir, common.config));
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCategory::kIo, "io.mkdir", "cannot create '" + dir.string() + "': " + ec.message());
}

std::string slug(const std::string& name) {
  std::string out;
  for (char c : name) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      out += static_cast<char>(std::tolower(u));
    } else if (!out.empty() && out.back() != '_') {
      out += '_';
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out.empty() ? "variant" : out;
}

std::string decision_log(const std::vector<LocalizationDecision>& decisions, const json& provenance) {
  std::string text = json{{"type", "header"}, {"provenance", provenance}}.dump() + "\n";
  for (const auto& d : decisions) {
    json rec = decision_to_json(d);
    rec["type"] = "decision";
    text += rec.dump() + "\n";
  }
  return text;
}

json provenance(const PipelineConfig& cfg, const std::vector<std::string>& args) {
  return {{"config", cfg.to_json()}, {"flags", std::vector<std::string>(args.begin() + 1, args.end())}};
}

struct Inputs {
  SessionManifest session;
  std::optional<GroundTruth> gt;
};

Inputs load_inputs(const Common& common, const PipelineConfig& cfg, bool need_gt) {
  if (cfg.session.empty()) fail(ErrorCategory::kConfig, "config.session", "no session manifest given (--session)");
  const fs::path workdir(common.workdir);
  Inputs in{load_session(resolve(workdir, cfg.session)), std::nullopt};
  if (!cfg.ground_truth.empty()) {
    in.gt = GroundTruth::load(resolve(workdir, cfg.ground_truth), in.session);
  } else if (need_gt) {
    fail(ErrorCategory::kConfig, "config.ground_truth", "evaluation needs a ground-truth file (--gt)");
  }
  return in;
}

int cmd_build(const Common& common, const Overrides& o, const std::string& session, const std::string& gt,
              const std::string& out_dir, const std::vector<std::string>& args, std::ostream& out) {
  PipelineConfig cfg = load_config(common);
  if (!session.empty()) cfg.session = session;
  if (!gt.empty()) cfg.ground_truth = gt;
  apply_slam(cfg.slam, o);
  apply_backends(cfg, o);
  cfg.slam.validate();

  const fs::path workdir(common.workdir);
  Inputs in = load_inputs(common, cfg, false);
  LoadedBackends backends = load_backends(cfg, in.session, in.gt ? &*in.gt : nullptr, workdir);
  const SessionRun run = run_session(in.session, cfg.slam, backends.view());

  const fs::path dir = resolve(workdir, out_dir);
  ensure_dir(dir);
  const json prov = provenance(cfg, args);
  write_graph(dir / "graph.json", run.graph, prov);
  json_util::write_text(dir / "decisions.jsonl", decision_log(run.decisions, prov));

  std::size_t geometric = 0;
  std::size_t retrieval = 0;
  for (const auto& d : run.decisions) {
    if (d.trigger == Trigger::kGeometric) ++geometric;
    if (d.trigger == Trigger::kRetrieval) ++retrieval;
  }
  out << in.session.size() << " submaps -> " << run.graph.num_nodes() << " nodes, " << run.graph.num_edges()
      << " edges (" << geometric << " geometric, " << retrieval << " retrieval merges)\n";
  out << "wrote " << (dir / "graph.json").string() << " and " << (dir / "decisions.jsonl").string() << "\n";
  return 0;
}

int cmd_eval(const Common& common, const Overrides& o, const std::string& session, const std::string& gt,
             const std::string& out_dir, bool ablation, bool sequential, const std::vector<std::string>& args,
             std::ostream& out) {
  PipelineConfig cfg = load_config(common);
  if (!session.empty()) cfg.session = session;
  if (!gt.empty()) cfg.ground_truth = gt;
  apply_slam(cfg.slam, o);
  apply_backends(cfg, o);

  std::vector<Variant> variants = (ablation || cfg.variants.empty()) ? ablation_variants(cfg.slam) : cfg.variants;
  bool needs_matcher = false;
  bool needs_retrieval = false;
  for (const auto& v : variants) {
    v.config.validate();
    needs_matcher |= v.config.matcher_enabled;
    needs_retrieval |= v.config.retrieval_enabled;
  }

  const fs::path workdir(common.workdir);
  Inputs in = load_inputs(common, cfg, true);
  PipelineConfig load_cfg = cfg;
  load_cfg.slam.matcher_enabled = needs_matcher;
  load_cfg.slam.retrieval_enabled = needs_retrieval;
  LoadedBackends backends = load_backends(load_cfg, in.session, &*in.gt, workdir);

  const EvalReport report = evaluate_session(in.session, *in.gt, variants, backends.view(), !sequential);

  const fs::path dir = resolve(workdir, out_dir);
  ensure_dir(dir);
  const json prov = provenance(cfg, args);
  json doc = report.to_json();
  doc["provenance"] = prov;
  json_util::write_text(dir / "report.csv", report.to_csv());
  json_util::write_text(dir / "report.json", json_util::dump(doc));
  for (const auto& row : report.rows) {
    json_util::write_text(dir / ("decisions_" + slug(row.variant.name) + ".jsonl"), decision_log(row.run.decisions, prov));
  }
  out << report.summary();
  out << "wrote " << (dir / "report.csv").string() << " and " << (dir / "report.json").string() << "\n";
  return 0;
}

struct SimulateOptions {
  std::string world;
  std::string out_dir = "world";
  std::optional<std::size_t> places;
  std::optional<std::uint64_t> seed;
  std::optional<double> p_flip;
  std::optional<double> sigma;
  std::optional<double> revisit;
  std::optional<std::size_t> max_back_jump;
  std::optional<std::size_t> min_kf;
  std::optional<std::size_t> max_kf;
  std::vector<int> traversal;
  bool no_withdrawal = false;
  bool tables = false;
};

int cmd_simulate(const Common& common, const Overrides& o, const SimulateOptions& s, std::ostream& out) {
  const fs::path workdir(common.workdir);
  sim::WorldConfig world_cfg;
  if (!s.world.empty()) world_cfg = sim::WorldConfig::from_json(json_util::read(resolve(workdir, s.world), "config.parse"));
  if (s.places) world_cfg.num_places = *s.places;
  if (s.seed) world_cfg.seed = *s.seed;
  if (s.p_flip) world_cfg.flip_probability = *s.p_flip;
  if (s.sigma) world_cfg.jitter_sigma = *s.sigma;
  if (s.revisit) world_cfg.generated.revisit_probability = *s.revisit;
  if (s.max_back_jump) world_cfg.generated.max_back_jump = *s.max_back_jump;
  if (s.min_kf) world_cfg.min_keyframes = *s.min_kf;
  if (s.max_kf) world_cfg.max_keyframes = *s.max_kf;
  if (s.no_withdrawal) world_cfg.generated.withdrawal = false;
  if (!s.traversal.empty()) world_cfg.traversal = s.traversal;

  PipelineConfig base = load_config(common);
  apply_slam(base.slam, o);
  base.slam.validate();

  const sim::World world = sim::generate_world(world_cfg);
  const fs::path dir = resolve(workdir, s.out_dir);
  sim::write_world(dir, world, base.slam, {s.tables});
  out << "simulated " << world.session.size() << " submaps (" << world.session.num_keyframes() << " keyframes) over "
      << world_cfg.num_places << " places into " << dir.string() << "\n";
  return 0;
}

int cmd_export_dot(const Common& common, const std::string& graph_path, const std::string& out_path,
                   std::ostream& out) {
  const fs::path workdir(common.workdir);
  const std::string dot = to_dot(read_graph(resolve(workdir, graph_path)));
  if (out_path.empty() || out_path == "-") {
    out << dot;
  } else {
    json_util::write_text(resolve(workdir, out_path), dot);
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Topological mapping of submap sequences with windowed priors and pairwise verification"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  Common common;
  Overrides overrides;
  std::string session;
  std::string gt;
  std::string out_dir = "out";
  bool ablation = false;
  bool sequential = false;
  SimulateOptions simulate;
  std::string graph_path;
  std::string dot_out;

  CLI::App* build = app.add_subcommand("build", "Build a topological graph from a session");
  add_common(build, common);
  add_slam_flags(build, overrides);
  add_backend_flags(build, overrides);
  build->add_option("--session", session, "Session manifest");
  build->add_option("--gt", gt, "Ground-truth covisibility file (needed by oracle backends)");
  build->add_option("--out", out_dir, "Output directory")->capture_default_str();

  CLI::App* eval = app.add_subcommand("eval", "Evaluate configuration variants with precision/recall");
  add_common(eval, common);
  add_slam_flags(eval, overrides);
  add_backend_flags(eval, overrides);
  eval->add_option("--session", session, "Session manifest");
  eval->add_option("--gt", gt, "Ground-truth covisibility file");
  eval->add_option("--out", out_dir, "Output directory")->capture_default_str();
  eval->add_flag("--ablation", ablation, "Use the standard ablation rows even if the config lists variants");
  eval->add_flag("--sequential", sequential, "Run variants one after another");

  CLI::App* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic session with ground truth");
  add_common(sim_cmd, common);
  add_slam_flags(sim_cmd, overrides);
  sim_cmd->add_option("--world", simulate.world, "World configuration file");
  sim_cmd->add_option("--out", simulate.out_dir, "Output directory")->capture_default_str();
  sim_cmd->add_option("--places", simulate.places, "Number of places");
  sim_cmd->add_option("--seed", simulate.seed, "World seed");
  sim_cmd->add_option("--p-flip", simulate.p_flip, "Similarity flip probability");
  sim_cmd->add_option("--sigma", simulate.sigma, "Similarity jitter sigma");
  sim_cmd->add_option("--revisit", simulate.revisit, "Revisit probability per place");
  sim_cmd->add_option("--max-back-jump", simulate.max_back_jump, "Largest back-and-forth excursion, in places");
  sim_cmd->add_option("--min-keyframes", simulate.min_kf, "Fewest keyframes per submap");
  sim_cmd->add_option("--max-keyframes", simulate.max_kf, "Most keyframes per submap");
  sim_cmd->add_option("--traversal", simulate.traversal, "Explicit place sequence")->delimiter(',');
  sim_cmd->add_flag("--no-withdrawal", simulate.no_withdrawal, "Only the forward sweep");
  sim_cmd->add_flag("--tables", simulate.tables, "Also write score/count tables");

  CLI::App* dot = app.add_subcommand("export-dot", "Render a graph file as DOT");
  add_common(dot, common);
  dot->add_option("--graph", graph_path, "Graph file written by build")->required();
  dot->add_option("--out", dot_out, "Output file (default: stdout)");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (build->parsed()) return cmd_build(common, overrides, session, gt, out_dir, args, out);
    if (eval->parsed()) return cmd_eval(common, overrides, session, gt, out_dir, ablation, sequential, args, out);
    if (sim_cmd->parsed()) return cmd_simulate(common, overrides, simulate, out);
    if (dot->parsed()) return cmd_export_dot(common, graph_path, dot_out, out);
  } catch (const Error& e) {
    err << "error [" << to_string(e.category()) << ":" << e.code() << "] " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace topomap::cli
