#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include <CLI11.hpp>

#include "mohin/error.hpp"
#include "mohin/eval.hpp"
#include "mohin/ingestion.hpp"
#include "mohin/memp.hpp"
#include "mohin/motif.hpp"
#include "mohin/synthetic.hpp"
#include "mohin/text.hpp"

namespace mohin::cli {

namespace {

namespace fs = std::filesystem;

constexpr const char* kVersion = "0.1.0";

using ConfigMap = std::map<std::string, std::string>;

// `key = value` lines; `#` starts a comment line.
ConfigMap read_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path.string());
  ConfigMap out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = text::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(path.string() + ": expected key = value", line_no);
    }
    const auto key = text::trim(body.substr(0, eq));
    if (key.empty()) throw ParseError(path.string() + ": empty key", line_no);
    out[std::string(key)] = std::string(text::trim(body.substr(eq + 1)));
  }
  return out;
}

std::string sha256_hex(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              &EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

// Subcommand options with CLI > config file > environment > default
// precedence. Every option is captured as text and converted after parsing.
class Command {
 public:
  Command(CLI::App& parent, const std::string& name, const std::string& help)
      : app_(parent.add_subcommand(name, help)) {}

  Command& option(const std::string& name, std::string fallback, const std::string& help,
                  bool required = false) {
    order_.push_back(name);
    defaults_[name] = std::move(fallback);
    if (required) required_.insert(name);
    opts_[name] = app_->add_option("--" + name, raw_[name], help)
                      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    return *this;
  }

  Command& flag(const std::string& name, const std::string& help) {
    order_.push_back(name);
    defaults_[name] = "false";
    flags_.insert(name);
    opts_[name] = app_->add_flag("--" + name, help);
    return *this;
  }

  Command& with_config() {
    app_->add_option("--config", config_path_, "key = value configuration file");
    return *this;
  }

  CLI::App* app() const { return app_; }

  // Materializes every option; throws UsageError for unknown config keys or
  // missing required values.
  void resolve(const std::map<std::string, std::string>& env_defaults) {
    ConfigMap config;
    if (!config_path_.empty()) config = read_config_file(config_path_);
    for (const auto& [key, _] : config) {
      if (!defaults_.count(key)) {
        throw UsageError("unknown key '" + key + "' in " + config_path_);
      }
    }
    for (const auto& name : order_) {
      std::string value;
      if (opts_[name]->count() > 0) {
        value = flags_.count(name) ? "true" : raw_[name];
      } else if (auto it = config.find(name); it != config.end()) {
        value = it->second;
      } else if (auto env = env_defaults.find(name); env != env_defaults.end()) {
        value = env->second;
      } else {
        value = defaults_[name];
      }
      if (required_.count(name) && value.empty()) {
        throw UsageError(app_->get_name() + ": --" + name + " is required");
      }
      resolved_[name] = value;
    }
  }

  const std::string& str(const std::string& name) const { return resolved_.at(name); }

  bool boolean(const std::string& name) const {
    const auto& v = str(name);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no" || v.empty()) return false;
    throw UsageError("--" + name + ": expected true/false, got '" + v + "'");
  }

  double real(const std::string& name) const {
    const auto v = text::parse_double(str(name));
    if (!v) throw UsageError("--" + name + ": expected a number, got '" + str(name) + "'");
    return *v;
  }

  std::uint64_t count(const std::string& name) const {
    const auto v = text::parse_unsigned(str(name));
    if (!v) {
      throw UsageError("--" + name + ": expected a non-negative integer, got '" +
                       str(name) + "'");
    }
    return *v;
  }

  // Resolved options as `key = value` lines, skipping `exclude`.
  void write_resolved(std::ostream& out, const std::set<std::string>& exclude) const {
    for (const auto& name : order_) {
      if (!exclude.count(name)) out << name << " = " << resolved_.at(name) << '\n';
    }
  }

 private:
  CLI::App* app_;
  std::vector<std::string> order_;
  std::map<std::string, std::string> raw_;
  std::map<std::string, std::string> defaults_;
  std::map<std::string, CLI::Option*> opts_;
  std::map<std::string, std::string> resolved_;
  std::set<std::string> required_;
  std::set<std::string> flags_;
  std::string config_path_;
};

std::optional<MotifId> optional_motif(const std::string& s) {
  if (s.empty() || s == "none") return std::nullopt;
  return parse_motif(s);
}

void add_experiment_options(Command& c) {
  c.option("data", "", "canonical dataset directory (from `ingest`)", true)
      .option("out", "", "output directory", true)
      .option("meta-paths", "U,B;U,U,B", "semicolon-separated meta-paths")
      .option("alpha-grid", "0:1:0.1", "alpha values, start:stop:step or a,b,c")
      .option("lambda-grid", "0.001,0.01,0.1,1", "lambda values (lambda_w = lambda_v)")
      .option("repeats", "5", "number of random splits")
      .option("seed", "0", "base seed (env MOHINREC_SEED)")
      .option("train-frac", "0.8", "training fraction")
      .option("valid-frac", "0.1", "validation fraction")
      .option("test-frac", "0.1", "test fraction")
      .option("rank", "10", "MF rank F")
      .option("mf-lr", "0.01", "MF learning rate")
      .option("mf-epochs", "100", "MF epochs")
      .option("mf-reg", "0.01", "MF L2 regularization")
      .option("k-factors", "10", "FM interaction rank K")
      .option("fm-lr", "0.005", "FM learning rate")
      .option("fm-epochs", "200", "FM epochs")
      .option("max-nnz-per-row", "0", "truncate similarity rows (0 = unlimited)")
      .option("jobs", "1", "worker threads for the grid")
      .flag("no-clamp", "do not clamp predictions to [1,5]")
      .with_config();
}

ExperimentConfig experiment_config(const Command& c, std::optional<MotifId> motif) {
  ExperimentConfig cfg;
  cfg.memp_configs.clear();
  for (auto spec : text::split(c.str("meta-paths"), ';')) {
    if (spec.empty()) continue;
    MempConfig mc{MetaPath::parse(spec), std::nullopt, 0.0};
    if (motif && mc.meta_path.has_same_type_step()) mc.motif = motif;
    cfg.memp_configs.push_back(std::move(mc));
  }
  cfg.alpha_grid = parse_grid(c.str("alpha-grid"));
  cfg.lambda_grid = parse_grid(c.str("lambda-grid"));
  cfg.repeats = c.count("repeats");
  cfg.seed = c.count("seed");
  cfg.split = {c.real("train-frac"), c.real("valid-frac"), c.real("test-frac"), 0};
  cfg.mf.rank = c.count("rank");
  cfg.mf.learning_rate = c.real("mf-lr");
  cfg.mf.epochs = c.count("mf-epochs");
  cfg.mf.reg = c.real("mf-reg");
  cfg.fm.k_factors = c.count("k-factors");
  cfg.fm.learning_rate = c.real("fm-lr");
  cfg.fm.epochs = c.count("fm-epochs");
  cfg.max_nnz_per_row = c.count("max-nnz-per-row");
  cfg.jobs = static_cast<unsigned>(c.count("jobs"));
  cfg.clamp = !c.boolean("no-clamp");
  cfg.validate();
  return cfg;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw ValidationError("cannot write " + p.string());
  return out;
}

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw ValidationError("cannot open " + p.string());
  return in;
}

std::string dataset_digest(const fs::path& dir) {
  return sha256_hex(dir / "ratings.tsv") + "-" + sha256_hex(dir / "trust.tsv");
}

void print_stats(std::ostream& out, const DatasetStats& s) {
  out << std::left << std::setw(10) << "Users" << std::setw(10) << "Items"
      << std::setw(10) << "Ratings" << "Social relations\n";
  out << std::setw(10) << s.users << std::setw(10) << s.items << std::setw(10)
      << s.ratings << s.social_relations << '\n';
}

int cmd_ingest(const Command& c, std::ostream& out, std::ostream& err) {
  const Delimiter delim = parse_delimiter(c.str("delimiter"));
  auto rin = open_in(c.str("ratings"));
  RatingDataset ratings = [&] {
    try {
      return parse_ratings(rin, delim);
    } catch (const Error& e) {
      rethrow_with_prefix(e, c.str("ratings") + ": ");
    }
  }();
  if (ratings.triples.empty()) throw ValidationError(c.str("ratings") + ": no ratings");
  SparseMatrix trust = SparseMatrix::zero(ratings.n_users, ratings.n_users);
  if (!c.str("trust").empty()) {
    auto tin = open_in(c.str("trust"));
    try {
      auto parsed = parse_trust(tin, *ratings.user_labels, delim);
      trust = std::move(parsed.matrix);
      err << "trust: " << parsed.edges_read << " edges read, " << parsed.dropped_unknown
          << " dropped (unknown user), " << parsed.dropped_self_loops
          << " dropped (self-loop)\n";
    } catch (const Error& e) {
      rethrow_with_prefix(e, c.str("trust") + ": ");
    }
  }
  const HinGraph graph = build_hin(std::move(ratings), trust);
  write_canonical(c.str("out"), graph);
  print_stats(out, stats(graph));
  return kOk;
}

int cmd_generate(const Command& c, std::ostream& out) {
  SyntheticConfig sc;
  sc.n_users = c.count("users");
  sc.n_items = c.count("items");
  sc.n_ratings = c.count("ratings");
  sc.seed = c.count("seed");
  const HinGraph graph = generate_synthetic(sc);
  write_canonical(c.str("out"), graph);
  print_stats(out, stats(graph));
  return kOk;
}

int cmd_motif_adj(const Command& c, std::ostream& out, std::ostream& err) {
  const MotifId motif = parse_motif(c.str("motif"));
  auto in = open_in(c.str("input"));
  const EdgeList graph = parse_edge_list(in, parse_delimiter(c.str("delimiter")));
  if (graph.dropped_self_loops > 0) {
    err << "motif-adj: dropped " << graph.dropped_self_loops << " self-loops\n";
  }
  const SparseMatrix w = motif_adjacency(graph.matrix, motif);
  {
    auto f = open_out(c.str("output"));
    write_coo(f, w);
  }
  if (!c.str("labels-out").empty()) {
    auto f = open_out(c.str("labels-out"));
    for (std::size_t i = 0; i < graph.labels.size(); ++i) {
      f << i << '\t' << graph.labels.label(static_cast<Index>(i)) << '\n';
    }
  }
  out << to_string(motif) << ": " << graph.labels.size() << " nodes, "
      << graph.matrix.nnz() << " edges, " << w.nnz() << " motif-adjacency entries\n";
  return kOk;
}

int cmd_similarity(const Command& c, std::ostream& out) {
  const HinGraph graph = load_canonical(c.str("data"));
  MempConfig mc{MetaPath::parse(c.str("meta-path")), optional_motif(c.str("motif")),
                c.real("alpha")};
  SimilarityOptions opts;
  opts.max_nnz_per_row = c.count("max-nnz-per-row");
  const SimilarityMatrix sim = commuting_matrix(graph, mc, opts);
  auto f = open_out(c.str("output"));
  write_coo(f, sim.matrix);
  out << mc.to_string() << ": " << sim.matrix.rows() << "x" << sim.matrix.cols() << ", "
      << sim.matrix.nnz() << " entries\n";
  return kOk;
}

int cmd_evaluate(const Command& c, std::ostream& out, std::ostream& err) {
  const fs::path data = c.str("data");
  const auto motif = optional_motif(c.str("motif"));
  const ExperimentConfig cfg = experiment_config(c, motif);
  const std::string digest = dataset_digest(data);
  if (!c.str("input-digest").empty() && c.str("input-digest") != digest) {
    throw UsageError("dataset in " + data.string() + " does not match input-digest");
  }
  const HinGraph graph = load_canonical(data);
  const MetricReport report = run_experiment(graph, cfg);

  const fs::path dir = c.str("out");
  fs::create_directories(dir);
  {
    auto f = open_out(dir / "report.txt");
    write_report(f, report);
  }
  {
    auto f = open_out(dir / "runs.jsonl");
    write_runs_jsonl(f, report);
  }
  {
    auto f = open_out(dir / "timings.tsv");
    write_timings(f, report);
  }
  {
    auto f = open_out(dir / "manifest.txt");
    f << "# mohinrec " << kVersion << " evaluate manifest\n";
    f << "# replay: mohinrec evaluate --config manifest.txt --out <dir>\n";
    c.write_resolved(f, {"out", "input-digest"});
    f << "input-digest = " << digest << '\n';
  }
  const std::string label = motif ? "MoHINRec(" + to_string(*motif) + ")" : "FMG";
  print_summary(out, report, label);
  err << "wrote " << (dir / "report.txt").string() << '\n';
  return kOk;
}

int cmd_sweep(const Command& c, std::ostream& out) {
  std::vector<MotifId> motifs;
  for (auto m : text::split(c.str("motifs"), ',')) motifs.push_back(parse_motif(m));
  const ExperimentConfig cfg = experiment_config(c, MotifId::kM1);
  const HinGraph graph = load_canonical(c.str("data"));
  const SweepReport report = run_sweep(graph, cfg, motifs);
  const fs::path dir = c.str("out");
  fs::create_directories(dir);
  {
    auto f = open_out(dir / "sweep.tsv");
    write_sweep_tsv(f, report);
  }
  print_sweep_table(out, report);
  return kOk;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage:
      return kUsage;
    case ErrorKind::kParse:
    case ErrorKind::kValidation:
      return kParse;
    case ErrorKind::kTraining:
      return kTraining;
    case ErrorKind::kShape:
      break;
  }
  return kInternal;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Motif-enhanced meta-path recommendation over heterogeneous networks",
               "mohinrec"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Command ingest(app, "ingest", "parse rating/trust files into a canonical dataset");
  ingest.option("ratings", "", "ratings file: user<sep>item<sep>rating", true)
      .option("trust", "", "trust file: truster<sep>trustee")
      .option("delimiter", "tab", "comma, tab or space")
      .option("out", "", "output directory", true);

  Command generate(app, "generate", "write a synthetic triadic-trust dataset");
  generate.option("out", "", "output directory", true)
      .option("users", "500", "number of users")
      .option("items", "300", "number of items")
      .option("ratings", "5000", "number of ratings")
      .option("seed", "1", "generator seed");

  Command motif_adj(app, "motif-adj", "motif-based adjacency of a directed edge list");
  motif_adj.option("motif", "", "M1..M7", true)
      .option("input", "", "edge list: source<sep>target", true)
      .option("output", "", "coordinate-list output", true)
      .option("delimiter", "tab", "comma, tab or space")
      .option("labels-out", "", "optional index<TAB>label map");

  Command similarity(app, "similarity", "commuting matrix of a (motif-enhanced) meta-path");
  similarity.option("data", "", "canonical dataset directory", true)
      .option("meta-path", "U,U,B", "node types, e.g. U,U,B")
      .option("motif", "", "M1..M7 (omit for edge-based)")
      .option("alpha", "0", "blend weight in [0,1]")
      .option("max-nnz-per-row", "0", "truncate rows (0 = unlimited)")
      .option("output", "", "coordinate-list output", true);

  Command evaluate(app, "evaluate", "run the split/select/test protocol");
  add_experiment_options(evaluate);
  evaluate.option("motif", "", "motif for same-type steps (omit for FMG)")
      .option("input-digest", "", "expected dataset digest (set by manifests)");

  Command sweep(app, "sweep", "test RMSE/MAE over every (motif, alpha) pair");
  add_experiment_options(sweep);
  sweep.option("motifs", "M1,M2,M3,M4,M5,M6,M7", "comma-separated motifs");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  std::map<std::string, std::string> env_defaults;
  if (const char* seed = std::getenv("MOHINREC_SEED"); seed && *seed) {
    env_defaults["seed"] = seed;
  }

  try {
    for (Command* c : {&ingest, &generate, &motif_adj, &similarity, &evaluate, &sweep}) {
      if (!c->app()->parsed()) continue;
      c->resolve(c == &generate ? std::map<std::string, std::string>{} : env_defaults);
      if (c == &ingest) return cmd_ingest(*c, out, err);
      if (c == &generate) return cmd_generate(*c, out);
      if (c == &motif_adj) return cmd_motif_adj(*c, out, err);
      if (c == &similarity) return cmd_similarity(*c, out);
      if (c == &evaluate) return cmd_evaluate(*c, out, err);
      if (c == &sweep) return cmd_sweep(*c, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}

}  // namespace mohin::cli
