#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "semloss/axioms.hpp"
#include "semloss/experiments.hpp"
#include "semloss/fuzzy.hpp"
#include "fetch.hpp"

#ifndef SEMLOSS_VERSION
#define SEMLOSS_VERSION "dev"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace semloss;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitInput = 3;
constexpr int kExitCompute = 4;

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);
  return buf;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string read_stdin() {
  return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(what + ": " + e.what());
  }
}

// Everything a run read, for the manifest.
struct Inputs {
  std::map<std::string, std::string> hashes;
  std::string read(const std::string& path) {
    std::string text = path.empty() || path == "-" ? read_stdin() : read_file(path);
    hashes[path.empty() ? "-" : path] = hex64(fnv1a(text));
    return text;
  }
};

Circuit load_circuit(Inputs& in, const std::string& path) {
  try {
    return circuit_from_json(parse_json(in.read(path), "circuit"));
  } catch (const json::exception& e) {
    throw InputError(std::string("circuit: ") + e.what());
  }
}

// Inline "0.1,0.2" or a file holding numbers separated by commas or whitespace.
ProbVector parse_probs(Inputs& in, const std::string& arg) {
  std::error_code ec;
  std::string text = fs::is_regular_file(arg, ec) ? in.read(arg) : arg;
  for (char& c : text)
    if (c == ',' || c == '\n' || c == '\r' || c == '\t' || c == ';') c = ' ';
  std::istringstream ss(text);
  std::vector<double> vals;
  std::string tok;
  while (ss >> tok) {
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (*end != '\0') throw InputError("--p: not a number: '" + tok + "'");
    vals.push_back(v);
  }
  return Eigen::Map<ProbVector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

// Fills options the command line left unset from a JSON object whose keys are
// option names with '-' written as '_'.
void apply_config(CLI::App& sub, const json& cfg) {
  if (!cfg.is_object()) throw InputError("--config must hold a JSON object");
  for (const auto& [key, val] : cfg.items()) {
    std::string name = key;
    for (char& c : name)
      if (c == '_') c = '-';
    CLI::Option* opt = sub.get_option_no_throw("--" + name);
    if (!opt || name == "config") throw InputError("--config: unknown key '" + key + "' for " + sub.get_name());
    if (opt->count() > 0) continue;
    std::string s = val.is_string() ? val.get<std::string>() : val.dump();
    opt->clear();
    opt->add_result(s);
    opt->run_callback();
  }
}

// Effective option values, for the manifest.
json effective_config(const CLI::App& sub) {
  json j = json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string& name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "config" || name == "out") continue;
    std::string key = name;
    for (char& c : key)
      if (c == '-') c = '_';
    j[key] = opt->count() > 0 ? CLI::detail::join(opt->results(), ",") : opt->get_default_str();
  }
  return j;
}

class RunDir {
 public:
  RunDir(std::string dir, const CLI::App& sub) : dir_(std::move(dir)), sub_(sub) {
    if (!dir_.empty()) fs::create_directories(dir_);
  }
  bool enabled() const { return !dir_.empty(); }
  void write(const std::string& name, const std::string& contents) {
    if (!enabled()) return;
    write_file((fs::path(dir_) / name).string(), contents);
    artifacts_.push_back(name);
  }
  // `resolved` overrides option values derived after parsing.
  void finish(const Inputs& in, const json& seeds, const json& resolved = json::object()) {
    if (!enabled()) return;
    json config = effective_config(sub_);
    config.update(resolved);
    json m = {{"tool", "semloss"},
              {"version", SEMLOSS_VERSION},
              {"command", sub_.get_name()},
              {"config", config},
              {"seeds", seeds},
              {"inputs", in.hashes},
              {"artifacts", artifacts_}};
    write_file((fs::path(dir_) / "manifest.json").string(), m.dump(2) + "\n");
  }

 private:
  std::string dir_;
  const CLI::App& sub_;
  std::vector<std::string> artifacts_;
};

Regularizer parse_regularizer(const std::string& s) {
  if (s == "semantic") return Regularizer::Semantic;
  if (s == "entropy") return Regularizer::Entropy;
  throw InputError("unknown regularizer '" + s + "'");
}

BitReduction parse_reduction(const std::string& s) {
  if (s == "sum") return BitReduction::Sum;
  if (s == "mean") return BitReduction::Mean;
  throw InputError("unknown bit reduction '" + s + "'");
}

// Training flags shared by the train-* commands.
struct TrainFlags {
  double w = 0.0;
  std::string regularizer = "semantic";
  std::string bit_reduction = "mean";
  double lr = 1e-3;
  std::size_t max_epochs = 2000;
  std::size_t patience = 50;
  std::uint64_t seed = 1;

  void bind(CLI::App& sub) {
    sub.add_option("--w", w, "regularizer weight");
    sub.add_option("--regularizer", regularizer, "semantic or entropy");
    sub.add_option("--bit-reduction", bit_reduction, "cross entropy over output bits: sum or mean");
    sub.add_option("--learning-rate", lr, "Adam step size");
    sub.add_option("--max-epochs", max_epochs);
    sub.add_option("--patience", patience, "epochs without validation improvement");
    sub.add_option("--seed", seed, "initialization seed");
  }
  void from(const TrainConfig& c) {
    w = c.w;
    regularizer = c.regularizer == Regularizer::Entropy ? "entropy" : "semantic";
    bit_reduction = c.bit_reduction == BitReduction::Sum ? "sum" : "mean";
    lr = c.adam.learning_rate;
    max_epochs = c.max_epochs;
    patience = c.patience;
    seed = c.seed;
  }
  TrainConfig get() const {
    TrainConfig c;
    c.w = w;
    c.regularizer = parse_regularizer(regularizer);
    c.bit_reduction = parse_reduction(bit_reduction);
    c.adam.learning_rate = lr;
    c.max_epochs = max_epochs;
    c.patience = patience;
    c.seed = seed;
    c.validate();
    return c;
  }
};

void print_json(const json& j) { std::cout << j.dump(2) << "\n"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic loss: compile constraints, evaluate the loss, run the experiments", "semloss"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SEMLOSS_VERSION);
  app.option_defaults()->always_capture_default();

  Inputs in;
  std::string circuit_path, p_arg, out_dir, config_path;
  std::map<CLI::App*, std::string*> configs;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON file of option values; flags win")->check(CLI::ExistingFile);
    configs[sub] = &config_path;
  };
  auto add_circuit = [&](CLI::App* sub) {
    sub->add_option("--circuit", circuit_path, "circuit JSON (default: stdin)");
  };
  auto add_p = [&](CLI::App* sub) {
    sub->add_option("--p", p_arg, "probabilities: comma list or a file of numbers")->required();
  };

  // compile
  std::string formula_path, format = "auto", order = "natural";
  std::size_t universe = 0;
  auto* compile_cmd = app.add_subcommand("compile", "compile a formula into an arithmetic circuit (JSON on stdout)");
  compile_cmd->add_option("formula", formula_path, "formula file, s-expression or DIMACS (default: stdin)");
  compile_cmd->add_option("--format", format, "sexpr, dimacs or auto")->check(CLI::IsMember({"auto", "sexpr", "dimacs"}));
  compile_cmd->add_option("--order", order, "BDD variable order")->check(CLI::IsMember({"natural", "first"}));
  compile_cmd->add_option("--vars", universe, "declared number of variables");

  auto* count_cmd = app.add_subcommand("count", "exact model count of a circuit");
  add_circuit(count_cmd);

  auto* wmc_cmd = app.add_subcommand("wmc", "weighted model count");
  add_circuit(wmc_cmd);
  add_p(wmc_cmd);

  bool floor_unsat = false;
  auto* loss_cmd = app.add_subcommand("loss", "semantic loss -ln WMC");
  add_circuit(loss_cmd);
  add_p(loss_cmd);
  loss_cmd->add_flag("--floor", floor_unsat, "floor WMC instead of returning inf when unsatisfiable");

  auto* grad_cmd = app.add_subcommand("grad", "gradient of the semantic loss, one value per line");
  add_circuit(grad_cmd);
  add_p(grad_cmd);
  grad_cmd->add_flag("--floor", floor_unsat, "floor WMC when unsatisfiable");

  // encode
  std::string kind;
  std::size_t n = 0, rows = 4, cols = 4;
  auto* encode_cmd = app.add_subcommand("encode", "emit a built-in constraint circuit");
  encode_cmd->add_option("--kind", kind)->required()->check(CLI::IsMember({"exactly-one", "total-order", "grid"}));
  encode_cmd->add_option("--n", n, "variables (exactly-one) or items (total-order)");
  encode_cmd->add_option("--rows", rows, "grid rows");
  encode_cmd->add_option("--cols", cols, "grid columns");

  // gen-data
  std::size_t count = 1600, n_labeled = 4, n_unlabeled = 200;
  std::uint64_t data_seed = 1;
  auto* gen_cmd = app.add_subcommand("gen-data", "generate a dataset as CSV");
  gen_cmd->add_option("--kind", kind, "grid or toy (required)")->check(CLI::IsMember({"grid", "toy"}));
  gen_cmd->add_option("--rows", rows, "grid rows");
  gen_cmd->add_option("--cols", cols, "grid columns");
  gen_cmd->add_option("--count", count, "grid examples");
  gen_cmd->add_option("--labeled", n_labeled, "toy labeled points");
  gen_cmd->add_option("--unlabeled", n_unlabeled, "toy unlabeled points");
  gen_cmd->add_option("--data-seed", data_seed);
  gen_cmd->add_option("--out", out_dir, "run directory (default: CSV on stdout)");
  add_config(gen_cmd);

  // train-grid
  StructuredRunConfig grid_cfg = default_grid_config();
  TrainFlags grid_flags;
  grid_flags.from(grid_cfg.train);
  std::string data_path;
  auto* tgrid_cmd = app.add_subcommand("train-grid", "train on grid shortest paths; metrics JSON on stdout");
  grid_flags.bind(*tgrid_cmd);
  tgrid_cmd->add_option("--hidden-layers", grid_cfg.hidden_layers);
  tgrid_cmd->add_option("--hidden-units", grid_cfg.hidden_units);
  tgrid_cmd->add_option("--data", data_path, "dataset CSV (default: generate)");
  tgrid_cmd->add_option("--rows", rows, "grid rows");
  tgrid_cmd->add_option("--cols", cols, "grid columns");
  tgrid_cmd->add_option("--count", count, "examples to generate");
  tgrid_cmd->add_option("--data-seed", data_seed);
  tgrid_cmd->add_option("--out", out_dir, "run directory");
  add_config(tgrid_cmd);

  // train-pref
  StructuredRunConfig pref_cfg = default_preference_config();
  TrainFlags pref_flags;
  pref_flags.from(pref_cfg.train);
  std::string url, sha256;
  auto* tpref_cmd = app.add_subcommand("train-pref", "train on sushi rankings; metrics JSON on stdout");
  pref_flags.bind(*tpref_cmd);
  tpref_cmd->add_option("--hidden-layers", pref_cfg.hidden_layers);
  tpref_cmd->add_option("--hidden-units", pref_cfg.hidden_units);
  tpref_cmd->add_option("--data", data_path, "PrefLib SOC file (required)");
  tpref_cmd->add_option("--url", url, "download the SOC file to --data first if it is missing");
  tpref_cmd->add_option("--sha256", sha256, "expected SHA-256 of the SOC file");
  tpref_cmd->add_option("--data-seed", data_seed, "split shuffle seed");
  tpref_cmd->add_option("--out", out_dir, "run directory");
  add_config(tpref_cmd);

  // train-toy
  ToyRunConfig toy_cfg = default_toy_config();
  TrainFlags toy_flags;
  toy_flags.from(toy_cfg.train);
  auto* ttoy_cmd = app.add_subcommand("train-toy", "2D semi-supervised toy, with and without the regularizer");
  toy_flags.bind(*ttoy_cmd);
  ttoy_cmd->add_option("--labeled", n_labeled);
  ttoy_cmd->add_option("--unlabeled", n_unlabeled);
  ttoy_cmd->add_option("--data-seed", data_seed, "default: --seed");
  ttoy_cmd->add_option("--out", out_dir, "run directory; plot.csv holds points and predictions");
  add_config(ttoy_cmd);

  // fuzzy
  std::size_t samples = 10;
  std::uint64_t seed = 1;
  n = 3;
  auto* fuzzy_cmd = app.add_subcommand(
      "fuzzy", "Lukasiewicz value of --formula at --p, or the exactly-one encoding comparison as CSV");
  fuzzy_cmd->add_option("--formula", formula_path, "s-expression file");
  fuzzy_cmd->add_option("--p", p_arg, "probabilities for --formula");
  fuzzy_cmd->add_option("--n", n, "number of variables");
  fuzzy_cmd->add_option("--samples", samples);
  fuzzy_cmd->add_option("--seed", seed);

  AxiomSuiteConfig axiom_cfg;
  auto* axioms_cmd = app.add_subcommand("axioms", "run the axiom suite; nonzero exit on failure");
  axioms_cmd->add_option("--seed", axiom_cfg.seed);
  axioms_cmd->add_option("--instances", axiom_cfg.instances);
  axioms_cmd->add_option("--tolerance", axiom_cfg.tolerance);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    if (configs.count(sub) && !config_path.empty()) apply_config(*sub, parse_json(in.read(config_path), config_path));

    if ((sub == gen_cmd && kind.empty()) || (sub == tpref_cmd && data_path.empty()))
      throw CLI::RequiredError(sub == gen_cmd ? "--kind" : "--data");

    if (sub == compile_cmd) {
      std::string text = in.read(formula_path);
      bool dimacs = format == "dimacs" ||
                    (format == "auto" && (fs::path(formula_path).extension() == ".cnf" ||
                                          text.find("p cnf") != std::string::npos));
      Formula f = dimacs ? parse_dimacs(text) : parse_sexpr(text);
      if (universe) f = f.with_universe(universe);
      Circuit c = compile_to_circuit(f, order == "first" ? VarOrder::FirstOccurrence : VarOrder::Natural);
      std::cout << to_json(c).dump() << "\n";
    } else if (sub == count_cmd) {
      std::cout << circuit_model_count(load_circuit(in, circuit_path)) << "\n";
    } else if (sub == wmc_cmd || sub == loss_cmd || sub == grad_cmd) {
      Circuit c = load_circuit(in, circuit_path);
      ProbVector p = parse_probs(in, p_arg);
      LossConfig lc;
      lc.floor_unsat = floor_unsat;
      if (sub == wmc_cmd) {
        check_probabilities(p, c.universe());
        std::cout << fmt17(wmc(c, p)) << "\n";
      } else if (sub == loss_cmd) {
        std::cout << fmt17(semantic_loss(c, p, lc)) << "\n";
      } else {
        Eigen::VectorXd g = semantic_loss_grad(c, p, lc);
        for (Eigen::Index i = 0; i < g.size(); ++i) std::cout << fmt17(g[i]) << "\n";
      }
    } else if (sub == encode_cmd) {
      if (kind == "grid") {
        std::cout << to_json(grid_simple_path(GridSpec(rows, cols))).dump() << "\n";
      } else {
        if (n == 0) throw InputError("--n is required for " + kind);
        std::cout << to_json(kind == "exactly-one" ? exactly_one(n) : total_order(n)).dump() << "\n";
      }
    } else if (sub == gen_cmd) {
      Dataset d;
      if (kind == "grid") {
        GridSpec g(rows, cols);
        Circuit check = grid_simple_path(g);
        d = gen_grid_dataset(g, count, data_seed, &check);
      } else {
        d = gen_toy_2d(data_seed, n_labeled, n_unlabeled);
      }
      RunDir run(out_dir, *sub);
      if (run.enabled()) {
        run.write("data.csv", dataset_to_csv(d));
        run.finish(in, {{"data_seed", data_seed}});
      } else {
        std::cout << dataset_to_csv(d);
      }
    } else if (sub == tgrid_cmd) {
      grid_cfg.train = grid_flags.get();
      GridSpec g(rows, cols);
      Circuit constraint = grid_simple_path(g);
      Dataset d = data_path.empty() ? gen_grid_dataset(g, count, data_seed, &constraint)
                                    : dataset_from_csv(in.read(data_path));
      StructuredRunResult r = run_grid(g, constraint, d, grid_cfg);
      json metrics = r.to_json();
      RunDir run(out_dir, *sub);
      if (data_path.empty()) run.write("data.csv", dataset_to_csv(d));
      run.write("history.csv", history_csv(r.fit.history));
      run.write("model.json", r.fit.model.to_json().dump() + "\n");
      run.write("metrics.json", metrics.dump(2) + "\n");
      run.finish(in, {{"seed", grid_cfg.train.seed}, {"data_seed", data_seed}});
      print_json(metrics);
    } else if (sub == tpref_cmd) {
      pref_cfg.train = pref_flags.get();
      if (!url.empty() && !fs::exists(data_path)) download_file(url, data_path);
      std::string text = in.read(data_path);
      if (!sha256.empty() && sha256_hex(text) != sha256) throw InputError(data_path + ": SHA-256 mismatch");
      Dataset d = parse_preflib_soc(text, data_seed);
      Circuit constraint = total_order(4);
      StructuredRunResult r = run_preference(constraint, d, pref_cfg);
      json metrics = r.to_json();
      RunDir run(out_dir, *sub);
      run.write("history.csv", history_csv(r.fit.history));
      run.write("model.json", r.fit.model.to_json().dump() + "\n");
      run.write("metrics.json", metrics.dump(2) + "\n");
      run.finish(in, {{"seed", pref_cfg.train.seed}, {"data_seed", data_seed}});
      print_json(metrics);
    } else if (sub == ttoy_cmd) {
      toy_cfg.train = toy_flags.get();
      if (ttoy_cmd->count("--data-seed") == 0) data_seed = toy_cfg.train.seed;
      Dataset d = gen_toy_2d(data_seed, n_labeled, n_unlabeled);
      ToyRunConfig base_cfg = toy_cfg;
      base_cfg.train.w = 0.0;
      ToyRunResult base = run_toy(d, base_cfg);
      ToyRunResult reg = run_toy(d, toy_cfg);
      json metrics = {{"baseline", base.to_json()}, {"regularized", reg.to_json()}};

      RunDir run(out_dir, *sub);
      if (run.enabled()) {
        Eigen::MatrixXd pb = base.model.forward(d.features), pr = reg.model.forward(d.features);
        std::string plot = "x,y,class,split,p_baseline,p_regularized\n";
        for (std::size_t i = 0; i < d.size(); ++i) {
          auto r = static_cast<Eigen::Index>(i);
          plot += fmt17(d.features(r, 0)) + "," + fmt17(d.features(r, 1)) + "," + (d.labels(r, 1) > 0.5 ? "1" : "0") +
                  "," + split_name(d.split[i]) + "," + fmt17(pb(r, 1)) + "," + fmt17(pr(r, 1)) + "\n";
        }
        std::string boundary = "model,a,b,c\n";
        for (auto [name, res] : {std::pair{"baseline", &base}, std::pair{"regularized", &reg}})
          boundary += std::string(name) + "," + fmt17(res->a) + "," + fmt17(res->b) + "," + fmt17(res->c) + "\n";
        run.write("data.csv", dataset_to_csv(d));
        run.write("plot.csv", plot);
        run.write("boundary.csv", boundary);
        run.write("model.json", reg.model.to_json().dump() + "\n");
        run.write("metrics.json", metrics.dump(2) + "\n");
        run.finish(in, {{"seed", toy_cfg.train.seed}, {"data_seed", data_seed}},
                   {{"data_seed", std::to_string(data_seed)}});
      }
      print_json(metrics);
    } else if (sub == fuzzy_cmd && !formula_path.empty()) {
      if (p_arg.empty()) throw CLI::RequiredError("--p");
      Formula f = parse_sexpr(in.read(formula_path));
      ProbVector p = parse_probs(in, p_arg);
      check_probabilities(p, f.universe());
      std::cout << fmt17(fuzzy_eval(f, p)) << "\n";
    } else if (sub == fuzzy_cmd) {
      Rng rng(seed);
      std::vector<ProbVector> ps;
      for (std::size_t i = 0; i < samples; ++i) ps.push_back(random_probs(rng, n));
      std::cout << "id,fuzzy_dnf,fuzzy_cnf,loss_dnf,loss_cnf\n";
      for (const auto& s : fuzzy_comparison(ps))
        std::cout << s.id << "," << fmt17(s.enc1) << "," << fmt17(s.enc2) << "," << fmt17(s.loss1) << ","
                  << fmt17(s.loss2) << "\n";
    } else if (sub == axioms_cmd) {
      AxiomReport rep = axiom_suite(axiom_cfg);
      std::cout << rep.to_text();
      return rep.all_passed() ? 0 : 1;
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  } catch (const InputError& e) {
    std::cerr << "semloss: " << e.what() << "\n";
    return kExitInput;
  } catch (const ComputeError& e) {
    std::cerr << "semloss: " << e.what() << "\n";
    return kExitCompute;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "semloss: " << e.what() << "\n";
    return kExitInput;
  }
  return 0;
}
