// tatraj: community time-activity trajectories from diaries to Dirichlet
// regression. Each subcommand runs the pipeline up to its stage.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "tatraj/io.hpp"
#include "tatraj/pipeline.hpp"

namespace fs = std::filesystem;
using namespace tatraj;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

PipelineConfig configure(const Globals& g) {
  if (g.config.empty()) throw StageError("config", 2, Errc::ConfigError, "--config is required");
  PipelineConfig c;
  try {
    c = load_config(g.config);
  } catch (const Error& e) {
    throw StageError("config", 2, e.code(), e.what());
  }
  if (g.seed) {
    c.markov.seed = *g.seed;
    c.regression.split_seed = *g.seed;
    c.clustering.seed = *g.seed;
  }
  if (!g.out.empty()) c.paths.output = g.out;
  if (c.paths.output.empty()) throw StageError("config", 2, Errc::ConfigError, "no output directory (set [paths] output or --out)");
  return c;
}

template <typename F>
auto in_stage(const std::string& name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, exit_code_for(name, e.code()), e.code(), e.what());
  }
}

// Writes the stage outputs of a full in-memory run whose paths start with
// one of `prefixes`.
void commit_subset(const RunReport& report, const fs::path& dir, std::initializer_list<std::string_view> prefixes) {
  OutputSet subset;
  for (const auto& [path, content] : report.outputs.files()) {
    for (auto p : prefixes) {
      if (path.starts_with(p)) subset.add(path, content);
    }
  }
  subset.commit(dir);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Community time-activity trajectory pipeline"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "INI configuration file");
  app.add_option("--seed", g.seed, "override every seed in the configuration");
  app.add_option("--out", g.out, "output directory (overrides [paths] output)");

  auto* ingest_cmd = app.add_subcommand("ingest", "validate diaries, mapping and covariates; write a summary");
  auto* cluster_cmd = app.add_subcommand("cluster", "k-means of reduced diaries per community");
  auto* simulate_cmd = app.add_subcommand("simulate", "estimate transition models and simulate profiles");
  auto* fit_cmd = app.add_subcommand("fit", "variable selection and Dirichlet regression on the training split");
  auto* validate_cmd = app.add_subcommand("validate", "Box's M and Welch t-tests on the test split");

  auto* predict_cmd = app.add_subcommand("predict", "predict a 96-step profile from a fit and covariates");
  std::string fit_path;
  std::string cov_path;
  std::string community;
  predict_cmd->add_option("--fit", fit_path, "fit.json from the fit stage")->required();
  predict_cmd->add_option("--covariates", cov_path, "covariates CSV")->required();
  predict_cmd->add_option("--community", community, "only this community");

  auto* plot_cmd = app.add_subcommand("export-plot", "ternary coordinates of a composition CSV");
  std::string profile_path;
  std::string triple_text = "c05,c02,c07";
  plot_cmd->add_option("--profile", profile_path, "composition CSV (step,c01..c08)")->required();
  plot_cmd->add_option("--triple", triple_text, "three categories: a,b,c");

  auto* synth_cmd = app.add_subcommand("synth", "generate the synthetic fixture");
  std::size_t n_diaries = 200;
  std::string mapping_path;
  synth_cmd->add_option("--n", n_diaries, "diaries per community");
  synth_cmd->add_option("--mapping", mapping_path, "raw-code mapping CSV used for raw codes");

  auto* run_cmd = app.add_subcommand("run-all", "the whole pipeline");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (synth_cmd->parsed()) {
      if (g.out.empty()) throw StageError("config", 2, Errc::ConfigError, "synth needs --out");
      const CategoryMapping mapping = mapping_path.empty() ? CategoryMapping::identity() : CategoryMapping::load(mapping_path);
      const auto files = generate_synthetic(default_truth(true), n_diaries, g.seed.value_or(20210), mapping);
      write_synthetic(files, g.out);
      std::cout << "wrote " << (fs::path(g.out) / "diaries.csv").string() << ", covariates.csv, truth.json\n";
      return 0;
    }

    if (plot_cmd->parsed()) {
      if (g.out.empty()) throw StageError("config", 2, Errc::ConfigError, "export-plot needs --out");
      std::array<ActivityCategory, 3> triple{};
      std::stringstream ss(triple_text);
      std::string item;
      std::size_t i = 0;
      while (std::getline(ss, item, ',')) {
        auto cat = parse_category(item);
        if (!cat || i >= 3) throw StageError("config", 2, Errc::ConfigError, "bad --triple '" + triple_text + "'");
        triple[i++] = *cat;
      }
      if (i != 3) throw StageError("config", 2, Errc::ConfigError, "--triple needs three categories");
      const auto profile = in_stage("ingest", [&] { return parse_composition_csv(read_text_file(profile_path), profile_path); });
      std::vector<Composition> rows;
      for (Eigen::Index t = 0; t < profile.steps(); ++t) rows.push_back(profile.values().row(t).transpose());
      const auto csv = in_stage("export", [&] { return ternary_csv(ternary_coordinates(rows, triple), triple); });
      write_file_atomic(fs::path(g.out) / (fs::path(profile_path).stem().string() + "_ternary.csv"), csv);
      return 0;
    }

    if (predict_cmd->parsed()) {
      if (g.out.empty()) throw StageError("config", 2, Errc::ConfigError, "predict needs --out");
      const RegressionFit fit =
          in_stage("ingest", [&] { return fit_from_json(nlohmann::json::parse(read_text_file(fit_path))); });
      const auto covs = in_stage("ingest", [&] { return parse_covariates_csv(read_text_file(cov_path), cov_path); });
      OutputSet out;
      for (const auto& c : covs) {
        if (!community.empty() && c.community_id != community) continue;
        out.add("predicted/" + c.community_id + ".csv",
                composition_csv(in_stage("predict", [&] { return predict_profile(fit, c); })));
      }
      if (out.files().empty()) throw StageError("ingest", 3, Errc::CommunityMismatch, "no community '" + community + "'");
      out.commit(g.out);
      return 0;
    }

    const PipelineConfig config = configure(g);

    if (ingest_cmd->parsed()) {
      const auto data = in_stage("ingest", [&] { return ingest(config); });
      nlohmann::json summary;
      summary["config_hash"] = fnv1a_hex(config.source_text);
      for (const auto& id : data.communities) summary["communities"][id] = data.diaries.at(id).size();
      OutputSet out;
      out.add("ingest.json", summary.dump(1) + "\n");
      out.commit(config.paths.output);
      std::cout << summary.dump(1) << "\n";
      return 0;
    }
    if (cluster_cmd->parsed()) {
      const auto data = in_stage("ingest", [&] { return ingest(config); });
      const auto clusters = in_stage("cluster", [&] { return cluster_communities(data, config); });
      OutputSet out;
      for (const auto& [id, result] : clusters) out.add("clusters/" + id + ".csv", cluster_csv(data.diaries.at(id), result));
      out.commit(config.paths.output);
      return 0;
    }
    if (simulate_cmd->parsed()) {
      const auto data = in_stage("ingest", [&] { return ingest(config); });
      const auto profiles = in_stage("simulate", [&] { return simulate_communities(data, config); });
      OutputSet out;
      for (const auto& p : profiles) {
        out.add("profiles/" + p.community + ".csv", composition_csv(p.profile));
        out.add("models/" + p.community + ".json", model_to_json(p.model).dump(1) + "\n");
      }
      out.commit(config.paths.output);
      return 0;
    }
    if (fit_cmd->parsed() || validate_cmd->parsed()) {
      const RunReport report = run_all(config, false);
      if (fit_cmd->parsed()) {
        commit_subset(report, config.paths.output, {"fit.json", "coefficients.txt", "correlation.csv"});
        std::cout << report.outputs.files().at("coefficients.txt");
      } else {
        commit_subset(report, config.paths.output, {"test_report.json", "predictions.csv", "predicted/"});
        std::cout << report.outputs.files().at("test_report.json");
      }
      return 0;
    }
    if (run_cmd->parsed()) {
      const RunReport report = run_all(config, true);
      const auto& j = report.json;
      std::cout << "kept: " << j["selection"]["kept"].dump() << "\n"
                << "fit: converged=" << j["fit"]["converged"] << " loglik=" << j["fit"]["loglik"] << "\n"
                << "box's M p=" << j["validation"]["boxm"]["p"] << "\n"
                << "recovery: " << j["recovery"]["status"].get<std::string>() << "\n"
                << "report: " << (config.paths.output / "run_report.json").string() << "\n";
      return 0;
    }
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for("", e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  }
  return 0;
}
