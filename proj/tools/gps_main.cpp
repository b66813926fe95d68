#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "gps/common.hpp"

namespace {

void add_common(CLI::App& c, gps::cli::Overrides& o, bool toggles) {
  c.add_option("--config", o.config_path, "JSON config file")->check(CLI::ExistingFile);
  c.add_option("--seed", o.seed, "Override the seed");
  c.add_option("--holdout-domain", o.holdout_domain, "Domain excluded from training");
  c.add_option("--epochs", o.epochs, "Override train.epochs");
  if (!toggles) return;
  c.add_flag("--no-mdsbn", o.no_mdsbn, "Single shared BN branch in both heads");
  c.add_flag("--no-br", o.no_br, "Train on the primary boxes as given");
  c.add_flag("--no-mlg", o.no_mlg, "No pseudo labels");
  c.add_flag("--no-fd", o.no_fd, "No feature decorrelation");
  c.add_flag("--no-ie", o.no_ie, "No inter-frame triplet");
  c.add_flag("--no-id", o.no_id, "No same-frame negatives");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalizable person search on synthetic video data"};
  app.require_subcommand(1);
  gps::cli::Overrides o;
  std::string data = "data", out, checkpoint;
  int seeds = 3, jobs = 1;

  auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset and its ground-truth sidecar");
  add_common(*gen, o, false);
  gen->add_option("--out", out, "Output directory")->required();

  auto* train = app.add_subcommand("train", "Train on every domain but the held-out one");
  add_common(*train, o, true);
  train->add_option("--data", data, "Dataset directory")->required();
  train->add_option("--out", out, "Output directory")->required();

  auto* ev = app.add_subcommand("eval", "Held-out metrics of a checkpoint");
  ev->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  ev->add_option("--data", data, "Dataset directory")->required();
  ev->add_option("--out", out, "Metrics JSON path (stdout if omitted)");

  auto* ablate = app.add_subcommand("ablate", "Toggle grid over several seeds");
  add_common(*ablate, o, false);
  ablate->add_option("--data", data, "Dataset directory")->required();
  ablate->add_option("--out", out, "Output directory")->required();
  ablate->add_option("--seeds", seeds, "Seeds per row");
  ablate->add_option("--jobs", jobs, "Concurrent training runs");

  auto* stats = app.add_subcommand("label-stats", "Pseudo-label precision against the hidden ground truth");
  add_common(*stats, o, true);
  stats->add_option("--data", data, "Dataset directory")->required();
  stats->add_option("--out", out, "JSON path (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*gen) return gps::cli::cmd_gen(o, out);
    if (*train) return gps::cli::cmd_train(o, data, out);
    if (*ev) return gps::cli::cmd_eval(checkpoint, data, out);
    if (*ablate) return gps::cli::cmd_ablate(o, data, out, seeds, jobs);
    if (*stats) return gps::cli::cmd_label_stats(o, data, out);
  } catch (const gps::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
