#include <CLI11.hpp>
#include <exception>
#include <iostream>

#include "causalbait/errors.hpp"
#include "commands.hpp"

namespace cli = causalbait::cli;

int main(int argc, char** argv) {
  CLI::App app{"Causal disentanglement toolkit for clickbait detection"};
  app.require_subcommand(1);
  int code = 0;

  cli::GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate the synthetic spurious-correlation benchmark");
  g->add_option("--config", gen.config, "Run config JSON")->check(CLI::ExistingFile);
  g->add_option("--seed", gen.seed, "Overrides the config seed");
  g->add_option("--out", gen.out, "Output directory")->required();
  g->callback([&] { code = cli::run_gen(gen); });

  cli::TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train the full pipeline and write a model bundle");
  t->add_option("--config", tr.config, "Run config JSON")->check(CLI::ExistingFile);
  t->add_option("--seed", tr.seed, "Overrides the config seed");
  t->add_option("--data", tr.data, "Directory with train/val splits or data.cbfv")->required()->check(CLI::ExistingDirectory);
  t->add_option("--out", tr.out, "Output directory")->required();
  t->callback([&] { code = cli::run_train(tr); });

  cli::EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Score a bundle on one split");
  e->add_option("--bundle", ev.bundle, "Model bundle (.cbmb)")->required()->check(CLI::ExistingFile);
  e->add_option("--data", ev.data, "Data directory")->required()->check(CLI::ExistingDirectory);
  e->add_option("--split", ev.split, "Split name inside the data directory")->capture_default_str();
  e->add_option("--out", ev.out, "Output directory")->required();
  e->add_flag("--dump-factors", ev.dump_factors, "Also write ic/sc/nf factor vectors");
  e->callback([&] { code = cli::run_eval(ev); });

  cli::StudyArgs ab;
  auto* a = app.add_subcommand("ablate", "Component ablations (or mask configs) over the config seeds");
  a->add_option("--config", ab.config, "Run config JSON")->check(CLI::ExistingFile);
  a->add_option("--seed", ab.seed, "Run a single seed instead of the config list");
  a->add_option("--data", ab.data, "Data directory; synthetic data per seed when omitted")->check(CLI::ExistingDirectory);
  a->add_option("--out", ab.out, "Output directory")->required();
  a->add_flag("--mask-configs", ab.mask_configs, "Compare binary/float masks with L0/L2 penalties");
  a->callback([&] { code = cli::run_ablate(ab); });

  cli::StudyArgs sw;
  auto* s = app.add_subcommand("sweep-scenarios", "Retrain over the configured scenario counts");
  s->add_option("--config", sw.config, "Run config JSON")->check(CLI::ExistingFile);
  s->add_option("--seed", sw.seed, "Run a single seed instead of the config list");
  s->add_option("--data", sw.data, "Data directory; synthetic data per seed when omitted")->check(CLI::ExistingDirectory);
  s->add_option("--out", sw.out, "Output directory")->required();
  s->callback([&] { code = cli::run_sweep(sw); });

  cli::PseudoLabelArgs pl;
  auto* p = app.add_subcommand("pseudo-label", "Label hot posts from social metadata");
  p->add_option("--config", pl.config, "Run config JSON")->check(CLI::ExistingFile);
  p->add_option("--input", pl.input, "JSONL of {id, x, meta}")->required()->check(CLI::ExistingFile);
  p->add_option("--out", pl.out, "Output directory")->required();
  p->callback([&] { code = cli::run_pseudo_label(pl); });

  cli::CheckGradArgs cg;
  auto* c = app.add_subcommand("check-grad", "Finite-difference check of every differentiable kernel");
  c->add_option("--out", cg.out, "Optional directory for gradcheck.json");
  c->add_option("--seed", cg.seed, "Instance seed")->capture_default_str();
  c->callback([&] { code = cli::run_check_grad(cg); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex);
    std::cerr << app.help();
    return 2;
  } catch (const causalbait::Error& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return causalbait::exit_code(ex.kind());
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 4;
  }
  return code;
}
