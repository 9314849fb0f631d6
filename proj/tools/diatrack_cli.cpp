// diatrack command-line front end: train, eval, replay, generate, bayes.
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "diatrack/errors.hpp"
#include "diatrack/harness.hpp"

namespace {

std::vector<int> parse_k_list(const std::string& spec) {
  std::vector<int> ks;
  std::string cur;
  for (char c : spec + ",") {
    if (c == ',') {
      if (!cur.empty()) ks.push_back(std::stoi(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (ks.empty()) throw diatrack::UsageError("--k needs at least one value");
  for (int k : ks)
    if (k < 1) throw diatrack::UsageError("--k values must be >= 1");
  return ks;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"three-layer dialogue-act tracking engine"};
  app.require_subcommand(1);

  using namespace diatrack::harness;

  TrainOptions train;
  auto* cmd_train_app = app.add_subcommand("train", "train an n-gram model from a corpus");
  cmd_train_app->add_option("--corpus", train.corpus_path, "annotated corpus file")->required();
  cmd_train_app->add_option("--model-def", train.model_def_path, "model definition file")
      ->required();
  cmd_train_app->add_option("--out", train.out_path, "output model file")->required();
  cmd_train_app->add_option("--split", train.split,
                            "fraction of dialogues used for counting (rest estimates weights)");
  cmd_train_app->add_option("--skip-speaker", train.skip_speakers,
                            "drop turns by this speaker (repeatable)");

  EvalOptions eval;
  std::string eval_ks = "1,2,3";
  auto* cmd_eval_app = app.add_subcommand("eval", "top-k prediction accuracy on test corpora");
  cmd_eval_app->add_option("--model", eval.model_path, "trained model file")->required();
  cmd_eval_app->add_option("--model-def", eval.model_def_path, "model definition file")
      ->required();
  cmd_eval_app->add_option("--corpus", eval.corpus_paths, "test corpus (repeatable)")->required();
  cmd_eval_app->add_option("--k", eval_ks, "comma-separated k list (default 1,2,3)");
  cmd_eval_app->add_flag("--skip-initial", eval.skip_initial,
                         "do not score dialogue-initial positions");
  cmd_eval_app->add_option("--skip-speaker", eval.skip_speakers,
                           "drop turns by this speaker (repeatable)");

  ReplayOptions replay;
  auto* cmd_replay_app =
      app.add_subcommand("replay", "run one dialogue through all three layers");
  cmd_replay_app->add_option("--model", replay.model_path, "trained model file")->required();
  cmd_replay_app->add_option("--model-def", replay.model_def_path, "model definition file")
      ->required();
  cmd_replay_app->add_option("--operators", replay.operators_path, "plan operator library")
      ->required();
  cmd_replay_app->add_option("--corpus", replay.corpus_path, "annotated corpus file")->required();
  cmd_replay_app->add_option("--dialogue", replay.dialogue_id, "dialogue id to replay")
      ->required();
  cmd_replay_app->add_option("--predictions", replay.predictions,
                             "predictions printed per turn (default 2)");
  cmd_replay_app->add_option("--events", replay.events_path,
                             "write the serialized tracker event log to this file");
  cmd_replay_app->add_flag("--strict", replay.strict,
                           "exit 3 when the dialogue had inconsistencies");

  GenerateOptions gen;
  auto* cmd_gen_app = app.add_subcommand("generate", "sample a synthetic corpus from a source");
  cmd_gen_app->add_option("--source", gen.source_path, "source spec (exact probabilities)")
      ->required();
  cmd_gen_app->add_option("--model-def", gen.model_def_path, "model definition file")->required();
  cmd_gen_app->add_option("--out", gen.out_path, "output corpus file")->required();
  cmd_gen_app->add_option("--count", gen.count, "number of dialogues")->required();
  cmd_gen_app->add_option("--seed", gen.seed, "rng seed");
  cmd_gen_app->add_option("--terminal", gen.terminal_act,
                          "act that ends a dialogue (default VERABSCHIEDUNG)");

  BayesOptions bayes;
  std::string bayes_ks = "1,2,3";
  auto* cmd_bayes_app =
      app.add_subcommand("bayes", "exact top-k ceiling of a source on a sample corpus");
  cmd_bayes_app->add_option("--source", bayes.source_path, "source spec")->required();
  cmd_bayes_app->add_option("--model-def", bayes.model_def_path, "model definition file")
      ->required();
  cmd_bayes_app->add_option("--corpus", bayes.corpus_path, "sample corpus")->required();
  cmd_bayes_app->add_option("--k", bayes_ks, "comma-separated k list (default 1,2,3)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (cmd_train_app->parsed()) return cmd_train(train, std::cout);
    if (cmd_eval_app->parsed()) {
      eval.ks = parse_k_list(eval_ks);
      return cmd_eval(eval, std::cout);
    }
    if (cmd_replay_app->parsed()) return cmd_replay(replay, std::cout);
    if (cmd_gen_app->parsed()) return cmd_generate(gen, std::cout);
    if (cmd_bayes_app->parsed()) {
      bayes.ks = parse_k_list(bayes_ks);
      return cmd_bayes(bayes, std::cout);
    }
  } catch (const diatrack::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const diatrack::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
