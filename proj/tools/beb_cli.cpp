// Command-line front end over the C interface.
#include <cstdio>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "beb/beb.h"

namespace {

struct Options {
  std::string model;
  std::string params;
  std::string out;
  std::string curve_out;
  std::string what = "beta";
  std::string direction = "negative";
  std::string metric = "kl";
  std::string mode = "greedy";
  std::uint64_t seed = 0;
  std::size_t prefix_len = 0;
  beb_run_config cfg{};
};

int report(beb_status st, const char* summary) {
  if (summary[0] != '\0') std::printf("%s\n", summary);
  if (st == BEB_OK) return 0;
  nlohmann::json err = {{"error", beb_status_name(st)}, {"message", beb_last_error()}};
  std::fprintf(stderr, "%s\n", err.dump().c_str());
  return static_cast<int>(st) < 100 ? static_cast<int>(st) : 1;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  beb_run_config_init(&o.cfg);
  beb_run_config& c = o.cfg;

  CLI::App app{"Behavior expectation bounds on synthetic sentence-level language models"};
  app.require_subcommand(1);
  app.add_option("--workers", c.workers, "worker threads for sampling loops")
      ->check(CLI::Range(1u, 1024u));

  auto add_seed = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("--seed", o.seed, "master seed");
    if (required) opt->required();
  };

  auto* validate = app.add_subcommand("validate", "load a model file and report its properties");
  validate->add_option("model", o.model, "model JSON")->required();

  auto* estimate = app.add_subcommand("estimate", "estimate beta, beta-prompt or sigma^2");
  estimate->add_option("--what", o.what)->check(CLI::IsMember({"beta", "beta-prompt", "sigma"}));
  estimate->add_option("--model", o.model)->required();
  estimate->add_option("--max-len", c.max_len);
  estimate->add_option("--trials", c.trials);
  estimate->add_option("--out", o.out)->required();
  estimate->add_option("--direction", o.direction, "negative: (P_-, P_+); positive: (P_+, P_-)")
      ->check(CLI::IsMember({"negative", "positive"}));
  estimate->add_option("--neutral-len", c.neutral_len, "neutral sentences before the trigger");
  add_seed(estimate, true);

  auto* attack = app.add_subcommand("attack", "build an adversarial prompt");
  attack->add_option("--model", o.model)->required();
  attack->add_option("--mode", o.mode)->check(CLI::IsMember({"greedy", "sample"}));
  attack->add_option("--max-len", c.max_len);
  auto* prefix_opt = attack->add_option("--prefix-len", o.prefix_len,
                                        "aligned prefix drawn from P_+ before the attack");
  attack->add_option("--delta", c.delta);
  attack->add_option("--epsilon", c.epsilon);
  attack->add_option("--out", o.out, "per-step CSV");
  add_seed(attack, true);

  auto* curve = app.add_subcommand("curve", "KL-decay or behavior curve");
  curve->add_option("--model", o.model)->required();
  curve->add_option("--metric", o.metric)->check(CLI::IsMember({"kl", "behavior"}));
  curve->add_option("--mode", o.mode, "behavior curve prompts")
      ->check(CLI::IsMember({"greedy", "sample"}));
  curve->add_option("--max-len", c.max_len);
  curve->add_option("--trials", c.trials);
  curve->add_option("--out", o.out)->required();
  add_seed(curve, true);

  auto* conv = app.add_subcommand("converse", "multi-turn attack within per-turn caps");
  conv->add_option("--model", o.model)->required();
  conv->add_option("--turns", c.turns);
  conv->add_option("--answer-len", c.answer_len);
  conv->add_option("--delta", c.delta);
  conv->add_option("--epsilon", c.epsilon);
  conv->add_option("--out", o.out)->required();
  add_seed(conv, true);

  auto* bounds = app.add_subcommand("bounds", "evaluate closed-form bounds from a params file");
  bounds->add_option("--params", o.params)->required();
  bounds->add_option("--out", o.out)->required();
  bounds->add_option("--curve-out", o.curve_out, "n, kl_bound, sigmoid_bound CSV");
  bounds->add_option("--max-len", c.max_len, "last n of the bound curve");

  auto* verify = app.add_subcommand("verify", "lemma property suite on random mixtures");
  verify->add_option("--trials", c.trials, "random mixtures");
  verify->add_option("--out", o.out);
  add_seed(verify, true);

  auto* synth = app.add_subcommand("synth", "generate a desk mixture");
  synth->add_option("--vocab", c.vocab);
  synth->add_option("--alpha", c.alpha);
  synth->add_option("--gamma", c.gamma);
  synth->add_option("--beta", c.beta, "target certified beta");
  synth->add_option("--order", c.order)->check(CLI::Range(0, 2));
  synth->add_option("--jitter", c.jitter);
  synth->add_flag("--binary", c.binary, "{0,1} scores, P_- only on score-0 symbols");
  synth->add_flag("--disjoint", c.disjoint, "P_+ never emits negative symbols");
  synth->add_option("--out", o.out)->required();
  add_seed(synth, true);

  CLI11_PARSE(app, argc, argv);

  std::string scenario;
  if (*validate) {
    scenario = "validate";
  } else if (*estimate) {
    scenario = o.what == "beta" ? "estimate-beta"
               : o.what == "sigma" ? "estimate-sigma"
                                   : "estimate-beta-prompt";
    c.reverse = o.direction == "positive";
  } else if (*attack) {
    scenario = "attack";
    c.has_prefix_len = prefix_opt->count() > 0;
    c.prefix_len = o.prefix_len;
  } else if (*curve) {
    scenario = o.metric == "kl" ? "kl-curve" : "behavior-curve";
  } else if (*conv) {
    scenario = "converse";
  } else if (*bounds) {
    scenario = "bounds";
  } else if (*verify) {
    scenario = "verify";
  } else {
    scenario = "synth";
  }
  c.scenario = scenario.c_str();
  c.model_path = o.model.c_str();
  c.params_path = o.params.c_str();
  c.out_path = o.out.c_str();
  c.curve_out_path = o.curve_out.c_str();
  c.mode = o.mode.c_str();
  c.has_seed = !*validate && !*bounds;
  c.seed = o.seed;

  char summary[4096];
  return report(beb_run(&c, summary, sizeof summary), summary);
}
