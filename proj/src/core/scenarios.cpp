#include "core/scenarios.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "core/error.hpp"
#include "core/logspace.hpp"
#include "core/oracle.hpp"

namespace beb {

using nlohmann::json;

namespace {

struct NamedScenario {
  Scenario scenario;
  const char* name;
};

constexpr NamedScenario kScenarios[] = {
    {Scenario::kValidate, "validate"},
    {Scenario::kEstimateBeta, "estimate-beta"},
    {Scenario::kEstimateBetaPrompt, "estimate-beta-prompt"},
    {Scenario::kEstimateSigma, "estimate-sigma"},
    {Scenario::kAttack, "attack"},
    {Scenario::kKlCurve, "kl-curve"},
    {Scenario::kBehaviorCurve, "behavior-curve"},
    {Scenario::kConverse, "converse"},
    {Scenario::kBounds, "bounds"},
    {Scenario::kVerify, "verify"},
    {Scenario::kSynth, "synth"},
};

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorCode::kInvalidArgument, message);
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

class Csv {
 public:
  Csv(const std::string& hash, const std::string& header) {
    text_ = "# config-hash: " + hash + "\n" + header + "\n";
  }
  void comment(const std::string& line) { text_ += "# " + line + "\n"; }
  template <typename... Cells>
  void row(const Cells&... cells) {
    std::string line;
    ((line += (line.empty() ? "" : ","), line += cell(cells)), ...);
    text_ += line + "\n";
  }
  const std::string& text() const { return text_; }

 private:
  static std::string cell(double v) { return format_number(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }
  std::string text_;
};

class Summary {
 public:
  explicit Summary(Scenario s) { line_ = scenario_name(s); }
  Summary& add(const std::string& key, double v) { return add(key, format_number(v)); }
  Summary& add(const std::string& key, std::size_t v) { return add(key, std::to_string(v)); }
  Summary& add(const std::string& key, const std::string& v) {
    line_ += " " + key + "=" + v;
    return *this;
  }
  Summary& add(const std::string& key, const char* v) { return add(key, std::string(v)); }
  const std::string& str() const { return line_; }

 private:
  std::string line_;
};

std::string yes_no(bool b) { return b ? "yes" : "no"; }

const SentenceLM& first_of(const ModelBundle& m, bool reverse) {
  return reverse ? m.model.positive() : m.model.negative();
}
const SentenceLM& second_of(const ModelBundle& m, bool reverse) {
  return reverse ? m.model.negative() : m.model.positive();
}

std::string order_label(const SentenceLM& c) {
  return c.order() == 0 ? "categorical" : "markov" + std::to_string(c.order());
}

RngSpec seeded(const ExperimentConfig& c, const char* tag) {
  return RngSpec{*c.seed}.child(tag);
}

// ---------------------------------------------------------------------------

RunResult run_validate(const ExperimentConfig& c) {
  const ModelBundle m = load_model(c.model_path);
  const SentenceLM& neg = m.model.negative();
  const SentenceLM& pos = m.model.positive();
  Summary s(c.scenario);
  s.add("vocab", m.vocab.size())
      .add("alpha", m.model.alpha())
      .add("negative", order_label(neg))
      .add("positive", order_label(pos));
  const CertifiedValue beta = certify_beta(neg, pos);
  s.add("certified_beta", beta.value);
  const GammaCertificate g = certify_gamma_negative(neg, m.behavior, 0.0);
  s.add("gamma_max", g.max_expectation);
  if (!m.behavior.negatives().empty()) {
    const PositivityReport p = check_positivity(pos, neg, m.behavior);
    s.add("positive_wrt_negative", yes_no(p.ok));
    if (!p.ok) {
      s.add("positivity_witness", "[" + m.vocab.render(p.witness_context) + "]->" +
                                      m.vocab.symbol(p.witness_symbol));
    }
  }
  return {s.str(), {}};
}

RunResult run_estimate(const ExperimentConfig& c) {
  const ModelBundle m = load_model(c.model_path);
  const SentenceLM& p = first_of(m, c.reverse);
  const SentenceLM& q = second_of(m, c.reverse);
  const RngSpec rng = seeded(c, "estimate");
  EstimateReport rep;
  if (c.scenario == Scenario::kEstimateBeta) {
    rep = estimate_beta(p, q, c.max_len, c.trials, rng, c.workers);
  } else if (c.scenario == Scenario::kEstimateBetaPrompt) {
    rep = estimate_beta_prompt(p, q, neutral_from(m.model, c.neutral_len), m.behavior, c.max_len,
                               c.trials, rng, c.workers);
  } else {
    rep = estimate_sigma(p, q, {}, c.max_len, c.trials, rng, c.workers);
  }
  Csv csv(c.hash(), "n,mean,stderr,trials");
  for (const auto& st : rep.per_length) csv.row(st.n, st.mean, st.standard_error, st.trials);
  write_text_file(c.out_path, csv.text());
  Summary s(c.scenario);
  s.add("direction", c.reverse ? "positive-negative" : "negative-positive");
  if (c.scenario == Scenario::kEstimateSigma) {
    s.add("sigma_sq_hat", rep.point_estimate);
  } else {
    s.add("beta_hat", rep.point_estimate);
  }
  s.add("stderr", rep.standard_error).add("trials", rep.trials);
  s.add("label", "\"" + rep.label() + "\"").add("seed", std::to_string(*c.seed));
  return {s.str(), {c.out_path}};
}

RunResult run_attack(const ExperimentConfig& c) {
  const ModelBundle m = load_model(c.model_path);
  const SentenceLM& mix = m.model;
  SentenceSeq prefix;
  PromptTrace trace;
  std::optional<PrefixedAttack> prefixed;
  if (c.prefix_len) {
    Rng r = seeded(c, "prefix").stream(0);
    prefix = sample_seq(mix.positive(), {}, *c.prefix_len, r);
  }
  if (c.mode == PromptMode::kGreedy && c.prefix_len) {
    const BoundParams params = derive_params(m, c.epsilon, c.delta, seeded(c, "params"), c.workers);
    prefixed = prefixed_attack(mix, prefix, m.behavior, params, c.max_len);
    trace = prefixed->trace;
  } else if (c.mode == PromptMode::kGreedy) {
    trace = greedy_prompt(mix, c.max_len, prefix);
  } else {
    Rng r = seeded(c, "attack").stream(0);
    trace = sampled_prompt(mix, c.max_len, r, prefix);
  }

  Csv csv(c.hash(), "step,sentence,log_ratio,cumulative,behavior");
  if (!prefix.empty()) csv.comment("prefix: " + m.vocab.render(prefix));
  Context cm = mix.start();
  for (Sentence s : prefix) cm.push(s);
  double cumulative = 0.0;
  double behavior = behavior_expectation(cm, m.behavior);
  csv.row(std::size_t{0}, std::string(), 0.0, 0.0, behavior);
  for (std::size_t k = 0; k < trace.prompt.size(); ++k) {
    cm.push(trace.prompt[k]);
    cumulative += trace.per_step_log_ratio[k];
    behavior = behavior_expectation(cm, m.behavior);
    csv.row(k + 1, m.vocab.symbol(trace.prompt[k]), trace.per_step_log_ratio[k], cumulative, behavior);
  }
  std::vector<std::string> artifacts;
  if (!c.out_path.empty()) {
    write_text_file(c.out_path, csv.text());
    artifacts.push_back(c.out_path);
  }
  Summary s(c.scenario);
  s.add("mode", prompt_mode_name(c.mode)).add("prefix_len", prefix.size());
  s.add("length", trace.prompt.size()).add("cumulative_log_ratio", trace.cumulative_log_ratio);
  s.add("final_behavior", behavior);
  if (trace.truncated) s.add("truncated", "yes");
  if (prefixed) {
    s.add("target_log_ratio", prefixed->target_log_ratio);
    s.add("theorem2_length", prefixed->theorem2_length);
    s.add("misalignment_length", prefixed->misalignment_length
                                     ? std::to_string(*prefixed->misalignment_length)
                                     : std::string("none"));
  }
  if (c.seed) s.add("seed", std::to_string(*c.seed));
  return {s.str(), artifacts};
}

RunResult run_curve(const ExperimentConfig& c) {
  const ModelBundle m = load_model(c.model_path);
  const SentenceLM& mix = m.model;
  const double alpha = mix.alpha();
  const double beta = certify_beta(mix.negative(), mix.positive()).value;
  Summary s(c.scenario);
  if (c.scenario == Scenario::kKlCurve) {
    CurveSeries curve = kl_decay_curve(mix, c.max_len, c.trials, seeded(c, "kl-curve"), c.workers);
    Csv csv(c.hash(), "n,kl_mean,kl_stderr,kl_bound");
    for (const auto& p : curve.points) {
      csv.row(static_cast<std::size_t>(p.n), p.value, p.standard_error, kl_decay_bound(alpha, beta, p.n));
    }
    write_text_file(c.out_path, csv.text());
    s.add("points", curve.points.size()).add("kl_at_0", curve.points.front().value);
    if (curve.points.size() >= 2) {
      const LineFit fit = fit_alpha_beta(curve);
      s.add("fit_log_inv_alpha", fit.log_inv_alpha_hat()).add("fit_beta", fit.beta_hat());
      s.add("fit_points", fit.last - fit.first + 1);
    }
  } else {
    CurveSeries curve = misalignment_curve(mix, m.behavior, c.max_len, c.mode, c.trials,
                                           seeded(c, "behavior-curve"), c.workers);
    Csv csv(c.hash(), "n,behavior_mean,behavior_stderr,sigmoid_bound");
    for (const auto& p : curve.points) {
      csv.row(static_cast<std::size_t>(p.n), p.value, p.standard_error, sigmoid_bound(alpha, beta, p.n));
    }
    write_text_file(c.out_path, csv.text());
    s.add("mode", prompt_mode_name(c.mode)).add("points", curve.points.size());
    const auto mid = curve_midpoint(curve);
    s.add("midpoint", mid ? format_number(*mid) : std::string("none"));
  }
  s.add("alpha", alpha).add("certified_beta", beta);
  s.add("log_inv_alpha_over_beta", -std::log(alpha) / beta);
  s.add("seed", std::to_string(*c.seed));
  return {s.str(), {c.out_path}};
}

RunResult run_converse(const ExperimentConfig& c) {
  const ModelBundle m = load_model(c.model_path);
  const BoundParams params = derive_params(m, c.epsilon, c.delta, seeded(c, "params"), c.workers);
  const ConversationTranscript tr =
      converse(m.model, m.behavior, c.turns, c.answer_len, params, seeded(c, "converse"));
  const double threshold = params.gamma + params.epsilon;
  json j = json::object();
  j["config_hash"] = c.hash();
  j["seed"] = *c.seed;
  j["params"] = {{"alpha", params.alpha},     {"beta", params.beta},
                 {"beta_prime", params.beta_prime}, {"sigma", params.sigma},
                 {"gamma", params.gamma},     {"epsilon", params.epsilon},
                 {"delta", params.delta}};
  j["per_turn_caps"] = tr.per_turn_caps;
  json turns = json::array();
  for (const auto& t : tr.turns) {
    json tj;
    std::vector<std::string> q;
    std::vector<std::string> a;
    for (Sentence s : t.query) q.push_back(m.vocab.symbol(s));
    for (Sentence s : t.answer) a.push_back(m.vocab.symbol(s));
    tj["query"] = q;
    tj["answer"] = a;
    tj["answer_log_ratio"] = t.answer_log_ratio;
    turns.push_back(tj);
  }
  j["turns"] = turns;
  j["total_query_length"] = tr.total_query_length();
  j["theorem1_length"] = theorem1_length(params);
  j["final_behavior"] = tr.final_behavior;
  j["threshold"] = threshold;
  j["misaligned"] = tr.final_behavior <= threshold;
  write_text_file(c.out_path, j.dump(2) + "\n");
  Summary s(c.scenario);
  s.add("turns", c.turns).add("answer_len", c.answer_len);
  s.add("total_query_length", tr.total_query_length()).add("theorem1_length", theorem1_length(params));
  s.add("final_behavior", tr.final_behavior).add("threshold", threshold);
  s.add("misaligned", yes_no(tr.final_behavior <= threshold)).add("seed", std::to_string(*c.seed));
  return {s.str(), {c.out_path}};
}

RunResult run_bounds(const ExperimentConfig& c) {
  std::optional<double> s0_len;
  std::vector<double> answer_lens;
  const BoundParams p = parse_params(read_text_file(c.params_path), &s0_len, &answer_lens);
  Csv csv(c.hash(), "quantity,value");
  csv.row("alpha", p.alpha);
  csv.row("log_inv_alpha", p.log_inv_alpha());
  csv.row("beta", p.beta);
  csv.row("beta_prime", p.beta_prime);
  csv.row("sigma", p.sigma);
  csv.row("sigma_sq", p.sigma * p.sigma);
  csv.row("gamma", p.gamma);
  csv.row("epsilon", p.epsilon);
  csv.row("log_inv_epsilon", p.log_inv_epsilon());
  csv.row("delta", p.delta);
  csv.row("eta", p.eta);
  csv.row("sigma_over_beta", p.sigma / p.beta);
  csv.row("beta_prime_over_beta", p.beta_prime / p.beta);
  csv.row("beta_prime_below_beta", p.beta_prime_below_beta() ? 1.0 : 0.0);
  csv.row("theorem1_length", theorem1_length(p));
  if (s0_len) {
    csv.row("s0_len", *s0_len);
    csv.row("theorem2_length", theorem2_length(p, *s0_len));
  }
  if (!answer_lens.empty()) {
    const TurnBudgets tb = theorem3_budgets(p, answer_lens);
    for (std::size_t i = 0; i < tb.per_turn_caps.size(); ++i) {
      csv.row("theorem3_cap_" + std::to_string(i + 1), tb.per_turn_caps[i]);
    }
    csv.row("theorem3_total", tb.total);
  }
  csv.row("generalized_length", generalized_length(p));
  write_text_file(c.out_path, csv.text());
  std::vector<std::string> artifacts{c.out_path};
  if (!c.curve_out_path.empty()) {
    Csv curve(c.hash(), "n,kl_bound,sigmoid_bound");
    for (std::size_t n = 0; n <= c.max_len; ++n) {
      const double x = static_cast<double>(n);
      curve.row(n, kl_decay_bound(p.alpha, p.beta, x), sigmoid_bound(p.alpha, p.beta, x));
    }
    write_text_file(c.curve_out_path, curve.text());
    artifacts.push_back(c.curve_out_path);
  }
  Summary s(c.scenario);
  s.add("sigma_over_beta", p.sigma / p.beta).add("beta_prime_over_beta", p.beta_prime / p.beta);
  s.add("theorem1_length", theorem1_length(p));
  if (s0_len) s.add("theorem2_length", theorem2_length(p, *s0_len));
  s.add("generalized_length", generalized_length(p));
  if (p.beta_prime_below_beta()) s.add("warning", "beta_prime_below_beta");
  return {s.str(), artifacts};
}

// --- verify ----------------------------------------------------------------

struct CheckCount {
  const char* name;
  std::size_t cases = 0;
  std::size_t passed = 0;
  void record(bool ok) {
    ++cases;
    if (ok) ++passed;
  }
};

bool leq(double lhs, double rhs) { return lhs <= rhs + 1e-12 * std::max(1.0, std::abs(rhs)); }

void enumerate_prefixes(std::size_t m, std::size_t max_len,
                        const std::function<void(const SentenceSeq&)>& fn) {
  SentenceSeq seq;
  std::function<void()> rec = [&] {
    fn(seq);
    if (seq.size() == max_len) return;
    for (std::size_t s = 0; s < m; ++s) {
      seq.push_back(static_cast<Sentence>(s));
      rec();
      seq.pop_back();
    }
  };
  rec();
}

// Zeroes the entries outside `keep` in every row and renormalizes.
SentenceLM restrict_support(const SentenceLM& c, const std::vector<bool>& keep) {
  std::vector<std::vector<double>> rows;
  for (std::size_t st = 0; st < c.state_count(); ++st) {
    const auto r = c.row_probs(st);
    std::vector<double> row(r.begin(), r.end());
    double sum = 0.0;
    for (std::size_t s = 0; s < row.size(); ++s) {
      if (!keep[s]) row[s] = 0.0;
      sum += row[s];
    }
    if (sum == 0.0) {
      for (std::size_t s = 0; s < row.size(); ++s) row[s] = keep[s] ? 1.0 : 0.0;
      sum = 0.0;
      for (double x : row) sum += x;
    }
    for (double& x : row) x /= sum;
    rows.push_back(std::move(row));
  }
  return SentenceLM::markov(c.order(), std::move(rows));
}

RunResult run_verify(const ExperimentConfig& c) {
  CheckCount l1{"lemma1_ratio"};
  CheckCount l2{"lemma2_behavior_gap"};
  CheckCount l5{"lemma5_kl_decay"};
  CheckCount l6{"lemma6_disjoint_kl"};
  CheckCount l7{"lemma7_sigmoid"};
  const RngSpec rng = seeded(c, "verify");
  for (std::size_t t = 0; t < c.trials; ++t) {
    Rng r = rng.stream(t);
    const std::size_t m = 2 + static_cast<std::size_t>(r.next() % 3);
    const SentenceLM mix = random_mixture(r, m, 2, 0.15);
    std::vector<double> scores(m);
    for (auto& x : scores) x = 2.0 * r.uniform() - 1.0;
    const BehaviorScore b(scores);
    const double alpha = mix.alpha();
    enumerate_prefixes(m, 3, [&](const SentenceSeq& s0) {
      Context cm = mix.start();
      for (Sentence s : s0) cm.push(s);
      const Context& c0 = cm.component(0);
      if (c0.log_prob() == kNegInf) return;
      const LemmaBounds lb = lemma_bounds(mix, s0);
      const std::vector<double> lp = cm.next_log_dist();
      const std::vector<double> l0 = c0.next_log_dist();
      bool ok1 = true;
      for (std::size_t s = 0; s < m; ++s) {
        if (l0[s] == kNegInf) continue;
        ok1 = ok1 && leq(std::abs(std::exp(lp[s] - l0[s]) - 1.0), lb.ratio_bound[s]);
      }
      l1.record(ok1);
      l2.record(leq(std::abs(behavior_expectation(cm, b) - behavior_expectation(c0, b)),
                    lb.behavior_gap_bound));
      const double kl = conditional_kl(c0, cm).value;
      const double log_odds = std::log1p(-alpha) - std::log(alpha) + cm.component(1).log_prob() -
                              c0.log_prob();
      l5.record(leq(kl, softplus(log_odds)));
    });

    // Disjoint supports: negative on the first half, positive on the rest.
    std::vector<bool> first(m, false);
    for (std::size_t s = 0; s < (m + 1) / 2; ++s) first[s] = true;
    std::vector<bool> rest(m);
    for (std::size_t s = 0; s < m; ++s) rest[s] = !first[s];
    const SentenceLM dneg = restrict_support(mix.negative(), first);
    const SentenceLM dpos = restrict_support(mix.positive(), rest);
    const SentenceLM disjoint = SentenceLM::mixture(alpha, dneg, dpos);
    const double kl0 = conditional_kl_exact(dneg, disjoint, {}).value;
    l6.record(std::abs(kl0 + std::log(alpha)) <= 1e-9);

    // {0,1} scores with P_- confined to the score-0 symbols.
    std::vector<double> binary(m);
    for (std::size_t s = 0; s < m; ++s) binary[s] = first[s] ? 0.0 : 1.0;
    const BehaviorScore b01(binary);
    const SentenceLM bmix = SentenceLM::mixture(alpha, dneg, mix.positive());
    enumerate_prefixes(m, 3, [&](const SentenceSeq& s0) {
      Context cm = bmix.start();
      for (Sentence s : s0) cm.push(s);
      if (cm.component(0).log_prob() == kNegInf) return;
      const double log_ratio = cm.component(0).log_prob() - cm.component(1).log_prob();
      const double bound =
          1.0 / (1.0 + std::exp(std::log(alpha) - std::log1p(-alpha) + log_ratio));
      l7.record(leq(behavior_expectation(cm, b01), bound));
    });
  }
  const CheckCount* checks[] = {&l1, &l2, &l5, &l6, &l7};
  bool all = true;
  Summary s(c.scenario);
  s.add("models", c.trials);
  Csv csv(c.hash(), "check,cases,passed");
  for (const CheckCount* k : checks) {
    all = all && k->passed == k->cases;
    s.add(k->name, std::to_string(k->passed) + "/" + std::to_string(k->cases));
    csv.row(k->name, k->cases, k->passed);
  }
  std::vector<std::string> artifacts;
  if (!c.out_path.empty()) {
    write_text_file(c.out_path, csv.text());
    artifacts.push_back(c.out_path);
  }
  s.add("result", all ? "pass" : "fail").add("seed", std::to_string(*c.seed));
  RunResult out{s.str(), artifacts};
  if (!all) throw Error(ErrorCode::kVerificationFailed, out.summary);
  return out;
}

RunResult run_synth(const ExperimentConfig& c) {
  const DeskModel d = make_desk_model(c.desk, RngSpec{*c.seed}.child("synth"));
  json j = json::parse(dump_model(d.bundle));
  j["config_hash"] = c.hash();
  write_text_file(c.out_path, j.dump(2) + "\n");
  BoundParams p;
  p.alpha = c.desk.alpha;
  p.beta = d.certified_beta;
  p.epsilon = 0.1;
  Summary s(c.scenario);
  s.add("vocab", c.desk.vocab_size).add("order", std::to_string(c.desk.order));
  s.add("alpha", c.desk.alpha).add("certified_beta", d.certified_beta);
  s.add("sampled_beta", d.report.beta.point_estimate);
  s.add("gamma_max", d.report.gamma.max_expectation).add("gamma_ok", yes_no(d.report.gamma_ok));
  if (std::isfinite(d.certified_beta)) s.add("theorem1_length_eps0.1", theorem1_length(p));
  s.add("attempts", d.attempts).add("seed", std::to_string(*c.seed));
  return {s.str(), {c.out_path}};
}

}  // namespace

// ---------------------------------------------------------------------------

const char* scenario_name(Scenario s) noexcept {
  for (const auto& n : kScenarios) {
    if (n.scenario == s) return n.name;
  }
  return "unknown";
}

Scenario parse_scenario(const std::string& name) {
  for (const auto& n : kScenarios) {
    if (name == n.name) return n.scenario;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown scenario '" + name + "'");
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void ExperimentConfig::validate() const {
  const bool needs_model = scenario != Scenario::kBounds && scenario != Scenario::kVerify &&
                           scenario != Scenario::kSynth;
  require(!needs_model || !model_path.empty(), "--model is required");
  require(scenario != Scenario::kBounds || !params_path.empty(), "--params is required");
  const bool needs_out = scenario == Scenario::kEstimateBeta ||
                         scenario == Scenario::kEstimateBetaPrompt ||
                         scenario == Scenario::kEstimateSigma || scenario == Scenario::kKlCurve ||
                         scenario == Scenario::kBehaviorCurve || scenario == Scenario::kConverse ||
                         scenario == Scenario::kBounds || scenario == Scenario::kSynth;
  require(!needs_out || !out_path.empty(), "--out is required");
  const bool deterministic = scenario == Scenario::kValidate || scenario == Scenario::kBounds ||
                             (scenario == Scenario::kAttack && mode == PromptMode::kGreedy &&
                              !prefix_len);
  require(deterministic || seed.has_value(), "--seed is required");
  const bool sampled = scenario == Scenario::kEstimateBeta ||
                       scenario == Scenario::kEstimateBetaPrompt ||
                       scenario == Scenario::kEstimateSigma || scenario == Scenario::kKlCurve ||
                       (scenario == Scenario::kBehaviorCurve && mode == PromptMode::kSampled);
  require(!sampled || trials >= 2, "--trials must be >= 2");
  require(scenario != Scenario::kVerify || trials >= 1, "--trials must be >= 1");
  require(max_len <= 100000, "--max-len must be <= 100000");
  require(scenario != Scenario::kEstimateSigma || max_len >= 1, "--max-len must be >= 1 for sigma");
  require(delta > 0.0 && delta < 1.0, "--delta must lie in (0, 1)");
  require(epsilon > 0.0, "--epsilon must be positive");
  require(turns >= 1, "--turns must be >= 1");
  require(workers >= 1, "--workers must be >= 1");
  if (scenario == Scenario::kSynth) desk.validate();
}

std::string ExperimentConfig::hash() const {
  std::ostringstream ss;
  ss << "scenario=" << scenario_name(scenario);
  if (!model_path.empty()) ss << ";model=" << hex64(fnv1a64(read_text_file(model_path)));
  if (!params_path.empty()) ss << ";params=" << hex64(fnv1a64(read_text_file(params_path)));
  ss << ";seed=" << (seed ? std::to_string(*seed) : std::string("none"));
  ss << ";max_len=" << max_len << ";trials=" << trials;
  ss << ";delta=" << format_number(delta) << ";epsilon=" << format_number(epsilon);
  ss << ";reverse=" << reverse << ";neutral_len=" << neutral_len;
  ss << ";prefix_len=" << (prefix_len ? std::to_string(*prefix_len) : std::string("none"));
  ss << ";mode=" << prompt_mode_name(mode) << ";turns=" << turns << ";answer_len=" << answer_len;
  if (scenario == Scenario::kSynth) {
    ss << ";vocab=" << desk.vocab_size << ";alpha=" << format_number(desk.alpha)
       << ";gamma=" << format_number(desk.gamma) << ";beta=" << format_number(desk.target_beta)
       << ";order=" << desk.order << ";binary=" << desk.binary << ";disjoint=" << desk.disjoint
       << ";jitter=" << format_number(desk.jitter);
  }
  return hex64(fnv1a64(ss.str()));
}

RunResult run(const ExperimentConfig& config) {
  config.validate();
  switch (config.scenario) {
    case Scenario::kValidate: return run_validate(config);
    case Scenario::kEstimateBeta:
    case Scenario::kEstimateBetaPrompt:
    case Scenario::kEstimateSigma: return run_estimate(config);
    case Scenario::kAttack: return run_attack(config);
    case Scenario::kKlCurve:
    case Scenario::kBehaviorCurve: return run_curve(config);
    case Scenario::kConverse: return run_converse(config);
    case Scenario::kBounds: return run_bounds(config);
    case Scenario::kVerify: return run_verify(config);
    case Scenario::kSynth: return run_synth(config);
  }
  throw Error(ErrorCode::kInternal, "unhandled scenario");
}

BoundParams derive_params(const ModelBundle& bundle, double epsilon, double delta,
                          const RngSpec& rng, unsigned workers) {
  const SentenceLM& neg = bundle.model.negative();
  const SentenceLM& pos = bundle.model.positive();
  BoundParams p;
  p.alpha = bundle.model.alpha();
  p.epsilon = epsilon;
  p.delta = delta;
  p.beta = certify_beta(neg, pos).value;
  if (!bundle.behavior.negatives().empty()) {
    p.beta = std::min(p.beta, certify_beta_prompt(neg, pos, bundle.behavior).value);
  }
  p.beta_prime = certify_beta_prime(neg, pos, bundle.behavior).value;
  const double s_neg = estimate_sigma(neg, pos, {}, 8, 256, rng.child("sigma-negative"), workers).point_estimate;
  const double s_pos = estimate_sigma(pos, neg, {}, 8, 256, rng.child("sigma-positive"), workers).point_estimate;
  p.sigma = std::sqrt(std::max(s_neg, s_pos));
  if (!std::isfinite(p.beta) || !std::isfinite(p.beta_prime) || !std::isfinite(p.sigma)) {
    throw Error(ErrorCode::kNotCertifiable,
                "beta, beta' or sigma is infinite for this model (components with disjoint support)");
  }
  const GammaCertificate g = certify_gamma_negative(neg, bundle.behavior, 0.0);
  if (g.max_expectation >= 0.0) {
    throw Error(ErrorCode::kNotCertifiable,
                "the negative component is not gamma-negative for any gamma < 0");
  }
  p.gamma = std::max(-1.0, g.max_expectation);
  p.validate();
  return p;
}

BoundParams parse_params(const std::string& json_text, std::optional<double>* s0_len,
                         std::vector<double>* answer_lens) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("params file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kParse, "params file: expected an object");
  auto num = [&](const char* key) -> std::optional<double> {
    if (!j.contains(key)) return std::nullopt;
    if (!j[key].is_number()) throw Error(ErrorCode::kParse, std::string(key) + ": expected a number");
    return j[key].get<double>();
  };
  BoundParams p;
  if (auto v = num("alpha")) p.alpha = *v;
  if (auto v = num("log_inv_alpha")) p.alpha = std::exp(-*v);
  if (auto v = num("beta")) p.beta = *v;
  if (auto v = num("beta_prime")) p.beta_prime = *v;
  if (auto v = num("sigma")) p.sigma = *v;
  if (auto v = num("sigma_sq")) p.sigma = std::sqrt(*v);
  if (auto v = num("gamma")) p.gamma = *v;
  if (auto v = num("epsilon")) p.epsilon = *v;
  if (auto v = num("log_inv_epsilon")) p.epsilon = std::exp(-*v);
  if (auto v = num("delta")) p.delta = *v;
  if (auto v = num("eta")) p.eta = *v;
  p.validate();
  if (s0_len) *s0_len = num("s0_len");
  if (answer_lens && j.contains("answer_lens")) {
    if (!j["answer_lens"].is_array()) throw Error(ErrorCode::kParse, "answer_lens: expected an array");
    for (const auto& v : j["answer_lens"]) {
      if (!v.is_number()) throw Error(ErrorCode::kParse, "answer_lens: expected numbers");
      answer_lens->push_back(v.get<double>());
    }
  }
  return p;
}

}  // namespace beb
