#include "core/lm.hpp"

#include <cmath>
#include <sstream>
#include <variant>

#include "core/error.hpp"
#include "core/logspace.hpp"

namespace beb {

// ---------------------------------------------------------------------------
// Vocabulary

Vocabulary::Vocabulary(std::vector<std::string> symbols) : symbols_(std::move(symbols)) {
  if (symbols_.size() < 2 || symbols_.size() > kMaxVocab) {
    throw Error(ErrorCode::kInvalidModel, "vocabulary size " + std::to_string(symbols_.size()) +
                                              " outside [2, " + std::to_string(kMaxVocab) + "]");
  }
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    if (symbols_[i].empty()) {
      throw Error(ErrorCode::kInvalidModel, "vocab[" + std::to_string(i) + "]: empty symbol");
    }
    auto [it, inserted] = index_.emplace(symbols_[i], static_cast<Sentence>(i));
    if (!inserted) {
      throw Error(ErrorCode::kInvalidModel,
                  "vocab[" + std::to_string(i) + "]: duplicate symbol '" + symbols_[i] + "'");
    }
  }
}

const std::string& Vocabulary::symbol(Sentence i) const {
  if (i >= symbols_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "sentence index " + std::to_string(i) +
                                                 " outside vocabulary of size " +
                                                 std::to_string(symbols_.size()));
  }
  return symbols_[i];
}

std::optional<Sentence> Vocabulary::index_of(std::string_view symbol) const {
  auto it = index_.find(std::string(symbol));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::string Vocabulary::render(std::span<const Sentence> seq) const {
  std::string out;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i) out += ' ';
    out += symbol(seq[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// SentenceLM payloads

struct SentenceLM::FiniteState {
  int order = 0;
  std::size_t m = 0;
  std::size_t states = 1;
  std::vector<double> prob;  // states x m, row-major
  std::vector<double> logp;
};

struct SentenceLM::Mixture {
  double alpha = 0.5;
  double log_alpha = 0.0;
  double log_one_minus_alpha = 0.0;
  SentenceLM negative;
  SentenceLM positive;
};

struct SentenceLM::Impl {
  std::variant<FiniteState, Mixture> payload;
};

std::size_t state_count_for(int order, std::size_t m) {
  switch (order) {
    case 0: return 1;
    case 1: return 1 + m;
    case 2: return 1 + m + m * m;
    default:
      throw Error(ErrorCode::kInvalidModel,
                  "markov order " + std::to_string(order) + " not in {0, 1, 2}");
  }
}

// Rows already within 1e-12 of summing to one are kept bit-for-bit.
void check_row(std::vector<double>& row, std::size_t m, const std::string& name) {
  if (row.size() != m) {
    throw Error(ErrorCode::kInvalidModel, name + ": expected " + std::to_string(m) +
                                              " probabilities, got " +
                                              std::to_string(row.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (!std::isfinite(row[i]) || row[i] < 0.0) {
      throw Error(ErrorCode::kInvalidModel,
                  name + ": entry " + std::to_string(i) + " is not a probability");
    }
    sum += row[i];
  }
  if (std::abs(sum - 1.0) > kRowSumTolerance) {
    std::ostringstream msg;
    msg.precision(12);
    msg << name << ": probabilities sum to " << sum << " (expected 1 +/- 1e-9)";
    throw Error(ErrorCode::kInvalidModel, msg.str());
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    for (double& p : row) p /= sum;
  }
}

SentenceLM SentenceLM::categorical(std::vector<double> probs) {
  std::vector<std::vector<double>> rows;
  rows.push_back(std::move(probs));
  return markov(0, std::move(rows));
}

SentenceLM SentenceLM::markov(int order, std::vector<std::vector<double>> rows) {
  if (rows.empty()) throw Error(ErrorCode::kInvalidModel, "model has no rows");
  FiniteState fs;
  fs.order = order;
  fs.m = rows.front().size();
  if (fs.m < 2 || fs.m > kMaxVocab) {
    throw Error(ErrorCode::kInvalidModel,
                "vocabulary size " + std::to_string(fs.m) + " outside [2, 1024]");
  }
  fs.states = state_count_for(order, fs.m);
  if (rows.size() != fs.states) {
    throw Error(ErrorCode::kInvalidModel, "order-" + std::to_string(order) + " model needs " +
                                              std::to_string(fs.states) + " rows, got " +
                                              std::to_string(rows.size()));
  }
  fs.prob.reserve(fs.states * fs.m);
  for (std::size_t s = 0; s < fs.states; ++s) {
    check_row(rows[s], fs.m, "row " + std::to_string(s));
    fs.prob.insert(fs.prob.end(), rows[s].begin(), rows[s].end());
  }
  fs.logp.resize(fs.prob.size());
  for (std::size_t i = 0; i < fs.prob.size(); ++i) fs.logp[i] = safe_log(fs.prob[i]);
  return SentenceLM(std::make_shared<const Impl>(Impl{std::move(fs)}));
}

SentenceLM SentenceLM::mixture(double alpha, SentenceLM negative, SentenceLM positive) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::kInvalidModel, "mixture alpha must lie strictly inside (0, 1)");
  }
  if (!negative.impl_ || !positive.impl_) {
    throw Error(ErrorCode::kInvalidModel, "mixture component is empty");
  }
  if (negative.vocab_size() != positive.vocab_size()) {
    throw Error(ErrorCode::kInvalidModel, "mixture components disagree on vocabulary size");
  }
  Mixture mx;
  mx.alpha = alpha;
  mx.log_alpha = std::log(alpha);
  mx.log_one_minus_alpha = std::log1p(-alpha);
  mx.negative = std::move(negative);
  mx.positive = std::move(positive);
  return SentenceLM(std::make_shared<const Impl>(Impl{std::move(mx)}));
}

ModelKind SentenceLM::kind() const noexcept {
  if (const auto* fs = std::get_if<FiniteState>(&impl_->payload)) {
    return fs->order == 0 ? ModelKind::kCategorical : ModelKind::kMarkov;
  }
  return ModelKind::kMixture;
}

std::size_t SentenceLM::vocab_size() const noexcept {
  if (const auto* fs = std::get_if<FiniteState>(&impl_->payload)) return fs->m;
  return std::get<Mixture>(impl_->payload).negative.vocab_size();
}

const SentenceLM::FiniteState& SentenceLM::finite() const {
  const auto* fs = std::get_if<FiniteState>(&impl_->payload);
  if (!fs) throw Error(ErrorCode::kNotAComponent, "operation needs a finite-state model");
  return *fs;
}

const SentenceLM::Mixture& SentenceLM::mix() const {
  const auto* mx = std::get_if<Mixture>(&impl_->payload);
  if (!mx) throw Error(ErrorCode::kNotAMixture, "operation needs a mixture model");
  return *mx;
}

int SentenceLM::order() const { return finite().order; }
std::size_t SentenceLM::state_count() const { return finite().states; }

std::size_t SentenceLM::state_of(std::span<const Sentence> context) const {
  const auto& fs = finite();
  const std::size_t n = context.size();
  if (fs.order == 0 || n == 0) return 0;
  if (fs.order == 1 || n == 1) return 1 + context[n - 1];
  return 1 + fs.m + static_cast<std::size_t>(context[n - 2]) * fs.m + context[n - 1];
}

SentenceSeq SentenceLM::state_context(std::size_t state) const {
  const auto& fs = finite();
  if (state >= fs.states) throw Error(ErrorCode::kInvalidArgument, "state index out of range");
  if (state == 0) return {};
  if (state <= fs.m) return {static_cast<Sentence>(state - 1)};
  const std::size_t pair = state - 1 - fs.m;
  return {static_cast<Sentence>(pair / fs.m), static_cast<Sentence>(pair % fs.m)};
}

std::span<const double> SentenceLM::row_probs(std::size_t state) const {
  const auto& fs = finite();
  return std::span<const double>(fs.prob).subspan(state * fs.m, fs.m);
}

std::span<const double> SentenceLM::row_log_probs(std::size_t state) const {
  const auto& fs = finite();
  return std::span<const double>(fs.logp).subspan(state * fs.m, fs.m);
}

double SentenceLM::alpha() const { return mix().alpha; }
const SentenceLM& SentenceLM::negative() const { return mix().negative; }
const SentenceLM& SentenceLM::positive() const { return mix().positive; }

Context SentenceLM::start() const { return Context(*this); }

// ---------------------------------------------------------------------------
// Context

Context::Context(const SentenceLM& model) : model_(model) {
  if (const auto* mx = std::get_if<SentenceLM::Mixture>(&model_.impl_->payload)) {
    children_.reserve(2);
    children_.emplace_back(mx->negative);
    children_.emplace_back(mx->positive);
  }
}

double Context::log_prob() const {
  if (children_.empty()) return log_prob_;
  const auto& mx = model_.mix();
  return log_sum_exp(mx.log_alpha + children_[0].log_prob(),
                     mx.log_one_minus_alpha + children_[1].log_prob());
}

void Context::push(Sentence s) {
  if (s >= model_.vocab_size()) {
    throw Error(ErrorCode::kInvalidArgument, "sentence index " + std::to_string(s) +
                                                 " outside vocabulary of size " +
                                                 std::to_string(model_.vocab_size()));
  }
  ++length_;
  if (!children_.empty()) {
    for (auto& c : children_) c.push(s);
    return;
  }
  log_prob_ += model_.finite().logp[state() * model_.finite().m + s];
  prev_ = last_;
  last_ = s;
}

std::size_t Context::state() const {
  const auto& fs = model_.finite();
  if (fs.order == 0 || length_ == 0) return 0;
  if (fs.order == 1 || length_ == 1) return 1 + static_cast<std::size_t>(last_);
  return 1 + fs.m + static_cast<std::size_t>(prev_) * fs.m + static_cast<std::size_t>(last_);
}

double Context::negative_log_weight() const {
  const auto& mx = model_.mix();
  const double lp = log_prob();
  if (lp == kNegInf) {
    throw Error(ErrorCode::kUnsupportedPrefix, "prefix has zero probability under the mixture");
  }
  return mx.log_alpha + children_[0].log_prob() - lp;
}

const Context& Context::component(std::size_t i) const {
  if (children_.empty()) throw Error(ErrorCode::kNotAMixture, "context is not a mixture");
  return children_.at(i);
}

void Context::next_log_dist(std::span<double> out) const {
  const std::size_t m = model_.vocab_size();
  if (out.size() != m) throw Error(ErrorCode::kInvalidArgument, "output size mismatch");
  if (children_.empty()) {
    const auto row = model_.row_log_probs(state());
    std::copy(row.begin(), row.end(), out.begin());
    return;
  }
  const auto& mx = model_.mix();
  const double lp = log_prob();
  if (lp == kNegInf) {
    throw Error(ErrorCode::kUnsupportedPrefix, "prefix has zero probability under the mixture");
  }
  const double lp_neg = children_[0].log_prob();
  const double lp_pos = children_[1].log_prob();
  const double lw_neg = lp_neg == kNegInf ? kNegInf : mx.log_alpha + lp_neg - lp;
  const double lw_pos = lp_pos == kNegInf ? kNegInf : mx.log_one_minus_alpha + lp_pos - lp;
  std::vector<double> comp(m);
  std::fill(out.begin(), out.end(), kNegInf);
  if (lw_neg != kNegInf) {
    children_[0].next_log_dist(comp);
    for (std::size_t s = 0; s < m; ++s) out[s] = lw_neg + comp[s];
  }
  if (lw_pos != kNegInf) {
    children_[1].next_log_dist(comp);
    for (std::size_t s = 0; s < m; ++s) out[s] = log_sum_exp(out[s], lw_pos + comp[s]);
  }
}

std::vector<double> Context::next_log_dist() const {
  std::vector<double> out(model_.vocab_size());
  next_log_dist(out);
  return out;
}

double Context::next_log_prob(Sentence s) const {
  if (children_.empty()) return model_.row_log_probs(state())[s];
  return next_log_dist()[s];
}

// ---------------------------------------------------------------------------
// Free operations

double log_prob_seq(const SentenceLM& model, std::span<const Sentence> seq) {
  Context ctx(model);
  for (Sentence s : seq) ctx.push(s);
  return ctx.log_prob();
}

Context supported_context(const SentenceLM& model, std::span<const Sentence> prefix) {
  Context ctx(model);
  for (std::size_t k = 0; k < prefix.size(); ++k) {
    ctx.push(prefix[k]);
    if (ctx.log_prob() == kNegInf) {
      throw Error(ErrorCode::kUnsupportedPrefix,
                  "unsupported prefix: sentence #" + std::to_string(k) + " (index " +
                      std::to_string(prefix[k]) + ") has zero probability");
    }
  }
  return ctx;
}

std::vector<double> next_dist(const SentenceLM& model, std::span<const Sentence> prefix) {
  const Context ctx = supported_context(model, prefix);
  std::vector<double> out = ctx.next_log_dist();
  for (double& v : out) v = std::exp(v);
  return out;
}

double posterior_weight(const SentenceLM& model, std::span<const Sentence> prefix) {
  if (model.kind() != ModelKind::kMixture) {
    throw Error(ErrorCode::kNotAMixture, "posterior weight needs a mixture model");
  }
  Context ctx(model);
  for (Sentence s : prefix) ctx.push(s);
  if (ctx.log_prob() == kNegInf) {
    throw Error(ErrorCode::kUnsupportedPrefix,
                "unsupported prefix: zero probability under both components");
  }
  return std::exp(ctx.negative_log_weight());
}

Sentence sample_next(const Context& ctx, Rng& rng) {
  std::vector<double> p = ctx.next_log_dist();
  for (double& v : p) v = std::exp(v);
  return static_cast<Sentence>(rng.categorical(p));
}

SentenceSeq sample_seq(const SentenceLM& model, std::span<const Sentence> prefix, std::size_t n,
                       Rng& rng) {
  Context ctx = supported_context(model, prefix);
  SentenceSeq out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Sentence s = sample_next(ctx, rng);
    out.push_back(s);
    ctx.push(s);
  }
  return out;
}

}  // namespace beb
