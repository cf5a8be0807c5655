#include "core/desk.hpp"

#include <cmath>

#include "core/error.hpp"

namespace beb {

void DeskSpec::validate() const {
  if (vocab_size < 4 || vocab_size > kMaxVocab) {
    throw Error(ErrorCode::kInvalidArgument, "desk vocabulary must be in [4, 1024]");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::kInvalidArgument, "alpha must lie in (0, 1)");
  if (!(gamma >= -1.0 && gamma < 0.0)) throw Error(ErrorCode::kInvalidArgument, "gamma must lie in [-1, 0)");
  if (!disjoint && !(target_beta > 0.0 && std::isfinite(target_beta))) {
    throw Error(ErrorCode::kInvalidArgument, "target beta must be positive");
  }
  if (order < 0 || order > 2) throw Error(ErrorCode::kInvalidArgument, "order must be 0, 1 or 2");
  if (jitter < 0.0 || concentration <= 0.0 || max_attempts < 1) {
    throw Error(ErrorCode::kInvalidArgument, "jitter, concentration or attempts out of range");
  }
}

namespace {

struct RowDraw {
  double lambda = 1.0;  // P_- mass on negatives
  std::vector<double> d_neg;
  std::vector<double> d_pos;
  std::vector<double> neg_jit;  // per-symbol multiplier of the shift
  std::vector<double> pos_shape;
};

std::vector<double> dirichlet(Rng& r, std::size_t k, double conc) {
  std::vector<double> v(k);
  double sum = 0.0;
  for (auto& x : v) {
    x = r.gamma(conc);
    sum += x;
  }
  for (auto& x : v) x /= sum;
  return v;
}

struct Draft {
  std::size_t m = 0;
  std::size_t k = 0;  // number of negative symbols
  int order = 0;
  bool disjoint = false;
  std::vector<RowDraw> rows;

  SentenceLM negative() const {
    std::vector<std::vector<double>> out;
    for (const auto& d : rows) {
      std::vector<double> row(m, 0.0);
      for (std::size_t s = 0; s < k; ++s) row[s] = d.lambda * d.d_neg[s];
      for (std::size_t s = k; s < m; ++s) row[s] = (1.0 - d.lambda) * d.d_pos[s - k];
      out.push_back(std::move(row));
    }
    return SentenceLM::markov(order, std::move(out));
  }

  // P_+(s) = P_-(s) e^{-t j(s)} on negatives; the rest goes to positives.
  SentenceLM positive(double t) const {
    std::vector<std::vector<double>> out;
    for (const auto& d : rows) {
      std::vector<double> row(m, 0.0);
      double neg_mass = 0.0;
      if (!disjoint) {
        for (std::size_t s = 0; s < k; ++s) {
          row[s] = d.lambda * d.d_neg[s] * std::exp(-t * d.neg_jit[s]);
          neg_mass += row[s];
        }
      }
      const double rest = 1.0 - neg_mass;
      for (std::size_t s = k; s < m; ++s) row[s] = rest * d.pos_shape[s - k];
      out.push_back(std::move(row));
    }
    return SentenceLM::markov(order, std::move(out));
  }
};

Draft draw(const DeskSpec& spec, Rng& r) {
  Draft d;
  d.m = spec.vocab_size;
  d.k = (spec.vocab_size + 1) / 2;
  d.order = spec.order;
  d.disjoint = spec.disjoint;
  const std::size_t states = state_count_for(spec.order, d.m);
  const bool all_negative = spec.binary || spec.disjoint || spec.gamma == -1.0;
  const double lambda_min = (1.0 - spec.gamma) / 2.0;
  for (std::size_t st = 0; st < states; ++st) {
    RowDraw row;
    row.lambda = all_negative ? 1.0 : lambda_min + (1.0 - lambda_min) * 0.5 * r.uniform();
    row.d_neg = dirichlet(r, d.k, spec.concentration);
    row.d_pos = dirichlet(r, d.m - d.k, spec.concentration);
    for (std::size_t s = 0; s < d.k; ++s) row.neg_jit.push_back(std::exp(spec.jitter * r.normal()));
    double sum = 0.0;
    for (std::size_t s = 0; s < d.m - d.k; ++s) {
      row.pos_shape.push_back(row.d_pos[s] * std::exp(spec.jitter * r.normal()));
      sum += row.pos_shape.back();
    }
    for (auto& x : row.pos_shape) x /= sum;
    d.rows.push_back(std::move(row));
  }
  return d;
}

ModelBundle bundle_of(const DeskSpec& spec, const Draft& d, SentenceLM neg, SentenceLM pos) {
  std::vector<std::string> symbols;
  std::vector<double> scores;
  for (std::size_t s = 0; s < d.m; ++s) {
    const bool negative = s < d.k;
    symbols.push_back((negative ? "n" : "p") + std::to_string(negative ? s : s - d.k));
    scores.push_back(negative ? (spec.binary ? 0.0 : -1.0) : 1.0);
  }
  ModelBundle b;
  b.vocab = Vocabulary(std::move(symbols));
  b.behavior = BehaviorScore(std::move(scores));
  b.model = SentenceLM::mixture(spec.alpha, std::move(neg), std::move(pos));
  return b;
}

}  // namespace

DeskModel make_desk_model(const DeskSpec& spec, const RngSpec& rng) {
  spec.validate();
  const double gamma_eff = spec.binary ? 0.0 : spec.gamma;
  for (std::size_t attempt = 0; attempt < spec.max_attempts; ++attempt) {
    Rng r = rng.stream(attempt);
    const Draft d = draw(spec, r);
    const SentenceLM neg = d.negative();
    double t = 0.0;
    if (!spec.disjoint) {
      double lo = 0.0;
      double hi = 1.0;
      while (certify_beta(neg, d.positive(hi)).value < spec.target_beta && hi < 1e3) hi *= 2.0;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (certify_beta(neg, d.positive(mid)).value < spec.target_beta) lo = mid;
        else hi = mid;
      }
      t = hi;
    }
    const SentenceLM pos = d.positive(t);
    const CertifiedValue beta = certify_beta(neg, pos);
    if (!spec.disjoint &&
        std::abs(beta.value - spec.target_beta) > spec.tolerance * spec.target_beta) {
      continue;
    }
    ModelBundle bundle = bundle_of(spec, d, neg, pos);
    if (!certify_gamma_negative(neg, bundle.behavior, gamma_eff).ok) continue;
    if (!spec.binary && !check_positivity(pos, neg, bundle.behavior).ok) continue;
    DeskModel out;
    out.report = check_abg(bundle.model, bundle.behavior, gamma_eff, 4, 32, rng.child("abg", attempt));
    out.bundle = std::move(bundle);
    out.certified_beta = beta.value;
    out.attempts = attempt + 1;
    return out;
  }
  throw Error(ErrorCode::kGeneratorFailed,
              "no desk model met the targets after " + std::to_string(spec.max_attempts) +
                  " attempts; try a looser beta target, a larger vocabulary or more jitter room");
}

SentenceLM random_component(Rng& rng, std::size_t m, int order, double zero_prob, double shape) {
  std::vector<std::vector<double>> rows(state_count_for(order, m));
  for (auto& row : rows) {
    row.assign(m, 0.0);
    double sum = 0.0;
    for (auto& x : row) {
      const double w = rng.gamma(shape);
      x = rng.uniform() < zero_prob ? 0.0 : w;
      sum += x;
    }
    if (sum == 0.0) {
      row[static_cast<std::size_t>(rng.next() % m)] = 1.0;
      sum = 1.0;
    }
    for (auto& x : row) x /= sum;
  }
  return SentenceLM::markov(order, std::move(rows));
}

SentenceLM random_mixture(Rng& rng, std::size_t m, int max_order, double zero_prob) {
  const double alpha = std::exp(std::log(1e-3) + rng.uniform() * (std::log(0.9) - std::log(1e-3)));
  const int o1 = static_cast<int>(rng.next() % static_cast<std::uint64_t>(max_order + 1));
  const int o2 = static_cast<int>(rng.next() % static_cast<std::uint64_t>(max_order + 1));
  SentenceLM neg = random_component(rng, m, o1, zero_prob);
  SentenceLM pos = random_component(rng, m, o2, zero_prob);
  return SentenceLM::mixture(alpha, std::move(neg), std::move(pos));
}

}  // namespace beb
