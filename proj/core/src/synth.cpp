// Copyright 2026 The txscan Authors
// SPDX-License-Identifier: Apache-2.0

#include "txscan/synth.hpp"

#include <algorithm>
#include <cmath>

#include "txscan/errors.hpp"
#include "txscan/numeral.hpp"
#include "txscan/rng.hpp"

namespace txscan::synth {

std::string anomaly_kind_name(AnomalyKind kind) {
  switch (kind) {
    case AnomalyKind::ShuffledCalls:
      return "shuffled-calls";
    case AnomalyKind::ForeignAddressBurst:
      return "foreign-address-burst";
    case AnomalyKind::ValueOutlier:
      return "value-outlier";
    case AnomalyKind::TruncatedStructure:
      return "truncated-structure";
  }
  return "shuffled-calls";
}

AnomalyKind parse_anomaly_kind(const std::string& name) {
  if (name == "shuffled-calls") return AnomalyKind::ShuffledCalls;
  if (name == "foreign-address-burst") return AnomalyKind::ForeignAddressBurst;
  if (name == "value-outlier") return AnomalyKind::ValueOutlier;
  if (name == "truncated-structure") return AnomalyKind::TruncatedStructure;
  throw RangeError("unknown anomaly kind: " + name);
}

namespace {

const char* kAppNames[] = {"Alfa",  "Bravo", "Chrono", "Drift", "Ember",
                           "Flint", "Gale",  "Halo",   "Iris",  "Jade"};

std::string random_address(Rng& rng) {
  static const char* digits = "0123456789abcdef";
  std::string out = "0x";
  for (int i = 0; i < 40; ++i) out.push_back(digits[rng.uniform(16)]);
  return out;
}

std::string random_tx_id(Rng& rng) {
  static const char* digits = "0123456789abcdef";
  std::string out = "0x";
  for (int i = 0; i < 64; ++i) out.push_back(digits[rng.uniform(16)]);
  return out;
}

constexpr double kLog10PerHexDigit = 1.2041199826559248;  // log10(16)

/// Decimal string of d * 16^exp16 with d in 1..15. Round in hex, so the
/// normalized form is a zero run, one significant digit, another zero run.
std::string hex_round_value(Rng& rng, int exp16) {
  BigUint v = BigUint::from_u64(1 + rng.uniform(15));
  for (int i = 0; i < exp16; ++i) v.mul_add_small(16, 0);
  return v.to_decimal();
}

int exp16_for_log10(double decade) {
  return std::max(0, static_cast<int>(decade / kLog10PerHexDigit + 0.5));
}

/// Cumulative Zipf weights over n ranks.
std::vector<double> zipf_cdf(int n, double exponent) {
  std::vector<double> cdf(n);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    total += 1.0 / std::pow(static_cast<double>(i + 1), exponent);
    cdf[i] = total;
  }
  for (double& x : cdf) x /= total;
  return cdf;
}

int sample_cdf(Rng& rng, const std::vector<double>& cdf) {
  const double u = rng.next_unit();
  for (std::size_t i = 0; i < cdf.size(); ++i)
    if (u <= cdf[i]) return static_cast<int>(i);
  return static_cast<int>(cdf.size()) - 1;
}

struct ArgSpec {
  enum class Kind { Address, Categorical, Amount } kind = Kind::Amount;
  int address_idx = 0;               // Address
  std::vector<std::string> choices;  // Categorical
  int exp16 = 3;                     // Amount: hex-round at this magnitude
};

struct LogSpec {
  int pattern = 0;
};

struct CallTemplate {
  std::string call_kind;
  int callee_idx = 0;
  std::vector<ArgSpec> inputs, outputs;
  std::vector<LogSpec> logs;
  std::vector<int> child_templates;
};

struct App {
  AppProfile profile;
  std::vector<CallTemplate> templates;
  std::vector<double> template_cdf;
  std::vector<double> address_cdf;  // for senders and address args
  int value_exp16 = 13;
  std::vector<std::string> gas_choices;
};

// small round values seen across many call interfaces; keeping the pool
// shared bounds the number of distinct numerals the tokenizer must learn
const char* kCategoricalPool[] = {"0",  "1",   "2",   "3",   "4",
                                  "8",  "10",  "16",  "32",  "64",
                                  "100", "128", "255", "1000", "4096"};

ArgSpec make_arg_spec(Rng& rng, const SynthConfig& cfg, int pool_size) {
  ArgSpec spec;
  const double roll = rng.next_unit();
  if (roll < 0.25) {
    spec.kind = ArgSpec::Kind::Address;
    spec.address_idx = static_cast<int>(rng.uniform(pool_size));
  } else if (roll < 0.65) {
    spec.kind = ArgSpec::Kind::Categorical;
    const int n_choices = 2 + static_cast<int>(rng.uniform(2));
    auto picks = rng.sample_without_replacement(std::size(kCategoricalPool),
                                                n_choices);
    for (std::size_t i : picks) spec.choices.push_back(kCategoricalPool[i]);
  } else {
    spec.kind = ArgSpec::Kind::Amount;
    spec.exp16 = exp16_for_log10(
        rng.uniform_real(cfg.arg_log10_min, cfg.arg_log10_max));
  }
  return spec;
}

std::vector<App> build_apps(const SynthConfig& cfg) {
  Rng rng(derive_seed(cfg.seed, "synth.apps"));
  const char* kinds[] = {"CALL", "DELEGATECALL", "STATICCALL", "INVOKE"};
  std::vector<App> apps(cfg.n_apps);
  for (int a = 0; a < cfg.n_apps; ++a) {
    App& app = apps[a];
    app.profile.name = kAppNames[a % 10] + std::to_string(a / 10 + 1);
    for (int i = 0; i < cfg.addresses_per_app; ++i)
      app.profile.addresses.push_back(random_address(rng));
    app.template_cdf = zipf_cdf(cfg.call_templates_per_app, 1.3);
    app.address_cdf = zipf_cdf(cfg.addresses_per_app, 1.6);
    app.value_exp16 = exp16_for_log10(
        rng.uniform_real(cfg.value_log10_min, cfg.value_log10_max));
    for (int i = 0; i < 3; ++i)
      app.gas_choices.push_back(hex_round_value(
          rng, exp16_for_log10(
                   rng.uniform_real(cfg.gas_log10_min, cfg.gas_log10_max))));

    for (int t = 0; t < cfg.call_templates_per_app; ++t) {
      CallTemplate tmpl;
      tmpl.call_kind = kinds[rng.uniform(4)];
      // low-rank templates call the app's busiest addresses
      tmpl.callee_idx = static_cast<int>(
          std::min<std::uint64_t>(t + rng.uniform(3),
                                  cfg.addresses_per_app - 1));
      const int n_in = 1 + static_cast<int>(rng.uniform(3));
      for (int i = 0; i < n_in; ++i)
        tmpl.inputs.push_back(make_arg_spec(rng, cfg, cfg.addresses_per_app));
      const int n_out = static_cast<int>(rng.uniform(2));
      for (int i = 0; i < n_out; ++i)
        tmpl.outputs.push_back(make_arg_spec(rng, cfg, cfg.addresses_per_app));
      const int n_logs = 1 + static_cast<int>(rng.uniform(2));
      for (int i = 0; i < n_logs; ++i)
        tmpl.logs.push_back(
            LogSpec{static_cast<int>(rng.uniform(cfg.log_vocab.size()))});
      if (t > 0 && rng.next_unit() < 0.6)
        tmpl.child_templates.push_back(static_cast<int>(rng.uniform(t)));
      apps[a].templates.push_back(std::move(tmpl));
    }
  }
  return apps;
}

std::string fill_log_pattern(std::string pattern, const std::string& app_name,
                             Rng& rng) {
  const std::string n = std::to_string(1 + rng.uniform(3));
  auto replace_all = [](std::string& s, const std::string& from,
                        const std::string& to) {
    for (std::size_t pos = s.find(from); pos != std::string::npos;
         pos = s.find(from, pos + to.size()))
      s.replace(pos, from.size(), to);
  };
  replace_all(pattern, "{app}", app_name);
  replace_all(pattern, "{n}", n);
  return pattern;
}

trace::TraceValue make_arg(Rng& rng, const SynthConfig& cfg, const App& app,
                           const ArgSpec& spec) {
  switch (spec.kind) {
    case ArgSpec::Kind::Address:
      return {trace::ValueKind::Address,
              app.profile.addresses[spec.address_idx]};
    case ArgSpec::Kind::Categorical:
      return {trace::ValueKind::Number,
              spec.choices[rng.uniform(spec.choices.size())]};
    case ArgSpec::Kind::Amount:
      return {trace::ValueKind::Number, hex_round_value(rng, spec.exp16)};
  }
  return {trace::ValueKind::Number, "0"};
}

trace::TraceNode instantiate_call(Rng& rng, const SynthConfig& cfg,
                                  const App& app, int template_idx,
                                  int depth) {
  const CallTemplate& tmpl = app.templates[template_idx];
  trace::TraceNode node;
  node.call_kind = tmpl.call_kind;
  node.callee = {trace::ValueKind::Address,
                 app.profile.addresses[tmpl.callee_idx]};
  for (const auto& spec : tmpl.inputs)
    node.inputs.push_back(make_arg(rng, cfg, app, spec));
  for (const auto& spec : tmpl.outputs)
    node.outputs.push_back(make_arg(rng, cfg, app, spec));
  for (const auto& log : tmpl.logs)
    node.logs.push_back(
        fill_log_pattern(cfg.log_vocab[log.pattern], app.profile.name, rng));
  if (depth < cfg.depth_max) {
    for (int child : tmpl.child_templates)
      if (rng.next_unit() < 0.7)
        node.children.push_back(
            instantiate_call(rng, cfg, app, child, depth + 1));
  }
  return node;
}

}  // namespace

std::vector<AppProfile> app_profiles(const SynthConfig& cfg) {
  std::vector<AppProfile> out;
  for (auto& app : build_apps(cfg)) out.push_back(std::move(app.profile));
  return out;
}

std::vector<trace::Transaction> gen_benign(const SynthConfig& cfg, int n,
                                           std::int64_t order_base) {
  if (n < 1) throw RangeError("gen_benign needs n >= 1");
  const std::vector<App> apps = build_apps(cfg);
  Rng rng(derive_seed(cfg.seed, "synth.txs"));

  std::vector<trace::Transaction> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const App& app = apps[i % apps.size()];
    trace::Transaction tx;
    tx.tx_id = random_tx_id(rng);
    tx.application = app.profile.name;
    tx.order_key = order_base + i;
    tx.label = trace::Label::Benign;
    tx.sender = {trace::ValueKind::Address,
                 app.profile.addresses[sample_cdf(rng, app.address_cdf)]};
    tx.receiver = {trace::ValueKind::Address, app.profile.addresses[0]};
    tx.value = {trace::ValueKind::Number,
                hex_round_value(rng, app.value_exp16)};
    tx.gas = {trace::ValueKind::Number,
              app.gas_choices[rng.uniform(app.gas_choices.size())]};
    const int n_roots = 1 + static_cast<int>(rng.uniform(2));
    for (int r = 0; r < n_roots; ++r) {
      const int tmpl = sample_cdf(rng, app.template_cdf);
      tx.roots.push_back(instantiate_call(rng, cfg, app, tmpl, 1));
    }
    out.push_back(std::move(tx));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Anomaly injection
// ---------------------------------------------------------------------------

namespace {

void collect_sibling_groups(std::vector<trace::TraceNode>& nodes,
                            std::vector<std::vector<trace::TraceNode>*>& out) {
  if (nodes.size() >= 2) out.push_back(&nodes);
  for (auto& node : nodes) collect_sibling_groups(node.children, out);
}

void collect_callees(std::vector<trace::TraceNode>& nodes,
                     std::vector<trace::TraceNode*>& out) {
  for (auto& node : nodes) {
    out.push_back(&node);
    collect_callees(node.children, out);
  }
}

void collect_parents_with_children(
    std::vector<trace::TraceNode>& nodes,
    std::vector<std::vector<trace::TraceNode>*>& out) {
  for (auto& node : nodes) {
    if (!node.children.empty()) out.push_back(&node.children);
    collect_parents_with_children(node.children, out);
  }
}

void apply_shuffled_calls(trace::Transaction& tx, Rng& rng) {
  std::vector<std::vector<trace::TraceNode>*> groups;
  collect_sibling_groups(tx.roots, groups);
  if (groups.empty())
    throw NotApplicable("no sibling group of two or more calls to shuffle");
  auto& group = *groups[rng.uniform(groups.size())];

  // non-identity order permutation (fall back to a rotation)
  std::vector<std::size_t> perm(group.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  bool changed = false;
  for (int attempt = 0; attempt < 8 && !changed; ++attempt) {
    rng.shuffle(perm);
    for (std::size_t i = 0; i < perm.size(); ++i)
      if (perm[i] != i) changed = true;
  }
  if (!changed) std::rotate(perm.begin(), perm.begin() + 1, perm.end());

  std::vector<trace::TraceNode> reordered;
  reordered.reserve(group.size());
  for (std::size_t i : perm) reordered.push_back(std::move(group[i]));
  group = std::move(reordered);

  // rotate the call kinds among the shuffled siblings
  std::vector<std::string> kinds;
  kinds.reserve(group.size());
  for (auto& node : group) kinds.push_back(node.call_kind);
  std::rotate(kinds.begin(), kinds.begin() + 1, kinds.end());
  for (std::size_t i = 0; i < group.size(); ++i)
    group[i].call_kind = kinds[i];
}

void apply_foreign_addresses(trace::Transaction& tx, Rng& rng) {
  std::vector<trace::TraceNode*> nodes;
  collect_callees(tx.roots, nodes);
  if (nodes.empty()) throw NotApplicable("transaction has no calls");
  // a burst: most (possibly all) callees become never-seen addresses
  std::size_t burst = nodes.size();
  if (nodes.size() > 1) burst -= rng.uniform(2);
  auto picks = rng.sample_without_replacement(nodes.size(), burst);
  for (std::size_t i : picks)
    nodes[i]->callee = {trace::ValueKind::Address, random_address(rng)};
}

void apply_value_outlier(trace::Transaction& tx, Rng& rng) {
  // candidate slots: the transaction value plus every numeric input
  std::vector<trace::TraceValue*> slots;
  slots.push_back(&tx.value);
  std::vector<trace::TraceNode*> nodes;
  collect_callees(tx.roots, nodes);
  for (auto* node : nodes)
    for (auto& arg : node->inputs)
      if (arg.kind == trace::ValueKind::Number) slots.push_back(&arg);

  trace::TraceValue* slot = slots[rng.uniform(slots.size())];
  const int exponent = 6 + static_cast<int>(rng.uniform(4));  // 10^6..10^9
  BigUint v = BigUint::parse(slot->raw);
  if (v.is_zero()) v = BigUint::from_u64(1);
  for (int i = 0; i < exponent; ++i) v.mul_add_small(10, 0);
  slot->raw = v.to_decimal();
}

void apply_truncated_structure(trace::Transaction& tx, Rng& rng) {
  int drops = 0;
  const int want = 1 + static_cast<int>(rng.uniform(3));
  for (int i = 0; i < want; ++i) {
    // re-collect each round: erasing relocates sibling subtrees
    std::vector<std::vector<trace::TraceNode>*> droppable;
    collect_parents_with_children(tx.roots, droppable);
    if (!droppable.empty()) {
      auto& children = *droppable[rng.uniform(droppable.size())];
      children.erase(children.begin() + static_cast<std::ptrdiff_t>(
                                            rng.uniform(children.size())));
      ++drops;
      continue;
    }
    if (tx.roots.size() >= 2) {
      tx.roots.erase(tx.roots.begin() +
                     static_cast<std::ptrdiff_t>(rng.uniform(tx.roots.size())));
      ++drops;
      continue;
    }
    break;
  }
  if (drops == 0) throw NotApplicable("no subtree that can be dropped");
}

}  // namespace

trace::Transaction inject_anomaly(const trace::Transaction& tx,
                                  AnomalyKind kind, std::uint64_t seed) {
  trace::Transaction out = tx;
  Rng rng(derive_seed(seed, fnv1a64(tx.tx_id),
                      static_cast<std::uint64_t>(kind)));
  switch (kind) {
    case AnomalyKind::ShuffledCalls:
      apply_shuffled_calls(out, rng);
      break;
    case AnomalyKind::ForeignAddressBurst:
      apply_foreign_addresses(out, rng);
      break;
    case AnomalyKind::ValueOutlier:
      apply_value_outlier(out, rng);
      break;
    case AnomalyKind::TruncatedStructure:
      apply_truncated_structure(out, rng);
      break;
  }
  out.label = trace::Label::Malicious;
  out.tx_id = random_tx_id(rng);
  return out;
}

std::vector<trace::Transaction> inject_anomalies(
    std::span<const trace::Transaction> source,
    const std::vector<AnomalyKind>& kinds, int count, std::uint64_t seed,
    std::int64_t order_base) {
  if (source.empty()) throw EmptyDataset("no donor transactions");
  if (kinds.empty()) throw RangeError("no anomaly kinds enabled");
  std::vector<trace::Transaction> out;
  Rng rng(derive_seed(seed, "synth.inject"));
  int produced = 0;
  std::size_t kind_idx = 0;
  int attempts = 0;
  const int max_attempts = count * 64;
  while (produced < count && attempts < max_attempts) {
    ++attempts;
    const trace::Transaction& donor = source[rng.uniform(source.size())];
    const AnomalyKind kind = kinds[kind_idx % kinds.size()];
    try {
      trace::Transaction anomaly =
          inject_anomaly(donor, kind, derive_seed(seed, attempts));
      anomaly.order_key = order_base + produced;
      out.push_back(std::move(anomaly));
      ++produced;
      ++kind_idx;
    } catch (const NotApplicable&) {
      // try another donor for the same kind
    }
  }
  if (produced < count)
    throw NotApplicable("could not inject the requested anomaly count");
  return out;
}

}  // namespace txscan::synth
