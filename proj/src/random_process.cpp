#include <algorithm>
#include <array>
#include <random>

#include "bpmn_assistant/process_ir.hpp"

namespace bpmn_assistant {
namespace {

constexpr int kMaxDepth = 3;

constexpr std::array<std::string_view, 12> kVerbs = {
    "Review", "Approve", "Check", "Send", "Prepare", "Archive",
    "Register", "Verify", "Update", "Notify", "Collect", "Ship"};
constexpr std::array<std::string_view, 10> kObjects = {
    "order", "invoice", "documents", "customer", "payment",
    "shipment", "contract", "request", "report", "goods"};
constexpr std::array<std::string_view, 8> kConditions = {
    "approved", "rejected", "needs review", "amount above limit",
    "amount within limit", "in stock", "out of stock", "incomplete"};

class Generator {
 public:
  explicit Generator(std::uint64_t seed) : rng_(seed) {}

  ProcessModel run(std::size_t target_size) {
    ProcessModel model;
    model.process.push_back(make_start("start"));
    std::size_t body = target_size > 2 ? target_size - 2 : 0;

    // Occasionally close the process with a join-less decision whose first
    // branch jumps forward to the final end event.
    if (body >= 3 && chance(0.25)) {
      const std::size_t gateway_size = uniform(3, std::min<std::size_t>(body, 9));
      Sequence pre = sequence(body - gateway_size, 0);
      for (auto& e : pre) model.process.push_back(std::move(e));
      model.process.push_back(terminal_decision(gateway_size));
    } else {
      Sequence seq = sequence(body, 0);
      for (auto& e : seq) model.process.push_back(std::move(e));
    }
    model.process.push_back(make_end("end"));
    return model;
  }

 private:
  bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }

  std::size_t uniform(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
  }

  template <class Array>
  std::string_view pick(const Array& values) {
    return values[uniform(0, values.size() - 1)];
  }

  Element task() {
    static constexpr std::array<ElementType, 3> kTypes = {ElementType::kTask, ElementType::kUserTask,
                                                          ElementType::kServiceTask};
    std::string label = std::string(pick(kVerbs)) + " " + std::string(pick(kObjects));
    return make_task("task_" + std::to_string(++tasks_), std::move(label), kTypes[uniform(0, 2)]);
  }

  // Splits `total` into `parts` sizes, each at least `minimum`.
  std::vector<std::size_t> compose(std::size_t total, std::size_t parts, std::size_t minimum) {
    std::vector<std::size_t> sizes(parts, minimum);
    for (std::size_t rest = total - parts * minimum; rest > 0; --rest) ++sizes[uniform(0, parts - 1)];
    return sizes;
  }

  // Exactly `budget` elements, counting nested ones.
  Sequence sequence(std::size_t budget, int depth) {
    Sequence seq;
    while (budget > 0) {
      std::size_t take = 1;
      if (depth < kMaxDepth && budget >= 3 && chance(0.4)) {
        take = uniform(3, std::min<std::size_t>(budget, 10));
      }
      if (take == 1) {
        seq.push_back(task());
      } else {
        seq.push_back(gateway(take, depth, seq));
      }
      budget -= take;
    }
    return seq;
  }

  Element gateway(std::size_t size, int depth, const Sequence& earlier) {
    const std::size_t inner = size - 1;
    if (chance(0.4)) {
      ParallelGateway gateway;
      gateway.id = "and_" + std::to_string(++parallels_);
      const std::size_t branches = uniform(2, std::min<std::size_t>(3, inner));
      for (std::size_t sz : compose(inner, branches, 1)) gateway.branches.push_back(sequence(sz, depth + 1));
      return gateway;
    }

    ExclusiveGateway gateway;
    gateway.id = "xor_" + std::to_string(++exclusives_);
    gateway.label = "Decision " + std::to_string(exclusives_) + "?";
    gateway.has_join = true;
    const std::size_t branches = uniform(2, std::min<std::size_t>(3, inner + 1));
    // At most one branch may be empty.
    std::size_t empty_branch = branches;
    if (inner < branches || chance(0.25)) empty_branch = uniform(0, branches - 1);
    const std::size_t filled = empty_branch < branches ? branches - 1 : branches;
    auto sizes = compose(inner, filled, 1);

    std::vector<std::string> loop_targets;
    for (const auto& e : earlier) {
      if (e.type() != ElementType::kStartEvent) loop_targets.push_back(e.id());
    }
    const std::size_t loop_branch =
        !loop_targets.empty() && chance(0.35) ? uniform(0, branches - 1) : branches;

    std::size_t next_size = 0;
    for (std::size_t b = 0; b < branches; ++b) {
      Branch branch;
      branch.condition = std::string(pick(kConditions));
      if (b != empty_branch) branch.path = sequence(sizes[next_size++], depth + 1);
      if (b == loop_branch) branch.next = loop_targets[uniform(0, loop_targets.size() - 1)];
      gateway.branches.push_back(std::move(branch));
    }
    return gateway;
  }

  // A has_join=false decision: branch 0 routes to the top-level "end", the
  // others terminate in their own end events.
  Element terminal_decision(std::size_t size) {
    ExclusiveGateway gateway;
    gateway.id = "xor_" + std::to_string(++exclusives_);
    gateway.label = "Decision " + std::to_string(exclusives_) + "?";
    gateway.has_join = false;
    const std::size_t inner = size - 1;
    const std::size_t branches = uniform(2, std::min<std::size_t>(3, inner + 1));
    // Branch 0 may be empty; every other branch holds at least its end event.
    auto sizes = compose(inner - (branches - 1), branches, 0);
    for (std::size_t b = 0; b < branches; ++b) {
      Branch branch;
      branch.condition = std::string(pick(kConditions));
      branch.path = sequence(sizes[b], 1);
      if (b == 0) {
        branch.next = "end";
      } else {
        branch.path.push_back(make_end("end_" + std::to_string(++ends_)));
      }
      gateway.branches.push_back(std::move(branch));
    }
    return gateway;
  }

  std::mt19937_64 rng_;
  int tasks_ = 0;
  int exclusives_ = 0;
  int parallels_ = 0;
  int ends_ = 0;
};

}  // namespace

ProcessModel random_process(std::uint64_t seed, std::size_t target_size) {
  return Generator(seed).run(std::max<std::size_t>(target_size, 2));
}

}  // namespace bpmn_assistant
