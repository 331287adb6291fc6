#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "resop/rng.hpp"

namespace resop::ad {

// Named 64-bit-float parameter tensors with gradient accumulators. Values are
// read-only during rollouts; gradients are written either directly (single
// worker) or through GradBuffer sinks merged in a fixed order (parallel
// batches), so training is deterministic for a given seed.
class ParameterStore {
 public:
  struct Param {
    std::string name;
    int rows = 0, cols = 0;
    std::vector<double> values;
    std::vector<double> grad;
  };

  // Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) initialization.
  int add(const std::string& name, int rows, int cols, int fan_in, Rng& rng);
  int add_values(const std::string& name, int rows, int cols, std::vector<double> values);

  int count() const { return static_cast<int>(params_.size()); }
  Param& at(int id) { return params_[id]; }
  const Param& at(int id) const { return params_[id]; }
  int find(const std::string& name) const;  // -1 when absent

  void zero_grad();
  bool values_finite() const;
  size_t total_values() const;

  std::vector<double> snapshot_values() const;           // concatenated, registration order
  void restore_values(const std::vector<double>& flat);  // inverse of snapshot_values

  // Flat text format: "resop-checkpoint v1", meta lines, then one
  // "tensor <name> <rows> <cols>" line followed by one line of %.17g values
  // per parameter. Decimal text round-trips doubles exactly at 17 digits.
  void save(std::ostream& os, const std::map<std::string, std::string>& meta) const;
  static std::pair<ParameterStore, std::map<std::string, std::string>> load(std::istream& is);

 private:
  std::vector<Param> params_;
};

// Per-parameter gradient accumulation target for parallel episode batches.
class GradBuffer {
 public:
  GradBuffer() = default;
  explicit GradBuffer(const ParameterStore& store);

  void clear();
  void add_into(ParameterStore& store) const;  // store.grad += this
  void add_from(const GradBuffer& other);

  std::vector<double>& operator[](int param_id) { return grads_[param_id]; }
  const std::vector<double>& operator[](int param_id) const { return grads_[param_id]; }
  bool empty() const { return grads_.empty(); }

 private:
  std::vector<std::vector<double>> grads_;
};

// Reverse-mode tape over rank-2 tensors (vectors are [1, n]). A Graph is
// confined to one worker; it reads parameter values from the bound store and
// never mutates them.
class Graph;

class Tensor {
 public:
  Tensor() = default;
  int rows() const;
  int cols() const;
  const std::vector<double>& values() const;
  double scalar() const;  // requires exactly one element
  bool valid() const { return graph_ != nullptr; }

 private:
  friend class Graph;
  Tensor(Graph* g, int node) : graph_(g), node_(node) {}
  Graph* graph_ = nullptr;
  int node_ = -1;
};

class Graph {
 public:
  explicit Graph(const ParameterStore& store) : store_(&store) {}
  Graph() : store_(nullptr) {}

  // Leaves.
  Tensor constant(int rows, int cols, std::vector<double> values);
  Tensor row(const std::vector<double>& values);  // [1, n] constant
  Tensor param(int param_id);

  // Ops. Shapes are validated; mismatches throw ContractError naming the op.
  Tensor matmul(Tensor a, Tensor b);
  Tensor transpose(Tensor a);
  Tensor add(Tensor a, Tensor b);          // identical shapes
  Tensor add_rowvec(Tensor a, Tensor b);   // [m,n] + [1,n]
  Tensor concat_cols(const std::vector<Tensor>& parts);
  Tensor relu(Tensor a);
  Tensor tanh_op(Tensor a);
  Tensor softmax_rows(Tensor a);  // stable (max-subtracted) softmax per row
  Tensor log_op(Tensor a);
  Tensor sum_all(Tensor a);   // [1,1]
  Tensor mean_all(Tensor a);  // [1,1]
  Tensor scale(Tensor a, double factor);
  Tensor gather_rows(Tensor a, std::vector<int> indices);
  Tensor pick(Tensor a, int row, int col);  // [1,1]

  // Reverse pass from a scalar loss. Node gradients are scratch per call;
  // parameter gradients accumulate into the sink, so two calls double them.
  void backward(Tensor loss, GradBuffer& sink);
  void backward(Tensor loss, ParameterStore& store);  // sink = store.grad

  int node_count() const { return static_cast<int>(nodes_.size()); }
  const ParameterStore* store() const { return store_; }

 private:
  friend class Tensor;
  struct Node {
    int rows = 0, cols = 0;
    std::vector<double> value;
    std::vector<double> grad;  // allocated during backward only
    bool needs_grad = false;
    int param_id = -1;
    std::function<void(Graph&, Node&)> backward_fn;
  };

  Node& node(int idx) { return nodes_[idx]; }
  Node& node(Tensor t) { return nodes_[t.node_]; }
  const Node& node(Tensor t) const { return nodes_[t.node_]; }
  Tensor push(Node n) {
    nodes_.push_back(std::move(n));
    return Tensor(this, static_cast<int>(nodes_.size()) - 1);
  }
  void check_same_graph(Tensor t, const char* op) const;

  template <class Sink>
  void run_backward(Tensor loss, Sink&& sink);

  const ParameterStore* store_;
  std::vector<Node> nodes_;
};

// One standard Adam update with bias correction over every parameter.
struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}
  void step(ParameterStore& store, double lr);
  long steps_taken() const { return t_; }

 private:
  AdamConfig config_;
  long t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace resop::ad
