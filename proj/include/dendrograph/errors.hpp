#pragma once

#include <stdexcept>
#include <string>

namespace dendrograph {

// Input that could not be tokenized or typed (edge lists, JSON, Newick).
class ParseError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Well-formed input that violates a documented invariant.
class ValidationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class SelfLoopError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

// Dendrogram whose heights decrease from some node to an ancestor.
class IrregularDendrogramError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

// Tree shape with an internal node whose subtrees share no edge mass;
// the optimal height there would be infinite.
class UnrepresentableTreeError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

// Graph with at least two mutually unreachable nodes.
class DisconnectedGraphError : public std::runtime_error {
public:
  DisconnectedGraphError(std::string label_a, std::string label_b)
      : std::runtime_error("graph is disconnected: no path between '" + label_a +
                           "' and '" + label_b + "'"),
        label_a_(std::move(label_a)),
        label_b_(std::move(label_b)) {}

  const std::string& label_a() const { return label_a_; }
  const std::string& label_b() const { return label_b_; }

private:
  std::string label_a_;
  std::string label_b_;
};

}  // namespace dendrograph
