#pragma once

#include <stdexcept>
#include <string>

namespace safemap {

// Coordinate outside the field's domain box.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Caller violated a documented precondition.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Gram factorization failed even after jitter escalation.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double condition_estimate)
      : std::runtime_error(what), condition_estimate_(condition_estimate) {}
  double condition_estimate() const { return condition_estimate_; }

 private:
  double condition_estimate_;
};

// RRT* exhausted its iteration budget without reaching the goal.
class PlannerTimeout : public std::runtime_error {
 public:
  PlannerTimeout(const std::string& what, std::size_t tree_size, double closest_to_goal)
      : std::runtime_error(what), tree_size_(tree_size), closest_to_goal_(closest_to_goal) {}
  std::size_t tree_size() const { return tree_size_; }
  double closest_to_goal() const { return closest_to_goal_; }

 private:
  std::size_t tree_size_;
  double closest_to_goal_;
};

// The safety loop cannot continue; carries the step at which it stopped.
class EpisodeAbort : public std::runtime_error {
 public:
  EpisodeAbort(const std::string& what, int step) : std::runtime_error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

// Invalid experiment configuration; `path` names the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace safemap
