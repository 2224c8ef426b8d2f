#pragma once

// Idiotypic immune network over user profiles. One antigen (the user being served)
// stimulates a pool of antibodies (candidate reviewers); antibodies that resemble each
// other suppress one another. Concentrations evolve by explicit Euler steps of
//
//   dx_i/dt = k1 m_i x_i y - (k2 / n) sum_j m_ij x_i x_j - k3 x_i
//
// with m_i = |r(antibody_i, antigen)|, m_ij = |r(antibody_i, antibody_j)| and n the
// current antibody count.

#include <algorithm>
#include <cstddef>
#include <deque>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "idionet/dataset.hpp"
#include "idionet/error.hpp"
#include "idionet/similarity.hpp"

namespace idionet {

struct AisParams {
  double stimulation = 0.0;  // k1
  double suppression = 0.0;  // k2
  double death = 0.1;        // k3
  std::size_t pool_size = 100;
  double conc_init = 10.0;
  double conc_max = 100.0;
  double conc_min = 0.0;
  double antigen_conc = 10.0;  // y
  // Half of conc_init: pure decay at k3 = 0.1 crosses it on step 7, inside the stability
  // window, so stimulation acts as an admission threshold.
  double removal_threshold = 5.0;
  std::size_t stability_window = 10;
  double dt = 1.0;
  std::size_t max_differentiation_iters = 10000;
  bool include_self_suppression = false;

  void validate() const {
    if (!(stimulation >= 0.0 && suppression >= 0.0 && death >= 0.0)) {
      throw PreconditionError("rate constants must be non-negative");
    }
    if (pool_size < 1) throw PreconditionError("pool size must be >= 1");
    if (!(conc_min <= removal_threshold && removal_threshold < conc_init && conc_init < conc_max)) {
      throw PreconditionError(fmt::format(
          "concentrations must satisfy min <= removal threshold < initial < max (got {} <= {} < {} < {})",
          conc_min, removal_threshold, conc_init, conc_max));
    }
    if (stability_window < 1) throw PreconditionError("stability window must be >= 1");
    if (!(dt > 0.0)) throw PreconditionError("step size must be positive");
    if (max_differentiation_iters < 1) throw PreconditionError("differentiation cap must be >= 1");
  }
};

/// Thrown when reset_and_differentiate hits its iteration cap before any antibody
/// saturates. Carries the partially differentiated pool.
class DifferentiationStalled : public std::runtime_error {
 public:
  DifferentiationStalled(std::size_t iterations, std::vector<UserId> ids, std::vector<double> concentrations)
      : std::runtime_error(fmt::format("no antibody reached maximum concentration after {} iterations",
                                       iterations)),
        iterations_(iterations),
        ids_(std::move(ids)),
        concentrations_(std::move(concentrations)) {}

  std::size_t iterations() const noexcept { return iterations_; }
  const std::vector<UserId>& ids() const noexcept { return ids_; }
  const std::vector<double>& concentrations() const noexcept { return concentrations_; }

 private:
  std::size_t iterations_;
  std::vector<UserId> ids_;
  std::vector<double> concentrations_;
};

/// Non-owning ordered sequence of reviewer profiles.
using ReviewerStream = std::span<const UserProfile* const>;

/// The live network for one antigen. Antibodies reference reviewer profiles, which
/// must outlive the network. Single-writer.
template <typename Scalar = double>
class ImmuneNetwork {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Index = Eigen::Index;

  ImmuneNetwork(UserProfile antigen, const AisParams& params, const SimilarityParams& sim = {})
      : antigen_(std::move(antigen)), params_(params), sim_(sim) {
    if (antigen_.empty()) throw PreconditionError("antigen profile has no votes");
    params_.validate();
    sim_.validate();
  }

  const UserProfile& antigen() const noexcept { return antigen_; }
  const AisParams& params() const noexcept { return params_; }
  const SimilarityParams& similarity() const noexcept { return sim_; }

  Index size() const noexcept { return concentrations_.size(); }
  bool full() const noexcept { return static_cast<std::size_t>(size()) >= params_.pool_size; }
  std::size_t reviewers_seen() const noexcept { return reviewers_seen_; }
  std::size_t iterations() const noexcept { return iterations_; }

  const Vector& concentrations() const noexcept { return concentrations_; }
  const Vector& antigen_match() const noexcept { return antigen_match_; }
  /// Symmetric |r| between antibodies; the diagonal holds each antibody's self-match.
  const Matrix& match_matrix() const noexcept { return match_; }
  const UserProfile& profile(Index i) const { return *profiles_.at(static_cast<std::size_t>(i)); }
  const std::deque<std::size_t>& size_history() const noexcept { return size_history_; }

  /// Sink for `iteration,antibody_user_id,concentration` rows after every step.
  void set_trajectory_log(std::ostream* out) {
    trajectory_ = out;
    if (trajectory_) *trajectory_ << "iteration,antibody_user_id,concentration\n";
  }

  /// Admits `reviewer` at the initial concentration and computes its matches. A
  /// reviewer with the antigen's user id is consumed but rejected.
  bool add_antibody(const UserProfile& reviewer) {
    if (full()) {
      throw PreconditionError(fmt::format("antibody pool is full ({}); iterate before adding", size()));
    }
    ++reviewers_seen_;
    if (reviewer.id() == antigen_.id()) return false;
    if (reviewer.empty()) return false;

    const Index n = size();
    concentrations_.conservativeResize(n + 1);
    antigen_match_.conservativeResize(n + 1);
    match_.conservativeResize(n + 1, n + 1);

    concentrations_(n) = static_cast<Scalar>(params_.conc_init);
    antigen_match_(n) = static_cast<Scalar>(std::abs(pearson_amended(reviewer, antigen_, sim_)));
    for (Index j = 0; j < n; ++j) {
      const auto m = static_cast<Scalar>(std::abs(pearson_amended(reviewer, *profiles_[j], sim_)));
      match_(n, j) = m;
      match_(j, n) = m;
    }
    match_(n, n) = static_cast<Scalar>(std::abs(pearson_amended(reviewer, reviewer, sim_)));
    profiles_.push_back(&reviewer);
    size_history_.clear();
    return true;
  }

  /// One synchronous Euler step with clamping; antibodies that fall below the removal
  /// threshold leave the pool. Returns the removed user ids.
  std::vector<UserId> iterate() {
    if (size() == 0) throw PreconditionError("cannot iterate an empty antibody pool");
    auto removed = step(/*allow_removal=*/true);
    size_history_.push_back(static_cast<std::size_t>(size()));
    while (size_history_.size() > params_.stability_window) size_history_.pop_front();
    return removed;
  }

  /// Iterates without removal; used once selection has ended.
  void iterate_without_removal() { step(/*allow_removal=*/false); }

  void reset_concentrations() { concentrations_.setConstant(static_cast<Scalar>(params_.conc_init)); }

  /// True once the last `stability_window` iterations since the latest admission all
  /// left the pool size unchanged.
  bool is_stable() const noexcept {
    if (size_history_.size() < params_.stability_window) return false;
    return std::all_of(size_history_.begin(), size_history_.end(),
                       [&](std::size_t s) { return s == size_history_.front(); });
  }

 private:
  std::vector<UserId> step(bool allow_removal);

  UserProfile antigen_;
  AisParams params_;
  SimilarityParams sim_;
  std::vector<const UserProfile*> profiles_;
  Vector concentrations_;
  Vector antigen_match_;
  Matrix match_;
  std::deque<std::size_t> size_history_;
  std::size_t reviewers_seen_ = 0;
  std::size_t iterations_ = 0;
  std::ostream* trajectory_ = nullptr;
};

/// Instantaneous rates for every antibody, all read from the current state.
template <typename Scalar>
typename ImmuneNetwork<Scalar>::Vector derivatives(const ImmuneNetwork<Scalar>& net) {
  using Vector = typename ImmuneNetwork<Scalar>::Vector;
  const auto& p = net.params();
  const Vector& x = net.concentrations();
  const auto n = static_cast<Scalar>(net.size());
  if (net.size() == 0) return Vector();

  Vector suppression = net.match_matrix() * x;
  if (!p.include_self_suppression) suppression -= net.match_matrix().diagonal().cwiseProduct(x);

  const auto k1 = static_cast<Scalar>(p.stimulation);
  const auto k2 = static_cast<Scalar>(p.suppression);
  const auto k3 = static_cast<Scalar>(p.death);
  const auto y = static_cast<Scalar>(p.antigen_conc);
  return x.cwiseProduct((k1 * y) * net.antigen_match() - (k2 / n) * suppression -
                        Vector::Constant(net.size(), k3));
}

/// dx_i/dt for a single antibody.
template <typename Scalar>
Scalar derivative(const ImmuneNetwork<Scalar>& net, Eigen::Index i) {
  if (i < 0 || i >= net.size()) throw PreconditionError(fmt::format("antibody index {} out of range", i));
  const auto& p = net.params();
  const auto& x = net.concentrations();
  const auto& m = net.match_matrix();
  Scalar suppression = m.row(i).transpose().dot(x);
  if (!p.include_self_suppression) suppression -= m(i, i) * x(i);
  const auto n = static_cast<Scalar>(net.size());
  return static_cast<Scalar>(p.stimulation) * net.antigen_match()(i) * x(i) *
             static_cast<Scalar>(p.antigen_conc) -
         static_cast<Scalar>(p.suppression) / n * suppression * x(i) -
         static_cast<Scalar>(p.death) * x(i);
}

template <typename Scalar>
std::vector<UserId> ImmuneNetwork<Scalar>::step(bool allow_removal) {
  const Vector rate = derivatives(*this);
  concentrations_ = (concentrations_ + static_cast<Scalar>(params_.dt) * rate)
                        .cwiseMax(static_cast<Scalar>(params_.conc_min))
                        .cwiseMin(static_cast<Scalar>(params_.conc_max));
  ++iterations_;

  std::vector<UserId> removed;
  if (allow_removal) {
    std::vector<Index> keep;
    keep.reserve(profiles_.size());
    const auto threshold = static_cast<Scalar>(params_.removal_threshold);
    for (Index i = 0; i < size(); ++i) {
      if (concentrations_(i) < threshold) {
        removed.push_back(profiles_[static_cast<std::size_t>(i)]->id());
      } else {
        keep.push_back(i);
      }
    }
    if (!removed.empty()) {
      Vector x = concentrations_(keep);
      Vector m = antigen_match_(keep);
      Matrix mm = match_(keep, keep);
      std::vector<const UserProfile*> profiles;
      profiles.reserve(keep.size());
      for (Index i : keep) profiles.push_back(profiles_[static_cast<std::size_t>(i)]);
      concentrations_ = std::move(x);
      antigen_match_ = std::move(m);
      match_ = std::move(mm);
      profiles_ = std::move(profiles);
    }
  }

  if (trajectory_) {
    for (Index i = 0; i < size(); ++i) {
      *trajectory_ << iterations_ << ',' << profiles_[static_cast<std::size_t>(i)]->id() << ','
                   << fmt::format("{}", static_cast<double>(concentrations_(i))) << '\n';
    }
  }
  return removed;
}

template <typename Scalar>
bool is_stable(const ImmuneNetwork<Scalar>& net) noexcept {
  return net.is_stable();
}

/// Admission loop: add the next reviewer; whenever the pool is full and not yet stable,
/// iterate until it is stable or loses members. Stops once stable or when the stream
/// runs out. Returns the number of reviewers consumed from `reviewers`.
template <typename Scalar>
std::size_t run_selection(ImmuneNetwork<Scalar>& net, ReviewerStream reviewers) {
  std::size_t consumed = 0;
  while (!net.is_stable() && consumed < reviewers.size()) {
    net.add_antibody(*reviewers[consumed++]);
    while (net.full() && !net.is_stable()) net.iterate();
  }
  return consumed;
}

/// Resets every antibody to the initial concentration and iterates, without removal,
/// until one antibody saturates. Throws DifferentiationStalled at the iteration cap.
template <typename Scalar>
void reset_and_differentiate(ImmuneNetwork<Scalar>& net) {
  if (net.size() == 0) throw PreconditionError("cannot differentiate an empty antibody pool");
  net.reset_concentrations();
  const auto cap = static_cast<Scalar>(net.params().conc_max);
  std::size_t iterations = 0;
  while ((net.concentrations().array() < cap).all()) {
    if (iterations == net.params().max_differentiation_iters) {
      std::vector<UserId> ids;
      std::vector<double> conc;
      for (Eigen::Index i = 0; i < net.size(); ++i) {
        ids.push_back(net.profile(i).id());
        conc.push_back(static_cast<double>(net.concentrations()(i)));
      }
      throw DifferentiationStalled(iterations, std::move(ids), std::move(conc));
    }
    net.iterate_without_removal();
    ++iterations;
  }
}

}  // namespace idionet
