#pragma once

#include <cmath>
#include <string>

#include "coopdrive/marl/learner.hpp"

namespace coopdrive::marl::detail {

inline constexpr std::size_t kActions = static_cast<std::size_t>(kActionCount);
// Keeps 1/p finite in score-function gradients.
inline constexpr double kMinProb = 1e-12;

/// Rows = batch entries; robot's current (or next) observation.
inline Matrix gather_obs(Batch batch, std::size_t robot, bool next) {
  const auto& first = next ? batch.front()->next_observations[robot] : batch.front()->observations[robot];
  Matrix out(batch.size(), first.size());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto& o = next ? batch[b]->next_observations[robot] : batch[b]->observations[robot];
    std::copy(o.begin(), o.end(), out.row_span(b).begin());
  }
  return out;
}

inline Matrix gather_state(Batch batch, bool next) {
  std::size_t width = 0;
  for (const auto& o : batch.front()->observations) width += o.size();
  Matrix out(batch.size(), width);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto& obs = next ? batch[b]->next_observations : batch[b]->observations;
    auto row = out.row_span(b).begin();
    for (const auto& o : obs) row = std::copy(o.begin(), o.end(), row);
  }
  return out;
}

inline Matrix one_hot_rows(std::span<const int> actions) {
  Matrix out(actions.size(), kActions);
  for (std::size_t b = 0; b < actions.size(); ++b) out(b, static_cast<std::size_t>(actions[b])) = 1.0;
  return out;
}

inline std::vector<int> column(Batch batch, std::size_t robot) {
  std::vector<int> out;
  out.reserve(batch.size());
  for (const auto* tr : batch) out.push_back(tr->actions[robot]);
  return out;
}

inline void require_finite(double loss, const std::string& what) {
  if (!std::isfinite(loss)) throw TrainingError("nonfinite " + what + " loss (" + std::to_string(loss) + ")");
}

inline neural::TensorViews views_of(std::vector<Mlp>& nets) {
  neural::TensorViews out;
  for (auto& n : nets) n.append_views(out);
  return out;
}

/// Single-layer linear network wrapping a bare matrix, for checkpointing.
inline Mlp wrap_matrix(const Matrix& m) {
  return Mlp({neural::Dense{m, std::vector<double>(m.rows(), 0.0)}}, neural::OutputActivation::kLinear);
}

const NamedNetwork& find_network(const std::vector<NamedNetwork>& nets, const std::string& name);

/// Copies `src` into `dst` after checking that every layer shape matches.
void assign_checked(Mlp& dst, const Mlp& src, const std::string& name);

}  // namespace coopdrive::marl::detail
