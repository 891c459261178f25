#pragma once

#include "fvsim/diffusion.hpp"
#include "fvsim/finite_chain.hpp"

#include <concepts>
#include <variant>

namespace fvsim {

/// What the Fleming-Viot engine needs from a model.
template <typename M>
concept KilledProcess = requires(const M& model, typename M::point_type p, Rng& rng,
                                 Path<typename M::point_type>* path) {
    { model.contains(p) } -> std::convertible_to<bool>;
    { model.sample_reference(rng) } -> std::same_as<typename M::point_type>;
    { sample_excursion(model, p, p, 1.0, rng, path) }
        -> std::same_as<Excursion<typename M::point_type>>;
};

template <KilledProcess M> using point_t = typename M::point_type;

inline bool has_finite_reference(const FiniteChainModel&) { return true; }
inline bool has_finite_reference(const DiffusionModel& model) { return model.has_finite_reference(); }

using AnyModel = std::variant<FiniteChainModel, DiffusionModel>;

} // namespace fvsim
