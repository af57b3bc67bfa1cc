#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "egrow/assembly.hpp"
#include "egrow/field.hpp"

namespace egrow {

/// How a back-traced point outside R gets its value.
struct OutOfDomainPolicy {
    enum class Kind { NearestBoundaryValue, ConstantInflow, ProfileInflow };
    Kind kind = Kind::NearestBoundaryValue;
    /// Inflow value (ConstantInflow), one entry per field component.
    FieldValue value;
    /// Inflow value as a function of the nearest boundary point (ProfileInflow).
    std::function<FieldValue(const Vec2&)> profile;
    /// Optional x-range of the boundary where the inflow applies; outside it
    /// the nearest boundary value is used.
    std::optional<std::pair<double, double>> window;
    /// Optional side of R where the inflow applies; back-traces leaving
    /// through any other side take the nearest boundary value.
    std::optional<BoundaryTag> side;
    /// Linear elements hold only half of an inflow strip thinner than the
    /// first element layer. When set, inflow nodes get the value that makes
    /// the layer integral match the strip (needs a degree-1 space).
    bool conserve_layer = false;

    static OutOfDomainPolicy nearest() { return {}; }
    static OutOfDomainPolicy inflow(FieldValue v, std::optional<std::pair<double, double>> window = std::nullopt);
    static OutOfDomainPolicy inflow(double v, std::optional<std::pair<double, double>> window = std::nullopt);
    static OutOfDomainPolicy inflow(const Mat2& v, std::optional<std::pair<double, double>> window = std::nullopt);
    static OutOfDomainPolicy inflow_profile(std::function<FieldValue(const Vec2&)> f,
                                            std::optional<std::pair<double, double>> window = std::nullopt);
};

/// Raised by source updates when det(I + grad u) <= 0 at a node.
class InversionError : public std::runtime_error {
public:
    InversionError(const std::string& what, Vec2 where) : std::runtime_error(what), where_(std::move(where)) {}
    const Vec2& where() const { return where_; }

private:
    Vec2 where_;
};

/// Location of x_i - v(x_i) dt for every dof x_i of `target`.
std::vector<PointLocation> back_trace(const FunctionSpace& target, const Field& v, double dt,
                                      Exec exec = Exec::Parallel);

/// New coefficients f(trace_i), with the policy supplying values outside R.
Field advect_traced(const Field& f, const std::vector<PointLocation>& trace, const OutOfDomainPolicy& policy,
                    Exec exec = Exec::Parallel);

/// f_i <- f(x_i - v(x_i) dt).
Field semi_lagrangian_advect(const Field& f, const Field& v, double dt, const OutOfDomainPolicy& policy,
                             Exec exec = Exec::Parallel);

/// Fe <- (I + grad u) Fe_g with grad u averaged to the dofs of Fe_g.
Field source_update_Fe(const Field& Fe_g, const Field& u, Exec exec = Exec::Parallel);

/// rho <- rho_g / det(I + grad u). Throws InversionError if det <= 0.
Field source_update_rho(const Field& rho_g, const Field& u, Exec exec = Exec::Parallel);

}  // namespace egrow
