#pragma once

// Convex potentials on R and R^d, their subdifferential graphs, resolvents,
// Yosida approximations, Moreau envelopes and Fenchel conjugates.

#include <filesystem>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace dnspde {

using Point = std::vector<double>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Absolute tolerance on the resolvent point for the root solvers.
inline constexpr double kRootTolerance = 1e-12;

/// Default bound for limsup P(x)/P(-x) used when none is given.
inline constexpr double kDefaultSymmetryBound = 1e6;

enum class ProfileKind { Power, Abs, Huberized, ExpCosh, Piecewise, Sampled };

std::string to_string(ProfileKind kind);

/// Yosida / resolvent parameter. Always strictly positive.
class YosidaParam {
public:
    explicit YosidaParam(double lambda);
    [[nodiscard]] double value() const noexcept { return lambda_; }

private:
    double lambda_;
};

/// A convex function phi: R -> R_+ with phi(0) = 0 and full domain.
///
/// Catalog members:
///   power(p, c)        c |x|^p / p, p > 1
///   abs(c)             c |x|
///   huberized(d, c)    c x^2/(2d) for |x| <= d, c(|x| - d/2) otherwise
///   exp_cosh(c)        c (cosh x - 1)
///   piecewise(a, b)    a x for x >= 0, -b x for x < 0
///   sampled(x, P)      derivative interpolated linearly between the secant
///                      slopes of the table, anchored so that phi(0) = 0
class ScalarProfile {
public:
    static ScalarProfile power(double p, double scale = 1.0);
    static ScalarProfile abs(double scale = 1.0);
    static ScalarProfile huberized(double threshold, double scale = 1.0);
    static ScalarProfile exp_cosh(double scale = 1.0);
    static ScalarProfile piecewise(double right_slope, double left_slope);
    static ScalarProfile sampled(std::span<const double> x, std::span<const double> values);
    /// Two whitespace-separated columns (x, P(x)); '#' starts a comment.
    static ScalarProfile load_sampled(const std::filesystem::path& file);

    [[nodiscard]] ProfileKind kind() const noexcept { return kind_; }
    [[nodiscard]] double exponent() const noexcept { return p_; }
    [[nodiscard]] double scale() const noexcept { return c_; }
    [[nodiscard]] bool is_even() const noexcept;
    [[nodiscard]] std::string describe() const;

    [[nodiscard]] double value(double x) const;
    [[nodiscard]] double left_derivative(double x) const;
    [[nodiscard]] double right_derivative(double x) const;
    /// Element of the subdifferential at x closest to zero.
    [[nodiscard]] double minimal_section(double x) const;

    /// Lipschitz constant of the derivative, +inf when the derivative is not
    /// globally Lipschitz (or multivalued).
    [[nodiscard]] double derivative_lipschitz() const noexcept;
    /// Lipschitz constant of the Yosida approximation at parameter lambda.
    [[nodiscard]] double yosida_lipschitz(double lambda) const noexcept;
    /// Points where the derivative is not smooth (kinks of phi').
    [[nodiscard]] std::vector<double> derivative_kinks() const;

    /// True when the catalog entry has an analytic resolvent.
    [[nodiscard]] bool has_closed_resolvent() const noexcept;
    /// True when the catalog entry has an analytic conjugate.
    [[nodiscard]] bool has_closed_conjugate() const noexcept;

    /// (I + lambda d phi)^{-1} x. Closed form when available, otherwise a
    /// safeguarded Newton iteration.
    [[nodiscard]] double resolvent(double lambda, double x) const;
    /// Same map computed by plain bisection on the left/right derivatives.
    [[nodiscard]] double resolvent_bisection(double lambda, double x) const;
    [[nodiscard]] double yosida(double lambda, double x) const;
    [[nodiscard]] double moreau_envelope(double lambda, double x) const;

    /// phi*(y); +inf when the supremum diverges.
    [[nodiscard]] double conjugate(double y) const;
    /// phi*(y) by log-spaced ray search; never uses the closed form.
    [[nodiscard]] double conjugate_numeric(double y) const;

private:
    struct Table {
        std::vector<double> breaks;   // midpoints of the input knots
        std::vector<double> slopes;   // derivative values at the breaks
        std::vector<double> integral; // int_{breaks[0]}^{breaks[i]} phi'
        double offset = 0.0;          // int_{breaks[0]}^{0} phi'
    };

    ScalarProfile(ProfileKind kind, double p, double c, double d);

    [[nodiscard]] double sampled_derivative(double x) const;
    [[nodiscard]] double sampled_primitive(double x) const;
    [[nodiscard]] double sampled_resolvent(double lambda, double x) const;
    [[nodiscard]] double newton_resolvent(double lambda, double x) const;

    ProfileKind kind_;
    double p_ = 2.0; // power exponent
    double c_ = 1.0; // scale, or right slope for piecewise
    double d_ = 1.0; // huber threshold, or left slope for piecewise
    std::shared_ptr<const Table> table_;
};

enum class Arity { Scalar, Vector };
enum class Structure { Radial, Separable };

/// A convex potential on R (j) or R^d (k). Vector potentials are either
/// radial, k(x) = phi(|x|) with an even profile, or separable,
/// k(x) = sum_a phi_a(x_a).
class Potential {
public:
    static Potential scalar(ScalarProfile profile, double symmetry_bound = kDefaultSymmetryBound);
    static Potential radial(int dimension, ScalarProfile profile,
                            double symmetry_bound = kDefaultSymmetryBound);
    static Potential separable(std::vector<ScalarProfile> components,
                               double symmetry_bound = kDefaultSymmetryBound);

    [[nodiscard]] Arity arity() const noexcept { return arity_; }
    [[nodiscard]] Structure structure() const noexcept { return structure_; }
    [[nodiscard]] int dimension() const noexcept { return static_cast<int>(profiles_.size()); }
    [[nodiscard]] double symmetry_bound() const noexcept { return symmetry_bound_; }
    [[nodiscard]] bool has_closed_forms() const noexcept;
    [[nodiscard]] std::string describe() const;

    /// Radial/scalar: the single profile. Separable: component a.
    [[nodiscard]] const ScalarProfile& profile(int component = 0) const;
    [[nodiscard]] const std::vector<ScalarProfile>& profiles() const noexcept { return profiles_; }

    /// The same potential with every value shifted by `offset`; used to build
    /// deliberately invalid potentials for validator tests.
    [[nodiscard]] Potential shifted(double offset) const;
    [[nodiscard]] double offset() const noexcept { return offset_; }

private:
    Potential(Arity arity, Structure structure, std::vector<ScalarProfile> profiles,
              double symmetry_bound);

    Arity arity_;
    Structure structure_;
    std::vector<ScalarProfile> profiles_;
    double symmetry_bound_;
    double offset_ = 0.0;
};

/// The subdifferential graph of a potential. Multivalued points are only
/// reached through the resolvent, which is always single-valued.
class MonotoneGraph {
public:
    explicit MonotoneGraph(Potential potential) : potential_(std::move(potential)) {}
    static MonotoneGraph subdifferential(Potential potential) { return MonotoneGraph(std::move(potential)); }

    [[nodiscard]] const Potential& potential() const noexcept { return potential_; }
    [[nodiscard]] int dimension() const noexcept { return potential_.dimension(); }

    /// Minimal-norm element of the graph at x.
    [[nodiscard]] Point minimal_section(std::span<const double> x) const;

private:
    Potential potential_;
};

[[nodiscard]] double eval_potential(const Potential& P, std::span<const double> x);
[[nodiscard]] double eval_potential(const Potential& P, double x);

[[nodiscard]] Point resolvent(const MonotoneGraph& G, YosidaParam lam, std::span<const double> x);
/// Generic bisection route, independent of any closed form.
[[nodiscard]] Point resolvent_bisection(const MonotoneGraph& G, YosidaParam lam,
                                        std::span<const double> x);
[[nodiscard]] Point yosida(const MonotoneGraph& G, YosidaParam lam, std::span<const double> x);
[[nodiscard]] double moreau_envelope(const Potential& P, YosidaParam lam, std::span<const double> x);

[[nodiscard]] double conjugate(const Potential& P, std::span<const double> y);
[[nodiscard]] double conjugate_numeric(const Potential& P, std::span<const double> y);

/// P(x) + P*(y) - x.y; throws InvalidArgument if P*(y) is infinite.
[[nodiscard]] double fenchel_residual(const Potential& P, std::span<const double> x,
                                      std::span<const double> y);

struct ValidationEntry {
    std::string check;
    bool passed = true;
    double worst_value = 0.0;
    Point worst_sample;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationEntry> entries;

    [[nodiscard]] bool all_passed() const;
    [[nodiscard]] const ValidationEntry& entry(const std::string& check) const;
};

/// Samples the standing assumptions (origin value, nonnegativity, convexity,
/// superlinearity for vector potentials, symmetry ratio) on a deterministic
/// probe set inside the ball of radius `probe_radius`.
[[nodiscard]] ValidationReport validate_potential(const Potential& P, double probe_radius,
                                                  int sample_count);

} // namespace dnspde
