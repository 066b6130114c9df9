#pragma once

// Reverse-mode differentiation over a flat operation tape.
//
// Every non-constant Var refers to a node on a Tape. A node stores the local
// partial derivative with respect to each of its parents in CSR form, so a
// single node can have many parents (an affine row W.x + b is one node rather
// than 2n binary ones). Constants carry no node at all.
//
// A Tape is not thread-safe; use one per worker.

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "jdan/activation.hpp"

namespace jdan::ad {

class Tape {
public:
    using Index = std::uint32_t;
    static constexpr Index npos = std::numeric_limits<Index>::max();

    Tape() { offsets_.push_back(0); }

    Index leaf()
    {
        offsets_.push_back(static_cast<Index>(parents_.size()));
        return static_cast<Index>(offsets_.size() - 2);
    }

    void edge(Index parent, double partial)
    {
        parents_.push_back(parent);
        partials_.push_back(partial);
    }

    //! Closes a node whose edges were added with edge() since the last close.
    Index close()
    {
        offsets_.push_back(static_cast<Index>(parents_.size()));
        return static_cast<Index>(offsets_.size() - 2);
    }

    std::size_t size() const noexcept { return offsets_.size() - 1; }

    void clear()
    {
        offsets_.resize(1);
        parents_.clear();
        partials_.clear();
    }

    void reserve(std::size_t nodes, std::size_t edges)
    {
        offsets_.reserve(nodes + 1);
        parents_.reserve(edges);
        partials_.reserve(edges);
    }

    //! d(output)/d(node) for every node up to and including output.
    std::vector<double> adjoints(Index output) const;

private:
    std::vector<Index> offsets_;
    std::vector<Index> parents_;
    std::vector<double> partials_;
};

class Var {
public:
    Var() = default;
    Var(double constant) : value_(constant) {} // NOLINT: implicit by design of mixed arithmetic

    Var(Tape& tape, double value, Tape::Index id) : tape_(&tape), id_(id), value_(value) {}

    //! Registers a new independent variable on the tape.
    static Var input(Tape& tape, double value) { return {tape, value, tape.leaf()}; }

    double value() const noexcept { return value_; }
    bool is_constant() const noexcept { return tape_ == nullptr; }
    Tape* tape() const noexcept { return tape_; }
    Tape::Index id() const noexcept { return id_; }

private:
    Tape* tape_ = nullptr;
    Tape::Index id_ = Tape::npos;
    double value_ = 0.0;
};

inline double value_of(const Var& v) noexcept { return v.value(); }

//! One-parent node helper.
inline Var unary(const Var& a, double value, double partial)
{
    if (a.is_constant()) {
        return Var(value);
    }
    Tape& t = *a.tape();
    t.edge(a.id(), partial);
    return {t, value, t.close()};
}

//! Two-parent node helper; either parent may be constant.
inline Var binary(const Var& a, double da, const Var& b, double db, double value)
{
    if (a.is_constant() && b.is_constant()) {
        return Var(value);
    }
    Tape& t = a.is_constant() ? *b.tape() : *a.tape();
    if (!a.is_constant())
        t.edge(a.id(), da);
    if (!b.is_constant())
        t.edge(b.id(), db);
    return {t, value, t.close()};
}

inline Var operator+(const Var& a, const Var& b) { return binary(a, 1.0, b, 1.0, a.value() + b.value()); }
inline Var operator-(const Var& a, const Var& b) { return binary(a, 1.0, b, -1.0, a.value() - b.value()); }
inline Var operator*(const Var& a, const Var& b) { return binary(a, b.value(), b, a.value(), a.value() * b.value()); }
inline Var operator/(const Var& a, const Var& b)
{
    const double inv = 1.0 / b.value();
    const double q = a.value() * inv;
    return binary(a, inv, b, -q * inv, q);
}
inline Var operator-(const Var& a) { return unary(a, -a.value(), -1.0); }

inline Var& operator+=(Var& a, const Var& b) { return a = a + b; }
inline Var& operator*=(Var& a, const Var& b) { return a = a * b; }

inline Var exp(const Var& a)
{
    const double e = std::exp(a.value());
    return unary(a, e, e);
}

inline Var log(const Var& a) { return unary(a, std::log(a.value()), 1.0 / a.value()); }

inline Var tanh(const Var& a)
{
    const double t = std::tanh(a.value());
    return unary(a, t, 1.0 - t * t);
}

inline Var softplus(const Var& a) { return unary(a, jdan::softplus(a.value()), jdan::sigmoid(a.value())); }

inline Var activate(Activation kind, const Var& x)
{
    return unary(x, jdan::activate(kind, x.value()), jdan::activate_d1(kind, x.value()));
}

inline Var activate_d1(Activation kind, const Var& x)
{
    return unary(x, jdan::activate_d1(kind, x.value()), jdan::activate_d2(kind, x.value()));
}

//! sum_j w[j] * x[j] + bias as a single node.
Var affine(std::span<const Var> w, std::span<const Var> x, const Var& bias);

//! sum_j w[j] * x[j] as a single node.
inline Var dot(std::span<const Var> w, std::span<const Var> x) { return affine(w, x, Var(0.0)); }

//! Product of all factors as a single node.
Var product(std::span<const Var> factors);

} // namespace jdan::ad
