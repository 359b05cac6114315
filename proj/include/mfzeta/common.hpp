#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace mfzeta {

inline constexpr double kDefaultEnumerationCap = 1e8;
inline constexpr double kDefaultGamma = 0.5;
inline constexpr int kDefaultCylinderDepth = 24;

inline double neg_inf() { return -std::numeric_limits<double>::infinity(); }
inline double pos_inf() { return std::numeric_limits<double>::infinity(); }

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error("config error: " + msg) {}
};

struct NotStronglyConnected : Error {
    NotStronglyConnected() : Error("graph is not strongly connected") {}
};

struct BadProbabilityVector : Error {
    explicit BadProbabilityVector(const std::string& vertex)
        : Error("edge probabilities at vertex '" + vertex + "' do not sum to 1") {}
};

struct BadRatio : Error {
    explicit BadRatio(const std::string& edge)
        : Error("edge '" + edge + "' has contraction ratio outside (0,1)") {}
};

struct EnumerationCapExceeded : Error {
    EnumerationCapExceeded(double count, double cap)
        : Error("word enumeration of " + std::to_string(count) +
                " paths exceeds cap " + std::to_string(cap)) {}
};

struct DepthMismatch : Error {
    explicit DepthMismatch(const std::string& msg) : Error("depth mismatch: " + msg) {}
};

struct DenominatorSignViolation : Error {
    DenominatorSignViolation()
        : Error("ratio-map denominator must be strictly negative") {}
};

struct BadHolderData : Error {
    explicit BadHolderData(const std::string& msg) : Error("bad Holder data: " + msg) {}
};

struct NotNegative : Error {
    NotNegative() : Error("potential must be strictly negative") {}
};

struct NotIrreducible : Error {
    NotIrreducible() : Error("matrix is not irreducible") {}
};

struct SignViolation : Error {
    SignViolation() : Error("potential must have constant sign") {}
};

struct PositivityViolation : Error {
    PositivityViolation() : Error("potential must be strictly positive") {}
};

struct DegenerateTarget : Error {
    DegenerateTarget()
        : Error("target interior does not meet the attainable set") {}
};

struct UnknownSubcommand : Error {
    explicit UnknownSubcommand(const std::string& name)
        : Error("unknown subcommand '" + name + "'") {}
};

// ---------------------------------------------------------------------------
// Closed intervals
// ---------------------------------------------------------------------------

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    Interval() = default;
    Interval(double l, double h) : lo(l), hi(h) {}

    static Interval point(double x) { return {x, x}; }

    double width() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }
    bool contains(double x) const { return lo <= x && x <= hi; }
    bool contains(const Interval& other) const {
        return lo <= other.lo && other.hi <= hi;
    }
    Interval inflated(double r) const { return {lo - r, hi + r}; }
};

// Quotient of two intervals with a strictly negative denominator.
inline Interval interval_divide_negative(const Interval& num, const Interval& den) {
    if (!(den.hi < 0.0)) throw DenominatorSignViolation();
    const double c[4] = {num.lo / den.lo, num.lo / den.hi, num.hi / den.lo,
                         num.hi / den.hi};
    double lo = c[0], hi = c[0];
    for (int k = 1; k < 4; ++k) {
        lo = std::min(lo, c[k]);
        hi = std::max(hi, c[k]);
    }
    return {lo, hi};
}

// ---------------------------------------------------------------------------
// Deterministic counter-style RNG (splitmix64). Streams are cheap to fork,
// which keeps Monte Carlo shards reproducible regardless of scheduling.
// ---------------------------------------------------------------------------

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Independent substream derived from this stream's seed.
    Rng fork(std::uint64_t stream_id) const {
        Rng r(state_ ^ (0xd1342543de82ef95ULL * (stream_id + 1)));
        r.next_u64();
        return r;
    }

  private:
    std::uint64_t state_;
};

// Streaming log-sum-exp accumulator.
class LogSumExp {
  public:
    void add(double log_term) {
        if (log_term == neg_inf()) return;
        if (n_ == 0 || log_term > max_) {
            if (n_ > 0) sum_ = sum_ * std::exp(max_ - log_term) + 1.0;
            else sum_ = 1.0;
            max_ = log_term;
        } else {
            sum_ += std::exp(log_term - max_);
        }
        ++n_;
    }

    // log(sum of exp(terms)); -inf if no terms were added.
    double value() const {
        if (n_ == 0) return neg_inf();
        return max_ + std::log(sum_);
    }

    std::size_t count() const { return n_; }

  private:
    double max_ = 0.0;
    double sum_ = 0.0;
    std::size_t n_ = 0;
};

}  // namespace mfzeta
