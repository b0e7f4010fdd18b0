#ifndef IFF_ERRORS_HPP
#define IFF_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace iff
{

/// Bad argument value (non-positive cutoff, even-length Hankel row, ...).
class InvalidArgument : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// Fewer illumination patterns than sources (T < n).
class InsufficientMeasurements : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Matrix or vector shapes that do not agree.
class DimensionMismatch : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// The focusing combination sum_t q_t H_t is numerically zero.
class DegenerateCombination : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Annihilating filter has as many taps as the row it is applied to.
class FilterTooLong : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// Not enough samples remain to form a Hankel matrix of size >= 2.
class InsufficientSamples : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Least-squares system with linearly dependent columns.
class RankDeficient : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// File-system failures; the message carries the offending path.
class IoError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

} // namespace iff

#endif
