#ifndef IFF_TYPES_HPP
#define IFF_TYPES_HPP

#include <complex>

namespace iff
{

using cplx = std::complex<double>;

} // namespace iff

#endif
