#ifndef SPECTRAL_CSV_H_
#define SPECTRAL_CSV_H_

#include <string>

namespace spectral {

// Shortest round-trip decimal text; "inf", "-inf" and "nan" otherwise.
std::string format_double(double x);

}  // namespace spectral

#endif  // SPECTRAL_CSV_H_
