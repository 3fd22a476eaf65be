#ifndef PSENS_CSV_IO_HPP
#define PSENS_CSV_IO_HPP

#include <filesystem>
#include <iosfwd>

#include "psens/sample.hpp"

namespace psens {

// Reads a sample CSV: a header naming k input columns then the output column,
// followed by numeric rows. Parse errors cite the 1-based line number.
Sample ingest_csv(const std::filesystem::path& path);
Sample parse_sample_csv(std::istream& in, const std::string& source = "<stream>");

// Writes header x1,...,xk,y (or the sample's own input names) and one row per
// observation, values with 17 significant digits.
void write_sample_csv(const Sample& sample, std::ostream& out);
void write_sample_csv(const Sample& sample, const std::filesystem::path& path);

}  // namespace psens

#endif  // PSENS_CSV_IO_HPP
