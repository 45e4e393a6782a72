#pragma once

#include <stdexcept>
#include <string>

namespace tabgraph {

// Error taxonomy for the whole pipeline. Every throwing operation uses
// Error with one of these codes so the CLI can map failures to exit codes
// (data errors -> 2, provider errors -> 3).
enum class Errc {
  malformed_table,
  empty_table,
  multiple_tables,
  row_out_of_range,
  no_header_rows,
  inconsistent_report,
  provider_unavailable,
  dimension_mismatch,
  shape_mismatch,
  unknown_edge_type,
  empty_mask,
  divergence,
  missing_annotation,
  count_mismatch,
  alignment_error,
  bad_config,
  io_error,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::malformed_table: return "MalformedTable";
    case Errc::empty_table: return "EmptyTable";
    case Errc::multiple_tables: return "MultipleTables";
    case Errc::row_out_of_range: return "RowOutOfRange";
    case Errc::no_header_rows: return "NoHeaderRows";
    case Errc::inconsistent_report: return "InconsistentReport";
    case Errc::provider_unavailable: return "ProviderUnavailable";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::shape_mismatch: return "ShapeMismatch";
    case Errc::unknown_edge_type: return "UnknownEdgeType";
    case Errc::empty_mask: return "EmptyMask";
    case Errc::divergence: return "Divergence";
    case Errc::missing_annotation: return "MissingAnnotation";
    case Errc::count_mismatch: return "CountMismatch";
    case Errc::alignment_error: return "AlignmentError";
    case Errc::bad_config: return "BadConfig";
    case Errc::io_error: return "IoError";
  }
  return "UnknownError";
}

inline bool is_provider_error(Errc c) {
  return c == Errc::provider_unavailable || c == Errc::dimension_mismatch;
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

}  // namespace tabgraph
