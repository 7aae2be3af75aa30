#pragma once

#include <stdexcept>
#include <string>

namespace gibbs {

// Error taxonomy used across the library. `kind` is a stable machine-checkable
// tag; the message carries context.
class error : public std::runtime_error {
public:
    error(std::string kind, const std::string& message)
        : std::runtime_error(kind + ": " + message), kind_(std::move(kind)) {}

    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

inline error dimension_error(const std::string& m) { return error("dimension-error", m); }
inline error domain_error(const std::string& m) { return error("domain-error", m); }
inline error empty_input_error(const std::string& m) { return error("empty-input-error", m); }
inline error unsupported_error(const std::string& m) { return error("unsupported-error", m); }
inline error self_pair_error(const std::string& m) { return error("self-pair-error", m); }
inline error alignment_error(const std::string& m) { return error("alignment-error", m); }
inline error truncation_error(const std::string& m) { return error("truncation-error", m); }
inline error inconsistency_error(const std::string& m) { return error("inconsistency-error", m); }
inline error membership_error(const std::string& m) { return error("membership-error", m); }
inline error insufficient_points_error(const std::string& m) { return error("insufficient-points-error", m); }
inline error mark_error(const std::string& m) { return error("mark-error", m); }
inline error degenerate_error(const std::string& m) { return error("degenerate-error", m); }
inline error insufficient_data_error(const std::string& m) { return error("insufficient-data-error", m); }
inline error boundary_error(const std::string& m) { return error("boundary-error", m); }
inline error validation_error(const std::string& m) { return error("validation-error", m); }

} // namespace gibbs
