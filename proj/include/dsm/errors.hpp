#pragma once

#include <stdexcept>
#include <string>

namespace dsm {

/// Machine-readable reason attached to every signalled failure.
enum class Status {
    ok,
    invalid_argument,
    parameter_out_of_range,
    degenerate,
    range_error,
    no_attracting_cycle,
    not_in_tongue,
    outside_lambda_window,
    type_ambiguous,
    no_distinguished_point,
    divergence,
    critical_angle_sign,
    cross_check_failed,
    continuation_failed,
    polish_failed,
    markov_check_failed,
    branch_inversion_failed,
    rank_cap_reached,
    io_error,
};

inline const char* to_string(Status s) {
    switch (s) {
        case Status::ok: return "ok";
        case Status::invalid_argument: return "invalid_argument";
        case Status::parameter_out_of_range: return "parameter_out_of_range";
        case Status::degenerate: return "degenerate";
        case Status::range_error: return "range_error";
        case Status::no_attracting_cycle: return "no_attracting_cycle";
        case Status::not_in_tongue: return "not_in_tongue";
        case Status::outside_lambda_window: return "outside_lambda_window";
        case Status::type_ambiguous: return "type_ambiguous";
        case Status::no_distinguished_point: return "no_distinguished_point";
        case Status::divergence: return "divergence";
        case Status::critical_angle_sign: return "critical_angle_sign";
        case Status::cross_check_failed: return "cross_check_failed";
        case Status::continuation_failed: return "continuation_failed";
        case Status::polish_failed: return "polish_failed";
        case Status::markov_check_failed: return "markov_check_failed";
        case Status::branch_inversion_failed: return "branch_inversion_failed";
        case Status::rank_cap_reached: return "rank_cap_reached";
        case Status::io_error: return "io_error";
    }
    return "unknown";
}

/// Base exception for all domain failures of the library.
class Error : public std::runtime_error {
public:
    Error(Status status, const std::string& what)
        : std::runtime_error(what), status_(status) {}

    Status status() const noexcept { return status_; }

private:
    Status status_;
};

}  // namespace dsm
