#pragma once

#include <stdexcept>
#include <string>

namespace ashock {

/// Base class for all solver errors. `kind()` is a stable machine-readable tag
/// used by the CLI to report the failing stage.
class error : public std::runtime_error {
public:
    error(std::string kind, const std::string& msg)
        : std::runtime_error(kind + ": " + msg), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define ASHOCK_DEFINE_ERROR(name, tag)                                     \
    class name : public error {                                            \
    public:                                                                \
        explicit name(const std::string& msg) : error(tag, msg) {}         \
    }

ASHOCK_DEFINE_ERROR(domain_error, "domain");
ASHOCK_DEFINE_ERROR(degenerate_shock_error, "degenerate-shock");
ASHOCK_DEFINE_ERROR(wrong_branch_error, "wrong-branch");
ASHOCK_DEFINE_ERROR(vacuum_error, "vacuum");
ASHOCK_DEFINE_ERROR(window_error, "window");
ASHOCK_DEFINE_ERROR(integration_error, "integration");
ASHOCK_DEFINE_ERROR(range_error, "range");
ASHOCK_DEFINE_ERROR(construction_error, "construction");
ASHOCK_DEFINE_ERROR(bracket_error, "bracket");
ASHOCK_DEFINE_ERROR(degenerate_phi_error, "degenerate-phi");
ASHOCK_DEFINE_ERROR(taper_error, "taper");
ASHOCK_DEFINE_ERROR(interval_error, "interval");
ASHOCK_DEFINE_ERROR(cfl_error, "cfl");
ASHOCK_DEFINE_ERROR(blowup_error, "blowup");
ASHOCK_DEFINE_ERROR(config_error, "config");
ASHOCK_DEFINE_ERROR(stage_error, "stage");

#undef ASHOCK_DEFINE_ERROR

} // namespace ashock
