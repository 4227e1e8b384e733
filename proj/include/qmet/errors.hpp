#pragma once

#include <stdexcept>
#include <string>

namespace qmet {

// Caller-side misuse: negative energies, bad mode indices, malformed states.
struct domain_error : std::runtime_error {
    explicit domain_error(const std::string& what) : std::runtime_error(what) {}
};

// A closed-form expression was requested at a parameter point where it is
// genuinely singular (z=0 identity channel, N=0 reference limits, ...).
// The message always names the offending limit.
struct singular_parameter_error : domain_error {
    explicit singular_parameter_error(const std::string& what) : domain_error(what) {}
};

// The SLD linear system is (near-)singular: some symplectic eigenvalue of the
// channel output is within the near-pure gate of 1/2, so the state is not
// strictly mixed and the superoperator D cannot be inverted reliably.
struct singular_d_error : domain_error {
    explicit singular_d_error(const std::string& what) : domain_error(what) {}
};

}  // namespace qmet
