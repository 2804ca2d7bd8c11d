#pragma once

#include <stdexcept>
#include <string>

namespace mlgp {

struct ShapeMismatch : std::runtime_error {
    explicit ShapeMismatch(const std::string& what) : std::runtime_error("ShapeMismatch: " + what) {}
};

struct NotPositiveDefinite : std::runtime_error {
    explicit NotPositiveDefinite(const std::string& what)
        : std::runtime_error("NotPositiveDefinite: " + what) {}
};

struct NonScalarRoot : std::runtime_error {
    explicit NonScalarRoot(const std::string& what) : std::runtime_error("NonScalarRoot: " + what) {}
};

struct NegativeVariance : std::runtime_error {
    explicit NegativeVariance(const std::string& what)
        : std::runtime_error("NegativeVariance: " + what) {}
};

struct UnsupportedValue : std::runtime_error {
    explicit UnsupportedValue(const std::string& what)
        : std::runtime_error("UnsupportedValue: " + what) {}
};

struct InvalidConfig : std::runtime_error {
    explicit InvalidConfig(const std::string& what) : std::runtime_error("InvalidConfig: " + what) {}
};

struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error("ParseError: " + what) {}
};

struct SchemaMismatch : std::runtime_error {
    explicit SchemaMismatch(const std::string& what)
        : std::runtime_error("SchemaMismatch: " + what) {}
};

struct EmptySchema : std::runtime_error {
    explicit EmptySchema(const std::string& what) : std::runtime_error("EmptySchema: " + what) {}
};

struct NonFiniteGradient : std::runtime_error {
    explicit NonFiniteGradient(const std::string& what)
        : std::runtime_error("NonFiniteGradient: " + what) {}
};

struct EntryNotHeldOut : std::runtime_error {
    explicit EntryNotHeldOut(const std::string& what)
        : std::runtime_error("EntryNotHeldOut: " + what) {}
};

struct DegenerateInput : std::runtime_error {
    explicit DegenerateInput(const std::string& what)
        : std::runtime_error("DegenerateInput: " + what) {}
};

struct MissingLabelColumn : std::runtime_error {
    explicit MissingLabelColumn(const std::string& what)
        : std::runtime_error("MissingLabelColumn: " + what) {}
};

}  // namespace mlgp
