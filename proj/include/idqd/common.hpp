#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace idqd {

/// Point or vector in device coordinates. Lengths are nanometres throughout.
using Vec3 = std::array<double, 3>;

using Index = std::size_t;

enum class Axis : int { x = 0, y = 1, z = 2 };

inline constexpr int to_int(Axis a) noexcept { return static_cast<int>(a); }

inline char axis_name(Axis a) noexcept { return "xyz"[to_int(a)]; }

inline Axis axis_from_char(char c)
{
    switch (c)
    {
        case 'x': case 'X': return Axis::x;
        case 'y': case 'Y': return Axis::y;
        case 'z': case 'Z': return Axis::z;
        default: break;
    }
    throw std::invalid_argument(std::string("unknown axis '") + c + "'");
}

inline double dot(Vec3 const& a, Vec3 const& b) noexcept
{
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline Vec3 cross(Vec3 const& a, Vec3 const& b) noexcept
{
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline double norm(Vec3 const& a) noexcept { return std::sqrt(dot(a, a)); }

inline Vec3 operator-(Vec3 const& a, Vec3 const& b) noexcept
{
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

inline Vec3 operator+(Vec3 const& a, Vec3 const& b) noexcept
{
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}

inline Vec3 operator*(double s, Vec3 const& a) noexcept { return {s * a[0], s * a[1], s * a[2]}; }

//---------------------------------------------------------------------------//
// Error hierarchy. Every failure surfaced by the library derives from Error so
// callers (the CLI in particular) can map them onto exit codes.
//---------------------------------------------------------------------------//
class Error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

//! Malformed config text; carries the 1-based line (0 if unknown) and field path.
class ParseError : public Error
{
  public:
    ParseError(std::string const& msg, std::size_t line, std::string field)
        : Error(format(msg, line, field)), line_(line), field_(std::move(field))
    {
    }

    std::size_t line() const noexcept { return line_; }
    std::string const& field() const noexcept { return field_; }

  private:
    static std::string format(std::string const& msg, std::size_t line, std::string const& field)
    {
        std::string out = "parse error";
        if (line > 0) out += " at line " + std::to_string(line);
        if (!field.empty()) out += " in field '" + field + "'";
        return out + ": " + msg;
    }

    std::size_t line_;
    std::string field_;
};

class ValidationError : public Error
{
  public:
    using Error::Error;
};

class DomainError : public Error
{
  public:
    using Error::Error;
};

class MeshError : public Error
{
  public:
    using Error::Error;
};

class GeometryError : public Error
{
  public:
    using Error::Error;
};

class SolverError : public Error
{
  public:
    using Error::Error;
};

}  // namespace idqd
