#pragma once

#include <stdexcept>
#include <string>

namespace entest {

//! Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class EmptyDataError : public Error
{
public:
  explicit EmptyDataError(const std::string& what = "dataset is empty")
    : Error(what)
  {}
};

class InvalidParamError : public Error
{
public:
  using Error::Error;
};

class DimensionError : public Error
{
public:
  using Error::Error;
};

class UnreachableMassError : public Error
{
public:
  using Error::Error;
};

class GridTooSmallError : public Error
{
public:
  using Error::Error;
};

class ProblemTooLargeError : public Error
{
public:
  using Error::Error;
};

class InsufficientDataError : public Error
{
public:
  using Error::Error;
};

} // namespace entest
