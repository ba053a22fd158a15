/*
 * (C) Copyright 2026 The varlab Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace varlab {

/// Shortest decimal text that reads back to the same double; "nan", "inf".
std::string formatDouble(double v);

// -----------------------------------------------------------------------------
/// Comma-separated output with a header row.  Fields are written as given;
/// callers keep them free of commas.
class CsvWriter {
 public:
  CsvWriter(const std::string & path, std::initializer_list<std::string_view> header);

  class Row {
   public:
    explicit Row(CsvWriter & w) : w_(w) {}
    Row & operator<<(double v);
    Row & operator<<(int v);
    Row & operator<<(long v);
    Row & operator<<(unsigned long v);
    Row & operator<<(bool v);
    Row & operator<<(std::string_view v);
    Row & operator<<(const char * v) {return *this << std::string_view(v);}
    Row & operator<<(const std::string & v) {return *this << std::string_view(v);}
    ~Row();

   private:
    void field(std::string_view text);
    CsvWriter & w_;
    std::string line_;
    bool first_ = true;
  };

  Row row() {return Row(*this);}
  const std::string & path() const {return path_;}
  void close();

 private:
  std::string path_;
  std::ofstream out_;
};

/// Reads a whole CSV file as rows of fields (no quoting).
std::vector<std::vector<std::string>> readCsv(const std::string & path);

}  // namespace varlab
