/*
 * (C) Copyright 2026 The varlab Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "varlab/Csv.h"

#include <charconv>
#include <cmath>
#include <sstream>

#include "varlab/Exceptions.h"

namespace varlab {

std::string formatDouble(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// -----------------------------------------------------------------------------

CsvWriter::CsvWriter(const std::string & path, std::initializer_list<std::string_view> header)
  : path_(path), out_(path, std::ios::binary | std::ios::trunc)
{
  if (!out_) throw IoError("cannot write " + path);
  bool first = true;
  for (auto h : header) {
    if (!first) out_ << ',';
    out_ << h;
    first = false;
  }
  out_ << '\n';
}

void CsvWriter::close() {
  out_.close();
  if (out_.fail()) throw IoError("failed writing " + path_);
}

CsvWriter::Row & CsvWriter::Row::operator<<(double v) {field(formatDouble(v)); return *this;}
CsvWriter::Row & CsvWriter::Row::operator<<(int v) {field(std::to_string(v)); return *this;}
CsvWriter::Row & CsvWriter::Row::operator<<(long v) {field(std::to_string(v)); return *this;}
CsvWriter::Row & CsvWriter::Row::operator<<(unsigned long v) {
  field(std::to_string(v));
  return *this;
}
CsvWriter::Row & CsvWriter::Row::operator<<(bool v) {field(v ? "true" : "false"); return *this;}
CsvWriter::Row & CsvWriter::Row::operator<<(std::string_view v) {field(v); return *this;}

void CsvWriter::Row::field(std::string_view text) {
  if (!first_) line_ += ',';
  line_ += text;
  first_ = false;
}

CsvWriter::Row::~Row() {
  w_.out_ << line_ << '\n';
}

// -----------------------------------------------------------------------------

std::vector<std::vector<std::string>> readCsv(const std::string & path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace varlab
