// Copyright 2026 The depar Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Program and profile files. Both are JSON documents carrying
// "format_version": 1; unknown fields are rejected. See
// schema/program.schema.json and schema/profile.schema.json.

#ifndef DEPAR_IR_JSON_HPP_
#define DEPAR_IR_JSON_HPP_

#include <string>
#include <string_view>

#include "depar/ir.hpp"
#include "json.hpp"

namespace depar {

inline constexpr int kProgramFormatVersion = 1;
inline constexpr int kProfileFormatVersion = 1;

// Parses and finalizes a program. Throws ParseError.
Program parse_program(std::string_view text);
Profile parse_profile(std::string_view text);

nlohmann::json program_to_json(const Program& program);
nlohmann::json profile_to_json(const Profile& profile);

// Shared helpers for the other file formats.
namespace json_io {

// Parses JSON text, mapping syntax errors to ParseError with line/column.
nlohmann::json parse_text(std::string_view text);

// Rejects any key of obj (at pointer path) not listed in allowed.
void check_keys(const nlohmann::json& obj, std::string_view path,
                std::initializer_list<std::string_view> allowed);

void check_version(const nlohmann::json& doc, int expected, std::string_view what);

// Canonical byte serialisation used for every file we write.
std::string dump(const nlohmann::json& doc);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace json_io

}  // namespace depar

#endif  // DEPAR_IR_JSON_HPP_
