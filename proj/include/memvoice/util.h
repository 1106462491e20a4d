// memvoice/util.h
//
// Copyright 2026 memvoice authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace memvoice {

// Shortest decimal form that parses back to the same double ("%.17g").
std::string format_double(double v);

// log(exp(a) + exp(b)) without overflow; handles -inf sentinels.
double log_sum_exp(double a, double b);

constexpr double kLogZero = -1e300;  // safe -inf stand-in for lattice cells

// SplitMix64-style mixing for deriving independent stream seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// MEMVOICE_THREADS, clamped to [1, hardware_concurrency]; 0/unset -> hardware.
int worker_count();

std::vector<std::string> split_ws(const std::string& line);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace memvoice
