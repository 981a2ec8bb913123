#pragma once

#include "amf/field.hpp"
#include "amf/posterior.hpp"

#include <string>

namespace amf {

/// AMFF float-field format: ASCII header "AMFF\n<width> <height>\n" followed
/// by width*height IEEE-754 binary32 values, little-endian, row-major, top
/// row first.
void amff_write(const std::string& path, const ScalarField& f);
ScalarField amff_read(const std::string& path);

void amff_write(const std::string& path, const ProbabilityField& p);
ProbabilityField amff_read_probability(const std::string& path);

/// Binary PGM (P5, maxval 255). Labels are stored as 0/255; on read any
/// value >= 128 maps to 1.
void pgm_write(const std::string& path, const LabelField& z);
void pgm_write(const std::string& path, const ScalarField& gray);  // clamped to [0,255]
LabelField pgm_read_labels(const std::string& path);
ScalarField pgm_read(const std::string& path);

/// Gibbs sample file: header "AMFS\n<width> <height> <count>\n" then count
/// bit-packed labelings, row-major, 8 pixels per byte MSB first, each row
/// zero-padded to a whole byte.
void samples_write(const std::string& path, const SampleSet& samples);
SampleSet samples_read(const std::string& path);

/// Writes via a temporary file in the same directory plus an atomic rename.
void atomic_write_bytes(const std::string& path, const std::string& bytes);

}  // namespace amf
