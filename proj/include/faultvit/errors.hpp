// Copyright (c) 2026 the faultvit authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace faultvit {

// Base of all library errors. The three direct children map onto CLI exit
// codes: ConfigError -> 2 (usage), DataError -> 3 (data), NumericError -> 4.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : Error {
  using Error::Error;
};

struct DataError : Error {
  using Error::Error;
};

struct NumericError : Error {
  using Error::Error;
};

// signal_io
struct UnreadableFile : DataError {
  using DataError::DataError;
};
struct MalformedHeader : DataError {
  using DataError::DataError;
};
struct VariableNotFound : DataError {
  using DataError::DataError;
};
struct UnsupportedMatFeature : DataError {
  using DataError::DataError;
};
struct EmptySignal : DataError {
  using DataError::DataError;
};
struct InsufficientData : DataError {
  using DataError::DataError;
};
struct IoError : DataError {
  using DataError::DataError;
};

// synth_gen
struct InvalidSpec : DataError {
  using DataError::DataError;
};

// stft
struct NotPowerOfTwo : DataError {
  using DataError::DataError;
};
struct SignalTooShort : DataError {
  using DataError::DataError;
};
struct InvalidParams : DataError {
  using DataError::DataError;
};
struct DegenerateSpectrogram : DataError {
  using DataError::DataError;
};

// tensor_autodiff / vit_model
struct ShapeMismatch : DataError {
  using DataError::DataError;
};
struct IndivisibleImage : DataError {
  using DataError::DataError;
};
struct LabelOutOfRange : DataError {
  using DataError::DataError;
};
struct NonScalarLoss : DataError {
  using DataError::DataError;
};

// trainer / evaluator
struct EmptyTrainSet : DataError {
  using DataError::DataError;
};
struct EmptyDataset : DataError {
  using DataError::DataError;
};
struct DivergedLoss : NumericError {
  using NumericError::NumericError;
};
struct LengthMismatch : DataError {
  using DataError::DataError;
};
struct EmptyInput : DataError {
  using DataError::DataError;
};
struct IdOutOfRange : DataError {
  using DataError::DataError;
};
struct ConfigMismatch : DataError {
  using DataError::DataError;
};

}  // namespace faultvit
