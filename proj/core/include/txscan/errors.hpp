// Copyright 2026 The txscan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace txscan {

/// Base class for every txscan-specific failure. CLI maps subclasses to
/// exit codes: usage problems exit 1, data problems exit 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define TXSCAN_DEFINE_ERROR(NAME)                    \
  class NAME : public Error {                        \
   public:                                           \
    using Error::Error;                              \
  }

// trace ingestion
TXSCAN_DEFINE_ERROR(SchemaError);
TXSCAN_DEFINE_ERROR(DepthError);
TXSCAN_DEFINE_ERROR(EmptyDataset);

// tokenizer
TXSCAN_DEFINE_ERROR(ParseError);
TXSCAN_DEFINE_ERROR(CapacityError);
TXSCAN_DEFINE_ERROR(UnknownId);

// nn core
TXSCAN_DEFINE_ERROR(OddDimension);
TXSCAN_DEFINE_ERROR(ShapeError);
TXSCAN_DEFINE_ERROR(InvalidBlock);
TXSCAN_DEFINE_ERROR(SequenceTooLong);
TXSCAN_DEFINE_ERROR(NoMaskedPositions);
TXSCAN_DEFINE_ERROR(RangeError);

// training
TXSCAN_DEFINE_ERROR(NoEligiblePositions);
TXSCAN_DEFINE_ERROR(PositionOutOfRange);
TXSCAN_DEFINE_ERROR(EmptyCorpus);
TXSCAN_DEFINE_ERROR(DivergenceError);
TXSCAN_DEFINE_ERROR(IOError);
TXSCAN_DEFINE_ERROR(CorruptCheckpoint);

// detection
TXSCAN_DEFINE_ERROR(WrongAttentionMode);
TXSCAN_DEFINE_ERROR(EmptySequence);
TXSCAN_DEFINE_ERROR(TooFewEmbeddings);
TXSCAN_DEFINE_ERROR(EmptyTrainSet);
TXSCAN_DEFINE_ERROR(InvalidGamma);

// baselines
TXSCAN_DEFINE_ERROR(TooFewSamples);
TXSCAN_DEFINE_ERROR(DegenerateData);
TXSCAN_DEFINE_ERROR(DimensionMismatch);

// evaluation
TXSCAN_DEFINE_ERROR(DuplicateTxId);

// synthesis
TXSCAN_DEFINE_ERROR(NotApplicable);

#undef TXSCAN_DEFINE_ERROR

}  // namespace txscan
