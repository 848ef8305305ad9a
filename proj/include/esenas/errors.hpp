// Copyright 2026 The ES-ENAS Authors.
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

#ifndef ESENAS_ERRORS_HPP_
#define ESENAS_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace esenas {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define ESENAS_DEFINE_ERROR(Name)          \
  class Name : public Error {              \
   public:                                 \
    using Error::Error;                    \
  }

ESENAS_DEFINE_ERROR(ParseError);
ESENAS_DEFINE_ERROR(SchemaViolation);
ESENAS_DEFINE_ERROR(SpaceMismatch);
ESENAS_DEFINE_ERROR(RangeError);
ESENAS_DEFINE_ERROR(MutationImpossible);
ESENAS_DEFINE_ERROR(TooLarge);
ESENAS_DEFINE_ERROR(DimensionMismatch);
ESENAS_DEFINE_ERROR(UnknownId);
ESENAS_DEFINE_ERROR(NonFiniteActivation);
ESENAS_DEFINE_ERROR(NonFiniteObjective);
ESENAS_DEFINE_ERROR(NonFiniteUpdate);
ESENAS_DEFINE_ERROR(EmptyBatch);
ESENAS_DEFINE_ERROR(GenomeSpaceMismatch);
ESENAS_DEFINE_ERROR(WeightLengthMismatch);
ESENAS_DEFINE_ERROR(BadSupport);
ESENAS_DEFINE_ERROR(ConfigError);

#undef ESENAS_DEFINE_ERROR

}  // namespace esenas

#endif  // ESENAS_ERRORS_HPP_
