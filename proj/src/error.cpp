/*
 * Copyright 2026 The nandcam Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "nandcam/error.hpp"

namespace nandcam {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::ProgramOnRowTwice: return "ProgramOnRowTwice";
    case Errc::RowOutOfRange: return "RowOutOfRange";
    case Errc::ElementTooLong: return "ElementTooLong";
    case Errc::DontCareStored: return "DontCareStored";
    case Errc::RegionOverflow: return "RegionOverflow";
    case Errc::WrongMode: return "WrongMode";
    case Errc::KeyTooLong: return "KeyTooLong";
    case Errc::PositionOutOfRange: return "PositionOutOfRange";
    case Errc::AddressOutOfRange: return "AddressOutOfRange";
    case Errc::OffsetOutOfRange: return "OffsetOutOfRange";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::CapacityExhausted: return "CapacityExhausted";
    case Errc::ElementWiderThanSupported: return "ElementWiderThanSupported";
    case Errc::UnknownRegion: return "UnknownRegion";
    case Errc::WidthMismatch: return "WidthMismatch";
    case Errc::KeyTooWide: return "KeyTooWide";
    case Errc::NonNumericEntries: return "NonNumericEntries";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::MalformedCommand: return "MalformedCommand";
    case Errc::StaleContinuation: return "StaleContinuation";
    case Errc::MalformedTrace: return "MalformedTrace";
    case Errc::VertexIdOverflow: return "VertexIdOverflow";
    case Errc::UnknownVertex: return "UnknownVertex";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace nandcam
