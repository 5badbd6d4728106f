#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "nodemetry/nifti_io.hpp"
#include "nodemetry/volume.hpp"

namespace nodemetry::cli {

enum ExitCode : int { kOk = 0, kValidationFailure = 1, kIoFailure = 2 };

/// Entry point shared by the `nodemetry` binary and the tests. `args`
/// excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

enum class MaskMode { kAuto, kBinary, kClass };

/// Lymph-node mask from a stored volume: kBinary keeps nonzero voxels,
/// kClass keeps voxels equal to `ln_class`, kAuto picks kBinary when every
/// value is 0 or 1 and kClass otherwise.
MaskVolume mask_from_image(nifti::Image image, MaskMode mode, int ln_class);

/// File name without ".nii" / ".nii.gz".
std::string volume_stem(const std::string& filename);

}  // namespace nodemetry::cli
