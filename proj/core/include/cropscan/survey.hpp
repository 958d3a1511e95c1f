#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "cropscan/dataset.hpp"
#include "cropscan/network.hpp"
#include "cropscan/tensor.hpp"

namespace cropscan {

/// Field image swept by the simulated drone; [3,H,W] with values in [0,1].
struct FieldMosaic {
    Tensor image;
    double meters_per_pixel = 0.05;  // metadata only
};

FieldMosaic make_mosaic(Tensor image, double meters_per_pixel = 0.05);

struct TileOrigin {
    std::size_t x = 0;
    std::size_t y = 0;
};

/// Serpentine sweep: row 0 left-to-right, row 1 right-to-left, and so on.
/// Every origin admits a full tile inside the mosaic.
struct SurveyPlan {
    std::size_t tile_size = kImageSize;
    std::size_t stride = kImageSize;
    std::size_t grid_rows = 0;
    std::size_t grid_cols = 0;
    std::size_t mosaic_height = 0;
    std::size_t mosaic_width = 0;
    std::vector<TileOrigin> origins;  // serpentine order
};

/// Tiles of size 50 at the given stride (1..50). The mosaic must fit at
/// least one tile.
SurveyPlan plan_survey(const FieldMosaic& mosaic, std::size_t stride);

struct TileResult {
    TileOrigin origin;
    ClassId label = ClassId::Anthracnose;
    double confidence = 0.0;
    std::size_t row = 0;
    std::size_t col = 0;
};

struct DiseaseMap {
    std::size_t grid_rows = 0;
    std::size_t grid_cols = 0;
    std::size_t stride = 0;
    std::size_t tile_size = 0;
    std::size_t mosaic_height = 0;
    std::size_t mosaic_width = 0;
    std::vector<TileResult> tiles;  // serpentine order
    /// Per-pixel class of the covering tile, painted in sweep order
    /// (last-written wins for overlapping strides); -1 where uncovered.
    std::vector<int> pixel_labels;
    std::array<std::size_t, kClassCount> tile_counts{};
    /// Fraction of covered pixels per class; sums to 1.
    std::array<double, kClassCount> area_fractions{};
    double healthy_fraction = 0.0;
    double diseased_fraction = 0.0;

    const TileResult& tile(std::size_t row, std::size_t col) const;
};

/// Classifies every planned tile with the network. Deterministic given
/// (mosaic, plan, parameters); the per-tile grid does not depend on the
/// sweep direction.
DiseaseMap run_survey(const FieldMosaic& mosaic, const SurveyPlan& plan,
                      const Network& network);

/// Fixed display color per class, 8-bit RGB.
std::array<unsigned char, 3> class_color(ClassId id);

/// Per-pixel false-color raster of the map; uncovered pixels are black.
Tensor map_raster(const DiseaseMap& map);

/// JSON with grid dimensions, stride, per-tile records in sweep order,
/// area fractions and the healthy/diseased summary.
std::string map_report_json(const DiseaseMap& map);

/// Writes the raster (by extension: .ppm or .png) and the JSON report.
void render_map(const DiseaseMap& map, const std::filesystem::path& raster_path,
                const std::filesystem::path& report_path);

/// Grid-composes equally sized [3,50,50] tiles, row-major.
Tensor compose_mosaic(const std::vector<Tensor>& tiles, std::size_t grid_cols);

}  // namespace cropscan
