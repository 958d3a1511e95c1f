#include "cropscan/survey.hpp"

#include <fstream>

#include <json.hpp>

#include "cropscan/image_io.hpp"

namespace cropscan {

FieldMosaic make_mosaic(Tensor image, double meters_per_pixel) {
    if (image.rank() != 3 || image.extent(0) != 3)
        throw ShapeError("mosaic must be [3,H,W], got " +
                         shape_to_string(image.shape()));
    for (std::size_t i = 0; i < image.size(); ++i)
        if (!(image[i] >= 0.0 && image[i] <= 1.0))
            throw DomainError("mosaic pixel values must lie in [0,1]");
    return FieldMosaic{std::move(image), meters_per_pixel};
}

SurveyPlan plan_survey(const FieldMosaic& mosaic, std::size_t stride) {
    const std::size_t h = mosaic.image.extent(1);
    const std::size_t w = mosaic.image.extent(2);
    if (h < kImageSize || w < kImageSize)
        throw InputError("mosaic " + std::to_string(w) + "x" +
                         std::to_string(h) + " is smaller than one tile");
    if (stride < 1 || stride > kImageSize)
        throw InputError("stride must lie in [1, 50]");

    SurveyPlan plan;
    plan.stride = stride;
    plan.mosaic_height = h;
    plan.mosaic_width = w;
    plan.grid_rows = (h - kImageSize) / stride + 1;
    plan.grid_cols = (w - kImageSize) / stride + 1;
    plan.origins.reserve(plan.grid_rows * plan.grid_cols);
    for (std::size_t row = 0; row < plan.grid_rows; ++row) {
        for (std::size_t j = 0; j < plan.grid_cols; ++j) {
            // serpentine: odd rows run right-to-left
            const std::size_t col =
                (row % 2 == 0) ? j : plan.grid_cols - 1 - j;
            plan.origins.push_back({col * stride, row * stride});
        }
    }
    return plan;
}

const TileResult& DiseaseMap::tile(std::size_t row, std::size_t col) const {
    for (const auto& t : tiles)
        if (t.row == row && t.col == col) return t;
    throw InputError("tile (" + std::to_string(row) + "," +
                     std::to_string(col) + ") outside the grid");
}

DiseaseMap run_survey(const FieldMosaic& mosaic, const SurveyPlan& plan,
                      const Network& network) {
    const std::size_t h = mosaic.image.extent(1);
    const std::size_t w = mosaic.image.extent(2);
    if (plan.mosaic_height != h || plan.mosaic_width != w)
        throw InputError("survey plan was made for a different mosaic");
    const auto& input_shape = network.config().input_shape;
    if (input_shape[0] != 3 || input_shape[1] != plan.tile_size ||
        input_shape[2] != plan.tile_size)
        throw InputError("network input shape does not match the tile size");

    DiseaseMap map;
    map.grid_rows = plan.grid_rows;
    map.grid_cols = plan.grid_cols;
    map.stride = plan.stride;
    map.tile_size = plan.tile_size;
    map.mosaic_height = h;
    map.mosaic_width = w;
    map.pixel_labels.assign(h * w, -1);
    map.tiles.reserve(plan.origins.size());

    const std::size_t plane = h * w;
    Tensor tile({3, plan.tile_size, plan.tile_size});
    Activations acts;
    for (const TileOrigin& origin : plan.origins) {
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t y = 0; y < plan.tile_size; ++y) {
                const double* src = mosaic.image.data() + c * plane +
                                    (origin.y + y) * w + origin.x;
                double* dst = tile.data() +
                              (c * plan.tile_size + y) * plan.tile_size;
                std::copy_n(src, plan.tile_size, dst);
            }
        const Prediction pred = network.predict(tile, acts);

        TileResult result;
        result.origin = origin;
        result.label = to_class(pred.label);
        result.confidence = pred.confidence;
        result.row = origin.y / plan.stride;
        result.col = origin.x / plan.stride;
        map.tile_counts[static_cast<std::size_t>(result.label)]++;

        for (std::size_t y = 0; y < plan.tile_size; ++y) {
            int* row = map.pixel_labels.data() + (origin.y + y) * w + origin.x;
            for (std::size_t x = 0; x < plan.tile_size; ++x)
                row[x] = pred.label;
        }
        map.tiles.push_back(result);
    }

    std::size_t covered = 0;
    std::array<std::size_t, kClassCount> pixel_counts{};
    for (const int label : map.pixel_labels) {
        if (label < 0) continue;
        ++covered;
        pixel_counts[static_cast<std::size_t>(label)]++;
    }
    for (std::size_t k = 0; k < kClassCount; ++k) {
        map.area_fractions[k] = covered == 0
                                    ? 0.0
                                    : static_cast<double>(pixel_counts[k]) /
                                          static_cast<double>(covered);
        if (is_healthy(to_class(int(k))))
            map.healthy_fraction += map.area_fractions[k];
        else
            map.diseased_fraction += map.area_fractions[k];
    }
    return map;
}

std::array<unsigned char, 3> class_color(ClassId id) {
    static constexpr std::array<std::array<unsigned char, 3>, kClassCount>
        kPalette = {{
            {204, 31, 31},   // Anthracnose: red
            {242, 166, 26},  // Bacterial Wilt: orange
            {153, 102, 51},  // Belly Rot: brown
            {140, 26, 166},  // Downy Mildew: purple
            {242, 230, 51},  // Pythium Fruit Rot: yellow
            {38, 77, 217},   // Gummy Stem Blight: blue
            {38, 191, 64},   // Fresh Leaves: green
            {26, 217, 191},  // Fresh Cucumber: teal
        }};
    return kPalette[static_cast<std::size_t>(id)];
}

Tensor map_raster(const DiseaseMap& map) {
    const std::size_t h = map.mosaic_height;
    const std::size_t w = map.mosaic_width;
    const std::size_t plane = h * w;
    Tensor raster({3, h, w});
    for (std::size_t i = 0; i < plane; ++i) {
        const int label = map.pixel_labels[i];
        if (label < 0) continue;  // uncovered stays black
        const auto color = class_color(to_class(label));
        raster[0 * plane + i] = color[0] / 255.0;
        raster[1 * plane + i] = color[1] / 255.0;
        raster[2 * plane + i] = color[2] / 255.0;
    }
    return raster;
}

std::string map_report_json(const DiseaseMap& map) {
    nlohmann::json j;
    j["grid"] = {{"rows", map.grid_rows}, {"cols", map.grid_cols}};
    j["stride"] = map.stride;
    j["tile_size"] = map.tile_size;
    j["mosaic"] = {{"height", map.mosaic_height}, {"width", map.mosaic_width}};

    nlohmann::json tiles = nlohmann::json::array();
    for (const auto& t : map.tiles)
        tiles.push_back({{"x", t.origin.x},
                         {"y", t.origin.y},
                         {"row", t.row},
                         {"col", t.col},
                         {"class", static_cast<int>(t.label)},
                         {"class_name", class_name(t.label)},
                         {"confidence", t.confidence}});
    j["tiles"] = tiles;

    j["tile_counts"] = map.tile_counts;
    j["area_fractions"] = map.area_fractions;
    j["healthy_fraction"] = map.healthy_fraction;
    j["diseased_fraction"] = map.diseased_fraction;
    return j.dump(2);
}

void render_map(const DiseaseMap& map, const std::filesystem::path& raster_path,
                const std::filesystem::path& report_path) {
    write_image(map_raster(map), raster_path);
    std::ofstream out(report_path);
    if (!out) throw IoError("cannot open " + report_path.string() +
                            " for writing");
    out << map_report_json(map) << "\n";
    if (!out) throw IoError("report write failed: " + report_path.string());
}

Tensor compose_mosaic(const std::vector<Tensor>& tiles, std::size_t grid_cols) {
    if (tiles.empty() || grid_cols == 0)
        throw InputError("compose_mosaic needs tiles and a positive column count");
    if (tiles.size() % grid_cols != 0)
        throw InputError("tile count is not a multiple of the column count");
    const std::size_t grid_rows = tiles.size() / grid_cols;
    const std::size_t n = kImageSize;
    const std::size_t h = grid_rows * n;
    const std::size_t w = grid_cols * n;

    Tensor mosaic({3, h, w});
    for (std::size_t t = 0; t < tiles.size(); ++t) {
        const Tensor& tile = tiles[t];
        if (tile.rank() != 3 || tile.extent(0) != 3 || tile.extent(1) != n ||
            tile.extent(2) != n)
            throw ShapeError("compose_mosaic expects [3,50,50] tiles");
        const std::size_t row = t / grid_cols;
        const std::size_t col = t % grid_cols;
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t y = 0; y < n; ++y) {
                const double* src = tile.data() + (c * n + y) * n;
                double* dst = mosaic.data() + c * h * w + (row * n + y) * w +
                              col * n;
                std::copy_n(src, n, dst);
            }
    }
    return mosaic;
}

}  // namespace cropscan
