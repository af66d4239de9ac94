#include "ltdet/checkpoint.hpp"

#include <cstdio>
#include <fstream>

#include "ltdet/dataset_io.hpp"
#include "ltdet/errors.hpp"

namespace ltdet {

using nlohmann::json;

std::string fnv1a_hex(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

json matrix_json(const Eigen::MatrixXd& m) {
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            flat.push_back(m(r, c));
        }
    }
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", flat}};
}

Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols) {
    if (j.at("rows").get<Eigen::Index>() != rows || j.at("cols").get<Eigen::Index>() != cols) {
        throw DataError("checkpoint: weight array shape does not match architecture");
    }
    const auto flat = j.at("data").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(flat.size()) != rows * cols) {
        throw DataError("checkpoint: weight array has wrong element count");
    }
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = flat[static_cast<std::size_t>(r * cols + c)];
        }
    }
    return m;
}

json head_json(const HeadParams& p) {
    return {{"w1", matrix_json(p.w1)}, {"b1", matrix_json(p.b1)}, {"w2", matrix_json(p.w2)},
            {"b2", matrix_json(p.b2)}, {"wc", matrix_json(p.wc)}, {"bc", matrix_json(p.bc)},
            {"wr", matrix_json(p.wr)}, {"br", matrix_json(p.br)}};
}

HeadParams head_from_json(const json& j, std::size_t d, std::size_t h, std::size_t c) {
    HeadParams p = HeadParams::zeros(d, h, c);
    p.w1 = matrix_from_json(j.at("w1"), p.w1.rows(), p.w1.cols());
    p.b1 = matrix_from_json(j.at("b1"), p.b1.rows(), 1);
    p.w2 = matrix_from_json(j.at("w2"), p.w2.rows(), p.w2.cols());
    p.b2 = matrix_from_json(j.at("b2"), p.b2.rows(), 1);
    p.wc = matrix_from_json(j.at("wc"), p.wc.rows(), p.wc.cols());
    p.bc = matrix_from_json(j.at("bc"), p.bc.rows(), 1);
    p.wr = matrix_from_json(j.at("wr"), p.wr.rows(), p.wr.cols());
    p.br = matrix_from_json(j.at("br"), p.br.rows(), 1);
    return p;
}

}  // namespace

json checkpoint_to_json(const Checkpoint& ckpt) {
    const TrainedHeads& h = ckpt.heads;
    json heads = json::array();
    for (const HeadParams& p : h.params) {
        heads.push_back(head_json(p));
    }
    const HeadParams& first = h.params.at(0);
    return {{"format", "ltdet-checkpoint"},
            {"version", kCheckpointFormatVersion},
            {"mode", to_string(h.mode)},
            {"seed", ckpt.seed},
            {"config_hash", ckpt.config_hash},
            {"architecture",
             {{"feature_dim", first.feature_dim()},
              {"hidden", first.hidden()},
              {"num_classes", first.num_classes()},
              {"num_heads", h.params.size()}}},
            {"epoch_losses", h.epoch_losses},
            {"heads", std::move(heads)}};
}

Checkpoint checkpoint_from_json(const json& j) {
    try {
        if (j.at("format").get<std::string>() != "ltdet-checkpoint" ||
            j.at("version").get<int>() != kCheckpointFormatVersion) {
            throw DataError("checkpoint: unsupported format");
        }
        Checkpoint ckpt;
        ckpt.heads.mode = train_mode_from_string(j.at("mode").get<std::string>());
        ckpt.seed = j.at("seed").get<std::uint64_t>();
        ckpt.config_hash = j.at("config_hash").get<std::string>();
        const json& arch = j.at("architecture");
        const auto d = arch.at("feature_dim").get<std::size_t>();
        const auto hidden = arch.at("hidden").get<std::size_t>();
        const auto c = arch.at("num_classes").get<std::size_t>();
        const json& heads = j.at("heads");
        if (heads.size() != num_heads(ckpt.heads.mode)) {
            throw DataError("checkpoint: head count does not match mode");
        }
        for (const json& hj : heads) {
            ckpt.heads.params.push_back(head_from_json(hj, d, hidden, c));
        }
        ckpt.heads.epoch_losses = j.value("epoch_losses", std::vector<double>{});
        return ckpt;
    } catch (const DataError&) {
        throw;
    } catch (const std::exception& e) {
        throw DataError(std::string("checkpoint: ") + e.what());
    }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    write_file_atomic(path, checkpoint_to_json(ckpt).dump(1) + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open checkpoint " + path.string());
    }
    try {
        return checkpoint_from_json(json::parse(in));
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

}  // namespace ltdet
